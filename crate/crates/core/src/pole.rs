use crate::error::{Error, Result};
use crate::exact::{self, Cq};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Signed;

/// A resonance pole `z_R = E_R − iΓ/2` of order `r` in the lower half-plane.
///
/// Energy and width are stored as exact rationals; floats passed to
/// [`ComplexPole::new`] are converted losslessly.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPole {
    resonance_energy: BigRational,
    width: BigRational,
    order: usize,
}

impl ComplexPole {
    pub fn new(resonance_energy: f64, width: f64, order: usize) -> Result<Self> {
        let energy = exact::rational_from_f64(resonance_energy).ok_or_else(|| {
            Error::InvalidPole(format!("E_R must be finite, got {resonance_energy}"))
        })?;
        let gamma = exact::rational_from_f64(width)
            .ok_or_else(|| Error::InvalidPole(format!("Gamma must be finite, got {width}")))?;
        Self::exact(energy, gamma, order)
    }

    pub fn exact(resonance_energy: BigRational, width: BigRational, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidPole("pole order r must be at least 1".into()));
        }
        if !width.is_positive() {
            return Err(Error::InvalidPole(format!(
                "width Gamma must be positive, got {width}"
            )));
        }
        Ok(ComplexPole {
            resonance_energy,
            width,
            order,
        })
    }

    pub fn resonance_energy(&self) -> &BigRational {
        &self.resonance_energy
    }

    pub fn width(&self) -> &BigRational {
        &self.width
    }

    pub fn width_f64(&self) -> f64 {
        exact::rational_to_f64(&self.width)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `z_R = E_R − iΓ/2`, exactly.
    pub fn z_r(&self) -> Cq {
        Cq::new(
            self.resonance_energy.clone(),
            -self.width.clone() / BigRational::from_integer(2.into()),
        )
    }

    pub fn z_r_f64(&self) -> Complex64 {
        exact::to_c64(&self.z_r())
    }

    /// Same position, different order.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        Self::exact(self.resonance_energy.clone(), self.width.clone(), order)
    }

    pub(crate) fn check_order(&self, order: usize) -> Result<()> {
        if order >= self.order {
            return Err(Error::OrderOutOfRange {
                order,
                pole_order: self.order,
            });
        }
        Ok(())
    }
}

/// Rejects negative times; the semigroup only runs forward.
pub(crate) fn check_time(t: &BigRational) -> Result<()> {
    if t.is_negative() {
        return Err(Error::NegativeTime(t.to_string()));
    }
    Ok(())
}

pub(crate) fn check_time_f64(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t.to_string()));
    }
    Ok(())
}

impl std::fmt::Display for ComplexPole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let z = self.z_r_f64();
        let sign = if z.im < 0.0 { '-' } else { '+' };
        write!(
            f,
            "z_R = {} {} {}i (order {})",
            z.re,
            sign,
            z.im.abs(),
            self.order
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn z_r_lies_in_lower_half_plane() {
        let pole = ComplexPole::new(3.0, 0.5, 2).unwrap();
        assert_eq!(pole.z_r(), Cq::new(rat(3, 1), rat(-1, 4)));
        assert!(pole.z_r_f64().im < 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            ComplexPole::new(1.0, 0.0, 1),
            Err(Error::InvalidPole(_))
        ));
        assert!(matches!(
            ComplexPole::new(1.0, -1.0, 1),
            Err(Error::InvalidPole(_))
        ));
        assert!(matches!(
            ComplexPole::new(1.0, 1.0, 0),
            Err(Error::InvalidPole(_))
        ));
        assert!(matches!(
            ComplexPole::new(f64::NAN, 1.0, 1),
            Err(Error::InvalidPole(_))
        ));
    }

    #[test]
    fn negative_time_is_rejected() {
        assert!(check_time(&rat(-1, 3)).is_err());
        assert!(check_time(&rat(0, 1)).is_ok());
        assert!(check_time_f64(-1e-300).is_err());
    }
}
