//! Run configuration: an optional JSON file overlaid by command-line flags.

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use gamow_core::exact::{self, Cq};
use gamow_core::smatrix::ComplexSpec;
use gamow_core::ComplexPole;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// config file, then to the defaults in [`RunConfig`].
#[derive(Clone, Debug, Default, Args)]
pub struct Flags {
    /// JSON run configuration (for `residue`: the model file)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Tolerance of the command's numerical check
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Pole order
    #[arg(long, global = true)]
    pub r: Option<usize>,
    /// Total order bound of the constraint system
    #[arg(long, global = true)]
    pub j: Option<usize>,
    /// Width Γ
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Resonance energy E_R
    #[arg(long, global = true)]
    pub energy: Option<f64>,
    /// Evolve W^(n)
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Evolve the single dyad |k><m|, given as `k,m`
    #[arg(long, global = true, value_parser = parse_dyad)]
    pub dyad: Option<(usize, usize)>,
    /// Drop the Γⁿ/n! prefactor of W^(n)
    #[arg(long, global = true)]
    pub no_prefactor: bool,
    #[arg(long, global = true)]
    pub t_end: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
}

fn parse_dyad(s: &str) -> Result<(usize, usize), String> {
    let (k, m) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `k,m`, got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((parse(k)?, parse(m)?))
}

/// The JSON config file. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
    pub r: Option<usize>,
    pub j: Option<usize>,
    pub gamma: Option<f64>,
    pub energy: Option<f64>,
    pub n: Option<usize>,
    pub dyad: Option<(usize, usize)>,
    pub prefactor: Option<bool>,
    /// B-form coefficients `B[m][k]` (bra order `m`, ket order `k`).
    pub coefficients: Option<Vec<Vec<ComplexSpec>>>,
    pub t_end: Option<f64>,
    pub steps: Option<usize>,
}

/// Which operator `evolve` works on.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorChoice {
    WN { n: usize, prefactor: bool },
    Dyad { ket: usize, bra: usize },
    Coefficients(Vec<Vec<Cq>>),
}

/// Time grid `t_i = t_end · i / (steps − 1)`, starting at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, steps: usize) -> anyhow::Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            bail!("t_end must be positive and finite, got {t_end}");
        }
        if steps < 2 {
            bail!("steps must be at least 2, got {steps}");
        }
        Ok(TimeGrid { t_end, steps })
    }

    pub fn t_start(&self) -> f64 {
        0.0
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let last = (self.steps - 1) as f64;
        (0..self.steps).map(move |i| self.t_end * i as f64 / last)
    }
}

/// Fully resolved settings for one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub format: Format,
    pub tol: Option<f64>,
    pub r: Option<usize>,
    pub j: Option<usize>,
    pub gamma: f64,
    pub energy: f64,
    pub operator: OperatorChoice,
    pub grid: TimeGrid,
}

pub const DEFAULT_T_END: f64 = 5.0;
pub const DEFAULT_STEPS: usize = 51;

impl RunConfig {
    /// Merges flags over the file (if any) and validates the result.
    pub fn resolve(flags: &Flags, file: Option<ConfigFile>) -> anyhow::Result<Self> {
        let file = file.unwrap_or_default();
        let coefficients = file
            .coefficients
            .map(|rows| {
                rows.iter()
                    .enumerate()
                    .map(|(m, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(k, c)| {
                                spec_to_exact(*c).with_context(|| format!("coefficients[{m}][{k}]"))
                            })
                            .collect::<anyhow::Result<Vec<_>>>()
                    })
                    .collect::<anyhow::Result<Vec<_>>>()
            })
            .transpose()?;
        let n = flags.n.or(file.n);
        let dyad = flags.dyad.or(file.dyad);
        let operator = match (n, dyad, coefficients) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => {
                bail!("choose one of n, dyad and coefficients")
            }
            (_, Some((ket, bra)), None) => OperatorChoice::Dyad { ket, bra },
            (None, None, Some(c)) => OperatorChoice::Coefficients(c),
            (n, None, None) => OperatorChoice::WN {
                n: n.unwrap_or(0),
                prefactor: !flags.no_prefactor && file.prefactor.unwrap_or(true),
            },
        };
        let tol = flags.tol.or(file.tol);
        if let Some(t) = tol {
            if !(t.is_finite() && t > 0.0) {
                bail!("tolerance must be positive, got {t}");
            }
        }
        Ok(RunConfig {
            out: flags.out.clone().or(file.out),
            format: flags.format.or(file.format).unwrap_or_default(),
            tol,
            r: flags.r.or(file.r),
            j: flags.j.or(file.j),
            gamma: flags.gamma.or(file.gamma).unwrap_or(1.0),
            energy: flags.energy.or(file.energy).unwrap_or(1.0),
            operator,
            grid: TimeGrid::new(
                flags.t_end.or(file.t_end).unwrap_or(DEFAULT_T_END),
                flags.steps.or(file.steps).unwrap_or(DEFAULT_STEPS),
            )?,
        })
    }

    /// The pole of order `order`, from the configured energy and width.
    pub fn pole(&self, order: usize) -> anyhow::Result<ComplexPole> {
        Ok(ComplexPole::new(self.energy, self.gamma, order)?)
    }
}

pub fn spec_to_exact(c: ComplexSpec) -> anyhow::Result<Cq> {
    let z = match c {
        ComplexSpec::Real(re) => Complex64::new(re, 0.0),
        ComplexSpec::Pair([re, im]) => Complex64::new(re, im),
    };
    exact::from_f64(z).context("non-finite number")
}

/// Parses JSON with the failing field path and line/column in the error.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &Path) -> anyhow::Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        anyhow::anyhow!("{}: field `{}`: {}", origin.display(), path, inner)
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_json(&text, path)
}
