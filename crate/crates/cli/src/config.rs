use std::path::PathBuf;

use bbcool::ControlBounds;
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub u1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub u2: Option<f64>,
    /// Single target gamma > 1.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "gamma_range")]
    pub gamma: Option<f64>,
    /// Inclusive grid `lo:hi:count`.
    #[arg(long, value_name = "LO:HI:COUNT")]
    pub gamma_range: Option<String>,
    /// Override the computed upper bound on the turn count.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Residual tolerance of the turn-ratio equation.
    #[arg(long, default_value_t = bbcool::synthesis::DEFAULT_TOL, allow_negative_numbers = true)]
    pub tol: f64,
    /// RK4 step of the verification oracle.
    #[arg(long, default_value_t = bbcool::oracle::DEFAULT_STEP, allow_negative_numbers = true)]
    pub step: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (directory for `curves`); stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSpec {
    Single(f64),
    Range { lo: f64, hi: f64, count: usize },
}

impl GammaSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            GammaSpec::Single(g) => vec![g],
            GammaSpec::Range { lo, count: 1, .. } => vec![lo],
            GammaSpec::Range { lo, hi, count } => (0..count)
                .map(|i| {
                    if i + 1 == count {
                        hi
                    } else {
                        lo + (hi - lo) * i as f64 / (count - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

/// Validated configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub u1: f64,
    pub u2: f64,
    pub gamma: Option<GammaSpec>,
    pub n_max_override: Option<u32>,
    pub tol: f64,
    pub step: f64,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn bounds(&self) -> ControlBounds {
        ControlBounds::new(self.u1, self.u2).expect("validated")
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.gamma.as_ref().map(GammaSpec::values).unwrap_or_default()
    }

    pub fn single_gamma(&self) -> Result<f64, CliError> {
        match self.gamma {
            Some(GammaSpec::Single(g)) => Ok(g),
            _ => Err(CliError::Usage("this command needs a single --gamma".into())),
        }
    }
}

pub fn parse_range(text: &str) -> Result<GammaSpec, CliError> {
    let bad = || CliError::Usage(format!("--gamma-range expects lo:hi:count, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    Ok(GammaSpec::Range { lo, hi, count })
}

fn check_gamma(g: f64) -> Result<(), CliError> {
    if g > 1.0 && g.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("gamma must be a finite number > 1, got {g}")))
    }
}

impl CommonArgs {
    /// Validates every numeric flag before any computation.
    pub fn resolve(&self, default_format: Format, need_bounds: bool) -> Result<RunConfig, CliError> {
        let bound = |name: &str, v: Option<f64>| -> Result<f64, CliError> {
            match v {
                Some(x) if x >= 1.0 && x.is_finite() => Ok(x),
                Some(x) => Err(CliError::Usage(format!("--{name} must be >= 1, got {x}"))),
                None if need_bounds => Err(CliError::Usage(format!("--{name} is required"))),
                None => Ok(f64::NAN),
            }
        };
        let u1 = bound("u1", self.u1)?;
        let u2 = bound("u2", self.u2)?;
        let gamma = match (&self.gamma, &self.gamma_range) {
            (Some(g), _) => {
                check_gamma(*g)?;
                Some(GammaSpec::Single(*g))
            }
            (None, Some(r)) => {
                let spec = parse_range(r)?;
                if let GammaSpec::Range { lo, hi, count } = spec {
                    check_gamma(lo)?;
                    check_gamma(hi)?;
                    if count == 0 || hi < lo || (count == 1 && hi != lo) {
                        return Err(CliError::Usage(format!(
                            "--gamma-range needs lo <= hi and count >= 2 (or lo = hi), got `{r}`"
                        )));
                    }
                }
                Some(spec)
            }
            (None, None) => None,
        };
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be > 0, got {}", self.tol)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::Usage(format!("--step must be > 0, got {}", self.step)));
        }
        Ok(RunConfig {
            u1,
            u2,
            gamma,
            n_max_override: self.n_max,
            tol: self.tol,
            step: self.step,
            format: self.format.unwrap_or(default_format),
            output: self.output.clone(),
        })
    }
}
