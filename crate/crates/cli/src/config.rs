//! Experiment configuration files.

use std::path::{Path, PathBuf};

use majorant_newton::registry::{self, MajorantSpec};
use majorant_newton::{NewtonOptions, RootFindOptions};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Problem id used for the odd extension of the configured majorant.
pub const WORST_CASE: &str = "worst_case";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registry id, or `worst_case`.
    #[serde(default)]
    pub problem: Option<String>,
    /// Defaults to the registry majorant of `problem`.
    #[serde(default)]
    pub majorant: Option<MajorantSpec>,
    /// Overrides the domain radius of the problem.
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub x0: Option<StartSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub seed: u64,
    /// Permits sweep fractions above 1.
    #[serde(default)]
    pub allow_outside: bool,
}

/// Start points: a 1-D scalar, one vector, several vectors, or a radial sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Scalar(f64),
    Point(Vec<f64>),
    Points(Vec<Vec<f64>>),
    Radial { radial: RadialSweep },
}

/// Start points `x* + frac·r·direction`.
///
/// `fractions` lists the sweep explicitly; otherwise `count` fractions are
/// spaced evenly over `[min_frac, max_frac]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSweep {
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub min_frac: Option<f64>,
    #[serde(default)]
    pub max_frac: Option<f64>,
    #[serde(default)]
    pub fractions: Option<Vec<f64>>,
    /// Defaults to the first unit vector.
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub step_atol: f64,
    pub residual_atol: f64,
    pub max_iters: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let n = NewtonOptions::default();
        Self { step_atol: n.step_atol, residual_atol: n.residual_atol, max_iters: n.max_iters }
    }
}

impl Tolerances {
    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions { max_iters: self.max_iters, step_atol: self.step_atol, residual_atol: self.residual_atol }
    }
}

/// Output paths, relative to `--out-dir` unless absolute.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub csv_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub plot_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Failure::config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Failure::config(format!("kappa must be a positive finite number, got {k}")));
            }
        }
        if let Some(id) = &self.problem {
            if id != WORST_CASE && !registry::PROBLEM_IDS.contains(&id.as_str()) {
                return Err(Failure::config(format!(
                    "unknown problem {id:?}; expected one of {:?} or {WORST_CASE:?}",
                    registry::PROBLEM_IDS
                )));
            }
            if id == WORST_CASE && matches!(self.majorant, None | Some(MajorantSpec::Matched)) {
                return Err(Failure::config("worst_case needs an explicit majorant".to_string()));
            }
        }
        let t = &self.tolerances;
        if !(t.step_atol > 0.0 && t.residual_atol > 0.0) {
            return Err(Failure::config("tolerances must be positive".to_string()));
        }
        if let Some(StartSpec::Radial { radial }) = &self.x0 {
            radial.fractions(self.allow_outside)?;
        }
        Ok(())
    }

    /// Output path joined onto `out_dir`, or `default` when unset.
    pub fn output(&self, out_dir: &Path, chosen: &Option<PathBuf>, default: &str) -> PathBuf {
        let p = chosen.clone().unwrap_or_else(|| PathBuf::from(default));
        if p.is_absolute() {
            p
        } else {
            out_dir.join(p)
        }
    }

    pub fn root_options(&self) -> RootFindOptions {
        RootFindOptions::default()
    }
}

impl RadialSweep {
    /// Validated fractions in ascending order.
    pub fn fractions(&self, allow_outside: bool) -> Result<Vec<f64>, Failure> {
        let mut fr = match (&self.fractions, self.count) {
            (Some(list), None) => list.clone(),
            (None, Some(n)) => {
                let lo = self.min_frac.unwrap_or(0.1);
                let hi = self.max_frac.unwrap_or(1.0);
                if !(lo > 0.0 && lo <= hi) {
                    return Err(Failure::config(format!("need 0 < min_frac <= max_frac, got {lo}, {hi}")));
                }
                match n {
                    0 => return Err(Failure::config("radial count must be positive".to_string())),
                    1 => vec![hi],
                    _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
                }
            }
            _ => return Err(Failure::config("radial sweep needs exactly one of `fractions` or `count`".to_string())),
        };
        for &f in &fr {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Failure::config(format!("sweep fraction {f} must lie in (0, 1]")));
            }
            if f > 1.0 && !allow_outside {
                return Err(Failure::config(format!(
                    "sweep fraction {f} exceeds 1; set allow_outside to sweep beyond r"
                )));
            }
        }
        fr.sort_by(f64::total_cmp);
        Ok(fr)
    }
}
