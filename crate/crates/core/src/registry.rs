//! Named test problems with known roots, and serializable majorant choices.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::density::{LipschitzDensity, PolySegment};
use crate::error::{Error, Result};
use crate::families::{
    example_model, exp_m1_minus_id, generalized_model, generalized_model_with_condition_h, holder_model, HolderParams,
};
use crate::newton::{Jacobian, Problem};
use crate::scalar::{MajorantModel, RootFindOptions};

/// Domain radius shared by the registry problems.
pub const REGISTRY_KAPPA: f64 = 1.0;

pub const PROBLEM_IDS: [&str; 5] = ["exp_quadratic_1d", "power_5_3_1d", "cubic_1d", "poly2d", "poly2d_noroot"];

fn scalar_problem<F, D>(name: &str, f: F, d: D) -> Result<Problem>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
    D: Fn(f64) -> f64 + Send + Sync + 'static,
{
    Problem::new(
        name,
        1,
        move |x: &DVector<f64>| DVector::from_element(1, f(x[0])),
        Jacobian::Analytic(Arc::new(move |x: &DVector<f64>| DMatrix::from_element(1, 1, d(x[0])))),
        REGISTRY_KAPPA,
    )?
    .with_root(DVector::zeros(1))
}

fn poly2d(with_root: bool) -> Result<Problem> {
    let p = Problem::new(
        if with_root { "poly2d" } else { "poly2d_noroot" },
        2,
        |v: &DVector<f64>| {
            let (x, y) = (v[0], v[1]);
            DVector::from_vec(vec![x + y + x * x, x - y + y * y])
        },
        Jacobian::Analytic(Arc::new(|v: &DVector<f64>| {
            DMatrix::from_row_slice(2, 2, &[1.0 + 2.0 * v[0], 1.0, 1.0, -1.0 + 2.0 * v[1]])
        })),
        REGISTRY_KAPPA,
    )?;
    if with_root {
        p.with_root(DVector::zeros(2))
    } else {
        Ok(p)
    }
}

/// Looks up a registry problem.
///
/// * `exp_quadratic_1d`: `F(x) = e^{−x} + x² − 1`
/// * `power_5_3_1d`: `F(x) = sign(x)|x|^{5/3} − x`
/// * `cubic_1d`: `F(x) = x³/3 − x`
/// * `poly2d`: `F(x, y) = (x + y + x², x − y + y²)`
/// * `poly2d_noroot`: the same map with no declared root
///
/// All roots sit at the origin; `κ = 1`.
pub fn problem(id: &str) -> Result<Problem> {
    match id {
        "exp_quadratic_1d" => scalar_problem(id, |t| (-t).exp_m1() + t * t, |t| -(-t).exp() + 2.0 * t),
        "power_5_3_1d" => scalar_problem(
            id,
            |t| t.signum() * t.abs().powf(5.0 / 3.0) - t,
            |t| 5.0 / 3.0 * t.abs().powf(2.0 / 3.0) - 1.0,
        ),
        "cubic_1d" => scalar_problem(id, |t| t * t * t / 3.0 - t, |t| t * t - 1.0),
        "poly2d" => poly2d(true),
        "poly2d_noroot" => poly2d(false),
        other => Err(Error::UnknownName { kind: "problem", name: other.to_string() }),
    }
}

/// `f(t) = e^t + t² − 2t − 1`.
///
/// Newton on `e^{−x} + x² − 1` overshoots the root from `x0 > 0`, and on
/// the negative side `|F'(x) − F'(τx)|` grows like `e^{|x|}`, so the
/// one-sided function `e^{−t} + t² − 1` is not a majorant of that problem.
/// This one bounds both sides.
pub fn exp_two_sided_model() -> MajorantModel {
    MajorantModel::new(
        "exp_two_sided",
        |t: f64| t.exp_m1() + t * t - 2.0 * t,
        |t: f64| t.exp() + 2.0 * t - 2.0,
        f64::INFINITY,
    )
    .expect("infinite domain is valid")
    .with_excess(|t: f64| exp_m1_minus_id(t) + t * t, |t: f64| t.exp_m1() + 2.0 * t)
}

/// Lipschitz density `L(u) = 2u` on `[0, 2]`.
pub fn linear_density() -> LipschitzDensity {
    LipschitzDensity::piecewise(vec![PolySegment { start: 0.0, end: 2.0, coefficients: vec![0.0, 2.0] }])
        .expect("2u is a valid density")
}

/// `‖F'(x*)⁻¹‖` and the Lipschitz constant of `F'` for `poly2d` in the spectral norm.
pub const POLY2D_INV_NORM: f64 = std::f64::consts::FRAC_1_SQRT_2;
pub const POLY2D_LIPSCHITZ: f64 = 2.0;

/// The majorant each registry problem is certified against.
pub fn matched_majorant(id: &str) -> Result<MajorantSpec> {
    match id {
        "exp_quadratic_1d" => Ok(MajorantSpec::Matched),
        "power_5_3_1d" => Ok(MajorantSpec::Example { name: "power_5_3".into(), p: None }),
        "cubic_1d" => Ok(MajorantSpec::Generalized {
            segments: Some(linear_density().segments()),
            tabulated: None,
            path: None,
            p: Some(1.0),
        }),
        "poly2d" | "poly2d_noroot" => {
            Ok(MajorantSpec::Lipschitz { l_op: POLY2D_LIPSCHITZ, inv_norm: Some(POLY2D_INV_NORM) })
        }
        other => Err(Error::UnknownName { kind: "problem", name: other.to_string() }),
    }
}

/// Tabulated density samples `(u_i, L(u_i))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedSamples {
    pub u: Vec<f64>,
    pub values: Vec<f64>,
}

/// A majorant choice in configuration form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum MajorantSpec {
    Holder {
        k: f64,
        p: f64,
    },
    /// `K = l_op·inv_norm`, `p = 1`; `inv_norm` defaults to 1.
    Lipschitz {
        l_op: f64,
        #[serde(default)]
        inv_norm: Option<f64>,
    },
    /// Exactly one of `segments`, `tabulated`, `path` (JSON segment list or two-column CSV).
    Generalized {
        #[serde(default)]
        segments: Option<Vec<PolySegment>>,
        #[serde(default)]
        tabulated: Option<TabulatedSamples>,
        #[serde(default)]
        path: Option<String>,
        #[serde(default)]
        p: Option<f64>,
    },
    Example {
        name: String,
        #[serde(default)]
        p: Option<f64>,
    },
    /// The registry majorant of the configured problem.
    Matched,
}

/// A resolved majorant, with its density when it came from one.
#[derive(Debug, Clone)]
pub struct ResolvedMajorant {
    pub model: MajorantModel,
    pub density: Option<LipschitzDensity>,
    pub holder: Option<HolderParams>,
    /// `Some(false)` when a requested condition-h exponent failed sampling.
    pub condition_h: Option<bool>,
}

impl MajorantSpec {
    /// Builds the model. `problem_id` resolves [`MajorantSpec::Matched`].
    pub fn resolve(&self, problem_id: Option<&str>) -> Result<ResolvedMajorant> {
        let plain = |model| ResolvedMajorant { model, density: None, holder: None, condition_h: None };
        match self {
            Self::Holder { k, p } => {
                let params = HolderParams::new(*k, *p)?;
                Ok(ResolvedMajorant { holder: Some(params), ..plain(holder_model(params)) })
            }
            Self::Lipschitz { l_op, inv_norm } => {
                let params = HolderParams::lipschitz(*l_op, inv_norm.unwrap_or(1.0))?;
                Ok(ResolvedMajorant { holder: Some(params), ..plain(holder_model(params)) })
            }
            Self::Generalized { segments, tabulated, path, p } => {
                let density = match (segments, tabulated, path) {
                    (Some(s), None, None) => LipschitzDensity::piecewise(s.clone())?,
                    (None, Some(t), None) => LipschitzDensity::tabulated(&t.u, &t.values)?,
                    (None, None, Some(path)) => load_density(path)?,
                    _ => {
                        return Err(Error::Domain(
                            "generalized majorant needs exactly one of segments, tabulated, path".into(),
                        ))
                    }
                };
                let (model, condition_h) = match p {
                    Some(p) => {
                        let (m, ok) = generalized_model_with_condition_h(&density, *p, &RootFindOptions::default())?;
                        (m, Some(ok))
                    }
                    None => (generalized_model(&density), None),
                };
                Ok(ResolvedMajorant { model, density: Some(density), holder: None, condition_h })
            }
            Self::Example { name, p } => Ok(plain(example_model(name, *p)?)),
            Self::Matched => {
                let id = problem_id.ok_or_else(|| Error::Domain("matched majorant needs a registry problem".into()))?;
                match id {
                    "exp_quadratic_1d" => Ok(plain(exp_two_sided_model())),
                    _ => match matched_majorant(id)? {
                        Self::Matched => unreachable!("only exp_quadratic_1d maps to itself"),
                        spec => spec.resolve(Some(id)),
                    },
                }
            }
        }
    }
}

fn load_density(path: &str) -> Result<LipschitzDensity> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Representation(format!("cannot read density file {path}: {e}")))?;
    if path.to_ascii_lowercase().ends_with(".csv") {
        LipschitzDensity::from_csv_str(&text)
    } else {
        LipschitzDensity::from_json_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::compute_radii;
    use approx::assert_relative_eq;

    #[test]
    fn registry_problems_have_roots_at_origin() {
        for id in PROBLEM_IDS {
            let p = problem(id).unwrap();
            assert_eq!(p.kappa(), REGISTRY_KAPPA);
            let zero = DVector::zeros(p.dim());
            assert!(p.residual(&zero).norm() == 0.0, "{id}");
            assert_eq!(p.x_star().is_some(), id != "poly2d_noroot");
        }
        assert!(matches!(problem("nope"), Err(Error::UnknownName { .. })));
    }

    #[test]
    fn poly2d_jacobian_at_root() {
        let p = problem("poly2d").unwrap();
        let j = p.jacobian_at(&DVector::zeros(2));
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]));
        let inv = j.try_inverse().unwrap();
        assert_relative_eq!(inv.singular_values().max(), POLY2D_INV_NORM, epsilon = 1e-15);
    }

    #[test]
    fn two_sided_exp_radii() {
        let r = compute_radii(&exp_two_sided_model(), 10.0, &RootFindOptions::default()).unwrap();
        assert_relative_eq!(r.nu, 0.3149230578454061, epsilon = 1e-11);
        assert_relative_eq!(r.rho, 0.2131454963091288, epsilon = 1e-11);
        assert_relative_eq!(r.sigma, 0.6169552876626899, epsilon = 1e-11);
    }

    #[test]
    fn matched_specs_resolve() {
        for id in PROBLEM_IDS {
            let spec = matched_majorant(id).unwrap();
            let m = spec.resolve(Some(id)).unwrap();
            m.model.verify_h1().unwrap();
        }
        let cubic = MajorantSpec::Matched.resolve(Some("cubic_1d")).unwrap();
        assert_eq!(cubic.condition_h, Some(true));
        assert_eq!(cubic.model.rate(), Some(1.0));
        let r = compute_radii(&cubic.model, 1.0, &RootFindOptions::default()).unwrap();
        assert_relative_eq!(r.rho, 0.6f64.sqrt(), epsilon = 1e-11);
    }

    #[test]
    fn spec_json_shape() {
        let spec: MajorantSpec = serde_json::from_str(r#"{"family":"holder","params":{"k":1.0,"p":1.0}}"#).unwrap();
        assert_eq!(spec, MajorantSpec::Holder { k: 1.0, p: 1.0 });
        let lip: MajorantSpec = serde_json::from_str(r#"{"family":"lipschitz","params":{"l_op":3.0}}"#).unwrap();
        let r = lip.resolve(None).unwrap();
        assert_relative_eq!(r.holder.unwrap().rho(), 2.0 / 9.0, epsilon = 1e-15);
        let m: MajorantSpec = serde_json::from_str(r#"{"family":"matched"}"#).unwrap();
        assert_eq!(m, MajorantSpec::Matched);
        assert!(MajorantSpec::Matched.resolve(None).is_err());
        let both = MajorantSpec::Generalized { segments: None, tabulated: None, path: None, p: None };
        assert!(both.resolve(None).is_err());
    }
}
