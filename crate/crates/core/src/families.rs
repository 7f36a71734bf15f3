//! Built-in majorant constructions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::LipschitzDensity;
use crate::error::{Error, Result};
use crate::scalar::{compute_nu, log_spaced, MajorantModel, RadiiReport, RootFindOptions};

/// Constants of the Hölder-like condition
/// `‖F'(x*)⁻¹[F'(x) − F'(x* + τ(x − x*))]‖ ≤ K(1 − τ^p)‖x − x*‖^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderParams {
    pub k: f64,
    pub p: f64,
}

impl HolderParams {
    pub fn new(k: f64, p: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!("Hölder constant must be positive, got {k}")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!("Hölder exponent must lie in (0, 1], got {p}")));
        }
        Ok(Self { k, p })
    }

    /// Lipschitz constant `L` of `F'` with `‖F'(x*)⁻¹‖ = inv_norm` gives `K = L·inv_norm`, `p = 1`.
    pub fn lipschitz(l_op: f64, inv_norm: f64) -> Result<Self> {
        if !(l_op > 0.0 && inv_norm > 0.0) {
            return Err(Error::Domain(format!("need L > 0 and ‖F'(x*)⁻¹‖ > 0, got {l_op} and {inv_norm}")));
        }
        Self::new(l_op * inv_norm, 1.0)
    }

    pub fn nu(&self) -> f64 {
        (1.0 / self.k).powf(1.0 / self.p)
    }

    pub fn rho(&self) -> f64 {
        ((self.p + 1.0) / ((2.0 * self.p + 1.0) * self.k)).powf(1.0 / self.p)
    }

    /// Radius `[(p+1)/K]^{1/p}` of the uniqueness ball before clipping by `κ`.
    pub fn uniqueness_radius(&self) -> f64 {
        ((self.p + 1.0) / self.k).powf(1.0 / self.p)
    }
}

/// `f(t) = K t^{p+1}/(p+1) − t`, carrying rate exponent `p`.
pub fn holder_model(params: HolderParams) -> MajorantModel {
    let HolderParams { k, p } = params;
    MajorantModel::new(
        format!("holder(K={k}, p={p})"),
        move |t: f64| k * t.powf(p + 1.0) / (p + 1.0) - t,
        move |t: f64| k * t.powf(p) - 1.0,
        f64::INFINITY,
    )
    .map(|m| m.with_excess(move |t: f64| k * t.powf(p + 1.0) / (p + 1.0), move |t: f64| k * t.powf(p)))
    .and_then(|m| m.with_rate(p))
    .expect("valid Hölder parameters give a valid model")
}

/// Closed-form radii of the Hölder family. `ρ` is optimal iff `ρ < κ`.
pub fn holder_radii(params: HolderParams, kappa: f64) -> Result<RadiiReport> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
    }
    let rho = params.rho();
    Ok(RadiiReport::assemble(
        kappa,
        params.nu(),
        rho,
        kappa.min(params.uniqueness_radius()),
        rho < kappa,
        &RootFindOptions::default(),
    ))
}

/// Best possible radius `2/(3 L ‖F'(x*)⁻¹‖)` under a Lipschitz condition on `F'`.
pub fn lipschitz_radius(l_op: f64, inv_norm: f64) -> Result<f64> {
    HolderParams::lipschitz(l_op, inv_norm)?;
    Ok(2.0 / (3.0 * l_op * inv_norm))
}

/// `f̄(t) = ∫_0^t L(u)(t − u) du − t`, `f̄'(t) = ∫_0^t L(u) du − 1`.
pub fn generalized_model(density: &LipschitzDensity) -> MajorantModel {
    let d = Arc::new(density.clone());
    let (d2, d3, d4) = (Arc::clone(&d), Arc::clone(&d), Arc::clone(&d));
    let kind = if density.is_tabulated() { "tabulated" } else { "piecewise" };
    MajorantModel::new(
        format!("generalized({kind})"),
        move |t: f64| t * d.integral(t) - d.moment(t) - t,
        move |t: f64| d2.integral(t) - 1.0,
        density.domain(),
    )
    .expect("density domain is positive")
    .with_excess(move |t: f64| t * d3.integral(t) - d3.moment(t), move |t: f64| d4.integral(t))
}

/// Sampled check that `t ↦ t^{1−p} L(t)` is nondecreasing on `(0, ν)`; ties allowed.
pub fn check_condition_h(density: &LipschitzDensity, p: f64, nu: f64, samples: usize) -> bool {
    let hi = nu.min(density.domain()) * (1.0 - 1e-9);
    let mut prev = f64::NEG_INFINITY;
    for t in log_spaced(hi * 1e-6, hi, samples) {
        let v = t.powf(1.0 - p) * density.value(t);
        if !(v >= prev) {
            return false;
        }
        prev = v;
    }
    true
}

/// Builds the generalized model and marks it with exponent `p` when condition h holds.
pub fn generalized_model_with_condition_h(
    density: &LipschitzDensity,
    p: f64,
    opts: &RootFindOptions,
) -> Result<(MajorantModel, bool)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("rate exponent must lie in [0, 1], got {p}")));
    }
    let model = generalized_model(density);
    let nu = compute_nu(&model, opts)?;
    if check_condition_h(density, p, nu, opts.hypothesis_samples) {
        Ok((model.with_rate(p)?, true))
    } else {
        Ok((model, false))
    }
}

/// Named example majorants: `power` (`t^{1+p} − t`), `power_5_3` (`p = 2/3`)
/// and `exp_quadratic` (`e^{−t} + t² − 1`).
///
/// `exp_quadratic` is marked with `p = 1` only if the third hypothesis
/// survives sampling.
pub fn example_model(name: &str, p: Option<f64>) -> Result<MajorantModel> {
    match name {
        "power" => {
            let p = p.ok_or_else(|| Error::Domain("power model needs an exponent p".into()))?;
            power_model(format!("power(p={p})"), p)
        }
        "power_5_3" => power_model("power_5_3".to_string(), 2.0 / 3.0),
        "exp_quadratic" => {
            let model = MajorantModel::new(
                "exp_quadratic",
                |t: f64| (-t).exp_m1() + t * t,
                |t: f64| -(-t).exp() + 2.0 * t,
                f64::INFINITY,
            )?
            .with_excess(|t: f64| exp_m1_minus_id(-t) + t * t, |t: f64| -(-t).exp_m1() + 2.0 * t);
            let opts = RootFindOptions::default();
            let nu = compute_nu(&model, &opts)?;
            if model.verify_h3(nu, 1.0, &opts)?.holds {
                model.with_rate(1.0)
            } else {
                Ok(model)
            }
        }
        other => Err(Error::UnknownName { kind: "example model", name: other.to_string() }),
    }
}

fn power_model(name: String, p: f64) -> Result<MajorantModel> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("power exponent must lie in (0, 1], got {p}")));
    }
    MajorantModel::new(
        name,
        move |t: f64| t.powf(1.0 + p) - t,
        move |t: f64| (1.0 + p) * t.powf(p) - 1.0,
        f64::INFINITY,
    )?
    .with_excess(move |t: f64| t.powf(1.0 + p), move |t: f64| (1.0 + p) * t.powf(p))
    .with_rate(p)
}

/// `e^x − 1 − x` without the cancellation of `expm1(x) − x` near `0`.
pub(crate) fn exp_m1_minus_id(x: f64) -> f64 {
    if x.abs() >= 0.5 {
        return x.exp_m1() - x;
    }
    let mut term = x * x / 2.0;
    let mut sum = term;
    for n in 3..40 {
        term *= x / n as f64;
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::compute_radii;
    use approx::assert_relative_eq;

    #[test]
    fn holder_model_values() {
        let m = holder_model(HolderParams::new(1.0, 1.0).unwrap());
        assert_relative_eq!(m.f(0.5), 0.125 - 0.5);
        assert_relative_eq!(m.fprime(0.5), -0.5);
        assert_eq!(m.f(0.0), 0.0);
        assert_eq!(m.fprime(0.0), -1.0);
        assert_eq!(m.rate(), Some(1.0));
        let half = HolderParams::new(2.0, 0.5).unwrap();
        assert_relative_eq!(half.nu(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn holder_params_validation() {
        assert!(HolderParams::new(0.0, 1.0).is_err());
        assert!(HolderParams::new(1.0, 0.0).is_err());
        assert!(HolderParams::new(1.0, 1.5).is_err());
    }

    #[test]
    fn holder_radii_examples() {
        let r = holder_radii(HolderParams::new(1.0, 1.0).unwrap(), 10.0).unwrap();
        assert_relative_eq!(r.rho, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(r.sigma, 2.0, epsilon = 1e-15);
        assert_relative_eq!(r.nu, 1.0, epsilon = 1e-15);
        assert!(r.rho_is_optimal);

        let r = holder_radii(HolderParams::new(1.0, 0.5).unwrap(), 10.0).unwrap();
        assert_relative_eq!(r.rho, 0.5625, epsilon = 1e-15);

        let p = HolderParams::new(1.0, 1.0).unwrap();
        let at_rho = holder_radii(p, p.rho()).unwrap();
        assert_eq!(at_rho.r, p.rho());
        assert!(!at_rho.rho_is_optimal);
    }

    #[test]
    fn holder_radii_agree_with_numeric_radii() {
        let opts = RootFindOptions::default();
        for &k in &[0.5, 1.0, 2.0, 4.0] {
            for &p in &[0.25, 0.5, 0.75, 1.0] {
                let params = HolderParams::new(k, p).unwrap();
                let closed = holder_radii(params, 100.0).unwrap();
                let numeric = compute_radii(&holder_model(params), 100.0, &opts).unwrap();
                assert!((closed.nu - numeric.nu).abs() < 1e-10, "ν at K={k}, p={p}");
                assert!((closed.rho - numeric.rho).abs() < 1e-10, "ρ at K={k}, p={p}");
                assert!((closed.sigma - numeric.sigma).abs() < 1e-10, "σ at K={k}, p={p}");
                assert_eq!(closed.rho_is_optimal, numeric.rho_is_optimal);
            }
        }
    }

    #[test]
    fn lipschitz_radius_examples() {
        assert_relative_eq!(lipschitz_radius(3.0, 1.0).unwrap(), 2.0 / 9.0);
        let one = lipschitz_radius(1.0, 1.0).unwrap();
        assert_relative_eq!(one, HolderParams::new(1.0, 1.0).unwrap().rho(), epsilon = 1e-15);
        assert_relative_eq!(lipschitz_radius(2.0, 1.0).unwrap(), one / 2.0, epsilon = 1e-15);
        assert!(lipschitz_radius(0.0, 1.0).is_err());
    }

    #[test]
    fn generalized_model_linear_density() {
        let d = LipschitzDensity::piecewise(vec![crate::density::PolySegment {
            start: 0.0,
            end: 3.0,
            coefficients: vec![0.0, 2.0],
        }])
        .unwrap();
        let m = generalized_model(&d);
        for &t in &[0.1, 0.5, 1.3] {
            assert_relative_eq!(m.f(t), t * t * t / 3.0 - t, epsilon = 1e-14);
            assert_relative_eq!(m.fprime(t), t * t - 1.0, epsilon = 1e-14);
        }
        assert_eq!(m.f(0.0), 0.0);
        assert_eq!(m.fprime(0.0), -1.0);
        let nu = compute_nu(&m, &RootFindOptions::default()).unwrap();
        assert_relative_eq!(nu, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn generalized_constant_density_is_lipschitz_model() {
        let d = LipschitzDensity::constant(2.0, 10.0).unwrap();
        let g = generalized_model(&d);
        let h = holder_model(HolderParams::new(2.0, 1.0).unwrap());
        for i in 1..200 {
            let t = 5.0 * i as f64 / 200.0;
            assert!((g.f(t) - h.f(t)).abs() <= 1e-12);
            assert!((g.fprime(t) - h.fprime(t)).abs() <= 1e-12);
        }
    }

    #[test]
    fn condition_h_examples() {
        let constant = LipschitzDensity::constant(3.0, 5.0).unwrap();
        assert!(check_condition_h(&constant, 1.0, 0.3, 512));
        let linear = LipschitzDensity::piecewise(vec![crate::density::PolySegment {
            start: 0.0,
            end: 3.0,
            coefficients: vec![0.0, 2.0],
        }])
        .unwrap();
        assert!(check_condition_h(&linear, 1.0, 1.0, 512));
        // L(u) = 1/(1+u) tabulated finely; t·L(t) is nondecreasing
        let u: Vec<f64> = (0..=400).map(|i| 5.0 * i as f64 / 400.0).collect();
        let l: Vec<f64> = u.iter().map(|x| 1.0 / (1.0 + x)).collect();
        let decaying = LipschitzDensity::tabulated(&u, &l).unwrap();
        assert!(check_condition_h(&decaying, 0.0, 4.0, 512));
        // but L itself decreases, so p = 1 fails
        assert!(!check_condition_h(&decaying, 1.0, 4.0, 512));
    }

    #[test]
    fn condition_h_marks_rate() {
        let linear = LipschitzDensity::piecewise(vec![crate::density::PolySegment {
            start: 0.0,
            end: 3.0,
            coefficients: vec![0.0, 2.0],
        }])
        .unwrap();
        let (m, ok) = generalized_model_with_condition_h(&linear, 1.0, &RootFindOptions::default()).unwrap();
        assert!(ok);
        assert_eq!(m.rate(), Some(1.0));
    }

    #[test]
    fn exp_m1_minus_id_reference_values() {
        for (x, want) in [
            (1e-8, 5.000_000_016_666_666_7e-17),
            (-0.3, 0.040_818_220_681_717_865),
            (0.49, 0.142_316_219_955_378_96),
            (-0.75, 0.222_366_552_741_014_72),
            (2.5, 8.682_493_960_703_473),
        ] {
            assert_relative_eq!(exp_m1_minus_id(x), want, max_relative = 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn newton_map_is_accurate_near_zero() {
        // n_f(t) = −K t²/(2(1 − K t)) for the Lipschitz case
        let m = holder_model(HolderParams::new(3.0, 1.0).unwrap());
        for t in [1e-3, 1e-8, 1e-14, 1e-30] {
            let want = -3.0 * t * t / (2.0 * (1.0 - 3.0 * t));
            assert_relative_eq!(m.newton_map(t).unwrap(), want, max_relative = 8.0 * f64::EPSILON);
        }
        let g = generalized_model(&LipschitzDensity::constant(3.0, 1.0).unwrap());
        for t in [1e-3, 1e-8, 1e-14] {
            let want = -3.0 * t * t / (2.0 * (1.0 - 3.0 * t));
            assert_relative_eq!(g.newton_map(t).unwrap(), want, max_relative = 1e-13);
        }
        let e = example_model("exp_quadratic", None).unwrap();
        let plain =
            MajorantModel::new("plain", |t: f64| (-t).exp_m1() + t * t, |t: f64| -(-t).exp() + 2.0 * t, 1.0).unwrap();
        assert_relative_eq!(e.newton_map(0.2).unwrap(), plain.newton_map(0.2).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn example_models_evaluate() {
        let m = example_model("power", Some(2.0 / 3.0)).unwrap();
        assert_relative_eq!(m.f(0.1), -0.07845565309968116, epsilon = 1e-15);
        let e = example_model("exp_quadratic", None).unwrap();
        assert_eq!(e.fprime(0.0), -1.0);
        assert_eq!(e.rate(), Some(1.0));
        let sq = example_model("power", Some(1.0)).unwrap();
        let k2 = holder_model(HolderParams::new(2.0, 1.0).unwrap());
        for &t in &[0.1, 0.3, 0.45] {
            assert_relative_eq!(sq.f(t), k2.f(t), epsilon = 1e-15);
            assert_relative_eq!(sq.fprime(t), k2.fprime(t), epsilon = 1e-15);
        }
        let p53 = example_model("power_5_3", None).unwrap();
        assert_eq!(p53.name(), "power_5_3");
        assert_eq!(p53.rate(), Some(2.0 / 3.0));
        assert!(matches!(example_model("cosh", None), Err(Error::UnknownName { .. })));
        assert!(example_model("power", None).is_err());
    }
}
