//! Pure Newton iteration `x_{k+1} = x_k − F'(x_k)⁻¹F(x_k)` on ℝⁿ.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::PivotedLu;
use crate::scalar::{compute_nu, compute_rho, MajorantModel, RootFindOptions};

pub type VectorFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// Source of `F'(x)`.
#[derive(Clone)]
pub enum Jacobian {
    Analytic(MatrixFn),
    /// Central differences with step `√ε·(1 + |x_i|)`.
    FiniteDifference,
}

/// Nonlinear map `F : ℝⁿ → ℝⁿ` on the ball of radius `κ` about its root
/// (or about the start point when no root is declared).
#[derive(Clone)]
pub struct Problem {
    name: String,
    dim: usize,
    residual: VectorFn,
    jacobian: Jacobian,
    x_star: Option<DVector<f64>>,
    kappa: f64,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("x_star", &self.x_star.as_ref().map(|x| x.as_slice().to_vec()))
            .field("kappa", &self.kappa)
            .field("analytic_jacobian", &matches!(self.jacobian, Jacobian::Analytic(_)))
            .finish()
    }
}

impl Problem {
    pub fn new<F>(name: impl Into<String>, dim: usize, residual: F, jacobian: Jacobian, kappa: f64) -> Result<Self>
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::Domain("problem dimension must be positive".into()));
        }
        if !(kappa > 0.0) {
            return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
        }
        Ok(Self { name: name.into(), dim, residual: Arc::new(residual), jacobian, x_star: None, kappa })
    }

    /// Declares the root; checks `‖F(x*)‖ ≤ 1e-12(1 + ‖x*‖)` and that `F'(x*)` passes the pivot test.
    pub fn with_root(mut self, x_star: DVector<f64>) -> Result<Self> {
        if x_star.len() != self.dim {
            return Err(Error::Domain(format!("root has dimension {}, problem has {}", x_star.len(), self.dim)));
        }
        let res = self.residual(&x_star).norm();
        if !(res <= 1e-12 * (1.0 + x_star.norm())) {
            return Err(Error::Precondition(format!("‖F(x*)‖ = {res} is not zero")));
        }
        if PivotedLu::factor(&self.jacobian_at(&x_star)).is_none() {
            return Err(Error::Precondition("F'(x*) is singular".into()));
        }
        self.x_star = Some(x_star);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn x_star(&self) -> Option<&DVector<f64>> {
        self.x_star.as_ref()
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
        }
        self.kappa = kappa;
        Ok(self)
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.residual)(x)
    }

    pub fn jacobian_at(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.jacobian {
            Jacobian::Analytic(j) => j(x),
            Jacobian::FiniteDifference => {
                let mut jac = DMatrix::zeros(self.dim, self.dim);
                let mut probe = x.clone();
                for i in 0..self.dim {
                    let h = f64::EPSILON.sqrt() * (1.0 + x[i].abs());
                    probe[i] = x[i] + h;
                    let up = self.residual(&probe);
                    probe[i] = x[i] - h;
                    let down = self.residual(&probe);
                    probe[i] = x[i];
                    jac.set_column(i, &((up - down) / (2.0 * h)));
                }
                jac
            }
        }
    }

    /// The problem `A∘F` for an invertible `A`; root and `κ` unchanged.
    pub fn composed_with(&self, a: DMatrix<f64>) -> Self {
        let inner = Arc::clone(&self.residual);
        let outer = a.clone();
        let jacobian = match &self.jacobian {
            Jacobian::Analytic(j) => {
                let j = Arc::clone(j);
                Jacobian::Analytic(Arc::new(move |x: &DVector<f64>| &outer * j(x)))
            }
            Jacobian::FiniteDifference => Jacobian::FiniteDifference,
        };
        Self {
            name: format!("A∘{}", self.name),
            dim: self.dim,
            residual: Arc::new(move |x: &DVector<f64>| &a * inner(x)),
            jacobian,
            x_star: self.x_star.clone(),
            kappa: self.kappa,
        }
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    SingularJacobian,
    LeftDomain,
    Nonfinite,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIters => "max_iters",
            Self::SingularJacobian => "singular_jacobian",
            Self::LeftDomain => "left_domain",
            Self::Nonfinite => "nonfinite",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonOptions {
    pub max_iters: usize,
    pub step_atol: f64,
    pub residual_atol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iters: 100, step_atol: 1e-15, residual_atol: 1e-14 }
    }
}

/// Full history of one Newton run.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonTrace {
    pub iterates: Vec<DVector<f64>>,
    pub residual_norms: Vec<f64>,
    /// `‖x_k − x_{k−1}‖`; `step_norms[k−1]` belongs to iterate `k`.
    pub step_norms: Vec<f64>,
    /// `‖x_k − x*‖`, present iff the root is known.
    pub error_norms: Option<Vec<f64>>,
    pub status: SolveStatus,
}

impl NewtonTrace {
    /// Number of Newton steps taken.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn last(&self) -> &DVector<f64> {
        &self.iterates[self.iterates.len() - 1]
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// `‖x_{k+1} − x*‖ < ‖x_k − x*‖` for every recorded step.
    pub fn errors_strictly_decreasing(&self) -> Option<bool> {
        self.error_norms.as_ref().map(|e| e.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0)))
    }
}

/// Runs Newton's method from `x0` with dense pivoted LU solves.
///
/// `x0` must lie strictly inside the domain ball; later iterates that leave
/// it end the run with [`SolveStatus::LeftDomain`].
pub fn newton_solve(problem: &Problem, x0: &DVector<f64>, opts: &NewtonOptions) -> Result<NewtonTrace> {
    if x0.len() != problem.dim {
        return Err(Error::Domain(format!("start point has dimension {}, problem has {}", x0.len(), problem.dim)));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("start point has non-finite components".into()));
    }
    let center = problem.x_star.clone().unwrap_or_else(|| x0.clone());
    let offset = (x0 - &center).norm();
    if offset >= problem.kappa {
        return Err(Error::Precondition(format!(
            "start point lies at distance {offset} from the centre, outside the domain ball of radius {}",
            problem.kappa
        )));
    }

    let error_of = |x: &DVector<f64>| problem.x_star.as_ref().map(|s| (x - s).norm());
    let mut fx = problem.residual(x0);
    let mut trace = NewtonTrace {
        iterates: vec![x0.clone()],
        residual_norms: vec![fx.norm()],
        step_norms: Vec::new(),
        error_norms: error_of(x0).map(|e| vec![e]),
        status: SolveStatus::MaxIters,
    };

    for _ in 0..opts.max_iters {
        let x = trace.last().clone();
        let res = trace.residual_norms[trace.residual_norms.len() - 1];
        if !res.is_finite() {
            trace.status = SolveStatus::Nonfinite;
            return Ok(trace);
        }
        if res <= opts.residual_atol {
            trace.status = SolveStatus::Converged;
            return Ok(trace);
        }
        let jac = problem.jacobian_at(&x);
        if jac.iter().any(|v| !v.is_finite()) {
            trace.status = SolveStatus::Nonfinite;
            return Ok(trace);
        }
        let Some(lu) = PivotedLu::factor(&jac) else {
            trace.status = SolveStatus::SingularJacobian;
            return Ok(trace);
        };
        let step = -lu.solve(&fx);
        let next = &x + &step;
        if next.iter().any(|v| !v.is_finite()) {
            trace.status = SolveStatus::Nonfinite;
            return Ok(trace);
        }
        fx = problem.residual(&next);
        let step_norm = step.norm();
        trace.step_norms.push(step_norm);
        trace.residual_norms.push(fx.norm());
        if let (Some(errs), Some(e)) = (trace.error_norms.as_mut(), error_of(&next)) {
            errs.push(e);
        }
        let outside = (&next - &center).norm() >= problem.kappa;
        trace.iterates.push(next);
        if outside {
            trace.status = SolveStatus::LeftDomain;
            return Ok(trace);
        }
        if step_norm <= opts.step_atol {
            trace.status = SolveStatus::Converged;
            return Ok(trace);
        }
    }
    let res = trace.residual_norms[trace.residual_norms.len() - 1];
    trace.status = if res <= opts.residual_atol { SolveStatus::Converged } else { SolveStatus::MaxIters };
    Ok(trace)
}

/// Odd extension `F(x) = sign(x) f(|x|)` of a majorant, with its contraction radius.
#[derive(Debug, Clone)]
pub struct WorstCase {
    pub problem: Problem,
    pub rho: f64,
    pub nu: f64,
}

/// 1-D problem on which the majorant bound is attained.
///
/// `F'(x) = f'(|x|)` is even, so the majorant hypothesis holds with equality.
/// When `h(ρ) = 1` the Newton map sends `ρ` to `−ρ`, a 2-cycle that shows
/// no radius larger than `ρ` can be certified. The domain radius is `ν`.
pub fn worst_case_instance(model: &MajorantModel, opts: &RootFindOptions) -> Result<WorstCase> {
    model.verify_h1()?;
    let h2 = model.verify_h2(opts)?;
    if !h2.holds {
        return Err(Error::Model(format!("{}: f' is not strictly increasing", model.name())));
    }
    let nu = compute_nu(model, opts)?;
    let rho = compute_rho(model, nu, opts)?;
    let excess = model.contraction_ratio(rho) - 1.0;
    if rho >= nu || !(excess.abs() <= opts.optimality_tol) {
        return Err(Error::Model(format!(
            "{}: ρ = {rho} is not a strict crossing of h(t) = 1 (|h(ρ) − 1| = {})",
            model.name(),
            excess.abs()
        )));
    }
    let f = model.clone();
    let fp = model.clone();
    let problem = Problem::new(
        format!("worst_case[{}]", model.name()),
        1,
        move |x: &DVector<f64>| {
            let v = x[0];
            // sign(0) = 0 keeps F continuous with F(0) = 0
            let s = if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                0.0
            };
            DVector::from_element(1, s * f.f(v.abs()))
        },
        Jacobian::Analytic(Arc::new(move |x: &DVector<f64>| DMatrix::from_element(1, 1, fp.fprime(x[0].abs())))),
        nu,
    )?
    .with_root(DVector::zeros(1))?;
    Ok(WorstCase { problem, rho, nu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{holder_model, HolderParams};
    use approx::assert_relative_eq;

    fn scalar_problem<F, D>(name: &str, f: F, d: D) -> Problem
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Problem::new(
            name,
            1,
            move |x: &DVector<f64>| DVector::from_element(1, f(x[0])),
            Jacobian::Analytic(Arc::new(move |x: &DVector<f64>| DMatrix::from_element(1, 1, d(x[0])))),
            1.0,
        )
        .unwrap()
        .with_root(DVector::zeros(1))
        .unwrap()
    }

    fn v1(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn exp_quadratic_converges_monotonically() {
        let p = scalar_problem("exp", |t: f64| (-t).exp_m1() + t * t, |t: f64| -(-t).exp() + 2.0 * t);
        let trace = newton_solve(&p, &v1(0.2), &NewtonOptions::default()).unwrap();
        assert!(trace.converged());
        assert_eq!(trace.errors_strictly_decreasing(), Some(true));
        assert!(trace.last()[0].abs() < 1e-12);
    }

    #[test]
    fn power_5_3_first_step() {
        let odd = |t: f64| t.signum() * t.abs().powf(5.0 / 3.0) - t;
        let p = scalar_problem("g", odd, |t: f64| 5.0 / 3.0 * t.abs().powf(2.0 / 3.0) - 1.0);
        let trace = newton_solve(&p, &v1(0.1), &NewtonOptions::default()).unwrap();
        assert_relative_eq!(trace.iterates[1][0], -0.022409549872393104, max_relative = 1e-13);
        assert!(trace.iterates[1][0].abs() < 0.1);
    }

    #[test]
    fn start_at_root_takes_no_steps() {
        let p = scalar_problem("exp", |t: f64| (-t).exp_m1() + t * t, |t: f64| -(-t).exp() + 2.0 * t);
        let trace = newton_solve(&p, &v1(0.0), &NewtonOptions::default()).unwrap();
        assert_eq!(trace.iterations(), 0);
        assert!(trace.converged());
    }

    #[test]
    fn singular_jacobian_is_reported() {
        // F'(0.5) = 0 for F = t^2 - t
        let p = Problem::new(
            "flat",
            1,
            |x: &DVector<f64>| v1(x[0] * x[0] - x[0]),
            Jacobian::Analytic(Arc::new(|x: &DVector<f64>| DMatrix::from_element(1, 1, 2.0 * x[0] - 1.0))),
            2.0,
        )
        .unwrap();
        let trace = newton_solve(&p, &v1(0.5), &NewtonOptions::default()).unwrap();
        assert_eq!(trace.status, SolveStatus::SingularJacobian);
    }

    #[test]
    fn leaving_the_ball_is_reported() {
        let p = scalar_problem("atan", |t: f64| t.atan(), |t: f64| 1.0 / (1.0 + t * t)).with_kappa(3.0).unwrap();
        // Newton on atan diverges from |x0| > 1.39
        let trace = newton_solve(&p, &v1(1.5), &NewtonOptions::default()).unwrap();
        assert_eq!(trace.status, SolveStatus::LeftDomain);
    }

    #[test]
    fn start_outside_ball_is_rejected() {
        let p = scalar_problem("atan", |t: f64| t.atan(), |t: f64| 1.0 / (1.0 + t * t));
        assert!(matches!(newton_solve(&p, &v1(1.0), &NewtonOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn finite_difference_jacobian_tracks_analytic() {
        let analytic = scalar_problem("exp", |t: f64| (-t).exp_m1() + t * t, |t: f64| -(-t).exp() + 2.0 * t);
        let fd = Problem::new(
            "exp-fd",
            1,
            |x: &DVector<f64>| v1((-x[0]).exp_m1() + x[0] * x[0]),
            Jacobian::FiniteDifference,
            1.0,
        )
        .unwrap();
        let x = v1(0.3);
        assert_relative_eq!(fd.jacobian_at(&x)[(0, 0)], analytic.jacobian_at(&x)[(0, 0)], epsilon = 1e-8);
        let trace = newton_solve(&fd, &v1(0.2), &NewtonOptions::default()).unwrap();
        assert!(trace.converged());
    }

    #[test]
    fn worst_case_two_cycle() {
        let model = holder_model(HolderParams::new(1.0, 1.0).unwrap());
        let wc = worst_case_instance(&model, &RootFindOptions::default()).unwrap();
        assert_relative_eq!(wc.rho, 2.0 / 3.0, epsilon = 1e-11);
        let opts = NewtonOptions { max_iters: 2, ..Default::default() };
        let trace = newton_solve(&wc.problem, &v1(2.0 / 3.0), &opts).unwrap();
        assert_relative_eq!(trace.iterates[1][0], -2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(trace.iterates[2][0], 2.0 / 3.0, epsilon = 1e-12);

        let inside = newton_solve(&wc.problem, &v1(0.99 * 2.0 / 3.0), &NewtonOptions::default()).unwrap();
        assert!(inside.converged());
        assert!(inside.last()[0].abs() < 1e-12);

        let origin = newton_solve(&wc.problem, &v1(0.0), &NewtonOptions::default()).unwrap();
        assert_eq!(origin.iterations(), 0);
    }

    #[test]
    fn worst_case_requires_crossing() {
        // domain ends before h reaches 1, so ρ = ν = R
        let m = MajorantModel::new("cut", |t: f64| t * t / 2.0 - t, |t: f64| t - 1.0, 0.5).unwrap();
        assert!(matches!(worst_case_instance(&m, &RootFindOptions::default()), Err(Error::Model(_))));
    }
}
