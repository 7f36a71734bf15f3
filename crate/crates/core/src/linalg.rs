//! Dense linear algebra helpers: induced 2-norm, Banach's inverse bound and
//! the pivot-checked LU solve used by the Newton step.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest dimension for which the spectral norm comes from a full SVD.
pub const DIRECT_NORM_MAX_DIM: usize = 64;

const POWER_ITER_TOL: f64 = 1e-10;
const POWER_ITER_MAX: usize = 10_000;

/// Spectral norm `‖M‖₂`, the largest singular value.
pub fn operator_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("operator_norm needs finite entries".into()));
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    if m.nrows().max(m.ncols()) <= DIRECT_NORM_MAX_DIM {
        return Ok(m.singular_values().max());
    }
    power_iteration_norm(m)
}

/// Power iteration on `MᵀM`.
fn power_iteration_norm(m: &DMatrix<f64>) -> Result<f64> {
    let gram = m.transpose() * m;
    let n = gram.ncols();
    // deterministic start with no exact orthogonality to common eigenvectors
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..POWER_ITER_MAX {
        let w = &gram * &v;
        let next = w.norm();
        if next == 0.0 {
            return Ok(0.0);
        }
        v = w / next;
        if (next - lambda).abs() <= POWER_ITER_TOL * next {
            return Ok(next.sqrt());
        }
        lambda = next;
    }
    Err(Error::NoConvergence { method: "power iteration", iterations: POWER_ITER_MAX })
}

/// Banach's lemma: `‖B⁻¹‖ ≤ 1/(1 − ‖B − I‖)` whenever `‖B − I‖ < 1`.
pub fn banach_inverse_bound(b: &DMatrix<f64>) -> Result<f64> {
    if !b.is_square() {
        return Err(Error::Precondition(format!(
            "Banach's lemma needs a square matrix, got {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let dist = operator_norm(&(b - DMatrix::identity(b.nrows(), b.ncols())))?;
    if dist >= 1.0 {
        return Err(Error::Precondition(format!("‖B − I‖ = {dist} is not below 1")));
    }
    Ok(1.0 / (1.0 - dist))
}

/// LU factorization with partial pivoting, rejecting pivots below
/// `1e-14 · ‖A‖∞`.
#[derive(Debug, Clone)]
pub struct PivotedLu {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

pub const PIVOT_RTOL: f64 = 1e-14;

impl PivotedLu {
    /// `None` when the matrix is numerically singular.
    pub fn factor(a: &DMatrix<f64>) -> Option<Self> {
        if !a.is_square() || a.is_empty() {
            return None;
        }
        let inf_norm = a.row_iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let lu = a.clone().lu();
        let min_pivot = lu.u().diagonal().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        if !(min_pivot >= PIVOT_RTOL * inf_norm) || inf_norm == 0.0 {
            return None;
        }
        Some(Self { lu })
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.lu.solve(b).expect("pivots checked at factorization")
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.lu.solve(b).expect("pivots checked at factorization")
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.lu.try_inverse().expect("pivots checked at factorization")
    }
}
