//! Majorization of decreasing sequences and operators, Fock rearrangement,
//! passivity, and the Ky Fan maximum principle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{eigh, partial_sums, spectrum, FockOperator, Spectrum, HERMITIAN_TOL, POSITIVITY_TOL};

/// Default additive slack per partial sum.
pub const MAJORIZATION_TOL: f64 = 1e-9;

/// Partial-sum comparison of `x` against `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorizationReport {
    pub partial_sums_x: Vec<f64>,
    pub partial_sums_y: Vec<f64>,
    /// `partial_sums_x[n] - partial_sums_y[n]`.
    pub slacks: Vec<f64>,
    /// `x` weakly sub-majorizes `y`: every slack is at least `-tolerance`.
    pub weakly_submajorized: bool,
    /// Weak sub-majorization plus equal totals within `tolerance`.
    pub majorized: bool,
    pub tolerance: f64,
}

impl MajorizationReport {
    pub fn min_slack(&self) -> f64 {
        self.slacks.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Sorts descending; ties keep their input order.
pub fn decreasing_rearrangement(x: &[f64]) -> Result<Spectrum> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut v = x.to_vec();
    // sort_by is stable
    v.sort_by(|a, b| b.total_cmp(a));
    Spectrum::from_decreasing(v)
}

/// Checks whether `x` weakly sub-majorizes `y`, i.e.
/// `sum_{i<=n} x_i >= sum_{i<=n} y_i` for every `n`. The shorter sequence is
/// padded with zeros.
pub fn weakly_submajorizes(x: &Spectrum, y: &Spectrum, tol: f64) -> MajorizationReport {
    let len = x.len().max(y.len());
    let mut sx = partial_sums(x.values());
    let mut sy = partial_sums(y.values());
    let tx = sx.last().copied().unwrap_or(0.0);
    let ty = sy.last().copied().unwrap_or(0.0);
    sx.resize(len, tx);
    sy.resize(len, ty);
    let slacks: Vec<f64> = sx.iter().zip(&sy).map(|(a, b)| a - b).collect();
    let weak = slacks.iter().all(|&s| s >= -tol);
    MajorizationReport {
        partial_sums_x: sx,
        partial_sums_y: sy,
        slacks,
        weakly_submajorized: weak,
        majorized: weak && (tx - ty).abs() <= tol,
        tolerance: tol,
    }
}

/// Like [`weakly_submajorizes`] but takes raw sequences and rejects any that
/// are not already decreasing.
pub fn weakly_submajorizes_sequences(x: &[f64], y: &[f64], tol: f64) -> Result<MajorizationReport> {
    let x = Spectrum::from_decreasing(x.to_vec())?;
    let y = Spectrum::from_decreasing(y.to_vec())?;
    Ok(weakly_submajorizes(&x, &y, tol))
}

/// Compares two Hermitian operators through their spectra: does `x` weakly
/// sub-majorize `y`?
pub fn operator_submajorizes(x: &FockOperator, y: &FockOperator, tol: f64) -> Result<MajorizationReport> {
    Ok(weakly_submajorizes(&spectrum(x)?, &spectrum(y)?, tol))
}

/// `X_down = sum_n x_n |n><n|` with `x` the decreasing spectrum of `X`.
pub fn fock_rearrangement(x: &FockOperator) -> Result<FockOperator> {
    let s = spectrum(x)?;
    if let Some(&min) = s.values().last() {
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive(min));
        }
    }
    FockOperator::from_diagonal(s.values())
}

/// Diagonal in the Fock basis with non-increasing diagonal, both within `tol`.
pub fn is_passive(x: &FockOperator, tol: f64) -> bool {
    if x.max_off_diagonal() > tol {
        return false;
    }
    let d = x.dim();
    (0..d).all(|n| x[(n, n)].im.abs() <= tol)
        && (1..d).all(|n| x[(n, n)].re <= x[(n - 1, n - 1)].re + tol)
}

/// Diagonal projector onto the first `rank` Fock states.
pub fn passive_projector(rank: usize, dim: usize) -> Result<FockOperator> {
    if rank == 0 || rank > dim {
        return Err(Error::ParameterOutOfRange {
            name: "rank",
            value: rank as f64,
            range: "[1, dim]",
        });
    }
    let diag: Vec<f64> = (0..dim).map(|n| if n < rank { 1.0 } else { 0.0 }).collect();
    FockOperator::from_diagonal(&diag)
}

/// Rank of an orthogonal projector, after checking `P = P^dag = P^2`.
pub fn projector_rank(p: &FockOperator, tol: f64) -> Result<usize> {
    let herm = p.hermitian_defect();
    let idem = (&(p * p) - p)
        .matrix()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let residual = herm.max(idem);
    if residual > tol {
        return Err(Error::NotProjector(residual));
    }
    Ok(p.trace().re.round().max(0.0) as usize)
}

/// `(sum of the top rank(P) eigenvalues of X) - Tr[P X]`; nonnegative by the
/// Ky Fan maximum principle.
pub fn ky_fan_gap(x: &FockOperator, p: &FockOperator, tol: f64) -> Result<f64> {
    crate::fock::same_dim(x, p)?;
    let rank = projector_rank(p, tol)?;
    let s = eigh(x, HERMITIAN_TOL)?.spectrum;
    let bound: f64 = s.values().iter().take(rank).sum();
    Ok(bound - x.trace_product(p)?.re)
}

/// `Tr[P X] <= sum of the top rank(P) eigenvalues of X` within `tol`.
pub fn ky_fan_check(x: &FockOperator, p: &FockOperator, tol: f64) -> Result<bool> {
    Ok(ky_fan_gap(x, p, tol)? >= -tol)
}
