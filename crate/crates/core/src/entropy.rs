//! Entropies in nats. Eigenvalues are clipped to `[0, 1]` before taking logs,
//! and those below [`EIGENVALUE_FLOOR`] are treated as exact zeros.

use crate::error::{Error, Result};
use crate::fock::{spectrum, DensityMatrix, FockOperator};
use crate::thinning::ClassicalDist;

/// Largest accepted `|Tr rho + deficit - 1|`.
pub const TRACE_TOL: f64 = 1e-6;
const NORMALIZATION_TOL: f64 = 1e-10;
/// Eigenvalues this small are solver noise; they would otherwise dominate
/// Renyi entropies with `alpha < 1`.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

fn state_eigenvalues(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let trace = rho.operator().trace().re;
    if (trace + rho.trace_deficit() - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceMismatch {
            trace,
            deficit: rho.trace_deficit(),
        });
    }
    Ok(clipped(spectrum(rho.operator())?.values()))
}

fn clipped(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&p| if p < EIGENVALUE_FLOOR { 0.0 } else { p.min(1.0) })
        .collect()
}

fn shannon_of(values: &[f64]) -> f64 {
    // 0.0 - x keeps a zero entropy at +0.0
    0.0 - values
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

fn renyi_of(values: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, 1) or (1, inf)",
        });
    }
    let s: f64 = values.iter().filter(|&&p| p > 0.0).map(|&p| p.powf(alpha)).sum();
    Ok(s.ln() / (1.0 - alpha))
}

/// `-sum p ln p` over the eigenvalues of `rho`.
pub fn von_neumann(rho: &DensityMatrix) -> Result<f64> {
    Ok(shannon_of(&state_eigenvalues(rho)?))
}

/// `ln(sum p^alpha) / (1 - alpha)` over the eigenvalues of `rho`.
pub fn renyi(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    renyi_of(&state_eigenvalues(rho)?, alpha)
}

/// Von Neumann entropy of a channel output, trusting its trace bookkeeping.
pub fn von_neumann_operator(x: &FockOperator) -> Result<f64> {
    Ok(shannon_of(&clipped(spectrum(x)?.values())))
}

pub fn renyi_operator(x: &FockOperator, alpha: f64) -> Result<f64> {
    renyi_of(&clipped(spectrum(x)?.values()), alpha)
}

/// `-sum p ln p` of a normalized distribution.
pub fn shannon(p: &ClassicalDist) -> Result<f64> {
    let total = p.total();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(shannon_of(p.weights()))
}
