//! The classical thinning channel on photon-number distributions, where each
//! photon survives independently with probability `lambda`.

use serde::{Deserialize, Serialize};

use crate::channels::apply_attenuator;
use crate::error::{Error, Result};
use crate::fock::FockOperator;

/// Nonnegative weights indexed by photon number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalDist {
    weights: Vec<f64>,
}

impl ClassicalDist {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite);
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        Ok(Self { weights })
    }

    /// All mass at photon number `n`, on `len` entries.
    pub fn delta(n: usize, len: usize) -> Result<Self> {
        if n >= len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: n + 1,
            });
        }
        let mut w = vec![0.0; len];
        w[n] = 1.0;
        Self::new(w)
    }

    /// Poisson(`mean`) truncated to `len` entries (not renormalized).
    pub fn poisson(mean: f64, len: usize) -> Result<Self> {
        if !(mean >= 0.0) || !mean.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "mean",
                value: mean,
                range: "[0, inf)",
            });
        }
        let mut w = Vec::with_capacity(len);
        let mut term = (-mean).exp();
        for k in 0..len {
            w.push(term);
            term *= mean / (k + 1) as f64;
        }
        Self::new(w)
    }

    /// Geometric (thermal) distribution with mean `mean`, truncated to `len`.
    pub fn geometric(mean: f64, len: usize) -> Result<Self> {
        if !(mean >= 0.0) || !mean.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "mean",
                value: mean,
                range: "[0, inf)",
            });
        }
        let ratio = mean / (mean + 1.0);
        let w = (0..len)
            .map(|n| ratio.powi(n as i32) / (mean + 1.0))
            .collect();
        Self::new(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        let len = self.len().max(other.len());
        (0..len)
            .map(|i| {
                let a = self.weights.get(i).copied().unwrap_or(0.0);
                let b = other.weights.get(i).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .sum()
    }

    /// Weights sorted in decreasing order.
    pub fn rearranged(&self) -> Self {
        let mut w = self.weights.clone();
        w.sort_by(|a, b| b.total_cmp(a));
        Self { weights: w }
    }

    pub fn is_decreasing(&self, tol: f64) -> bool {
        self.weights.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

/// Transition matrix `r_{n|k} = C(k, n) lambda^n (1-lambda)^{k-n}`, zero for
/// `k < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinningKernel {
    lambda: f64,
    size: usize,
    /// Row-major `size x size`, entry `(n, k)`.
    entries: Vec<f64>,
}

impl ThinningKernel {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `r_{n|k}`.
    pub fn get(&self, n: usize, k: usize) -> f64 {
        self.entries[n * self.size + k]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.size).map(|n| self.get(n, k)).collect()
    }
}

/// Builds the `size x size` thinning kernel. Binomial coefficients come from
/// the running product `C(k, n+1) = C(k, n) (k - n) / (n + 1)` up to `k/2`
/// and are mirrored above it, so `C(k, k) = 1` exactly; `0^0 = 1`.
pub fn thinning_kernel(lambda: f64, size: usize) -> Result<ThinningKernel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::ParameterOutOfRange {
            name: "lambda",
            value: lambda,
            range: "[0, 1]",
        });
    }
    let loss = 1.0 - lambda;
    let mut entries = vec![0.0; size * size];
    let mut binom = Vec::with_capacity(size);
    for k in 0..size {
        binom.clear();
        binom.push(1.0f64);
        for n in 1..=k / 2 {
            let prev = binom[n - 1];
            binom.push(prev * (k + 1 - n) as f64 / n as f64);
        }
        for n in 0..=k {
            let c = binom[n.min(k - n)];
            entries[n * size + k] = c * lambda.powi(n as i32) * loss.powi((k - n) as i32);
        }
    }
    Ok(ThinningKernel {
        lambda,
        size,
        entries,
    })
}

/// `[T_lambda(p)]_n = sum_k r_{n|k} p_k`. Output has the input's length.
pub fn thin(p: &ClassicalDist, lambda: f64) -> Result<ClassicalDist> {
    let kernel = thinning_kernel(lambda, p.len())?;
    Ok(apply_kernel(&kernel, p))
}

pub fn apply_kernel(kernel: &ThinningKernel, p: &ClassicalDist) -> ClassicalDist {
    let size = kernel.size();
    let w = p.weights();
    let out = (0..size)
        .map(|n| (n..size).map(|k| kernel.get(n, k) * w[k]).sum())
        .collect();
    ClassicalDist { weights: out }
}

/// Applies the quantum-limited attenuator to `sum_n p_n |n><n|` on `dim`
/// levels and returns the largest deviation between its diagonal and the
/// classical thinning of `p`.
pub fn attenuator_equivalence_check(p: &ClassicalDist, lambda: f64, dim: usize) -> Result<f64> {
    if dim < p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: dim,
        });
    }
    let mut diag = p.weights().to_vec();
    diag.resize(dim, 0.0);
    let x = FockOperator::from_diagonal(&diag)?;
    let quantum = apply_attenuator(&x, lambda)?.diagonal_re();
    let classical = thin(p, lambda)?;
    Ok(quantum
        .iter()
        .enumerate()
        .map(|(n, &q)| (q - classical.weights().get(n).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        let k = thinning_kernel(0.5, 3).unwrap();
        assert_eq!(k.column(2), vec![0.25, 0.5, 0.25]);
        assert_eq!(k.get(2, 1), 0.0);

        let id = thinning_kernel(1.0, 4).unwrap();
        for n in 0..4 {
            for j in 0..4 {
                assert_eq!(id.get(n, j), if n == j { 1.0 } else { 0.0 });
            }
        }

        let zero = thinning_kernel(0.0, 4).unwrap();
        for j in 0..4 {
            assert_eq!(zero.get(0, j), 1.0);
            assert!((1..4).all(|n| zero.get(n, j) == 0.0));
        }

        assert!(thinning_kernel(1.01, 3).is_err());
    }

    #[test]
    fn kernel_columns_sum_to_one() {
        for &lambda in &[0.05, 0.3, 0.5, 0.77, 0.95] {
            let k = thinning_kernel(lambda, 500).unwrap();
            for j in (0..500).step_by(37) {
                let s: f64 = k.column(j).iter().sum();
                assert!((s - 1.0).abs() < 1e-13, "lambda {lambda} column {j}: {s}");
            }
        }
    }

    #[test]
    fn thin_examples() {
        let out = thin(&ClassicalDist::delta(1, 2).unwrap(), 0.3).unwrap();
        assert!((out.weights()[0] - 0.7).abs() < 1e-16);
        assert!((out.weights()[1] - 0.3).abs() < 1e-16);

        let p = ClassicalDist::new(vec![0.1, 0.5, 0.15, 0.25]).unwrap();
        assert_eq!(thin(&p, 1.0).unwrap(), p);

        let poisson = ClassicalDist::poisson(1.0, 60).unwrap();
        let out = thin(&poisson, 0.5).unwrap();
        let expected = ClassicalDist::poisson(0.5, 60).unwrap();
        assert!(out.l1_distance(&expected) < 1e-12);
    }

    #[test]
    fn equivalence_examples() {
        let d0 = ClassicalDist::delta(0, 5).unwrap();
        assert_eq!(attenuator_equivalence_check(&d0, 0.37, 5).unwrap(), 0.0);

        let geo = ClassicalDist::geometric(1.0, 30).unwrap();
        assert!(attenuator_equivalence_check(&geo, 0.5, 30).unwrap() <= 1e-12);
        let out = thin(&geo, 0.5).unwrap();
        let expected = ClassicalDist::geometric(0.5, 30).unwrap();
        // Only the truncated tail (1/2)^30 breaks exact geometric form.
        assert!(out.l1_distance(&expected) < 1e-8);

        assert!(matches!(
            attenuator_equivalence_check(&geo, 0.5, 10),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distribution_validation() {
        assert!(matches!(
            ClassicalDist::new(vec![0.5, -0.1]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        assert!(ClassicalDist::new(vec![]).is_err());
        assert!(ClassicalDist::delta(3, 3).is_err());
    }
}
