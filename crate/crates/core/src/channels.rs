//! Gauge-covariant Gaussian channels on the truncated Fock space.
//!
//! The quantum-limited attenuator is applied through its Kraus operators
//! `B_l = sum_m sqrt(C(m+l, l)) (1-lambda)^{l/2} lambda^{m/2} |m><m+l|`, which
//! never raise photon number, so the truncated result is exact. The
//! quantum-limited amplifier of gain `kappa` is `1/kappa` times the dual of the
//! attenuator with `lambda = 1/kappa`; it spreads weight upward, so its output
//! lives on a larger space and the lost tail is reported as a trace deficit.
//! A general channel with parameters `(lambda, N)` is the amplifier composed
//! after the attenuator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{check_dim, CMatrix, FockOperator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default RK4 step for [`evolve_lindblad`].
pub const DEFAULT_LINDBLAD_STEP: f64 = 1e-3;

/// Parameters `(lambda, N)` of a gauge-covariant Gaussian channel and their
/// decomposition into an attenuator `eta` followed by an amplifier `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeCovariantParams {
    pub lambda: f64,
    pub noise: f64,
    pub eta: f64,
    pub kappa: f64,
}

impl GaugeCovariantParams {
    /// Solves `kappa * eta = lambda` together with matching the Gaussian
    /// damping `(2 kappa - kappa eta - 1) / 2 = |lambda - 1| (N + 1/2)`.
    pub fn new(lambda: f64, noise: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "lambda",
                value: lambda,
                range: "[0, inf)",
            });
        }
        if !(noise >= 0.0) || !noise.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "noise",
                value: noise,
                range: "[0, inf)",
            });
        }
        let kappa = if lambda <= 1.0 {
            1.0 + noise * (1.0 - lambda)
        } else {
            lambda * (noise + 1.0) - noise
        };
        let eta = (lambda / kappa).min(1.0);
        Ok(Self {
            lambda,
            noise,
            eta,
            kappa,
        })
    }

    /// Coefficient `c` of the Gaussian factor `exp(-c |z|^2)`.
    pub fn gaussian_exponent(&self) -> f64 {
        (self.lambda - 1.0).abs() * (self.noise + 0.5)
    }

    pub fn is_identity(&self) -> bool {
        self.lambda == 1.0 && self.noise == 0.0
    }
}

/// An operator produced by a channel, with the trace weight lost above the
/// output truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutput {
    pub operator: FockOperator,
    pub trace_deficit: f64,
}

/// Table of `sqrt(C(m+l, l)) (1-lambda)^{l/2} lambda^{m/2}` for `m + l < dim`.
/// Powers use `0^0 = 1`, so `lambda = 0` and `lambda = 1` are exact.
struct AttenuatorCoefficients {
    dim: usize,
    table: Vec<f64>,
}

impl AttenuatorCoefficients {
    fn new(lambda: f64, dim: usize) -> Self {
        let sqrt_keep = lambda.sqrt();
        let sqrt_loss = (1.0 - lambda).sqrt();
        let mut table = vec![0.0; dim * dim];
        for m in 0..dim {
            let keep = sqrt_keep.powi(m as i32);
            let mut binom = 1.0f64;
            for l in 0..dim - m {
                if l > 0 {
                    binom = binom * (m + l) as f64 / l as f64;
                }
                table[m * dim + l] = binom.sqrt() * sqrt_loss.powi(l as i32) * keep;
            }
        }
        Self { dim, table }
    }

    /// `<m|B_l|m+l>`.
    #[inline]
    fn get(&self, m: usize, l: usize) -> f64 {
        debug_assert!(m + l < self.dim);
        self.table[m * self.dim + l]
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name: "lambda",
            value: lambda,
            range: "[0, 1]",
        })
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa >= 1.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name: "kappa",
            value: kappa,
            range: "[1, inf)",
        })
    }
}

/// A finite family of Kraus operators. All operators act on the output
/// space; inputs are zero-padded from `input_dim` up to `output_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub operators: Vec<FockOperator>,
    /// Attenuator transmissivity or amplifier gain.
    pub parameter: f64,
    pub input_dim: usize,
    pub output_dim: usize,
}

impl KrausSet {
    /// `sum_l K_l X K_l^dag`.
    pub fn apply(&self, x: &FockOperator) -> Result<FockOperator> {
        expect_dim(x, self.input_dim)?;
        let xe = x.embed(self.output_dim)?;
        let mut acc = CMatrix::zeros(self.output_dim, self.output_dim);
        for k in &self.operators {
            acc += k.matrix() * xe.matrix() * k.matrix().adjoint();
        }
        Ok(FockOperator::from_matrix_unchecked(acc))
    }

    /// `sum_l K_l^dag Y K_l`, compressed to the input space.
    pub fn apply_dual(&self, y: &FockOperator) -> Result<FockOperator> {
        expect_dim(y, self.output_dim)?;
        let mut acc = CMatrix::zeros(self.output_dim, self.output_dim);
        for k in &self.operators {
            acc += k.matrix().adjoint() * y.matrix() * k.matrix();
        }
        FockOperator::from_matrix_unchecked(acc).compress(self.input_dim)
    }

    /// `sum_l K_l^dag K_l` on the input space; the identity for a
    /// trace-preserving set.
    pub fn completeness(&self) -> FockOperator {
        let mut acc = CMatrix::zeros(self.output_dim, self.output_dim);
        for k in &self.operators {
            acc += k.matrix().adjoint() * k.matrix();
        }
        FockOperator::from_matrix_unchecked(acc)
            .compress(self.input_dim)
            .expect("input_dim is at least 1")
    }
}

fn expect_dim(x: &FockOperator, dim: usize) -> Result<()> {
    if x.dim() == dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: dim,
            found: x.dim(),
        })
    }
}

/// Kraus operators `B_0, ..., B_{dim-1}` of the quantum-limited attenuator.
pub fn attenuator_kraus(lambda: f64, dim: usize) -> Result<KrausSet> {
    check_lambda(lambda)?;
    check_dim(dim)?;
    let coef = AttenuatorCoefficients::new(lambda, dim);
    let operators = (0..dim)
        .map(|l| {
            let mut b = CMatrix::zeros(dim, dim);
            for m in 0..dim - l {
                b[(m, m + l)] = Complex64::new(coef.get(m, l), 0.0);
            }
            FockOperator::from_matrix_unchecked(b)
        })
        .collect();
    Ok(KrausSet {
        operators,
        parameter: lambda,
        input_dim: dim,
        output_dim: dim,
    })
}

/// Kraus operators `B_l(1/kappa)^dag / sqrt(kappa)` of the quantum-limited
/// amplifier, mapping `input_dim` levels into `output_dim` levels.
pub fn amplifier_kraus(kappa: f64, input_dim: usize, output_dim: usize) -> Result<KrausSet> {
    check_kappa(kappa)?;
    check_output_dim(input_dim, output_dim)?;
    let coef = AttenuatorCoefficients::new(1.0 / kappa, output_dim);
    let scale = 1.0 / kappa.sqrt();
    let operators = (0..output_dim)
        .map(|l| {
            let mut a = CMatrix::zeros(output_dim, output_dim);
            for m in 0..input_dim.min(output_dim - l) {
                a[(m + l, m)] = Complex64::new(scale * coef.get(m, l), 0.0);
            }
            FockOperator::from_matrix_unchecked(a)
        })
        .collect();
    Ok(KrausSet {
        operators,
        parameter: kappa,
        input_dim,
        output_dim,
    })
}

fn check_output_dim(input_dim: usize, output_dim: usize) -> Result<()> {
    check_dim(input_dim)?;
    if output_dim < input_dim {
        return Err(Error::DimensionMismatch {
            expected: input_dim,
            found: output_dim,
        });
    }
    Ok(())
}

/// Quantum-limited attenuator of transmissivity `lambda`.
///
/// Trace-preserving and exact on the truncated space; Fock-diagonal inputs
/// give Fock-diagonal outputs.
pub fn apply_attenuator(x: &FockOperator, lambda: f64) -> Result<FockOperator> {
    check_lambda(lambda)?;
    let d = x.dim();
    let coef = AttenuatorCoefficients::new(lambda, d);
    let xm = x.matrix();
    let out = CMatrix::from_fn(d, d, |m, n| {
        let mut acc = ZERO;
        for l in 0..d - m.max(n) {
            acc += xm[(m + l, n + l)] * (coef.get(m, l) * coef.get(n, l));
        }
        acc
    });
    Ok(FockOperator::from_matrix_unchecked(out))
}

/// Output dimension used when the caller does not pick one:
/// `ceil(kappa * input_dim) + 20`.
pub fn default_amplifier_dim(kappa: f64, input_dim: usize) -> usize {
    (kappa * input_dim as f64).ceil() as usize + 20
}

/// Probability that the amplifier sends `|n>` at or above level `output_dim`.
pub fn amplifier_tail(kappa: f64, n: usize, output_dim: usize) -> f64 {
    if output_dim <= n {
        return 1.0;
    }
    let coef = AttenuatorCoefficients::new(1.0 / kappa, output_dim);
    let kept: f64 = (0..output_dim - n).map(|l| coef.get(n, l).powi(2)).sum::<f64>() / kappa;
    (1.0 - kept).max(0.0)
}

/// Smallest output dimension (at least the default) for which every input
/// level below `input_dim` loses at most `tail_bound` above the truncation.
pub fn required_amplifier_dim(kappa: f64, input_dim: usize, tail_bound: f64) -> Result<usize> {
    check_kappa(kappa)?;
    check_dim(input_dim)?;
    let mut dim = default_amplifier_dim(kappa, input_dim);
    // The top input level spreads the furthest.
    while amplifier_tail(kappa, input_dim - 1, dim) > tail_bound {
        dim += (dim / 8).max(1);
        if dim > 1 << 14 {
            return Err(Error::Truncation {
                estimate: amplifier_tail(kappa, input_dim - 1, dim),
                bound: tail_bound,
            });
        }
    }
    Ok(dim)
}

/// Quantum-limited amplifier of gain `kappa`, realized as
/// `(1/kappa) sum_l B_l(1/kappa)^dag X B_l(1/kappa)` on `output_dim` levels.
///
/// The reported deficit is `sum_n |X_nn| tail(n)`, which equals the realized
/// trace loss for positive inputs. Fails if it exceeds `max_deficit`.
pub fn apply_amplifier(
    x: &FockOperator,
    kappa: f64,
    output_dim: usize,
    max_deficit: f64,
) -> Result<ChannelOutput> {
    check_kappa(kappa)?;
    let din = x.dim();
    check_output_dim(din, output_dim)?;
    let coef = AttenuatorCoefficients::new(1.0 / kappa, output_dim);
    let xm = x.matrix();
    let inv = 1.0 / kappa;
    let out = CMatrix::from_fn(output_dim, output_dim, |m, n| {
        let hi = m.max(n);
        let lo = m.min(n);
        let first = (hi + 1).saturating_sub(din);
        let mut acc = ZERO;
        for l in first..=lo {
            acc += xm[(m - l, n - l)] * (coef.get(m - l, l) * coef.get(n - l, l));
        }
        acc * inv
    });
    let deficit: f64 = (0..din)
        .map(|n| {
            let kept: f64 = (0..output_dim - n).map(|l| coef.get(n, l).powi(2)).sum::<f64>() * inv;
            xm[(n, n)].norm() * (1.0 - kept).max(0.0)
        })
        .sum();
    if deficit > max_deficit {
        return Err(Error::Truncation {
            estimate: deficit,
            bound: max_deficit,
        });
    }
    Ok(ChannelOutput {
        operator: FockOperator::from_matrix_unchecked(out),
        trace_deficit: deficit,
    })
}

/// General gauge-covariant channel: amplifier `kappa` after attenuator `eta`.
pub fn apply_gauge_covariant(
    x: &FockOperator,
    params: &GaugeCovariantParams,
    output_dim: usize,
    max_deficit: f64,
) -> Result<ChannelOutput> {
    let attenuated = apply_attenuator(x, params.eta)?;
    apply_amplifier(&attenuated, params.kappa, output_dim, max_deficit)
}

/// A channel description that can be turned into Kraus sets for any input size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Channel {
    Attenuator { lambda: f64 },
    Amplifier { kappa: f64, output_dim: usize },
    GaugeCovariant { params: GaugeCovariantParams, output_dim: usize },
}

impl Channel {
    /// Kraus sets in the order they act.
    pub fn kraus_sets(&self, input_dim: usize) -> Result<Vec<KrausSet>> {
        match *self {
            Channel::Attenuator { lambda } => Ok(vec![attenuator_kraus(lambda, input_dim)?]),
            Channel::Amplifier { kappa, output_dim } => {
                Ok(vec![amplifier_kraus(kappa, input_dim, output_dim)?])
            }
            Channel::GaugeCovariant { params, output_dim } => Ok(vec![
                attenuator_kraus(params.eta, input_dim)?,
                amplifier_kraus(params.kappa, input_dim, output_dim)?,
            ]),
        }
    }

    pub fn output_dim(&self, input_dim: usize) -> usize {
        match *self {
            Channel::Attenuator { .. } => input_dim,
            Channel::Amplifier { output_dim, .. } | Channel::GaugeCovariant { output_dim, .. } => {
                output_dim
            }
        }
    }

    /// Applies the channel through its closed-form routes (no Kraus matrices).
    pub fn apply(&self, x: &FockOperator) -> Result<ChannelOutput> {
        match *self {
            Channel::Attenuator { lambda } => Ok(ChannelOutput {
                operator: apply_attenuator(x, lambda)?,
                trace_deficit: 0.0,
            }),
            Channel::Amplifier { kappa, output_dim } => {
                apply_amplifier(x, kappa, output_dim, f64::INFINITY)
            }
            Channel::GaugeCovariant { params, output_dim } => {
                apply_gauge_covariant(x, &params, output_dim, f64::INFINITY)
            }
        }
    }
}

/// Hilbert-Schmidt dual `Phi^dag(Y)`, with `Tr[Y Phi(X)] = Tr[Phi^dag(Y) X]`.
///
/// `y` lives on the channel's output space; the result on `input_dim` levels.
pub fn dual_apply(y: &FockOperator, channel: &Channel, input_dim: usize) -> Result<FockOperator> {
    let sets = channel.kraus_sets(input_dim)?;
    expect_dim(y, channel.output_dim(input_dim))?;
    sets.iter()
        .rev()
        .try_fold(y.clone(), |acc, set| set.apply_dual(&acc))
}

/// Lindbladian `L(X) = a X a^dag - (N X + X N) / 2` of the attenuator
/// semigroup. Exact on the truncated space.
pub fn lindblad_apply(x: &FockOperator) -> FockOperator {
    let d = x.dim();
    let xm = x.matrix();
    let out = CMatrix::from_fn(d, d, |m, n| {
        let mut v = xm[(m, n)] * (-0.5 * (m + n) as f64);
        if m + 1 < d && n + 1 < d {
            v += xm[(m + 1, n + 1)] * (((m + 1) * (n + 1)) as f64).sqrt();
        }
        v
    });
    FockOperator::from_matrix_unchecked(out)
}

/// Integrates `dX/dt = L(X)` to time `t` with classical fixed-step RK4.
///
/// Uses `ceil(t / dt)` equal steps, so the final step lands exactly on `t`.
pub fn evolve_lindblad(x: &FockOperator, t: f64, dt: f64) -> Result<FockOperator> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "dt",
            value: dt,
            range: "(0, inf)",
        });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "t",
            value: t,
            range: "[0, inf)",
        });
    }
    if t == 0.0 {
        return Ok(x.clone());
    }
    let steps = (t / dt).ceil() as usize;
    let h = t / steps as f64;
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let sixth = Complex64::new(h / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let mut state = x.matrix().clone();
    for _ in 0..steps {
        let k1 = lindblad_matrix(&state);
        let k2 = lindblad_matrix(&(&state + &k1 * half));
        let k3 = lindblad_matrix(&(&state + &k2 * half));
        let k4 = lindblad_matrix(&(&state + &k3 * full));
        state += (k1 + (k2 + k3) * two + k4) * sixth;
    }
    Ok(FockOperator::from_matrix_unchecked(state))
}

fn lindblad_matrix(x: &CMatrix) -> CMatrix {
    lindblad_apply(&FockOperator::from_matrix_unchecked(x.clone())).into_matrix()
}
