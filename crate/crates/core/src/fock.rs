//! Operator algebra on the truncated Fock space span{|0>, ..., |D-1>}.
//!
//! Operators are dense complex `D x D` matrices with entry `(m, n) = <m|X|n>`.
//! Everything here is a pure function of its inputs; randomness is always
//! driven by an explicit seed or caller-owned RNG.

use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Absolute tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues above `-POSITIVITY_TOL` count as nonnegative.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Adjacent eigenvalues closer than this mark a spectrum as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Largest relative truncation error accepted for the displacement operator.
pub const DISPLACEMENT_TRUNCATION_BOUND: f64 = 1e-3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A bounded operator restricted to the first `dim` Fock states.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: CMatrix,
}

impl FockOperator {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { matrix })
    }

    /// Builds an operator from a row-major list of entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::from_matrix(CMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: CMatrix::zeros(dim, dim),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: CMatrix::identity(dim, dim),
        })
    }

    /// Diagonal operator `sum_n d_n |n><n|`.
    pub fn from_diagonal(diagonal: &[f64]) -> Result<Self> {
        check_dim(diagonal.len())?;
        let d = DVector::from_iterator(
            diagonal.len(),
            diagonal.iter().map(|&x| Complex64::new(x, 0.0)),
        );
        Self::from_matrix(CMatrix::from_diagonal(&d))
    }

    /// The projector `|psi><psi|` (the vector is used as given, not normalized).
    pub fn outer(psi: &DVector<Complex64>) -> Result<Self> {
        Self::from_matrix(psi * psi.adjoint())
    }

    /// `|n><n|` on a `dim`-level space.
    pub fn fock_projector(n: usize, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: n + 1,
            });
        }
        let mut matrix = CMatrix::zeros(dim, dim);
        matrix[(n, n)] = ONE;
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * Complex64::new(factor, 0.0),
        }
    }

    /// Real parts of the diagonal entries, i.e. the Fock-basis populations.
    pub fn diagonal_re(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.matrix[(n, n)].re).collect()
    }

    /// Largest modulus among the off-diagonal entries.
    pub fn max_off_diagonal(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for m in 0..d {
            for n in 0..d {
                if m != n {
                    worst = worst.max(self.matrix[(m, n)].norm());
                }
            }
        }
        worst
    }

    /// `max |X - X^dag|` over all entries.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for m in 0..d {
            for n in m..d {
                worst = worst.max((self.matrix[(m, n)] - self.matrix[(n, m)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Zero-pads the operator into a larger truncated space.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        let mut matrix = CMatrix::zeros(dim, dim);
        matrix
            .view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.matrix);
        Ok(Self { matrix })
    }

    /// Compresses the operator onto the first `dim` Fock states.
    pub fn compress(&self, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if dim > self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(Self {
            matrix: self.matrix.view((0, 0), (dim, dim)).into_owned(),
        })
    }

    /// `Tr[self * other]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        same_dim(self, other)?;
        let d = self.dim();
        let mut acc = ZERO;
        for m in 0..d {
            for n in 0..d {
                acc += self.matrix[(m, n)] * other.matrix[(n, m)];
            }
        }
        Ok(acc)
    }

    /// Conjugation `U X U^dag`.
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<Self> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: unitary.nrows(),
            });
        }
        Ok(Self {
            matrix: unitary * &self.matrix * unitary.adjoint(),
        })
    }
}

impl Index<(usize, usize)> for FockOperator {
    type Output = Complex64;

    fn index(&self, index: (usize, usize)) -> &Complex64 {
        &self.matrix[index]
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;

    fn add(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        FockOperator::from_matrix_unchecked(&self.matrix + &rhs.matrix)
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;

    fn sub(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        FockOperator::from_matrix_unchecked(&self.matrix - &rhs.matrix)
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        FockOperator::from_matrix_unchecked(&self.matrix * &rhs.matrix)
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

pub(crate) fn same_dim(a: &FockOperator, b: &FockOperator) -> Result<()> {
    if a.dim() != b.dim() {
        Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        })
    } else {
        Ok(())
    }
}

/// A quantum state on the truncated space, together with the probability
/// weight known to lie above `|D-1>` (`trace_deficit = 1 - Tr rho`).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: FockOperator,
    trace_deficit: f64,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and the trace bookkeeping.
    pub fn new(op: FockOperator, trace_deficit: f64) -> Result<Self> {
        if !(trace_deficit >= 0.0) {
            return Err(Error::ParameterOutOfRange {
                name: "trace_deficit",
                value: trace_deficit,
                range: "[0, 1]",
            });
        }
        let defect = op.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let trace = op.trace().re;
        if trace < 1.0 - trace_deficit - POSITIVITY_TOL || trace > 1.0 + POSITIVITY_TOL {
            return Err(Error::TraceMismatch {
                trace,
                deficit: trace_deficit,
            });
        }
        let spectrum = eigh(&op, HERMITIAN_TOL)?.spectrum;
        if let Some(&min) = spectrum.values().last() {
            if min < -POSITIVITY_TOL {
                return Err(Error::NotPositive(min));
            }
        }
        Ok(Self { op, trace_deficit })
    }

    /// Normalized state with no truncation leakage.
    pub fn normalized(op: FockOperator) -> Result<Self> {
        Self::new(op, 0.0)
    }

    pub(crate) fn new_unchecked(op: FockOperator, trace_deficit: f64) -> Self {
        Self { op, trace_deficit }
    }

    pub fn operator(&self) -> &FockOperator {
        &self.op
    }

    pub fn into_operator(self) -> FockOperator {
        self.op
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

impl AsRef<FockOperator> for DensityMatrix {
    fn as_ref(&self) -> &FockOperator {
        &self.op
    }
}

/// Eigenvalues in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    degenerate: bool,
}

impl Spectrum {
    /// Wraps an already-decreasing sequence; fails on the first increase.
    pub fn from_decreasing(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(i) = values.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::NotDecreasing(i + 1));
        }
        let degenerate = min_gap(&values) < DEGENERACY_TOL;
        Ok(Self { values, degenerate })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// True when two adjacent eigenvalues coincide within [`DEGENERACY_TOL`].
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Smallest gap between adjacent eigenvalues (infinite for length < 2).
    pub fn min_gap(&self) -> f64 {
        min_gap(&self.values)
    }

    /// `s_n = sum_{i <= n} x_i`.
    pub fn partial_sums(&self) -> Vec<f64> {
        partial_sums(&self.values)
    }
}

fn min_gap(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn partial_sums(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub spectrum: Spectrum,
    /// Column `i` is the eigenvector for `spectrum.values()[i]`.
    pub vectors: CMatrix,
}

/// Hermitian eigendecomposition with eigenvalues sorted in decreasing order.
///
/// Ties keep the relative order produced by the solver.
pub fn eigh(x: &FockOperator, hermitian_tol: f64) -> Result<Eigh> {
    let defect = x.hermitian_defect();
    if defect > hermitian_tol {
        return Err(Error::NotHermitian(defect));
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let sym = (x.matrix() + x.matrix().adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let d = x.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok(Eigh {
        spectrum: Spectrum::from_decreasing(values)?,
        vectors,
    })
}

/// Spectrum of a Hermitian operator, using the default tolerance.
pub fn spectrum(x: &FockOperator) -> Result<Spectrum> {
    eigh(x, HERMITIAN_TOL).map(|e| e.spectrum)
}

/// Annihilation operator: `a|n> = sqrt(n) |n-1>`.
pub fn annihilation(dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Ok(FockOperator::from_matrix_unchecked(m))
}

/// Creation operator: `a^dag|n> = sqrt(n+1) |n+1>`, with `|dim-1>` sent to 0.
pub fn creation(dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 0..dim.saturating_sub(1) {
        m[(n + 1, n)] = Complex64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    Ok(FockOperator::from_matrix_unchecked(m))
}

/// Number operator `diag(0, 1, ..., dim-1)`.
pub fn number(dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let diag: Vec<f64> = (0..dim).map(|n| n as f64).collect();
    FockOperator::from_diagonal(&diag)
}

/// Sum of singular values.
pub fn trace_norm(x: &FockOperator) -> f64 {
    x.matrix().clone().svd(false, false).singular_values.sum()
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(x: &FockOperator) -> f64 {
    x.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `||a - b||_1 / 2`.
pub fn trace_distance(a: &FockOperator, b: &FockOperator) -> Result<f64> {
    same_dim(a, b)?;
    Ok(0.5 * trace_norm(&(a - b)))
}

/// Thermal state with mean photon number `mean_photons`, truncated to `dim`
/// levels. Populations are those of the untruncated geometric distribution;
/// the missing tail is recorded as the trace deficit.
pub fn thermal_state(mean_photons: f64, dim: usize) -> Result<DensityMatrix> {
    check_dim(dim)?;
    if !(mean_photons >= 0.0) || !mean_photons.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "mean_photons",
            value: mean_photons,
            range: "[0, inf)",
        });
    }
    let ratio = mean_photons / (mean_photons + 1.0);
    let norm = 1.0 / (mean_photons + 1.0);
    let populations: Vec<f64> = (0..dim).map(|n| norm * ratio.powi(n as i32)).collect();
    // Tail of the geometric series: ratio^dim.
    let deficit = ratio.powi(dim as i32);
    let op = FockOperator::from_diagonal(&populations)?;
    Ok(DensityMatrix::new_unchecked(op, deficit))
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<CMatrix> {
    check_dim(dim)?;
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Standard complex Gaussian with `E|z|^2 = 1`.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Uniform draw from the probability simplex with `dim` vertices.
pub fn random_simplex<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// `U diag(spectrum) U^dag` with Haar-random `U`. Without a spectrum, one is
/// drawn uniformly from the simplex.
pub fn random_density_with<R: Rng + ?Sized>(
    dim: usize,
    spectrum: Option<&[f64]>,
    rng: &mut R,
) -> Result<DensityMatrix> {
    check_dim(dim)?;
    let weights = match spectrum {
        Some(s) => {
            if s.len() > dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.len(),
                });
            }
            if let Some((index, &value)) = s.iter().enumerate().find(|(_, &v)| !(v >= 0.0)) {
                return Err(Error::NegativeWeight { index, value });
            }
            let total: f64 = s.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::NotNormalized(total));
            }
            let mut w = s.to_vec();
            w.resize(dim, 0.0);
            w
        }
        None => random_simplex(dim, rng),
    };
    let u = haar_unitary(dim, rng)?;
    let diag = FockOperator::from_diagonal(&weights)?;
    let mut rho = diag.conjugate_by(&u)?.into_matrix();
    // Remove rounding asymmetry.
    rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(DensityMatrix::new_unchecked(
        FockOperator::from_matrix_unchecked(rho),
        0.0,
    ))
}

/// Seeded variant of [`random_density_with`]; identical seeds give identical states.
pub fn random_density(dim: usize, seed: u64, spectrum: Option<&[f64]>) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_with(dim, spectrum, &mut rng)
}

/// Random pure state `|psi><psi|` with `psi` uniform on the unit sphere.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    check_dim(dim)?;
    let psi = DVector::from_fn(dim, |_, _| complex_gaussian(rng));
    let psi = &psi / Complex64::new(psi.norm(), 0.0);
    Ok(DensityMatrix::new_unchecked(FockOperator::outer(&psi)?, 0.0))
}

/// Tail `sum_{k >= dim} |z|^{2k} / k!` of the exponential series for
/// `e^{|z|^2}`. This bounds the relative weight the coherent state `|z>`
/// places above the truncation and is used as the truncation estimate for
/// the displacement operator.
pub fn displacement_truncation_estimate(z: Complex64, dim: usize) -> f64 {
    let x = z.norm_sqr();
    if x == 0.0 {
        return if dim == 0 { 1.0 } else { 0.0 };
    }
    // ln(x^dim / dim!)
    let ln_first = dim as f64 * x.ln() - (1..=dim).map(|k| (k as f64).ln()).sum::<f64>();
    let mut term = ln_first.exp();
    let mut tail = 0.0;
    let mut k = dim;
    loop {
        tail += term;
        k += 1;
        term *= x / k as f64;
        if (k as f64 > x && term <= tail * 1e-17) || term == 0.0 || k > dim + 100_000 {
            break;
        }
    }
    tail
}

/// Matrix element `<m|D(z)|n>` of `D(z) = exp(z a^dag - conj(z) a)` on the
/// full Fock space, via the associated Laguerre closed form.
pub fn displacement_element(z: Complex64, m: usize, n: usize) -> Complex64 {
    let x = z.norm_sqr();
    if x == 0.0 {
        return if m == n { ONE } else { ZERO };
    }
    let r = x.sqrt();
    // <m|D(z)|n> for m >= n; the other triangle follows from D(z)^dag = D(-z).
    let (hi, lo, w) = if m >= n { (m, n, z) } else { (n, m, -z.conj()) };
    let alpha = hi - lo;
    // sqrt(lo!/hi!) |z|^alpha e^{-x/2}
    let mut prefactor = (-0.5 * x).exp();
    for k in (lo + 1)..=hi {
        prefactor *= r / (k as f64).sqrt();
    }
    let phase = (w / r).powu(alpha as u32);
    phase * (prefactor * laguerre(lo, alpha as f64, x))
}

/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` by forward recurrence.
fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// The block `<m|D(z)|n>`, `m, n < dim`, of the displacement operator.
///
/// Fails when [`displacement_truncation_estimate`] exceeds
/// [`DISPLACEMENT_TRUNCATION_BOUND`].
pub fn displacement(z: Complex64, dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let estimate = displacement_truncation_estimate(z, dim);
    if estimate > DISPLACEMENT_TRUNCATION_BOUND {
        return Err(Error::Truncation {
            estimate,
            bound: DISPLACEMENT_TRUNCATION_BOUND,
        });
    }
    Ok(FockOperator::from_matrix_unchecked(CMatrix::from_fn(
        dim,
        dim,
        |m, n| displacement_element(z, m, n),
    )))
}

/// Characteristic function `chi_X(z) = Tr[D(z) X]`.
pub fn char_function(x: &FockOperator, z: Complex64) -> Result<Complex64> {
    let d = displacement(z, x.dim())?;
    d.trace_product(x)
}
