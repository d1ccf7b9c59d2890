//! Randomized certification of the majorization properties of
//! gauge-covariant Gaussian channels.
//!
//! Every trial owns an RNG seeded from `(master seed, cell, trial)`, so
//! reports are identical whether trials run serially or in parallel, and any
//! single trial can be replayed from its record.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    apply_attenuator, apply_gauge_covariant, dual_apply, required_amplifier_dim, Channel,
    GaugeCovariantParams,
};
use crate::entropy::{renyi_operator, von_neumann_operator};
use crate::error::{Error, Result};
use crate::fock::{
    char_function, complex_gaussian, partial_sums, random_density_with, random_pure_state,
    random_simplex, spectrum, DensityMatrix, FockOperator, CMatrix,
};
use crate::majorization::{fock_rearrangement, is_passive, weakly_submajorizes};

/// Which random inputs a certification run draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFamily {
    /// Haar-rotated states with a spectrum uniform on the simplex.
    Mixed,
    /// Haar-random pure states; their Fock rearrangement is the vacuum.
    Pure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    pub dims: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub noises: Vec<f64>,
    pub trials_per_cell: usize,
    pub seed: u64,
    /// Additive slack allowed on each partial sum.
    pub tolerance: f64,
    /// Off-diagonal and monotonicity slack for the passivity check.
    pub passivity_tolerance: f64,
    /// Slack for the von Neumann and Renyi-2 orderings.
    pub entropy_tolerance: f64,
    /// Largest trace weight the amplifier stage may lose.
    pub max_trace_deficit: f64,
    pub input: InputFamily,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            dims: (2..=8).collect(),
            lambdas: vec![0.2, 0.5, 0.8],
            noises: vec![0.0, 0.5, 1.0],
            trials_per_cell: 500,
            seed: 0,
            tolerance: 1e-9,
            passivity_tolerance: 1e-10,
            entropy_tolerance: 1e-9,
            max_trace_deficit: 1e-13,
            input: InputFamily::Mixed,
        }
    }
}

impl CertifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.lambdas.is_empty() || self.noises.is_empty() {
            return Err(Error::ParameterOutOfRange {
                name: "grid size",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        if self.trials_per_cell == 0 {
            return Err(Error::ParameterOutOfRange {
                name: "trials_per_cell",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidDimension(d));
        }
        for &l in &self.lambdas {
            GaugeCovariantParams::new(l, 0.0)?;
        }
        for &n in &self.noises {
            GaugeCovariantParams::new(1.0, n)?;
        }
        Ok(())
    }

    fn cells(&self) -> usize {
        self.dims.len() * self.lambdas.len() * self.noises.len()
    }

    fn total_trials(&self) -> usize {
        self.cells() * self.trials_per_cell
    }

    /// Splits a flat trial index into `(cell, trial)`.
    fn locate(&self, index: usize) -> (CellIndex, usize) {
        let cell = index / self.trials_per_cell;
        let trial = index % self.trials_per_cell;
        let per_dim = self.lambdas.len() * self.noises.len();
        (
            CellIndex {
                dim: cell / per_dim,
                lambda: (cell % per_dim) / self.noises.len(),
                noise: cell % self.noises.len(),
            },
            trial,
        )
    }
}

/// Position of a cell in the `dims x lambdas x noises` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellIndex {
    pub dim: usize,
    pub lambda: usize,
    pub noise: usize,
}

/// Result of one certification trial, with enough state to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub cell: CellIndex,
    pub trial: usize,
    pub seed: u64,
    pub dim: usize,
    pub lambda: f64,
    pub noise: f64,
    pub output_dim: usize,
    /// Smallest partial-sum slack of `Phi(rho_down)` over `Phi(rho)`.
    pub min_slack: f64,
    pub output_passive: bool,
    /// `S(Phi(rho_down)) - S(Phi(rho))`; should not exceed the tolerance.
    pub von_neumann_gap: f64,
    /// Same for the Renyi-2 entropy.
    pub renyi2_gap: f64,
    pub trace_deficit: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub trials: usize,
    pub failures: usize,
    pub worst_slack: f64,
    pub worst_von_neumann_gap: f64,
    pub worst_renyi2_gap: f64,
    pub max_trace_deficit: f64,
    pub failure_records: Vec<TrialOutcome>,
    pub config: CertifyConfig,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// RNG seed of one trial, derived from the master seed and its coordinates.
pub fn trial_seed(master: u64, cell: CellIndex, trial: usize) -> u64 {
    let mut h = splitmix64(master);
    for part in [cell.dim, cell.lambda, cell.noise, trial] {
        h = splitmix64(h ^ part as u64);
    }
    h
}

/// Runs a single trial of [`certify_main_theorem`].
pub fn run_trial(config: &CertifyConfig, cell: CellIndex, trial: usize) -> Result<TrialOutcome> {
    let dim = config.dims[cell.dim];
    let lambda = config.lambdas[cell.lambda];
    let noise = config.noises[cell.noise];
    let params = GaugeCovariantParams::new(lambda, noise)?;
    let output_dim = required_amplifier_dim(params.kappa, dim, config.max_trace_deficit)?;
    let seed = trial_seed(config.seed, cell, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = match config.input {
        InputFamily::Mixed => random_density_with(dim, None, &mut rng)?,
        InputFamily::Pure => random_pure_state(dim, &mut rng)?,
    };
    let rho_down = fock_rearrangement(rho.operator())?;

    let out = apply_gauge_covariant(rho.operator(), &params, output_dim, config.max_trace_deficit)?;
    let out_down = apply_gauge_covariant(&rho_down, &params, output_dim, config.max_trace_deficit)?;

    let report = weakly_submajorizes(
        &spectrum(&out_down.operator)?,
        &spectrum(&out.operator)?,
        config.tolerance,
    );
    let min_slack = report.min_slack();
    let output_passive = is_passive(&out_down.operator, config.passivity_tolerance);
    let von_neumann_gap =
        von_neumann_operator(&out_down.operator)? - von_neumann_operator(&out.operator)?;
    let renyi2_gap =
        renyi_operator(&out_down.operator, 2.0)? - renyi_operator(&out.operator, 2.0)?;
    let passed = min_slack >= -config.tolerance
        && output_passive
        && von_neumann_gap <= config.entropy_tolerance
        && renyi2_gap <= config.entropy_tolerance;

    Ok(TrialOutcome {
        cell,
        trial,
        seed,
        dim,
        lambda,
        noise,
        output_dim,
        min_slack,
        output_passive,
        von_neumann_gap,
        renyi2_gap,
        trace_deficit: out.trace_deficit.max(out_down.trace_deficit),
        passed,
    })
}

/// Draws random inputs over the configured grid and checks, per trial, that
/// `Phi(rho_down)` weakly sub-majorizes `Phi(rho)`, that `Phi(rho_down)` is
/// passive, and that its von Neumann and Renyi-2 entropies are not larger.
pub fn certify_main_theorem(config: &CertifyConfig) -> Result<CertificationReport> {
    let outcomes = certify_trials(config)?;
    Ok(summarize(config, &outcomes))
}

/// Every trial outcome, in grid order.
pub fn certify_trials(config: &CertifyConfig) -> Result<Vec<TrialOutcome>> {
    config.validate()?;
    (0..config.total_trials())
        .into_par_iter()
        .map(|i| {
            let (cell, trial) = config.locate(i);
            run_trial(config, cell, trial)
        })
        .collect()
}

fn summarize(config: &CertifyConfig, outcomes: &[TrialOutcome]) -> CertificationReport {
    let failure_records: Vec<TrialOutcome> =
        outcomes.iter().filter(|o| !o.passed).cloned().collect();
    CertificationReport {
        trials: outcomes.len(),
        failures: failure_records.len(),
        worst_slack: outcomes.iter().map(|o| o.min_slack).fold(f64::INFINITY, f64::min),
        worst_von_neumann_gap: outcomes
            .iter()
            .map(|o| o.von_neumann_gap)
            .fold(f64::NEG_INFINITY, f64::max),
        worst_renyi2_gap: outcomes
            .iter()
            .map(|o| o.renyi2_gap)
            .fold(f64::NEG_INFINITY, f64::max),
        max_trace_deficit: outcomes.iter().map(|o| o.trace_deficit).fold(0.0, f64::max),
        failure_records,
        config: config.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub t_max: f64,
    pub steps: usize,
    /// Slack on `ds_n/dt <= (n+1)(s_{n+1} - s_n)`.
    pub feasibility_tolerance: f64,
    /// Slack on `s_n(t) <= s_n_down(t)`.
    pub order_tolerance: f64,
    /// Largest accepted residual of the passive partial-sum ODE.
    pub ode_tolerance: f64,
    /// Adjacent-eigenvalue gap below which a time counts as degenerate.
    pub degeneracy_tolerance: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            t_max: 2.0,
            steps: 2000,
            feasibility_tolerance: 1e-6,
            order_tolerance: 1e-9,
            ode_tolerance: 1e-6,
            degeneracy_tolerance: 1e-10,
        }
    }
}

/// Partial sums along `rho(t) = e^{tL}(rho)` and `e^{tL}(rho_down)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// `partial_sums[i][n]`: sum of the `n+1` largest eigenvalues of `rho(t_i)`.
    pub partial_sums: Vec<Vec<f64>>,
    /// `passive_partial_sums[i][n]`: sum of `<k|e^{tL}(rho_down)|k>` for `k <= n`.
    pub passive_partial_sums: Vec<Vec<f64>>,
    /// Fock-basis populations `<n|rho(t_i)|n>`.
    pub populations: Vec<Vec<f64>>,
    pub degenerate: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryChecks {
    /// Smallest `(n+1)(s_{n+1} - s_n) - ds_n/dt` over non-degenerate interior times.
    pub worst_inequality_slack: f64,
    /// Largest `|ds_n_down/dt - (n+1)(s_down_{n+1} - s_down_n)|`.
    pub worst_ode_residual: f64,
    /// Smallest `s_n_down(t) - s_n(t)`.
    pub worst_order_slack: f64,
    /// Largest `|s_{D-1}(t) - 1|`.
    pub worst_trace_error: f64,
    pub checked_times: usize,
    pub skipped_degenerate: usize,
    pub inequality_holds: bool,
    pub ode_holds: bool,
    pub order_holds: bool,
}

impl TrajectoryChecks {
    pub fn passed(&self) -> bool {
        self.inequality_holds && self.ode_holds && self.order_holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub record: TrajectoryRecord,
    pub checks: TrajectoryChecks,
}

/// Follows `rho` and its Fock rearrangement along the attenuator semigroup
/// on a uniform grid of `steps + 1` times in `[0, t_max]` and checks the
/// partial-sum differential inequality, the passive ODE, and the ordering
/// `s_n(t) <= s_n_down(t)`. The states at each time come from the Kraus form
/// with `lambda = e^{-t}`.
pub fn trajectory_check(rho: &DensityMatrix, config: &TrajectoryConfig) -> Result<TrajectoryReport> {
    if config.steps < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "steps",
            value: config.steps as f64,
            range: "[2, inf)",
        });
    }
    if !(config.t_max > 0.0) || !config.t_max.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "t_max",
            value: config.t_max,
            range: "(0, inf)",
        });
    }
    let x = rho.operator();
    let x_down = fock_rearrangement(x)?;
    let dt = config.t_max / config.steps as f64;

    let mut record = TrajectoryRecord {
        times: Vec::with_capacity(config.steps + 1),
        partial_sums: Vec::with_capacity(config.steps + 1),
        passive_partial_sums: Vec::with_capacity(config.steps + 1),
        populations: Vec::with_capacity(config.steps + 1),
        degenerate: Vec::with_capacity(config.steps + 1),
    };
    for i in 0..=config.steps {
        let t = i as f64 * dt;
        let lambda = (-t).exp();
        let evolved = apply_attenuator(x, lambda)?;
        let s = spectrum(&evolved)?;
        let passive = apply_attenuator(&x_down, lambda)?;
        record.times.push(t);
        record.degenerate.push(s.min_gap() < config.degeneracy_tolerance);
        record.partial_sums.push(s.partial_sums());
        record.passive_partial_sums.push(partial_sums(&passive.diagonal_re()));
        record.populations.push(evolved.diagonal_re());
    }

    let checks = evaluate_trajectory(&record, dt, config);
    Ok(TrajectoryReport { record, checks })
}

fn evaluate_trajectory(record: &TrajectoryRecord, dt: f64, config: &TrajectoryConfig) -> TrajectoryChecks {
    let steps = record.times.len() - 1;
    let d = record.partial_sums[0].len();
    let mut worst_inequality_slack = f64::INFINITY;
    let mut worst_ode_residual = 0.0f64;
    let mut checked_times = 0;
    let mut skipped_degenerate = 0;

    for i in 1..steps {
        let s = &record.partial_sums;
        let sd = &record.passive_partial_sums;
        for n in 0..d.saturating_sub(1) {
            let rate = (n + 1) as f64;
            let fd_down = (sd[i + 1][n] - sd[i - 1][n]) / (2.0 * dt);
            let rhs_down = rate * (sd[i][n + 1] - sd[i][n]);
            worst_ode_residual = worst_ode_residual.max((fd_down - rhs_down).abs());
        }
        if record.degenerate[i] {
            skipped_degenerate += 1;
            continue;
        }
        checked_times += 1;
        for n in 0..d.saturating_sub(1) {
            let rate = (n + 1) as f64;
            let fd = (s[i + 1][n] - s[i - 1][n]) / (2.0 * dt);
            let rhs = rate * (s[i][n + 1] - s[i][n]);
            worst_inequality_slack = worst_inequality_slack.min(rhs - fd);
        }
    }

    let mut worst_order_slack = f64::INFINITY;
    let mut worst_trace_error = 0.0f64;
    for (s, sd) in record.partial_sums.iter().zip(&record.passive_partial_sums) {
        for (a, b) in s.iter().zip(sd) {
            worst_order_slack = worst_order_slack.min(b - a);
        }
        worst_trace_error = worst_trace_error.max((s[d - 1] - 1.0).abs());
    }

    TrajectoryChecks {
        worst_inequality_slack,
        worst_ode_residual,
        worst_order_slack,
        worst_trace_error,
        checked_times,
        skipped_degenerate,
        inequality_holds: worst_inequality_slack >= -config.feasibility_tolerance,
        ode_holds: worst_ode_residual <= config.ode_tolerance,
        order_holds: worst_order_slack >= -config.order_tolerance,
    }
}

/// `points x points` grid on `[-radius, radius]^2`, restricted to `|z| <= radius`.
pub fn z_grid(points: usize, radius: f64) -> Vec<Complex64> {
    if points == 0 {
        return Vec::new();
    }
    let step = if points > 1 {
        2.0 * radius / (points - 1) as f64
    } else {
        0.0
    };
    let mut grid = Vec::with_capacity(points * points);
    for i in 0..points {
        for j in 0..points {
            let (re, im) = if points > 1 {
                (-radius + i as f64 * step, -radius + j as f64 * step)
            } else {
                (0.0, 0.0)
            };
            let z = Complex64::new(re, im);
            if z.norm() <= radius * (1.0 + 1e-12) {
                grid.push(z);
            }
        }
    }
    grid
}

/// Largest relative deviation between `chi_{Phi(X)}(z)` and
/// `exp(-|lambda-1|(N+1/2)|z|^2) chi_X(sqrt(lambda) z)` over `z_grid`.
///
/// The channel output is formed on `output_dim` levels. Values of the right
/// side smaller than `1e-12 |Tr X|` are compared in absolute terms.
pub fn char_function_action_check(
    x: &FockOperator,
    params: &GaugeCovariantParams,
    z_grid: &[Complex64],
    output_dim: usize,
) -> Result<f64> {
    let out = apply_gauge_covariant(x, params, output_dim, f64::INFINITY)?;
    let floor = (1e-12 * x.trace().norm()).max(f64::MIN_POSITIVE);
    let scale = params.lambda.sqrt();
    let mut worst = 0.0f64;
    for &z in z_grid {
        let lhs = char_function(&out.operator, z)?;
        let rhs = char_function(x, z * scale)? * (-params.gaussian_exponent() * z.norm_sqr()).exp();
        worst = worst.max((lhs - rhs).norm() / rhs.norm().max(floor));
    }
    Ok(worst)
}

fn random_complex_operator(dim: usize, rng: &mut ChaCha8Rng) -> FockOperator {
    FockOperator::from_matrix_unchecked(CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng)))
}

/// Largest `|Tr[Y Phi(X)] - Tr[Phi^dag(Y) X]|` over random complex `(X, Y)`
/// pairs for the attenuator. The left side uses the closed-form channel, the
/// right side the Kraus matrices of the dual.
pub fn duality_check(trials: usize, dim: usize, lambda: f64, seed: u64) -> Result<f64> {
    let channel = Channel::Attenuator { lambda };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let x = random_complex_operator(dim, &mut rng);
        let y = random_complex_operator(dim, &mut rng);
        let lhs = y.trace_product(&apply_attenuator(&x, lambda)?)?;
        let rhs = dual_apply(&y, &channel, dim)?.trace_product(&x)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// One row of an entropy sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub noise: f64,
    pub input_family: String,
    pub von_neumann_out: f64,
    pub renyi2_out: f64,
    /// Passive output entropies do not exceed the rotated ones (within tolerance).
    pub ordered: bool,
}

/// For one random spectrum, compares output entropies of the passive input
/// `diag(spectrum)` against a Haar-rotated input with the same spectrum over
/// the `(lambda, N)` grid. Emits two rows per grid point.
pub fn entropy_sweep(
    lambdas: &[f64],
    noises: &[f64],
    dim: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<SweepRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = random_simplex(dim, &mut rng);
    weights.sort_by(|a, b| b.total_cmp(a));
    let passive = FockOperator::from_diagonal(&weights)?;
    let rotated = random_density_with(dim, Some(&weights), &mut rng)?
        .into_operator();

    let mut rows = Vec::with_capacity(2 * lambdas.len() * noises.len());
    for &lambda in lambdas {
        for &noise in noises {
            let params = GaugeCovariantParams::new(lambda, noise)?;
            let out_dim = required_amplifier_dim(params.kappa, dim, 1e-13)?;
            let p = apply_gauge_covariant(&passive, &params, out_dim, 1e-13)?.operator;
            let r = apply_gauge_covariant(&rotated, &params, out_dim, 1e-13)?.operator;
            let (vp, vr) = (von_neumann_operator(&p)?, von_neumann_operator(&r)?);
            let (rp, rr) = (renyi_operator(&p, 2.0)?, renyi_operator(&r, 2.0)?);
            let ordered = vp <= vr + tol && rp <= rr + tol;
            rows.push(SweepRow {
                lambda,
                noise,
                input_family: "passive".into(),
                von_neumann_out: vp,
                renyi2_out: rp,
                ordered,
            });
            rows.push(SweepRow {
                lambda,
                noise,
                input_family: "rotated".into(),
                von_neumann_out: vr,
                renyi2_out: rr,
                ordered,
            });
        }
    }
    Ok(rows)
}

/// The state `|psi><psi|` for `psi = (|0> + |1>)/sqrt(2)` embedded in `dim` levels.
pub fn plus_state(dim: usize) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut psi = DVector::zeros(dim);
    psi[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[1] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    DensityMatrix::normalized(FockOperator::outer(&psi)?)
}
