//! Channel, displacement and entropy values compared against independent
//! constructions written here from first principles.

use fockmaj::channels::{apply_amplifier, apply_attenuator, apply_gauge_covariant, lindblad_apply};
use fockmaj::entropy::{shannon, von_neumann};
use fockmaj::fock::{annihilation, char_function, displacement, random_density, thermal_state, FockOperator};
use fockmaj::harness::plus_state;
use fockmaj::majorization::{fock_rearrangement, operator_submajorizes};
use fockmaj::thinning::{thin, ClassicalDist};
use fockmaj::{spectrum, trace_distance, GaugeCovariantParams};
use nalgebra::DMatrix;
use num_complex::Complex64;

type M = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `sum_l (1-lambda)^l / l! * lambda^{N/2} a^l X (a^dag)^l lambda^{N/2}`.
fn attenuator_by_ladder(x: &M, lambda: f64) -> M {
    let d = x.nrows();
    let a = annihilation(d).unwrap().into_matrix();
    let half_n = M::from_diagonal(&nalgebra::DVector::from_fn(d, |n, _| c(lambda.powf(n as f64 / 2.0))));
    let mut al = M::identity(d, d);
    let mut out = M::zeros(d, d);
    for l in 0..d {
        let w = (1.0 - lambda).powi(l as i32) / factorial(l);
        out += (&half_n * &al * x * al.adjoint() * &half_n) * c(w);
        al = &a * al;
    }
    out
}

#[test]
fn attenuator_matches_ladder_representation() {
    for (seed, &lambda) in [0.0, 0.13, 0.5, 0.87, 1.0].iter().enumerate() {
        let rho = random_density(7, seed as u64, None).unwrap();
        let fast = apply_attenuator(rho.operator(), lambda).unwrap();
        let oracle = attenuator_by_ladder(rho.operator().matrix(), lambda);
        assert!(max_abs(&(fast.matrix() - oracle)) < 1e-14, "lambda {lambda}");
    }
}

/// Taylor series with scaling and squaring.
fn expm(a: &M) -> M {
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1.0);
    let squarings = norm.log2().ceil() as u32 + 4;
    let scaled = a * c(0.5f64.powi(squarings as i32));
    let d = a.nrows();
    let mut sum = M::identity(d, d);
    let mut term = M::identity(d, d);
    for k in 1..30 {
        term = &term * &scaled * c(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn generator(z: Complex64, dim: usize) -> M {
    let a = annihilation(dim).unwrap().into_matrix();
    a.adjoint() * z - &a * z.conj()
}

#[test]
fn displacement_matches_matrix_exponential() {
    for &z in &[c(0.3), Complex64::new(0.7, -0.4), Complex64::new(-1.0, 1.0), c(2.0)] {
        let big = expm(&generator(z, 120));
        let d = displacement(z, 30).unwrap();
        let block = big.view((0, 0), (30, 30)).into_owned();
        assert!(max_abs(&(d.matrix() - block)) < 1e-11, "z = {z}");
    }
}

#[test]
fn displacement_block_is_unitary_in_the_limit() {
    let z = Complex64::new(0.6, 0.8);
    let fwd = displacement(z, 120).unwrap().into_matrix();
    let bwd = displacement(-z, 120).unwrap().into_matrix();
    let prod = (fwd * bwd).view((0, 0), (40, 40)).into_owned();
    assert!(max_abs(&(prod - M::identity(40, 40))) < 1e-12);
    assert!(displacement(c(6.0), 10).is_err());
}

#[test]
fn characteristic_function_of_noisy_vacuum() {
    // Vacuum through lambda = 0.5, N = 1 is thermal with mean 0.5, chi(1) = e^{-1}.
    let params = GaugeCovariantParams::new(0.5, 1.0).unwrap();
    let vac = FockOperator::fock_projector(0, 1).unwrap();
    let out = apply_gauge_covariant(&vac, &params, 80, 1e-12).unwrap();
    let chi = char_function(&out.operator, c(1.0)).unwrap();
    assert!((chi - c((-1.0f64).exp())).norm() < 1e-12);

    let th = thermal_state(0.5, 80).unwrap();
    assert!(trace_distance(&out.operator, th.operator()).unwrap() < 1e-12);

    // Vacuum chi(z) = e^{-|z|^2/2}.
    let vac40 = FockOperator::fock_projector(0, 40).unwrap();
    let z = Complex64::new(0.3, -1.1);
    let chi = char_function(&vac40, z).unwrap();
    assert!((chi - c((-0.5 * z.norm_sqr()).exp())).norm() < 1e-14);
}

#[test]
fn parameter_decomposition_examples() {
    let cases = [
        (0.5, 0.0, 0.5, 1.0),
        (0.5, 1.0, 1.0 / 3.0, 1.5),
        (2.0, 0.0, 1.0, 2.0),
        (2.0, 1.0, 2.0 / 3.0, 3.0),
        (1.0, 0.0, 1.0, 1.0),
    ];
    for &(lambda, noise, eta, kappa) in &cases {
        let p = GaugeCovariantParams::new(lambda, noise).unwrap();
        assert!((p.eta - eta).abs() < 1e-15 && (p.kappa - kappa).abs() < 1e-15);
        assert!((p.eta * p.kappa - lambda).abs() < 1e-15);
        let exponent = (2.0 * p.kappa - p.kappa * p.eta - 1.0) / 2.0;
        assert!((exponent - p.gaussian_exponent()).abs() < 1e-14);
    }
}

#[test]
fn thermal_outputs_match_geometric_law() {
    let geometric = |nbar: f64, dim: usize| -> Vec<f64> {
        (0..dim).map(|n| nbar.powi(n as i32) / (1.0 + nbar).powi(n as i32 + 1)).collect()
    };
    let th = thermal_state(2.0, 80).unwrap();
    let out = apply_attenuator(th.operator(), 0.25).unwrap();
    let expected = geometric(0.5, 80);
    for (got, want) in out.diagonal_re().iter().zip(&expected) {
        assert!((got - want).abs() < 1e-12);
    }

    let amp = apply_amplifier(&FockOperator::fock_projector(0, 1).unwrap(), 3.0, 150, 1e-12).unwrap();
    let expected = geometric(2.0, 150);
    for (got, want) in amp.operator.diagonal_re().iter().zip(&expected) {
        assert!((got - want).abs() < 1e-14);
    }
}

#[test]
fn attenuator_dual_is_scaled_amplifier() {
    // Tr[Y Phi_lambda(X)] = (1/lambda) Tr[Amp_{1/lambda}(Y) X] on the truncated block.
    for (seed, &lambda) in [0.2, 0.5, 0.9].iter().enumerate() {
        let x = random_density(6, 40 + seed as u64, None).unwrap();
        let y = random_density(6, 50 + seed as u64, None).unwrap();
        let lhs = y.operator().trace_product(&apply_attenuator(x.operator(), lambda).unwrap()).unwrap();
        let amp = apply_amplifier(y.operator(), 1.0 / lambda, 6, f64::INFINITY).unwrap();
        let rhs = amp.operator.trace_product(x.operator()).unwrap() / lambda;
        assert!((lhs - rhs).norm() < 1e-13, "lambda {lambda}: {lhs} vs {rhs}");
    }
}

#[test]
fn lindbladian_is_derivative_of_attenuator() {
    let rho = random_density(6, 11, None).unwrap();
    let h: f64 = 1e-5;
    // One-sided second-order difference in t at t = 0, with lambda = e^{-t}.
    let one = apply_attenuator(rho.operator(), (-h).exp()).unwrap();
    let two = apply_attenuator(rho.operator(), (-2.0 * h).exp()).unwrap();
    let forward = (one.matrix() * c(4.0) - two.matrix() - rho.operator().matrix() * c(3.0)) / c(2.0 * h);
    let l = lindblad_apply(rho.operator());
    let err = max_abs(&(forward - l.matrix()));
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn plus_state_two_level_oracle() {
    for &lambda in &[0.1, 0.5, 0.8] {
        let plus = plus_state(2).unwrap();
        let out = apply_attenuator(plus.operator(), lambda).unwrap();
        let expected = M::from_row_slice(
            2,
            2,
            &[c(1.0 - lambda / 2.0), c(lambda.sqrt() / 2.0), c(lambda.sqrt() / 2.0), c(lambda / 2.0)],
        );
        assert!(max_abs(&(out.matrix() - &expected)) < 1e-15);

        let root = ((1.0 - lambda).powi(2) + lambda).sqrt();
        let s = spectrum(&out).unwrap();
        assert!((s.values()[0] - (1.0 + root) / 2.0).abs() < 1e-14);
        assert!((s.values()[1] - (1.0 - root) / 2.0).abs() < 1e-14);

        // The rearranged input is the vacuum, a fixed point.
        let passive = fock_rearrangement(plus.operator()).unwrap();
        let passive_out = apply_attenuator(&passive, lambda).unwrap();
        assert!((passive_out[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(operator_submajorizes(&passive_out, &out, 1e-12).unwrap().majorized);
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[test]
fn thinning_matches_binomial_sum() {
    let p = ClassicalDist::new(vec![0.1, 0.2, 0.05, 0.3, 0.15, 0.2]).unwrap();
    let lambda = 0.35;
    let out = thin(&p, lambda).unwrap();
    for n in 0..6 {
        let want: f64 = (n..6)
            .map(|k| binomial(k, n) * lambda.powi(n as i32) * (1.0 - lambda).powi((k - n) as i32) * p.weights()[k])
            .sum();
        assert!((out.weights()[n] - want).abs() < 1e-15);
    }
}

#[test]
fn entropies_match_closed_forms() {
    for &nbar in &[0.5, 1.0, 3.0] {
        let th = thermal_state(nbar, 300).unwrap();
        let rho = fockmaj::DensityMatrix::normalized(th.into_operator()).unwrap();
        let want = (nbar + 1.0) * (nbar + 1.0).ln() - nbar * nbar.ln();
        assert!((von_neumann(&rho).unwrap() - want).abs() < 1e-9);
    }
    let delta_out = thin(&ClassicalDist::delta(2, 3).unwrap(), 0.5).unwrap();
    assert!((shannon(&delta_out).unwrap() - 1.5 * 2f64.ln()).abs() < 1e-15);
}
