use nalgebra::DMatrix;
use num_complex::Complex64;

use hfsim::ghz::GhzLabel;
use hfsim::hilbert::DensityMatrix;
use hfsim::measurement::{outcome_probabilities, setting_projectors, Axes};
use hfsim::runner::{source_state, ExperimentConfig};
use hfsim::sampling::Execution;
use hfsim::tomography::{
    exact_frequencies, fidelity, fidelity_statistic, generate_dataset, mle_from_frequencies, mle_reconstruct,
    monte_carlo_errors, MleOptions, SETTINGS,
};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// I, X, Y, Z written out by hand.
fn pauli(k: usize) -> DMatrix<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let m = match k {
        0 => [c(1.0), c(0.0), c(0.0), c(1.0)],
        1 => [c(0.0), c(1.0), c(1.0), c(0.0)],
        2 => [c(0.0), -i, i, c(0.0)],
        _ => [c(1.0), c(0.0), c(0.0), c(-1.0)],
    };
    DMatrix::from_row_slice(2, 2, &m)
}

/// Linear inversion from per-setting probabilities (rows in `XXX, XXY, ..., ZZZ` order).
///
/// An identity factor on a qubit is read from the Z setting by ignoring that qubit's bit.
fn linear_inversion(probs: &[[f64; 8]]) -> DMatrix<Complex64> {
    let mut rho = DMatrix::zeros(8, 8);
    for a in 0..4 {
        for b in 0..4 {
            for d in 0..4 {
                let paulis = [a, b, d];
                // Setting index in base 3 with X=0, Y=1, Z=2; identity measured as Z.
                let row = paulis
                    .iter()
                    .fold(0, |acc, &p| acc * 3 + if p == 0 { 2 } else { p - 1 });
                let mut t = 0.0;
                for (k, &p) in probs[row].iter().enumerate() {
                    let mut sign = 1.0;
                    for (q, &pq) in paulis.iter().enumerate() {
                        if pq != 0 && (k >> (2 - q)) & 1 == 1 {
                            sign = -sign;
                        }
                    }
                    t += sign * p;
                }
                let op = pauli(a).kronecker(&pauli(b)).kronecker(&pauli(d));
                rho += op * c(t / 8.0);
            }
        }
    }
    rho
}

fn per_setting(freqs: &[[f64; 8]]) -> Vec<[f64; 8]> {
    freqs.iter().map(|row| row.map(|f| f * SETTINGS as f64)).collect()
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn linear_inversion_recovers_exact_states() {
    let ghz = GhzLabel::GHZ1.density_matrix().depolarize(0.2).unwrap();
    let li = linear_inversion(&per_setting(&exact_frequencies(&ghz)));
    assert!(max_abs(&(li - ghz.matrix())) < 1e-12);
}

#[test]
fn mle_matches_linear_inversion_on_diagonal_states() {
    let weights = [0.30, 0.05, 0.12, 0.08, 0.15, 0.10, 0.06, 0.14];
    let rho = DensityMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        8,
        weights.map(c),
    )))
    .unwrap();
    let freqs = exact_frequencies(&rho);
    let li = linear_inversion(&per_setting(&freqs));
    let report = mle_from_frequencies(&freqs, MleOptions::default()).unwrap();
    assert!(report.converged);
    let diff = max_abs(&(report.rho.matrix() - li));
    assert!(
        diff < 1e-6,
        "max deviation {diff:e} after {} iterations",
        report.iterations
    );
}

#[test]
fn empirical_probabilities_converge() {
    let rho = GhzLabel::GHZ2.density_matrix().depolarize(0.1).unwrap();
    let shots = 100_000u64;
    let data = generate_dataset(&rho, shots, 99, Execution::default()).unwrap();
    for (row, axes) in Axes::all().into_iter().enumerate() {
        let probs = outcome_probabilities(&rho, &setting_projectors(axes));
        for (k, &p) in probs.iter().enumerate() {
            let n = data.counts().rows[row][k] as f64;
            let f = n / shots as f64;
            let se = (p * (1.0 - p) / shots as f64).sqrt().max(1.0 / shots as f64);
            assert!((f - p).abs() <= 5.0 * se, "{axes} outcome {k}: {f} vs {p}");
        }
    }
}

#[test]
fn monte_carlo_spread_shrinks_with_shots() {
    let target = GhzLabel::GHZ1.density_matrix();
    let data = generate_dataset(&target, 1_000_000, 4, Execution::default()).unwrap();
    let est = monte_carlo_errors(&data, fidelity_statistic(target.clone()), 8, 4, Execution::default()).unwrap();
    assert!(est.std < 0.005, "std {}", est.std);
    assert!(est.mean > 0.999);

    let small = generate_dataset(&target, 1_000, 4, Execution::default()).unwrap();
    let wide = monte_carlo_errors(&small, fidelity_statistic(target), 8, 4, Execution::default()).unwrap();
    assert!(wide.std > est.std);
}

#[test]
fn two_resamples_are_reproducible() {
    let target = GhzLabel::GHZ1.density_matrix();
    let data = generate_dataset(&target, 2_000, 8, Execution::Sequential).unwrap();
    let a = monte_carlo_errors(&data, fidelity_statistic(target.clone()), 2, 21, Execution::Sequential).unwrap();
    let b = monte_carlo_errors(&data, fidelity_statistic(target), 2, 21, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}

#[test]
fn executors_give_identical_results() {
    let rho = GhzLabel::GHZ1.density_matrix().depolarize(0.05).unwrap();
    let seq = generate_dataset(&rho, 5_000, 13, Execution::Sequential).unwrap();
    let par = generate_dataset(&rho, 5_000, 13, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    let target = GhzLabel::GHZ1.density_matrix();
    let a = monte_carlo_errors(&seq, fidelity_statistic(target.clone()), 4, 13, Execution::Sequential).unwrap();
    let b = monte_carlo_errors(&par, fidelity_statistic(target), 4, 13, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn calibrated_fidelity_band() {
    // Depolarizing weight that puts S_M at 3.818 also lands F near the measured 0.968 +- 0.023.
    let config = ExperimentConfig {
        noise_p: 0.0455,
        ..Default::default()
    };
    let rho = source_state(&config).unwrap();
    let data = generate_dataset(&rho, 10_000, 31, Execution::default()).unwrap();
    let report = mle_reconstruct(&data).unwrap();
    let f = fidelity(&report.rho, &GhzLabel::GHZ1.density_matrix()).unwrap();
    assert!((0.968 - 0.023..=0.968 + 0.023).contains(&f), "F = {f}");
}
