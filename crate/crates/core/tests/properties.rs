//! Randomized invariants spanning the solver, the two-level closed form, and
//! the spectral pipeline.

use num_complex::Complex64;
use openloc::ensemble::{sample_hamiltonian, EnsembleParams};
use openloc::linalg::{eigendecompose, ComplexMatrix, SolverOptions};
use openloc::spectra::{spacing_histogram, unfold};
use openloc::two_level::{eigenpairs_2x2, encircle_ep, Permutation, TwoLevelParams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let entries: Vec<Complex64> = (0..n * n)
        .map(|_| z(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::new(n, entries).unwrap()
}

#[test]
fn solver_contract_over_a_thousand_matrices() {
    let sizes: [(usize, usize); 4] = [(2, 400), (5, 300), (20, 200), (100, 100)];
    let opts = SolverOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for (n, count) in sizes {
        for _ in 0..count {
            let m = random_matrix(&mut rng, n);
            let s = eigendecompose(&m, &opts).unwrap();
            let fnorm = m.frobenius_norm();
            assert_eq!(s.eigenvalues.len(), n);
            for (k, v) in s.eigenvectors.iter().enumerate() {
                let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() <= 1e-12, "n = {n}: vector norm {norm}");
                assert!(
                    s.residuals[k] <= 1e-10 * fnorm,
                    "n = {n}: residual {} bound {}",
                    s.residuals[k],
                    1e-10 * fnorm
                );
            }
            let trace_gap = (s.eigenvalues.iter().sum::<Complex64>() - m.trace()).norm();
            assert!(trace_gap <= 1e-9 * fnorm, "n = {n}: trace gap {trace_gap}");
            // Sorted by real part, ties by imaginary part.
            for w in s.eigenvalues.windows(2) {
                assert!((w[0].re, w[0].im) <= (w[1].re, w[1].im));
            }
        }
    }
}

#[test]
fn closed_form_tracks_the_solver_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(314159);
    for _ in 0..1000 {
        let p = TwoLevelParams::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(-2.0..2.0),
        )
        .unwrap();
        let analytic = eigenpairs_2x2(&p).unwrap();
        let numeric = eigendecompose(&p.to_matrix(), &SolverOptions::default()).unwrap();
        let mut lams = [analytic.lambda_plus, analytic.lambda_minus];
        lams.sort_by(|u, v| (u.re, u.im).partial_cmp(&(v.re, v.im)).unwrap());
        for (a, b) in lams.iter().zip(&numeric.eigenvalues) {
            assert!((a - b).norm() <= 1e-10, "{a} vs {b} at {p:?}");
        }
    }
}

#[test]
fn delocalization_factor_equals_min_over_max() {
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    for _ in 0..500 {
        let p = TwoLevelParams::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.05..2.0),
        )
        .unwrap();
        let r = eigenpairs_2x2(&p).unwrap();
        for (state, f) in r.states.iter().zip(r.f) {
            let (m1, m2) = (state[0].norm_sqr(), state[1].norm_sqr());
            let direct = m1.min(m2) / m1.max(m2);
            assert!((f - direct).abs() <= 1e-14);
            assert!((0.0..=1.0).contains(&f));
            // States come back normalized.
            assert!((m1 + m2 - 1.0).abs() <= 1e-14);
        }
    }
}

#[test]
fn ep_loops_swap_regardless_of_radius_and_anchor() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..25 {
        let c = rng.gen_range(0.2..2.0);
        let p0 = TwoLevelParams::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
            c,
        )
        .unwrap();
        let radius = rng.gen_range(0.05..0.8) * c.abs();
        let perm = encircle_ep((0.0, 2.0 * c), radius, 720, &p0).unwrap();
        assert_eq!(perm, Permutation::Swap, "c = {c}, radius = {radius}");
    }
}

#[test]
fn sampled_hamiltonians_keep_their_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..50 {
        let n = rng.gen_range(2..30);
        let c = rng.gen_range(0.0..1.0);
        let gamma = rng.gen_range(0.0..2.0);
        let p = EnsembleParams::new(n, c, gamma, rng.gen(), rng.gen()).unwrap();
        let h = sample_hamiltonian(&p);
        for i in 0..n {
            for j in 0..n {
                let v = h.get(i, j);
                if i != j {
                    assert_eq!(v, h.get(j, i));
                    assert_eq!(v.im, 0.0);
                    assert!(v.re.abs() < c || (c == 0.0 && v.re == 0.0));
                } else if gamma == 0.0 {
                    assert_eq!(v.im, 0.0);
                } else {
                    assert!(v.im > -gamma && v.im < 0.0);
                }
            }
        }
    }
}

#[test]
fn unfolded_spectra_have_unit_mean_spacing() {
    let mut rng = ChaCha8Rng::seed_from_u64(1717);
    for _ in 0..20 {
        let mut reals: Vec<f64> = (0..300).map(|_| rng.gen_range(-1.0..1.0)).collect();
        reals.sort_by(f64::total_cmp);
        let spacings = unfold(&reals, 21).unwrap();
        let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
        assert!((mean - 1.0).abs() <= 0.05, "unfolded mean {mean}");
        assert!(spacings.iter().all(|&s| s >= 0.0));
    }
}

#[test]
fn histograms_always_integrate_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    for _ in 0..50 {
        let n = rng.gen_range(10..500);
        let samples: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
        let bins = rng.gen_range(1..40);
        let hist = spacing_histogram(&samples, bins, (0.0, 4.0)).unwrap();
        let integral: f64 = hist
            .densities
            .iter()
            .zip(hist.bin_edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum();
        assert!((integral - 1.0).abs() <= 1e-12);
        assert_eq!(hist.sample_count, n);
    }
}

#[test]
fn spectrum_of_real_symmetric_sample_is_real() {
    // gamma = 0 closes the system; eigenvalues must come out real to solver
    // precision even though the solver works over the complex field.
    let p = EnsembleParams::new(40, 0.3, 0.0, 12345, 0).unwrap();
    let h = sample_hamiltonian(&p);
    let s = eigendecompose(&h, &SolverOptions::default()).unwrap();
    for lam in &s.eigenvalues {
        assert!(lam.im.abs() <= 1e-10 * h.frobenius_norm());
    }
}
