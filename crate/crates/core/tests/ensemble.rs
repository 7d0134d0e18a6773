use num_complex::Complex64;
use openloc::ensemble::{
    aipr, ipr, mix, sample_hamiltonian, sweep, EnsembleError, EnsembleParams,
};
use openloc::linalg::{eigendecompose, SolverOptions, Spectrum};

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn p(n: usize, c: f64, gamma: f64, seed: u64, realization: u64) -> EnsembleParams {
    EnsembleParams::new(n, c, gamma, seed, realization).unwrap()
}

#[test]
fn sampling_is_deterministic_per_substream() {
    let a = sample_hamiltonian(&p(20, 0.5, 1.0, 42, 0));
    let b = sample_hamiltonian(&p(20, 0.5, 1.0, 42, 0));
    assert_eq!(a.entries(), b.entries());
    let c = sample_hamiltonian(&p(20, 0.5, 1.0, 42, 1));
    assert_ne!(a.entries(), c.entries());
    let d = sample_hamiltonian(&p(20, 0.5, 1.0, 43, 0));
    assert_ne!(a.entries(), d.entries());
}

#[test]
fn matrix_structure_and_open_interval_bounds() {
    let n = 40;
    let (c, gamma) = (0.3, 0.7);
    let h = sample_hamiltonian(&p(n, c, gamma, 7, 3));
    for i in 0..n {
        let d = h.get(i, i);
        assert!(d.re > -1.0 && d.re < 1.0, "diagonal re {}", d.re);
        assert!(d.im > -gamma && d.im < 0.0, "diagonal im {}", d.im);
        for j in (i + 1)..n {
            let off = h.get(i, j);
            assert_eq!(off, h.get(j, i));
            assert_eq!(off.im, 0.0);
            assert!(off.re > -c && off.re < c, "coupling {}", off.re);
        }
    }
}

#[test]
fn closed_system_has_exactly_real_spectrum_input() {
    let h = sample_hamiltonian(&p(25, 0.4, 0.0, 5, 0));
    for i in 0..25 {
        for j in 0..25 {
            assert_eq!(h.get(i, j).im, 0.0);
        }
    }
}

#[test]
fn zero_coupling_consumes_no_offdiagonal_draws() {
    // With c = 0 the stream goes straight from the energies to the decay
    // rates, so the energies match any c > 0 run on the same substream.
    let bare = sample_hamiltonian(&p(12, 0.0, 0.8, 99, 2));
    let coupled = sample_hamiltonian(&p(12, 0.5, 0.8, 99, 2));
    for i in 0..12 {
        assert_eq!(bare.get(i, i).re, coupled.get(i, i).re);
        for j in (i + 1)..12 {
            assert_eq!(bare.get(i, j), z(0.0, 0.0));
        }
    }
}

#[test]
fn mix_separates_substreams() {
    assert_eq!(mix(42, 7), mix(42, 7));
    assert_ne!(mix(42, 7), mix(42, 8));
    assert_ne!(mix(42, 7), mix(7, 42));
    // Nearby keys land far apart.
    assert!(mix(1, 0).count_ones() > 10 && mix(1, 0).count_ones() < 54);
    assert_ne!(mix(0, 1), mix(1, 0));
}

#[test]
fn ipr_limits() {
    let n = 16;
    let mut basis = vec![z(0.0, 0.0); n];
    basis[3] = z(1.0, 0.0);
    assert!((ipr(&basis).unwrap() - 1.0).abs() <= 1e-15);

    let amp = 1.0 / (n as f64).sqrt();
    let uniform = vec![z(amp, 0.0); n];
    assert!((ipr(&uniform).unwrap() - 1.0 / n as f64).abs() <= 1e-15);

    // Scale invariance.
    let scaled: Vec<Complex64> = uniform.iter().map(|v| v.scale(17.0)).collect();
    assert!((ipr(&scaled).unwrap() - 1.0 / n as f64).abs() <= 1e-15);

    assert!(matches!(
        ipr(&[z(0.0, 0.0); 4]),
        Err(EnsembleError::ZeroVector)
    ));
}

#[test]
fn aipr_averages_per_state_ipr() {
    let params = p(30, 0.2, 0.1, 13, 0);
    let h = sample_hamiltonian(&params);
    let s = eigendecompose(&h, &SolverOptions::default()).unwrap();
    let r = aipr(&s, &params).unwrap();
    assert_eq!(r.per_state_ipr.len(), 30);
    let mean = r.per_state_ipr.iter().sum::<f64>() / 30.0;
    assert!((r.aipr - mean).abs() <= 1e-15);
    for (v, pi) in s.eigenvectors.iter().zip(&r.per_state_ipr) {
        assert!((ipr(v).unwrap() - pi).abs() <= 1e-15);
        assert!(*pi >= 1.0 / 30.0 - 1e-12 && *pi <= 1.0 + 1e-12);
    }
}

#[test]
fn aipr_rejects_mismatched_spectra() {
    let params = p(10, 0.2, 0.1, 13, 0);
    let h = sample_hamiltonian(&p(8, 0.2, 0.1, 13, 0));
    let s = eigendecompose(&h, &SolverOptions::default()).unwrap();
    assert!(matches!(
        aipr(&s, &params),
        Err(EnsembleError::DimensionMismatch { expected: 10, got: 8 })
    ));
    let empty = Spectrum {
        eigenvalues: vec![],
        eigenvectors: vec![],
        residuals: vec![],
        iterations: 0,
        ill_conditioned: false,
    };
    assert!(aipr(&empty, &params).is_err());
}

#[test]
fn sweep_grid_is_row_major_and_deterministic() {
    let cs = [0.1, 0.3];
    let gs = [0.0, 0.2, 0.5];
    let nodes = sweep(&cs, &gs, 12, 2, 31).unwrap();
    assert_eq!(nodes.len(), 6);
    let mut k = 0;
    for &c in &cs {
        for &g in &gs {
            assert_eq!((nodes[k].c, nodes[k].gamma), (c, g));
            assert!(nodes[k].aipr_mean > 0.0 && nodes[k].aipr_mean <= 1.0);
            assert!(nodes[k].aipr_stddev >= 0.0);
            k += 1;
        }
    }
    let again = sweep(&cs, &gs, 12, 2, 31).unwrap();
    for (a, b) in nodes.iter().zip(&again) {
        assert_eq!(a.aipr_mean, b.aipr_mean);
        assert_eq!(a.aipr_stddev, b.aipr_stddev);
    }
}

#[test]
fn sweep_nodes_are_seeded_by_grid_index() {
    // The leading node of a larger grid reproduces the single-node sweep.
    let full = sweep(&[0.1, 0.3], &[0.0, 0.5], 10, 3, 77).unwrap();
    let single = sweep(&[0.1], &[0.0], 10, 3, 77).unwrap();
    assert_eq!(full[0].aipr_mean, single[0].aipr_mean);
    assert_eq!(full[0].aipr_stddev, single[0].aipr_stddev);
}

#[test]
fn single_realization_has_zero_stddev() {
    let nodes = sweep(&[0.2], &[0.1], 10, 1, 5).unwrap();
    assert_eq!(nodes[0].aipr_stddev, 0.0);
}

#[test]
fn parameter_validation() {
    assert!(matches!(
        EnsembleParams::new(1, 0.1, 0.0, 0, 0),
        Err(EnsembleError::InvalidParams(_))
    ));
    assert!(matches!(
        EnsembleParams::new(10, -0.1, 0.0, 0, 0),
        Err(EnsembleError::InvalidParams(_))
    ));
    assert!(matches!(
        EnsembleParams::new(10, 0.1, -1.0, 0, 0),
        Err(EnsembleError::InvalidParams(_))
    ));
    assert!(matches!(
        EnsembleParams::new(10, f64::NAN, 0.0, 0, 0),
        Err(EnsembleError::InvalidParams(_))
    ));
    assert!(matches!(sweep(&[], &[0.1], 10, 1, 0), Err(EnsembleError::EmptyGrid)));
    assert!(matches!(
        sweep(&[0.1], &[0.1], 10, 0, 0),
        Err(EnsembleError::NoRealizations)
    ));
}
