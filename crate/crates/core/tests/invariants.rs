use proptest::prelude::*;

use rkgs::linalg::{
    apply_row_projector, dist_sq, dot, least_norm_ref, norm_sq, spectral_summary,
    symmetric_eigenvalues, DenseMatrix, LinearSystem, Regime, RowSpanProjector,
};
use rkgs::problems::{gen_gaussian, gen_tomography, save_system, GenSpec, TomoSpec};
use rkgs::sampling::{row_distribution, Prng, WeightedIndex};
use rkgs::solvers::{regs_step, rek_step, run, SolveConfig, SolverKind, Stepper, StopMetric};
use rkgs::theory::{
    bound_comparison, bound_regs, bound_rek, bound_rk_consistent, bound_rk_inconsistent,
    TheoryBound,
};

fn matrix(max: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(m, n)| {
        prop::collection::vec(-3.0..3.0f64, m * n)
            .prop_map(move |d| DenseMatrix::new(m, n, d).unwrap())
    })
}

fn gaussian_matrix(rng: &mut Prng, m: usize, n: usize) -> DenseMatrix {
    DenseMatrix::new(m, n, (0..m * n).map(|_| rng.gaussian()).collect()).unwrap()
}

fn gaussian_vec(rng: &mut Prng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gaussian()).collect()
}

proptest! {
    #[test]
    fn row_projector_is_idempotent(x in matrix(6), seed in any::<u64>()) {
        let mut rng = Prng::new(seed);
        let w = gaussian_vec(&mut rng, x.cols());
        for i in 0..x.rows() {
            if x.row_norms_sq()[i] < 1e-6 {
                continue;
            }
            let once = apply_row_projector(&x, i, &w).unwrap();
            let twice = apply_row_projector(&x, i, &once).unwrap();
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            prop_assert!(dot(x.row(i), &once).abs() <= 1e-10 * norm_sq(&w).sqrt() * norm_sq(x.row(i)).sqrt());
        }
    }

    #[test]
    fn least_norm_is_orthogonal_to_null_space(seed in any::<u64>(), m in 1usize..6, extra in 1usize..6) {
        let mut rng = Prng::new(seed);
        let n = m + extra;
        let x = gaussian_matrix(&mut rng, m, n);
        let y = gaussian_vec(&mut rng, m);
        let Ok(ln) = least_norm_ref(&x, &y) else { return Ok(()) };
        let p = RowSpanProjector::new(&x).unwrap();
        let v = gaussian_vec(&mut rng, n);
        let pv = p.project(&v).unwrap();
        let z: Vec<f64> = v.iter().zip(&pv).map(|(a, b)| a - b).collect();
        prop_assert!(norm_sq(&x.matvec(&z).unwrap()).sqrt() <= 1e-8 * norm_sq(&v).sqrt() * x.frob_sq().sqrt());
        let shifted: Vec<f64> = ln.iter().zip(&z).map(|(a, b)| a + b).collect();
        let lhs = norm_sq(&shifted);
        let rhs = norm_sq(&ln) + norm_sq(&z);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn spectral_summary_is_consistent(x in matrix(6)) {
        prop_assume!(x.frob_sq() > 1e-6);
        let s = spectral_summary(&x).unwrap();
        prop_assert!(s.sigma_min <= s.sigma_max);
        prop_assert!(s.sigma_max * s.sigma_max <= x.frob_sq() * (1.0 + 1e-12));
        prop_assert!(s.rank <= x.rows().min(x.cols()));
        let small = symmetric_eigenvalues(x.small_gram().0, x.small_gram().1).unwrap();
        let trace: f64 = small.iter().sum();
        prop_assert!((trace - x.frob_sq()).abs() <= 1e-10 * x.frob_sq());
        // the two Gram matrices share their nonzero spectrum
        let n = x.cols();
        let m = x.rows();
        let cols = symmetric_eigenvalues(x.gram_cols(), n).unwrap();
        let rows = symmetric_eigenvalues(x.gram_rows(), m).unwrap();
        let top = |v: &[f64]| v.iter().rev().take(m.min(n)).copied().collect::<Vec<_>>();
        for (a, b) in top(&cols).iter().zip(top(&rows).iter()) {
            prop_assert!((a - b).abs() <= 1e-9 * x.frob_sq());
        }
    }

    #[test]
    fn weighted_index_probabilities(weights in prop::collection::vec(0.0..10.0f64, 1..20), seed in any::<u64>()) {
        prop_assume!(weights.iter().any(|&w| w > 0.0));
        let d = WeightedIndex::new(&weights).unwrap();
        let total: f64 = (0..d.len()).map(|i| d.probability(i)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mut rng = Prng::new(seed);
        for _ in 0..200 {
            prop_assert!(weights[d.sample(&mut rng)] > 0.0);
        }
    }

    #[test]
    fn bounds_are_monotone(alpha in 0.01..0.999f64, kappa in 1.0..50.0f64, b in 0.0..10.0f64, init in 0.0..100.0f64, t in 0u64..10_000) {
        let s = rkgs::linalg::SpectralSummary {
            sigma_min: 1.0,
            sigma_max: kappa,
            kappa,
            lambda_min: 1.0,
            trace_sigma: 1.0 / (1.0 - alpha),
            rank: 2,
        };
        let bound = TheoryBound::new(&s, b, 0.5);
        prop_assert!(bound_rk_consistent(&bound, t + 1, init) <= bound_rk_consistent(&bound, t, init));
        prop_assert!(bound_rk_inconsistent(&bound, t + 1, init) <= bound_rk_inconsistent(&bound, t, init));
        prop_assert!(bound_rk_inconsistent(&bound, t, init) >= bound.horizon);
        prop_assert!(bound_rek(&bound, t + 1, init) <= bound_rek(&bound, t, init));
        prop_assert!(bound_comparison(&bound, t + 1, init) <= bound_comparison(&bound, t, init));
        prop_assert!(bound_regs(&bound, t + 1, init).unwrap() <= bound_regs(&bound, t, init).unwrap());
    }

    #[test]
    fn rgs_fit_error_never_increases(seed in any::<u64>()) {
        let sys = gen_gaussian(&GenSpec::new(12, 5, Regime::OverInconsistent, seed % 1000)).unwrap();
        let fit_ref = sys.x().matvec(sys.reference().unwrap()).unwrap();
        let stepper = Stepper::new(&sys, SolverKind::Rgs).unwrap();
        let mut st = stepper.init_state();
        let mut rng = Prng::new(seed);
        let mut prev = dist_sq(&sys.x().matvec(&st.beta).unwrap(), &fit_ref);
        for _ in 0..200 {
            stepper.step(&mut st, &mut rng);
            let e = dist_sq(&sys.x().matvec(&st.beta).unwrap(), &fit_ref);
            prop_assert!(e <= prev * (1.0 + 1e-12) + 1e-14);
            prev = e;
        }
    }

    #[test]
    fn extended_methods_keep_auxiliary_orthogonality(seed in any::<u64>()) {
        let sys = gen_gaussian(&GenSpec::new(5, 9, Regime::Underdetermined, seed % 1000)).unwrap();
        let mut rng = Prng::new(seed);
        let mut regs = Stepper::new(&sys, SolverKind::Regs).unwrap().init_state();
        let mut rek = Stepper::new(&sys, SolverKind::Rek).unwrap().init_state();
        for _ in 0..100 {
            let i = (rng.next_u64() % 5) as usize;
            let j = (rng.next_u64() % 9) as usize;
            regs_step(&sys, &mut regs, j, i);
            let z = regs.z.as_ref().unwrap();
            prop_assert!(dot(sys.x().row(i), z).abs() <= 1e-10 * (1.0 + norm_sq(z).sqrt() * norm_sq(sys.x().row(i)).sqrt()));
            rek_step(&sys, &mut rek, i, j);
            let z = rek.z.as_ref().unwrap();
            prop_assert!(dot(sys.x().col(j), z).abs() <= 1e-10 * (1.0 + norm_sq(z).sqrt() * norm_sq(sys.x().col(j)).sqrt()));
        }
    }
}

#[test]
fn row_projector_contraction_fails_off_the_row_span() {
    // For w in the null space every projector fixes w, so E||P_i w||^2 = ||w||^2.
    let mut rng = Prng::new(8);
    let x = gaussian_matrix(&mut rng, 3, 6);
    let p = RowSpanProjector::new(&x).unwrap();
    let v = gaussian_vec(&mut rng, 6);
    let pv = p.project(&v).unwrap();
    let w: Vec<f64> = v.iter().zip(&pv).map(|(a, b)| a - b).collect();
    let rows = row_distribution(&x).unwrap();
    let e: f64 = (0..3)
        .map(|i| rows.probability(i) * norm_sq(&apply_row_projector(&x, i, &w).unwrap()))
        .sum();
    let alpha = TheoryBound::new(&spectral_summary(&x).unwrap(), 0.0, 0.0).alpha;
    assert!(e > alpha * norm_sq(&w));
}

#[test]
fn rgs_underdetermined_fits_data_but_misses_least_norm() {
    let sys = gen_gaussian(&GenSpec::new(50, 500, Regime::Underdetermined, 1)).unwrap();
    let cfg = SolveConfig {
        stop_metric: StopMetric::ResidualNorm,
        record_every: 1000,
        ..SolveConfig::default()
    };
    let trace = run(&sys, SolverKind::Rgs, &cfg, &mut Prng::new(1)).unwrap();
    assert!(trace.converged);
    let last = trace.last();
    assert!(last.residual_sq < 1e-6);
    assert!(last.error_sq.unwrap() > 1e3 * cfg.tol);
}

#[test]
fn small_tomography_system_is_solved_by_rk() {
    let sys = gen_tomography(&TomoSpec {
        grid_n: 4,
        oversample: 2,
        seed: 5,
    })
    .unwrap();
    let cfg = SolveConfig {
        max_iter: 1_000_000,
        ..SolveConfig::default()
    };
    let trace = run(&sys, SolverKind::Rk, &cfg, &mut Prng::new(0)).unwrap();
    assert!(trace.converged, "error {:?}", trace.last().error_sq);
}

#[test]
fn generation_is_byte_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let spec = GenSpec::new(20, 8, Regime::OverInconsistent, 42);
    save_system(&gen_gaussian(&spec).unwrap(), a.path()).unwrap();
    save_system(&gen_gaussian(&spec).unwrap(), b.path()).unwrap();
    for f in [
        "X.txt",
        "y.txt",
        "reference.txt",
        "residual.txt",
        "meta.txt",
    ] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn all_generated_regimes_pass_system_checks() {
    for (m, n, r) in [
        (30, 10, Regime::OverConsistent),
        (30, 10, Regime::OverInconsistent),
        (10, 30, Regime::Underdetermined),
    ] {
        let sys = gen_gaussian(&GenSpec::new(m, n, r, 3)).unwrap();
        let again = LinearSystem::new(
            sys.x().clone(),
            sys.y().to_vec(),
            sys.regime(),
            sys.reference().map(<[f64]>::to_vec),
            sys.residual_ref().map(<[f64]>::to_vec),
        );
        assert!(again.is_ok());
    }
}
