use num_complex::Complex64;
use proptest::prelude::*;
use tfic::analysis::startup_time;
use tfic::chain::{amplitudes, build_mode_table, ChainSpec};
use tfic::density;
use tfic::measures::*;

/// Any valid end-pair state, including mixed ones (`|c|² < p₁p_N`).
fn any_state() -> impl Strategy<Value = EndPairState> {
    (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(p1, frac, r, phase)| {
        let p_n = (1.0 - p1) * frac;
        let c = Complex64::from_polar(r * (p1 * p_n).sqrt(), phase);
        EndPairState::new(p1, p_n, c).unwrap()
    })
}

fn rwa(n: usize) -> ChainSpec {
    ChainSpec::ising_rwa(n, 1.0, 10.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn density_matrix_is_a_state(s in any_state()) {
        let rho = s.density_matrix();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!((rho - rho.adjoint()).norm() < 1e-15);
        let eig = nalgebra::SymmetricEigen::new(rho).eigenvalues;
        prop_assert!(eig.iter().all(|&x| x > -1e-12));
    }

    #[test]
    fn correlation_identities(s in any_state()) {
        let sample = CorrelationSample::at(0.0, &s);
        prop_assert!((sample.mi - sample.cc - sample.qd).abs() < 1e-9);
        prop_assert!(sample.mi >= -1e-9 && sample.cc >= -1e-9 && sample.qd >= -1e-9);
        prop_assert!(sample.qd <= sample.mi + 1e-9);
        prop_assert!((0.0..=1.0).contains(&sample.eof));
        prop_assert!(sample.cf_zz <= 0.0);
    }

    #[test]
    fn mutual_information_matches_generic(s in any_state()) {
        let generic = density::mutual_information(&s.density_matrix());
        prop_assert!((mutual_information(&s) - generic).abs() < 1e-10);
    }

    #[test]
    fn concurrence_matches_generic(s in any_state()) {
        let generic = density::concurrence(&s.density_matrix());
        prop_assert!((concurrence(&s) - generic).abs() < 1e-10);
    }

    #[test]
    fn chi_never_exceeds_classical_correlation(s in any_state(), theta in 0.0..std::f64::consts::PI) {
        prop_assert!(holevo_chi(&s, theta) <= classical_correlation(&s) + 1e-12);
    }

    #[test]
    fn evolution_is_unitary(n in 2usize..60, t in 0.0..200.0f64) {
        let a = amplitudes(&build_mode_table(&rwa(n)).unwrap(), t).unwrap();
        prop_assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        let h = ChainSpec::heisenberg(n, 1.0).unwrap();
        let a = amplitudes(&build_mode_table(&h).unwrap(), t).unwrap();
        prop_assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_symmetric_parity(half in 1usize..20, t in 0.0..100.0f64) {
        let n = 2 * half;
        let s = sample_all(&rwa(n), &[t]).unwrap()[0];
        prop_assert!(s.cf_xx.abs() < 1e-12);
    }

    #[test]
    fn field_only_adds_a_global_phase(n in 2usize..40, t in 0.0..100.0f64, b in 0.0..200.0f64) {
        let base = sample_all(&rwa(n), &[t]).unwrap()[0];
        let other = sample_all(&ChainSpec::ising_rwa(n, 1.0, b).unwrap(), &[t]).unwrap()[0];
        prop_assert_eq!(base, other);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn larger_criterion_is_reached_no_later(n in 2usize..40, k in 0usize..3) {
        let measure = [Measure::Mi, Measure::Eof, Measure::Qd][k];
        let spec = rwa(n);
        let t_max = 2.5 * n as f64 + 5.0;
        let mut last: Option<f64> = Some(0.0);
        for delta in [1e-7, 1e-6, 1e-5, 1e-4, 1e-3] {
            let t = startup_time(&spec, measure, delta, t_max, 0.02).unwrap();
            if let (Some(a), Some(b)) = (last, t) {
                // Larger thresholds are crossed later or at the same time.
                prop_assert!(b >= a - 1e-12, "{measure} N={n}: δ={delta} at {b} before {a}");
            }
            if t.is_some() {
                last = t;
            }
        }
    }
}
