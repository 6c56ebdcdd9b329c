use proptest::prelude::*;

use ris_dsomp::angular::{build_dictionary, Dictionary};
use ris_dsomp::bench::{csv_string, nmse, run_sweep, run_sweep_with_threads, ExperimentConfig};
use ris_dsomp::channel::{ChannelRealization, GainModel, SystemGeometry};
use ris_dsomp::estimators::{EstimationProblem, EstimatorKind, SparsityLevels};
use ris_dsomp::pilot::{build_sensing, gen_reflecting, measure, MeasurementSet, SensingMatrix};

struct Trial {
    real: ChannelRealization,
    sensing: SensingMatrix,
    meas: MeasurementSet,
    um: Dictionary,
    un: Dictionary,
}

impl Trial {
    fn new(geom: SystemGeometry, q: usize, snr_db: f64, seed: u64) -> Self {
        let um = build_dictionary(geom.bs);
        let un = build_dictionary(geom.ris);
        let real = ChannelRealization::generate(&geom, &GainModel::default(), seed, &um, &un).unwrap();
        let sensing = build_sensing(&gen_reflecting(geom.n(), q, seed.wrapping_mul(3)).unwrap(), &un).unwrap();
        let meas = measure(&real, &sensing, snr_db, seed.wrapping_mul(7)).unwrap();
        Self {
            real,
            sensing,
            meas,
            um,
            un,
        }
    }

    fn problem<'a>(&'a self, meas: &'a MeasurementSet) -> EstimationProblem<'a> {
        EstimationProblem {
            measurements: meas,
            sensing: &self.sensing,
            bs_dict: &self.um,
            ris_dict: &self.un,
        }
    }
}

fn snr() -> impl Strategy<Value = f64> {
    prop_oneof![Just(f64::INFINITY), -10.0..30.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generated_channels_have_the_double_structure(seed in any::<u64>(), l_c in 0usize..=4) {
        let geom = SystemGeometry::desk_scale(l_c);
        let t = Trial::new(geom, 8, f64::INFINITY, seed);
        let s = &t.real.supports;
        prop_assert_eq!(s.rows.len(), geom.l_g);
        for (k, h) in t.real.angular.iter().enumerate() {
            let peak = h.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let nnz = h.iter().filter(|v| v.norm() > 1e-9 * peak).count();
            prop_assert_eq!(nnz, geom.l_g * geom.l_r);
            let mut rows: Vec<usize> = (0..h.nrows())
                .filter(|&r| h.row(r).iter().any(|v| v.norm() > 1e-9 * peak))
                .collect();
            rows.sort_unstable();
            prop_assert_eq!(&rows, &s.rows);
            let rel = (h.norm() - t.real.cascaded[k].norm()).abs() / h.norm();
            prop_assert!(rel < 1e-10);
            for (i, common) in s.common_cols.iter().enumerate() {
                prop_assert_eq!(common.len(), l_c);
                prop_assert!(common.iter().all(|c| s.cols[k][i].contains(c)));
            }
        }
    }

    #[test]
    fn estimates_respect_budget_and_containment(
        seed in any::<u64>(),
        l_c in 0usize..=4,
        q in 8usize..=40,
        snr_db in snr(),
    ) {
        let geom = SystemGeometry::desk_scale(l_c);
        let t = Trial::new(geom, q, snr_db, seed);
        let levels = SparsityLevels::from_geometry(&geom);
        let problem = t.problem(&t.meas);
        for kind in EstimatorKind::ALL {
            let out = kind.run(&problem, &levels, Some(&t.real.supports)).unwrap();
            for h in &out.angular {
                let nnz = h.iter().filter(|v| v.norm() > 0.0).count();
                prop_assert!(nnz <= geom.l_g * geom.l_r, "{} has {} non-zeros", kind, nnz);
            }
            if kind == EstimatorKind::DsOmp {
                prop_assert!(out.support.common_contained());
                prop_assert!(out.support.joint_rows().is_some());
                prop_assert!(out.support.common_cols.iter().all(|c| c.len() == l_c));
            }
        }
    }

    #[test]
    fn supports_are_scale_invariant(
        seed in any::<u64>(),
        l_c in 0usize..=4,
        q in 12usize..=32,
        exponent in -6i32..=6,
    ) {
        let geom = SystemGeometry::desk_scale(l_c);
        let t = Trial::new(geom, q, 5.0, seed);
        let scaled = t.meas.scaled(10f64.powi(exponent) * 1.7);
        let levels = SparsityLevels::from_geometry(&geom);
        for kind in [EstimatorKind::DsOmp, EstimatorKind::RowStructured, EstimatorKind::BaselineOmp] {
            let a = kind.run(&t.problem(&t.meas), &levels, None).unwrap();
            let b = kind.run(&t.problem(&scaled), &levels, None).unwrap();
            prop_assert_eq!(a.support, b.support, "{}", kind);
        }
    }

    #[test]
    fn noiseless_measurement_is_linear(seed in any::<u64>(), alpha in -5.0..5.0f64, q in 1usize..=20) {
        let geom = SystemGeometry::desk_scale(2);
        let t = Trial::new(geom, q, f64::INFINITY, seed);
        let scaled: Vec<_> = t.real.angular.iter().map(|h| h * num_complex::Complex64::new(alpha, 0.0)).collect();
        let m = ris_dsomp::pilot::measure_channels(&scaled, &t.sensing, f64::INFINITY, 0).unwrap();
        for (a, b) in m.y_tilde.iter().zip(&t.meas.y_tilde) {
            let err = (a - b * num_complex::Complex64::new(alpha, 0.0)).norm();
            prop_assert!(err <= 1e-12 * (1.0 + b.norm() * alpha.abs()));
        }
    }

    #[test]
    fn nmse_is_scale_free(seed in any::<u64>(), c in 0.1..10.0f64) {
        let t = Trial::new(SystemGeometry::desk_scale(1), 8, f64::INFINITY, seed);
        let truth = &t.real.cascaded;
        let doubled: Vec<_> = truth.iter().map(|h| h * num_complex::Complex64::new(2.0, 0.0)).collect();
        prop_assert!(nmse(truth, truth).unwrap() == 0.0);
        prop_assert!((nmse(&doubled, truth).unwrap() - 1.0).abs() < 1e-12);
        let est: Vec<_> = doubled.iter().map(|h| h * num_complex::Complex64::new(c, 0.0)).collect();
        let truth_c: Vec<_> = truth.iter().map(|h| h * num_complex::Complex64::new(c, 0.0)).collect();
        prop_assert!((nmse(&est, &truth_c).unwrap() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn sweeps_do_not_depend_on_thread_count(master_seed in any::<u64>(), threads in 2usize..=5) {
        let mut config = ExperimentConfig::for_geometry(&SystemGeometry::desk_scale(2));
        config.q_values = vec![12, 24];
        config.l_c_values = vec![0, 2];
        config.n_trials = 6;
        config.master_seed = master_seed;
        let serial = run_sweep_with_threads(&config, 1).unwrap();
        let parallel = run_sweep_with_threads(&config, threads).unwrap();
        prop_assert_eq!(csv_string(&serial.points).unwrap(), csv_string(&parallel.points).unwrap());
        let key = |r: &ris_dsomp::bench::TrialRecord| (r.trial, r.l_c, r.q, r.estimator, r.nmse.to_bits());
        let a: Vec<_> = serial.trials.iter().map(key).collect();
        let b: Vec<_> = parallel.trials.iter().map(key).collect();
        prop_assert_eq!(a, b);
        let again = run_sweep(&config).unwrap();
        prop_assert_eq!(csv_string(&again.points).unwrap(), csv_string(&serial.points).unwrap());
    }
}
