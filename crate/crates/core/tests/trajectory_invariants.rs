use dsb_core::evolve::evolve_with_table;
use dsb_core::{BathParams, BlochVector, EvolveConfig, KernelTable, QubitParams};
use proptest::prelude::*;

fn scenario() -> impl Strategy<Value = (QubitParams, BathParams, BlochVector, bool)> {
    (
        (-1.5f64..1.5, 0.5f64..2.0, 0.0f64..2.0, 0.3f64..3.0),
        (0.0f64..0.05, 2.0f64..12.0, 0.5f64..10.0),
        (0.0f64..std::f64::consts::PI, 0.0f64..std::f64::consts::TAU),
        any::<bool>(),
    )
        .prop_map(|((e, d, s, w), (a, l, b), (th, ph), adaptive)| {
            (
                QubitParams::new(e, d, s, w).unwrap(),
                BathParams::new(a, l, b).unwrap(),
                BlochVector::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()),
                adaptive,
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trajectories_keep_trace_and_hermiticity((q, b, v, adaptive) in scenario()) {
        let t_max = 2.0;
        let table = KernelTable::build(&b, t_max, 1e-8).unwrap();
        let mut cfg = if adaptive {
            EvolveConfig::adaptive(t_max, 0.01, 1e-9)
        } else {
            EvolveConfig::fixed(t_max, 2e-3)
        };
        cfg.record_every = 7;
        let rho0 = v.to_density_matrix();
        let traj = evolve_with_table(&rho0, &q, &table, &cfg).unwrap();

        let first = &traj.samples[0];
        prop_assert_eq!(first.t, 0.0);
        prop_assert_eq!(first.rho, rho0);
        prop_assert_eq!(first.purity, rho0.purity());
        prop_assert_eq!(traj.last().t, t_max);
        prop_assert!(traj.times().collect::<Vec<_>>().windows(2).all(|w| w[1] > w[0]));
        for s in &traj.samples {
            prop_assert!((s.rho.trace().re - 1.0).abs() <= 1e-10 && s.rho.trace().im.abs() <= 1e-10);
            prop_assert!(s.rho.matrix().hermiticity_defect() <= 1e-10);
            prop_assert!(s.rho.min_eigenvalue().is_finite());
            prop_assert_eq!(s.beyond_horizon, s.t > q.short_time_horizon());
        }
    }
}
