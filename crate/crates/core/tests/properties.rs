use std::sync::Arc;

use nalgebra::DVector;
use proptest::prelude::*;

use fracvi::analysis::{global_error_of, reverse, Quantity, Reference};
use fracvi::cli::trajectory_csv;
use fracvi::fracops::{delta_minus, delta_minus_squared, delta_plus, delta_plus_squared};
use fracvi::integrators::{fvi_run, mirror_residuals, IntegratorConfig};
use fracvi::models::{finite_difference_gradient, FnPotential, Potential, Quadratic};
use fracvi::{GrunwaldTable, MechModel, State};

fn seq(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, len)
}

fn rel_gap(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summation_by_parts(
        alpha in 0.0..=1.0f64,
        h in 0.01..1.0f64,
        (f, g) in (3usize..40).prop_flat_map(|n| (seq(n..n + 1), seq(n..n + 1))),
    ) {
        let n = f.len() - 1;
        let (mut f, mut g) = (f, g);
        f[0] = 0.0;
        f[n] = 0.0;
        g[0] = 0.0;
        g[n] = 0.0;
        let table = GrunwaldTable::new(alpha, n).unwrap();
        let plus_g: Vec<f64> = (0..=n).map(|k| delta_plus(&g[k..], &table, h).unwrap()).collect();
        let minus_f: Vec<f64> = (0..=n).map(|k| delta_minus(&f[..=k], &table, h).unwrap()).collect();
        let lhs: f64 = (0..n).map(|k| plus_g[k] * f[k]).sum();
        let rhs: f64 = (1..=n).map(|k| g[k] * minus_f[k]).sum();
        let scale: f64 = (1..=n).map(|k| (g[k] * minus_f[k]).abs()).sum();
        prop_assert!(rel_gap(lhs, rhs, scale) <= 1e-12);
        let shifted: f64 = (0..n).map(|k| g[k + 1] * minus_f[k + 1]).sum();
        let inner: f64 = (1..n).map(|k| plus_g[k] * f[k]).sum();
        prop_assert!(rel_gap(shifted, inner, scale) <= 1e-12);
    }

    #[test]
    fn reversed_sequence_mirrors_operators(alpha in 0.0..=1.0f64, h in 0.01..1.0f64, x in seq(2..60)) {
        let n = x.len() - 1;
        let table = GrunwaldTable::new(alpha, n).unwrap();
        let y: Vec<f64> = x.iter().rev().copied().collect();
        for k in 0..=n {
            let a = delta_plus_squared(&y[k..], &table, h).unwrap();
            let b = delta_minus_squared(&x[..=n - k], &table, h).unwrap();
            prop_assert!(rel_gap(a, b, a.abs().max(b.abs())) <= 1e-12);
        }
    }

    #[test]
    fn squared_operator_is_composition(alpha in 0.0..=1.0f64, h in 0.05..1.0f64, z in seq(1..40)) {
        let n = z.len() - 1;
        let table = GrunwaldTable::new(alpha, n).unwrap();
        let once: Vec<f64> = (0..=n).map(|k| delta_minus(&z[..=k], &table, h).unwrap()).collect();
        for k in 0..=n {
            let twice = delta_minus(&once[..=k], &table, h).unwrap();
            let direct = delta_minus_squared(&z[..=k], &table, h).unwrap();
            let scale: f64 = once[..=k].iter().map(|v| v.abs()).sum::<f64>() * h.powf(-alpha);
            prop_assert!(rel_gap(twice, direct, scale) <= 1e-13);
        }
    }

    #[test]
    fn energy_matches_hand_formula(
        m in prop::collection::vec(0.1..5.0f64, 3),
        c in prop::collection::vec(0.1..5.0f64, 3),
        x in prop::collection::vec(-2.0..2.0f64, 3),
        p in prop::collection::vec(-2.0..2.0f64, 3),
    ) {
        let model = MechModel::new(
            DVector::from_vec(m.clone()),
            DVector::zeros(3),
            Arc::new(Quadratic::new(DVector::from_vec(c.clone())).unwrap()),
        )
        .unwrap();
        let want: f64 = (0..3).map(|i| p[i] * p[i] / (2.0 * m[i]) + c[i] * x[i] * x[i] / 2.0).sum();
        let got = model.energy(&DVector::from_vec(x), &DVector::from_vec(p)).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn gradient_matches_finite_differences(x in prop::collection::vec(-1.5..1.5f64, 2)) {
        let quartic = FnPotential::new(
            |x: &State| x.iter().map(|v| v.powi(4) / 4.0 - v * v / 2.0).sum(),
            |x: &State| x.map(|v| v.powi(3) - v),
        );
        let x = DVector::from_vec(x);
        let fd = finite_difference_gradient(&quartic, &x, 1e-5);
        prop_assert!((fd - quartic.gradient(&x)).amax() <= 1e-8);
    }

    #[test]
    fn global_error_behaves_like_a_distance(h in 0.05..0.3f64, a0 in -1.0..1.0f64, b0 in -1.0..1.0f64, c0 in -1.0..1.0f64) {
        let model = MechModel::oscillator(1.0, 1.0, 0.1).unwrap();
        let run = |x0| fvi_run(&model, &IntegratorConfig::scalar(h, 20, x0, 0.0)).unwrap();
        let (a, b, c) = (run(a0), run(b0), run(c0));
        let d = |u, v| global_error_of(Quantity::Position, u, &Reference::Trajectory(v)).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-15);
    }

    #[test]
    fn reversed_solution_satisfies_mirror_equations(alpha in 0.2..0.8f64, rho in 0.0..0.5f64, x0 in -1.0..1.0f64, p0 in -1.0..1.0f64) {
        let model = MechModel::oscillator(1.0, 1.0, rho).unwrap();
        let cfg = IntegratorConfig::scalar(0.1, 40, x0, p0).with_alpha(alpha);
        let traj = fvi_run(&model, &cfg).unwrap();
        let y: Vec<State> = reverse(&traj).x;
        for r in mirror_residuals(&model, &cfg, &y).unwrap() {
            prop_assert!(r.amax() <= 1e-12);
        }
    }

    #[test]
    fn trajectory_shape_and_determinism(alpha in 0.0..=1.0f64, kappa in 0.0..=1.0f64, n in 2usize..40, x0 in -1.0..1.0f64, p0 in -1.0..1.0f64) {
        std::env::set_var("FRACVI_WARN", "0");
        let model = MechModel::oscillator(1.0, 2.0, 0.3).unwrap();
        let cfg = IntegratorConfig::scalar(0.1, n, x0, p0).with_alpha(alpha).with_kappa(kappa);
        let a = fvi_run(&model, &cfg).unwrap();
        let b = fvi_run(&model, &cfg).unwrap();
        prop_assert_eq!(a.x.len(), n + 1);
        prop_assert_eq!(a.p.len(), n + 1);
        prop_assert_eq!(a.energy.len(), n + 1);
        prop_assert_eq!(a.x[0][0], x0);
        prop_assert_eq!(a.p[0][0], p0);
        prop_assert_eq!(trajectory_csv(&a), trajectory_csv(&b));
    }

    #[test]
    fn csv_values_round_trip(x0 in -1e3..1e3f64, p0 in -1e3..1e3f64) {
        let model = MechModel::oscillator(1.0, 1.0, 0.2).unwrap();
        let traj = fvi_run(&model, &IntegratorConfig::scalar(0.1, 5, x0, p0)).unwrap();
        for (k, line) in trajectory_csv(&traj).lines().skip(1).enumerate() {
            let cols: Vec<f64> = line.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
            prop_assert_eq!(cols[1], traj.x[k][0]);
            prop_assert_eq!(cols[2], traj.p[k][0]);
            prop_assert_eq!(cols[3], traj.energy[k]);
        }
    }
}
