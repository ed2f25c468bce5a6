use proptest::prelude::*;

use wellbal::bench::{build_ic, convergence_orders, scenario};
use wellbal::equilibrium::{newton_cell, NewtonConfig};
use wellbal::models::{model_by_name, ModelParams, MODEL_NAMES};
use wellbal::reconstruct::{wb_reconstruct, EquilibriumMethod, StandardOperator};
use wellbal::{build_layout, Grid, Potential, QuadratureRule, StateVec};

fn rule() -> impl Strategy<Value = QuadratureRule> {
    prop_oneof![Just(QuadratureRule::Midpoint), Just(QuadratureRule::Gauss2)]
}

/// Admissible states away from resonance, by model.
fn state(model: &str, a: f64, b: f64, c: f64) -> Vec<f64> {
    match model {
        "burgers1" | "burgers2" => vec![0.3 + 2.0 * a],
        "coupled_burgers" => vec![0.3 + 2.0 * a, 0.3 + 2.0 * b],
        "shallow_water" => {
            let h = 0.5 + 2.0 * a;
            let fr = if c < 0.5 { 0.1 + b * 0.6 } else { 1.4 + b };
            vec![h, fr * (9.81 * h).sqrt() * h]
        }
        _ => {
            let (rho, p) = (0.5 + a, 0.5 + 3.0 * b);
            let mach = if c < 0.5 { 0.1 + 0.6 * c } else { 1.4 + c };
            let v = mach * (1.5 * p / rho).sqrt();
            vec![rho, rho * v, p / 0.5 + 0.5 * rho * v * v]
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn grid_is_uniform(a in -10.0f64..10.0, len in 0.1f64..20.0, n in 1usize..500) {
        let g = Grid::new(a, a + len, n).unwrap();
        prop_assert!(g.dx() > 0.0);
        for i in 0..n as isize {
            let w = g.interface(i + 1) - g.interface(i);
            prop_assert!(w > 0.0 && (w - g.dx()).abs() <= 1e-12 * len);
        }
    }

    #[test]
    fn layout_invariants(a in -5.0f64..5.0, dx in 1e-3f64..1.0, r in rule(), np in 1usize..=10) {
        let lay = build_layout(&Grid::new(a, a + dx, 1).unwrap(), r, np).unwrap();
        let c = lay.cell(0);
        let sub = c.submesh();
        prop_assert_eq!(sub.len(), np * (r.n_nodes() + 1) + 1);
        prop_assert_eq!(sub[0], c.x_left());
        prop_assert_eq!(*sub.last().unwrap(), c.x_right());
        prop_assert!(sub.windows(2).all(|w| w[1] > w[0]));
        for l in 0..r.n_nodes() {
            prop_assert_eq!(sub[lay.quad_submesh_index(l)], c.quad_node(l));
        }
        prop_assert!((lay.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stationary_rhs_solves_the_defining_system(
        k in 0usize..5, a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, x in -1.0f64..3.0,
    ) {
        let name = MODEL_NAMES[k];
        let potential = if name == "shallow_water" { Potential::CosineBump } else { Potential::Identity };
        let m = model_by_name::<f64>(name, ModelParams { potential, ..Default::default() }).unwrap();
        let u = StateVec::from_f64(&state(name, a, b, c));
        prop_assert_eq!(u.len(), m.n_vars());
        let g = m.stationary_rhs(&u, x).unwrap();
        prop_assert!(g.is_finite());
        if name != "burgers2" {
            let lhs = m.flux_jacobian(&u).mul_vec(&g);
            let rhs = m.source(&u) * m.depth_dx(x);
            prop_assert!((lhs - rhs).norm_inf() <= 1e-12 * rhs.norm_inf().max(1.0));
        }
    }

    #[test]
    fn converged_newton_meets_tolerance(
        k in 0usize..5, a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, i in 0isize..40, np in 1usize..=3,
    ) {
        let name = MODEL_NAMES[k];
        let m = model_by_name::<f64>(name, ModelParams::default()).unwrap();
        let lay = build_layout(&Grid::new(-1.0, 1.0, 40).unwrap(), QuadratureRule::Gauss2, np).unwrap();
        let w = StateVec::from_f64(&state(name, a, b, c));
        let cfg = NewtonConfig::default();
        if let Ok(sol) = newton_cell(m.as_ref(), &lay.cell(i), &w, &cfg) {
            let avg = (0..lay.n_quad())
                .map(|l| sol.values[lay.quad_state_index(l)] * lay.weights()[l])
                .fold(StateVec::zeros(w.len()), |s, v| s + v);
            prop_assert!((avg - w).norm_inf() <= cfg.tol);
            prop_assert!(sol.values.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn fallback_reconstruction_is_standard(order in 1u8..=3, v in prop::collection::vec(-2.0f64..2.0, 5)) {
        // Burgers I has no equilibrium through u = 0, so sign changes force the fallback
        let m = model_by_name::<f64>("burgers1", ModelParams::default()).unwrap();
        let op = StandardOperator::for_order(order).unwrap();
        let rule = if order == 3 { QuadratureRule::Gauss2 } else { QuadratureRule::Midpoint };
        let lay = build_layout(&Grid::new(0.0, 1.0, 5).unwrap(), rule, 1).unwrap();
        let mut avgs: Vec<_> = v.iter().map(|x| StateVec::scalar(*x)).collect();
        avgs[2] = StateVec::scalar(0.0);
        let r = op.radius();
        let method = EquilibriumMethod::Discrete { newton: NewtonConfig::default(), scalar_sw: false };
        let rec = wb_reconstruct(m.as_ref(), &lay, 2, &avgs[2 - r..=2 + r], &op, &method);
        prop_assert!(!rec.wb_active);
        prop_assert!(rec.ustar_at_nodes.iter().chain([&rec.ustar_left, &rec.ustar_right]).all(|u| u[0] == 0.0));
        let plain = wb_reconstruct(m.as_ref(), &lay, 2, &avgs[2 - r..=2 + r], &op, &EquilibriumMethod::None);
        prop_assert_eq!(rec.p_at_nodes, plain.p_at_nodes);
        prop_assert_eq!(rec.u_plus_left, plain.u_plus_left);
        prop_assert_eq!(rec.u_minus_right, plain.u_minus_right);
    }

    #[test]
    fn orders_need_consecutive_doubling(base in 10usize..200, e in 1e-8f64..1.0, ratio in 1.5f64..10.0) {
        let rows = vec![(base, vec![e]), (2 * base, vec![e / ratio]), (2 * base + 1, vec![e / ratio / ratio])];
        let o = convergence_orders(&rows);
        prop_assert!(o[0][0].is_none() && o[2][0].is_none());
        prop_assert!((o[1][0].unwrap() - ratio.log2()).abs() < 1e-12);
    }
}

#[test]
fn initial_data_is_reproducible() {
    for name in ["1.2", "2.2", "4.1i", "4.2", "5.2"] {
        let s = scenario(name).unwrap();
        let m = s.model::<f64>();
        let lay = build_layout(&s.grid(64).unwrap(), QuadratureRule::Gauss2, 2).unwrap();
        let a = build_ic(&s, m.as_ref(), &lay).unwrap();
        let b = build_ic(&s, m.as_ref(), &lay).unwrap();
        let bits = |v: &[StateVec<f64>]| v.iter().flat_map(|u| u.iter().map(|x| x.to_bits()).collect::<Vec<_>>()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b), "{name}");
        assert!(a.iter().all(|u| u.is_finite() && u.len() == m.n_vars()));
    }
}
