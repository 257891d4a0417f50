use fpds_core::{
    builtin_scenario, certificate, envelope_check, find_weights, integrate, load_spec,
    mittag_leffler, picard_solve, residual, scalar_relaxation, serialize, traffic_gstm, MlfParams,
    PicardOptions, Realization, ScenarioName, Selector, StateVector, TrafficParams, Weights,
};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn example_42_certificate_values() {
    let sys = builtin_scenario(ScenarioName::Example42).unwrap();
    let w = Weights::from_flat(&[2.0, 1.0], 2).unwrap();
    let c = certificate(&sys, &w).unwrap();
    assert!(close(c.a2_margins[0], 0.05) && close(c.a2_margins[1], 0.04));
    assert!(close(c.xi[0], 0.95) && close(c.xi[1], 0.875));
    assert!(close(c.kappa, 0.95) && close(c.theta, 0.05));
    assert!(c.pass);
}

#[test]
fn example_41_certificate_values() {
    let sys = builtin_scenario(ScenarioName::Example41).unwrap();
    let c = certificate(&sys, &Weights::unit(3, 2)).unwrap();
    for (got, want) in c.a2_margins.iter().zip([0.04, 0.09, 0.14]) {
        assert!(close(*got, want), "{got}");
    }
    for (got, want) in c.a3_margins.iter().zip([0.39, 0.35]) {
        assert!(close(*got, want), "{got}");
    }
    for (got, want) in c.factors().zip([0.97, 0.95, 0.96, 0.96, 0.95]) {
        assert!(close(got, want), "{got}");
    }
    assert!(c.pass);
    assert!(close(c.theta, 0.03));
}

#[test]
fn searched_weights_pass_for_every_builtin() {
    for name in ScenarioName::ALL {
        let sys = builtin_scenario(name).unwrap();
        let w = find_weights(&sys).unwrap();
        assert!(certificate(&sys, &w).unwrap().pass, "{name}");
    }
}

#[test]
fn equilibria_of_example_42_vertices() {
    let sys = builtin_scenario(ScenarioName::Example42).unwrap();
    let w = sys.weights.clone().unwrap();
    let expected = [(1.464_318_25, 0.561_797_75), (1.043_478_26, 0.0)];
    for (sel, (x1, x2)) in [Selector::Lower, Selector::Upper].into_iter().zip(expected) {
        let real = Realization::select(&sys, sel);
        let eq = picard_solve(&sys, &real, &w, &PicardOptions::default()).unwrap();
        assert!((eq.point.x[0] - x1).abs() < 1e-8 && (eq.point.x[1] - x2).abs() < 1e-8);
        assert!(residual(&sys, &real, &w, &eq.point).unwrap() <= 1e-10);
    }
}

#[test]
fn envelope_holds_on_a_short_horizon() {
    for name in [
        ScenarioName::Example41,
        ScenarioName::Example42,
        ScenarioName::TrafficGstm,
    ] {
        let sys = builtin_scenario(name).unwrap();
        let w = sys.weights.clone().unwrap();
        let theta = certificate(&sys, &w).unwrap().theta;
        for sel in [Selector::Lower, Selector::Upper] {
            let real = Realization::select(&sys, sel);
            let eq = picard_solve(&sys, &real, &w, &PicardOptions::default()).unwrap();
            let z0 = sys.initial.clone().unwrap();
            let traj = integrate(&sys, &real, &z0, 5.0, 500).unwrap();
            let rep = envelope_check(&traj, &eq, &w, theta, 0.05).unwrap();
            assert!(rep.pass, "{name} {sel:?}: {rep:?}");
            assert!(rep.v_end < rep.v0);
        }
    }
}

#[test]
fn relaxation_error_shrinks_at_first_order_or_better() {
    for alpha in [0.5, 0.8, 0.9, 1.0] {
        let sys = scalar_relaxation(alpha);
        let real = Realization::select(&sys, Selector::Lower);
        let exact = mittag_leffler(MlfParams::one(alpha).unwrap(), -1.0).unwrap();
        let err = |steps: usize| {
            let traj = integrate(
                &sys,
                &real,
                &StateVector::from_slices(&[1.0], &[]),
                1.0,
                steps,
            )
            .unwrap();
            ((traj.last().x[0] - exact) / exact).abs()
        };
        let (e1, e2) = (err(250), err(500));
        assert!(e2 < e1);
        assert!(
            (e1 / e2).log2() >= 1.0,
            "alpha {alpha}: order {}",
            (e1 / e2).log2()
        );
    }
}

#[test]
fn traffic_builder_accepts_custom_bounds_and_gains() {
    let params = TrafficParams {
        gains: [1.0, 2.0, 0.5, 1.0],
        ..TrafficParams::default()
    };
    let sys = traffic_gstm(&params).unwrap();
    let c = certificate(&sys, &Weights::unit(3, 1)).unwrap();
    assert!(c.gains_warning);
    let back = load_spec(serialize(&sys).as_bytes()).unwrap();
    assert_eq!(back, sys);
}
