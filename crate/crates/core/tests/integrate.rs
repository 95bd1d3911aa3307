mod common;

use std::f64::consts::PI;

use common::*;
use tangent_body::dynamics::*;
use tangent_body::integrate::*;
use tangent_body::scenarios::builtin;
use tangent_body::Error;

fn body(name: &str) -> TangentBody {
    TangentBody::new(
        builtin(name).unwrap().frame.clone(),
        BodyParams::new(1.0, 0.5).unwrap(),
    )
}

fn run(
    system: &TangentBody,
    initial: &BodyState,
    method: Method,
    h: f64,
    t_end: f64,
) -> TrajectoryRecord {
    integrate(
        initial,
        system,
        &StepperConfig::new(method, h, t_end, 1).unwrap(),
    )
    .unwrap()
}

/// Endpoint error of a tilted great circle after one period.
fn sphere_period_error(method: Method, h: f64) -> f64 {
    let s = builtin("sphere").unwrap();
    let system = body("sphere");
    let x0 = [PI / 2.0, 0.0];
    let v0 = [0.6, 0.8];
    let initial = system
        .state_from_spin(&x0, &v0, SpinTensor::planar(0.0))
        .unwrap();
    let t_end = 2.0 * PI;
    let record = run(&system, &initial, method, h, t_end);
    assert_eq!(record.termination, Termination::Completed);
    let exact = s.geodesic_oracle(&x0, &v0, t_end).unwrap();
    max_abs_diff(&record.final_state().position, &exact)
}

#[test]
fn flat_free_particle_step_is_exact() {
    let system = body("flat_cartesian_2d");
    let state = BodyState::new(vec![0.0, 0.0], vec![1.0, 0.0], SpinTensor::planar(0.0)).unwrap();
    for method in [Method::Rk4, Method::ImplicitMidpoint] {
        for h in [0.1, 0.25, 1.0] {
            let (next, info) = step(&state, &system, h, method).unwrap();
            assert_eq!(next.position, vec![h, 0.0]);
            assert_eq!(next.momentum, vec![1.0, 0.0]);
            assert_eq!(info.projection, 0.0);
        }
    }
}

#[test]
fn flat_line_conserves_energy_exactly() {
    let system = body("flat_cartesian_3d");
    let spin = SpinTensor::from_upper(3, vec![0.3, -0.2, 0.5]).unwrap();
    let initial = BodyState::new(vec![0.1, 0.2, 0.3], vec![0.5, -1.0, 0.25], spin.clone()).unwrap();
    let record = run(&system, &initial, Method::Rk4, 0.01, 1.0);
    assert_eq!(record.energy_drift_rel(), Some(0.0));
    assert_eq!(record.spin_norm_drift_rel(), 0.0);
    let end = record.final_state();
    assert!(max_abs_diff(&end.position, &[0.6, -0.8, 0.55]) < 1e-14);
    assert_eq!(end.spin, spin);
    assert_eq!(record.samples.len(), 101);
}

#[test]
fn samples_are_monitored_and_last_step_lands_on_t_end() {
    let system = body("sphere");
    let initial = system
        .state_from_spin(&[1.0, 0.0], &[0.1, 0.3], SpinTensor::planar(0.2))
        .unwrap();
    let record = integrate(
        &initial,
        &system,
        &StepperConfig::new(Method::Rk4, 0.03, 1.0, 5).unwrap(),
    )
    .unwrap();
    let times = record.times();
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(*times.last().unwrap(), 1.0);
    assert_eq!(record.steps_taken, 34);
    // initial, every 5th of 34 steps, final
    assert_eq!(times.len(), 1 + 6 + 1);
    assert!(record.max_projection < 1e-13);
}

#[test]
fn rk4_is_fourth_order_on_great_circle() {
    let e1 = sphere_period_error(Method::Rk4, 2.0 * PI / 200.0);
    let e2 = sphere_period_error(Method::Rk4, 2.0 * PI / 400.0);
    let ratio = e1 / e2;
    assert!((12.0..=20.0).contains(&ratio), "{e1} {e2} {ratio}");
    assert!(sphere_period_error(Method::Rk4, 1e-3) < 1e-8);
}

#[test]
fn midpoint_is_second_order_on_great_circle() {
    let e1 = sphere_period_error(Method::ImplicitMidpoint, 2.0 * PI / 200.0);
    let e2 = sphere_period_error(Method::ImplicitMidpoint, 2.0 * PI / 400.0);
    let ratio = e1 / e2;
    assert!((3.0..=5.0).contains(&ratio), "{e1} {e2} {ratio}");
}

#[test]
fn hyperbolic_geodesics_match_oracle() {
    let s = builtin("hyperbolic_upper_half").unwrap();
    let system = body("hyperbolic_upper_half");
    for (x0, v0) in [([0.0, 1.0], [0.0, 0.7]), ([0.3, 1.5], [1.2, 0.4])] {
        let initial = system
            .state_from_spin(&x0, &v0, SpinTensor::planar(0.0))
            .unwrap();
        let err = |h: f64| {
            let record = run(&system, &initial, Method::Rk4, h, 1.0);
            max_abs_diff(
                &record.final_state().position,
                &s.geodesic_oracle(&x0, &v0, 1.0).unwrap(),
            )
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!((12.0..=20.0).contains(&(e1 / e2)), "{e1} {e2}");
    }
}

#[test]
fn spin_conservation_drift_is_fourth_order() {
    let system = body("sphere3");
    let spin = SpinTensor::from_upper(3, vec![0.4, -0.3, 0.2]).unwrap();
    let initial = system
        .state_from_spin(&[1.1, 1.3, 0.2], &[0.5, -0.4, 0.6], spin)
        .unwrap();
    let drifts = |h: f64| {
        let record = run(&system, &initial, Method::Rk4, h, 2.0);
        (
            record.energy_drift_rel().unwrap(),
            record.spin_norm_drift_rel(),
        )
    };
    let (h1, s1) = drifts(0.04);
    let (h2, s2) = drifts(0.02);
    assert!((12.0..=20.0).contains(&(h1 / h2)), "H {h1} {h2}");
    assert!((12.0..=20.0).contains(&(s1 / s2)), "S {s1} {s2}");
}

#[test]
fn meridian_to_pole_ends_with_chart_exit() {
    let system = body("sphere");
    let initial = system
        .state_from_spin(&[1.0, 0.0], &[-1.0, 0.0], SpinTensor::planar(0.0))
        .unwrap();
    let record = run(&system, &initial, Method::Rk4, 0.01, 3.0);
    match &record.termination {
        Termination::ChartExit { t, .. } => assert!((*t - 1.0).abs() < 0.02),
        other => panic!("expected chart exit, got {other:?}"),
    }
    let last = record.final_state();
    assert!(system.in_chart(&last.position));
    assert!(record.final_time() < 1.0);
    assert!(last.position[0] < 0.02);
}

#[test]
fn initial_state_outside_chart_is_rejected() {
    let system = body("sphere");
    let initial = BodyState::new(vec![0.0, 0.0], vec![0.0, 0.0], SpinTensor::planar(0.0)).unwrap();
    let config = StepperConfig::new(Method::Rk4, 0.1, 1.0, 1).unwrap();
    assert!(matches!(
        integrate(&initial, &system, &config),
        Err(Error::OutOfChart(_))
    ));
}

struct Stiff;

impl VectorField for Stiff {
    fn rate(&self, state: &BodyState) -> tangent_body::Result<StateRate> {
        Ok(StateRate {
            position: vec![-100.0 * state.position[0]],
            momentum: vec![0.0],
            spin: nalgebra::DMatrix::zeros(1, 1),
        })
    }
}

#[test]
fn stiff_midpoint_reports_nonconvergence() {
    let state = BodyState::new(vec![1.0], vec![0.0], SpinTensor::zeros(1)).unwrap();
    assert!(matches!(
        step(&state, &Stiff, 1.0, Method::ImplicitMidpoint),
        Err(Error::NonConvergence { iterations: 50, .. })
    ));
    let (next, info) = step(&state, &Stiff, 1e-3, Method::ImplicitMidpoint).unwrap();
    let exact = (1.0 - 0.05) / (1.0 + 0.05);
    assert!((next.position[0] - exact).abs() < 1e-13);
    assert!(info.iterations < 50);
}

#[test]
fn invalid_configs_rejected() {
    assert!(StepperConfig::new(Method::Rk4, 0.0, 1.0, 1).is_err());
    assert!(StepperConfig::new(Method::Rk4, 0.1, -1.0, 1).is_err());
    assert!(StepperConfig::new(Method::Rk4, 0.1, 1.0, 0).is_err());
    assert_eq!(
        StepperConfig::new(Method::Rk4, 0.1, 1.0, 1)
            .unwrap()
            .step_count(),
        10
    );
}
