use combcool::cooling::{
    optimize_intensity, optimize_with, Axis, BeamGeometry, Boundary, CoolingScenario,
    ImpulseBudget, IntensityEvaluator, Objective, SearchBounds,
};
use combcool::Scenario;

fn hydrogen_budget() -> ImpulseBudget<f64> {
    let s: Scenario = CoolingScenario {
        geometry: BeamGeometry::Single {
            axis: Axis::Z,
            reverse: false,
        },
        detuning: 0.0,
        max_time: Some(100.0 / 2800.0),
        ..CoolingScenario::hydrogen_default()
    };
    ImpulseBudget::from_scenario(&s, 100).unwrap()
}

#[test]
fn impulse_budget_at_the_operating_point() {
    let o = hydrogen_budget().evaluate(1e5).unwrap();
    assert!((o.cooling_speed - 2800.0).abs() < 1e-9);
    assert!((o.survival - (-2.28f64).exp()).abs() < 1e-12);
    // P[Poisson(100) >= 100], summed directly
    let mut term = (-100.0f64).exp();
    let mut below = 0.0;
    for j in 0..100 {
        if j > 0 {
            term *= 100.0 / j as f64;
        }
        below += term;
    }
    assert!((o.cooled - (1.0 - below)).abs() < 1e-12);
}

#[test]
fn hydrogen_optimum_lies_in_the_expected_band() {
    let r = optimize_with(
        &hydrogen_budget(),
        Objective::CooledAndSurviving,
        &SearchBounds::new(1e3, 1e7),
    )
    .unwrap();
    assert_eq!(r.boundary, None);
    assert!((3e4..=3e5).contains(&r.intensity), "{}", r.intensity);
    assert!(r.tradeoff_verified);
    assert!(r.lower_end.cooled < 1e-6);
    assert!(r.upper_end.survival < 1e-6);
}

#[test]
fn golden_section_refines_to_one_percent() {
    let eval = hydrogen_budget();
    let bounds = SearchBounds::new(1e3, 1e7);
    let r = optimize_with(&eval, Objective::CooledAndSurviving, &bounds).unwrap();
    let best = r.objective;
    for f in [0.99, 1.01] {
        let o = eval.evaluate(r.intensity * f).unwrap();
        assert!(o.cooled * o.survival <= best + 1e-3 * best);
    }
}

#[test]
fn monotone_objectives_land_on_the_bounds() {
    // upper bound below the intensity where the rate reaches its clamp
    let b = SearchBounds::new(1e3, 1e6);
    let r = optimize_with(&hydrogen_budget(), Objective::SurvivalOnly, &b).unwrap();
    assert_eq!(r.boundary, Some(Boundary::Lower));
    assert_eq!(r.intensity, 1e3);
    let r = optimize_with(&hydrogen_budget(), Objective::CoolingSpeedOnly, &b).unwrap();
    assert_eq!(r.boundary, Some(Boundary::Upper));
    assert_eq!(r.intensity, 1e6);
}

#[test]
fn monte_carlo_search_is_deterministic() {
    let s: Scenario = CoolingScenario {
        geometry: BeamGeometry::Pair { axis: Axis::Z },
        initial_temperature: 0.02,
        n_atoms: 300,
        max_time: Some(0.02),
        samples: 1,
        ..CoolingScenario::hydrogen_default()
    };
    let bounds = SearchBounds {
        grid_points: 5,
        relative_tolerance: 0.2,
        ..SearchBounds::new(1e4, 1e6)
    };
    let a = optimize_intensity(&s, Objective::CooledAndSurviving, &bounds).unwrap();
    let b = optimize_intensity(&s, Objective::CooledAndSurviving, &bounds).unwrap();
    assert_eq!(a, b);
    assert!(a.intensity >= 1e4 && a.intensity <= 1e6);
    assert!(optimize_intensity(&s, Objective::SurvivalOnly, &SearchBounds::new(-1.0, 1.0)).is_err());
}
