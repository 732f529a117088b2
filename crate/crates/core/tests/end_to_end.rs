use peh_core::config::RunConfig;
use peh_core::discretization::Refinement;
use peh_core::materials::Damping;
use peh_core::modal::build_reduced;
use peh_core::optimize::{cluster_designs, cross_energy, long_record_energy, optimize_event, VariableBound};
use peh_core::simulate::ExcitationSignal;
use peh_core::synthetic::narrowband_event;

fn small_scenario() -> peh_core::optimize::OptimizationScenario {
    let mut cfg = RunConfig::fixture("verification_device").unwrap();
    cfg.refinement = Refinement::uniform(2, 4);
    cfg.modes = 3;
    cfg.free = vec![VariableBound::new("L", 0.1, 0.5)];
    cfg.pso.particles = 6;
    cfg.pso.iterations = 3;
    cfg.scenario().unwrap()
}

#[test]
fn commercial_fixture_uses_uniform_modal_damping() {
    let cfg = RunConfig::fixture("commercial_bimorph").unwrap();
    let (_, basis, red) = build_reduced(&cfg.design, &cfg.materials, Refinement::uniform(3, 6), 5, 1e4).unwrap();
    assert!(matches!(cfg.materials.damping, Damping::Modal { .. }));
    assert!(red.zetas.iter().all(|z| (z - 0.0126).abs() < 1e-12));
    // a 24 mm cantilever sits far above the verification device
    assert!(basis.omegas[0] / std::f64::consts::TAU > 50.0);
}

#[test]
fn pipeline_is_deterministic() {
    let sc = small_scenario();
    let events: Vec<ExcitationSignal> = [4.0, 4.2, 9.0, 9.5]
        .iter()
        .enumerate()
        .map(|(i, f)| narrowband_event(*f, 0.5, 1.0, 50.0, 20.0, 7.0, i as u64))
        .collect();
    let run = || {
        let designs: Vec<_> = events.iter().enumerate().map(|(i, e)| optimize_event(&sc, i + 1, e).unwrap()).collect();
        let cross = cross_energy(&sc, &designs, &events);
        let cl = cluster_designs(&sc, &designs, &cross.totals, (2, 2), 5, 3).unwrap();
        serde_json::to_string(&(designs, cross, cl)).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn single_event_cross_energy_matches_the_optimum() {
    let sc = small_scenario();
    let e = narrowband_event(6.0, 0.5, 1.0, 50.0, 20.0, 7.0, 1);
    let d = optimize_event(&sc, 1, &e).unwrap();
    let cross = cross_energy(&sc, std::slice::from_ref(&d), std::slice::from_ref(&e));
    let v = cross.matrix[0][0].unwrap();
    assert!((v - d.energy).abs() <= 1e-9 * d.energy);
    assert_eq!(cross.totals[0], v);
}

#[test]
fn silence_padding_adds_no_energy() {
    let sc = small_scenario();
    let e = narrowband_event(6.0, 0.5, 1.0, 50.0, 20.0, 7.0, 2);
    let (direct, r) = sc.energy(&sc.base, &e).unwrap();
    let mut padded = e.samples.clone();
    padded.extend(std::iter::repeat_n(0.0, 50 * 60));
    let model = sc.tuned_model(&sc.base).unwrap();
    assert_eq!(model.resistance, r);
    let long = long_record_energy(&sc, &model, &ExcitationSignal::new(50.0, padded).unwrap(), 30.0).unwrap();
    assert!((long - direct).abs() / direct < 0.01, "{long} vs {direct}");
}
