use epcontact::scenario::{run_file, ScenarioConfig};

#[test]
fn explicit_loop_scenario_with_verification() {
    let dir = std::env::temp_dir().join(format!("epcontact-scenario-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let n = 16;
    let positions: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            let s = std::f64::consts::TAU * a as f64 / n as f64;
            vec![s.cos(), s.sin(), 0.25 * (2.0 * s).sin()]
        })
        .collect();
    let cfg = serde_json::json!({
        "model": "darboux:1",
        "initial": { "topology": "loop", "positions": positions, "weights": vec![0.2; n], "derivative": "spectral" },
        "kernel": { "family": "gaussian", "sigma": 1.0 },
        "integrator": { "method": "rk4_adaptive", "dt": 0.05, "T": 0.2, "tol": 1e-11 },
        "observe_every": 2,
        "verify": ["epdiff-diagram", "theta-pullback"],
        "output": { "csv": "out/t.csv", "jsonl": null, "summary": "s.json", "report": "r.json" }
    });
    let path = dir.join("scenario.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let outcome = run_file(&path, &dir).unwrap();
    assert!(outcome.verified);
    assert_eq!(outcome.files.len(), 3);
    assert!(outcome.summary["maxRelEnergyDrift"].as_f64().unwrap() < 1e-9);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["suites"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(dir.join("out/t.csv")).unwrap();
    assert_eq!((csv.lines().count() - 1) % n, 0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn round_trips_through_json() {
    let c = ScenarioConfig::from_json(r#"{"preset":"circle","params":{"N":32,"derivative":"central4"}}"#).unwrap();
    let again = ScenarioConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(c, again);
}
