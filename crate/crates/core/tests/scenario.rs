use std::path::PathBuf;

use constellation_spares::scenario::{ScenarioFile, ValidationSuite};
use constellation_spares::system::evaluate;

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn bundled() -> Vec<(String, ScenarioFile)> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if name.starts_with("case") {
            out.push((name, ScenarioFile::load(&path).unwrap()));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn bundled_scenarios_round_trip() {
    let files = bundled();
    assert_eq!(files.len(), 9);
    for (name, file) in files {
        let again = ScenarioFile::from_json(&file.to_json()).unwrap();
        assert_eq!(again, file, "{name}");
    }
}

#[test]
fn bundled_scenarios_evaluate() {
    for (name, file) in bundled() {
        let m = evaluate(&file.config(), &file.policy()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(m.cost.tessac.is_finite() && m.cost.tessac > 0.0, "{name}");
    }
}

#[test]
fn validation_suite_loads_all_instances() {
    let suite = ValidationSuite::load(&scenarios_dir().join("validation_suite.json")).unwrap();
    assert_eq!(suite.instances.len(), 25);
    assert_eq!(suite.simulation.replications, 100);
    assert_eq!(suite.simulation.horizon_years, 30);
    let first = &suite.instances[0];
    assert_eq!(first.config().primary.processing, 12.0);
    assert_eq!(first.policy().plane.alpha_w, 1.4);
}

#[test]
fn schema_errors_carry_json_pointer() {
    let text = std::fs::read_to_string(scenarios_dir().join("case1.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();

    doc["launch"]["primary"]["capacity_sats"] = serde_json::json!("forty");
    let err = ScenarioFile::from_json(&doc.to_string()).unwrap_err().to_string();
    assert!(err.contains("/launch/primary/capacity_sats"), "{err}");

    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["costs"]["holding"] = serde_json::json!(1.0);
    let err = ScenarioFile::from_json(&doc.to_string()).unwrap_err().to_string();
    assert!(err.contains("/costs") && err.contains("unknown field"), "{err}");

    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["spec_version"] = serde_json::json!(2);
    let err = ScenarioFile::from_json(&doc.to_string()).unwrap_err().to_string();
    assert!(err.contains("/spec_version"), "{err}");
}

#[test]
fn omitted_direct_channel_fields_default_to_single_channel_shape() {
    let file = ScenarioFile::load(&scenarios_dir().join("case3_instance0.json")).unwrap();
    let p = file.policy();
    assert_eq!((p.plane.r2, p.plane.q2, p.plane.alpha_w), (2, 1, 0.0));
}

#[test]
fn empty_suite_is_rejected() {
    let text = r#"{"spec_version": 1, "simulation": {"horizon_years": 30, "replications": 1, "master_seed": 0, "warmup_years": 2}, "instances": []}"#;
    assert!(ValidationSuite::from_json(text).unwrap_err().to_string().contains("/instances"));
}
