use super::*;
use crate::probe::Factor;

fn only(ids: &[&str]) -> VerificationReport {
    run_chain(ids, &ChainOptions::default()).unwrap()
}

#[test]
fn step_ids_are_unique_and_expected_sides_look_backwards() {
    let steps = chain_steps();
    let ids: BTreeSet<&str> = steps.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids.len(), steps.len());
    for (i, s) in steps.iter().enumerate() {
        for r in &s.requires {
            let pos = steps.iter().position(|t| t.id == *r).unwrap();
            assert!(pos < i, "{} requires later step {r}", s.id);
        }
    }
}

#[test]
fn selection_expands_groups_and_prerequisites() {
    let ids = |sel: &[&str]| -> Vec<String> {
        resolve_selection(sel).unwrap().iter().map(|s| s.id.clone()).collect()
    };
    assert_eq!(ids(&["S_inner"]), ["S_inner@0.25", "S_inner@0.5", "S_inner@0.75", "S_inner@1"]);
    assert_eq!(ids(&["S_8_5"]), ["S_5_X1", "S_5_X2", "S_8_5"]);
    // chain order, not selection order
    assert_eq!(ids(&["S_T1", "S_23a"]), ["S_23a", "S_T1"]);
    assert_eq!(resolve_selection::<&str>(&[]).unwrap_err(), Error::EmptySelection);
    assert_eq!(
        resolve_selection(&["S_nope"]).unwrap_err(),
        Error::UnknownStep("S_nope".into())
    );
    assert_eq!(
        run_chain::<&str>(&[], &ChainOptions::default()).unwrap_err(),
        Error::EmptySelection
    );
}

#[test]
fn tabulated_steps_pass() {
    let r = only(&["S_23a", "S_23b", "S_T1", "S_T2"]);
    assert_eq!(r.steps.len(), 4);
    for o in &r.steps {
        assert_eq!(o.status, StepStatus::Pass, "{o:?}");
        assert!(o.probe.relative_deviation <= TOL_CONSTANT);
    }
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn constant_level_discrepancies() {
    let r = only(&["S_sigma", "S_22", "S_consts"]);
    let factor = |id: &str| r.outcome(id).unwrap().probe.best_factor.clone();
    assert_eq!(factor("S_sigma"), "pi^-2");
    assert_eq!(factor("S_22"), "2");
    assert_eq!(factor("S_consts_a"), "pi^-2");
    assert_eq!(factor("S_consts_b"), "pi^-2");
    assert_eq!(factor("S_consts_c"), "2");
    for o in &r.steps {
        assert_eq!(o.status, StepStatus::Discrepancy, "{o:?}");
        assert!(o.notes.is_some());
    }
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn one_dimensional_chain() {
    let r = only(&["S_inner", "S_f", "S_21", "S_21_22", "S_16"]);
    for o in &r.steps {
        assert_ne!(o.status, StepStatus::Fail, "{o:?}");
    }
    let s16 = r.outcome("S_16").unwrap();
    assert_eq!(s16.probe.best_factor, "2");
    assert!((s16.computed.value / (4.0 * PI * PI) - 0.658_472_325_699_634_1).abs() < 1e-10);
    assert_eq!(r.outcome("S_21_22").unwrap().probe.best_factor, "1/16");
    for id in ["S_f@0.5", "S_f@1"] {
        let o = r.outcome(id).unwrap();
        assert_eq!(o.status, StepStatus::Pass);
        assert!(o.notes.as_deref().unwrap().contains("ln(1 - a sech r)"));
    }
}

#[test]
fn probe_recovers_injected_factors() {
    let probe = FactorProbe::default();
    let value = 0.658_472_325_699_634_1;
    for f in [Factor::new(2, 1, 0), Factor::new(1, 2, 0), Factor::new(1, 1, 2)] {
        let m = probe.probe(value, f.value() * value, TOL_1D);
        assert!(m.is_match());
        assert_eq!(m.best, f);
    }
}

#[test]
fn tolerance_overrides() {
    // so loose that several candidate factors fit: ambiguous, hence fail
    let loose = ChainOptions {
        step_tolerances: [("S_T1".to_string(), 0.5)].into(),
        ..ChainOptions::default()
    };
    let r = run_chain(&["S_T1", "S_T2"], &loose).unwrap();
    let t1 = r.outcome("S_T1").unwrap();
    assert_eq!(t1.status, StepStatus::Fail);
    assert!(t1.notes.as_deref().unwrap().starts_with("ambiguous"));
    assert_eq!(r.outcome("S_T2").unwrap().status, StepStatus::Pass);
    assert_eq!(r.verdict, Verdict::Fail);
    let group = ChainOptions {
        step_tolerances: [("S_inner".to_string(), 1e-6)].into(),
        ..ChainOptions::default()
    };
    let r = run_chain(&["S_inner"], &group).unwrap();
    assert!(r.steps.iter().all(|o| o.tolerance == 1e-6));
}

#[test]
fn report_schema_and_stability() {
    let a = only(&["S_23a", "S_sigma"]);
    let b = only(&["S_23a", "S_sigma"]);
    let strip = |r: &VerificationReport| {
        let mut v: serde_json::Value = serde_json::from_str(&emit_report(r, ReportFormat::Json).unwrap()).unwrap();
        v["timestamp"] = serde_json::Value::Null;
        for s in v["steps"].as_array_mut().unwrap() {
            s["computed"]["wall_ms"] = serde_json::Value::Null;
        }
        v
    };
    assert_eq!(strip(&a), strip(&b));
    let v = strip(&a);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["verdict"], "pass");
    let step = &v["steps"][0];
    for key in ["id", "paper_ref", "computed", "expected", "probe", "status"] {
        assert!(step.get(key).is_some(), "missing {key}");
    }
    for key in ["value", "error_estimate", "n_evals", "wall_ms", "strategy"] {
        assert!(step["computed"].get(key).is_some(), "missing computed.{key}");
    }
    assert_eq!(step["probe"]["candidates"].as_array().unwrap().len(), 27);
    assert_eq!(v["steps"][1]["status"], "discrepancy");
    chrono::DateTime::parse_from_rfc3339(&a.timestamp).unwrap();
    let text = emit_report(&a, ReportFormat::Text).unwrap();
    assert!(text.contains("S_23a") && text.ends_with("verdict: PASS\n"));
}
