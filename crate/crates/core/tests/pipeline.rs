use std::path::PathBuf;

use datavalor::anp::{derive_metric_weights, DeriveOptions, JudgementSet};
use datavalor::catalog::MetricCatalog;
use datavalor::normalization::{normalize, MetricObservation, NormalizationRule, RawValue};
use datavalor::scenario::{run_valuation, DriverSource, ValuationScenario};
use datavalor::screening::{start_session, AnswerLog, DataPurpose, DecisionTree, IcfRule};
use datavalor::valuation::Driver;
use datavalor::ErrorKind;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn answers(name: &str) -> AnswerLog {
    AnswerLog::from_json(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

#[test]
fn screening_effects_drive_a_scenario() {
    let tree = DecisionTree::step_one();
    let outcome = answers("step1_answers.json")
        .replay(&tree)
        .unwrap()
        .recommendations(&tree)
        .unwrap();

    let mut s = ValuationScenario::load(fixture("example1.json")).unwrap();
    s.driver = DriverSource::Screening(outcome.effects);
    s.domains.truncate(1);
    s.validate().unwrap();
    assert_eq!(s.driver().unwrap(), Driver::Relevance);

    let r = run_valuation(&s, "greenroute").unwrap();
    assert!((r.qru - r.relevance("domain-1").unwrap()).abs() < 1e-12);
    assert!((r.value - r.qru * r.audit.potential.val / 1.5).abs() < 1e-9);
}

#[test]
fn step_two_replay_classifies_purpose() {
    let tree = DecisionTree::step_two();
    let session = answers("greenroute_step2_answers.json").replay(&tree).unwrap();
    let c = session.classify_purpose(&tree).unwrap();
    assert_eq!(c.purpose, DataPurpose::Operational);
    assert_eq!(c.outcome.effects.icf_rule, Some(IcfRule::Fractional));
    assert!(c.outcome.effects.include_opex);

    let catalog = MetricCatalog::default_catalog();
    for id in &c.outcome.effects.recommended_metric_ids {
        assert!(catalog.get(id).is_some(), "{id} missing from catalog");
    }
}

#[test]
fn custom_tree_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tree.json");
    std::fs::write(&path, DecisionTree::step_one().to_json()).unwrap();
    let tree = DecisionTree::load(&path).unwrap();
    assert_eq!(tree, DecisionTree::step_one());

    let mut broken: serde_json::Value = serde_json::from_str(&tree.to_json()).unwrap();
    broken["entry_question_id"] = "nowhere".into();
    let err = DecisionTree::from_json(&broken.to_string()).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Validation);
}

#[test]
fn answering_out_of_order_conflicts() {
    let tree = DecisionTree::step_one();
    let s = start_session(&tree).unwrap();
    let err = s.answer(&tree, "gdpr", "Yes").unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Conflict);
    let err = s.recommendations(&tree).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Conflict);
}

#[test]
fn judgements_feed_relevance_weights() {
    let set = JudgementSet::load(fixture("relevance_judgements.json")).unwrap();
    let derived = derive_metric_weights(&set, &DeriveOptions::default()).unwrap();
    let (_, report) = &derived.consistency[0];
    assert!(report.consistency_ratio < 1e-8);

    let mut s = ValuationScenario::load(fixture("example2.json")).unwrap();
    let before = run_valuation(&s, "D1").unwrap();
    s.adopt_relevance_weights(&derived.priorities);
    s.validate().unwrap();
    let after = run_valuation(&s, "D1").unwrap();
    assert!((before.value - after.value).abs() < 1e-6);
}

#[test]
fn indifference_judgements_are_uniform() {
    let set = JudgementSet::load(fixture("identity3.json")).unwrap();
    let derived = derive_metric_weights(&set, &DeriveOptions::default()).unwrap();
    for (_, w) in derived.priorities.iter() {
        assert!((w - 1.0 / 3.0).abs() < 1e-12);
    }
    assert_eq!(derived.consistency[0].1.consistency_ratio, 0.0);
}

#[test]
fn labels_normalize_through_the_catalog_rule() {
    let catalog = MetricCatalog::default_catalog();
    assert!(catalog.get("compliance").is_some());
    let rule = NormalizationRule::positive_labels(["yes", "compliant"]);
    let obs = MetricObservation {
        metric_id: "compliance".into(),
        raw: RawValue::Label("Yes".into()),
        unit: String::new(),
    };
    assert_eq!(normalize(&obs, &rule).unwrap().value, 1.0);
}
