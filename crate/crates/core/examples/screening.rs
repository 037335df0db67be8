//! Walk both screening trees with a fixed set of answers and print the
//! recommendations they produce.
//!
//! cargo run -p datavalor --example screening

use datavalor::screening::{start_session, DecisionTree};

fn main() -> datavalor::Result<()> {
    let tree = DecisionTree::step_one();
    let answers = [
        ("managing_only", "No"),
        ("infrastructure", "Yes"),
        ("cloud", "No"),
        ("gdpr", "No"),
        ("used_by_third_parties", "Yes"),
        ("unique_combination", "No"),
        ("monetisation", "Direct"),
        ("specific_domain", "Yes"),
        ("licensing", "No"),
        ("interfaces", "No"),
    ];

    let mut session = start_session(&tree)?;
    for (qid, label) in answers {
        let q = session.current_question(&tree).expect("tree has more questions");
        println!("{}\n  -> {label}", q.text);
        session = session.answer(&tree, qid, label)?;
    }

    let out = session.recommendations(&tree)?;
    println!("\nconnector codes: {:?}", out.codes);
    for r in &out.recommendations {
        println!("  [{}] {}", r.code, r.text);
    }
    println!("driver: {:?}", out.effects.driver());
    println!("strategy: {:?}, ICF rule: {:?}", out.effects.strategy, out.effects.icf_rule);
    for n in &out.notes {
        println!("note: {n}");
    }

    // Step II: what is the data for?
    let tree = DecisionTree::step_two();
    let session = datavalor::screening::replay(
        &tree,
        [
            ("operational", "Yes"),
            ("one_time_decision", "No"),
            ("legal_safety", "No"),
            ("research", "No"),
            ("cleansing", "Yes"),
            ("applications", "Three"),
            ("taxonomy_weights", "No"),
        ],
    )?;
    let c = session.classify_purpose(&tree)?;
    println!("\npurpose: {:?}", c.purpose);
    println!("ICF: {:?} x{:?}", c.outcome.effects.icf_rule, c.outcome.effects.icf_count);
    println!("metrics to observe: {}", c.outcome.effects.recommended_metric_ids.join(", "));
    Ok(())
}
