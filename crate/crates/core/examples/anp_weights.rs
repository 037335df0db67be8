//! Derive metric weights from pairwise judgements and check their
//! consistency.
//!
//! cargo run -p datavalor --example anp_weights

use datavalor::anp::{
    derive_metric_weights, ClusterJudgements, DeriveOptions, JudgementSet, PairwiseMatrix,
    PriorityMethod,
};

fn names(ids: &[&str]) -> Vec<String> {
    ids.iter().map(|s| s.to_string()).collect()
}

fn main() -> datavalor::Result<()> {
    // quality judged 3x as important as storage cost, 5x as compliance, ...
    let items = names(&["quality", "storage_cost", "compliance"]);
    let m = PairwiseMatrix::from_upper_triangle(items.clone(), &[3.0, 5.0, 2.0])?;
    for method in [PriorityMethod::Eigenvector, PriorityMethod::GeometricMean] {
        let pv = m.priorities(method)?;
        let ws: Vec<_> = pv.iter().map(|(k, w)| format!("{k}={w:.4}")).collect();
        println!("{method:?}: {}", ws.join(" "));
    }
    let c = m.consistency()?;
    println!(
        "lambda_max {:.4}, CI {:.4}, CR {:.4} ({})",
        c.lambda_max,
        c.consistency_index,
        c.consistency_ratio,
        if c.acceptable { "acceptable" } else { "revise judgements" }
    );

    let cyclic = PairwiseMatrix::from_upper_triangle(items, &[9.0, 1.0 / 9.0, 9.0])?;
    println!("cyclic judgements: CR {:.3}", cyclic.consistency()?.consistency_ratio);

    // two clusters composed hierarchically
    let set = JudgementSet {
        clusters: vec![
            ClusterJudgements {
                id: "quality".into(),
                items: names(&["accuracy", "completeness"]),
                matrix: vec![vec![1.0, 3.0], vec![1.0 / 3.0, 1.0]],
            },
            ClusterJudgements {
                id: "cost".into(),
                items: names(&["storage_cost", "processing_cost"]),
                matrix: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            },
        ],
        cluster_matrix: Some(vec![vec![1.0, 4.0], vec![0.25, 1.0]]),
        network: None,
    };
    let derived = derive_metric_weights(&set, &DeriveOptions::default())?;
    println!("\n{:?} composition:", derived.path);
    for (k, w) in derived.priorities.iter() {
        println!("  {k:<16} {w:.4}");
    }
    for w in &derived.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
