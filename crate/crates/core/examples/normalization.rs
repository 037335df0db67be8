//! Put raw observations of different kinds on a common scale.
//!
//! cargo run -p datavalor --example normalization

use datavalor::normalization::{normalize, MetricObservation, NormalizationRule, RawValue, Threshold};

fn obs(metric_id: &str, raw: RawValue, unit: &str) -> MetricObservation {
    MetricObservation {
        metric_id: metric_id.into(),
        raw,
        unit: unit.into(),
    }
}

fn main() -> datavalor::Result<()> {
    let cases = [
        (
            obs("volume", RawValue::Number(12_785_568.0), "records"),
            NormalizationRule::linear(0.0, 20_000_000.0, 1.0),
        ),
        (
            // a cost above its reference maximum lands below -1
            obs("processing_cost", RawValue::Number(887.0), "USD/TB"),
            NormalizationRule::linear(0.0, 200.0, -1.0),
        ),
        (
            obs("timeliness", RawValue::Number(3.0), "days"),
            NormalizationRule::delimited(7.0, Threshold::Below),
        ),
        (
            obs("compliance", RawValue::Label("yes".into()), ""),
            NormalizationRule::positive_labels(["yes"]),
        ),
        (
            obs("format", RawValue::Label("CSV".into()), ""),
            NormalizationRule::graded([("csv", 1.0), ("xlsx", 0.5), ("pdf", 0.0)]),
        ),
    ];
    for (o, rule) in &cases {
        let n = normalize(o, rule)?;
        println!("{:<16} {:>12} -> {:>8.4}", n.metric_id, format!("{:?}", o.raw), n.value);
    }

    let bad = NormalizationRule::linear(5.0, 5.0, 1.0);
    if let Err(e) = normalize(&cases[0].0, &bad) {
        println!("degenerate range rejected: {e}");
    }
    Ok(())
}
