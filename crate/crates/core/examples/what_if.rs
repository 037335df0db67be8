//! Change inputs on a copy of a scenario and see which stages move.
//!
//! cargo run -p datavalor --example what_if

use datavalor::scenario::{what_if, Overrides, ValuationScenario};

fn main() -> datavalor::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/example1.json");
    let scenario = ValuationScenario::load(path)?;

    let relaxed = Overrides::from_json(r#"{"targets": {"domain-1": {"quality": 0.95}}}"#)?;
    let resold = Overrides {
        icf: Some(2.0),
        ..Default::default()
    };
    for (label, o) in [("relax domain-1 quality target", relaxed), ("sell twice", resold)] {
        let report = what_if(&scenario, "greenroute", &o)?;
        println!("{label}:");
        for d in report.deltas.iter().filter(|d| d.delta != 0.0) {
            println!("  {:<22} {:>10.4} -> {:>10.4} ({:+.4})", d.stage, d.before, d.after, d.delta);
        }
    }
    Ok(())
}
