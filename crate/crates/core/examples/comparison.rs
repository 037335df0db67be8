//! Rank three metropolitan datasets and their merger by value, first with
//! computed values and then with the reference calculation's printed ones.
//!
//! cargo run -p datavalor --example comparison

use datavalor::scenario::{compare, ValuationScenario};

fn main() -> datavalor::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/example2.json");
    let mut scenario = ValuationScenario::load(path)?;

    for compat in [false, true] {
        scenario.paper_compat = compat;
        let report = compare(&scenario)?;
        println!("{:?} mode, driver {:?}", report.mode, report.driver);
        for r in &report.ranked {
            println!(
                "  {}. {:<6} V = {:>10}  R = {:.4}  costs = {}",
                r.rank,
                r.candidate,
                r.display_value,
                r.driver_score,
                r.total_cost.map_or("-".into(), |c| format!("{c:.0}"))
            );
        }
        println!("  winner: {}", report.winner);
        for n in &report.discrepancy_notes {
            println!("  note: {n}");
        }
        println!();
    }
    Ok(())
}
