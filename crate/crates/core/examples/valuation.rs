//! Value a single dataset end to end and print the audit trail: the
//! GreenRoute sensor dataset scored by utility over two domains.
//!
//! cargo run -p datavalor --example valuation

use datavalor::scenario::{run_valuation, ValuationScenario};

fn main() -> datavalor::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/example1.json");
    let scenario = ValuationScenario::load(path)?;
    let r = run_valuation(&scenario, "greenroute")?;

    println!("normalized metrics:");
    for n in &r.audit.normalized {
        println!("  {:<16} {:>10.4}", n.metric_id, n.value);
    }
    for i in &r.audit.indexes {
        println!("index {} = {:.4}", i.id, i.value);
    }
    for d in &r.audit.relevances {
        println!("relevance {} = {:.4} (beta {})", d.domain_id, d.relevance, d.beta);
    }
    if let Some(u) = r.audit.utility {
        println!("utility = {u:.4}");
    }
    if let Some(c) = &r.audit.costs {
        println!(
            "costs: capex {:.2} + opex {:.2} + governance {:.2} = {:.2} {}",
            c.capex_total, c.opex_total, c.governance_total, c.total, c.currency
        );
    }
    println!("Val = {:.2}, V_p = {}", r.audit.potential.val, r.v_p);
    println!("V = {} {}", r.display_value, r.currency);
    for w in &r.audit.warnings {
        println!("warning: {w}");
    }
    assert!((r.rederive()? - r.value).abs() < 1e-9);
    Ok(())
}
