//! Engine calls shared by the CLI and the HTTP service. Both surfaces
//! print exactly what these functions return.

use datavalor::anp::{derive_metric_weights, DeriveOptions, JudgementSet};
use datavalor::scenario::{compare, result_json, run_valuation, what_if, Overrides, ValuationScenario};
use datavalor::Result;

fn with_mode(scenario: &ValuationScenario, paper_compat: Option<bool>) -> ValuationScenario {
    let mut s = scenario.clone();
    if let Some(p) = paper_compat {
        s.paper_compat = p;
    }
    s
}

/// `None` keeps the scenario's own `paper_compat` setting.
pub fn value(scenario: &ValuationScenario, candidate: &str, paper_compat: Option<bool>) -> Result<String> {
    Ok(result_json(&run_valuation(&with_mode(scenario, paper_compat), candidate)?))
}

pub fn comparison(scenario: &ValuationScenario, paper_compat: Option<bool>) -> Result<String> {
    Ok(result_json(&compare(&with_mode(scenario, paper_compat))?))
}

pub fn what_if_report(
    scenario: &ValuationScenario,
    candidate: &str,
    overrides: &Overrides,
    paper_compat: Option<bool>,
) -> Result<String> {
    Ok(result_json(&what_if(&with_mode(scenario, paper_compat), candidate, overrides)?))
}

pub fn weigh(set: &JudgementSet, opts: &DeriveOptions) -> Result<String> {
    Ok(result_json(&derive_metric_weights(set, opts)?))
}
