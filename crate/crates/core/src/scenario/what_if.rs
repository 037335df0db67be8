use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{run_valuation, ValuationResult, ValuationScenario};
use crate::error::{Error, Result};
use crate::valuation::{Potential, Temporal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsOverride {
    pub v_max: f64,
    pub v_min: f64,
}

/// Partial changes applied to a copy of a scenario for one candidate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    /// Domain id to metric id to target.
    #[serde(skip_serializing_if = "IndexMap::is_empty")]
    pub targets: IndexMap<String, IndexMap<String, f64>>,
    /// Relevance weights by metric or index id.
    #[serde(skip_serializing_if = "IndexMap::is_empty")]
    pub weights: IndexMap<String, f64>,
    /// Index id to metric id to weight.
    #[serde(skip_serializing_if = "IndexMap::is_empty")]
    pub index_weights: IndexMap<String, IndexMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub icf: Option<f64>,
    /// Domain id to beta.
    #[serde(skip_serializing_if = "IndexMap::is_empty")]
    pub beta: IndexMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsOverride>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temporal: Option<Temporal>,
}

impl Overrides {
    pub fn from_json(s: &str) -> Result<Self> {
        super::parse_at(serde_json::from_str(s)?)
    }

    /// A modified copy of `scenario`.
    pub fn apply(&self, scenario: &ValuationScenario, candidate_id: &str) -> Result<ValuationScenario> {
        let mut s = scenario.clone();
        for (domain, targets) in &self.targets {
            let d = s.domain_mut(domain).map_err(|e| e.at("/targets"))?;
            for (m, &t) in targets {
                let slot = d.targets.get_mut(m).ok_or_else(|| {
                    Error::invalid(format!("/targets/{domain}/{m}"), "no such target")
                })?;
                *slot = t;
            }
        }
        for (m, &w) in &self.weights {
            let slot = s
                .relevance_weights
                .get_mut(m)
                .ok_or_else(|| Error::invalid(format!("/weights/{m}"), "no such relevance weight"))?;
            *slot = w;
        }
        for (idx, weights) in &self.index_weights {
            let spec = s
                .indexes
                .iter_mut()
                .find(|i| &i.id == idx)
                .ok_or_else(|| Error::invalid(format!("/index_weights/{idx}"), "no such index"))?;
            for (m, &w) in weights {
                let slot = spec.weights.get_mut(m).ok_or_else(|| {
                    Error::invalid(format!("/index_weights/{idx}/{m}"), "no such index weight")
                })?;
                *slot = w;
            }
        }
        for (domain, &b) in &self.beta {
            s.domain_mut(domain).map_err(|e| e.at("/beta"))?.beta = b;
        }

        let c = s
            .candidates
            .iter_mut()
            .find(|c| c.id == candidate_id)
            .ok_or_else(|| Error::not_found("candidate", candidate_id))?;
        if let Some(icf) = self.icf {
            c.icf = icf;
        }
        if let Some(b) = self.bounds {
            match &mut c.potential {
                Potential::Bounds { v_max, v_min } => {
                    *v_max = b.v_max;
                    *v_min = b.v_min;
                }
                _ => return Err(Error::invalid("/bounds", "candidate does not use bounds")),
            }
        }
        if let Some(m) = self.margin {
            match &mut c.potential {
                Potential::Margin { fraction } => *fraction = m,
                _ => return Err(Error::invalid("/margin", "candidate does not use a margin")),
            }
        }
        if let Some(t) = &self.temporal {
            c.temporal = t.clone();
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDelta {
    pub stage: String,
    pub before: f64,
    pub after: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub scenario_id: String,
    pub candidate: String,
    pub overrides: Overrides,
    pub before: ValuationResult,
    pub after: ValuationResult,
    pub deltas: Vec<StageDelta>,
}

fn stages(r: &ValuationResult) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for n in &r.audit.normalized {
        out.push((format!("normalized/{}", n.metric_id), n.carried));
    }
    for i in &r.audit.indexes {
        out.push((format!("index/{}", i.id), i.carried));
    }
    for d in &r.audit.relevances {
        out.push((format!("relevance/{}", d.domain_id), d.relevance));
    }
    if let Some(u) = r.audit.utility {
        out.push(("utility".into(), u));
    }
    out.push(("qru".into(), r.qru));
    if let Some(c) = r.total_cost() {
        out.push(("costs".into(), c));
    }
    out.push(("val".into(), r.audit.potential.val));
    if let Some(c) = r.components.first() {
        out.push(("icf".into(), c.icf));
    }
    out.push(("v_p".into(), r.v_p));
    out.push(("value".into(), r.value));
    out
}

/// Value `candidate_id` before and after `overrides`. The input is not modified.
pub fn what_if(
    scenario: &ValuationScenario,
    candidate_id: &str,
    overrides: &Overrides,
) -> Result<DeltaReport> {
    let before = run_valuation(scenario, candidate_id)?;
    let changed = overrides.apply(scenario, candidate_id)?;
    let after = run_valuation(&changed, candidate_id)?;
    let after_stages = stages(&after);
    let deltas = stages(&before)
        .into_iter()
        .filter_map(|(stage, b)| {
            after_stages
                .iter()
                .find(|(s, _)| *s == stage)
                .map(|&(_, a)| StageDelta {
                    delta: a - b,
                    stage,
                    before: b,
                    after: a,
                })
        })
        .collect();
    Ok(DeltaReport {
        scenario_id: scenario.id.clone(),
        candidate: candidate_id.to_string(),
        overrides: overrides.clone(),
        before,
        after,
        deltas,
    })
}
