use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{CandidateDataset, DemandZeroPolicy, ValuationScenario};
use crate::error::{Error, Result};
use crate::normalization::{normalize, NormalizationRule, RawValue};
use crate::screening::IcfRule;
use crate::valuation::{
    aggregate_index, combine_distributed_costs, combine_distributed_quality, dataset_potential,
    dataset_value, display_round, relevance, temporal_correction, total_costs, utility, Alignment,
    CostBreakdown, DomainRelevance, Driver, Potential, Temporal, ValuationComponent,
    WeightedMetric, WEIGHT_SUM_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Engine,
    PaperCompat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedEntry {
    pub metric_id: String,
    pub raw: RawValue,
    pub rule: NormalizationRule,
    pub value: f64,
    /// The value passed to later stages.
    pub carried: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexPart {
    pub candidate: String,
    pub index: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub value: f64,
    pub carried: f64,
    pub weight_sum: f64,
    pub contributing_metric_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<IndexPart>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialAudit {
    pub input: Potential,
    pub applied: Potential,
    pub costs_total: Option<f64>,
    pub val: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalAudit {
    pub input: Temporal,
    pub v_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub normalized: Vec<NormalizedEntry>,
    pub indexes: Vec<IndexEntry>,
    pub relevances: Vec<DomainRelevance>,
    pub utility: Option<f64>,
    pub costs: Option<CostBreakdown>,
    pub potential: PotentialAudit,
    pub temporal: TemporalAudit,
    pub warnings: Vec<String>,
    pub discrepancies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationResult {
    pub scenario_id: String,
    pub candidate: String,
    pub mode: Mode,
    pub driver: Driver,
    pub alignment: Alignment,
    pub qru: f64,
    pub components: Vec<ValuationComponent>,
    pub v_p: f64,
    pub value: f64,
    pub currency: String,
    pub display_value: String,
    pub audit: Audit,
}

impl ValuationResult {
    pub fn total_cost(&self) -> Option<f64> {
        self.audit.costs.as_ref().map(|c| c.total)
    }

    pub fn index(&self, id: &str) -> Option<&IndexEntry> {
        self.audit.indexes.iter().find(|i| i.id == id)
    }

    pub fn normalized(&self, metric_id: &str) -> Option<&NormalizedEntry> {
        self.audit.normalized.iter().find(|n| n.metric_id == metric_id)
    }

    pub fn relevance(&self, domain_id: &str) -> Option<f64> {
        self.audit
            .relevances
            .iter()
            .find(|r| r.domain_id == domain_id)
            .map(|r| r.relevance)
    }

    /// Recompute V from the audit entries alone.
    pub fn rederive(&self) -> Result<f64> {
        let a = &self.audit;
        let qru = match self.driver {
            Driver::CostOnly => 1.0,
            Driver::Quality => {
                self.index("quality")
                    .ok_or_else(|| Error::invalid("/audit/indexes", "no quality index"))?
                    .carried
            }
            Driver::Relevance => a
                .relevances
                .first()
                .ok_or_else(|| Error::invalid("/audit/relevances", "no relevance"))?
                .recompute(),
            Driver::Utility => a.relevances.iter().map(|r| r.beta * r.recompute()).sum(),
        };
        let costs = a.costs.as_ref().map(|c| {
            c.capex
                .iter()
                .chain(&c.opex)
                .chain(&c.governance)
                .map(|l| l.amount)
                .sum::<f64>()
        });
        let val = dataset_potential(&a.potential.applied, costs)?;
        let v_p = temporal_correction(&a.temporal.input)?;
        let icf = self.components.first().map_or(1.0, |c| c.icf);
        Ok(qru * val * icf / v_p)
    }
}

/// Pretty JSON shared by every output surface.
pub fn result_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("result serializes");
    s.push('\n');
    s
}

struct Pass<'a> {
    scenario: &'a ValuationScenario,
    compat: bool,
    /// When set, only these keys may take printed values.
    only: Option<Vec<&'a str>>,
    warnings: Vec<String>,
    discrepancies: Vec<String>,
}

impl Pass<'_> {
    fn printed(&mut self, c: &CandidateDataset, key: &str, computed: f64) -> f64 {
        if self.only.as_ref().is_some_and(|keys| !keys.contains(&key)) {
            return computed;
        }
        match c.as_printed.get(key) {
            Some(&p) if self.compat => {
                self.discrepancies.push(format!(
                    "{} {key}: printed value {p} used in place of computed {computed:.6}",
                    c.id
                ));
                p
            }
            Some(&p) => {
                self.discrepancies.push(format!(
                    "{} {key}: computed {computed:.6}; reference prints {p}",
                    c.id
                ));
                computed
            }
            None => computed,
        }
    }

    fn pointer(&self, c: &CandidateDataset) -> String {
        let i = self
            .scenario
            .candidates
            .iter()
            .position(|x| x.id == c.id)
            .unwrap_or_default();
        format!("/candidates/{i}")
    }

    fn normalized(&mut self, c: &CandidateDataset) -> Result<Vec<NormalizedEntry>> {
        let mut out = Vec::with_capacity(c.observations.len());
        for (oi, o) in c.observations.iter().enumerate() {
            let n = normalize(&o.metric(), &o.rule)
                .map_err(|e| e.at(format!("{}/observations/{oi}", self.pointer(c))))?;
            let carried = self.printed(c, &o.metric_id, n.value);
            out.push(NormalizedEntry {
                metric_id: o.metric_id.clone(),
                raw: o.raw.clone(),
                rule: o.rule.clone(),
                value: n.value,
                carried,
            });
        }
        Ok(out)
    }

    fn carry(&self, v: f64) -> f64 {
        match self.scenario.index_decimals {
            Some(d) => display_round(v, d),
            None => v,
        }
    }

    fn plain_indexes(
        &mut self,
        c: &CandidateDataset,
        normalized: &[NormalizedEntry],
    ) -> Result<Vec<IndexEntry>> {
        let mut out = Vec::new();
        for spec in &self.scenario.indexes {
            let mut metrics = Vec::with_capacity(spec.weights.len());
            for (m, &w) in &spec.weights {
                let n = normalized.iter().find(|n| &n.metric_id == m).ok_or_else(|| {
                    Error::invalid(
                        format!("{}/observations", self.pointer(c)),
                        format!("metric {m:?} of index {:?} is not observed", spec.id),
                    )
                })?;
                metrics.push(WeightedMetric::new(m.clone(), n.carried, w));
            }
            let iv = aggregate_index(&spec.id, &metrics)?;
            let carried = self.carry(iv.value);
            let carried = self.printed(c, &spec.id, carried);
            out.push(IndexEntry {
                id: spec.id.clone(),
                value: iv.value,
                carried,
                weight_sum: iv.weight_sum,
                contributing_metric_ids: iv.contributing_metric_ids,
                parts: Vec::new(),
            });
        }
        Ok(out)
    }

    fn indexes(
        &mut self,
        c: &CandidateDataset,
        normalized: &[NormalizedEntry],
    ) -> Result<Vec<IndexEntry>> {
        if !c.is_distributed() {
            return self.plain_indexes(c, normalized);
        }
        let mut per_part = Vec::new();
        for comp in &c.components {
            let sub = self.scenario.candidate(&comp.candidate)?;
            let index_metrics = self
                .scenario
                .indexes
                .iter()
                .flat_map(|i| i.weights.keys().map(String::as_str))
                .collect();
            let mut inner = Pass {
                scenario: self.scenario,
                compat: self.compat,
                only: Some(index_metrics),
                warnings: Vec::new(),
                discrepancies: Vec::new(),
            };
            let n = inner.normalized(sub)?;
            per_part.push((comp, inner.plain_indexes(sub, &n)?));
            self.discrepancies.extend(inner.discrepancies);
        }
        let mut out = Vec::new();
        for (k, spec) in self.scenario.indexes.iter().enumerate() {
            let parts: Vec<IndexPart> = per_part
                .iter()
                .map(|(comp, idx)| IndexPart {
                    candidate: comp.candidate.clone(),
                    index: idx[k].carried,
                    coverage: comp.coverage,
                })
                .collect();
            let pairs: Vec<(f64, f64)> = parts.iter().map(|p| (p.index, p.coverage)).collect();
            let value = combine_distributed_quality(&pairs)?;
            let carried = self.carry(value);
            let carried = self.printed(c, &spec.id, carried);
            out.push(IndexEntry {
                id: spec.id.clone(),
                value,
                carried,
                weight_sum: per_part[0].1[k].weight_sum,
                contributing_metric_ids: per_part[0].1[k].contributing_metric_ids.clone(),
                parts,
            });
        }
        Ok(out)
    }

    fn lookup(
        &self,
        c: &CandidateDataset,
        key: &str,
        normalized: &[NormalizedEntry],
        indexes: &[IndexEntry],
    ) -> Result<f64> {
        if let Some(i) = indexes.iter().find(|i| i.id == key) {
            return Ok(i.carried);
        }
        normalized
            .iter()
            .find(|n| n.metric_id == key)
            .map(|n| n.carried)
            .ok_or_else(|| {
                Error::invalid(
                    format!("{}/observations", self.pointer(c)),
                    format!("no observation or index for relevance metric {key:?}"),
                )
            })
    }

    fn relevances(
        &mut self,
        c: &CandidateDataset,
        driver: Driver,
        normalized: &[NormalizedEntry],
        indexes: &[IndexEntry],
    ) -> Result<Vec<DomainRelevance>> {
        if !matches!(driver, Driver::Relevance | Driver::Utility) {
            return Ok(Vec::new());
        }
        let s = self.scenario;
        let mut out = Vec::new();
        for (di, d) in s.domains.iter().enumerate() {
            let mut metrics = Vec::new();
            for (k, &w) in &s.relevance_weights {
                let m = self.lookup(c, k, normalized, indexes)?;
                let t = *d.targets.get(k).ok_or_else(|| {
                    Error::invalid(format!("/domains/{di}/targets"), format!("no target for {k:?}"))
                })?;
                if s.alignment == Alignment::Ratio && t < 0.0 && m > 0.0 {
                    self.warnings.push(format!(
                        "{}: {k} is positive against negative target {t}; ratio taken as target/metric",
                        d.id
                    ));
                }
                metrics.push(WeightedMetric::new(k.clone(), m, w).with_target(t));
            }
            let r = relevance(&d.id, d.beta, &metrics, s.alignment, s.zero_target)
                .map_err(|e| e.at(format!("candidate {}", c.id)))?;
            out.push(r);
        }
        Ok(out)
    }

    fn costs(&self, c: &CandidateDataset) -> Result<Option<CostBreakdown>> {
        let mut ledgers = Vec::new();
        for comp in &c.components {
            if let Some(l) = &self.scenario.candidate(&comp.candidate)?.ledger {
                ledgers.push(l.clone());
            }
        }
        if let Some(l) = &c.ledger {
            ledgers.push(l.clone());
        }
        if ledgers.is_empty() {
            return Ok(None);
        }
        let merged = combine_distributed_costs(&ledgers)
            .map_err(|e| e.at(format!("{}/ledger", self.pointer(c))))?;
        Ok(Some(total_costs(&merged)?))
    }
}

/// Value one candidate of a scenario.
pub fn run_valuation(scenario: &ValuationScenario, candidate_id: &str) -> Result<ValuationResult> {
    scenario.validate()?;
    let c = scenario.candidate(candidate_id)?;
    let driver = scenario.driver()?;
    let effects = scenario.effects();
    let mut pass = Pass {
        scenario,
        compat: scenario.paper_compat,
        only: None,
        warnings: Vec::new(),
        discrepancies: Vec::new(),
    };

    let normalized = pass.normalized(c)?;
    let indexes = pass.indexes(c, &normalized)?;
    for i in &indexes {
        if (i.weight_sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            pass.warnings
                .push(format!("index {} weights sum to {}", i.id, i.weight_sum));
        }
    }

    let relevances = pass.relevances(c, driver, &normalized, &indexes)?;
    if let Some(r) = relevances.first() {
        if (r.weight_sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            pass.warnings
                .push(format!("relevance weights sum to {}", r.weight_sum));
        }
    }
    let u = if driver == Driver::Utility {
        let beta: f64 = relevances.iter().map(|r| r.beta).sum();
        if beta > 1.0 + WEIGHT_SUM_TOLERANCE {
            pass.warnings
                .push(format!("domain betas sum to {beta}, above 1"));
        }
        Some(utility(&relevances)?)
    } else {
        None
    };
    let qru = match driver {
        Driver::CostOnly => 1.0,
        Driver::Quality => indexes
            .iter()
            .find(|i| i.id == "quality")
            .map(|i| i.carried)
            .ok_or_else(|| Error::invalid("/indexes", "no quality index"))?,
        Driver::Relevance => relevances[0].relevance,
        Driver::Utility => u.unwrap_or_default(),
    };

    let costs = pass.costs(c)?;
    let costs_total = costs.as_ref().map(|b| b.total);
    let mut applied = c.potential.clone();
    if effects.is_some_and(|e| e.demand_zero) {
        if let Potential::DemandPrice { price, .. } = c.potential {
            applied = match scenario.demand_zero {
                DemandZeroPolicy::Unit => {
                    pass.warnings.push(
                        "screening sets demand to zero; Val taken as 1 instead of -Costs".into(),
                    );
                    Potential::Unit
                }
                DemandZeroPolicy::NegativeCosts => {
                    pass.warnings
                        .push("screening sets demand to zero; Val is -Costs".into());
                    Potential::DemandPrice { demand: 0.0, price }
                }
            };
        }
    }
    let val = dataset_potential(&applied, costs_total)
        .map_err(|e| e.at(format!("{}/potential", pass.pointer(c))))?;

    if let Some(e) = effects {
        match (e.suggested_icf(), e.icf_rule) {
            (Some(icf), Some(IcfRule::OneTime)) if icf != c.icf => pass.warnings.push(format!(
                "screening recommends a one-time ICF of 1; candidate uses {}",
                c.icf
            )),
            (Some(n), Some(IcfRule::PerApplication)) if n != c.icf => pass.warnings.push(format!(
                "screening counts {n} applications; candidate ICF is {}",
                c.icf
            )),
            (None, Some(IcfRule::Fractional)) if c.icf >= 1.0 => pass.warnings.push(format!(
                "screening recommends a fractional ICF below 1; candidate uses {}",
                c.icf
            )),
            _ => {}
        }
        if let Some(b) = &costs {
            if !b.capex.is_empty() && !e.include_capex && !e.cost_only {
                pass.warnings
                    .push("ledger has CAPEX that screening did not call for".into());
            }
        }
    }

    let v_p = temporal_correction(&c.temporal)
        .map_err(|e| e.at(format!("{}/temporal", pass.pointer(c))))?;
    let dv = dataset_value(
        driver,
        qru,
        vec![ValuationComponent {
            component_id: c.id.clone(),
            val,
            icf: c.icf,
        }],
        v_p,
    )?;

    Ok(ValuationResult {
        scenario_id: scenario.id.clone(),
        candidate: c.id.clone(),
        mode: if pass.compat {
            Mode::PaperCompat
        } else {
            Mode::Engine
        },
        driver,
        alignment: scenario.alignment,
        qru: dv.qru,
        components: dv.components,
        v_p: dv.v_p,
        value: dv.value,
        currency: scenario.currency.clone(),
        display_value: format!("{:.2}", display_round(dv.value, 2)),
        audit: Audit {
            normalized,
            indexes,
            relevances,
            utility: u,
            costs,
            potential: PotentialAudit {
                input: c.potential.clone(),
                applied,
                costs_total,
                val,
            },
            temporal: TemporalAudit {
                input: c.temporal.clone(),
                v_p,
            },
            warnings: pass.warnings,
            discrepancies: pass.discrepancies,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub rank: usize,
    pub candidate: String,
    pub value: f64,
    pub display_value: String,
    pub driver_score: f64,
    pub total_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario_id: String,
    pub mode: Mode,
    pub driver: Driver,
    pub ranked: Vec<RankedCandidate>,
    pub winner: String,
    pub discrepancy_notes: Vec<String>,
}

/// Rank results by V, then lower total cost, then candidate id.
pub fn rank(results: &[ValuationResult]) -> Result<ComparisonReport> {
    let first = results
        .first()
        .ok_or_else(|| Error::invalid("/candidates", "nothing to compare"))?;
    for (i, r) in results.iter().enumerate() {
        if r.driver != first.driver || r.alignment != first.alignment || r.mode != first.mode {
            return Err(Error::invalid(
                format!("/{i}"),
                format!(
                    "{} was valued with {:?}/{:?}/{:?}, {} with {:?}/{:?}/{:?}; results are not comparable",
                    r.candidate, r.driver, r.alignment, r.mode,
                    first.candidate, first.driver, first.alignment, first.mode
                ),
            ));
        }
        if r.scenario_id != first.scenario_id {
            return Err(Error::invalid(format!("/{i}"), "results come from different scenarios"));
        }
    }
    let mut order: Vec<&ValuationResult> = results.iter().collect();
    order.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| {
                let (ca, cb) = (a.total_cost().unwrap_or(0.0), b.total_cost().unwrap_or(0.0));
                ca.partial_cmp(&cb).unwrap_or(Ordering::Equal)
            })
            .then_with(|| a.candidate.cmp(&b.candidate))
    });
    let mut notes = Vec::new();
    for r in &order {
        for d in &r.audit.discrepancies {
            if !notes.contains(d) {
                notes.push(d.clone());
            }
        }
    }
    Ok(ComparisonReport {
        scenario_id: first.scenario_id.clone(),
        mode: first.mode,
        driver: first.driver,
        winner: order[0].candidate.clone(),
        ranked: order
            .iter()
            .enumerate()
            .map(|(i, r)| RankedCandidate {
                rank: i + 1,
                candidate: r.candidate.clone(),
                value: r.value,
                display_value: r.display_value.clone(),
                driver_score: r.qru,
                total_cost: r.total_cost(),
            })
            .collect(),
        discrepancy_notes: notes,
    })
}

/// Value every candidate and rank them.
pub fn compare(scenario: &ValuationScenario) -> Result<ComparisonReport> {
    if scenario.candidates.len() < 2 {
        return Err(Error::invalid("/candidates", "comparison needs at least two candidates"));
    }
    let results = scenario
        .candidates
        .iter()
        .map(|c| run_valuation(scenario, &c.id))
        .collect::<Result<Vec<_>>>()?;
    rank(&results)
}
