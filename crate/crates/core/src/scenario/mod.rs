//! Scenario documents and the end-to-end valuation pipeline.

mod engine;
mod store;
mod what_if;

use std::collections::HashSet;
use std::path::Path;

use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::anp::PriorityVector;
use crate::error::{Error, Result};
use crate::normalization::{MetricObservation, NormalizationRule, RawValue};
use crate::screening::Effects;
use crate::valuation::{Alignment, CostLedger, Driver, Potential, Temporal, ZeroTarget};

pub use engine::{
    compare, rank, result_json, run_valuation, Audit, ComparisonReport, IndexEntry, Mode,
    NormalizedEntry, PotentialAudit, RankedCandidate, TemporalAudit, ValuationResult,
};
pub use store::{FileStore, MemoryStore, ScenarioStore};
pub use what_if::{what_if, BoundsOverride, DeltaReport, Overrides, StageDelta};

pub const SCHEMA_VERSION: &str = "datavalor/1";

/// Where the valuation driver comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriverSource {
    Manual(Driver),
    Screening(Effects),
}

/// Val when screening asks for zero demand on a demand/price candidate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandZeroPolicy {
    /// Fall back to `Val = 1`.
    #[default]
    Unit,
    /// Keep demand/price with demand 0, so `Val = -Costs`.
    NegativeCosts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSpec {
    pub id: String,
    pub weights: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub id: String,
    pub beta: f64,
    pub targets: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation {
    pub metric_id: String,
    pub raw: RawValue,
    #[serde(default)]
    pub unit: String,
    pub rule: NormalizationRule,
}

impl Observation {
    pub fn metric(&self) -> MetricObservation {
        MetricObservation {
            metric_id: self.metric_id.clone(),
            raw: self.raw.clone(),
            unit: self.unit.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentRef {
    pub candidate: String,
    pub coverage: f64,
}

fn one() -> f64 {
    1.0
}

fn no_processing() -> Temporal {
    Temporal::none()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateDataset {
    pub id: String,
    #[serde(default)]
    pub observations: Vec<Observation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger: Option<CostLedger>,
    pub potential: Potential,
    #[serde(default = "one")]
    pub icf: f64,
    #[serde(default = "no_processing")]
    pub temporal: Temporal,
    /// Sub-candidates of a distributed or merged dataset.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentRef>,
    /// Values as printed in a reference calculation, keyed by metric or
    /// index id. Used in place of computed values only in paper-compat mode.
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub as_printed: IndexMap<String, f64>,
}

impl CandidateDataset {
    pub fn is_distributed(&self) -> bool {
        !self.components.is_empty()
    }

    pub fn observation(&self, metric_id: &str) -> Option<&Observation> {
        self.observations.iter().find(|o| o.metric_id == metric_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationScenario {
    pub schema: String,
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub currency: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog_version: Option<String>,
    pub driver: DriverSource,
    #[serde(default)]
    pub alignment: Alignment,
    #[serde(default)]
    pub zero_target: ZeroTarget,
    /// Decimal places at which index values are carried into later stages.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_decimals: Option<u32>,
    #[serde(default)]
    pub paper_compat: bool,
    #[serde(default)]
    pub demand_zero: DemandZeroPolicy,
    #[serde(default)]
    pub indexes: Vec<IndexSpec>,
    #[serde(default)]
    pub relevance_weights: IndexMap<String, f64>,
    #[serde(default)]
    pub domains: Vec<Domain>,
    pub candidates: Vec<CandidateDataset>,
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{key}")),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    out
}

/// Strict parse reporting the JSON pointer of the first offending field.
pub(crate) fn parse_at<T: DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = pointer(e.path());
        Error::invalid(path, e.into_inner().to_string())
    })
}

/// Parse any document strictly, reporting the JSON pointer of the first
/// offending field.
pub fn parse_json<T: DeserializeOwned>(s: &str) -> Result<T> {
    parse_at(serde_json::from_str(s)?)
}

impl ValuationScenario {
    pub fn from_json(s: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(s)?;
        Self::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        match value.get("schema") {
            Some(serde_json::Value::String(v)) if v == SCHEMA_VERSION => {}
            Some(other) => {
                return Err(Error::SchemaVersion {
                    found: other.as_str().map_or_else(|| other.to_string(), str::to_string),
                    expected: SCHEMA_VERSION.into(),
                })
            }
            None => return Err(Error::invalid("/schema", "missing schema version")),
        }
        let scenario: ValuationScenario = parse_at(value)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn candidate(&self, id: &str) -> Result<&CandidateDataset> {
        self.candidates
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::not_found("candidate", id))
    }

    pub fn domain_mut(&mut self, id: &str) -> Result<&mut Domain> {
        self.domains
            .iter_mut()
            .find(|d| d.id == id)
            .ok_or_else(|| Error::not_found("domain", id))
    }

    /// The driver the scenario values with.
    pub fn driver(&self) -> Result<Driver> {
        match &self.driver {
            DriverSource::Manual(d) => Ok(*d),
            DriverSource::Screening(e) => e
                .driver()
                .ok_or_else(|| Error::invalid("/driver/screening", "screening selected no driver")),
        }
    }

    pub fn effects(&self) -> Option<&Effects> {
        match &self.driver {
            DriverSource::Screening(e) => Some(e),
            DriverSource::Manual(_) => None,
        }
    }

    /// Replace the relevance weights with an ANP priority vector.
    pub fn adopt_relevance_weights(&mut self, pv: &PriorityVector) {
        self.relevance_weights = pv.iter().map(|(k, w)| (k.to_string(), w)).collect();
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema.clone(),
                expected: SCHEMA_VERSION.into(),
            });
        }
        if self.id.trim().is_empty() {
            return Err(Error::invalid("/id", "scenario id is empty"));
        }
        let driver = self.driver()?;
        if self.candidates.is_empty() {
            return Err(Error::invalid("/candidates", "no candidates"));
        }

        let index_ids: HashSet<&str> = self.indexes.iter().map(|i| i.id.as_str()).collect();
        if index_ids.len() != self.indexes.len() {
            return Err(Error::invalid("/indexes", "duplicate index id"));
        }
        for (i, spec) in self.indexes.iter().enumerate() {
            if spec.weights.is_empty() {
                return Err(Error::invalid(format!("/indexes/{i}/weights"), "index has no weights"));
            }
            if let Some(k) = spec.weights.keys().find(|k| index_ids.contains(k.as_str())) {
                return Err(Error::invalid(
                    format!("/indexes/{i}/weights/{k}"),
                    "indexes cannot nest",
                ));
            }
            check_weights(&spec.weights, &format!("/indexes/{i}/weights"))?;
        }
        check_weights(&self.relevance_weights, "/relevance_weights")?;

        match driver {
            Driver::Quality if !index_ids.contains("quality") => {
                return Err(Error::invalid("/indexes", "quality driver needs a \"quality\" index"));
            }
            Driver::Relevance if self.domains.len() != 1 => {
                return Err(Error::invalid(
                    "/domains",
                    format!("relevance driver needs exactly one domain, found {}", self.domains.len()),
                ));
            }
            Driver::Utility if self.domains.is_empty() => {
                return Err(Error::invalid("/domains", "utility driver needs at least one domain"));
            }
            _ => {}
        }
        if matches!(driver, Driver::Relevance | Driver::Utility) {
            if self.relevance_weights.is_empty() {
                return Err(Error::invalid("/relevance_weights", "no relevance weights"));
            }
            let mut seen = HashSet::new();
            for (di, d) in self.domains.iter().enumerate() {
                if !seen.insert(d.id.as_str()) {
                    return Err(Error::invalid(format!("/domains/{di}/id"), "duplicate domain id"));
                }
                if !(d.beta >= 0.0) || !d.beta.is_finite() {
                    return Err(Error::invalid(
                        format!("/domains/{di}/beta"),
                        "beta must be a nonnegative number",
                    ));
                }
                if let Some(m) = self.relevance_weights.keys().find(|m| !d.targets.contains_key(*m)) {
                    return Err(Error::invalid(
                        format!("/domains/{di}/targets"),
                        format!("no target for {m:?}"),
                    ));
                }
            }
        }

        let ids: HashSet<&str> = self.candidates.iter().map(|c| c.id.as_str()).collect();
        if ids.len() != self.candidates.len() {
            return Err(Error::invalid("/candidates", "duplicate candidate id"));
        }
        for (ci, c) in self.candidates.iter().enumerate() {
            self.validate_candidate(c)
                .map_err(|e| e.at(format!("/candidates/{ci}")))?;
        }
        Ok(())
    }

    fn validate_candidate(&self, c: &CandidateDataset) -> Result<()> {
        let mut seen = HashSet::new();
        for (oi, o) in c.observations.iter().enumerate() {
            if !seen.insert(o.metric_id.as_str()) {
                return Err(Error::invalid(
                    format!("/observations/{oi}/metric_id"),
                    format!("{:?} observed twice", o.metric_id),
                ));
            }
            o.rule
                .validate()
                .map_err(|e| e.at(format!("/observations/{oi}/rule")))?;
        }
        if let Some(l) = &c.ledger {
            if l.currency != self.currency {
                return Err(Error::invalid(
                    "/ledger/currency",
                    format!("ledger currency {} differs from scenario currency {}", l.currency, self.currency),
                ));
            }
            l.validate().map_err(|e| e.at("/ledger"))?;
        }
        c.potential.validate().map_err(|e| e.at("/potential"))?;
        if !(c.icf > 0.0) || !c.icf.is_finite() {
            return Err(Error::invalid("/icf", "ICF must be positive"));
        }
        for (k, comp) in c.components.iter().enumerate() {
            let at = format!("/components/{k}");
            let sub = self
                .candidates
                .iter()
                .find(|x| x.id == comp.candidate)
                .ok_or_else(|| {
                    Error::invalid(format!("{at}/candidate"), format!("unknown candidate {:?}", comp.candidate))
                })?;
            if sub.id == c.id || sub.is_distributed() {
                return Err(Error::invalid(
                    format!("{at}/candidate"),
                    "components must be plain candidates",
                ));
            }
            if !(comp.coverage >= 0.0) || !comp.coverage.is_finite() {
                return Err(Error::invalid(format!("{at}/coverage"), "coverage must be nonnegative"));
            }
        }
        Ok(())
    }
}

fn check_weights(w: &IndexMap<String, f64>, at: &str) -> Result<()> {
    for (k, v) in w {
        if !(*v >= 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("{at}/{k}"), "weight must be a nonnegative number"));
        }
    }
    Ok(())
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ValuationScenario> {
    ValuationScenario::load(path)
}

pub fn save_scenario(scenario: &ValuationScenario, path: impl AsRef<Path>) -> Result<()> {
    scenario.validate()?;
    scenario.save(path)
}
