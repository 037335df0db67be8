//! Metric catalog: the balanced-scorecard-aligned taxonomy that screening
//! recommendations and valuation scenarios refer to by id.
//!
//! Catalogs are plain JSON documents and immutable once loaded.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_CATALOG: &str = include_str!("../data/catalog.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BscPerspective {
    Financial,
    Customer,
    InternalProcess,
    LearningGrowth,
}

impl BscPerspective {
    pub const ALL: [BscPerspective; 4] = [
        BscPerspective::Financial,
        BscPerspective::Customer,
        BscPerspective::InternalProcess,
        BscPerspective::LearningGrowth,
    ];
}

/// Whether a larger raw value makes a dataset more (positive) or less
/// (negative) valuable. Maps onto the `xi` sign of linear normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correlation {
    Positive,
    Negative,
}

impl Correlation {
    pub fn xi(self) -> f64 {
        match self {
            Correlation::Positive => 1.0,
            Correlation::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationKind {
    Linear,
    Delimited,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDefinition {
    pub id: String,
    pub name: String,
    pub perspective: BscPerspective,
    pub cluster: String,
    pub description: String,
    pub unit: String,
    pub correlation: Correlation,
    pub normalization_kind: NormalizationKind,
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricCatalog {
    pub version: String,
    pub metrics: Vec<MetricDefinition>,
}

/// Query over a catalog. Every populated dimension must match.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct MetricFilter {
    pub perspective: Option<BscPerspective>,
    pub cluster: Option<String>,
    pub keyword: Option<String>,
}

impl MetricFilter {
    pub fn perspective(mut self, p: BscPerspective) -> Self {
        self.perspective = Some(p);
        self
    }

    pub fn cluster(mut self, c: impl Into<String>) -> Self {
        self.cluster = Some(c.into());
        self
    }

    pub fn keyword(mut self, k: impl Into<String>) -> Self {
        self.keyword = Some(k.into());
        self
    }

    fn matches(&self, m: &MetricDefinition) -> bool {
        if let Some(p) = self.perspective {
            if m.perspective != p {
                return false;
            }
        }
        if let Some(c) = &self.cluster {
            if !m.cluster.eq_ignore_ascii_case(c.trim()) {
                return false;
            }
        }
        if let Some(k) = &self.keyword {
            let k = k.trim().to_lowercase();
            let hit = m.id.to_lowercase().contains(&k)
                || m.name.to_lowercase().contains(&k)
                || m.description.to_lowercase().contains(&k)
                || m.tags.iter().any(|t| t.to_lowercase().contains(&k));
            if !hit {
                return false;
            }
        }
        true
    }
}

impl MetricCatalog {
    /// Parse and validate a catalog document.
    pub fn from_json(source: &str) -> Result<Self> {
        let catalog: MetricCatalog = serde_json::from_str(source)?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// The representative catalog shipped with the crate.
    pub fn default_catalog() -> Self {
        Self::from_json(DEFAULT_CATALOG).expect("shipped catalog is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, m) in self.metrics.iter().enumerate() {
            let at = format!("/metrics/{i}");
            if m.id.trim().is_empty() {
                return Err(Error::invalid(format!("{at}/id"), "metric id is empty"));
            }
            if !seen.insert(m.id.as_str()) {
                return Err(Error::invalid(
                    format!("{at}/id"),
                    format!("duplicate metric id {:?}", m.id),
                ));
            }
            if m.cluster.trim().is_empty() {
                return Err(Error::invalid(
                    format!("{at}/cluster"),
                    "cluster must not be empty",
                ));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&MetricDefinition> {
        self.metrics.iter().find(|m| m.id == id)
    }

    /// Metrics matching every populated filter dimension, in catalog order.
    pub fn find(&self, filter: &MetricFilter) -> Vec<&MetricDefinition> {
        self.metrics.iter().filter(|m| filter.matches(m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(ms: &[&MetricDefinition]) -> Vec<String> {
        ms.iter().map(|m| m.name.clone()).collect()
    }

    #[test]
    fn default_catalog_has_granularity_in_quality() {
        let c = MetricCatalog::default_catalog();
        let g = c.get("granularity").unwrap();
        assert_eq!(g.cluster, "Quality");
        assert!(g.tags.iter().any(|t| t == "weight-eligible"));
    }

    #[test]
    fn default_catalog_covers_worked_example_metrics() {
        let c = MetricCatalog::default_catalog();
        for name in [
            "Accuracy",
            "Volume",
            "Completeness",
            "Variety",
            "Timeliness",
            "Processing Cost",
            "Storage Cost",
            "Risk Cost",
            "RoI",
            "Granularity",
            "Format",
            "Precision",
            "Similarity",
            "Compliance",
            "Age",
            "Churn",
            "User Frequency",
            "Satisfaction",
            "Reputation",
            "Licensing",
        ] {
            assert!(
                c.metrics.iter().any(|m| m.name == name),
                "missing {name}"
            );
        }
    }

    #[test]
    fn empty_metric_list_is_valid() {
        let c = MetricCatalog::from_json(r#"{"version":"x","metrics":[]}"#).unwrap();
        assert!(c.metrics.is_empty());
    }

    #[test]
    fn duplicate_id_rejected() {
        let m = r#"{"id":"acc","name":"A","perspective":"Financial","cluster":"Q","description":"","unit":"","correlation":"positive","normalization_kind":"linear","tags":[]}"#;
        let doc = format!(r#"{{"version":"1","metrics":[{m},{m}]}}"#);
        let err = MetricCatalog::from_json(&doc).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn unknown_perspective_rejected() {
        let doc = r#"{"version":"1","metrics":[{"id":"a","name":"A","perspective":"Galactic","cluster":"Q","description":"","unit":"","correlation":"positive","normalization_kind":"linear","tags":[]}]}"#;
        assert!(matches!(
            MetricCatalog::from_json(doc),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn empty_cluster_rejected() {
        let doc = r#"{"version":"1","metrics":[{"id":"a","name":"A","perspective":"Customer","cluster":" ","description":"","unit":"","correlation":"negative","normalization_kind":"binary","tags":[]}]}"#;
        assert!(MetricCatalog::from_json(doc).is_err());
    }

    #[test]
    fn quality_cluster_filter() {
        let c = MetricCatalog::default_catalog();
        let found = names(&c.find(&MetricFilter::default().cluster("Quality")));
        for n in ["Granularity", "Format", "Precision", "Timeliness", "Similarity"] {
            assert!(found.iter().any(|f| f == n), "{n} not in {found:?}");
        }
    }

    #[test]
    fn financial_perspective_filter() {
        let c = MetricCatalog::default_catalog();
        let found = names(&c.find(&MetricFilter::default().perspective(BscPerspective::Financial)));
        for n in ["Risk Cost", "Storage Cost", "RoI"] {
            assert!(found.iter().any(|f| f == n), "{n} not in {found:?}");
        }
    }

    #[test]
    fn keyword_without_hits() {
        let c = MetricCatalog::default_catalog();
        assert!(c
            .find(&MetricFilter::default().keyword("zzz-nonexistent"))
            .is_empty());
    }

    #[test]
    fn empty_filter_returns_everything_in_order() {
        let c = MetricCatalog::default_catalog();
        let all: Vec<_> = c.find(&MetricFilter::default()).into_iter().cloned().collect();
        assert_eq!(all, c.metrics);
    }

    #[test]
    fn combined_filters_intersect() {
        let c = MetricCatalog::default_catalog();
        let hits = c.find(
            &MetricFilter::default()
                .perspective(BscPerspective::Financial)
                .keyword("storage"),
        );
        assert_eq!(names(&hits), vec!["Storage Cost".to_string()]);
    }

    #[test]
    fn save_load_round_trip() {
        let c = MetricCatalog::default_catalog();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("catalog.json");
        c.save(&p).unwrap();
        assert_eq!(MetricCatalog::load(&p).unwrap(), c);
    }
}
