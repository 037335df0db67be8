use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    Cluster, ConsistencyReport, PairwiseMatrix, PriorityMethod, PriorityVector, Supermatrix,
    DEFAULT_CR_THRESHOLD,
};
use crate::error::{Error, Result};

/// One cluster of judgements in a judgement file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterJudgements {
    pub id: String,
    pub items: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

impl ClusterJudgements {
    pub fn pairwise(&self) -> PairwiseMatrix {
        PairwiseMatrix::new(self.items.clone(), self.matrix.clone())
    }
}

/// Influence blocks for the network path. Elements are the clusters'
/// items in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkBlocks {
    pub blocks: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_weights: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgementSet {
    pub clusters: Vec<ClusterJudgements>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkBlocks>,
}

impl JudgementSet {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn supermatrix(&self) -> Option<Supermatrix> {
        self.network.as_ref().map(|n| Supermatrix {
            clusters: self
                .clusters
                .iter()
                .map(|c| Cluster {
                    id: c.id.clone(),
                    items: c.items.clone(),
                })
                .collect(),
            blocks: n.blocks.clone(),
            cluster_weights: n.cluster_weights.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeriveOptions {
    pub method: PriorityMethod,
    pub cr_threshold: f64,
    /// Proceed even when a matrix exceeds the consistency threshold.
    pub allow_inconsistent: bool,
    /// Metric ids that must receive a weight.
    pub required: Vec<String>,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions {
            method: PriorityMethod::Eigenvector,
            cr_threshold: DEFAULT_CR_THRESHOLD,
            allow_inconsistent: false,
            required: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionPath {
    Hierarchical,
    Network,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedWeights {
    pub priorities: PriorityVector,
    pub path: CompositionPath,
    pub method: PriorityMethod,
    pub cluster_weights: PriorityVector,
    pub consistency: Vec<(String, ConsistencyReport)>,
    pub warnings: Vec<String>,
}

/// Global metric weights from per-cluster judgements.
///
/// Without a network the weight of a metric is its cluster's weight times
/// its local weight; with a network it is the limit-supermatrix priority.
pub fn derive_metric_weights(set: &JudgementSet, opts: &DeriveOptions) -> Result<DerivedWeights> {
    if set.clusters.is_empty() {
        return Err(Error::invalid("/clusters", "no judgement clusters"));
    }
    let mut seen = HashSet::new();
    for (ci, c) in set.clusters.iter().enumerate() {
        for item in &c.items {
            if !seen.insert(item.as_str()) {
                return Err(Error::invalid(
                    format!("/clusters/{ci}/items"),
                    format!("metric {item:?} appears in more than one cluster"),
                ));
            }
        }
    }
    if let Some(missing) = opts.required.iter().find(|m| !seen.contains(m.as_str())) {
        return Err(Error::invalid(
            "/clusters",
            format!("metric {missing:?} is missing from the judgements"),
        ));
    }

    let mut warnings = Vec::new();
    let mut consistency = Vec::new();
    let mut check = |id: &str, m: &PairwiseMatrix, at: String| -> Result<PriorityVector> {
        let report = m.consistency_with(opts.cr_threshold).map_err(|e| e.at(&at))?;
        if !report.acceptable {
            if !opts.allow_inconsistent {
                return Err(Error::Inconsistent {
                    cluster: id.to_string(),
                    ratio: report.consistency_ratio,
                    threshold: opts.cr_threshold,
                });
            }
            warnings.push(format!(
                "{id}: consistency ratio {:.4} above {} accepted by override",
                report.consistency_ratio, opts.cr_threshold
            ));
        }
        consistency.push((id.to_string(), report));
        m.priorities(opts.method).map_err(|e| e.at(&at))
    };

    let mut locals = Vec::new();
    for (ci, c) in set.clusters.iter().enumerate() {
        locals.push(check(&c.id, &c.pairwise(), format!("/clusters/{ci}"))?);
    }
    let cluster_ids: Vec<String> = set.clusters.iter().map(|c| c.id.clone()).collect();
    let cluster_weights = match &set.cluster_matrix {
        Some(m) => check(
            "clusters",
            &PairwiseMatrix::new(cluster_ids.clone(), m.clone()),
            "/cluster_matrix".into(),
        )?,
        None => {
            if set.clusters.len() > 1 {
                warnings.push("no cluster matrix: clusters weighted equally".into());
            }
            PriorityVector::uniform(cluster_ids)
        }
    };

    let (priorities, path) = match set.supermatrix() {
        Some(net) => {
            let limit = net.limit_priorities().map_err(|e| e.at("/network"))?;
            (limit.global, CompositionPath::Network)
        }
        None => {
            let mut items = Vec::new();
            let mut weights = Vec::new();
            for (local, cw) in locals.iter().zip(&cluster_weights.weights) {
                for (item, w) in local.iter() {
                    items.push(item.to_string());
                    weights.push(cw * w);
                }
            }
            (PriorityVector { items, weights }, CompositionPath::Hierarchical)
        }
    };

    Ok(DerivedWeights {
        priorities,
        path,
        method: opts.method,
        cluster_weights,
        consistency,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn cluster(id: &str, m: PairwiseMatrix) -> ClusterJudgements {
        ClusterJudgements {
            id: id.into(),
            items: m.items.clone(),
            matrix: m.entries,
        }
    }

    #[test]
    fn single_cluster_recovers_generating_weights() {
        // the relevance weights of the buying example after folding quality
        let w = [0.51, 0.06, 0.1, 0.3, 0.03];
        let items = ids(&["quality", "risk_cost", "storage_cost", "roi", "compliance"]);
        let set = JudgementSet {
            clusters: vec![cluster("relevance", PairwiseMatrix::from_weights(items, &w))],
            cluster_matrix: None,
            network: None,
        };
        let d = derive_metric_weights(&set, &DeriveOptions::default()).unwrap();
        assert_eq!(d.path, CompositionPath::Hierarchical);
        for (a, b) in d.priorities.weights.iter().zip(w) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn one_metric_gets_everything() {
        let set = JudgementSet {
            clusters: vec![cluster("c", PairwiseMatrix::indifference(ids(&["only"])))],
            cluster_matrix: None,
            network: None,
        };
        let d = derive_metric_weights(&set, &DeriveOptions::default()).unwrap();
        assert_eq!(d.priorities.weights, vec![1.0]);
    }

    #[test]
    fn two_uniform_clusters_give_quarters() {
        let set = JudgementSet {
            clusters: vec![
                cluster("a", PairwiseMatrix::indifference(ids(&["a1", "a2"]))),
                cluster("b", PairwiseMatrix::indifference(ids(&["b1", "b2"]))),
            ],
            cluster_matrix: Some(vec![vec![1.0, 1.0], vec![1.0, 1.0]]),
            network: None,
        };
        let d = derive_metric_weights(&set, &DeriveOptions::default()).unwrap();
        for w in &d.priorities.weights {
            assert!((w - 0.25).abs() < 1e-12);
        }
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn inconsistent_cluster_needs_override() {
        let cyc = PairwiseMatrix::new(
            ids(&["x", "y", "z"]),
            vec![
                vec![1.0, 9.0, 1.0 / 9.0],
                vec![1.0 / 9.0, 1.0, 9.0],
                vec![9.0, 1.0 / 9.0, 1.0],
            ],
        );
        let set = JudgementSet {
            clusters: vec![cluster("c", cyc)],
            cluster_matrix: None,
            network: None,
        };
        assert!(matches!(
            derive_metric_weights(&set, &DeriveOptions::default()),
            Err(Error::Inconsistent { .. })
        ));
        let opts = DeriveOptions {
            allow_inconsistent: true,
            ..Default::default()
        };
        let d = derive_metric_weights(&set, &opts).unwrap();
        assert_eq!(d.warnings.len(), 1);
    }

    #[test]
    fn missing_and_duplicate_metrics() {
        let set = JudgementSet {
            clusters: vec![
                cluster("a", PairwiseMatrix::indifference(ids(&["m1", "m2"]))),
                cluster("b", PairwiseMatrix::indifference(ids(&["m2"]))),
            ],
            cluster_matrix: None,
            network: None,
        };
        assert!(derive_metric_weights(&set, &DeriveOptions::default()).is_err());
        let set = JudgementSet {
            clusters: vec![cluster("a", PairwiseMatrix::indifference(ids(&["m1"])))],
            cluster_matrix: None,
            network: None,
        };
        let opts = DeriveOptions {
            required: ids(&["m1", "m9"]),
            ..Default::default()
        };
        let err = derive_metric_weights(&set, &opts).unwrap_err();
        assert!(err.to_string().contains("m9"));
    }

    #[test]
    fn network_path_uses_limit() {
        let set = JudgementSet {
            clusters: vec![
                cluster("a", PairwiseMatrix::indifference(ids(&["a1"]))),
                cluster("b", PairwiseMatrix::indifference(ids(&["b1"]))),
            ],
            cluster_matrix: None,
            network: Some(NetworkBlocks {
                blocks: vec![vec![0.25, 0.5], vec![0.75, 0.5]],
                cluster_weights: None,
            }),
        };
        let d = derive_metric_weights(&set, &DeriveOptions::default()).unwrap();
        assert_eq!(d.path, CompositionPath::Network);
        // stationary vector of [[.25,.5],[.75,.5]] is (0.4, 0.6)
        assert!((d.priorities.weights[0] - 0.4).abs() < 1e-9);
        assert!((d.priorities.weights[1] - 0.6).abs() < 1e-9);
    }

    #[test]
    fn judgement_file_shape() {
        let doc = r#"{"clusters":[{"id":"q","items":["a","b"],"matrix":[[1,3],[0.3333333333333333,1]]}]}"#;
        let set = JudgementSet::from_json(doc).unwrap();
        let d = derive_metric_weights(&set, &DeriveOptions::default()).unwrap();
        assert!((d.priorities.weights[0] - 0.75).abs() < 1e-9);
        assert!(JudgementSet::from_json(r#"{"clusters":[],"extra":1}"#).is_err());
    }
}
