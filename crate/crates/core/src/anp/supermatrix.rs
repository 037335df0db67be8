//! Network (supermatrix) prioritization for interdependent criteria.

use serde::{Deserialize, Serialize};

use super::PriorityVector;
use crate::error::{Error, Result};

/// Column-sum tolerance for stochastic checks.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;
/// Convergence threshold on the max entry change between squarings.
pub const LIMIT_TOLERANCE: f64 = 1e-9;
pub const MAX_SQUARINGS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cluster {
    pub id: String,
    pub items: Vec<String>,
}

/// Influence network over clustered elements.
///
/// `blocks[r][c]` is the influence of element `r` on element `c` (columns
/// are the influenced side). When `cluster_weights` is present, the block
/// between row cluster `I` and column cluster `J` is scaled by
/// `cluster_weights[I][J]`; otherwise `blocks` is taken as already weighted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Supermatrix {
    pub clusters: Vec<Cluster>,
    pub blocks: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_weights: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPriorities {
    /// Average of the limit matrix columns, over every element.
    pub global: PriorityVector,
    /// `global` restricted to each cluster and renormalized.
    pub by_cluster: Vec<(String, PriorityVector)>,
    /// Length of the attractor cycle; 1 when the powers converge.
    pub period: usize,
    pub limit: Vec<Vec<f64>>,
}

type Matrix = Vec<Vec<f64>>;

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

impl Supermatrix {
    pub fn elements(&self) -> Vec<String> {
        self.clusters.iter().flat_map(|c| c.items.iter().cloned()).collect()
    }

    fn cluster_of(&self) -> Vec<usize> {
        self.clusters
            .iter()
            .enumerate()
            .flat_map(|(k, c)| std::iter::repeat_n(k, c.items.len()))
            .collect()
    }

    /// The weighted, column-stochastic supermatrix.
    pub fn weighted(&self) -> Result<Matrix> {
        let n = self.elements().len();
        if n == 0 {
            return Err(Error::invalid("/clusters", "network has no elements"));
        }
        if self.blocks.len() != n || self.blocks.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(
                "/network/blocks",
                format!("blocks must be {n}x{n} to match the clustered elements"),
            ));
        }
        let owner = self.cluster_of();
        let mut w = self.blocks.clone();
        if let Some(cw) = &self.cluster_weights {
            let k = self.clusters.len();
            if cw.len() != k || cw.iter().any(|r| r.len() != k) {
                return Err(Error::invalid(
                    "/network/cluster_weights",
                    format!("cluster weights must be {k}x{k}"),
                ));
            }
            for (r, row) in w.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v *= cw[owner[r]][owner[c]];
                }
            }
        }
        for c in 0..n {
            if let Some(r) = (0..n).find(|&r| !(w[r][c] >= 0.0)) {
                return Err(Error::invalid(
                    format!("/network/blocks/{r}/{c}"),
                    "influence entries must be nonnegative",
                ));
            }
            let s: f64 = (0..n).map(|r| w[r][c]).sum();
            if (s - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::invalid(
                    format!("/network/blocks/*/{c}"),
                    format!("weighted supermatrix column {c} sums to {s}, not 1"),
                ));
            }
        }
        Ok(w)
    }

    /// Limit priorities by repeated squaring, falling back to the Cesàro
    /// average of the attractor cycle for periodic networks.
    pub fn limit_priorities(&self) -> Result<LimitPriorities> {
        let w = self.weighted()?;
        let n = w.len();

        let mut m = w.clone();
        let mut converged = false;
        for _ in 0..MAX_SQUARINGS {
            let next = matmul(&m, &m);
            let d = max_diff(&next, &m);
            m = next;
            if d < LIMIT_TOLERANCE {
                converged = true;
                break;
            }
        }

        // A true limit satisfies W * M = M. Otherwise walk the cycle
        // M, WM, W^2 M, ... until it closes and average it.
        let mut period = None;
        let mut cycle = vec![m.clone()];
        let mut cur = m.clone();
        for p in 1..=n.max(1) {
            cur = matmul(&w, &cur);
            if max_diff(&cur, &m) < LIMIT_TOLERANCE.sqrt() {
                period = Some(p);
                break;
            }
            cycle.push(cur.clone());
        }
        let Some(period) = period else {
            return Err(if converged {
                Error::math("/network", "limit matrix is not a fixed point of the supermatrix")
            } else {
                Error::math(
                    "/network",
                    format!("supermatrix powers did not converge within {MAX_SQUARINGS} squarings"),
                )
            });
        };
        let limit: Matrix = if period == 1 {
            m
        } else {
            let mut avg = vec![vec![0.0; n]; n];
            for c in &cycle[..period] {
                for i in 0..n {
                    for j in 0..n {
                        avg[i][j] += c[i][j] / period as f64;
                    }
                }
            }
            avg
        };

        let mut global: Vec<f64> = (0..n).map(|i| limit[i].iter().sum::<f64>() / n as f64).collect();
        let total: f64 = global.iter().sum();
        global.iter_mut().for_each(|v| *v /= total);
        let items = self.elements();

        let mut by_cluster = Vec::new();
        let mut offset = 0;
        for c in &self.clusters {
            let slice = &global[offset..offset + c.items.len()];
            let s: f64 = slice.iter().sum();
            let weights = if s > 0.0 {
                slice.iter().map(|v| v / s).collect()
            } else {
                vec![1.0 / c.items.len() as f64; c.items.len()]
            };
            by_cluster.push((
                c.id.clone(),
                PriorityVector {
                    items: c.items.clone(),
                    weights,
                },
            ));
            offset += c.items.len();
        }

        Ok(LimitPriorities {
            global: PriorityVector { items, weights: global },
            by_cluster,
            period,
            limit,
        })
    }
}
