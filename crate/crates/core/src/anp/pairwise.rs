use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the reciprocity check `a[j][i] * a[i][j] == 1`.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-9;

/// Successive-iterate max-norm tolerance for power iteration.
pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITERATIONS: usize = 10_000;

/// Conventional consistency threshold for judgement matrices.
pub const DEFAULT_CR_THRESHOLD: f64 = 0.10;

/// Random consistency index for n = 1..=10. Larger matrices reuse n = 10.
const RANDOM_INDEX: [f64; 10] = [0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49];

pub fn random_index(n: usize) -> f64 {
    match n {
        0 => 0.0,
        n => RANDOM_INDEX[n.min(10) - 1],
    }
}

/// Reciprocal judgement matrix: `entries[i][j]` is how much more important
/// `items[i]` is than `items[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairwiseMatrix {
    pub items: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Diagonal { i: usize, value: f64 },
    Positivity { i: usize, j: usize, value: f64 },
    Reciprocity { i: usize, j: usize, value: f64, expected: f64 },
}

/// Normalized weights over an ordered list of items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorityVector {
    pub items: Vec<String>,
    pub weights: Vec<f64>,
}

impl PriorityVector {
    pub fn uniform(items: Vec<String>) -> Self {
        let n = items.len();
        PriorityVector {
            weights: vec![1.0 / n as f64; n],
            items,
        }
    }

    pub fn get(&self, item: &str) -> Option<f64> {
        self.items.iter().position(|i| i == item).map(|p| self.weights[p])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.items.iter().map(String::as_str).zip(self.weights.iter().copied())
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub lambda_max: f64,
    pub consistency_index: f64,
    pub consistency_ratio: f64,
    pub acceptable: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorityMethod {
    #[default]
    Eigenvector,
    GeometricMean,
}

impl PairwiseMatrix {
    pub fn new(items: Vec<String>, entries: Vec<Vec<f64>>) -> Self {
        PairwiseMatrix { items, entries }
    }

    /// Items named `0..n` for quick construction in tests and tools.
    pub fn unnamed(entries: Vec<Vec<f64>>) -> Self {
        let items = (0..entries.len()).map(|i| format!("e{i}")).collect();
        PairwiseMatrix { items, entries }
    }

    /// All-ones judgement matrix: every pair judged equally important.
    pub fn indifference(items: Vec<String>) -> Self {
        let n = items.len();
        PairwiseMatrix {
            entries: vec![vec![1.0; n]; n],
            items,
        }
    }

    /// Perfectly consistent matrix `w_i / w_j`.
    pub fn from_weights(items: Vec<String>, weights: &[f64]) -> Self {
        let entries = weights
            .iter()
            .map(|wi| weights.iter().map(|wj| wi / wj).collect())
            .collect();
        PairwiseMatrix { items, entries }
    }

    /// Build from the upper triangle, filling the lower one with reciprocals.
    /// `upper[k]` walks (0,1), (0,2), ..., (1,2), ... in row order.
    pub fn from_upper_triangle(items: Vec<String>, upper: &[f64]) -> Result<Self> {
        let n = items.len();
        if upper.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::invalid(
                "/upper",
                format!("expected {} judgements for {n} items", n * n.saturating_sub(1) / 2),
            ));
        }
        let mut entries = vec![vec![1.0; n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                entries[i][j] = upper[k];
                entries[j][i] = 1.0 / upper[k];
                k += 1;
            }
        }
        Ok(PairwiseMatrix { items, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.entries.len();
        if let Some((i, row)) = self.entries.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::invalid(
                format!("/matrix/{i}"),
                format!("matrix is not square: row has {} entries, expected {n}", row.len()),
            ));
        }
        if self.items.len() != n {
            return Err(Error::invalid(
                "/items",
                format!("{} items for a {n}x{n} matrix", self.items.len()),
            ));
        }
        Ok(())
    }

    /// Every diagonal, positivity and reciprocity violation. Errors only on
    /// shape problems.
    pub fn violations(&self) -> Result<Vec<Violation>> {
        self.check_shape()?;
        let a = &self.entries;
        let n = a.len();
        let mut out = Vec::new();
        for i in 0..n {
            if a[i][i] != 1.0 {
                out.push(Violation::Diagonal { i, value: a[i][i] });
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !(a[i][j] > 0.0) || !a[i][j].is_finite() {
                    out.push(Violation::Positivity { i, j, value: a[i][j] });
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                // (i, j) is checked against its mirror above the diagonal
                let (upper, lower) = (a[j][i], a[i][j]);
                if upper > 0.0 && lower > 0.0 {
                    let expected = 1.0 / upper;
                    if ((lower - expected) / expected).abs() > RECIPROCITY_TOLERANCE {
                        out.push(Violation::Reciprocity { i, j, value: lower, expected });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations()?.first() {
            None => Ok(()),
            Some(v) => Err(Error::invalid(
                match v {
                    Violation::Diagonal { i, .. } => format!("/matrix/{i}/{i}"),
                    Violation::Positivity { i, j, .. } | Violation::Reciprocity { i, j, .. } => {
                        format!("/matrix/{i}/{j}")
                    }
                },
                format!("{v:?}"),
            )),
        }
    }

    fn mul(&self, x: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Normalized principal right eigenvector by power iteration.
    pub fn principal_priorities(&self) -> Result<PriorityVector> {
        self.validate()?;
        let n = self.len();
        if n == 0 {
            return Err(Error::invalid("/matrix", "empty matrix"));
        }
        let mut x = vec![1.0 / n as f64; n];
        for _ in 0..POWER_MAX_ITERATIONS {
            let mut next = self.mul(&x);
            let s: f64 = next.iter().sum();
            next.iter_mut().for_each(|v| *v /= s);
            let delta = next
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            x = next;
            if delta < POWER_TOLERANCE {
                return Ok(PriorityVector {
                    items: self.items.clone(),
                    weights: x,
                });
            }
        }
        Err(Error::NoConvergence {
            iterations: POWER_MAX_ITERATIONS,
        })
    }

    /// Row geometric means, normalized.
    pub fn geometric_mean_priorities(&self) -> Result<PriorityVector> {
        self.validate()?;
        let n = self.len();
        if n == 0 {
            return Err(Error::invalid("/matrix", "empty matrix"));
        }
        let g: Vec<f64> = self
            .entries
            .iter()
            .map(|row| (row.iter().map(|v| v.ln()).sum::<f64>() / n as f64).exp())
            .collect();
        let s: f64 = g.iter().sum();
        Ok(PriorityVector {
            items: self.items.clone(),
            weights: g.into_iter().map(|v| v / s).collect(),
        })
    }

    pub fn priorities(&self, method: PriorityMethod) -> Result<PriorityVector> {
        match method {
            PriorityMethod::Eigenvector => self.principal_priorities(),
            PriorityMethod::GeometricMean => self.geometric_mean_priorities(),
        }
    }

    /// Saaty consistency report using the default 0.10 threshold.
    pub fn consistency(&self) -> Result<ConsistencyReport> {
        self.consistency_with(DEFAULT_CR_THRESHOLD)
    }

    pub fn consistency_with(&self, threshold: f64) -> Result<ConsistencyReport> {
        let w = self.principal_priorities()?;
        let n = self.len();
        let aw = self.mul(&w.weights);
        let lambda_max = aw.iter().zip(&w.weights).map(|(a, b)| a / b).sum::<f64>() / n as f64;
        let (ci, cr) = if n <= 2 {
            (0.0, 0.0)
        } else {
            let ci = (lambda_max - n as f64) / (n as f64 - 1.0);
            (ci, ci / random_index(n))
        };
        Ok(ConsistencyReport {
            lambda_max,
            consistency_index: ci,
            consistency_ratio: cr,
            acceptable: cr <= threshold,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("m{i}")).collect()
    }

    #[test]
    fn indifference_is_valid_and_uniform() {
        let m = PairwiseMatrix::indifference(names(3));
        assert!(m.violations().unwrap().is_empty());
        let p = m.principal_priorities().unwrap();
        for w in &p.weights {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
        let r = m.consistency().unwrap();
        assert!(r.consistency_ratio.abs() < 1e-12);
        assert!(r.acceptable);
    }

    #[test]
    fn reciprocity_violation_reported_at_lower_cell() {
        // 0-based (0,1)=3 with (1,0)=0.5
        let m = PairwiseMatrix::unnamed(vec![vec![1.0, 3.0], vec![0.5, 1.0]]);
        let v = m.violations().unwrap();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::Reciprocity { i: 1, j: 0, .. }));
    }

    #[test]
    fn positivity_violation() {
        let m = PairwiseMatrix::unnamed(vec![vec![1.0, -2.0], vec![-0.5, 1.0]]);
        let v = m.violations().unwrap();
        assert!(v.iter().any(|x| matches!(x, Violation::Positivity { i: 0, j: 1, .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::Positivity { i: 1, j: 0, .. })));
        let zero = PairwiseMatrix::unnamed(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(!zero.violations().unwrap().is_empty());
    }

    #[test]
    fn non_square_is_an_error() {
        let m = PairwiseMatrix::unnamed(vec![vec![1.0, 2.0], vec![0.5]]);
        assert!(m.violations().is_err());
    }

    #[test]
    fn diagonal_violation() {
        let m = PairwiseMatrix::unnamed(vec![vec![2.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(m.violations().unwrap()[0], Violation::Diagonal { i: 0, .. }));
    }

    #[test]
    fn consistent_matrix_recovers_generator() {
        let w = [0.6, 0.3, 0.1];
        let m = PairwiseMatrix::from_weights(names(3), &w);
        let p = m.principal_priorities().unwrap();
        for (a, b) in p.weights.iter().zip(w) {
            assert!((a - b).abs() < 1e-8);
        }
        let r = m.consistency().unwrap();
        assert!((r.lambda_max - 3.0).abs() < 1e-8);
        assert!(r.consistency_ratio.abs() < 1e-8);
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = PairwiseMatrix::unnamed(vec![vec![1.0, 4.0], vec![0.25, 1.0]]);
        let p = m.principal_priorities().unwrap();
        assert!((p.weights[0] - 0.8).abs() < 1e-10);
        assert!((p.weights[1] - 0.2).abs() < 1e-10);
        assert_eq!(m.consistency().unwrap().consistency_ratio, 0.0);
    }

    #[test]
    fn cyclic_judgements_are_inconsistent() {
        let m = PairwiseMatrix::unnamed(vec![
            vec![1.0, 9.0, 1.0 / 9.0],
            vec![1.0 / 9.0, 1.0, 9.0],
            vec![9.0, 1.0 / 9.0, 1.0],
        ]);
        let r = m.consistency().unwrap();
        // lambda_max = 1 + 9 + 1/9 for this circulant matrix
        assert!((r.lambda_max - (1.0 + 9.0 + 1.0 / 9.0)).abs() < 1e-8);
        assert!(r.consistency_ratio > 6.0);
        assert!(!r.acceptable);
    }

    #[test]
    fn geometric_mean_agrees_on_consistent_input() {
        let w = [0.5, 0.25, 0.15, 0.1];
        let m = PairwiseMatrix::from_weights(names(4), &w);
        let g = m.geometric_mean_priorities().unwrap();
        for (a, b) in g.weights.iter().zip(w) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn upper_triangle_fills_reciprocals() {
        let m = PairwiseMatrix::from_upper_triangle(names(3), &[2.0, 4.0, 2.0]).unwrap();
        assert_eq!(m.entries[1][0], 0.5);
        assert_eq!(m.entries[2][0], 0.25);
        assert!(m.violations().unwrap().is_empty());
        assert!(PairwiseMatrix::from_upper_triangle(names(3), &[2.0]).is_err());
    }

    #[test]
    fn random_index_table() {
        assert_eq!(random_index(3), 0.58);
        assert_eq!(random_index(10), 1.49);
        assert_eq!(random_index(15), 1.49);
    }
}
