//! Raw metric observations to dimensionless scores.
//!
//! Three schemes are supported: linear (min/max with a correlation sign),
//! delimited (threshold test) and binary (categorical labels). Linear
//! scores are not clamped unless the rule asks for it, so a cost four times
//! over budget normalizes to roughly `-4`.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    /// Satisfied when `raw >= threshold`.
    AtOrAbove,
    /// Satisfied when `raw < threshold`.
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormalizationRule {
    Linear {
        min: f64,
        max: f64,
        xi: f64,
        #[serde(default)]
        clamp: bool,
    },
    Delimited {
        threshold: f64,
        satisfied_when: Threshold,
    },
    /// Categorical labels. Either a set of `positive` labels (score 1,
    /// anything else 0) or explicit `grades` in `[0, 1]`.
    Binary {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        positive: Vec<String>,
        #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
        grades: IndexMap<String, f64>,
    },
}

impl NormalizationRule {
    pub fn linear(min: f64, max: f64, xi: f64) -> Self {
        NormalizationRule::Linear {
            min,
            max,
            xi,
            clamp: false,
        }
    }

    pub fn delimited(threshold: f64, satisfied_when: Threshold) -> Self {
        NormalizationRule::Delimited {
            threshold,
            satisfied_when,
        }
    }

    pub fn positive_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        NormalizationRule::Binary {
            positive: labels.into_iter().map(Into::into).collect(),
            grades: IndexMap::new(),
        }
    }

    pub fn graded<I, S>(grades: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        NormalizationRule::Binary {
            positive: Vec::new(),
            grades: grades.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NormalizationRule::Linear { min, max, xi, .. } => {
                if !min.is_finite() || !max.is_finite() {
                    return Err(Error::invalid("", "linear bounds must be finite"));
                }
                if min == max {
                    return Err(Error::invalid("", "degenerate bounds: max equals min"));
                }
                if *xi != 1.0 && *xi != -1.0 {
                    return Err(Error::invalid("/xi", "xi must be +1 or -1"));
                }
            }
            NormalizationRule::Delimited { threshold, .. } => {
                if !threshold.is_finite() {
                    return Err(Error::invalid("/threshold", "threshold must be finite"));
                }
            }
            NormalizationRule::Binary { positive, grades } => {
                match (positive.is_empty(), grades.is_empty()) {
                    (true, true) => {
                        return Err(Error::invalid("", "binary rule declares no labels"))
                    }
                    (false, false) => {
                        return Err(Error::invalid(
                            "",
                            "binary rule takes either positive labels or grades, not both",
                        ))
                    }
                    _ => {}
                }
                let mut seen = std::collections::HashSet::new();
                for label in positive.iter().chain(grades.keys()) {
                    if !seen.insert(label_key(label)) {
                        return Err(Error::invalid("", format!("duplicate label {label:?}")));
                    }
                }
                for (label, g) in grades {
                    if !(0.0..=1.0).contains(g) {
                        return Err(Error::invalid(
                            format!("/grades/{label}"),
                            "grade must lie in [0, 1]",
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A raw measured value: numeric, or a categorical label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawValue {
    Number(f64),
    Label(String),
}

impl From<f64> for RawValue {
    fn from(v: f64) -> Self {
        RawValue::Number(v)
    }
}

impl From<&str> for RawValue {
    fn from(v: &str) -> Self {
        RawValue::Label(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricObservation {
    pub metric_id: String,
    pub raw: RawValue,
    #[serde(default)]
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMetric {
    pub metric_id: String,
    pub value: f64,
    pub rule_applied: NormalizationRule,
}

/// `xi * (raw - min) / (max - min)`, unclamped.
pub fn normalize_linear(raw: f64, min: f64, max: f64, xi: f64) -> Result<f64> {
    if max == min {
        return Err(Error::invalid("", "degenerate bounds: max equals min"));
    }
    // adding zero folds -0.0 into 0.0
    Ok(xi * (raw - min) / (max - min) + 0.0)
}

pub fn normalize_delimited(raw: f64, threshold: f64, satisfied_when: Threshold) -> f64 {
    let hit = match satisfied_when {
        Threshold::AtOrAbove => raw >= threshold,
        Threshold::Below => raw < threshold,
    };
    if hit {
        1.0
    } else {
        0.0
    }
}

fn label_key(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Score a categorical label against a binary rule.
pub fn normalize_binary(label: &str, rule: &NormalizationRule) -> Result<f64> {
    let NormalizationRule::Binary { positive, grades } = rule else {
        return Err(Error::invalid("", "not a binary rule"));
    };
    let key = label_key(label);
    if !grades.is_empty() {
        return grades
            .iter()
            .find(|(l, _)| label_key(l) == key)
            .map(|(_, g)| *g)
            .ok_or_else(|| Error::invalid("/raw", format!("unknown label {label:?}")));
    }
    Ok(if positive.iter().any(|p| label_key(p) == key) {
        1.0
    } else {
        0.0
    })
}

/// Dispatch an observation to the scheme named by `rule`.
pub fn normalize(observation: &MetricObservation, rule: &NormalizationRule) -> Result<NormalizedMetric> {
    rule.validate().map_err(|e| e.at("/rule"))?;
    let value = match (rule, &observation.raw) {
        (NormalizationRule::Linear { min, max, xi, clamp }, RawValue::Number(raw)) => {
            if !raw.is_finite() {
                return Err(Error::invalid("/raw", "raw value must be finite"));
            }
            let v = normalize_linear(*raw, *min, *max, *xi)?;
            if *clamp {
                let (lo, hi) = if *xi > 0.0 { (0.0, 1.0) } else { (-1.0, 0.0) };
                v.clamp(lo, hi)
            } else {
                v
            }
        }
        (NormalizationRule::Delimited { threshold, satisfied_when }, RawValue::Number(raw)) => {
            if !raw.is_finite() {
                return Err(Error::invalid("/raw", "raw value must be finite"));
            }
            normalize_delimited(*raw, *threshold, *satisfied_when)
        }
        (NormalizationRule::Binary { .. }, RawValue::Label(label)) => normalize_binary(label, rule)?,
        (rule, raw) => {
            return Err(Error::invalid(
                "/raw",
                format!(
                    "kind mismatch: {} rule cannot take {} input",
                    rule_name(rule),
                    match raw {
                        RawValue::Number(_) => "numeric",
                        RawValue::Label(_) => "categorical",
                    }
                ),
            ))
        }
    };
    Ok(NormalizedMetric {
        metric_id: observation.metric_id.clone(),
        value,
        rule_applied: rule.clone(),
    })
}

fn rule_name(rule: &NormalizationRule) -> &'static str {
    match rule {
        NormalizationRule::Linear { .. } => "linear",
        NormalizationRule::Delimited { .. } => "delimited",
        NormalizationRule::Binary { .. } => "binary",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn obs(id: &str, raw: impl Into<RawValue>) -> MetricObservation {
        MetricObservation {
            metric_id: id.into(),
            raw: raw.into(),
            unit: String::new(),
        }
    }

    #[test]
    fn linear_examples() {
        assert_eq!(normalize_linear(0.80, 0.0, 1.0, 1.0).unwrap(), 0.80);
        assert!((normalize_linear(887.0, 0.0, 200.0, -1.0).unwrap() + 4.435).abs() < 1e-12);
        assert_eq!(normalize_linear(3.0, 3.0, 9.0, 1.0).unwrap(), 0.0);
        assert!((normalize_linear(12.0, 6.0, 60.0, 1.0).unwrap() - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn linear_degenerate_bounds() {
        assert!(normalize_linear(1.0, 2.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn delimited_examples() {
        assert_eq!(normalize_delimited(3.129e-5, 2.5e-5, Threshold::AtOrAbove), 1.0);
        assert_eq!(normalize_delimited(4.2, 4.2, Threshold::AtOrAbove), 1.0);
        assert_eq!(normalize_delimited(1.0e-5, 2.5e-5, Threshold::AtOrAbove), 0.0);
        assert_eq!(normalize_delimited(1.0e-5, 2.5e-5, Threshold::Below), 1.0);
    }

    #[test]
    fn binary_examples() {
        let csv = NormalizationRule::positive_labels(["CSV"]);
        assert_eq!(normalize_binary("CSV", &csv).unwrap(), 1.0);
        assert_eq!(normalize_binary("Json", &csv).unwrap(), 0.0);
        let prec = NormalizationRule::positive_labels(["3 decimal"]);
        assert_eq!(normalize_binary("3 decimal", &prec).unwrap(), 1.0);
        let graded = NormalizationRule::graded([("low", 0.0), ("mid", 0.5), ("high", 1.0)]);
        assert_eq!(normalize_binary("mid", &graded).unwrap(), 0.5);
        assert!(normalize_binary("extreme", &graded).is_err());
    }

    #[test]
    fn dispatch_examples() {
        let s = normalize(&obs("similarity", 4.0 / 5.0), &NormalizationRule::linear(0.0, 1.0, 1.0)).unwrap();
        assert!((s.value - 0.8).abs() < 1e-12);
        let t = normalize(&obs("timeliness", 1.0), &NormalizationRule::linear(0.0, 1.5, 1.0)).unwrap();
        assert!((t.value - 0.6667).abs() < 1e-4);
        assert_eq!(t.rule_applied, NormalizationRule::linear(0.0, 1.5, 1.0));
    }

    #[test]
    fn kind_mismatch() {
        let err = normalize(&obs("format", "CSV"), &NormalizationRule::linear(0.0, 1.0, 1.0)).unwrap_err();
        assert!(err.to_string().contains("kind mismatch"), "{err}");
        let err = normalize(&obs("format", 1.0), &NormalizationRule::positive_labels(["CSV"])).unwrap_err();
        assert!(err.to_string().contains("kind mismatch"), "{err}");
    }

    #[test]
    fn invalid_rules_rejected() {
        assert!(NormalizationRule::linear(0.0, 1.0, 0.5).validate().is_err());
        assert!(NormalizationRule::graded([("a", 1.5)]).validate().is_err());
        assert!(NormalizationRule::positive_labels(["a", "A"]).validate().is_err());
        let both = NormalizationRule::Binary {
            positive: vec!["a".into()],
            grades: [("b".to_string(), 1.0)].into_iter().collect(),
        };
        assert!(both.validate().is_err());
    }

    #[test]
    fn clamp_flag_bounds_output() {
        let rule = NormalizationRule::Linear { min: 0.0, max: 200.0, xi: -1.0, clamp: true };
        assert_eq!(normalize(&obs("pc", 887.0), &rule).unwrap().value, -1.0);
    }

    #[test]
    fn rule_json_shape() {
        let j = serde_json::to_string(&NormalizationRule::linear(0.0, 2.0, -1.0)).unwrap();
        assert_eq!(j, r#"{"kind":"linear","min":0.0,"max":2.0,"xi":-1.0,"clamp":false}"#);
        let back: NormalizationRule =
            serde_json::from_str(r#"{"kind":"delimited","threshold":2.5e-5,"satisfied_when":"at_or_above"}"#).unwrap();
        assert_eq!(back, NormalizationRule::delimited(2.5e-5, Threshold::AtOrAbove));
        assert!(serde_json::from_str::<NormalizationRule>(r#"{"kind":"linear","min":0,"max":1,"xi":1,"bogus":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn linear_endpoints_exact(min in -1e6f64..1e6, span in 1e-3f64..1e6, neg in any::<bool>()) {
            let max = min + span;
            let xi = if neg { -1.0 } else { 1.0 };
            prop_assert_eq!(normalize_linear(min, min, max, xi).unwrap(), 0.0 * xi);
            prop_assert_eq!(normalize_linear(max, min, max, xi).unwrap(), xi);
        }

        #[test]
        fn linear_sign_follows_xi(min in -1e3f64..1e3, span in 1e-2f64..1e3, above in 0f64..1e4, neg in any::<bool>()) {
            let xi = if neg { -1.0 } else { 1.0 };
            let v = normalize_linear(min + above, min, min + span, xi).unwrap();
            if neg { prop_assert!(v <= 0.0) } else { prop_assert!(v >= 0.0) }
        }

        #[test]
        fn delimited_in_unit_interval(raw in -1e6f64..1e6, th in -1e6f64..1e6, above in any::<bool>()) {
            let w = if above { Threshold::AtOrAbove } else { Threshold::Below };
            let v = normalize_delimited(raw, th, w);
            prop_assert!(v == 0.0 || v == 1.0);
        }

        #[test]
        fn graded_in_unit_interval(g in 0f64..=1.0, pick in any::<bool>()) {
            let rule = NormalizationRule::graded([("a", g), ("b", 1.0 - g)]);
            let v = normalize_binary(if pick { "a" } else { "b" }, &rule).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
