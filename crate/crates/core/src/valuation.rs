//! Index, relevance and utility aggregation, cost ledgers, dataset potential,
//! temporal correction and the final value `V = QRU * Σ(Val * ICF) / V_p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that weights sum to one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Driver {
    Quality,
    Relevance,
    Utility,
    CostOnly,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    #[default]
    Ratio,
    Reciprocal,
    Exponential,
}

/// How the ratio alignment treats a zero target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroTarget {
    /// `f = m_norm`.
    #[default]
    Metric,
    /// `f = |m_norm| / m_norm`, a bare sign.
    Sign,
}

/// Alignment of a normalized metric with its target.
pub fn alignment(m: f64, t: f64, variant: Alignment) -> Result<f64> {
    alignment_with(m, t, variant, ZeroTarget::Metric)
}

pub fn alignment_with(m: f64, t: f64, variant: Alignment, zero: ZeroTarget) -> Result<f64> {
    if !m.is_finite() || !t.is_finite() {
        return Err(Error::math("alignment", format!("non-finite input ({m}, {t})")));
    }
    let v = match variant {
        Alignment::Reciprocal => 1.0 / (1.0 + (m - t).abs()),
        Alignment::Exponential => (-(m - t).abs()).exp(),
        Alignment::Ratio => {
            if t > 0.0 {
                m / t
            } else if t == 0.0 {
                match zero {
                    ZeroTarget::Metric => m,
                    ZeroTarget::Sign if m != 0.0 => m.abs() / m,
                    ZeroTarget::Sign => {
                        return Err(Error::math("alignment", "sign of a zero metric is undefined"))
                    }
                }
            } else if m != 0.0 {
                t / m
            } else {
                return Err(Error::math(
                    "alignment",
                    format!("ratio undefined for a zero metric against negative target {t}"),
                ));
            }
        }
    };
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedMetric {
    pub metric_id: String,
    pub m_norm: f64,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
}

impl WeightedMetric {
    pub fn new(id: impl Into<String>, m_norm: f64, weight: f64) -> Self {
        WeightedMetric {
            metric_id: id.into(),
            m_norm,
            weight,
            target: None,
        }
    }

    pub fn with_target(mut self, t: f64) -> Self {
        self.target = Some(t);
        self
    }
}

fn check_weights(metrics: &[WeightedMetric]) -> Result<f64> {
    for (i, m) in metrics.iter().enumerate() {
        if !(m.weight >= 0.0) || !m.weight.is_finite() {
            return Err(Error::invalid(
                format!("/{i}/weight"),
                format!("weight of {} must be a nonnegative number", m.metric_id),
            ));
        }
        if !m.m_norm.is_finite() {
            return Err(Error::invalid(
                format!("/{i}/m_norm"),
                format!("normalized value of {} is not finite", m.metric_id),
            ));
        }
    }
    Ok(metrics.iter().map(|m| m.weight).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexValue {
    pub concept: String,
    pub value: f64,
    pub contributing_metric_ids: Vec<String>,
    pub weight_sum: f64,
}

impl IndexValue {
    pub fn weights_sum_to_one(&self) -> bool {
        (self.weight_sum - 1.0).abs() <= WEIGHT_SUM_TOLERANCE
    }
}

/// `I = Σ m_norm * w_m`.
pub fn aggregate_index(concept: &str, metrics: &[WeightedMetric]) -> Result<IndexValue> {
    if metrics.is_empty() {
        return Err(Error::invalid("", format!("index {concept} has no metrics")));
    }
    let weight_sum = check_weights(metrics)?;
    Ok(IndexValue {
        concept: concept.to_string(),
        value: metrics.iter().map(|m| m.m_norm * m.weight).sum(),
        contributing_metric_ids: metrics.iter().map(|m| m.metric_id.clone()).collect(),
        weight_sum,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceTerm {
    pub metric_id: String,
    pub m_norm: f64,
    pub target: f64,
    pub weight: f64,
    pub alignment: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRelevance {
    pub domain_id: String,
    pub relevance: f64,
    pub beta: f64,
    pub alignment_variant: Alignment,
    pub weight_sum: f64,
    pub terms: Vec<RelevanceTerm>,
}

impl DomainRelevance {
    pub fn recompute(&self) -> f64 {
        self.terms.iter().map(|t| t.weight * t.alignment).sum()
    }
}

/// `R_G = Σ w_m * f(m_norm, m_target)`.
pub fn relevance(
    domain_id: &str,
    beta: f64,
    metrics: &[WeightedMetric],
    variant: Alignment,
    zero: ZeroTarget,
) -> Result<DomainRelevance> {
    if metrics.is_empty() {
        return Err(Error::invalid("", format!("domain {domain_id} has no metrics")));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::invalid(
            "/beta",
            format!("beta of {domain_id} must be a nonnegative number"),
        ));
    }
    let weight_sum = check_weights(metrics)?;
    let mut terms = Vec::with_capacity(metrics.len());
    for (i, m) in metrics.iter().enumerate() {
        let target = m.target.ok_or_else(|| {
            Error::invalid(
                format!("/{i}/target"),
                format!("metric {} has no target in domain {domain_id}", m.metric_id),
            )
        })?;
        let f = alignment_with(m.m_norm, target, variant, zero)
            .map_err(|e| e.at(format!("{domain_id}/{}", m.metric_id)))?;
        terms.push(RelevanceTerm {
            metric_id: m.metric_id.clone(),
            m_norm: m.m_norm,
            target,
            weight: m.weight,
            alignment: f,
            contribution: m.weight * f,
        });
    }
    let relevance = terms.iter().map(|t| t.contribution).sum();
    Ok(DomainRelevance {
        domain_id: domain_id.to_string(),
        relevance,
        beta,
        alignment_variant: variant,
        weight_sum,
        terms,
    })
}

/// `U = Σ β_G * R_G`. The betas are not required to sum to one.
pub fn utility(domains: &[DomainRelevance]) -> Result<f64> {
    if domains.is_empty() {
        return Err(Error::invalid("/domains", "utility needs at least one domain"));
    }
    Ok(domains.iter().map(|d| d.beta * d.relevance).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    Days,
    Months,
    Years,
}

/// A length of time. Months are an average Gregorian month.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Duration {
    pub value: f64,
    pub unit: TimeUnit,
}

impl Duration {
    pub const DAYS_PER_YEAR: f64 = 365.25;
    pub const DAYS_PER_MONTH: f64 = Self::DAYS_PER_YEAR / 12.0;

    pub fn days(value: f64) -> Self {
        Duration {
            value,
            unit: TimeUnit::Days,
        }
    }

    pub fn months(value: f64) -> Self {
        Duration {
            value,
            unit: TimeUnit::Months,
        }
    }

    pub fn years(value: f64) -> Self {
        Duration {
            value,
            unit: TimeUnit::Years,
        }
    }

    pub fn in_days(&self) -> f64 {
        match self.unit {
            TimeUnit::Days => self.value,
            TimeUnit::Months => self.value * Self::DAYS_PER_MONTH,
            TimeUnit::Years => self.value * Self::DAYS_PER_YEAR,
        }
    }

    /// `self / other`, exact when both share a unit.
    pub fn ratio(&self, other: &Duration) -> f64 {
        if self.unit == other.unit {
            self.value / other.value
        } else {
            self.in_days() / other.in_days()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapexItem {
    pub label: String,
    pub purchase_cost: f64,
    pub lifespan: Duration,
    pub analysis_period: Duration,
}

impl CapexItem {
    /// Straight-line share of the purchase over the analysis period.
    pub fn prorated(&self) -> f64 {
        self.purchase_cost * self.analysis_period.ratio(&self.lifespan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpexItem {
    pub label: String,
    pub unit_cost: f64,
    pub quantity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GovernanceItem {
    pub label: String,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostLedger {
    pub currency: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub capex: Vec<CapexItem>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub opex: Vec<OpexItem>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub governance: Vec<GovernanceItem>,
}

fn nonneg(v: f64, path: String, what: &str) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(path, format!("{what} must be a nonnegative number, got {v}")))
    }
}

impl CostLedger {
    pub fn empty(currency: impl Into<String>) -> Self {
        CostLedger {
            currency: currency.into(),
            capex: Vec::new(),
            opex: Vec::new(),
            governance: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.capex.iter().enumerate() {
            nonneg(c.purchase_cost, format!("/capex/{i}/purchase_cost"), "purchase cost")?;
            if !(c.lifespan.value > 0.0) || !c.lifespan.value.is_finite() {
                return Err(Error::invalid(
                    format!("/capex/{i}/lifespan"),
                    "lifespan must be positive",
                ));
            }
            nonneg(
                c.analysis_period.value,
                format!("/capex/{i}/analysis_period"),
                "analysis period",
            )?;
        }
        for (i, o) in self.opex.iter().enumerate() {
            nonneg(o.unit_cost, format!("/opex/{i}/unit_cost"), "unit cost")?;
            nonneg(o.quantity, format!("/opex/{i}/quantity"), "quantity")?;
        }
        for (i, g) in self.governance.iter().enumerate() {
            nonneg(g.cost, format!("/governance/{i}/cost"), "governance cost")?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.capex.is_empty() && self.opex.is_empty() && self.governance.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostLine {
    pub label: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub currency: String,
    pub capex: Vec<CostLine>,
    pub opex: Vec<CostLine>,
    pub governance: Vec<CostLine>,
    pub capex_total: f64,
    pub opex_total: f64,
    pub governance_total: f64,
    pub total: f64,
}

/// Prorated CAPEX plus OPEX plus governance costs.
pub fn total_costs(ledger: &CostLedger) -> Result<CostBreakdown> {
    ledger.validate()?;
    let line = |label: &str, amount: f64| CostLine {
        label: label.to_string(),
        amount,
    };
    let capex: Vec<CostLine> = ledger
        .capex
        .iter()
        .map(|c| line(&c.label, c.prorated()))
        .collect();
    let opex: Vec<CostLine> = ledger
        .opex
        .iter()
        .map(|o| line(&o.label, o.unit_cost * o.quantity))
        .collect();
    let governance: Vec<CostLine> = ledger
        .governance
        .iter()
        .map(|g| line(&g.label, g.cost))
        .collect();
    // fold from +0.0: an empty `sum()` yields -0.0
    let sum = |v: &[CostLine]| v.iter().fold(0.0, |acc, l| acc + l.amount);
    let (capex_total, opex_total, governance_total) = (sum(&capex), sum(&opex), sum(&governance));
    Ok(CostBreakdown {
        currency: ledger.currency.clone(),
        capex,
        opex,
        governance,
        capex_total,
        opex_total,
        governance_total,
        total: capex_total + opex_total + governance_total,
    })
}

/// Concatenate component ledgers. Currencies must agree.
pub fn combine_distributed_costs(parts: &[CostLedger]) -> Result<CostLedger> {
    let first = parts
        .first()
        .ok_or_else(|| Error::invalid("", "no ledgers to combine"))?;
    let mut out = CostLedger::empty(first.currency.clone());
    for (i, p) in parts.iter().enumerate() {
        if p.currency != out.currency {
            return Err(Error::invalid(
                format!("/{i}/currency"),
                format!("currency {} does not match {}", p.currency, out.currency),
            ));
        }
        p.validate().map_err(|e| e.at(format!("/{i}")))?;
        out.capex.extend(p.capex.iter().cloned());
        out.opex.extend(p.opex.iter().cloned());
        out.governance.extend(p.governance.iter().cloned());
    }
    Ok(out)
}

/// `Σ fraction_i * index_i`. Fractions are coverage shares and need not sum to one.
pub fn combine_distributed_quality(parts: &[(f64, f64)]) -> Result<f64> {
    if parts.is_empty() {
        return Err(Error::invalid("", "no components to combine"));
    }
    for (i, &(index, frac)) in parts.iter().enumerate() {
        if !index.is_finite() {
            return Err(Error::invalid(format!("/{i}/index"), "index is not finite"));
        }
        nonneg(frac, format!("/{i}/coverage"), "coverage fraction")?;
    }
    Ok(parts.iter().map(|(i, f)| i * f).sum())
}

/// How the dataset potential `Val` is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    /// `demand * price - costs`.
    DemandPrice { demand: f64, price: f64 },
    /// Midpoint of value bounds.
    Bounds { v_max: f64, v_min: f64 },
    /// A margin on total costs.
    Margin { fraction: f64 },
    /// `Val = 1`.
    Unit,
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::DemandPrice { demand, price } => {
                nonneg(demand, "/demand".into(), "demand")?;
                if !price.is_finite() {
                    return Err(Error::invalid("/price", "price is not finite"));
                }
            }
            Potential::Bounds { v_max, v_min } => {
                if !v_max.is_finite() || !v_min.is_finite() {
                    return Err(Error::invalid("/v_max", "bounds must be finite"));
                }
                if v_max < v_min {
                    return Err(Error::invalid(
                        "/v_max",
                        format!("v_max {v_max} is below v_min {v_min}"),
                    ));
                }
            }
            Potential::Margin { fraction } => {
                if !(fraction > 0.0) || !fraction.is_finite() {
                    return Err(Error::invalid("/fraction", "margin fraction must be positive"));
                }
            }
            Potential::Unit => {}
        }
        Ok(())
    }
}

/// `Val`. `costs` is the ledger total where one exists.
pub fn dataset_potential(p: &Potential, costs: Option<f64>) -> Result<f64> {
    p.validate()?;
    let need = |mode: &str| {
        costs.ok_or_else(|| Error::invalid("/costs", format!("{mode} potential needs a cost ledger")))
    };
    Ok(match *p {
        Potential::DemandPrice { demand, price } => demand * price - need("demand_price")?,
        Potential::Bounds { v_max, v_min } => (v_max + v_min) / 2.0,
        Potential::Margin { fraction } => need("margin")? * fraction,
        Potential::Unit => 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Temporal {
    /// `V_p = 1 + t_p / t_a`.
    ProcessingRatio { t_p: Duration, t_a: Duration },
    /// `V_p = 1 + increment`, increment in [0.01, 0.05].
    Fixed { increment: f64 },
}

pub const FIXED_INCREMENT_RANGE: (f64, f64) = (0.01, 0.05);

impl Temporal {
    pub fn none() -> Self {
        Temporal::ProcessingRatio {
            t_p: Duration::days(0.0),
            t_a: Duration::days(1.0),
        }
    }
}

pub fn temporal_correction(tc: &Temporal) -> Result<f64> {
    match tc {
        Temporal::ProcessingRatio { t_p, t_a } => {
            if !(t_a.value > 0.0) || !t_a.value.is_finite() {
                return Err(Error::invalid("/t_a", "acquisition time must be positive"));
            }
            nonneg(t_p.value, "/t_p".into(), "processing time")?;
            Ok(1.0 + t_p.ratio(t_a))
        }
        Temporal::Fixed { increment } => {
            let (lo, hi) = FIXED_INCREMENT_RANGE;
            if !(lo..=hi).contains(increment) {
                return Err(Error::invalid(
                    "/increment",
                    format!("fixed increment {increment} outside [{lo}, {hi}]"),
                ));
            }
            Ok(1.0 + increment)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationComponent {
    pub component_id: String,
    pub val: f64,
    pub icf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetValue {
    pub driver: Driver,
    pub qru: f64,
    pub components: Vec<ValuationComponent>,
    pub v_p: f64,
    pub value: f64,
}

impl DatasetValue {
    pub fn recompute(&self) -> f64 {
        self.qru * self.components.iter().map(|c| c.val * c.icf).sum::<f64>() / self.v_p
    }
}

/// `V = QRU * Σ(Val * ICF) / V_p`.
pub fn dataset_value(
    driver: Driver,
    qru: f64,
    components: Vec<ValuationComponent>,
    v_p: f64,
) -> Result<DatasetValue> {
    if components.is_empty() {
        return Err(Error::invalid("/components", "no valuation components"));
    }
    if !(v_p >= 1.0) || !v_p.is_finite() {
        return Err(Error::math("temporal", format!("V_p must be at least 1, got {v_p}")));
    }
    if !qru.is_finite() {
        return Err(Error::math("driver", "driver score is not finite"));
    }
    for (i, c) in components.iter().enumerate() {
        if !(c.icf > 0.0) || !c.icf.is_finite() {
            return Err(Error::invalid(format!("/components/{i}/icf"), "ICF must be positive"));
        }
        if !c.val.is_finite() {
            return Err(Error::math("potential", format!("Val of {} is not finite", c.component_id)));
        }
    }
    let mut out = DatasetValue {
        driver,
        qru,
        components,
        v_p,
        value: 0.0,
    };
    out.value = out.recompute();
    Ok(out)
}

/// Round half to even at `decimals` places, for display only.
pub fn display_round(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale).round_ties_even() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn index_examples() {
        let third = 1.0 / 3.0;
        let vol = 12_785_568.0 / 20_000_000.0;
        let i = aggregate_index(
            "quality",
            &[
                WeightedMetric::new("accuracy", 0.8, third),
                WeightedMetric::new("volume", vol, third),
                WeightedMetric::new("completeness", 1.0, third),
            ],
        )
        .unwrap();
        assert!(close(i.value, 0.8131, 5e-4));
        assert!(i.weights_sum_to_one());

        let w = [0.2, 0.03, 0.03, 0.05, 0.2];
        let m = [1.0, 0.0, 1.0, 1.0, 0.8];
        let ms: Vec<_> = w
            .iter()
            .zip(m)
            .enumerate()
            .map(|(k, (&w, m))| WeightedMetric::new(format!("m{k}"), m, w))
            .collect();
        let i = aggregate_index("quality", &ms).unwrap();
        assert!(close(i.value, 0.44, 1e-12));
        assert!(!i.weights_sum_to_one());

        let one = aggregate_index("q", &[WeightedMetric::new("x", 0.37, 1.0)]).unwrap();
        assert_eq!(one.value, 0.37);
        assert!(aggregate_index("q", &[]).is_err());
        assert!(aggregate_index("q", &[WeightedMetric::new("x", 0.3, -1.0)]).is_err());
    }

    #[test]
    fn ratio_cases() {
        let r = |m, t| alignment(m, t, Alignment::Ratio).unwrap();
        assert!(close(r(0.8131, 1.0), 0.8131, 1e-12));
        assert!(close(r(-4.435, -2.5), 0.5637, 1e-3));
        assert_eq!(r(1.24, 0.0), 1.24);
        assert_eq!(r(-0.5, 0.0), -0.5);
        assert_eq!(r(-0.5, 2.0), -0.25);
        assert!(alignment(0.0, -1.0, Alignment::Ratio).is_err());
        let s = |m| alignment_with(m, 0.0, Alignment::Ratio, ZeroTarget::Sign);
        assert_eq!(s(-0.5).unwrap(), -1.0);
        assert_eq!(s(1.24).unwrap(), 1.0);
        assert!(s(0.0).is_err());
    }

    #[test]
    fn on_target_maxima() {
        for x in [-3.0, 0.0, 0.4, 7.5] {
            assert_eq!(alignment(x, x, Alignment::Reciprocal).unwrap(), 1.0);
            assert_eq!(alignment(x, x, Alignment::Exponential).unwrap(), 1.0);
        }
    }

    #[test]
    fn relevance_examples() {
        let q = 0.8130928;
        let pc = -(887.0 / 200.0);
        let d1 = relevance(
            "d1",
            1.0,
            &[
                WeightedMetric::new("quality", q, 0.5).with_target(1.0),
                WeightedMetric::new("processing_cost", pc, 0.5).with_target(-2.5),
            ],
            Alignment::Ratio,
            ZeroTarget::Metric,
        )
        .unwrap();
        assert!(close(d1.relevance, 0.6884, 1e-3));
        let d2 = relevance(
            "d2",
            1.0,
            &[
                WeightedMetric::new("quality", q, 0.5).with_target(0.95),
                WeightedMetric::new("processing_cost", pc, 0.5).with_target(-3.0),
            ],
            Alignment::Ratio,
            ZeroTarget::Metric,
        )
        .unwrap();
        assert!(close(d2.relevance, 0.7662, 1e-3));
        assert!(close(utility(&[d1.clone(), d2.clone()]).unwrap(), 1.455, 2e-3));
        assert_eq!(d1.recompute(), d1.relevance);

        let half = |mut d: DomainRelevance| {
            d.beta = 0.5;
            d
        };
        let u = utility(&[half(d1), half(d2)]).unwrap();
        assert!(close(u, 0.7273, 1e-4));
        assert!(utility(&[]).is_err());
    }

    #[test]
    fn relevance_requires_targets() {
        let err = relevance(
            "g",
            1.0,
            &[WeightedMetric::new("a", 0.5, 1.0)],
            Alignment::Ratio,
            ZeroTarget::Metric,
        )
        .unwrap_err();
        assert_eq!(err.path(), Some("/0/target"));
        let err = relevance(
            "g",
            1.0,
            &[WeightedMetric::new("a", 0.0, 1.0).with_target(-1.0)],
            Alignment::Ratio,
            ZeroTarget::Metric,
        )
        .unwrap_err();
        assert!(err.to_string().contains("g/a"));
    }

    #[test]
    fn on_target_relevance_is_one() {
        let ms = [
            WeightedMetric::new("a", 0.4, 0.25).with_target(0.4),
            WeightedMetric::new("b", 2.0, 0.75).with_target(2.0),
        ];
        let r = relevance("g", 1.0, &ms, Alignment::Ratio, ZeroTarget::Metric).unwrap();
        assert!(close(r.relevance, 1.0, 1e-15));
    }

    #[test]
    fn cost_examples() {
        let ledger = CostLedger {
            currency: "USD".into(),
            capex: vec![CapexItem {
                label: "sensors".into(),
                purchase_cost: 5000.0,
                lifespan: Duration::years(5.0),
                analysis_period: Duration::months(1.0),
            }],
            opex: vec![
                OpexItem {
                    label: "processing".into(),
                    unit_cost: 887.0,
                    quantity: 0.6,
                },
                OpexItem {
                    label: "other".into(),
                    unit_cost: 500.0,
                    quantity: 0.6,
                },
            ],
            governance: vec![],
        };
        let b = total_costs(&ledger).unwrap();
        assert!(close(b.capex_total, 83.33, 0.01));
        assert!(close(b.opex_total, 832.2, 1e-9));
        assert!(close(b.total, 915.53, 0.02));
        assert_eq!(total_costs(&CostLedger::empty("USD")).unwrap().total, 0.0);

        let mut bad = ledger.clone();
        bad.opex[0].unit_cost = -1.0;
        assert_eq!(total_costs(&bad).unwrap_err().path(), Some("/opex/0/unit_cost"));
        let mut bad = ledger;
        bad.capex[0].lifespan.value = 0.0;
        assert!(total_costs(&bad).is_err());
    }

    fn simple(currency: &str, gov: &[f64], opex: &[f64], price: f64) -> CostLedger {
        CostLedger {
            currency: currency.into(),
            capex: vec![CapexItem {
                label: "price".into(),
                purchase_cost: price,
                lifespan: Duration::months(12.0),
                analysis_period: Duration::months(12.0),
            }],
            opex: opex
                .iter()
                .map(|&c| OpexItem {
                    label: "opex".into(),
                    unit_cost: c,
                    quantity: 1.0,
                })
                .collect(),
            governance: gov
                .iter()
                .map(|&c| GovernanceItem {
                    label: "gov".into(),
                    cost: c,
                })
                .collect(),
        }
    }

    #[test]
    fn distributed_costs() {
        let d1 = simple("EUR", &[], &[10_000.0], 15_000.0);
        let d2 = simple("EUR", &[4_000.0], &[7_000.0, 2_000.0], 10_000.0);
        let c = combine_distributed_costs(&[d1.clone(), d2]).unwrap();
        assert!(close(total_costs(&c).unwrap().total, 48_000.0, 1e-9));
        assert_eq!(combine_distributed_costs(std::slice::from_ref(&d1)).unwrap(), d1);
        let usd = simple("USD", &[], &[], 1.0);
        assert!(combine_distributed_costs(&[d1, usd]).is_err());
    }

    #[test]
    fn distributed_quality() {
        let q = combine_distributed_quality(&[(0.44, 0.8), (0.21, 0.6)]).unwrap();
        assert!(close(q, 0.478, 2e-3));
        assert_eq!(combine_distributed_quality(&[(0.3, 1.0)]).unwrap(), 0.3);
        assert_eq!(combine_distributed_quality(&[(0.5, 0.5), (0.5, 0.5)]).unwrap(), 0.5);
        assert!(combine_distributed_quality(&[]).is_err());
        assert!(combine_distributed_quality(&[(0.5, -0.1)]).is_err());
    }

    #[test]
    fn potential_modes() {
        let m = dataset_potential(&Potential::Margin { fraction: 0.1 }, Some(915.54)).unwrap();
        assert!(close(m, 91.554, 1e-9));
        assert_eq!(display_round(m, 1), 91.6);
        let b = Potential::Bounds {
            v_max: 31_000.0,
            v_min: -25_000.0,
        };
        assert_eq!(dataset_potential(&b, None).unwrap(), 3_000.0);
        assert_eq!(dataset_potential(&Potential::Unit, None).unwrap(), 1.0);
        let dp = Potential::DemandPrice {
            demand: 10.0,
            price: 5.0,
        };
        assert_eq!(dataset_potential(&dp, Some(20.0)).unwrap(), 30.0);
        assert!(dataset_potential(&dp, None).is_err());
        assert!(dataset_potential(&Potential::Margin { fraction: 0.1 }, None).is_err());
        let inverted = Potential::Bounds {
            v_max: 1.0,
            v_min: 2.0,
        };
        assert!(dataset_potential(&inverted, None).is_err());
    }

    #[test]
    fn temporal_examples() {
        let r = Temporal::ProcessingRatio {
            t_p: Duration::days(15.0),
            t_a: Duration::days(30.0),
        };
        assert_eq!(temporal_correction(&r).unwrap(), 1.5);
        assert_eq!(temporal_correction(&Temporal::Fixed { increment: 0.05 }).unwrap(), 1.05);
        assert_eq!(temporal_correction(&Temporal::none()).unwrap(), 1.0);
        let zero = Temporal::ProcessingRatio {
            t_p: Duration::days(1.0),
            t_a: Duration::days(0.0),
        };
        assert!(temporal_correction(&zero).is_err());
        assert!(temporal_correction(&Temporal::Fixed { increment: 0.2 }).is_err());
    }

    fn one(val: f64) -> Vec<ValuationComponent> {
        vec![ValuationComponent {
            component_id: "c".into(),
            val,
            icf: 1.0,
        }]
    }

    #[test]
    fn value_examples() {
        let v = dataset_value(Driver::Utility, 1.455, one(91.5), 1.5).unwrap();
        assert!(close(v.value, 88.76, 0.1));
        let v = dataset_value(Driver::Relevance, 0.8179, one(15.0), 1.05).unwrap();
        assert!(close(v.value, 11.68, 0.01));
        let v = dataset_value(Driver::Relevance, 0.233, one(-13.0), 1.05).unwrap();
        assert!(close(v.value, -2.88, 0.01));
        let v = dataset_value(Driver::Quality, 0.42, one(1.0), 1.0).unwrap();
        assert_eq!(v.value, 0.42);
        assert!(dataset_value(Driver::Quality, 1.0, vec![], 1.0).is_err());
        assert!(dataset_value(Driver::Quality, 1.0, one(1.0), 0.9).is_err());
    }

    #[test]
    fn half_even_display() {
        assert_eq!(display_round(0.125, 2), 0.12);
        assert_eq!(display_round(0.135, 2), 0.14);
        assert_eq!(display_round(-2.5, 0), -2.0);
        assert_eq!(display_round(88.7797, 2), 88.78);
    }

    proptest! {
        #[test]
        fn index_is_linear_and_permutation_invariant(
            vals in prop::collection::vec((-5.0f64..5.0, 0.0f64..1.0), 1..8),
            alpha in -3.0f64..3.0,
        ) {
            let ms: Vec<_> = vals.iter().enumerate()
                .map(|(i, &(m, w))| WeightedMetric::new(format!("m{i}"), m, w)).collect();
            let base = aggregate_index("q", &ms).unwrap().value;
            let scaled: Vec<_> = ms.iter().map(|m| WeightedMetric { m_norm: alpha * m.m_norm, ..m.clone() }).collect();
            let s = aggregate_index("q", &scaled).unwrap().value;
            prop_assert!((s - alpha * base).abs() <= 1e-9 * (1.0 + base.abs()));
            let mut rev = ms.clone();
            rev.reverse();
            let r = aggregate_index("q", &rev).unwrap().value;
            prop_assert!((r - base).abs() <= 1e-12 * (1.0 + base.abs()));
        }

        #[test]
        fn ratio_monotone_for_positive_target(a in -5.0f64..5.0, b in -5.0f64..5.0, t in 0.01f64..5.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let f = |m| alignment(m, t, Alignment::Ratio).unwrap();
            prop_assert!(f(lo) <= f(hi));
        }

        #[test]
        fn distance_alignments_decrease(t in -5.0f64..5.0, d1 in 0.0f64..5.0, d2 in 0.0f64..5.0) {
            let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            for v in [Alignment::Reciprocal, Alignment::Exponential] {
                let f = |m| alignment(m, t, v).unwrap();
                prop_assert!(f(t + near) >= f(t + far));
                if far > near + 1e-9 {
                    prop_assert!(f(t + near) > f(t + far));
                }
            }
        }

        #[test]
        fn utility_grows_with_positive_domain(
            rs in prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), 1..5),
            beta in 0.01f64..2.0, r in 0.01f64..2.0,
        ) {
            let mk = |b: f64, rel: f64| DomainRelevance {
                domain_id: "g".into(), relevance: rel, beta: b,
                alignment_variant: Alignment::Ratio, weight_sum: 1.0, terms: vec![],
            };
            let mut ds: Vec<_> = rs.iter().map(|&(b, rel)| mk(b, rel)).collect();
            let before = utility(&ds).unwrap();
            ds.push(mk(beta, r));
            prop_assert!(utility(&ds).unwrap() > before);
        }

        #[test]
        fn value_homogeneous_and_decreasing_in_vp(
            qru in -3.0f64..3.0, val in -1e4f64..1e4, k in 0.1f64..10.0, vp in 1.0f64..3.0, dv in 0.01f64..2.0,
        ) {
            let v = dataset_value(Driver::Relevance, qru, one(val), vp).unwrap().value;
            let vq = dataset_value(Driver::Relevance, k * qru, one(val), vp).unwrap().value;
            let vv = dataset_value(Driver::Relevance, qru, one(k * val), vp).unwrap().value;
            let tol = 1e-9 * (1.0 + (k * v).abs());
            prop_assert!((vq - k * v).abs() <= tol);
            prop_assert!((vv - k * v).abs() <= tol);
            let later = dataset_value(Driver::Relevance, qru, one(val), vp + dv).unwrap().value;
            prop_assert!(later.abs() <= v.abs());
            if v > 0.0 { prop_assert!(later < v); }
        }
    }
}
