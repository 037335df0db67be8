//! Step I / Step II diagnostic questionnaires.
//!
//! Trees are plain JSON documents. Each answer may emit connector codes;
//! the codes of a finished session index the tree's recommendations, whose
//! machine-readable effects are merged into one [`Effects`] value that the
//! scenario engine can consume.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::valuation::Driver;

const STEP_ONE: &str = include_str!("../data/step1_tree.json");
const STEP_TWO: &str = include_str!("../data/step2_tree.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    StepI,
    StepII,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Answer {
    pub label: String,
    #[serde(default)]
    pub codes: Vec<u32>,
    #[serde(default)]
    pub next: Option<String>,
    /// Count carried by the answer, e.g. the number of distinct applications.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub answers: Vec<Answer>,
}

impl Question {
    pub fn answer(&self, label: &str) -> Option<&Answer> {
        let label = label.trim();
        self.answers
            .iter()
            .find(|a| a.label.eq_ignore_ascii_case(label))
    }

    pub fn labels(&self) -> Vec<&str> {
        self.answers.iter().map(|a| a.label.as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcfRule {
    OneTime,
    PerApplication,
    Fractional,
}

impl IcfRule {
    fn rank(self) -> u8 {
        match self {
            IcfRule::Fractional => 0,
            IcfRule::PerApplication => 1,
            IcfRule::OneTime => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    DaaS,
    #[serde(rename = "IaaS_AaaS")]
    IaasAaas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataPurpose {
    Operational,
    OneTimeDecision,
    LegalAndSafety,
    ResearchAndInnovation,
}

/// Structured mirror of a recommendation's prose.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Effects {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub main_driver: Option<Driver>,
    pub cost_only: bool,
    pub include_capex: bool,
    pub include_opex: bool,
    pub include_governance_costs: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub icf_rule: Option<IcfRule>,
    /// ICF implied by a per-application rule, from the answer that carried it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub icf_count: Option<u32>,
    pub demand_required: bool,
    pub demand_zero: bool,
    pub distributed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purpose: Option<DataPurpose>,
    pub recommended_metric_ids: Vec<String>,
}

fn driver_rank(d: Driver) -> u8 {
    match d {
        Driver::CostOnly => 0,
        Driver::Quality => 1,
        Driver::Relevance => 2,
        Driver::Utility => 3,
    }
}

impl Effects {
    /// The ICF screening implies, if it fixes one. A fractional rule leaves
    /// the value below 1 to the analyst.
    pub fn suggested_icf(&self) -> Option<f64> {
        match self.icf_rule? {
            IcfRule::OneTime => Some(1.0),
            IcfRule::PerApplication => self.icf_count.map(f64::from),
            IcfRule::Fractional => None,
        }
    }

    /// The driver a valuation should use. Cost-only screening wins over any
    /// index driver.
    pub fn driver(&self) -> Option<Driver> {
        if self.cost_only {
            Some(Driver::CostOnly)
        } else {
            self.main_driver
        }
    }

    /// Merge effects in order. Returns the merged value and a note for each
    /// conflict that had to be resolved.
    pub fn merge<'a>(parts: impl IntoIterator<Item = &'a Effects>) -> (Effects, Vec<String>) {
        let mut out = Effects::default();
        let mut notes = Vec::new();
        for e in parts {
            if let Some(d) = e.main_driver {
                out.main_driver = match out.main_driver {
                    Some(cur) if driver_rank(cur) >= driver_rank(d) => Some(cur),
                    _ => Some(d),
                };
            }
            out.cost_only |= e.cost_only;
            out.include_capex |= e.include_capex;
            out.include_opex |= e.include_opex;
            out.include_governance_costs |= e.include_governance_costs;
            out.demand_required |= e.demand_required;
            out.demand_zero |= e.demand_zero;
            out.distributed |= e.distributed;
            if let Some(r) = e.icf_rule {
                match out.icf_rule {
                    Some(cur) if cur != r => {
                        let keep = if cur.rank() >= r.rank() { cur } else { r };
                        notes.push(format!(
                            "ICF rules {cur:?} and {r:?} both recommended; using {keep:?}"
                        ));
                        out.icf_rule = Some(keep);
                    }
                    _ => out.icf_rule = Some(r),
                }
            }
            if e.icf_count.is_some() {
                out.icf_count = e.icf_count.max(out.icf_count);
            }
            if let Some(s) = e.strategy {
                match out.strategy {
                    Some(cur) if cur != s => {
                        notes.push(
                            "both DaaS and IaaS/AaaS strategies recommended; using IaaS/AaaS because it requires demand"
                                .to_string(),
                        );
                        out.strategy = Some(Strategy::IaasAaas);
                    }
                    _ => out.strategy = Some(s),
                }
            }
            if out.purpose.is_none() {
                out.purpose = e.purpose;
            }
            for m in &e.recommended_metric_ids {
                if !out.recommended_metric_ids.contains(m) {
                    out.recommended_metric_ids.push(m.clone());
                }
            }
        }
        if out.cost_only && out.main_driver.is_some() {
            notes.push("cost-only valuation recommended; index driver is ignored".into());
        }
        if out.demand_required && out.demand_zero {
            notes.push("demand is both required and recommended to be zero".into());
        }
        if out.icf_rule != Some(IcfRule::PerApplication) {
            out.icf_count = None;
        }
        (out, notes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendationSpec {
    pub text: String,
    #[serde(default)]
    pub effects: Effects,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub code: u32,
    pub text: String,
    pub effects: Effects,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionTree {
    pub id: String,
    pub stage: Stage,
    pub entry_question_id: String,
    pub questions: Vec<Question>,
    pub code_recommendations: BTreeMap<u32, RecommendationSpec>,
}

impl DecisionTree {
    pub fn from_json(s: &str) -> Result<Self> {
        let tree: DecisionTree = serde_json::from_str(s)?;
        tree.validate()?;
        Ok(tree)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    /// The shipped Step I tree.
    pub fn step_one() -> Self {
        Self::from_json(STEP_ONE).expect("shipped step I tree is valid")
    }

    /// The shipped Step II tree.
    pub fn step_two() -> Self {
        Self::from_json(STEP_TWO).expect("shipped step II tree is valid")
    }

    /// Look up a shipped tree by id.
    pub fn builtin(id: &str) -> Option<Self> {
        [Self::step_one(), Self::step_two()]
            .into_iter()
            .find(|t| t.id == id)
    }

    pub fn question(&self, id: &str) -> Option<&Question> {
        self.questions.iter().find(|q| q.id == id)
    }

    fn question_index(&self) -> HashMap<&str, usize> {
        self.questions
            .iter()
            .enumerate()
            .map(|(i, q)| (q.id.as_str(), i))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let index = self.question_index();
        if index.len() != self.questions.len() {
            return Err(Error::invalid("/questions", "duplicate question id"));
        }
        if !index.contains_key(self.entry_question_id.as_str()) {
            return Err(Error::invalid(
                "/entry_question_id",
                format!("unknown question {:?}", self.entry_question_id),
            ));
        }
        for (qi, q) in self.questions.iter().enumerate() {
            if q.answers.is_empty() {
                return Err(Error::invalid(
                    format!("/questions/{qi}/answers"),
                    "question has no answers",
                ));
            }
            let mut labels = HashSet::new();
            for (ai, a) in q.answers.iter().enumerate() {
                let at = format!("/questions/{qi}/answers/{ai}");
                if !labels.insert(a.label.to_ascii_lowercase()) {
                    return Err(Error::invalid(
                        at,
                        format!("duplicate answer label {:?}", a.label),
                    ));
                }
                if let Some(next) = &a.next {
                    if !index.contains_key(next.as_str()) {
                        return Err(Error::invalid(
                            format!("{at}/next"),
                            format!("unknown question {next:?}"),
                        ));
                    }
                }
                if let Some(c) = a
                    .codes
                    .iter()
                    .find(|c| !self.code_recommendations.contains_key(c))
                {
                    return Err(Error::invalid(
                        format!("{at}/codes"),
                        format!("code {c} has no recommendation"),
                    ));
                }
            }
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.questions.len()];
        fn visit(
            tree: &DecisionTree,
            index: &HashMap<&str, usize>,
            state: &mut [u8],
            i: usize,
        ) -> Result<()> {
            state[i] = 1;
            for a in &tree.questions[i].answers {
                if let Some(next) = &a.next {
                    let j = index[next.as_str()];
                    match state[j] {
                        1 => {
                            return Err(Error::invalid(
                                format!("/questions/{i}"),
                                format!("routing cycle through {next:?}"),
                            ))
                        }
                        0 => visit(tree, index, state, j)?,
                        _ => {}
                    }
                }
            }
            state[i] = 2;
            Ok(())
        }
        for i in 0..self.questions.len() {
            if state[i] == 0 {
                visit(self, &index, &mut state, i)?;
            }
        }
        Ok(())
    }

    pub fn recommendation(&self, code: u32) -> Option<Recommendation> {
        self.code_recommendations
            .get(&code)
            .map(|spec| Recommendation {
                code,
                text: spec.text.clone(),
                effects: spec.effects.clone(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    InProgress,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsweredQuestion {
    pub question_id: String,
    pub answer_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningSession {
    pub tree_id: String,
    pub answered: Vec<AnsweredQuestion>,
    pub accumulated_codes: BTreeSet<u32>,
    pub current_question_id: Option<String>,
    pub status: SessionStatus,
}

/// Recommendations of a finished session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningOutcome {
    pub tree_id: String,
    pub codes: Vec<u32>,
    pub recommendations: Vec<Recommendation>,
    pub effects: Effects,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurposeClassification {
    pub purpose: DataPurpose,
    /// Every purpose affirmed, in code order. `purpose` is the first.
    pub purposes: Vec<DataPurpose>,
    pub outcome: ScreeningOutcome,
}

pub fn start_session(tree: &DecisionTree) -> Result<ScreeningSession> {
    tree.validate()?;
    Ok(ScreeningSession {
        tree_id: tree.id.clone(),
        answered: Vec::new(),
        accumulated_codes: BTreeSet::new(),
        current_question_id: Some(tree.entry_question_id.clone()),
        status: SessionStatus::InProgress,
    })
}

impl ScreeningSession {
    pub fn current_question<'t>(&self, tree: &'t DecisionTree) -> Option<&'t Question> {
        self.current_question_id
            .as_deref()
            .and_then(|id| tree.question(id))
    }

    pub fn is_complete(&self) -> bool {
        self.status == SessionStatus::Complete
    }

    /// Answer the current question, returning the advanced session.
    pub fn answer(
        &self,
        tree: &DecisionTree,
        question_id: &str,
        answer_label: &str,
    ) -> Result<ScreeningSession> {
        if tree.id != self.tree_id {
            return Err(Error::invalid(
                "/tree",
                format!("session belongs to tree {:?}", self.tree_id),
            ));
        }
        let Some(current) = self.current_question_id.as_deref() else {
            return Err(Error::OutOfOrder(format!(
                "session is complete; {question_id:?} cannot be answered"
            )));
        };
        if current != question_id {
            return Err(Error::OutOfOrder(format!(
                "expected an answer to {current:?}, got {question_id:?}"
            )));
        }
        let question = tree
            .question(current)
            .ok_or_else(|| Error::not_found("question", current))?;
        let answer = question.answer(answer_label).ok_or_else(|| {
            Error::invalid(
                "/answer_label",
                format!(
                    "{answer_label:?} is not an answer to {current:?}; expected one of {:?}",
                    question.labels()
                ),
            )
        })?;
        let mut next = self.clone();
        next.answered.push(AnsweredQuestion {
            question_id: question_id.to_string(),
            answer_label: answer.label.clone(),
        });
        next.accumulated_codes.extend(answer.codes.iter().copied());
        next.current_question_id = answer.next.clone();
        if next.current_question_id.is_none() {
            next.status = SessionStatus::Complete;
        }
        Ok(next)
    }

    /// Merged recommendations of a complete session.
    pub fn recommendations(&self, tree: &DecisionTree) -> Result<ScreeningOutcome> {
        if !self.is_complete() {
            return Err(Error::Incomplete);
        }
        let mut notes = Vec::new();
        let mut count = None;
        for a in &self.answered {
            let ans = tree
                .question(&a.question_id)
                .and_then(|q| q.answer(&a.answer_label))
                .ok_or_else(|| Error::not_found("answer", &a.answer_label))?;
            if let Some(n) = &ans.note {
                notes.push(format!("{}: {n}", a.question_id));
            }
            if ans.value.is_some() && !ans.codes.is_empty() {
                count = ans.value.max(count);
            }
        }
        let mut recommendations = Vec::new();
        for &code in &self.accumulated_codes {
            let mut rec = tree
                .recommendation(code)
                .ok_or_else(|| Error::not_found("recommendation", code.to_string()))?;
            if rec.effects.icf_rule == Some(IcfRule::PerApplication) {
                rec.effects.icf_count = count;
            }
            recommendations.push(rec);
        }
        let (effects, conflicts) = Effects::merge(recommendations.iter().map(|r| &r.effects));
        notes.extend(conflicts);
        Ok(ScreeningOutcome {
            tree_id: tree.id.clone(),
            codes: self.accumulated_codes.iter().copied().collect(),
            recommendations,
            effects,
            notes,
        })
    }

    /// Data purpose of a complete Step II session.
    pub fn classify_purpose(&self, tree: &DecisionTree) -> Result<PurposeClassification> {
        if tree.stage != Stage::StepII {
            return Err(Error::invalid("/stage", "purpose needs a Step II tree"));
        }
        let outcome = self.recommendations(tree)?;
        let purposes: Vec<DataPurpose> = outcome
            .recommendations
            .iter()
            .filter_map(|r| r.effects.purpose)
            .collect();
        let purpose = *purposes
            .first()
            .ok_or_else(|| Error::invalid("/answered", "no data purpose was affirmed"))?;
        Ok(PurposeClassification {
            purpose,
            purposes,
            outcome,
        })
    }
}

/// Run a whole answer log against a tree.
pub fn replay<'a>(
    tree: &DecisionTree,
    answers: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Result<ScreeningSession> {
    let mut session = start_session(tree)?;
    for (i, (q, a)) in answers.into_iter().enumerate() {
        session = session.answer(tree, q, a).map_err(|e| e.at(format!("/{i}")))?;
    }
    Ok(session)
}

/// Answer log file: `{"tree": "...", "answers": [{"question_id", "answer_label"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerLog {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<String>,
    pub answers: Vec<AnsweredQuestion>,
}

impl AnswerLog {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn replay(&self, tree: &DecisionTree) -> Result<ScreeningSession> {
        replay(
            tree,
            self.answers
                .iter()
                .map(|a| (a.question_id.as_str(), a.answer_label.as_str())),
        )
        .map_err(|e| e.at("/answers"))
    }
}
