//! Derivation checking for the propositional calculus with the ball operator
//! and for its modal extension.
//!
//! A derivation is a list of judgments `Γ ⊢ φ`, each justified by a rule and
//! by citations of earlier steps. Checking is purely syntactic, except for
//! the classical rule: it accepts any tautological consequence of the cited
//! conclusions, where subformulas headed by `@`, `[]`, `<>`, `[=]` or `[-]`
//! are treated as opaque atoms and decided by a two-valued truth table.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::Ultrafilter;
use crate::kripke::{countermodel_search, KripkeError, Limits, SearchOutcome};
use crate::prop4::RULES;
use crate::syntax::{parse, Formula, ParseError};

/// Truth tables beyond this many opaque atoms are refused.
const MAX_TAUT_ATOMS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Premise,
    TautCons,
    Weaken,
    DB,
    BR,
    BF,
    AwB,
    NwB,
    NB,
    TNB1,
    TNB2,
    BC,
    OV,
    IB,
    KA,
    BB,
    FC,
    EA,
    IN,
}

impl Rule {
    pub const ALL: [Self; 19] = [
        Self::Premise,
        Self::TautCons,
        Self::Weaken,
        Self::DB,
        Self::BR,
        Self::BF,
        Self::AwB,
        Self::NwB,
        Self::NB,
        Self::TNB1,
        Self::TNB2,
        Self::BC,
        Self::OV,
        Self::IB,
        Self::KA,
        Self::BB,
        Self::FC,
        Self::EA,
        Self::IN,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Premise => "Premise",
            Self::TautCons => "TautCons",
            Self::Weaken => "Weaken",
            Self::DB => "DB",
            Self::BR => "BR",
            Self::BF => "BF",
            Self::AwB => "AwB",
            Self::NwB => "NwB",
            Self::NB => "NB",
            Self::TNB1 => "TNB1",
            Self::TNB2 => "TNB2",
            Self::BC => "BC",
            Self::OV => "OV",
            Self::IB => "IB",
            Self::KA => "KA",
            Self::BB => "BB",
            Self::FC => "FC",
            Self::EA => "EA",
            Self::IN => "IN",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule tag `{0}`")]
pub struct UnknownRule(String);

impl FromStr for Rule {
    type Err = UnknownRule;

    /// Tags are matched case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|r| r.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Judgment {
    pub premises: BTreeSet<Formula>,
    pub conclusion: Formula,
}

impl Judgment {
    pub fn new(premises: impl IntoIterator<Item = Formula>, conclusion: Formula) -> Self {
        Self {
            premises: premises.into_iter().collect(),
            conclusion,
        }
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let premises: Vec<String> = self.premises.iter().map(|p| p.to_string()).collect();
        if premises.is_empty() {
            write!(f, "|- {}", self.conclusion)
        } else {
            write!(f, "{} |- {}", premises.join(", "), self.conclusion)
        }
    }
}

/// The split declared by an application of necessity introduction: the
/// step's premises are `lambda ∪ □gamma` and it concludes `□phi`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NecessityParams {
    pub lambda: Vec<Formula>,
    pub gamma: Vec<Formula>,
    pub phi: Option<Formula>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationStep {
    pub judgment: Judgment,
    pub rule: Rule,
    /// Zero-based indices of cited steps.
    pub inputs: Vec<usize>,
    pub params: Option<NecessityParams>,
}

impl DerivationStep {
    pub fn new(judgment: Judgment, rule: Rule, inputs: Vec<usize>) -> Self {
        Self {
            judgment,
            rule,
            inputs,
            params: None,
        }
    }

    pub fn with_params(mut self, params: NecessityParams) -> Self {
        self.params = Some(params);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Derivation {
    pub steps: Vec<DerivationStep>,
}

/// A failed step. `step` is zero-based; display is one-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {} ({rule}): {reason}", step + 1)]
pub struct Violation {
    pub step: usize,
    pub rule: Rule,
    pub reason: String,
}

/// Schematic pattern with metavariables `phi` (0) and `psi` (1).
#[derive(Debug, Clone, PartialEq, Eq)]
enum Pattern {
    Meta(usize),
    Exact(Formula),
    Not(Box<Pattern>),
    And(Box<Pattern>, Box<Pattern>),
    Or(Box<Pattern>, Box<Pattern>),
    Ball(Box<Pattern>),
    Box(Box<Pattern>),
    Diamond(Box<Pattern>),
}

impl Pattern {
    fn compile(f: &Formula) -> Self {
        let sub = |g: &Formula| Box::new(Self::compile(g));
        match f {
            Formula::Var(name) if name == "phi" => Self::Meta(0),
            Formula::Var(name) if name == "psi" => Self::Meta(1),
            Formula::Not(g) => Self::Not(sub(g)),
            Formula::And(g, h) => Self::And(sub(g), sub(h)),
            Formula::Or(g, h) => Self::Or(sub(g), sub(h)),
            Formula::Ball(g) => Self::Ball(sub(g)),
            Formula::Box(g) => Self::Box(sub(g)),
            Formula::Diamond(g) => Self::Diamond(sub(g)),
            other => Self::Exact(other.clone()),
        }
    }

    fn matches(&self, f: &Formula, binding: &mut [Option<Formula>; 2]) -> bool {
        match (self, f) {
            (Self::Meta(i), _) => match &binding[*i] {
                Some(bound) => bound == f,
                None => {
                    binding[*i] = Some(f.clone());
                    true
                }
            },
            (Self::Exact(g), _) => g == f,
            (Self::Not(p), Formula::Not(g))
            | (Self::Ball(p), Formula::Ball(g))
            | (Self::Box(p), Formula::Box(g))
            | (Self::Diamond(p), Formula::Diamond(g)) => p.matches(g, binding),
            (Self::And(p, q), Formula::And(g, h)) | (Self::Or(p, q), Formula::Or(g, h)) => {
                p.matches(g, binding) && q.matches(h, binding)
            }
            _ => false,
        }
    }
}

struct Schema {
    premises: Vec<(Pattern, String)>,
    conclusion: (Pattern, String),
}

impl Schema {
    fn from_text(premises: &[&str], conclusion: &str) -> Self {
        let compile = |s: &str| {
            let f = parse(s).expect("bundled schema parses");
            (Pattern::compile(&f), f.to_string())
        };
        Self {
            premises: premises.iter().map(|p| compile(p)).collect(),
            conclusion: compile(conclusion),
        }
    }
}

const MODAL_SCHEMAS: &[(&str, &[&str], &str)] = &[
    ("KA", &[], "[](phi -> psi) -> ([]phi -> []psi)"),
    ("BB", &["[]phi", "@[]phi"], "[]@phi"),
    ("FC", &["<>phi", "<>~phi"], "@[]phi"),
    ("EA", &["~@[]phi"], "<>(phi & ~@phi) ^ <>(~phi & ~@phi)"),
];

fn schemas(rule: Rule) -> Vec<Schema> {
    let tag = rule.tag();
    if let Some(named) = RULES.iter().find(|r| r.name == tag) {
        return named
            .schemes
            .iter()
            .map(|s| Schema::from_text(s.premises, s.conclusion))
            .collect();
    }
    MODAL_SCHEMAS
        .iter()
        .filter(|(name, _, _)| *name == tag)
        .map(|(_, premises, conclusion)| Schema::from_text(premises, conclusion))
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out.sort();
    out
}

impl Derivation {
    pub fn new(steps: Vec<DerivationStep>) -> Self {
        Self { steps }
    }

    /// Checks step `i` against the steps before it.
    pub fn check_step(&self, i: usize) -> Result<(), Violation> {
        let step = &self.steps[i];
        let fail = |reason: String| Violation {
            step: i,
            rule: step.rule,
            reason,
        };
        for &k in &step.inputs {
            if k >= i {
                return Err(fail(format!(
                    "cites step {}, which is not an earlier step",
                    k + 1
                )));
            }
        }
        let cited: Vec<&DerivationStep> = step.inputs.iter().map(|&k| &self.steps[k]).collect();
        let premises = &step.judgment.premises;
        let conclusion = &step.judgment.conclusion;
        let require_inputs = |n: usize| -> Result<(), Violation> {
            if cited.len() == n {
                Ok(())
            } else {
                Err(fail(format!(
                    "{} expects {n} cited step(s), got {}",
                    step.rule,
                    cited.len()
                )))
            }
        };
        let require_subsets = || -> Result<(), Violation> {
            for (&k, c) in step.inputs.iter().zip(&cited) {
                if !c.judgment.premises.is_subset(premises) {
                    return Err(fail(format!(
                        "premises of cited step {} are not contained in this step's premises",
                        k + 1
                    )));
                }
            }
            Ok(())
        };

        match step.rule {
            Rule::Premise => {
                require_inputs(0)?;
                if !premises.contains(conclusion) {
                    return Err(fail(format!("`{conclusion}` is not among the premises")));
                }
            }
            Rule::Weaken => {
                require_inputs(1)?;
                require_subsets()?;
                if &cited[0].judgment.conclusion != conclusion {
                    return Err(fail(format!(
                        "conclusion differs from cited step {}",
                        step.inputs[0] + 1
                    )));
                }
            }
            Rule::TautCons => {
                require_subsets()?;
                let assumptions: Vec<&Formula> =
                    cited.iter().map(|c| &c.judgment.conclusion).collect();
                tautological_consequence(&assumptions, conclusion).map_err(fail)?;
            }
            Rule::IB => {
                require_inputs(1)?;
                if !cited[0].judgment.premises.is_empty() {
                    return Err(fail(format!(
                        "cited step {} is not a theorem (it has premises)",
                        step.inputs[0] + 1
                    )));
                }
                if !premises.is_empty() {
                    return Err(fail(
                        "IB concludes a theorem; premises must be empty".into(),
                    ));
                }
                let expected = Formula::ball(cited[0].judgment.conclusion.clone());
                if conclusion != &expected {
                    return Err(fail(format!("expected conclusion `{expected}`")));
                }
            }
            Rule::IN => self.check_necessity(i, &cited).map_err(fail)?,
            Rule::DB
            | Rule::KA
            | Rule::BR
            | Rule::BF
            | Rule::AwB
            | Rule::NwB
            | Rule::NB
            | Rule::TNB1
            | Rule::TNB2
            | Rule::BC
            | Rule::OV
            | Rule::BB
            | Rule::FC
            | Rule::EA => {
                let schemas = schemas(step.rule);
                let arity = schemas[0].premises.len();
                require_inputs(arity)?;
                require_subsets()?;
                let cited_conclusions: Vec<&Formula> =
                    cited.iter().map(|c| &c.judgment.conclusion).collect();
                match_schemas(
                    step.rule,
                    &schemas,
                    &cited_conclusions,
                    conclusion,
                    &step.inputs,
                )
                .map_err(fail)?;
            }
        }
        Ok(())
    }

    fn check_necessity(&self, i: usize, cited: &[&DerivationStep]) -> Result<(), String> {
        let step = &self.steps[i];
        let params = step
            .params
            .as_ref()
            .ok_or("IN needs declared lambda/gamma parameters")?;
        let phi = match (&step.judgment.conclusion, &params.phi) {
            (Formula::Box(inner), Some(phi)) if inner.as_ref() == phi => phi.clone(),
            (Formula::Box(_), Some(phi)) => {
                return Err(format!(
                    "conclusion is not `{}`",
                    Formula::boxed(phi.clone())
                ))
            }
            (Formula::Box(inner), None) => inner.as_ref().clone(),
            (other, _) => return Err(format!("IN concludes a `[]` formula, not `{other}`")),
        };
        let lambda: BTreeSet<Formula> = params.lambda.iter().cloned().collect();
        let gamma: BTreeSet<Formula> = params.gamma.iter().cloned().collect();
        let expected_premises: BTreeSet<Formula> = lambda
            .iter()
            .cloned()
            .chain(gamma.iter().map(|g| Formula::boxed(g.clone())))
            .collect();
        if step.judgment.premises != expected_premises {
            return Err("premises must be exactly lambda ∪ []gamma".into());
        }
        if cited.len() != 2 {
            return Err(format!("IN expects 2 cited steps, got {}", cited.len()));
        }
        let strong = Judgment {
            premises: lambda
                .iter()
                .chain(&gamma)
                .cloned()
                .chain(gamma.iter().map(|g| Formula::ball(g.clone())))
                .collect(),
            conclusion: Formula::and(phi.clone(), Formula::ball(phi.clone())),
        };
        let weak = Judgment {
            premises: lambda.iter().chain(&gamma).cloned().collect(),
            conclusion: phi,
        };
        if cited[0].judgment != strong {
            return Err(format!(
                "first cited step {} must be `{strong}`",
                step.inputs[0] + 1
            ));
        }
        if cited[1].judgment != weak {
            return Err(format!(
                "second cited step {} must be `{weak}`",
                step.inputs[1] + 1
            ));
        }
        Ok(())
    }

    /// Checks every step; on success returns the final judgment.
    pub fn check(&self) -> Result<&Judgment, Violation> {
        for i in 0..self.steps.len() {
            self.check_step(i)?;
        }
        self.steps
            .last()
            .map(|s| &s.judgment)
            .ok_or_else(|| Violation {
                step: 0,
                rule: Rule::Premise,
                reason: "empty derivation".into(),
            })
    }

    pub fn final_judgment(&self) -> Option<&Judgment> {
        self.steps.last().map(|s| &s.judgment)
    }
}

fn match_schemas(
    rule: Rule,
    schemas: &[Schema],
    cited: &[&Formula],
    conclusion: &Formula,
    inputs: &[usize],
) -> Result<(), String> {
    for schema in schemas {
        for order in permutations(cited.len()) {
            let mut binding = [None, None];
            let premises_ok = schema
                .premises
                .iter()
                .zip(&order)
                .all(|((pat, _), &k)| pat.matches(cited[k], &mut binding));
            if premises_ok && schema.conclusion.0.matches(conclusion, &mut binding) {
                return Ok(());
            }
        }
    }
    // Describe the failure against the first schema in citation order.
    let schema = &schemas[0];
    let mut binding = [None, None];
    for (((pat, shown), f), &k) in schema.premises.iter().zip(cited).zip(inputs) {
        if !pat.matches(f, &mut binding) {
            return Err(format!(
                "cited step {} concludes `{f}`, which does not fit the {rule} premise shape `{shown}`",
                k + 1
            ));
        }
    }
    let shapes: Vec<&str> = schemas.iter().map(|s| s.conclusion.1.as_str()).collect();
    Err(format!(
        "conclusion `{conclusion}` does not fit the {rule} conclusion shape `{}`",
        shapes.join("` or `")
    ))
}

/// Decides whether `goal` follows classically from `assumptions`, treating
/// variables and modal- or ball-headed subformulas as opaque atoms.
pub fn tautological_consequence(assumptions: &[&Formula], goal: &Formula) -> Result<(), String> {
    let mut atoms: HashMap<&Formula, usize> = HashMap::new();
    for f in assumptions.iter().copied().chain(std::iter::once(goal)) {
        collect_atoms(f, &mut atoms);
    }
    if atoms.len() > MAX_TAUT_ATOMS {
        return Err(format!(
            "{} opaque atoms exceed the truth-table limit of {MAX_TAUT_ATOMS}",
            atoms.len()
        ));
    }
    for row in 0u32..(1 << atoms.len()) {
        let holds = |f: &Formula| truth(f, &atoms, row);
        if assumptions.iter().all(|a| holds(a)) && !holds(goal) {
            return Err(format!(
                "`{goal}` is not a tautological consequence of the cited conclusions"
            ));
        }
    }
    Ok(())
}

fn collect_atoms<'a>(f: &'a Formula, atoms: &mut HashMap<&'a Formula, usize>) {
    match f {
        Formula::Top | Formula::Bot => {}
        Formula::Not(g) => collect_atoms(g, atoms),
        Formula::And(g, h) | Formula::Or(g, h) => {
            collect_atoms(g, atoms);
            collect_atoms(h, atoms);
        }
        _ => {
            let next = atoms.len();
            atoms.entry(f).or_insert(next);
        }
    }
}

fn truth(f: &Formula, atoms: &HashMap<&Formula, usize>, row: u32) -> bool {
    match f {
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Not(g) => !truth(g, atoms, row),
        Formula::And(g, h) => truth(g, atoms, row) && truth(h, atoms, row),
        Formula::Or(g, h) => truth(g, atoms, row) || truth(h, atoms, row),
        _ => row >> atoms[f] & 1 == 1,
    }
}

#[derive(Debug, Error)]
pub enum ProofError {
    #[error("invalid proof document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("step {step}, {field}: {source}")]
    Formula {
        step: usize,
        field: &'static str,
        source: ParseError,
    },
    #[error("step {step}: {source}")]
    Rule { step: usize, source: UnknownRule },
    #[error("step {step}: citation {cite} is out of range (steps are numbered from 1)")]
    Citation { step: usize, cite: usize },
    #[error("derivation rejected: {0}")]
    Rejected(#[from] Violation),
    #[error(transparent)]
    Search(#[from] KripkeError),
}

/// On-disk proof format. Citations are one-based step numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofDocument {
    pub steps: Vec<StepDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDocument {
    #[serde(default)]
    pub premises: Vec<String>,
    pub conclusion: String,
    pub rule: String,
    #[serde(default)]
    pub cites: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDocument {
    #[serde(default)]
    pub lambda: Vec<String>,
    #[serde(default)]
    pub gamma: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
}

impl ProofDocument {
    pub fn from_json(text: &str) -> Result<Self, ProofError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("proof documents serialize")
    }

    pub fn to_derivation(&self) -> Result<Derivation, ProofError> {
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, doc) in self.steps.iter().enumerate() {
            let number = i + 1;
            let formula = |field: &'static str, text: &str| {
                parse(text).map_err(|source| ProofError::Formula {
                    step: number,
                    field,
                    source,
                })
            };
            let premises = doc
                .premises
                .iter()
                .map(|p| formula("premises", p))
                .collect::<Result<Vec<_>, _>>()?;
            let conclusion = formula("conclusion", &doc.conclusion)?;
            let rule = doc.rule.parse().map_err(|source| ProofError::Rule {
                step: number,
                source,
            })?;
            let inputs = doc
                .cites
                .iter()
                .map(|&c| {
                    if c == 0 || c > self.steps.len() {
                        Err(ProofError::Citation {
                            step: number,
                            cite: c,
                        })
                    } else {
                        Ok(c - 1)
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let params = match &doc.params {
                None => None,
                Some(p) => Some(NecessityParams {
                    lambda: p
                        .lambda
                        .iter()
                        .map(|s| formula("params.lambda", s))
                        .collect::<Result<_, _>>()?,
                    gamma: p
                        .gamma
                        .iter()
                        .map(|s| formula("params.gamma", s))
                        .collect::<Result<_, _>>()?,
                    phi: p
                        .phi
                        .as_deref()
                        .map(|s| formula("params.phi", s))
                        .transpose()?,
                }),
            };
            steps.push(DerivationStep {
                judgment: Judgment::new(premises, conclusion),
                rule,
                inputs,
                params,
            });
        }
        Ok(Derivation::new(steps))
    }
}

impl Derivation {
    pub fn to_document(&self) -> ProofDocument {
        let strings = |fs: &mut dyn Iterator<Item = &Formula>| fs.map(|f| f.to_string()).collect();
        ProofDocument {
            steps: self
                .steps
                .iter()
                .map(|s| StepDocument {
                    premises: strings(&mut s.judgment.premises.iter()),
                    conclusion: s.judgment.conclusion.to_string(),
                    rule: s.rule.tag().to_string(),
                    cites: s.inputs.iter().map(|k| k + 1).collect(),
                    params: s.params.as_ref().map(|p| ParamsDocument {
                        lambda: strings(&mut p.lambda.iter()),
                        gamma: strings(&mut p.gamma.iter()),
                        phi: p.phi.as_ref().map(|f| f.to_string()),
                    }),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ProofError> {
        ProofDocument::from_json(text)?.to_derivation()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrosscheckReport {
    pub judgment: Judgment,
    pub max_worlds: usize,
    pub outcome: SearchOutcome,
}

impl CrosscheckReport {
    /// True when no countermodel exists within the bound.
    pub fn sound(&self) -> bool {
        matches!(self.outcome, SearchOutcome::NoneUpToBound { .. })
    }
}

/// Searches for a model of the premises that refutes the conclusion.
pub fn crosscheck_judgment(
    judgment: &Judgment,
    max_worlds: usize,
    limits: &Limits,
) -> Result<CrosscheckReport, KripkeError> {
    let premises: Vec<Formula> = judgment.premises.iter().cloned().collect();
    let outcome = countermodel_search(
        &premises,
        &judgment.conclusion,
        max_worlds,
        &Ultrafilter::ALL,
        limits,
    )?;
    Ok(CrosscheckReport {
        judgment: judgment.clone(),
        max_worlds,
        outcome,
    })
}

/// Checks the derivation, then searches for a countermodel to its final
/// judgment under every ultrafilter. A countermodel is a soundness alarm.
pub fn semantic_crosscheck(
    d: &Derivation,
    max_worlds: usize,
    limits: &Limits,
) -> Result<CrosscheckReport, ProofError> {
    let judgment = d.check()?;
    Ok(crosscheck_judgment(judgment, max_worlds, limits)?)
}

/// Derivations shipped with the crate, as `(name, proof file text)`.
pub const BUNDLED_PROOFS: &[(&str, &str)] = &[
    ("double_ball", include_str!("../corpus/double_ball.json")),
    ("ball_rule", include_str!("../corpus/ball_rule.json")),
    ("factor_and", include_str!("../corpus/factor_and.json")),
    ("factor_or", include_str!("../corpus/factor_or.json")),
    ("affirming", include_str!("../corpus/affirming.json")),
    ("negating", include_str!("../corpus/negating.json")),
    ("two_not_ball", include_str!("../corpus/two_not_ball.json")),
    (
        "ball_conjunction",
        include_str!("../corpus/ball_conjunction.json"),
    ),
    (
        "opposite_value",
        include_str!("../corpus/opposite_value.json"),
    ),
    (
        "introduce_ball",
        include_str!("../corpus/introduce_ball.json"),
    ),
    ("k_axiom", include_str!("../corpus/k_axiom.json")),
    ("ball_box", include_str!("../corpus/ball_box.json")),
    (
        "false_certainty",
        include_str!("../corpus/false_certainty.json"),
    ),
    ("existence", include_str!("../corpus/existence.json")),
    (
        "necessitation",
        include_str!("../corpus/necessitation.json"),
    ),
    (
        "necessity_boxed",
        include_str!("../corpus/necessity_boxed.json"),
    ),
    (
        "necessity_split",
        include_str!("../corpus/necessity_split.json"),
    ),
];

pub fn bundled_corpus() -> Vec<(&'static str, Derivation)> {
    BUNDLED_PROOFS
        .iter()
        .map(|(name, text)| {
            let d = Derivation::from_json(text)
                .unwrap_or_else(|e| panic!("bundled proof {name} is malformed: {e}"));
            (*name, d)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn j(premises: &[&str], conclusion: &str) -> Judgment {
        Judgment::new(premises.iter().map(|p| f(p)), f(conclusion))
    }

    #[test]
    fn double_ball_axiom() {
        let d = Derivation::new(vec![DerivationStep::new(j(&[], "@@p"), Rule::DB, vec![])]);
        assert_eq!(d.check().unwrap(), &j(&[], "@@p"));
        let d = Derivation::new(vec![DerivationStep::new(
            j(&["q"], "@@p"),
            Rule::DB,
            vec![],
        )]);
        assert!(d.check().is_ok());
        let d = Derivation::new(vec![DerivationStep::new(j(&[], "@p"), Rule::DB, vec![])]);
        assert!(d.check().is_err());
    }

    #[test]
    fn factorization() {
        let gamma = ["@p", "@q"];
        let d = Derivation::new(vec![
            DerivationStep::new(j(&gamma, "@p"), Rule::Premise, vec![]),
            DerivationStep::new(j(&gamma, "@q"), Rule::Premise, vec![]),
            DerivationStep::new(j(&gamma, "@(p & q)"), Rule::BF, vec![0, 1]),
        ]);
        assert!(d.check().is_ok());
        // Citation order does not matter.
        let mut swapped = d.clone();
        swapped.steps[2].inputs = vec![1, 0];
        assert!(swapped.check().is_ok());
        let mut wrong = d;
        wrong.steps[2].judgment.conclusion = f("@(q & p)");
        assert!(wrong.check().is_ok(), "phi/psi bind in either order");
    }

    #[test]
    fn malformed_ball_rule() {
        let d = Derivation::new(vec![
            DerivationStep::new(j(&["p"], "p"), Rule::Premise, vec![]),
            DerivationStep::new(j(&["p"], "@p"), Rule::BR, vec![0]),
        ]);
        let v = d.check().unwrap_err();
        assert_eq!(v.step, 1);
        assert_eq!(v.rule, Rule::BR);
        assert!(v.reason.contains("premise shape `@phi`"), "{}", v.reason);
    }

    #[test]
    fn premise_sets_must_nest() {
        let d = Derivation::new(vec![
            DerivationStep::new(j(&["@p", "@q"], "@p"), Rule::Premise, vec![]),
            DerivationStep::new(j(&["@p"], "@~p"), Rule::BR, vec![0]),
        ]);
        assert!(d.check().unwrap_err().reason.contains("not contained"));
    }

    #[test]
    fn forward_citation_rejected() {
        let d = Derivation::new(vec![DerivationStep::new(
            j(&[], "p | ~p"),
            Rule::TautCons,
            vec![0],
        )]);
        assert!(d
            .check()
            .unwrap_err()
            .reason
            .contains("not an earlier step"));
    }

    #[test]
    fn tautological_consequence_with_opaque_atoms() {
        assert!(tautological_consequence(&[], &f("[]p | ~[]p")).is_ok());
        assert!(tautological_consequence(&[&f("@p"), &f("@p -> []q")], &f("[]q")).is_ok());
        // []p and []~p are unrelated atoms.
        assert!(tautological_consequence(&[], &f("[]p | []~p")).is_err());
        assert!(tautological_consequence(&[], &f("T")).is_ok());
    }

    #[test]
    fn necessitation_via_in() {
        let d = Derivation::new(vec![
            DerivationStep::new(j(&[], "p | ~p"), Rule::TautCons, vec![]),
            DerivationStep::new(j(&[], "@(p | ~p)"), Rule::IB, vec![0]),
            DerivationStep::new(j(&[], "(p | ~p) & @(p | ~p)"), Rule::TautCons, vec![0, 1]),
            DerivationStep::new(j(&[], "[](p | ~p)"), Rule::IN, vec![2, 0])
                .with_params(NecessityParams::default()),
        ]);
        assert!(d.check().is_ok());
        let mut corrupt = d.clone();
        corrupt.steps[3].inputs = vec![0, 0];
        assert_eq!(corrupt.check().unwrap_err().step, 3);
        let mut missing = d;
        missing.steps[3].params = None;
        assert!(missing.check().is_err());
    }

    #[test]
    fn ball_and_box() {
        let gamma = ["[]p", "@[]p"];
        let d = Derivation::new(vec![
            DerivationStep::new(j(&gamma, "[]p"), Rule::Premise, vec![]),
            DerivationStep::new(j(&gamma, "@[]p"), Rule::Premise, vec![]),
            DerivationStep::new(j(&gamma, "[]@p"), Rule::BB, vec![0, 1]),
        ]);
        assert!(d.check().is_ok());
    }

    #[test]
    fn rule_tags_are_case_insensitive() {
        for r in Rule::ALL {
            assert_eq!(r.tag().to_lowercase().parse::<Rule>().unwrap(), r);
            assert_eq!(r.tag().to_uppercase().parse::<Rule>().unwrap(), r);
        }
        assert!("MP".parse::<Rule>().is_err());
    }

    #[test]
    fn document_round_trip() {
        for (name, d) in bundled_corpus() {
            let json = d.to_document().to_json();
            assert_eq!(Derivation::from_json(&json).unwrap(), d, "{name}");
        }
    }

    #[test]
    fn document_errors() {
        let bad_formula = r#"{"steps":[{"premises":[],"conclusion":"p &","rule":"TautCons"}]}"#;
        assert!(matches!(
            Derivation::from_json(bad_formula),
            Err(ProofError::Formula { step: 1, .. })
        ));
        let bad_cite = r#"{"steps":[{"conclusion":"p | ~p","rule":"TautCons","cites":[0]}]}"#;
        assert!(matches!(
            Derivation::from_json(bad_cite),
            Err(ProofError::Citation { .. })
        ));
        let bad_rule = r#"{"steps":[{"conclusion":"p","rule":"Magic"}]}"#;
        assert!(matches!(
            Derivation::from_json(bad_rule),
            Err(ProofError::Rule { .. })
        ));
    }
}
