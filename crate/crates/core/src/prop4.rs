//! Standalone four-valued semantics with the ball operator: evaluation,
//! exhaustive consequence checking and a soundness battery for the rules of
//! the propositional calculus.
//!
//! The four-valued algebra is the subalgebra `A` of the eight-valued one
//! under the ultrafilter generated by `e1`, so `a = e1`, `-a = e23` and the
//! designated values are `{1, a}`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::algebra::{Element8, LatticeId, Ultrafilter};
use crate::syntax::{parse, Formula};

const LATTICE: LatticeId = LatticeId::A;
const FILTER: Ultrafilter = Ultrafilter::E1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Prop4Error {
    #[error("modal operator in `{0}`; the four-valued semantics covers ¬, ∧, ∨ and ∘ only")]
    ModalOperator(Formula),
    #[error("variable `{0}` has no value")]
    Unassigned(String),
    #[error("value {0} is not in the four-valued algebra")]
    OutOfAlgebra(Element8),
}

/// One of the four values `1, 0, a, -a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Value4(Element8);

impl Value4 {
    pub const ONE: Self = Self(Element8::ONE);
    pub const ZERO: Self = Self(Element8::ZERO);
    pub const A: Self = Self(LATTICE.atom());
    pub const NEG_A: Self = Self(LATTICE.coatom());

    /// Enumeration order of valuations.
    pub const ALL: [Self; 4] = [Self::ZERO, Self::A, Self::NEG_A, Self::ONE];

    pub fn new(x: Element8) -> Result<Self, Prop4Error> {
        if LATTICE.contains(x) {
            Ok(Self(x))
        } else {
            Err(Prop4Error::OutOfAlgebra(x))
        }
    }

    pub fn element(self) -> Element8 {
        self.0
    }

    pub fn is_designated(self) -> bool {
        FILTER.contains(self.0)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ONE => "1",
            Self::ZERO => "0",
            Self::A => "a",
            _ => "-a",
        }
    }

    pub fn parse_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

impl fmt::Display for Value4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Valuation4(BTreeMap<String, Value4>);

impl Valuation4 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: &str, value: Value4) -> Self {
        self.0.insert(var.to_string(), value);
        self
    }

    pub fn set(&mut self, var: &str, value: Value4) {
        self.0.insert(var.to_string(), value);
    }

    pub fn get(&self, var: &str) -> Option<Value4> {
        self.0.get(var).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Value4)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Every valuation of `vars` in lexicographic order, the first variable
    /// varying slowest.
    pub fn enumerate(vars: &[String]) -> impl Iterator<Item = Valuation4> + '_ {
        let total = 4usize.pow(vars.len() as u32);
        (0..total).map(move |mut index| {
            let mut val = Valuation4::new();
            for var in vars.iter().rev() {
                val.set(var, Value4::ALL[index % 4]);
                index /= 4;
            }
            val
        })
    }
}

impl fmt::Display for Valuation4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(", "))
    }
}

pub fn eval4(f: &Formula, v: &Valuation4) -> Result<Value4, Prop4Error> {
    check_modal_free([f])?;
    eval_raw(f, v).map(Value4)
}

fn eval_raw(f: &Formula, v: &Valuation4) -> Result<Element8, Prop4Error> {
    Ok(match f {
        Formula::Var(name) => v
            .get(name)
            .ok_or_else(|| Prop4Error::Unassigned(name.clone()))?
            .element(),
        Formula::Top => Element8::ONE,
        Formula::Bot => Element8::ZERO,
        Formula::Not(g) => eval_raw(g, v)?.complement(),
        Formula::Ball(g) => eval_raw(g, v)?.ball(),
        Formula::And(g, h) => eval_raw(g, v)?.meet(eval_raw(h, v)?),
        Formula::Or(g, h) => eval_raw(g, v)?.join(eval_raw(h, v)?),
        Formula::Box(_) | Formula::Diamond(_) | Formula::BoxSame(_) | Formula::BoxDiff(_) => {
            return Err(Prop4Error::ModalOperator(f.clone()))
        }
    })
}

fn check_modal_free<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> Result<(), Prop4Error> {
    for f in fs {
        if let Some(m) = f.first_modal_subformula() {
            return Err(Prop4Error::ModalOperator(m.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Consequence4 {
    pub holds: bool,
    /// A valuation designating every premise but not the goal.
    pub witness: Option<Valuation4>,
}

/// Decides `premises ⊨ goal` by enumerating every valuation of the
/// occurring variables. The witness is the first failing valuation.
pub fn consequence4(premises: &[Formula], goal: &Formula) -> Result<Consequence4, Prop4Error> {
    check_modal_free(premises.iter().chain(std::iter::once(goal)))?;
    let mut vars = goal.vars();
    for p in premises {
        vars.extend(p.vars());
    }
    let vars: Vec<String> = vars.into_iter().collect();
    for val in Valuation4::enumerate(&vars) {
        let mut premises_hold = true;
        for p in premises {
            if !eval4(p, &val)?.is_designated() {
                premises_hold = false;
                break;
            }
        }
        if premises_hold && !eval4(goal, &val)?.is_designated() {
            return Ok(Consequence4 {
                holds: false,
                witness: Some(val),
            });
        }
    }
    Ok(Consequence4 {
        holds: true,
        witness: None,
    })
}

/// True when `f` takes the value 1 under every valuation.
pub fn is_top_valued(f: &Formula) -> Result<bool, Prop4Error> {
    check_modal_free([f])?;
    let vars: Vec<String> = f.vars().into_iter().collect();
    for val in Valuation4::enumerate(&vars) {
        if eval4(f, &val)? != Value4::ONE {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A rule scheme instance written in the ASCII grammar, with `phi` and `psi`
/// standing for the metavariables.
#[derive(Debug, Clone, Copy)]
pub struct RuleScheme {
    pub premises: &'static [&'static str],
    pub conclusion: &'static str,
}

/// A named rule with one or more schemes (both directions of BR, both forms
/// of BF).
#[derive(Debug, Clone, Copy)]
pub struct NamedRule {
    pub name: &'static str,
    pub schemes: &'static [RuleScheme],
}

const fn scheme(premises: &'static [&'static str], conclusion: &'static str) -> RuleScheme {
    RuleScheme {
        premises,
        conclusion,
    }
}

/// The value-functional rules of the propositional calculus. `CL` stands for
/// the classical rules through modus ponens.
pub const RULES: &[NamedRule] = &[
    NamedRule {
        name: "CL",
        schemes: &[scheme(&["phi", "phi -> psi"], "psi")],
    },
    NamedRule {
        name: "DB",
        schemes: &[scheme(&[], "@@phi")],
    },
    NamedRule {
        name: "BR",
        schemes: &[scheme(&["@phi"], "@~phi"), scheme(&["@~phi"], "@phi")],
    },
    NamedRule {
        name: "BF",
        schemes: &[
            scheme(&["@phi", "@psi"], "@(phi & psi)"),
            scheme(&["@phi", "@psi"], "@(phi | psi)"),
        ],
    },
    NamedRule {
        name: "AwB",
        schemes: &[scheme(&["phi", "@phi"], "@(phi | psi)")],
    },
    NamedRule {
        name: "NwB",
        schemes: &[scheme(&["~phi", "@phi"], "@(phi & psi)")],
    },
    NamedRule {
        name: "NB",
        schemes: &[scheme(&["~@phi", "@psi"], "~@(phi & psi) | ~@(phi | psi)")],
    },
    NamedRule {
        name: "TNB1",
        schemes: &[scheme(&["~@phi", "~@psi", "phi & psi"], "~@(phi & psi)")],
    },
    NamedRule {
        name: "TNB2",
        schemes: &[scheme(&["~@phi", "~@psi", "~(phi | psi)"], "~@(phi & psi)")],
    },
    NamedRule {
        name: "BC",
        schemes: &[scheme(&["@(phi & psi)", "phi & psi"], "@phi & @psi")],
    },
    NamedRule {
        name: "OV",
        schemes: &[scheme(&["@phi <-> @psi", "phi <-> ~psi"], "@(phi & psi)")],
    },
];

/// Formulas that must take the value 1 everywhere for the ball-introduction
/// rule to be sound on them: classical tautologies and theorems of the
/// calculus.
pub const TOP_VALUED_THEOREMS: &[&str] = &[
    "p | ~p",
    "p -> p",
    "p & q -> p",
    "p -> p | q",
    "~(p & ~p)",
    "(p -> q) -> (~q -> ~p)",
    "p <-> ~~p",
    "@@p",
    "@p | ~@p",
    "@(p | ~p)",
    "@p <-> @~p",
    "@p & @q -> @(p & q)",
    "@p & @q -> @(p | q)",
    "p & @p -> @(p | q)",
    "~p & @p -> @(p & q)",
    "@(p & q) & p & q -> @p & @q",
    "@@(p | ~p)",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCheck {
    pub rule: &'static str,
    pub scheme: String,
    pub passed: bool,
    pub witness: Option<Valuation4>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundnessReport {
    /// One row per named rule; a rule passes when all of its schemes do.
    pub rules: Vec<RuleCheck>,
    /// Top-valued check per bundled theorem (ball introduction).
    pub introduction_of_ball: Vec<(String, bool)>,
}

impl SoundnessReport {
    pub fn all_passed(&self) -> bool {
        self.rules.iter().all(|r| r.passed) && self.introduction_of_ball.iter().all(|(_, ok)| *ok)
    }
}

pub fn check_scheme(s: &RuleScheme) -> Result<Consequence4, Prop4Error> {
    let premises = s
        .premises
        .iter()
        .map(|p| parse(p).expect("bundled scheme parses"))
        .collect::<Vec<_>>();
    let goal = parse(s.conclusion).expect("bundled scheme parses");
    consequence4(&premises, &goal)
}

pub fn rule_soundness_report() -> SoundnessReport {
    let rules = RULES
        .iter()
        .map(|rule| {
            let mut row = RuleCheck {
                rule: rule.name,
                scheme: String::new(),
                passed: true,
                witness: None,
            };
            let mut shown = Vec::new();
            for s in rule.schemes {
                shown.push(format!("{} |- {}", s.premises.join(", "), s.conclusion));
                let result = check_scheme(s).expect("bundled schemes are modal-free");
                if !result.holds && row.passed {
                    row.passed = false;
                    row.witness = result.witness;
                }
            }
            row.scheme = shown.join("; ");
            row
        })
        .collect();
    let introduction_of_ball = TOP_VALUED_THEOREMS
        .iter()
        .map(|text| {
            let f = parse(text).expect("bundled theorem parses");
            (
                text.to_string(),
                is_top_valued(&f).expect("bundled theorem is modal-free"),
            )
        })
        .collect();
    SoundnessReport {
        rules,
        introduction_of_ball,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn eval_examples() {
        let v = Valuation4::new().with("p", Value4::A);
        assert_eq!(eval4(&f("@p"), &v).unwrap(), Value4::ZERO);
        assert_eq!(eval4(&f("p | ~p"), &v).unwrap(), Value4::ONE);
        let v = v.with("q", Value4::NEG_A);
        assert_eq!(eval4(&f("@(p & q)"), &v).unwrap(), Value4::ONE);
    }

    #[test]
    fn modal_formula_rejected() {
        let err = eval4(&f("p & []q"), &Valuation4::new()).unwrap_err();
        assert_eq!(err, Prop4Error::ModalOperator(f("[]q")));
        assert!(consequence4(&[f("<>p")], &f("p")).is_err());
        assert!(matches!(
            eval4(&f("p"), &Valuation4::new()),
            Err(Prop4Error::Unassigned(_))
        ));
    }

    #[test]
    fn consequence_examples() {
        assert!(consequence4(&[], &f("@@p")).unwrap().holds);
        let r = consequence4(&[f("p")], &f("@p")).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness.unwrap().get("p"), Some(Value4::A));
        assert!(
            consequence4(&[f("@p"), f("@q")], &f("@(p & q)"))
                .unwrap()
                .holds
        );
    }

    #[test]
    fn soundness_battery() {
        let report = rule_soundness_report();
        assert_eq!(report.rules.len(), 11);
        for row in &report.rules {
            assert!(row.passed, "{} failed with {:?}", row.rule, row.witness);
        }
        assert!(report.all_passed());
    }

    #[test]
    fn corrupted_affirming_rule_fails() {
        let broken = scheme(&["phi"], "@(phi | psi)");
        let r = check_scheme(&broken).unwrap();
        assert!(!r.holds);
        let w = r.witness.unwrap();
        // The witness designates phi but not the goal.
        assert!(eval4(&f("phi"), &w).unwrap().is_designated());
        assert!(!eval4(&f("@(phi | psi)"), &w).unwrap().is_designated());
        assert_eq!(w.get("phi"), Some(Value4::A));
        assert_eq!(w.get("psi"), Some(Value4::ZERO));
    }

    #[test]
    fn enumeration_order() {
        let vars = vec!["p".to_string(), "q".to_string()];
        let all: Vec<_> = Valuation4::enumerate(&vars).collect();
        assert_eq!(all.len(), 16);
        assert_eq!(all[1].get("q"), Some(Value4::A));
        assert_eq!(all[1].get("p"), Some(Value4::ZERO));
    }
}
