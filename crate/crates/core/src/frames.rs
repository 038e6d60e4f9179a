//! Frame properties, exhaustive frame enumeration and the correspondence
//! harness that compares "F has property P" with "φ is valid on F".

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{LatticeId, Ultrafilter};
use crate::kripke::{frame_validity, Frame, KripkeError, Limits, Model};
use crate::syntax::{generate_corpus, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameProperty {
    Reflexive,
    Serial,
    Symmetric,
    Transitive,
    Euclidean,
    OutOfBubble,
    SuperOutOfBubble,
    TransitiveThroughEquality,
    TransitiveThroughDifference,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown frame property `{0}`")]
pub struct UnknownProperty(String);

/// Worlds that witness a property failure, in the order the defining
/// formula quantifies them.
pub type Violation = Vec<usize>;

impl FrameProperty {
    pub const ALL: [Self; 9] = [
        Self::Reflexive,
        Self::Serial,
        Self::Symmetric,
        Self::Transitive,
        Self::Euclidean,
        Self::OutOfBubble,
        Self::SuperOutOfBubble,
        Self::TransitiveThroughEquality,
        Self::TransitiveThroughDifference,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Reflexive => "reflexive",
            Self::Serial => "serial",
            Self::Symmetric => "symmetric",
            Self::Transitive => "transitive",
            Self::Euclidean => "euclidean",
            Self::OutOfBubble => "out_of_bubble",
            Self::SuperOutOfBubble => "super_out_of_bubble",
            Self::TransitiveThroughEquality => "transitive_through_equality",
            Self::TransitiveThroughDifference => "transitive_through_difference",
        }
    }

    pub fn holds(self, frame: &Frame) -> bool {
        self.violation(frame).is_none()
    }

    /// The first tuple of worlds violating the property, if any.
    pub fn violation(self, frame: &Frame) -> Option<Violation> {
        let ws = frame.worlds();
        let r = |a: usize, b: usize| frame.has_edge(a, b);
        let l = |a: usize| frame.lattice(a);
        match self {
            Self::Reflexive => ws.clone().find(|&w| !r(w, w)).map(|w| vec![w]),
            Self::Serial => ws
                .clone()
                .find(|&w| frame.successor_mask(w) == 0)
                .map(|w| vec![w]),
            Self::Symmetric => frame
                .edges()
                .find(|&(a, b)| !r(b, a))
                .map(|(a, b)| vec![a, b]),
            Self::Transitive => restricted_transitivity(frame, |_, _, _| true),
            Self::Euclidean => {
                for x in ws.clone() {
                    for y in frame.successors(x) {
                        for z in frame.successors(x) {
                            if !r(y, z) {
                                return Some(vec![x, y, z]);
                            }
                        }
                    }
                }
                None
            }
            Self::OutOfBubble => ws
                .clone()
                .find(|&w| {
                    frame.successor_mask(w) != 0 && frame.successors(w).all(|u| l(u) == l(w))
                })
                .map(|w| vec![w]),
            Self::SuperOutOfBubble => {
                if let Some(v) = Self::OutOfBubble.violation(frame) {
                    return Some(v);
                }
                for w in ws.clone() {
                    for u in frame.successors(w).filter(|&u| l(u) != l(w)) {
                        let third = frame.successors(w).any(|x| l(x) != l(w) && l(x) != l(u));
                        if !third {
                            return Some(vec![w, u]);
                        }
                    }
                }
                None
            }
            Self::TransitiveThroughEquality => {
                restricted_transitivity(frame, |w, u, v| l(w) == l(u) && l(u) == l(v))
            }
            Self::TransitiveThroughDifference => {
                restricted_transitivity(frame, |w, u, v| l(w) != l(u) && l(u) == l(v))
            }
        }
    }
}

fn restricted_transitivity(
    frame: &Frame,
    applies: impl Fn(usize, usize, usize) -> bool,
) -> Option<Violation> {
    for w in frame.worlds() {
        for u in frame.successors(w) {
            for v in frame.successors(u) {
                if applies(w, u, v) && !frame.has_edge(w, v) {
                    return Some(vec![w, u, v]);
                }
            }
        }
    }
    None
}

impl fmt::Display for FrameProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FrameProperty {
    type Err = UnknownProperty;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.replace('-', "_").to_ascii_lowercase();
        let alias = match key.as_str() {
            "tte" => "transitive_through_equality",
            "ttd" => "transitive_through_difference",
            "soob" => "super_out_of_bubble",
            other => other,
        };
        Self::ALL
            .into_iter()
            .find(|p| p.name() == alias)
            .ok_or_else(|| UnknownProperty(s.to_string()))
    }
}

pub fn is_reflexive(f: &Frame) -> bool {
    FrameProperty::Reflexive.holds(f)
}
pub fn is_serial(f: &Frame) -> bool {
    FrameProperty::Serial.holds(f)
}
pub fn is_symmetric(f: &Frame) -> bool {
    FrameProperty::Symmetric.holds(f)
}
pub fn is_transitive(f: &Frame) -> bool {
    FrameProperty::Transitive.holds(f)
}
pub fn is_euclidean(f: &Frame) -> bool {
    FrameProperty::Euclidean.holds(f)
}
pub fn is_out_of_bubble(f: &Frame) -> bool {
    FrameProperty::OutOfBubble.holds(f)
}
pub fn is_super_out_of_bubble(f: &Frame) -> bool {
    FrameProperty::SuperOutOfBubble.holds(f)
}
pub fn is_tte(f: &Frame) -> bool {
    FrameProperty::TransitiveThroughEquality.holds(f)
}
pub fn is_ttd(f: &Frame) -> bool {
    FrameProperty::TransitiveThroughDifference.holds(f)
}

/// Minimum frame index over all permutations of the worlds.
pub fn canonical_index(frame: &Frame) -> u64 {
    let n = frame.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = u64::MAX;
    permute(&mut perm, 0, &mut |p| {
        let lattices: Vec<LatticeId> = (0..n).map(|i| frame.lattice(p[i])).collect();
        // New world i is old world p[i].
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if frame.has_edge(p[i], p[j]) {
                    edges.push((i, j));
                }
            }
        }
        let image = Frame::with_default_names(lattices, &edges).expect("permuted frame");
        best = best.min(image.index());
    });
    best
}

fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

/// Every frame on `n` labeled worlds in canonical order. With `up_to_iso`
/// only the frame of least index in each world-permutation orbit is kept.
pub fn enumerate_frames(n: usize, up_to_iso: bool) -> impl Iterator<Item = Frame> {
    assert!(n >= 1, "frames need at least one world");
    (0..Frame::count(n))
        .map(move |i| Frame::from_index(n, i))
        .filter(move |f| !up_to_iso || canonical_index(f) == f.index())
}

/// Which side of the biconditional failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// The formula is valid on the frame but the property fails.
    ValidButNotProperty,
    /// The property holds but the formula is not valid.
    PropertyButNotValid,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Self::ValidButNotProperty => "valid_but_not_property",
            Self::PropertyButNotValid => "property_but_not_valid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MismatchWitness {
    Violation(Violation),
    Countermodel { model: Model, world: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub frame: Frame,
    pub ultrafilter: Ultrafilter,
    pub direction: Direction,
    pub witness: MismatchWitness,
}

impl Mismatch {
    pub fn witness_text(&self) -> String {
        match &self.witness {
            MismatchWitness::Violation(ws) => {
                let names: Vec<&str> = ws.iter().map(|&w| self.frame.name(w)).collect();
                format!(
                    "under {}: violated at {}",
                    self.ultrafilter,
                    names.join(",")
                )
            }
            MismatchWitness::Countermodel { model, world } => {
                let mut parts = Vec::new();
                for (var, values) in model.valuation() {
                    let vals: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                    parts.push(format!("{var}=[{}]", vals.join(" ")));
                }
                format!(
                    "under {}: fails at {}; {}",
                    model.ultrafilter(),
                    self.frame.name(*world),
                    parts.join(" ")
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceReport {
    pub property: FrameProperty,
    pub formula: Formula,
    pub max_worlds: usize,
    pub ultrafilters: Vec<Ultrafilter>,
    /// Frames checked per world count, smallest first.
    pub frames_per_size: Vec<u64>,
    /// Frames where the property holds, per ultrafilter pass.
    pub property_frames: u64,
    pub mismatches: Vec<Mismatch>,
}

impl CorrespondenceReport {
    pub fn frames_checked(&self) -> u64 {
        self.frames_per_size.iter().sum()
    }

    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn count(&self, direction: Direction) -> usize {
        self.mismatches
            .iter()
            .filter(|m| m.direction == direction)
            .count()
    }

    pub fn summary(&self) -> String {
        let sizes: Vec<String> = self
            .frames_per_size
            .iter()
            .rev()
            .map(|c| c.to_string())
            .collect();
        let plural = |n: usize| if n == 1 { "" } else { "s" };
        let (u, m) = (self.ultrafilters.len(), self.mismatches.len());
        format!(
            "{} frames × {u} ultrafilter{}, {m} mismatch{}",
            sizes.join("+"),
            plural(u),
            if m == 1 { "" } else { "es" }
        )
    }

    /// CSV with columns frame_encoding, property_holds, formula_valid,
    /// witness; one row per mismatch. The witness text names the
    /// ultrafilter.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record([
                "frame_encoding",
                "property_holds",
                "formula_valid",
                "witness",
            ])
            .expect("in-memory write");
        for m in &self.mismatches {
            let (holds, valid) = match m.direction {
                Direction::ValidButNotProperty => ("false", "true"),
                Direction::PropertyButNotValid => ("true", "false"),
            };
            writer
                .write_record([
                    m.frame.encoding(),
                    holds.to_string(),
                    valid.to_string(),
                    m.witness_text(),
                ])
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Compares `property` with validity of `formula` on every frame with up
/// to `max_worlds` worlds, under each ultrafilter in `filters`.
pub fn correspondence_check(
    property: FrameProperty,
    formula: &Formula,
    max_worlds: usize,
    filters: &[Ultrafilter],
    limits: &Limits,
) -> Result<CorrespondenceReport, KripkeError> {
    assert!(max_worlds >= 1, "max_worlds must be positive");
    let total: u64 = (1..=max_worlds).map(Frame::count).sum();
    if total > limits.max_frames || max_worlds * max_worlds >= 64 {
        return Err(KripkeError::ResourceBound(format!(
            "{total} frames exceed the cap of {}",
            limits.max_frames
        )));
    }
    let mut report = CorrespondenceReport {
        property,
        formula: formula.clone(),
        max_worlds,
        ultrafilters: filters.to_vec(),
        frames_per_size: Vec::new(),
        property_frames: 0,
        mismatches: Vec::new(),
    };
    for n in 1..=max_worlds {
        let per_frame: Vec<(bool, Vec<Mismatch>)> = (0..Frame::count(n))
            .into_par_iter()
            .map(|index| {
                let frame = Frame::from_index(n, index);
                check_frame(property, formula, &frame, filters, limits)
            })
            .collect::<Result<_, _>>()?;
        report.frames_per_size.push(Frame::count(n));
        for (holds, mismatches) in per_frame {
            report.property_frames += u64::from(holds);
            report.mismatches.extend(mismatches);
        }
    }
    Ok(report)
}

fn check_frame(
    property: FrameProperty,
    formula: &Formula,
    frame: &Frame,
    filters: &[Ultrafilter],
    limits: &Limits,
) -> Result<(bool, Vec<Mismatch>), KripkeError> {
    let violation = property.violation(frame);
    let verdicts = frame_validity(frame, formula, filters, limits)?;
    let mut mismatches = Vec::new();
    for v in verdicts {
        match (&violation, v.valid) {
            (Some(ws), true) => mismatches.push(Mismatch {
                frame: frame.clone(),
                ultrafilter: v.ultrafilter,
                direction: Direction::ValidButNotProperty,
                witness: MismatchWitness::Violation(ws.clone()),
            }),
            (None, false) => {
                let (model, world) = v.countermodel.expect("invalid verdicts carry a model");
                mismatches.push(Mismatch {
                    frame: frame.clone(),
                    ultrafilter: v.ultrafilter,
                    direction: Direction::PropertyButNotValid,
                    witness: MismatchWitness::Countermodel { model, world },
                });
            }
            _ => {}
        }
    }
    Ok((violation.is_none(), mismatches))
}

/// Three worlds with every ordered pair related (self-loops included),
/// labeled `labels`.
pub fn euc3_with(labels: [LatticeId; 3]) -> Frame {
    let all: Vec<(usize, usize)> = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).collect();
    Frame::new(
        vec!["w".into(), "u".into(), "u2".into()],
        labels.to_vec(),
        &all,
    )
    .expect("fixture")
}

/// The Euclidean countermodel frame: observers `w`, `u` in B, `u2` in A.
pub fn euc3() -> Frame {
    euc3_with([LatticeId::B, LatticeId::B, LatticeId::A])
}

fn soob_shape(labels: [LatticeId; 7]) -> Frame {
    let names = ["w", "w1", "w2", "w1'", "w1''", "w2'", "w2''"];
    let mut edges = vec![(0, 1), (0, 2)];
    for clique in [[1, 3, 4], [2, 5, 6]] {
        for &a in &clique {
            for &b in &clique {
                if a != b {
                    edges.push((a, b));
                }
            }
        }
    }
    Frame::new(
        names.iter().map(|s| s.to_string()).collect(),
        labels.to_vec(),
        &edges,
    )
    .expect("fixture")
}

/// A super-out-of-the-bubble frame: the root in A sees a B world and a C
/// world, each inside its own A/B/C clique.
pub fn soob_f() -> Frame {
    use LatticeId::*;
    soob_shape([A, B, C, A, C, A, B])
}

/// Same shape as [`soob_f`], but the root only sees C worlds.
pub fn soob_fprime() -> Frame {
    use LatticeId::*;
    soob_shape([A, C, C, A, B, A, B])
}

pub const FIXTURE_NAMES: [&str; 3] = ["euc3", "soob_F", "soob_Fprime"];

pub fn fixture(name: &str) -> Option<Frame> {
    match name {
        "euc3" => Some(euc3()),
        "soob_F" => Some(soob_f()),
        "soob_Fprime" => Some(soob_fprime()),
        _ => None,
    }
}

pub fn fixtures() -> Vec<(&'static str, Frame)> {
    FIXTURE_NAMES
        .iter()
        .map(|&n| (n, fixture(n).expect("listed fixture")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disagreement {
    pub formula: Formula,
    pub ultrafilter: Ultrafilter,
    pub valid_on_f: bool,
    pub valid_on_fprime: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndiscernibilityReport {
    pub formulas_checked: usize,
    pub ultrafilters: Vec<Ultrafilter>,
    pub disagreements: Vec<Disagreement>,
}

/// Compares frame validity on the two super-out-of-the-bubble fixtures for
/// every corpus formula over `p` with at most `depth` connectives.
pub fn indiscernibility(
    depth: usize,
    filters: &[Ultrafilter],
    limits: &Limits,
) -> Result<IndiscernibilityReport, KripkeError> {
    let corpus = generate_corpus(&["p"], depth);
    let (f, fp) = (soob_f(), soob_fprime());
    let rows: Vec<Vec<Disagreement>> = corpus
        .par_iter()
        .map(|formula| {
            let a = frame_validity(&f, formula, filters, limits)?;
            let b = frame_validity(&fp, formula, filters, limits)?;
            Ok(a.iter()
                .zip(&b)
                .filter(|(x, y)| x.valid != y.valid)
                .map(|(x, y)| Disagreement {
                    formula: formula.clone(),
                    ultrafilter: x.ultrafilter,
                    valid_on_f: x.valid,
                    valid_on_fprime: y.valid,
                })
                .collect())
        })
        .collect::<Result<_, KripkeError>>()?;
    Ok(IndiscernibilityReport {
        formulas_checked: corpus.len(),
        ultrafilters: filters.to_vec(),
        disagreements: rows.into_iter().flatten().collect(),
    })
}
