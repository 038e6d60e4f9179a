//! Many-logics Kripke frames and models over the eight-valued algebra.
//!
//! Every world carries one of the three four-valued subalgebras. A world
//! reads the value of a formula at a successor through [`down_interp`] into
//! its own subalgebra, which is what makes the global consequence relation
//! non-normal even though each world is classical.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{down_interp, Element8, LatticeId, Ultrafilter};
use crate::syntax::Formula;

/// Worlds are stored as bit positions in a `u64` successor mask.
pub const MAX_WORLDS: usize = 64;

#[derive(Debug, Error)]
pub enum KripkeError {
    #[error("frame has no worlds")]
    EmptyFrame,
    #[error("frame has {0} worlds; at most {MAX_WORLDS} are supported")]
    TooManyWorlds(usize),
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("world `{0}` has no lattice")]
    MissingLattice(String),
    #[error("variable `{0}` has no value")]
    UnknownVariable(String),
    #[error("value {value} of `{var}` at world `{world}` is outside lattice {lattice}")]
    NotInCarrier {
        world: String,
        var: String,
        value: Element8,
        lattice: LatticeId,
    },
    #[error("valuation of `{var}` has {got} entries for {expected} worlds")]
    ValuationLength {
        var: String,
        got: usize,
        expected: usize,
    },
    #[error("formula `{0}` is outside the classical fragment (no @, [=] or [-])")]
    OutOfFragment(Formula),
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),
}

/// Caps on exhaustive enumeration.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Valuations examined per frame.
    pub max_valuations: u64,
    /// Frames examined per search.
    pub max_frames: u64,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_valuations: 1 << 24,
            max_frames: 1 << 24,
            deadline: None,
        }
    }
}

impl Limits {
    fn check_deadline(&self) -> Result<(), KripkeError> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(KripkeError::ResourceBound(
                "wall-clock budget exhausted".to_string(),
            )),
            _ => Ok(()),
        }
    }
}

/// A finite frame: named worlds, a lattice per world, and an accessibility
/// relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    names: Vec<String>,
    lattices: Vec<LatticeId>,
    succ: Vec<u64>,
}

impl Frame {
    pub fn new(
        names: Vec<String>,
        lattices: Vec<LatticeId>,
        edges: &[(usize, usize)],
    ) -> Result<Self, KripkeError> {
        if names.is_empty() {
            return Err(KripkeError::EmptyFrame);
        }
        if names.len() > MAX_WORLDS {
            return Err(KripkeError::TooManyWorlds(names.len()));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(KripkeError::DuplicateWorld(name.clone()));
            }
        }
        if lattices.len() != names.len() {
            let missing = names.get(lattices.len()).cloned().unwrap_or_default();
            return Err(KripkeError::MissingLattice(missing));
        }
        let mut succ = vec![0u64; names.len()];
        for &(from, to) in edges {
            if from >= names.len() || to >= names.len() {
                return Err(KripkeError::UnknownWorld(format!("#{}", from.max(to))));
            }
            succ[from] |= 1 << to;
        }
        Ok(Self {
            names,
            lattices,
            succ,
        })
    }

    /// Worlds named `w1..wn`.
    pub fn with_default_names(
        lattices: Vec<LatticeId>,
        edges: &[(usize, usize)],
    ) -> Result<Self, KripkeError> {
        let names = (1..=lattices.len()).map(|i| format!("w{i}")).collect();
        Self::new(names, lattices, edges)
    }

    /// Number of frames on `n` labeled worlds: `2^(n²) · 3^n`.
    pub fn count(n: usize) -> u64 {
        (1u64 << (n * n)) * 3u64.pow(n as u32)
    }

    /// The frame at position `index` of the canonical order on `n` worlds:
    /// relation bitmask major, lattice-label vector minor. Bit `i·n + j` of
    /// the relation is the edge `(wi, wj)`; the first world's label is the
    /// most significant base-3 digit.
    pub fn from_index(n: usize, index: u64) -> Self {
        assert!(n >= 1 && n * n < 64, "enumeration supports 1..=7 worlds");
        let label_count = 3u64.pow(n as u32);
        let relation = index / label_count;
        let mut labels = index % label_count;
        let mut lattices = vec![LatticeId::A; n];
        for slot in lattices.iter_mut().rev() {
            *slot = LatticeId::ALL[(labels % 3) as usize];
            labels /= 3;
        }
        let mut succ = vec![0u64; n];
        for (i, s) in succ.iter_mut().enumerate() {
            *s = (relation >> (i * n)) & ((1u64 << n) - 1);
        }
        Self {
            names: (1..=n).map(|i| format!("w{i}")).collect(),
            lattices,
            succ,
        }
    }

    /// Inverse of [`Frame::from_index`].
    pub fn index(&self) -> u64 {
        let n = self.len();
        let labels = self
            .lattices
            .iter()
            .fold(0u64, |acc, l| acc * 3 + l.index() as u64);
        self.relation_mask() * 3u64.pow(n as u32) + labels
    }

    /// Relation as the bitmask used by [`Frame::from_index`].
    pub fn relation_mask(&self) -> u64 {
        let n = self.len();
        self.succ
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, s)| acc | (s << (i * n)))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, w: usize) -> &str {
        &self.names[w]
    }

    pub fn world(&self, name: &str) -> Result<usize, KripkeError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| KripkeError::UnknownWorld(name.to_string()))
    }

    pub fn lattice(&self, w: usize) -> LatticeId {
        self.lattices[w]
    }

    pub fn lattices(&self) -> &[LatticeId] {
        &self.lattices
    }

    pub fn successor_mask(&self, w: usize) -> u64 {
        self.succ[w]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succ[from] >> to & 1 == 1
    }

    pub fn successors(&self, w: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&u| self.has_edge(w, u))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |w| self.successors(w).map(move |u| (w, u)))
    }

    pub fn worlds(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    /// Compact text form: labels, then edges, e.g. `BBA|w1>w2,w2>w2`.
    pub fn encoding(&self) -> String {
        let labels: String = self.lattices.iter().map(|l| l.name()).collect();
        let edges: Vec<String> = self
            .edges()
            .map(|(a, b)| format!("{}>{}", self.names[a], self.names[b]))
            .collect();
        format!("{labels}|{}", edges.join(","))
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encoding())
    }
}

fn down_table() -> &'static [[Element8; 8]; 3] {
    static TABLE: OnceLock<[[Element8; 8]; 3]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [[Element8::ZERO; 8]; 3];
        for l in LatticeId::ALL {
            for x in Element8::ALL {
                table[l.index()][x.bits() as usize] = down_interp(x, l);
            }
        }
        table
    })
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Var(usize),
    Top,
    Bot,
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Ball(usize),
    Box(usize),
    Diamond(usize),
    BoxSame(usize),
    BoxDiff(usize),
}

/// Formulas flattened into post-order so that evaluation over every world
/// of a frame is a single pass with no recursion.
#[derive(Debug, Clone)]
pub(crate) struct Program {
    ops: Vec<Op>,
    roots: Vec<usize>,
    vars: Vec<String>,
}

impl Program {
    pub(crate) fn new(formulas: &[&Formula]) -> Self {
        let mut vars = std::collections::BTreeSet::new();
        for f in formulas {
            vars.extend(f.vars());
        }
        let mut program = Self {
            ops: Vec::new(),
            roots: Vec::new(),
            vars: vars.into_iter().collect(),
        };
        for f in formulas {
            let root = program.push(f);
            program.roots.push(root);
        }
        program
    }

    fn push(&mut self, f: &Formula) -> usize {
        let op = match f {
            Formula::Var(name) => Op::Var(
                self.vars
                    .binary_search(name)
                    .expect("variables collected up front"),
            ),
            Formula::Top => Op::Top,
            Formula::Bot => Op::Bot,
            Formula::Not(g) => Op::Not(self.push(g)),
            Formula::Ball(g) => Op::Ball(self.push(g)),
            Formula::Box(g) => Op::Box(self.push(g)),
            Formula::Diamond(g) => Op::Diamond(self.push(g)),
            Formula::BoxSame(g) => Op::BoxSame(self.push(g)),
            Formula::BoxDiff(g) => Op::BoxDiff(self.push(g)),
            Formula::And(g, h) => {
                let a = self.push(g);
                Op::And(a, self.push(h))
            }
            Formula::Or(g, h) => {
                let a = self.push(g);
                Op::Or(a, self.push(h))
            }
        };
        self.ops.push(op);
        self.ops.len() - 1
    }

    pub(crate) fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Evaluates every node at every world. `assign[var * n + w]` holds the
    /// value of variable `var` at world `w`; the result uses the same layout
    /// per node.
    pub(crate) fn run(&self, frame: &Frame, assign: &[Element8], buf: &mut Vec<Element8>) {
        let n = frame.len();
        let down = down_table();
        let dn = |x: Element8, l: LatticeId| down[l.index()][x.bits() as usize];
        buf.clear();
        buf.resize(self.ops.len() * n, Element8::ZERO);
        for (node, op) in self.ops.iter().enumerate() {
            for w in 0..n {
                let lw = frame.lattices[w];
                let at = |child: usize, u: usize| buf[child * n + u];
                let value = match *op {
                    Op::Var(v) => assign[v * n + w],
                    Op::Top => Element8::ONE,
                    Op::Bot => Element8::ZERO,
                    Op::Not(a) => dn(at(a, w).complement(), lw),
                    Op::And(a, b) => dn(at(a, w).meet(at(b, w)), lw),
                    Op::Or(a, b) => dn(at(a, w).join(at(b, w)), lw),
                    Op::Ball(a) => dn(at(a, w).ball(), lw),
                    Op::Box(a) => fold_successors(frame.succ[w], Element8::ONE, |acc, u| {
                        acc.meet(dn(at(a, u), lw))
                    }),
                    Op::Diamond(a) => {
                        // ◇α := (−v(□¬α))^L, with ¬α read at each successor.
                        let box_not = fold_successors(frame.succ[w], Element8::ONE, |acc, u| {
                            let not_at_u = dn(at(a, u).complement(), frame.lattices[u]);
                            acc.meet(dn(not_at_u, lw))
                        });
                        dn(box_not.complement(), lw)
                    }
                    Op::BoxSame(a) => fold_successors(frame.succ[w], Element8::ONE, |acc, u| {
                        if frame.lattices[u] == lw {
                            acc.meet(at(a, u))
                        } else {
                            acc
                        }
                    }),
                    Op::BoxDiff(a) => fold_successors(frame.succ[w], Element8::ONE, |acc, u| {
                        if frame.lattices[u] != lw {
                            acc.meet(dn(at(a, u), lw))
                        } else {
                            acc
                        }
                    }),
                };
                buf[node * n + w] = value;
            }
        }
    }

    pub(crate) fn root_values<'b>(
        &self,
        root: usize,
        n: usize,
        buf: &'b [Element8],
    ) -> &'b [Element8] {
        let node = self.roots[root];
        &buf[node * n..(node + 1) * n]
    }
}

fn fold_successors(
    mut mask: u64,
    init: Element8,
    mut f: impl FnMut(Element8, usize) -> Element8,
) -> Element8 {
    let mut acc = init;
    while mask != 0 {
        let u = mask.trailing_zeros() as usize;
        acc = f(acc, u);
        mask &= mask - 1;
    }
    acc
}

/// A frame together with a valuation and the ultrafilter of designated
/// values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    frame: Frame,
    /// Variable name → value at each world, indexed like the frame's worlds.
    valuation: BTreeMap<String, Vec<Element8>>,
    ultrafilter: Ultrafilter,
    default_zero: bool,
}

impl Model {
    pub fn new(
        frame: Frame,
        valuation: BTreeMap<String, Vec<Element8>>,
        ultrafilter: Ultrafilter,
    ) -> Result<Self, KripkeError> {
        for (var, values) in &valuation {
            if values.len() != frame.len() {
                return Err(KripkeError::ValuationLength {
                    var: var.clone(),
                    got: values.len(),
                    expected: frame.len(),
                });
            }
            for (w, &value) in values.iter().enumerate() {
                let lattice = frame.lattice(w);
                if !lattice.contains(value) {
                    return Err(KripkeError::NotInCarrier {
                        world: frame.name(w).to_string(),
                        var: var.clone(),
                        value,
                        lattice,
                    });
                }
            }
        }
        Ok(Self {
            frame,
            valuation,
            ultrafilter,
            default_zero: false,
        })
    }

    /// Unknown variables read as 0 everywhere instead of raising an error.
    pub fn with_default_zero(mut self, on: bool) -> Self {
        self.default_zero = on;
        self
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn ultrafilter(&self) -> Ultrafilter {
        self.ultrafilter
    }

    pub fn with_ultrafilter(mut self, u: Ultrafilter) -> Self {
        self.ultrafilter = u;
        self
    }

    pub fn valuation(&self) -> &BTreeMap<String, Vec<Element8>> {
        &self.valuation
    }

    pub fn value(&self, w: usize, var: &str) -> Option<Element8> {
        self.valuation.get(var).map(|vs| vs[w])
    }

    fn assignment(&self, program: &Program) -> Result<Vec<Element8>, KripkeError> {
        let n = self.frame.len();
        let mut assign = Vec::with_capacity(program.vars().len() * n);
        for var in program.vars() {
            match self.valuation.get(var) {
                Some(values) => assign.extend_from_slice(values),
                None if self.default_zero => assign.extend(std::iter::repeat_n(Element8::ZERO, n)),
                None => return Err(KripkeError::UnknownVariable(var.clone())),
            }
        }
        Ok(assign)
    }

    /// Values of `f` at every world.
    pub fn eval_all(&self, f: &Formula) -> Result<Vec<Element8>, KripkeError> {
        let program = Program::new(&[f]);
        let assign = self.assignment(&program)?;
        let mut buf = Vec::new();
        program.run(&self.frame, &assign, &mut buf);
        Ok(program.root_values(0, self.frame.len(), &buf).to_vec())
    }

    pub fn eval(&self, w: usize, f: &Formula) -> Result<Element8, KripkeError> {
        if w >= self.frame.len() {
            return Err(KripkeError::UnknownWorld(format!("#{w}")));
        }
        Ok(self.eval_all(f)?[w])
    }

    pub fn satisfies(&self, w: usize, f: &Formula) -> Result<bool, KripkeError> {
        Ok(self.ultrafilter.contains(self.eval(w, f)?))
    }

    /// First world where `f` is not designated, if any.
    pub fn failing_world(&self, f: &Formula) -> Result<Option<usize>, KripkeError> {
        let values = self.eval_all(f)?;
        Ok(values.iter().position(|&x| !self.ultrafilter.contains(x)))
    }

    pub fn model_valid(&self, f: &Formula) -> Result<bool, KripkeError> {
        Ok(self.failing_world(f)?.is_none())
    }

    pub fn to_document(&self) -> ModelDocument {
        let mut doc = ModelDocument::from_frame(&self.frame);
        doc.ultrafilter = Some(self.ultrafilter);
        let mut valuation: BTreeMap<String, BTreeMap<String, Element8>> = BTreeMap::new();
        for w in self.frame.worlds() {
            let row = valuation.entry(self.frame.name(w).to_string()).or_default();
            for (var, values) in &self.valuation {
                row.insert(var.clone(), values[w]);
            }
        }
        doc.valuation = Some(valuation);
        doc
    }
}

pub fn eval(m: &Model, w: usize, f: &Formula) -> Result<Element8, KripkeError> {
    m.eval(w, f)
}

pub fn satisfies(m: &Model, w: usize, f: &Formula) -> Result<bool, KripkeError> {
    m.satisfies(w, f)
}

pub fn model_valid(m: &Model, f: &Formula) -> Result<bool, KripkeError> {
    m.model_valid(f)
}

/// The on-disk model and frame format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub worlds: Vec<String>,
    pub lattices: BTreeMap<String, LatticeId>,
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ultrafilter: Option<Ultrafilter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation: Option<BTreeMap<String, BTreeMap<String, Element8>>>,
}

impl ModelDocument {
    pub fn from_frame(frame: &Frame) -> Self {
        Self {
            worlds: frame.names().to_vec(),
            lattices: frame
                .worlds()
                .map(|w| (frame.name(w).to_string(), frame.lattice(w)))
                .collect(),
            edges: frame
                .edges()
                .map(|(a, b)| (frame.name(a).to_string(), frame.name(b).to_string()))
                .collect(),
            ultrafilter: None,
            valuation: None,
        }
    }

    pub fn to_frame(&self) -> Result<Frame, KripkeError> {
        let lattices = self
            .worlds
            .iter()
            .map(|w| {
                self.lattices
                    .get(w)
                    .copied()
                    .ok_or_else(|| KripkeError::MissingLattice(w.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(extra) = self.lattices.keys().find(|k| !self.worlds.contains(k)) {
            return Err(KripkeError::UnknownWorld(extra.clone()));
        }
        let index = |name: &str| {
            self.worlds
                .iter()
                .position(|w| w == name)
                .ok_or_else(|| KripkeError::UnknownWorld(name.to_string()))
        };
        let edges = self
            .edges
            .iter()
            .map(|(a, b)| Ok((index(a)?, index(b)?)))
            .collect::<Result<Vec<_>, KripkeError>>()?;
        Frame::new(self.worlds.clone(), lattices, &edges)
    }

    /// Builds the model; worlds missing from `valuation` leave their
    /// variables unset, which is an error unless every world omits them.
    pub fn to_model(&self) -> Result<Model, KripkeError> {
        let frame = self.to_frame()?;
        let mut valuation: BTreeMap<String, Vec<Option<Element8>>> = BTreeMap::new();
        if let Some(rows) = &self.valuation {
            for (world, row) in rows {
                let w = frame.world(world)?;
                for (var, &value) in row {
                    valuation
                        .entry(var.clone())
                        .or_insert_with(|| vec![None; frame.len()])[w] = Some(value);
                }
            }
        }
        let mut complete = BTreeMap::new();
        for (var, values) in valuation {
            let values = values
                .into_iter()
                .enumerate()
                .map(|(w, v)| {
                    v.ok_or_else(|| {
                        KripkeError::UnknownVariable(format!("{var} at world {}", frame.name(w)))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            complete.insert(var, values);
        }
        Model::new(frame, complete, self.ultrafilter.unwrap_or_default())
    }
}

/// Outcome of checking a formula over every model on a frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameValidity {
    pub ultrafilter: Ultrafilter,
    pub valid: bool,
    /// The first refuting model in valuation order, with the failing world.
    pub countermodel: Option<(Model, usize)>,
}

/// Iterates the valuations of `vars` over a frame. Slots are ordered
/// variable-major, world-minor; each ranges over its world's carrier in
/// canonical order and the first slot varies slowest.
struct ValuationOdometer<'a> {
    frame: &'a Frame,
    digits: Vec<u8>,
    assign: Vec<Element8>,
    started: bool,
}

impl<'a> ValuationOdometer<'a> {
    fn new(frame: &'a Frame, var_count: usize) -> Self {
        let n = frame.len();
        Self {
            frame,
            digits: vec![0; var_count * n],
            assign: vec![Element8::ZERO; var_count * n],
            started: false,
        }
    }

    fn total(frame: &Frame, var_count: usize) -> Option<u64> {
        4u64.checked_pow((var_count * frame.len()) as u32)
    }

    fn advance(&mut self) -> Option<&[Element8]> {
        if !self.started {
            self.started = true;
            return Some(&self.assign);
        }
        let n = self.frame.len();
        for slot in (0..self.digits.len()).rev() {
            let lattice = self.frame.lattices[slot % n];
            if self.digits[slot] < 3 {
                self.digits[slot] += 1;
                self.assign[slot] = lattice.carrier()[self.digits[slot] as usize];
                return Some(&self.assign);
            }
            self.digits[slot] = 0;
            self.assign[slot] = Element8::ZERO;
        }
        None
    }
}

fn build_model(frame: &Frame, program: &Program, assign: &[Element8], u: Ultrafilter) -> Model {
    let n = frame.len();
    let valuation = program
        .vars()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), assign[i * n..(i + 1) * n].to_vec()))
        .collect();
    Model::new(frame.clone(), valuation, u).expect("enumerated valuations respect carriers")
}

fn check_valuation_cap(
    frame: &Frame,
    var_count: usize,
    limits: &Limits,
) -> Result<(), KripkeError> {
    match ValuationOdometer::total(frame, var_count) {
        Some(total) if total <= limits.max_valuations => Ok(()),
        _ => Err(KripkeError::ResourceBound(format!(
            "4^{} valuations on a {}-world frame exceed the cap of {}",
            var_count * frame.len(),
            frame.len(),
            limits.max_valuations
        ))),
    }
}

/// Checks `f` over every model on `frame`, once per ultrafilter in `filters`.
/// Evaluation does not depend on the ultrafilter, so each valuation is
/// evaluated once.
pub fn frame_validity(
    frame: &Frame,
    f: &Formula,
    filters: &[Ultrafilter],
    limits: &Limits,
) -> Result<Vec<FrameValidity>, KripkeError> {
    let program = Program::new(&[f]);
    check_valuation_cap(frame, program.vars().len(), limits)?;
    let n = frame.len();
    let mut results: Vec<FrameValidity> = filters
        .iter()
        .map(|&u| FrameValidity {
            ultrafilter: u,
            valid: true,
            countermodel: None,
        })
        .collect();
    let mut open = results.len();
    let mut odometer = ValuationOdometer::new(frame, program.vars().len());
    let mut buf = Vec::new();
    let mut steps = 0u64;
    while open > 0 {
        let Some(assign) = odometer.advance() else {
            break;
        };
        steps += 1;
        if steps.is_multiple_of(4096) {
            limits.check_deadline()?;
        }
        program.run(frame, assign, &mut buf);
        let values = program.root_values(0, n, &buf);
        for result in results.iter_mut().filter(|r| r.valid) {
            if let Some(w) = values.iter().position(|&x| !result.ultrafilter.contains(x)) {
                result.valid = false;
                result.countermodel =
                    Some((build_model(frame, &program, assign, result.ultrafilter), w));
                open -= 1;
            }
        }
    }
    Ok(results)
}

pub fn frame_valid(
    frame: &Frame,
    f: &Formula,
    u: Ultrafilter,
    limits: &Limits,
) -> Result<FrameValidity, KripkeError> {
    Ok(frame_validity(frame, f, &[u], limits)?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    /// A model of every premise in which the goal fails at `world`.
    Found { model: Model, world: usize },
    /// Nothing refutes the goal on frames up to the bound. This is not a
    /// proof of validity.
    NoneUpToBound {
        max_worlds: usize,
        frames_checked: u64,
    },
}

impl SearchOutcome {
    pub fn model(&self) -> Option<&Model> {
        match self {
            Self::Found { model, .. } => Some(model),
            Self::NoneUpToBound { .. } => None,
        }
    }
}

fn search_frame(
    frame: &Frame,
    program: &Program,
    premise_count: usize,
    filters: &[Ultrafilter],
    limits: &Limits,
) -> Result<Option<(Model, usize)>, KripkeError> {
    let n = frame.len();
    let mut odometer = ValuationOdometer::new(frame, program.vars().len());
    let mut buf = Vec::new();
    let mut steps = 0u64;
    while let Some(assign) = odometer.advance() {
        steps += 1;
        if steps.is_multiple_of(4096) {
            limits.check_deadline()?;
        }
        program.run(frame, assign, &mut buf);
        for &u in filters {
            let premises_hold = (0..premise_count).all(|i| {
                program
                    .root_values(i, n, &buf)
                    .iter()
                    .all(|&x| u.contains(x))
            });
            if !premises_hold {
                continue;
            }
            let goal = program.root_values(premise_count, n, &buf);
            if let Some(w) = goal.iter().position(|&x| !u.contains(x)) {
                return Ok(Some((build_model(frame, program, assign, u), w)));
            }
        }
    }
    Ok(None)
}

/// Looks for a model where every premise is valid and the goal is not.
///
/// Frames are tried by world count, then canonical frame index; within a
/// frame, valuations in odometer order, then ultrafilters in the given
/// order. The reported model is the first one in that order even though
/// frames are searched in parallel.
pub fn countermodel_search(
    premises: &[Formula],
    goal: &Formula,
    max_worlds: usize,
    filters: &[Ultrafilter],
    limits: &Limits,
) -> Result<SearchOutcome, KripkeError> {
    countermodel_search_in(premises, goal, max_worlds, filters, limits, |_| true)
}

/// [`countermodel_search`] restricted to frames accepted by `class`.
/// `frames_checked` still counts every enumerated frame.
pub fn countermodel_search_in(
    premises: &[Formula],
    goal: &Formula,
    max_worlds: usize,
    filters: &[Ultrafilter],
    limits: &Limits,
    class: impl Fn(&Frame) -> bool + Sync,
) -> Result<SearchOutcome, KripkeError> {
    assert!(max_worlds >= 1, "max_worlds must be positive");
    if max_worlds * max_worlds >= 64 {
        return Err(KripkeError::ResourceBound(format!(
            "frame enumeration beyond 7 worlds (asked for {max_worlds})"
        )));
    }
    let formulas: Vec<&Formula> = premises.iter().chain(std::iter::once(goal)).collect();
    let program = Program::new(&formulas);
    let total_frames: u64 = (1..=max_worlds).map(Frame::count).sum();
    if total_frames > limits.max_frames {
        return Err(KripkeError::ResourceBound(format!(
            "{total_frames} frames exceed the cap of {}",
            limits.max_frames
        )));
    }
    check_valuation_cap(
        &Frame::from_index(max_worlds, 0),
        program.vars().len(),
        limits,
    )?;
    let mut frames_checked = 0;
    for n in 1..=max_worlds {
        let found = (0..Frame::count(n))
            .into_par_iter()
            .map(|index| {
                let frame = Frame::from_index(n, index);
                if !class(&frame) {
                    return Ok(None);
                }
                search_frame(&frame, &program, premises.len(), filters, limits)
            })
            .find_map_first(|r| match r {
                Ok(None) => None,
                other => Some(other),
            });
        match found {
            Some(Ok(Some((model, world)))) => return Ok(SearchOutcome::Found { model, world }),
            Some(Err(e)) => return Err(e),
            _ => frames_checked += Frame::count(n),
        }
    }
    Ok(SearchOutcome::NoneUpToBound {
        max_worlds,
        frames_checked,
    })
}

/// Textbook two-valued Kripke evaluation, kept apart from [`Model::eval`] so
/// it can serve as an independent reference.
pub fn classical_reference_eval(
    frame: &Frame,
    valuation: &BTreeMap<String, Vec<bool>>,
    w: usize,
    f: &Formula,
) -> Result<bool, KripkeError> {
    if w >= frame.len() {
        return Err(KripkeError::UnknownWorld(format!("#{w}")));
    }
    Ok(match f {
        Formula::Var(name) => {
            let values = valuation
                .get(name)
                .ok_or_else(|| KripkeError::UnknownVariable(name.clone()))?;
            *values
                .get(w)
                .ok_or_else(|| KripkeError::UnknownVariable(format!("{name} at world #{w}")))?
        }
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Not(g) => !classical_reference_eval(frame, valuation, w, g)?,
        Formula::And(g, h) => {
            let a = classical_reference_eval(frame, valuation, w, g)?;
            let b = classical_reference_eval(frame, valuation, w, h)?;
            a && b
        }
        Formula::Or(g, h) => {
            let a = classical_reference_eval(frame, valuation, w, g)?;
            let b = classical_reference_eval(frame, valuation, w, h)?;
            a || b
        }
        Formula::Box(g) => {
            let mut all = true;
            for u in frame.successors(w) {
                all &= classical_reference_eval(frame, valuation, u, g)?;
            }
            all
        }
        Formula::Diamond(g) => {
            let mut any = false;
            for u in frame.successors(w) {
                any |= classical_reference_eval(frame, valuation, u, g)?;
            }
            any
        }
        Formula::Ball(_) | Formula::BoxSame(_) | Formula::BoxDiff(_) => {
            return Err(KripkeError::OutOfFragment(f.clone()))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use Element8 as E;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn model(frame: Frame, p: &[E]) -> Model {
        let mut valuation = BTreeMap::new();
        valuation.insert("p".to_string(), p.to_vec());
        Model::new(frame, valuation, Ultrafilter::E1).unwrap()
    }

    /// w in B sees u in A; p is 1 at w and e1 at u.
    fn non_normality_model() -> Model {
        let frame = Frame::new(
            vec!["w".into(), "u".into()],
            vec![LatticeId::B, LatticeId::A],
            &[(0, 1)],
        )
        .unwrap();
        model(frame, &[E::ONE, E::E1])
    }

    #[test]
    fn dead_end_box_is_top() {
        let frame = Frame::with_default_names(vec![LatticeId::C], &[]).unwrap();
        let m = model(frame, &[E::ZERO]);
        assert_eq!(m.eval(0, &f("[]p")).unwrap(), E::ONE);
        assert_eq!(m.eval(0, &f("[=]p")).unwrap(), E::ONE);
        assert_eq!(m.eval(0, &f("[-]p")).unwrap(), E::ONE);
        assert_eq!(m.eval(0, &f("<>p")).unwrap(), E::ZERO);
    }

    #[test]
    fn non_normality_witness() {
        let m = non_normality_model();
        assert_eq!(m.eval(0, &f("[]p")).unwrap(), E::ZERO);
        assert!(m.model_valid(&f("p")).unwrap());
        assert!(!m.model_valid(&f("[]p")).unwrap());
        assert_eq!(m.failing_world(&f("[]p")).unwrap(), Some(0));
        assert!(m.model_valid(&Formula::Top).unwrap());
    }

    #[test]
    fn euclidean_countermodel_values() {
        let all: Vec<(usize, usize)> = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).collect();
        let frame = Frame::new(
            vec!["w".into(), "u".into(), "u2".into()],
            vec![LatticeId::B, LatticeId::B, LatticeId::A],
            &all,
        )
        .unwrap();
        let m = model(frame, &[E::ZERO, E::ZERO, E::E1]);
        assert_eq!(m.eval(0, &f("<>p")).unwrap(), E::E13);
        assert!(m.satisfies(0, &f("<>p")).unwrap());
        assert_eq!(m.eval(0, &f("[]<>p")).unwrap(), E::ZERO);
        assert!(!m.satisfies(0, &f("<>p -> []<>p")).unwrap());
    }

    #[test]
    fn satisfaction_by_value() {
        let frame = Frame::with_default_names(vec![LatticeId::B], &[]).unwrap();
        for (value, expected) in [
            (E::ONE, true),
            (E::E13, true),
            (E::E2, false),
            (E::ZERO, false),
        ] {
            assert_eq!(
                model(frame.clone(), &[value])
                    .satisfies(0, &f("p"))
                    .unwrap(),
                expected
            );
        }
    }

    #[test]
    fn frame_validity_small_cases() {
        let limits = Limits::default();
        let reflexive = Frame::with_default_names(vec![LatticeId::B], &[(0, 0)]).unwrap();
        assert!(
            frame_valid(&reflexive, &f("[]p -> p"), Ultrafilter::E1, &limits)
                .unwrap()
                .valid
        );
        let dead = Frame::with_default_names(vec![LatticeId::B], &[]).unwrap();
        let r = frame_valid(&dead, &f("[]p -> p"), Ultrafilter::E1, &limits).unwrap();
        assert!(!r.valid);
        let (cm, w) = r.countermodel.unwrap();
        assert_eq!((cm.value(0, "p"), w), (Some(E::ZERO), 0));
    }

    #[test]
    fn valuation_cap_is_enforced() {
        let frame = Frame::with_default_names(vec![LatticeId::A; 3], &[]).unwrap();
        let limits = Limits {
            max_valuations: 10,
            ..Limits::default()
        };
        let err = frame_valid(&frame, &f("p"), Ultrafilter::E1, &limits).unwrap_err();
        assert!(matches!(err, KripkeError::ResourceBound(_)));
    }

    #[test]
    fn rejects_bad_models() {
        let frame = Frame::with_default_names(vec![LatticeId::A], &[]).unwrap();
        let mut valuation = BTreeMap::new();
        valuation.insert("p".to_string(), vec![E::E2]);
        assert!(matches!(
            Model::new(frame.clone(), valuation, Ultrafilter::E1),
            Err(KripkeError::NotInCarrier { .. })
        ));
        let m = model(frame, &[E::ONE]);
        assert!(matches!(
            m.eval(0, &f("q")),
            Err(KripkeError::UnknownVariable(_))
        ));
        assert_eq!(
            m.clone().with_default_zero(true).eval(0, &f("q")).unwrap(),
            E::ZERO
        );
        assert!(matches!(
            m.eval(3, &f("p")),
            Err(KripkeError::UnknownWorld(_))
        ));
        assert!(Frame::new(vec![], vec![], &[]).is_err());
        assert!(Frame::new(vec!["a".into(), "a".into()], vec![LatticeId::A; 2], &[]).is_err());
    }

    #[test]
    fn frame_index_round_trip() {
        for n in 1..=2 {
            for index in 0..Frame::count(n) {
                assert_eq!(Frame::from_index(n, index).index(), index);
            }
        }
        let frame = Frame::from_index(2, 0b0010 * 9 + 5);
        assert!(frame.has_edge(0, 1));
        assert_eq!(frame.edges().count(), 1);
        assert_eq!(frame.lattices(), &[LatticeId::B, LatticeId::C]);
    }

    #[test]
    fn classical_dead_end() {
        let frame = Frame::with_default_names(vec![LatticeId::A], &[]).unwrap();
        let mut val = BTreeMap::new();
        val.insert("p".to_string(), vec![false]);
        assert!(classical_reference_eval(&frame, &val, 0, &f("[]p")).unwrap());
        assert!(!classical_reference_eval(&frame, &val, 0, &f("<>p")).unwrap());
        assert!(matches!(
            classical_reference_eval(&frame, &val, 0, &f("@p")),
            Err(KripkeError::OutOfFragment(_))
        ));
    }

    #[test]
    fn document_round_trip() {
        let m = non_normality_model();
        let doc = m.to_document();
        let json = serde_json::to_string(&doc).unwrap();
        let back: ModelDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_model().unwrap(), m);
        let raw = r#"{"worlds":["w"],"lattices":{"w":"A"},"edges":[["w","w"]]}"#;
        let doc: ModelDocument = serde_json::from_str(raw).unwrap();
        let frame = doc.to_frame().unwrap();
        assert!(frame.has_edge(0, 0));
        let bad = r#"{"worlds":["w"],"lattices":{"w":"A"},"edges":[["w","x"]]}"#;
        let doc: ModelDocument = serde_json::from_str(bad).unwrap();
        assert!(matches!(doc.to_frame(), Err(KripkeError::UnknownWorld(_))));
    }
}
