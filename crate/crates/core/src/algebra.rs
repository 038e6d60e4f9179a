//! The eight-element Boolean algebra with the ball operator, its three
//! four-element subalgebras, principal ultrafilters, and the down/up
//! interpretations that move values between subalgebras.
//!
//! An [`Element8`] is a subset of the three atoms `e1`, `e2`, `e3`, stored as
//! a 3-bit mask. Every operation is a bitwise one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("unknown element name `{0}` (expected 0, 1, e1, e2, e3, e12, e13 or e23)")]
    Element(String),
    #[error("unknown lattice name `{0}` (expected A, B or C)")]
    Lattice(String),
    #[error("unknown ultrafilter `{0}` (expected e1, e2 or e3)")]
    Ultrafilter(String),
}

/// A value of the eight-element Boolean algebra, as the set of atoms below it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Element8(u8);

impl Element8 {
    pub const ZERO: Self = Self(0b000);
    pub const E1: Self = Self(0b001);
    pub const E2: Self = Self(0b010);
    pub const E3: Self = Self(0b100);
    pub const E12: Self = Self(0b011);
    pub const E13: Self = Self(0b101);
    pub const E23: Self = Self(0b110);
    pub const ONE: Self = Self(0b111);

    /// All eight values in bit order.
    pub const ALL: [Self; 8] = [
        Self::ZERO,
        Self::E1,
        Self::E2,
        Self::E12,
        Self::E3,
        Self::E13,
        Self::E23,
        Self::ONE,
    ];

    pub const fn from_bits(bits: u8) -> Option<Self> {
        if bits <= 0b111 {
            Some(Self(bits))
        } else {
            None
        }
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub const fn meet(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    pub const fn join(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub const fn complement(self) -> Self {
        Self(!self.0 & 0b111)
    }

    /// The ball operator: top and bottom go to 1, every other value to 0.
    pub const fn ball(self) -> Self {
        if self.0 == 0 || self.0 == 0b111 {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    /// Lattice order: `self ≤ other`.
    pub const fn leq(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn is_top(self) -> bool {
        self.0 == 0b111
    }

    pub const fn is_bottom(self) -> bool {
        self.0 == 0
    }

    pub const fn is_atom(self) -> bool {
        self.0.count_ones() == 1
    }

    pub const fn name(self) -> &'static str {
        match self.0 {
            0b000 => "0",
            0b001 => "e1",
            0b010 => "e2",
            0b100 => "e3",
            0b011 => "e12",
            0b101 => "e13",
            0b110 => "e23",
            _ => "1",
        }
    }
}

impl fmt::Debug for Element8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Element8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Element8 {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Element8::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| NameError::Element(s.to_string()))
    }
}

impl TryFrom<String> for Element8 {
    type Error = NameError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Element8> for String {
    fn from(x: Element8) -> Self {
        x.name().to_string()
    }
}

pub fn meet(x: Element8, y: Element8) -> Element8 {
    x.meet(y)
}

pub fn join(x: Element8, y: Element8) -> Element8 {
    x.join(y)
}

pub fn complement(x: Element8) -> Element8 {
    x.complement()
}

pub fn ball(x: Element8) -> Element8 {
    x.ball()
}

/// One of the three four-element subalgebras `{0, x, -x, 1}`.
///
/// `A` holds the middle pair containing `e1`, `B` the one containing `e2`
/// and `C` the one containing `e3`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub enum LatticeId {
    #[default]
    A,
    B,
    C,
}

impl LatticeId {
    pub const ALL: [Self; 3] = [Self::A, Self::B, Self::C];

    /// The atom in this subalgebra's middle pair.
    pub const fn atom(self) -> Element8 {
        match self {
            Self::A => Element8::E1,
            Self::B => Element8::E2,
            Self::C => Element8::E3,
        }
    }

    /// The coatom in this subalgebra's middle pair.
    pub const fn coatom(self) -> Element8 {
        self.atom().complement()
    }

    /// The carrier in canonical order `[0, atom, coatom, 1]`.
    ///
    /// Valuations are enumerated in this order everywhere.
    pub const fn carrier(self) -> [Element8; 4] {
        [Element8::ZERO, self.atom(), self.coatom(), Element8::ONE]
    }

    pub fn contains(self, x: Element8) -> bool {
        x.is_top() || x.is_bottom() || x == self.atom() || x == self.coatom()
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub const fn name(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::C => "C",
        }
    }
}

impl fmt::Display for LatticeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeId {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" => Ok(Self::A),
            "B" => Ok(Self::B),
            "C" => Ok(Self::C),
            _ => Err(NameError::Lattice(s.to_string())),
        }
    }
}

pub fn carrier(lattice: LatticeId) -> [Element8; 4] {
    lattice.carrier()
}

/// A principal ultrafilter, named by its generating atom.
///
/// Every ultrafilter of a finite Boolean algebra is principal, so these
/// three are all of them.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(try_from = "String", into = "String")]
pub enum Ultrafilter {
    #[default]
    E1,
    E2,
    E3,
}

impl Ultrafilter {
    pub const ALL: [Self; 3] = [Self::E1, Self::E2, Self::E3];

    pub const fn generator(self) -> Element8 {
        match self {
            Self::E1 => Element8::E1,
            Self::E2 => Element8::E2,
            Self::E3 => Element8::E3,
        }
    }

    pub const fn contains(self, x: Element8) -> bool {
        self.generator().leq(x)
    }

    pub fn members(self) -> impl Iterator<Item = Element8> {
        Element8::ALL.into_iter().filter(move |&x| self.contains(x))
    }

    pub const fn name(self) -> &'static str {
        self.generator().name()
    }
}

impl fmt::Display for Ultrafilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ultrafilter {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e1" => Ok(Self::E1),
            "e2" => Ok(Self::E2),
            "e3" => Ok(Self::E3),
            _ => Err(NameError::Ultrafilter(s.to_string())),
        }
    }
}

impl TryFrom<String> for Ultrafilter {
    type Error = NameError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Ultrafilter> for String {
    fn from(u: Ultrafilter) -> Self {
        u.name().to_string()
    }
}

pub fn is_designated(x: Element8, u: Ultrafilter) -> bool {
    u.contains(x)
}

/// Largest element of `lattice` below `x`: the join, inside the carrier, of
/// every carrier element `y ≤ x`. An empty candidate set falls back to the
/// least element.
pub fn down_interp(x: Element8, lattice: LatticeId) -> Element8 {
    lattice
        .carrier()
        .into_iter()
        .filter(|y| y.leq(x))
        .reduce(Element8::join)
        .unwrap_or(Element8::ZERO)
}

/// Smallest element of `lattice` above `x`, the order dual of
/// [`down_interp`]. An empty candidate set falls back to the greatest element.
pub fn up_interp(x: Element8, lattice: LatticeId) -> Element8 {
    lattice
        .carrier()
        .into_iter()
        .filter(|y| x.leq(*y))
        .reduce(Element8::meet)
        .unwrap_or(Element8::ONE)
}

/// The designated non-top element of `lattice` under `u`.
pub fn z_of(lattice: LatticeId, u: Ultrafilter) -> Element8 {
    if u.contains(lattice.atom()) {
        lattice.atom()
    } else {
        lattice.coatom()
    }
}
