//! Exact supercommutative polynomial arithmetic.
//!
//! Variables carry a parity, a class (base coordinate, fiber coordinate or
//! formal parameter) and, for parameters, a nilpotency order. Monomials are
//! kept in sign-normal form: factors sorted by the global variable order,
//! odd variables with exponent one. Every product re-normalizes and picks up
//! the Koszul sign of the sorting permutation restricted to odd factors.

mod monomial;
mod poly;
mod text;

use std::fmt;
use std::ops::Add;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

pub use monomial::Monomial;
pub use poly::{Rational, SuperPoly};
pub use text::{format_rational, parse_poly, ParseError, Scope};

/// Z/2 grading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(bit: u32) -> Self {
        if bit % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn flip(self) -> Self {
        self + Parity::Odd
    }
}

impl Add for Parity {
    type Output = Parity;

    fn add(self, rhs: Parity) -> Parity {
        Parity::from_bit(self.bit() ^ rhs.bit())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => f.write_str("even"),
            Parity::Odd => f.write_str("odd"),
        }
    }
}

/// `(-1)^bits` as a sign flag: `true` means negative.
pub(crate) fn sign_of(bits: u32) -> bool {
    bits % 2 == 1
}

/// Role a variable plays; also the primary key of the global variable order,
/// so parameters always print first inside a monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarClass {
    Parameter,
    Base,
    Fiber,
}

static NAMES: RwLock<Vec<Arc<str>>> = RwLock::new(Vec::new());

/// A ring generator.
///
/// Identity and order are given by `(class, id)`; ids are handed out in
/// creation order from an append-only symbol table, so the relative order of
/// variables created by one computation never depends on thread scheduling.
#[derive(Clone, Copy, Debug)]
pub struct Var {
    id: u32,
    parity: Parity,
    class: VarClass,
    /// `v^nil = 0`; zero means unbounded.
    nil: u32,
}

impl Var {
    fn alloc(name: &str, parity: Parity, class: VarClass, nil: u32) -> Var {
        let mut names = NAMES.write().expect("symbol table poisoned");
        let id = u32::try_from(names.len()).expect("symbol table overflow");
        names.push(Arc::from(name));
        let nil = if parity.is_odd() { 2 } else { nil };
        Var { id, parity, class, nil }
    }

    /// A base (manifold) coordinate.
    pub fn base(name: &str, parity: Parity) -> Var {
        Var::alloc(name, parity, VarClass::Base, 0)
    }

    /// A fiber coordinate (momentum or antimomentum).
    pub fn fiber(name: &str, parity: Parity) -> Var {
        Var::alloc(name, parity, VarClass::Fiber, 0)
    }

    /// A formal parameter with `v^order = 0`; `None` leaves it unbounded.
    /// Odd parameters always square to zero.
    pub fn parameter(name: &str, parity: Parity, order: Option<u32>) -> Var {
        if let Some(k) = order {
            assert!(k > 0, "nilpotency order must be positive");
        }
        Var::alloc(name, parity, VarClass::Parameter, order.unwrap_or(0))
    }

    pub fn id(self) -> u32 {
        self.id
    }

    pub fn parity(self) -> Parity {
        self.parity
    }

    pub fn class(self) -> VarClass {
        self.class
    }

    /// Nilpotency order, if bounded.
    pub fn nilpotency(self) -> Option<u32> {
        (self.nil > 0).then_some(self.nil)
    }

    pub fn name(self) -> Arc<str> {
        NAMES.read().expect("symbol table poisoned")[self.id as usize].clone()
    }

    /// Whether `v^exp` vanishes identically.
    pub(crate) fn kills(self, exp: u32) -> bool {
        self.nil > 0 && exp >= self.nil
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Var {}

impl std::hash::Hash for Var {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.class, self.id).cmp(&(other.class, other.id))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Per-class degree caps. Parameters are additionally bounded by their own
/// nilpotency, which every product enforces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub base: Option<u32>,
    pub fiber: Option<u32>,
    pub parameter: Option<u32>,
}

impl Caps {
    pub const NONE: Caps = Caps { base: None, fiber: None, parameter: None };

    pub fn fiber(d: u32) -> Caps {
        Caps { fiber: Some(d), ..Caps::NONE }
    }

    pub fn with_base(self, d: u32) -> Caps {
        Caps { base: Some(d), ..self }
    }

    pub fn with_fiber(self, d: u32) -> Caps {
        Caps { fiber: Some(d), ..self }
    }

    pub fn is_none(&self) -> bool {
        *self == Caps::NONE
    }

    pub(crate) fn admits(&self, m: &Monomial) -> bool {
        let ok = |cap: Option<u32>, class| cap.is_none_or(|c| m.class_degree(class) <= c);
        ok(self.base, VarClass::Base)
            && ok(self.fiber, VarClass::Fiber)
            && ok(self.parameter, VarClass::Parameter)
    }
}
