//! Relations between phase charts given by generating functions, and the
//! nonlinear pullbacks they induce on functions.
//!
//! An even-kind relation from `M1` to `M2` is a function `S(x, q)` of the
//! source coordinates and the target momenta. It cuts out
//!
//! ```text
//! p_a = ∂S/∂x^a,   y^i = (-1)^ĩ ∂S/∂q_i
//! ```
//!
//! and pulls an even function `g(y)` back to `f(x) = S(x,q) - y^i q_i + g(y)`
//! with `q_i = ∂g/∂y^i`. The odd kind uses an odd `Σ(x, y*)` on the
//! anticotangent bundles, `y^i = ∂Σ/∂y*_i`, and odd functions. All
//! derivatives are left derivatives.

mod compose;
mod coords;
mod pullback;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FiberKind, PhaseChart};
use crate::superalg::{Caps, Parity, SuperPoly, Var, VarClass};
#[cfg(test)]
use crate::superalg::Rational;

pub use compose::compose;
pub use coords::{base_change_source, change_target_coords, change_target_coords_legendre};
pub use pullback::{pullback, pullback_graded, solve_target_map, tangent_pullback, PullbackResult, TangentPullback};

/// Parity type of a generating function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Even function on cotangent bundles.
    Even,
    /// Odd function on anticotangent bundles.
    Odd,
}

impl Kind {
    pub fn fiber_kind(self) -> FiberKind {
        match self {
            Kind::Even => FiberKind::Cotangent,
            Kind::Odd => FiberKind::Anticotangent,
        }
    }

    pub fn of_fibers(kind: FiberKind) -> Kind {
        match kind {
            FiberKind::Cotangent => Kind::Even,
            FiberKind::Anticotangent => Kind::Odd,
        }
    }

    /// Parity of the generating function and of the functions it pulls back.
    pub fn parity(self) -> Parity {
        match self {
            Kind::Even => Parity::Even,
            Kind::Odd => Parity::Odd,
        }
    }
}

/// The generating function of a relation together with its fiber variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingFunction {
    kind: Kind,
    fibers: Vec<Var>,
    body: SuperPoly,
    caps: Caps,
}

impl GeneratingFunction {
    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn body(&self) -> &SuperPoly {
        &self.body
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    /// Fiber-degree-zero part.
    pub fn shift(&self) -> SuperPoly {
        self.body.restrict_zero(&self.fibers)
    }

    /// Sign in front of `∂S/∂q_i` in the equation for `y^i`.
    fn target_sign(&self, i: usize) -> bool {
        self.kind == Kind::Even && self.fibers[i].parity().is_odd()
    }

    /// `y^i` as a function of source coordinates and target fibers.
    pub fn target_coordinate(&self, i: usize) -> SuperPoly {
        let d = self.body.left_derivative(self.fibers[i]);
        if self.target_sign(i) {
            -d
        } else {
            d
        }
    }

    /// The underlying map `φ^i(x)`: the target equation at zero fibers.
    pub fn map_component(&self, i: usize) -> SuperPoly {
        self.target_coordinate(i).restrict_zero(&self.fibers)
    }

    /// Symmetric coefficient `S^{i₁…i_r}(x)`, normalized so that
    ///
    /// ```text
    /// S = Σ_r 1/r! S^{i₁…i_r} q_{i_r} ⋯ q_{i₁}
    /// ```
    ///
    /// It is the iterated right derivative `∂_{i_r} ⋯ ∂_{i₁} S` at zero fibers.
    pub fn coefficient(&self, indices: &[usize]) -> SuperPoly {
        let mut d = self.body.clone();
        for &i in indices {
            d = d.right_derivative(self.fibers[i]);
        }
        d.restrict_zero(&self.fibers)
    }
}

/// A relation between the phase charts of two spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MicroRelation {
    source: PhaseChart,
    target: PhaseChart,
    gf: GeneratingFunction,
}

impl MicroRelation {
    /// Validates charts and parity and truncates `body` to `caps`.
    pub fn new(source: &PhaseChart, target: &PhaseChart, kind: Kind, body: SuperPoly, caps: Caps) -> Result<MicroRelation> {
        for (pc, side) in [(source, "source"), (target, "target")] {
            if pc.kind() != kind.fiber_kind() {
                return Err(Error::Chart(format!(
                    "{side} phase chart over {} is {:?}, but a {:?}-kind relation needs {:?}",
                    pc.base().name(),
                    pc.kind(),
                    kind,
                    kind.fiber_kind()
                )));
            }
        }
        for v in body.vars() {
            let ok = match v.class() {
                VarClass::Base => source.base().contains(v),
                VarClass::Fiber => target.fibers().contains(&v),
                VarClass::Parameter => true,
            };
            if !ok {
                return Err(Error::Chart(format!(
                    "generating function uses {v}, which is neither a source coordinate nor a target fiber"
                )));
            }
        }
        if !body.has_parity(kind.parity()) {
            return Err(Error::Parity(format!(
                "generating function of a {} relation must be {}, got {}",
                kind.parity(),
                kind.parity(),
                body
            )));
        }
        let gf = GeneratingFunction {
            kind,
            fibers: target.fibers().to_vec(),
            body: body.truncate(&caps),
            caps,
        };
        Ok(MicroRelation { source: source.clone(), target: target.clone(), gf })
    }

    pub fn source(&self) -> &PhaseChart {
        &self.source
    }

    pub fn target(&self) -> &PhaseChart {
        &self.target
    }

    pub fn kind(&self) -> Kind {
        self.gf.kind
    }

    pub fn generating_function(&self) -> &GeneratingFunction {
        &self.gf
    }

    pub fn body(&self) -> &SuperPoly {
        &self.gf.body
    }

    pub fn caps(&self) -> Caps {
        self.gf.caps
    }

    pub fn shift(&self) -> SuperPoly {
        self.gf.shift()
    }

    /// The underlying map `φ`, one component per target coordinate.
    pub fn map(&self) -> Vec<SuperPoly> {
        (0..self.target.base().len()).map(|i| self.gf.map_component(i)).collect()
    }

    pub fn coefficient(&self, indices: &[usize]) -> SuperPoly {
        self.gf.coefficient(indices)
    }

    /// `y^i(x, q)` for every target coordinate.
    pub fn target_coordinates(&self) -> Vec<SuperPoly> {
        (0..self.target.base().len()).map(|i| self.gf.target_coordinate(i)).collect()
    }

    /// `p_a(x, q) = ∂S/∂x^a` for every source coordinate.
    pub fn source_momenta(&self) -> Vec<SuperPoly> {
        self.source.base().vars().iter().map(|&x| self.gf.body.left_derivative(x)).collect()
    }

    /// Whether the generating function is at most linear in the fibers.
    pub fn is_fiber_linear(&self) -> bool {
        self.gf.body.max_class_degree(VarClass::Fiber) <= 1
    }

    /// Same relation with different caps.
    pub fn with_caps(&self, caps: Caps) -> MicroRelation {
        let mut out = self.clone();
        out.gf.body = out.gf.body.truncate(&caps);
        out.gf.caps = caps;
        out
    }

    /// Checks that `g` is a function on the target of the right parity.
    pub(crate) fn check_target_function(&self, g: &SuperPoly, what: &str) -> Result<()> {
        self.target.base().check_function(g, what)?;
        let want = self.kind().parity();
        if !g.has_parity(want) {
            let offending = g.parity_part(want.flip());
            return Err(Error::Parity(format!(
                "{what} must be {want} for a {want}-kind relation; offending part {offending}"
            )));
        }
        Ok(())
    }
}

/// The relation of a map `φ` shifted by `S₀`: `S = S₀ + φ^i(x)·q_i`.
pub fn relation_from_map(
    source: &PhaseChart,
    target: &PhaseChart,
    map: &[SuperPoly],
    shift: &SuperPoly,
    kind: Kind,
) -> Result<MicroRelation> {
    let ys = target.base().vars();
    if map.len() != ys.len() {
        return Err(Error::Chart(format!(
            "map has {} components but the target has {} coordinates",
            map.len(),
            ys.len()
        )));
    }
    source.base().check_function(shift, "shift")?;
    if !shift.has_parity(kind.parity()) {
        return Err(Error::Parity(format!("shift must be {}, got {}", kind.parity(), shift)));
    }
    let mut body = shift.clone();
    for (i, (phi, &y)) in map.iter().zip(ys).enumerate() {
        source.base().check_function(phi, &format!("map component {i}"))?;
        if !phi.has_parity(y.parity()) {
            return Err(Error::Parity(format!(
                "map component for {y} must be {}, got {}",
                y.parity(),
                phi
            )));
        }
        body += phi * &SuperPoly::var(target.fiber(i));
    }
    MicroRelation::new(source, target, kind, body, Caps::NONE)
}

/// The identity relation of a phase chart.
pub fn identity_relation(chart: &PhaseChart) -> MicroRelation {
    let map: Vec<SuperPoly> = chart.base().vars().iter().map(|&v| SuperPoly::var(v)).collect();
    relation_from_map(chart, chart, &map, &SuperPoly::zero(), Kind::of_fibers(chart.kind()))
        .expect("identity map is well formed")
}

/// Equality of two functions, optionally ignoring additive constants.
pub fn equal_up_to(a: &SuperPoly, b: &SuperPoly, modulo_constants: bool) -> bool {
    if modulo_constants {
        let d = a - b;
        d.is_constant()
    } else {
        a == b
    }
}

pub(crate) fn binding_map(vars: &[Var], values: &[SuperPoly]) -> HashMap<Var, SuperPoly> {
    vars.iter().copied().zip(values.iter().cloned()).collect()
}

/// `1/r!` as a rational.
#[cfg(test)]
fn inverse_factorial(r: usize) -> Rational {
    let mut f = Rational::from_integer(1.into());
    for k in 2..=r {
        f /= Rational::from_integer(k.into());
    }
    f
}
