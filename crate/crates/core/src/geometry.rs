//! Charts, phase charts and formal coordinate changes.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::superalg::{Caps, Monomial, Parity, Rational, Scope, SuperPoly, Var, VarClass};

/// A coordinate system of dimension n|m on one space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    name: Arc<str>,
    vars: Vec<Var>,
}

impl Chart {
    /// Creates fresh base variables with the given names and parities.
    pub fn new(name: &str, coords: &[(&str, Parity)]) -> Result<Chart> {
        let mut seen = HashSet::new();
        for (n, _) in coords {
            if !seen.insert(*n) {
                return Err(Error::Chart(format!("duplicate coordinate `{n}` in chart {name}")));
            }
        }
        let vars = coords.iter().map(|&(n, p)| Var::base(n, p)).collect();
        Ok(Chart { name: Arc::from(name), vars })
    }

    /// Wraps existing base variables.
    pub fn from_vars(name: &str, vars: Vec<Var>) -> Result<Chart> {
        let mut seen = HashSet::new();
        for v in &vars {
            if v.class() != VarClass::Base {
                return Err(Error::Chart(format!("{v} is not a base coordinate")));
            }
            if !seen.insert(*v) {
                return Err(Error::Chart(format!("duplicate coordinate {v} in chart {name}")));
            }
        }
        Ok(Chart { name: Arc::from(name), vars })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn var(&self, i: usize) -> Var {
        self.vars[i]
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// `(even, odd)` counts.
    pub fn dim(&self) -> (usize, usize) {
        let odd = self.vars.iter().filter(|v| v.parity().is_odd()).count();
        (self.vars.len() - odd, odd)
    }

    pub fn position(&self, v: Var) -> Option<usize> {
        self.vars.iter().position(|&w| w == v)
    }

    pub fn contains(&self, v: Var) -> bool {
        self.position(v).is_some()
    }

    pub fn find(&self, name: &str) -> Option<Var> {
        self.vars.iter().copied().find(|v| &*v.name() == name)
    }

    /// Checks that `f` only involves this chart's coordinates and parameters.
    pub fn check_function(&self, f: &SuperPoly, what: &str) -> Result<()> {
        for v in f.vars() {
            if v.class() != VarClass::Parameter && !self.contains(v) {
                return Err(Error::Chart(format!(
                    "{what} uses {v}, which is not a coordinate of chart {}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn scope(&self) -> Scope {
        self.vars.iter().map(|v| (v.name().to_string(), *v)).collect()
    }
}

/// Which bundle a phase chart coordinatizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiberKind {
    /// Momenta with the parity of their base partner.
    Cotangent,
    /// Antimomenta with the opposite parity.
    Anticotangent,
}

impl FiberKind {
    pub fn fiber_parity(self, base: Parity) -> Parity {
        match self {
            FiberKind::Cotangent => base,
            FiberKind::Anticotangent => base.flip(),
        }
    }

    /// Parity shift carried by the fibers: zero or one.
    pub fn shift(self) -> Parity {
        match self {
            FiberKind::Cotangent => Parity::Even,
            FiberKind::Anticotangent => Parity::Odd,
        }
    }
}

/// A chart extended by conjugate fiber coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseChart {
    base: Chart,
    kind: FiberKind,
    fibers: Vec<Var>,
}

impl PhaseChart {
    /// Builds the phase chart with default fiber names `p_<x>` (cotangent)
    /// or `<x>_star` (anticotangent).
    pub fn build(base: &Chart, kind: FiberKind) -> PhaseChart {
        let names: Vec<String> = base
            .vars()
            .iter()
            .map(|v| match kind {
                FiberKind::Cotangent => format!("p_{v}"),
                FiberKind::Anticotangent => format!("{v}_star"),
            })
            .collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        PhaseChart::with_names(base, kind, &refs).expect("one name per coordinate")
    }

    pub fn with_names(base: &Chart, kind: FiberKind, names: &[&str]) -> Result<PhaseChart> {
        if names.len() != base.len() {
            return Err(Error::Chart(format!(
                "chart {} has {} coordinates but {} fiber names were given",
                base.name(),
                base.len(),
                names.len()
            )));
        }
        let fibers = base
            .vars()
            .iter()
            .zip(names)
            .map(|(v, n)| Var::fiber(n, kind.fiber_parity(v.parity())))
            .collect();
        Ok(PhaseChart { base: base.clone(), kind, fibers })
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn kind(&self) -> FiberKind {
        self.kind
    }

    pub fn fibers(&self) -> &[Var] {
        &self.fibers
    }

    pub fn fiber(&self, i: usize) -> Var {
        self.fibers[i]
    }

    pub fn conjugate(&self, v: Var) -> Option<Var> {
        self.base.position(v).map(|i| self.fibers[i])
    }

    pub fn contains(&self, v: Var) -> bool {
        self.base.contains(v) || self.fibers.contains(&v)
    }

    pub fn check_function(&self, f: &SuperPoly, what: &str) -> Result<()> {
        for v in f.vars() {
            if v.class() != VarClass::Parameter && !self.contains(v) {
                return Err(Error::Chart(format!(
                    "{what} uses {v}, which is not a coordinate of the phase chart over {}",
                    self.base.name()
                )));
            }
        }
        Ok(())
    }

    /// Restriction to the zero section.
    pub fn restrict(&self, f: &SuperPoly) -> SuperPoly {
        f.restrict_zero(&self.fibers)
    }

    pub fn scope(&self) -> Scope {
        let mut s = self.base.scope();
        s.extend(self.fibers.iter().map(|v| (v.name().to_string(), *v)));
        s
    }
}

/// A square matrix over the rationals.
pub type Matrix = Vec<Vec<Rational>>;

/// Gauss-Jordan inverse; `None` if singular.
pub fn invert_matrix(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut a: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &factor * p;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn bindings(vars: &[Var], values: &[SuperPoly]) -> HashMap<Var, SuperPoly> {
    vars.iter().copied().zip(values.iter().cloned()).collect()
}

fn apply_matrix(m: &Matrix, v: &[SuperPoly]) -> Vec<SuperPoly> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(c, p)| p.scale(c)).sum())
        .collect()
}

/// Inverts a polynomial map `to[a] = map[a](from)` as a formal series.
///
/// Returns `from[b]` expressed in the `to` variables. Affine maps are
/// inverted exactly; otherwise the map must fix the origin and the result is
/// correct modulo base degree `order + 1`.
pub fn formal_inverse(map: &[SuperPoly], from: &[Var], to: &[Var], order: u32) -> Result<Vec<SuperPoly>> {
    let n = map.len();
    if from.len() != n || to.len() != n {
        return Err(Error::Chart(format!(
            "map has {n} components for {} source and {} target coordinates",
            from.len(),
            to.len()
        )));
    }
    let allowed: HashSet<Var> = from.iter().copied().collect();
    for (a, m) in map.iter().enumerate() {
        if let Some(v) = m.vars().into_iter().find(|v| !allowed.contains(v)) {
            return Err(Error::Chart(format!("component {a} of the map uses {v}")));
        }
        if !m.has_parity(to[a].parity()) {
            return Err(Error::Parity(format!("component for {} must be {}", to[a], to[a].parity())));
        }
    }
    let shift: Vec<SuperPoly> = map.iter().map(|m| SuperPoly::constant(m.constant_term())).collect();
    let linear: Matrix = map
        .iter()
        .map(|m| from.iter().map(|&v| m.coefficient(&Monomial::var(v))).collect())
        .collect();
    let rest: Vec<SuperPoly> = map.iter().map(|m| m.filter(|mono| mono.degree() >= 2)).collect();
    let inv = invert_matrix(&linear).ok_or_else(|| Error::Singular("linear part of the coordinate map".into()))?;
    let target: Vec<SuperPoly> = to
        .iter()
        .zip(&shift)
        .map(|(&v, c)| &SuperPoly::var(v) - c)
        .collect();
    if rest.iter().all(SuperPoly::is_zero) {
        return Ok(apply_matrix(&inv, &target));
    }
    if shift.iter().any(|c| !c.is_zero()) {
        return Err(Error::Unsupported(
            "a nonlinear coordinate map must fix the origin to be inverted as a series".into(),
        ));
    }
    let caps = Caps::NONE.with_base(order);
    let mut g: Vec<SuperPoly> = apply_matrix(&inv, &target).iter().map(|p| p.truncate(&caps)).collect();
    for _ in 0..=order + 1 {
        let b = bindings(from, &g);
        let rhs: Vec<SuperPoly> = target
            .iter()
            .zip(&rest)
            .map(|(t, r)| t - &r.substitute_capped(&b, &caps))
            .collect();
        let next: Vec<SuperPoly> = apply_matrix(&inv, &rhs).iter().map(|p| p.truncate(&caps)).collect();
        if next == g {
            return Ok(g);
        }
        g = next;
    }
    Err(Error::NoConvergence(order as usize + 2))
}

/// A formal change of coordinates `old = forward(new)` on one space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateChange {
    old: Chart,
    new: Chart,
    forward: Vec<SuperPoly>,
    inverse: Vec<SuperPoly>,
    order: u32,
    exact: bool,
}

impl CoordinateChange {
    /// `forward[a]` expresses the `a`-th old coordinate in the new ones.
    pub fn new(old: &Chart, new: &Chart, forward: Vec<SuperPoly>, order: u32) -> Result<CoordinateChange> {
        if old.len() != new.len() {
            return Err(Error::Chart(format!(
                "charts {} and {} have different dimensions",
                old.name(),
                new.name()
            )));
        }
        for (a, (f, v)) in forward.iter().zip(old.vars()).enumerate() {
            new.check_function(f, &format!("component {a} of the coordinate change"))?;
            if f.vars().iter().any(|w| w.class() == VarClass::Parameter) {
                return Err(Error::Chart("coordinate changes may not involve parameters".into()));
            }
            if !f.has_parity(v.parity()) {
                return Err(Error::Parity(format!(
                    "image of {v} must be {} but is {}",
                    v.parity(),
                    f
                )));
            }
        }
        let exact = forward.iter().all(|f| f.terms().all(|(m, _)| m.degree() <= 1));
        let inverse = formal_inverse(&forward, new.vars(), old.vars(), order)?;
        Ok(CoordinateChange { old: old.clone(), new: new.clone(), forward, inverse, order, exact })
    }

    pub fn identity(chart: &Chart) -> CoordinateChange {
        let forward: Vec<SuperPoly> = chart.vars().iter().map(|&v| SuperPoly::var(v)).collect();
        CoordinateChange {
            old: chart.clone(),
            new: chart.clone(),
            inverse: forward.clone(),
            forward,
            order: 0,
            exact: true,
        }
    }

    pub fn old(&self) -> &Chart {
        &self.old
    }

    pub fn new_chart(&self) -> &Chart {
        &self.new
    }

    pub fn forward(&self) -> &[SuperPoly] {
        &self.forward
    }

    /// New coordinates expressed in the old ones.
    pub fn inverse(&self) -> &[SuperPoly] {
        &self.inverse
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Whether the map is affine, so the inverse carries no truncation.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Base-degree caps to apply to anything built from the inverse.
    pub fn caps(&self) -> Caps {
        if self.exact {
            Caps::NONE
        } else {
            Caps::NONE.with_base(self.order)
        }
    }

    /// Bindings `old ↦ forward(new)`.
    pub fn forward_bindings(&self) -> HashMap<Var, SuperPoly> {
        bindings(self.old.vars(), &self.forward)
    }

    /// Bindings `new ↦ inverse(old)`.
    pub fn inverse_bindings(&self) -> HashMap<Var, SuperPoly> {
        bindings(self.new.vars(), &self.inverse)
    }

    /// Expresses a function of the old coordinates in the new ones.
    pub fn pull(&self, f: &SuperPoly) -> SuperPoly {
        f.substitute(&self.forward_bindings())
    }

    /// Expresses a function of the new coordinates in the old ones.
    pub fn push(&self, f: &SuperPoly) -> SuperPoly {
        f.substitute_capped(&self.inverse_bindings(), &self.caps())
    }

    /// Phase-space substitution `x ↦ x(x')`, `p_a ↦ (∂x'^b/∂x^a)(x(x')) p'_b`.
    pub fn induced_momentum_change(&self, old: &PhaseChart, new: &PhaseChart) -> Result<HashMap<Var, SuperPoly>> {
        if old.base() != &self.old || new.base() != &self.new {
            return Err(Error::Chart("phase charts do not match the coordinate change".into()));
        }
        if old.kind() != new.kind() {
            return Err(Error::Chart("phase charts have different fiber kinds".into()));
        }
        let fb = self.forward_bindings();
        let caps = self.caps();
        let mut out = fb.clone();
        for (a, &x) in self.old.vars().iter().enumerate() {
            let mut p = SuperPoly::zero();
            for (b, inv) in self.inverse.iter().enumerate() {
                let jac = inv.left_derivative(x).substitute_capped(&fb, &caps);
                p += jac * SuperPoly::var(new.fiber(b));
            }
            out.insert(old.fiber(a), p);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalg::Parity::{Even, Odd};

    fn v(x: Var) -> SuperPoly {
        SuperPoly::var(x)
    }

    #[test]
    fn fiber_parities() {
        let r = Chart::new("R", &[("x", Even)]).unwrap();
        let t = PhaseChart::build(&r, FiberKind::Cotangent);
        assert_eq!(t.fiber(0).parity(), Even);
        assert_eq!(&*t.fiber(0).name(), "p_x");
        let pi = PhaseChart::build(&r, FiberKind::Anticotangent);
        assert_eq!(pi.fiber(0).parity(), Odd);
        let s = Chart::new("S", &[("ξ", Odd)]).unwrap();
        assert_eq!(PhaseChart::build(&s, FiberKind::Cotangent).fiber(0).parity(), Odd);
    }

    #[test]
    fn duplicate_coordinates_rejected() {
        assert!(Chart::new("R", &[("x", Even), ("x", Odd)]).is_err());
    }

    #[test]
    fn linear_inverse() {
        let old = Chart::new("old", &[("x", Even)]).unwrap();
        let new = Chart::new("new", &[("x'", Even)]).unwrap();
        let cc = CoordinateChange::new(&old, &new, vec![&SuperPoly::integer(2) * &v(new.var(0))], 3).unwrap();
        assert_eq!(cc.inverse()[0], &SuperPoly::ratio(1, 2) * &v(old.var(0)));
        assert!(cc.is_exact());
    }

    #[test]
    fn series_reversion() {
        let x = Var::base("x", Even);
        let xp = Var::base("x'", Even);
        let map = vec![&v(xp) + &v(xp).pow(2)];
        let inv = formal_inverse(&map, &[xp], &[x], 3).unwrap();
        let expected = &(&v(x) - &v(x).pow(2)) + &(&SuperPoly::integer(2) * &v(x).pow(3));
        assert_eq!(inv[0], expected);
        // reverting twice recovers the map
        let back = formal_inverse(&inv, &[x], &[xp], 3).unwrap();
        assert_eq!(back[0], map[0]);
    }

    #[test]
    fn singular_map_rejected() {
        let x = Var::base("x", Even);
        let xp = Var::base("x'", Even);
        let err = formal_inverse(&[v(xp).pow(2)], &[xp], &[x], 3).unwrap_err();
        assert!(matches!(err, Error::Singular(_)));
    }

    #[test]
    fn momenta_transform_by_inverse_transpose() {
        let old = Chart::new("old", &[("y", Even)]).unwrap();
        let new = Chart::new("new", &[("y'", Even)]).unwrap();
        let cc = CoordinateChange::new(&old, &new, vec![&SuperPoly::integer(2) * &v(new.var(0))], 2).unwrap();
        let po = PhaseChart::build(&old, FiberKind::Cotangent);
        let pn = PhaseChart::build(&new, FiberKind::Cotangent);
        let b = cc.induced_momentum_change(&po, &pn).unwrap();
        assert_eq!(b[&po.fiber(0)], &SuperPoly::ratio(1, 2) * &v(pn.fiber(0)));
    }

    #[test]
    fn identity_change_is_trivial() {
        let c = Chart::new("c", &[("x", Even), ("ξ", Odd)]).unwrap();
        let cc = CoordinateChange::identity(&c);
        let t = PhaseChart::build(&c, FiberKind::Anticotangent);
        let b = cc.induced_momentum_change(&t, &t).unwrap();
        for (i, &f) in t.fibers().iter().enumerate() {
            assert_eq!(b[&f], v(f));
            assert_eq!(b[&c.var(i)], v(c.var(i)));
        }
    }
}
