//! Hamilton-Jacobi shift operators `f ↦ H(x, ∂f/∂x)` and the identities
//! they satisfy: commutators give canonical brackets, and relations
//! intertwine shifts of related Hamiltonians.

use std::collections::HashMap;

use crate::brackets::{canonical_poisson, canonical_schouten, master_defect, Hamiltonian};
use crate::error::{Error, Result};
use crate::geometry::FiberKind;
use crate::microformal::{pullback_graded, MicroRelation};
use crate::superalg::{Caps, Parity, SuperPoly, Var};

/// The shift operator of a Hamiltonian acting on functions on its base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HJField {
    ham: Hamiltonian,
}

impl HJField {
    pub fn new(ham: &Hamiltonian) -> HJField {
        HJField { ham: ham.clone() }
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.ham
    }

    /// `H̃` on a cotangent chart, `H̃ + 1` on an anticotangent chart.
    pub fn parity(&self) -> Parity {
        self.ham.parity() + self.ham.phase().kind().shift()
    }

    /// Parity the argument must have: even on a cotangent chart, odd on an
    /// anticotangent one.
    pub fn argument_parity(&self) -> Parity {
        self.ham.phase().kind().shift()
    }

    /// `H(x, ∂f/∂x)`.
    pub fn apply(&self, f: &SuperPoly) -> Result<SuperPoly> {
        let phase = self.ham.phase();
        phase.base().check_function(f, "shifted function")?;
        let want = self.argument_parity();
        if !f.has_parity(want) {
            return Err(Error::Parity(format!(
                "shift operators on a {:?} chart act on {want} functions; got {f}",
                phase.kind()
            )));
        }
        let b: HashMap<Var, SuperPoly> = phase
            .base()
            .vars()
            .iter()
            .zip(phase.fibers())
            .map(|(&x, &p)| (p, f.left_derivative(x)))
            .collect();
        Ok(self.ham.body().substitute(&b))
    }

    /// `f + ε·H(x, ∂f/∂x)` for a parameter `ε` of the field's parity.
    pub fn shift(&self, f: &SuperPoly, eps: Var) -> Result<SuperPoly> {
        if eps.parity() != self.parity() {
            return Err(Error::Parity(format!(
                "shift parameter {eps} must be {}, like the field",
                self.parity()
            )));
        }
        Ok(f + &(&SuperPoly::var(eps) * &self.apply(f)?))
    }
}

pub fn hj_apply(h: &Hamiltonian, f: &SuperPoly) -> Result<SuperPoly> {
    HJField::new(h).apply(f)
}

pub fn hj_shift(h: &Hamiltonian, f: &SuperPoly, eps: Var) -> Result<SuperPoly> {
    HJField::new(h).shift(f, eps)
}

/// Result of the four-shift commutator computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutatorDefect {
    /// `D` with `f₄ - f₀ = η ε D`.
    pub defect: SuperPoly,
    /// `X_B[f₀]` for the canonical bracket `B` of `H` and `F`: `(H,F)` on a
    /// cotangent chart, `[[H,F]]` on an anticotangent one.
    pub bracket: SuperPoly,
    /// The stated commutator law: `-X_{(H,F)}[f₀]` on a cotangent chart,
    /// `(-1)^H̃ X_{[[H,F]]}[f₀]` on an anticotangent chart.
    pub predicted: SuperPoly,
    /// Part of `f₄ - f₀` not proportional to `ηε`; zero in theory.
    pub remainder: SuperPoly,
}

impl CommutatorDefect {
    /// Whether the stated law holds exactly.
    pub fn holds(&self) -> bool {
        self.defect == self.predicted && self.remainder.is_zero()
    }

    /// Whether `D = -X_B[f₀]` exactly, for either bracket.
    pub fn is_minus_bracket(&self) -> bool {
        self.remainder.is_zero() && (&self.defect + &self.bracket).is_zero()
    }
}

/// Shifts `f₀` along `X_H` by `ε`, then `X_F` by `η`, then back by `-ε`
/// and `-η`, and reads off the `ηε` coefficient.
pub fn hj_commutator_defect(h: &Hamiltonian, f: &Hamiltonian, f0: &SuperPoly) -> Result<CommutatorDefect> {
    if h.phase() != f.phase() {
        return Err(Error::Chart("hamiltonians live on different phase charts".into()));
    }
    let xh = HJField::new(h);
    let xf = HJField::new(f);
    let eps = Var::parameter("ε", xh.parity(), Some(2));
    let eta = Var::parameter("η", xf.parity(), Some(2));
    let (e, n) = (SuperPoly::var(eps), SuperPoly::var(eta));
    let f1 = xh.shift(f0, eps)?;
    let f2 = xf.shift(&f1, eta)?;
    let f3 = &f2 - &(&e * &xh.apply(&f2)?);
    let f4 = &f3 - &(&n * &xf.apply(&f3)?);
    let diff = &f4 - f0;
    let defect = diff.param_coefficient(eta, 1).param_coefficient(eps, 1);
    let remainder = &diff - &(&(&n * &e) * &defect);
    let (bracket, predicted) = match h.phase().kind() {
        FiberKind::Cotangent => {
            let b = hj_apply(&canonical_poisson(h, f)?, f0)?;
            (b.clone(), -b)
        }
        FiberKind::Anticotangent => {
            let b = hj_apply(&canonical_schouten(h, f)?, f0)?;
            let p = if h.parity().is_odd() { -b.clone() } else { b.clone() };
            (b, p)
        }
    };
    Ok(CommutatorDefect { defect, bracket, predicted, remainder })
}

/// The odd shift `f = f₀ + τ Q(x, ∂f₀)` solving `∂f/∂τ = Q(x, ∂f/∂x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OddShift {
    pub f: SuperPoly,
    pub tau: Var,
    /// `∂f/∂τ - Q(x, ∂f/∂x)`.
    pub residual: SuperPoly,
}

pub fn odd_hj_shift_solution(q: &Hamiltonian, f0: &SuperPoly) -> Result<OddShift> {
    if q.phase().kind() != FiberKind::Cotangent || q.parity() != Parity::Odd {
        return Err(Error::Parity("the odd shift needs an odd hamiltonian on a cotangent chart".into()));
    }
    let defect = master_defect(q)?;
    if !defect.body().is_zero() {
        return Err(Error::MasterDefect(defect.body().to_string()));
    }
    let tau = Var::parameter("τ", Parity::Odd, Some(2));
    let f = f0 + &(&SuperPoly::var(tau) * &hj_apply(q, f0)?);
    let residual = &f.left_derivative(tau) - &hj_apply(q, &f)?;
    Ok(OddShift { f, tau, residual })
}

/// `H₁(x, ∂S/∂x) - H₂(y(x,q), q)` truncated at the relation's fiber cap.
pub fn relatedness_defect(rel: &MicroRelation, h1: &Hamiltonian, h2: &Hamiltonian) -> Result<SuperPoly> {
    if h1.phase() != rel.source() {
        return Err(Error::Chart("first hamiltonian must live on the source phase chart".into()));
    }
    if h2.phase() != rel.target() {
        return Err(Error::Chart("second hamiltonian must live on the target phase chart".into()));
    }
    if h1.parity() != h2.parity() {
        return Err(Error::Parity("related hamiltonians must have the same parity".into()));
    }
    let caps = Caps { fiber: rel.caps().fiber, ..Caps::NONE };
    let bp: HashMap<Var, SuperPoly> = rel.source().fibers().iter().copied().zip(rel.source_momenta()).collect();
    let by: HashMap<Var, SuperPoly> = rel.target().base().vars().iter().copied().zip(rel.target_coordinates()).collect();
    Ok(&h1.body().substitute_capped(&bp, &caps) - &h2.body().substitute_capped(&by, &caps))
}

/// `δ`-coefficient of `Φ*[εg + δ X₂[εg]] - Φ*[εg] - δ X₁[Φ*[εg]]`, with
/// `ε^{order+1} = 0`. Fails unless the Hamiltonians are related.
pub fn morphism_defect(rel: &MicroRelation, h1: &Hamiltonian, h2: &Hamiltonian, g: &SuperPoly, order: u32) -> Result<SuperPoly> {
    let rd = relatedness_defect(rel, h1, h2)?;
    if !rd.is_zero() {
        return Err(Error::NotRelated(rd.to_string()));
    }
    let x1 = HJField::new(h1);
    let x2 = HJField::new(h2);
    let eps = Var::parameter("ε", Parity::Even, Some(order + 1));
    let delta = Var::parameter("δ", x2.parity(), Some(2));
    let eg = &SuperPoly::var(eps) * g;
    let moved = pullback_graded(rel, &(&eg + &(&SuperPoly::var(delta) * &x2.apply(&eg)?)))?;
    let base = pullback_graded(rel, &eg)?;
    Ok(&moved.f().param_coefficient(delta, 1) - &x1.apply(base.f())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Chart, PhaseChart};
    use crate::microformal::{relation_from_map, Kind};
    use crate::superalg::Parity::{Even, Odd};

    fn v(x: Var) -> SuperPoly {
        SuperPoly::var(x)
    }

    fn line() -> (Chart, PhaseChart) {
        let m = Chart::new("R", &[("x", Even)]).unwrap();
        let t = PhaseChart::build(&m, FiberKind::Cotangent);
        (m, t)
    }

    #[test]
    fn apply_square_momentum() {
        let (m, t) = line();
        let h = Hamiltonian::new(&t, v(t.fiber(0)).pow(2)).unwrap();
        let out = hj_apply(&h, &v(m.var(0)).pow(3)).unwrap();
        assert_eq!(out, &SuperPoly::integer(9) * &v(m.var(0)).pow(4));
    }

    #[test]
    fn commutator_example() {
        let (m, t) = line();
        let x = v(m.var(0));
        let h = Hamiltonian::new(&t, v(t.fiber(0)).pow(2)).unwrap();
        let f = Hamiltonian::new(&t, x.pow(2)).unwrap();
        let d = hj_commutator_defect(&h, &f, &x.pow(3)).unwrap();
        assert_eq!(d.defect, &SuperPoly::integer(-12) * &x.pow(3));
        assert!(d.holds());
    }

    #[test]
    fn schouten_commutator_on_odd_line() {
        let m = Chart::new("R01", &[("ξ", Odd)]).unwrap();
        let t = PhaseChart::build(&m, FiberKind::Anticotangent);
        let h = Hamiltonian::new(&t, v(t.fiber(0))).unwrap();
        let f = Hamiltonian::new(&t, v(m.var(0))).unwrap();
        let d = hj_commutator_defect(&h, &f, &(&SuperPoly::integer(5) * &v(m.var(0)))).unwrap();
        assert_eq!(d.bracket, SuperPoly::one());
        assert_eq!(d.defect, SuperPoly::integer(-1));
        assert!(d.is_minus_bracket());
    }

    #[test]
    fn odd_shift_of_de_rham_field() {
        let m = Chart::new("R11", &[("x", Even), ("ξ", Odd)]).unwrap();
        let t = PhaseChart::build(&m, FiberKind::Cotangent);
        let q = Hamiltonian::new(&t, &v(m.var(1)) * &v(t.fiber(0))).unwrap();
        let s = odd_hj_shift_solution(&q, &v(m.var(0)).pow(3)).unwrap();
        assert!(s.residual.is_zero());
        let bad = Hamiltonian::new(&t, &(&v(m.var(1)) * &v(t.fiber(0))) + &(&v(m.var(0)) * &v(t.fiber(1)))).unwrap();
        assert!(matches!(odd_hj_shift_solution(&bad, &v(m.var(0))).unwrap_err(), Error::MasterDefect(_)));
    }

    #[test]
    fn linear_map_related_pair() {
        let m1 = Chart::new("M1", &[("x", Even)]).unwrap();
        let m2 = Chart::new("M2", &[("y", Even)]).unwrap();
        let t1 = PhaseChart::build(&m1, FiberKind::Cotangent);
        let t2 = PhaseChart::build(&m2, FiberKind::Cotangent);
        let rel = relation_from_map(&t1, &t2, &[&SuperPoly::integer(2) * &v(m1.var(0))], &SuperPoly::zero(), Kind::Even).unwrap();
        let h2 = Hamiltonian::new(&t2, v(t2.fiber(0)).pow(2)).unwrap();
        let h1 = Hamiltonian::new(&t1, &SuperPoly::ratio(1, 4) * &v(t1.fiber(0)).pow(2)).unwrap();
        assert!(relatedness_defect(&rel, &h1, &h2).unwrap().is_zero());
        let d = morphism_defect(&rel, &h1, &h2, &v(m2.var(0)).pow(2), 2).unwrap();
        assert!(d.is_zero());
        let wrong = Hamiltonian::new(&t1, v(t1.fiber(0)).pow(2)).unwrap();
        assert!(matches!(morphism_defect(&rel, &wrong, &h2, &v(m2.var(0)), 1).unwrap_err(), Error::NotRelated(_)));
    }
}
