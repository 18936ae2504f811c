use std::collections::BTreeSet;

use super::{binding_map, MicroRelation};
use crate::error::{Error, Result};
use crate::superalg::{Caps, Parity, SuperPoly, Var, VarClass};

/// Hard ceiling on fixed-point iterations when no parameter bounds them.
const MAX_ITERATIONS: usize = 64;

/// Outcome of a nonlinear pullback.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PullbackResult {
    f: SuperPoly,
    target_map: Vec<SuperPoly>,
    epsilon: Option<Var>,
    order: u32,
    iterations: usize,
}

impl PullbackResult {
    /// The pulled-back function.
    pub fn f(&self) -> &SuperPoly {
        &self.f
    }

    /// The `g`-dependent map `φ_g`, one component per target coordinate.
    pub fn target_map(&self) -> &[SuperPoly] {
        &self.target_map
    }

    /// The grading parameter attached to `g`, if the pullback created one.
    pub fn epsilon(&self) -> Option<Var> {
        self.epsilon
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Fixed-point sweeps performed, including the final confirming one.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn graded_part(&self, p: &SuperPoly, r: u32) -> Result<SuperPoly> {
        if r > self.order {
            return Err(Error::Order(format!("requested order {r} exceeds computed order {}", self.order)));
        }
        Ok(match self.epsilon {
            Some(e) => p.param_coefficient(e, r),
            None if r == 0 => p.clone(),
            None => SuperPoly::zero(),
        })
    }

    /// Coefficient of `ε^r` in `f`.
    pub fn expansion_term(&self, r: u32) -> Result<SuperPoly> {
        self.graded_part(&self.f, r)
    }

    /// All coefficients `Φ_0, …, Φ_N`.
    pub fn expansion_terms(&self) -> Vec<SuperPoly> {
        (0..=self.order).map(|r| self.expansion_term(r).expect("in range")).collect()
    }

    /// Per-order corrections of the target map: entry `k` holds the
    /// `ε^k` coefficient of every component.
    pub fn trace(&self) -> Vec<Vec<SuperPoly>> {
        (0..=self.order)
            .map(|k| {
                self.target_map
                    .iter()
                    .map(|y| self.graded_part(y, k).expect("in range"))
                    .collect()
            })
            .collect()
    }

    /// `f` with the grading parameter set to one.
    pub fn value(&self) -> SuperPoly {
        self.expansion_terms().into_iter().sum()
    }
}

/// Number of sweeps that always suffices when every term carries nilpotent
/// parameters: each sweep raises the parameter degree of the error.
fn iteration_budget<'a>(polys: impl IntoIterator<Item = &'a SuperPoly>) -> usize {
    let params: BTreeSet<Var> = polys
        .into_iter()
        .flat_map(|p| p.vars())
        .filter(|v| v.class() == VarClass::Parameter)
        .collect();
    let mut total = 2usize;
    for v in params {
        match v.nilpotency() {
            Some(k) => total += k as usize - 1,
            None => return MAX_ITERATIONS,
        }
    }
    total.min(MAX_ITERATIONS)
}

/// Pullback of a function that already carries its grading parameters.
///
/// Solves `y = φ_g(x)` by iterating `q = ∂g(y)`, `y = ±∂S/∂q(x, q)` from
/// `y = φ(x)` until the iterate is stable.
pub fn pullback_graded(rel: &MicroRelation, g: &SuperPoly) -> Result<PullbackResult> {
    rel.check_target_function(g, "pulled-back function")?;
    let ys = rel.target().base().vars();
    let qs = rel.target().fibers();
    let caps = Caps { base: rel.caps().base, ..Caps::NONE };
    let dg: Vec<SuperPoly> = ys.iter().map(|&y| g.left_derivative(y)).collect();
    let ds = rel.target_coordinates();
    let mut y = rel.map();
    let budget = iteration_budget([g, rel.body()]);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let by = binding_map(ys, &y);
        let q: Vec<SuperPoly> = dg.iter().map(|d| d.substitute_capped(&by, &caps)).collect();
        let bq = binding_map(qs, &q);
        let next: Vec<SuperPoly> = ds.iter().map(|d| d.substitute_capped(&bq, &caps)).collect();
        if next == y {
            let mut f = rel.body().substitute_capped(&bq, &caps);
            for (yi, qi) in y.iter().zip(&q) {
                f -= &yi.mul_capped(qi, &caps);
            }
            f += g.substitute_capped(&by, &caps);
            return Ok(PullbackResult { f, target_map: y, epsilon: None, order: 0, iterations });
        }
        if iterations >= budget {
            return Err(Error::NoConvergence(iterations));
        }
        y = next;
    }
}

fn epsilon(order: u32) -> Var {
    Var::parameter("ε", Parity::Even, Some(order + 1))
}

/// Pullback of `g` graded by a fresh even `ε` with `ε^{order+1} = 0`.
pub fn pullback(rel: &MicroRelation, g: &SuperPoly, order: u32) -> Result<PullbackResult> {
    rel.check_target_function(g, "pulled-back function")?;
    let e = epsilon(order);
    let mut out = pullback_graded(rel, &(&SuperPoly::var(e) * g))?;
    out.epsilon = Some(e);
    out.order = order;
    Ok(out)
}

/// The map `φ_g` for `εg` at the given order.
pub fn solve_target_map(rel: &MicroRelation, g: &SuperPoly, order: u32) -> Result<Vec<SuperPoly>> {
    Ok(pullback(rel, g, order)?.target_map)
}

/// First-order variation of a pullback in the direction `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentPullback {
    /// `δ`-coefficient of `Φ*[εg + δu]`.
    pub derivative: SuperPoly,
    /// `u ∘ φ_g` with the same `ε`.
    pub along_target_map: SuperPoly,
    /// The pullback of `εg` itself.
    pub base: PullbackResult,
}

/// Coefficient of a fresh nilpotent `δ` in `Φ*[εg + δu]`, with the
/// ordinary pullback of `u` along `φ_g` for comparison.
pub fn tangent_pullback(rel: &MicroRelation, g: &SuperPoly, u: &SuperPoly, order: u32) -> Result<TangentPullback> {
    rel.check_target_function(g, "pulled-back function")?;
    rel.target().base().check_function(u, "direction")?;
    let pu = u
        .parity()
        .ok_or_else(|| Error::Parity(format!("direction must be homogeneous, got {u}")))?;
    let e = epsilon(order);
    let delta = Var::parameter("δ", pu + rel.kind().parity(), Some(2));
    let eg = &SuperPoly::var(e) * g;
    let mut base = pullback_graded(rel, &eg)?;
    base.epsilon = Some(e);
    base.order = order;
    let moved = pullback_graded(rel, &(&eg + &(&SuperPoly::var(delta) * u)))?;
    let derivative = moved.f.param_coefficient(delta, 1);
    let along_target_map = u.substitute(&binding_map(rel.target().base().vars(), &base.target_map));
    Ok(TangentPullback { derivative, along_target_map, base })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Chart, FiberKind, PhaseChart};
    use crate::microformal::{relation_from_map, Kind};
    use crate::superalg::Parity::{Even, Odd};

    fn v(x: Var) -> SuperPoly {
        SuperPoly::var(x)
    }

    fn quadratic() -> (MicroRelation, Var, Var) {
        let m1 = Chart::new("M1", &[("x", Even)]).unwrap();
        let m2 = Chart::new("M2", &[("y", Even)]).unwrap();
        let t1 = PhaseChart::build(&m1, FiberKind::Cotangent);
        let t2 = PhaseChart::build(&m2, FiberKind::Cotangent);
        let (x, q) = (v(m1.var(0)), v(t2.fiber(0)));
        let body = &(&x * &q) + &(&SuperPoly::ratio(1, 2) * &q.pow(2));
        let rel = MicroRelation::new(&t1, &t2, Kind::Even, body, Caps::NONE).unwrap();
        (rel, m1.var(0), m2.var(0))
    }

    #[test]
    fn quadratic_pullback() {
        let (rel, x, y) = quadratic();
        let res = pullback(&rel, &v(y).pow(2), 2).unwrap();
        let e = v(res.epsilon().unwrap());
        let x2 = v(x).pow(2);
        assert_eq!(res.f(), &(&(&e * &x2) + &(&(&SuperPoly::integer(2) * &e.pow(2)) * &x2)));
        assert_eq!(res.f().to_string(), "ε*x^2 + 2*ε^2*x^2");
        let phi = &(&v(x) + &(&(&SuperPoly::integer(2) * &e) * &v(x))) + &(&(&SuperPoly::integer(4) * &e.pow(2)) * &v(x));
        assert_eq!(res.target_map()[0], phi);
        assert_eq!(res.expansion_term(2).unwrap(), &SuperPoly::integer(2) * &x2);
        assert!(res.expansion_term(3).is_err());
        assert!(res.iterations() <= 4);
    }

    #[test]
    fn zero_function_gives_shift() {
        let (rel, _, _) = quadratic();
        let res = pullback(&rel, &SuperPoly::zero(), 3).unwrap();
        assert_eq!(res.f(), &rel.shift());
        assert_eq!(res.target_map(), rel.map().as_slice());
    }

    #[test]
    fn parity_checked() {
        let m1 = Chart::new("M1", &[("x", Even), ("ξ", Odd)]).unwrap();
        let t1 = PhaseChart::build(&m1, FiberKind::Cotangent);
        let rel = crate::microformal::identity_relation(&t1);
        let err = pullback(&rel, &v(m1.var(1)), 1).unwrap_err();
        assert!(matches!(err, Error::Parity(_)));
        let other = Var::base("z", Even);
        assert!(matches!(pullback(&rel, &v(other), 1).unwrap_err(), Error::Chart(_)));
    }

    #[test]
    fn linear_relation_is_ordinary_pullback() {
        let m1 = Chart::new("M1", &[("x", Even)]).unwrap();
        let m2 = Chart::new("M2", &[("y", Even)]).unwrap();
        let t1 = PhaseChart::build(&m1, FiberKind::Cotangent);
        let t2 = PhaseChart::build(&m2, FiberKind::Cotangent);
        let x = v(m1.var(0));
        let shift = &SuperPoly::integer(3) * &x;
        let rel = relation_from_map(&t1, &t2, &[x.pow(2)], &shift, Kind::Even).unwrap();
        let g = &v(m2.var(0)).pow(3) + &v(m2.var(0));
        let res = pullback(&rel, &g, 3).unwrap();
        assert_eq!(res.value(), &shift + &(&x.pow(6) + &x.pow(2)));
    }

    #[test]
    fn tangent_of_quadratic() {
        let (rel, _, y) = quadratic();
        let t = tangent_pullback(&rel, &v(y).pow(2), &v(y), 2).unwrap();
        assert_eq!(t.derivative, t.along_target_map);
        assert_eq!(t.derivative, t.base.target_map()[0]);
    }
}
