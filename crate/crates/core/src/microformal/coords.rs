use num_traits::Zero;

use super::{binding_map, compose, relation_from_map, Kind, MicroRelation};
use crate::error::{Error, Result};
use crate::geometry::{invert_matrix, CoordinateChange, Matrix, PhaseChart};
use crate::superalg::{Monomial, SuperPoly, Var, VarClass};

fn check_new_chart(cc_chart: &crate::geometry::Chart, phase: &PhaseChart, rel: &MicroRelation) -> Result<()> {
    if phase.base() != cc_chart {
        return Err(Error::Chart(format!(
            "phase chart over {} does not match the new chart {}",
            phase.base().name(),
            cc_chart.name()
        )));
    }
    if phase.kind() != rel.kind().fiber_kind() {
        return Err(Error::Chart("new phase chart has the wrong fiber kind".into()));
    }
    Ok(())
}

/// Re-expresses a relation in new target coordinates `y = Y(y')`:
///
/// ```text
/// S'(x, q') = S(x, q) - y^i q_i + y'^{i'}(y) q'_{i'}
/// ```
///
/// eliminated in one pass by composing with the relation of the inverse
/// map. For a non-affine change the inverse is a truncated series; the
/// result is then exact for base degree at most `cc.order() - D`, with `D`
/// the fiber cap of `rel`, and is truncated there. That case needs `φ(0) = 0`.
pub fn change_target_coords(rel: &MicroRelation, cc: &CoordinateChange, new_target: &PhaseChart) -> Result<MicroRelation> {
    if cc.old() != rel.target().base() {
        return Err(Error::Chart(format!(
            "coordinate change acts on {}, not on the target {}",
            cc.old().name(),
            rel.target().base().name()
        )));
    }
    check_new_chart(cc.new_chart(), new_target, rel)?;
    let mut caps = rel.caps();
    if !cc.is_exact() {
        let d = rel.caps().fiber.ok_or_else(|| {
            Error::Unsupported("a nonlinear target change needs a relation with a fiber cap".into())
        })?;
        let dx = cc.order().checked_sub(d).ok_or_else(|| {
            Error::Order(format!("coordinate change order {} is below the fiber cap {d}", cc.order()))
        })?;
        if rel.map().iter().any(|p| !p.constant_term().is_zero()) {
            return Err(Error::Unsupported(
                "a nonlinear target change needs the underlying map to fix the origin".into(),
            ));
        }
        caps.base = Some(caps.base.map_or(dx, |b| b.min(dx)));
    }
    let kind = rel.kind();
    let change = relation_from_map(rel.target(), new_target, cc.inverse(), &SuperPoly::zero(), kind)?;
    compose(&change, rel, caps)
}

/// Re-expresses a relation in new source coordinates `x = X(x')` by plain
/// substitution.
pub fn base_change_source(rel: &MicroRelation, cc: &CoordinateChange, new_source: &PhaseChart) -> Result<MicroRelation> {
    if cc.old() != rel.source().base() {
        return Err(Error::Chart(format!(
            "coordinate change acts on {}, not on the source {}",
            cc.old().name(),
            rel.source().base().name()
        )));
    }
    check_new_chart(cc.new_chart(), new_source, rel)?;
    MicroRelation::new(new_source, rel.target(), rel.kind(), cc.pull(rel.body()), rel.caps())
}

/// Stationary value of `F(u) + sign·Σ u_i v_i` in `u`, for `F` quadratic in
/// `u` with constant invertible Hessian.
fn stationary(f: &SuperPoly, u: &[Var], v: &[Var], negative: bool) -> Result<SuperPoly> {
    let n = u.len();
    let grads: Vec<SuperPoly> = u.iter().map(|&ui| f.left_derivative(ui)).collect();
    let b: Vec<SuperPoly> = grads.iter().map(|g| g.restrict_zero(u)).collect();
    let h: Matrix = grads
        .iter()
        .map(|g| u.iter().map(|&uj| g.coefficient(&Monomial::var(uj))).collect())
        .collect();
    for (i, g) in grads.iter().enumerate() {
        let mut rest = g - &b[i];
        for (j, &uj) in u.iter().enumerate() {
            rest -= &SuperPoly::var(uj).scale(&h[i][j]);
        }
        if !rest.is_zero() {
            return Err(Error::Unsupported("Legendre step needs a constant Hessian".into()));
        }
    }
    let hinv = invert_matrix(&h).ok_or_else(|| Error::Singular("Hessian of the Legendre step".into()))?;
    let rhs: Vec<SuperPoly> = (0..n)
        .map(|i| {
            let vi = SuperPoly::var(v[i]);
            &b[i] + &(if negative { -vi } else { vi })
        })
        .collect();
    let sol: Vec<SuperPoly> = hinv
        .iter()
        .map(|row| -row.iter().zip(&rhs).map(|(c, r)| r.scale(c)).sum::<SuperPoly>())
        .collect();
    let mut g = f.clone();
    for i in 0..n {
        let t = &SuperPoly::var(u[i]) * &SuperPoly::var(v[i]);
        g += if negative { -t } else { t };
    }
    Ok(g.substitute(&binding_map(u, &sol)))
}

/// Cross-check of [`change_target_coords`] through two Legendre transforms:
/// `S(x,q) → L(x,y) → L(x, Y(y')) → S'(x,q')`.
///
/// Only available for even-kind relations to a purely even target whose
/// generating function is quadratic in the fibers with a constant invertible
/// quadratic part, and for affine changes.
pub fn change_target_coords_legendre(rel: &MicroRelation, cc: &CoordinateChange, new_target: &PhaseChart) -> Result<MicroRelation> {
    if rel.kind() != Kind::Even || rel.target().base().dim().1 != 0 {
        return Err(Error::Unsupported("Legendre path needs an even relation to an even target".into()));
    }
    if !cc.is_exact() {
        return Err(Error::Unsupported("Legendre path needs an affine change".into()));
    }
    if rel.source().base() == rel.target().base() {
        return Err(Error::Unsupported("Legendre path needs distinct source and target charts".into()));
    }
    if rel.body().max_class_degree(VarClass::Fiber) > 2 {
        return Err(Error::Unsupported("Legendre path needs a generating function quadratic in the fibers".into()));
    }
    if cc.old() != rel.target().base() {
        return Err(Error::Chart("coordinate change does not act on the target".into()));
    }
    check_new_chart(cc.new_chart(), new_target, rel)?;
    let lagrangian = stationary(rel.body(), rel.target().fibers(), rel.target().base().vars(), true)?;
    let moved = cc.pull(&lagrangian);
    let body = stationary(&moved, new_target.base().vars(), new_target.fibers(), false)?;
    MicroRelation::new(rel.source(), new_target, Kind::Even, body, rel.caps())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Chart, FiberKind};
    use crate::superalg::Caps;
    use crate::superalg::Parity::Even;

    fn v(x: Var) -> SuperPoly {
        SuperPoly::var(x)
    }

    struct Setup {
        rel: MicroRelation,
        cc: CoordinateChange,
        new_target: PhaseChart,
        x: Var,
    }

    fn setup(factor: i64) -> Setup {
        let m1 = Chart::new("M1", &[("x", Even)]).unwrap();
        let m2 = Chart::new("M2", &[("y", Even)]).unwrap();
        let m2n = Chart::new("M2'", &[("y'", Even)]).unwrap();
        let t1 = PhaseChart::build(&m1, FiberKind::Cotangent);
        let t2 = PhaseChart::build(&m2, FiberKind::Cotangent);
        let new_target = PhaseChart::build(&m2n, FiberKind::Cotangent);
        let (x, q) = (v(m1.var(0)), v(t2.fiber(0)));
        let body = &(&x.pow(2) + &(&(&x + &x.pow(2)) * &q)) + &(&SuperPoly::integer(3) * &q.pow(2));
        let rel = MicroRelation::new(&t1, &t2, Kind::Even, body, Caps::fiber(2)).unwrap();
        let cc = CoordinateChange::new(&m2, &m2n, vec![&SuperPoly::integer(factor) * &v(m2n.var(0))], 4).unwrap();
        Setup { rel, cc, new_target, x: m1.var(0) }
    }

    #[test]
    fn linear_change_follows_tensor_law() {
        let s = setup(2);
        let out = change_target_coords(&s.rel, &s.cc, &s.new_target).unwrap();
        let phi = &v(s.x) + &v(s.x).pow(2);
        assert_eq!(out.map()[0], &SuperPoly::ratio(1, 2) * &phi);
        assert_eq!(out.coefficient(&[0, 0]), &SuperPoly::ratio(1, 4) * &s.rel.coefficient(&[0, 0]));
        assert_eq!(out.shift(), s.rel.shift());
    }

    #[test]
    fn legendre_path_agrees() {
        let s = setup(3);
        let direct = change_target_coords(&s.rel, &s.cc, &s.new_target).unwrap();
        let legendre = change_target_coords_legendre(&s.rel, &s.cc, &s.new_target).unwrap();
        assert_eq!(direct.body(), legendre.body());
    }

    #[test]
    fn identity_change_keeps_relation() {
        let s = setup(1);
        let cc = CoordinateChange::identity(s.rel.target().base());
        let out = change_target_coords(&s.rel, &cc, s.rel.target()).unwrap();
        assert_eq!(out.body(), s.rel.body());
    }

    #[test]
    fn source_change_substitutes() {
        let m1 = Chart::new("M1", &[("x", Even)]).unwrap();
        let m1n = Chart::new("M1'", &[("x'", Even)]).unwrap();
        let m2 = Chart::new("M2", &[("y", Even)]).unwrap();
        let t1 = PhaseChart::build(&m1, FiberKind::Cotangent);
        let t1n = PhaseChart::build(&m1n, FiberKind::Cotangent);
        let t2 = PhaseChart::build(&m2, FiberKind::Cotangent);
        let rel = MicroRelation::new(&t1, &t2, Kind::Even, &v(m1.var(0)) * &v(t2.fiber(0)), Caps::NONE).unwrap();
        let xp = v(m1n.var(0));
        let cc = CoordinateChange::new(&m1, &m1n, vec![&xp + &xp.pow(2)], 3).unwrap();
        let out = base_change_source(&rel, &cc, &t1n).unwrap();
        assert_eq!(out.body(), &(&(&xp + &xp.pow(2)) * &v(t2.fiber(0))));
    }
}
