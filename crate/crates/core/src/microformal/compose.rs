use super::{binding_map, MicroRelation};
use crate::error::{Error, Result};
use crate::superalg::{Caps, SuperPoly, VarClass};

const MAX_ITERATIONS: usize = 64;

/// Composite relation `outer ∘ inner` from `M1` to `M3`.
///
/// With `inner: M1 → M2` given by `S_B(x, q)` and `outer: M2 → M3` by
/// `S_A(y, r)` the composite is
///
/// ```text
/// S(x, r) = S_B(x, q) + S_A(y, r) - y^i q_i,
/// y^i = ±∂S_B/∂q_i(x, q),   q_i = ∂S_A/∂y^i(y, r)
/// ```
///
/// solved by iteration from `y = φ_B(x)`. The iteration closes when `S_A`
/// has no fiber-free part (each sweep raises the `r`-degree of the error,
/// which `caps.fiber` bounds) or when `S_B` is linear in its fibers.
pub fn compose(outer: &MicroRelation, inner: &MicroRelation, caps: Caps) -> Result<MicroRelation> {
    if inner.target().base() != outer.source().base() {
        return Err(Error::Chart(format!(
            "cannot compose: inner relation ends on {} but outer starts on {}",
            inner.target().base().name(),
            outer.source().base().name()
        )));
    }
    if inner.kind() != outer.kind() {
        return Err(Error::Chart("cannot compose relations of different kinds".into()));
    }
    let ys = inner.target().base().vars();
    let qs = inner.target().fibers();
    let dsb = inner.target_coordinates();
    let dsa: Vec<SuperPoly> = ys.iter().map(|&y| outer.body().left_derivative(y)).collect();
    let mut y = inner.map();
    let budget = match caps.fiber {
        Some(d) if !inner.is_fiber_linear() && outer.shift().is_zero() => d as usize + 3,
        _ if inner.is_fiber_linear() => 2,
        _ => MAX_ITERATIONS,
    };
    let budget = budget + param_slack(inner, outer);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let by = binding_map(ys, &y);
        let q: Vec<SuperPoly> = dsa.iter().map(|d| d.substitute_capped(&by, &caps)).collect();
        let bq = binding_map(qs, &q);
        let next: Vec<SuperPoly> = dsb.iter().map(|d| d.substitute_capped(&bq, &caps)).collect();
        if next == y {
            let mut body = inner.body().substitute_capped(&bq, &caps);
            body += outer.body().substitute_capped(&by, &caps);
            for (yi, qi) in y.iter().zip(&q) {
                body -= &yi.mul_capped(qi, &caps);
            }
            return MicroRelation::new(inner.source(), outer.target(), inner.kind(), body, caps);
        }
        if iterations >= budget {
            return Err(Error::NoConvergence(iterations));
        }
        y = next;
    }
}

fn param_slack(a: &MicroRelation, b: &MicroRelation) -> usize {
    a.body()
        .vars()
        .into_iter()
        .chain(b.body().vars())
        .filter(|v| v.class() == VarClass::Parameter)
        .map(|v| v.nilpotency().map_or(MAX_ITERATIONS, |k| k as usize))
        .sum::<usize>()
        .min(MAX_ITERATIONS)
}
