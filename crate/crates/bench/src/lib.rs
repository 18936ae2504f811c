//! Fixed workloads for the engine benchmarks.

use microformal::brackets::Hamiltonian;
use microformal::geometry::{CoordinateChange, FiberKind, PhaseChart};
use microformal::microformal::{Kind, MicroRelation};
use microformal::random::{Gen, RelationShape};
use microformal::{Parity, SuperPoly};

pub const SEED: u64 = 7;

/// A relation between charts of dimension `dim|dim` with a function on its target.
pub fn pullback_case(dim: usize, fiber_cap: u32) -> (MicroRelation, SuperPoly) {
    let mut g = Gen::new(SEED);
    let m1 = g.chart_of_dim("M1", ("x", "ξ"), dim, dim);
    let m2 = g.chart_of_dim("M2", ("y", "θ"), dim, dim);
    let (t1, t2) = (PhaseChart::build(&m1, FiberKind::Cotangent), PhaseChart::build(&m2, FiberKind::Cotangent));
    let rel = g.relation(&t1, &t2, Kind::Even, RelationShape::new(fiber_cap));
    let f = g.function(&m2, Parity::Even, 2, 4);
    (rel, f)
}

/// Two composable relations `outer ∘ inner`.
pub fn compose_case(dim: usize) -> (MicroRelation, MicroRelation) {
    let mut g = Gen::new(SEED);
    let [m1, m2, m3] = [("M1", ("x", "ξ")), ("M2", ("y", "θ")), ("M3", ("z", "ζ"))].map(|(n, l)| g.chart_of_dim(n, l, dim, dim));
    let [t1, t2, t3] = [&m1, &m2, &m3].map(|m| PhaseChart::build(m, FiberKind::Cotangent));
    let inner = g.relation(&t1, &t2, Kind::Even, RelationShape::new(2));
    let outer = g.relation(&t2, &t3, Kind::Even, RelationShape { shift: false, ..RelationShape::new(2) });
    (outer, inner)
}

/// A hamiltonian of fiber degree `arity` with that many arguments.
pub fn derived_case(kind: FiberKind, arity: usize) -> (Hamiltonian, Vec<SuperPoly>) {
    let mut g = Gen::new(SEED);
    let m = g.chart_of_dim("M", ("x", "ξ"), 2, 2);
    let t = PhaseChart::build(&m, kind);
    let body = g.phase_poly(m.vars(), t.fibers(), Parity::Even, 2, arity as u32, arity as u32, 8);
    let h = Hamiltonian::with_parity(&t, body, Parity::Even).expect("even body");
    let args = (0..arity).map(|k| g.function(&m, if k % 2 == 0 { Parity::Even } else { Parity::Odd }, 2, 3)).collect();
    (h, args)
}

/// A relation with a quadratic change of its target coordinates.
pub fn coords_case(order: u32) -> (MicroRelation, CoordinateChange, PhaseChart) {
    let mut g = Gen::new(SEED);
    let m1 = g.chart_of_dim("M1", ("x", "ξ"), 1, 2);
    let m2 = g.chart_of_dim("M2", ("y", "θ"), 2, 1);
    let (t1, t2) = (PhaseChart::build(&m1, FiberKind::Cotangent), PhaseChart::build(&m2, FiberKind::Cotangent));
    let rel = g.relation(&t1, &t2, Kind::Even, RelationShape { moves_origin: false, ..RelationShape::new(2) });
    let cc = g.quadratic_change(&m2, "M2'", ("u", "ϑ"), order);
    let nt = PhaseChart::build(cc.new_chart(), FiberKind::Cotangent);
    (rel, cc, nt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use microformal::brackets::{derived_bracket_direct, derived_bracket_nested};
    use microformal::microformal::{change_target_coords, compose, pullback};
    use microformal::Caps;

    #[test]
    fn workloads_run() {
        let (rel, f) = pullback_case(1, 2);
        pullback(&rel, &f, 2).unwrap();
        let (a, b) = compose_case(1);
        compose(&a, &b, Caps::fiber(2)).unwrap();
        let (h, args) = derived_case(FiberKind::Anticotangent, 2);
        assert_eq!(derived_bracket_direct(&h, &args).unwrap(), derived_bracket_nested(&h, &args).unwrap());
        let (rel, cc, nt) = coords_case(4);
        change_target_coords(&rel, &cc, &nt).unwrap();
    }
}
