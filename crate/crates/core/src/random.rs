//! Seeded generators of random instances for property checks.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::brackets::Hamiltonian;
use crate::error::Result;
use crate::geometry::{invert_matrix, Chart, CoordinateChange, FiberKind, Matrix, PhaseChart};
use crate::microformal::{binding_map, relation_from_map, Kind, MicroRelation};
use crate::superalg::{Caps, Parity, Rational, SuperPoly, Var};

/// Deterministic source of random charts, polynomials and relations.
pub struct Gen {
    rng: ChaCha8Rng,
}

/// Size parameters for random relations.
#[derive(Clone, Copy, Debug)]
pub struct RelationShape {
    pub fiber_cap: u32,
    pub base_degree: u32,
    pub terms: usize,
    /// Allow a nonzero fiber-free part.
    pub shift: bool,
    /// Allow a map with a constant term.
    pub moves_origin: bool,
}

impl RelationShape {
    pub fn new(fiber_cap: u32) -> RelationShape {
        RelationShape { fiber_cap, base_degree: 2, terms: 3, shift: true, moves_origin: true }
    }
}

/// A pair of Hamiltonians related by a relation.
#[derive(Clone, Debug)]
pub struct RelatedPair {
    pub relation: MicroRelation,
    pub source: Hamiltonian,
    pub target: Hamiltonian,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }

    /// A nonzero rational with small numerator and denominator 1 or 2.
    pub fn coefficient(&mut self) -> Rational {
        let mut n: i64 = self.rng.gen_range(1..=3);
        if self.coin() {
            n = -n;
        }
        let d = if self.rng.gen_bool(0.25) { 2 } else { 1 };
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    /// A chart with between one and `max_even + max_odd` coordinates.
    pub fn chart(&mut self, name: &str, letters: (&str, &str), max_even: usize, max_odd: usize) -> Chart {
        loop {
            let n = self.rng.gen_range(0..=max_even);
            let m = self.rng.gen_range(0..=max_odd);
            if n + m > 0 {
                return self.chart_of_dim(name, letters, n, m);
            }
        }
    }

    pub fn chart_of_dim(&mut self, name: &str, letters: (&str, &str), n: usize, m: usize) -> Chart {
        let mut coords: Vec<(String, Parity)> = (1..=n).map(|i| (format!("{}{i}", letters.0), Parity::Even)).collect();
        coords.extend((1..=m).map(|i| (format!("{}{i}", letters.1), Parity::Odd)));
        let refs: Vec<(&str, Parity)> = coords.iter().map(|(s, p)| (s.as_str(), *p)).collect();
        Chart::new(name, &refs).expect("generated names are distinct")
    }

    fn monomial(&mut self, vars: &[Var], degree: u32) -> Option<Vec<(Var, u32)>> {
        let mut out: Vec<(Var, u32)> = Vec::new();
        for _ in 0..degree {
            if vars.is_empty() {
                return None;
            }
            let v = vars[self.below(vars.len())];
            match out.iter_mut().find(|(w, _)| *w == v) {
                Some(_) if v.parity().is_odd() => return None,
                Some((_, e)) => *e += 1,
                None => out.push((v, 1)),
            }
        }
        Some(out)
    }

    /// A polynomial in `vars` with terms of degree at most `max_degree`.
    /// With a parity, terms of the other parity are dropped.
    pub fn poly(&mut self, vars: &[Var], parity: Option<Parity>, max_degree: u32, terms: usize) -> SuperPoly {
        self.poly_in_degrees(vars, parity, 0, max_degree, terms)
    }

    fn poly_in_degrees(&mut self, vars: &[Var], parity: Option<Parity>, lo: u32, hi: u32, terms: usize) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for _ in 0..terms {
            let d = self.rng.gen_range(lo..=hi);
            let Some(m) = self.monomial(vars, d) else { continue };
            let c = self.coefficient();
            let t = SuperPoly::product(c, &m);
            if parity.is_none_or(|p| t.has_parity(p)) {
                out += t;
            }
        }
        out
    }

    /// `Σ base(x)·fiber(q)` with fiber degrees in `fiber_lo..=fiber_hi`.
    pub fn phase_poly(
        &mut self,
        base: &[Var],
        fibers: &[Var],
        parity: Parity,
        base_degree: u32,
        fiber_lo: u32,
        fiber_hi: u32,
        terms: usize,
    ) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for _ in 0..terms {
            let fd = self.rng.gen_range(fiber_lo..=fiber_hi);
            let Some(fm) = self.monomial(fibers, fd) else { continue };
            let bd = self.rng.gen_range(0..=base_degree);
            let Some(bm) = self.monomial(base, bd) else { continue };
            let t = &SuperPoly::product(self.coefficient(), &bm) * &SuperPoly::product(Rational::from_integer(1.into()), &fm);
            if t.has_parity(parity) {
                out += t;
            }
        }
        out
    }

    /// A function on `chart` of the given parity, never zero when the
    /// chart admits one.
    pub fn function(&mut self, chart: &Chart, parity: Parity, max_degree: u32, terms: usize) -> SuperPoly {
        for _ in 0..16 {
            let f = self.poly(chart.vars(), Some(parity), max_degree, terms);
            if !f.is_zero() {
                return f;
            }
        }
        let odd = chart.vars().iter().copied().find(|v| v.parity().is_odd());
        match (parity, odd) {
            (Parity::Even, _) => SuperPoly::var(chart.var(0)).pow(2),
            (Parity::Odd, Some(v)) => SuperPoly::var(v),
            (Parity::Odd, None) => SuperPoly::zero(),
        }
    }

    /// Map components of the right parities for the target chart.
    pub fn map(&mut self, source: &Chart, target: &Chart, degree: u32, with_constants: bool) -> Vec<SuperPoly> {
        target
            .vars()
            .iter()
            .map(|&y| {
                let lo = if with_constants { 0 } else { 1 };
                let mut c = self.poly_in_degrees(source.vars(), Some(y.parity()), lo, degree, 3);
                if c.is_zero() {
                    if let Some(&x) = source.vars().iter().find(|x| x.parity() == y.parity()) {
                        c = SuperPoly::var(x);
                    }
                }
                c
            })
            .collect()
    }

    /// A random relation with fibers up to `shape.fiber_cap`.
    pub fn relation(&mut self, source: &PhaseChart, target: &PhaseChart, kind: Kind, shape: RelationShape) -> MicroRelation {
        let map = self.map(source.base(), target.base(), shape.base_degree, shape.moves_origin);
        let shift = if shape.shift {
            self.poly(source.base().vars(), Some(kind.parity()), shape.base_degree, 2)
        } else {
            SuperPoly::zero()
        };
        let linear = relation_from_map(source, target, &map, &shift, kind).expect("generated map is well formed");
        let mut body = linear.body().clone();
        if shape.fiber_cap >= 2 {
            let higher = self.phase_poly(
                source.base().vars(),
                target.fibers(),
                kind.parity(),
                shape.base_degree,
                2,
                shape.fiber_cap,
                shape.terms,
            );
            body += higher;
        }
        MicroRelation::new(source, target, kind, body, Caps::fiber(shape.fiber_cap)).expect("generated relation is well formed")
    }

    /// `S = S₀ + φ^i q_i`.
    pub fn linear_relation(&mut self, source: &PhaseChart, target: &PhaseChart, kind: Kind, degree: u32) -> MicroRelation {
        let map = self.map(source.base(), target.base(), degree, true);
        let shift = self.poly(source.base().vars(), Some(kind.parity()), degree, 2);
        relation_from_map(source, target, &map, &shift, kind).expect("generated map is well formed")
    }

    /// Invertible block-diagonal matrix respecting the parities of `vars`.
    pub fn invertible_matrix(&mut self, vars: &[Var]) -> Matrix {
        let n = vars.len();
        loop {
            let m: Matrix = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if vars[i].parity() == vars[j].parity() {
                                Rational::from_integer(self.rng.gen_range(-2..=2).into())
                            } else {
                                Rational::from_integer(0.into())
                            }
                        })
                        .collect()
                })
                .collect();
            if invert_matrix(&m).is_some() {
                return m;
            }
        }
    }

    /// `old = A·new + b`; translation only on even coordinates.
    pub fn linear_change(&mut self, old: &Chart, new_name: &str, letters: (&str, &str)) -> CoordinateChange {
        let (n, m) = old.dim();
        let new = self.chart_of_dim(new_name, letters, n, m);
        let a = self.invertible_matrix(new.vars());
        let forward = self.linear_part(&a, &new, true);
        CoordinateChange::new(old, &new, forward, 1).expect("generated change is invertible")
    }

    fn linear_part(&mut self, a: &Matrix, new: &Chart, translate: bool) -> Vec<SuperPoly> {
        (0..new.len())
            .map(|i| {
                let mut c: SuperPoly = (0..new.len()).map(|j| SuperPoly::var(new.var(j)).scale(&a[i][j])).sum();
                if translate && new.var(i).parity() == Parity::Even && self.coin() {
                    c += SuperPoly::constant(self.coefficient());
                }
                c
            })
            .collect()
    }

    /// `old = A·new + quadratic(new)` without constant terms. The chart needs
    /// an even coordinate, otherwise no quadratic term has the right parity.
    pub fn quadratic_change(&mut self, old: &Chart, new_name: &str, letters: (&str, &str), order: u32) -> CoordinateChange {
        let (n, m) = old.dim();
        assert!(n > 0, "a quadratic change needs an even coordinate");
        let new = self.chart_of_dim(new_name, letters, n, m);
        loop {
            let a = self.invertible_matrix(new.vars());
            let mut forward = self.linear_part(&a, &new, false);
            for (i, c) in forward.iter_mut().enumerate() {
                *c += self.poly_in_degrees(new.vars(), Some(new.var(i).parity()), 2, 2, 2);
            }
            if forward.iter().all(|c| c.max_degree_in(new.vars()) <= 1) {
                continue;
            }
            return CoordinateChange::new(old, &new, forward, order).expect("generated change is invertible");
        }
    }

    /// A homogeneous Hamiltonian on `phase` of fiber degree at most `fiber_degree`.
    pub fn hamiltonian(&mut self, phase: &PhaseChart, parity: Parity, base_degree: u32, fiber_degree: u32, terms: usize) -> Hamiltonian {
        let body = self.phase_poly(phase.base().vars(), phase.fibers(), parity, base_degree, 0, fiber_degree, terms);
        Hamiltonian::with_parity(phase, body, parity).expect("generated hamiltonian is well formed")
    }

    /// Relation of a graph map `x ↦ (x, ψ(x))` with the vector-field pair
    /// `X^a p_a` and `Y^i q_i`, where `Y` is `X` transported along the graph.
    pub fn graph_pair(&mut self, source: &PhaseChart, extra: (usize, usize), parity: Parity) -> RelatedPair {
        let kind = Kind::of_fibers(source.kind());
        let m1 = source.base();
        let mut coords: Vec<(String, Parity)> = m1.vars().iter().map(|v| (format!("{}'", v.name()), v.parity())).collect();
        coords.extend((1..=extra.0).map(|i| (format!("w{i}"), Parity::Even)));
        coords.extend((1..=extra.1).map(|i| (format!("ω{i}"), Parity::Odd)));
        let refs: Vec<(&str, Parity)> = coords.iter().map(|(s, p)| (s.as_str(), *p)).collect();
        let m2 = Chart::new(&format!("{}×W", m1.name()), &refs).expect("generated names are distinct");
        let target = PhaseChart::build(&m2, source.kind());
        let mut map: Vec<SuperPoly> = m1.vars().iter().map(|&x| SuperPoly::var(x)).collect();
        for &w in &m2.vars()[m1.len()..] {
            map.push(self.poly(m1.vars(), Some(w.parity()), 2, 2));
        }
        let relation = relation_from_map(source, &target, &map, &SuperPoly::zero(), kind).expect("graph map is well formed");
        let shift = source.kind().shift();
        let field: SuperPoly = m1
            .vars()
            .iter()
            .zip(source.fibers())
            .map(|(&x, &p)| {
                let want = parity + x.parity() + shift;
                &self.poly(m1.vars(), Some(want), 2, 2) * &SuperPoly::var(p)
            })
            .sum();
        let h1 = Hamiltonian::with_parity(source, field, parity).expect("vector field is well formed");
        // X^a ∂S/∂x^a is linear in q; its q-coefficients, read in the copy of
        // M1 inside the target, give Y.
        let pushed: SuperPoly = m1
            .vars()
            .iter()
            .zip(relation.source_momenta())
            .map(|(&x, dp)| &h1.body().right_derivative(source.conjugate(x).expect("base coordinate")) * &dp)
            .sum();
        let rename = binding_map(m1.vars(), &m2.vars()[..m1.len()].iter().map(|&v| SuperPoly::var(v)).collect::<Vec<_>>());
        let body: SuperPoly = target
            .fibers()
            .iter()
            .map(|&q| &pushed.right_derivative(q).substitute(&rename) * &SuperPoly::var(q))
            .sum();
        let h2 = Hamiltonian::with_parity(&target, body, parity).expect("transported field is well formed");
        RelatedPair { relation, source: h1, target: h2 }
    }

    /// `S = c·x + (Ax)·q + κ(q)` with constant `c`, invertible `A` and a
    /// constant-coefficient `κ` of fiber degree `2..=fiber_cap`, an arbitrary
    /// `H₂` of fiber degree at most `h2_fiber_degree` and the `H₁` obtained by
    /// solving `p = c + Aq` for `q`.
    pub fn affine_momentum_pair(
        &mut self,
        source: &PhaseChart,
        target: &PhaseChart,
        parity: Parity,
        fiber_cap: u32,
        h2_fiber_degree: u32,
    ) -> Result<RelatedPair> {
        let kind = Kind::of_fibers(source.kind());
        let xs = source.base().vars();
        let qs = target.fibers();
        let a = self.invertible_matrix(xs);
        let mut body = SuperPoly::zero();
        for (i, &x) in xs.iter().enumerate() {
            if x.parity() == kind.parity() && self.coin() {
                body += SuperPoly::var(x).scale(&self.coefficient());
            }
            for (j, &q) in qs.iter().enumerate() {
                body += (&SuperPoly::var(x) * &SuperPoly::var(q)).scale(&a[i][j]);
            }
        }
        if fiber_cap >= 2 {
            body += self.phase_poly(&[], qs, kind.parity(), 0, 2, fiber_cap, 3);
        }
        let relation = MicroRelation::new(source, target, kind, body, Caps::fiber(fiber_cap))?;
        let h2 = self.hamiltonian(target, parity, 2, h2_fiber_degree, 4);
        // p_a = c_a + A_a^i q_i, hence q = A⁻¹(p - c)
        let p_of_q = relation.source_momenta();
        let c: Vec<SuperPoly> = p_of_q.iter().map(|p| p.restrict_zero(qs)).collect();
        let inv = invert_matrix(&a).expect("matrix was checked invertible");
        let q_of_p: Vec<SuperPoly> = (0..qs.len())
            .map(|i| {
                (0..xs.len())
                    .map(|k| (&SuperPoly::var(source.fiber(k)) - &c[k]).scale(&inv[k][i]))
                    .sum()
            })
            .collect();
        let y_of_p: Vec<SuperPoly> = relation
            .target_coordinates()
            .iter()
            .map(|y| y.substitute(&binding_map(qs, &q_of_p)))
            .collect();
        let mut bind = binding_map(target.base().vars(), &y_of_p);
        bind.extend(binding_map(qs, &q_of_p));
        let h1 = Hamiltonian::with_parity(source, h2.body().substitute(&bind), parity)?;
        Ok(RelatedPair { relation, source: h1, target: h2 })
    }

    /// An odd Hamiltonian `ξ·F(x, p_x)` with `F` even and free of `ξ` and
    /// its momentum; such Hamiltonians satisfy the master equation.
    pub fn master_hamiltonian(&mut self, phase: &PhaseChart) -> Option<Hamiltonian> {
        let xs = phase.base().vars();
        let xi = *xs.iter().find(|v| v.parity().is_odd())?;
        let rest: Vec<Var> = xs.iter().copied().filter(|&v| v != xi).collect();
        let fibers: Vec<Var> = rest.iter().map(|&v| phase.conjugate(v).expect("base coordinate")).collect();
        let f = self.phase_poly(&rest, &fibers, Parity::Even, 2, 0, 2, 4);
        let body = &SuperPoly::var(xi) * &f;
        Hamiltonian::with_parity(phase, body, Parity::Odd).ok()
    }

    /// A Hamiltonian of the master parity for the chart's kind with
    /// constant coefficients, hence zero master defect.
    pub fn constant_master_hamiltonian(&mut self, phase: &PhaseChart, fiber_degree: u32) -> Hamiltonian {
        let parity = match phase.kind() {
            FiberKind::Cotangent => Parity::Odd,
            FiberKind::Anticotangent => Parity::Even,
        };
        let body = self.phase_poly(&[], phase.fibers(), parity, 0, 1, fiber_degree, 4);
        Hamiltonian::with_parity(phase, body, parity).expect("constant hamiltonian is well formed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamjac::relatedness_defect;

    #[test]
    fn same_seed_same_instance() {
        let mut a = Gen::new(7);
        let mut b = Gen::new(7);
        let ca = a.chart_of_dim("M", ("x", "ξ"), 2, 1);
        let fa = a.poly(ca.vars(), Some(Parity::Even), 3, 5);
        let fb = b.poly(ca.vars(), Some(Parity::Even), 3, 5);
        assert_eq!(fa, fb);
        assert!(fa.has_parity(Parity::Even));
    }

    #[test]
    fn constructed_pairs_are_related() {
        let mut g = Gen::new(11);
        for kind in [FiberKind::Cotangent, FiberKind::Anticotangent] {
            for parity in [Parity::Even, Parity::Odd] {
                let m1 = g.chart_of_dim("M1", ("x", "ξ"), 1, 1);
                let t1 = PhaseChart::build(&m1, kind);
                let pair = g.graph_pair(&t1, (1, 1), parity);
                let d = relatedness_defect(&pair.relation, &pair.source, &pair.target).unwrap();
                assert!(d.is_zero(), "graph pair {kind:?} {parity}: {d}");
                let m2 = g.chart_of_dim("M2", ("y", "θ"), 1, 1);
                let t2 = PhaseChart::build(&m2, kind);
                let pair = g.affine_momentum_pair(&t1, &t2, parity, 3, 2).unwrap();
                let d = relatedness_defect(&pair.relation, &pair.source, &pair.target).unwrap();
                assert!(d.is_zero(), "affine pair {kind:?} {parity}: {d}");
            }
        }
    }
}
