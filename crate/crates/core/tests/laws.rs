use microformal::brackets::{derived_bracket_direct, derived_bracket_nested, jacobiator, master_defect};
use microformal::geometry::{Chart, FiberKind, PhaseChart};
use microformal::hamjac::{hj_commutator_defect, morphism_defect, odd_hj_shift_solution};
use microformal::microformal::Kind;
use microformal::random::Gen;
use microformal::{Parity, SuperPoly};

const KINDS: [FiberKind; 2] = [FiberKind::Cotangent, FiberKind::Anticotangent];
const PARITIES: [Parity; 2] = [Parity::Even, Parity::Odd];

fn arg_parity(kind: FiberKind) -> Parity {
    kind.shift()
}

#[test]
fn shift_commutators_give_minus_the_bracket() {
    let mut g = Gen::new(1);
    for round in 0..40 {
        let kind = KINDS[round % 2];
        let m = g.chart("M", ("x", "ξ"), 2, 2);
        let t = PhaseChart::build(&m, kind);
        let h = g.hamiltonian(&t, PARITIES[(round / 2) % 2], 2, 3, 4);
        let f = g.hamiltonian(&t, PARITIES[(round / 4) % 2], 2, 3, 4);
        let f0 = g.function(&m, arg_parity(kind), 3, 4);
        let d = hj_commutator_defect(&h, &f, &f0).unwrap();
        let ok = match kind {
            FiberKind::Cotangent => d.holds(),
            FiberKind::Anticotangent => d.is_minus_bracket(),
        };
        assert!(
            ok,
            "{kind:?} H̃={} F̃={}: H={} F={} f0={f0}\n defect {}\n predicted {}\n remainder {}",
            h.parity(),
            f.parity(),
            h.body(),
            f.body(),
            d.defect,
            d.predicted,
            d.remainder
        );
    }
}

#[test]
fn morphism_for_constructed_pairs() {
    let mut g = Gen::new(2);
    for round in 0..16 {
        let kind = KINDS[round % 2];
        let parity = PARITIES[(round / 2) % 2];
        let m1 = g.chart("M1", ("x", "ξ"), 1, 1);
        let t1 = PhaseChart::build(&m1, kind);
        let pair = if round / 4 % 2 == 0 {
            g.graph_pair(&t1, (1, 1), parity)
        } else {
            let (n, o) = m1.dim();
            let m2 = g.chart_of_dim("M2", ("y", "θ"), n, o);
            let t2 = PhaseChart::build(&m2, kind);
            g.affine_momentum_pair(&t1, &t2, parity, 2, 2).unwrap()
        };
        let target = pair.relation.target().base().clone();
        let gf = g.function(&target, Kind::of_fibers(kind).parity(), 2, 3);
        let d = morphism_defect(&pair.relation, &pair.source, &pair.target, &gf, 2).unwrap();
        assert!(d.is_zero(), "{kind:?} {parity}: S={} H1={} H2={} g={gf}: {d}", pair.relation.body(), pair.source.body(), pair.target.body());
    }
}

#[test]
fn master_hamiltonians_have_vanishing_jacobiators() {
    let mut g = Gen::new(3);
    for round in 0..8 {
        let kind = KINDS[round % 2];
        let m = Chart::new("M", &[("x", Parity::Even), ("y", Parity::Even), ("ξ", Parity::Odd)]).unwrap();
        let t = PhaseChart::build(&m, kind);
        let h = match kind {
            FiberKind::Cotangent => g.master_hamiltonian(&t).unwrap(),
            FiberKind::Anticotangent => g.constant_master_hamiltonian(&t, 3),
        };
        assert!(master_defect(&h).unwrap().body().is_zero(), "{}", h.body());
        for n in 0..=4 {
            let args: Vec<SuperPoly> = (0..n).map(|i| g.function(&m, PARITIES[(i + round) % 2], 2, 3)).collect();
            let j = jacobiator(&h, &args).unwrap();
            assert!(j.is_zero(), "{kind:?} H={} n={n}: {j}", h.body());
        }
    }
}

#[test]
fn nested_matches_direct() {
    let mut g = Gen::new(4);
    for round in 0..60 {
        let kind = KINDS[round % 2];
        let m = g.chart("M", ("x", "ξ"), 3, 2);
        let t = PhaseChart::build(&m, kind);
        let h = g.hamiltonian(&t, PARITIES[(round / 2) % 2], 2, 4, 5);
        let r = g.below(5);
        let args: Vec<SuperPoly> = (0..r).map(|_| {
            let p = if g.coin() { Parity::Even } else { Parity::Odd };
            g.function(&m, p, 2, 3)
        }).collect();
        let a = derived_bracket_nested(&h, &args).unwrap();
        let b = derived_bracket_direct(&h, &args).unwrap();
        assert_eq!(a, b, "{kind:?} H={}", h.body());
    }
}

#[test]
fn odd_shift_for_master_hamiltonians() {
    let mut g = Gen::new(5);
    for _ in 0..10 {
        let m = g.chart_of_dim("M", ("x", "ξ"), 2, 1);
        let t = PhaseChart::build(&m, FiberKind::Cotangent);
        let q = g.master_hamiltonian(&t).unwrap();
        let f0 = g.function(&m, Parity::Even, 3, 4);
        let s = odd_hj_shift_solution(&q, &f0).unwrap();
        assert!(s.residual.is_zero(), "Q={} f0={f0}: {}", q.body(), s.residual);
    }
}

#[test]
fn broken_master_hamiltonian_has_a_jacobiator_witness() {
    let m = Chart::new("R11", &[("x", Parity::Even), ("ξ", Parity::Odd)]).unwrap();
    let t = PhaseChart::build(&m, FiberKind::Cotangent);
    let (x, xi) = (SuperPoly::var(m.var(0)), SuperPoly::var(m.var(1)));
    let body = &(&xi * &SuperPoly::var(t.fiber(0))) + &(&x * &SuperPoly::var(t.fiber(1)));
    let h = microformal::brackets::Hamiltonian::new(&t, body).unwrap();
    assert!(!master_defect(&h).unwrap().body().is_zero());
    let coords = [x.clone(), xi.clone()];
    let mut found = false;
    for n in 0..=3usize {
        for mask in 0..(1usize << n) {
            let args: Vec<SuperPoly> = (0..n).map(|i| coords[(mask >> i) & 1].clone()).collect();
            if !jacobiator(&h, &args).unwrap().is_zero() {
                found = true;
            }
        }
    }
    assert!(found);
}

#[test]
fn derived_brackets_are_graded_symmetric() {
    let mut g = Gen::new(6);
    for round in 0..40 {
        let kind = KINDS[round % 2];
        let m = g.chart("M", ("x", "ξ"), 2, 2);
        let t = PhaseChart::build(&m, kind);
        let h = g.hamiltonian(&t, PARITIES[(round / 2) % 2], 2, 3, 5);
        let n = 2 + g.below(2);
        let args: Vec<SuperPoly> = (0..n).map(|i| g.function(&m, PARITIES[(i + round / 4) % 2], 2, 3)).collect();
        let i = g.below(n - 1);
        let mut swapped = args.clone();
        swapped.swap(i, i + 1);
        let pi = |f: &SuperPoly| (f.parity().unwrap().bit() + kind.shift().bit()) % 2;
        let a = derived_bracket_nested(&h, &args).unwrap();
        let b = derived_bracket_nested(&h, &swapped).unwrap();
        let b = if pi(&args[i]) * pi(&args[i + 1]) == 1 { -b } else { b };
        assert_eq!(a, b, "{kind:?} H={}", h.body());
    }
}

#[test]
fn derived_brackets_obey_leibniz_in_the_last_slot() {
    let mut g = Gen::new(7);
    for round in 0..40 {
        let kind = KINDS[round % 2];
        let m = g.chart("M", ("x", "ξ"), 2, 2);
        let t = PhaseChart::build(&m, kind);
        let h = g.hamiltonian(&t, PARITIES[(round / 2) % 2], 2, 3, 5);
        let r = 1 + g.below(3);
        let mut args: Vec<SuperPoly> = (0..r - 1).map(|i| g.function(&m, PARITIES[(i + round) % 2], 2, 2)).collect();
        let u = g.function(&m, PARITIES[(round / 4) % 2], 2, 2);
        let v = g.function(&m, PARITIES[(round / 8) % 2], 2, 2);
        let mut bits = h.parity().bit() + kind.shift().bit() * r as u32;
        for a in &args {
            bits += a.parity().unwrap().bit();
        }
        bits *= u.parity().unwrap().bit();
        let with = |last: SuperPoly, args: &mut Vec<SuperPoly>| {
            args.push(last);
            let out = derived_bracket_nested(&h, args).unwrap();
            args.pop();
            out
        };
        let lhs = with(&u * &v, &mut args);
        let first = &with(u.clone(), &mut args) * &v;
        let second = &u * &with(v.clone(), &mut args);
        let rhs = if bits % 2 == 1 { &first - &second } else { &first + &second };
        assert_eq!(lhs, rhs, "{kind:?} H={} r={r}", h.body());
    }
}
