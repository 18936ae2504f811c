//! Canonical brackets on phase charts and the higher derived brackets they
//! generate.
//!
//! On a cotangent chart the even Poisson bracket is
//!
//! ```text
//! (H,F) = Σ_a (-1)^{ã H̃} ( (-1)^ã ∂H/∂p_a ∂F/∂x^a - ∂H/∂x^a ∂F/∂p_a )
//! ```
//!
//! and on an anticotangent chart the odd Schouten bracket is the
//! biderivation with `[[x*_a, x^b]] = δ_a^b`:
//!
//! ```text
//! [[F,G]] = Σ_a (-1)^{(F̃+1)(ã+1)} ∂F/∂x*_a ∂G/∂x^a - (-1)^{(F̃+1)ã} ∂F/∂x^a ∂G/∂x*_a
//! ```
//!
//! Derived brackets nest these with a Hamiltonian and restrict to the zero
//! section.

use crate::error::{Error, Result};
use crate::geometry::{FiberKind, PhaseChart};
use crate::superalg::{sign_of, Parity, SuperPoly, VarClass};

/// A function on a phase chart with a declared parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hamiltonian {
    phase: PhaseChart,
    body: SuperPoly,
    parity: Parity,
}

impl Hamiltonian {
    /// Infers the parity; zero counts as even.
    pub fn new(phase: &PhaseChart, body: SuperPoly) -> Result<Hamiltonian> {
        let parity = body
            .parity()
            .ok_or_else(|| Error::Parity(format!("hamiltonian {body} is not of definite parity")))?;
        Hamiltonian::with_parity(phase, body, parity)
    }

    pub fn with_parity(phase: &PhaseChart, body: SuperPoly, parity: Parity) -> Result<Hamiltonian> {
        phase.check_function(&body, "hamiltonian")?;
        if !body.has_parity(parity) {
            return Err(Error::Parity(format!("hamiltonian {body} is not {parity}")));
        }
        Ok(Hamiltonian { phase: phase.clone(), body, parity })
    }

    pub fn phase(&self) -> &PhaseChart {
        &self.phase
    }

    pub fn body(&self) -> &SuperPoly {
        &self.body
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn fiber_degree(&self) -> u32 {
        self.body.max_class_degree(VarClass::Fiber)
    }

    /// `H^{a₁…a_r}(x)`: iterated right fiber derivatives, `a₁` first, at
    /// the zero section.
    pub fn coefficient(&self, indices: &[usize]) -> SuperPoly {
        let mut d = self.body.clone();
        for &a in indices {
            d = d.right_derivative(self.phase.fiber(a));
        }
        self.phase.restrict(&d)
    }
}

fn homogeneous_parts(f: &SuperPoly) -> Vec<(Parity, SuperPoly)> {
    let (e, o) = f.split_parity();
    let mut out = Vec::new();
    if !e.is_zero() {
        out.push((Parity::Even, e));
    }
    if !o.is_zero() {
        out.push((Parity::Odd, o));
    }
    out
}

fn signed(neg: bool, p: SuperPoly) -> SuperPoly {
    if neg {
        -p
    } else {
        p
    }
}

/// Canonical bracket of the chart's kind on arbitrary polynomials, extended
/// bilinearly over parity components.
pub fn canonical_bracket(phase: &PhaseChart, h: &SuperPoly, f: &SuperPoly) -> SuperPoly {
    let mut out = SuperPoly::zero();
    for (hp, hh) in homogeneous_parts(h) {
        for (&x, &p) in phase.base().vars().iter().zip(phase.fibers()) {
            let ax = x.parity();
            let (first, second) = match phase.kind() {
                FiberKind::Cotangent => (
                    sign_of((ax.bit() * hp.bit()) + ax.bit()),
                    !sign_of(ax.bit() * hp.bit()),
                ),
                FiberKind::Anticotangent => (
                    sign_of((hp.bit() + 1) * (ax.bit() + 1)),
                    !sign_of((hp.bit() + 1) * ax.bit()),
                ),
            };
            out += signed(first, &hh.left_derivative(p) * &f.left_derivative(x));
            out += signed(second, &hh.left_derivative(x) * &f.left_derivative(p));
        }
    }
    out
}

fn same_chart(h: &Hamiltonian, f: &Hamiltonian) -> Result<()> {
    if h.phase != f.phase {
        return Err(Error::Chart("hamiltonians live on different phase charts".into()));
    }
    Ok(())
}

/// Even Poisson bracket `(H, F)` on a cotangent chart.
pub fn canonical_poisson(h: &Hamiltonian, f: &Hamiltonian) -> Result<Hamiltonian> {
    same_chart(h, f)?;
    if h.phase.kind() != FiberKind::Cotangent {
        return Err(Error::Chart("the Poisson bracket needs a cotangent chart".into()));
    }
    Ok(Hamiltonian {
        phase: h.phase.clone(),
        body: canonical_bracket(&h.phase, &h.body, &f.body),
        parity: h.parity + f.parity,
    })
}

/// Odd Schouten bracket `[[P, F]]` on an anticotangent chart.
pub fn canonical_schouten(h: &Hamiltonian, f: &Hamiltonian) -> Result<Hamiltonian> {
    same_chart(h, f)?;
    if h.phase.kind() != FiberKind::Anticotangent {
        return Err(Error::Chart("the Schouten bracket needs an anticotangent chart".into()));
    }
    Ok(Hamiltonian {
        phase: h.phase.clone(),
        body: canonical_bracket(&h.phase, &h.body, &f.body),
        parity: h.parity + f.parity + Parity::Odd,
    })
}

fn check_args(h: &Hamiltonian, args: &[SuperPoly]) -> Result<()> {
    for (i, f) in args.iter().enumerate() {
        h.phase.base().check_function(f, &format!("argument {}", i + 1))?;
    }
    Ok(())
}

/// `(…((H, f₁), f₂), …, f_r)` restricted to the zero section.
pub fn derived_bracket_nested(h: &Hamiltonian, args: &[SuperPoly]) -> Result<SuperPoly> {
    check_args(h, args)?;
    let mut acc = h.body.clone();
    for f in args {
        acc = canonical_bracket(&h.phase, &acc, f);
    }
    Ok(h.phase.restrict(&acc))
}

/// Parities entering the sign of one slot of the direct formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    /// Parity of the argument.
    pub arg: Parity,
    /// Parity of the base coordinate it is differentiated by.
    pub base: Parity,
    /// Parity of the conjugate fiber coordinate.
    pub fiber: Parity,
}

/// Sign of a term of the direct formula (`true` = negative):
/// `Σ_{j<k} π_k (f̃_j + ã_j)` with `π_k` the fiber parity of slot `k`.
pub fn derived_sign(slots: &[Slot]) -> bool {
    let mut bits = 0;
    for (k, sk) in slots.iter().enumerate() {
        for sj in &slots[..k] {
            bits += sk.fiber.bit() * (sj.arg.bit() + sj.base.bit());
        }
    }
    sign_of(bits)
}

/// `Σ ± H^{a₁…a_r}(x) ∂_{a₁}f₁ ⋯ ∂_{a_r}f_r` with the sign from
/// [`derived_sign`].
pub fn derived_bracket_direct(h: &Hamiltonian, args: &[SuperPoly]) -> Result<SuperPoly> {
    derived_bracket_direct_with(h, args, derived_sign)
}

/// The direct formula with a caller-supplied sign rule.
pub fn derived_bracket_direct_with(h: &Hamiltonian, args: &[SuperPoly], sign: impl Fn(&[Slot]) -> bool) -> Result<SuperPoly> {
    check_args(h, args)?;
    let parts: Vec<Vec<(Parity, SuperPoly)>> = args.iter().map(homogeneous_parts).collect();
    let mut out = SuperPoly::zero();
    let mut chosen = Vec::with_capacity(args.len());
    expand_parts(&parts, &mut chosen, &mut |homog: &[(Parity, SuperPoly)]| {
        let mut slots = Vec::with_capacity(homog.len());
        direct_terms(h, homog, h.body.clone(), SuperPoly::one(), &mut slots, &sign, &mut out);
    });
    Ok(out)
}

fn expand_parts<'a>(
    parts: &'a [Vec<(Parity, SuperPoly)>],
    chosen: &mut Vec<(Parity, SuperPoly)>,
    visit: &mut dyn FnMut(&[(Parity, SuperPoly)]),
) {
    if chosen.len() == parts.len() {
        visit(chosen);
        return;
    }
    for part in &parts[chosen.len()] {
        chosen.push(part.clone());
        expand_parts(parts, chosen, visit);
        chosen.pop();
    }
}

fn direct_terms(
    h: &Hamiltonian,
    args: &[(Parity, SuperPoly)],
    coeff: SuperPoly,
    product: SuperPoly,
    slots: &mut Vec<Slot>,
    sign: &dyn Fn(&[Slot]) -> bool,
    out: &mut SuperPoly,
) {
    let k = slots.len();
    if coeff.is_zero() || product.is_zero() {
        return;
    }
    if k == args.len() {
        let term = &h.phase.restrict(&coeff) * &product;
        *out += signed(sign(slots), term);
        return;
    }
    let (arg_parity, f) = &args[k];
    for (&x, &p) in h.phase.base().vars().iter().zip(h.phase.fibers()) {
        let df = f.left_derivative(x);
        if df.is_zero() {
            continue;
        }
        slots.push(Slot { arg: *arg_parity, base: x.parity(), fiber: p.parity() });
        direct_terms(h, args, coeff.right_derivative(p), &product * &df, slots, sign, out);
        slots.pop();
    }
}

/// Parity used for Koszul signs of bracket arguments: the argument's own
/// parity on a cotangent chart, shifted by one on an anticotangent chart.
pub fn koszul_parity(kind: FiberKind, arg: Parity) -> Parity {
    arg + kind.shift()
}

fn check_master_parity(h: &Hamiltonian) -> Result<()> {
    let want = match h.phase.kind() {
        FiberKind::Cotangent => Parity::Odd,
        FiberKind::Anticotangent => Parity::Even,
    };
    if h.parity != want {
        return Err(Error::Parity(format!(
            "a {:?} chart needs a {want} hamiltonian here, got {}",
            h.phase.kind(),
            h.parity
        )));
    }
    Ok(())
}

/// `Σ_k Σ_σ ε(σ) {{v_σ(1),…,v_σ(k)}, v_σ(k+1),…,v_σ(n)}` over unshuffles,
/// with Koszul signs from [`koszul_parity`].
pub fn jacobiator(h: &Hamiltonian, args: &[SuperPoly]) -> Result<SuperPoly> {
    check_master_parity(h)?;
    check_args(h, args)?;
    let kind = h.phase.kind();
    let mut par = Vec::with_capacity(args.len());
    for (i, f) in args.iter().enumerate() {
        let p = f
            .parity()
            .ok_or_else(|| Error::Parity(format!("argument {} is not of definite parity", i + 1)))?;
        par.push(koszul_parity(kind, p));
    }
    let n = args.len();
    let mut out = SuperPoly::zero();
    for mask in 0u32..(1 << n) {
        let first: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let rest: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
        // sign of moving every element of `first` ahead of the later `rest` ones
        let mut bits = 0;
        for &i in &first {
            for &j in &rest {
                if j < i {
                    bits += par[i].bit() * par[j].bit();
                }
            }
        }
        let inner_args: Vec<SuperPoly> = first.iter().map(|&i| args[i].clone()).collect();
        let inner = derived_bracket_nested(h, &inner_args)?;
        let mut outer_args = vec![inner];
        outer_args.extend(rest.iter().map(|&j| args[j].clone()));
        out += signed(sign_of(bits), derived_bracket_nested(h, &outer_args)?);
    }
    Ok(out)
}

/// `(H, H)` for odd `H` on a cotangent chart, `[[P, P]]` for even `P` on an
/// anticotangent chart.
pub fn master_defect(h: &Hamiltonian) -> Result<Hamiltonian> {
    check_master_parity(h)?;
    match h.phase.kind() {
        FiberKind::Cotangent => canonical_poisson(h, h),
        FiberKind::Anticotangent => canonical_schouten(h, h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Chart;
    use crate::superalg::Parity::{Even, Odd};
    use crate::superalg::Var;

    fn v(x: Var) -> SuperPoly {
        SuperPoly::var(x)
    }

    fn ham(pc: &PhaseChart, body: SuperPoly) -> Hamiltonian {
        Hamiltonian::new(pc, body).unwrap()
    }

    #[test]
    fn poisson_of_square_momenta() {
        let m = Chart::new("R", &[("x", Even)]).unwrap();
        let t = PhaseChart::build(&m, FiberKind::Cotangent);
        let (x, p) = (v(m.var(0)), v(t.fiber(0)));
        let b = canonical_poisson(&ham(&t, p.pow(2)), &ham(&t, x.pow(2))).unwrap();
        assert_eq!(b.body(), &(&SuperPoly::integer(4) * &(&x * &p)));
        let h = ham(&t, &p.pow(2) + &x);
        assert!(canonical_poisson(&h, &h).unwrap().body().is_zero());
        assert!(canonical_poisson(&h, &ham(&t, SuperPoly::integer(5))).unwrap().body().is_zero());
    }

    #[test]
    fn schouten_generators() {
        let m = Chart::new("R2", &[("x1", Even), ("x2", Even)]).unwrap();
        let pi = PhaseChart::build(&m, FiberKind::Anticotangent);
        let (x1, s1, s2) = (v(m.var(0)), v(pi.fiber(0)), v(pi.fiber(1)));
        let one = canonical_schouten(&ham(&pi, s1.clone()), &ham(&pi, x1.clone())).unwrap();
        assert_eq!(one.body(), &SuperPoly::one());
        let b = canonical_schouten(&ham(&pi, &s1 * &s2), &ham(&pi, x1)).unwrap();
        assert_eq!(b.body(), &-s2);
        assert_eq!(b.parity(), Odd);
    }

    #[test]
    fn derived_brackets_agree() {
        let m = Chart::new("R2", &[("x1", Even), ("x2", Even)]).unwrap();
        let t = PhaseChart::build(&m, FiberKind::Cotangent);
        let h = ham(&t, &v(t.fiber(0)) * &v(t.fiber(1)));
        let args = [v(m.var(0)), v(m.var(1))];
        assert_eq!(derived_bracket_nested(&h, &args).unwrap(), SuperPoly::one());
        assert_eq!(derived_bracket_direct(&h, &args).unwrap(), SuperPoly::one());
        let three = [v(m.var(0)), v(m.var(1)), v(m.var(0))];
        assert!(derived_bracket_nested(&h, &three).unwrap().is_zero());
    }

    #[test]
    fn de_rham_field_satisfies_master_equation() {
        let m = Chart::new("R11", &[("x", Even), ("ξ", Odd)]).unwrap();
        let t = PhaseChart::build(&m, FiberKind::Cotangent);
        let h = ham(&t, &v(m.var(1)) * &v(t.fiber(0)));
        assert!(master_defect(&h).unwrap().body().is_zero());
        let args = [&v(m.var(0)).pow(2) * &v(m.var(1)), v(m.var(0)).pow(3)];
        assert!(jacobiator(&h, &args).unwrap().is_zero());
        let even = ham(&t, v(t.fiber(0)));
        assert!(matches!(master_defect(&even).unwrap_err(), Error::Parity(_)));
    }
}
