use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Caps, Monomial, Parity, Var, VarClass};
use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// A polynomial with exact rational coefficients in parity-graded variables.
///
/// Terms are stored in canonical order with no zero coefficients, so
/// structural equality is ring equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SuperPoly {
    terms: BTreeMap<Monomial, Rational>,
}

fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl SuperPoly {
    pub fn zero() -> SuperPoly {
        SuperPoly::default()
    }

    pub fn one() -> SuperPoly {
        SuperPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> SuperPoly {
        SuperPoly::term(Monomial::one(), c)
    }

    pub fn integer(n: i64) -> SuperPoly {
        SuperPoly::constant(rat(n))
    }

    pub fn ratio(n: i64, d: i64) -> SuperPoly {
        SuperPoly::constant(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(v: Var) -> SuperPoly {
        SuperPoly::term(Monomial::var(v), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> SuperPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        SuperPoly { terms }
    }

    /// Builds `coeff · v₁^e₁ ⋯ vₖ^eₖ` from factors in the given order.
    pub fn product(coeff: Rational, raw: &[(Var, u32)]) -> SuperPoly {
        match Monomial::normalize(raw) {
            None => SuperPoly::zero(),
            Some((m, neg)) => SuperPoly::term(m, if neg { -coeff } else { coeff }),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// The constant term.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The common parity of all terms; zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(Monomial::parity);
        match it.next() {
            None => Some(Parity::Even),
            Some(p) => it.all(|q| q == p).then_some(p),
        }
    }

    /// Whether every term has parity `p` (vacuously true for zero).
    pub fn has_parity(&self, p: Parity) -> bool {
        self.terms.keys().all(|m| m.parity() == p)
    }

    pub fn parity_part(&self, p: Parity) -> SuperPoly {
        self.filter(|m| m.parity() == p)
    }

    /// Splits into `(even, odd)` parts.
    pub fn split_parity(&self) -> (SuperPoly, SuperPoly) {
        (self.parity_part(Parity::Even), self.parity_part(Parity::Odd))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|&(v, _)| v))
            .collect()
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> SuperPoly {
        SuperPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops every monomial whose class degree exceeds its cap.
    pub fn truncate(&self, caps: &Caps) -> SuperPoly {
        if caps.is_none() {
            return self.clone();
        }
        self.filter(|m| caps.admits(m))
    }

    /// The part of exact degree `d` in variables of `class`.
    pub fn class_part(&self, class: VarClass, d: u32) -> SuperPoly {
        self.filter(|m| m.class_degree(class) == d)
    }

    pub fn max_class_degree(&self, class: VarClass) -> u32 {
        self.terms.keys().map(|m| m.class_degree(class)).max().unwrap_or(0)
    }

    /// The part of exact total degree `d` in the given variables.
    pub fn degree_part_in(&self, vars: &[Var], d: u32) -> SuperPoly {
        self.filter(|m| vars.iter().map(|&v| m.exponent(v)).sum::<u32>() == d)
    }

    pub fn max_degree_in(&self, vars: &[Var]) -> u32 {
        self.terms
            .keys()
            .map(|m| vars.iter().map(|&v| m.exponent(v)).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Sets the given variables to zero.
    pub fn restrict_zero(&self, vars: &[Var]) -> SuperPoly {
        self.filter(|m| vars.iter().all(|&v| m.exponent(v) == 0))
    }

    /// Coefficient of `v^k` in the decomposition `f = Σ v^k · f_k` with `v`
    /// placed at the front of each term.
    pub fn param_coefficient(&self, v: Var, k: u32) -> SuperPoly {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, neg, rest) = m.extract_front(v);
            if e == k {
                out.insert(rest, if neg { -c.clone() } else { c.clone() });
            }
        }
        SuperPoly { terms: out }
    }

    /// Keeps terms with `v`-degree at most `k`.
    pub fn truncate_var(&self, v: Var, k: u32) -> SuperPoly {
        self.filter(|m| m.exponent(v) <= k)
    }

    pub fn scale(&self, c: &Rational) -> SuperPoly {
        if c.is_zero() {
            return SuperPoly::zero();
        }
        SuperPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Product with every intermediate monomial checked against `caps`.
    pub fn mul_capped(&self, other: &SuperPoly, caps: &Caps) -> SuperPoly {
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((m, neg)) = m1.mul(m2) {
                    if !caps.admits(&m) {
                        continue;
                    }
                    let c = c1 * c2;
                    let c = if neg { -c } else { c };
                    *acc.entry(m).or_insert_with(Rational::zero) += c;
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        SuperPoly { terms: acc }
    }

    pub fn pow(&self, n: u32) -> SuperPoly {
        let mut acc = SuperPoly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Left partial derivative: `∂(fg) = (∂f)g + (-1)^{ṽ f̃} f (∂g)`.
    pub fn left_derivative(&self, v: Var) -> SuperPoly {
        self.derive(v, true)
    }

    /// Right partial derivative: the variable is removed from the right end.
    pub fn right_derivative(&self, v: Var) -> SuperPoly {
        self.derive(v, false)
    }

    fn derive(&self, v: Var, left: bool) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for (m, c) in &self.terms {
            let d = if left {
                m.left_derivative(v)
            } else {
                m.right_derivative(v)
            };
            if let Some((e, neg, rest)) = d {
                let c = c * rat(i64::from(e));
                out.add_term(rest, if neg { -c } else { c });
            }
        }
        out
    }

    /// Simultaneous substitution, checking that every bound value has the
    /// parity of the variable it replaces.
    pub fn try_substitute(&self, bindings: &HashMap<Var, SuperPoly>) -> Result<SuperPoly> {
        for (v, p) in bindings {
            if !p.has_parity(v.parity()) {
                return Err(Error::Parity(format!(
                    "binding for {} must be {}, got {}",
                    v,
                    v.parity(),
                    p.parity().map_or("inhomogeneous".to_string(), |q| q.to_string())
                )));
            }
        }
        Ok(self.substitute(bindings))
    }

    /// Simultaneous substitution. Unbound variables are kept.
    pub fn substitute(&self, bindings: &HashMap<Var, SuperPoly>) -> SuperPoly {
        self.substitute_capped(bindings, &Caps::NONE)
    }

    /// Simultaneous substitution, truncating every partial product.
    pub fn substitute_capped(&self, bindings: &HashMap<Var, SuperPoly>, caps: &Caps) -> SuperPoly {
        if bindings.is_empty() {
            return self.truncate(caps);
        }
        let mut powers: HashMap<(Var, u32), SuperPoly> = HashMap::new();
        let mut out = SuperPoly::zero();
        for (m, c) in &self.terms {
            let mut acc = SuperPoly::constant(c.clone());
            for &(v, e) in m.factors() {
                let factor = match bindings.get(&v) {
                    Some(img) => powers
                        .entry((v, e))
                        .or_insert_with(|| {
                            let mut p = SuperPoly::one();
                            for _ in 0..e {
                                p = p.mul_capped(img, caps);
                            }
                            p
                        })
                        .clone(),
                    None => SuperPoly::product(Rational::one(), &[(v, e)]),
                };
                acc = acc.mul_capped(&factor, caps);
                if acc.is_zero() {
                    break;
                }
            }
            out += acc;
        }
        out
    }
}

impl Add for &SuperPoly {
    type Output = SuperPoly;
    fn add(self, rhs: &SuperPoly) -> SuperPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for SuperPoly {
    type Output = SuperPoly;
    fn add(mut self, rhs: SuperPoly) -> SuperPoly {
        self += rhs;
        self
    }
}

impl AddAssign<&SuperPoly> for SuperPoly {
    fn add_assign(&mut self, rhs: &SuperPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl AddAssign for SuperPoly {
    fn add_assign(&mut self, rhs: SuperPoly) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl Sub for &SuperPoly {
    type Output = SuperPoly;
    fn sub(self, rhs: &SuperPoly) -> SuperPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for SuperPoly {
    type Output = SuperPoly;
    fn sub(mut self, rhs: SuperPoly) -> SuperPoly {
        self -= &rhs;
        self
    }
}

impl SubAssign<&SuperPoly> for SuperPoly {
    fn sub_assign(&mut self, rhs: &SuperPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Neg for &SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        SuperPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        -&self
    }
}

impl Mul for &SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: &SuperPoly) -> SuperPoly {
        self.mul_capped(rhs, &Caps::NONE)
    }
}

impl Mul for SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: SuperPoly) -> SuperPoly {
        &self * &rhs
    }
}

impl From<Var> for SuperPoly {
    fn from(v: Var) -> SuperPoly {
        SuperPoly::var(v)
    }
}

impl From<i64> for SuperPoly {
    fn from(n: i64) -> SuperPoly {
        SuperPoly::integer(n)
    }
}

impl std::iter::Sum for SuperPoly {
    fn sum<I: Iterator<Item = SuperPoly>>(iter: I) -> SuperPoly {
        let mut acc = SuperPoly::zero();
        for p in iter {
            acc += p;
        }
        acc
    }
}

impl fmt::Display for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::text::to_text(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalg::Parity::{Even, Odd};

    fn v(p: Var) -> SuperPoly {
        SuperPoly::var(p)
    }

    #[test]
    fn anticommuting_product() {
        let xi = Var::base("ξ", Odd);
        let eta = Var::base("η", Odd);
        assert_eq!(&v(eta) * &v(xi), -(&v(xi) * &v(eta)));
        assert!((&v(xi) * &v(xi)).is_zero());
    }

    #[test]
    fn left_derivative_signs() {
        let xi = Var::base("ξ", Odd);
        let eta = Var::base("η", Odd);
        let f = &v(xi) * &v(eta);
        assert_eq!(f.left_derivative(xi), v(eta));
        assert_eq!(f.left_derivative(eta), -v(xi));
        assert_eq!(f.right_derivative(eta), v(xi));
        assert_eq!(f.right_derivative(xi), -v(eta));
        let x = Var::base("x", Even);
        assert_eq!(v(x).pow(3).left_derivative(x), &SuperPoly::integer(3) * &v(x).pow(2));
    }

    #[test]
    fn derivative_of_quadratic_generating_function() {
        let x = Var::base("x", Even);
        let q = Var::fiber("q", Even);
        let s = &(&v(x) * &v(q)) + &(&SuperPoly::ratio(1, 2) * &v(q).pow(2));
        assert_eq!(s.left_derivative(q), &v(x) + &v(q));
    }

    #[test]
    fn substitution_swaps_odd_pair() {
        let xi = Var::base("ξ", Odd);
        let eta = Var::base("η", Odd);
        let f = &v(xi) * &v(eta);
        let b: HashMap<_, _> = [(xi, v(eta)), (eta, v(xi))].into_iter().collect();
        assert_eq!(f.try_substitute(&b).unwrap(), -f.clone());
    }

    #[test]
    fn substitution_rejects_parity_mismatch() {
        let x = Var::base("x", Even);
        let xi = Var::base("ξ", Odd);
        let b: HashMap<_, _> = [(x, v(xi))].into_iter().collect();
        assert!(v(x).try_substitute(&b).is_err());
    }

    #[test]
    fn substitution_scales() {
        let q = Var::fiber("q", Even);
        let y = Var::base("y", Even);
        let b: HashMap<_, _> = [(q, &SuperPoly::integer(2) * &v(y))].into_iter().collect();
        assert_eq!(v(q).pow(2).substitute(&b), &SuperPoly::integer(4) * &v(y).pow(2));
    }

    #[test]
    fn truncation_by_parameter_cap() {
        let eps = Var::parameter("ε", Even, None);
        let f: SuperPoly = (0..4).map(|k| v(eps).pow(k)).sum();
        let caps = Caps { parameter: Some(2), ..Caps::NONE };
        let t = f.truncate(&caps);
        assert_eq!(t, (0..3).map(|k| v(eps).pow(k)).sum());
        assert_eq!(t.truncate(&caps), t);
    }

    #[test]
    fn fiber_cap_zero_keeps_shift() {
        let x = Var::base("x", Even);
        let q = Var::fiber("q", Even);
        let s = &v(x).pow(2) + &(&v(x) * &v(q)) + v(q).pow(2);
        assert_eq!(s.truncate(&Caps::fiber(0)), v(x).pow(2));
    }

    #[test]
    fn param_split_recombines() {
        let eps = Var::parameter("ε", Odd, None);
        let x = Var::base("x", Even);
        let xi = Var::base("ξ", Odd);
        let f = &(&v(xi) * &v(eps)) + &v(x);
        let f0 = f.param_coefficient(eps, 0);
        let f1 = f.param_coefficient(eps, 1);
        assert_eq!(f1, -v(xi));
        assert_eq!(&f0 + &(&v(eps) * &f1), f);
    }
}
