use std::cmp::Ordering;

use super::{sign_of, Parity, Var, VarClass};

/// A product of variables in sign-normal form.
///
/// Factors are sorted by the global variable order and odd variables occur
/// with exponent one. The monomial denotes the ordered product of its factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    factors: Vec<(Var, u32)>,
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn var(v: Var) -> Monomial {
        Monomial { factors: vec![(v, 1)] }
    }

    /// Normalizes an unordered product of factors.
    ///
    /// Returns `None` when the product vanishes (an odd square or a nilpotent
    /// parameter raised past its order), otherwise the normal form together
    /// with the Koszul sign (`true` = negative) of the sorting permutation.
    pub fn normalize(raw: &[(Var, u32)]) -> Option<(Monomial, bool)> {
        let mut acc = Monomial::one();
        let mut neg = false;
        for &(v, e) in raw {
            if e == 0 {
                continue;
            }
            if v.parity().is_odd() && e > 1 {
                return None;
            }
            let (m, s) = acc.mul(&Monomial { factors: vec![(v, e)] })?;
            acc = m;
            neg ^= s;
        }
        Some((acc, neg))
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    pub fn class_degree(&self, class: VarClass) -> u32 {
        self.factors
            .iter()
            .filter(|(v, _)| v.class() == class)
            .map(|&(_, e)| e)
            .sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.factors
            .iter()
            .find(|(w, _)| *w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn parity(&self) -> Parity {
        Parity::from_bit(
            self.factors
                .iter()
                .filter(|(v, _)| v.parity().is_odd())
                .count() as u32,
        )
    }

    /// Product in normal form, or `None` if it vanishes.
    pub fn mul(&self, other: &Monomial) -> Option<(Monomial, bool)> {
        let a = &self.factors;
        let b = &other.factors;
        let mut odd_left: u32 = a.iter().filter(|(v, _)| v.parity().is_odd()).count() as u32;
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut flips = 0u32;
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        let v = x.0;
                        if v.parity().is_odd() {
                            return None;
                        }
                        let e = x.1 + y.1;
                        if v.kills(e) {
                            return None;
                        }
                        out.push((v, e));
                        i += 1;
                        j += 1;
                        continue;
                    }
                },
                (Some(_), None) => true,
                (None, _) => false,
            };
            if take_a {
                let f = a[i];
                if f.0.parity().is_odd() {
                    odd_left -= 1;
                }
                out.push(f);
                i += 1;
            } else {
                let f = b[j];
                if f.0.parity().is_odd() {
                    flips += odd_left;
                }
                out.push(f);
                j += 1;
            }
        }
        Some((Monomial { factors: out }, sign_of(flips)))
    }

    /// Left derivative: returns the exponent factor, the sign of moving `v`
    /// to the front, and the remaining monomial.
    pub(crate) fn left_derivative(&self, v: Var) -> Option<(u32, bool, Monomial)> {
        self.derivative(v, true)
    }

    /// Right derivative: `v` is moved to the back before being removed.
    pub(crate) fn right_derivative(&self, v: Var) -> Option<(u32, bool, Monomial)> {
        self.derivative(v, false)
    }

    fn derivative(&self, v: Var, left: bool) -> Option<(u32, bool, Monomial)> {
        let pos = self.factors.iter().position(|(w, _)| *w == v)?;
        let e = self.factors[pos].1;
        let mut factors = self.factors.clone();
        let mut neg = false;
        if v.parity().is_odd() {
            let passed = if left {
                &self.factors[..pos]
            } else {
                &self.factors[pos + 1..]
            };
            let odd = passed.iter().filter(|(w, _)| w.parity().is_odd()).count() as u32;
            neg = sign_of(odd);
            factors.remove(pos);
        } else if e == 1 {
            factors.remove(pos);
        } else {
            factors[pos].1 = e - 1;
        }
        Some((e, neg, Monomial { factors }))
    }

    /// Splits off the factor `v^k` moved to the front: `self = ± v^k · rest`.
    pub(crate) fn extract_front(&self, v: Var) -> (u32, bool, Monomial) {
        match self.factors.iter().position(|(w, _)| *w == v) {
            None => (0, false, self.clone()),
            Some(pos) => {
                let (_, e) = self.factors[pos];
                let mut neg = false;
                if v.parity().is_odd() {
                    let odd = self.factors[..pos]
                        .iter()
                        .filter(|(w, _)| w.parity().is_odd())
                        .count() as u32;
                    neg = sign_of(odd);
                }
                let mut factors = self.factors.clone();
                factors.remove(pos);
                (e, neg, Monomial { factors })
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded order: total degree first, then lexicographic on the factor lists
/// with earlier variables ranking first.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (x, y) in self.factors.iter().zip(&other.factors) {
                let c = x.0.cmp(&y.0).then_with(|| y.1.cmp(&x.1));
                if c != Ordering::Equal {
                    return c;
                }
            }
            self.factors.len().cmp(&other.factors.len())
        })
    }
}
