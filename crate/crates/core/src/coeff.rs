//! Coefficients of cochains: Laurent polynomials in the chart coordinate `z`
//! tensored with the exterior algebra on the odd coordinates `ζ1..ζm`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_degree(p: i64) -> Parity {
        if p.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        if self == rhs {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// A product `ζ_{i1} ζ_{i2} ... ζ_{ip}` with `i1 < i2 < ... < ip`, indices from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct ExteriorMonomial {
    bits: u32,
}

impl ExteriorMonomial {
    pub const MAX_GENERATORS: usize = 31;

    pub fn one() -> Self {
        ExteriorMonomial { bits: 0 }
    }

    /// Rejects indices that are not strictly increasing or out of `1..=31`.
    pub fn new(indices: &[usize]) -> Option<Self> {
        let mut bits = 0u32;
        let mut last = 0usize;
        for &i in indices {
            if i <= last || i > Self::MAX_GENERATORS {
                return None;
            }
            bits |= 1 << (i - 1);
            last = i;
        }
        Some(ExteriorMonomial { bits })
    }

    pub fn generator(i: usize) -> Self {
        Self::new(&[i]).expect("generator index in 1..=31")
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..32).filter(|b| self.bits & (1 << b) != 0).map(|b| b as usize + 1).collect()
    }

    pub fn degree(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn parity(&self) -> Parity {
        Parity::of_degree(self.degree() as i64)
    }

    /// Largest generator index used, 0 for the empty monomial.
    pub fn max_index(&self) -> usize {
        32 - self.bits.leading_zeros() as usize
    }

    /// `self ∧ other` as `(sign, monomial)`, or `None` when a generator repeats.
    pub fn wedge(&self, other: &ExteriorMonomial) -> Option<(i8, ExteriorMonomial)> {
        if self.bits & other.bits != 0 {
            return None;
        }
        // Koszul sign: one transposition per pair (i in self, j in other) with i > j.
        let mut swaps = 0u32;
        let mut rest = other.bits;
        while rest != 0 {
            let j = rest.trailing_zeros();
            swaps += (self.bits >> j).count_ones();
            rest &= rest - 1;
        }
        let sign = if swaps.is_multiple_of(2) { 1 } else { -1 };
        Some((sign, ExteriorMonomial { bits: self.bits | other.bits }))
    }

    /// All monomials of degree `p` in `m` generators, in canonical order.
    pub fn all_of_degree(m: usize, p: usize) -> Vec<ExteriorMonomial> {
        let mut out: Vec<ExteriorMonomial> = (0u32..(1u32 << m))
            .filter(|b| b.count_ones() as usize == p)
            .map(|bits| ExteriorMonomial { bits })
            .collect();
        out.sort();
        out
    }

    /// All `2^m` monomials ordered by degree, then lexicographically.
    pub fn all(m: usize) -> Vec<ExteriorMonomial> {
        (0..=m).flat_map(|p| Self::all_of_degree(m, p)).collect()
    }
}

impl Ord for ExteriorMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.indices().cmp(&other.indices()))
    }
}

impl PartialOrd for ExteriorMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExteriorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in self.indices() {
            write!(f, "ζ{i}")?;
        }
        Ok(())
    }
}

/// Torus weight of a coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Zero,
    Homogeneous(i64),
    Inhomogeneous,
}

/// Finite sum of terms `q z^k ζ_I` with nonzero rational `q`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GradedCoefficient {
    terms: BTreeMap<(i64, ExteriorMonomial), Rational>,
}

impl GradedCoefficient {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::term(Rational::one(), 0, ExteriorMonomial::one())
    }

    pub fn constant(q: Rational) -> Self {
        Self::term(q, 0, ExteriorMonomial::one())
    }

    pub fn term(q: Rational, z_exp: i64, zeta: ExteriorMonomial) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert((z_exp, zeta), q);
        }
        GradedCoefficient { terms }
    }

    pub fn z_pow(k: i64) -> Self {
        Self::term(Rational::one(), k, ExteriorMonomial::one())
    }

    pub fn zeta(i: usize) -> Self {
        Self::term(Rational::one(), 0, ExteriorMonomial::generator(i))
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, ExteriorMonomial, Rational)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (k, mono, q) in terms {
            out.add_term(k, mono, q);
        }
        out
    }

    pub fn add_term(&mut self, z_exp: i64, zeta: ExteriorMonomial, q: Rational) {
        if q.is_zero() {
            return;
        }
        let key = (z_exp, zeta);
        let remove = match self.terms.get_mut(&key) {
            Some(x) => {
                *x += q;
                x.is_zero()
            }
            None => {
                self.terms.insert(key, q);
                false
            }
        };
        if remove {
            self.terms.remove(&key);
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

    pub fn terms(&self) -> impl Iterator<Item = (i64, ExteriorMonomial, &Rational)> {
        self.terms.iter().map(|(&(k, m), q)| (k, m, q))
    }

    pub fn coefficient(&self, z_exp: i64, zeta: ExteriorMonomial) -> Rational {
        self.terms.get(&(z_exp, zeta)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        GradedCoefficient { terms: self.terms.iter().map(|(k, x)| (*k, x * q)).collect() }
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        GradedCoefficient { terms: self.terms.iter().map(|(&(e, m), x)| ((e + k, m), x.clone())).collect() }
    }

    /// Terms of exterior degree exactly `p`.
    pub fn degree_component(&self, p: usize) -> Self {
        self.filter(|_, m| m.degree() == p)
    }

    pub fn filter<F: Fn(i64, ExteriorMonomial) -> bool>(&self, keep: F) -> Self {
        GradedCoefficient {
            terms: self.terms.iter().filter(|((k, m), _)| keep(*k, *m)).map(|(k, x)| (*k, x.clone())).collect(),
        }
    }

    /// Smallest exterior degree present.
    pub fn min_degree(&self) -> Option<usize> {
        self.terms.keys().map(|(_, m)| m.degree()).min()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(|(_, m)| m.degree()).max()
    }

    /// Largest odd generator index used.
    pub fn max_generator(&self) -> usize {
        self.terms.keys().map(|(_, m)| m.max_index()).max().unwrap_or(0)
    }

    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|(_, m)| m.parity());
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// Common torus weight `k + twist_of_zeta * |I|` of all terms.
    pub fn weight(&self, twist_of_zeta: i64) -> Weight {
        let mut weights = self.terms.keys().map(|(k, m)| k + twist_of_zeta * m.degree() as i64);
        let Some(first) = weights.next() else {
            return Weight::Zero;
        };
        if weights.all(|w| w == first) {
            Weight::Homogeneous(first)
        } else {
            Weight::Inhomogeneous
        }
    }

    /// `(min, max)` of the Laurent exponents.
    pub fn laurent_span(&self) -> Option<(i64, i64)> {
        let lo = self.terms.keys().map(|(k, _)| *k).min()?;
        let hi = self.terms.keys().map(|(k, _)| *k).max()?;
        Some((lo, hi))
    }

    /// `∂/∂z`, acting on the Laurent part only.
    pub fn derivative_z(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(&(k, m), q)| (k - 1, m, q * rat(k))))
    }
}

impl Add for &GradedCoefficient {
    type Output = GradedCoefficient;
    fn add(self, rhs: &GradedCoefficient) -> GradedCoefficient {
        let mut out = self.clone();
        for (&(k, m), q) in &rhs.terms {
            out.add_term(k, m, q.clone());
        }
        out
    }
}

impl Sub for &GradedCoefficient {
    type Output = GradedCoefficient;
    fn sub(self, rhs: &GradedCoefficient) -> GradedCoefficient {
        let mut out = self.clone();
        for (&(k, m), q) in &rhs.terms {
            out.add_term(k, m, -q.clone());
        }
        out
    }
}

impl Neg for &GradedCoefficient {
    type Output = GradedCoefficient;
    fn neg(self) -> GradedCoefficient {
        GradedCoefficient { terms: self.terms.iter().map(|(k, x)| (*k, -x.clone())).collect() }
    }
}

impl Mul for &GradedCoefficient {
    type Output = GradedCoefficient;
    fn mul(self, rhs: &GradedCoefficient) -> GradedCoefficient {
        let mut out = GradedCoefficient::zero();
        for (&(k1, m1), q1) in &self.terms {
            for (&(k2, m2), q2) in &rhs.terms {
                if let Some((sign, m)) = m1.wedge(&m2) {
                    let q = q1 * q2;
                    out.add_term(k1 + k2, m, if sign < 0 { -q } else { q });
                }
            }
        }
        out
    }
}

impl fmt::Display for GradedCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // Ordered by exterior degree, then Laurent exponent.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|((k1, m1), _), ((k2, m2), _)| m1.cmp(m2).then(k1.cmp(k2)));
        for (i, ((k, m), q)) in terms.into_iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{q}")?;
            if *k != 0 {
                write!(f, " z^{k}")?;
            }
            if m.degree() > 0 {
                write!(f, " {m}")?;
            }
        }
        Ok(())
    }
}

/// Square matrix with entries in the graded coefficient ring.
///
/// Acts on column vectors of coefficients: `(A g)_r = Σ_c A_rc g_c`, i.e. an
/// endomorphism sending `s_c · g` to `Σ_r s_r · (A_rc g)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffMatrix {
    size: usize,
    entries: Vec<GradedCoefficient>,
}

impl CoeffMatrix {
    pub fn zero(size: usize) -> Self {
        CoeffMatrix { size, entries: vec![GradedCoefficient::zero(); size * size] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zero(size);
        for i in 0..size {
            m.set(i, i, GradedCoefficient::one());
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, r: usize, c: usize) -> &GradedCoefficient {
        &self.entries[r * self.size + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: GradedCoefficient) {
        self.entries[r * self.size + c] = x;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &GradedCoefficient)> {
        self.entries.iter().enumerate().map(move |(i, x)| (i / self.size, i % self.size, x))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(GradedCoefficient::is_zero)
    }

    pub fn map<F: Fn(&GradedCoefficient) -> GradedCoefficient>(&self, f: F) -> Self {
        CoeffMatrix { size: self.size, entries: self.entries.iter().map(f).collect() }
    }

    pub fn add(&self, other: &CoeffMatrix) -> Self {
        assert_eq!(self.size, other.size);
        CoeffMatrix { size: self.size, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &CoeffMatrix) -> Self {
        assert_eq!(self.size, other.size);
        CoeffMatrix { size: self.size, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        self.map(|x| x.scale(q))
    }

    pub fn mul(&self, other: &CoeffMatrix) -> Self {
        assert_eq!(self.size, other.size);
        let n = self.size;
        let mut out = Self::zero(n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = GradedCoefficient::zero();
                for k in 0..n {
                    let a = self.get(r, k);
                    let b = other.get(k, c);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    pub fn degree_component(&self, p: usize) -> Self {
        self.map(|x| x.degree_component(p))
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(GradedCoefficient::min_degree).min()
    }

    pub fn laurent_span(&self) -> Option<(i64, i64)> {
        self.entries.iter().filter_map(GradedCoefficient::laurent_span).fold(None, |acc, (lo, hi)| match acc {
            None => Some((lo, hi)),
            Some((a, b)) => Some((a.min(lo), b.max(hi))),
        })
    }

    pub fn max_generator(&self) -> usize {
        self.entries.iter().map(GradedCoefficient::max_generator).max().unwrap_or(0)
    }
}

impl fmt::Display for CoeffMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.size {
            let row: Vec<String> = (0..self.size).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z1() -> GradedCoefficient {
        GradedCoefficient::zeta(1)
    }

    #[test]
    fn zeta_squares_to_zero() {
        assert!((&z1() * &z1()).is_zero());
    }

    #[test]
    fn zetas_anticommute() {
        let z2 = GradedCoefficient::zeta(2);
        let a = &z1() * &z2;
        let b = &z2 * &z1();
        let mono = ExteriorMonomial::new(&[1, 2]).unwrap();
        assert_eq!(a, GradedCoefficient::term(rat(1), 0, mono));
        assert_eq!(b, GradedCoefficient::term(rat(-1), 0, mono));
    }

    #[test]
    fn laurent_exponents_add() {
        let a = GradedCoefficient::z_pow(2);
        let b = GradedCoefficient::term(rat(1), -3, ExteriorMonomial::generator(1));
        assert_eq!(&a * &b, GradedCoefficient::term(rat(1), -1, ExteriorMonomial::generator(1)));
    }

    #[test]
    fn degree_components() {
        let top = GradedCoefficient::term(rat(1), 0, ExteriorMonomial::new(&[1, 2]).unwrap());
        let a = &GradedCoefficient::one() + &top;
        assert_eq!(a.degree_component(0), GradedCoefficient::one());
        assert_eq!(a.degree_component(2), top);
        assert!(a.degree_component(1).is_zero());
    }

    #[test]
    fn weights() {
        let a = GradedCoefficient::term(rat(1), -1, ExteriorMonomial::generator(1));
        assert_eq!(a.weight(-1), Weight::Homogeneous(-2));
        assert_eq!(GradedCoefficient::one().weight(-1), Weight::Homogeneous(0));
        let b = &GradedCoefficient::z_pow(1) + &z1();
        assert_eq!(b.weight(-1), Weight::Inhomogeneous);
    }

    #[test]
    fn rendering() {
        let a = GradedCoefficient::from_terms([
            (-1, ExteriorMonomial::generator(1), crate::linalg::ratio(-1, 2)),
            (0, ExteriorMonomial::one(), rat(3)),
            (2, ExteriorMonomial::new(&[1, 2]).unwrap(), rat(1)),
        ]);
        assert_eq!(a.to_string(), "3 + -1/2 z^-1 ζ1 + 1 z^2 ζ1ζ2");
        assert_eq!(GradedCoefficient::zero().to_string(), "0");
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(ExteriorMonomial::all(3).len(), 8);
        assert_eq!(ExteriorMonomial::all_of_degree(3, 2).len(), 3);
        assert_eq!(ExteriorMonomial::all_of_degree(2, 3).len(), 0);
        assert!(ExteriorMonomial::new(&[2, 1]).is_none());
    }

    const M: usize = 3;

    fn arb_coeff() -> impl Strategy<Value = GradedCoefficient> {
        proptest::collection::vec((-2i64..=2, 0u32..(1 << M), -3i64..=3), 0..5).prop_map(|ts| {
            GradedCoefficient::from_terms(ts.into_iter().map(|(k, bits, q)| (k, ExteriorMonomial { bits }, rat(q))))
        })
    }

    fn arb_homogeneous() -> impl Strategy<Value = GradedCoefficient> {
        (arb_coeff(), any::<bool>()).prop_map(|(a, odd)| a.filter(|_, m| (m.degree() % 2 == 1) == odd))
    }

    proptest! {
        #[test]
        fn associative(a in arb_coeff(), b in arb_coeff(), c in arb_coeff()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn super_commutative(a in arb_homogeneous(), b in arb_homogeneous()) {
            let ab = &a * &b;
            let ba = &b * &a;
            let both_odd = a.parity() == Some(Parity::Odd) && b.parity() == Some(Parity::Odd);
            if both_odd {
                prop_assert_eq!(ab, -&ba);
            } else {
                prop_assert_eq!(ab, ba);
            }
        }

        #[test]
        fn components_resum(a in arb_coeff()) {
            let mut total = GradedCoefficient::zero();
            for p in 0..=M {
                total = &total + &a.degree_component(p);
            }
            prop_assert_eq!(total, a);
        }

        #[test]
        fn nilpotent_without_constant_part(a in arb_coeff()) {
            let n = a.filter(|_, m| m.degree() > 0);
            let mut power = GradedCoefficient::one();
            for _ in 0..=M {
                power = &power * &n;
            }
            prop_assert!(power.is_zero());
        }
    }
}
