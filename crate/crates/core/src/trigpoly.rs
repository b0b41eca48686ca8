//! Sparse trigonometric polynomials `P(θ) = Σ c_n e(nθ)` with integer
//! frequencies and complex coefficients.
//!
//! The convention `e(θ) = exp(2πiθ)` is fixed for the whole crate. A
//! [`TrigPoly`] is always kept in canonical form: frequencies are distinct
//! and no stored coefficient is zero.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// `e(num / den)` for `0 <= num < den`.
#[inline]
pub fn unit_root(num: u64, den: u64) -> Complex64 {
    debug_assert!(num < den);
    let (s, c) = (TAU * (num as f64 / den as f64)).sin_cos();
    Complex64::new(c, s)
}

/// `e(θ)` for real `θ`.
#[inline]
pub fn e(theta: f64) -> Complex64 {
    let (s, c) = (TAU * theta.rem_euclid(1.0)).sin_cos();
    Complex64::new(c, s)
}

/// Residue of `n * j` modulo `m`, computed without overflow.
#[inline]
pub(crate) fn phase_index(n: i64, j: u64, m: u64) -> u64 {
    let m = m as i128;
    ((n as i128).rem_euclid(m) * j as i128 % m) as u64
}

#[derive(Clone, Default, PartialEq)]
pub struct TrigPoly {
    terms: BTreeMap<i64, Complex64>,
}

impl TrigPoly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        Self::make([(0, c.into())])
    }

    pub fn monomial(freq: i64, c: impl Into<Complex64>) -> Self {
        Self::make([(freq, c.into())])
    }

    /// Builds a polynomial from `(frequency, coefficient)` pairs, summing
    /// duplicates and dropping coefficients that end up exactly zero.
    pub fn make<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        Self::make_with_threshold(pairs, 0.0)
    }

    /// Like [`make`](Self::make), but drops every coefficient of modulus
    /// `<= threshold`. A threshold of zero only removes exact zeros.
    pub fn make_with_threshold<I>(pairs: I, threshold: f64) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut terms = BTreeMap::new();
        for (n, c) in pairs {
            *terms.entry(n).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let mut p = TrigPoly { terms };
        p.canonicalize(threshold);
        p
    }

    /// Real integer coefficients, the common case in this crate.
    pub fn from_integer_terms<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        Self::make(
            pairs
                .into_iter()
                .map(|(n, c)| (n, Complex64::new(c as f64, 0.0))),
        )
    }

    fn canonicalize(&mut self, threshold: f64) {
        self.terms.retain(|_, c| {
            if threshold == 0.0 {
                c.re != 0.0 || c.im != 0.0
            } else {
                c.norm() > threshold
            }
        });
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

    /// `max |n|` over stored frequencies, zero for the zero polynomial.
    pub fn degree(&self) -> u64 {
        self.terms
            .keys()
            .map(|n| n.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Coefficient of `e(nθ)`; zero when absent.
    pub fn coeff(&self, n: i64) -> Complex64 {
        self.terms.get(&n).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(0)
    }

    /// Terms in increasing frequency order.
    pub fn terms(&self) -> impl ExactSizeIterator<Item = (i64, Complex64)> + '_ {
        self.terms.iter().map(|(&n, &c)| (n, c))
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> + '_ {
        self.terms.keys().copied()
    }

    /// `Σ |c_n|`, an upper bound for the sup norm.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// `Σ |c_n|²`.
    pub fn coeff_l2_sq(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ |n · c_n|`, so that `|P'(θ)| <= 2π · coeff_moment()`.
    pub fn coeff_moment(&self) -> f64 {
        self.terms
            .iter()
            .map(|(&n, c)| n.unsigned_abs() as f64 * c.norm())
            .sum()
    }

    /// True when every coefficient has zero imaginary part and is an integer.
    pub fn has_integer_coeffs(&self) -> bool {
        self.terms
            .values()
            .all(|c| c.im == 0.0 && c.re.fract() == 0.0)
    }

    /// True when `c_{-n} = conj(c_n)` for all `n`, i.e. `P` is real-valued.
    pub fn is_real_valued(&self, tol: f64) -> bool {
        self.terms.iter().all(|(&n, &c)| {
            let mirror = self.coeff(-n).conj();
            (c - mirror).norm() <= tol * c.norm().max(1.0)
        })
    }

    /// Evaluates `Σ c_n e(nθ)` at a real point.
    pub fn eval(&self, theta: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&n, &c)| c * e((n as f64 * theta).rem_euclid(1.0)))
            .sum()
    }

    /// Evaluates at the grid point `θ = j / m`, reducing every phase
    /// `n·j mod m` in integer arithmetic before taking the exponential.
    pub fn eval_grid(&self, j: u64, m: u64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&n, &c)| c * unit_root(phase_index(n, j, m), m))
            .sum()
    }

    /// The polynomial `θ ↦ conj(P(θ))`, i.e. `Σ conj(c_n) e(-nθ)`.
    pub fn conj(&self) -> TrigPoly {
        TrigPoly {
            terms: self.terms.iter().map(|(&n, c)| (-n, c.conj())).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> TrigPoly {
        Self::make(self.terms().map(|(n, c)| (n, c * s)))
    }

    /// Exact coefficient convolution. Fails if some product frequency
    /// leaves the `i64` range.
    pub fn checked_mul(&self, other: &TrigPoly) -> Result<TrigPoly> {
        let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (&a, &ca) in &self.terms {
            for (&b, &cb) in &other.terms {
                let n = a.checked_add(b).ok_or_else(|| {
                    Error::FrequencyOverflow(format!("{a} + {b} does not fit in i64"))
                })?;
                *acc.entry(n).or_default() += ca * cb;
            }
        }
        let mut p = TrigPoly { terms: acc };
        p.canonicalize(0.0);
        Ok(p)
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        Self::make(self.terms().chain(other.terms()))
    }

    /// `|P|² = P · conj(P)` as a polynomial.
    pub fn abs_sq(&self) -> Result<TrigPoly> {
        self.checked_mul(&self.conj())
    }

    pub fn checked_pow(&self, mut exp: u32) -> Result<TrigPoly> {
        let mut base = self.clone();
        let mut acc = TrigPoly::constant(1.0);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// The substitution `θ ↦ factor·θ`: every frequency is multiplied by
    /// `factor`, coefficients are unchanged.
    pub fn dilate(&self, factor: u64) -> Result<TrigPoly> {
        if factor == 0 {
            return Err(Error::InvalidParameter("dilation factor must be >= 1".into()));
        }
        let f = i64::try_from(factor)
            .map_err(|_| Error::FrequencyOverflow(format!("factor {factor} exceeds i64")))?;
        let terms = self
            .terms
            .iter()
            .map(|(&n, &c)| {
                n.checked_mul(f)
                    .map(|m| (m, c))
                    .ok_or_else(|| Error::FrequencyOverflow(format!("{n} * {f} does not fit in i64")))
            })
            .collect::<Result<_>>()?;
        Ok(TrigPoly { terms })
    }

    /// Exact coefficient form of `g(θ) = Π_{i<k} P(D^i θ)`.
    ///
    /// Uses the recursion `g_k(θ) = P(θ) · g_{k-1}(Dθ)`. The largest possible
    /// frequency `degree(P)·(D^k - 1)/(D - 1)` is checked up front.
    pub fn product_of_dilates(&self, base: u64, count: u32) -> Result<TrigPoly> {
        if base < 2 {
            return Err(Error::InvalidParameter(format!("dilation base must be >= 2, got {base}")));
        }
        if count < 1 {
            return Err(Error::InvalidParameter("number of factors must be >= 1".into()));
        }
        dilate_product_degree(self.degree(), base, count)?;
        let mut g = self.clone();
        for _ in 1..count {
            g = self.checked_mul(&g.dilate(base)?)?;
        }
        Ok(g)
    }

    pub fn max_abs_coeff_diff(&self, other: &TrigPoly) -> f64 {
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|&n| (self.coeff(n) - other.coeff(n)).norm())
            .fold(0.0, f64::max)
    }
}

/// Upper bound `degree·(1 + D + ... + D^{k-1})` on the degree of a product
/// of dilates, or an overflow error when it does not fit in `i64`.
pub fn dilate_product_degree(degree: u64, base: u64, count: u32) -> Result<u64> {
    let overflow = || {
        Error::FrequencyOverflow(format!(
            "degree {degree} with base {base} and {count} factors exceeds the i64 frequency range"
        ))
    };
    let mut span: u64 = 0;
    let mut power: u64 = 1;
    for i in 0..count {
        if i > 0 {
            power = power.checked_mul(base).ok_or_else(overflow)?;
        }
        span = span.checked_add(power).ok_or_else(overflow)?;
    }
    let total = degree.checked_mul(span).ok_or_else(overflow)?;
    if total > i64::MAX as u64 {
        return Err(overflow());
    }
    Ok(total)
}

impl std::ops::Mul for &TrigPoly {
    type Output = TrigPoly;

    /// Panics on frequency overflow; use [`TrigPoly::checked_mul`] to handle it.
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        self.checked_mul(rhs).expect("frequency overflow in TrigPoly product")
    }
}

impl fmt::Debug for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TrigPoly")?;
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (n, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            if n != 0 {
                write!(f, "·e({n}θ)")?;
            }
        }
        Ok(())
    }
}

/// Serialized as a list of `[frequency, re, im]` triples.
impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.terms().map(|(n, c)| (n, c.re, c.im)))
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let triples = Vec::<(i64, f64, f64)>::deserialize(deserializer)?;
        Ok(TrigPoly::make(
            triples.into_iter().map(|(n, re, im)| (n, Complex64::new(re, im))),
        ))
    }
}

/// A function on the torus that can be sampled on uniform grids `j / m`.
///
/// `degree_bound` is an upper bound for the largest frequency present, used
/// to size the first quadrature grid.
pub trait Periodic: Sync {
    fn degree_bound(&self) -> u64;
    fn eval_grid(&self, j: u64, m: u64) -> Complex64;
}

impl Periodic for TrigPoly {
    fn degree_bound(&self) -> u64 {
        self.degree()
    }

    fn eval_grid(&self, j: u64, m: u64) -> Complex64 {
        TrigPoly::eval_grid(self, j, m)
    }
}

/// Unexpanded product `Π_{i<k} P(D^i θ)`, evaluated in `O(k · terms(P))`
/// per point instead of expanding all `terms(P)^k` products.
#[derive(Debug, Clone)]
pub struct DilateProduct {
    factor: TrigPoly,
    base: u64,
    count: u32,
    degree: u64,
}

impl DilateProduct {
    pub fn new(factor: TrigPoly, base: u64, count: u32) -> Result<Self> {
        if base < 2 || count < 1 {
            return Err(Error::InvalidParameter(format!(
                "dilate product needs base >= 2 and at least one factor (got {base}, {count})"
            )));
        }
        let degree = dilate_product_degree(factor.degree(), base, count)?;
        Ok(DilateProduct { factor, base, count, degree })
    }

    pub fn factor(&self) -> &TrigPoly {
        &self.factor
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn expand(&self) -> Result<TrigPoly> {
        self.factor.product_of_dilates(self.base, self.count)
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let mut t = theta.rem_euclid(1.0);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..self.count {
            acc *= self.factor.eval(t);
            t = (t * self.base as f64).rem_euclid(1.0);
        }
        acc
    }
}

impl Periodic for DilateProduct {
    fn degree_bound(&self) -> u64 {
        self.degree
    }

    fn eval_grid(&self, j: u64, m: u64) -> Complex64 {
        let mut r = j % m;
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..self.count {
            acc *= self.factor.eval_grid(r, m);
            r = ((r as u128 * self.base as u128) % m as u128) as u64;
        }
        acc
    }
}

/// `Q(θ) = 1 + e(θ) + e(3θ)`.
pub fn boas_plus() -> TrigPoly {
    TrigPoly::from_integer_terms([(0, 1), (1, 1), (3, 1)])
}

/// `q(θ) = 1 + e(θ) - e(3θ)`.
pub fn boas_minus() -> TrigPoly {
    TrigPoly::from_integer_terms([(0, 1), (1, 1), (3, -1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn make_merges_and_drops() {
        assert_eq!(boas_plus().len(), 3);
        assert!(TrigPoly::make([(0, c(1.0)), (0, c(-1.0))]).is_zero());
        let p = TrigPoly::make([(1, c(1.0)), (1, c(1.0))]);
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(1), c(2.0));
    }

    #[test]
    fn threshold_only_applies_when_requested() {
        let p = TrigPoly::make([(0, c(1e-300)), (2, c(1.0))]);
        assert_eq!(p.len(), 2);
        let p = TrigPoly::make_with_threshold([(0, c(1e-13)), (2, c(1.0))], 1e-12);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn degree_of_empty_is_zero() {
        assert_eq!(TrigPoly::zero().degree(), 0);
        assert_eq!(TrigPoly::from_integer_terms([(-7, 1), (3, 2)]).degree(), 7);
    }

    #[test]
    fn eval_at_simple_points() {
        let big_q = boas_plus();
        let small_q = boas_minus();
        assert!((big_q.eval(0.0) - c(3.0)).norm() < 1e-15);
        assert!((small_q.eval(0.0) - c(1.0)).norm() < 1e-15);
        // 1 + e(1/2) + e(3/2) = 1 - 1 - 1
        let direct: Complex64 = [0.0, 0.5, 1.5]
            .iter()
            .map(|&t| Complex64::from_polar(1.0, TAU * t))
            .sum();
        assert!((big_q.eval(0.5) - direct).norm() < 1e-14);
        assert!((big_q.eval(0.5) - c(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn grid_eval_matches_real_eval() {
        let p = TrigPoly::make([(-5, Complex64::new(0.5, -1.0)), (2, c(1.0)), (9, c(-2.0))]);
        for j in 0..37 {
            let a = p.eval_grid(j, 37);
            let b = p.eval(j as f64 / 37.0);
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn mul_with_zero_and_parseval_seed() {
        let q = boas_plus();
        assert!((&q * &TrigPoly::zero()).is_zero());
        let s = q.abs_sq().unwrap();
        assert_eq!(s.constant_term(), c(3.0));
    }

    /// Oracle: count quadruples (a, b, c, d) in {0,1,3}^4 with a + b = c + d,
    /// weighted by the product of signs s_a s_b s_c s_d.
    fn signed_quadruple_count(signs: &[(i64, i64)]) -> i64 {
        let mut total = 0;
        for &(a, sa) in signs {
            for &(b, sb) in signs {
                for &(cc, sc) in signs {
                    for &(d, sd) in signs {
                        if a + b == cc + d {
                            total += sa * sb * sc * sd;
                        }
                    }
                }
            }
        }
        total
    }

    #[test]
    fn fourth_moment_constant_term_matches_enumeration() {
        let oracle = signed_quadruple_count(&[(0, 1), (1, 1), (3, -1)]);
        assert_eq!(oracle, 15);
        let s = boas_minus().abs_sq().unwrap();
        let s2 = &s * &s;
        assert_eq!(s2.constant_term(), c(oracle as f64));
    }

    #[test]
    fn dilate_scales_frequencies() {
        let d = boas_plus().dilate(10).unwrap();
        assert_eq!(d.frequencies().collect::<Vec<_>>(), vec![0, 10, 30]);
        let p = boas_minus();
        assert_eq!(p.dilate(1).unwrap(), p);
        assert!(TrigPoly::zero().dilate(5).unwrap().is_zero());
        assert!(p.dilate(0).is_err());
        assert!(matches!(
            TrigPoly::monomial(i64::MAX / 2, 1.0).dilate(3),
            Err(Error::FrequencyOverflow(_))
        ));
    }

    #[test]
    fn product_of_dilates_small_cases() {
        let g = boas_plus().product_of_dilates(10, 2).unwrap();
        assert_eq!(
            g.frequencies().collect::<Vec<_>>(),
            vec![0, 1, 3, 10, 11, 13, 30, 31, 33]
        );
        assert!(g.terms().all(|(_, c)| c == Complex64::new(1.0, 0.0)));

        let g = boas_minus().product_of_dilates(10, 2).unwrap();
        assert_eq!(g.coeff(13), c(-1.0));
        assert_eq!(g.coeff(33), c(1.0));

        let p = boas_minus();
        assert_eq!(p.product_of_dilates(7, 1).unwrap(), p);
    }

    #[test]
    fn product_of_dilates_rejects_overflow() {
        let r = boas_plus().product_of_dilates(1 << 21, 4);
        assert!(matches!(r, Err(Error::FrequencyOverflow(_))));
        assert!(boas_plus().product_of_dilates(1, 3).is_err());
    }

    #[test]
    fn json_triples_roundtrip() {
        let p = TrigPoly::make([(-2, Complex64::new(0.5, 0.25)), (3, c(-1.0))]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[-2,0.5,0.25],[3,-1.0,0.0]]");
        let back: TrigPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn dilate_product_agrees_with_expansion() {
        let prod = DilateProduct::new(boas_minus(), 5, 3).unwrap();
        let full = prod.expand().unwrap();
        assert_eq!(prod.degree_bound(), 3 * 31);
        for j in 0..200 {
            let a = Periodic::eval_grid(&prod, j, 200);
            let b = full.eval_grid(j, 200);
            assert!((a - b).norm() < 1e-12, "j = {j}");
        }
        assert!((prod.eval(0.3) - full.eval(0.3)).norm() < 1e-12);
    }
}
