//! Digit-product counterexample sets.
//!
//! For a base `D >= 4` and `k >= 1` digits,
//! `Λ(D, k) = { Σ_{i<k} ε_i D^i : ε_i ∈ {0, 1, 3} }` and each `n ∈ Λ` carries
//! the sign `a_n = (-1)^{W(n)}`, where `W(n)` counts the base-`D` digits of
//! `n` equal to 3. Base-`D` digit uniqueness gives
//!
//! ```text
//! F(θ) = Σ_{n∈Λ} e(nθ)     = Π_{i<k} Q(D^i θ),   Q(θ) = 1 + e(θ) + e(3θ)
//! f(θ) = Σ_{n∈Λ} a_n e(nθ) = Π_{i<k} q(D^i θ),   q(θ) = 1 + e(θ) - e(3θ)
//! ```
//!
//! and the growth of `‖f‖₃ / ‖F‖₃` in `k` is what makes `B₃(Λ)` large.

use serde::{Deserialize, Serialize};

use crate::norms::{as_even_exponent, norm_even, norm_quad, NormEstimate};
use crate::trigpoly::{boas_minus, boas_plus, DilateProduct, TrigPoly};
use crate::{Error, Result};

pub const DIGITS: [i64; 3] = [0, 1, 3];

/// Largest `k` whose `3^k` expanded terms are materialized by [`build`].
pub const MAX_EXPANDED_DIGITS: u32 = 12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DigitSet {
    pub base: u64,
    pub digits: u32,
    /// `Λ` in increasing order.
    pub lambda: Vec<i64>,
    /// `signs[i]` is the sign attached to `lambda[i]`.
    pub signs: Vec<i8>,
    /// `max(Λ) = 3 (D^k - 1) / (D - 1)`.
    pub n_max: i64,
    #[serde(skip)]
    big: TrigPoly,
    #[serde(skip)]
    small: TrigPoly,
}

/// Number of base-`D` digits of `n` equal to 3, or `None` if some digit is
/// outside `{0, 1, 3}`.
pub fn count_threes(mut n: i64, base: u64) -> Option<u32> {
    if n < 0 {
        return None;
    }
    let b = base as i64;
    let mut threes = 0;
    while n > 0 {
        match n % b {
            0 | 1 => {}
            3 => threes += 1,
            _ => return None,
        }
        n /= b;
    }
    Some(threes)
}

/// `(-1)^{W(n)}` for `n ∈ Λ(D, ·)`.
pub fn digit_sign(n: i64, base: u64) -> Option<i8> {
    count_threes(n, base).map(|w| if w % 2 == 0 { 1 } else { -1 })
}

/// Largest `k >= 1` with `D^k <= n`, i.e. `⌊log n / log D⌋`.
pub fn digits_for_target(base: u64, n: u64) -> Result<u32> {
    check_base(base)?;
    let mut k = 0u32;
    let mut power: u64 = 1;
    while let Some(next) = power.checked_mul(base) {
        if next > n {
            break;
        }
        power = next;
        k += 1;
    }
    if k == 0 {
        return Err(Error::InvalidParameter(format!(
            "target N = {n} is smaller than the base D = {base}"
        )));
    }
    Ok(k)
}

fn check_base(base: u64) -> Result<()> {
    if base < 4 {
        return Err(Error::InvalidParameter(format!(
            "digit base D must be >= 4 so that 3 is a digit and max(Λ) < D^k, got {base}"
        )));
    }
    Ok(())
}

/// Direct enumeration of `Λ(D, k)` with signs, sorted by `n`.
fn enumerate_digit_set(base: u64, digits: u32) -> Vec<(i64, i8)> {
    let b = base as i64;
    let mut out = vec![(0i64, 1i8)];
    let mut place = 1i64;
    for _ in 0..digits {
        let mut next = Vec::with_capacity(out.len() * 3);
        for &(n, s) in &out {
            for eps in DIGITS {
                let sign = if eps == 3 { -s } else { s };
                next.push((n + eps * place, sign));
            }
        }
        out = next;
        place = place.saturating_mul(b);
    }
    out.sort_unstable_by_key(|&(n, _)| n);
    out
}

pub fn build(base: u64, digits: u32) -> Result<DigitSet> {
    check_base(base)?;
    if digits < 1 {
        return Err(Error::InvalidParameter("number of digits k must be >= 1".into()));
    }
    if digits > MAX_EXPANDED_DIGITS {
        return Err(Error::InvalidParameter(format!(
            "k = {digits} would expand 3^{digits} terms; at most k = {MAX_EXPANDED_DIGITS} is supported"
        )));
    }
    let dk = (base as i64)
        .checked_pow(digits)
        .ok_or_else(|| Error::FrequencyOverflow(format!("{base}^{digits} exceeds i64")))?;

    let direct = enumerate_digit_set(base, digits);
    let big = boas_plus().product_of_dilates(base, digits)?;
    let small = boas_minus().product_of_dilates(base, digits)?;

    // The two routes must agree term for term.
    if big.len() != direct.len() || small.len() != direct.len() {
        return Err(Error::Inconsistent(format!(
            "expanded products have {} / {} terms, digit enumeration has {}",
            big.len(),
            small.len(),
            direct.len()
        )));
    }
    for &(n, s) in &direct {
        if big.coeff(n).re != 1.0 || big.coeff(n).im != 0.0 {
            return Err(Error::Inconsistent(format!("F has coefficient {} at {n}", big.coeff(n))));
        }
        if small.coeff(n).re != s as f64 || small.coeff(n).im != 0.0 {
            return Err(Error::Inconsistent(format!(
                "f has coefficient {} at {n}, expected sign {s}",
                small.coeff(n)
            )));
        }
    }

    let lambda: Vec<i64> = direct.iter().map(|&(n, _)| n).collect();
    let n_max = *lambda.last().expect("Λ is never empty");
    debug_assert!(n_max < dk);
    Ok(DigitSet {
        base,
        digits,
        signs: direct.iter().map(|&(_, s)| s).collect(),
        lambda,
        n_max,
        big,
        small,
    })
}

/// Builds with the largest `k` such that `D^k <= target`.
pub fn build_for_target(base: u64, target: u64) -> Result<DigitSet> {
    build(base, digits_for_target(base, target)?)
}

/// Norms of `F` and `f` and their ratio `‖f‖_p / ‖F‖_p`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormRatio {
    pub ratio: f64,
    pub norm_big: NormEstimate,
    pub norm_small: NormEstimate,
}

impl DigitSet {
    /// `F = Σ_{n∈Λ} e(nθ)`, expanded.
    pub fn big_f(&self) -> &TrigPoly {
        &self.big
    }

    /// `f = Σ_{n∈Λ} a_n e(nθ)`, expanded.
    pub fn small_f(&self) -> &TrigPoly {
        &self.small
    }

    /// `F` in product form, for pointwise evaluation.
    pub fn big_product(&self) -> DilateProduct {
        DilateProduct::new(boas_plus(), self.base, self.digits).expect("validated at build")
    }

    pub fn small_product(&self) -> DilateProduct {
        DilateProduct::new(boas_minus(), self.base, self.digits).expect("validated at build")
    }

    pub fn size(&self) -> usize {
        self.lambda.len()
    }

    pub fn sign(&self, n: i64) -> Option<i8> {
        self.lambda.binary_search(&n).ok().map(|i| self.signs[i])
    }

    /// `D^k`, strictly larger than every element of `Λ`.
    pub fn base_power(&self) -> u64 {
        self.base.pow(self.digits)
    }

    /// Norm ratio at exponent `p`: exact even moments of the expanded sums
    /// when `p` is an even integer, product-form quadrature otherwise.
    pub fn ratio_at(&self, p: f64, rel_tol: f64) -> Result<NormRatio> {
        let (norm_big, norm_small) = match as_even_exponent(p) {
            Some(e) => (norm_even(&self.big, e)?, norm_even(&self.small, e)?),
            None => (
                norm_quad(&self.big_product(), p, rel_tol)?,
                norm_quad(&self.small_product(), p, rel_tol)?,
            ),
        };
        Ok(NormRatio {
            ratio: norm_small.value / norm_big.value,
            norm_big,
            norm_small,
        })
    }

    pub fn ratio3(&self, rel_tol: f64) -> Result<NormRatio> {
        self.ratio_at(3.0, rel_tol)
    }

    /// `log(‖f‖₃ / ‖F‖₃) / (k log D)`.
    pub fn eta_empirical(&self, rel_tol: f64) -> Result<f64> {
        let r = self.ratio3(rel_tol)?;
        Ok(eta_from_ratio(r.ratio, self.base, self.digits))
    }
}

/// Exponent `η` with `ratio = (D^k)^η`.
pub fn eta_from_ratio(ratio: f64, base: u64, digits: u32) -> f64 {
    ratio.ln() / (digits as f64 * (base as f64).ln())
}
