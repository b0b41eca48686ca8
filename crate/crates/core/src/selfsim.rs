//! Self-similar product integrals `∫₀¹ Π_{i<k} r(D^i θ) dθ` and the
//! step-function envelopes that turn them into two-sided bounds on
//! `‖Π_{i<k} P(D^i ·)‖_α^{1/k}`.
//!
//! The product integral factorizes as `(∫₀¹ r)^k` in two cases:
//!
//! * `r` is constant on each cell `[j/D, (j+1)/D)`. The point `θ` with base-`D`
//!   expansion `0.j₀ j₁ … j_{k-1} …` has `D^i θ` in cell `j_i`, and each digit
//!   string occupies an interval of length exactly `D^{-k}`.
//! * `r` is a trigonometric polynomial of degree `< D/2`: a vanishing sum
//!   `Σ n_i D^i` with `|n_i| < D/2` forces every `n_i = 0`.
//!
//! Envelopes `r⁻ <= |P|^α <= r⁺` are step functions built from per-cell
//! samples plus a Lipschitz correction. Once valid, `mean(r⁻)^{1/α}` and
//! `mean(r⁺)^{1/α}` bound `‖g‖_α^{1/k}` for every `k` at once.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::norms::{abs_pow, norm_quad};
use crate::trigpoly::TrigPoly;
use crate::{Error, Result};

/// Largest `D^k` for which [`step_selfsim_integral`] enumerates digit
/// strings one by one.
pub const ENUMERATION_LIMIT: u64 = 1 << 24;

/// Samples per cell beyond which envelope construction gives up.
pub const MAX_SAMPLES_PER_CELL: u64 = 1 << 16;

/// A nonnegative function constant on each of `D` equal cells of `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("a step function needs at least one cell".into()));
        }
        if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "cell {j} has value {v}; step functions must be finite and nonnegative"
            )));
        }
        Ok(StepFunction { values })
    }

    pub fn constant(cells: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; cells])
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `θ`, reduced mod 1.
    pub fn eval(&self, theta: f64) -> f64 {
        let d = self.values.len();
        let j = ((theta.rem_euclid(1.0) * d as f64) as usize).min(d - 1);
        self.values[j]
    }

    /// Exact integral over `[0, 1)`.
    pub fn mean(&self) -> f64 {
        neumaier_sum(self.values.iter().copied()) / self.values.len() as f64
    }
}

/// Plain-text form: the cell count on the first line, then one value per line.
impl fmt::Display for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.values.len())?;
        for v in &self.values {
            writeln!(f, "{v:?}")?;
        }
        Ok(())
    }
}

impl FromStr for StepFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidParameter("empty step-function text".into()))?;
        let cells: usize = header
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("line 1: bad cell count {header:?}")))?;
        let values = lines
            .enumerate()
            .map(|(i, l)| {
                l.parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("line {}: bad value {l:?}", i + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != cells {
            return Err(Error::InvalidParameter(format!(
                "header announces {cells} cells but {} values follow",
                values.len()
            )));
        }
        StepFunction::new(values)
    }
}

fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn step_mean(r: &StepFunction) -> f64 {
    r.mean()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfSimIntegral {
    /// `mean(r)^k`.
    pub closed_form: f64,
    /// Sum over digit strings of `D^{-k} Π values[j_i]`.
    pub direct: f64,
    /// False when `D^k` exceeded [`ENUMERATION_LIMIT`] and `direct` was
    /// obtained from the per-digit factorization instead.
    pub enumerated: bool,
}

/// Both sides of `∫₀¹ Π_{i<k} r(D^i θ) dθ = (∫₀¹ r)^k` for a step function.
pub fn step_selfsim_integral(r: &StepFunction, k: u32) -> Result<SelfSimIntegral> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let d = r.cells() as u64;
    let closed_form = r.mean().powi(k as i32);
    let strings = d.checked_pow(k).filter(|&n| n <= ENUMERATION_LIMIT);
    let Some(strings) = strings else {
        let direct = (0..k).map(|_| r.mean()).product();
        return Ok(SelfSimIntegral { closed_form, direct, enumerated: false });
    };

    // Digit strings are visited depth-first; the cell of θ at depth i fixes
    // j_i and hence the factor r(D^i θ) = values[j_i].
    let mut leaves = Vec::with_capacity(strings as usize);
    fn descend(values: &[f64], depth: u32, k: u32, acc: f64, out: &mut Vec<f64>) {
        if depth == k {
            out.push(acc);
            return;
        }
        for &v in values {
            descend(values, depth + 1, k, acc * v, out);
        }
    }
    descend(r.values(), 0, k, 1.0, &mut leaves);
    let cell_len = (d as f64).powi(-(k as i32));
    let direct = neumaier_sum(leaves) * cell_len;
    Ok(SelfSimIntegral { closed_form, direct, enumerated: true })
}

/// Constant coefficient of `Π_{i<k} r(D^i θ)` and `(constant coefficient of
/// r)^k`, without any precondition on the degree.
pub fn selfsim_constant_terms(r: &TrigPoly, base: u64, k: u32) -> Result<(f64, f64)> {
    let g = r.product_of_dilates(base, k)?;
    Ok((g.constant_term().re, r.constant_term().re.powi(k as i32)))
}

/// Both sides of the self-similar identity for a real trigonometric
/// polynomial of degree `< D/2`.
pub fn trig_selfsim_check(r: &TrigPoly, base: u64, k: u32) -> Result<(f64, f64)> {
    if 2 * r.degree() >= base {
        return Err(Error::Precondition(format!(
            "degree {} is not below D/2 = {}",
            r.degree(),
            base as f64 / 2.0
        )));
    }
    if !r.is_real_valued(1e-12) {
        return Err(Error::Precondition(
            "polynomial is not real-valued (coefficients are not conjugate-symmetric)".into(),
        ));
    }
    selfsim_constant_terms(r, base, k)
}

/// Lower and upper step-function envelopes of `|P|^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelopes {
    pub lower: StepFunction,
    pub upper: StepFunction,
    pub alpha: f64,
    pub samples_per_cell: u64,
    /// The Lipschitz constant used for the certification radius.
    pub lipschitz: f64,
    /// `max_j (upper[j] - lower[j])`.
    pub max_width: f64,
    /// False for best-effort envelopes (`α < 1`), which carry no guarantee.
    pub certified: bool,
}

/// Lipschitz constant of `|P|^α` for `α >= 1`:
/// `α · (Σ|c_n|)^{α-1} · 2π Σ|n c_n|`.
pub fn lipschitz_bound(p: &TrigPoly, alpha: f64) -> f64 {
    alpha * p.coeff_l1().powf(alpha - 1.0) * std::f64::consts::TAU * p.coeff_moment()
}

fn sample_cells(p: &TrigPoly, alpha: f64, cells: usize, samples: u64) -> Vec<(f64, f64)> {
    // Sample s of cell j sits at θ = (j + (s + 1/2)/S) / D = (2(jS + s) + 1) / 2DS.
    let den = 2 * cells as u64 * samples;
    (0..cells)
        .into_par_iter()
        .map(|j| {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for s in 0..samples {
                let num = 2 * (j as u64 * samples + s) + 1;
                let v = abs_pow(p.eval_grid(num, den), alpha);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (lo, hi)
        })
        .collect()
}

/// Envelopes valid pointwise (`0 <= r⁻ <= |P|^α <= r⁺`), with the sampling
/// density chosen so the Lipschitz correction is at most `δ/4` per side.
/// The cell widths are reported but not required to be below `δ`.
pub fn certified_envelopes(p: &TrigPoly, alpha: f64, cells: usize, delta: f64) -> Result<Envelopes> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!(
            "certified envelopes need alpha >= 1, got {alpha}"
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if cells == 0 {
        return Err(Error::InvalidParameter("D must be >= 1".into()));
    }
    let lip = lipschitz_bound(p, alpha);
    // every point is within 1/(2SD) of a sample; need L/(2SD) <= δ/4
    let samples = ((2.0 * lip) / (cells as f64 * delta)).ceil().max(1.0);
    if samples > MAX_SAMPLES_PER_CELL as f64 {
        return Err(Error::EnvelopeTooCoarse {
            cells,
            delta,
            achieved: f64::INFINITY,
            min_cells: min_cells_for(lip, delta),
        });
    }
    let samples = samples as u64;
    let radius = lip / (2.0 * samples as f64 * cells as f64);
    let (lower, upper): (Vec<f64>, Vec<f64>) = sample_cells(p, alpha, cells, samples)
        .into_iter()
        .map(|(lo, hi)| ((lo - radius).max(0.0), hi + radius))
        .unzip();
    let max_width = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| u - l)
        .fold(0.0, f64::max);
    Ok(Envelopes {
        lower: StepFunction::new(lower)?,
        upper: StepFunction::new(upper)?,
        alpha,
        samples_per_cell: samples,
        lipschitz: lip,
        max_width,
        certified: true,
    })
}

/// Smallest `D` for which the Lipschitz bound alone guarantees cell width
/// `<= δ`: oscillation `L/D` plus `δ/2` of correction.
fn min_cells_for(lip: f64, delta: f64) -> u64 {
    ((2.0 * lip / delta).ceil() as u64).max(1)
}

/// Envelopes with `max(0, |P|^α - δ) <= r⁻ <= |P|^α <= r⁺ <= |P|^α + δ`.
///
/// Fails with [`Error::EnvelopeTooCoarse`] when some cell of width `1/D`
/// is too wide for that, reporting a `D` that is guaranteed to work.
pub fn step_envelopes(p: &TrigPoly, alpha: f64, cells: usize, delta: f64) -> Result<Envelopes> {
    let env = certified_envelopes(p, alpha, cells, delta)?;
    if env.max_width > delta {
        return Err(Error::EnvelopeTooCoarse {
            cells,
            delta,
            achieved: env.max_width,
            min_cells: min_cells_for(env.lipschitz, delta),
        });
    }
    Ok(env)
}

/// Uncertified envelopes from `samples` points per cell, for any `α > 0`.
pub fn best_effort_envelopes(p: &TrigPoly, alpha: f64, cells: usize, samples: u64) -> Result<Envelopes> {
    if !(alpha > 0.0) || cells == 0 || samples == 0 {
        return Err(Error::InvalidParameter(
            "best-effort envelopes need alpha > 0, D >= 1 and at least one sample".into(),
        ));
    }
    let (lower, upper): (Vec<f64>, Vec<f64>) =
        sample_cells(p, alpha, cells, samples).into_iter().unzip();
    let max_width = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| u - l)
        .fold(0.0, f64::max);
    Ok(Envelopes {
        lower: StepFunction::new(lower)?,
        upper: StepFunction::new(upper)?,
        alpha,
        samples_per_cell: samples,
        lipschitz: f64::NAN,
        max_width,
        certified: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichResult {
    pub alpha: f64,
    #[serde(rename = "D")]
    pub cells: usize,
    pub k: u32,
    pub delta: f64,
    /// `mean(r⁻)^{1/α}`.
    pub lower: f64,
    /// `mean(r⁺)^{1/α}`.
    pub upper: f64,
    /// `‖P‖_α` by quadrature.
    pub target: f64,
    pub target_error: f64,
    /// Largest cell width `max_j (r⁺_j - r⁻_j)`.
    pub max_cell_width: f64,
    /// Whether the pointwise `δ`-closeness of the envelopes holds at this `D`.
    pub within_delta: bool,
    pub certified: bool,
}

impl SandwichResult {
    /// Width of the sandwich on the norm scale, `upper - lower`.
    pub fn epsilon(&self) -> f64 {
        self.upper - self.lower
    }

    /// The implied bracket for `‖g‖_α` with `g = Π_{i<k} P(D^i ·)`.
    pub fn product_bracket(&self) -> (f64, f64) {
        (self.lower.powi(self.k as i32), self.upper.powi(self.k as i32))
    }
}

/// Two-sided bounds on `‖Π_{i<k} P(D^i ·)‖_α^{1/k}` from certified
/// step-function envelopes of `|P|^α` on `D` cells.
pub fn sandwich_bounds(
    p: &TrigPoly,
    alpha: f64,
    cells: usize,
    delta: f64,
    k: u32,
) -> Result<SandwichResult> {
    let env = certified_envelopes(p, alpha, cells, delta)?;
    sandwich_from(p, &env, cells, delta, k)
}

/// As [`sandwich_bounds`] with sampled, uncertified envelopes (any `α > 0`).
pub fn sandwich_best_effort(
    p: &TrigPoly,
    alpha: f64,
    cells: usize,
    samples: u64,
    k: u32,
) -> Result<SandwichResult> {
    let env = best_effort_envelopes(p, alpha, cells, samples)?;
    sandwich_from(p, &env, cells, f64::NAN, k)
}

fn sandwich_from(p: &TrigPoly, env: &Envelopes, cells: usize, delta: f64, k: u32) -> Result<SandwichResult> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let alpha = env.alpha;
    // Quadrature needs p >= 1; the best-effort route compares on |P|^α directly.
    let (target, target_error) = if alpha >= 1.0 {
        let t = norm_quad(p, alpha, 1e-10)?;
        (t.value, t.error_bound)
    } else {
        let t = norm_quad(p, 1.0, 1e-10).ok();
        (t.map_or(f64::NAN, |t| t.value), t.map_or(f64::NAN, |t| t.error_bound))
    };
    Ok(SandwichResult {
        alpha,
        cells,
        k,
        delta,
        lower: env.lower.mean().powf(1.0 / alpha),
        upper: env.upper.mean().powf(1.0 / alpha),
        target,
        target_error,
        max_cell_width: env.max_width,
        within_delta: env.max_width <= delta,
        certified: env.certified,
    })
}

/// The separation constant `c` obtained from a pair of sandwiches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    /// `lower(q) / upper(Q)`, backed by certified bounds only.
    pub c_certified: f64,
    /// `ε = (‖q‖₃ - ‖Q‖₃) / 3` from the quadrature targets.
    pub epsilon_fixed: f64,
    /// `(‖q‖₃ - ε) / (‖Q‖₃ + ε)` with the fixed `ε`.
    pub c_fixed: f64,
}

pub fn separation(signed: &SandwichResult, unsigned: &SandwichResult) -> Separation {
    let eps = (signed.target - unsigned.target) / 3.0;
    Separation {
        c_certified: signed.lower / unsigned.upper,
        epsilon_fixed: eps,
        c_fixed: (signed.target - eps) / (unsigned.target + eps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigpoly::{boas_minus, boas_plus};
    use num_complex::Complex64;

    #[test]
    fn means() {
        assert_eq!(StepFunction::constant(5, 2.5).unwrap().mean(), 2.5);
        let mut v = vec![0.0; 8];
        v[1] = 1.0;
        assert_eq!(StepFunction::new(v).unwrap().mean(), 1.0 / 8.0);
    }

    #[test]
    fn rejects_negative_values() {
        assert!(StepFunction::new(vec![1.0, -0.1]).is_err());
        assert!(StepFunction::new(vec![]).is_err());
        assert!(StepFunction::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn explicit_sixty_four_term_integral() {
        let r = StepFunction::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        // oracle: 64 explicit digit strings
        let mut total = 0.0;
        for a in 1..=4 {
            for b in 1..=4 {
                for c in 1..=4 {
                    total += (a * b * c) as f64;
                }
            }
        }
        total /= 64.0;
        assert_eq!(total, 15.625);
        let s = step_selfsim_integral(&r, 3).unwrap();
        assert_eq!(s.closed_form, 15.625);
        assert_eq!(s.direct, 15.625);
        assert!(s.enumerated);
    }

    #[test]
    fn constant_and_zero_cell() {
        let s = step_selfsim_integral(&StepFunction::constant(6, 1.5).unwrap(), 4).unwrap();
        assert!((s.closed_form - 1.5f64.powi(4)).abs() < 1e-15);
        assert!((s.direct - 1.5f64.powi(4)).abs() < 1e-14);
        let r = StepFunction::new(vec![0.0, 2.0, 4.0]).unwrap();
        let s = step_selfsim_integral(&r, 1).unwrap();
        assert_eq!(s.direct, 2.0);
    }

    #[test]
    fn large_enumeration_falls_back() {
        let r = StepFunction::constant(64, 1.0).unwrap();
        let s = step_selfsim_integral(&r, 5).unwrap();
        assert!(!s.enumerated);
        assert_eq!(s.direct, 1.0);
    }

    #[test]
    fn text_format_roundtrip() {
        let r = StepFunction::new(vec![0.5, 1.0 / 3.0, 7.0]).unwrap();
        let text = r.to_string();
        assert!(text.starts_with("3\n"));
        assert_eq!(text.parse::<StepFunction>().unwrap(), r);
        assert!("2\n1.0\n".parse::<StepFunction>().is_err());
        assert!("x\n".parse::<StepFunction>().is_err());
    }

    #[test]
    fn trig_identity_small_cases() {
        let r = TrigPoly::from_integer_terms([(0, 2), (1, 1), (-1, 1)]);
        assert_eq!(trig_selfsim_check(&r, 4, 2).unwrap(), (4.0, 4.0));
        assert_eq!(trig_selfsim_check(&TrigPoly::constant(1.0), 4, 3).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn trig_identity_preconditions() {
        let r = TrigPoly::from_integer_terms([(0, 1), (2, 1), (-2, 1)]);
        assert!(matches!(trig_selfsim_check(&r, 4, 2), Err(Error::Precondition(_))));
        let complex = TrigPoly::make([(1, Complex64::new(0.0, 1.0)), (0, Complex64::new(1.0, 0.0))]);
        assert!(matches!(trig_selfsim_check(&complex, 8, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn constant_envelopes_are_exact() {
        let env = step_envelopes(&TrigPoly::constant(2.0), 3.0, 17, 1e-6).unwrap();
        assert!(env.lower.values().iter().all(|&v| v == 8.0));
        assert!(env.upper.values().iter().all(|&v| v == 8.0));
        let s = sandwich_bounds(&TrigPoly::constant(2.0), 3.0, 17, 1e-6, 5).unwrap();
        assert!((s.lower - 2.0).abs() < 1e-15 && (s.upper - 2.0).abs() < 1e-15);
    }

    #[test]
    fn envelope_alpha_below_one_is_rejected() {
        assert!(matches!(
            step_envelopes(&boas_plus(), 0.5, 64, 0.1),
            Err(Error::Precondition(_))
        ));
        let be = sandwich_best_effort(&boas_plus(), 0.5, 64, 16, 2).unwrap();
        assert!(!be.certified);
    }

    #[test]
    fn coarse_cells_report_a_workable_d() {
        let err = step_envelopes(&boas_plus(), 3.0, 1024, 0.05).unwrap_err();
        let Error::EnvelopeTooCoarse { achieved, min_cells, .. } = err else {
            panic!("unexpected error {err:?}");
        };
        assert!(achieved > 0.05);
        let env = step_envelopes(&boas_plus(), 3.0, min_cells as usize, 0.05).unwrap();
        assert!(env.max_width <= 0.05);
    }

    #[test]
    fn envelopes_contain_the_function() {
        let p = boas_minus();
        let env = certified_envelopes(&p, 3.0, 256, 0.05).unwrap();
        // verification grid offset from the construction samples
        let m = 256 * 97;
        for i in 0..m {
            let theta = (i as f64 + 0.31) / m as f64;
            let v = p.eval(theta).norm().powi(3);
            assert!(env.lower.eval(theta) <= v && v <= env.upper.eval(theta), "θ = {theta}");
        }
    }

    #[test]
    fn sandwich_separates_boas_pair() {
        let big = sandwich_bounds(&boas_plus(), 3.0, 1024, 0.05, 1).unwrap();
        let small = sandwich_bounds(&boas_minus(), 3.0, 1024, 0.05, 1).unwrap();
        assert!(big.lower <= big.target && big.target <= big.upper);
        assert!(small.lower <= small.target && small.target <= small.upper);
        assert!(small.lower > big.upper);
        let sep = separation(&small, &big);
        assert!(sep.c_certified > 1.0 && sep.c_fixed > 1.0);
    }
}
