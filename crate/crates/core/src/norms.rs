//! `L^p` norms on the torus `[0, 1)`.
//!
//! Three routes are available:
//!
//! * Parseval for `p = 2`: `‖P‖₂² = Σ |c_n|²`.
//! * Exact even moments: for `p = 2m`, `‖P‖_p^p` is the constant coefficient
//!   of `(P · conj P)^m`, computed by coefficient convolution.
//! * Trapezoid quadrature on uniform grids with grid doubling, for any real
//!   `p >= 1`. For periodic integrands the trapezoid rule is the plain
//!   Riemann sum `(1/M) Σ_j f(j/M)`, and it is exact for trigonometric
//!   polynomials of degree `< M`.
//!
//! Grid sums are split into fixed-size chunks that may be summed in
//! parallel; the chunk sums are then reduced pairwise in index order, so
//! results do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::trigpoly::{Periodic, TrigPoly};
use crate::{Error, Result};

const CHUNK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    Parseval,
    EvenExact,
    Quadrature,
}

impl NormMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            NormMethod::Parseval => "parseval",
            NormMethod::EvenExact => "even-exact",
            NormMethod::Quadrature => "quadrature",
        }
    }
}

/// A computed norm together with how it was obtained.
///
/// `error_bound` is zero for exact methods; for quadrature it is the
/// difference between the last two grid refinements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub p: f64,
    pub method: NormMethod,
    pub error_bound: f64,
    pub grid_size: Option<u64>,
}

/// Grid policy for [`norm_quad_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub min_grid: u64,
    /// The first grid has at least `grid_per_degree · degree + 1` points.
    pub grid_per_degree: u64,
    pub max_doublings: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            min_grid: 256,
            grid_per_degree: 8,
            max_doublings: 20,
        }
    }
}

impl QuadConfig {
    pub fn initial_grid(&self, degree: u64) -> u64 {
        self.min_grid
            .max(degree.saturating_mul(self.grid_per_degree).saturating_add(1))
    }
}

pub const DEFAULT_REL_TOL: f64 = 1e-9;

pub fn norm_l2(p: &TrigPoly) -> NormEstimate {
    NormEstimate {
        value: p.coeff_l2_sq().sqrt(),
        p: 2.0,
        method: NormMethod::Parseval,
        error_bound: 0.0,
        grid_size: None,
    }
}

/// `∫₀¹ |P|^p` for even `p`, read off as the constant coefficient of
/// `(P · conj P)^{p/2}`. With integer coefficients the result is an exact
/// integer as long as intermediate coefficients stay below `2^53`.
pub fn even_moment(p: &TrigPoly, exponent: u32) -> Result<f64> {
    if exponent < 2 || !exponent.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "exact moments need an even exponent >= 2, got {exponent}"
        )));
    }
    let half = exponent / 2;
    let s = p.abs_sq()?;
    if half == 1 {
        return Ok(s.constant_term().re);
    }
    // constant term of A·B is Σ_n A_n B_{-n}
    let a = s.checked_pow(half.div_ceil(2))?;
    let b = if half.is_multiple_of(2) { a.clone() } else { s.checked_pow(half / 2)? };
    let c0: num_complex::Complex64 = a.terms().map(|(n, c)| c * b.coeff(-n)).sum();
    Ok(c0.re.max(0.0))
}

pub fn norm_even(p: &TrigPoly, exponent: u32) -> Result<NormEstimate> {
    let moment = even_moment(p, exponent)?;
    Ok(NormEstimate {
        value: moment.powf(1.0 / exponent as f64),
        p: exponent as f64,
        method: NormMethod::EvenExact,
        error_bound: 0.0,
        grid_size: None,
    })
}

/// `Some(m)` when `p = 2m` is an even integer in the range where the exact
/// route is used.
pub fn as_even_exponent(p: f64) -> Option<u32> {
    if (2.0..=64.0).contains(&p) && p.fract() == 0.0 && (p as u32).is_multiple_of(2) {
        Some(p as u32)
    } else {
        None
    }
}

/// `|z|^p` computed from `|z|²`.
#[inline]
pub fn abs_pow(z: num_complex::Complex64, p: f64) -> f64 {
    let r2 = z.norm_sqr();
    if p == 2.0 {
        r2
    } else {
        r2.powf(0.5 * p)
    }
}

/// Pairwise sum in index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// `Σ_{i < count} f(i)` with deterministic chunked reduction.
pub fn chunked_sum<F>(count: u64, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(count);
            (lo..hi).map(&f).sum::<f64>()
        })
        .collect();
    pairwise_sum(&partial)
}

/// `Σ_{j < m} |P(j/m)|^p`.
pub fn grid_power_sum<P: Periodic + ?Sized>(f: &P, p: f64, m: u64) -> f64 {
    chunked_sum(m, |j| abs_pow(f.eval_grid(j, m), p))
}

/// Sum over the odd points of a grid of size `m` (the points added when a
/// grid of size `m/2` is refined).
fn odd_power_sum<P: Periodic + ?Sized>(f: &P, p: f64, m: u64) -> f64 {
    chunked_sum(m / 2, |i| abs_pow(f.eval_grid(2 * i + 1, m), p))
}

pub fn norm_quad<P: Periodic + ?Sized>(f: &P, p: f64, rel_tol: f64) -> Result<NormEstimate> {
    norm_quad_with(f, p, rel_tol, &QuadConfig::default())
}

/// Trapezoid quadrature with grid doubling until the norm estimates of two
/// successive grids agree to `rel_tol` (relative).
pub fn norm_quad_with<P: Periodic + ?Sized>(
    f: &P,
    p: f64,
    rel_tol: f64,
    cfg: &QuadConfig,
) -> Result<NormEstimate> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent must be >= 1, got {p}")));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("rel_tol must be positive, got {rel_tol}")));
    }
    let mut m = cfg.initial_grid(f.degree_bound());
    let mut sum = grid_power_sum(f, p, m);
    let mut prev = (sum / m as f64).powf(1.0 / p);
    for doubling in 1..=cfg.max_doublings {
        let m2 = m.checked_mul(2).ok_or_else(|| {
            Error::InvalidParameter(format!("quadrature grid {m} cannot be doubled"))
        })?;
        sum += odd_power_sum(f, p, m2);
        m = m2;
        let value = (sum / m as f64).powf(1.0 / p);
        let diff = (value - prev).abs();
        if diff <= rel_tol * value || value == 0.0 {
            return Ok(NormEstimate {
                value,
                p,
                method: NormMethod::Quadrature,
                error_bound: diff,
                grid_size: Some(m),
            });
        }
        if doubling == cfg.max_doublings {
            return Err(Error::NonConvergence {
                doublings: doubling,
                grid: m,
                last: value,
                previous: prev,
            });
        }
        prev = value;
    }
    // max_doublings == 0: no refinement possible, so no convergence evidence
    Err(Error::NonConvergence {
        doublings: 0,
        grid: m,
        last: prev,
        previous: f64::NAN,
    })
}

/// Exact route for even integer `p`, quadrature otherwise.
pub fn norm(p: &TrigPoly, exponent: f64, rel_tol: f64) -> Result<NormEstimate> {
    match as_even_exponent(exponent) {
        Some(2) => Ok(norm_l2(p)),
        Some(e) => norm_even(p, e),
        None => norm_quad(p, exponent, rel_tol),
    }
}

/// `(lower, upper)` with `lower = max_j |P(j / grid)|` and
/// `upper = Σ |c_n|`, so `lower <= ‖P‖_∞ <= upper`.
pub fn sup_norm_bracket(p: &TrigPoly, grid: u64) -> Result<(f64, f64)> {
    if grid == 0 {
        return Err(Error::InvalidParameter("grid must have at least one point".into()));
    }
    let lower = (0..grid)
        .into_par_iter()
        .map(|j| p.eval_grid(j, grid).norm())
        .reduce(|| 0.0, f64::max);
    Ok((lower, p.coeff_l1()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigpoly::{boas_minus, boas_plus};
    use num_complex::Complex64;

    const FOURTH_ROOT_15: f64 = 1.967_989_671_265_430_3;

    #[test]
    fn parseval_values() {
        assert!((norm_l2(&boas_plus()).value - 3f64.sqrt()).abs() < 1e-15);
        assert!((norm_l2(&boas_minus()).value - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(norm_l2(&TrigPoly::zero()).value, 0.0);
    }

    #[test]
    fn fourth_moment_is_fifteen() {
        assert_eq!(even_moment(&boas_plus(), 4).unwrap(), 15.0);
        assert_eq!(even_moment(&boas_minus(), 4).unwrap(), 15.0);
        let n = norm_even(&boas_plus(), 4).unwrap();
        assert!((n.value - FOURTH_ROOT_15).abs() < 1e-14);
        assert_eq!(n.method, NormMethod::EvenExact);
    }

    #[test]
    fn sixth_moments_differ() {
        // Oracle: count (a,b,c,d,e,f) ∈ {0,1,3}^6 with a+b+c = d+e+f, signed.
        let digits = [(0i64, 1i64), (1, 1), (3, -1)];
        let (mut plain, mut signed) = (0i64, 0i64);
        for a in digits {
            for b in digits {
                for c in digits {
                    for d in digits {
                        for e in digits {
                            for f in digits {
                                if a.0 + b.0 + c.0 == d.0 + e.0 + f.0 {
                                    plain += 1;
                                    signed += a.1 * b.1 * c.1 * d.1 * e.1 * f.1;
                                }
                            }
                        }
                    }
                }
            }
        }
        assert_eq!((plain, signed), (99, 87));
        assert_eq!(even_moment(&boas_plus(), 6).unwrap(), plain as f64);
        assert_eq!(even_moment(&boas_minus(), 6).unwrap(), signed as f64);
    }

    #[test]
    fn single_term_norm_is_modulus() {
        let p = TrigPoly::monomial(17, Complex64::new(0.6, -0.8));
        for e in [2, 4, 6, 8] {
            assert!((norm_even(&p, e).unwrap().value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn odd_exponent_rejected_by_exact_route() {
        assert!(norm_even(&boas_plus(), 3).is_err());
        assert!(norm_even(&boas_plus(), 0).is_err());
    }

    #[test]
    fn quadrature_matches_exact_even() {
        let est = norm_quad(&boas_plus(), 4.0, 1e-10).unwrap();
        assert!((est.value - FOURTH_ROOT_15).abs() <= 1e-10 * FOURTH_ROOT_15);
        assert_eq!(est.method, NormMethod::Quadrature);
        assert!(est.grid_size.unwrap() >= 256);
    }

    #[test]
    fn boas_cubic_norms_are_bracketed_and_ordered() {
        let big = norm_quad(&boas_plus(), 3.0, 1e-8).unwrap();
        let small = norm_quad(&boas_minus(), 3.0, 1e-8).unwrap();
        assert!(3f64.sqrt() <= big.value && big.value <= FOURTH_ROOT_15);
        assert!(3f64.sqrt() <= small.value && small.value <= FOURTH_ROOT_15);
        assert!(small.value > big.value);
    }

    #[test]
    fn quadrature_of_zero_polynomial() {
        let est = norm_quad(&TrigPoly::zero(), 3.0, 1e-9).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn quadrature_reports_non_convergence() {
        let cfg = QuadConfig { min_grid: 4, grid_per_degree: 0, max_doublings: 1 };
        let p = TrigPoly::from_integer_terms([(0, 1), (5, 1), (11, -1)]);
        match norm_quad_with(&p, 3.0, 1e-14, &cfg) {
            Err(Error::NonConvergence { doublings: 1, .. }) => {}
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn quadrature_rejects_bad_arguments() {
        assert!(norm_quad(&boas_plus(), 0.5, 1e-9).is_err());
        assert!(norm_quad(&boas_plus(), 3.0, 0.0).is_err());
    }

    #[test]
    fn sup_bracket() {
        assert_eq!(sup_norm_bracket(&boas_plus(), 1).unwrap(), (3.0, 3.0));
        assert_eq!(sup_norm_bracket(&TrigPoly::zero(), 10).unwrap(), (0.0, 0.0));
        let (lo, hi) = sup_norm_bracket(&boas_minus(), 4096).unwrap();
        assert!(lo <= 3.0 && hi == 3.0);
        assert!(sup_norm_bracket(&boas_minus(), 0).is_err());
    }

    #[test]
    fn dispatch_uses_exact_routes() {
        assert_eq!(norm(&boas_plus(), 2.0, 1e-9).unwrap().method, NormMethod::Parseval);
        assert_eq!(norm(&boas_plus(), 4.0, 1e-9).unwrap().method, NormMethod::EvenExact);
        assert_eq!(norm(&boas_plus(), 3.0, 1e-9).unwrap().method, NormMethod::Quadrature);
    }

    #[test]
    fn estimate_json_shape() {
        let est = norm_even(&boas_plus(), 4).unwrap();
        let v = serde_json::to_value(est).unwrap();
        assert_eq!(v["method"], "even-exact");
        assert_eq!(v["p"], 4.0);
        assert!(v["grid_size"].is_null());
    }
}
