//! Numerical checks of the chain behind `‖Ta‖₃ ≪ N^{1/18} ‖F‖₃`, where
//! `(Ta)(θ) = Σ_{n∈Λ} a_n e(nθ)` and `F = T1`:
//!
//! ```text
//! interp    ‖Ta‖₃ <= ‖a‖_∞ ‖F‖₂^{1/3} ‖F‖₄^{2/3}          (Riesz–Thorin)
//! l2_l3     ‖F‖₂  <= ‖F‖₃
//! l4_l3     ‖F‖₄  <= ‖F‖_∞^{1/4} ‖F‖₃^{3/4} <= |Λ|^{1/4} ‖F‖₃^{3/4}
//! combined  ‖Ta‖₃ <= ‖a‖_∞ |Λ|^{1/6} ‖F‖₃^{5/6}
//! ```
//!
//! Combined with `|F(θ)| >= |Λ|/2` for `|θ| <= 1/(10N)`, which gives
//! `‖F‖₃³ >= (|Λ|/2)³ / (5N)`, this bounds `|Λ|` and yields the `N^{1/18}`
//! bound. Inequalities are checked numerically, not proved; implied
//! constants are measured and reported, never asserted.

use num_complex::Complex64;
use num_rational::Ratio;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::norms::{norm_even, norm_l2, norm_quad};
use crate::search::MajorantInstance;
use crate::trigpoly::{e, TrigPoly};
use crate::{Error, Result};

pub const CHAIN_LABEL: &str = "checked, not certified";

/// Relative slack `(rhs - lhs) / rhs`; zero when both sides vanish.
fn slack(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 { 0.0 } else { f64::NEG_INFINITY }
    } else {
        (rhs - lhs) / rhs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub lambda_size: usize,
    /// Length of the ambient interval `{0, …, N}`.
    pub n: i64,
    pub sup_coeff: f64,
    pub norm_f2: f64,
    pub norm_f3: f64,
    pub norm_f4: f64,
    pub norm_ta3: f64,
    /// Quadrature error bounds of `‖F‖₃` and `‖Ta‖₃`.
    pub quad_error_f3: f64,
    pub quad_error_ta3: f64,
    pub slack_interp: f64,
    pub slack_l2_l3: f64,
    /// Slack of `‖F‖₄ <= ‖F‖_∞^{1/4} ‖F‖₃^{3/4}`, with `‖F‖_∞ = |Λ|`.
    pub slack_l4_l3: f64,
    pub slack_combined: f64,
    /// `C` in `‖Ta‖₃ = C · N^{1/18} · ‖F‖₃`.
    pub implied_constant: f64,
    pub label: String,
}

impl ChainReport {
    pub fn slacks(&self) -> [f64; 4] {
        [self.slack_interp, self.slack_l2_l3, self.slack_l4_l3, self.slack_combined]
    }

    /// True when every inequality holds up to `-tol` relative slack.
    pub fn holds(&self, tol: f64) -> bool {
        self.slacks().iter().all(|&s| s >= -tol)
    }
}

pub fn interpolation_check(inst: &MajorantInstance, rel_tol: f64) -> Result<ChainReport> {
    interpolation_check_with_n(inst, inst.max_frequency().max(1), rel_tol)
}

pub fn interpolation_check_with_n(inst: &MajorantInstance, n: i64, rel_tol: f64) -> Result<ChainReport> {
    check_range(inst.lambda(), n)?;
    let big_f = inst.majorant();
    let ta = inst.poly();
    let size = inst.lambda().len() as f64;
    let sup_a = inst.sup_coeff();

    let f2 = norm_l2(&big_f).value;
    let f4 = norm_even(&big_f, 4)?.value;
    let f3 = norm_quad(&big_f, 3.0, rel_tol)?;
    let ta3 = norm_quad(&ta, 3.0, rel_tol)?;

    // F(0) = |Λ| and |F| <= Σ 1 = |Λ| everywhere.
    let sup_f = size;
    Ok(ChainReport {
        lambda_size: inst.lambda().len(),
        n,
        sup_coeff: sup_a,
        norm_f2: f2,
        norm_f3: f3.value,
        norm_f4: f4,
        norm_ta3: ta3.value,
        quad_error_f3: f3.error_bound,
        quad_error_ta3: ta3.error_bound,
        slack_interp: slack(ta3.value, sup_a * f2.powf(1.0 / 3.0) * f4.powf(2.0 / 3.0)),
        slack_l2_l3: slack(f2, f3.value),
        slack_l4_l3: slack(f4, sup_f.powf(0.25) * f3.value.powf(0.75)),
        slack_combined: slack(ta3.value, sup_a * size.powf(1.0 / 6.0) * f3.value.powf(5.0 / 6.0)),
        implied_constant: ta3.value / ((n as f64).powf(1.0 / 18.0) * f3.value),
        label: CHAIN_LABEL.to_string(),
    })
}

fn check_range(lambda: &[i64], n: i64) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParameter(format!("N must be >= 1, got {n}")));
    }
    if let Some(&m) = lambda.iter().find(|&&m| m < 0 || m > n) {
        return Err(Error::Precondition(format!("{m} is outside {{0, …, {n}}}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakBound {
    /// `min |F|` over the sampled window `|θ| <= 1/(10N)`.
    pub measured: f64,
    /// `|Λ| / 2`.
    pub predicted: f64,
    pub holds: bool,
    /// `(|Λ|/2)³ / (5N)`, the implied lower bound for `‖F‖₃³`.
    pub cube_integral_lower: f64,
}

/// Samples `|F|` on `grid` equally spaced points of `[-1/(10N), 1/(10N)]`,
/// endpoints included.
pub fn peak_lower_bound(lambda: &[i64], n: i64, grid: u64) -> Result<PeakBound> {
    if lambda.is_empty() {
        return Err(Error::InvalidParameter("Λ must be nonempty".into()));
    }
    check_range(lambda, n)?;
    let grid = grid.max(2);
    let big_f = TrigPoly::make(lambda.iter().map(|&m| (m, Complex64::new(1.0, 0.0))));
    let half_width = 1.0 / (10.0 * n as f64);
    let measured = (0..grid)
        .into_par_iter()
        .map(|i| {
            let theta = -half_width + 2.0 * half_width * i as f64 / (grid - 1) as f64;
            big_f.eval(theta).norm()
        })
        .reduce(|| f64::INFINITY, f64::min);
    let size = big_f.len() as f64;
    let predicted = size / 2.0;
    Ok(PeakBound {
        measured,
        predicted,
        holds: measured >= predicted,
        cube_integral_lower: predicted.powi(3) / (5.0 * n as f64),
    })
}

/// `2 (1/p - 1/4)(1 - 2/p)` for `2 <= p <= 4`.
pub fn upper_exponent(p: f64) -> Result<f64> {
    if !(2.0..=4.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "the interpolation exponent is defined for 2 <= p <= 4, got {p}"
        )));
    }
    Ok(2.0 * (1.0 / p - 0.25) * (1.0 - 2.0 / p))
}

/// Exact rational form of [`upper_exponent`].
pub fn upper_exponent_exact(p: Ratio<i64>) -> Result<Ratio<i64>> {
    let two = Ratio::from_integer(2);
    let four = Ratio::from_integer(4);
    if p < two || p > four {
        return Err(Error::InvalidParameter(format!(
            "the interpolation exponent is defined for 2 <= p <= 4, got {p}"
        )));
    }
    let one = Ratio::from_integer(1);
    Ok(two * (p.recip() - Ratio::new(1, 4)) * (one - two / p))
}

/// Measured `C = ‖Ta‖₃ / (N^{1/18} ‖F‖₃)`.
pub fn measured_constant(inst: &MajorantInstance, n: i64, rel_tol: f64) -> Result<f64> {
    check_range(inst.lambda(), n)?;
    let ta3 = norm_quad(&inst.poly(), 3.0, rel_tol)?.value;
    let f3 = norm_quad(&inst.majorant(), 3.0, rel_tol)?.value;
    Ok(ta3 / ((n as f64).powf(1.0 / 18.0) * f3))
}

/// A random nonempty `Λ ⊆ {0, …, n_max}` with at most `max_size` elements
/// and unimodular coefficients.
pub fn random_instance<R: Rng>(rng: &mut R, n_max: i64, max_size: usize) -> MajorantInstance {
    let universe = (n_max + 1) as usize;
    let size = rng.gen_range(1..=max_size.min(universe));
    let mut lambda: Vec<i64> = sample(rng, universe, size).into_iter().map(|i| i as i64).collect();
    lambda.sort_unstable();
    let coeffs = (0..size).map(|_| e(rng.gen::<f64>())).collect();
    MajorantInstance::new(lambda, coeffs).expect("generated instance is valid")
}

/// `count` instances from a seeded generator, one stream per instance index
/// so that the batch is reproducible in any order.
pub fn random_batch(seed: u64, count: usize, n_max: i64, max_size: usize) -> Vec<MajorantInstance> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            random_instance(&mut rng, n_max, max_size)
        })
        .collect()
}

/// One CSV-ready row per instance of a batch run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub index: usize,
    pub lambda_size: usize,
    pub n: i64,
    pub norm_ta3: f64,
    pub norm_f3: f64,
    pub slack_interp: f64,
    pub slack_l2_l3: f64,
    pub slack_l4_l3: f64,
    pub slack_combined: f64,
    pub implied_constant: f64,
    pub peak_holds: bool,
}

pub fn batch_check(instances: &[MajorantInstance], rel_tol: f64) -> Result<Vec<(ChainReport, PeakBound)>> {
    instances
        .par_iter()
        .map(|inst| {
            let chain = interpolation_check(inst, rel_tol)?;
            let peak = peak_lower_bound(inst.lambda(), chain.n, 257)?;
            Ok((chain, peak))
        })
        .collect()
}

impl ChainRow {
    pub fn new(index: usize, chain: &ChainReport, peak: &PeakBound) -> Self {
        ChainRow {
            index,
            lambda_size: chain.lambda_size,
            n: chain.n,
            norm_ta3: chain.norm_ta3,
            norm_f3: chain.norm_f3,
            slack_interp: chain.slack_interp,
            slack_l2_l3: chain.slack_l2_l3,
            slack_l4_l3: chain.slack_l4_l3,
            slack_combined: chain.slack_combined,
            implied_constant: chain.implied_constant,
            peak_holds: peak.holds,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::build;
    use crate::trigpoly::{boas_minus, boas_plus};

    #[test]
    fn boas_chain_has_positive_slack() {
        let inst = MajorantInstance::from_signs(vec![0, 1, 3], &[1, 1, -1]).unwrap();
        let rep = interpolation_check(&inst, 1e-10).unwrap();
        assert!(rep.slacks().iter().all(|&s| s > 0.0), "{rep:?}");
        assert_eq!(rep.label, CHAIN_LABEL);
    }

    #[test]
    fn all_ones_makes_ta_equal_f() {
        let inst = MajorantInstance::all_ones(vec![0, 2, 3, 8]).unwrap();
        let rep = interpolation_check(&inst, 1e-10).unwrap();
        assert_eq!(rep.norm_ta3, rep.norm_f3);
        assert!(rep.holds(1e-12));
    }

    #[test]
    fn singleton_chain_is_tight() {
        let inst = MajorantInstance::all_ones(vec![4]).unwrap();
        let rep = interpolation_check(&inst, 1e-10).unwrap();
        for v in [rep.norm_f2, rep.norm_f3, rep.norm_f4, rep.norm_ta3] {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!(rep.slacks().iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn exponent_values() {
        assert!((upper_exponent(3.0).unwrap() - 1.0 / 18.0).abs() < 1e-16);
        assert_eq!(upper_exponent(2.0).unwrap(), 0.0);
        assert_eq!(upper_exponent(4.0).unwrap(), 0.0);
        assert!(upper_exponent(1.5).is_err());
        assert!(upper_exponent(4.5).is_err());
        assert_eq!(upper_exponent_exact(Ratio::from_integer(3)).unwrap(), Ratio::new(1, 18));
        assert_eq!(upper_exponent_exact(Ratio::new(5, 2)).unwrap(), Ratio::new(3, 50));
    }

    #[test]
    fn peak_examples() {
        // Dirichlet kernel oracle: |Σ_{m=0}^{N} e(mθ)| = |sin(π(N+1)θ) / sin(πθ)|.
        let n = 20i64;
        let full: Vec<i64> = (0..=n).collect();
        let pk = peak_lower_bound(&full, n, 101).unwrap();
        let edge = 1.0 / (10.0 * n as f64);
        let pi = std::f64::consts::PI;
        let dirichlet = ((pi * (n + 1) as f64 * edge).sin() / (pi * edge).sin()).abs();
        assert!((pk.measured - dirichlet).abs() < 1e-9);
        assert!(pk.holds);

        let single = peak_lower_bound(&[7], 7, 33).unwrap();
        assert!((single.measured - 1.0).abs() < 1e-12 && single.holds);

        let c = build(10, 2).unwrap();
        let pk = peak_lower_bound(&c.lambda, 33, 513).unwrap();
        assert!(pk.measured >= 4.5);
        assert!(peak_lower_bound(&[0, 40], 33, 5).is_err());
    }

    #[test]
    fn proposition_constant_examples() {
        let ones = MajorantInstance::all_ones(vec![0, 1, 5, 9]).unwrap();
        let c = measured_constant(&ones, 9, 1e-10).unwrap();
        assert!((c - 9f64.powf(-1.0 / 18.0)).abs() < 1e-12);

        let boas = MajorantInstance::from_signs(vec![0, 1, 3], &[1, 1, -1]).unwrap();
        let c = measured_constant(&boas, 3, 1e-11).unwrap();
        let ratio = norm_quad(&boas_minus(), 3.0, 1e-11).unwrap().value
            / norm_quad(&boas_plus(), 3.0, 1e-11).unwrap().value;
        assert!((c - ratio * 3f64.powf(-1.0 / 18.0)).abs() < 1e-9);

        let set = build(10, 2).unwrap();
        let inst = MajorantInstance::from_signs(set.lambda.clone(), &set.signs).unwrap();
        let c = measured_constant(&inst, set.n_max, 1e-10).unwrap();
        assert!(c.is_finite() && c > 0.0);
    }

    #[test]
    fn batches_are_reproducible() {
        let a = random_batch(7, 20, 64, 16);
        let b = random_batch(7, 20, 64, 16);
        assert_eq!(a, b);
        assert!(a.iter().all(|i| i.lambda().len() <= 16 && i.max_frequency() <= 64));
    }
}
