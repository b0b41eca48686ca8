//! Lower bounds on the majorant constant
//!
//! ```text
//! B_p(Λ) = sup_{|a_n| <= 1} ‖Σ_{n∈Λ} a_n e(nθ)‖_p / ‖Σ_{n∈Λ} e(nθ)‖_p .
//! ```
//!
//! The norm is convex in each `a_n`, so the supremum is attained with
//! `|a_n| = 1` and the searches below only visit unimodular coefficients.
//! Multiplying every coefficient by a common unit does not change the norm,
//! so the first coefficient is pinned to `1`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::norms::{abs_pow, as_even_exponent, even_moment, norm, QuadConfig};
use crate::trigpoly::{phase_index, unit_root, TrigPoly};
use crate::{Error, Result};

/// Default cap on the number of patterns an exhaustive search may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// Largest set handled by [`exhaustive_signs`].
pub const MAX_SIGN_SET: usize = 24;

const MODULUS_SLACK: f64 = 1e-12;

fn normalize_lambda(lambda: &[i64]) -> Result<Vec<i64>> {
    if lambda.is_empty() {
        return Err(Error::InvalidParameter("Λ must be nonempty".into()));
    }
    if let Some(n) = lambda.iter().find(|&&n| n < 0) {
        return Err(Error::InvalidParameter(format!("Λ must be nonnegative, found {n}")));
    }
    let mut v = lambda.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// A frequency set with a coefficient of modulus at most one on each element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantInstance {
    lambda: Vec<i64>,
    coeffs: Vec<Complex64>,
}

impl MajorantInstance {
    /// `lambda` must be strictly increasing and nonnegative; `coeffs[i]`
    /// belongs to `lambda[i]`.
    pub fn new(lambda: Vec<i64>, coeffs: Vec<Complex64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidParameter("Λ must be nonempty".into()));
        }
        if lambda.len() != coeffs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} frequencies but {} coefficients",
                lambda.len(),
                coeffs.len()
            )));
        }
        if lambda[0] < 0 || lambda.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "Λ must be strictly increasing and nonnegative".into(),
            ));
        }
        if let Some((n, c)) = lambda
            .iter()
            .zip(&coeffs)
            .find(|(_, c)| !(c.norm() <= 1.0 + MODULUS_SLACK))
        {
            return Err(Error::InvalidParameter(format!(
                "coefficient at {n} has modulus {} > 1",
                c.norm()
            )));
        }
        Ok(MajorantInstance { lambda, coeffs })
    }

    pub fn all_ones(lambda: Vec<i64>) -> Result<Self> {
        let n = lambda.len();
        Self::new(lambda, vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn from_signs(lambda: Vec<i64>, signs: &[i8]) -> Result<Self> {
        let coeffs = signs.iter().map(|&s| Complex64::new(s as f64, 0.0)).collect();
        Self::new(lambda, coeffs)
    }

    pub fn lambda(&self) -> &[i64] {
        &self.lambda
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `Ta = Σ a_n e(nθ)`.
    pub fn poly(&self) -> TrigPoly {
        TrigPoly::make(self.lambda.iter().copied().zip(self.coeffs.iter().copied()))
    }

    /// `F = Σ_{n∈Λ} e(nθ)`.
    pub fn majorant(&self) -> TrigPoly {
        TrigPoly::make(self.lambda.iter().map(|&n| (n, Complex64::new(1.0, 0.0))))
    }

    /// `‖a‖_∞`.
    pub fn sup_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_frequency(&self) -> i64 {
        *self.lambda.last().expect("nonempty")
    }
}

/// `‖Σ a_n e(nθ)‖_p / ‖Σ_{n∈Λ} e(nθ)‖_p`, exact when `p` is an even integer.
pub fn majorant_ratio(inst: &MajorantInstance, p: f64, rel_tol: f64) -> Result<f64> {
    let top = norm(&inst.poly(), p, rel_tol)?;
    let bottom = norm(&inst.majorant(), p, rel_tol)?;
    Ok(top.value / bottom.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    ExhaustiveSigns,
    ExhaustiveRoots,
    PhaseAscent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub lambda: Vec<i64>,
    pub best_coeffs: Vec<Complex64>,
    /// Root-of-unity exponents of the best pattern (empty for phase ascent).
    pub best_pattern: Vec<u32>,
    /// Lower bound for `B_p(Λ)`.
    pub best_ratio: f64,
    pub p: f64,
    pub method: SearchMethod,
    pub evaluations: u64,
    pub tolerance: f64,
    /// Shared quadrature grid, absent when exact even moments were used.
    pub grid_size: Option<u64>,
    /// Largest per-pattern relative change between the grid and its
    /// half-size subgrid.
    pub max_error_estimate: f64,
}

impl SearchReport {
    pub fn instance(&self) -> Result<MajorantInstance> {
        MajorantInstance::new(self.lambda.clone(), self.best_coeffs.clone())
    }
}

/// `e(e / q)`, exact at quarter turns.
fn root_of_unity(e: u32, q: u32) -> Complex64 {
    let e = e % q;
    if (4 * e as u64).is_multiple_of(q as u64) {
        match 4 * e as u64 / q as u64 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        unit_root(e as u64, q as u64)
    }
}

/// Values `e(n_i j / m)` for all grid points, row-major by grid point.
struct GridTable {
    m: u64,
    width: usize,
    table: Vec<Complex64>,
}

impl GridTable {
    fn new(lambda: &[i64], m: u64) -> Self {
        debug_assert!(m.is_multiple_of(2));
        let width = lambda.len();
        let table = (0..m)
            .into_par_iter()
            .flat_map_iter(|j| lambda.iter().map(move |&n| unit_root(phase_index(n, j, m), m)))
            .collect();
        GridTable { m, width, table }
    }

    fn values(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        self.table
            .chunks_exact(self.width)
            .map(|row| row.iter().zip(coeffs).map(|(t, c)| t * c).sum())
            .collect()
    }

    /// `(mean over grid, mean over even subgrid)` of `|z_j|^p`.
    fn moments(values: &[Complex64], p: f64) -> (f64, f64) {
        let (mut full, mut even) = (0.0, 0.0);
        for (j, z) in values.iter().enumerate() {
            let v = abs_pow(*z, p);
            full += v;
            if j % 2 == 0 {
                even += v;
            }
        }
        let m = values.len() as f64;
        (full / m, even / (0.5 * m))
    }

    fn moment_pair(&self, coeffs: &[Complex64], p: f64) -> (f64, f64) {
        Self::moments(&self.values(coeffs), p)
    }
}

fn relative_gap(full: f64, half: f64, p: f64) -> f64 {
    let (a, b) = (full.powf(1.0 / p), half.powf(1.0 / p));
    if a == 0.0 {
        0.0
    } else {
        (a - b).abs() / a
    }
}

/// Ratio evaluation shared by all patterns of one search.
enum Evaluator {
    Exact { exponent: u32, lambda: Vec<i64>, base: f64 },
    Grid { table: GridTable, p: f64, base: f64 },
}

impl Evaluator {
    fn new(lambda: &[i64], p: f64, rel_tol: f64, cfg: &QuadConfig) -> Result<Self> {
        if let Some(exponent) = as_even_exponent(p) {
            let ones = TrigPoly::make(lambda.iter().map(|&n| (n, Complex64::new(1.0, 0.0))));
            let base = even_moment(&ones, exponent)?;
            return Ok(Evaluator::Exact { exponent, lambda: lambda.to_vec(), base });
        }
        let table = select_grid(lambda, p, rel_tol, cfg, None)?;
        let ones = vec![Complex64::new(1.0, 0.0); lambda.len()];
        let base = table.moment_pair(&ones, p).0;
        Ok(Evaluator::Grid { table, p, base })
    }

    fn refine(&mut self, lambda: &[i64], rel_tol: f64, cfg: &QuadConfig) -> Result<()> {
        if let Evaluator::Grid { table, p, base } = self {
            *table = select_grid(lambda, *p, rel_tol, cfg, Some(2 * table.m))?;
            let ones = vec![Complex64::new(1.0, 0.0); lambda.len()];
            *base = table.moment_pair(&ones, *p).0;
        }
        Ok(())
    }

    /// `(ratio, relative error estimate)`.
    fn ratio(&self, coeffs: &[Complex64]) -> Result<(f64, f64)> {
        match self {
            Evaluator::Exact { exponent, lambda, base } => {
                let poly = TrigPoly::make(lambda.iter().copied().zip(coeffs.iter().copied()));
                let moment = even_moment(&poly, *exponent)?;
                Ok(((moment / base).powf(1.0 / *exponent as f64), 0.0))
            }
            Evaluator::Grid { table, p, base } => {
                let (full, half) = table.moment_pair(coeffs, *p);
                Ok(((full / base).powf(1.0 / p), relative_gap(full, half, *p)))
            }
        }
    }

    fn grid_size(&self) -> Option<u64> {
        match self {
            Evaluator::Exact { .. } => None,
            Evaluator::Grid { table, .. } => Some(table.m),
        }
    }
}

/// Doubles the grid until the all-ones sum and an alternating-sign probe
/// agree with their half-size subgrids to `rel_tol`.
fn select_grid(
    lambda: &[i64],
    p: f64,
    rel_tol: f64,
    cfg: &QuadConfig,
    start: Option<u64>,
) -> Result<GridTable> {
    let degree = lambda.last().copied().unwrap_or(0).unsigned_abs();
    let mut m = start.unwrap_or_else(|| 2 * cfg.initial_grid(degree).div_ceil(2));
    let ones = vec![Complex64::new(1.0, 0.0); lambda.len()];
    let probe: Vec<Complex64> = (0..lambda.len())
        .map(|i| Complex64::new(if i % 3 == 2 { -1.0 } else { 1.0 }, 0.0))
        .collect();
    for doubling in 0..=cfg.max_doublings {
        let table = GridTable::new(lambda, m);
        let (f1, h1) = table.moment_pair(&ones, p);
        let (f2, h2) = table.moment_pair(&probe, p);
        let gap = relative_gap(f1, h1, p).max(relative_gap(f2, h2, p));
        if gap <= rel_tol {
            return Ok(table);
        }
        if doubling == cfg.max_doublings {
            return Err(Error::NonConvergence {
                doublings: doubling,
                grid: m,
                last: f1.powf(1.0 / p),
                previous: h1.powf(1.0 / p),
            });
        }
        m *= 2;
    }
    unreachable!()
}

fn decode_pattern(mut index: u64, len: usize, q: u32) -> Vec<u32> {
    let mut pattern = vec![0u32; len];
    for slot in pattern.iter_mut().skip(1).rev() {
        *slot = (index % q as u64) as u32;
        index /= q as u64;
    }
    pattern
}

fn exhaustive(
    lambda: &[i64],
    p: f64,
    q: u32,
    rel_tol: f64,
    budget: u64,
    method: SearchMethod,
) -> Result<SearchReport> {
    let lambda = normalize_lambda(lambda)?;
    if q < 2 {
        return Err(Error::InvalidParameter(format!("need q >= 2 roots of unity, got {q}")));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter("rel_tol must be positive".into()));
    }
    let needed = (q as u128).pow(lambda.len() as u32 - 1);
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed,
            budget,
            advice: "use phase ascent for larger sets",
        });
    }
    let count = needed as u64;
    let cfg = QuadConfig::default();
    let mut evaluator = Evaluator::new(&lambda, p, rel_tol, &cfg)?;
    let mut evaluations = 0u64;
    loop {
        let results: Vec<(f64, f64)> = (0..count)
            .into_par_iter()
            .map(|idx| {
                let pattern = decode_pattern(idx, lambda.len(), q);
                let coeffs: Vec<Complex64> = pattern.iter().map(|&e| root_of_unity(e, q)).collect();
                evaluator.ratio(&coeffs)
            })
            .collect::<Result<_>>()?;
        evaluations += count;
        let max_err = results.iter().map(|r| r.1).fold(0.0, f64::max);
        if max_err > rel_tol {
            evaluator.refine(&lambda, rel_tol, &cfg)?;
            continue;
        }
        let best = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
        // Index order is lexicographic order of patterns, so the first index
        // within tolerance of the maximum is the canonical winner.
        let winner = results
            .iter()
            .position(|r| r.0 >= best - rel_tol * best)
            .expect("maximum is attained");
        let pattern = decode_pattern(winner as u64, lambda.len(), q);
        return Ok(SearchReport {
            best_coeffs: pattern.iter().map(|&e| root_of_unity(e, q)).collect(),
            best_pattern: pattern,
            best_ratio: results[winner].0,
            lambda,
            p,
            method,
            evaluations,
            tolerance: rel_tol,
            grid_size: evaluator.grid_size(),
            max_error_estimate: max_err,
        });
    }
}

/// All `±1` patterns with the first sign fixed to `+1`.
pub fn exhaustive_signs(lambda: &[i64], p: f64, rel_tol: f64, budget: u64) -> Result<SearchReport> {
    let distinct = normalize_lambda(lambda)?.len();
    if distinct > MAX_SIGN_SET {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << (distinct - 1),
            budget,
            advice: "sign enumeration is limited to |Λ| <= 24; use phase ascent",
        });
    }
    exhaustive(lambda, p, 2, rel_tol, budget, SearchMethod::ExhaustiveSigns)
}

/// All patterns of `q`-th roots of unity with the first coefficient `1`.
pub fn exhaustive_roots(lambda: &[i64], p: f64, q: u32, rel_tol: f64, budget: u64) -> Result<SearchReport> {
    exhaustive(lambda, p, q, rel_tol, budget, SearchMethod::ExhaustiveRoots)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentConfig {
    /// Random starts in addition to the all-ones start and `extra_starts`.
    pub restarts: u32,
    pub seed: u64,
    pub rel_tol: f64,
    pub max_sweeps: u32,
    /// Phase scan resolution before the golden-section refinement.
    pub scan_points: u32,
    pub extra_starts: Vec<Vec<Complex64>>,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            restarts: 8,
            seed: 0,
            rel_tol: 1e-9,
            max_sweeps: 200,
            scan_points: 24,
            extra_starts: Vec::new(),
        }
    }
}

struct Ascent<'a> {
    table: &'a GridTable,
    p: f64,
    evaluations: u64,
}

impl Ascent<'_> {
    fn objective(&mut self, values: &[Complex64]) -> f64 {
        self.evaluations += 1;
        values.iter().map(|z| abs_pow(*z, self.p)).sum::<f64>() / values.len() as f64
    }

    /// Objective after replacing coefficient `i` (currently `old`) by `e(phi)`.
    fn try_phase(&mut self, values: &[Complex64], i: usize, old: Complex64, phi: f64, buf: &mut Vec<Complex64>) -> f64 {
        let delta = crate::trigpoly::e(phi) - old;
        buf.clear();
        buf.extend(
            values
                .iter()
                .zip(self.table.table.chunks_exact(self.table.width))
                .map(|(z, row)| z + delta * row[i]),
        );
        self.objective(buf)
    }

    fn run(&mut self, start: &[Complex64], cfg: &AscentConfig) -> (Vec<Complex64>, f64) {
        let mut coeffs = start.to_vec();
        let mut values = self.table.values(&coeffs);
        let mut current = self.objective(&values);
        let mut buf = Vec::with_capacity(values.len());
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..cfg.max_sweeps {
            let sweep_start = current;
            for i in 1..coeffs.len() {
                let old = coeffs[i];
                let scan = cfg.scan_points.max(3) as f64;
                let mut best_phi = old.arg() / std::f64::consts::TAU;
                let mut best_val = current;
                for s in 0..cfg.scan_points.max(3) {
                    let phi = s as f64 / scan;
                    let v = self.try_phase(&values, i, old, phi, &mut buf);
                    if v > best_val {
                        best_val = v;
                        best_phi = phi;
                    }
                }
                // golden-section on one scan step either side
                let (mut a, mut b) = (best_phi - 1.0 / scan, best_phi + 1.0 / scan);
                let mut x1 = b - inv_phi * (b - a);
                let mut x2 = a + inv_phi * (b - a);
                let mut f1 = self.try_phase(&values, i, old, x1, &mut buf);
                let mut f2 = self.try_phase(&values, i, old, x2, &mut buf);
                while b - a > 1e-10 {
                    if f1 < f2 {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + inv_phi * (b - a);
                        f2 = self.try_phase(&values, i, old, x2, &mut buf);
                    } else {
                        b = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = b - inv_phi * (b - a);
                        f1 = self.try_phase(&values, i, old, x1, &mut buf);
                    }
                }
                let (phi, v) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
                let (phi, v) = if v > best_val { (phi, v) } else { (best_phi, best_val) };
                if v > current {
                    let new = crate::trigpoly::e(phi);
                    let delta = new - old;
                    for (z, row) in values.iter_mut().zip(self.table.table.chunks_exact(self.table.width)) {
                        *z += delta * row[i];
                    }
                    coeffs[i] = new;
                    current = self.objective(&values);
                }
            }
            if current - sweep_start <= cfg.rel_tol * current {
                break;
            }
        }
        (coeffs, current)
    }
}

/// Coordinate-wise phase ascent from the all-ones start, the supplied
/// extra starts, and `restarts` seeded random starts. Deterministic for a
/// given configuration.
pub fn phase_ascent(lambda: &[i64], p: f64, cfg: &AscentConfig) -> Result<SearchReport> {
    let lambda = normalize_lambda(lambda)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent must be >= 1, got {p}")));
    }
    if !(cfg.rel_tol > 0.0) {
        return Err(Error::InvalidParameter("rel_tol must be positive".into()));
    }
    let n = lambda.len();
    for s in &cfg.extra_starts {
        if s.len() != n {
            return Err(Error::InvalidParameter(format!(
                "start has {} coefficients, Λ has {n}",
                s.len()
            )));
        }
    }
    let table = select_grid(&lambda, p, cfg.rel_tol, &QuadConfig::default(), None)?;

    let mut starts = vec![vec![Complex64::new(1.0, 0.0); n]];
    starts.extend(cfg.extra_starts.iter().map(|s| pin_first(s)));
    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
        let mut s: Vec<Complex64> = (0..n).map(|_| crate::trigpoly::e(rng.gen::<f64>())).collect();
        s[0] = Complex64::new(1.0, 0.0);
        starts.push(s);
    }

    let runs: Vec<(Vec<Complex64>, f64, u64)> = starts
        .par_iter()
        .map(|s| {
            let mut ascent = Ascent { table: &table, p, evaluations: 0 };
            let (c, v) = ascent.run(s, cfg);
            (c, v, ascent.evaluations)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.2).sum();
    let (best_idx, _) = runs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if r.1 > acc.1 { (i, r.1) } else { acc });
    let best_coeffs = runs[best_idx].0.clone();

    let inst = MajorantInstance::new(lambda.clone(), best_coeffs.clone())?;
    let best_ratio = majorant_ratio(&inst, p, cfg.rel_tol)?;
    let (full, half) = table.moment_pair(&best_coeffs, p);
    Ok(SearchReport {
        lambda,
        best_coeffs,
        best_pattern: Vec::new(),
        best_ratio,
        p,
        method: SearchMethod::PhaseAscent,
        evaluations,
        tolerance: cfg.rel_tol,
        grid_size: Some(table.m),
        max_error_estimate: relative_gap(full, half, p),
    })
}

/// Rescales to unit modulus with the first coefficient equal to one.
fn pin_first(s: &[Complex64]) -> Vec<Complex64> {
    let unit = |c: Complex64| if c.norm() > 0.0 { c / c.norm() } else { Complex64::new(1.0, 0.0) };
    let rot = unit(s[0]).conj();
    s.iter().map(|&c| unit(c) * rot).collect()
}
