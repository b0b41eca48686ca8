//! Resolved command requests and their execution.
//!
//! A [`Request`] holds everything a run depends on, with inputs already
//! parsed and files already read, so that it can be stored in a manifest and
//! replayed without the original command line.

use std::fs;

use majorant_core::bounds::{
    batch_check, interpolation_check_with_n, peak_lower_bound, random_batch, upper_exponent_exact,
    ChainRow, CHAIN_LABEL,
};
use majorant_core::construction::{build, digits_for_target, eta_from_ratio};
use majorant_core::norms::{self, norm_quad};
use majorant_core::search::{
    exhaustive_roots, exhaustive_signs, majorant_ratio, phase_ascent, AscentConfig,
    MajorantInstance, SearchMethod,
};
use majorant_core::selfsim::{sandwich_best_effort, sandwich_bounds, step_envelopes};
use majorant_core::TrigPoly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::{BoundsArgs, ConstructArgs, LemmaArgs, MethodArg, NormArgs, PolySource, SearchArgs};
use crate::error::{CliError, Result};
use crate::parse::{parse_base_digits, parse_lambda, parse_poly, parse_poly_json};

/// Slack tolerance when deciding whether a chain inequality holds.
pub const CHAIN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "kebab-case")]
pub enum Request {
    Norm(NormParams),
    Construct(ConstructParams),
    Search(SearchParams),
    Lemma(LemmaParams),
    Bounds(BoundsParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub poly: TrigPoly,
    pub p: f64,
    pub tol: f64,
    pub force_quadrature: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructParams {
    #[serde(rename = "D")]
    pub base: u64,
    pub k: u32,
    pub p: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub lambda: Vec<i64>,
    /// Digit-product set the frequencies came from, if any.
    pub digit_set: Option<(u64, u32)>,
    pub p: f64,
    pub method: SearchMethod,
    pub q: u32,
    pub budget: u64,
    pub restarts: u32,
    pub seed: u64,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeMode {
    Certified,
    Strict,
    BestEffort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub poly: TrigPoly,
    pub alpha: f64,
    #[serde(rename = "D")]
    pub cells: usize,
    pub delta: f64,
    pub k: u32,
    pub mode: EnvelopeMode,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundsInstance {
    Single { lambda: Vec<i64>, coeffs: Vec<Complex64> },
    Random { count: usize, n_max: i64, max_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsParams {
    pub instance: BoundsInstance,
    pub n: Option<i64>,
    pub seed: u64,
    pub tol: f64,
}

impl Request {
    pub fn name(&self) -> &'static str {
        match self {
            Request::Norm(_) => "norm",
            Request::Construct(_) => "construct",
            Request::Search(_) => "search",
            Request::Lemma(_) => "lemma",
            Request::Bounds(_) => "bounds",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Request::Search(s) => s.seed,
            Request::Bounds(b) => b.seed,
            _ => 0,
        }
    }

    /// The `parameters` object stored in a manifest.
    pub fn parameters(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("requests serialize");
        v["parameters"].take()
    }

    pub fn from_parts(command: &str, parameters: &Value) -> Result<Self> {
        serde_json::from_value(json!({ "command": command, "parameters": parameters }))
            .map_err(|e| CliError::Usage(format!("cannot rebuild a '{command}' run from its parameters: {e}")))
    }

    pub fn run(&self) -> Result<Value> {
        match self {
            Request::Norm(p) => run_norm(p),
            Request::Construct(p) => run_construct(p),
            Request::Search(p) => run_search(p),
            Request::Lemma(p) => run_lemma(p),
            Request::Bounds(p) => run_bounds(p),
        }
    }
}

fn load_poly(src: &PolySource) -> Result<TrigPoly> {
    match (&src.poly, &src.poly_file) {
        (Some(s), _) => Ok(parse_poly(s)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Ok(parse_poly_json(&text)?)
        }
        (None, None) => Err(CliError::Usage("give --poly or --poly-file".into())),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--tol must lie in (0, 1), got {tol}")))
    }
}

impl NormArgs {
    pub fn resolve(&self) -> Result<Request> {
        check_tol(self.tol)?;
        Ok(Request::Norm(NormParams {
            poly: load_poly(&self.source)?,
            p: self.p,
            tol: self.tol,
            force_quadrature: self.force_quadrature,
        }))
    }
}

impl ConstructArgs {
    pub fn resolve(&self) -> Result<Request> {
        check_tol(self.tol)?;
        let k = match (self.k, self.target_n) {
            (Some(k), _) => k,
            (None, Some(n)) => digits_for_target(self.base, n)?,
            (None, None) => return Err(CliError::Usage("give --k or --target-n".into())),
        };
        Ok(Request::Construct(ConstructParams { base: self.base, k, p: self.p, tol: self.tol }))
    }
}

impl SearchArgs {
    pub fn resolve(&self, seed: u64) -> Result<Request> {
        check_tol(self.tol)?;
        let (lambda, digit_set) = match (&self.lambda, &self.digit_set) {
            (Some(s), _) => (parse_lambda(s)?, None),
            (None, Some(s)) => {
                let (d, k) = parse_base_digits(s)?;
                (build(d, k)?.lambda, Some((d, k)))
            }
            (None, None) => return Err(CliError::Usage("give --lambda or --digit-set".into())),
        };
        let method = match self.method {
            MethodArg::Signs => SearchMethod::ExhaustiveSigns,
            MethodArg::Roots => SearchMethod::ExhaustiveRoots,
            MethodArg::Ascent => SearchMethod::PhaseAscent,
        };
        Ok(Request::Search(SearchParams {
            lambda,
            digit_set,
            p: self.p,
            method,
            q: self.q,
            budget: self.budget,
            restarts: self.restarts,
            seed,
            tol: self.tol,
        }))
    }
}

impl LemmaArgs {
    pub fn resolve(&self) -> Result<Request> {
        let mode = if self.best_effort {
            EnvelopeMode::BestEffort
        } else if self.strict {
            EnvelopeMode::Strict
        } else {
            EnvelopeMode::Certified
        };
        if self.alpha < 1.0 && mode != EnvelopeMode::BestEffort {
            return Err(CliError::Usage(format!(
                "certified envelopes need alpha >= 1 (got {}); --best-effort gives an uncertified estimate",
                self.alpha
            )));
        }
        Ok(Request::Lemma(LemmaParams {
            poly: load_poly(&self.source)?,
            alpha: self.alpha,
            cells: self.cells,
            delta: self.delta,
            k: self.k,
            mode,
            samples: self.samples,
        }))
    }
}

impl BoundsArgs {
    pub fn resolve(&self, seed: u64) -> Result<Request> {
        check_tol(self.tol)?;
        let instance = match (&self.poly, &self.lambda, self.random) {
            (Some(s), _, _) => {
                let p = parse_poly(s)?;
                let (lambda, coeffs) = p.terms().unzip();
                BoundsInstance::Single { lambda, coeffs }
            }
            (None, Some(s), _) => {
                let lambda = parse_lambda(s)?;
                let coeffs = vec![Complex64::new(1.0, 0.0); lambda.len()];
                BoundsInstance::Single { lambda, coeffs }
            }
            (None, None, Some(count)) => {
                if self.n_max < 0 || self.max_size == 0 {
                    return Err(CliError::Usage("--n-max must be >= 0 and --max-size >= 1".into()));
                }
                BoundsInstance::Random { count, n_max: self.n_max, max_size: self.max_size }
            }
            (None, None, None) => return Err(CliError::Usage("give --poly, --lambda or --random".into())),
        };
        Ok(Request::Bounds(BoundsParams { instance, n: self.n, seed, tol: self.tol }))
    }
}

fn run_norm(p: &NormParams) -> Result<Value> {
    let est = if p.force_quadrature {
        norm_quad(&p.poly, p.p, p.tol)?
    } else {
        norms::norm(&p.poly, p.p, p.tol)?
    };
    Ok(json!({
        "estimate": est,
        "terms": p.poly.len(),
        "degree": p.poly.degree(),
    }))
}

fn run_construct(p: &ConstructParams) -> Result<Value> {
    let c = build(p.base, p.k)?;
    let r = c.ratio_at(p.p, p.tol)?;
    Ok(json!({
        "D": c.base,
        "k": c.digits,
        "size": c.size(),
        "n_max": c.n_max,
        "lambda": c.lambda,
        "signs": c.signs,
        "p": p.p,
        "ratio": r.ratio,
        "eta": eta_from_ratio(r.ratio, c.base, c.digits),
        "norm_big": r.norm_big,
        "norm_small": r.norm_small,
    }))
}

fn run_search(p: &SearchParams) -> Result<Value> {
    let digit_start = match p.digit_set {
        Some((d, k)) => {
            let c = build(d, k)?;
            Some(MajorantInstance::from_signs(c.lambda, &c.signs)?)
        }
        None => None,
    };
    let report = match p.method {
        SearchMethod::ExhaustiveSigns => exhaustive_signs(&p.lambda, p.p, p.tol, p.budget)?,
        SearchMethod::ExhaustiveRoots => exhaustive_roots(&p.lambda, p.p, p.q, p.tol, p.budget)?,
        SearchMethod::PhaseAscent => {
            let cfg = AscentConfig {
                restarts: p.restarts,
                seed: p.seed,
                rel_tol: p.tol,
                extra_starts: digit_start.iter().map(|i| i.coeffs().to_vec()).collect(),
                ..Default::default()
            };
            phase_ascent(&p.lambda, p.p, &cfg)?
        }
    };
    let mut out = serde_json::to_value(&report).expect("reports serialize");
    if let Some(inst) = digit_start {
        out["digit_sign_ratio"] = json!(majorant_ratio(&inst, p.p, p.tol)?);
    }
    Ok(out)
}

fn run_lemma(p: &LemmaParams) -> Result<Value> {
    let s = match p.mode {
        EnvelopeMode::Certified => sandwich_bounds(&p.poly, p.alpha, p.cells, p.delta, p.k)?,
        EnvelopeMode::Strict => {
            step_envelopes(&p.poly, p.alpha, p.cells, p.delta)?;
            sandwich_bounds(&p.poly, p.alpha, p.cells, p.delta, p.k)?
        }
        EnvelopeMode::BestEffort => sandwich_best_effort(&p.poly, p.alpha, p.cells, p.samples, p.k)?,
    };
    let mut out = serde_json::to_value(s).expect("sandwiches serialize");
    let (lo, hi) = s.product_bracket();
    out["epsilon"] = json!(s.epsilon());
    out["product_lower"] = json!(lo);
    out["product_upper"] = json!(hi);
    out["contains_target"] = json!(s.lower <= s.target + s.target_error && s.target - s.target_error <= s.upper);
    Ok(out)
}

fn run_bounds(p: &BoundsParams) -> Result<Value> {
    let exponent = upper_exponent_exact(3.into())?.to_string();
    match &p.instance {
        BoundsInstance::Single { lambda, coeffs } => {
            let inst = MajorantInstance::new(lambda.clone(), coeffs.clone())?;
            let n = p.n.unwrap_or_else(|| inst.max_frequency().max(1));
            let chain = interpolation_check_with_n(&inst, n, p.tol)?;
            let peak = peak_lower_bound(inst.lambda(), n, 257)?;
            Ok(json!({
                "chain": chain,
                "peak": peak,
                "holds": chain.holds(CHAIN_TOL),
                "upper_exponent": exponent,
            }))
        }
        BoundsInstance::Random { count, n_max, max_size } => {
            let instances = random_batch(p.seed, *count, *n_max, *max_size);
            let checked = match p.n {
                None => batch_check(&instances, p.tol)?,
                Some(n) => instances
                    .iter()
                    .map(|inst| {
                        Ok((interpolation_check_with_n(inst, n, p.tol)?, peak_lower_bound(inst.lambda(), n, 257)?))
                    })
                    .collect::<majorant_core::Result<Vec<_>>>()?,
            };
            let rows: Vec<ChainRow> = checked.iter().enumerate().map(|(i, (c, pk))| ChainRow::new(i, c, pk)).collect();
            let min_slack = checked
                .iter()
                .flat_map(|(c, _)| c.slacks())
                .fold(f64::INFINITY, f64::min);
            Ok(json!({
                "rows": rows,
                "count": rows.len(),
                "all_hold": checked.iter().all(|(c, _)| c.holds(CHAIN_TOL)),
                "all_peak_hold": checked.iter().all(|(_, pk)| pk.holds),
                "min_slack": min_slack,
                "upper_exponent": exponent,
                "label": CHAIN_LABEL,
            }))
        }
    }
}
