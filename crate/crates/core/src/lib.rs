//! Sparse trigonometric polynomials on the torus and the machinery needed to
//! study the Hardy–Littlewood majorant constant `B_p(Λ)`.
//!
//! Throughout the crate `e(θ) = exp(2πiθ)` and every integral is taken over
//! `[0, 1)` with Lebesgue measure, so `‖P‖_p = (∫₀¹ |P(θ)|^p dθ)^{1/p}`.
//!
//! Modules, bottom-up:
//!
//! * [`trigpoly`]: exact sparse algebra (products, dilates, products of dilates).
//! * [`norms`]: `L^p` norms by Parseval, exact even moments and grid quadrature.
//! * [`construction`]: the digit-product sets `Λ(D, k)` with digits `{0, 1, 3}`.
//! * [`selfsim`]: self-similar product integrals and step-function envelopes.
//! * [`search`]: lower bounds on `B_p(Λ)` by exhaustive and local search.
//! * [`bounds`]: the interpolation chain behind the `N^{1/18}` upper bound.

pub mod bounds;
pub mod construction;
mod error;
pub mod norms;
pub mod search;
pub mod selfsim;
pub mod trigpoly;

pub use error::{Error, Result};
pub use norms::{NormEstimate, NormMethod};
pub use trigpoly::TrigPoly;
