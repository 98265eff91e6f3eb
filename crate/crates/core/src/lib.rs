//! Distributed estimation of parametric distributions from k-bit quantized
//! samples.
//!
//! `n` sensors each observe one independent draw of `X ~ f(x|θ)` with
//! `θ ∈ [-B, B]^d`, compress it into a `k`-bit message and send it to a fusion
//! center. This crate provides the pieces needed to study that setting under
//! `L_p` and Wasserstein-`p` losses:
//!
//! - [`models`]: source families, the parameter cube and boundary-vanishing priors.
//! - [`quantize`]: per-sensor quantizers with exact message likelihoods and scores.
//! - [`infogeom`]: generalized Fisher information of order `p` and `Ψ_r` Orlicz norms.
//! - [`bounds`]: closed-form minimax lower bounds and their constants.
//! - [`estimate`]: fusion-center estimators.
//! - [`risk`]: losses, a 1-d optimal transport oracle and the Monte Carlo risk harness.
//!
//! The bound evaluators are pure functions of precomputed information
//! quantities; all numerical integration happens in [`infogeom`].

// `!(x > 0.0)` deliberately rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod estimate;
pub mod infogeom;
pub mod models;
pub mod quadrature;
pub mod quantize;
pub mod risk;
pub mod rng;
pub mod special;

pub use bounds::{BoundInputs, BoundTag, BoundValue};
pub use error::{Error, Result};
pub use estimate::{Estimator, QuantizedMleEstimator, SampleMeanEstimator, SignInversionEstimator, SimulationPlan};
pub use infogeom::{GeneralizedFisherResult, InfoSource, OrliczCertificate, ScalarLaw};
pub use models::{
    GaussianLocation, LaplaceLocation, LossOrder, ParameterSpace, ParametricModel, Prior, RaisedCosine, Regime,
};
pub use quantize::{GridQuantizer, MessageRecord, Quantizer, SignQuantizer};
pub use risk::{LossKind, RiskEstimate, Scheme};
pub use rng::SimRng;
