//! Desk-scale workbench for noise-stability experiments on planted estimation
//! problems.
//!
//! Four planted models are provided (planted shortest path, random linear
//! code, Gaussian subset sum and sparse tensor PCA), each with its noise
//! operator `T_rho`, an exact posterior-mean estimator computed by
//! enumeration, and the polynomial-time solver that recovers the signal in the
//! noiseless regime. On top of these sit Monte-Carlo estimators for the noisy
//! MMSE, the `(rho, eta)`-stability of arbitrary estimators, and the lower
//! bound relating the two.
//!
//! The crate is organised bottom-up:
//!
//! - [`rng`]: seed derivation so every trial draws from its own stream.
//! - [`models`], [`noise`]: instance types, samplers and noise operators.
//! - [`solvers`]: shortest path, GF(2) elimination and lattice subset-sum.
//! - [`bayes`]: exact posterior means and MMSE curves.
//! - [`stability`]: estimator registry, stability reports and the barrier check.
//! - [`lowdeg`]: Hermite/diagram formulas, boolean characters and stability of
//!   low-degree polynomials.
//! - [`counting`]: approximate-path counts and their first moment.
//! - [`experiment`]: configuration, runner and CSV/JSON/SVG emitters used by
//!   the command-line front end.

pub mod bayes;
pub mod counting;
pub mod error;
pub mod experiment;
pub mod gf2;
pub mod lowdeg;
pub mod models;
pub mod noise;
pub mod rng;
pub mod solvers;
pub mod stability;
pub mod stats;

mod par;

pub use error::{Error, Result};
pub use models::{
    Graph, GssInstance, GssParams, ModelInstance, ModelKind, ModelParams, Observation, PspInstance,
    PspParams, RlcInstance, RlcParams, Tensor, TpcaInstance, TpcaParams,
};
