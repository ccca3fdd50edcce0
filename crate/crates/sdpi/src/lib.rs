//! Finite-alphabet toolkit for strong data-processing inequalities.
//!
//! A channel `W` contracts every f-divergence: `D_f(W∘P ‖ W∘Q) ≤ η · D_f(P‖Q)`
//! for some coefficient `η ≤ 1` that depends on `W` (and possibly a reference
//! input). This crate computes and bounds those contraction coefficients on
//! finite alphabets, propagates them through Bayesian networks by site
//! percolation, traces the non-linear information curves `t ↦ sup I(U;Y)`
//! subject to `I(U;X) ≤ t`, builds couplings that are simultaneously optimal
//! for two total-variation distances, and tests the less-noisy channel order.
//!
//! Module map:
//!
//! - [`probcore`] — distributions, f-divergences, mutual information, maximal
//!   couplings, and an integral-representation oracle for KL.
//! - [`channels`] — row-stochastic kernels and their algebra (composition,
//!   tensor products, named constructors for symmetric and erasure channels).
//! - [`contraction`] — `η_TV`, `η_χ²`, `η_KL`: exact formulas where they
//!   exist, certified bounds and sampling oracles elsewhere.
//! - [`netbound`] — end-to-end contraction bounds on DAGs of channels via
//!   exact/Monte-Carlo site percolation and path sums.
//! - [`ficurve`] — information curves: generic lower-bound estimation,
//!   concave envelopes, the binary-symmetric closed form and its iterates,
//!   and the erasure-channel binomial bound with tightness witnesses.
//! - [`coupling`] — doubly-optimal couplings by linear programming.
//! - [`ordering`] — the less-noisy order, erasure dominance, tensorization,
//!   and subset-sampling information bounds.
//! - [`chanspec`] — the tiny channel-spec language used by the CLI
//!   (`bsc:0.1`, `ec:3:0.25`, `bsc^4:0.1`, `file:kernel.json`).
//!
//! Conventions: probabilities are `f64`; information quantities are computed
//! in nats internally and converted at the boundary (most reported tables use
//! bits); an infinite KL or χ² divergence is the ordinary value
//! `f64::INFINITY`, not an error.

pub mod chanspec;
pub mod channels;
pub mod contraction;
pub mod coupling;
mod error;
pub mod ficurve;
pub mod netbound;
pub mod numerics;
pub mod ordering;
pub mod probcore;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
