//! Guesswork under q-normalized (non-extensive) expectations.
//!
//! A guessing strategy asks "Is X = x?" until it hits; `G(x|y)` is the rank at
//! which `x` is guessed when side information `Y = y` is available. This crate
//! computes the q-normalized moments `E_q[G^rho]` of such strategies, builds
//! the optimal (escort-ordered) and mismatched strategies, evaluates the
//! closed-form moment bounds that sandwich the optimum up to a factor of
//! `(1+ln|X|)^rho`, and ties those bounds to a two-parameter entropy family
//! (the logarithmic norm entropy and its conditional extension) and to the
//! relative (alpha,beta)-entropy divergence. For uncertain sources it solves
//! the minimax-redundancy problem over a finite family and certifies the
//! result against brute-force oracles.
//!
//! Everything is exact finite summation over strictly positive pmfs; power
//! sums are evaluated in log space so that exponents like q = -20 on
//! 64-symbol alphabets stay finite.
//!
//! Modules mirror the problem structure:
//!
//! - [`pmf`] — validated pmfs, joint pmfs, escort transforms, power sums
//! - [`entropy`] — Shannon, Renyi, LNE/CLNE (+ diagonal limits), KL and
//!   relative (alpha,beta)-entropies
//! - [`guessing`] — rank-bijection strategies, q-moments, the Q^(G) pmf
//! - [`bounds`] — the moment-bound theorems and bound/entropy identities
//! - [`minimax`] — worst-case redundancy and the minimax solver
//! - [`verify`] — brute-force oracles, randomized sweeps, mutation hooks

pub mod bounds;
pub mod entropy;
mod error;
pub mod guessing;
mod math;
pub mod minimax;
pub mod pmf;
pub mod verify;

pub use bounds::{BoundReport, TheoremId};
pub use entropy::AlphaBeta;
pub use error::{Error, Result};
pub use guessing::GuessingStrategy;
pub use minimax::{MinimaxResult, SolverConfig, SourceFamily};
pub use pmf::{JointPmf, NEParams, Pmf};
pub use verify::{Mutation, SweepConfig, SweepReport};
