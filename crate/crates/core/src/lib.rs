//! Desk-scale verification laboratory for mean values of shifted Dirichlet
//! L-functions `L(1, chi, a) = sum_{n >= 1} chi(n) / (n + a)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: factorisation, Euler phi, Moebius, divisors, primitive roots.
//! * [`chars`]: the full character group mod `q` with exact exponent values.
//! * [`specfun`]: digamma, Hurwitz zeta, harmonic numbers and exact rational shifts.
//! * [`lfun`]: `L(1, chi)` and `L(1, chi, a)` through two closed routes and a
//!   truncated-series oracle.
//! * [`expsum`]: polynomial exponential sums mod `p`, the squared-sum
//!   decomposition and Weil-type bound checks.
//! * [`meanval`]: mean values over characters, their closed-form main terms,
//!   independent oracle predictions and residual sweeps.
//! * [`report`], [`cache`] and [`cli`]: serialization, on-disk cache and the
//!   `dlab` command-line front end.

pub mod arith;
pub mod cache;
pub mod chars;
pub mod cli;
pub mod error;
pub mod expsum;
pub mod lfun;
pub mod meanval;
pub mod report;
pub mod specfun;

pub use error::{Error, Result};
