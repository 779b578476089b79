//! Generalized gamma convolution (GGC) mixing laws and the exponential-utility
//! optimal portfolio for normal mean-variance mixture return models.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! filesystem, the command line or threads lives in the companion `ggc` crate.
//!
//! Module map:
//!
//! * [`specfun`]: log-gamma, regularized incomplete gamma, modified Bessel `K`.
//! * [`mixing`]: mixing laws (finite gamma convolutions, GIG, atomic Thorin
//!   generators), Laplace transforms, means, integrability numbers, densities.
//! * [`sampling`]: reproducible variate generation and Monte-Carlo utilities.
//! * [`distances`]: Kolmogorov, total variation and a Fortet-Mourier bracket.
//! * [`portfolio`]: model constants, `Q(θ)`, its minimizer and the optimal portfolio.
//! * [`robustness`]: perturbation schedules, sweeps and convergence checks.
#![no_std]
// `num_traits::Float` provides float math without std; when std is linked into
// the build (tests, the CLI) its inherent methods win and the import looks unused.
#![allow(unused_imports)]

extern crate alloc;

pub mod distances;
mod error;
mod extended;
pub mod linalg;
pub mod mixing;
pub mod optimize;
pub mod portfolio;
pub mod robustness;
pub mod sampling;
pub mod specfun;

pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use mixing::MixingLaw;
