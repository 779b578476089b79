//! Independent numerical oracles for the test suites.
//!
//! Nothing here is used by the library code paths it checks: quadrature is
//! double-exponential (tanh-sinh) rather than the series and grid methods of
//! `ggc-core`, matrix work goes through an explicit Gauss-Jordan inverse
//! rather than Cholesky solves, and distribution checks use empirical CDFs.

pub mod ecdf;
pub mod gamma;
pub mod gig;
pub mod linalg;
pub mod quad;
pub mod roots;
