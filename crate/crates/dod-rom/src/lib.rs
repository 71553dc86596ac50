//! Parameter-adaptive model order reduction built around a neural,
//! continuously μ-dependent orthonormal basis.
//!
//! The toolkit covers the full workflow at desk scale:
//!
//! * [`linalg`] — dense linear algebra under an arbitrary SPD inner
//!   product (weighted norms, orthonormalization, a Jacobi eigensolver).
//! * [`pod`] — generalized POD: ambient-space construction by the method
//!   of snapshots, truncation diagnostics, projection errors.
//! * [`grassmann`] — subspace distances and the Monte Carlo adaptivity
//!   score of a parameter-dependent basis.
//! * [`nets`] — a minimal dense network stack with reverse-mode
//!   differentiation (including a differentiable Gram-Schmidt block)
//!   and Adam.
//! * [`dod`] — the adaptive-basis model `μ ↦ V_μ` and its training loop.
//! * [`baselines`] — global POD, clustered POD with k-means, and a
//!   POD-enhanced autoencoder for comparison.
//! * [`rom`] — non-intrusive reduced order models: segregated
//!   coefficient networks, benchmark regressors, error decomposition.
//! * [`problems`] — analytic synthetic parametric problems with exactly
//!   known slice structure.
//! * [`io`] — binary snapshot/model files with CRC checks, CSV reports.
//! * [`cli`] — the command-line driver behind the `dodrom` binary.
//!
//! Each major capability has a runnable example under `examples/`; see
//! the repository README for the tour.

pub mod baselines;
pub mod cli;
pub mod dod;
pub mod error;
pub mod grassmann;
pub mod io;
pub mod linalg;
pub mod nets;
pub mod pod;
pub mod problems;
pub mod rom;

pub use error::{Error, Result};
