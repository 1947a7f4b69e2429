//! Poisson binomial toolkit.

pub mod acc;
pub mod approx;
pub mod error;
pub mod golden;
pub mod lattice;
pub mod learning;
pub mod metrics;
pub mod optim;
pub mod ordering;
pub mod pb;
pub mod poly;
pub mod scalar;

pub use error::{PbError, Result};
pub use lattice::LatticeDist;
pub use pb::{darroch_mode, mean_var, pb_cdf, pb_cdf_fourier, pb_pmf, pb_pmf_exact, ModeResult, PbDist, PmfMethod, ProbParams};
