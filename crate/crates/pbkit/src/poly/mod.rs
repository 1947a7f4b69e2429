//! Polynomials with rational coefficients: real-rootedness certification and related tests.

pub mod checks;
pub mod roots;
pub mod rpoly;
pub mod sturm;

pub use checks::{
    hurwitz_check, interlacing_check, kurtz_check, newton_check, stride_decompose, stride_reassemble,
    toeplitz_pf_check, HurwitzResult, InterlaceReport, NewtonResult, ToeplitzResult,
};
pub use roots::{
    floor_factorization_attempt, numeric_roots, numeric_roots_f64, pb_from_pgf, pgf_of, pgf_of_dist, root_diagnostics, imaginary_part_bound,
    FactorAttempt, PgfRecovery, RootDiagnostics,
};
pub use rpoly::RationalPoly;
pub use sturm::{count_distinct_real_roots, is_real_rooted, real_roots, square_free_factorization, square_free_part, RealRoot};
