//! Quantum non-commutativity of primes: numerical machinery around the
//! antisymmetric pairing `qnc(p, q)`, the skew-symmetric operator its
//! values fill, and the comparison of that operator's trace-norm budget
//! with partial sums of reciprocal zeta-zero ordinates.
//!
//! The crate is organized along the pipeline:
//!
//! - [`primes`]: index sets for operator truncations
//! - [`real`]: arbitrary-precision reals with rigorous conversion rules
//! - [`pairing`]: the series `F(x, y)`, the pairing, its closed-form
//!   bounds, the modified-operator correction, and character weights
//! - [`operator`]: dense truncations, entrywise norms, omitted-tail bounds
//! - [`spectral`]: singular values, determinants from spectra and from
//!   exterior-power traces, and the regularized determinant
//! - [`zeros`]: zeta-zero table ingestion, the counting-formula check, and
//!   the trace-norm contradiction report

pub mod error;
pub mod operator;
pub mod pairing;
pub mod primes;
pub mod real;
pub mod spectral;
pub mod zeros;

pub use error::QncError;
pub use operator::{build_matrix, tail_bound, QncMatrix, TailBound, Variant, VariantKind};
pub use pairing::{eval_f, qnc, qnc_bound, qnc_primes, tilde_correction, CharacterTable, SeriesValue};
pub use primes::PrimeTable;
pub use real::{HighPrecisionReal, HpComplex};
pub use spectral::{
    det2_from_spectrum, det_from_spectrum, det_series_coeffs, singular_values, DeterminantSeries,
    SpectrumResult,
};
pub use zeros::{contradiction_report, count_estimate, load_zeros, ContradictionReport, ZetaZeroTable};
