//! Stitchkit estimates global purities, Rényi entropies, partial-transpose (PT)
//! moments and PPT-based entanglement probes of 1D qubit chains from
//! polynomially-many simulated local randomized measurements.
//!
//! Global quantities such as `Tr[ρ²]` are exponentially expensive to measure
//! directly. For short-range-correlated states they factorize (exactly for
//! finite-depth circuit states, approximately for thermal states and matrix
//! product density operators) into products of subsystem quantities over
//! overlapping intervals. The crate provides
//!
//! * an exact dense-matrix oracle for all targeted quantities ([`dense`]),
//! * brickwork circuit states and their factorization checks ([`circuits`]),
//! * an MPS/MPO backend with perfect sampling, thermal-state evolution and
//!   transfer-matrix analysis ([`tn`]),
//! * classical-shadow simulation and unbiased moment estimators ([`shadows`]),
//! * the stitched global estimators and sample-complexity calculators
//!   ([`stitch`]),
//! * the numerical factorization-error studies and PPT phase scans ([`afc`]),
//! * a batch experiment runner with JSON configs ([`cli`]).
//!
//! Every stochastic entry point takes an explicit seed; identical inputs
//! reproduce identical outputs. Start with the `examples/` directory, e.g.
//!
//! ```bash
//! cargo run --release --example oracle_tour
//! cargo run --release --example stitched_purity
//! ```

pub mod afc;
pub mod circuits;
pub mod cli;
pub mod dense;
pub mod error;
pub mod linalg;
pub mod seeds;
pub mod shadows;
pub mod stitch;
pub mod tn;

pub use dense::{DenseOperator, Interval};
pub use error::{Error, Result};
