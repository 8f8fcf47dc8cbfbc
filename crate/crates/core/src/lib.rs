//! Composite pulse sequences that cancel systematic amplitude errors.
//!
//! A faulty pulse `M_φ[θ] = R_φ[(1+ε)θ]` over-rotates by a fixed fraction
//! `ε`. This crate finds phase lists `φ₁…φ_L` such that the product of
//! faulty pulses, followed by one more faulty pulse about the x axis,
//! reproduces a target rotation with an error of order `ε^{n+1}`.
//!
//! The pieces:
//!
//! * [`su2`] — 2×2 unitaries, pulses, sequence products and distances.
//! * [`algebra`] — phase sums, the target polynomials `f_L^j(γ)`,
//!   constraint residuals, Jacobians, series checks and the κ figure of merit.
//! * [`closed_form`] — triangular closed-form solutions for short sequences.
//! * [`groebner`] — exact Buchberger pipeline over `Q(γ)`.
//! * [`continuation`] — predictor/corrector path following in `γ`.
//! * [`search`] — multi-start Newton enumeration of all solution classes.
//! * [`transforms`] — toggling to π pulses, Vitanov sequences, nonlinear
//!   error models and the symmetric rearrangement.
//! * [`harness`] — error curves, Monte Carlo noise, literature sequences.

pub mod algebra;
pub mod closed_form;
pub mod continuation;
mod error;
pub mod groebner;
pub mod harness;
mod linalg;
pub mod record;
pub mod search;
pub mod su2;
pub mod transforms;

pub use algebra::{ConstraintSpec, PhaseSumTable, PulseFamily, SeriesExpansion};
pub use closed_form::{ClosedFormFamily, RegularChain};
pub use continuation::{ContinuationPath, PathRecord, Seed};
pub use error::{Error, Result};
pub use groebner::{MultivariatePoly, PolySystem, RationalCoefficient};
pub use harness::{ErrorCurve, Metric, NoiseModel};
pub use record::SequenceRecord;
pub use search::SolutionSet;
pub use su2::{PulseSequence, Symmetry, Unitary2};
pub use transforms::NonlinearErrorModel;
