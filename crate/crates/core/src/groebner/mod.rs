//! Exact polynomial machinery over `ℚ(γ)`: the `tan(φ/2)` form of the
//! symmetric systems and Buchberger's algorithm with the usual
//! post-processing.

mod buchberger;
mod poly;
mod ratfun;
mod weierstrass;

pub use buchberger::{
    buchberger, buchberger_with, is_groebner, real_zeros, reduce, reduce_basis, saturate, spol, BuchbergerLimits,
};
pub use poly::{Monomial, MultivariatePoly, PolySystem};
pub use ratfun::{QPoly, RationalCoefficient};
pub use weierstrass::{ml_poly_exact, spurious_factors, weierstrass_system, MAX_EXACT_ORDER};
