//! Real polynomials in the Chebyshev basis, dominated approximation pairs
//! for singular value transformation, and their grid certifier.

mod certify;
mod cheb;
mod pairs;

pub use certify::{certify_grid, CertReport, Violations, DEFAULT_GRID};
pub use cheb::{
    arcsin_degree, cheb_fit, cheb_fit_on, cheb_nodes, clenshaw, coeffs_from_values, degree_bound,
    fit_adaptive, invsqrt_degree, maclaurin_arcsin, maclaurin_invsqrt, trig_degree, trig_poly,
    uniform_grid, ChebPoly, Parity, Trig,
};
pub use pairs::{
    dominated_extension, dominated_pair, green_even, pair_cube, pair_fractional, pair_green,
    pair_inverse, pair_overlap, pair_poly, verify_dominated, window_poly, DominatedPair,
    PairDocument, Region, Target,
};
