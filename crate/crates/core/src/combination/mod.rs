//! The ring of finite Dirichlet series, polynomials over it, and the steps that turn a
//! non-monomial polynomial into a zero of its specialization near `Re(s) = 1`.

mod dseries;
mod poly;
mod roots;
mod track;

pub use dseries::FiniteDirichletSeries;
pub use poly::{
    combined_series, find_t0, monomial_test, partial_euler_product, specialize, CombinationPolynomial, Exponent,
    MonomialTest, SpecializedPolynomial, T0Search,
};
pub use roots::{nonzero_root, poly_roots, restrict_to_line, MIN_COORDINATE, ROOT_TOLERANCE};
pub use track::{rouche_budget, track_root, TrackParams, TrackResult};
