//! Exact operator calculus: the modified-equation hierarchy of the lattice rule and the
//! shift/difference/derivative operator identities.

mod hierarchy;
mod series;

pub use hierarchy::{
    compare_with_references, derive_hierarchy, derive_hierarchy_in, expand_mixed_to_spatial, expand_stencil,
    printed_reference_coefficients, reduce_to_mixed_form, CoefficientComparison, Expansion, Form, ModifiedPDE,
    ReferenceCoefficient, ScaleSymbols, SeriesTerm, Verdict,
};
pub use series::{
    difference_series_coeffs, log_series_coeffs, operator_identity_check, shift_series_coeffs, IdentityReport,
    OperatorSeries,
};
