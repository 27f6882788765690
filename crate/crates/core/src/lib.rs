//! Exact slack matrices, nonnegative rank bounds and certificates for
//! extension complexity of products with pyramids.
//!
//! All combinatorial decisions (zero patterns, factor supports, verification)
//! are made in exact rational arithmetic. Floating point is confined to the
//! witness search in [`nnrank`], whose results are only accepted after exact
//! verification.

pub mod error;
pub mod format;
pub mod linalg;
pub mod nnrank;
pub mod polytope;
pub mod slack;
pub mod verifier;

pub use error::{Error, Result};
pub use linalg::{int, parse_rational, rat, RatMatrix, Rational};
pub use nnrank::{
    bounds, bounds_with_hint, exact_nmf_search, product_decomposition, pyramid_lift,
    pyramid_restrict, rectangle_cover_lower_bound, verify_decomposition, zero_propagation_check,
    BoundsConfig, BoundsReport, CoverOutcome, Decomposition, RankOneFactor, Rectangle,
    SearchConfig, SearchOutcome, ZeroViolation,
};
pub use polytope::{
    cartesian_product, make_cube, make_polygon, make_pyramid, make_simplex, validate, HRep,
    Polytope, VRep, ValidationReport, Violation,
};
pub use slack::{
    assemble_A, drop_redundant_rows, product_slack, pyramid_normal_form, slack_matrix,
    PyramidNormalForm, Region, RegionMap, SlackMatrix,
};
pub use verifier::{
    audit_decomposition, check_claim1, check_claim2, check_claim3, check_claim4, classify_factors,
    falsify, verify_theorem, AuditOutcome, AuditReport, ClaimReport, ClaimStatus, ClaimWitness,
    Classification, Falsification, LbStatus, TheoremVerdict,
};
