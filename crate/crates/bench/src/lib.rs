//! Fixtures for the benchmarks.

use xclab_core::{
    assemble_A, bounds, drop_redundant_rows, make_cube, make_pyramid, make_simplex,
    pyramid_normal_form, slack_matrix, BoundsConfig, Decomposition, Polytope, RatMatrix, RegionMap,
    SlackMatrix,
};

pub fn slack(p: &Polytope) -> SlackMatrix {
    drop_redundant_rows(&slack_matrix(p).expect("generated polytopes are valid"))
}

/// Assembled matrix for `base x pyramid(over)`.
pub fn assembled(base: &Polytope, over: &Polytope) -> (RatMatrix, RegionMap) {
    let pyr = make_pyramid(over, None).expect("pyramid");
    let nf = pyramid_normal_form(&slack(&pyr)).expect("normal form");
    let (a, regions) = assemble_A(&slack(base), &nf.tprime).expect("assemble");
    (a.mat, regions)
}

/// Segment x triangle, 5 x 6.
pub fn prism() -> (RatMatrix, RegionMap) {
    assembled(&make_simplex(1), &make_simplex(1))
}

/// Square x square pyramid, 9 x 20.
pub fn square_by_square_pyramid() -> (RatMatrix, RegionMap) {
    let sq = make_cube(2).expect("square");
    assembled(&sq, &sq)
}

/// Certified witness of a slack matrix.
pub fn witness(m: &RatMatrix) -> Decomposition {
    bounds(m, &BoundsConfig::default())
        .expect("nonnegative")
        .witness
}
