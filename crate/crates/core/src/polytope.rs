//! Paired H/V descriptions of rational polytopes and the generators used
//! throughout the crate.
//!
//! Ordering conventions are fixed so that slack matrices are reproducible:
//! cube vertices follow the reflected Gray code (first coordinate fastest),
//! pyramid vertices put the apex last and its base facet last, and product
//! vertices enumerate the left factor fastest.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{int, RatMatrix, Rational};

/// `{x : <a_i, x> <= b_i}` with `a_i` the rows of `normals`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HRep {
    pub normals: RatMatrix,
    pub offsets: Vec<Rational>,
}

impl HRep {
    pub fn new(normals: RatMatrix, offsets: Vec<Rational>) -> Result<Self> {
        if normals.rows() != offsets.len() {
            return Err(Error::Dimension(format!(
                "{} normals but {} offsets",
                normals.rows(),
                offsets.len()
            )));
        }
        Ok(HRep { normals, offsets })
    }

    pub fn ambient_dim(&self) -> usize {
        self.normals.cols()
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// `b_i - <a_i, x>`.
    pub fn slack(&self, i: usize, x: &[Rational]) -> Rational {
        let dot = self
            .normals
            .row(i)
            .iter()
            .zip(x)
            .fold(Rational::zero(), |acc, (a, v)| acc + a * v);
        &self.offsets[i] - dot
    }
}

/// Vertex list, one vertex per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VRep {
    pub vertices: RatMatrix,
}

impl VRep {
    pub fn new(vertices: RatMatrix) -> Self {
        VRep { vertices }
    }

    pub fn from_points(dim: usize, points: Vec<Vec<Rational>>) -> Result<Self> {
        Ok(VRep {
            vertices: RatMatrix::from_rows(dim, points)?,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices.cols()
    }

    pub fn len(&self) -> usize {
        self.vertices.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.rows() == 0
    }

    pub fn vertex(&self, j: usize) -> &[Rational] {
        self.vertices.row(j)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    pub name: String,
    pub h: HRep,
    pub v: VRep,
}

impl Polytope {
    /// Checks only the shape invariants (matching dimensions, at least one
    /// vertex). Use [`validate`] for the geometric ones.
    pub fn new(name: impl Into<String>, h: HRep, v: VRep) -> Result<Self> {
        if h.ambient_dim() != v.ambient_dim() {
            return Err(Error::Dimension(format!(
                "H lives in dimension {}, V in dimension {}",
                h.ambient_dim(),
                v.ambient_dim()
            )));
        }
        if v.is_empty() {
            return Err(Error::InvalidPolytope("polytope has no vertices".into()));
        }
        Ok(Polytope {
            name: name.into(),
            h,
            v,
        })
    }

    pub fn dim(&self) -> usize {
        self.h.ambient_dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.h.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.v.len()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// `conv{0, e_1, ..., e_d}` described by `x_i >= 0` and `sum x_i <= 1`.
/// For `d = 0` this is the point polytope with no inequalities.
pub fn make_simplex(d: usize) -> Polytope {
    let m = if d == 0 { 0 } else { d + 1 };
    let mut normals = RatMatrix::zeros(m, d);
    let mut offsets = vec![Rational::zero(); m];
    if d > 0 {
        for i in 0..d {
            normals.set(i, i, int(-1));
            normals.set(d, i, int(1));
        }
        offsets[d] = Rational::one();
    }
    let mut vertices = RatMatrix::zeros(d + 1, d);
    for i in 0..d {
        vertices.set(i + 1, i, Rational::one());
    }
    let name = match d {
        0 => "point".to_string(),
        1 => "segment".to_string(),
        2 => "triangle".to_string(),
        _ => format!("simplex{d}"),
    };
    Polytope {
        name,
        h: HRep { normals, offsets },
        v: VRep { vertices },
    }
}

/// `[0,1]^d` with rows `-x_1 <= 0, x_1 <= 1, -x_2 <= 0, ...` and vertices in
/// reflected Gray code order.
pub fn make_cube(d: usize) -> Result<Polytope> {
    if d == 0 {
        return Err(Error::InvalidArgument(
            "cube dimension must be at least 1 (use the 0-simplex for a point)".into(),
        ));
    }
    if d > 20 {
        return Err(Error::InvalidArgument(format!(
            "cube dimension {d} is too large"
        )));
    }
    let mut normals = RatMatrix::zeros(2 * d, d);
    let mut offsets = Vec::with_capacity(2 * d);
    for i in 0..d {
        normals.set(2 * i, i, int(-1));
        offsets.push(Rational::zero());
        normals.set(2 * i + 1, i, int(1));
        offsets.push(Rational::one());
    }
    let n = 1usize << d;
    let mut vertices = RatMatrix::zeros(n, d);
    for idx in 0..n {
        let gray = idx ^ (idx >> 1);
        for i in 0..d {
            if gray >> i & 1 == 1 {
                vertices.set(idx, i, Rational::one());
            }
        }
    }
    let name = match d {
        1 => "segment".to_string(),
        2 => "square".to_string(),
        _ => format!("cube{d}"),
    };
    Ok(Polytope {
        name,
        h: HRep { normals, offsets },
        v: VRep { vertices },
    })
}

/// Strictly convex polygon from counterclockwise vertices. Row `j` is the
/// edge through `v_j` and `v_{j+1}`.
pub fn make_polygon(points: &VRep) -> Result<Polytope> {
    if points.ambient_dim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "polygon vertices must be 2-dimensional, got dimension {}",
            points.ambient_dim()
        )));
    }
    let n = points.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "a polygon needs at least 3 vertices, got {n}"
        )));
    }
    for a in 0..n {
        for b in a + 1..n {
            if points.vertex(a) == points.vertex(b) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate polygon vertices {a} and {b}"
                )));
            }
        }
    }

    let mut normals = RatMatrix::zeros(n, 2);
    let mut offsets = Vec::with_capacity(n);
    for j in 0..n {
        let p = points.vertex(j);
        let q = points.vertex((j + 1) % n);
        // outward normal of a counterclockwise edge
        let nx = &q[1] - &p[1];
        let ny = &p[0] - &q[0];
        let b = &nx * &p[0] + &ny * &p[1];
        for (l, other) in (0..n).map(|l| (l, points.vertex(l))) {
            if l == j || l == (j + 1) % n {
                continue;
            }
            let value = &nx * &other[0] + &ny * &other[1];
            if value >= b {
                return Err(Error::InvalidArgument(format!(
                    "vertices are not strictly convex in counterclockwise order: \
                     vertex {l} is not strictly inside edge {j}-{}",
                    (j + 1) % n
                )));
            }
        }
        normals.set(j, 0, nx);
        normals.set(j, 1, ny);
        offsets.push(b);
    }
    Ok(Polytope {
        name: format!("polygon{n}"),
        h: HRep { normals, offsets },
        v: points.clone(),
    })
}

/// Pyramid over `base` in one more dimension.
///
/// The base sits at height 0. The apex defaults to the vertex centroid of the
/// base at height 1. Each base row `<a,x> <= b` is lifted to
/// `<a,x> + ((b - <a,c>)/h) t <= b`, tight at the apex `(c, h)`, and the base
/// facet (`t >= 0` for `h > 0`) is appended last. A base without inequalities
/// (a point) additionally gets the facet through the apex alone. The apex is
/// the last vertex.
pub fn make_pyramid(base: &Polytope, apex: Option<&[Rational]>) -> Result<Polytope> {
    let d = base.dim();
    let n = base.num_vertices();
    if n == 0 {
        return Err(Error::InvalidPolytope("pyramid base is empty".into()));
    }
    let (center, height) = match apex {
        Some(coords) => {
            if coords.len() != d + 1 {
                return Err(Error::InvalidArgument(format!(
                    "apex must have {} coordinates, got {}",
                    d + 1,
                    coords.len()
                )));
            }
            if coords[d].is_zero() {
                return Err(Error::InvalidArgument(
                    "apex at height 0 lies in the affine hull of the base".into(),
                ));
            }
            (coords[..d].to_vec(), coords[d].clone())
        }
        None => {
            let count = int(n as i64);
            let centroid = (0..d)
                .map(|i| {
                    (0..n).fold(Rational::zero(), |acc, j| acc + base.v.vertex(j)[i].clone())
                        / &count
                })
                .collect();
            (centroid, Rational::one())
        }
    };

    let m = base.num_constraints();
    let extra_apex_facet = m == 0;
    let rows = m + 1 + usize::from(extra_apex_facet);
    let mut normals = RatMatrix::zeros(rows, d + 1);
    let mut offsets = Vec::with_capacity(rows);
    for i in 0..m {
        for k in 0..d {
            normals.set(i, k, base.h.normals.get(i, k).clone());
        }
        normals.set(i, d, base.h.slack(i, &center) / &height);
        offsets.push(base.h.offsets[i].clone());
    }
    let sign = if height.is_positive() {
        int(1)
    } else {
        int(-1)
    };
    let mut next = m;
    if extra_apex_facet {
        normals.set(next, d, sign.clone());
        offsets.push(&sign * &height);
        next += 1;
    }
    normals.set(next, d, -sign);
    offsets.push(Rational::zero());

    let mut vertices = RatMatrix::zeros(n + 1, d + 1);
    for j in 0..n {
        for k in 0..d {
            vertices.set(j, k, base.v.vertex(j)[k].clone());
        }
    }
    for (k, c) in center.iter().enumerate() {
        vertices.set(n, k, c.clone());
    }
    vertices.set(n, d, height);

    Ok(Polytope {
        name: format!("pyramid({})", base.name),
        h: HRep { normals, offsets },
        v: VRep { vertices },
    })
}

/// `P x Q`: rows of `P` first, then rows of `Q`; vertex `(v_i^P, v_j^Q)` at
/// index `j * n_P + i`.
pub fn cartesian_product(p: &Polytope, q: &Polytope) -> Polytope {
    let (dp, dq) = (p.dim(), q.dim());
    let (mp, mq) = (p.num_constraints(), q.num_constraints());
    let (np, nq) = (p.num_vertices(), q.num_vertices());

    let mut normals = RatMatrix::zeros(mp + mq, dp + dq);
    for i in 0..mp {
        for k in 0..dp {
            normals.set(i, k, p.h.normals.get(i, k).clone());
        }
    }
    for i in 0..mq {
        for k in 0..dq {
            normals.set(mp + i, dp + k, q.h.normals.get(i, k).clone());
        }
    }
    let offsets = p.h.offsets.iter().chain(&q.h.offsets).cloned().collect();

    let mut vertices = RatMatrix::zeros(np * nq, dp + dq);
    for j in 0..nq {
        for i in 0..np {
            let row = j * np + i;
            for k in 0..dp {
                vertices.set(row, k, p.v.vertex(i)[k].clone());
            }
            for k in 0..dq {
                vertices.set(row, dp + k, q.v.vertex(j)[k].clone());
            }
        }
    }
    Polytope {
        name: format!("{} x {}", p.name, q.name),
        h: HRep { normals, offsets },
        v: VRep { vertices },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DimensionMismatch {
        h_dim: usize,
        v_dim: usize,
    },
    NoVertices,
    NegativeSlack {
        constraint: usize,
        vertex: usize,
        slack: String,
    },
    NotExtreme {
        vertex: usize,
        tight_rank: usize,
        dim: usize,
    },
    DuplicateVertex {
        first: usize,
        second: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the necessary conditions for `(H, V)` to describe the same
/// polytope. Completeness of either list is not checked.
pub fn validate(p: &Polytope) -> ValidationReport {
    let mut violations = Vec::new();
    let d = p.h.ambient_dim();
    if d != p.v.ambient_dim() {
        violations.push(Violation::DimensionMismatch {
            h_dim: d,
            v_dim: p.v.ambient_dim(),
        });
        return ValidationReport { violations };
    }
    let (m, n) = (p.num_constraints(), p.num_vertices());
    if n == 0 {
        violations.push(Violation::NoVertices);
    }

    for a in 0..n {
        for b in a + 1..n {
            if p.v.vertex(a) == p.v.vertex(b) {
                violations.push(Violation::DuplicateVertex {
                    first: a,
                    second: b,
                });
            }
        }
    }

    for j in 0..n {
        let x = p.v.vertex(j);
        let mut tight = Vec::new();
        for i in 0..m {
            let s = p.h.slack(i, x);
            if s.is_negative() {
                violations.push(Violation::NegativeSlack {
                    constraint: i,
                    vertex: j,
                    slack: s.to_string(),
                });
            } else if s.is_zero() {
                tight.push(i);
            }
        }
        if m > 0 && d > 0 {
            let cols: Vec<usize> = (0..d).collect();
            let tight_rank = p.h.normals.submatrix(&tight, &cols).rank();
            if tight_rank < d {
                violations.push(Violation::NotExtreme {
                    vertex: j,
                    tight_rank,
                    dim: d,
                });
            }
        }
    }
    ValidationReport { violations }
}
