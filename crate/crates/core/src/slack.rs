//! Slack matrices, the pyramid normal form, and the block matrix `A` used by
//! the product-with-pyramid argument together with its colour regions.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{RatMatrix, Rational};
use crate::polytope::Polytope;

/// Nonnegative matrix whose rows and columns refer back to the constraints
/// and vertices of some polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlackMatrix {
    pub mat: RatMatrix,
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
}

impl SlackMatrix {
    /// Wraps a nonnegative matrix with identity labels.
    pub fn new(mat: RatMatrix) -> Result<Self> {
        if let Some((row, col)) = mat.first_negative() {
            return Err(Error::NegativeEntry {
                row,
                col,
                value: mat.get(row, col).to_string(),
            });
        }
        Ok(SlackMatrix {
            row_labels: (0..mat.rows()).collect(),
            col_labels: (0..mat.cols()).collect(),
            mat,
        })
    }

    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    /// Rows without a zero entry.
    pub fn positive_rows(&self) -> Vec<usize> {
        (0..self.rows())
            .filter(|&i| self.mat.row(i).iter().all(|x| !x.is_zero()))
            .collect()
    }
}

/// `S_ij = b_i - <a_i, v_j>`.
pub fn slack_matrix(p: &Polytope) -> Result<SlackMatrix> {
    let (m, n) = (p.num_constraints(), p.num_vertices());
    let mut mat = RatMatrix::zeros(m, n);
    for j in 0..n {
        let v = p.v.vertex(j);
        for i in 0..m {
            let s = p.h.slack(i, v);
            if s < Rational::zero() {
                return Err(Error::NegativeSlack {
                    row: i,
                    col: j,
                    value: s.to_string(),
                });
            }
            mat.set(i, j, s);
        }
    }
    Ok(SlackMatrix {
        mat,
        row_labels: (0..m).collect(),
        col_labels: (0..n).collect(),
    })
}

/// Keeps only rows containing at least one zero.
pub fn drop_redundant_rows(s: &SlackMatrix) -> SlackMatrix {
    let keep: Vec<usize> = (0..s.rows())
        .filter(|&i| s.mat.row(i).iter().any(Zero::is_zero))
        .collect();
    let cols: Vec<usize> = (0..s.cols()).collect();
    SlackMatrix {
        mat: s.mat.submatrix(&keep, &cols),
        row_labels: keep.iter().map(|&i| s.row_labels[i]).collect(),
        col_labels: s.col_labels.clone(),
    }
}

/// `T = [[T', 0], [0, h]]` up to a permutation, with the corner scaled to 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PyramidNormalForm {
    pub tprime: SlackMatrix,
    /// Row of the base facet in the input.
    pub apex_row: usize,
    /// Column of the apex vertex in the input.
    pub apex_col: usize,
    /// Original corner value; the base-facet row was divided by it.
    pub corner: Rational,
}

impl PyramidNormalForm {
    /// `[[T', 0], [0, 1]]`.
    pub fn normalized(&self) -> SlackMatrix {
        let tp = &self.tprime.mat;
        let (m, n) = (tp.rows() + 1, tp.cols() + 1);
        let mut mat = RatMatrix::zeros(m, n);
        for i in 0..tp.rows() {
            for j in 0..tp.cols() {
                mat.set(i, j, tp.get(i, j).clone());
            }
        }
        mat.set(m - 1, n - 1, Rational::one());
        let mut row_labels = self.tprime.row_labels.clone();
        row_labels.push(self.apex_row);
        let mut col_labels = self.tprime.col_labels.clone();
        col_labels.push(self.apex_col);
        SlackMatrix {
            mat,
            row_labels,
            col_labels,
        }
    }
}

/// Finds an apex column whose only nonzero sits in a row that is zero
/// everywhere else. Among several candidates the lexicographically largest
/// `(row, col)` wins, which for pyramids built by
/// [`crate::polytope::make_pyramid`] is the base facet and the apex.
pub fn pyramid_normal_form(t: &SlackMatrix) -> Result<PyramidNormalForm> {
    let (m, n) = (t.rows(), t.cols());
    let mut best: Option<(usize, usize)> = None;
    for c in 0..n {
        let nonzero: Vec<usize> = (0..m).filter(|&i| !t.mat.get(i, c).is_zero()).collect();
        let [r] = nonzero[..] else { continue };
        let row_clear = (0..n).all(|j| j == c || t.mat.get(r, j).is_zero());
        if row_clear && best.is_none_or(|b| (r, c) > b) {
            best = Some((r, c));
        }
    }
    let Some((r, c)) = best else {
        let reason = if t.positive_rows().is_empty() {
            "no column has a single nonzero entry in an otherwise zero row"
        } else {
            "description has redundant rows"
        };
        return Err(Error::NotPyramid(reason.into()));
    };
    let rows: Vec<usize> = (0..m).filter(|&i| i != r).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| j != c).collect();
    Ok(PyramidNormalForm {
        tprime: SlackMatrix {
            mat: t.mat.submatrix(&rows, &cols),
            row_labels: rows.iter().map(|&i| t.row_labels[i]).collect(),
            col_labels: cols.iter().map(|&j| t.col_labels[j]).collect(),
        },
        apex_row: r,
        apex_col: c,
        corner: t.mat.get(r, c).clone(),
    })
}

/// Slack matrix of `P x Q` from slack matrices of `P` and `Q`: `S` repeated
/// over `n_Q` column blocks on top, block `j` of the lower part repeats
/// column `t_j` of `T`.
pub fn product_slack(s: &SlackMatrix, t: &SlackMatrix) -> SlackMatrix {
    let (mp, np) = (s.rows(), s.cols());
    let (mq, nq) = (t.rows(), t.cols());
    let mut mat = RatMatrix::zeros(mp + mq, np * nq);
    for j in 0..nq {
        for i in 0..np {
            let col = j * np + i;
            for r in 0..mp {
                mat.set(r, col, s.mat.get(r, i).clone());
            }
            for r in 0..mq {
                mat.set(mp + r, col, t.mat.get(r, j).clone());
            }
        }
    }
    SlackMatrix {
        row_labels: (0..mp + mq).collect(),
        col_labels: (0..np * nq).collect(),
        mat,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Green,
    Red,
    Blue,
    Zero,
}

/// Block layout of `A`: rows are `m_P` rows of `S`, `m_Q'` rows of `T'`,
/// then the apex row; columns are `k + 1` blocks of `n_P` columns, the last
/// one belonging to the apex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionMap {
    pub n_p: usize,
    pub m_p: usize,
    pub k: usize,
    pub m_qprime: usize,
}

impl RegionMap {
    pub fn rows(&self) -> usize {
        self.m_p + self.m_qprime + 1
    }

    pub fn cols(&self) -> usize {
        self.n_p * (self.k + 1)
    }

    pub fn apex_row(&self) -> usize {
        self.m_p + self.m_qprime
    }

    pub fn apex_block(&self) -> usize {
        self.k
    }

    /// 0-based block of column `j`.
    pub fn block_of(&self, j: usize) -> usize {
        j / self.n_p
    }

    pub fn block_cols(&self, b: usize) -> std::ops::Range<usize> {
        b * self.n_p..(b + 1) * self.n_p
    }

    pub fn is_s_row(&self, i: usize) -> bool {
        i < self.m_p
    }

    pub fn is_red_row(&self, i: usize) -> bool {
        i >= self.m_p && i < self.apex_row()
    }

    pub fn region(&self, i: usize, j: usize) -> Region {
        let apex_block = self.block_of(j) == self.k;
        if i == self.apex_row() {
            if apex_block {
                Region::Blue
            } else {
                Region::Zero
            }
        } else if self.is_s_row(i) {
            if apex_block {
                Region::Blue
            } else {
                Region::Green
            }
        } else if apex_block {
            Region::Zero
        } else {
            Region::Red
        }
    }

    pub fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if self.n_p == 0 || (rows, cols) != (self.rows(), self.cols()) {
            return Err(Error::Dimension(format!(
                "region map describes a {}x{} matrix, got {rows}x{cols}",
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }
}

/// `A = product_slack(S, [[T', 0], [0, 1]])` and its region map.
#[allow(non_snake_case)]
pub fn assemble_A(s: &SlackMatrix, tprime: &SlackMatrix) -> Result<(SlackMatrix, RegionMap)> {
    if let Some(&row) = s.positive_rows().first() {
        return Err(Error::RedundantRow(row));
    }
    if tprime.cols() == 0 {
        return Err(Error::InvalidArgument(
            "T' has no columns: the pyramid needs at least one base vertex".into(),
        ));
    }
    if s.cols() == 0 {
        return Err(Error::InvalidArgument("S has no columns".into()));
    }
    let t = PyramidNormalForm {
        tprime: tprime.clone(),
        apex_row: tprime.rows(),
        apex_col: tprime.cols(),
        corner: Rational::one(),
    }
    .normalized();
    let regions = RegionMap {
        n_p: s.cols(),
        m_p: s.rows(),
        k: tprime.cols(),
        m_qprime: tprime.rows(),
    };
    Ok((product_slack(s, &t), regions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;
    use crate::polytope::{cartesian_product, make_cube, make_pyramid, make_simplex};

    fn sm(rows: &[&[i64]]) -> SlackMatrix {
        SlackMatrix::new(RatMatrix::from_ints(rows)).unwrap()
    }

    fn square() -> RatMatrix {
        RatMatrix::from_ints(&[[0, 1, 1, 0], [1, 0, 0, 1], [0, 0, 1, 1], [1, 1, 0, 0]])
    }

    #[test]
    fn slack_examples() {
        let tri = slack_matrix(&make_simplex(2)).unwrap();
        assert_eq!(
            tri.mat,
            RatMatrix::from_ints(&[[0, 1, 0], [0, 0, 1], [1, 0, 0]])
        );
        assert_eq!(slack_matrix(&make_cube(2).unwrap()).unwrap().mat, square());
        let point = slack_matrix(&make_simplex(0)).unwrap();
        assert_eq!(point.mat.shape(), (0, 1));
    }

    #[test]
    fn slack_rejects_outside_vertex() {
        let mut sq = make_cube(2).unwrap();
        sq.v.vertices.set(1, 0, int(2));
        assert!(matches!(
            slack_matrix(&sq),
            Err(Error::NegativeSlack { row: 1, col: 1, .. })
        ));
    }

    #[test]
    fn redundant_rows() {
        let s = SlackMatrix::new(square()).unwrap();
        assert_eq!(drop_redundant_rows(&s), s);

        let padded = SlackMatrix::new(
            square()
                .vstack(&RatMatrix::from_ints(&[[1, 1, 1, 1]]))
                .unwrap(),
        )
        .unwrap();
        assert_eq!(drop_redundant_rows(&padded).mat, square());

        let dense = sm(&[&[1, 2], &[3, 4]]);
        assert_eq!(drop_redundant_rows(&dense).mat.shape(), (0, 2));
    }

    #[test]
    fn normal_form_of_triangle() {
        let t = SlackMatrix::new(RatMatrix::from_ints(&[[0, 1, 0], [1, 0, 0], [0, 0, 3]])).unwrap();
        let nf = pyramid_normal_form(&t).unwrap();
        assert_eq!(nf.tprime.mat, RatMatrix::from_ints(&[[0, 1], [1, 0]]));
        assert_eq!((nf.apex_row, nf.apex_col), (2, 2));
        assert_eq!(nf.corner, int(3));
        assert_eq!(
            nf.normalized().mat,
            RatMatrix::from_ints(&[[0, 1, 0], [1, 0, 0], [0, 0, 1]])
        );
    }

    #[test]
    fn normal_form_of_square_pyramid() {
        let pyr = make_pyramid(&make_cube(2).unwrap(), None).unwrap();
        let nf = pyramid_normal_form(&slack_matrix(&pyr).unwrap()).unwrap();
        assert_eq!(nf.tprime.mat, square());
        assert_eq!((nf.apex_row, nf.apex_col), (4, 4));
    }

    #[test]
    fn square_is_not_a_pyramid() {
        let s = SlackMatrix::new(square()).unwrap();
        assert!(matches!(pyramid_normal_form(&s), Err(Error::NotPyramid(_))));
    }

    #[test]
    fn product_slack_matches_product_polytope() {
        let seg = make_simplex(1);
        let s = slack_matrix(&seg).unwrap();
        let prod = product_slack(&s, &s);
        assert_eq!(
            prod.mat,
            slack_matrix(&cartesian_product(&seg, &seg)).unwrap().mat
        );
        assert_eq!(
            prod.mat,
            RatMatrix::from_ints(&[[0, 1, 0, 1], [1, 0, 1, 0], [0, 0, 1, 1], [1, 1, 0, 0]])
        );

        let tri = make_simplex(2);
        let prism = product_slack(&slack_matrix(&tri).unwrap(), &s);
        assert_eq!(prism.mat.shape(), (5, 6));
        assert_eq!(
            prism.mat,
            slack_matrix(&cartesian_product(&tri, &seg)).unwrap().mat
        );

        let point = slack_matrix(&make_simplex(0)).unwrap();
        let sq = slack_matrix(&make_cube(2).unwrap()).unwrap();
        assert_eq!(product_slack(&sq, &point).mat, sq.mat);
    }

    #[test]
    fn assemble_square_as_product() {
        let s = sm(&[&[0, 1], &[1, 0]]);
        let tp = sm(&[&[1]]);
        let (a, regions) = assemble_A(&s, &tp).unwrap();
        assert_eq!(
            a.mat,
            RatMatrix::from_ints(&[[0, 1, 0, 1], [1, 0, 1, 0], [1, 1, 0, 0], [0, 0, 1, 1]])
        );
        use Region::*;
        let expected = [
            [Green, Green, Blue, Blue],
            [Green, Green, Blue, Blue],
            [Red, Red, Zero, Zero],
            [Zero, Zero, Blue, Blue],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, region) in row.iter().enumerate() {
                assert_eq!(regions.region(i, j), *region, "cell ({i},{j})");
            }
        }
    }

    #[test]
    fn assemble_prism() {
        let s = sm(&[&[0, 1], &[1, 0]]);
        let (a, regions) = assemble_A(&s, &s).unwrap();
        assert_eq!(a.mat.shape(), (5, 6));
        assert_eq!(regions.k, 2);
        let seg = make_simplex(1);
        let tri = make_pyramid(&seg, None).unwrap();
        let direct = product_slack(&slack_matrix(&seg).unwrap(), &slack_matrix(&tri).unwrap());
        assert_eq!(a.mat, direct.mat);
    }

    #[test]
    fn assemble_rejects_positive_row() {
        let s = sm(&[&[0, 1], &[1, 1]]);
        assert!(matches!(
            assemble_A(&s, &sm(&[&[1]])),
            Err(Error::RedundantRow(1))
        ));
    }
}
