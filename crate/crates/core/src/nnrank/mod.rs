//! Nonnegative rank: exact decompositions, lower bounds, witness search and
//! the product/pyramid factorization constructors.

mod cover;
mod search;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{RatMatrix, Rational};

pub use cover::{rectangle_cover_lower_bound, CoverOutcome, Rectangle};
pub use search::{exact_nmf_search, rationalize, SearchConfig, SearchOutcome};

/// Nonnegative rank-one matrix `u w^T`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RankOneFactor {
    pub u: Vec<Rational>,
    pub w: Vec<Rational>,
}

impl RankOneFactor {
    pub fn new(u: Vec<Rational>, w: Vec<Rational>) -> Result<Self> {
        if u.iter().chain(&w).any(Signed::is_negative) {
            return Err(Error::InvalidArgument(
                "rank-one factor has a negative entry".into(),
            ));
        }
        Ok(RankOneFactor { u, w })
    }

    pub fn entry(&self, i: usize, j: usize) -> Rational {
        &self.u[i] * &self.w[j]
    }

    pub fn is_positive_at(&self, i: usize, j: usize) -> bool {
        !self.u[i].is_zero() && !self.w[j].is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().all(Zero::is_zero) || self.w.iter().all(Zero::is_zero)
    }

    pub fn row_support(&self) -> Vec<usize> {
        support(&self.u)
    }

    pub fn col_support(&self) -> Vec<usize> {
        support(&self.w)
    }

    pub fn to_matrix(&self) -> RatMatrix {
        RatMatrix::outer(&self.u, &self.w)
    }

    /// Restriction to the given rows and columns.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> RankOneFactor {
        RankOneFactor {
            u: rows.iter().map(|&i| self.u[i].clone()).collect(),
            w: cols.iter().map(|&j| self.w[j].clone()).collect(),
        }
    }
}

fn support(v: &[Rational]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, _)| i)
        .collect()
}

/// Ordered list of nonzero nonnegative rank-one factors of an `m x n` target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    rows: usize,
    cols: usize,
    factors: Vec<RankOneFactor>,
}

impl Decomposition {
    /// Zero factors are dropped.
    pub fn new(rows: usize, cols: usize, factors: Vec<RankOneFactor>) -> Result<Self> {
        for (l, f) in factors.iter().enumerate() {
            if f.u.len() != rows || f.w.len() != cols {
                return Err(Error::Dimension(format!(
                    "factor {l} is {}x{}, expected {rows}x{cols}",
                    f.u.len(),
                    f.w.len()
                )));
            }
            if f.u.iter().chain(&f.w).any(Signed::is_negative) {
                return Err(Error::InvalidArgument(format!(
                    "factor {l} has a negative entry"
                )));
            }
        }
        let factors = factors.into_iter().filter(|f| !f.is_zero()).collect();
        Ok(Decomposition {
            rows,
            cols,
            factors,
        })
    }

    /// One factor per nonzero row of `m`.
    pub fn by_rows(m: &RatMatrix) -> Decomposition {
        let (rows, cols) = m.shape();
        let factors = (0..rows)
            .filter(|&i| m.row(i).iter().any(|x| !x.is_zero()))
            .map(|i| {
                let mut u = vec![Rational::zero(); rows];
                u[i] = Rational::one();
                RankOneFactor {
                    u,
                    w: m.row(i).to_vec(),
                }
            })
            .collect();
        Decomposition {
            rows,
            cols,
            factors,
        }
    }

    /// One factor per nonzero column of `m`.
    pub fn by_cols(m: &RatMatrix) -> Decomposition {
        let t = Decomposition::by_rows(&m.transpose());
        Decomposition {
            rows: m.rows(),
            cols: m.cols(),
            factors: t
                .factors
                .into_iter()
                .map(|f| RankOneFactor { u: f.w, w: f.u })
                .collect(),
        }
    }

    /// The smaller of [`Decomposition::by_rows`] and [`Decomposition::by_cols`].
    pub fn trivial(m: &RatMatrix) -> Decomposition {
        let rows = Decomposition::by_rows(m);
        let cols = Decomposition::by_cols(m);
        if cols.len() < rows.len() {
            cols
        } else {
            rows
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn factors(&self) -> &[RankOneFactor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn sum(&self) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.rows, self.cols);
        for f in &self.factors {
            for i in f.row_support() {
                for j in f.col_support() {
                    let v = out.get(i, j) + f.entry(i, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Every factor restricted to `rows x cols`, zero restrictions dropped.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Decomposition {
        self.restrict_factors(0..self.len(), rows, cols)
    }

    pub fn restrict_factors(
        &self,
        which: impl IntoIterator<Item = usize>,
        rows: &[usize],
        cols: &[usize],
    ) -> Decomposition {
        let factors = which
            .into_iter()
            .map(|l| self.factors[l].restrict(rows, cols))
            .filter(|f| !f.is_zero())
            .collect();
        Decomposition {
            rows: rows.len(),
            cols: cols.len(),
            factors,
        }
    }
}

/// `true` iff the factors are nonnegative and sum exactly to `target`.
pub fn verify_decomposition(d: &Decomposition, target: &RatMatrix) -> Result<bool> {
    if (d.rows, d.cols) != target.shape() {
        return Err(Error::Dimension(format!(
            "decomposition is {}x{}, target is {}x{}",
            d.rows,
            d.cols,
            target.rows(),
            target.cols()
        )));
    }
    let nonnegative = d
        .factors
        .iter()
        .all(|f| f.u.iter().chain(&f.w).all(|x| !x.is_negative()));
    Ok(nonnegative && d.sum() == *target)
}

fn ensure_verified(d: &Decomposition, target: &RatMatrix, what: &str) -> Result<()> {
    if verify_decomposition(d, target)? {
        Ok(())
    } else {
        Err(Error::Unverified(format!(
            "{what} does not sum to its target"
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZeroViolation {
    /// A factor is positive on a zero cell of the target.
    PositiveOnZero {
        factor: usize,
        row: usize,
        col: usize,
    },
    /// Both `R_{i',j}` and `R_{i,j'}` are positive for a zero cell `(i,j)`.
    RectangleBreach {
        factor: usize,
        zero: (usize, usize),
        column_cell: (usize, usize),
        row_cell: (usize, usize),
    },
}

/// Executable form of the two zero-propagation facts: for every zero cell
/// `(i,j)` of the target and every factor `R`, `R_ij = 0`, and for all
/// `(i',j')` either `R_{i'j} = 0` or `R_{ij'} = 0`.
pub fn zero_propagation_check(d: &Decomposition, target: &RatMatrix) -> Vec<ZeroViolation> {
    let mut out = Vec::new();
    for (l, f) in d.factors.iter().enumerate() {
        let rows = f.row_support();
        let cols = f.col_support();
        for i in 0..target.rows() {
            for j in 0..target.cols() {
                if !target.get(i, j).is_zero() {
                    continue;
                }
                if f.is_positive_at(i, j) {
                    out.push(ZeroViolation::PositiveOnZero {
                        factor: l,
                        row: i,
                        col: j,
                    });
                }
                let in_col = rows.iter().find(|&&r| f.is_positive_at(r, j));
                let in_row = cols.iter().find(|&&c| f.is_positive_at(i, c));
                if let (Some(&r), Some(&c)) = (in_col, in_row) {
                    out.push(ZeroViolation::RectangleBreach {
                        factor: l,
                        zero: (i, j),
                        column_cell: (r, j),
                        row_cell: (i, c),
                    });
                }
            }
        }
    }
    out
}

/// Factorization of `product_slack(S, T)` with `|Ds| + |Dt|` factors.
pub fn product_decomposition(
    ds: &Decomposition,
    s: &RatMatrix,
    dt: &Decomposition,
    t: &RatMatrix,
) -> Result<Decomposition> {
    ensure_verified(ds, s, "decomposition of S")?;
    ensure_verified(dt, t, "decomposition of T")?;
    let (mp, np) = s.shape();
    let (mq, nq) = t.shape();
    let zero = Rational::zero();

    let mut factors = Vec::with_capacity(ds.len() + dt.len());
    for f in &ds.factors {
        let mut u = f.u.clone();
        u.resize(mp + mq, zero.clone());
        let w = (0..nq).flat_map(|_| f.w.iter().cloned()).collect();
        factors.push(RankOneFactor { u, w });
    }
    for f in &dt.factors {
        let mut u = vec![zero.clone(); mp];
        u.extend(f.u.iter().cloned());
        let w =
            f.w.iter()
                .flat_map(|x| std::iter::repeat_n(x.clone(), np))
                .collect();
        factors.push(RankOneFactor { u, w });
    }
    Decomposition::new(mp + mq, np * nq, factors)
}

/// `T' = sum` of `d'` lifted to `[[T', 0], [0, 1]]` by adding the corner.
pub fn pyramid_lift(dprime: &Decomposition, tprime: &RatMatrix) -> Result<Decomposition> {
    ensure_verified(dprime, tprime, "decomposition of T'")?;
    let (m, n) = (tprime.rows() + 1, tprime.cols() + 1);
    let mut factors: Vec<RankOneFactor> = dprime
        .factors
        .iter()
        .map(|f| {
            let mut u = f.u.clone();
            u.push(Rational::zero());
            let mut w = f.w.clone();
            w.push(Rational::zero());
            RankOneFactor { u, w }
        })
        .collect();
    let mut u = vec![Rational::zero(); m];
    u[m - 1] = Rational::one();
    let mut w = vec![Rational::zero(); n];
    w[n - 1] = Rational::one();
    factors.push(RankOneFactor { u, w });
    Decomposition::new(m, n, factors)
}

/// Drops the last row and column of every factor of a decomposition of
/// `[[T', 0], [0, h]]`. Any factor covering the corner vanishes.
pub fn pyramid_restrict(d: &Decomposition, t: &RatMatrix) -> Result<Decomposition> {
    ensure_verified(d, t, "decomposition of T")?;
    let (m, n) = t.shape();
    if m == 0 || n == 0 {
        return Err(Error::NotPyramid("empty matrix".into()));
    }
    let corner_ok = !t.get(m - 1, n - 1).is_zero()
        && (0..n - 1).all(|j| t.get(m - 1, j).is_zero())
        && (0..m - 1).all(|i| t.get(i, n - 1).is_zero());
    if !corner_ok {
        return Err(Error::NotPyramid(
            "last row and column do not isolate a nonzero corner".into(),
        ));
    }
    let rows: Vec<usize> = (0..m - 1).collect();
    let cols: Vec<usize> = (0..n - 1).collect();
    Ok(d.restrict(&rows, &cols))
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverSummary {
    /// `None` when the node budget ran out.
    pub bound: Option<usize>,
    pub status: String,
    pub nodes: u64,
    pub cover: Vec<Rectangle>,
}

/// Bracket on the nonnegative rank of a matrix.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub rank_lb: usize,
    pub rectcover_lb: Option<usize>,
    pub rectcover: CoverSummary,
    pub best_ub: usize,
    #[serde(skip)]
    pub witness: Decomposition,
    pub certified: bool,
    pub seed: u64,
    pub search_log: Vec<String>,
}

impl BoundsReport {
    pub fn lower(&self) -> usize {
        self.rank_lb.max(self.rectcover_lb.unwrap_or(0))
    }

    /// The certified nonnegative rank, if the bracket closed.
    pub fn value(&self) -> Option<usize> {
        self.certified.then_some(self.best_ub)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsConfig {
    pub search: SearchConfig,
    pub bb_budget: u64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            search: SearchConfig::default(),
            bb_budget: 10_000_000,
        }
    }
}

pub fn bounds(m: &RatMatrix, config: &BoundsConfig) -> Result<BoundsReport> {
    bounds_with_hint(m, config, None)
}

/// Like [`bounds`], seeding the upper bound with a known factorization.
pub fn bounds_with_hint(
    m: &RatMatrix,
    config: &BoundsConfig,
    hint: Option<&Decomposition>,
) -> Result<BoundsReport> {
    if let Some((row, col)) = m.first_negative() {
        return Err(Error::NegativeEntry {
            row,
            col,
            value: m.get(row, col).to_string(),
        });
    }
    let mut log = Vec::new();
    let rank_lb = m.rank();

    let rectcover = match rectangle_cover_lower_bound(m, config.bb_budget) {
        CoverOutcome::Optimal {
            bound,
            cover,
            nodes,
        } => CoverSummary {
            bound: Some(bound),
            status: "optimal".into(),
            nodes,
            cover,
        },
        CoverOutcome::BudgetExceeded { nodes } => {
            log.push(format!("rectangle cover aborted after {nodes} nodes"));
            CoverSummary {
                bound: None,
                status: "budget exceeded".into(),
                nodes,
                cover: Vec::new(),
            }
        }
    };

    let mut witness = Decomposition::trivial(m);
    log.push(format!(
        "trivial factorization with {} factors",
        witness.len()
    ));
    if let Some(h) = hint {
        if verify_decomposition(h, m)? && h.len() < witness.len() {
            log.push(format!("structural factorization with {} factors", h.len()));
            witness = h.clone();
        }
    }

    let lower = rank_lb.max(rectcover.bound.unwrap_or(0));
    while witness.len() > lower {
        let target = witness.len() - 1;
        let outcome = exact_nmf_search(m, target, &config.search);
        log.extend(outcome.log);
        match outcome.witness {
            Some(d) => witness = d,
            None => break,
        }
    }

    let best_ub = witness.len();
    Ok(BoundsReport {
        rank_lb,
        rectcover_lb: rectcover.bound,
        rectcover,
        best_ub,
        witness,
        certified: lower == best_ub,
        seed: config.search.seed,
        search_log: log,
    })
}
