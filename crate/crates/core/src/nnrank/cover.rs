//! Minimum cover of the positive support of a matrix by combinatorial
//! rectangles (all-positive row-set x column-set blocks).
//!
//! The support of every nonnegative rank-one factor is such a rectangle, so
//! the optimum lower-bounds the nonnegative rank. Optimal covers can be taken
//! from maximal rectangles; these are the closed column sets of the support,
//! i.e. the nonempty intersections of row supports.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use num_traits::Zero;
use serde::Serialize;

use crate::linalg::RatMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Rectangle {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Rectangle {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows.contains(&i) && self.cols.contains(&j)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverOutcome {
    Optimal {
        bound: usize,
        cover: Vec<Rectangle>,
        nodes: u64,
    },
    /// Enumeration plus branching exceeded the node budget; nothing proven.
    BudgetExceeded { nodes: u64 },
}

impl CoverOutcome {
    pub fn bound(&self) -> Option<usize> {
        match self {
            CoverOutcome::Optimal { bound, .. } => Some(*bound),
            CoverOutcome::BudgetExceeded { .. } => None,
        }
    }
}

struct Aborted;

struct Budget {
    used: u64,
    limit: u64,
}

impl Budget {
    fn tick(&mut self) -> Result<(), Aborted> {
        self.used += 1;
        if self.used > self.limit {
            Err(Aborted)
        } else {
            Ok(())
        }
    }
}

/// Exact minimum rectangle cover of the positive cells of `m`.
pub fn rectangle_cover_lower_bound(m: &RatMatrix, budget: u64) -> CoverOutcome {
    let mut budget = Budget {
        used: 0,
        limit: budget,
    };
    match solve(m, &mut budget) {
        Ok((bound, cover)) => CoverOutcome::Optimal {
            bound,
            cover,
            nodes: budget.used,
        },
        Err(Aborted) => CoverOutcome::BudgetExceeded { nodes: budget.used },
    }
}

fn solve(m: &RatMatrix, budget: &mut Budget) -> Result<(usize, Vec<Rectangle>), Aborted> {
    let (rows, cols) = m.shape();
    let row_support: Vec<FixedBitSet> = (0..rows)
        .map(|i| {
            let mut s = FixedBitSet::with_capacity(cols);
            for j in 0..cols {
                if !m.get(i, j).is_zero() {
                    s.insert(j);
                }
            }
            s
        })
        .collect();

    let mut cell_id = vec![usize::MAX; rows * cols];
    let mut cells = Vec::new();
    for i in 0..rows {
        for j in row_support[i].ones() {
            cell_id[i * cols + j] = cells.len();
            cells.push((i, j));
        }
    }
    if cells.is_empty() {
        return Ok((0, Vec::new()));
    }

    let closed = closed_column_sets(&row_support, budget)?;
    let rects: Vec<Rectangle> = closed
        .iter()
        .map(|c| Rectangle {
            rows: (0..rows)
                .filter(|&i| c.is_subset(&row_support[i]))
                .collect(),
            cols: c.ones().collect(),
        })
        .collect();
    let rect_cells: Vec<FixedBitSet> = rects
        .iter()
        .map(|r| {
            let mut s = FixedBitSet::with_capacity(cells.len());
            for &i in &r.rows {
                for &j in &r.cols {
                    s.insert(cell_id[i * cols + j]);
                }
            }
            s
        })
        .collect();

    let mut cell_rects = vec![Vec::new(); cells.len()];
    for (r, s) in rect_cells.iter().enumerate() {
        for c in s.ones() {
            cell_rects[c].push(r);
        }
    }
    let neighbourhood: Vec<FixedBitSet> = cell_rects
        .iter()
        .map(|rs| {
            let mut s = FixedBitSet::with_capacity(cells.len());
            for &r in rs {
                s.union_with(&rect_cells[r]);
            }
            s
        })
        .collect();
    let mut packing_order: Vec<usize> = (0..cells.len()).collect();
    packing_order.sort_by_key(|&c| (cell_rects[c].len(), c));

    let search = Search {
        rect_cells: &rect_cells,
        cell_rects: &cell_rects,
        neighbourhood: &neighbourhood,
        packing_order: &packing_order,
    };

    let mut all = FixedBitSet::with_capacity(cells.len());
    all.insert_range(..);
    let mut best = search.greedy(&all);
    let mut chosen = Vec::new();
    search.branch(&all, &mut chosen, &mut best, budget)?;

    let mut cover: Vec<Rectangle> = best.into_iter().map(|r| rects[r].clone()).collect();
    cover.sort_by(|a, b| (&a.rows, &a.cols).cmp(&(&b.rows, &b.cols)));
    Ok((cover.len(), cover))
}

fn closed_column_sets(
    row_support: &[FixedBitSet],
    budget: &mut Budget,
) -> Result<Vec<FixedBitSet>, Aborted> {
    let mut seen: HashSet<FixedBitSet> = HashSet::new();
    let mut order = Vec::new();
    for s in row_support {
        if !s.is_clear() && seen.insert(s.clone()) {
            order.push(s.clone());
        }
    }
    let mut next = 0;
    while next < order.len() {
        let current = order[next].clone();
        next += 1;
        for s in row_support {
            budget.tick()?;
            let mut inter = current.clone();
            inter.intersect_with(s);
            if !inter.is_clear() && inter != current && seen.insert(inter.clone()) {
                order.push(inter);
            }
        }
    }
    order.sort_by(|a, b| a.ones().cmp(b.ones()));
    Ok(order)
}

struct Search<'a> {
    rect_cells: &'a [FixedBitSet],
    cell_rects: &'a [Vec<usize>],
    neighbourhood: &'a [FixedBitSet],
    packing_order: &'a [usize],
}

impl Search<'_> {
    fn greedy(&self, uncovered: &FixedBitSet) -> Vec<usize> {
        let mut left = uncovered.clone();
        let mut picked = Vec::new();
        while !left.is_clear() {
            let r = (0..self.rect_cells.len())
                .max_by_key(|&r| (self.rect_cells[r].intersection_count(&left), usize::MAX - r))
                .expect("every cell lies in some rectangle");
            left.difference_with(&self.rect_cells[r]);
            picked.push(r);
        }
        picked
    }

    /// Max of a packing bound (cells pairwise in no common rectangle) and a
    /// counting bound.
    fn lower_bound(&self, uncovered: &FixedBitSet) -> usize {
        let mut blocked = FixedBitSet::with_capacity(uncovered.len());
        let mut packing = 0;
        for &c in self.packing_order {
            if uncovered.contains(c) && !blocked.contains(c) {
                packing += 1;
                blocked.union_with(&self.neighbourhood[c]);
            }
        }
        let remaining = uncovered.count_ones(..);
        let largest = self
            .rect_cells
            .iter()
            .map(|r| r.intersection_count(uncovered))
            .max()
            .unwrap_or(1)
            .max(1);
        packing.max(remaining.div_ceil(largest))
    }

    fn branch(
        &self,
        uncovered: &FixedBitSet,
        chosen: &mut Vec<usize>,
        best: &mut Vec<usize>,
        budget: &mut Budget,
    ) -> Result<(), Aborted> {
        budget.tick()?;
        if uncovered.is_clear() {
            if chosen.len() < best.len() {
                *best = chosen.clone();
            }
            return Ok(());
        }
        if chosen.len() + self.lower_bound(uncovered) >= best.len() {
            return Ok(());
        }
        let cell = uncovered
            .ones()
            .min_by_key(|&c| (self.cell_rects[c].len(), c))
            .expect("uncovered is nonempty");
        let mut options = self.cell_rects[cell].clone();
        options.sort_by_key(|&r| {
            (
                usize::MAX - self.rect_cells[r].intersection_count(uncovered),
                r,
            )
        });
        for r in options {
            let mut rest = uncovered.clone();
            rest.difference_with(&self.rect_cells[r]);
            chosen.push(r);
            self.branch(&rest, chosen, best, budget)?;
            chosen.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bound(rows: &[&[i64]]) -> usize {
        rectangle_cover_lower_bound(&RatMatrix::from_ints(rows), 1_000_000)
            .bound()
            .unwrap()
    }

    #[test]
    fn identity_needs_n() {
        for n in 1..6 {
            let out = rectangle_cover_lower_bound(&RatMatrix::identity(n), 1_000_000);
            assert_eq!(out.bound(), Some(n));
        }
    }

    #[test]
    fn zero_and_full() {
        assert_eq!(bound(&[&[0, 0], &[0, 0]]), 0);
        assert_eq!(bound(&[&[1, 2], &[3, 4]]), 1);
        assert_eq!(
            rectangle_cover_lower_bound(&RatMatrix::zeros(0, 3), 10).bound(),
            Some(0)
        );
    }

    #[test]
    fn square_and_prism() {
        assert_eq!(
            bound(&[&[0, 1, 1, 0], &[1, 0, 0, 1], &[0, 0, 1, 1], &[1, 1, 0, 0]]),
            4
        );
        assert_eq!(
            bound(&[
                &[0, 1, 0, 1, 0, 1],
                &[1, 0, 1, 0, 1, 0],
                &[0, 0, 1, 1, 0, 0],
                &[1, 1, 0, 0, 0, 0],
                &[0, 0, 0, 0, 1, 1]
            ]),
            5
        );
    }

    #[test]
    fn cover_is_a_certificate() {
        let m = RatMatrix::from_ints(&[[1, 1, 0], [1, 1, 1], [0, 1, 1]]);
        let CoverOutcome::Optimal { bound, cover, .. } = rectangle_cover_lower_bound(&m, 1000)
        else {
            panic!("budget");
        };
        assert_eq!(bound, 2);
        for i in 0..3 {
            for j in 0..3 {
                let covered = cover.iter().any(|r| r.contains(i, j));
                assert_eq!(covered, !m.get(i, j).is_zero());
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let m = RatMatrix::from_ints(&[
            [0, 1, 1, 1, 1],
            [1, 0, 1, 1, 1],
            [1, 1, 0, 1, 1],
            [1, 1, 1, 0, 1],
            [1, 1, 1, 1, 0],
        ]);
        assert!(matches!(
            rectangle_cover_lower_bound(&m, 3),
            CoverOutcome::BudgetExceeded { .. }
        ));
        assert!(rectangle_cover_lower_bound(&m, 1_000_000).bound().is_some());
    }
}
