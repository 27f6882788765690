//! Brute-force oracles shared by the integration tests. They are kept
//! deliberately naive and independent of the library's algorithms.

#![allow(dead_code)]

use std::collections::VecDeque;

use num_traits::Zero;
use xclab_core::{RankOneFactor, RatMatrix, RegionMap};

/// Positive cells of `m` as a bitmask index table.
fn cells(m: &RatMatrix) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if !m.get(i, j).is_zero() {
                out.push((i, j));
            }
        }
    }
    out
}

/// Every nonempty all-positive rectangle, as a mask over `cells`.
fn all_rectangles(m: &RatMatrix, cells: &[(usize, usize)]) -> Vec<u64> {
    let (r, c) = m.shape();
    let mut masks = Vec::new();
    for rs in 1u32..(1 << r) {
        for cs in 1u32..(1 << c) {
            let inside = |i: usize, j: usize| rs & (1 << i) != 0 && cs & (1 << j) != 0;
            let all_positive = (0..r)
                .flat_map(|i| (0..c).map(move |j| (i, j)))
                .filter(|&(i, j)| inside(i, j))
                .all(|(i, j)| !m.get(i, j).is_zero());
            if !all_positive {
                continue;
            }
            let mask = cells
                .iter()
                .enumerate()
                .filter(|(_, &(i, j))| inside(i, j))
                .fold(0u64, |acc, (k, _)| acc | 1 << k);
            masks.push(mask);
        }
    }
    masks.sort_unstable();
    masks.dedup();
    masks
}

/// Minimum number of rectangles covering the support, by breadth-first
/// search over covered-cell masks using every rectangle (not only maximal ones).
pub fn naive_cover(m: &RatMatrix) -> usize {
    let cells = cells(m);
    assert!(
        cells.len() <= 20,
        "oracle is exponential in the support size"
    );
    assert!(m.rows() <= 8 && m.cols() <= 8);
    let full: u64 = (1u64 << cells.len()) - 1;
    let rects = all_rectangles(m, &cells);
    let mut dist = vec![usize::MAX; 1 << cells.len()];
    dist[0] = 0;
    let mut queue = VecDeque::from([0u64]);
    while let Some(s) = queue.pop_front() {
        if s == full {
            return dist[s as usize];
        }
        for &r in &rects {
            let t = s | r;
            if dist[t as usize] == usize::MAX {
                dist[t as usize] = dist[s as usize] + 1;
                queue.push_back(t);
            }
        }
    }
    unreachable!("every positive cell is a rectangle")
}

/// Largest fooling set (positive cells, no two of which lie in a common
/// rectangle), by exhaustive depth-first search. Lower-bounds any cover.
pub fn max_fooling_set(m: &RatMatrix, stop_at: usize) -> Vec<(usize, usize)> {
    let cells = cells(m);
    let compatible = |a: (usize, usize), b: (usize, usize)| {
        a.0 != b.0 && a.1 != b.1 && (m.get(a.0, b.1).is_zero() || m.get(b.0, a.1).is_zero())
    };
    fn dfs(
        start: usize,
        cells: &[(usize, usize)],
        chosen: &mut Vec<(usize, usize)>,
        best: &mut Vec<(usize, usize)>,
        stop_at: usize,
        ok: &dyn Fn((usize, usize), (usize, usize)) -> bool,
    ) {
        if chosen.len() > best.len() {
            *best = chosen.clone();
        }
        if best.len() >= stop_at {
            return;
        }
        for k in start..cells.len() {
            if chosen.iter().all(|&c| ok(c, cells[k])) {
                chosen.push(cells[k]);
                dfs(k + 1, cells, chosen, best, stop_at, ok);
                chosen.pop();
                if best.len() >= stop_at {
                    return;
                }
            }
        }
    }
    let mut best = Vec::new();
    dfs(0, &cells, &mut Vec::new(), &mut best, stop_at, &compatible);
    best
}

/// Whether every choice of one column per red block meets the red support
/// of `f`, enumerating all transversals.
pub fn claim3_by_transversals(f: &RankOneFactor, regions: &RegionMap) -> bool {
    let red_rows: Vec<usize> = (regions.m_p..regions.m_p + regions.m_qprime).collect();
    let n = regions.n_p;
    let total = n.pow(regions.k as u32);
    (0..total).all(|mut code| {
        (0..regions.k).any(|b| {
            let j = b * n + code % n;
            code /= n;
            red_rows
                .iter()
                .any(|&i| !f.u[i].is_zero() && !f.w[j].is_zero())
        })
    })
}

/// Whether `b` is `a` with rows and columns permuted.
pub fn permutation_equivalent(a: &RatMatrix, b: &RatMatrix) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    let rows: Vec<Vec<_>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
    let mut perm: Vec<usize> = (0..a.cols()).collect();
    let target = {
        let mut t: Vec<Vec<_>> = (0..b.rows()).map(|i| b.row(i).to_vec()).collect();
        t.sort();
        t
    };
    // try every column permutation of `a` (small matrices only)
    loop {
        let mut permuted: Vec<Vec<_>> = rows
            .iter()
            .map(|r| perm.iter().map(|&j| r[j].clone()).collect())
            .collect();
        permuted.sort();
        if permuted == target {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
