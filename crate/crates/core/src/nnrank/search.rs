//! Upper-bound witness search: multi-start HALS in floating point, followed
//! by exact rational reconstruction. Only exactly verified factorizations are
//! ever returned.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{verify_decomposition, Decomposition, RankOneFactor};
use crate::linalg::{to_f64, RatMatrix, Rational};

/// Restarts are evaluated in fixed-size batches so that the winner does not
/// depend on the number of worker threads.
const BATCH: usize = 16;
const SNAP_TOL: f64 = 1e-6;
const SUPPORT_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub seed: u64,
    pub restarts: usize,
    pub iters: usize,
    /// Infinity-norm residual (on the max-normalized matrix) that counts as
    /// a numeric success.
    pub epsilon: f64,
    pub denom_bound: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 42,
            restarts: 200,
            iters: 2000,
            epsilon: 1e-9,
            denom_bound: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchOutcome {
    /// `None` means "no witness found", which proves nothing.
    pub witness: Option<Decomposition>,
    pub target: usize,
    pub restarts_run: usize,
    pub numeric_successes: usize,
    pub log: Vec<String>,
}

/// Looks for an exact nonnegative factorization of `m` with at most `r`
/// factors.
pub fn exact_nmf_search(m: &RatMatrix, r: usize, config: &SearchConfig) -> SearchOutcome {
    let mut out = SearchOutcome {
        target: r,
        ..Default::default()
    };
    let trivial = Decomposition::trivial(m);
    if trivial.len() <= r {
        out.log.push(format!(
            "r={r}: trivial factorization with {} factors suffices",
            trivial.len()
        ));
        out.witness = Some(trivial);
        return out;
    }
    if r == 0 {
        out.log.push("r=0: matrix is nonzero".into());
        return out;
    }

    let (rows, cols) = m.shape();
    let scale = m.entries().iter().map(to_f64).fold(0.0, f64::max);
    let dense: Vec<f64> = m.entries().iter().map(|x| to_f64(x) / scale).collect();

    let mut start = 0;
    while start < config.restarts {
        let end = (start + BATCH).min(config.restarts);
        let runs: Vec<Option<Numeric>> = (start..end)
            .into_par_iter()
            .map(|k| hals(&dense, rows, cols, r, config, k))
            .collect();
        out.restarts_run = end;
        for (offset, run) in runs.into_iter().enumerate() {
            let Some(mut numeric) = run else { continue };
            out.numeric_successes += 1;
            for x in &mut numeric.w {
                *x *= scale;
            }
            match reconstruct(m, &numeric, config) {
                Some(d) => {
                    out.log.push(format!(
                        "r={r}: restart {} converged (residual {:.2e}) and was rationalized",
                        start + offset,
                        numeric.residual
                    ));
                    out.witness = Some(d);
                    return out;
                }
                None => out.log.push(format!(
                    "r={r}: restart {} converged numerically (residual {:.2e}) \
                     but exact reconstruction failed",
                    start + offset,
                    numeric.residual
                )),
            }
        }
        start = end;
    }
    out.log.push(format!(
        "r={r}: no witness after {} restarts ({} numeric successes)",
        out.restarts_run, out.numeric_successes
    ));
    out
}

struct Numeric {
    rows: usize,
    cols: usize,
    rank: usize,
    /// rows x rank
    u: Vec<f64>,
    /// rank x cols
    w: Vec<f64>,
    residual: f64,
}

fn residual(m: &[f64], u: &[f64], w: &[f64], rows: usize, cols: usize, r: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let approx: f64 = (0..r).map(|k| u[i * r + k] * w[k * cols + j]).sum();
            worst = worst.max((m[i * cols + j] - approx).abs());
        }
    }
    worst
}

/// Hierarchical alternating least squares from a seeded random start.
fn hals(
    m: &[f64],
    rows: usize,
    cols: usize,
    r: usize,
    config: &SearchConfig,
    restart: usize,
) -> Option<Numeric> {
    let seed = config.seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..rows * r).map(|_| rng.random::<f64>()).collect();
    let mut w: Vec<f64> = (0..r * cols).map(|_| rng.random::<f64>()).collect();

    let mut gram = vec![0.0; r * r];
    let mut cross_w = vec![0.0; r * cols];
    let mut cross_u = vec![0.0; rows * r];
    for it in 0..config.iters {
        // W <- W + (U^T M - U^T U W) / diag, clipped at 0
        gram.fill(0.0);
        cross_w.fill(0.0);
        for i in 0..rows {
            for a in 0..r {
                let ua = u[i * r + a];
                if ua == 0.0 {
                    continue;
                }
                for b in 0..r {
                    gram[a * r + b] += ua * u[i * r + b];
                }
                for j in 0..cols {
                    cross_w[a * cols + j] += ua * m[i * cols + j];
                }
            }
        }
        for k in 0..r {
            let d = gram[k * r + k];
            if d <= f64::MIN_POSITIVE {
                continue;
            }
            for j in 0..cols {
                let gw: f64 = (0..r).map(|b| gram[k * r + b] * w[b * cols + j]).sum();
                w[k * cols + j] = (w[k * cols + j] + (cross_w[k * cols + j] - gw) / d).max(0.0);
            }
        }

        // U <- U + (M W^T - U W W^T) / diag, clipped at 0
        gram.fill(0.0);
        cross_u.fill(0.0);
        for a in 0..r {
            for b in 0..r {
                gram[a * r + b] = (0..cols).map(|j| w[a * cols + j] * w[b * cols + j]).sum();
            }
        }
        for i in 0..rows {
            for a in 0..r {
                cross_u[i * r + a] = (0..cols).map(|j| m[i * cols + j] * w[a * cols + j]).sum();
            }
        }
        for k in 0..r {
            let d = gram[k * r + k];
            if d <= f64::MIN_POSITIVE {
                continue;
            }
            for i in 0..rows {
                let ug: f64 = (0..r).map(|b| u[i * r + b] * gram[b * r + k]).sum();
                u[i * r + k] = (u[i * r + k] + (cross_u[i * r + k] - ug) / d).max(0.0);
            }
        }

        // keep columns of U and rows of W balanced
        for k in 0..r {
            let nu = (0..rows).map(|i| u[i * r + k]).fold(0.0, f64::max);
            let nw = (0..cols).map(|j| w[k * cols + j]).fold(0.0, f64::max);
            if nu > 0.0 && nw > 0.0 {
                let s = (nw / nu).sqrt();
                (0..rows).for_each(|i| u[i * r + k] *= s);
                (0..cols).for_each(|j| w[k * cols + j] /= s);
            }
        }

        if it % 10 == 9 || it + 1 == config.iters {
            let res = residual(m, &u, &w, rows, cols, r);
            if res <= config.epsilon {
                return Some(Numeric {
                    rows,
                    cols,
                    rank: r,
                    u,
                    w,
                    residual: res,
                });
            }
        }
    }
    None
}

/// Simplest continued-fraction convergent of `x` within `tol`, with
/// denominator at most `max_den`. Falls back to the last admissible
/// convergent.
pub fn rationalize(x: f64, tol: f64, max_den: u64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let negative = x < 0.0;
    let target = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut rest = target;
    let mut best = (target.floor() as i128, 1i128);
    for _ in 0..64 {
        let a = rest.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den as i128 {
            break;
        }
        best = (p2, q2);
        if (target - p2 as f64 / q2 as f64).abs() <= tol {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rest - a as f64;
        if frac <= f64::EPSILON {
            break;
        }
        rest = 1.0 / frac;
    }
    let value = Rational::new(BigInt::from(best.0), BigInt::from(best.1));
    if negative {
        -value
    } else {
        value
    }
}

fn reconstruct(m: &RatMatrix, numeric: &Numeric, config: &SearchConfig) -> Option<Decomposition> {
    let (rows, cols, r) = (numeric.rows, numeric.cols, numeric.rank);
    let mut u = numeric.u.clone();
    let mut w = numeric.w.clone();
    normalize_columns(&mut u, &mut w, rows, cols, r);

    // snap U, solve W exactly on the numeric support
    if let Some(d) = snap_and_solve(m, &u, &w, rows, cols, r, config) {
        return Some(d);
    }
    // the same with the roles of U and W exchanged
    let (ut, wt) = transpose_factors(&u, &w, rows, cols, r);
    let (mut ut, mut wt) = (ut, wt);
    normalize_columns(&mut ut, &mut wt, cols, rows, r);
    if let Some(d) = snap_and_solve(&m.transpose(), &ut, &wt, cols, rows, r, config) {
        let factors = d
            .factors()
            .iter()
            .map(|f| RankOneFactor {
                u: f.w.clone(),
                w: f.u.clone(),
            })
            .collect();
        let d = Decomposition::new(rows, cols, factors).ok()?;
        if verify_decomposition(&d, m).ok()? {
            return Some(d);
        }
    }
    // plain rounding of both sides
    let snap = |x: f64| rationalize(x, SNAP_TOL, config.denom_bound);
    let factors = (0..r)
        .map(|k| RankOneFactor {
            u: (0..rows).map(|i| snap(u[i * r + k])).collect(),
            w: (0..cols).map(|j| snap(w[k * cols + j])).collect(),
        })
        .collect();
    let d = Decomposition::new(rows, cols, factors).ok()?;
    verify_decomposition(&d, m).ok()?.then_some(d)
}

fn transpose_factors(
    u: &[f64],
    w: &[f64],
    rows: usize,
    cols: usize,
    r: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut ut = vec![0.0; cols * r];
    for k in 0..r {
        for j in 0..cols {
            ut[j * r + k] = w[k * cols + j];
        }
    }
    let mut wt = vec![0.0; r * rows];
    for i in 0..rows {
        for k in 0..r {
            wt[k * rows + i] = u[i * r + k];
        }
    }
    (ut, wt)
}

/// Scales every column of `u` to max 1 (compensating in `w`) and clears
/// entries below the support tolerance.
fn normalize_columns(u: &mut [f64], w: &mut [f64], rows: usize, cols: usize, r: usize) {
    for k in 0..r {
        let top = (0..rows).map(|i| u[i * r + k]).fold(0.0, f64::max);
        if top <= 0.0 {
            (0..cols).for_each(|j| w[k * cols + j] = 0.0);
            continue;
        }
        for i in 0..rows {
            let x = u[i * r + k] / top;
            u[i * r + k] = if x < SUPPORT_TOL { 0.0 } else { x };
        }
        let wtop = (0..cols).map(|j| w[k * cols + j] * top).fold(0.0, f64::max);
        for j in 0..cols {
            let x = w[k * cols + j] * top;
            w[k * cols + j] = if x < SUPPORT_TOL * wtop.max(1.0) {
                0.0
            } else {
                x
            };
        }
    }
}

fn snap_and_solve(
    m: &RatMatrix,
    u: &[f64],
    w: &[f64],
    rows: usize,
    cols: usize,
    r: usize,
    config: &SearchConfig,
) -> Option<Decomposition> {
    let snapped: Vec<Rational> = u
        .iter()
        .map(|&x| rationalize(x, SNAP_TOL, config.denom_bound))
        .collect();
    let u_exact = RatMatrix::from_vec(rows, r, snapped).ok()?;

    let mut w_exact = vec![vec![Rational::zero(); cols]; r];
    for j in 0..cols {
        let support: Vec<usize> = (0..r).filter(|&k| w[k * cols + j] > 0.0).collect();
        let column = m.column(j);
        if support.is_empty() {
            if column.iter().all(Zero::is_zero) {
                continue;
            }
            return None;
        }
        let all_rows: Vec<usize> = (0..rows).collect();
        let system = u_exact.submatrix(&all_rows, &support);
        let hint: Vec<Rational> = support
            .iter()
            .map(|&k| rationalize(w[k * cols + j], SNAP_TOL, config.denom_bound))
            .collect();
        let x = system.solve(&column, Some(&hint))?;
        if x.iter().any(Signed::is_negative) {
            return None;
        }
        for (&k, value) in support.iter().zip(x) {
            w_exact[k][j] = value;
        }
    }

    let factors = (0..r)
        .map(|k| RankOneFactor {
            u: (0..rows).map(|i| u_exact.get(i, k).clone()).collect(),
            w: w_exact[k].clone(),
        })
        .collect();
    let d = Decomposition::new(rows, cols, factors).ok()?;
    verify_decomposition(&d, m).ok()?.then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, rat};

    #[test]
    fn rationalize_snaps_simple_values() {
        assert_eq!(rationalize(0.5000000001, 1e-6, 1_000_000), rat(1, 2));
        assert_eq!(rationalize(1.0 / 3.0, 1e-6, 1_000_000), rat(1, 3));
        assert_eq!(rationalize(2.0, 1e-6, 1_000_000), int(2));
        assert_eq!(rationalize(0.0, 1e-6, 1_000_000), int(0));
        assert_eq!(rationalize(-0.25, 1e-6, 1_000_000), rat(-1, 4));
        let pi = rationalize(std::f64::consts::PI, 1e-6, 1_000_000);
        assert!((to_f64(&pi) - std::f64::consts::PI).abs() < 1e-6);
        assert_eq!(rationalize(std::f64::consts::PI, 1e-12, 10), rat(22, 7));
    }

    #[test]
    fn trivial_witness_when_enough_factors() {
        let sq = RatMatrix::from_ints(&[[0, 1, 1, 0], [1, 0, 0, 1], [0, 0, 1, 1], [1, 1, 0, 0]]);
        let out = exact_nmf_search(&sq, 4, &SearchConfig::default());
        let d = out.witness.unwrap();
        assert_eq!(d.len(), 4);
        assert!(verify_decomposition(&d, &sq).unwrap());
    }

    #[test]
    fn identity_below_rank_has_no_witness() {
        let cfg = SearchConfig {
            restarts: 8,
            iters: 300,
            ..Default::default()
        };
        let out = exact_nmf_search(&RatMatrix::identity(3), 2, &cfg);
        assert!(out.witness.is_none());
        assert_eq!(out.restarts_run, 8);
    }

    #[test]
    fn recovers_separable_factorization() {
        // U = [[1,0],[0,1],[1,2],[2,1]], W = [[1,0,2,1],[0,1,1,3]]
        let u = RatMatrix::from_ints(&[[1, 0], [0, 1], [1, 2], [2, 1]]);
        let w = RatMatrix::from_ints(&[[1, 0, 2, 1], [0, 1, 1, 3]]);
        let m = u.mul(&w).unwrap();
        let out = exact_nmf_search(&m, 2, &SearchConfig::default());
        let d = out
            .witness
            .expect("separable rank-2 matrix should be recovered");
        assert_eq!(d.len(), 2);
        assert!(verify_decomposition(&d, &m).unwrap());
    }

    #[test]
    fn deterministic_given_seed() {
        let m = RatMatrix::from_ints(&[[1, 2, 0], [2, 4, 0], [0, 1, 3]]);
        let cfg = SearchConfig {
            restarts: 20,
            ..Default::default()
        };
        let a = exact_nmf_search(&m, 2, &cfg);
        let b = exact_nmf_search(&m, 2, &cfg);
        assert_eq!(a.witness, b.witness);
        assert_eq!(a.log, b.log);
    }
}
