//! Exact rational scalars and dense matrices.
//!
//! Everything here is exact: zero tests on slack entries and factor supports
//! must never depend on a tolerance.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Canonical rational number (reduced, positive denominator).
pub type Rational = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `p/q` or `p`. Decimals and zero denominators are rejected.
pub fn parse_rational(token: &str) -> std::result::Result<Rational, String> {
    let (num, den) = match token.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (token, None),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| format!("`{token}` is not a rational of the form p/q"))?;
    let den: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| format!("`{token}` is not a rational of the form p/q"))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(format!("`{token}` has a zero denominator"));
    }
    Ok(Rational::new(num, den))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Dense row-major matrix over the rationals. `0 x n` and `n x 0` are legal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(RatMatrix { rows, cols, data })
    }

    /// Builds a matrix from row vectors; `cols` is needed for the `k x 0` case.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n_rows = rows.len();
        let mut data = Vec::with_capacity(n_rows * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(RatMatrix {
            rows: n_rows,
            cols,
            data,
        })
    }

    /// Convenience constructor from integer rows. Panics on ragged input.
    pub fn from_ints<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let rows = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| int(x)).collect())
            .collect();
        Self::from_rows(cols, rows).expect("ragged integer matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }

    /// First negative entry in row-major order.
    pub fn first_negative(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(Signed::is_negative)
            .map(|p| (p / self.cols, p % self.cols))
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::Dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(RatMatrix { data, ..*self })
    }

    pub fn outer(u: &[Rational], w: &[Rational]) -> RatMatrix {
        let mut out = RatMatrix::zeros(u.len(), w.len());
        for (i, a) in u.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in w.iter().enumerate() {
                out.data[i * w.len() + j] = a * b;
            }
        }
        out
    }

    pub fn scale_row(&mut self, i: usize, factor: &Rational) {
        for x in &mut self.data[i * self.cols..(i + 1) * self.cols] {
            *x *= factor;
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> RatMatrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                data.push(self.get(i, j).clone());
            }
        }
        RatMatrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    /// Stacks `self` on top of `below`.
    pub fn vstack(&self, below: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != below.cols {
            return Err(Error::Dimension(format!(
                "cannot stack {} columns on {} columns",
                self.cols, below.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Ok(RatMatrix {
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        })
    }

    /// Exact linear rank, via fraction-free (Bareiss) elimination on an
    /// integer matrix obtained by clearing denominators row by row.
    pub fn rank(&self) -> usize {
        let mut a: Vec<Vec<BigInt>> = (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
            })
            .collect();

        let (m, n) = (self.rows, self.cols);
        let mut rank = 0;
        let mut prev = BigInt::one();
        for col in 0..n {
            if rank == m {
                break;
            }
            let Some(pivot) = (rank..m).find(|&i| !a[i][col].is_zero()) else {
                continue;
            };
            a.swap(rank, pivot);
            for i in rank + 1..m {
                for j in col + 1..n {
                    let v = &a[rank][col] * &a[i][j] - &a[i][col] * &a[rank][j];
                    a[i][j] = v / &prev;
                }
                a[i][col] = BigInt::zero();
            }
            prev = a[rank][col].clone();
            rank += 1;
        }
        rank
    }

    /// Solves `self * x = rhs` exactly. Free variables take the matching
    /// entry of `hint` (zero when absent). Returns `None` if inconsistent.
    pub fn solve(&self, rhs: &[Rational], hint: Option<&[Rational]>) -> Option<Vec<Rational>> {
        assert_eq!(rhs.len(), self.rows, "right-hand side length");
        let (m, n) = (self.rows, self.cols);
        let mut aug: Vec<Vec<Rational>> = (0..m)
            .map(|i| {
                let mut row = self.row(i).to_vec();
                row.push(rhs[i].clone());
                row
            })
            .collect();

        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            let Some(p) = (r..m).find(|&i| !aug[i][c].is_zero()) else {
                continue;
            };
            aug.swap(r, p);
            let inv = aug[r][c].recip();
            for x in &mut aug[r][c..] {
                *x *= &inv;
            }
            let pivot_row = aug[r].clone();
            for (i, row) in aug.iter_mut().enumerate() {
                if i != r && !row[c].is_zero() {
                    let f = row[c].clone();
                    for (x, p) in row[c..=n].iter_mut().zip(&pivot_row[c..=n]) {
                        *x -= &f * p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == m {
                break;
            }
        }
        if aug[r..].iter().any(|row| !row[n].is_zero()) {
            return None;
        }

        let mut x: Vec<Rational> = match hint {
            Some(h) => h.to_vec(),
            None => vec![Rational::zero(); n],
        };
        for &c in &pivots {
            x[c] = Rational::zero();
        }
        for (row, &c) in pivots.iter().enumerate() {
            let mut v = aug[row][n].clone();
            for j in 0..n {
                if j != c && !aug[row][j].is_zero() {
                    v -= &aug[row][j] * &x[j];
                }
            }
            x[c] = v;
        }
        Some(x)
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
