//! Dense matrices over GF(2)(D): rank, determinant and inverse.

use std::fmt;

use crate::gf2::{lcm_of_denominators, AlgebraError, Gf2Poly, Gf2Rational, DEFAULT_DEGREE_CAP};

#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Gf2Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Gf2Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Gf2Rational::one())
    }

    /// `value * I_n`.
    pub fn scalar(n: usize, value: Gf2Rational) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = value.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Gf2Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<Gf2Rational>]) -> Self {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged matrix");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> impl Iterator<Item = &Gf2Rational> {
        self.data.iter()
    }

    pub fn row(&self, i: usize) -> &[Gf2Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Gf2Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Gf2Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Gf2Rational::zero();
                for k in 0..self.cols {
                    let (a, b) = (&self[(i, k)], &rhs[(k, j)]);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn scale(&self, factor: &Gf2Rational) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Rank over GF(2)(D) with the default degree limit.
    pub fn rank(&self) -> usize {
        self.rank_capped(DEFAULT_DEGREE_CAP)
            .expect("degree limit exceeded while computing rank")
    }

    /// Rank over GF(2)(D).
    ///
    /// Every entry is first multiplied by the lcm of all denominators, which
    /// leaves the rank unchanged and lands the matrix in GF(2)[D]; the rest is
    /// fraction-free elimination, where each update is exactly divisible by
    /// the previous pivot.
    pub fn rank_capped(&self, cap: usize) -> Result<usize, AlgebraError> {
        let lcm = lcm_of_denominators(self.data.iter());
        let mut a: Vec<Vec<Gf2Poly>> = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|v| v.numerator() * &lcm.exact_div(v.denominator()))
                    .collect()
            })
            .collect();
        let mut prev = Gf2Poly::one();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            let pivot = a[rank][c].clone();
            for i in rank + 1..self.rows {
                let factor = a[i][c].clone();
                for j in c + 1..self.cols {
                    let lhs = pivot.checked_mul(&a[i][j], cap)?;
                    let rhs = factor.checked_mul(&a[rank][j], cap)?;
                    a[i][j] = (&lhs + &rhs).exact_div(&prev);
                }
                a[i][c] = Gf2Poly::zero();
            }
            prev = pivot;
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        Ok(rank)
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.rows.min(self.cols)
    }

    /// Determinant of a square matrix by Gaussian elimination over the field.
    pub fn determinant(&self) -> Gf2Rational {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.to_rows();
        let mut det = Gf2Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
                return Gf2Rational::zero();
            };
            a.swap(c, p);
            let inv = a[c][c].inverse().expect("nonzero pivot");
            det = &det * &a[c][c];
            for i in c + 1..n {
                if a[i][c].is_zero() {
                    continue;
                }
                let f = &a[i][c] * &inv;
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[i][j] = &a[i][j] + &t;
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<RatMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.to_rows();
        let mut inv = RatMatrix::identity(n).to_rows();
        for c in 0..n {
            let p = (c..n).find(|&i| !a[i][c].is_zero())?;
            a.swap(c, p);
            inv.swap(c, p);
            let s = a[c][c].inverse().expect("nonzero pivot");
            for j in 0..n {
                a[c][j] = &a[c][j] * &s;
                inv[c][j] = &inv[c][j] * &s;
            }
            for i in 0..n {
                if i == c || a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].clone();
                for j in 0..n {
                    let t = &f * &a[c][j];
                    a[i][j] = &a[i][j] + &t;
                    let t = &f * &inv[c][j];
                    inv[i][j] = &inv[i][j] + &t;
                }
            }
        }
        Some(RatMatrix::from_rows(inv))
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Gf2Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Gf2Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Gf2Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatMatrix{self}")
    }
}
