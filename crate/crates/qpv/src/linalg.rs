//! Dense matrices over an exact scalar field.
//!
//! Everything is computed by fraction-free-enough Gaussian elimination with
//! exact arithmetic; there is no pivot-size heuristic because all supported
//! fields are exact. Matrices do not carry their field; operations that need
//! inversion take it as an argument.

use crate::scalars::{Scalar, ScalarField};
use crate::{Error, Result};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Scalar>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize, field: &ScalarField) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(n: usize, field: &ScalarField) -> Mat {
        let mut m = Mat::zero(n, n, field);
        for i in 0..n {
            m[(i, i)] = field.one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Scalar,
    ) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self[(i, j)].is_one()
                    } else {
                        self[(i, j)].is_zero()
                    }
                })
            })
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map(&self, mut f: impl FnMut(&Scalar) -> Scalar) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f(x)).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> Mat {
        self.map(|x| x * s)
    }

    pub fn trace(&self, field: &ScalarField) -> Scalar {
        assert!(self.is_square());
        let mut t = field.zero();
        for i in 0..self.rows {
            t = &t + &self[(i, i)];
        }
        t
    }

    /// Kronecker product; block (i,j) of the result is a_ij * B.
    pub fn kron(&self, other: &Mat) -> Mat {
        Mat::from_fn(
            self.rows * other.rows,
            self.cols * other.cols,
            |i, j| {
                let (ia, ib) = (i / other.rows, i % other.rows);
                let (ja, jb) = (j / other.cols, j % other.cols);
                &self[(ia, ja)] * &other[(ib, jb)]
            },
        )
    }

    pub fn pow(&self, k: u32, field: &ScalarField) -> Mat {
        assert!(self.is_square());
        let mut acc = Mat::identity(self.rows, field);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Reduced row echelon form; returns (rref, pivot column per pivot row).
    pub fn rref(&self, field: &ScalarField) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)]
                .inv_in(field)
                .expect("nonzero pivot is invertible");
            for j in c..m.cols {
                m[(r, j)] = &m[(r, j)] * &inv;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let sub = &m[(r, j)] * &f;
                        m[(i, j)] = &m[(i, j)] - &sub;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self, field: &ScalarField) -> usize {
        self.rref(field).1.len()
    }

    /// Basis of the right kernel {x : M x = 0}, one column vector per element.
    pub fn kernel(&self, field: &ScalarField) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref(field);
        let mut basis = Vec::new();
        let pivot_of_col: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &col) in pivots.iter().enumerate() {
                v[col] = Some(row);
            }
            v
        };
        for free in 0..self.cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut x = vec![field.zero(); self.cols];
            x[free] = field.one();
            for (row, &col) in pivots.iter().enumerate() {
                x[col] = -&r[(row, free)];
            }
            basis.push(x);
        }
        basis
    }

    pub fn inverse(&self, field: &ScalarField) -> Result<Mat> {
        if !self.is_square() {
            return Err(Error::NotInvertible("matrix is not square".into()));
        }
        let n = self.rows;
        let aug = Mat::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                field.one()
            } else {
                field.zero()
            }
        });
        let (red, pivots) = aug.rref(field);
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return Err(Error::NotInvertible("matrix is singular".into()));
        }
        Ok(Mat::from_fn(n, n, |i, j| red[(i, j + n)].clone()))
    }

    /// Solve M x = b for a single right-hand side; errors when inconsistent
    /// and picks the free variables as zero when underdetermined.
    pub fn solve(&self, b: &[Scalar], field: &ScalarField) -> Result<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows);
        let aug = Mat::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let (r, pivots) = aug.rref(field);
        if pivots.contains(&self.cols) {
            return Err(Error::invalid("inconsistent linear system"));
        }
        let mut x = vec![field.zero(); self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            x[col] = r[(row, self.cols)].clone();
        }
        Ok(x)
    }

    /// Characteristic polynomial coefficients c_0..c_n of det(tI - M),
    /// by the Faddeev-LeVerrier recurrence (exact, division by integers only).
    pub fn charpoly(&self, field: &ScalarField) -> Vec<Scalar> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![field.zero(); n + 1];
        coeffs[n] = field.one();
        let mut m = Mat::zero(n, n, field);
        for k in 1..=n {
            // M_k = A*M_{k-1} + c_{n-k+1} I
            let mut am = self * &m;
            let c = coeffs[n - k + 1].clone();
            for i in 0..n {
                am[(i, i)] = &am[(i, i)] + &c;
            }
            m = am;
            let t = (self * &m).trace(field);
            let kinv = field.from_i64(k as i64).inv_in(field).expect("k != 0");
            coeffs[n - k] = -&(&t * &kinv);
        }
        coeffs
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &o[(i, j)])
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &o[(i, j)])
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.map(|x| -x)
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows, "dimension mismatch in matrix product");
        Mat::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = &self[(i, 0)] * &o[(0, j)];
            for k in 1..self.cols {
                let t = &self[(i, k)] * &o[(k, j)];
                acc = &acc + &t;
            }
            acc
        })
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_string()).collect())
            .collect();
        let widths: Vec<usize> = (0..self.cols)
            .map(|j| cells.iter().map(|r| r[j].len()).max().unwrap_or(0))
            .collect();
        for row in &cells {
            write!(f, "[")?;
            for (j, cell) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, "  ")?;
                }
                write!(f, "{:>width$}", cell, width = widths[j])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> ScalarField {
        ScalarField::rationals_i64(2, 1).unwrap()
    }

    #[test]
    fn inverse_roundtrip() {
        let field = f();
        let m = Mat::from_rows(vec![
            vec![field.from_i64(1), field.from_i64(2)],
            vec![field.from_i64(3), field.from_i64(5)],
        ]);
        let inv = m.inverse(&field).unwrap();
        assert!((&m * &inv).is_identity());
        assert!((&inv * &m).is_identity());
    }

    #[test]
    fn singular_detected() {
        let field = f();
        let m = Mat::from_rows(vec![
            vec![field.from_i64(1), field.from_i64(2)],
            vec![field.from_i64(2), field.from_i64(4)],
        ]);
        assert!(m.inverse(&field).is_err());
        assert_eq!(m.rank(&field), 1);
        let ker = m.kernel(&field);
        assert_eq!(ker.len(), 1);
        // M * k = 0
        let k = &ker[0];
        for i in 0..2 {
            let mut acc = field.zero();
            for j in 0..2 {
                acc = &acc + &(&m[(i, j)] * &k[j]);
            }
            assert!(acc.is_zero());
        }
    }

    #[test]
    fn charpoly_companion() {
        let field = f();
        // Companion matrix of t^2 - 3t + 2 = (t-1)(t-2)
        let m = Mat::from_rows(vec![
            vec![field.from_i64(0), field.from_i64(-2)],
            vec![field.from_i64(1), field.from_i64(3)],
        ]);
        let cp = m.charpoly(&field);
        assert_eq!(cp[0], field.from_i64(2));
        assert_eq!(cp[1], field.from_i64(-3));
        assert_eq!(cp[2], field.from_i64(1));
    }

    #[test]
    fn kron_mixed_product() {
        let field = f();
        let a = Mat::from_rows(vec![
            vec![field.from_i64(1), field.from_i64(1)],
            vec![field.from_i64(0), field.from_i64(2)],
        ]);
        let b = Mat::from_rows(vec![
            vec![field.from_i64(3), field.from_i64(0)],
            vec![field.from_i64(1), field.from_i64(1)],
        ]);
        // (A kron B)(A' kron B') = AA' kron BB'
        let lhs = &a.kron(&b) * &b.kron(&a);
        let rhs = (&a * &b).kron(&(&b * &a));
        assert_eq!(lhs, rhs);
    }
}
