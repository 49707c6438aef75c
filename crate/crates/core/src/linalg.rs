//! Exact dense linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::graded::Q;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<Q>>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![vec![Q::zero(); cols]; rows] }
    }

    pub fn from_rows(data: Vec<Vec<Q>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, Vec::len);
        Matrix { rows, cols, data }
    }

    pub fn get(&self, r: usize, c: usize) -> &Q {
        &self.data[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Q) {
        self.data[r][c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.iter().all(Zero::is_zero))
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.data[i][k].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = &self.data[i][k] * &other.data[k][j];
                    out.data[i][j] += t;
                }
            }
        }
        out
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.data[i][c].is_zero()) else {
                continue;
            };
            m.data.swap(r, p);
            let inv = Q::one() / &m.data[r][c];
            for v in m.data[r].iter_mut() {
                *v *= &inv;
            }
            for i in 0..m.rows {
                if i != r && !m.data[i][c].is_zero() {
                    let f = m.data[i][c].clone();
                    for j in c..m.cols {
                        let t = &f * &m.data[r][j];
                        m.data[i][j] -= t;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    /// One solution of `self · x = b` with free variables set to zero.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = self.clone();
        for (row, v) in aug.data.iter_mut().zip(b) {
            row.push(v.clone());
        }
        aug.cols += 1;
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Q::zero(); self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = red.data[r][self.cols].clone();
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::q;

    #[test]
    fn rank_and_solve() {
        let m = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]);
        assert_eq!(m.rank(), 1);
        assert_eq!(m.solve(&[q(3), q(6)]), Some(vec![q(3), q(0)]));
        assert_eq!(m.solve(&[q(3), q(7)]), None);
        assert_eq!(Matrix::zeros(2, 3).nullity(), 3);
    }
}
