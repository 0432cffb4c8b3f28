//! Minimal dense row-major matrix used for component matrices and counts.

use serde::{Deserialize, Serialize};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::default(); rows * cols] }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: T) {
        self.data[r * self.cols + c] = value;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Widens the matrix to `new_cols`, zero-filling the new tail of each row.
    /// No-op when `new_cols <= cols`.
    pub fn grow_cols(&mut self, new_cols: usize) {
        if new_cols <= self.cols {
            return;
        }
        let mut data = vec![T::default(); self.rows * new_cols];
        for r in 0..self.rows {
            data[r * new_cols..r * new_cols + self.cols]
                .copy_from_slice(&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        self.cols = new_cols;
        self.data = data;
    }

    pub fn iter(&self) -> impl Iterator<Item = T> + '_ {
        self.data.iter().copied()
    }

    /// Nested-array view, one inner vector per row. Used for JSON exports.
    pub fn to_nested(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

impl Mat<u64> {
    /// Number of entries holding a value greater than zero.
    pub fn count_nonzero(&self) -> u64 {
        self.data.iter().filter(|&&v| v > 0).count() as u64
    }

    pub fn row_sum(&self, r: usize) -> u64 {
        self.row(r).iter().sum()
    }

    /// Element-wise add of `other`, which must not be wider than `self`.
    pub fn add_assign(&mut self, other: &Mat<u64>) {
        assert_eq!(self.rows, other.rows, "row count mismatch in add_assign");
        assert!(other.cols <= self.cols, "rhs wider than lhs in add_assign");
        for r in 0..self.rows {
            for c in 0..other.cols {
                self.data[r * self.cols + c] += other.data[r * other.cols + c];
            }
        }
    }
}

impl Mat<f64> {
    pub fn row_sum_f(&self, r: usize) -> f64 {
        self.row(r).iter().sum()
    }
}
