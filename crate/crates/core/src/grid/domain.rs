use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[0, L_1] x ... x [0, L_n]` split into `N_1 x ... x N_n`
/// uniform cells. Field values live at cell centers, row-major with the
/// last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lengths: Vec<f64>,
    cells: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

impl BoxDomain {
    pub fn new(lengths: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        let n = lengths.len();
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidArgument(format!("dimension must be 1, 2 or 3, got {n}")));
        }
        if cells.len() != n {
            return Err(Error::InvalidArgument(format!("{} cell counts for dimension {n}", cells.len())));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidArgument(format!("side length {l} must be positive")));
        }
        if let Some(c) = cells.iter().find(|c| **c < 2) {
            return Err(Error::InvalidArgument(format!("need at least 2 cells per axis, got {c}")));
        }
        let len = cells
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .ok_or_else(|| Error::InvalidArgument(format!("cell count {cells:?} overflows the index range")))?;
        let spacing = lengths.iter().zip(&cells).map(|(l, &c)| l / c as f64).collect();
        let mut strides = vec![1; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * cells[k + 1];
        }
        Ok(Self { lengths, cells, spacing, strides, len })
    }

    /// Cube `[0, L]^n` with `cells` cells per axis.
    pub fn cube(n: usize, length: f64, cells: usize) -> Result<Self> {
        Self::new(vec![length; n], vec![cells; n])
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Cell-center coordinates along `axis`.
    pub fn centers(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing[axis];
        (0..self.cells[axis]).map(|j| (j as f64 + 0.5) * h).collect()
    }

    /// Multi-index of a flat cell index.
    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for k in 0..self.dim() {
            out[k] = idx / self.strides[k];
            idx %= self.strides[k];
        }
        out
    }

    /// Cell-center coordinates of a flat cell index.
    pub fn center(&self, idx: usize) -> Vec<f64> {
        self.unravel(idx).iter().zip(&self.spacing).map(|(&j, h)| (j as f64 + 0.5) * h).collect()
    }

    pub fn is_isotropic(&self) -> bool {
        self.spacing.iter().all(|h| (h - self.spacing[0]).abs() <= 1e-14 * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let d = BoxDomain::new(vec![1.0, 2.0, 3.0], vec![2, 4, 3]).unwrap();
        assert_eq!(d.len(), 24);
        assert_eq!(d.strides(), &[12, 3, 1]);
        assert_eq!(d.spacing(), &[0.5, 0.5, 1.0]);
        assert_eq!(d.cell_volume(), 0.25);
        assert_eq!(d.volume(), 6.0);
        assert_eq!(d.unravel(17), vec![1, 1, 2]);
        assert_eq!(d.center(17), vec![0.75, 0.75, 2.5]);
    }

    #[test]
    fn rejects_degenerate_boxes() {
        assert!(BoxDomain::new(vec![1.0], vec![1]).is_err());
        assert!(BoxDomain::new(vec![0.0], vec![4]).is_err());
        assert!(BoxDomain::new(vec![1.0; 4], vec![2; 4]).is_err());
        assert!(BoxDomain::new(vec![1.0, 1.0], vec![4]).is_err());
        assert!(BoxDomain::new(vec![1.0; 3], vec![usize::MAX / 2; 3]).is_err());
    }
}
