//! Uniform, cell-centred transverse sampling grid.

use std::f64::consts::PI;

use crate::error::{config, Result};

/// A uniform grid of `len` cells of width `spacing`, centred on `x = 0`.
///
/// Sample `i` sits at the centre of its cell, `x_i = (i + 1/2 - len/2)·spacing`,
/// so the grid is mirror-symmetric about the origin for any `len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    spacing: f64,
    len: usize,
}

impl SpatialGrid {
    /// Smallest grid with the given spacing whose extent is at least `extent`.
    pub fn new(spacing: f64, extent: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(config(format!("grid spacing must be positive, got {spacing}")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(config(format!("grid extent must be positive, got {extent}")));
        }
        let cells = extent / spacing;
        let len = if (cells - cells.round()).abs() < 1e-9 * cells.max(1.0) {
            cells.round()
        } else {
            cells.ceil()
        };
        if len < 2.0 || len > (1u64 << 32) as f64 {
            return Err(config(format!("grid would hold {len} cells")));
        }
        Ok(Self { spacing, len: len as usize })
    }

    pub fn with_len(spacing: f64, len: usize) -> Result<Self> {
        Self::new(spacing, spacing * len as f64)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn extent(&self) -> f64 {
        self.spacing * self.len as f64
    }

    /// Position of the first sample.
    pub fn origin(&self) -> f64 {
        self.x(0)
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5 - 0.5 * self.len as f64) * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.x(i)).collect()
    }

    /// Left and right edges of the covered interval.
    pub fn bounds(&self) -> (f64, f64) {
        let half = 0.5 * self.extent();
        (-half, half)
    }

    /// Spacing of the conjugate wavenumber grid.
    pub fn k_spacing(&self) -> f64 {
        2.0 * PI / self.extent()
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.spacing
    }

    /// Wavenumbers in FFT order: non-negative first, then negative.
    pub fn fft_wavenumbers(&self) -> Vec<f64> {
        let n = self.len as i64;
        let dk = self.k_spacing();
        (0..n)
            .map(|m| {
                let signed = if m < (n + 1) / 2 { m } else { m - n };
                signed as f64 * dk
            })
            .collect()
    }

    /// Index of the cell containing `x`, if inside the grid.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.bounds();
        if x < lo || x >= hi {
            return None;
        }
        Some((((x - lo) / self.spacing).floor() as usize).min(self.len - 1))
    }

    pub fn same_as(&self, other: &SpatialGrid) -> bool {
        self.len == other.len && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
    }
}
