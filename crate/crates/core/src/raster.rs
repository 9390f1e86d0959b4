use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary matrix of spike events, one row per neuron and one column per time
/// step, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpikeRaster {
    n_rows: usize,
    n_steps: usize,
    data: Vec<bool>,
}

impl SpikeRaster {
    pub fn zeros(n_rows: usize, n_steps: usize) -> Self {
        Self {
            n_rows,
            n_steps,
            data: vec![false; n_rows * n_steps],
        }
    }

    pub fn from_rows(rows: Vec<Vec<bool>>) -> Result<Self> {
        let n_steps = rows.first().map_or(0, Vec::len);
        let n_rows = rows.len();
        let mut data = Vec::with_capacity(n_rows * n_steps);
        for row in rows {
            if row.len() != n_steps {
                return Err(Error::DimensionMismatch {
                    what: "raster row",
                    expected: n_steps,
                    actual: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self { n_rows, n_steps, data })
    }

    /// Number of rows (collocation points).
    pub fn n_x(&self) -> usize {
        self.n_rows
    }

    /// Number of columns (time steps).
    pub fn n_t(&self) -> usize {
        self.n_steps
    }

    pub fn get(&self, row: usize, t: usize) -> bool {
        self.data[row * self.n_steps + t]
    }

    pub fn set(&mut self, row: usize, t: usize, value: bool) {
        self.data[row * self.n_steps + t] = value;
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.data[row * self.n_steps..(row + 1) * self.n_steps]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[bool]> {
        self.data.chunks(self.n_steps.max(1)).take(self.n_rows)
    }

    pub fn row_count(&self, row: usize) -> usize {
        self.row(row).iter().filter(|&&s| s).count()
    }

    pub fn total(&self) -> usize {
        self.data.iter().filter(|&&s| s).count()
    }

    /// Row `row` as 0.0 / 1.0 features.
    pub fn row_f64(&self, row: usize) -> impl Iterator<Item = f64> + '_ {
        self.row(row).iter().map(|&s| if s { 1.0 } else { 0.0 })
    }
}
