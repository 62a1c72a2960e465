use std::ops::Range;

use crate::error::{Error, Result};

/// Unbalanced binary-outcome panel.
///
/// Observations are stored individual by individual, each block ordered by
/// period. The design matrix is row-major with the intercept in column 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelData {
    ids: Vec<String>,
    offsets: Vec<usize>,
    periods: Vec<i64>,
    y: Vec<u8>,
    x: Vec<f64>,
    columns: Vec<String>,
    mundlak_cols: Vec<usize>,
    mbar: Vec<f64>,
}

impl PanelData {
    /// Builds a panel from per-observation covariates (without intercept).
    ///
    /// `covariates` is row-major with `covariate_names.len()` columns. When
    /// `mundlak_cols` is `None` every non-intercept column enters the
    /// individual means.
    pub fn new(
        ids: Vec<String>,
        lengths: &[usize],
        periods: Vec<i64>,
        y: Vec<u8>,
        covariates: &[f64],
        covariate_names: Vec<String>,
        mundlak_cols: Option<Vec<usize>>,
    ) -> Result<Self> {
        if ids.len() != lengths.len() {
            return Err(Error::Data(format!(
                "{} ids but {} panel lengths",
                ids.len(),
                lengths.len()
            )));
        }
        if let Some(i) = lengths.iter().position(|&t| t == 0) {
            return Err(Error::Data(format!("individual `{}` has no observations", ids[i])));
        }
        let total: usize = lengths.iter().sum();
        if y.len() != total || periods.len() != total {
            return Err(Error::Data(format!(
                "expected {total} outcomes and periods, got {} and {}",
                y.len(),
                periods.len()
            )));
        }
        if let Some(pos) = y.iter().position(|&v| v > 1) {
            return Err(Error::Data(format!("outcome at observation {pos} is {}, not 0/1", y[pos])));
        }
        let ncov = covariate_names.len();
        if covariates.len() != total * ncov {
            return Err(Error::Data(format!(
                "covariate block has {} values, expected {total} x {ncov}",
                covariates.len()
            )));
        }
        if let Some(pos) = covariates.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite covariate at observation {}, column `{}`",
                pos / ncov,
                covariate_names[pos % ncov]
            )));
        }
        let k = ncov + 1;
        let mut x = Vec::with_capacity(total * k);
        for row in 0..total {
            x.push(1.0);
            x.extend_from_slice(&covariates[row * ncov..(row + 1) * ncov]);
        }
        let mut offsets = Vec::with_capacity(lengths.len() + 1);
        offsets.push(0);
        for &t in lengths {
            offsets.push(offsets.last().unwrap() + t);
        }
        let mut columns = Vec::with_capacity(k);
        columns.push("intercept".to_string());
        columns.extend(covariate_names);

        let mut data = Self {
            ids,
            offsets,
            periods,
            y,
            x,
            columns,
            mundlak_cols: Vec::new(),
            mbar: Vec::new(),
        };
        data.set_mundlak_cols(mundlak_cols.unwrap_or_else(|| (1..k).collect()))?;
        Ok(data)
    }

    /// Selects the columns entering the individual means and recomputes them.
    pub fn set_mundlak_cols(&mut self, cols: Vec<usize>) -> Result<()> {
        let k = self.k();
        for (pos, &c) in cols.iter().enumerate() {
            if c == 0 {
                return Err(Error::config("mundlak_cols", "the intercept cannot enter the individual means"));
            }
            if c >= k {
                return Err(Error::config("mundlak_cols", format!("column {c} out of range (k = {k})")));
            }
            if cols[..pos].contains(&c) {
                return Err(Error::config("mundlak_cols", format!("column {c} listed twice")));
            }
        }
        self.mundlak_cols = cols;
        self.compute_mundlak_means();
        Ok(())
    }

    /// Fills `mbar[i, j] = sum_t x[it, col_j] / T_i` for the selected columns.
    pub fn compute_mundlak_means(&mut self) {
        let q = self.mundlak_cols.len();
        let mut mbar = vec![0.0; self.n() * q];
        for i in 0..self.n() {
            let rows = self.rows(i);
            let len = rows.len() as f64;
            for (j, &col) in self.mundlak_cols.iter().enumerate() {
                let sum: f64 = rows.clone().map(|r| self.x[r * self.k() + col]).sum();
                mbar[i * q + j] = sum / len;
            }
        }
        self.mbar = mbar;
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Total number of observations.
    pub fn total(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.columns.len()
    }

    pub fn q(&self) -> usize {
        self.mundlak_cols.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len_of(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn lengths(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.len_of(i)).collect()
    }

    /// Observation indices of individual `i`.
    pub fn rows(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn row(&self, obs: usize) -> &[f64] {
        let k = self.k();
        &self.x[obs * k..(obs + 1) * k]
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn periods(&self) -> &[i64] {
        &self.periods
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn mundlak_cols(&self) -> &[usize] {
        &self.mundlak_cols
    }

    pub fn mbar(&self, i: usize) -> &[f64] {
        let q = self.q();
        &self.mbar[i * q..(i + 1) * q]
    }

    /// Replaces the outcome vector, keeping covariates and means.
    pub fn set_outcomes(&mut self, y: Vec<u8>) -> Result<()> {
        if y.len() != self.total() {
            return Err(Error::Data(format!("expected {} outcomes, got {}", self.total(), y.len())));
        }
        if y.iter().any(|&v| v > 1) {
            return Err(Error::Data("outcomes must be 0 or 1".into()));
        }
        self.y = y;
        Ok(())
    }

    /// Subtracts the pooled mean of column `col` and returns that mean.
    pub fn demean_column(&mut self, col: usize) -> Result<f64> {
        self.check_covariate(col)?;
        let k = self.k();
        let total = self.total();
        if total == 0 {
            return Ok(0.0);
        }
        let mean = (0..total).map(|r| self.x[r * k + col]).sum::<f64>() / total as f64;
        for r in 0..total {
            self.x[r * k + col] -= mean;
        }
        self.compute_mundlak_means();
        Ok(mean)
    }

    /// Divides column `col` by `factor`.
    pub fn scale_column(&mut self, col: usize, factor: f64) -> Result<()> {
        self.check_covariate(col)?;
        if !(factor.is_finite() && factor != 0.0) {
            return Err(Error::config("scale", format!("factor must be finite and non-zero, got {factor}")));
        }
        let k = self.k();
        for r in 0..self.total() {
            self.x[r * k + col] /= factor;
        }
        self.compute_mundlak_means();
        Ok(())
    }

    fn check_covariate(&self, col: usize) -> Result<()> {
        if col == 0 || col >= self.k() {
            Err(Error::config("covariate", format!("column {col} is not a covariate")))
        } else {
            Ok(())
        }
    }

    /// Counts of `(y = 0, y = 1)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.y.iter().filter(|&&v| v == 1).count();
        (self.total() - ones, ones)
    }
}
