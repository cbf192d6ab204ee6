//! Variance-based sensitivity indices from Saltelli sampling.
//!
//! Two base matrices A and B (N rows each) come from the first and second
//! half of a 2k-dimensional Owen-scrambled Sobol sequence. For every factor
//! i the matrix AB_i is A with column i taken from B. First-order effects use
//! the Saltelli (2010) estimator, total effects the Jansen estimator, both
//! normalised by the variance of the pooled A and B outputs.

use crate::canonical_exp::Distribution;

/// Largest sample the Sobol generator can index per dimension.
pub const MAX_SAMPLE: u64 = 1 << 16;
/// Largest number of factors (the generator has 256 dimensions).
pub const MAX_FACTORS: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct SaltelliDesign {
    pub n: usize,
    pub k: usize,
    /// Rows in evaluation order: all of A, all of B, then AB_0 .. AB_{k-1}.
    pub rows: Vec<Vec<f64>>,
}

impl SaltelliDesign {
    pub fn new(dists: &[Distribution], n: usize, seed: u32) -> Self {
        let k = dists.len();
        let unit = |row: usize, dim: usize| {
            let u = sobol_burley::sample(row as u32, dim as u32, seed) as f64;
            u.clamp(1e-9, 1.0 - 1e-9)
        };
        let a: Vec<Vec<f64>> = (0..n).map(|r| (0..k).map(|d| dists[d].quantile(unit(r, d))).collect()).collect();
        let b: Vec<Vec<f64>> = (0..n).map(|r| (0..k).map(|d| dists[d].quantile(unit(r, k + d))).collect()).collect();
        let mut rows = Vec::with_capacity(n * (k + 2));
        rows.extend(a.iter().cloned());
        rows.extend(b.iter().cloned());
        for i in 0..k {
            for r in 0..n {
                let mut row = a[r].clone();
                row[i] = b[r][i];
                rows.push(row);
            }
        }
        SaltelliDesign { n, k, rows }
    }

    /// Indices from one output value per design row. `None` if the output
    /// has no variance.
    pub fn indices(&self, y: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        assert_eq!(y.len(), n * (self.k + 2), "one output per design row");
        let (ya, rest) = y.split_at(n);
        let (yb, yab) = rest.split_at(n);
        let pooled = &y[..2 * n];
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        let var = pooled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / pooled.len() as f64;
        let scale = pooled.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        if var <= 1e-24 * scale * scale {
            return None;
        }
        let mut main = Vec::with_capacity(self.k);
        let mut total = Vec::with_capacity(self.k);
        for i in 0..self.k {
            let yi = &yab[i * n..(i + 1) * n];
            let s: f64 = (0..n).map(|r| yb[r] * (yi[r] - ya[r])).sum::<f64>() / n as f64;
            let st: f64 = (0..n).map(|r| (ya[r] - yi[r]).powi(2)).sum::<f64>() / (2.0 * n as f64);
            main.push(s / var);
            total.push(st / var);
        }
        Some((main, total))
    }
}
