use serde::{Deserialize, Serialize};

use super::spline::CubicSpline;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmdConfig {
    pub max_imfs: usize,
    /// Sifting stops once `Σ(h_{k-1} - h_k)² / Σ h_{k-1}²` drops below this.
    pub sift_stop: f64,
    pub max_sifts: usize,
    /// Decomposition also stops when the residue energy falls below this
    /// fraction of the input energy.
    pub residue_floor: f64,
}

impl Default for EmdConfig {
    fn default() -> Self {
        EmdConfig {
            max_imfs: 10,
            sift_stop: 0.05,
            max_sifts: 200,
            residue_floor: 1e-20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImfSet {
    pub imfs: Vec<Vec<f64>>,
    pub residue: Vec<f64>,
}

impl ImfSet {
    pub fn len(&self) -> usize {
        self.residue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residue.is_empty()
    }

    /// Sum of all IMFs and the residue.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residue.clone();
        for imf in &self.imfs {
            out.iter_mut().zip(imf).for_each(|(o, v)| *o += v);
        }
        out
    }
}

/// Indices of local maxima and minima. Flat runs count once, at their middle.
fn extrema(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    let n = x.len();
    if n < 3 {
        return (maxima, minima);
    }
    let mut i = 1;
    while i < n - 1 {
        let mut j = i;
        while j + 1 < n - 1 && x[j + 1] == x[i] {
            j += 1;
        }
        let (prev, next) = (x[i - 1], x[j + 1]);
        let mid = (i + j) / 2;
        if x[i] > prev && x[i] > next {
            maxima.push(mid);
        } else if x[i] < prev && x[i] < next {
            minima.push(mid);
        }
        i = j + 1;
    }
    (maxima, minima)
}

pub fn count_extrema(x: &[f64]) -> usize {
    let (a, b) = extrema(x);
    a.len() + b.len()
}

/// Cubic-spline envelope through `points`, with the two extrema nearest each
/// end mirrored about the end sample.
fn envelope(x: &[f64], points: &[usize]) -> Result<Vec<f64>> {
    let n = x.len();
    let last = (n - 1) as f64;
    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(points.len() + 4);
    for &p in points.iter().take(2) {
        if p > 0 {
            knots.push((-(p as f64), x[p]));
        }
    }
    knots.extend(points.iter().map(|&p| (p as f64, x[p])));
    for &p in points.iter().rev().take(2) {
        if p < n - 1 {
            knots.push((2.0 * last - p as f64, x[p]));
        }
    }
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    knots.dedup_by(|a, b| a.0 == b.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = knots.into_iter().unzip();
    Ok(CubicSpline::natural(xs, ys)?.eval_grid(n))
}

fn sift(signal: &[f64], cfg: &EmdConfig) -> Result<Vec<f64>> {
    let mut h = signal.to_vec();
    for _ in 0..cfg.max_sifts {
        let (maxima, minima) = extrema(&h);
        if maxima.is_empty() || minima.is_empty() {
            break;
        }
        let upper = envelope(&h, &maxima)?;
        let lower = envelope(&h, &minima)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..h.len() {
            let mean = 0.5 * (upper[i] + lower[i]);
            num += mean * mean;
            den += h[i] * h[i];
            h[i] -= mean;
        }
        if den == 0.0 || num / den < cfg.sift_stop {
            break;
        }
    }
    Ok(h)
}

/// Empirical mode decomposition by envelope-mean sifting. Stops when the
/// residue has fewer than three extrema (monotone or a single hump), when it
/// becomes negligible, or after `max_imfs` components.
pub fn emd(signal: &[f64], cfg: &EmdConfig) -> Result<ImfSet> {
    if signal.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "EMD needs at least 8 samples, got {}",
            signal.len()
        )));
    }
    if !(cfg.sift_stop.is_finite() && cfg.sift_stop > 0.0) {
        return Err(Error::Domain(format!("sift_stop must be positive, got {}", cfg.sift_stop)));
    }
    let input_energy: f64 = signal.iter().map(|v| v * v).sum();
    let mut residue = signal.to_vec();
    let mut imfs = Vec::new();
    while imfs.len() < cfg.max_imfs {
        if count_extrema(&residue) < 3 {
            break;
        }
        let energy: f64 = residue.iter().map(|v| v * v).sum();
        if energy <= cfg.residue_floor * input_energy {
            break;
        }
        let imf = sift(&residue, cfg)?;
        residue.iter_mut().zip(&imf).for_each(|(r, c)| *r -= c);
        imfs.push(imf);
    }
    Ok(ImfSet { imfs, residue })
}
