use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{ImfSet, Spectrogram};
use crate::error::{Error, Result};

/// Analytic signal `x + i·H[x]` via the one-sided spectrum.
pub fn analytic_signal(x: &[f64]) -> Vec<Complex<f64>> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(*v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let w = if k == 0 || (n % 2 == 0 && k == n / 2) {
            1.0
        } else if k < n.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *c *= w;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c * scale).collect()
}

/// Instantaneous frequency (Hz) from the unwrapped phase of the analytic
/// signal, central differences inside, one-sided at the ends.
pub fn instantaneous_frequency(analytic: &[Complex<f64>], rate: f64) -> Vec<f64> {
    let n = analytic.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut phase: Vec<f64> = analytic.iter().map(|c| c.arg()).collect();
    for i in 1..n {
        let mut d = phase[i] - phase[i - 1];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        phase[i] = phase[i - 1] + d;
    }
    let k = rate / (2.0 * PI);
    (0..n)
        .map(|i| {
            if i == 0 {
                (phase[1] - phase[0]) * k
            } else if i == n - 1 {
                (phase[n - 1] - phase[n - 2]) * k
            } else {
                (phase[i + 1] - phase[i - 1]) * 0.5 * k
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HhtParams {
    /// Number of frequency rows spanning `[0, rate/2]` inclusive.
    pub freq_bins: usize,
    /// Samples per time column.
    pub frame_len: usize,
}

impl HhtParams {
    /// One-second columns and 0.5 Hz rows.
    pub fn for_rate(rate: f64) -> Self {
        HhtParams {
            freq_bins: (rate.max(2.0)).round() as usize + 1,
            frame_len: rate.round().max(1.0) as usize,
        }
    }
}

/// Hilbert spectrum: squared instantaneous amplitude of every IMF accumulated
/// on a time × frequency grid.
pub fn hht_spectrum(set: &ImfSet, rate: f64, params: HhtParams) -> Result<Spectrogram> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::Domain(format!("rate must be positive, got {rate}")));
    }
    if params.freq_bins < 2 || params.frame_len == 0 {
        return Err(Error::Domain("need at least 2 frequency bins and a positive frame length".into()));
    }
    let n = set.len();
    let frames = n.div_ceil(params.frame_len);
    let nyquist = rate / 2.0;
    let mut magnitudes = vec![vec![0.0; params.freq_bins]; frames];
    for imf in &set.imfs {
        if imf.len() != n {
            return Err(Error::Domain("IMF length differs from residue length".into()));
        }
        let z = analytic_signal(imf);
        let freq = instantaneous_frequency(&z, rate);
        for (i, (c, f)) in z.iter().zip(&freq).enumerate() {
            if !(0.0..=nyquist).contains(f) {
                continue;
            }
            let bin = (f / nyquist * (params.freq_bins - 1) as f64).round() as usize;
            magnitudes[i / params.frame_len][bin] += c.norm_sqr();
        }
    }
    let frame_times = (0..frames)
        .map(|f| {
            let start = f * params.frame_len;
            let end = ((f + 1) * params.frame_len).min(n);
            0.5 * (start + end) as f64 / rate
        })
        .collect();
    let bin_freqs = (0..params.freq_bins)
        .map(|k| k as f64 * nyquist / (params.freq_bins - 1) as f64)
        .collect();
    Ok(Spectrogram {
        magnitudes,
        frame_times,
        bin_freqs,
    })
}
