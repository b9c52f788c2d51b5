use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::Spectrogram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    #[default]
    Rectangular,
    Hann,
}

impl Taper {
    fn weights(self, len: usize) -> Vec<f64> {
        match self {
            Taper::Rectangular => vec![1.0; len],
            Taper::Hann => (0..len)
                .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / len as f64).cos())
                .collect(),
        }
    }
}

/// Short-time Fourier magnitudes for bins `0..=window_len/2`. Frame times are
/// window centers.
pub fn stft(signal: &[f64], rate: f64, window_len: usize, hop: usize, taper: Taper) -> Result<Spectrogram> {
    if window_len == 0 || hop == 0 {
        return Err(Error::Domain("window length and hop must be positive".into()));
    }
    if window_len > signal.len() {
        return Err(Error::InsufficientData(format!(
            "window of {window_len} samples exceeds signal of {}",
            signal.len()
        )));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::Domain(format!("rate must be positive, got {rate}")));
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(window_len);
    let weights = taper.weights(window_len);
    let bins = window_len / 2 + 1;
    let mut magnitudes = Vec::new();
    let mut frame_times = Vec::new();
    let mut buf = vec![Complex::new(0.0, 0.0); window_len];
    let mut start = 0;
    while start + window_len <= signal.len() {
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex::new(signal[start + i] * weights[i], 0.0);
        }
        fft.process(&mut buf);
        magnitudes.push(buf[..bins].iter().map(|c| c.norm()).collect());
        frame_times.push((start as f64 + window_len as f64 / 2.0) / rate);
        start += hop;
    }
    let bin_freqs = (0..bins).map(|k| k as f64 * rate / window_len as f64).collect();
    Ok(Spectrogram {
        magnitudes,
        frame_times,
        bin_freqs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dft_magnitude(x: &[f64], k: usize) -> f64 {
        let n = x.len() as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in x.iter().enumerate() {
            let ang = -2.0 * PI * k as f64 * t as f64 / n;
            re += v * ang.cos();
            im += v * ang.sin();
        }
        re.hypot(im)
    }

    #[test]
    fn sine_peaks_at_its_frequency() {
        let rate = 100.0;
        let x: Vec<f64> = (0..500).map(|i| (2.0 * PI * 5.0 * i as f64 / rate).sin()).collect();
        let s = stft(&x, rate, 100, 50, Taper::Rectangular).unwrap();
        assert!(s.ridge().iter().all(|f| (*f - 5.0).abs() < 1e-9));
        for k in [0, 3, 5, 17, 50] {
            assert!((s.magnitudes[0][k] - dft_magnitude(&x[..100], k)).abs() < 1e-9);
        }
        assert_eq!(*s.bin_freqs.last().unwrap(), 50.0);
    }

    #[test]
    fn zero_signal_and_impulse() {
        let s = stft(&[0.0; 64], 10.0, 16, 8, Taper::Hann).unwrap();
        assert!(s.magnitudes.iter().flatten().all(|v| *v == 0.0));
        let mut x = vec![0.0; 32];
        x[8] = 1.0;
        let s = stft(&x, 10.0, 16, 16, Taper::Rectangular).unwrap();
        assert!(s.magnitudes[0].iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn homogeneous_in_amplitude() {
        let x: Vec<f64> = (0..256).map(|i| ((i * 7 % 13) as f64).ln_1p()).collect();
        let y: Vec<f64> = x.iter().map(|v| -3.0 * v).collect();
        let a = stft(&x, 50.0, 64, 32, Taper::Hann).unwrap();
        let b = stft(&y, 50.0, 64, 32, Taper::Hann).unwrap();
        for (ra, rb) in a.magnitudes.iter().zip(&b.magnitudes) {
            for (va, vb) in ra.iter().zip(rb) {
                assert!((3.0 * va - vb).abs() < 1e-9 * (1.0 + vb));
            }
        }
    }

    #[test]
    fn window_longer_than_signal() {
        assert!(stft(&[1.0; 10], 10.0, 11, 1, Taper::Hann).is_err());
    }
}
