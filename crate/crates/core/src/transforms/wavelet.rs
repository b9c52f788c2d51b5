use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HAAR: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];

// Daubechies, 4 vanishing moments (8 taps), synthesis lowpass.
const DB4: [f64; 8] = [
    0.2303778133088964,
    0.7148465705529154,
    0.6308807679298587,
    -0.0279837694168599,
    -0.1870348117190931,
    0.0308413818355607,
    0.0328830116668852,
    -0.0105974017850690,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wavelet {
    Haar,
    Db4,
}

impl Wavelet {
    pub fn lowpass(self) -> &'static [f64] {
        match self {
            Wavelet::Haar => &HAAR,
            Wavelet::Db4 => &DB4,
        }
    }

    /// Quadrature mirror of the lowpass: `g[i] = (-1)^i h[L-1-i]`.
    pub fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let len = h.len();
        (0..len)
            .map(|i| if i % 2 == 0 { h[len - 1 - i] } else { -h[len - 1 - i] })
            .collect()
    }

    pub fn filter_len(self) -> usize {
        self.lowpass().len()
    }
}

impl fmt::Display for Wavelet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Wavelet::Haar => "haar",
            Wavelet::Db4 => "db4",
        })
    }
}

impl FromStr for Wavelet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(Wavelet::Haar),
            "db4" => Ok(Wavelet::Db4),
            other => Err(Error::Domain(format!("unsupported wavelet `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Decimated,
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletDecomposition {
    /// `details[j-1]` holds the level-`j` detail band.
    pub details: Vec<Vec<f64>>,
    pub approx: Vec<f64>,
    pub wavelet: Wavelet,
    pub scheme: Scheme,
    /// Input length at each level (decimated) or padded length (stationary).
    pub level_lengths: Vec<usize>,
    pub original_len: usize,
}

impl WaveletDecomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }
}

fn analysis(x: &[f64], wavelet: Wavelet) -> (Vec<f64>, Vec<f64>) {
    let h = wavelet.lowpass();
    let g = wavelet.highpass();
    let mut ext;
    let x = if x.len() % 2 == 1 {
        ext = x.to_vec();
        ext.push(*x.last().unwrap());
        &ext[..]
    } else {
        x
    };
    let n = x.len();
    let half = n / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let (mut a, mut d) = (0.0, 0.0);
        for (i, (hi, gi)) in h.iter().zip(&g).enumerate() {
            let v = x[(2 * k + i) % n];
            a += hi * v;
            d += gi * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
    (approx, detail)
}

fn synthesis(approx: &[f64], detail: &[f64], wavelet: Wavelet, len: usize) -> Vec<f64> {
    let h = wavelet.lowpass();
    let g = wavelet.highpass();
    let n = 2 * approx.len();
    let mut x = vec![0.0; n];
    for k in 0..approx.len() {
        for (i, (hi, gi)) in h.iter().zip(&g).enumerate() {
            x[(2 * k + i) % n] += hi * approx[k] + gi * detail[k];
        }
    }
    x.truncate(len);
    x
}

/// One level of the periodized orthonormal DWT: circular correlation with the
/// analysis filters followed by dropping every other sample. Odd lengths are
/// extended by repeating the last sample, so each band has `ceil(n/2)` values.
pub fn dwt_level(signal: &[f64], wavelet: Wavelet) -> Result<(Vec<f64>, Vec<f64>)> {
    if signal.len() < wavelet.filter_len() {
        return Err(Error::InsufficientData(format!(
            "{wavelet} needs at least {} samples, got {}",
            wavelet.filter_len(),
            signal.len()
        )));
    }
    Ok(analysis(signal, wavelet))
}

/// Inverse of [`dwt_level`]; `len` is the length of the original signal.
pub fn idwt_level(approx: &[f64], detail: &[f64], wavelet: Wavelet, len: usize) -> Result<Vec<f64>> {
    if approx.len() != detail.len() || len.div_ceil(2) != approx.len() {
        return Err(Error::Domain("band lengths do not match the requested output length".into()));
    }
    Ok(synthesis(approx, detail, wavelet, len))
}

fn max_levels(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        (usize::BITS - 1 - n.leading_zeros()) as usize
    }
}

/// Multi-level decimated DWT.
pub fn wavedec(signal: &[f64], wavelet: Wavelet, levels: usize) -> Result<WaveletDecomposition> {
    let n = signal.len();
    if levels == 0 || levels > max_levels(n) {
        return Err(Error::Domain(format!(
            "{levels} levels requested for {n} samples (allowed 1..={})",
            max_levels(n)
        )));
    }
    let mut details = Vec::with_capacity(levels);
    let mut level_lengths = Vec::with_capacity(levels);
    let mut approx = signal.to_vec();
    for _ in 0..levels {
        level_lengths.push(approx.len());
        let (a, d) = analysis(&approx, wavelet);
        details.push(d);
        approx = a;
    }
    Ok(WaveletDecomposition {
        details,
        approx,
        wavelet,
        scheme: Scheme::Decimated,
        level_lengths,
        original_len: n,
    })
}

pub fn waverec(dec: &WaveletDecomposition) -> Result<Vec<f64>> {
    if dec.scheme != Scheme::Decimated {
        return Err(Error::Domain("waverec expects a decimated decomposition".into()));
    }
    let mut approx = dec.approx.clone();
    for j in (0..dec.levels()).rev() {
        approx = idwt_level(&approx, &dec.details[j], dec.wavelet, dec.level_lengths[j])?;
    }
    Ok(approx)
}

/// Stationary wavelet transform (à trous): no decimation, the filters are
/// dilated by `2^(j-1)` at level `j`. The input is zero-padded to a multiple
/// of `2^levels`; all bands have the padded length.
pub fn swt(signal: &[f64], wavelet: Wavelet, levels: usize) -> Result<WaveletDecomposition> {
    let n = signal.len();
    if n == 0 || levels == 0 {
        return Err(Error::Domain("swt needs a non-empty signal and at least one level".into()));
    }
    let block = 1usize.checked_shl(levels as u32).unwrap_or(usize::MAX);
    let padded = n.div_ceil(block).saturating_mul(block);
    if levels > max_levels(padded) || block > padded {
        return Err(Error::Domain(format!("{levels} levels too deep for {n} samples")));
    }
    let h = wavelet.lowpass();
    let g = wavelet.highpass();
    let mut approx = signal.to_vec();
    approx.resize(padded, 0.0);
    let mut details = Vec::with_capacity(levels);
    for j in 0..levels {
        let step = 1usize << j;
        let mut a = vec![0.0; padded];
        let mut d = vec![0.0; padded];
        for t in 0..padded {
            let (mut sa, mut sd) = (0.0, 0.0);
            for (i, (hi, gi)) in h.iter().zip(&g).enumerate() {
                let v = approx[(t + i * step) % padded];
                sa += hi * v;
                sd += gi * v;
            }
            a[t] = sa;
            d[t] = sd;
        }
        details.push(d);
        approx = a;
    }
    Ok(WaveletDecomposition {
        details,
        approx,
        wavelet,
        scheme: Scheme::Stationary,
        level_lengths: vec![padded; levels],
        original_len: n,
    })
}

/// Which SWT bands to keep in a reconstruction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandSelection {
    /// 1-based detail levels.
    pub details: Vec<usize>,
    pub approx: bool,
}

impl BandSelection {
    pub fn all(levels: usize) -> Self {
        BandSelection {
            details: (1..=levels).collect(),
            approx: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.details.is_empty() && !self.approx
    }
}

/// Inverse SWT with unselected bands zeroed, trimmed to the original length.
/// Selecting every band returns the input.
pub fn swt_band_reconstruct(dec: &WaveletDecomposition, selection: &BandSelection) -> Result<Vec<f64>> {
    if dec.scheme != Scheme::Stationary {
        return Err(Error::Domain("band reconstruction expects a stationary decomposition".into()));
    }
    let levels = dec.levels();
    if let Some(bad) = selection.details.iter().find(|j| **j == 0 || **j > levels) {
        return Err(Error::Domain(format!("level {bad} outside 1..={levels}")));
    }
    let n = dec.approx.len();
    let h = dec.wavelet.lowpass();
    let g = dec.wavelet.highpass();
    let mut approx = if selection.approx { dec.approx.clone() } else { vec![0.0; n] };
    for j in (0..levels).rev() {
        let step = 1usize << j;
        let keep = selection.details.contains(&(j + 1));
        let detail = &dec.details[j];
        let mut prev = vec![0.0; n];
        for (i, (hi, gi)) in h.iter().zip(&g).enumerate() {
            let shift = (i * step) % n;
            for t in 0..n {
                let src = (t + n - shift) % n;
                let mut v = hi * approx[src];
                if keep {
                    v += gi * detail[src];
                }
                prev[t] += v;
            }
        }
        for v in &mut prev {
            *v *= 0.5;
        }
        approx = prev;
    }
    approx.truncate(dec.original_len);
    Ok(approx)
}

/// Nominal frequency band of detail level `level`, assuming ideal halfband filters.
pub fn level_band_hz(rate: f64, level: usize) -> (f64, f64) {
    let hi = rate / 2f64.powi(level as i32);
    (hi / 2.0, hi)
}

/// Detail levels (up to `max_level`) whose nominal band overlaps `[f_lo, f_hi]`
/// with positive width.
pub fn select_levels(rate: f64, f_lo: f64, f_hi: f64, max_level: usize) -> Vec<usize> {
    (1..=max_level)
        .filter(|&j| {
            let (lo, hi) = level_band_hz(rate, j);
            hi.min(f_hi) > lo.max(f_lo)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn energy(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn haar_hand_example() {
        let (a, d) = dwt_level(&[4.0, 6.0, 10.0, 12.0], Wavelet::Haar).unwrap();
        let s = std::f64::consts::SQRT_2;
        assert!((a[0] - 10.0 / s).abs() < 1e-12 && (a[1] - 22.0 / s).abs() < 1e-12);
        assert!((d[0] + s).abs() < 1e-12 && (d[1] + s).abs() < 1e-12);
        assert!((a[0] - 7.0711).abs() < 1e-4 && (a[1] - 15.5563).abs() < 1e-4);
    }

    #[test]
    fn constant_has_no_detail() {
        for w in [Wavelet::Haar, Wavelet::Db4] {
            let (_, d) = dwt_level(&[3.0; 16], w).unwrap();
            assert!(d.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn filters_are_orthonormal() {
        for w in [Wavelet::Haar, Wavelet::Db4] {
            let h = w.lowpass();
            let g = w.highpass();
            let len = h.len();
            for shift in (0..len).step_by(2) {
                let hh: f64 = (0..len - shift).map(|i| h[i] * h[i + shift]).sum();
                let gg: f64 = (0..len - shift).map(|i| g[i] * g[i + shift]).sum();
                let want = if shift == 0 { 1.0 } else { 0.0 };
                assert!((hh - want).abs() < 1e-14, "{w} hh shift {shift}: {hh}");
                assert!((gg - want).abs() < 1e-14);
            }
            let hg: f64 = h.iter().zip(&g).map(|(a, b)| a * b).sum();
            assert!(hg.abs() < 1e-14);
        }
    }

    #[test]
    fn parseval_single_level() {
        let x: Vec<f64> = (0..64).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3).collect();
        for w in [Wavelet::Haar, Wavelet::Db4] {
            let (a, d) = dwt_level(&x, w).unwrap();
            assert!((energy(&a) + energy(&d) - energy(&x)).abs() < 1e-9 * energy(&x));
        }
    }

    #[test]
    fn two_level_haar_of_ones() {
        let dec = wavedec(&[1.0; 8], Wavelet::Haar, 2).unwrap();
        assert!(dec.details.iter().flatten().all(|v| v.abs() < 1e-12));
        assert_eq!(dec.approx.len(), 2);
        assert!(dec.approx.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn odd_lengths_roundtrip() {
        let x: Vec<f64> = (0..37).map(|i| (i as f64 * 0.7).sin() + 0.01 * i as f64).collect();
        for w in [Wavelet::Haar, Wavelet::Db4] {
            let dec = wavedec(&x, w, 5).unwrap();
            assert_eq!(dec.details[0].len(), 19);
            let y = waverec(&dec).unwrap();
            assert_eq!(y.len(), x.len());
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wavedec_depth_checks() {
        assert!(wavedec(&[0.0; 8], Wavelet::Haar, 3).is_ok());
        assert!(wavedec(&[0.0; 8], Wavelet::Haar, 4).is_err());
        assert!(dwt_level(&[0.0; 4], Wavelet::Db4).is_err());
        assert!("sym5".parse::<Wavelet>().is_err());
    }

    #[test]
    fn zeros_decompose_to_zeros() {
        let dec = wavedec(&[0.0; 64], Wavelet::Db4, 3).unwrap();
        assert!(dec.details.iter().flatten().chain(&dec.approx).all(|v| *v == 0.0));
    }

    #[test]
    fn swt_complete_and_padded() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.3).cos() * (i as f64 * 0.05).exp()).collect();
        let dec = swt(&x, Wavelet::Db4, 3).unwrap();
        assert_eq!(dec.approx.len(), 104);
        let y = swt_band_reconstruct(&dec, &BandSelection::all(3)).unwrap();
        let scale = energy(&x).sqrt();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn swt_bands_sum_to_signal() {
        let x: Vec<f64> = (0..64).map(|i| ((i * 13 % 7) as f64).sqrt()).collect();
        let dec = swt(&x, Wavelet::Haar, 4).unwrap();
        let mut sum = vec![0.0; 64];
        for j in 1..=4 {
            let b = swt_band_reconstruct(&dec, &BandSelection { details: vec![j], approx: false }).unwrap();
            sum.iter_mut().zip(&b).for_each(|(s, v)| *s += v);
        }
        let a = swt_band_reconstruct(&dec, &BandSelection { details: vec![], approx: true }).unwrap();
        sum.iter_mut().zip(&a).for_each(|(s, v)| *s += v);
        for (s, v) in sum.iter().zip(&x) {
            assert!((s - v).abs() < 1e-12);
        }
    }

    #[test]
    fn level_selection() {
        assert_eq!(level_band_hz(128.0, 1), (32.0, 64.0));
        assert_eq!(select_levels(128.0, 1.0, 4.0, 7), vec![5, 6]);
        assert!(swt_band_reconstruct(
            &swt(&[0.0; 16], Wavelet::Haar, 2).unwrap(),
            &BandSelection { details: vec![3], approx: false }
        )
        .is_err());
    }
}
