//! Time-frequency decompositions: STFT, dyadic DWT, the stationary (à trous)
//! wavelet transform, empirical mode decomposition and the Hilbert spectrum.
//!
//! Every transform treats its input as one period of a periodic signal.

mod emd;
mod hilbert;
mod spline;
mod stft;
mod wavelet;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use emd::{emd, count_extrema, EmdConfig, ImfSet};
pub use hilbert::{analytic_signal, hht_spectrum, instantaneous_frequency, HhtParams};
pub use spline::CubicSpline;
pub use stft::{stft, Taper};
pub use wavelet::{
    dwt_level, idwt_level, level_band_hz, select_levels, swt, swt_band_reconstruct, wavedec, waverec,
    BandSelection, Scheme, Wavelet, WaveletDecomposition,
};

/// Magnitudes on a time × frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    /// `magnitudes[frame][bin]`.
    pub magnitudes: Vec<Vec<f64>>,
    /// Frame center times, seconds from the first sample.
    pub frame_times: Vec<f64>,
    pub bin_freqs: Vec<f64>,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.magnitudes.len()
    }

    /// Frequency of the largest magnitude in each frame.
    pub fn ridge(&self) -> Vec<f64> {
        self.magnitudes
            .iter()
            .map(|row| {
                let k = (0..row.len()).max_by(|a, b| row[*a].total_cmp(&row[*b])).unwrap_or(0);
                self.bin_freqs.get(k).copied().unwrap_or(0.0)
            })
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.magnitudes.iter().flatten().sum()
    }
}

/// Write equally long bands as CSV columns, one row per sample.
pub fn write_bands_csv<W: Write>(out: W, names: &[String], bands: &[&[f64]]) -> Result<()> {
    if names.len() != bands.len() {
        return Err(Error::Format("band names and band count differ".into()));
    }
    let len = bands.first().map_or(0, |b| b.len());
    if bands.iter().any(|b| b.len() != len) {
        return Err(Error::Format("bands must share one length".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(names).map_err(|e| Error::Format(e.to_string()))?;
    for i in 0..len {
        w.write_record(bands.iter().map(|b| b[i].to_string()))
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
