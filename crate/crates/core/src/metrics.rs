//! Figures of merit: receiver multiplication counts, block-error-rate
//! intervals, spectral and relative energy efficiency, and Welch power spectra.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::modem::ModScheme;
use crate::C64;

/// Receiver architecture whose per-symbol-block complexity is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReceiverKind {
    TraditionalOfdm,
    MfOfdm,
    Sc,
}

impl ReceiverKind {
    pub const ALL: [ReceiverKind; 3] = [Self::TraditionalOfdm, Self::MfOfdm, Self::Sc];

    pub fn name(self) -> &'static str {
        match self {
            Self::TraditionalOfdm => "traditional-ofdm",
            Self::MfOfdm => "mf-ofdm",
            Self::Sc => "sc",
        }
    }
}

impl fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                invalid(format!(
                    "unknown receiver kind '{s}' (expected traditional-ofdm, mf-ofdm or sc)"
                ))
            })
    }
}

/// Complex multiplications per OFDM-symbol interval.
///
/// * traditional OFDM: `M (N_FFT/2 log2 N_FFT + N)`
/// * MF-OFDM: `M (L + 1) + N_FFT/2 log2 N_FFT`
/// * single carrier: `M (L + 1) alpha`
pub fn complexity_count(
    kind: ReceiverKind,
    m: u64,
    fft_size: u64,
    used: u64,
    l: u64,
    alpha: u64,
) -> Result<u64> {
    if m == 0 || fft_size == 0 || used == 0 || l == 0 {
        return Err(invalid("M, N_FFT, N and L must all be at least 1"));
    }
    if !fft_size.is_power_of_two() {
        return Err(invalid(format!(
            "N_FFT must be a power of two, got {fft_size}"
        )));
    }
    let fft = fft_size / 2 * u64::from(fft_size.trailing_zeros());
    Ok(match kind {
        ReceiverKind::TraditionalOfdm => m * (fft + used),
        ReceiverKind::MfOfdm => m * (l + 1) + fft,
        ReceiverKind::Sc => {
            if alpha == 0 {
                return Err(invalid("oversampling factor must be at least 1"));
            }
            m * (l + 1) * alpha
        }
    })
}

/// Plain-text table of [`complexity_count`]: a header of array sizes, then one
/// row per receiver whose cells read `count (a.be+x)`.
pub fn complexity_table(
    fft_size: u64,
    used: u64,
    l: u64,
    alpha: u64,
    antennas: &[u64],
) -> Result<String> {
    let mut out = format!("{:<18}", "receiver");
    for m in antennas {
        out.push_str(&format!("{:>22}", format!("M={m}")));
    }
    out.push('\n');
    for kind in ReceiverKind::ALL {
        out.push_str(&format!("{:<18}", kind.name()));
        for &m in antennas {
            let c = complexity_count(kind, m, fft_size, used, l, alpha)?;
            // two significant figures
            let short = format!("{:.1e}", c as f64).replace('e', "e+");
            out.push_str(&format!("{:>22}", format!("{c} ({short})")));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Block error rate with a 95 % Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlerEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Point estimate `errors / trials` and its Wilson interval.
pub fn bler_estimate(errors: u64, trials: u64) -> Result<BlerEstimate> {
    if trials == 0 || errors > trials {
        return Err(invalid(format!(
            "need 0 <= errors <= trials, trials >= 1; got {errors}/{trials}"
        )));
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(BlerEstimate {
        point: p,
        lower: if errors == 0 {
            0.0
        } else {
            (centre - half).max(0.0)
        },
        upper: if errors == trials {
            1.0
        } else {
            (centre + half).min(1.0)
        },
    })
}

/// Delivered information bits per second per hertz:
/// `bits_per_symbol * code_rate * (1 - bler) * symbol_rate / bandwidth`.
pub fn spectral_efficiency(
    bler: f64,
    scheme: ModScheme,
    code_rate: f64,
    symbol_rate: f64,
    bandwidth: f64,
) -> f64 {
    scheme.bits_per_symbol() as f64 * code_rate * (1.0 - bler) * symbol_rate / bandwidth
}

/// Information rate per unit transmit power, relative to a unit-energy,
/// overhead-free reference. `overhead` is the ratio of radiated to useful
/// energy, `(N_FFT + N_CP) / N_FFT` for OFDM and 1 for single carrier.
pub fn relative_energy_efficiency(se: f64, esn0_db: f64, overhead: f64) -> f64 {
    se / (10f64.powf(esn0_db / 10.0) * overhead)
}

/// Two-sided power spectral density on an ascending frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    /// Hz, from `-fs/2` up to just below `fs/2`.
    pub frequencies: Vec<f64>,
    /// Power per hertz.
    pub density: Vec<f64>,
}

impl Psd {
    /// Total power, `sum density * bin_width`.
    pub fn total_power(&self) -> f64 {
        let df = self
            .frequencies
            .get(1)
            .map_or(0.0, |f| f - self.frequencies[0]);
        self.density.iter().sum::<f64>() * df
    }

    /// Density at the bin nearest `f`.
    pub fn at(&self, f: f64) -> f64 {
        let i = self
            .frequencies
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - f).abs().total_cmp(&(b.1 - f).abs()))
            .map_or(0, |(i, _)| i);
        self.density[i]
    }

    /// Mean density over `|f| <= half_width`.
    pub fn mean_within(&self, half_width: f64) -> f64 {
        let v: Vec<f64> = self
            .frequencies
            .iter()
            .zip(&self.density)
            .filter(|(f, _)| f.abs() <= half_width)
            .map(|(_, d)| *d)
            .collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }
}

/// Welch estimate with a periodic Hann window; `overlap` samples are shared by
/// consecutive segments.
pub fn psd_welch(
    samples: &[C64],
    sample_rate: f64,
    segment_length: usize,
    overlap: usize,
) -> Result<Psd> {
    if segment_length < 2 || overlap >= segment_length || segment_length > samples.len() {
        return Err(invalid(format!(
            "invalid segmentation: {} samples, segment {segment_length}, overlap {overlap}",
            samples.len()
        )));
    }
    if !(sample_rate > 0.0) {
        return Err(invalid("sample rate must be positive"));
    }
    let n = segment_length;
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect();
    let wenergy: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let step = n - overlap;
    let mut acc = vec![0.0; n];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let mut segments = 0usize;
    let mut start = 0;
    while start + n <= samples.len() {
        for ((b, &s), &w) in buf.iter_mut().zip(&samples[start..start + n]).zip(&window) {
            *b = s * w;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let scale = 1.0 / (segments as f64 * wenergy * sample_rate);
    let half = n / 2;
    let (frequencies, density) = (0..n)
        .map(|j| {
            let k = (j + n - half) % n; // FFT bin shown at position j
            let f = (j as f64 - half as f64) * sample_rate / n as f64;
            (f, acc[k] * scale)
        })
        .unzip();
    Ok(Psd {
        frequencies,
        density,
    })
}

/// Transmission scheme label used in result records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Waveform {
    /// OFDM with the per-antenna transform receiver.
    Ofdm,
    /// OFDM with the shared-transform matched-filter receiver.
    MfOfdm,
    /// Single carrier with the oversampled matched-filter receiver.
    Sc,
}

impl Waveform {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ofdm => "ofdm",
            Self::MfOfdm => "mf-ofdm",
            Self::Sc => "sc",
        }
    }

    pub fn is_ofdm(self) -> bool {
        matches!(self, Self::Ofdm | Self::MfOfdm)
    }
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One simulated operating point, serialized as one CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub waveform: Waveform,
    #[serde(rename = "M")]
    pub antennas: usize,
    #[serde(rename = "K")]
    pub users: usize,
    pub scheme: ModScheme,
    pub code_rate: f64,
    pub esn0_db: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub bler_lo: f64,
    pub bler_hi: f64,
    pub se_bps_hz: f64,
    pub ee_relative: f64,
    pub seed: u64,
}
