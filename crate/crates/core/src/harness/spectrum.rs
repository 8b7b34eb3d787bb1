//! Transmit spectra of the two waveforms for out-of-band emission comparisons.

use rand::Rng;

use super::seeds::{stream, Purpose};
use crate::error::Result;
use crate::metrics::{psd_welch, Psd};
use crate::modem::{modulate_bits, ModScheme};
use crate::ofdm_link::{ofdm_tx, OfdmConfig};
use crate::sc_link::{sc_tx, ScConfig};

/// Welch spectra of long random QPSK transmissions, each scaled so its mean
/// in-band density is one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraComparison {
    pub ofdm: Psd,
    pub sc: Psd,
    /// Half of the common occupied bandwidth `N * delta_f / 2`, Hz.
    pub half_bandwidth: f64,
    /// Inner band `(1 - beta) / (2 T_SC)` over which densities were normalized, Hz.
    pub flat_half_width: f64,
}

impl SpectraComparison {
    /// OFDM-over-SC density ratio at frequency `f`, dB.
    pub fn excess_db(&self, f: f64) -> f64 {
        10.0 * (self.ofdm.at(f) / self.sc.at(f)).log10()
    }

    /// Peak-to-peak ripple of the SC spectrum over `|f| <= flat_half_width`, dB.
    pub fn sc_ripple_db(&self) -> f64 {
        let inner: Vec<f64> = self
            .sc
            .frequencies
            .iter()
            .zip(&self.sc.density)
            .filter(|(f, _)| f.abs() <= self.flat_half_width)
            .map(|(_, d)| *d)
            .collect();
        let (lo, hi) = inner
            .iter()
            .fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        10.0 * (hi / lo).log10()
    }
}

fn normalized(mut psd: Psd, half_width: f64) -> Psd {
    let level = psd.mean_within(half_width);
    psd.density.iter_mut().for_each(|d| *d /= level);
    psd
}

/// Simulates about `samples` transmit samples per waveform and estimates their
/// spectra with `segment`-point Hann-windowed Welch averaging at 50 % overlap.
pub fn transmit_spectra(
    ofdm: &OfdmConfig,
    sc: &ScConfig,
    samples: usize,
    segment: usize,
    seed: u64,
) -> Result<SpectraComparison> {
    let mut rng = stream(seed, Purpose::Payload, 0);
    let mut qpsk = |count: usize| {
        let bits: Vec<u8> = (0..2 * count).map(|_| rng.random_range(0..2u8)).collect();
        modulate_bits(&bits, ModScheme::Qpsk)
    };
    let ofdm_symbols = samples.div_ceil(ofdm.symbol_len()).max(1) * ofdm.used_subcarriers;
    let ofdm_samples = ofdm_tx(&qpsk(ofdm_symbols)?, ofdm)?.samples;
    let sc_samples = sc_tx(&qpsk(samples.div_ceil(sc.oversample_factor))?, sc);
    let flat = 0.5 * (1.0 - sc.pulse.rolloff) / sc.symbol_duration;
    Ok(SpectraComparison {
        ofdm: normalized(
            psd_welch(&ofdm_samples, ofdm.sample_rate(), segment, segment / 2)?,
            flat,
        ),
        sc: normalized(
            psd_welch(&sc_samples, sc.sample_rate(), segment, segment / 2)?,
            flat,
        ),
        half_bandwidth: 0.5 * ofdm.occupied_bandwidth(),
        flat_half_width: flat,
    })
}
