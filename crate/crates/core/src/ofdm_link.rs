//! OFDM transmitter and the two matched-filter array receivers.
//!
//! [`ofdm_rx_traditional`] transforms every antenna stream and combines per
//! subcarrier with the conjugate frequency response. [`ofdm_rx_mf`] applies the
//! conjugate, time-reversed sampled impulse response to each cyclic-prefix-free
//! symbol as a circular correlation, sums over antennas, and runs one shared
//! transform. With a cyclic prefix no shorter than the channel memory the two
//! receivers produce the same estimates.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::channel::{CfrGrid, DiscreteChannel, DiscreteKind};
use crate::error::{invalid, shape, Result};
use crate::linalg::{cholesky_psd, lower_mul};
use crate::modem::{complex_gaussian, SymbolBlock};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OfdmConfig {
    pub fft_size: usize,
    pub used_subcarriers: usize,
    pub cp_length: usize,
    pub subcarrier_spacing: f64,
    /// Permit a cyclic prefix shorter than the channel memory (waveform engine only).
    pub allow_isi: bool,
}

impl Default for OfdmConfig {
    /// 5 MHz LTE-like numerology with a 40-sample prefix.
    fn default() -> Self {
        Self {
            fft_size: 512,
            used_subcarriers: 300,
            cp_length: 40,
            subcarrier_spacing: 15e3,
            allow_isi: false,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.fft_size.is_power_of_two() || self.fft_size < 4 {
            return Err(invalid(format!(
                "fft_size {} must be a power of two >= 4",
                self.fft_size
            )));
        }
        if self.used_subcarriers == 0
            || !self.used_subcarriers.is_multiple_of(2)
            || self.used_subcarriers >= self.fft_size
        {
            return Err(invalid(format!(
                "used_subcarriers {} must be even, non-zero and below fft_size",
                self.used_subcarriers
            )));
        }
        if !(self.subcarrier_spacing > 0.0) {
            return Err(invalid("subcarrier_spacing must be positive"));
        }
        Ok(())
    }

    pub fn sample_rate(&self) -> f64 {
        self.fft_size as f64 * self.subcarrier_spacing
    }

    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cp_length
    }

    /// Signed subcarrier indices carrying data, ascending: `-N/2..-1, 1..N/2`.
    pub fn used_bins(&self) -> Vec<i64> {
        let h = (self.used_subcarriers / 2) as i64;
        (-h..0).chain(1..=h).collect()
    }

    /// FFT index of each used bin.
    pub fn fft_indices(&self) -> Vec<usize> {
        let n = self.fft_size as i64;
        self.used_bins()
            .iter()
            .map(|b| b.rem_euclid(n) as usize)
            .collect()
    }

    /// Frequencies of the used bins in Hz.
    pub fn used_frequencies(&self) -> Vec<f64> {
        self.used_bins()
            .iter()
            .map(|&b| b as f64 * self.subcarrier_spacing)
            .collect()
    }

    /// Data symbols per second including prefix and guard-band overhead.
    pub fn net_symbol_rate(&self) -> f64 {
        self.used_subcarriers as f64 * self.sample_rate() / self.symbol_len() as f64
    }

    /// Occupied bandwidth `N * delta_f`.
    pub fn occupied_bandwidth(&self) -> f64 {
        self.used_subcarriers as f64 * self.subcarrier_spacing
    }

    /// Transmit-power overhead of the cyclic prefix, `(N_FFT + N_CP) / N_FFT`.
    pub fn cp_overhead(&self) -> f64 {
        self.symbol_len() as f64 / self.fft_size as f64
    }
}

/// Time-domain OFDM samples, `symbol_count * (cp_length + fft_size)` long.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmFrame {
    pub samples: Vec<C64>,
    pub symbol_count: usize,
}

/// Forward and inverse unitary transforms of one size.
#[derive(Clone)]
pub struct OfdmTransforms {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl OfdmTransforms {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
            scale: 1.0 / (size as f64).sqrt(),
        }
    }

    pub fn forward(&self, buf: &mut [C64]) {
        self.forward.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
    }

    pub fn inverse(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
    }
}

impl std::fmt::Debug for OfdmTransforms {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmTransforms")
            .field("size", &self.forward.len())
            .finish()
    }
}

/// Maps each group of `N` symbols onto the used bins and appends a cyclic prefix.
///
/// The inverse transform is unitary, so the mean time-sample power is `N / N_FFT`
/// for unit-energy symbols.
pub fn ofdm_tx(symbols: &SymbolBlock, cfg: &OfdmConfig) -> Result<OfdmFrame> {
    cfg.validate()?;
    ofdm_tx_with(&symbols.symbols, cfg, &OfdmTransforms::new(cfg.fft_size))
}

pub fn ofdm_tx_with(symbols: &[C64], cfg: &OfdmConfig, fft: &OfdmTransforms) -> Result<OfdmFrame> {
    let n = cfg.used_subcarriers;
    if !symbols.len().is_multiple_of(n) {
        return Err(invalid(format!(
            "symbol count {} is not a multiple of {} used subcarriers",
            symbols.len(),
            n
        )));
    }
    let idx = cfg.fft_indices();
    let count = symbols.len() / n;
    let mut samples = Vec::with_capacity(count * cfg.symbol_len());
    let mut buf = vec![C64::new(0.0, 0.0); cfg.fft_size];
    for group in symbols.chunks_exact(n) {
        buf.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (&i, &s) in idx.iter().zip(group) {
            buf[i] = s;
        }
        fft.inverse(&mut buf);
        samples.extend_from_slice(&buf[cfg.fft_size - cfg.cp_length..]);
        samples.extend_from_slice(&buf);
    }
    Ok(OfdmFrame {
        samples,
        symbol_count: count,
    })
}

/// Linear convolution of a transmit frame with each antenna's sampled response.
/// Output streams have the frame's length; the convolution tail is dropped.
pub fn apply_channel(samples: &[C64], dchan: &DiscreteChannel) -> Vec<Vec<C64>> {
    dchan
        .taps
        .iter()
        .map(|taps| {
            let mut out = vec![C64::new(0.0, 0.0); samples.len()];
            for (l, &h) in taps.iter().enumerate() {
                if h.norm_sqr() == 0.0 {
                    continue;
                }
                for (o, &s) in out[l..].iter_mut().zip(samples) {
                    *o += h * s;
                }
            }
            out
        })
        .collect()
}

/// Output of either OFDM receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmRxOutput {
    /// Unbiased estimates `Y[k] / A[k]`, ordered symbol by symbol and bin by bin.
    pub estimates: Vec<C64>,
    /// Array gain `A[k] = sum_m |H_m[k]|^2` per used bin.
    pub gains: Vec<f64>,
}

impl OfdmRxOutput {
    /// Noise variance of each estimate for noise density `n0`.
    pub fn noise_variances(&self, n0: f64) -> Vec<f64> {
        let per_bin: Vec<f64> = self.gains.iter().map(|a| n0 / a).collect();
        per_bin
            .iter()
            .cycle()
            .take(self.estimates.len())
            .copied()
            .collect()
    }
}

fn check_streams(
    rx: &[Vec<C64>],
    cfg: &OfdmConfig,
    symbol_count: usize,
    antennas: usize,
) -> Result<()> {
    if rx.len() != antennas {
        return Err(shape(format!(
            "{} receive streams for {} antennas",
            rx.len(),
            antennas
        )));
    }
    let need = symbol_count * cfg.symbol_len();
    if let Some(s) = rx.iter().find(|s| s.len() < need) {
        return Err(shape(format!("stream of {} samples, need {need}", s.len())));
    }
    Ok(())
}

/// Per-antenna transform receiver with frequency-domain matched filtering.
pub fn ofdm_rx_traditional(
    rx: &[Vec<C64>],
    cfr: &CfrGrid,
    cfg: &OfdmConfig,
    symbol_count: usize,
) -> Result<OfdmRxOutput> {
    ofdm_rx_traditional_with(
        rx,
        cfr,
        cfg,
        symbol_count,
        &OfdmTransforms::new(cfg.fft_size),
    )
}

pub fn ofdm_rx_traditional_with(
    rx: &[Vec<C64>],
    cfr: &CfrGrid,
    cfg: &OfdmConfig,
    symbol_count: usize,
    fft: &OfdmTransforms,
) -> Result<OfdmRxOutput> {
    let n = cfg.used_subcarriers;
    if cfr.values.iter().any(|r| r.len() != n) || cfr.frequencies.len() != n {
        return Err(shape(format!(
            "frequency response must cover the {n} used bins"
        )));
    }
    check_streams(rx, cfg, symbol_count, cfr.values.len())?;
    let idx = cfg.fft_indices();
    let gains: Vec<f64> = (0..n)
        .map(|k| cfr.values.iter().map(|h| h[k].norm_sqr()).sum())
        .collect();
    let mut combined = vec![C64::new(0.0, 0.0); symbol_count * n];
    let mut buf = vec![C64::new(0.0, 0.0); cfg.fft_size];
    for (stream, h) in rx.iter().zip(&cfr.values) {
        for s in 0..symbol_count {
            let start = s * cfg.symbol_len() + cfg.cp_length;
            buf.copy_from_slice(&stream[start..start + cfg.fft_size]);
            fft.forward(&mut buf);
            for (k, &i) in idx.iter().enumerate() {
                combined[s * n + k] += h[k].conj() * buf[i];
            }
        }
    }
    let estimates = combined
        .iter()
        .enumerate()
        .map(|(j, y)| y / gains[j % n])
        .collect();
    Ok(OfdmRxOutput { estimates, gains })
}

/// Frequency response of a grid-snapped channel at the used bins, via direct DFT.
pub fn dft_on_used_bins(dchan: &DiscreteChannel, cfg: &OfdmConfig) -> Vec<Vec<C64>> {
    let nfft = cfg.fft_size as f64;
    let bins = cfg.used_bins();
    dchan
        .taps
        .iter()
        .map(|taps| {
            let nz: Vec<(usize, C64)> = taps
                .iter()
                .copied()
                .enumerate()
                .filter(|(_, t)| t.norm_sqr() > 0.0)
                .collect();
            bins.iter()
                .map(|&b| {
                    nz.iter()
                        .map(|&(l, t)| {
                            t * C64::from_polar(1.0, -2.0 * PI * (b * l as i64) as f64 / nfft)
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Frequency response of a grid-snapped channel at the used bins, via one
/// (non-unitary) transform per antenna. Equal to [`dft_on_used_bins`].
pub fn used_bin_response(
    dchan: &DiscreteChannel,
    cfg: &OfdmConfig,
    fft: &OfdmTransforms,
) -> Vec<Vec<C64>> {
    let idx = cfg.fft_indices();
    let gain = (cfg.fft_size as f64).sqrt();
    let mut buf = vec![C64::new(0.0, 0.0); cfg.fft_size];
    dchan
        .taps
        .iter()
        .map(|taps| {
            buf.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            buf[..taps.len()].copy_from_slice(taps);
            fft.forward(&mut buf);
            idx.iter().map(|&i| buf[i] * gain).collect()
        })
        .collect()
}

/// Time-domain matched filter per antenna followed by a single shared transform.
pub fn ofdm_rx_mf(
    rx: &[Vec<C64>],
    dchan: &DiscreteChannel,
    cfg: &OfdmConfig,
    symbol_count: usize,
) -> Result<OfdmRxOutput> {
    ofdm_rx_mf_with(
        rx,
        dchan,
        cfg,
        symbol_count,
        &OfdmTransforms::new(cfg.fft_size),
    )
}

pub fn ofdm_rx_mf_with(
    rx: &[Vec<C64>],
    dchan: &DiscreteChannel,
    cfg: &OfdmConfig,
    symbol_count: usize,
    fft: &OfdmTransforms,
) -> Result<OfdmRxOutput> {
    if dchan.kind != DiscreteKind::GridSnapped || dchan.first_index != 0 {
        return Err(invalid(
            "MF-OFDM needs a grid-snapped channel starting at index 0",
        ));
    }
    if ((dchan.sample_rate - cfg.sample_rate()) / cfg.sample_rate()).abs() > 1e-9 {
        return Err(invalid(format!(
            "channel sampled at {} Hz but OFDM runs at {} Hz",
            dchan.sample_rate,
            cfg.sample_rate()
        )));
    }
    if dchan.len() > cfg.fft_size {
        return Err(shape("channel longer than the FFT"));
    }
    check_streams(rx, cfg, symbol_count, dchan.antenna_count())?;
    let nfft = cfg.fft_size;
    let n = cfg.used_subcarriers;
    let idx = cfg.fft_indices();

    let gains: Vec<f64> = {
        let h = used_bin_response(dchan, cfg, fft);
        (0..n)
            .map(|k| h.iter().map(|row| row[k].norm_sqr()).sum())
            .collect()
    };
    let taps: Vec<Vec<(usize, C64)>> = dchan
        .taps
        .iter()
        .map(|t| {
            t.iter()
                .enumerate()
                .filter(|(_, v)| v.norm_sqr() > 0.0)
                .map(|(l, v)| (l, v.conj()))
                .collect()
        })
        .collect();

    let mut estimates = Vec::with_capacity(symbol_count * n);
    let mut acc = vec![C64::new(0.0, 0.0); nfft];
    for s in 0..symbol_count {
        acc.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        let start = s * cfg.symbol_len() + cfg.cp_length;
        for (stream, h) in rx.iter().zip(&taps) {
            let r = &stream[start..start + nfft];
            // circular correlation: u[n] = sum_l conj(h[l]) r[(n + l) mod N]
            for &(l, hc) in h {
                let (head, tail) = r.split_at(l);
                for (a, &v) in acc.iter_mut().zip(tail.iter().chain(head)) {
                    *a += hc * v;
                }
            }
        }
        fft.forward(&mut acc);
        estimates.extend(idx.iter().enumerate().map(|(k, &i)| acc[i] / gains[k]));
    }
    Ok(OfdmRxOutput { estimates, gains })
}

/// Cross gains `B[u][v][k] = sum_m conj(H_um[k]) H_vm[k]` between users.
pub fn cross_gains(cfrs: &[Vec<Vec<C64>>]) -> Vec<Vec<Vec<C64>>> {
    let nbins = cfrs.first().and_then(|c| c.first()).map_or(0, Vec::len);
    cfrs.iter()
        .map(|hu| {
            cfrs.iter()
                .map(|hv| {
                    (0..nbins)
                        .map(|k| hu.iter().zip(hv).map(|(a, b)| a[k].conj() * b[k]).sum())
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Residual inter-user interference variance per bin for user `u`, normalized by `A_u[k]^2`.
pub fn interference_variance(cross: &[Vec<Vec<C64>>], u: usize) -> Vec<f64> {
    let a = &cross[u][u];
    (0..a.len())
        .map(|k| {
            let g = a[k].re;
            cross[u]
                .iter()
                .enumerate()
                .filter(|(v, _)| *v != u)
                .map(|(_, b)| b[k].norm_sqr())
                .sum::<f64>()
                / (g * g)
        })
        .collect()
}

/// Per-bin symbol-level equivalent of the multi-user OFDM matched-filter receiver.
///
/// With a cyclic prefix covering the channel, user `u`'s combined output on bin
/// `k` is `sum_v B_uv[k] X_v[k] + nu_u[k]`, where the noise vector across users
/// has covariance `N0 B[k]`. Drawing that noise directly reproduces the
/// sample-level receivers in distribution at a fraction of the cost.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmSymbolModel {
    /// `cross[u][v][k]`, see [`cross_gains`].
    pub cross: Vec<Vec<Vec<C64>>>,
    /// Lower Cholesky factor of `B[k]` per bin.
    factors: Vec<Vec<Vec<C64>>>,
}

impl OfdmSymbolModel {
    /// `cfrs[u][m][k]`: user `u`'s response at antenna `m` on used bin `k`.
    pub fn new(cfrs: &[Vec<Vec<C64>>]) -> Self {
        let cross = cross_gains(cfrs);
        let users = cross.len();
        let bins = cross.first().map_or(0, |c| c[0].len());
        let factors = (0..bins)
            .map(|k| {
                let b: Vec<Vec<C64>> = (0..users)
                    .map(|u| (0..users).map(|v| cross[u][v][k]).collect())
                    .collect();
                cholesky_psd(&b)
            })
            .collect();
        Self { cross, factors }
    }

    pub fn users(&self) -> usize {
        self.cross.len()
    }

    /// Array gain `A_u[k]` per bin.
    pub fn gains(&self, u: usize) -> Vec<f64> {
        self.cross[u][u].iter().map(|b| b.re).collect()
    }

    /// Per-bin variance of user `u`'s estimates: noise plus residual inter-user interference.
    pub fn estimate_variances(&self, u: usize, n0: f64) -> Vec<f64> {
        let iui = interference_variance(&self.cross, u);
        self.gains(u)
            .iter()
            .zip(iui)
            .map(|(a, i)| n0 / a + i)
            .collect()
    }

    /// Noise-free estimates; `symbols[v]` holds whole OFDM symbols of user `v`.
    pub fn noiseless(&self, symbols: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let bins = self.factors.len();
        (0..self.users())
            .map(|u| {
                let a = self.gains(u);
                (0..symbols[u].len())
                    .map(|j| {
                        let k = j % bins;
                        let y: C64 = self.cross[u]
                            .iter()
                            .zip(symbols)
                            .map(|(b, x)| b[k] * x[j])
                            .sum();
                        y / a[k]
                    })
                    .collect()
            })
            .collect()
    }

    /// Estimates with receiver noise of density `n0`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        symbols: &[Vec<C64>],
        n0: f64,
        rng: &mut R,
    ) -> Vec<Vec<C64>> {
        let mut est = self.noiseless(symbols);
        if n0 > 0.0 {
            let bins = self.factors.len();
            let users = self.users();
            let gains: Vec<Vec<f64>> = (0..users).map(|u| self.gains(u)).collect();
            let sd = n0.sqrt();
            let mut w = vec![C64::new(0.0, 0.0); users];
            for j in 0..est.first().map_or(0, Vec::len) {
                let k = j % bins;
                for wi in w.iter_mut() {
                    *wi = complex_gaussian(rng, 1.0);
                }
                for (u, nu) in lower_mul(&self.factors[k], &w).into_iter().enumerate() {
                    est[u][j] += nu * sd / gains[u][k];
                }
            }
        }
        est
    }
}
