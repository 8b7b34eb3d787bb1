//! Single-carrier uplink with an oversampled matched-filter array receiver.
//!
//! Symbols are shaped by a root-raised-cosine pulse and pass through the
//! physical multipath channel, so antenna `m` observes the composite response
//! `g_m[n] = sum_l c_m[l] p(n / f_s - tau_l)`. The receiver correlates every stream
//! with its (truncated) `g_m`, sums over antennas and samples once per symbol.
//! No equalizer follows: with many antennas the combined response approaches the
//! raised-cosine Nyquist pulse and residual inter-symbol and inter-user
//! interference fades like `1/M`.
//!
//! Besides the sample-level chain, [`ScSymbolModel`] reproduces the receiver
//! output directly at symbol rate from the lag responses of the matched filter,
//! including the exact coloured noise, which is much cheaper for large arrays.

use rand::Rng;
use rustfft::FftPlanner;

use crate::channel::{
    ChannelRealization, DiscreteChannel, DiscreteKind, PulseTable, TapDelayProfile,
};
use crate::error::{invalid, shape, Result};
use crate::linalg::{cholesky_psd, lower_mul};
use crate::modem::{complex_gaussian, rrc_taps, ContinuousPulse, PulseShape, SymbolBlock};
use crate::ofdm_link::OfdmConfig;
use crate::C64;

/// Single-carrier numerology and receiver dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScConfig {
    /// Symbol period `T_SC` in seconds.
    pub symbol_duration: f64,
    /// Samples per symbol `alpha`.
    pub oversample_factor: usize,
    /// Transmit and receive shaping pulse.
    pub pulse: PulseShape,
    /// Matched-filter length in samples per antenna.
    pub mf_length: usize,
}

impl ScConfig {
    pub fn new(
        symbol_duration: f64,
        oversample_factor: usize,
        rolloff: f64,
        span_symbols: usize,
        mf_length: usize,
    ) -> Result<Self> {
        if !(symbol_duration > 0.0) {
            return Err(invalid(format!(
                "symbol duration must be positive, got {symbol_duration}"
            )));
        }
        if mf_length == 0 {
            return Err(invalid("matched-filter length must be at least 1"));
        }
        Ok(Self {
            symbol_duration,
            oversample_factor,
            pulse: rrc_taps(rolloff, span_symbols, oversample_factor)?,
            mf_length,
        })
    }

    /// Symbol rate equal to the net data-symbol rate of `ofdm`, so both
    /// waveforms carry the same number of symbols per second.
    pub fn matched_to(
        ofdm: &OfdmConfig,
        oversample_factor: usize,
        rolloff: f64,
        span_symbols: usize,
        mf_length: usize,
    ) -> Result<Self> {
        ofdm.validate()?;
        Self::new(
            1.0 / ofdm.net_symbol_rate(),
            oversample_factor,
            rolloff,
            span_symbols,
            mf_length,
        )
    }

    pub fn sample_rate(&self) -> f64 {
        self.oversample_factor as f64 / self.symbol_duration
    }

    pub fn symbol_rate(&self) -> f64 {
        1.0 / self.symbol_duration
    }

    /// Continuous pulse whose samples at [`Self::sample_rate`] are the transmit taps.
    pub fn continuous_pulse(&self) -> ContinuousPulse {
        self.pulse.continuous(self.symbol_duration)
    }

    /// Occupied bandwidth `(1 + beta) / T_SC`.
    pub fn occupied_bandwidth(&self) -> f64 {
        (1.0 + self.pulse.rolloff) / self.symbol_duration
    }
}

impl Default for ScConfig {
    /// Matched to the default OFDM numerology; roll-off 0.22, two samples per
    /// symbol, 12-symbol pulse span and a 78-tap matched filter.
    fn default() -> Self {
        Self::matched_to(&OfdmConfig::default(), 2, 0.22, 12, 78)
            .expect("default parameters are valid")
    }
}

/// Oversampled transmit waveform: full convolution of the upsampled symbols with
/// the shaping taps, `(n - 1) alpha + taps` samples long. Symbol `i` peaks at
/// sample `i alpha + span alpha`; each symbol carries its own energy.
pub fn sc_tx(symbols: &SymbolBlock, cfg: &ScConfig) -> Vec<C64> {
    let a = cfg.oversample_factor;
    let taps = &cfg.pulse.taps;
    if symbols.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); (symbols.len() - 1) * a + taps.len()];
    for (i, &x) in symbols.symbols.iter().enumerate() {
        for (o, &p) in out[i * a..].iter_mut().zip(taps) {
            *o += x * p;
        }
    }
    out
}

/// Antenna streams with their time origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ScReceived {
    /// `streams[m][t]` is the sample at time `(t + first_index) / f_s`, symbol 0 being sent at time 0.
    pub streams: Vec<Vec<C64>>,
    pub first_index: i64,
}

/// Superposes every user's symbols filtered by its composite channel.
///
/// All composites must share the sample grid and origin (same profile and pulse).
pub fn sc_propagate(
    symbols: &[&[C64]],
    composites: &[DiscreteChannel],
    cfg: &ScConfig,
) -> Result<ScReceived> {
    if symbols.len() != composites.len() || symbols.is_empty() {
        return Err(shape(format!(
            "{} symbol streams for {} channels",
            symbols.len(),
            composites.len()
        )));
    }
    let first = &composites[0];
    check_rate(first, cfg)?;
    let m = first.antenna_count();
    let len = first.len();
    if composites.iter().any(|c| {
        c.antenna_count() != m
            || c.len() != len
            || c.first_index != first.first_index
            || c.kind != first.kind
    }) {
        return Err(shape(
            "user channels differ in antenna count, length or origin",
        ));
    }
    let n = symbols[0].len();
    if symbols.iter().any(|s| s.len() != n) || n == 0 {
        return Err(shape("users must send equal, non-empty symbol blocks"));
    }
    let a = cfg.oversample_factor;
    let mut streams = vec![vec![C64::new(0.0, 0.0); (n - 1) * a + len]; m];
    for (x, g) in symbols.iter().zip(composites) {
        for (stream, taps) in streams.iter_mut().zip(&g.taps) {
            for (i, &s) in x.iter().enumerate() {
                for (o, &t) in stream[i * a..].iter_mut().zip(taps) {
                    *o += s * t;
                }
            }
        }
    }
    Ok(ScReceived {
        streams,
        first_index: first.first_index,
    })
}

fn check_rate(d: &DiscreteChannel, cfg: &ScConfig) -> Result<()> {
    if ((d.sample_rate - cfg.sample_rate()) / cfg.sample_rate()).abs() > 1e-9 {
        return Err(invalid(format!(
            "channel sampled at {} Hz but the receiver runs at {} Hz",
            d.sample_rate,
            cfg.sample_rate()
        )));
    }
    if d.kind != DiscreteKind::PulseComposite {
        return Err(invalid(
            "single-carrier links need pulse-composite channels",
        ));
    }
    Ok(())
}

/// Output of the matched-filter receiver for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct ScRxOutput {
    /// `z[i] / G` for every transmitted symbol.
    pub estimates: Vec<C64>,
    /// Desired-signal gain `G = sum_m sum_n |f_m[n]|^2` of the applied filter.
    pub gain: f64,
    /// Noise power gain of the filter, `sum |f|^2`; estimate noise variance is `N0 * noise_gain / G^2`.
    pub noise_gain: f64,
}

impl ScRxOutput {
    pub fn noise_variance(&self, n0: f64) -> f64 {
        n0 * self.noise_gain / (self.gain * self.gain)
    }
}

/// Keeps the `length`-sample window with the most realized energy.
fn strongest_window(d: &DiscreteChannel, length: usize) -> DiscreteChannel {
    if d.len() <= length {
        return d.clone();
    }
    let e: Vec<f64> = (0..d.len())
        .map(|j| d.taps.iter().map(|t| t[j].norm_sqr()).sum())
        .collect();
    let mut acc: f64 = e[..length].iter().sum();
    let (mut best, mut start) = (acc, 0);
    for s in 1..=d.len() - length {
        acc += e[s + length - 1] - e[s - 1];
        if acc > best * (1.0 + 1e-12) {
            best = acc;
            start = s;
        }
    }
    DiscreteChannel {
        taps: d
            .taps
            .iter()
            .map(|t| t[start..start + length].to_vec())
            .collect(),
        sample_rate: d.sample_rate,
        kind: d.kind,
        first_index: d.first_index + start as i64,
    }
}

/// Matched-filter receiver: per-antenna correlation with `conj(f_m)`, sum over
/// antennas, one sample per symbol at the peak of the combined response.
///
/// `mf` is the composite channel as known to the receiver. When it is longer than
/// `cfg.mf_length` the strongest window of that length is used.
pub fn sc_rx_mf(
    rx: &ScReceived,
    mf: &DiscreteChannel,
    cfg: &ScConfig,
    symbol_count: usize,
) -> Result<ScRxOutput> {
    check_rate(mf, cfg)?;
    if rx.streams.len() != mf.antenna_count() {
        return Err(shape(format!(
            "{} receive streams for {} antennas",
            rx.streams.len(),
            mf.antenna_count()
        )));
    }
    let f = strongest_window(mf, cfg.mf_length);
    let a = cfg.oversample_factor as i64;
    let off = f.first_index - rx.first_index;
    let energy = f.energy();
    if !(energy > 0.0) {
        return Err(invalid("matched filter has no energy"));
    }
    let mut z = vec![C64::new(0.0, 0.0); symbol_count];
    for (stream, taps) in rx.streams.iter().zip(&f.taps) {
        let len = stream.len() as i64;
        for (i, zi) in z.iter_mut().enumerate() {
            let base = i as i64 * a + off;
            let lo = (-base).max(0);
            let hi = (len - base).min(taps.len() as i64);
            if lo >= hi {
                continue;
            }
            let seg = &stream[(base + lo) as usize..(base + hi) as usize];
            *zi += taps[lo as usize..hi as usize]
                .iter()
                .zip(seg)
                .map(|(t, s)| t.conj() * s)
                .sum::<C64>();
        }
    }
    Ok(ScRxOutput {
        estimates: z.iter().map(|v| v / energy).collect(),
        gain: energy,
        noise_gain: energy,
    })
}

/// A response indexed by symbol lag, zero outside the stored range.
#[derive(Debug, Clone, PartialEq)]
pub struct LagResponse {
    pub first_lag: i64,
    pub values: Vec<C64>,
}

impl LagResponse {
    pub fn at(&self, lag: i64) -> C64 {
        let j = lag - self.first_lag;
        if j < 0 || j >= self.values.len() as i64 {
            C64::new(0.0, 0.0)
        } else {
            self.values[j as usize]
        }
    }

    pub fn lags(&self) -> std::ops::Range<i64> {
        self.first_lag..self.first_lag + self.values.len() as i64
    }

    /// Energy over all lags except `skip`.
    pub fn energy_except(&self, skip: Option<i64>) -> f64 {
        self.lags()
            .zip(&self.values)
            .filter(|(k, _)| Some(*k) != skip)
            .map(|(_, v)| v.norm_sqr())
            .sum()
    }
}

fn lag_range(offset: i64, filter_len: usize, target_len: usize, alpha: i64) -> (i64, i64) {
    let lo = (-offset - filter_len as i64 + 1).div_euclid(alpha)
        + i64::from((-offset - filter_len as i64 + 1).rem_euclid(alpha) != 0);
    let hi = (target_len as i64 - 1 - offset).div_euclid(alpha);
    (lo, hi)
}

/// Symbol-spaced response `S[k] = sum_m sum_q conj(f_m[q]) g_m(k alpha + q)` of
/// filter `mf` to a symbol sent through `composite`, aligned as in [`sc_rx_mf`].
pub fn mf_response(mf: &DiscreteChannel, composite: &DiscreteChannel, alpha: usize) -> LagResponse {
    let a = alpha as i64;
    let off = mf.first_index - composite.first_index;
    let (lo, hi) = lag_range(off, mf.len(), composite.len(), a);
    let values = (lo..=hi)
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            for (f, g) in mf.taps.iter().zip(&composite.taps) {
                for (q, fq) in f.iter().enumerate() {
                    let j = k * a + off + q as i64;
                    if j >= 0 && (j as usize) < g.len() {
                        acc += fq.conj() * g[j as usize];
                    }
                }
            }
            acc
        })
        .collect();
    LagResponse {
        first_lag: lo,
        values,
    }
}

/// Symbol-spaced noise cross-correlation `sum_m sum_q conj(f_um[q]) f_vm[q + d alpha]`
/// of two matched filters (multiply by `N0` for the covariance).
pub fn mf_noise_correlation(
    mf_u: &DiscreteChannel,
    mf_v: &DiscreteChannel,
    alpha: usize,
) -> LagResponse {
    let mut r = mf_response(mf_u, mf_v, alpha);
    // trim to the lags where the filters overlap symmetrically
    let reach = ((mf_u.len().max(mf_v.len()) - 1) / alpha) as i64;
    let keep: Vec<C64> = (-reach..=reach).map(|d| r.at(d)).collect();
    r.first_lag = -reach;
    r.values = keep;
    r
}

/// Per-tap-pair lag responses of the shaping pulse for a fixed matched-filter
/// window, so that responses for any realization follow from its tap Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ScResponseTables {
    alpha: usize,
    window_start: usize,
    window_len: usize,
    signal_first_lag: i64,
    /// `signal[l][l'][k]`: filter built from tap `l` against the composite of tap `l'`.
    signal: Vec<Vec<Vec<f64>>>,
    noise_reach: i64,
    /// `noise[l][l'][d + reach]`.
    noise: Vec<Vec<Vec<f64>>>,
}

impl ScResponseTables {
    pub fn new(profile: &TapDelayProfile, cfg: &ScConfig) -> Self {
        let pulse = cfg.continuous_pulse();
        let table = PulseTable::new(profile, cfg.sample_rate(), &pulse);
        let full = table.len();
        let (start, lf) = if cfg.mf_length < full {
            (table.best_window(profile, cfg.mf_length), cfg.mf_length)
        } else {
            (0, full)
        };
        let alpha = cfg.oversample_factor;
        let a = alpha as i64;
        let (lo, hi) = lag_range(start as i64, lf, full, a);
        let rows = &table.rows;
        let signal = rows
            .iter()
            .map(|pl| {
                rows.iter()
                    .map(|pm| {
                        (lo..=hi)
                            .map(|k| {
                                (0..lf)
                                    .filter_map(|q| {
                                        let j = k * a + (start + q) as i64;
                                        (j >= 0 && (j as usize) < full)
                                            .then(|| pl[start + q] * pm[j as usize])
                                    })
                                    .sum()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let reach = ((lf - 1) / alpha) as i64;
        let noise = rows
            .iter()
            .map(|pl| {
                rows.iter()
                    .map(|pm| {
                        (-reach..=reach)
                            .map(|d| {
                                (0..lf)
                                    .filter_map(|q| {
                                        let j = q as i64 + d * a;
                                        (j >= 0 && (j as usize) < lf)
                                            .then(|| pl[start + q] * pm[start + j as usize])
                                    })
                                    .sum()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            alpha,
            window_start: start,
            window_len: lf,
            signal_first_lag: lo,
            signal,
            noise_reach: reach,
            noise,
        }
    }

    /// Matched-filter window `(start, length)` within the full composite support.
    pub fn window(&self) -> (usize, usize) {
        (self.window_start, self.window_len)
    }

    fn combine(gram: &[Vec<C64>], table: &[Vec<Vec<f64>>], first_lag: i64) -> LagResponse {
        let n = table[0][0].len();
        let mut values = vec![C64::new(0.0, 0.0); n];
        for (grow, trow) in gram.iter().zip(table) {
            for (g, t) in grow.iter().zip(trow) {
                for (v, &q) in values.iter_mut().zip(t) {
                    *v += g * q;
                }
            }
        }
        LagResponse { first_lag, values }
    }

    /// Signal response of user `u`'s filter to user `v`'s channel from the Gram
    /// matrix `gram[l][l'] = sum_m conj(c_um[l]) c_vm[l']`.
    pub fn signal_response(&self, gram: &[Vec<C64>]) -> LagResponse {
        Self::combine(gram, &self.signal, self.signal_first_lag)
    }

    /// Noise cross-correlation of users `u` and `v` from the same Gram matrix.
    pub fn noise_correlation(&self, gram: &[Vec<C64>]) -> LagResponse {
        Self::combine(gram, &self.noise, -self.noise_reach)
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }
}

/// Symbol-rate equivalent of the multi-user matched-filter receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ScSymbolModel {
    /// `signal[u][v]`: response of user `u`'s receiver to user `v`'s symbols.
    pub signal: Vec<Vec<LagResponse>>,
    /// `noise[u][v]`: noise cross-correlation per unit `N0`.
    pub noise: Vec<Vec<LagResponse>>,
}

impl ScSymbolModel {
    /// Responses from tap Gram matrices (fast path).
    pub fn from_tables(tables: &ScResponseTables, channels: &[ChannelRealization]) -> Self {
        let mut signal = Vec::with_capacity(channels.len());
        let mut noise = Vec::with_capacity(channels.len());
        for cu in channels {
            let grams: Vec<Vec<Vec<C64>>> = channels.iter().map(|cv| cu.gram_with(cv)).collect();
            signal.push(grams.iter().map(|g| tables.signal_response(g)).collect());
            noise.push(grams.iter().map(|g| tables.noise_correlation(g)).collect());
        }
        Self { signal, noise }
    }

    /// Responses computed directly from sampled filters and composites.
    pub fn from_filters(
        mfs: &[DiscreteChannel],
        composites: &[DiscreteChannel],
        alpha: usize,
    ) -> Self {
        let signal = mfs
            .iter()
            .map(|f| {
                composites
                    .iter()
                    .map(|g| mf_response(f, g, alpha))
                    .collect()
            })
            .collect();
        let noise = mfs
            .iter()
            .map(|fu| {
                mfs.iter()
                    .map(|fv| mf_noise_correlation(fu, fv, alpha))
                    .collect()
            })
            .collect();
        Self { signal, noise }
    }

    pub fn users(&self) -> usize {
        self.signal.len()
    }

    /// Desired gain `G_u`.
    pub fn gain(&self, u: usize) -> f64 {
        self.signal[u][u].at(0).re
    }

    /// Variance of user `u`'s estimates counting noise, residual inter-symbol
    /// and inter-user interference (unit-energy symbols).
    pub fn estimate_variance(&self, u: usize, n0: f64) -> f64 {
        let g = self.gain(u);
        let isi = self.signal[u][u].energy_except(Some(0));
        let iui: f64 = (0..self.users())
            .filter(|&v| v != u)
            .map(|v| self.signal[u][v].energy_except(None))
            .sum();
        (n0 * self.noise[u][u].at(0).re + isi + iui) / (g * g)
    }

    /// Noise-free estimates `sum_v sum_k S_uv[k] x_v[i - k] / G_u`.
    pub fn noiseless(&self, symbols: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let n = symbols.first().map_or(0, Vec::len) as i64;
        (0..self.users())
            .map(|u| {
                let g = self.gain(u);
                let mut y = vec![C64::new(0.0, 0.0); n as usize];
                for (resp, x) in self.signal[u].iter().zip(symbols) {
                    for (k, &s) in resp.lags().zip(&resp.values) {
                        let (lo, hi) = (k.max(0), (n + k).min(n));
                        for i in lo..hi {
                            y[i as usize] += s * x[(i - k) as usize];
                        }
                    }
                }
                y.iter().map(|v| v / g).collect()
            })
            .collect()
    }

    /// Estimates with jointly Gaussian matched-filter noise of density `n0`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        symbols: &[Vec<C64>],
        n0: f64,
        rng: &mut R,
    ) -> Vec<Vec<C64>> {
        let mut est = self.noiseless(symbols);
        if n0 > 0.0 {
            let n = est.first().map_or(0, Vec::len);
            let noise = self.coloured_noise(n, n0, rng);
            for (u, (e, z)) in est.iter_mut().zip(noise).enumerate() {
                let g = self.gain(u);
                for (a, b) in e.iter_mut().zip(z) {
                    *a += b / g;
                }
            }
        }
        est
    }

    /// `n` samples per user of the matched-filter output noise (before the `1/G` scaling),
    /// drawn by circulant embedding of the cross-correlation sequence.
    pub fn coloured_noise<R: Rng + ?Sized>(&self, n: usize, n0: f64, rng: &mut R) -> Vec<Vec<C64>> {
        let k = self.users();
        let reach = self
            .noise
            .iter()
            .flatten()
            .map(|r| r.first_lag.abs().max(r.lags().end - 1))
            .max()
            .unwrap_or(0) as usize;
        let p = (n + 2 * reach + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(p);
        let inv = planner.plan_fft_inverse(p);
        // spectra[u][v][bin]
        let spectra: Vec<Vec<Vec<C64>>> = self
            .noise
            .iter()
            .map(|row| {
                row.iter()
                    .map(|r| {
                        let mut buf = vec![C64::new(0.0, 0.0); p];
                        for (d, &v) in r.lags().zip(&r.values) {
                            buf[d.rem_euclid(p as i64) as usize] += v * n0;
                        }
                        fwd.process(&mut buf);
                        buf
                    })
                    .collect()
            })
            .collect();
        let mut z = vec![vec![C64::new(0.0, 0.0); p]; k];
        let mut sigma = vec![vec![C64::new(0.0, 0.0); k]; k];
        let mut w = vec![C64::new(0.0, 0.0); k];
        for bin in 0..p {
            for u in 0..k {
                for v in 0..k {
                    // Hermitian part; discards round-off asymmetry
                    sigma[u][v] = 0.5 * (spectra[u][v][bin] + spectra[v][u][bin].conj());
                }
            }
            let l = cholesky_psd(&sigma);
            for wi in w.iter_mut() {
                *wi = complex_gaussian(rng, 1.0);
            }
            for (u, val) in lower_mul(&l, &w).into_iter().enumerate() {
                z[u][bin] = val;
            }
        }
        let scale = 1.0 / (p as f64).sqrt();
        z.into_iter()
            .map(|mut zu| {
                inv.process(&mut zu);
                zu.truncate(n);
                zu.iter_mut().for_each(|v| *v *= scale);
                zu
            })
            .collect()
    }
}

/// Noiseless estimate error energy `sum_{k != 0} |S[k]|^2 / G^2` of a single user.
pub fn residual_isi(resp: &LagResponse) -> f64 {
    let g = resp.at(0).re;
    resp.energy_except(Some(0)) / (g * g)
}

/// Continuous-time spectrum edge `(1 + beta) / (2 T)` in Hz.
pub fn band_edge(cfg: &ScConfig) -> f64 {
    0.5 * (1.0 + cfg.pulse.rolloff) / cfg.symbol_duration
}
