//! Tapped-delay-line Rayleigh channels for an M-antenna receiver.
//!
//! A [`ChannelRealization`] holds one complex gain per (antenna, tap). All
//! antennas share the tap delays of the generating [`TapDelayProfile`]. The
//! realization can be evaluated in frequency ([`cfr_on_grid`]) or sampled
//! in time ([`discretize`]), either by snapping delays to the sample grid or
//! by convolving with a continuous pulse.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::modem::complex_gaussian;
use crate::C64;

/// Power-delay profile with unit total power.
#[derive(Debug, Clone, PartialEq)]
pub struct TapDelayProfile {
    delays: Vec<f64>,
    powers: Vec<f64>,
}

impl TapDelayProfile {
    /// Builds a profile from delays in seconds and linear powers. Powers are
    /// normalized to unit sum.
    pub fn new(delays: Vec<f64>, powers: Vec<f64>) -> Result<Self> {
        if delays.is_empty() || delays.len() != powers.len() {
            return Err(invalid(format!(
                "profile needs equal, non-zero numbers of delays and powers ({} vs {})",
                delays.len(),
                powers.len()
            )));
        }
        if !(delays[0] >= 0.0) || delays.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid(
                "tap delays must be non-negative and strictly increasing",
            ));
        }
        if powers.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(invalid("tap powers must be positive and finite"));
        }
        let total: f64 = powers.iter().sum();
        let powers = powers.iter().map(|p| p / total).collect();
        Ok(Self { delays, powers })
    }

    /// Builds a profile from delays in seconds and relative powers in dB.
    pub fn from_db(delays: Vec<f64>, powers_db: &[f64]) -> Result<Self> {
        Self::new(
            delays,
            powers_db.iter().map(|d| 10f64.powf(d / 10.0)).collect(),
        )
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    pub fn max_delay(&self) -> f64 {
        *self.delays.last().unwrap()
    }

    /// Sample index of each tap after rounding its delay to a grid of `sample_rate`.
    pub fn grid_indices(&self, sample_rate: f64) -> Vec<usize> {
        self.delays
            .iter()
            .map(|d| (d * sample_rate).round() as usize)
            .collect()
    }
}

/// Extended Typical Urban profile (9 taps, 5 us maximum delay).
pub fn etu_profile() -> TapDelayProfile {
    const DELAYS_NS: [f64; 9] = [
        0.0, 50.0, 120.0, 200.0, 230.0, 500.0, 1600.0, 2300.0, 5000.0,
    ];
    const POWERS_DB: [f64; 9] = [-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0];
    TapDelayProfile::from_db(DELAYS_NS.iter().map(|d| d * 1e-9).collect(), &POWERS_DB)
        .expect("ETU table is valid")
}

/// One draw of the per-antenna tap gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `gains[m][l]` is the gain of tap `l` at antenna `m`.
    pub gains: Vec<Vec<C64>>,
    pub profile: TapDelayProfile,
}

impl ChannelRealization {
    pub fn antenna_count(&self) -> usize {
        self.gains.len()
    }

    /// Re-expresses the realization with delays rounded to the sample grid.
    /// Taps landing on the same sample are merged by adding their gains.
    pub fn snapped_to_grid(&self, sample_rate: f64) -> ChannelRealization {
        let idx = self.profile.grid_indices(sample_rate);
        let mut unique: Vec<usize> = idx.clone();
        unique.dedup();
        let slot: Vec<usize> = idx
            .iter()
            .map(|i| unique.binary_search(i).unwrap())
            .collect();
        let mut powers = vec![0.0; unique.len()];
        for (l, &s) in slot.iter().enumerate() {
            powers[s] += self.profile.powers[l];
        }
        let delays = unique.iter().map(|&i| i as f64 / sample_rate).collect();
        let gains = self
            .gains
            .iter()
            .map(|row| {
                let mut out = vec![C64::new(0.0, 0.0); unique.len()];
                for (l, g) in row.iter().enumerate() {
                    out[slot[l]] += g;
                }
                out
            })
            .collect();
        ChannelRealization {
            gains,
            profile: TapDelayProfile { delays, powers },
        }
    }

    /// Tap Gram matrix `sum_m conj(c_m[l]) * other_m[l']` between two realizations
    /// sharing the antenna count. Row index `l` belongs to `self`.
    pub fn gram_with(&self, other: &ChannelRealization) -> Vec<Vec<C64>> {
        let l1 = self.profile.len();
        let l2 = other.profile.len();
        let mut g = vec![vec![C64::new(0.0, 0.0); l2]; l1];
        for (a, b) in self.gains.iter().zip(&other.gains) {
            for (l, x) in a.iter().enumerate() {
                let xc = x.conj();
                for (lp, y) in b.iter().enumerate() {
                    g[l][lp] += xc * y;
                }
            }
        }
        g
    }
}

/// Draws i.i.d. circularly-symmetric Gaussian gains with variance given by the profile.
pub fn draw_channel<R: Rng + ?Sized>(
    profile: &TapDelayProfile,
    antennas: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if antennas == 0 {
        return Err(invalid("antenna count must be at least 1"));
    }
    let gains = (0..antennas)
        .map(|_| {
            profile
                .powers
                .iter()
                .map(|&p| complex_gaussian(rng, p))
                .collect()
        })
        .collect();
    Ok(ChannelRealization {
        gains,
        profile: profile.clone(),
    })
}

/// Channel frequency response on an arbitrary grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CfrGrid {
    /// `values[m][k]` is the response of antenna `m` at `frequencies[k]`.
    pub values: Vec<Vec<C64>>,
    pub frequencies: Vec<f64>,
}

/// Evaluates `H_m(f) = sum_l c_m[l] exp(-j 2 pi f tau_l)`.
pub fn cfr_on_grid(ch: &ChannelRealization, frequencies: &[f64]) -> CfrGrid {
    // phase[k][l] shared by every antenna
    let phase: Vec<Vec<C64>> = frequencies
        .iter()
        .map(|&f| {
            ch.profile
                .delays
                .iter()
                .map(|&tau| C64::from_polar(1.0, -2.0 * PI * f * tau))
                .collect()
        })
        .collect();
    let values = ch
        .gains
        .iter()
        .map(|row| {
            phase
                .iter()
                .map(|ph| row.iter().zip(ph).map(|(c, e)| c * e).sum())
                .collect()
        })
        .collect();
    CfrGrid {
        values,
        frequencies: frequencies.to_vec(),
    }
}

/// A real continuous-time pulse used to build composite channels.
pub trait Pulse {
    /// Pulse value at time `t` seconds relative to its peak.
    fn value(&self, t: f64) -> f64;
    /// The pulse is zero for `|t| > half_width()`.
    fn half_width(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscreteKind {
    GridSnapped,
    PulseComposite,
}

/// Sampled per-antenna impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel {
    /// `taps[m][n]` is the response of antenna `m` at time `(first_index + n) / sample_rate`.
    pub taps: Vec<Vec<C64>>,
    pub sample_rate: f64,
    pub kind: DiscreteKind,
    pub first_index: i64,
}

impl DiscreteChannel {
    pub fn antenna_count(&self) -> usize {
        self.taps.len()
    }

    pub fn len(&self) -> usize {
        self.taps.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total energy over all antennas and taps.
    pub fn energy(&self) -> f64 {
        self.taps.iter().flatten().map(|t| t.norm_sqr()).sum()
    }
}

/// Per-tap samples of a continuous pulse on a common sample grid.
///
/// Row `l` holds `pulse((first_index + n) / fs - tau_l)`; the grid spans the union
/// of all tap supports.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTable {
    pub first_index: i64,
    pub rows: Vec<Vec<f64>>,
}

impl PulseTable {
    pub fn new(profile: &TapDelayProfile, sample_rate: f64, pulse: &dyn Pulse) -> Self {
        let w = pulse.half_width();
        let eps = 1e-9;
        let first = ((profile.delays[0] - w) * sample_rate - eps).ceil() as i64;
        let last = ((profile.max_delay() + w) * sample_rate + eps).floor() as i64;
        let rows = profile
            .delays
            .iter()
            .map(|&tau| {
                (first..=last)
                    .map(|n| pulse.value(n as f64 / sample_rate - tau))
                    .collect()
            })
            .collect();
        Self {
            first_index: first,
            rows,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Start offset of the `length`-sample window that keeps the most mean energy
    /// under the profile. Earliest start wins ties.
    pub fn best_window(&self, profile: &TapDelayProfile, length: usize) -> usize {
        let n = self.len();
        if length >= n {
            return 0;
        }
        let mean: Vec<f64> = (0..n)
            .map(|j| {
                self.rows
                    .iter()
                    .zip(&profile.powers)
                    .map(|(r, p)| p * r[j] * r[j])
                    .sum()
            })
            .collect();
        let mut acc: f64 = mean[..length].iter().sum();
        let (mut best, mut best_start) = (acc, 0);
        for s in 1..=n - length {
            acc += mean[s + length - 1] - mean[s - 1];
            if acc > best * (1.0 + 1e-12) {
                best = acc;
                best_start = s;
            }
        }
        best_start
    }
}

/// Samples a realization at `sample_rate`.
///
/// * `GridSnapped`: tap `l` lands at index `round(tau_l * fs)`; coincident taps add.
///   `length` pads with zeros or drops trailing samples.
/// * `PulseComposite`: `taps[m][n] = sum_l c_m[l] pulse(t_n - tau_l)`. With
///   `length` shorter than the full support, the window keeping the most
///   profile-mean energy is retained.
pub fn discretize(
    ch: &ChannelRealization,
    sample_rate: f64,
    kind: DiscreteKind,
    pulse: Option<&dyn Pulse>,
    length: Option<usize>,
) -> Result<DiscreteChannel> {
    if !(sample_rate > 0.0) {
        return Err(invalid(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    if length == Some(0) {
        return Err(invalid("truncation length must be at least 1"));
    }
    match kind {
        DiscreteKind::GridSnapped => {
            let idx = ch.profile.grid_indices(sample_rate);
            let natural = idx.iter().max().unwrap() + 1;
            let n = length.unwrap_or(natural);
            let taps = ch
                .gains
                .iter()
                .map(|row| {
                    let mut out = vec![C64::new(0.0, 0.0); n];
                    for (g, &i) in row.iter().zip(&idx) {
                        if i < n {
                            out[i] += g;
                        }
                    }
                    out
                })
                .collect();
            Ok(DiscreteChannel {
                taps,
                sample_rate,
                kind,
                first_index: 0,
            })
        }
        DiscreteKind::PulseComposite => {
            let pulse =
                pulse.ok_or_else(|| invalid("pulse-composite discretization needs a pulse"))?;
            let table = PulseTable::new(&ch.profile, sample_rate, pulse);
            let full = table.len();
            let (start, n) = match length {
                Some(n) if n < full => (table.best_window(&ch.profile, n), n),
                _ => (0, full),
            };
            let taps = ch
                .gains
                .iter()
                .map(|row| {
                    (start..start + n)
                        .map(|j| row.iter().zip(&table.rows).map(|(c, r)| c * r[j]).sum())
                        .collect()
                })
                .collect();
            Ok(DiscreteChannel {
                taps,
                sample_rate,
                kind,
                first_index: table.first_index + start as i64,
            })
        }
    }
}

/// Largest normalized off-diagonal tap correlation `|c[l]^H c[l'] / M|`, `l != l'`.
/// Zero for single-tap profiles.
pub fn orthogonality_defect(ch: &ChannelRealization) -> f64 {
    let gram = ch.gram_with(ch);
    let m = ch.antenna_count() as f64;
    let mut worst: f64 = 0.0;
    for (l, row) in gram.iter().enumerate() {
        for (lp, v) in row.iter().enumerate() {
            if l != lp {
                worst = worst.max(v.norm() / m);
            }
        }
    }
    worst
}
