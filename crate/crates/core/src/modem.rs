//! Bit mapping, soft demapping, pulse shaping and AWGN.
//!
//! Constellations follow the LTE Gray labelling and are normalized to unit
//! average energy. LLRs are positive when bit 0 is more likely.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::Pulse;
use crate::error::{invalid, Result};
use crate::C64;

/// Modulation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModScheme {
    #[serde(rename = "qpsk", alias = "QPSK")]
    Qpsk,
    #[serde(rename = "16qam", alias = "16QAM", alias = "qam16")]
    Qam16,
}

impl ModScheme {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            ModScheme::Qpsk => 2,
            ModScheme::Qam16 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModScheme::Qpsk => "qpsk",
            ModScheme::Qam16 => "16qam",
        }
    }

    /// PAM levels per dimension, indexed by the per-dimension label.
    ///
    /// For QPSK the label is one bit. For 16QAM it is `(sign_bit << 1) | magnitude_bit`.
    fn levels(self) -> &'static [f64] {
        const QPSK: [f64; 2] = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2];
        // 1/sqrt(10) and 3/sqrt(10)
        const A: f64 = 0.316_227_766_016_837_94;
        const B: f64 = 0.948_683_298_050_513_8;
        const QAM16: [f64; 4] = [A, B, -A, -B];
        match self {
            ModScheme::Qpsk => &QPSK,
            ModScheme::Qam16 => &QAM16,
        }
    }

    /// Constellation point for a label given as `bits_per_symbol` bits, MSB first.
    pub fn point(self, bits: &[u8]) -> C64 {
        let lv = self.levels();
        match self {
            ModScheme::Qpsk => C64::new(lv[bits[0] as usize], lv[bits[1] as usize]),
            ModScheme::Qam16 => {
                let i = ((bits[0] as usize) << 1) | bits[2] as usize;
                let q = ((bits[1] as usize) << 1) | bits[3] as usize;
                C64::new(lv[i], lv[q])
            }
        }
    }

    /// All constellation points, indexed by label value (MSB first).
    pub fn constellation(self) -> Vec<C64> {
        let b = self.bits_per_symbol();
        (0..1usize << b)
            .map(|label| {
                let bits: Vec<u8> = (0..b).map(|i| ((label >> (b - 1 - i)) & 1) as u8).collect();
                self.point(&bits)
            })
            .collect()
    }
}

/// A block of modulated symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock {
    pub symbols: Vec<C64>,
    pub scheme: ModScheme,
}

impl SymbolBlock {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Maps bits (values 0/1) to unit-energy Gray symbols.
pub fn modulate_bits(bits: &[u8], scheme: ModScheme) -> Result<SymbolBlock> {
    let b = scheme.bits_per_symbol();
    if !bits.len().is_multiple_of(b) {
        return Err(invalid(format!(
            "bit count {} is not a multiple of {} for {}",
            bits.len(),
            b,
            scheme.name()
        )));
    }
    let symbols = bits.chunks_exact(b).map(|c| scheme.point(c)).collect();
    Ok(SymbolBlock { symbols, scheme })
}

/// Nearest-neighbour demapping to bits.
pub fn hard_demap(symbols: &[C64], scheme: ModScheme) -> Vec<u8> {
    let points = scheme.constellation();
    let b = scheme.bits_per_symbol();
    let mut out = Vec::with_capacity(symbols.len() * b);
    for &y in symbols {
        let (label, _) = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (y - p).norm_sqr()))
            .fold(
                (0, f64::INFINITY),
                |acc, cur| if cur.1 < acc.1 { cur } else { acc },
            );
        out.extend((0..b).map(|i| ((label >> (b - 1 - i)) & 1) as u8));
    }
    out
}

/// Max-log LLRs with one complex noise variance for the whole block.
pub fn llr_demap(symbols: &SymbolBlock, noise_variance: f64) -> Result<Vec<f64>> {
    if !(noise_variance > 0.0) {
        return Err(invalid(format!(
            "noise variance must be positive, got {noise_variance}"
        )));
    }
    let mut out = Vec::with_capacity(symbols.len() * symbols.scheme.bits_per_symbol());
    for &y in &symbols.symbols {
        push_llrs(y, noise_variance, symbols.scheme, &mut out);
    }
    Ok(out)
}

/// Max-log LLRs with a per-symbol complex noise variance.
pub fn llr_demap_per_symbol(
    symbols: &[C64],
    variances: &[f64],
    scheme: ModScheme,
) -> Result<Vec<f64>> {
    if symbols.len() != variances.len() {
        return Err(crate::error::shape(format!(
            "{} symbols but {} noise variances",
            symbols.len(),
            variances.len()
        )));
    }
    let mut out = Vec::with_capacity(symbols.len() * scheme.bits_per_symbol());
    for (&y, &v) in symbols.iter().zip(variances) {
        if !(v > 0.0) {
            return Err(invalid(format!("noise variance must be positive, got {v}")));
        }
        push_llrs(y, v, scheme, &mut out);
    }
    Ok(out)
}

// Both constellations are separable in I and Q, so the max-log metric of a bit
// only depends on the dimension that carries it.
fn push_llrs(y: C64, var: f64, scheme: ModScheme, out: &mut Vec<f64>) {
    let lv = scheme.levels();
    match scheme {
        ModScheme::Qpsk => {
            out.push(pam_llr(y.re, lv, 1, var));
            out.push(pam_llr(y.im, lv, 1, var));
        }
        ModScheme::Qam16 => {
            out.push(pam_llr(y.re, lv, 2, var));
            out.push(pam_llr(y.im, lv, 2, var));
            out.push(pam_llr(y.re, lv, 1, var));
            out.push(pam_llr(y.im, lv, 1, var));
        }
    }
}

/// LLR of the label bit selected by `mask` for a one-dimensional PAM observation.
fn pam_llr(y: f64, levels: &[f64], mask: usize, var: f64) -> f64 {
    let mut d0 = f64::INFINITY;
    let mut d1 = f64::INFINITY;
    for (label, &a) in levels.iter().enumerate() {
        let d = (y - a) * (y - a);
        if label & mask == 0 {
            d0 = d0.min(d);
        } else {
            d1 = d1.min(d);
        }
    }
    (d1 - d0) / var
}

/// Raised-cosine pulse at `t` measured in symbol durations (peak 1 at t = 0).
pub fn raised_cosine(t: f64, beta: f64) -> f64 {
    let x = 2.0 * beta * t;
    if (x.abs() - 1.0).abs() < 1e-10 {
        return PI / 4.0 * sinc(1.0 / (2.0 * beta));
    }
    sinc(t) * (PI * beta * t).cos() / (1.0 - x * x)
}

/// Root-raised-cosine pulse at `t` in symbol durations, unnormalized
/// (its continuous-time energy is one symbol duration).
pub fn root_raised_cosine(t: f64, beta: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (4.0 * beta * t.abs() - 1.0).abs() < 1e-10 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Sampled root-raised-cosine filter with unit tap energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    pub taps: Vec<f64>,
    pub oversample_factor: usize,
    pub rolloff: f64,
    /// One-sided span in symbols; the filter covers `[-span, span]`.
    pub span_symbols: usize,
    /// Factor applied to [`root_raised_cosine`] to obtain the taps.
    pub scale: f64,
}

impl PulseShape {
    /// Index of the centre tap.
    pub fn delay(&self) -> usize {
        self.span_symbols * self.oversample_factor
    }

    /// The underlying continuous pulse for a given symbol duration.
    pub fn continuous(&self, symbol_duration: f64) -> ContinuousPulse {
        ContinuousPulse {
            family: PulseFamily::RootRaisedCosine,
            rolloff: self.rolloff,
            symbol_duration,
            span_symbols: self.span_symbols as f64,
            scale: self.scale,
        }
    }
}

/// Root-raised-cosine taps at `alpha` samples per symbol over `±span` symbols.
pub fn rrc_taps(beta: f64, span_symbols: usize, alpha: usize) -> Result<PulseShape> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid(format!("roll-off must lie in (0, 1], got {beta}")));
    }
    if span_symbols < 2 {
        return Err(invalid(format!(
            "span must be at least 2 symbols, got {span_symbols}"
        )));
    }
    if alpha < 1 {
        return Err(invalid("oversampling factor must be at least 1"));
    }
    let half = (span_symbols * alpha) as isize;
    let raw: Vec<f64> = (-half..=half)
        .map(|n| root_raised_cosine(n as f64 / alpha as f64, beta))
        .collect();
    let energy: f64 = raw.iter().map(|v| v * v).sum();
    let scale = 1.0 / energy.sqrt();
    Ok(PulseShape {
        taps: raw.iter().map(|v| v * scale).collect(),
        oversample_factor: alpha,
        rolloff: beta,
        span_symbols,
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseFamily {
    RootRaisedCosine,
    RaisedCosine,
}

/// A truncated continuous-time pulse evaluated in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousPulse {
    pub family: PulseFamily,
    pub rolloff: f64,
    pub symbol_duration: f64,
    pub span_symbols: f64,
    pub scale: f64,
}

impl ContinuousPulse {
    /// Raised-cosine pulse with unit peak.
    pub fn raised_cosine(rolloff: f64, symbol_duration: f64, span_symbols: f64) -> Self {
        Self {
            family: PulseFamily::RaisedCosine,
            rolloff,
            symbol_duration,
            span_symbols,
            scale: 1.0,
        }
    }
}

impl Pulse for ContinuousPulse {
    fn value(&self, t: f64) -> f64 {
        let ts = t / self.symbol_duration;
        if ts.abs() > self.span_symbols + 1e-9 {
            return 0.0;
        }
        let v = match self.family {
            PulseFamily::RootRaisedCosine => root_raised_cosine(ts, self.rolloff),
            PulseFamily::RaisedCosine => raised_cosine(ts, self.rolloff),
        };
        self.scale * v
    }

    fn half_width(&self) -> f64 {
        self.span_symbols * self.symbol_duration
    }
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

/// Adds white complex Gaussian noise of variance `n0` per sample.
///
/// Both waveform chains use unit-energy discrete pulses, so a per-sample
/// variance of `n0` yields a matched-filter output noise of `n0` per symbol.
pub fn add_awgn<R: Rng + ?Sized>(samples: &mut [C64], n0: f64, rng: &mut R) {
    if n0 <= 0.0 {
        return;
    }
    for s in samples.iter_mut() {
        *s += complex_gaussian(rng, n0);
    }
}

/// Converts Es/N0 in dB to the linear noise density for unit symbol energy.
pub fn n0_from_esn0_db(esn0_db: f64) -> f64 {
    10f64.powf(-esn0_db / 10.0)
}
