//! One Monte-Carlo trial: every user sends one turbo-coded block through an
//! independent channel realization and is detected by its own matched filter.

use std::ops::Range;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::Engine;
use super::seeds::{stream, Purpose};
use crate::channel::{
    cfr_on_grid, discretize, draw_channel, CfrGrid, ChannelRealization, DiscreteChannel,
    DiscreteKind, TapDelayProfile,
};
use crate::error::{Error, Result};
use crate::metrics::Waveform;
use crate::modem::{add_awgn, llr_demap_per_symbol, modulate_bits, n0_from_esn0_db, ModScheme};
use crate::ofdm_link::{
    apply_channel, ofdm_rx_mf_with, ofdm_rx_traditional_with, ofdm_tx_with, used_bin_response,
    OfdmConfig, OfdmSymbolModel, OfdmTransforms,
};
use crate::sc_link::{sc_propagate, sc_rx_mf, ScConfig, ScResponseTables, ScSymbolModel};
use crate::turbo::{TurboCodec, TurboConfig};
use crate::C64;

/// Smallest variance handed to the demapper; keeps noiseless runs finite.
const MIN_VARIANCE: f64 = 1e-12;

/// Everything needed to simulate one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub waveform: Waveform,
    pub antennas: usize,
    pub users: usize,
    pub scheme: ModScheme,
    /// Per-antenna symbol-energy-to-noise ratio; `+inf` disables noise.
    pub esn0_db: f64,
    pub engine: Engine,
    pub payload_bits: usize,
    pub profile: TapDelayProfile,
    pub ofdm: OfdmConfig,
    pub sc: ScConfig,
    pub turbo: TurboConfig,
}

impl LinkConfig {
    /// Defaults for a waveform, array size, user count, scheme and Es/N0.
    pub fn new(
        waveform: Waveform,
        antennas: usize,
        users: usize,
        scheme: ModScheme,
        esn0_db: f64,
    ) -> Self {
        Self {
            waveform,
            antennas,
            users,
            scheme,
            esn0_db,
            engine: Engine::default(),
            payload_bits: 614,
            profile: crate::channel::etu_profile(),
            ofdm: OfdmConfig::default(),
            sc: ScConfig::default(),
            turbo: TurboConfig::default(),
        }
    }

    pub fn noise_density(&self) -> f64 {
        if self.esn0_db == f64::INFINITY {
            0.0
        } else {
            n0_from_esn0_db(self.esn0_db)
        }
    }

    /// Channel memory in OFDM samples.
    pub fn ofdm_channel_memory(&self) -> usize {
        self.profile
            .grid_indices(self.ofdm.sample_rate())
            .into_iter()
            .max()
            .unwrap_or(0)
    }

    /// Rejects inconsistent combinations, naming the violated condition.
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.antennas == 0 || self.users == 0 {
            return cfg("antenna and user counts must be at least 1".into());
        }
        if self.esn0_db.is_nan() || self.esn0_db == f64::NEG_INFINITY {
            return cfg(format!(
                "Es/N0 must be finite or +inf, got {}",
                self.esn0_db
            ));
        }
        if self.payload_bits == 0 || self.payload_bits > self.turbo.k {
            return cfg(format!(
                "payload of {} bits does not fit a {}-bit code block",
                self.payload_bits, self.turbo.k
            ));
        }
        TurboCodec::new(self.turbo.clone()).map_err(|e| Error::Config(e.to_string()))?;
        if !self
            .turbo
            .coded_len()
            .is_multiple_of(self.scheme.bits_per_symbol())
        {
            return cfg(format!(
                "{} coded bits do not fill whole {} symbols",
                self.turbo.coded_len(),
                self.scheme.name()
            ));
        }
        if self.waveform.is_ofdm() {
            self.ofdm
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
            let memory = self.ofdm_channel_memory();
            if self.ofdm.cp_length < memory {
                if !self.ofdm.allow_isi {
                    return cfg(format!(
                        "cp_length {} is shorter than the channel memory of {memory} samples; \
                         raise it or set allow_isi (waveform engine only)",
                        self.ofdm.cp_length
                    ));
                }
                if self.engine == Engine::Symbol {
                    return cfg("allow_isi requires the waveform engine".into());
                }
            }
            if memory >= self.ofdm.fft_size {
                return cfg("channel memory exceeds the FFT size".into());
            }
        } else if self.sc.oversample_factor == 0 || self.sc.mf_length == 0 {
            return cfg("single-carrier oversampling and filter length must be at least 1".into());
        }
        Ok(())
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// One flag per user: decoded payload differs from the transmitted one.
    pub block_errors: Vec<bool>,
    /// Per-user mean residual interference variance at the detector input
    /// (inter-symbol plus inter-user, excluding noise).
    pub interference: Vec<f64>,
    /// Decoder iterations used per user.
    pub iterations: Vec<usize>,
    pub seed: u64,
}

impl TrialResult {
    pub fn errors(&self) -> u64 {
        self.block_errors.iter().filter(|&&e| e).count() as u64
    }
}

struct UserFrame {
    payload: Vec<u8>,
    symbols: Vec<C64>,
    data: Range<usize>,
}

/// Reusable per-point state: codec, transforms and response tables.
#[derive(Debug, Clone)]
pub struct LinkSimulator {
    link: LinkConfig,
    codec: TurboCodec,
    fft: OfdmTransforms,
    sc_tables: Option<ScResponseTables>,
    n0: f64,
}

impl LinkSimulator {
    pub fn new(link: LinkConfig) -> Result<Self> {
        link.validate()?;
        let codec = TurboCodec::new(link.turbo.clone())?;
        let fft = OfdmTransforms::new(link.ofdm.fft_size);
        let sc_tables =
            (!link.waveform.is_ofdm()).then(|| ScResponseTables::new(&link.profile, &link.sc));
        let n0 = link.noise_density();
        Ok(Self {
            link,
            codec,
            fft,
            sc_tables,
            n0,
        })
    }

    pub fn link(&self) -> &LinkConfig {
        &self.link
    }

    fn random_symbols(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<C64>> {
        let bits: Vec<u8> = (0..count * self.link.scheme.bits_per_symbol())
            .map(|_| rng.random_range(0..2u8))
            .collect();
        Ok(modulate_bits(&bits, self.link.scheme)?.symbols)
    }

    fn user_frame(&self, seed: u64, user: usize) -> Result<UserFrame> {
        let mut rng = stream(seed, Purpose::Payload, user);
        let k = self.codec.config().k;
        let mut block = vec![0u8; k];
        for b in block.iter_mut().take(self.link.payload_bits) {
            *b = rng.random_range(0..2u8);
        }
        let coded = self.codec.encode(&block)?;
        let data = modulate_bits(&coded, self.link.scheme)?.symbols;
        let n = data.len();
        let (lead, trail) = if self.link.waveform.is_ofdm() {
            let per = self.link.ofdm.used_subcarriers;
            (0, n.div_ceil(per) * per - n)
        } else {
            let guard = self.link.sc.pulse.span_symbols;
            (guard, guard)
        };
        let mut symbols = self.random_symbols(&mut rng, lead)?;
        symbols.extend(data);
        symbols.extend(self.random_symbols(&mut rng, trail)?);
        block.truncate(self.link.payload_bits);
        Ok(UserFrame {
            payload: block,
            symbols,
            data: lead..lead + n,
        })
    }

    fn channels(&self, seed: u64) -> Result<Vec<ChannelRealization>> {
        (0..self.link.users)
            .map(|u| {
                draw_channel(
                    &self.link.profile,
                    self.link.antennas,
                    &mut stream(seed, Purpose::Channel, u),
                )
            })
            .collect()
    }

    /// Runs the trial with the given seed.
    pub fn simulate(&self, seed: u64) -> Result<TrialResult> {
        let frames: Vec<UserFrame> = (0..self.link.users)
            .map(|u| self.user_frame(seed, u))
            .collect::<Result<_>>()?;
        let channels = self.channels(seed)?;
        let mut noise_rng = stream(seed, Purpose::Noise, 0);
        let symbols: Vec<Vec<C64>> = frames.iter().map(|f| f.symbols.clone()).collect();
        let (estimates, variances, interference) = if self.link.waveform.is_ofdm() {
            self.detect_ofdm(&symbols, &channels, &mut noise_rng)?
        } else {
            self.detect_sc(&symbols, &channels, &mut noise_rng)?
        };
        let mut result = TrialResult {
            block_errors: Vec::with_capacity(frames.len()),
            interference,
            iterations: Vec::with_capacity(frames.len()),
            seed,
        };
        for ((frame, est), var) in frames.iter().zip(&estimates).zip(&variances) {
            let llrs = llr_demap_per_symbol(
                &est[frame.data.clone()],
                &var[frame.data.clone()],
                self.link.scheme,
            )?;
            let out = self.codec.decode(&llrs)?;
            result
                .block_errors
                .push(out.bits[..self.link.payload_bits] != frame.payload[..]);
            result.iterations.push(out.iterations);
        }
        Ok(result)
    }

    /// Returns per-user estimates, per-symbol variances and mean interference.
    #[allow(clippy::type_complexity)]
    fn detect_ofdm(
        &self,
        symbols: &[Vec<C64>],
        channels: &[ChannelRealization],
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<Vec<C64>>, Vec<Vec<f64>>, Vec<f64>)> {
        let cfg = &self.link.ofdm;
        let fs = cfg.sample_rate();
        let dchans: Vec<DiscreteChannel> = channels
            .iter()
            .map(|c| discretize(c, fs, DiscreteKind::GridSnapped, None, None))
            .collect::<Result<_>>()?;
        let cfrs: Vec<Vec<Vec<C64>>> = dchans
            .iter()
            .map(|d| used_bin_response(d, cfg, &self.fft))
            .collect();
        let model = OfdmSymbolModel::new(&cfrs);
        let n = symbols[0].len();
        let estimates = match self.link.engine {
            Engine::Symbol => model.sample(symbols, self.n0, rng),
            Engine::Waveform => {
                let count = n / cfg.used_subcarriers;
                let mut rx =
                    vec![vec![C64::new(0.0, 0.0); count * cfg.symbol_len()]; self.link.antennas];
                for (x, d) in symbols.iter().zip(&dchans) {
                    let frame = ofdm_tx_with(x, cfg, &self.fft)?;
                    for (acc, s) in rx.iter_mut().zip(apply_channel(&frame.samples, d)) {
                        acc.iter_mut().zip(s).for_each(|(a, b)| *a += b);
                    }
                }
                for s in rx.iter_mut() {
                    add_awgn(s, self.n0, rng);
                }
                (0..self.link.users)
                    .map(|u| match self.link.waveform {
                        Waveform::MfOfdm => {
                            Ok(ofdm_rx_mf_with(&rx, &dchans[u], cfg, count, &self.fft)?.estimates)
                        }
                        _ => {
                            let snapped = channels[u].snapped_to_grid(fs);
                            let cfr: CfrGrid = cfr_on_grid(&snapped, &cfg.used_frequencies());
                            Ok(ofdm_rx_traditional_with(&rx, &cfr, cfg, count, &self.fft)?
                                .estimates)
                        }
                    })
                    .collect::<Result<_>>()?
            }
        };
        let mut variances = Vec::with_capacity(self.link.users);
        let mut interference = Vec::with_capacity(self.link.users);
        for u in 0..self.link.users {
            let per_bin = model.estimate_variances(u, self.n0);
            let iui = model.estimate_variances(u, 0.0);
            interference.push(iui.iter().sum::<f64>() / iui.len() as f64);
            variances.push(
                per_bin
                    .iter()
                    .cycle()
                    .take(n)
                    .map(|v| v.max(MIN_VARIANCE))
                    .collect(),
            );
        }
        Ok((estimates, variances, interference))
    }

    #[allow(clippy::type_complexity)]
    fn detect_sc(
        &self,
        symbols: &[Vec<C64>],
        channels: &[ChannelRealization],
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<Vec<C64>>, Vec<Vec<f64>>, Vec<f64>)> {
        let cfg = &self.link.sc;
        let tables = self
            .sc_tables
            .as_ref()
            .expect("single-carrier tables are built for sc links");
        let model = ScSymbolModel::from_tables(tables, channels);
        let n = symbols[0].len();
        let estimates = match self.link.engine {
            Engine::Symbol => model.sample(symbols, self.n0, rng),
            Engine::Waveform => {
                let pulse = cfg.continuous_pulse();
                let fs = cfg.sample_rate();
                let composites: Vec<DiscreteChannel> = channels
                    .iter()
                    .map(|c| discretize(c, fs, DiscreteKind::PulseComposite, Some(&pulse), None))
                    .collect::<Result<_>>()?;
                let refs: Vec<&[C64]> = symbols.iter().map(Vec::as_slice).collect();
                let mut rx = sc_propagate(&refs, &composites, cfg)?;
                for s in rx.streams.iter_mut() {
                    add_awgn(s, self.n0, rng);
                }
                channels
                    .iter()
                    .map(|c| {
                        let mf = discretize(
                            c,
                            fs,
                            DiscreteKind::PulseComposite,
                            Some(&pulse),
                            Some(cfg.mf_length),
                        )?;
                        Ok(sc_rx_mf(&rx, &mf, cfg, n)?.estimates)
                    })
                    .collect::<Result<_>>()?
            }
        };
        let variances = (0..self.link.users)
            .map(|u| vec![model.estimate_variance(u, self.n0).max(MIN_VARIANCE); n])
            .collect();
        let interference = (0..self.link.users)
            .map(|u| model.estimate_variance(u, 0.0))
            .collect();
        Ok((estimates, variances, interference))
    }
}

/// Builds a simulator and runs a single trial.
pub fn simulate_trial(link: &LinkConfig, seed: u64) -> Result<TrialResult> {
    LinkSimulator::new(link.clone())?.simulate(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(waveform: Waveform, m: usize, k: usize, esn0: f64, engine: Engine) -> LinkConfig {
        LinkConfig {
            engine,
            ..LinkConfig::new(waveform, m, k, ModScheme::Qpsk, esn0)
        }
    }

    #[test]
    fn noiseless_ofdm_never_errs() {
        for waveform in [Waveform::Ofdm, Waveform::MfOfdm] {
            for engine in [Engine::Symbol, Engine::Waveform] {
                for m in [1, 3] {
                    let sim =
                        LinkSimulator::new(link(waveform, m, 1, f64::INFINITY, engine)).unwrap();
                    for seed in 0..3 {
                        let r = sim.simulate(seed).unwrap();
                        assert_eq!(r.block_errors, vec![false]);
                        assert_eq!(r.interference, vec![0.0]);
                    }
                }
            }
        }
    }

    #[test]
    fn trials_are_deterministic() {
        for engine in [Engine::Symbol, Engine::Waveform] {
            let l = link(Waveform::Sc, 8, 2, -5.0, engine);
            assert_eq!(
                simulate_trial(&l, 17).unwrap(),
                simulate_trial(&l, 17).unwrap()
            );
        }
    }

    #[test]
    fn frames_have_expected_layout() {
        let sim = LinkSimulator::new(link(Waveform::Ofdm, 2, 1, 0.0, Engine::Symbol)).unwrap();
        let f = sim.user_frame(1, 0).unwrap();
        assert_eq!(f.symbols.len(), 1200);
        assert_eq!(f.data, 0..930);
        assert_eq!(f.payload.len(), 614);
        let l16 = LinkConfig {
            scheme: ModScheme::Qam16,
            ..link(Waveform::Ofdm, 2, 1, 0.0, Engine::Symbol)
        };
        let f = LinkSimulator::new(l16).unwrap().user_frame(1, 0).unwrap();
        assert_eq!((f.symbols.len(), f.data.clone()), (600, 0..465));
        let sim = LinkSimulator::new(link(Waveform::Sc, 2, 1, 0.0, Engine::Symbol)).unwrap();
        let f = sim.user_frame(1, 0).unwrap();
        assert_eq!((f.symbols.len(), f.data.clone()), (954, 12..942));
    }

    #[test]
    fn invalid_links_are_rejected() {
        let mut l = link(Waveform::Ofdm, 4, 1, 0.0, Engine::Symbol);
        l.ofdm.cp_length = 36;
        let msg = l.validate().unwrap_err().to_string();
        assert!(msg.contains("cp_length 36") && msg.contains("38"), "{msg}");
        l.ofdm.allow_isi = true;
        assert!(l.validate().is_err());
        l.engine = Engine::Waveform;
        assert!(l.validate().is_ok());
        let mut l = link(Waveform::Sc, 4, 1, 0.0, Engine::Symbol);
        l.payload_bits = 700;
        assert!(l.validate().is_err());
        let l = link(Waveform::Sc, 0, 1, 0.0, Engine::Symbol);
        assert!(l.validate().is_err());
        let l = link(Waveform::Sc, 1, 1, f64::NAN, Engine::Symbol);
        assert!(l.validate().is_err());
    }

    #[test]
    fn low_snr_fails_and_high_snr_succeeds() {
        for waveform in [Waveform::Ofdm, Waveform::Sc] {
            let bad = LinkSimulator::new(link(waveform, 4, 1, -30.0, Engine::Symbol)).unwrap();
            assert!((0..5).all(|s| bad.simulate(s).unwrap().block_errors[0]));
            let good = LinkSimulator::new(link(waveform, 64, 1, -5.0, Engine::Symbol)).unwrap();
            assert!((0..5).all(|s| !good.simulate(s).unwrap().block_errors[0]));
        }
    }
}
