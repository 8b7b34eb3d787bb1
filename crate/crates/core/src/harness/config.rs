//! Campaign description loaded from TOML.
//!
//! ```toml
//! waveforms = ["ofdm", "sc"]
//! antennas = [100]          # M
//! users = [1, 5, 10]        # K
//! schemes = ["qpsk"]
//! esn0_db = [-22.0, -21.5]
//! blocks_per_point = 2000
//! min_block_errors = 200
//! max_blocks_per_point = 100000
//! master_seed = 1
//! output = "results"
//! channel_profile = "etu"
//! engine = "symbol"
//!
//! [ofdm]
//! cp_length = 40
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{etu_profile, TapDelayProfile};
use crate::error::{Error, Result};
use crate::metrics::Waveform;
use crate::modem::ModScheme;
use crate::ofdm_link::OfdmConfig;
use crate::sc_link::ScConfig;
use crate::turbo::TurboConfig;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// How received symbols are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Full sample-level transmit chain, channel convolution and receiver.
    Waveform,
    /// Symbol-rate model with the same output distribution (far cheaper for large M).
    #[default]
    Symbol,
}

/// Power-delay profile selection: a named profile or explicit taps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelProfileConfig {
    /// `"etu"` or `"flat"`.
    Named(String),
    Custom {
        delays_ns: Vec<f64>,
        powers_db: Vec<f64>,
    },
}

impl Default for ChannelProfileConfig {
    fn default() -> Self {
        Self::Named("etu".into())
    }
}

impl ChannelProfileConfig {
    pub fn build(&self) -> Result<TapDelayProfile> {
        match self {
            Self::Named(n) if n.eq_ignore_ascii_case("etu") => Ok(etu_profile()),
            Self::Named(n) if n.eq_ignore_ascii_case("flat") => {
                TapDelayProfile::new(vec![0.0], vec![1.0])
            }
            Self::Named(n) => Err(config_err(format!(
                "unknown channel profile '{n}' (expected etu or flat)"
            ))),
            Self::Custom {
                delays_ns,
                powers_db,
            } => TapDelayProfile::from_db(delays_ns.iter().map(|d| d * 1e-9).collect(), powers_db)
                .map_err(|e| config_err(e.to_string())),
        }
    }
}

/// Single-carrier parameters. The symbol duration follows the OFDM net symbol
/// rate unless given explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScSettings {
    pub symbol_duration: Option<f64>,
    pub oversample_factor: usize,
    pub rolloff: f64,
    pub span_symbols: usize,
    pub mf_length: usize,
}

impl Default for ScSettings {
    fn default() -> Self {
        Self {
            symbol_duration: None,
            oversample_factor: 2,
            rolloff: 0.22,
            span_symbols: 12,
            mf_length: 78,
        }
    }
}

impl ScSettings {
    pub fn build(&self, ofdm: &OfdmConfig) -> Result<ScConfig> {
        match self.symbol_duration {
            Some(t) => ScConfig::new(
                t,
                self.oversample_factor,
                self.rolloff,
                self.span_symbols,
                self.mf_length,
            ),
            None => ScConfig::matched_to(
                ofdm,
                self.oversample_factor,
                self.rolloff,
                self.span_symbols,
                self.mf_length,
            ),
        }
    }
}

/// Full campaign: the Cartesian product of the grids is simulated point by point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub waveforms: Vec<Waveform>,
    #[serde(alias = "M")]
    pub antennas: Vec<usize>,
    #[serde(alias = "K")]
    pub users: Vec<usize>,
    pub schemes: Vec<ModScheme>,
    pub esn0_db: Vec<f64>,
    /// Minimum number of decoded blocks per point.
    pub blocks_per_point: u64,
    /// Keep simulating past `blocks_per_point` until this many block errors...
    pub min_block_errors: u64,
    /// ...but never beyond this many blocks.
    pub max_blocks_per_point: u64,
    /// Trials per scheduling batch; the stopping rule is checked between batches.
    pub trial_batch: u64,
    pub master_seed: u64,
    /// Output directory; nothing is written when absent.
    pub output: Option<PathBuf>,
    pub channel_profile: ChannelProfileConfig,
    pub engine: Engine,
    /// Information bits per block; the rest of the code block is zero filler.
    pub payload_bits: usize,
    /// Nominal code rate used for spectral efficiency.
    pub code_rate: f64,
    pub ofdm: OfdmConfig,
    pub sc: ScSettings,
    pub turbo: TurboConfig,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            waveforms: vec![Waveform::Ofdm, Waveform::Sc],
            antennas: vec![100],
            users: vec![1],
            schemes: vec![ModScheme::Qpsk],
            esn0_db: vec![-22.0],
            blocks_per_point: 1000,
            min_block_errors: 200,
            max_blocks_per_point: 100_000,
            trial_batch: 32,
            master_seed: 1,
            output: None,
            channel_profile: ChannelProfileConfig::default(),
            engine: Engine::default(),
            payload_bits: 614,
            code_rate: 1.0 / 3.0,
            ofdm: OfdmConfig::default(),
            sc: ScSettings::default(),
            turbo: TurboConfig::default(),
        }
    }
}

impl CampaignConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("campaign configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("waveforms", self.waveforms.is_empty()),
            ("antennas", self.antennas.is_empty()),
            ("users", self.users.is_empty()),
            ("schemes", self.schemes.is_empty()),
            ("esn0_db", self.esn0_db.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(config_err(format!("grid '{name}' must not be empty")));
        }
        if self.antennas.contains(&0) || self.users.contains(&0) {
            return Err(config_err("antenna and user counts must be at least 1"));
        }
        if let Some(v) = self.esn0_db.iter().find(|v| !v.is_finite()) {
            return Err(config_err(format!("Es/N0 values must be finite, got {v}")));
        }
        if self.blocks_per_point == 0 || self.trial_batch == 0 {
            return Err(config_err(
                "blocks_per_point and trial_batch must be at least 1",
            ));
        }
        if self.max_blocks_per_point < self.blocks_per_point {
            return Err(config_err(
                "max_blocks_per_point must be at least blocks_per_point",
            ));
        }
        if !(self.code_rate > 0.0 && self.code_rate <= 1.0) {
            return Err(config_err("code_rate must lie in (0, 1]"));
        }
        // building every link once surfaces all parameter conflicts up front
        for &waveform in &self.waveforms {
            for &scheme in &self.schemes {
                self.link(
                    waveform,
                    self.antennas[0],
                    self.users[0],
                    scheme,
                    self.esn0_db[0],
                )?;
            }
        }
        Ok(())
    }

    /// Link description of one grid point.
    pub fn link(
        &self,
        waveform: Waveform,
        antennas: usize,
        users: usize,
        scheme: ModScheme,
        esn0_db: f64,
    ) -> Result<super::LinkConfig> {
        let link = super::LinkConfig {
            waveform,
            antennas,
            users,
            scheme,
            esn0_db,
            engine: self.engine,
            payload_bits: self.payload_bits,
            profile: self.channel_profile.build()?,
            ofdm: self.ofdm.clone(),
            sc: self
                .sc
                .build(&self.ofdm)
                .map_err(|e| config_err(e.to_string()))?,
            turbo: self.turbo.clone(),
        };
        link.validate()?;
        Ok(link)
    }

    /// Grid points in campaign order: waveform, M, K, scheme, Es/N0 (last varies fastest).
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &waveform in &self.waveforms {
            for &antennas in &self.antennas {
                for &users in &self.users {
                    for &scheme in &self.schemes {
                        for &esn0_db in &self.esn0_db {
                            out.push(GridPoint {
                                index: out.len() as u64,
                                waveform,
                                antennas,
                                users,
                                scheme,
                                esn0_db,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One operating point of a campaign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: u64,
    pub waveform: Waveform,
    pub antennas: usize,
    pub users: usize,
    pub scheme: ModScheme,
    pub esn0_db: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = CampaignConfig::default();
        let back = CampaignConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn parses_documented_example() {
        let text = r#"
            waveforms = ["ofdm", "mf-ofdm", "sc"]
            M = [64, 100]
            K = [1, 5]
            schemes = ["qpsk", "16qam"]
            esn0_db = [-22.0, -21.5, -21.0]
            blocks_per_point = 50
            min_block_errors = 10
            master_seed = 9
            output = "out"
            engine = "waveform"
            channel_profile = { delays_ns = [0.0, 100.0], powers_db = [0.0, -3.0] }

            [ofdm]
            cp_length = 36
            allow_isi = true
        "#;
        let cfg = CampaignConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.antennas, vec![64, 100]);
        assert_eq!(cfg.schemes, vec![ModScheme::Qpsk, ModScheme::Qam16]);
        assert_eq!(cfg.ofdm.cp_length, 36);
        assert_eq!(cfg.engine, Engine::Waveform);
        assert_eq!(cfg.points().len(), 3 * 2 * 2 * 2 * 3);
        assert_eq!(cfg.channel_profile.build().unwrap().len(), 2);
    }

    #[test]
    fn rejects_invalid_campaigns() {
        let bad = [
            "waveforms = []",
            "esn0_db = [nan]",
            "blocks_per_point = 0",
            "antennas = [0]",
            "channel_profile = \"eva\"",
            "unknown_key = 1",
            "schemes = [\"8psk\"]",
            "[ofdm]\ncp_length = 36",
            "engine = \"symbol\"\n[ofdm]\ncp_length = 36\nallow_isi = true",
            "max_blocks_per_point = 10",
            "[sc]\nmf_length = 0",
        ];
        for text in bad {
            let err = CampaignConfig::from_toml_str(text).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{text}: {err}");
        }
    }

    #[test]
    fn point_order_varies_snr_fastest() {
        let cfg = CampaignConfig {
            waveforms: vec![Waveform::Ofdm, Waveform::Sc],
            esn0_db: vec![1.0, 2.0, 3.0],
            ..CampaignConfig::default()
        };
        let pts = cfg.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1].esn0_db, 2.0);
        assert_eq!(pts[3].waveform, Waveform::Sc);
        assert!(pts.iter().enumerate().all(|(i, p)| p.index == i as u64));
    }
}
