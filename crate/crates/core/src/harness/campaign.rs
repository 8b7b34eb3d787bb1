//! Point-by-point campaign execution with a thread-count-independent stopping
//! rule, CSV results and per-figure plot data.

use std::fs::{self, File};
use std::path::Path;

use rayon::prelude::*;

use super::config::{CampaignConfig, GridPoint};
use super::seeds::trial_seed;
use super::spectrum::transmit_spectra;
use super::trial::{LinkSimulator, TrialResult};
use crate::error::Result;
use crate::metrics::{
    bler_estimate, relative_energy_efficiency, spectral_efficiency, MetricRecord, Waveform,
};

/// Number of blocks simulated per point.
///
/// Trials run in batches; after each batch the point stops once it has at least
/// `blocks_per_point` blocks *and* `min_block_errors` errors, or once it reaches
/// `max_blocks_per_point`. Batch sizes depend only on the counts so far, so the
/// trial set is the same on any number of threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub blocks_per_point: u64,
    pub min_block_errors: u64,
    pub max_blocks_per_point: u64,
    pub trial_batch: u64,
}

impl StopRule {
    pub fn from_config(cfg: &CampaignConfig) -> Self {
        Self {
            blocks_per_point: cfg.blocks_per_point,
            min_block_errors: cfg.min_block_errors,
            max_blocks_per_point: cfg.max_blocks_per_point,
            trial_batch: cfg.trial_batch,
        }
    }

    /// Trials in the next batch (0 means stop) given the blocks and errors so far.
    pub fn next_batch(&self, blocks: u64, errors: u64, users: u64) -> u64 {
        if blocks >= self.max_blocks_per_point {
            return 0;
        }
        if blocks >= self.blocks_per_point && errors >= self.min_block_errors {
            return 0;
        }
        let mut n = self
            .trial_batch
            .min((self.max_blocks_per_point - blocks).div_ceil(users));
        if blocks < self.blocks_per_point {
            n = n.min((self.blocks_per_point - blocks).div_ceil(users));
        }
        n.max(1)
    }
}

/// Result of one grid point with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub record: MetricRecord,
    pub trials: u64,
    /// Mean residual interference variance over users and trials.
    pub mean_interference: f64,
    /// Mean decoder iterations over blocks.
    pub mean_iterations: f64,
}

/// Simulates one grid point until the stopping rule is met.
pub fn run_point(cfg: &CampaignConfig, point: &GridPoint) -> Result<PointOutcome> {
    let link = cfg.link(
        point.waveform,
        point.antennas,
        point.users,
        point.scheme,
        point.esn0_db,
    )?;
    let sim = LinkSimulator::new(link)?;
    let rule = StopRule::from_config(cfg);
    let users = point.users as u64;
    let (mut trials, mut errors) = (0u64, 0u64);
    let (mut interference, mut iterations) = (0.0, 0u64);
    loop {
        let batch = rule.next_batch(trials * users, errors, users);
        if batch == 0 {
            break;
        }
        let results: Vec<TrialResult> = (trials..trials + batch)
            .into_par_iter()
            .map(|t| sim.simulate(trial_seed(cfg.master_seed, point.index, t)))
            .collect::<Result<_>>()?;
        for r in &results {
            errors += r.errors();
            interference += r.interference.iter().sum::<f64>();
            iterations += r.iterations.iter().map(|&i| i as u64).sum::<u64>();
        }
        trials += batch;
    }
    let blocks = trials * users;
    let est = bler_estimate(errors, blocks)?;
    let ofdm = &cfg.ofdm;
    let se = spectral_efficiency(
        est.point,
        point.scheme,
        cfg.code_rate,
        ofdm.net_symbol_rate(),
        ofdm.occupied_bandwidth(),
    );
    let overhead = if point.waveform.is_ofdm() {
        ofdm.cp_overhead()
    } else {
        1.0
    };
    Ok(PointOutcome {
        record: MetricRecord {
            waveform: point.waveform,
            antennas: point.antennas,
            users: point.users,
            scheme: point.scheme,
            code_rate: cfg.code_rate,
            esn0_db: point.esn0_db,
            blocks,
            block_errors: errors,
            bler: est.point,
            bler_lo: est.lower,
            bler_hi: est.upper,
            se_bps_hz: se,
            ee_relative: relative_energy_efficiency(se, point.esn0_db, overhead),
            seed: cfg.master_seed,
        },
        trials,
        mean_interference: interference / blocks as f64,
        mean_iterations: iterations as f64 / blocks as f64,
    })
}

/// Runs every grid point in order. With an output directory, `results.csv` is
/// flushed after each point and the plot-data files are written at the end.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Vec<MetricRecord>> {
    cfg.validate()?;
    let mut writer = match &cfg.output {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Some(csv::Writer::from_writer(File::create(
                dir.join("results.csv"),
            )?))
        }
        None => None,
    };
    let mut records = Vec::new();
    for point in cfg.points() {
        let outcome = run_point(cfg, &point)?;
        if let Some(w) = writer.as_mut() {
            w.serialize(&outcome.record)?;
            w.flush()?;
        }
        records.push(outcome.record);
    }
    if let Some(dir) = &cfg.output {
        write_outputs(dir, &records, cfg)?;
    }
    Ok(records)
}

fn write_rows(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn series(r: &MetricRecord) -> Vec<String> {
    vec![
        r.waveform.to_string(),
        r.antennas.to_string(),
        r.users.to_string(),
        r.scheme.name().to_string(),
    ]
}

/// Writes `results.csv` and the plot-data files `bler_vs_snr.csv`,
/// `se_vs_snr.csv`, `ee_vs_snr.csv`, `bler_vs_m.csv` and `psd.csv` into `dir`.
pub fn write_outputs(dir: &Path, records: &[MetricRecord], cfg: &CampaignConfig) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_writer(File::create(dir.join("results.csv"))?);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;

    let mut by_snr: Vec<&MetricRecord> = records.iter().collect();
    by_snr.sort_by(|a, b| {
        (a.waveform.name(), a.antennas, a.users, a.scheme.name())
            .cmp(&(b.waveform.name(), b.antennas, b.users, b.scheme.name()))
            .then(a.esn0_db.total_cmp(&b.esn0_db))
    });
    let head = ["waveform", "M", "K", "scheme", "esn0_db"];
    let with = |extra: &[&'static str]| -> Vec<&'static str> {
        head.iter().chain(extra).copied().collect()
    };
    write_rows(
        &dir.join("bler_vs_snr.csv"),
        &with(&["bler", "bler_lo", "bler_hi"]),
        by_snr.iter().map(|r| {
            let mut v = series(r);
            v.extend([r.esn0_db, r.bler, r.bler_lo, r.bler_hi].map(|x| x.to_string()));
            v
        }),
    )?;
    write_rows(
        &dir.join("se_vs_snr.csv"),
        &with(&["se_bps_hz"]),
        by_snr.iter().map(|r| {
            let mut v = series(r);
            v.extend([r.esn0_db, r.se_bps_hz].map(|x| x.to_string()));
            v
        }),
    )?;
    write_rows(
        &dir.join("ee_vs_snr.csv"),
        &with(&["ee_relative"]),
        by_snr.iter().map(|r| {
            let mut v = series(r);
            v.extend([r.esn0_db, r.ee_relative].map(|x| x.to_string()));
            v
        }),
    )?;

    let mut by_m: Vec<&MetricRecord> = records.iter().collect();
    by_m.sort_by(|a, b| {
        (a.waveform.name(), a.users, a.scheme.name())
            .cmp(&(b.waveform.name(), b.users, b.scheme.name()))
            .then(a.esn0_db.total_cmp(&b.esn0_db))
            .then(a.antennas.cmp(&b.antennas))
    });
    write_rows(
        &dir.join("bler_vs_m.csv"),
        &[
            "waveform", "K", "scheme", "esn0_db", "M", "bler", "bler_lo", "bler_hi",
        ],
        by_m.iter().map(|r| {
            vec![
                r.waveform.to_string(),
                r.users.to_string(),
                r.scheme.name().to_string(),
                r.esn0_db.to_string(),
                r.antennas.to_string(),
                r.bler.to_string(),
                r.bler_lo.to_string(),
                r.bler_hi.to_string(),
            ]
        }),
    )?;

    let sc = cfg.sc.build(&cfg.ofdm)?;
    let spectra = transmit_spectra(&cfg.ofdm, &sc, 1 << 24, 4096, cfg.master_seed)?;
    write_psd(&dir.join("psd.csv"), &spectra)?;
    Ok(())
}

/// Normalized spectra as `waveform,frequency_hz,psd_db` rows.
pub fn write_psd(path: &Path, spectra: &super::SpectraComparison) -> Result<()> {
    let rows = [(Waveform::Ofdm, &spectra.ofdm), (Waveform::Sc, &spectra.sc)]
        .into_iter()
        .flat_map(|(w, p)| {
            p.frequencies.iter().zip(&p.density).map(move |(f, d)| {
                vec![w.to_string(), f.to_string(), (10.0 * d.log10()).to_string()]
            })
        })
        .collect::<Vec<_>>();
    write_rows(path, &["waveform", "frequency_hz", "psd_db"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_rule_reaches_targets_exactly() {
        let rule = StopRule {
            blocks_per_point: 10,
            min_block_errors: 0,
            max_blocks_per_point: 100,
            trial_batch: 4,
        };
        let mut blocks = 0;
        while let n @ 1.. = rule.next_batch(blocks, 0, 1) {
            blocks += n;
        }
        assert_eq!(blocks, 10);
        // with too few errors it keeps going up to the cap
        let rule = StopRule {
            min_block_errors: 5,
            ..rule
        };
        let mut blocks = 0;
        while let n @ 1.. = rule.next_batch(blocks, 2, 3) {
            blocks += 3 * n;
        }
        assert!((100..103).contains(&blocks));
        assert_eq!(rule.next_batch(12, 5, 1), 0);
        assert_eq!(rule.next_batch(8, 50, 1), 2);
    }
}
