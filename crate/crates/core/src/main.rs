//! Command-line front end: complexity tables, simulation campaigns, antenna
//! sweeps and transmit spectra.
//!
//! Exit codes: 0 on success, 1 for configuration or usage errors, 2 for runtime
//! and I/O failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lsa_sim::harness::{run_campaign, transmit_spectra, CampaignConfig};
use lsa_sim::metrics::{complexity_table, MetricRecord};
use lsa_sim::Error;

#[derive(Debug, Parser)]
#[command(
    name = "lsa-sim",
    version,
    about = "OFDM vs single-carrier uplink simulator for large antenna arrays"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print receiver multiplication counts for a list of array sizes.
    Complexity {
        #[arg(long, default_value_t = 512)]
        fft_size: u64,
        #[arg(long, default_value_t = 300)]
        used_subcarriers: u64,
        /// Sampled channel length L.
        #[arg(long, default_value_t = 38)]
        channel_length: u64,
        #[arg(long, default_value_t = 2)]
        oversample: u64,
        #[arg(long, value_delimiter = ',', default_value = "2,8,32,128,512")]
        antennas: Vec<u64>,
    },
    /// Run a campaign described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output directory of the file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Block error rate versus antenna count at one Es/N0.
    SweepAntennas {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        esn0_db: f64,
        #[arg(long, value_delimiter = ',')]
        antennas: Vec<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write normalized OFDM and single-carrier transmit spectra as CSV.
    Psd {
        /// Optional campaign file supplying the OFDM and single-carrier settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "psd.csv")]
        output: PathBuf,
        #[arg(long, default_value_t = 1 << 24)]
        samples: usize,
        #[arg(long, default_value_t = 4096)]
        segment: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) => 1,
        _ => 2,
    }
}

fn print_records(records: &[MetricRecord]) {
    println!("waveform  M     K   scheme  Es/N0[dB]  blocks   errors  BLER       SE      EE");
    for r in records {
        println!(
            "{:<9} {:<5} {:<3} {:<7} {:>9.2}  {:>7}  {:>6}  {:<9.3e}  {:.4}  {:.4e}",
            r.waveform.name(),
            r.antennas,
            r.users,
            r.scheme.name(),
            r.esn0_db,
            r.blocks,
            r.block_errors,
            r.bler,
            r.se_bps_hz,
            r.ee_relative
        );
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Complexity {
            fft_size,
            used_subcarriers,
            channel_length,
            oversample,
            antennas,
        } => {
            print!(
                "{}",
                complexity_table(
                    fft_size,
                    used_subcarriers,
                    channel_length,
                    oversample,
                    &antennas
                )?
            );
        }
        Command::Run { config, output } => {
            let mut cfg = CampaignConfig::from_file(&config)?;
            if output.is_some() {
                cfg.output = output;
            }
            print_records(&run_campaign(&cfg)?);
        }
        Command::SweepAntennas {
            config,
            esn0_db,
            antennas,
            output,
        } => {
            let mut cfg = CampaignConfig::from_file(&config)?;
            cfg.esn0_db = vec![esn0_db];
            if !antennas.is_empty() {
                cfg.antennas = antennas;
            }
            if output.is_some() {
                cfg.output = output;
            }
            cfg.validate()?;
            print_records(&run_campaign(&cfg)?);
        }
        Command::Psd {
            config,
            output,
            samples,
            segment,
            seed,
        } => {
            let cfg = match config {
                Some(p) => CampaignConfig::from_file(&p)?,
                None => CampaignConfig::default(),
            };
            let sc = cfg.sc.build(&cfg.ofdm)?;
            let spectra = transmit_spectra(&cfg.ofdm, &sc, samples, segment, seed)?;
            lsa_sim::harness::write_psd(&output, &spectra)?;
            let f = 1.25 * spectra.half_bandwidth;
            println!("wrote {}", output.display());
            println!(
                "OFDM excess over SC at {:.3} MHz: {:.1} dB",
                f / 1e6,
                spectra.excess_db(f)
            );
            println!("SC in-band ripple: {:.2} dB", spectra.sc_ripple_db());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
