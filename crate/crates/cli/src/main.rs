use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use berbench::ground_truth::{calibrate, CalibrationOptions, GroundTruthProfile};
use berbench::harness::{read_records, run_campaign, CampaignConfig, RECORDS_FILE};
use berbench::reporting::{best_estimator_table, emit_plot, GroupBy};
use berbench::scenarios::DEFAULT_VARIANCE;
use berbench::Family;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "berbench", version, about = "Bayes error rate estimator benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a parameter-to-BER table for one family and dimension.
    Calibrate {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        d: usize,
        /// BER range as `lo,hi`.
        #[arg(long, value_parser = parse_range, default_value = "0.01,0.49")]
        range: (f64, f64),
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_VARIANCE)]
        variance: f64,
        #[arg(long, default_value = "desk")]
        profile: GroundTruthProfile,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run (or resume) a campaign described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to BERBENCH_WORKERS or the core count.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Summarize a record file into error-bound tables.
    Report {
        /// Campaign output directory or a records file.
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value = "cell")]
        group_by: GroupBy,
        /// Comma-separated estimator ids; default is every id in the records.
        #[arg(long, value_delimiter = ',')]
        estimators: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
        /// Also write scatter plots for these estimators (comma-separated).
        #[arg(long, value_delimiter = ',')]
        plots: Option<Vec<String>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// Best estimator per cell.
    Markdown,
    /// Every estimator per cell.
    Full,
    Csv,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn records_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(RECORDS_FILE)
    } else {
        p.to_path_buf()
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Calibrate {
            family,
            d,
            range,
            seed,
            variance,
            profile,
            out,
        } => {
            let options = CalibrationOptions {
                variance,
                profile,
                ..CalibrationOptions::default()
            };
            let table = calibrate(family, d, range.0, range.1, options, seed)?;
            eprintln!(
                "{family} d={d}: {} entries, BER {:.4}..{:.4}, largest gap {:.4}",
                table.len(),
                table.entries[0].ber,
                table.entries[table.len() - 1].ber,
                table.max_observed_gap()
            );
            let json = table.to_json()?;
            match out {
                Some(path) => fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
                None => println!("{json}"),
            }
        }
        Command::Run { config, workers } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let config = CampaignConfig::from_json(&text)?;
            let s = run_campaign(&config, workers)?;
            println!(
                "planned {}, resumed {}, completed {}, failed {}, corrupt lines {}",
                s.planned, s.resumed, s.completed, s.failed, s.corrupt_lines
            );
            println!("records in {}", config.output_dir.join(RECORDS_FILE).display());
        }
        Command::Report {
            records,
            group_by,
            estimators,
            format,
            plots,
        } => {
            let path = records_path(&records);
            let read = read_records(&path).with_context(|| format!("reading {}", path.display()))?;
            if read.skipped > 0 {
                eprintln!("skipped {} unreadable lines", read.skipped);
            }
            if read.records.is_empty() {
                bail!("no records in {}", path.display());
            }
            let table = best_estimator_table(&read.records, group_by, estimators.as_deref())?;
            match format {
                Format::Markdown => print!("{}", table.to_markdown()),
                Format::Full => print!("{}", table.to_markdown_full()),
                Format::Csv => print!("{}", table.to_csv()),
            }
            if let Some(ids) = plots {
                let dir = path.parent().unwrap_or(Path::new(".")).join("plots");
                for id in ids {
                    let art = emit_plot(&read.records, &id, &dir)?;
                    eprintln!("wrote {} and {}", art.csv.display(), art.svg.display());
                }
            }
        }
    }
    Ok(())
}
