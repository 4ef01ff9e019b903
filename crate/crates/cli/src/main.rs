use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use noma_vlc::experiment::{
    parse_schemes, run_convergence, run_sweep, summarize, write_convergence_series, write_csv_file,
    ExperimentConfig, ExperimentSpec, SummaryRow, SweepVar,
};

/// Joint UAV placement and power allocation for NOMA visible-light downlinks.
#[derive(Parser, Debug)]
#[command(name = "noma-vlc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one or more schemes on the base configuration.
    Run {
        /// Scheme name, comma-separated list or `all`.
        #[arg(long, default_value = "upup")]
        scheme: String,
        /// Number of users.
        #[arg(long)]
        users: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep one parameter across values.
    Sweep {
        /// pmax (mW), fov (deg), radius (m) or num_users.
        #[arg(long = "var")]
        var: String,
        /// Comma-separated sweep values; the published grid when omitted.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long, default_value = "all")]
        scheme: String,
        #[arg(long)]
        users: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Average UPUP convergence traces for several user counts.
    Convergence {
        #[arg(long, value_delimiter = ',', default_values_t = vec![4usize, 8, 12, 16, 20])]
        users: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set max_iterations=100`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write 0 in wall_time_ms so that reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

impl Common {
    fn load(&self, users: Option<usize>) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
            cfg.set(k, v).map_err(anyhow::Error::msg)?;
        }
        if let Some(n) = users {
            cfg.num_users = n;
        }
        if let Some(r) = self.realizations {
            cfg.realizations = r;
        }
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        Ok(&self.out)
    }
}

fn print_summary(rows: &[SummaryRow]) {
    println!(
        "{:<12} {:>10} {:>16} {:>12} {:>9}",
        "scheme", "value", "mean_bps", "mean_bpshz", "feasible"
    );
    for r in rows {
        println!(
            "{:<12} {:>10} {:>16.6e} {:>12.4} {:>8.0}%",
            r.scheme.as_str(),
            r.sweep_value,
            r.mean_weighted_sum_rate_bps,
            r.mean_weighted_sum_rate_bpshz,
            r.feasible_fraction * 100.0
        );
    }
}

fn sweep(spec: ExperimentSpec, common: &Common) -> Result<()> {
    let rows = run_sweep(&spec)?;
    let out = common.out_dir()?;
    write_csv_file(&rows, &out.join("results.csv"))?;
    let summary = summarize(&rows);
    write_csv_file(&summary, &out.join("summary.csv"))?;
    print_summary(&summary);
    eprintln!(
        "wrote {} rows to {}",
        rows.len(),
        out.join("results.csv").display()
    );
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scheme,
            users,
            common,
        } => {
            let spec = ExperimentSpec {
                schemes: parse_schemes(&scheme)?,
                sweep: SweepVar::None,
                values: vec![0.0],
                base: common.load(users)?,
                record_wall_time: !common.no_timing,
            };
            sweep(spec, &common)
        }
        Command::Sweep {
            var,
            values,
            scheme,
            users,
            common,
        } => {
            let var: SweepVar = var.parse()?;
            if var == SweepVar::None {
                bail!("use `run` for a single configuration");
            }
            let values = if values.is_empty() {
                var.default_values()
            } else {
                values
            };
            let spec = ExperimentSpec {
                schemes: parse_schemes(&scheme)?,
                sweep: var,
                values,
                base: common.load(users)?,
                record_wall_time: !common.no_timing,
            };
            sweep(spec, &common)
        }
        Command::Convergence { users, common } => {
            if users.is_empty() {
                bail!("--users needs at least one value");
            }
            let base = common.load(None)?;
            let curves = run_convergence(&base, &users, !common.no_timing)?;
            let out = common.out_dir()?;
            let mut finals = Vec::new();
            for c in &curves {
                let path = out.join(format!("convergence_n{}.csv", c.num_users));
                write_convergence_series(&c.mean_trace, std::fs::File::create(&path)?)?;
                println!(
                    "N={:<3} final mean fitness {:.6} -> {}",
                    c.num_users,
                    c.mean_trace.last().copied().unwrap_or(f64::NAN),
                    path.display()
                );
                finals.extend(c.finals.iter().cloned());
            }
            write_csv_file(&finals, &out.join("results.csv"))?;
            let summary = summarize(&finals);
            write_csv_file(&summary, &out.join("summary.csv"))?;
            print_summary(&summary);
            Ok(())
        }
    }
}
