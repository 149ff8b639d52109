//! Command-line driver: solve a single script, generate instance
//! families, or benchmark engine configurations against the oracle.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use omt_bits::engines::EngineKind;
use omt_bits::frontend::{interpret, parse_script, RunConfig};
use omt_bits::oracle::{
    generate_instances, load_instances, run_bench, BenchConfig, GenSort, Profile, CSV_HEADER,
};
use std::io::Read;
use std::path::PathBuf;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "omt-bits", version, about = "Optimizing SMT solver for bit-vector and floating-point objectives")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one SMT-LIB script (use `-` for stdin)
    Solve {
        file: PathBuf,
        /// ofp-bs | obv-bs | omt-lin | omt-bin (default: by objective sort)
        #[arg(long)]
        engine: Option<String>,
        /// branching preference on objective bits
        #[arg(long)]
        bp: bool,
        /// polarity initialization toward the attractor
        #[arg(long)]
        pi: bool,
        /// restrict bp/pi to safe bits (requires --bp or --pi)
        #[arg(long)]
        so: bool,
        /// binary-search pivot weight in (0,1), e.g. 1/2 or 0.3
        #[arg(long, default_value = "1/2")]
        rho: String,
        /// soft time limit in seconds
        #[arg(long)]
        timeout: Option<f64>,
        /// print `smt_calls=<k> wall_ms=<t>` after solving
        #[arg(long)]
        stats: bool,
        /// write the bit-blasted assertions as DIMACS
        #[arg(long, value_name = "PATH")]
        dump_cnf: Option<PathBuf>,
    },
    /// Generate a seeded family of instance files
    Gen {
        #[arg(long)]
        seed: u64,
        /// objective sort: "(3 5)", "(_ FloatingPoint 3 5)", "bv6", "bv6:signed"
        #[arg(long)]
        sort: String,
        #[arg(long)]
        count: usize,
        /// mixed | nan-heavy
        #[arg(long, default_value = "mixed")]
        profile: String,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Run engine configurations over instances and emit a CSV
    Bench {
        /// directory of .smt2 files; omitted means generate in memory
        #[arg(long)]
        dir: Option<PathBuf>,
        /// comma-separated configs, e.g. "ofp-bs,ofp-bs+pi,omt-lin,omt-bin"
        #[arg(long)]
        configs: String,
        /// generation seed when --dir is omitted
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// generation sort when --dir is omitted
        #[arg(long, default_value = "(3 5)")]
        sort: String,
        /// generated instance count when --dir is omitted
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// generation profile when --dir is omitted
        #[arg(long, default_value = "mixed")]
        profile: String,
        /// per-run soft time limit in seconds
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

fn parse_rho(text: &str) -> Result<BigRational> {
    let rho = if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().context("rho numerator")?;
        let q: BigInt = q.trim().parse().context("rho denominator")?;
        if q.is_zero() {
            bail!("rho denominator is zero");
        }
        BigRational::new(p, q)
    } else if let Some((int, frac)) = text.split_once('.') {
        let digits = format!("{int}{frac}");
        let num: BigInt = digits.parse().context("rho digits")?;
        let den = BigInt::from(10u8).pow(frac.len() as u32);
        BigRational::new(num, den)
    } else {
        BigRational::from_integer(text.trim().parse().context("rho")?)
    };
    if rho <= BigRational::zero() || rho >= BigRational::one() {
        bail!("rho must lie strictly between 0 and 1, got {text}");
    }
    Ok(rho)
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Cmd::Solve {
            file,
            engine,
            bp,
            pi,
            so,
            rho,
            timeout,
            stats,
            dump_cnf,
        } => {
            let engine = match engine.as_deref() {
                None => None,
                Some(name) => Some(
                    EngineKind::parse(name)
                        .ok_or_else(|| anyhow!("unknown engine `{name}`"))?,
                ),
            };
            let cfg = RunConfig {
                engine,
                bp,
                pi,
                so,
                rho: parse_rho(&rho)?,
                timeout: timeout.map(Duration::from_secs_f64),
                dump_cnf,
            };
            let text = read_input(&file)?;
            let script = parse_script(&text)
                .map_err(|d| anyhow!("{}:{d}", file.display()))?;
            let stdout = std::io::stdout();
            let summary = interpret(&script, &cfg, &mut stdout.lock())?;
            if stats {
                println!(
                    "smt_calls={} wall_ms={}",
                    summary.smt_calls.unwrap_or(0),
                    summary.wall.map_or(0, |w| w.as_millis())
                );
            }
        }
        Cmd::Gen {
            seed,
            sort,
            count,
            profile,
            out,
        } => {
            let sort = GenSort::parse(&sort).map_err(|e| anyhow!(e))?;
            let profile = Profile::parse(&profile).map_err(|e| anyhow!(e))?;
            let batch = generate_instances(seed, sort, count, profile).map_err(|e| anyhow!(e))?;
            std::fs::create_dir_all(&out)
                .with_context(|| format!("creating {}", out.display()))?;
            for (name, script) in &batch {
                std::fs::write(out.join(name), script.to_string())?;
            }
            println!("wrote {} instances to {}", batch.len(), out.display());
        }
        Cmd::Bench {
            dir,
            configs,
            seed,
            sort,
            count,
            profile,
            timeout,
            jobs,
            out,
        } => {
            let configs: Vec<BenchConfig> = configs
                .split(',')
                .map(|c| BenchConfig::parse(c.trim()).map_err(|e| anyhow!(e)))
                .collect::<Result<_>>()?;
            if configs.is_empty() {
                bail!("no configurations given");
            }
            let instances = match dir {
                Some(d) => load_instances(&d).map_err(|e| anyhow!(e))?,
                None => {
                    let sort = GenSort::parse(&sort).map_err(|e| anyhow!(e))?;
                    let profile = Profile::parse(&profile).map_err(|e| anyhow!(e))?;
                    generate_instances(seed, sort, count, profile)
                        .map_err(|e| anyhow!(e))?
                        .into_iter()
                        .map(|(name, script)| {
                            omt_bits::frontend::script_instance(&script)
                                .map(|inst| (name, inst))
                                .map_err(|e| anyhow!(e))
                        })
                        .collect::<Result<Vec<_>>>()?
                }
            };
            let (rows, summary) =
                run_bench(&instances, &configs, timeout.map(Duration::from_secs_f64), jobs);
            let mut csv = String::from(CSV_HEADER);
            csv.push('\n');
            for row in &rows {
                csv.push_str(&row.csv_line());
                csv.push('\n');
            }
            for line in &summary {
                csv.push_str(line);
                csv.push('\n');
            }
            std::fs::write(&out, csv).with_context(|| format!("writing {}", out.display()))?;
            for line in &summary {
                println!("{line}");
            }
            let disagreements = rows
                .iter()
                .filter(|r| r.oracle_agreement == Some(false))
                .count();
            println!(
                "wrote {} rows to {} ({} oracle disagreements)",
                rows.len(),
                out.display(),
                disagreements
            );
            if disagreements > 0 {
                std::process::exit(2);
            }
        }
    }
    Ok(())
}
