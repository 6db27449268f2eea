//! `lir` — analytic tables, encoding plans, packet-level experiments and
//! the validation suite for link-identified routing.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lir_cli::{analyze, plan, simcmd, validate};
use lir_core::analytics::OverheadParams;
use lir_core::scenario::{parse_seed_range, BfLength, Scenario};
use lir_core::Constellation;

#[derive(Parser)]
#[command(
    name = "lir",
    version,
    about = "Bloom-filter source routing for polar constellations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print analytic tables (false-positive rates, overhead curves, baselines)
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCmd,
    },
    /// Print the optimal segment-encoding policy for a hop count
    Plan {
        /// number of identifiers on the path
        #[arg(long)]
        n: usize,
        /// filter length: `optimal` or bits
        #[arg(long, default_value = "optimal")]
        m: String,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run a scenario over a seed sweep and write CSV metrics
    Sim {
        /// scenario file
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// built-in scenario (fig4, fig8, fig9, fig10, fig11, fig12, fig13, appendix)
        #[arg(long)]
        preset: Option<String>,
        /// seed range override, `1..500` or a single seed
        #[arg(long)]
        seeds: Option<String>,
        /// output directory (default `out`)
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// `section.key=value` overrides
        #[arg(long = "set")]
        sets: Vec<String>,
        /// write per-packet trace.jsonl
        #[arg(long)]
        trace: bool,
        /// suppress the summary
        #[arg(long)]
        quiet: bool,
    },
    /// Run the validation suite
    Validate {
        /// criteria to run, e.g. `--criterion 3` or `--criterion 1,2,5`
        #[arg(long = "criterion")]
        criteria: Vec<String>,
        /// print detail for passing criteria too
        #[arg(long)]
        verbose: bool,
    },
    /// Dump the constellation topology as CSV
    Topo {
        #[arg(long, default_value_t = 6)]
        orbits: u16,
        #[arg(long, default_value_t = 11)]
        sats: u16,
        #[arg(long, default_value_t = 780.0)]
        altitude_km: f64,
        #[arg(long)]
        seam: bool,
        /// output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// False-positive rate over a filter-length range
    Fpr {
        #[arg(long, default_value = "20..50")]
        m: String,
        #[arg(long, default_value = "4,8,12")]
        n: String,
        #[arg(long, default_value_t = 5)]
        k: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Optimal-length overhead curve f(n)
    Fn {
        #[arg(long, default_value = "1..12")]
        n: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Explicit-link-representation baseline
    Elr {
        #[arg(long, default_value_t = 264)]
        l: u64,
        #[arg(long, default_value = "1..12")]
        n: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Side-by-side comparison at target false-positive rates
    Compare {
        #[arg(long, default_value_t = 264)]
        l: u64,
        #[arg(long, default_value = "2..12")]
        n: String,
        /// comma-separated target rates
        #[arg(long, default_value = "0.001,0.01,0.05")]
        targets: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Expected wrong hops per wrong direction
    Wronghops {
        #[arg(long, default_value = "0.05,0.1,0.2,0.25,0.3")]
        p: String,
        #[arg(long, default_value_t = 4)]
        n: u32,
    },
}

#[derive(Args)]
struct ParamArgs {
    /// payload bits per packet
    #[arg(long, default_value_t = 8192.0)]
    c_bits: f64,
    /// hash positions per identifier
    #[arg(long, default_value_t = 5)]
    k: u32,
    /// link bandwidth, bit/s
    #[arg(long, default_value_t = 10.0e6)]
    b: f64,
    /// re-encoding delay, microseconds
    #[arg(long, default_value_t = 10.0)]
    tau_us: f64,
}

impl ParamArgs {
    fn to_params(&self) -> OverheadParams {
        OverheadParams {
            payload_bits: self.c_bits,
            hash_count: self.k,
            bandwidth_bps: self.b,
            reencode_delay_s: self.tau_us * 1.0e-6,
        }
    }
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn emit(table: String, csv: Option<PathBuf>) -> ExitCode {
    match csv {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, table) {
                return fail(format_args!("writing {}: {e}", path.display()));
            }
            ExitCode::SUCCESS
        }
        None => {
            print!("{table}");
            ExitCode::SUCCESS
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Analyze { what } => match what {
            AnalyzeCmd::Fpr { m, n, k, csv } => {
                let (Some(m), Some(n)) = (analyze::parse_range(&m), analyze::parse_list(&n)) else {
                    return fail("bad --m or --n");
                };
                emit(analyze::fpr_table(m, &n, k), csv)
            }
            AnalyzeCmd::Fn { n, params, csv } => {
                let Some(n) = analyze::parse_range(&n) else {
                    return fail("bad --n");
                };
                emit(analyze::fn_table(n, &params.to_params()), csv)
            }
            AnalyzeCmd::Elr { l, n, csv } => {
                let Some(n) = analyze::parse_range(&n) else {
                    return fail("bad --n");
                };
                emit(analyze::elr_table(n, l), csv)
            }
            AnalyzeCmd::Compare {
                l,
                n,
                targets,
                params,
                csv,
            } => {
                let (Some(n), Some(t)) = (
                    analyze::parse_range(&n),
                    analyze::parse_list::<f64>(&targets),
                ) else {
                    return fail("bad --n or --targets");
                };
                emit(
                    analyze::elr_compare_table(n, l, &t, &params.to_params()),
                    csv,
                )
            }
            AnalyzeCmd::Wronghops { p, n } => {
                let Some(p) = analyze::parse_list::<f64>(&p) else {
                    return fail("bad --p");
                };
                emit(analyze::wrong_hop_table(&p, n), None)
            }
        },
        Cmd::Plan { n, m, params } => {
            if n == 0 {
                return fail("--n must be at least 1");
            }
            let m = if m == "optimal" {
                BfLength::Optimal
            } else {
                match m.parse() {
                    Ok(v) if v > 0 => BfLength::Fixed(v),
                    _ => return fail("bad --m"),
                }
            };
            print!("{}", plan::render(n, m, &params.to_params()));
            ExitCode::SUCCESS
        }
        Cmd::Sim {
            config,
            preset,
            seeds,
            out,
            sets,
            trace,
            quiet,
        } => {
            if preset.as_deref() == Some("verify-theorem1") {
                // the wrong-hop verification sweep: theory vs simulation
                // across filter lengths, one CSV
                let csv = validate::wrong_hop_csv();
                if let Err(e) = std::fs::create_dir_all(&out) {
                    return fail(format_args!("creating {}: {e}", out.display()));
                }
                let path = out.join("wronghops.csv");
                if let Err(e) = std::fs::write(&path, &csv) {
                    return fail(format_args!("writing {}: {e}", path.display()));
                }
                if !quiet {
                    print!("{csv}");
                    println!("wrote {}", path.display());
                }
                return ExitCode::SUCCESS;
            }
            let text = match (&config, &preset) {
                (Some(path), None) => match std::fs::read_to_string(path) {
                    Ok(t) => t,
                    Err(e) => return fail(format_args!("reading {}: {e}", path.display())),
                },
                (None, Some(name)) => match simcmd::preset(name) {
                    Some(t) => t.to_string(),
                    None => return fail(format_args!("unknown preset `{name}`")),
                },
                _ => return fail("pass exactly one of --config or --preset"),
            };
            let mut scn = match Scenario::parse(&text) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            for s in &sets {
                if let Err(e) = scn.apply_override(s) {
                    return fail(e);
                }
            }
            if let Some(spec) = seeds {
                match parse_seed_range(&spec) {
                    Some(r) => scn.seeds = r,
                    None => return fail(format_args!("bad seed range `{spec}`")),
                }
            }
            let outcome = match simcmd::run_sweep(&scn, trace) {
                Ok(o) => o,
                Err(e) => return fail(e),
            };
            if let Err(e) = simcmd::write_outputs(&outcome, &out, trace) {
                return fail(format_args!("writing outputs: {e}"));
            }
            if !quiet {
                print!("{}", outcome.summary);
                println!("wrote {}", out.join("flows.csv").display());
            }
            ExitCode::SUCCESS
        }
        Cmd::Validate { criteria, verbose } => {
            let ids = match validate::parse_criteria(&criteria) {
                Ok(ids) => ids,
                Err(e) => return fail(e),
            };
            let (all, report) = validate::run_all(&ids, verbose);
            print!("{report}");
            if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Cmd::Topo {
            orbits,
            sats,
            altitude_km,
            seam,
            out,
        } => {
            let c = match Constellation::build(orbits, sats, altitude_km, seam) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            emit(c.topology_csv(), out)
        }
    }
}
