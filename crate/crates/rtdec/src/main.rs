use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rtdec::config::{bb_preset, ClusterSettings, DecoderSpec, OsdSettings, RunConfig};
use rtdec::curve::{cutoff_curve, latency_cdf};
use rtdec::harness::run_config;
use rtdec::io::{load_problem, save_problem};
use rtdec::output::{
    parse_budgets, read_latency, read_trial_summaries, summaries, write_curve, write_latency, write_trials,
};
use rtdec::resources::{default_cluster_settings, named_dimensions, report};
use rtdec_core::cost::DeviceProfile;
use rtdec_core::problem::{bivariate_bicycle, repetition};
use rtdec_core::realtime::{
    epsilon_from_histogram, max_blocks, simulate_backlog, simulate_backlog_histogram, tail_verdict, LatencyModel,
};
use rtdec_core::systolic::{self, Mode};
use rtdec_core::{BitVec, Gf2Matrix};

#[derive(Parser)]
#[command(name = "rtdec", version, about = "Real-time qLDPC decoder benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte Carlo trials and write trials.csv, latency.csv and curve.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Report the curve from the end of the pre-decoder leg.
        #[arg(long)]
        post_only: bool,
        /// Bill the OSD sort and extract stages for a full `r_max` list.
        #[arg(long)]
        padded_timing: bool,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Build a cutoff curve from a trials file.
    Curve {
        #[arg(long)]
        trials: PathBuf,
        /// Comma-separated cycle budgets; `inf` is unlimited.
        #[arg(long)]
        budgets: String,
        #[arg(long)]
        post_only: bool,
        #[arg(long, default_value = "curve.csv")]
        out: PathBuf,
    },
    /// Build the latency CDF from a trials file.
    Latency {
        #[arg(long)]
        trials: PathBuf,
        #[arg(long)]
        post_only: bool,
        #[arg(long, default_value = "latency.csv")]
        out: PathBuf,
        /// Also print the tail probability beyond this budget.
        #[arg(long)]
        tref: Option<u64>,
    },
    /// Estimate FPGA resources for a decoder.
    Resources {
        /// filtered-osd, cluster, relay or standard-osd.
        #[arg(long)]
        decoder: String,
        /// A problem file, or `gross` / `two-gross` for the circuit-noise sizes.
        #[arg(long)]
        problem: String,
        /// `vu19p` or a TOML device profile.
        #[arg(long, default_value = "vu19p")]
        device: String,
        #[arg(long, default_value = "resources.json")]
        out: PathBuf,
    },
    /// Check the latency-tail condition and evaluate the slowdown bound.
    Tail {
        #[arg(long)]
        tref: u64,
        #[arg(long)]
        tmax: u64,
        #[arg(long)]
        tgen: u64,
        /// Tail probability; read from --latency when omitted.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1)]
        blocks: u64,
        /// latency.csv to take epsilon from.
        #[arg(long)]
        latency: Option<PathBuf>,
        /// Also run the backlog simulator for this many layers.
        #[arg(long)]
        simulate: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw latencies from --latency instead of the two-point model.
        #[arg(long)]
        from_histogram: bool,
    },
    /// Run the systolic array on a small system.
    Systolic {
        /// Rows of A as bitstrings, comma-separated.
        #[arg(long)]
        a: String,
        /// Rows of B as bitstrings, comma-separated; empty for none.
        #[arg(long, default_value = "")]
        b: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
        /// Write one JSON record per iteration to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Write a generated problem file (.json or .json.gz).
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Forward,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Repetition,
    Bb72,
    Gross,
    TwoGross,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn parse_rows(s: &str) -> Result<Vec<BitVec>> {
    s.split(',')
        .filter(|r| !r.is_empty())
        .map(|r| BitVec::parse(r.trim()).with_context(|| format!("`{r}` is not a bitstring")))
        .collect()
}

fn cmd_run(config: &Path, out: &Path, post_only: bool, padded_timing: bool) -> Result<()> {
    let mut cfg = RunConfig::load(config)?;
    if padded_timing {
        match &mut cfg.decoder {
            DecoderSpec::FilteredOsd(o) => o.padded_timing = true,
            _ => bail!("--padded-timing applies to filtered_osd only"),
        }
    }
    let base = config.parent().unwrap_or(Path::new("."));
    let (problem, records) = run_config(&cfg, base)?;
    fs::create_dir_all(out)?;
    write_trials(create(&out.join("trials.csv"))?, &records)?;
    let sums = summaries(&records);
    write_latency(create(&out.join("latency.csv"))?, &latency_cdf(&sums, post_only)?)?;
    if !cfg.budgets.is_empty() {
        write_curve(create(&out.join("curve.csv"))?, &cutoff_curve(&sums, &cfg.budgets, post_only)?)?;
    }
    let failures = sums.iter().filter(|s| s.failed).count();
    println!(
        "{}: {} trials on {} (M={}, N={}), {} failures",
        cfg.decoder.id(),
        records.len(),
        problem.name(),
        problem.m(),
        problem.n(),
        failures
    );
    Ok(())
}

fn load_device(spec: &str) -> Result<DeviceProfile> {
    if spec.eq_ignore_ascii_case("vu19p") {
        return Ok(DeviceProfile::vu19p());
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading device profile {spec}"))?;
    Ok(toml::from_str(&text)?)
}

fn cmd_resources(decoder: &str, problem: &str, device: &str, out: &Path) -> Result<()> {
    let (m, n) = match named_dimensions(problem) {
        Some(d) => d,
        None => {
            let p = load_problem(Path::new(problem))?;
            (p.m() as u64, p.n() as u64)
        }
    };
    let device = load_device(device)?;
    let cluster: ClusterSettings = default_cluster_settings(m);
    let rep = report(decoder, m, n, &device, &OsdSettings::default(), &cluster)?;
    let json = serde_json::to_string_pretty(&rep)?;
    let mut w = create(out)?;
    w.write_all(json.as_bytes())?;
    w.write_all(b"\n")?;
    println!("{json}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_tail(
    tref: u64,
    tmax: u64,
    tgen: u64,
    eps: Option<f64>,
    blocks: u64,
    latency: Option<&Path>,
    simulate: Option<u64>,
    seed: u64,
    from_histogram: bool,
) -> Result<()> {
    let hist = latency.map(|p| read_latency(open(p)?)).transpose()?;
    let eps = match (eps, &hist) {
        (Some(e), _) => e,
        (None, Some(h)) => epsilon_from_histogram(h, tref)?,
        (None, None) => bail!("give --eps or --latency"),
    };
    let model = LatencyModel::new(tref, tmax, tgen, eps, blocks)?;
    let verdict = tail_verdict(&model);
    let limit = max_blocks(&model);
    let mut report = serde_json::json!({
        "model": model,
        "verdict": verdict,
        "max_blocks": limit,
    });
    if let Some(layers) = simulate {
        let sim = match (&hist, from_histogram) {
            (Some(h), true) => simulate_backlog_histogram(&model, h, layers, seed),
            (None, true) => bail!("--from-histogram needs --latency"),
            _ => simulate_backlog(&model, layers, seed),
        };
        report["backlog"] = serde_json::to_value(sim)?;
        report["backlog_model"] = if from_histogram { "histogram".into() } else { "two_point".into() };
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_systolic(a: &str, b: &str, mode: ModeArg, trace: Option<&Path>) -> Result<()> {
    let matrix = |rows: Vec<BitVec>| {
        let ncols = rows.first().map_or(0, BitVec::len);
        Gf2Matrix::from_rows(rows, ncols)
    };
    let a = matrix(parse_rows(a)?)?;
    let b = if b.is_empty() { Gf2Matrix::zeros(a.nrows(), 0) } else { matrix(parse_rows(b)?)? };
    let mode = match mode {
        ModeArg::Forward => Mode::Forward,
        ModeArg::Full => Mode::Full,
    };
    let run = systolic::run(&a, &b, mode, trace.is_some())?;
    if let (Some(path), Some(records)) = (trace, &run.trace) {
        let mut w = create(path)?;
        for rec in records {
            serde_json::to_writer(&mut w, rec)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    println!("iterations {}", run.iterations);
    println!("pivots {}", run.pivot_mask);
    for r in run.matrix.rows() {
        println!("{r}");
    }
    Ok(())
}

fn cmd_gen(kind: GenKind, d: usize, p: f64, out: &Path) -> Result<()> {
    let problem = match kind {
        GenKind::Repetition => repetition(d, p)?,
        GenKind::Bb72 => bivariate_bicycle(bb_preset("bb72")?)?.decoding_problem(p)?,
        GenKind::Gross => bivariate_bicycle(bb_preset("gross")?)?.decoding_problem(p)?,
        GenKind::TwoGross => bivariate_bicycle(bb_preset("two_gross")?)?.decoding_problem(p)?,
    };
    save_problem(&problem, out)?;
    println!("wrote {} (M={}, N={}, K={})", out.display(), problem.m(), problem.n(), problem.k());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out, post_only, padded_timing, threads } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
            }
            cmd_run(&config, &out, post_only, padded_timing)
        }
        Command::Curve { trials, budgets, post_only, out } => {
            let sums = read_trial_summaries(open(&trials)?)?;
            let points = cutoff_curve(&sums, &parse_budgets(&budgets)?, post_only)?;
            write_curve(create(&out)?, &points)
        }
        Command::Latency { trials, post_only, out, tref } => {
            let sums = read_trial_summaries(open(&trials)?)?;
            let hist = latency_cdf(&sums, post_only)?;
            write_latency(create(&out)?, &hist)?;
            if let Some(t) = tref {
                println!("epsilon({t}) = {}", epsilon_from_histogram(&hist, t)?);
            }
            Ok(())
        }
        Command::Resources { decoder, problem, device, out } => cmd_resources(&decoder, &problem, &device, &out),
        Command::Tail { tref, tmax, tgen, eps, blocks, latency, simulate, seed, from_histogram } => {
            cmd_tail(tref, tmax, tgen, eps, blocks, latency.as_deref(), simulate, seed, from_histogram)
        }
        Command::Systolic { a, b, mode, trace } => cmd_systolic(&a, &b, mode, trace.as_deref()),
        Command::Gen { kind, d, p, out } => cmd_gen(kind, d, p, &out),
    }
}
