//! `gmud-sim`: decompositions, BER sweeps, scheme comparisons and feedback
//! quantizer demos on the command line.
//!
//! Sweeps write a CSV file, an SVG chart and a JSON manifest next to each
//! other; `replay` re-runs a manifest and reproduces its CSV byte for byte.

pub mod manifest;
pub mod output;
pub mod svg;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gmud::feedback::{decode, encode, BitString, FeedbackBudget, FeedbackKind, FeedbackMessage};
use gmud::linalg::{fro_norm, Complex, ComplexMatrix};
use gmud::precoding::GridSpec;
use gmud::sim::{FixedRow, GmudReceiver};
use gmud::{gmud, run_ber, BerCurve, FeedbackMode, Modulation, PhasePair, Scheme, SimConfig};
use serde_json::json;

use crate::manifest::{OutputPaths, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "gmud-sim", version, about = "GMUD precoding and limited-feedback BER simulation")]
pub struct Cli {
    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor a 2x2 complex matrix as P R Qᴴ and print it as JSON.
    Decompose(DecomposeArgs),
    /// BER curve of one scheme.
    Sweep(SweepArgs),
    /// BER curves of all three schemes at equal feedback budget.
    Compare(CompareArgs),
    /// Encode a channel report to bits, or decode bits, and print both.
    Quantize(QuantizeArgs),
    /// Re-run the simulations recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Eight reals, row-major `re im` pairs: "h00 h01 h10 h11".
    #[arg(long, allow_hyphen_values = true, required_unless_present = "matrix_file")]
    pub matrix: Option<String>,
    /// File holding the eight reals.
    #[arg(long, conflicts_with = "matrix")]
    pub matrix_file: Option<PathBuf>,
    /// Prescribed R[0][0], within [λ2, λ1].
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta2: f64,
}

/// Inclusive `start:step:stop` range in dB, or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrRange(pub Vec<f64>);

impl FromStr for SnrRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("'{t}' is not a number"))
        };
        match parts.as_slice() {
            [v] => Ok(SnrRange(vec![num(v)?])),
            [a, st, b] => {
                let (start, step, stop) = (num(a)?, num(st)?, num(b)?);
                if step == 0.0 {
                    return if start == stop {
                        Ok(SnrRange(vec![start]))
                    } else {
                        Err("step 0 needs start = stop".into())
                    };
                }
                if (stop - start) * step < 0.0 {
                    return Err(format!("step {step} never reaches {stop} from {start}"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if n > 10_000 {
                    return Err(format!("{n} SNR points is too many"));
                }
                // Indexing from start avoids accumulating rounding drift.
                Ok(SnrRange((0..n).map(|i| start + step * i as f64).collect()))
            }
            _ => Err(format!("expected start:step:stop or a single value, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReceiverArg {
    Projection,
    Matched,
}

/// Flags shared by `sweep` and `compare`.
#[derive(Debug, Args)]
pub struct SimArgs {
    /// Modulation: qpsk or 16qam.
    #[arg(long = "mod", default_value = "16qam")]
    pub modulation: Modulation,
    /// SNR points in dB as start:step:stop (inclusive).
    #[arg(long, default_value = "0:2:30")]
    pub snr: SnrRange,
    /// Channel realizations per SNR point.
    #[arg(long, default_value_t = gmud::sim::DEFAULT_REALIZATIONS)]
    pub realizations: usize,
    /// Symbol vectors per realization (default: about 2e5 bits per point).
    #[arg(long)]
    pub symbols: Option<usize>,
    /// Master seed.
    #[arg(long, env = "GMUD_SEED", default_value_t = 1)]
    pub seed: u64,
    /// GMUD grid: r values per user.
    #[arg(long, default_value_t = GridSpec::default().n_r)]
    pub grid_r: usize,
    /// GMUD grid: phase values per user.
    #[arg(long, default_value_t = GridSpec::default().n_theta)]
    pub grid_theta: usize,
    /// GMUD grid: interior power splits.
    #[arg(long, default_value_t = GridSpec::default().n_power)]
    pub grid_power: usize,
    /// Leave out the all-power-to-one-user splits.
    #[arg(long)]
    pub no_power_endpoints: bool,
    /// Local refinement around the grid optimum.
    #[arg(long)]
    pub refine: bool,
    /// Row reported under the fixed-antenna baseline: 1, 2 or strongest.
    #[arg(long, default_value = "1")]
    pub fixed_row: String,
    /// GMUD receive combining.
    #[arg(long, value_enum, default_value = "projection")]
    pub receiver: ReceiverArg,
    /// Output CSV path; the SVG, manifest and .dat files are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot data file.
    #[arg(long)]
    pub dat: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// reg-inv, reg-inv-sel or gmud.
    #[arg(long)]
    pub scheme: Scheme,
    /// `perfect`, or N for a 12·N-bit budget per user.
    #[arg(long, default_value = "perfect")]
    pub feedback: FeedbackMode,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Feedback modes to compare; perfect CSI is always included.
    #[arg(long)]
    pub feedback: Vec<FeedbackMode>,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    /// reg-inv, reg-inv-sel or gmud.
    #[arg(long)]
    pub scheme: Scheme,
    /// Budget parameter N (12·N bits).
    #[arg(long)]
    pub n: u32,
    /// Channel to encode, eight reals as for `decompose`.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "bits")]
    pub matrix: Option<String>,
    /// Bit string to decode instead.
    #[arg(long, conflicts_with = "matrix")]
    pub bits: Option<String>,
    /// Row reported under the fixed-antenna baseline: 1, 2 or strongest.
    #[arg(long, default_value = "1")]
    pub fixed_row: String,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where to write the CSV (default: the path recorded in the manifest).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Compare against the recorded CSV instead of writing; fails on mismatch.
    #[arg(long)]
    pub check: bool,
}

/// Runs a parsed command, writing human-facing output to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    if cli.threads == Some(0) {
        bail!("--threads must be at least 1");
    }
    let threads = cli.threads;
    match cli.command {
        Command::Decompose(a) => cmd_decompose(&a, stdout),
        Command::Sweep(a) => cmd_sweep(&a, threads, stdout),
        Command::Compare(a) => cmd_compare(&a, threads, stdout),
        Command::Quantize(a) => cmd_quantize(&a, stdout),
        Command::Replay(a) => cmd_replay(&a, threads, stdout),
    }
}

/// Parses eight whitespace-separated reals into a 2x2 complex matrix.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let vals = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| anyhow!("'{t}' is not a number")))
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != 8 {
        bail!("a 2x2 complex matrix needs 8 reals (re im pairs, row-major), got {}", vals.len());
    }
    let data = vals.chunks_exact(2).map(|p| Complex::new(p[0], p[1])).collect();
    Ok(ComplexMatrix::new(2, 2, data)?)
}

fn matrix_json(m: &ComplexMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect();
    json!(rows)
}

fn vector_json(v: &[Complex]) -> serde_json::Value {
    json!(v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

fn parse_fixed_row(s: &str) -> Result<FixedRow> {
    match s.to_ascii_lowercase().as_str() {
        "strongest" => Ok(FixedRow::Strongest),
        other => match other.parse::<usize>() {
            Ok(i @ 1..=2) => Ok(FixedRow::Index(i - 1)),
            _ => bail!("--fixed-row must be 1, 2 or strongest, got '{s}'"),
        },
    }
}

pub fn cmd_decompose(a: &DecomposeArgs, out: &mut dyn Write) -> Result<()> {
    let text = match (&a.matrix, &a.matrix_file) {
        (Some(m), _) => m.clone(),
        (None, Some(p)) => {
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
        }
        (None, None) => bail!("either --matrix or --matrix-file is required"),
    };
    let h = parse_matrix(&text)?;
    let f = gmud(&h, a.r, PhasePair::new(a.theta1, a.theta2))?;
    let residual = fro_norm(&f.reconstruct().sub(&h)?);
    let doc = json!({
        "lambda1": f.source_svd.lambda1,
        "lambda2": f.source_svd.lambda2,
        "r": f.r,
        "theta1": f.phases.theta1(),
        "theta2": f.phases.theta2(),
        "P": matrix_json(&f.p),
        "R": matrix_json(&f.rmat.matrix()),
        "Q": matrix_json(&f.q),
        "beam": vector_json(&f.beam()),
        "residual": residual,
        "cone_angle": f.rotation.cone_angle(),
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

fn base_config(sim: &SimArgs, scheme: Scheme, feedback: FeedbackMode) -> Result<SimConfig> {
    let mut cfg = SimConfig::new(scheme, sim.modulation, sim.snr.0.clone())
        .with_realizations(sim.realizations);
    if let Some(s) = sim.symbols {
        cfg.symbols_per_realization = s;
    }
    cfg.feedback = feedback;
    cfg.seed = sim.seed;
    cfg.grid = GridSpec {
        n_r: sim.grid_r,
        n_theta: sim.grid_theta,
        n_power: sim.grid_power,
        power_endpoints: !sim.no_power_endpoints,
        refine: sim.refine,
    };
    cfg.fixed_row = parse_fixed_row(&sim.fixed_row)?;
    cfg.gmud_receiver = match sim.receiver {
        ReceiverArg::Projection => GmudReceiver::Projection,
        ReceiverArg::Matched => GmudReceiver::MatchedFilter,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Simulates every config in order on `threads` workers (default: all cores).
pub fn run_configs(configs: &[SimConfig], threads: Option<usize>) -> Result<Vec<BerCurve>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("starting worker threads")?;
    pool.install(|| {
        configs
            .iter()
            .map(|c| {
                run_ber(c).with_context(|| format!("simulating {} ({})", c.scheme, c.feedback))
            })
            .collect()
    })
}

/// Every output path derived from the CSV path.
pub fn output_paths(csv: &Path, dat: bool) -> OutputPaths {
    let stem = csv.with_extension("");
    let sibling = |ext: &str| {
        let mut s = stem.clone().into_os_string();
        s.push(ext);
        PathBuf::from(s)
    };
    OutputPaths {
        csv: csv.to_path_buf(),
        svg: sibling(".svg"),
        manifest: sibling(".manifest.json"),
        dat: dat.then(|| sibling(".dat")),
    }
}

fn title(curves: &[BerCurve]) -> String {
    match curves.first() {
        Some(c) => format!("BER, {}", c.modulation),
        None => "BER".into(),
    }
}

/// Runs the configs and writes CSV, SVG, optional DAT and the manifest.
fn simulate_and_write(
    command: &str,
    configs: Vec<SimConfig>,
    csv_path: &Path,
    dat: bool,
    threads: Option<usize>,
    out: &mut dyn Write,
) -> Result<()> {
    let started = Instant::now();
    let curves = run_configs(&configs, threads)?;
    let paths = output_paths(csv_path, dat);
    let csv = output::curves_to_csv(&curves);
    let svg = svg::render(&curves, &title(&curves));
    let manifest = RunManifest::new(command, configs, started.elapsed(), paths.clone());

    // Everything is rendered before the first file is touched.
    output::write_atomic(&paths.csv, csv.as_bytes())?;
    output::write_atomic(&paths.svg, svg.as_bytes())?;
    if let Some(p) = &paths.dat {
        output::write_atomic(p, output::curves_to_dat(&curves).as_bytes())?;
    }
    output::write_atomic(&paths.manifest, manifest.to_json()?.as_bytes())?;

    write!(out, "{csv}")?;
    writeln!(out, "# wrote {}", paths.csv.display())?;
    Ok(())
}

pub fn cmd_sweep(a: &SweepArgs, threads: Option<usize>, out: &mut dyn Write) -> Result<()> {
    let cfg = base_config(&a.sim, a.scheme, a.feedback)?;
    let csv = a.sim.out.clone().unwrap_or_else(|| PathBuf::from("gmud-sweep.csv"));
    simulate_and_write("sweep", vec![cfg], &csv, a.sim.dat, threads, out)
}

/// Feedback modes for `compare`: the requested ones in order, then perfect CSI
/// if it was not requested.
pub fn compare_modes(requested: &[FeedbackMode]) -> Vec<FeedbackMode> {
    let mut modes: Vec<FeedbackMode> = Vec::new();
    for m in requested {
        if !modes.contains(m) {
            modes.push(*m);
        }
    }
    if !modes.contains(&FeedbackMode::Perfect) {
        modes.push(FeedbackMode::Perfect);
    }
    modes
}

pub fn cmd_compare(a: &CompareArgs, threads: Option<usize>, out: &mut dyn Write) -> Result<()> {
    let mut configs = Vec::new();
    for mode in compare_modes(&a.feedback) {
        for scheme in Scheme::ALL {
            configs.push(base_config(&a.sim, scheme, mode)?);
        }
    }
    let csv = a.sim.out.clone().unwrap_or_else(|| PathBuf::from("gmud-compare.csv"));
    simulate_and_write("compare", configs, &csv, a.sim.dat, threads, out)
}

pub fn cmd_quantize(a: &QuantizeArgs, out: &mut dyn Write) -> Result<()> {
    let budget = FeedbackBudget::new(a.n)?;
    let kind = FeedbackKind::from(a.scheme);
    let (source, bits) = match (&a.matrix, &a.bits) {
        (Some(m), _) => {
            let h = parse_matrix(m)?;
            let msg = match kind {
                FeedbackKind::RegInvSelection => FeedbackMessage::reg_inv_selection(&h),
                FeedbackKind::RegInvFixed => {
                    let row = match parse_fixed_row(&a.fixed_row)? {
                        FixedRow::Index(i) => i,
                        FixedRow::Strongest => {
                            let n0 = gmud::linalg::vec_norm(&h.row(0));
                            let n1 = gmud::linalg::vec_norm(&h.row(1));
                            usize::from(n1 > n0)
                        }
                    };
                    FeedbackMessage::reg_inv_fixed(&h, row)
                }
                FeedbackKind::Gmud => FeedbackMessage::gmud(&gmud::svd2x2(&h)?),
            };
            let bits = encode(&msg, budget);
            (Some(msg), bits)
        }
        (None, Some(b)) => (None, b.parse::<BitString>()?),
        (None, None) => bail!("either --matrix or --bits is required"),
    };
    let decoded = decode(&bits, kind, budget)?;
    let transmitter_view = match &decoded {
        FeedbackMessage::Gmud(_) => serde_json::to_value(decoded.gmud_feedback())?,
        _ => json!(decoded
            .channel_rows()
            .iter()
            .map(|r| vector_json(r))
            .collect::<Vec<_>>()),
    };
    let doc = json!({
        "scheme": a.scheme.name(),
        "n": budget.n(),
        "total_bits": budget.total_bits(),
        "bits": bits.to_string(),
        "source": source,
        "decoded": decoded,
        "transmitter_view": transmitter_view,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

pub fn cmd_replay(a: &ReplayArgs, threads: Option<usize>, out: &mut dyn Write) -> Result<()> {
    let manifest = RunManifest::load(&a.manifest)?;
    let curves = run_configs(&manifest.configs, threads)?;
    let csv = output::curves_to_csv(&curves);
    if a.check {
        let recorded = std::fs::read_to_string(&manifest.outputs.csv)
            .with_context(|| format!("reading {}", manifest.outputs.csv.display()))?;
        if recorded != csv {
            bail!("replayed CSV differs from {}", manifest.outputs.csv.display());
        }
        writeln!(out, "identical: {}", manifest.outputs.csv.display())?;
        return Ok(());
    }
    let target = a.out.clone().unwrap_or(manifest.outputs.csv);
    output::write_atomic(&target, csv.as_bytes())?;
    writeln!(out, "# wrote {}", target.display())?;
    Ok(())
}
