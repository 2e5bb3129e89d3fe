//! Command-line frontend: geometry analysis, BEC code construction, encode
//! and decode over newline-delimited hex frames, Monte Carlo block-error
//! simulation, polarization traces, and the complexity/exponent tables.

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use polarmem_core::construction::{bec_reliabilities, design_bec_spec};
use polarmem_core::decoder::DecoderWorkspace;
use polarmem_core::encoder::{encode_message, CodeSpec};
use polarmem_core::geometry;
use polarmem_core::polarization::cutoff_sequence_with_delta;
use polarmem_core::sim::{
    self, complexity_csv, complexity_figure, exponent_csv, read_spec_json, reliability_csv,
    report_csv, simulate_bler, write_spec_json, NoiseModel, DEFAULT_PARTITIONS,
};

/// Environment variable selecting the default worker-thread count.
const THREADS_ENV: &str = "POLARMEM_THREADS";

#[derive(Parser)]
#[command(
    name = "polarmem",
    version,
    about = "Polar codes with higher-order combining memory",
    after_help = "Output is machine-readable (CSV or JSON). Codec frames are \
newline-delimited hex, most significant bit first, zero-padded to the byte."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArg {
    /// Write output here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Geometry report: growth base, typical frequencies, exponent, lengths,
    /// complexities (JSON).
    Analyze {
        /// Memory order.
        #[arg(long)]
        m: usize,
        /// Largest combining level to tabulate.
        #[arg(long)]
        n_max: usize,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Build a BEC code spec (JSON) by exact reliability selection.
    Construct {
        #[arg(long)]
        m: usize,
        /// Combining level.
        #[arg(long)]
        n: usize,
        /// Design erasure probability.
        #[arg(long)]
        eps: f64,
        /// Code rate; K = round(rate * N).
        #[arg(long, conflicts_with = "k")]
        rate: Option<f64>,
        /// Dimension K (overrides --rate).
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        out: OutputArg,
        /// Also write the per-index reliability table (CSV) here.
        #[arg(long)]
        reliabilities_out: Option<PathBuf>,
    },
    /// Encode hex message frames (K bits each) from stdin to codeword frames.
    Encode {
        /// Code spec JSON produced by `construct`.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Decode hex frames from stdin to message frames (K bits each).
    ///
    /// Without --channel, frames carry N hard bits (noiseless LLR mapping).
    /// With `--channel bsc:P`, frames carry N received bits. With
    /// `--channel bec:E`, frames carry N two-bit symbols (00 zero, 01 one,
    /// 10 erased), packed most significant first.
    Decode {
        #[arg(long)]
        spec: PathBuf,
        /// Channel the frames were received on (`bec:EPS` or `bsc:P`).
        #[arg(long)]
        channel: Option<String>,
    },
    /// Monte Carlo block-error simulation (CSV report).
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Noise model, `bec:EPS` or `bsc:P`.
        #[arg(long)]
        channel: String,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Independent trial streams; the result is a pure function of
        /// (seed, partitions).
        #[arg(long, default_value_t = DEFAULT_PARTITIONS)]
        partitions: u32,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Exact polarization-ensemble trace per level (CSV).
    Polarize {
        #[arg(long)]
        m: usize,
        /// Deepest level to evolve.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        /// Reliability threshold for the polarized fractions.
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Reference tables (CSV).
    Figures {
        #[arg(long, value_enum)]
        which: Figure,
        #[command(flatten)]
        out: OutputArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    /// Packing ratios at code lengths nearest 1e4 and 1e6, m = 1..20.
    Complexity,
    /// Achievable exponent bound p_plus, m = 1..50.
    Exponent,
}

fn parse_channel(text: &str) -> Result<NoiseModel> {
    let (kind, value) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("channel must look like bec:0.3 or bsc:0.1"))?;
    let value: f64 = value.parse().context("channel parameter")?;
    let model = match kind.to_ascii_lowercase().as_str() {
        "bec" => NoiseModel::Bec { eps: value },
        "bsc" => NoiseModel::Bsc { p: value },
        other => bail!("unknown channel kind {other:?}"),
    };
    model.validate()?;
    Ok(model)
}

fn emit(out: &OutputArg, text: &str) -> Result<()> {
    match &out.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {path:?}")),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_spec(path: &PathBuf) -> Result<CodeSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    Ok(read_spec_json(&text)?)
}

/// Packs bits into hex, most significant bit of each byte first.
fn bits_to_hex(bits: &[bool]) -> String {
    let mut out = String::with_capacity(2 * bits.len().div_ceil(8));
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            if b {
                byte |= 1 << (7 - i);
            }
        }
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn hex_to_bits(hex: &str, count: usize) -> Result<Vec<bool>> {
    let hex = hex.trim();
    let expected_digits = 2 * count.div_ceil(8);
    if hex.len() != expected_digits {
        bail!(
            "frame has {} hex digits, expected {expected_digits} for {count} bits",
            hex.len()
        );
    }
    let mut bits = Vec::with_capacity(4 * hex.len());
    for c in hex.chars() {
        let v = c.to_digit(16).ok_or_else(|| anyhow!("bad hex digit {c:?}"))?;
        for k in 0..4 {
            bits.push(v >> (3 - k) & 1 == 1);
        }
    }
    if bits[count..].iter().any(|&b| b) {
        bail!("nonzero padding bits in frame");
    }
    bits.truncate(count);
    Ok(bits)
}

fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits);
    (x * scale).round() / scale
}

fn run_analyze(m: usize, n_max: usize, out: &OutputArg) -> Result<()> {
    let report = geometry::geometry_report(m, n_max)?;
    let ratios = sim::ratio_table(m, n_max)?;
    let levels: Vec<serde_json::Value> = ratios
        .iter()
        .map(|&(n, len, enc, dec, eta_e, eta_d)| {
            let mut v = serde_json::json!({
                "n": n,
                "N": len,
                "enc_complexity": enc,
                "dec_complexity": dec,
            });
            if n >= 2 {
                v["eta_enc"] = round12(eta_e).into();
                v["eta_dec"] = round12(eta_d).into();
            }
            v
        })
        .collect();
    let doc = serde_json::json!({
        "m": m,
        "n_max": n_max,
        "phi": round12(report.phi),
        "p_plus": round12(report.freqs.p_plus),
        "p_minus": round12(report.freqs.p_minus),
        "p_star": round12(report.freqs.p_star),
        "achievable_exponent": round12(report.freqs.p_plus),
        "lengths": report.lengths,
        "levels": levels,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))
}

#[allow(clippy::too_many_arguments)]
fn run_construct(
    m: usize,
    n: usize,
    eps: f64,
    rate: Option<f64>,
    k: Option<usize>,
    out: &OutputArg,
    reliabilities_out: Option<&PathBuf>,
) -> Result<()> {
    let len = geometry::code_length(n, m)?;
    let k = match (k, rate) {
        (Some(k), _) => k,
        (None, Some(rate)) => {
            if !(0.0..=1.0).contains(&rate) {
                bail!("rate {rate} outside [0, 1]");
            }
            (len as f64 * rate).round() as usize
        }
        (None, None) => bail!("pass --rate or --k"),
    };
    let spec = design_bec_spec(m, n, eps, k)?;
    if let Some(path) = reliabilities_out {
        let z = bec_reliabilities(n, m, eps)?;
        std::fs::write(path, reliability_csv(&z.z))
            .with_context(|| format!("writing {path:?}"))?;
    }
    emit(out, &format!("{}\n", write_spec_json(&spec)?))
}

fn run_encode(spec_path: &PathBuf) -> Result<()> {
    let spec = load_spec(spec_path)?;
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let msg = hex_to_bits(&line, spec.k)?;
        let x = encode_message(&msg, &spec)?;
        writeln!(out, "{}", bits_to_hex(&x))?;
    }
    Ok(())
}

fn run_decode(spec_path: &PathBuf, channel: Option<&str>) -> Result<()> {
    let spec = load_spec(spec_path)?;
    let noise = channel.map(parse_channel).transpose()?;
    let len = spec.code_len()? as usize;
    let mut ws = DecoderWorkspace::new(spec.n, spec.m)?;
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let llrs: Vec<f64> = match &noise {
            None => hex_to_bits(&line, len)?
                .iter()
                .map(|&b| if b { f64::NEG_INFINITY } else { f64::INFINITY })
                .collect(),
            Some(model @ NoiseModel::Bsc { .. }) => hex_to_bits(&line, len)?
                .iter()
                .map(|&b| model.llr(b as u8))
                .collect(),
            Some(model @ NoiseModel::Bec { .. }) => {
                let raw = hex_to_bits(&line, 2 * len)?;
                raw.chunks(2)
                    .map(|pair| {
                        let sym = (pair[0] as u8) << 1 | pair[1] as u8;
                        if sym > 2 {
                            bail!("invalid erasure-frame symbol 11");
                        }
                        Ok(model.llr(sym))
                    })
                    .collect::<Result<Vec<f64>>>()?
            }
        };
        ws.reset();
        let res = ws.decode(&llrs, &spec)?;
        let msg: Vec<bool> = spec.info_set.iter().map(|&i| res.u_hat[i - 1]).collect();
        writeln!(out, "{}", bits_to_hex(&msg))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Analyze { m, n_max, out } => run_analyze(*m, *n_max, out),
        Command::Construct {
            m,
            n,
            eps,
            rate,
            k,
            out,
            reliabilities_out,
        } => run_construct(*m, *n, *eps, *rate, *k, out, reliabilities_out.as_ref()),
        Command::Encode { spec } => run_encode(spec),
        Command::Decode { spec, channel } => run_decode(spec, channel.as_deref()),
        Command::Simulate {
            spec,
            channel,
            trials,
            seed,
            partitions,
            out,
        } => {
            let spec = load_spec(spec)?;
            let noise = parse_channel(channel)?;
            let report = simulate_bler(&spec, &noise, *trials, *seed, *partitions)?;
            emit(out, &report_csv(&spec, &noise, &report))
        }
        Command::Polarize {
            m,
            n,
            eps,
            delta,
            out,
        } => {
            let trace = cutoff_sequence_with_delta(*n, *m, *eps, *delta)?;
            emit(out, &trace.to_csv())
        }
        Command::Figures { which, out } => {
            let text = match which {
                Figure::Complexity => {
                    let rows =
                        complexity_figure(&(1..=20).collect::<Vec<_>>(), &[10_000, 1_000_000])?;
                    complexity_csv(&rows)
                }
                Figure::Exponent => {
                    let rows = sim::exponent_figure(&(1..=50).collect::<Vec<_>>())?;
                    exponent_csv(&rows)
                }
            };
            emit(out, &text)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var(THREADS_ENV) {
        match threads.parse::<usize>() {
            Ok(t) if t >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global();
            }
            _ => {
                eprintln!("ignoring invalid {THREADS_ENV}={threads:?}");
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
