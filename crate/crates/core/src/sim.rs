//! Channel noise models, Monte Carlo block-error simulation, and the
//! tabulation pipelines behind the complexity and exponent figures.
//!
//! Randomness comes from ChaCha8, a counter-based generator with explicit
//! stream splitting: trial partition `t` draws from stream `t` of the user
//! seed, so results are reproducible given `(seed, partitions)` regardless of
//! thread count, and the generator identity travels with every report.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::DecoderWorkspace;
use crate::encoder::{encode_message, CodeSpec};
use crate::error::{Error, Result};
use crate::geometry::{code_lengths, complexity_ratio, ComplexityKind};

/// Name recorded in reports for the trial generator.
pub const RNG_NAME: &str = "chacha8";

/// Default number of independent trial streams.
pub const DEFAULT_PARTITIONS: u32 = 16;

/// Transmission noise applied to codeword bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum NoiseModel {
    #[serde(rename = "BEC")]
    Bec { eps: f64 },
    #[serde(rename = "BSC")]
    Bsc { p: f64 },
}

/// Received-symbol code for an erased BEC output. Bits travel as 0/1.
pub const ERASURE_SYMBOL: u8 = 2;

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let v = match self {
            NoiseModel::Bec { eps } => *eps,
            NoiseModel::Bsc { p } => *p,
        };
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(Error::Domain(format!("noise parameter {v} not in [0,1]")))
        }
    }

    /// The matching design channel table.
    pub fn channel(&self) -> Result<crate::channel::DiscreteChannel> {
        match self {
            NoiseModel::Bec { eps } => crate::channel::DiscreteChannel::bec(*eps),
            NoiseModel::Bsc { p } => crate::channel::DiscreteChannel::bsc(*p),
        }
    }

    /// Sends one bit, returning the received symbol.
    pub fn transmit(&self, bit: bool, rng: &mut ChaCha8Rng) -> u8 {
        match self {
            NoiseModel::Bec { eps } => {
                if rng.gen_bool(*eps) {
                    ERASURE_SYMBOL
                } else {
                    bit as u8
                }
            }
            NoiseModel::Bsc { p } => (bit ^ rng.gen_bool(*p)) as u8,
        }
    }

    /// LLR of a received symbol.
    pub fn llr(&self, sym: u8) -> f64 {
        match self {
            NoiseModel::Bec { .. } => match sym {
                0 => f64::INFINITY,
                1 => f64::NEG_INFINITY,
                _ => 0.0,
            },
            NoiseModel::Bsc { p } => {
                let mag = if *p == 0.0 {
                    f64::INFINITY
                } else if *p == 1.0 {
                    f64::NEG_INFINITY
                } else {
                    ((1.0 - p) / p).ln()
                };
                if sym == 0 {
                    mag
                } else {
                    -mag
                }
            }
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseModel::Bec { eps } => write!(f, "BEC({eps})"),
            NoiseModel::Bsc { p } => write!(f, "BSC({p})"),
        }
    }
}

/// Outcome of a block-error simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub seed: u64,
    pub partitions: u32,
    /// Wall-clock time; not part of the reproducible payload.
    pub elapsed: Duration,
}

/// 95% Wilson score interval for `errors` successes in `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    let z = 1.959963984540054_f64;
    let t = trials as f64;
    let p = errors as f64 / t;
    let z2 = z * z;
    let denom = 1.0 + z2 / t;
    let center = (p + z2 / (2.0 * t)) / denom;
    let half = z * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    let lo = (center - half).clamp(0.0, 1.0).min(p);
    let hi = (center + half).clamp(0.0, 1.0).max(p);
    (lo, hi)
}

/// Simulates SC block decoding of random messages over `noise`.
///
/// A block errs when any information bit mismatches. Deterministic given
/// `(seed, partitions)`.
pub fn simulate_bler(
    spec: &CodeSpec,
    noise: &NoiseModel,
    trials: u64,
    seed: u64,
    partitions: u32,
) -> Result<TrialReport> {
    if trials < 1 || partitions < 1 {
        return Err(Error::Domain("need trials >= 1 and partitions >= 1".into()));
    }
    spec.validate()?;
    noise.validate()?;
    let start = Instant::now();
    let len = spec.code_len()? as usize;
    let per = trials / partitions as u64;
    let extra = trials % partitions as u64;
    let errors: Result<Vec<u64>> = (0..partitions)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let my_trials = per + if (t as u64) < extra { 1 } else { 0 };
            let mut ws = DecoderWorkspace::new(spec.n, spec.m)?;
            let mut msg = vec![false; spec.k];
            let mut llrs = vec![0.0f64; len];
            let mut block_errors = 0u64;
            for _ in 0..my_trials {
                for b in msg.iter_mut() {
                    *b = rng.gen();
                }
                let x = encode_message(&msg, spec)?;
                for (slot, &bit) in llrs.iter_mut().zip(&x) {
                    let sym = noise.transmit(bit, &mut rng);
                    *slot = noise.llr(sym);
                }
                ws.reset();
                let res = ws.decode(&llrs, spec)?;
                let hit = spec
                    .info_set
                    .iter()
                    .zip(&msg)
                    .all(|(&i, &b)| res.u_hat[i - 1] == b);
                if !hit {
                    block_errors += 1;
                }
            }
            Ok(block_errors)
        })
        .collect();
    let block_errors: u64 = errors?.iter().sum();
    let (wilson_low, wilson_high) = wilson_interval(block_errors, trials);
    Ok(TrialReport {
        trials,
        block_errors,
        bler: block_errors as f64 / trials as f64,
        wilson_low,
        wilson_high,
        seed,
        partitions,
        elapsed: start.elapsed(),
    })
}

/// One row of the complexity table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub m: usize,
    pub target: u64,
    pub n: usize,
    pub code_len: u64,
    pub eta_enc: f64,
    pub eta_dec: f64,
}

/// Level whose code length is nearest the target; ties go to the larger
/// length.
pub fn nearest_level(m: usize, target: u64) -> Result<(usize, u64)> {
    if target < 2 {
        return Err(Error::Domain("target length must be at least 2".into()));
    }
    let mut n = 1usize;
    let mut best = (1usize, crate::geometry::code_length(1, m)?);
    loop {
        let len = crate::geometry::code_length(n, m)?;
        let better = len.abs_diff(target) < best.1.abs_diff(target)
            || (len.abs_diff(target) == best.1.abs_diff(target) && len > best.1);
        if better {
            best = (n, len);
        }
        if len >= target {
            return Ok(best);
        }
        n += 1;
    }
}

/// Packing ratios at the lengths nearest each target, per memory order.
pub fn complexity_figure(m_values: &[usize], targets: &[u64]) -> Result<Vec<ComplexityRow>> {
    let mut rows = Vec::new();
    for &m in m_values {
        for &target in targets {
            let (n, code_len) = nearest_level(m, target)?;
            rows.push(ComplexityRow {
                m,
                target,
                n,
                code_len,
                eta_enc: complexity_ratio(n, m, ComplexityKind::Encoding)?,
                eta_dec: complexity_ratio(n, m, ComplexityKind::Decoding)?,
            });
        }
    }
    Ok(rows)
}

/// Achievable-exponent bound `p_plus` per memory order.
pub fn exponent_figure(m_values: &[usize]) -> Result<Vec<(usize, f64)>> {
    for &m in m_values {
        if !(1..=200).contains(&m) {
            return Err(Error::Domain(format!("memory order {m} outside 1..=200")));
        }
    }
    Ok(m_values
        .iter()
        .map(|&m| (m, crate::geometry::achievable_exponent(m)))
        .collect())
}

/// Formats a number with 12 significant digits so emitted tables are
/// byte-stable.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

/// `m,target,N,eta_enc,eta_dec` rows.
pub fn complexity_csv(rows: &[ComplexityRow]) -> String {
    let mut out = String::from("m,target,N,eta_enc,eta_dec\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.m,
            r.target,
            r.code_len,
            fmt12(r.eta_enc),
            fmt12(r.eta_dec)
        ));
    }
    out
}

/// `m,p_plus` rows.
pub fn exponent_csv(rows: &[(usize, f64)]) -> String {
    let mut out = String::from("m,p_plus\n");
    for (m, p) in rows {
        out.push_str(&format!("{},{}\n", m, fmt12(*p)));
    }
    out
}

/// `index,z` rows of a reliability vector, 1-based indices.
pub fn reliability_csv(z: &[f64]) -> String {
    let mut out = String::from("index,z\n");
    for (i, v) in z.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, fmt12(*v)));
    }
    out
}

/// One-row simulation report. `elapsed` is deliberately excluded so the
/// bytes are a pure function of `(spec, channel, trials, seed, partitions)`.
pub fn report_csv(spec: &CodeSpec, noise: &NoiseModel, report: &TrialReport) -> String {
    let mut out = String::from(
        "m,n,N,K,channel,trials,block_errors,bler,wilson_low,wilson_high,seed,partitions,rng\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        spec.m,
        spec.n,
        spec.code_len().unwrap_or(0),
        spec.k,
        noise,
        report.trials,
        report.block_errors,
        fmt12(report.bler),
        fmt12(report.wilson_low),
        fmt12(report.wilson_high),
        report.seed,
        report.partitions,
        RNG_NAME
    ));
    out
}

/// Serializes a code spec to JSON.
pub fn write_spec_json(spec: &CodeSpec) -> Result<String> {
    spec.validate()?;
    serde_json::to_string_pretty(spec).map_err(|e| Error::InvalidSpec(e.to_string()))
}

/// Parses and validates a code spec from JSON.
pub fn read_spec_json(json: &str) -> Result<CodeSpec> {
    let spec: CodeSpec =
        serde_json::from_str(json).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// Union bound on the SC block-error probability for an info set: sum of the
/// selected Bhattacharyya values.
pub fn union_bound(z: &[f64], info_set: &[usize]) -> f64 {
    info_set.iter().map(|&i| z[i - 1]).sum()
}

/// Largest level whose code length stays at or below `cap`.
pub fn largest_level_within(m: usize, cap: u64) -> Result<usize> {
    let mut n = 1usize;
    loop {
        let next = crate::geometry::code_length(n + 1, m)?;
        if next > cap {
            return Ok(n);
        }
        n += 1;
    }
}

/// Per-level geometry row: `(n, N, enc_complexity, dec_complexity, eta_enc, eta_dec)`.
pub type LevelRow = (usize, u64, u64, u64, f64, f64);

/// Per-level packing ratios for one memory order (used by `analyze`).
pub fn ratio_table(m: usize, n_max: usize) -> Result<Vec<LevelRow>> {
    let lengths = code_lengths(n_max, m)?;
    let mut rows = Vec::new();
    for (n, &len) in lengths.iter().enumerate().skip(1) {
        let enc = crate::geometry::encoding_complexity(n, m)?;
        let dec = crate::geometry::decoding_complexity(n, m)?;
        let (eta_e, eta_d) = if n >= 2 {
            (
                complexity_ratio(n, m, ComplexityKind::Encoding)?,
                complexity_ratio(n, m, ComplexityKind::Decoding)?,
            )
        } else {
            (f64::NAN, f64::NAN)
        };
        rows.push((n, len, enc, dec, eta_e, eta_d));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::design_bec_spec;

    #[test]
    fn noiseless_simulation_never_errs() {
        let spec = design_bec_spec(1, 4, 0.3, 8).unwrap();
        let report = simulate_bler(&spec, &NoiseModel::Bsc { p: 0.0 }, 500, 3, 4).unwrap();
        assert_eq!(report.block_errors, 0);
        assert_eq!(report.bler, 0.0);
        assert!(report.wilson_low <= report.bler && report.bler <= report.wilson_high);
    }

    #[test]
    fn same_seed_reproduces_the_report() {
        let spec = design_bec_spec(2, 8, 0.4, 15).unwrap();
        let noise = NoiseModel::Bec { eps: 0.4 };
        let a = simulate_bler(&spec, &noise, 2000, 99, 8).unwrap();
        let b = simulate_bler(&spec, &noise, 2000, 99, 8).unwrap();
        assert_eq!(a.block_errors, b.block_errors);
        assert_eq!(a.bler, b.bler);
        assert_eq!(report_csv(&spec, &noise, &a), report_csv(&spec, &noise, &b));
    }

    #[test]
    fn interval_contains_the_estimate() {
        for (e, t) in [(0u64, 100u64), (5, 100), (100, 100), (37, 1000)] {
            let (lo, hi) = wilson_interval(e, t);
            let p = e as f64 / t as f64;
            assert!(lo <= p && p <= hi, "({e}, {t})");
        }
    }

    #[test]
    fn nearest_level_prefers_larger_on_ties() {
        // m = 1: lengths 2, 4, 8, ...; target 6 ties 4 and 8
        assert_eq!(nearest_level(1, 6).unwrap(), (3, 8));
        assert_eq!(nearest_level(1, 10_000).unwrap(), (13, 8192));
        assert_eq!(nearest_level(1, 1_000_000).unwrap(), (20, 1_048_576));
    }

    #[test]
    fn complexity_rows_for_memory_one() {
        let rows = complexity_figure(&[1], &[10_000, 1_000_000]).unwrap();
        for r in &rows {
            assert_eq!(r.eta_dec, 1.0);
            assert_eq!(r.eta_enc, 0.5);
        }
    }

    #[test]
    fn exponent_rows() {
        let rows = exponent_figure(&[1, 2, 3]).unwrap();
        assert_eq!(rows[0], (1, 0.5));
        assert!((rows[1].1 - 0.4472).abs() < 1e-4);
        assert!(exponent_figure(&[300]).is_err());
    }

    #[test]
    fn csv_fields_parse_back() {
        let rows = complexity_figure(&[1, 2], &[100]).unwrap();
        let text = complexity_csv(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "m,target,N,eta_enc,eta_dec");
        for (line, row) in lines.zip(&rows) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 5);
            assert_eq!(fields[0].parse::<usize>().unwrap(), row.m);
            assert!((fields[3].parse::<f64>().unwrap() - row.eta_enc).abs() < 1e-12);
        }
        assert_eq!(fmt12(0.5), "5.00000000000e-1");
        assert_eq!(fmt12(0.0), "0");
    }

    #[test]
    fn spec_json_io_round_trips() {
        let spec = design_bec_spec(2, 5, 0.35, 6).unwrap();
        let json = write_spec_json(&spec).unwrap();
        assert_eq!(read_spec_json(&json).unwrap(), spec);
        assert!(read_spec_json("{\"m\":0}").is_err());
    }

    #[test]
    fn transmit_and_llr_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bec = NoiseModel::Bec { eps: 1.0 };
        assert_eq!(bec.transmit(true, &mut rng), ERASURE_SYMBOL);
        assert_eq!(bec.llr(ERASURE_SYMBOL), 0.0);
        let clean = NoiseModel::Bsc { p: 0.0 };
        assert_eq!(clean.transmit(true, &mut rng), 1);
        assert_eq!(clean.llr(1), f64::NEG_INFINITY);
        assert_eq!(clean.llr(0), f64::INFINITY);
        let bsc = NoiseModel::Bsc { p: 0.2 };
        assert!((bsc.llr(0) - (0.8f64 / 0.2).ln()).abs() < 1e-12);
        assert_eq!(bsc.llr(0), -bsc.llr(1));
    }
}
