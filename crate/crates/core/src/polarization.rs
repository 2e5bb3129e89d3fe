//! Exact and sampled analysis of the polarization ensemble: per-branch
//! reliability evolution, cut-off rate traces, polarized fractions, the
//! doubly-exponential reliability threshold experiment, and the extremal-path
//! bound check.
//!
//! Every branch of the level-`n` state tree carries probability `1/N(n)`.
//! For a BEC design the per-branch Bhattacharyya values are exact and are
//! keyed by channel index, so construction and analysis share one evolution
//! routine. Values are tracked in linear and log2 form; thresholds compare in
//! log space because they fall doubly exponentially.

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::construction::{BecEvolution, ZVal};
use crate::error::{Error, Result};
use crate::geometry::{code_lengths, dominant_root};
use crate::state::{log2_biguint, StateSymbol, StateVector};

/// Default reliability threshold for polarized-fraction reporting.
pub const DEFAULT_DELTA: f64 = 1e-3;

/// Symbol budget for path sampling.
const MAX_SAMPLED_SYMBOLS: u64 = 1 << 27;

/// Exact per-branch reliabilities of the level-`n` ensemble, in channel-index
/// order; branch `i` is the channel with index `i + 1` and has probability
/// `1 / N(n)`.
#[derive(Debug, Clone)]
pub struct BranchEnsemble {
    pub m: usize,
    pub n: usize,
    pub eps: f64,
    pub z_lin: Vec<f64>,
    pub z_log2: Vec<f64>,
}

impl BranchEnsemble {
    pub fn branch_count(&self) -> usize {
        self.z_lin.len()
    }

    pub fn branch_probability(&self) -> f64 {
        1.0 / self.branch_count() as f64
    }

    /// State vector of each branch (memory permitting).
    pub fn state_vectors(&self) -> Result<Vec<StateVector>> {
        crate::state::assign_states(self.n, self.m)
    }
}

/// Per-level summary of the ensemble processes.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLevel {
    pub level: usize,
    pub code_len: u64,
    /// Mean cut-off rate over branches.
    pub e_j: f64,
    /// Mean symmetric capacity over branches (BEC: `1 - z`).
    pub e_i: f64,
    /// Fraction of branches with capacity above `1 - delta`.
    pub frac_high: f64,
    /// Fraction of branches with capacity below `delta`.
    pub frac_low: f64,
}

/// Level-indexed trace of the ensemble processes from level 0 upward.
#[derive(Debug, Clone)]
pub struct ProcessTrace {
    pub m: usize,
    pub eps: f64,
    pub delta: f64,
    pub levels: Vec<TraceLevel>,
}

impl ProcessTrace {
    /// `level,N,e_j,e_i,frac_high,frac_low` rows.
    pub fn to_csv(&self) -> String {
        use crate::sim::fmt12;
        let mut out = String::from("level,N,e_j,e_i,frac_high,frac_low\n");
        for l in &self.levels {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                l.level,
                l.code_len,
                fmt12(l.e_j),
                fmt12(l.e_i),
                fmt12(l.frac_high),
                fmt12(l.frac_low)
            ));
        }
        out
    }
}

fn level_stats(level: usize, code_len: u64, z: &[ZVal], delta: f64) -> TraceLevel {
    let n = z.len() as f64;
    let mut e_j = 0.0;
    let mut e_i = 0.0;
    let mut high = 0usize;
    let mut low = 0usize;
    for v in z {
        e_j += (2.0 / (1.0 + v.lin)).log2();
        e_i += 1.0 - v.lin;
        if v.lin < delta {
            high += 1;
        }
        if v.lin > 1.0 - delta {
            low += 1;
        }
    }
    TraceLevel {
        level,
        code_len,
        e_j: e_j / n,
        e_i: e_i / n,
        frac_high: high as f64 / n,
        frac_low: low as f64 / n,
    }
}

/// Evolves the exact BEC branch ensemble to level `n`.
pub fn evolve_ensemble(n: usize, m: usize, eps: f64) -> Result<BranchEnsemble> {
    let mut evo = BecEvolution::new(m, eps, n)?;
    for _ in 0..n {
        evo.advance();
    }
    let z = evo.current();
    Ok(BranchEnsemble {
        m,
        n,
        eps,
        z_lin: z.iter().map(|v| v.lin.clamp(0.0, 1.0)).collect(),
        z_log2: z.iter().map(|v| v.log2).collect(),
    })
}

/// Trace of `E[J]`, `E[I]`, and polarized fractions for levels `0..=n_max`
/// with the default threshold.
pub fn cutoff_sequence(n_max: usize, m: usize, eps: f64) -> Result<ProcessTrace> {
    cutoff_sequence_with_delta(n_max, m, eps, DEFAULT_DELTA)
}

/// [`cutoff_sequence`] with an explicit polarization threshold.
pub fn cutoff_sequence_with_delta(
    n_max: usize,
    m: usize,
    eps: f64,
    delta: f64,
) -> Result<ProcessTrace> {
    if !(0.0 < delta && delta < 0.5) {
        return Err(Error::Domain(format!("delta {delta} not in (0, 0.5)")));
    }
    let lengths = code_lengths(n_max, m)?;
    let mut evo = BecEvolution::new(m, eps, n_max)?;
    let mut levels = vec![level_stats(0, 1, evo.current(), delta)];
    for (l, &len) in lengths.iter().enumerate().skip(1) {
        evo.advance();
        levels.push(level_stats(l, len, evo.current(), delta));
    }
    Ok(ProcessTrace {
        m,
        eps,
        delta,
        levels,
    })
}

/// Fractions of branches with capacity above `1 - delta` and below `delta`.
pub fn polarized_fractions(ensemble: &BranchEnsemble, delta: f64) -> Result<(f64, f64)> {
    if !(0.0 < delta && delta < 0.5) {
        return Err(Error::Domain(format!("delta {delta} not in (0, 0.5)")));
    }
    let n = ensemble.branch_count() as f64;
    let high = ensemble.z_lin.iter().filter(|&&z| z < delta).count();
    let low = ensemble.z_lin.iter().filter(|&&z| z > 1.0 - delta).count();
    Ok((high as f64 / n, low as f64 / n))
}

/// Exact fraction of branches with `z <= 2^(-phi^(n beta))`, compared in log
/// space.
pub fn exponent_experiment(n: usize, m: usize, eps: f64, beta: f64) -> Result<f64> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::Domain(format!("beta {beta} not in (0, 1)")));
    }
    let ensemble = evolve_ensemble(n, m, eps)?;
    let threshold_log2 = -dominant_root(m).powf(n as f64 * beta);
    let hits = ensemble
        .z_log2
        .iter()
        .filter(|&&l| l <= threshold_log2)
        .count();
    Ok(hits as f64 / ensemble.branch_count() as f64)
}

fn zhat_check_params(n0: usize, n: usize, m: usize, gamma: f64, eps_slack: f64) -> Result<()> {
    if m < 1 || n <= n0 {
        return Err(Error::Domain("need m >= 1 and n > n0".into()));
    }
    if !(0.0 < gamma && gamma <= 1.0) {
        return Err(Error::Domain(format!("gamma {gamma} not in (0, 1]")));
    }
    if eps_slack <= 0.0 || eps_slack >= gamma {
        return Err(Error::Domain(format!(
            "slack {eps_slack} must lie in (0, gamma)"
        )));
    }
    Ok(())
}

/// Largest admissible starting value for [`zhat_worst_case`].
///
/// Two constraints intersect. The per-step budget `zeta <= 1 - phi^(-slack/2)`
/// covers a single degrading step, but every degrading block squares
/// `1 - zhat`, so after `c = floor((1-gamma)(n-n0)/m)` blocks the surviving
/// margin is `|log2(1 - (1-zeta)^(2^c))|`, and the upgrade phase can only win
/// if that margin still exceeds `phi^(-slack (n-n0))`. The cap solves the
/// second constraint with equality and takes the minimum of the two.
pub fn zhat_zeta_cap(n0: usize, n: usize, m: usize, gamma: f64, eps_slack: f64) -> Result<f64> {
    zhat_check_params(n0, n, m, gamma, eps_slack)?;
    let phi = dominant_root(m);
    let t = (n - n0) as f64;
    let per_step_cap = 1.0 - phi.powf(-eps_slack / 2.0);
    let blocks = ((1.0 - gamma) * t / m as f64).floor();
    // margin target r = phi^(-slack t); require 1 - (1-zeta)^(2^c) >= 1 - 2^(-r)
    let r = phi.powf(-eps_slack * t);
    let log_one_minus_2r = (-(-(r * std::f64::consts::LN_2)).exp_m1()).ln();
    let cascade_cap = 1.0 - (log_one_minus_2r * (-blocks).exp2()).exp();
    Ok(per_step_cap.min(cascade_cap).max(0.0))
}

/// Evolves the extremal path (all degraded-plus-pass-through blocks first,
/// then pure upgrades) from `zhat = zeta` at level `n0` and checks it against
/// the bound `log2 zhat <= -phi^((gamma - eps_slack)(n - n0))`.
///
/// Returns `(log2 zhat_n, bound_log2)`. `zeta` must stay at or below
/// [`zhat_zeta_cap`]; the block count rounds down, which only adds upgrades
/// and sharpens the path against the bound.
pub fn zhat_worst_case(
    n0: usize,
    n: usize,
    m: usize,
    gamma: f64,
    zeta: f64,
    eps_slack: f64,
) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&zeta) {
        return Err(Error::Domain(format!("zeta {zeta} not in [0, 1)")));
    }
    let zeta_cap = zhat_zeta_cap(n0, n, m, gamma, eps_slack)?;
    if zeta > zeta_cap {
        return Err(Error::Domain(format!(
            "zeta {zeta} exceeds the admissible cap {zeta_cap}"
        )));
    }
    let phi = dominant_root(m);
    let t = n - n0;
    let block_count = (((1.0 - gamma) * t as f64) / m as f64).floor() as usize;
    let plus_count = t - m * block_count;
    let mut window = vec![ZVal::from_lin(zeta); m];
    let step = |upgrade: bool, window: &mut Vec<ZVal>| {
        let cur = window[0];
        let back = window[m - 1];
        let next = if upgrade {
            ZVal::plus(cur, back)
        } else {
            ZVal::minus(cur, back)
        };
        window.pop();
        window.insert(0, next);
    };
    for _ in 0..block_count {
        step(false, &mut window);
        for _ in 0..m - 1 {
            let cur = window[0];
            window.pop();
            window.insert(0, cur);
        }
    }
    for _ in 0..plus_count {
        step(true, &mut window);
    }
    let zhat_log = window[0].log2;
    let bound_log = -phi.powf((gamma - eps_slack) * t as f64);
    if zhat_log > bound_log {
        return Err(Error::Domain(format!(
            "extremal path violates the bound: {zhat_log} > {bound_log}"
        )));
    }
    Ok((zhat_log, bound_log))
}

/// One uniformly sampled state-tree branch with its exact BEC reliability.
#[derive(Debug, Clone)]
pub struct SampledPath {
    pub symbols: StateVector,
    pub z_lin: f64,
    pub z_log2: f64,
}

impl SampledPath {
    pub fn minus_fraction(&self) -> f64 {
        self.symbols.count(StateSymbol::Minus) as f64 / self.symbols.len() as f64
    }
}

/// Continuation counts of the state automaton: `a[t][r]` is the number of
/// valid length-`t` completions starting with `r` pass-throughs owed.
fn continuation_counts(n: usize, m: usize) -> Vec<Vec<BigUint>> {
    let mut a = vec![vec![BigUint::one(); m]];
    for t in 1..=n {
        let prev = &a[t - 1];
        let mut row = Vec::with_capacity(m);
        row.push(&prev[0] + &prev[m - 1]);
        for r in 1..m {
            row.push(prev[r - 1].clone());
        }
        a.push(row);
    }
    a
}

/// Draws `count` branches uniformly from the level-`n` state tree using the
/// exact counting DP, evolving the BEC(`eps`) reliability along each path.
/// Deterministic given `seed`.
pub fn sample_state_paths(
    m: usize,
    n: usize,
    eps: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<SampledPath>> {
    if m < 1 || n < 1 {
        return Err(Error::Domain("sampling needs n >= 1, m >= 1".into()));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("erasure probability {eps} not in [0,1]")));
    }
    if (n as u64).saturating_mul(count as u64) > MAX_SAMPLED_SYMBOLS {
        return Err(Error::Budget(format!("{count} paths of length {n}")));
    }
    let counts = continuation_counts(n, m);
    let log2a: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| row.iter().map(log2_biguint).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut symbols = Vec::with_capacity(n);
        let mut window = vec![ZVal::from_lin(eps); m];
        let mut owed = 0usize;
        for k in 0..n {
            let remaining = n - k - 1;
            let sym = if owed > 0 {
                owed -= 1;
                StateSymbol::Star
            } else {
                let p_plus = (log2a[remaining][0] - log2a[remaining + 1][0]).exp2();
                if rng.gen::<f64>() < p_plus {
                    StateSymbol::Plus
                } else {
                    owed = m - 1;
                    StateSymbol::Minus
                }
            };
            let cur = window[0];
            let back = window[m - 1];
            let next = match sym {
                StateSymbol::Plus => ZVal::plus(cur, back),
                StateSymbol::Minus => ZVal::minus(cur, back),
                StateSymbol::Star => cur,
            };
            window.pop();
            window.insert(0, next);
            symbols.push(sym);
        }
        out.push(SampledPath {
            symbols: StateVector(symbols),
            z_lin: window[0].lin,
            z_log2: window[0].log2,
        });
    }
    Ok(out)
}
