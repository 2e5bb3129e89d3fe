//! Bit-channel reliability computation and information-set selection.
//!
//! For a BEC design channel every synthesized bit channel is again a BEC, so
//! reliabilities evolve exactly: with children at levels `n-1` and `n-m`
//! sharing index `j`,
//!
//! ```text
//! z_n(j)            = z_{n-1}(j) * z_{n-m}(j)                      j <= N(n-m)
//! z_n(j + N(n-1))   = z_{n-1}(j) + z_{n-m}(j) - z_{n-1}(j) z_{n-m}(j)
//! z_n(j)            = z_{n-1}(j)                    N(n-m) < j <= N(n-1)
//! ```
//!
//! with every level at or below 0 equal to the design erasure probability.
//! For other channels a genie-aided Monte Carlo estimate stands in. An
//! exhaustive bit-channel oracle covers tiny codes.

use rayon::prelude::*;

use crate::channel::DiscreteChannel;
use crate::decoder::DecoderWorkspace;
use crate::encoder::encode;
use crate::error::{Error, Result};
use crate::geometry::code_lengths;
use crate::sim::NoiseModel;
use crate::state::decode_sequence;

/// Branch budget for exact BEC evolution.
pub const MAX_ENSEMBLE_BRANCHES: u64 = 1 << 24;

/// Work budget (input patterns times output patterns) for the exhaustive
/// bit-channel oracle.
pub const MAX_EXHAUSTIVE_WORK: u128 = 1 << 28;

/// An erasure probability tracked in both linear and log2 form so that
/// doubly-exponentially small values survive underflow. `lin` may flush to
/// zero; `log2` stays meaningful.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ZVal {
    pub lin: f64,
    pub log2: f64,
}

fn log_add_exp2(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

impl ZVal {
    pub fn from_lin(z: f64) -> ZVal {
        ZVal { lin: z, log2: z.log2() }
    }

    /// Upgraded branch: product of the pair.
    pub fn plus(a: ZVal, b: ZVal) -> ZVal {
        ZVal {
            lin: a.lin * b.lin,
            log2: a.log2 + b.log2,
        }
    }

    /// Degraded branch: `a + b - ab`, switching to log space when the linear
    /// form underflows.
    pub fn minus(a: ZVal, b: ZVal) -> ZVal {
        let lin = a.lin + b.lin - a.lin * b.lin;
        if lin >= f64::MIN_POSITIVE {
            ZVal { lin, log2: lin.log2() }
        } else {
            // both terms are below the underflow line, so the cross term
            // is negligible against a + b
            let log2 = log_add_exp2(a.log2, b.log2);
            ZVal { lin: log2.exp2(), log2 }
        }
    }
}

/// Level-by-level exact evolution of the BEC reliability vector in the
/// channel-index layout. Shared by code construction and the
/// polarization-ensemble analysis.
pub(crate) struct BecEvolution {
    m: usize,
    level: usize,
    lengths: Vec<u64>,
    /// `window[k]` is the vector at level `level - k`; levels at or below 0
    /// are the single design value.
    window: Vec<Vec<ZVal>>,
}

impl BecEvolution {
    pub fn new(m: usize, eps: f64, n_max: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("memory order m must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::Domain(format!("erasure probability {eps} not in [0,1]")));
        }
        let lengths = code_lengths(n_max, m)?;
        if lengths[n_max] > MAX_ENSEMBLE_BRANCHES {
            return Err(Error::Budget(format!(
                "{} branches exceed the evolution budget",
                lengths[n_max]
            )));
        }
        let base = vec![ZVal::from_lin(eps)];
        Ok(BecEvolution {
            m,
            level: 0,
            lengths,
            window: vec![base; m],
        })
    }

    pub fn current(&self) -> &[ZVal] {
        &self.window[0]
    }

    /// Advances one combining level.
    pub fn advance(&mut self) {
        let next_level = self.level + 1;
        assert!(
            next_level < self.lengths.len(),
            "evolution advanced past its configured maximum level"
        );
        let n_l1 = self.lengths[next_level - 1] as usize;
        let n_lm = if next_level >= self.m {
            self.lengths[next_level - self.m] as usize
        } else {
            1
        };
        let cur = &self.window[0];
        let back = &self.window[self.m - 1];
        debug_assert_eq!(cur.len(), n_l1);
        debug_assert_eq!(back.len(), n_lm);
        let mut next = Vec::with_capacity(n_l1 + n_lm);
        for j in 0..n_lm {
            next.push(ZVal::plus(cur[j], back[j]));
        }
        next.extend_from_slice(&cur[n_lm..n_l1]);
        for j in 0..n_lm {
            next.push(ZVal::minus(cur[j], back[j]));
        }
        self.window.pop();
        self.window.insert(0, next);
        self.level = next_level;
    }
}

/// Per-channel-index Bhattacharyya values of one construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityVector {
    /// Entry `i - 1` holds the value of channel `i`; for a BEC design this is
    /// the exact erasure probability of bit channel `i`.
    pub z: Vec<f64>,
}

impl ReliabilityVector {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Exact per-index reliabilities for a BEC(`eps`) design at level `n`.
pub fn bec_reliabilities(n: usize, m: usize, eps: f64) -> Result<ReliabilityVector> {
    let mut evo = BecEvolution::new(m, eps, n)?;
    for _ in 0..n {
        evo.advance();
    }
    Ok(ReliabilityVector {
        z: evo.current().iter().map(|v| v.lin.clamp(0.0, 1.0)).collect(),
    })
}

/// The `k` most reliable (smallest `z`) channel indices, 1-based and sorted;
/// ties break toward the smaller index.
pub fn select_info_set(z: &[f64], k: usize) -> Result<Vec<usize>> {
    if k > z.len() {
        return Err(Error::Domain(format!(
            "cannot select {k} channels out of {}",
            z.len()
        )));
    }
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| z[a].partial_cmp(&z[b]).unwrap().then(a.cmp(&b)));
    let mut chosen: Vec<usize> = idx[..k].iter().map(|&i| i + 1).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Genie-aided Monte Carlo bit-error estimate per channel index.
///
/// Each trial encodes a uniform block, transmits it over `noise`, and runs a
/// genie-aided pass; errors are counted per index. Trials split across
/// `partitions` independent ChaCha8 streams (stream `t` of `seed`), so the
/// result is reproducible given `(seed, partitions)` regardless of thread
/// count.
pub fn mc_reliability_estimate(
    n: usize,
    m: usize,
    noise: &NoiseModel,
    trials: u64,
    seed: u64,
    partitions: u32,
) -> Result<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    if trials < 1 || partitions < 1 {
        return Err(Error::Domain("need trials >= 1 and partitions >= 1".into()));
    }
    noise.validate()?;
    let len = crate::geometry::code_length(n, m)? as usize;
    let per = trials / partitions as u64;
    let extra = trials % partitions as u64;
    let counts: Result<Vec<Vec<u64>>> = (0..partitions)
        .into_par_iter()
        .map(|t| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let my_trials = per + if (t as u64) < extra { 1 } else { 0 };
            let mut ws = DecoderWorkspace::new(n, m)?;
            let mut errs = vec![0u64; len];
            let mut u = vec![false; len];
            let mut llrs = vec![0.0f64; len];
            for _ in 0..my_trials {
                for b in u.iter_mut() {
                    *b = rng.gen();
                }
                let x = encode(&u, n, m)?;
                for (slot, &bit) in llrs.iter_mut().zip(&x) {
                    let sym = noise.transmit(bit, &mut rng);
                    *slot = noise.llr(sym);
                }
                ws.reset();
                let res = ws.genie_decode(&llrs, &u)?;
                for (e, &err) in errs.iter_mut().zip(&res.errors) {
                    *e += err as u64;
                }
            }
            Ok(errs)
        })
        .collect();
    let counts = counts?;
    let mut total = vec![0u64; len];
    for part in counts {
        for (t, c) in total.iter_mut().zip(part) {
            *t += c;
        }
    }
    Ok(total.into_iter().map(|c| c as f64 / trials as f64).collect())
}

fn exhaustive_context(n: usize, m: usize, i: usize) -> Result<(usize, Vec<usize>, Vec<usize>)> {
    let len = crate::geometry::code_length(n, m)? as usize;
    if i < 1 || i > len {
        return Err(Error::Domain(format!("channel index {i} outside 1..={len}")));
    }
    if len > 13 {
        return Err(Error::Budget(format!("exhaustive oracle limited to N <= 13, got {len}")));
    }
    let seq = decode_sequence(n, m)?;
    let rank = seq.iter().position(|&c| c == i).unwrap();
    let before: Vec<usize> = seq[..rank].iter().map(|&c| c - 1).collect();
    let after: Vec<usize> = seq[rank + 1..].iter().map(|&c| c - 1).collect();
    Ok((len, before, after))
}

/// Exact transition table of bit channel `i` (1-based): input is the bit at
/// channel `i`, outputs are pairs of the observation vector and the bits
/// decoded earlier.
///
/// Outputs flatten as `y_flat * 2^(pi(i)-1) + u_before_flat` where `y_flat`
/// reads the observations most-significant-first and `u_before_flat` packs
/// the earlier bits in decode order, earliest most significant.
pub fn exhaustive_bitchannel(
    n: usize,
    m: usize,
    i: usize,
    w: &DiscreteChannel,
) -> Result<DiscreteChannel> {
    let (len, before, _) = exhaustive_context(n, m, i)?;
    let work = (1u128 << len) * (w.outputs() as u128).pow(len as u32);
    if work > MAX_EXHAUSTIVE_WORK {
        return Err(Error::Budget(format!("exhaustive enumeration of {work} terms")));
    }
    let n_y = w.outputs();
    let y_patterns = n_y.pow(len as u32);
    let b = before.len();
    let outputs = y_patterns << b;
    let weight = 0.5f64.powi(len as i32 - 1);
    let mut rows = vec![vec![0.0f64; outputs]; 2];
    let mut u = vec![false; len];
    let mut y = vec![0usize; len];
    for pattern in 0u64..(1 << len) {
        for (k, bit) in u.iter_mut().enumerate() {
            *bit = pattern >> k & 1 == 1;
        }
        let x = encode(&u, n, m)?;
        let input = u[i - 1] as usize;
        let mut ub_flat = 0usize;
        for &pos in &before {
            ub_flat = ub_flat << 1 | u[pos] as usize;
        }
        // odometer over observation vectors, most significant digit first
        y.fill(0);
        let mut y_flat = 0usize;
        loop {
            let mut p = weight;
            for (k, &sym) in y.iter().enumerate() {
                p *= w.prob(x[k] as usize, sym);
            }
            rows[input][(y_flat << b) | ub_flat] += p;
            let mut k = len;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                y[k] += 1;
                if y[k] < n_y {
                    break;
                }
                y[k] = 0;
            }
            y_flat += 1;
            if y_flat == y_patterns {
                break;
            }
        }
    }
    DiscreteChannel::from_rows(&rows[0], &rows[1])
}

/// LLR `ln P(y, u_before | u_i = 0) / P(y, u_before | u_i = 1)` by literal
/// summation over the bits decoded after `i`, with the earlier bits fixed to
/// their true values. Independent of the decoder recursions.
pub fn exhaustive_posterior_llr(
    n: usize,
    m: usize,
    i: usize,
    w: &DiscreteChannel,
    y: &[usize],
    true_u: &[bool],
) -> Result<f64> {
    let (len, before, after) = exhaustive_context(n, m, i)?;
    if y.len() != len || true_u.len() != len {
        return Err(Error::Dimension {
            expected: len,
            got: y.len().min(true_u.len()),
        });
    }
    let mut sums = [0.0f64; 2];
    let mut u = vec![false; len];
    for &pos in &before {
        u[pos] = true_u[pos];
    }
    for (input, sum) in sums.iter_mut().enumerate() {
        u[i - 1] = input == 1;
        for pattern in 0u64..(1 << after.len()) {
            for (k, &pos) in after.iter().enumerate() {
                u[pos] = pattern >> k & 1 == 1;
            }
            let x = encode(&u, n, m)?;
            let mut p = 1.0;
            for (k, &sym) in y.iter().enumerate() {
                p *= w.prob(x[k] as usize, sym);
            }
            *sum += p;
        }
    }
    match (sums[0] > 0.0, sums[1] > 0.0) {
        (true, true) => Ok((sums[0] / sums[1]).ln()),
        (true, false) => Ok(f64::INFINITY),
        (false, true) => Ok(f64::NEG_INFINITY),
        (false, false) => Err(Error::Domain(
            "observation has zero probability under both hypotheses".into(),
        )),
    }
}

/// Builds a BEC code spec: exact reliabilities, the `k` best indices, zeros
/// elsewhere.
pub fn design_bec_spec(m: usize, n: usize, eps: f64, k: usize) -> Result<crate::encoder::CodeSpec> {
    use crate::encoder::{CodeSpec, DesignChannel, FrozenBit};
    let z = bec_reliabilities(n, m, eps)?;
    let info = select_info_set(&z.z, k)?;
    let mut is_info = vec![false; z.len() + 1];
    for &i in &info {
        is_info[i] = true;
    }
    let frozen = (1..=z.len())
        .filter(|&i| !is_info[i])
        .map(|i| FrozenBit { index: i, value: 0 })
        .collect();
    CodeSpec::new(m, n, DesignChannel::Bec { eps }, info, frozen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::transform_pair;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn reliabilities_base_and_one_step() {
        let r = bec_reliabilities(0, 3, 0.4).unwrap();
        assert_eq!(r.z, vec![0.4]);
        for m in 1..=4 {
            let r = bec_reliabilities(1, m, 0.5).unwrap();
            assert_eq!(r.z, vec![0.25, 0.75]);
        }
    }

    #[test]
    fn reliabilities_two_levels_memory_one() {
        let r = bec_reliabilities(2, 1, 0.5).unwrap();
        assert_eq!(r.z, vec![0.0625, 0.5625, 0.4375, 0.9375]);
    }

    #[test]
    fn capacity_conservation_level_by_level() {
        for (m, eps) in [(1, 0.5), (2, 0.3), (3, 0.8)] {
            let n_max = 14;
            let mut evo = BecEvolution::new(m, eps, n_max).unwrap();
            let cap = |v: &[ZVal]| v.iter().map(|z| 1.0 - z.lin).sum::<f64>();
            let mut history = vec![cap(evo.current())];
            for _ in 0..n_max {
                evo.advance();
                history.push(cap(evo.current()));
            }
            for l in 1..=n_max {
                let back = if l >= m { history[l - m] } else { 1.0 - eps };
                let expect = history[l - 1] + back;
                assert_close(history[l], expect, 1e-9 * history[l].max(1.0));
            }
        }
    }

    #[test]
    fn info_set_selection() {
        let z = bec_reliabilities(2, 1, 0.5).unwrap();
        assert_eq!(select_info_set(&z.z, 0).unwrap(), Vec::<usize>::new());
        assert_eq!(select_info_set(&z.z, 4).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(select_info_set(&z.z, 1).unwrap(), vec![1]);
        assert!(select_info_set(&z.z, 5).is_err());
        // ties break toward the smaller index
        assert_eq!(select_info_set(&[0.5, 0.5, 0.5], 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn exhaustive_level_one_matches_the_pair_transform() {
        for w in [
            DiscreteChannel::bsc(0.12).unwrap(),
            DiscreteChannel::bec(0.4).unwrap(),
        ] {
            let (minus, plus) = transform_pair(&w, &w).unwrap();
            // index 1 is upgraded, index 2 degraded
            let ch1 = exhaustive_bitchannel(1, 1, 1, &w).unwrap();
            let ch2 = exhaustive_bitchannel(1, 1, 2, &w).unwrap();
            assert_close(ch1.symmetric_capacity(), plus.symmetric_capacity(), 1e-10);
            assert_close(ch1.bhattacharyya(), plus.bhattacharyya(), 1e-10);
            assert_close(ch2.symmetric_capacity(), minus.symmetric_capacity(), 1e-10);
            assert_close(ch2.bhattacharyya(), minus.bhattacharyya(), 1e-10);
        }
    }

    #[test]
    fn exhaustive_bec_matches_recursive_reliabilities() {
        let eps = 0.55;
        let w = DiscreteChannel::bec(eps).unwrap();
        for (n, m) in [(2, 2), (2, 1)] {
            let z = bec_reliabilities(n, m, eps).unwrap();
            for i in 1..=z.len() {
                let ch = exhaustive_bitchannel(n, m, i, &w).unwrap();
                assert_close(ch.bhattacharyya(), z.z[i - 1], 1e-12);
            }
        }
    }

    #[test]
    fn exhaustive_sum_capacity_is_conserved() {
        let w = DiscreteChannel::bsc(0.2).unwrap();
        let m = 2;
        let sum_at = |n: usize| -> f64 {
            let len = crate::geometry::code_length(n, m).unwrap() as usize;
            (1..=len)
                .map(|i| {
                    exhaustive_bitchannel(n, m, i, &w)
                        .unwrap()
                        .symmetric_capacity()
                })
                .sum()
        };
        let s0 = w.symmetric_capacity();
        let s1 = sum_at(1);
        let s2 = sum_at(2);
        let s3 = sum_at(3);
        assert_close(s2, s1 + s0, 1e-9);
        assert_close(s3, s2 + s1, 1e-9);
    }

    #[test]
    fn mc_estimates_are_zero_on_a_noiseless_channel() {
        let est = mc_reliability_estimate(3, 2, &NoiseModel::Bsc { p: 0.0 }, 200, 1, 4).unwrap();
        assert!(est.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn mc_estimates_track_half_the_erasure_probability() {
        let (n, m, eps) = (5, 2, 0.3);
        let trials = 40_000u64;
        let z = bec_reliabilities(n, m, eps).unwrap();
        for seed in [11u64, 12] {
            let est =
                mc_reliability_estimate(n, m, &NoiseModel::Bec { eps }, trials, seed, 8).unwrap();
            for (idx, (&e, &zi)) in est.iter().zip(&z.z).enumerate() {
                let p = zi / 2.0;
                let sigma = (p * (1.0 - p) / trials as f64).sqrt();
                assert!(
                    (e - p).abs() <= 4.0 * sigma + 1e-9,
                    "seed {seed} index {}: est {e}, expect {p} +- {sigma}",
                    idx + 1
                );
            }
        }
        let a = mc_reliability_estimate(n, m, &NoiseModel::Bec { eps }, 2000, 11, 8).unwrap();
        let b = mc_reliability_estimate(n, m, &NoiseModel::Bec { eps }, 2000, 12, 8).unwrap();
        assert_ne!(a, b, "different seeds should give different estimates");
        let c = mc_reliability_estimate(n, m, &NoiseModel::Bec { eps }, 2000, 11, 8).unwrap();
        assert_eq!(a, c, "same seed must reproduce exactly");
    }

    #[test]
    fn designed_spec_is_valid_and_deterministic() {
        let spec = design_bec_spec(2, 6, 0.4, 5).unwrap();
        assert_eq!(spec.k, 5);
        spec.validate().unwrap();
        assert_eq!(spec, design_bec_spec(2, 6, 0.4, 5).unwrap());
    }

    #[test]
    fn budget_errors() {
        let w = DiscreteChannel::bec(0.5).unwrap();
        assert!(matches!(
            exhaustive_bitchannel(4, 1, 1, &w),
            Err(Error::Budget(_))
        ));
        let w2 = DiscreteChannel::bsc(0.1).unwrap();
        assert!(exhaustive_bitchannel(3, 1, 1, &w2).is_ok());
        // the posterior path only enumerates the later bits, so N = 13 on a
        // BEC is fine even though the full table would blow the budget
        let y = vec![0usize; 13];
        let u = vec![false; 13];
        assert!(matches!(exhaustive_bitchannel(5, 2, 1, &w), Err(Error::Budget(_))));
        assert!(exhaustive_posterior_llr(5, 2, 1, &w, &y, &u).is_ok());
    }
}
