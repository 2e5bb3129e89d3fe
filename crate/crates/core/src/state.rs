//! State-vector assignment for the synthesized bit channels, the bit-reversed
//! decode order, and exact type-class counting over the state automaton.
//!
//! Each bit channel at level `n` carries a unique vector over `{+, -, *}`
//! recording the transform applied at every combining level. A `-` is
//! followed by exactly `m - 1` pass-through `*` states unless the vector ends
//! first; the first state is `+` or `-`. Channel indices are 1-based at the
//! API surface.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::code_lengths;

/// Budget on `N * n` total symbols materialized by [`assign_states`].
pub const MAX_STATE_SYMBOLS: u64 = 1 << 28;

/// One combining step seen by a bit channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateSymbol {
    Plus,
    Minus,
    Star,
}

impl StateSymbol {
    pub fn as_char(self) -> char {
        match self {
            StateSymbol::Plus => '+',
            StateSymbol::Minus => '-',
            StateSymbol::Star => '*',
        }
    }
}

/// The transform history of one bit channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateVector(pub Vec<StateSymbol>);

impl StateVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[StateSymbol] {
        &self.0
    }

    /// Count of one symbol in the vector.
    pub fn count(&self, s: StateSymbol) -> usize {
        self.0.iter().filter(|&&x| x == s).count()
    }
}

impl std::fmt::Display for StateVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

/// Assigns the state vectors of all `N(n, m)` bit channels, indexed by
/// channel position (entry `i - 1` holds channel `i`).
///
/// Level `l` is built from level `l - 1`: channels `1..=N(l-m)` append `+`,
/// their partners `N(l-1)+1..=N(l)` append `-` to the same prefix, and
/// channels `N(l-m)+1..=N(l-1)` append `*`.
pub fn assign_states(n: usize, m: usize) -> Result<Vec<StateVector>> {
    if n < 1 || m < 1 {
        return Err(Error::Domain("assign_states needs n >= 1, m >= 1".into()));
    }
    let lengths = code_lengths(n, m)?;
    let len = lengths[n];
    if len.saturating_mul(n as u64) > MAX_STATE_SYMBOLS {
        return Err(Error::Budget(format!(
            "{len} state vectors of length {n} exceed the symbol budget"
        )));
    }
    let mut level: Vec<Vec<StateSymbol>> =
        vec![vec![StateSymbol::Plus], vec![StateSymbol::Minus]];
    for l in 2..=n {
        let n_l = lengths[l] as usize;
        let n_l1 = lengths[l - 1] as usize;
        let n_lm = if l >= m { lengths[l - m] as usize } else { 1 };
        let mut next: Vec<Vec<StateSymbol>> = Vec::with_capacity(n_l);
        for (j, prefix) in level.iter().enumerate() {
            let mut v = Vec::with_capacity(l);
            v.extend_from_slice(prefix);
            v.push(if j < n_lm { StateSymbol::Plus } else { StateSymbol::Star });
            next.push(v);
        }
        for prefix in level.iter().take(n_lm) {
            let mut v = Vec::with_capacity(l);
            v.extend_from_slice(prefix);
            v.push(StateSymbol::Minus);
            next.push(v);
        }
        debug_assert_eq!(next.len(), n_l);
        debug_assert_eq!(n_l, n_l1 + n_lm);
        level = next;
    }
    Ok(level.into_iter().map(StateVector).collect())
}

/// Whether `s` is a valid transform history for memory order `m`: starts with
/// `+` or `-`, every `-` is followed by `m - 1` stars (a run truncated by the
/// end of the vector may be shorter), and stars occur nowhere else.
pub fn validate_state_vector(s: &StateVector, m: usize) -> bool {
    if m < 1 || s.is_empty() {
        return false;
    }
    let mut stars_owed = 0usize;
    for (k, &sym) in s.0.iter().enumerate() {
        match sym {
            StateSymbol::Star => {
                if k == 0 || stars_owed == 0 {
                    return false;
                }
                stars_owed -= 1;
            }
            StateSymbol::Plus => {
                if stars_owed > 0 {
                    return false;
                }
            }
            StateSymbol::Minus => {
                if stars_owed > 0 {
                    return false;
                }
                stars_owed = m - 1;
            }
        }
    }
    true
}

/// Binary image of a state vector: bit `k` is 1 exactly when symbol `k`
/// is `+`.
pub fn to_binary(s: &StateVector) -> Vec<bool> {
    s.0.iter().map(|&sym| sym == StateSymbol::Plus).collect()
}

/// Bit-reversed decode order: entry `i - 1` holds `pi(i)`, the 1-based decode
/// position of channel `i`. Positions sort by the binary value of the image
/// vector with the first bit most significant.
pub fn bit_reversed_order(n: usize, m: usize) -> Result<Vec<usize>> {
    let states = assign_states(n, m)?;
    let images: Vec<Vec<bool>> = states.iter().map(to_binary).collect();
    let mut idx: Vec<usize> = (0..images.len()).collect();
    // lexicographic order of equal-length bit vectors is numeric order
    idx.sort_by(|&a, &b| images[a].cmp(&images[b]));
    let mut pi = vec![0usize; images.len()];
    for (rank, &i) in idx.iter().enumerate() {
        pi[i] = rank + 1;
    }
    Ok(pi)
}

/// Channel indices (1-based) in decode order: position `r` holds the channel
/// decoded at step `r + 1`.
pub fn decode_sequence(n: usize, m: usize) -> Result<Vec<usize>> {
    let pi = bit_reversed_order(n, m)?;
    let mut seq = vec![0usize; pi.len()];
    for (i, &rank) in pi.iter().enumerate() {
        seq[rank - 1] = i + 1;
    }
    Ok(seq)
}

/// One channel's position in the decode order, with its binary image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedCodeIndex {
    /// Channel index, 1-based.
    pub channel_index: usize,
    /// Binary image of the state vector, first bit most significant.
    pub binary: Vec<bool>,
    /// Decode position `pi(channel_index)`, 1-based.
    pub pi: usize,
}

/// The full index table at level `n`: entry `i - 1` describes channel `i`.
pub fn ordered_code_indices(n: usize, m: usize) -> Result<Vec<OrderedCodeIndex>> {
    let states = assign_states(n, m)?;
    let pi = bit_reversed_order(n, m)?;
    Ok(states
        .iter()
        .zip(pi)
        .enumerate()
        .map(|(i, (s, rank))| OrderedCodeIndex {
            channel_index: i + 1,
            binary: to_binary(s),
            pi: rank,
        })
        .collect())
}

/// Exact number of state vectors per count of `-` symbols.
#[derive(Debug, Clone)]
pub struct TypeClassTable {
    pub m: usize,
    pub n: usize,
    /// `counts[k]` = number of valid vectors containing exactly `k` minus
    /// symbols.
    pub counts: Vec<BigUint>,
}

impl TypeClassTable {
    /// Sum of all class sizes; equals `N(n, m)`.
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// Exact probability mass (branches are uniform) of classes whose minus
    /// fraction `k/n` lies within `eps` of `target`.
    pub fn mass_near(&self, target: f64, eps: f64) -> f64 {
        let total_log2 = log2_biguint(&self.total());
        let mut acc = BigUint::zero();
        for (k, c) in self.counts.iter().enumerate() {
            if (k as f64 / self.n as f64 - target).abs() <= eps {
                acc += c;
            }
        }
        if acc.is_zero() {
            return 0.0;
        }
        (log2_biguint(&acc) - total_log2).exp2().min(1.0)
    }
}

/// Counts state vectors by number of minus symbols with an exact DP over the
/// transform automaton (state = stars still owed).
pub fn count_type_classes(n: usize, m: usize) -> Result<TypeClassTable> {
    if n < 1 || m < 1 {
        return Err(Error::Domain("count_type_classes needs n >= 1, m >= 1".into()));
    }
    let k_max = n / m + 1;
    let width = k_max + 1;
    // dp[r * width + k]: vectors built so far that owe r stars and hold k minuses
    let mut dp = vec![BigUint::zero(); m * width];
    dp[0] = BigUint::one();
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); m * width];
        for r in 0..m {
            for k in 0..width {
                let cur = &dp[r * width + k];
                if cur.is_zero() {
                    continue;
                }
                if r == 0 {
                    // emit +
                    next[k] += cur;
                    // emit -, owing m-1 stars
                    if k + 1 < width {
                        next[(m - 1) * width + k + 1] += cur;
                    }
                } else {
                    // forced *
                    next[(r - 1) * width + k] += cur;
                }
            }
        }
        dp = next;
    }
    let mut counts = vec![BigUint::zero(); width];
    for r in 0..m {
        for k in 0..width {
            counts[k] += &dp[r * width + k];
        }
    }
    Ok(TypeClassTable { m, n, counts })
}

/// Exact mass of branches whose minus fraction is within `eps` of the typical
/// frequency `p_minus(m)`.
pub fn typical_mass(n: usize, m: usize, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Err(Error::Domain("typical_mass needs eps > 0".into()));
    }
    let table = count_type_classes(n, m)?;
    let p_minus = crate::geometry::typical_frequencies(m).p_minus;
    Ok(table.mass_near(p_minus, eps))
}

/// `log2` of a positive big integer, accurate to a few ulps.
pub(crate) fn log2_biguint(x: &BigUint) -> f64 {
    use num_traits::ToPrimitive;
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap().log2();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use StateSymbol::{Minus, Plus, Star};

    fn sv(syms: &[StateSymbol]) -> StateVector {
        StateVector(syms.to_vec())
    }

    #[test]
    fn level_one_assignment() {
        for m in 1..=4 {
            let states = assign_states(1, m).unwrap();
            assert_eq!(states, vec![sv(&[Plus]), sv(&[Minus])]);
        }
    }

    #[test]
    fn hand_checked_assignments() {
        let states = assign_states(2, 1).unwrap();
        assert_eq!(
            states,
            vec![
                sv(&[Plus, Plus]),
                sv(&[Minus, Plus]),
                sv(&[Plus, Minus]),
                sv(&[Minus, Minus]),
            ]
        );
        let states = assign_states(2, 2).unwrap();
        assert_eq!(
            states,
            vec![sv(&[Plus, Plus]), sv(&[Minus, Star]), sv(&[Plus, Minus])]
        );
    }

    #[test]
    fn assigned_vectors_are_valid_unique_and_counted() {
        for (n, m) in [(6, 1), (9, 2), (10, 3), (12, 5)] {
            let states = assign_states(n, m).unwrap();
            assert_eq!(states.len() as u64, crate::geometry::code_length(n, m).unwrap());
            let set: std::collections::HashSet<_> = states.iter().cloned().collect();
            assert_eq!(set.len(), states.len(), "duplicate state vectors");
            let images: std::collections::HashSet<_> = states.iter().map(to_binary).collect();
            assert_eq!(images.len(), states.len(), "duplicate binary images");
            for s in &states {
                assert!(validate_state_vector(s, m), "invalid vector {s}");
            }
        }
    }

    #[test]
    fn validator_rejects_malformed_vectors() {
        assert!(validate_state_vector(&sv(&[Plus, Minus, Star]), 2));
        assert!(!validate_state_vector(&sv(&[Minus, Plus]), 2));
        assert!(!validate_state_vector(&sv(&[Star, Plus]), 2));
        assert!(!validate_state_vector(&sv(&[Star, Plus]), 1));
        assert!(!validate_state_vector(&sv(&[Plus, Star]), 1));
        // truncated trailing star runs are valid
        assert!(validate_state_vector(&sv(&[Plus, Minus]), 3));
        assert!(validate_state_vector(&sv(&[Plus, Minus, Star]), 3));
        // an interior short run is not
        assert!(!validate_state_vector(&sv(&[Minus, Star, Plus]), 3));
    }

    #[test]
    fn assignment_budget_is_enforced() {
        assert!(matches!(
            assign_states(40, 1),
            Err(crate::error::Error::Budget(_))
        ));
    }

    #[test]
    fn binary_images() {
        assert_eq!(to_binary(&sv(&[Plus, Plus, Plus])), vec![true, true, true]);
        assert_eq!(to_binary(&sv(&[Plus, Minus, Star])), vec![true, false, false]);
        assert_eq!(to_binary(&sv(&[Minus, Star, Plus])), vec![false, false, true]);
    }

    #[test]
    fn bit_reversed_order_examples() {
        assert_eq!(bit_reversed_order(2, 1).unwrap(), vec![4, 2, 3, 1]);
        assert_eq!(bit_reversed_order(1, 1).unwrap(), vec![2, 1]);
        assert_eq!(bit_reversed_order(1, 3).unwrap(), vec![2, 1]);
    }

    #[test]
    fn ordered_index_table_is_consistent() {
        let table = ordered_code_indices(3, 2).unwrap();
        assert_eq!(table.len(), 5);
        // pi is a bijection and sorts by binary value, first bit most significant
        let mut ranks: Vec<usize> = table.iter().map(|e| e.pi).collect();
        ranks.sort_unstable();
        assert_eq!(ranks, (1..=5).collect::<Vec<_>>());
        for a in &table {
            for b in &table {
                if a.pi < b.pi {
                    assert!(a.binary < b.binary, "order disagrees with binary value");
                }
            }
        }
    }

    #[test]
    fn minus_partner_is_decoded_before_plus() {
        for (n, m) in [(5, 1), (8, 2), (9, 3)] {
            let lengths = code_lengths(n, m).unwrap();
            let pi = bit_reversed_order(n, m).unwrap();
            let n_l1 = lengths[n - 1] as usize;
            let n_lm = if n >= m { lengths[n - m] as usize } else { 1 };
            for j in 0..n_lm {
                assert!(
                    pi[j] > pi[j + n_l1],
                    "pi({}) must exceed pi({})",
                    j + 1,
                    j + 1 + n_l1
                );
            }
        }
    }

    #[test]
    fn shared_history_prefix() {
        for (n, m) in [(8, 2), (9, 3), (10, 4)] {
            let lengths = code_lengths(n, m).unwrap();
            let upper = assign_states(n - 1, m).unwrap();
            let lower = assign_states(n - m, m).unwrap();
            for j in 0..lengths[n - m] as usize {
                assert_eq!(
                    &upper[j].0[..n - m],
                    &lower[j].0[..],
                    "prefix mismatch at j = {}",
                    j + 1
                );
            }
        }
    }

    #[test]
    fn induced_order_consistency() {
        for (n, m) in [(6, 1), (9, 2), (10, 3)] {
            let lengths = code_lengths(n, m).unwrap();
            let seq = decode_sequence(n, m).unwrap();
            let n_l1 = lengths[n - 1] as usize;
            let mut seen = vec![false; n_l1];
            let mut parents = Vec::new();
            for &i in &seq {
                let parent = if i <= n_l1 { i } else { i - n_l1 };
                if !seen[parent - 1] {
                    seen[parent - 1] = true;
                    parents.push(parent);
                }
            }
            assert_eq!(parents, decode_sequence(n - 1, m).unwrap());
        }
    }

    #[test]
    fn type_class_counts_small_cases() {
        // m = 1: counts are binomial coefficients
        let t = count_type_classes(10, 1).unwrap();
        let mut binom = vec![BigUint::one()];
        for _ in 0..10 {
            let mut next = vec![BigUint::one()];
            for w in binom.windows(2) {
                next.push(&w[0] + &w[1]);
            }
            next.push(BigUint::one());
            binom = next;
        }
        assert_eq!(&t.counts[..11], &binom[..]);

        let t = count_type_classes(3, 2).unwrap();
        let as_u64: Vec<u64> = t.counts.iter().map(|c| u64::try_from(c).unwrap()).collect();
        assert_eq!(as_u64, vec![1, 3, 1]);
    }

    #[test]
    fn type_class_totals_match_code_length() {
        for (n, m) in [(20, 2), (15, 1), (25, 3), (30, 7)] {
            let t = count_type_classes(n, m).unwrap();
            assert_eq!(t.total(), BigUint::from(crate::geometry::code_length(n, m).unwrap()));
        }
        let t = count_type_classes(20, 2).unwrap();
        assert_eq!(t.total(), BigUint::from(17711u64));
    }

    #[test]
    fn counts_vanish_above_the_minus_cap() {
        for (n, m) in [(20, 2), (21, 4)] {
            let t = count_type_classes(n, m).unwrap();
            for (k, c) in t.counts.iter().enumerate() {
                if k as f64 > n as f64 / m as f64 + 1.0 {
                    assert!(c.is_zero());
                }
            }
        }
    }

    #[test]
    fn typical_mass_examples() {
        assert_eq!(typical_mass(50, 2, 1.0).unwrap(), 1.0);
        assert!(typical_mass(1000, 1, 0.05).unwrap() >= 0.99);
        let low = typical_mass(50, 2, 0.05).unwrap();
        let high = typical_mass(400, 2, 0.05).unwrap();
        assert!(high > low, "mass should grow with n: {low} -> {high}");
        assert!(typical_mass(50, 2, 0.0).is_err());
    }

    #[test]
    fn log2_biguint_accuracy() {
        let x = BigUint::from(1u64) << 200;
        assert!((log2_biguint(&x) - 200.0).abs() < 1e-9);
        let y = BigUint::from(3u64).pow(100);
        assert!((log2_biguint(&y) - 100.0 * 3f64.log2()) .abs() < 1e-9);
    }
}
