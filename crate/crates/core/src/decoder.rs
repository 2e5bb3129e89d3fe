//! Successive-cancellation decoding over the memory-`m` recursion with
//! sparsity-aware scheduling.
//!
//! A level-`l` block splits into a level `l-1` block over the first `N(l-1)`
//! observations and a level `l-m` block over the rest. Bits are decided in
//! bit-reversed order; within the schedule, the pair at index `j` combines
//! the two child values with the degraded (soft XOR) rule for the partner at
//! `j + N(l-1)` and the upgraded rule for `j` once the partner is known.
//! Indices `N(l-m)+1..=N(l-1)` pass through unchanged and cost nothing, so a
//! full decode performs exactly `decoding_complexity(n, m)` pair evaluations.
//!
//! Values are log-likelihood ratios `ln p(y|0)/p(y|1)`: finite or infinite,
//! never NaN; 0 encodes a full erasure. Ties decide 0. Decoding is greedy: an
//! observation inconsistent with the frozen constraints still yields a result
//! and is never rejected.

use crate::channel::DiscreteChannel;
use crate::encoder::CodeSpec;
use crate::error::{Error, Result};
use crate::geometry::code_lengths;

/// Soft combination rule for the degraded branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CombineRule {
    /// Exact log-domain soft XOR.
    #[default]
    Exact,
    /// Max-based (min-sum) approximation.
    MinSum,
}

/// Exact soft XOR of two LLRs. Zero encodes erasure and dominates; conflicting
/// certainties XOR to a certainty of the opposite sign.
pub fn boxplus(a: f64, b: f64) -> f64 {
    debug_assert!(!a.is_nan() && !b.is_nan());
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    if a.is_infinite() && b.is_infinite() {
        return if (a > 0.0) == (b > 0.0) {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
    }
    if a.is_infinite() {
        return if a > 0.0 { b } else { -b };
    }
    if b.is_infinite() {
        return if b > 0.0 { a } else { -a };
    }
    let sign = if (a > 0.0) == (b > 0.0) { 1.0 } else { -1.0 };
    sign * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

/// Min-sum approximation of [`boxplus`].
pub fn boxplus_min_sum(a: f64, b: f64) -> f64 {
    debug_assert!(!a.is_nan() && !b.is_nan());
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let sign = if (a > 0.0) == (b > 0.0) { 1.0 } else { -1.0 };
    sign * a.abs().min(b.abs())
}

/// Three-valued BEC observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BecSymbol {
    Zero,
    One,
    Erased,
}

impl BecSymbol {
    pub fn to_llr(self) -> f64 {
        match self {
            BecSymbol::Zero => f64::INFINITY,
            BecSymbol::One => f64::NEG_INFINITY,
            BecSymbol::Erased => 0.0,
        }
    }
}

trait PairAlgebra {
    type Val: Copy;
    fn minus(&self, a: Self::Val, b: Self::Val) -> Self::Val;
    fn plus(&self, a: Self::Val, b: Self::Val, partner: bool) -> Self::Val;
    fn decide(&self, v: Self::Val) -> bool;
    fn to_llr(&self, v: Self::Val) -> f64;
}

struct LlrAlgebra {
    rule: CombineRule,
}

impl PairAlgebra for LlrAlgebra {
    type Val = f64;

    fn minus(&self, a: f64, b: f64) -> f64 {
        match self.rule {
            CombineRule::Exact => boxplus(a, b),
            CombineRule::MinSum => boxplus_min_sum(a, b),
        }
    }

    fn plus(&self, a: f64, b: f64, partner: bool) -> f64 {
        let s = if partner { -b } else { b };
        if a.is_infinite() && s.is_infinite() && a != s {
            // conflicting certainties collapse to an erasure, never NaN
            0.0
        } else {
            a + s
        }
    }

    fn decide(&self, v: f64) -> bool {
        v < 0.0
    }

    fn to_llr(&self, v: f64) -> f64 {
        v
    }
}

struct ErasureAlgebra;

impl PairAlgebra for ErasureAlgebra {
    type Val = BecSymbol;

    fn minus(&self, a: BecSymbol, b: BecSymbol) -> BecSymbol {
        use BecSymbol::*;
        match (a, b) {
            (Erased, _) | (_, Erased) => Erased,
            (x, y) => {
                if x == y {
                    Zero
                } else {
                    One
                }
            }
        }
    }

    fn plus(&self, a: BecSymbol, b: BecSymbol, partner: bool) -> BecSymbol {
        use BecSymbol::*;
        let adj = match (b, partner) {
            (Zero, true) => One,
            (One, true) => Zero,
            (other, _) => other,
        };
        match (a, adj) {
            (Erased, v) => v,
            (v, Erased) => v,
            (x, y) => {
                if x == y {
                    x
                } else {
                    Erased
                }
            }
        }
    }

    fn decide(&self, v: BecSymbol) -> bool {
        v == BecSymbol::One
    }

    fn to_llr(&self, v: BecSymbol) -> f64 {
        v.to_llr()
    }
}

enum Phase<V> {
    Ready,
    MinusYielded { lam_l: V, lam_r: V },
    MinusFed { lam_l: V, lam_r: V, partner: bool },
    PlusYielded { partner: bool },
    StarYielded,
    LeafYielded,
}

struct Node<V> {
    level: isize,
    /// `N(level - m)`: leading indices of the left child that pair up.
    pair_count: usize,
    left: Option<Box<Node<V>>>,
    right: Option<Box<Node<V>>>,
    leaf_val: V,
    /// Position within the left child's decode order.
    cursor: usize,
    phase: Phase<V>,
}

impl<V: Copy> Node<V> {
    fn build(level: isize, m: usize, lengths: &[u64], zero: V) -> Node<V> {
        let (left, right, pair_count) = if level >= 1 {
            let l = level as usize;
            let n_lm = if l >= m { lengths[l - m] as usize } else { 1 };
            (
                Some(Box::new(Node::build(level - 1, m, lengths, zero))),
                Some(Box::new(Node::build(level - m as isize, m, lengths, zero))),
                n_lm,
            )
        } else {
            (None, None, 0)
        };
        Node {
            level,
            pair_count,
            left,
            right,
            leaf_val: zero,
            cursor: 0,
            phase: Phase::Ready,
        }
    }

    fn set_leaves(&mut self, values: &[V], pos: &mut usize) {
        if self.left.is_none() {
            self.leaf_val = values[*pos];
            *pos += 1;
            return;
        }
        self.left.as_mut().unwrap().set_leaves(values, pos);
        self.right.as_mut().unwrap().set_leaves(values, pos);
    }

    fn parent_order<'a>(&self, orders: &'a [Vec<u32>]) -> &'a [u32] {
        static LEAF_ORDER: [u32; 1] = [0];
        if self.level <= 1 {
            &LEAF_ORDER
        } else {
            &orders[self.level as usize - 1]
        }
    }

    fn next_val<A: PairAlgebra<Val = V>>(
        &mut self,
        alg: &A,
        orders: &[Vec<u32>],
        ops: &mut u64,
    ) -> V {
        if self.left.is_none() {
            debug_assert!(matches!(self.phase, Phase::Ready));
            self.phase = Phase::LeafYielded;
            return self.leaf_val;
        }
        match self.phase {
            Phase::Ready => {
                let j = self.parent_order(orders)[self.cursor] as usize;
                let lam_l = self.left.as_mut().unwrap().next_val(alg, orders, ops);
                if j < self.pair_count {
                    let lam_r = self.right.as_mut().unwrap().next_val(alg, orders, ops);
                    *ops += 1;
                    let v = alg.minus(lam_l, lam_r);
                    self.phase = Phase::MinusYielded { lam_l, lam_r };
                    v
                } else {
                    // pass-through: no pair evaluation
                    self.phase = Phase::StarYielded;
                    lam_l
                }
            }
            Phase::MinusFed { lam_l, lam_r, partner } => {
                *ops += 1;
                let v = alg.plus(lam_l, lam_r, partner);
                self.phase = Phase::PlusYielded { partner };
                v
            }
            _ => unreachable!("value requested before the previous decision was fed"),
        }
    }

    fn feed(&mut self, bit: bool) {
        if self.left.is_none() {
            debug_assert!(matches!(self.phase, Phase::LeafYielded));
            self.phase = Phase::Ready;
            return;
        }
        match self.phase {
            Phase::MinusYielded { lam_l, lam_r } => {
                self.phase = Phase::MinusFed {
                    lam_l,
                    lam_r,
                    partner: bit,
                };
            }
            Phase::PlusYielded { partner } => {
                self.left.as_mut().unwrap().feed(bit);
                self.right.as_mut().unwrap().feed(bit ^ partner);
                self.cursor += 1;
                self.phase = Phase::Ready;
            }
            Phase::StarYielded => {
                self.left.as_mut().unwrap().feed(bit);
                self.cursor += 1;
                self.phase = Phase::Ready;
            }
            _ => unreachable!("decision fed without a pending value"),
        }
    }
}

/// Output of one decode pass.
#[derive(Debug, Clone)]
pub struct DecodeResult {
    /// All `N` input bits, frozen positions forced to their frozen values.
    pub u_hat: Vec<bool>,
    /// Decision value of each bit in channel-index order.
    pub bit_llrs: Vec<f64>,
    /// Pair evaluations performed; equals `decoding_complexity(n, m)`.
    pub ops: u64,
}

/// Output of one genie-aided pass: decisions are compared against the true
/// bits but the true bits drive the partial sums.
#[derive(Debug, Clone)]
pub struct GenieResult {
    pub llrs: Vec<f64>,
    pub decisions: Vec<bool>,
    /// `decisions[i] != true_u[i]`
    pub errors: Vec<bool>,
    pub ops: u64,
}

/// Scheduling state for one SC decode pass. A workspace performs a single
/// pass; call [`DecoderWorkspace::reset`] before reusing it.
pub struct DecoderWorkspace {
    n: usize,
    m: usize,
    lengths: Vec<u64>,
    /// `orders[l]`: 0-based input indices of a level-`l` block in decode
    /// order; `orders[0] = [0]`.
    orders: Vec<Vec<u32>>,
    used: bool,
    ops: u64,
}

impl DecoderWorkspace {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 1 || m < 1 {
            return Err(Error::Domain("decoder needs n >= 1, m >= 1".into()));
        }
        let lengths = code_lengths(n, m)?;
        if lengths[n] > u32::MAX as u64 / 2 {
            return Err(Error::Budget(format!("code length {} too large to decode", lengths[n])));
        }
        let mut orders: Vec<Vec<u32>> = vec![vec![0]];
        for l in 1..=n {
            let n_l1 = lengths[l - 1] as u32;
            let n_lm = if l >= m { lengths[l - m] as u32 } else { 1 };
            let mut ord = Vec::with_capacity(lengths[l] as usize);
            for &j in &orders[l - 1] {
                if j < n_lm {
                    ord.push(j + n_l1);
                    ord.push(j);
                } else {
                    ord.push(j);
                }
            }
            debug_assert_eq!(ord.len() as u64, lengths[l]);
            orders.push(ord);
        }
        Ok(DecoderWorkspace {
            n,
            m,
            lengths,
            orders,
            used: false,
            ops: 0,
        })
    }

    pub fn code_len(&self) -> usize {
        self.lengths[self.n] as usize
    }

    /// Pair evaluations performed by the last pass.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// Channel indices (1-based) in decode order.
    pub fn decode_sequence(&self) -> Vec<usize> {
        self.orders[self.n].iter().map(|&j| j as usize + 1).collect()
    }

    /// Makes the workspace available for another pass.
    pub fn reset(&mut self) {
        self.used = false;
    }

    fn begin(&mut self) -> Result<()> {
        if self.used {
            return Err(Error::WorkspaceReused);
        }
        self.used = true;
        self.ops = 0;
        Ok(())
    }

    fn check_spec(&self, spec: &CodeSpec) -> Result<()> {
        if spec.n != self.n || spec.m != self.m {
            return Err(Error::InvalidSpec(format!(
                "spec is for (m, n) = ({}, {}), workspace for ({}, {})",
                spec.m, spec.n, self.m, self.n
            )));
        }
        spec.validate()
    }

    fn run<A: PairAlgebra>(
        &mut self,
        alg: &A,
        leaf_vals: &[A::Val],
        mut decide: impl FnMut(usize, bool) -> bool,
    ) -> (Vec<bool>, Vec<f64>)
    where
        A::Val: Copy,
    {
        let len = self.code_len();
        debug_assert_eq!(leaf_vals.len(), len);
        let mut root = Node::build(self.n as isize, self.m, &self.lengths, leaf_vals[0]);
        let mut pos = 0;
        root.set_leaves(leaf_vals, &mut pos);
        debug_assert_eq!(pos, len);
        let mut u_hat = vec![false; len];
        let mut llrs = vec![0.0; len];
        let mut ops = 0u64;
        for t in 0..len {
            let i = self.orders[self.n][t] as usize;
            let v = root.next_val(alg, &self.orders, &mut ops);
            let bit = decide(i, alg.decide(v));
            root.feed(bit);
            u_hat[i] = bit;
            llrs[i] = alg.to_llr(v);
        }
        self.ops = ops;
        (u_hat, llrs)
    }

    /// Decodes one block of channel LLRs under `spec`, exact combining.
    pub fn decode(&mut self, llr_in: &[f64], spec: &CodeSpec) -> Result<DecodeResult> {
        self.decode_with_rule(llr_in, spec, CombineRule::Exact)
    }

    /// Decodes with an explicit combining rule.
    pub fn decode_with_rule(
        &mut self,
        llr_in: &[f64],
        spec: &CodeSpec,
        rule: CombineRule,
    ) -> Result<DecodeResult> {
        self.check_spec(spec)?;
        self.check_llrs(llr_in)?;
        self.begin()?;
        let frozen = spec.frozen_table()?;
        let alg = LlrAlgebra { rule };
        let (u_hat, bit_llrs) =
            self.run(&alg, llr_in, |i, decided| frozen[i].unwrap_or(decided));
        Ok(DecodeResult {
            u_hat,
            bit_llrs,
            ops: self.ops,
        })
    }

    /// Decodes BEC observations through the three-valued erasure algebra.
    /// Decisions agree bit-for-bit with [`DecoderWorkspace::decode`] on the
    /// corresponding `{-inf, 0, +inf}` LLRs.
    pub fn decode_bec(&mut self, symbols: &[BecSymbol], spec: &CodeSpec) -> Result<DecodeResult> {
        self.check_spec(spec)?;
        if symbols.len() != self.code_len() {
            return Err(Error::Dimension {
                expected: self.code_len(),
                got: symbols.len(),
            });
        }
        self.begin()?;
        let frozen = spec.frozen_table()?;
        let (u_hat, bit_llrs) =
            self.run(&ErasureAlgebra, symbols, |i, decided| frozen[i].unwrap_or(decided));
        Ok(DecodeResult {
            u_hat,
            bit_llrs,
            ops: self.ops,
        })
    }

    /// Runs the decode recursions with the true bits fed back (genie-aided),
    /// recording the LLR and tie-to-zero decision each bit would have seen.
    pub fn genie_decode(&mut self, llr_in: &[f64], true_u: &[bool]) -> Result<GenieResult> {
        self.check_llrs(llr_in)?;
        if true_u.len() != self.code_len() {
            return Err(Error::Dimension {
                expected: self.code_len(),
                got: true_u.len(),
            });
        }
        self.begin()?;
        let alg = LlrAlgebra {
            rule: CombineRule::Exact,
        };
        let mut decisions = vec![false; self.code_len()];
        let (_, llrs) = self.run(&alg, llr_in, |i, decided| {
            decisions[i] = decided;
            true_u[i]
        });
        let errors = decisions
            .iter()
            .zip(true_u)
            .map(|(&d, &t)| d != t)
            .collect();
        Ok(GenieResult {
            llrs,
            decisions,
            errors,
            ops: self.ops,
        })
    }

    fn check_llrs(&self, llr_in: &[f64]) -> Result<()> {
        if llr_in.len() != self.code_len() {
            return Err(Error::Dimension {
                expected: self.code_len(),
                got: llr_in.len(),
            });
        }
        if llr_in.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("LLR input contains NaN".into()));
        }
        Ok(())
    }
}

/// LLR of bit `i` (1-based) given observations `y` and the true prior bits,
/// computed by the decode recursions over channel `w`.
pub fn genie_llr(
    n: usize,
    m: usize,
    i: usize,
    w: &DiscreteChannel,
    y: &[usize],
    true_u: &[bool],
) -> Result<f64> {
    let mut ws = DecoderWorkspace::new(n, m)?;
    if i < 1 || i > ws.code_len() {
        return Err(Error::Domain(format!("channel index {i} outside 1..={}", ws.code_len())));
    }
    let llr_in: Vec<f64> = y.iter().map(|&sym| w.llr(sym)).collect();
    let res = ws.genie_decode(&llr_in, true_u)?;
    Ok(res.llrs[i - 1])
}
