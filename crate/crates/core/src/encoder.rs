//! Generator-matrix construction and the fast recursive XOR-network encoder.
//!
//! The generator at level `n` is block-recursive: the first `N(n-1)` rows
//! hold the level `n-1` generator beside the level `n-m` generator padded
//! with zero rows; the remaining `N(n-m)` rows hold zeros beside the level
//! `n-m` generator. For `m = 1` this collapses to the n-fold Kronecker power
//! of `[[1,1],[0,1]]`.
//!
//! The network encoder realizes the same map in place. Input `j` of the level
//! `n-1` block carries `u[j]` directly; auxiliary input `j` of the level
//! `n-m` block carries `u[j] ^ u[j + N(n-1)]`. Decoder partial sums rely on
//! this index contract.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{code_length, code_lengths};

/// Largest `N` for which a dense generator matrix is materialized.
pub const MAX_MATRIX_LEN: u64 = 1 << 14;

/// Dense GF(2) generator matrix with bit-packed rows.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub n: usize,
    pub m: usize,
    size: usize,
    words_per_row: usize,
    rows: Vec<u64>,
}

impl GeneratorMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    /// Entry in row `r`, column `c` (0-based).
    pub fn bit(&self, r: usize, c: usize) -> bool {
        (self.rows[r * self.words_per_row + c / 64] >> (c % 64)) & 1 == 1
    }

    fn set_bit(&mut self, r: usize, c: usize) {
        self.rows[r * self.words_per_row + c / 64] |= 1 << (c % 64);
    }

    fn row_words(&self, r: usize) -> &[u64] {
        &self.rows[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    /// `u * G` over GF(2).
    pub fn mul_vec(&self, u: &[bool]) -> Result<Vec<bool>> {
        if u.len() != self.size {
            return Err(Error::Dimension {
                expected: self.size,
                got: u.len(),
            });
        }
        let mut acc = vec![0u64; self.words_per_row];
        for (r, &bit) in u.iter().enumerate() {
            if bit {
                for (a, w) in acc.iter_mut().zip(self.row_words(r)) {
                    *a ^= w;
                }
            }
        }
        Ok((0..self.size).map(|c| (acc[c / 64] >> (c % 64)) & 1 == 1).collect())
    }

    /// Rank over GF(2) equals the size (Gaussian elimination on a copy).
    pub fn is_invertible(&self) -> bool {
        let mut rows = self.rows.clone();
        let w = self.words_per_row;
        let mut rank = 0usize;
        for c in 0..self.size {
            let word = c / 64;
            let mask = 1u64 << (c % 64);
            let Some(pivot) = (rank..self.size).find(|&r| rows[r * w + word] & mask != 0) else {
                return false;
            };
            for k in 0..w {
                rows.swap(rank * w + k, pivot * w + k);
            }
            for r in 0..self.size {
                if r != rank && rows[r * w + word] & mask != 0 {
                    for k in 0..w {
                        let v = rows[rank * w + k];
                        rows[r * w + k] ^= v;
                    }
                }
            }
            rank += 1;
        }
        rank == self.size
    }
}

/// Builds the block-recursive generator for level `n`, memory `m`.
pub fn build_generator(n: usize, m: usize) -> Result<GeneratorMatrix> {
    if m < 1 {
        return Err(Error::Domain("memory order m must be >= 1".into()));
    }
    let lengths = code_lengths(n, m)?;
    if lengths[n] > MAX_MATRIX_LEN {
        return Err(Error::Budget(format!(
            "generator of size {} exceeds cap {MAX_MATRIX_LEN}",
            lengths[n]
        )));
    }
    let unit = |level: usize| -> GeneratorMatrix {
        let mut g = GeneratorMatrix {
            n: level,
            m,
            size: 1,
            words_per_row: 1,
            rows: vec![0],
        };
        g.set_bit(0, 0);
        g
    };
    if n == 0 {
        return Ok(unit(0));
    }
    // keep every level; sizes decay geometrically going down
    let mut per_level: Vec<GeneratorMatrix> = vec![unit(0)];
    for l in 1..=n {
        let size = lengths[l] as usize;
        let n_l1 = lengths[l - 1] as usize;
        let n_lm = if l >= m { lengths[l - m] as usize } else { 1 };
        let words = size.div_ceil(64);
        let mut g = GeneratorMatrix {
            n: l,
            m,
            size,
            words_per_row: words,
            rows: vec![0; size * words],
        };
        let prev = &per_level[l - 1];
        let back = if l >= m { &per_level[l - m] } else { &per_level[0] };
        for r in 0..n_l1 {
            for c in 0..n_l1 {
                if prev.bit(r, c) {
                    g.set_bit(r, c);
                }
            }
            if r < n_lm {
                for c in 0..n_lm {
                    if back.bit(r, c) {
                        g.set_bit(r, n_l1 + c);
                    }
                }
            }
        }
        for r in 0..n_lm {
            for c in 0..n_lm {
                if back.bit(r, c) {
                    g.set_bit(n_l1 + r, n_l1 + c);
                }
            }
        }
        per_level.push(g);
    }
    Ok(per_level.pop().unwrap())
}

fn encode_level(x: &mut [bool], level: isize, m: usize, lengths: &[u64], xors: &mut u64) {
    if level <= 0 {
        debug_assert_eq!(x.len(), 1);
        return;
    }
    let l = level as usize;
    let n_l1 = lengths[l - 1] as usize;
    let n_lm = if l >= m { lengths[l - m] as usize } else { 1 };
    for j in 0..n_lm {
        x[n_l1 + j] ^= x[j];
    }
    *xors += n_lm as u64;
    let (left, right) = x.split_at_mut(n_l1);
    encode_level(left, level - 1, m, lengths, xors);
    encode_level(right, level - m as isize, m, lengths, xors);
}

/// Recursive network encoding `x = u * G`, returning the codeword and the
/// number of XOR operations performed.
pub fn encode_counted(u: &[bool], n: usize, m: usize) -> Result<(Vec<bool>, u64)> {
    let lengths = code_lengths(n, m)?;
    let len = lengths[n] as usize;
    if u.len() != len {
        return Err(Error::Dimension {
            expected: len,
            got: u.len(),
        });
    }
    let mut x = u.to_vec();
    let mut xors = 0u64;
    encode_level(&mut x, n as isize, m, &lengths, &mut xors);
    Ok((x, xors))
}

/// Recursive network encoding `x = u * G`.
pub fn encode(u: &[bool], n: usize, m: usize) -> Result<Vec<bool>> {
    encode_counted(u, n, m).map(|(x, _)| x)
}

/// Design channel recorded in a code specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DesignChannel {
    #[serde(rename = "BEC")]
    Bec { eps: f64 },
    #[serde(rename = "BSC")]
    Bsc { p: f64 },
}

impl std::fmt::Display for DesignChannel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DesignChannel::Bec { eps } => write!(f, "BEC({eps})"),
            DesignChannel::Bsc { p } => write!(f, "BSC({p})"),
        }
    }
}

/// One frozen position and its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrozenBit {
    pub index: usize,
    pub value: u8,
}

/// Identity of one code instance: geometry, design channel, information set,
/// and frozen values. Channel indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub m: usize,
    pub n: usize,
    pub channel: DesignChannel,
    #[serde(rename = "K")]
    pub k: usize,
    /// Sorted 1-based information indices.
    pub info_set: Vec<usize>,
    /// Values for non-information indices; omitted indices freeze to 0.
    #[serde(default)]
    pub frozen: Vec<FrozenBit>,
}

impl CodeSpec {
    pub fn new(
        m: usize,
        n: usize,
        channel: DesignChannel,
        info_set: Vec<usize>,
        frozen: Vec<FrozenBit>,
    ) -> Result<Self> {
        let spec = CodeSpec {
            m,
            n,
            channel,
            k: info_set.len(),
            info_set,
            frozen,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Code length `N(n, m)`.
    pub fn code_len(&self) -> Result<u64> {
        code_length(self.n, self.m)
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.code_len()? as usize;
        if self.k != self.info_set.len() {
            return Err(Error::InvalidSpec(format!(
                "K = {} but info_set has {} entries",
                self.k,
                self.info_set.len()
            )));
        }
        let mut member = vec![false; len + 1];
        let mut prev = 0usize;
        for &i in &self.info_set {
            if i < 1 || i > len {
                return Err(Error::InvalidSpec(format!("info index {i} outside 1..={len}")));
            }
            if i <= prev {
                return Err(Error::InvalidSpec("info_set not sorted strictly ascending".into()));
            }
            member[i] = true;
            prev = i;
        }
        let mut frozen_seen = vec![false; len + 1];
        for fb in &self.frozen {
            if fb.index < 1 || fb.index > len {
                return Err(Error::InvalidSpec(format!(
                    "frozen index {} outside 1..={len}",
                    fb.index
                )));
            }
            if member[fb.index] {
                return Err(Error::InvalidSpec(format!(
                    "index {} is both frozen and informational",
                    fb.index
                )));
            }
            if frozen_seen[fb.index] {
                return Err(Error::InvalidSpec(format!("duplicate frozen index {}", fb.index)));
            }
            if fb.value > 1 {
                return Err(Error::InvalidSpec(format!(
                    "frozen value {} is not a bit",
                    fb.value
                )));
            }
            frozen_seen[fb.index] = true;
        }
        Ok(())
    }

    /// Per-index frozen values (`None` at information positions), 0-based.
    pub fn frozen_table(&self) -> Result<Vec<Option<bool>>> {
        let len = self.code_len()? as usize;
        let mut table = vec![Some(false); len];
        for &i in &self.info_set {
            table[i - 1] = None;
        }
        for fb in &self.frozen {
            table[fb.index - 1] = Some(fb.value == 1);
        }
        Ok(table)
    }
}

/// Places `msg` into the information positions, frozen values elsewhere, and
/// encodes.
pub fn encode_message(msg: &[bool], spec: &CodeSpec) -> Result<Vec<bool>> {
    spec.validate()?;
    if msg.len() != spec.k {
        return Err(Error::Dimension {
            expected: spec.k,
            got: msg.len(),
        });
    }
    let len = spec.code_len()? as usize;
    let mut u = vec![false; len];
    for fb in &spec.frozen {
        u[fb.index - 1] = fb.value == 1;
    }
    for (&i, &bit) in spec.info_set.iter().zip(msg) {
        u[i - 1] = bit;
    }
    encode(&u, spec.n, spec.m)
}
