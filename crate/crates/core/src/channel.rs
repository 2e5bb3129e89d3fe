//! Finite binary-input discrete-output channels, their information
//! functionals, and the single-step pair transforms that drive polarization.

use crate::error::{Error, Result};

/// Row sums of a transition table must be within this of 1.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Default cap on the output alphabet produced by [`transform_pair`].
pub const DEFAULT_ALPHABET_CAP: u64 = 1 << 20;

/// A binary-input channel given by its transition table `p(y|x)`,
/// `x ∈ {0,1}`, `y ∈ 0..outputs`.
///
/// Immutable after construction; rows sum to 1 within [`ROW_SUM_TOL`] and
/// every entry is nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel {
    outputs: usize,
    /// `probs[x * outputs + y]`
    probs: Vec<f64>,
}

impl DiscreteChannel {
    /// Builds a channel from its two rows `p(·|0)` and `p(·|1)`.
    pub fn from_rows(row0: &[f64], row1: &[f64]) -> Result<Self> {
        if row0.len() != row1.len() {
            return Err(Error::InvalidChannel(format!(
                "rows have different lengths {} and {}",
                row0.len(),
                row1.len()
            )));
        }
        if row0.is_empty() {
            return Err(Error::InvalidChannel("empty output alphabet".into()));
        }
        let mut probs = Vec::with_capacity(2 * row0.len());
        probs.extend_from_slice(row0);
        probs.extend_from_slice(row1);
        let ch = DiscreteChannel {
            outputs: row0.len(),
            probs,
        };
        ch.validate()?;
        Ok(ch)
    }

    fn validate(&self) -> Result<()> {
        for x in 0..2 {
            let row = self.row(x);
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::InvalidChannel(format!(
                    "row {x} contains a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidChannel(format!(
                    "row {x} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// The noiseless binary channel.
    pub fn identity() -> Self {
        DiscreteChannel {
            outputs: 2,
            probs: vec![1.0, 0.0, 0.0, 1.0],
        }
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidChannel(format!("BSC parameter {p} not in [0,1]")));
        }
        Self::from_rows(&[1.0 - p, p], &[p, 1.0 - p])
    }

    /// Binary erasure channel as a 3-output table; output 2 is the erasure.
    pub fn bec(eps: f64) -> Result<Self> {
        ErasureChannel::new(eps).map(|e| e.to_discrete())
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// `p(y|x)`.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.outputs + y]
    }

    fn row(&self, x: usize) -> &[f64] {
        &self.probs[x * self.outputs..(x + 1) * self.outputs]
    }

    /// Log-likelihood ratio `ln p(y|0)/p(y|1)` of a single observation.
    ///
    /// Returns `+inf`/`-inf` when one side has zero probability and 0 when
    /// the observation carries no information.
    pub fn llr(&self, y: usize) -> f64 {
        let p0 = self.prob(0, y);
        let p1 = self.prob(1, y);
        if p0 == p1 {
            0.0
        } else if p1 == 0.0 {
            f64::INFINITY
        } else if p0 == 0.0 {
            f64::NEG_INFINITY
        } else {
            (p0 / p1).ln()
        }
    }

    /// Symmetric capacity in bits, uniform input, base-2 logs.
    /// Zero-probability terms contribute 0.
    pub fn symmetric_capacity(&self) -> f64 {
        let mut sum = 0.0;
        for y in 0..self.outputs {
            let p0 = self.prob(0, y);
            let p1 = self.prob(1, y);
            let avg = 0.5 * (p0 + p1);
            for p in [p0, p1] {
                if p > 0.0 {
                    sum += 0.5 * p * (p / avg).log2();
                }
            }
        }
        sum
    }

    /// Bhattacharyya parameter `Z = Σ_y sqrt(p(y|0) p(y|1))`.
    pub fn bhattacharyya(&self) -> f64 {
        (0..self.outputs)
            .map(|y| (self.prob(0, y) * self.prob(1, y)).sqrt())
            .sum()
    }

    /// Symmetric cut-off rate `J = log2(2 / (1 + Z))`.
    pub fn cutoff_rate(&self) -> f64 {
        (2.0 / (1.0 + self.bhattacharyya())).log2()
    }
}

/// Binary erasure channel with erasure probability `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureChannel {
    eps: f64,
}

impl ErasureChannel {
    pub fn new(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidChannel(format!(
                "erasure probability {eps} not in [0,1]"
            )));
        }
        Ok(ErasureChannel { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Equivalent 3-output table: outputs are (bit 0, bit 1, erasure).
    pub fn to_discrete(&self) -> DiscreteChannel {
        let e = self.eps;
        DiscreteChannel {
            outputs: 3,
            probs: vec![1.0 - e, 0.0, e, 0.0, 1.0 - e, e],
        }
    }

    pub fn symmetric_capacity(&self) -> f64 {
        1.0 - self.eps
    }

    pub fn bhattacharyya(&self) -> f64 {
        self.eps
    }

    pub fn cutoff_rate(&self) -> f64 {
        (2.0 / (1.0 + self.eps)).log2()
    }
}

/// One-step transform of the erasure pair: the degraded channel has erasure
/// probability `a + b - ab`, the upgraded one `ab`.
pub fn bec_transform(a: ErasureChannel, b: ErasureChannel) -> (ErasureChannel, ErasureChannel) {
    let (ea, eb) = (a.eps, b.eps);
    (
        ErasureChannel { eps: ea + eb - ea * eb },
        ErasureChannel { eps: ea * eb },
    )
}

/// Splits the combined vector channel of `w1` and `w2` into the degraded
/// (`minus`) and upgraded (`plus`) binary-input channels, using the default
/// output-alphabet cap.
///
/// The minus channel has outputs `(y1, y2)` flattened as `y1 * |Y2| + y2`;
/// the plus channel has outputs `(y1, y2, x1)` flattened as
/// `(y1 * |Y2| + y2) * 2 + x1`. Output alphabets are never merged; equivalent
/// channels are compared through their functionals.
pub fn transform_pair(
    w1: &DiscreteChannel,
    w2: &DiscreteChannel,
) -> Result<(DiscreteChannel, DiscreteChannel)> {
    transform_pair_capped(w1, w2, DEFAULT_ALPHABET_CAP)
}

/// [`transform_pair`] with an explicit output-alphabet cap.
pub fn transform_pair_capped(
    w1: &DiscreteChannel,
    w2: &DiscreteChannel,
    cap: u64,
) -> Result<(DiscreteChannel, DiscreteChannel)> {
    let pair_outputs = w1.outputs as u128 * w2.outputs as u128;
    let plus_outputs = 2 * pair_outputs;
    if plus_outputs > cap as u128 {
        return Err(Error::AlphabetCap {
            required: plus_outputs,
            cap,
        });
    }
    let (n1, n2) = (w1.outputs, w2.outputs);
    let minus_n = n1 * n2;
    let mut minus = vec![0.0; 2 * minus_n];
    let mut plus = vec![0.0; 2 * 2 * minus_n];
    for y1 in 0..n1 {
        for y2 in 0..n2 {
            let pair = y1 * n2 + y2;
            for x1 in 0..2 {
                for x2 in 0..2 {
                    let p = 0.5 * w1.prob(x1 ^ x2, y1) * w2.prob(x2, y2);
                    // minus input is x1, output (y1, y2), summed over x2
                    minus[x1 * minus_n + pair] += p;
                    // plus input is x2, output (y1, y2, x1)
                    plus[x2 * 2 * minus_n + pair * 2 + x1] += p;
                }
            }
        }
    }
    let minus = DiscreteChannel {
        outputs: minus_n,
        probs: minus,
    };
    let plus = DiscreteChannel {
        outputs: 2 * minus_n,
        probs: plus,
    };
    debug_assert!(minus.validate().is_ok() && plus.validate().is_ok());
    Ok((minus, plus))
}
