//! Code-length recursion, characteristic-root analysis, typical state
//! frequencies, the achievable error exponent, and complexity recursions.
//!
//! The code length obeys `N(n) = N(n-1) + N(n-m)` with `N(k) = 1` for
//! `k <= 0`, so `N` grows like `phi^n` where `phi` is the unique real root of
//! `rho^m - rho^(m-1) - 1` in `(1, 2]`.

use crate::error::{Error, Result};

/// Memory order and combining level of one code instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryParams {
    pub m: usize,
    pub n: usize,
}

impl MemoryParams {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("memory order m must be >= 1".into()));
        }
        Ok(MemoryParams { m, n })
    }
}

/// Typical asymptotic frequencies of the three combining states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalFrequencies {
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_star: f64,
}

/// Geometry summary for one memory order: growth base, typical frequencies,
/// and the length table up to a level.
#[derive(Debug, Clone)]
pub struct GeometryReport {
    pub m: usize,
    pub phi: f64,
    pub freqs: TypicalFrequencies,
    /// `lengths[n] = N(n, m)` for `n = 0..=n_max`.
    pub lengths: Vec<u64>,
}

/// Characteristic polynomial `F(m, rho) = rho^m - rho^(m-1) - 1`.
pub fn char_poly(m: usize, rho: f64) -> f64 {
    rho.powi(m as i32) - rho.powi(m as i32 - 1) - 1.0
}

/// Largest real root of `F(m, ·)`, which lies in `(1, 2]`.
///
/// Bisection on `(1 + 1e-9, 2]`, 200 iterations; the root is unique there and
/// strictly decreasing in `m`. `m = 1` returns exactly 2.
pub fn dominant_root(m: usize) -> f64 {
    assert!(m >= 1, "memory order must be >= 1");
    if m == 1 {
        return 2.0;
    }
    let mut lo = 1.0 + 1e-9;
    let mut hi = 2.0;
    // F(lo) < 0 and F(2) = 2^(m-1) - 1 > 0 for m >= 2
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if char_poly(m, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    debug_assert!(char_poly(m, root).abs() <= 1e-12);
    root
}

/// `N(n, m)` for `n = 0..=n_max`, via the recursion with checked arithmetic.
pub fn code_lengths(n_max: usize, m: usize) -> Result<Vec<u64>> {
    if m < 1 {
        return Err(Error::Domain("memory order m must be >= 1".into()));
    }
    let mut lengths = Vec::with_capacity(n_max + 1);
    lengths.push(1u64); // N(0) = 1; all indices below 0 are also 1
    for n in 1..=n_max {
        let prev = lengths[n - 1];
        let back = if n >= m { lengths[n - m] } else { 1 };
        let v = prev
            .checked_add(back)
            .ok_or(Error::Overflow("code length recursion"))?;
        lengths.push(v);
    }
    Ok(lengths)
}

/// `N(n, m)`. Levels at or below 0 have length 1.
pub fn code_length(n: usize, m: usize) -> Result<u64> {
    Ok(*code_lengths(n, m)?.last().unwrap())
}

/// Typical frequencies `p_minus = (phi-1)/(1 + m(phi-1))`,
/// `p_star = (m-1) p_minus`, `p_plus = 1 - m p_minus`.
pub fn typical_frequencies(m: usize) -> TypicalFrequencies {
    let phi = dominant_root(m);
    let p_minus = (phi - 1.0) / (1.0 + m as f64 * (phi - 1.0));
    TypicalFrequencies {
        p_plus: 1.0 - m as f64 * p_minus,
        p_minus,
        p_star: (m as f64 - 1.0) * p_minus,
    }
}

/// Supremum of the achievable block-error exponent `beta`; equals `p_plus`
/// and is strictly decreasing in `m`.
pub fn achievable_exponent(m: usize) -> f64 {
    typical_frequencies(m).p_plus
}

/// Binary entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Exponential growth rate of the type class with a fraction `q` of minus
/// states: `G(m, q) = (1 - (m-1)q) H(q / (1 - (m-1)q))` for `q in [0, 1/m]`.
pub fn growth_function(m: usize, q: f64) -> Result<f64> {
    let limit = 1.0 / m as f64;
    if !(0.0..=limit + 1e-12).contains(&q) {
        return Err(Error::Domain(format!(
            "q = {q} outside [0, 1/{m}] for the growth function"
        )));
    }
    let q = q.min(limit);
    let scale = 1.0 - (m as f64 - 1.0) * q;
    let inner = (q / scale).clamp(0.0, 1.0);
    Ok(scale * binary_entropy(inner))
}

/// Divergence-style gap `log2(phi) - G(m, q)`; nonnegative, zero only at
/// `q = p_minus`.
pub fn divergence(m: usize, q: f64) -> Result<f64> {
    let gap = dominant_root(m).log2() - growth_function(m, q)?;
    // the maximum of G equals log2(phi); tolerate rounding at the peak
    debug_assert!(gap >= -1e-12);
    Ok(gap.max(0.0))
}

fn complexity_recursion(n: usize, m: usize, weight: u64) -> Result<u64> {
    if n < 1 || m < 1 {
        return Err(Error::Domain("complexity recursion needs n >= 1, m >= 1".into()));
    }
    let lengths = code_lengths(n, m)?;
    let len_at = |k: isize| -> u64 {
        if k <= 0 {
            1
        } else {
            lengths[k as usize]
        }
    };
    let mut chi = vec![0u64; n + 1]; // chi[k] = 0 for k <= 0
    for k in 1..=n {
        let prev = chi[k - 1];
        let back = if k >= m { chi[k - m] } else { 0 };
        let add = weight
            .checked_mul(len_at(k as isize - m as isize))
            .ok_or(Error::Overflow("complexity recursion"))?;
        chi[k] = prev
            .checked_add(back)
            .and_then(|v| v.checked_add(add))
            .ok_or(Error::Overflow("complexity recursion"))?;
    }
    Ok(chi[n])
}

/// Number of XOR operations performed by the recursive encoder:
/// `chi_E(n) = chi_E(n-1) + chi_E(n-m) + N(n-m)` with `chi_E(k) = 0` for
/// `k <= 0`.
pub fn encoding_complexity(n: usize, m: usize) -> Result<u64> {
    complexity_recursion(n, m, 1)
}

/// Number of pair LR evaluations performed by one full SC decode:
/// `chi_D(n) = chi_D(n-1) + chi_D(n-m) + 2 N(n-m)` with `chi_D(k) = 0` for
/// `k <= 0`.
pub fn decoding_complexity(n: usize, m: usize) -> Result<u64> {
    complexity_recursion(n, m, 2)
}

/// Which complexity a ratio refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexityKind {
    Encoding,
    Decoding,
}

/// Packing ratio `chi / (N log2 N)`. Meaningful for `n >= 2`.
pub fn complexity_ratio(n: usize, m: usize, kind: ComplexityKind) -> Result<f64> {
    let chi = match kind {
        ComplexityKind::Encoding => encoding_complexity(n, m)?,
        ComplexityKind::Decoding => decoding_complexity(n, m)?,
    };
    let len = code_length(n, m)? as f64;
    Ok(chi as f64 / (len * len.log2()))
}

/// Geometry summary up to level `n_max`.
pub fn geometry_report(m: usize, n_max: usize) -> Result<GeometryReport> {
    Ok(GeometryReport {
        m,
        phi: dominant_root(m),
        freqs: typical_frequencies(m),
        lengths: code_lengths(n_max, m)?,
    })
}
