//! For memory order 1 the construction reduces to the classical polar code:
//! the network generator equals the Kronecker-power generator (up to the
//! standard index maps) and the SC decoder makes the same decisions as an
//! independently written textbook SC decoder.
//!
//! The reference below evaluates the classical recursive LLR definition
//! directly, decoding bits in natural order with odd/even interleaving:
//! `L^(2j-1) = f(L_A^(j) given u_odd^u_even, L_B^(j) given u_even)` on the
//! observation halves, and `L^(2j) = L_B^(j) + (-1)^(u_(2j-1)) L_A^(j)`.
//! Its generator is the bit-reversed Kronecker power of the lower-triangular
//! kernel: reference bit `r` (0-based, natural order) is the channel our
//! schedule decodes at step `r+1`, and reference observation `k` is our
//! observation `N-1-k`.

use polarmem_core::decoder::{boxplus, DecoderWorkspace};
use polarmem_core::encoder::{encode, CodeSpec, DesignChannel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn flip_combine(direct: f64, xor_side: f64, partner: bool) -> f64 {
    let s = if partner { -xor_side } else { xor_side };
    if direct.is_infinite() && s.is_infinite() && direct != s {
        0.0
    } else {
        direct + s
    }
}

/// Classical LLR of natural-order bit `i` (1-based) given earlier decisions,
/// evaluated straight from the recursive definition (O(N) per call).
fn reference_llr(llrs: &[f64], i: usize, prev: &[bool]) -> f64 {
    let n = llrs.len();
    debug_assert_eq!(prev.len(), i - 1);
    if n == 1 {
        return llrs[0];
    }
    let half = n / 2;
    let (y_a, y_b) = llrs.split_at(half);
    let j = i.div_ceil(2);
    let odd: Vec<bool> = prev.iter().step_by(2).copied().collect();
    let even: Vec<bool> = prev.iter().skip(1).step_by(2).copied().collect();
    let a_prev: Vec<bool> = odd
        .iter()
        .zip(&even)
        .take(j - 1)
        .map(|(&o, &e)| o ^ e)
        .collect();
    let la = reference_llr(y_a, j, &a_prev);
    let lb = reference_llr(y_b, j, &even);
    if i % 2 == 1 {
        boxplus(la, lb)
    } else {
        flip_combine(lb, la, prev[i - 2])
    }
}

/// Natural-order SC decode via the recursive definition.
fn reference_sc(llrs: &[f64], frozen: &[Option<bool>]) -> (Vec<bool>, Vec<f64>) {
    let n = llrs.len();
    let mut decided: Vec<bool> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 1..=n {
        let lam = reference_llr(llrs, i, &decided);
        values.push(lam);
        decided.push(frozen[i - 1].unwrap_or(lam < 0.0));
    }
    (decided, values)
}

/// Reference encoder for the same convention: bit `2j-1` enters only the
/// first half through the XOR, bit `2j` enters both halves.
fn reference_encode(u: &[bool]) -> Vec<bool> {
    let n = u.len();
    if n == 1 {
        return u.to_vec();
    }
    let half = n / 2;
    let combined: Vec<bool> = (0..half).map(|j| u[2 * j] ^ u[2 * j + 1]).collect();
    let even: Vec<bool> = (0..half).map(|j| u[2 * j + 1]).collect();
    let mut x = reference_encode(&combined);
    x.extend(reference_encode(&even));
    x
}

fn all_info_spec(n: usize) -> CodeSpec {
    let len = 1usize << n;
    CodeSpec::new(
        1,
        n,
        DesignChannel::Bec { eps: 0.5 },
        (1..=len).collect(),
        vec![],
    )
    .unwrap()
}

/// Reference bit `r` (0-based) is our channel `decode_seq[r]`; reference
/// observations are ours reversed.
struct ConventionMap {
    decode_seq: Vec<usize>,
}

impl ConventionMap {
    fn new(n: usize) -> Self {
        let ws = DecoderWorkspace::new(n, 1).unwrap();
        ConventionMap {
            decode_seq: ws.decode_sequence(),
        }
    }

    fn u_to_reference(&self, u_ours: &[bool]) -> Vec<bool> {
        self.decode_seq.iter().map(|&i| u_ours[i - 1]).collect()
    }

    fn y_to_reference(&self, y_ours: &[f64]) -> Vec<f64> {
        y_ours.iter().rev().copied().collect()
    }
}

#[test]
fn codebooks_coincide_under_the_index_maps() {
    for n in 1..=6 {
        let len = 1usize << n;
        let map = ConventionMap::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let u: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
            let ours = encode(&u, n, 1).unwrap();
            let theirs = reference_encode(&map.u_to_reference(&u));
            let ours_reversed: Vec<bool> = ours.iter().rev().copied().collect();
            assert_eq!(theirs, ours_reversed, "n = {n}");
        }
    }
}

#[test]
fn llr_values_match_the_recursive_definition_exhaustively() {
    // small blocks, every erasure/certainty pattern, genie-fed prefixes
    let n = 2;
    let len = 1usize << n;
    let map = ConventionMap::new(n);
    let spec = all_info_spec(n);
    let mut ws = DecoderWorkspace::new(n, 1).unwrap();
    let values = [f64::NEG_INFINITY, -0.7, 0.0, 1.3, f64::INFINITY];
    let mut pattern = vec![0usize; len];
    loop {
        let llrs: Vec<f64> = pattern.iter().map(|&k| values[k]).collect();
        ws.reset();
        let ours = ws.decode(&llrs, &spec).unwrap();
        let (theirs, ref_vals) = reference_sc(&map.y_to_reference(&llrs), &vec![None; len]);
        assert_eq!(map.u_to_reference(&ours.u_hat), theirs, "llrs {llrs:?}");
        let our_vals: Vec<f64> = map
            .decode_seq
            .iter()
            .map(|&i| ours.bit_llrs[i - 1])
            .collect();
        for (a, b) in our_vals.iter().zip(&ref_vals) {
            assert!(
                (a - b).abs() < 1e-12 || a == b,
                "value mismatch {our_vals:?} vs {ref_vals:?} on {llrs:?}"
            );
        }
        // odometer
        let mut k = 0;
        loop {
            if k == len {
                return;
            }
            pattern[k] += 1;
            if pattern[k] < values.len() {
                break;
            }
            pattern[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn decisions_match_the_textbook_decoder_at_n64() {
    let n = 6;
    let len = 1usize << n;
    let p = 0.1f64;
    let llr_mag = ((1.0 - p) / p).ln();
    let map = ConventionMap::new(n);
    let spec = all_info_spec(n);
    let mut ws = DecoderWorkspace::new(n, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _trial in 0..100 {
        let u: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
        let x = encode(&u, n, 1).unwrap();
        let llrs: Vec<f64> = x
            .iter()
            .map(|&b| {
                let received = b ^ rng.gen_bool(p);
                if received {
                    -llr_mag
                } else {
                    llr_mag
                }
            })
            .collect();
        ws.reset();
        let ours = ws.decode(&llrs, &spec).unwrap();
        let (theirs, _) = reference_sc(&map.y_to_reference(&llrs), &vec![None; len]);
        assert_eq!(
            map.u_to_reference(&ours.u_hat),
            theirs,
            "decision mismatch on a noisy BSC(0.1) block"
        );
    }
}

#[test]
fn decisions_match_with_frozen_bits_and_erasures() {
    let n = 5;
    let len = 1usize << n;
    let map = ConventionMap::new(n);
    let spec = polarmem_core::construction::design_bec_spec(1, n, 0.4, len / 2).unwrap();
    let frozen_table = spec.frozen_table().unwrap();
    let mut frozen_ref = vec![None; len];
    for (r, &i) in map.decode_seq.iter().enumerate() {
        frozen_ref[r] = frozen_table[i - 1];
    }
    let mut ws = DecoderWorkspace::new(n, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    for _ in 0..200 {
        let mut msg = vec![false; spec.k];
        for b in msg.iter_mut() {
            *b = rng.gen();
        }
        let x = polarmem_core::encoder::encode_message(&msg, &spec).unwrap();
        let llrs: Vec<f64> = x
            .iter()
            .map(|&b| {
                if rng.gen_bool(0.4) {
                    0.0
                } else if b {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        ws.reset();
        let ours = ws.decode(&llrs, &spec).unwrap();
        let (theirs, _) = reference_sc(&map.y_to_reference(&llrs), &frozen_ref);
        assert_eq!(map.u_to_reference(&ours.u_hat), theirs);
    }
}
