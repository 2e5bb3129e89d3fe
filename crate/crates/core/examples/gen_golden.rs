//! Regenerates the golden tables under `tests/golden/`. These freeze the
//! exact finite-level values of the polarization quantities the acceptance
//! suite checks, so behavioral drift shows up as a byte diff:
//!
//! ```text
//! cargo run --release -p polarmem-core --example gen_golden
//! ```

use std::fmt::Write as _;
use std::path::Path;

use polarmem_core::geometry::achievable_exponent;
use polarmem_core::polarization::{evolve_ensemble, exponent_experiment, polarized_fractions};
use polarmem_core::sim::fmt12;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");

    // exact polarized fractions, m = 2, eps = 0.5, delta = 1e-3
    let mut text = String::from("n,N,frac_high,frac_low\n");
    for n in [7usize, 12, 17, 22, 27, 28] {
        let e = evolve_ensemble(n, 2, 0.5).unwrap();
        let (hi, lo) = polarized_fractions(&e, 1e-3).unwrap();
        writeln!(text, "{},{},{},{}", n, e.branch_count(), fmt12(hi), fmt12(lo)).unwrap();
    }
    std::fs::write(dir.join("polarized_fractions_m2_eps05.csv"), text).unwrap();

    // exact exponent-experiment probabilities at beta = p_plus -/+ 0.05
    let mut text = String::from("m,eps,n,p_below,p_above\n");
    for (m, eps, ladder) in [
        (1usize, 0.5, vec![8usize, 12, 16, 20]),
        (2, 0.8, vec![11, 12, 13, 14]),
        (2, 0.5, vec![12, 17, 22, 27]),
    ] {
        let p_plus = achievable_exponent(m);
        for n in ladder {
            let lo = exponent_experiment(n, m, eps, p_plus - 0.05).unwrap();
            let hi = exponent_experiment(n, m, eps, p_plus + 0.05).unwrap();
            writeln!(text, "{},{},{},{},{}", m, eps, n, fmt12(lo), fmt12(hi)).unwrap();
        }
    }
    std::fs::write(dir.join("exponent_experiment.csv"), text).unwrap();

    println!("golden tables rewritten under {}", dir.display());
}
