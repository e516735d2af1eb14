//! Multi-generator AGC closed loops with Kalman-residue detection, and synthesis of
//! stealthy load-alteration plus false-data-injection attack vectors.
//!
//! Modules, bottom-up:
//! - [`numerics`]: matrices, `e^M`, Riccati solver, seeded streams.
//! - [`model`]: per-generator plants, discretization, gains, grid assembly, thresholds.
//! - [`sim`]: attacked closed-loop stepping, detector, success predicate, robustness.
//! - [`rl`]: attack environment, reward, DDPG learner.
//! - [`falsify`]: control-point search over false data with simulated annealing.

pub mod falsify;
pub mod model;
pub mod numerics;
pub mod rl;
pub mod sim;

use sha2::{Digest, Sha256};

/// Lower-case hex SHA-256 digest.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Formats a real with 9 significant digits in scientific notation.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{v:.8e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_answer() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(1.5), "1.50000000e0");
        assert_eq!(fmt_sig9(-0.000123456789), "-1.23456789e-4");
    }
}
