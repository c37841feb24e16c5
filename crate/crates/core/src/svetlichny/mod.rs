//! Svetlichny operators `S_N^± = sum_x nu±(x) A(x)` and everything built on
//! them.
//!
//! `x` ranges over N-bit strings selecting setting 0 or 1 for each party,
//! `A(x) = A_1^{x(1)} x ... x A_N^{x(N)}` and `nu±` depends only on the
//! Hamming weight of `x`.

mod appendix;
mod bounds;
mod engines;
mod gghz;
mod report;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{bloch_operator, BlochDirection, SingleQubitOperator, C64};

pub use appendix::{
    appendix_coefficients, consistency_check, hk_bounds, AppendixCoefficients, HkBounds,
};
pub use bounds::{
    active_branch, algebraic_cap, fmax, gghz_bound_alpha, gghz_bound_tangle, gghz_branches_alpha,
    gghz_branches_tangle, gghz_tangle_threshold, gmax, lhv_bound, ms_bound, ms_bound_tangle,
    optimal_settings_gghz, GghzBranch,
};
pub use engines::{
    expectation_bruteforce, expectation_dense, expectation_fast, BRUTEFORCE_MAX_QUBITS,
    IMAG_RESIDUE_TOL,
};
pub use gghz::{gghz_coefficients, gghz_components, gghz_expectation_closed, gghz_gradient_theta};
pub use report::{violation_report, BoundReport, VIOLATION_SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plus,
    Minus,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Plus, Variant::Minus];

    /// `+1` for plus, `-1` for minus.
    pub fn sign(self) -> i32 {
        match self {
            Variant::Plus => 1,
            Variant::Minus => -1,
        }
    }

    pub fn flipped(self) -> Variant {
        match self {
            Variant::Plus => Variant::Minus,
            Variant::Minus => Variant::Plus,
        }
    }

    /// `1 ± i`, the prefactor of the collapsed form `nu±(w) = Re[(1 ± i) i^w]`.
    pub(crate) fn phase(self) -> C64 {
        C64::new(1.0, self.sign() as f64)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Plus => "plus",
            Variant::Minus => "minus",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Variant::Plus),
            "minus" | "-" => Ok(Variant::Minus),
            other => Err(Error::invalid(format!("unknown variant {other:?}"))),
        }
    }
}

/// `(-1)^{w(w±1)/2}`.
pub fn nu(weight: u32, variant: Variant) -> i32 {
    let w = weight as u64;
    let exponent = match variant {
        Variant::Plus => w * (w + 1) / 2,
        Variant::Minus => w * w.saturating_sub(1) / 2,
    };
    if exponent % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `Re[(1 ± i) i^w]`, evaluated by exact integer arithmetic on Gaussian
/// integers. Used to check the complex collapse behind the fast engine.
pub fn nu_collapsed(weight: u32, variant: Variant) -> i32 {
    // (1 ± i) * i^w: multiplying by i maps (re, im) -> (-im, re).
    let (mut re, mut im) = (1i32, variant.sign());
    for _ in 0..(weight % 4) {
        (re, im) = (-im, re);
    }
    re
}

/// Hamming weight of the bit string selecting settings.
#[inline]
pub(crate) fn weight(x: usize) -> u32 {
    x.count_ones()
}

/// Setting bit of qubit `k` (1-based) in bit string `x`; qubit 1 is the most
/// significant bit, matching the statevector convention.
#[inline]
pub(crate) fn setting_bit(x: usize, n: usize, k: usize) -> usize {
    (x >> (n - k)) & 1
}

/// The two measurement directions of every party: `pairs[i][l]` is the
/// direction of `A_{i+1}^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSettings {
    pairs: Vec<[BlochDirection; 2]>,
}

impl MeasurementSettings {
    pub fn new(pairs: Vec<[BlochDirection; 2]>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid(
                "measurement settings need at least one party",
            ));
        }
        Ok(MeasurementSettings { pairs })
    }

    /// Every party uses the same two directions.
    pub fn uniform(n: usize, d0: BlochDirection, d1: BlochDirection) -> Result<Self> {
        Self::new(vec![[d0, d1]; n])
    }

    /// From `[theta0, phi0, theta1, phi1]` per party.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() || !angles.len().is_multiple_of(4) {
            return Err(Error::invalid(format!(
                "angle list of length {} is not 4 per party",
                angles.len()
            )));
        }
        Self::new(
            angles
                .chunks_exact(4)
                .map(|c| {
                    [
                        BlochDirection::new(c[0], c[1]),
                        BlochDirection::new(c[2], c[3]),
                    ]
                })
                .collect(),
        )
    }

    /// Area-uniform directions on the sphere: `theta = arccos(U[-1, 1])`,
    /// `phi = U[0, 2pi)`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut draw = || {
            let theta = rng.gen_range(-1.0f64..=1.0).acos();
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            BlochDirection::new(theta, phi)
        };
        let pairs = (0..n.max(1)).map(|_| [draw(), draw()]).collect();
        MeasurementSettings { pairs }
    }

    pub fn num_qubits(&self) -> usize {
        self.pairs.len()
    }

    /// Direction of `A_k^l`, `k` 1-based.
    pub fn direction(&self, k: usize, l: usize) -> BlochDirection {
        self.pairs[k - 1][l]
    }

    pub fn set_direction(&mut self, k: usize, l: usize, dir: BlochDirection) {
        self.pairs[k - 1][l] = dir;
    }

    pub fn pairs(&self) -> &[[BlochDirection; 2]] {
        &self.pairs
    }

    /// `[theta0, phi0, theta1, phi1]` per party, concatenated.
    pub fn to_angles(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .flat_map(|[a, b]| [a.theta(), a.phi(), b.theta(), b.phi()])
            .collect()
    }

    /// `A_i^0` and `A_i^1` for every party.
    pub fn operators(&self) -> Vec<[SingleQubitOperator; 2]> {
        self.pairs
            .iter()
            .map(|[a, b]| [bloch_operator(*a), bloch_operator(*b)])
            .collect()
    }

    pub(crate) fn check_qubits(&self, expected: usize) -> Result<()> {
        if self.num_qubits() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: self.num_qubits(),
            });
        }
        Ok(())
    }
}
