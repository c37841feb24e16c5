//! The GGHZ and maximal-slice state families and their n-tangle.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{apply_in_place, dot, SingleQubitOperator, StateVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gghz,
    Ms,
}

impl Family {
    pub fn min_qubits(self) -> usize {
        match self {
            Family::Gghz => 2,
            Family::Ms => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Gghz => "gghz",
            Family::Ms => "ms",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gghz" => Ok(Family::Gghz),
            "ms" => Ok(Family::Ms),
            other => Err(Error::invalid(format!("unknown family {other:?}"))),
        }
    }
}

/// One member of a state family: `(family, N, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParameter {
    pub family: Family,
    pub num_qubits: usize,
    pub alpha: f64,
}

impl FamilyParameter {
    pub fn new(family: Family, num_qubits: usize, alpha: f64) -> Result<Self> {
        check_qubits(family, num_qubits)?;
        check_alpha(alpha)?;
        Ok(FamilyParameter {
            family,
            num_qubits,
            alpha,
        })
    }

    pub fn state(&self) -> Result<StateVector> {
        match self.family {
            Family::Gghz => gghz(self.num_qubits, self.alpha),
            Family::Ms => ms(self.num_qubits, self.alpha),
        }
    }

    /// The family's parametric n-tangle, `None` where it is undefined
    /// (MS with odd N > 3).
    pub fn tangle(&self) -> Option<f64> {
        match self.family {
            Family::Gghz => Some(gghz_tangle(self.alpha)),
            Family::Ms => ms_tangle(self.num_qubits, self.alpha).ok(),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, pi/2]")));
    }
    Ok(())
}

fn check_qubits(family: Family, n: usize) -> Result<()> {
    let min = family.min_qubits();
    if n < min {
        return Err(Error::invalid(format!(
            "{family} states need N >= {min}, got {n}"
        )));
    }
    // 2^N amplitudes must fit comfortably in memory.
    if n > 30 {
        return Err(Error::TooManyQubits {
            what: "statevector",
            num_qubits: n,
            cap: 30,
        });
    }
    Ok(())
}

/// `cos(alpha)|0...0> + sin(alpha)|1...1>`.
pub fn gghz(n: usize, alpha: f64) -> Result<StateVector> {
    check_qubits(Family::Gghz, n)?;
    check_alpha(alpha)?;
    let dim = 1usize << n;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    amps[0] = C64::new(alpha.cos(), 0.0);
    amps[dim - 1] = C64::new(alpha.sin(), 0.0);
    StateVector::normalized(amps)
}

/// `(|0...0> + |1...1>(cos(alpha)|0> + sin(alpha)|1>)) / sqrt(2)`.
pub fn ms(n: usize, alpha: f64) -> Result<StateVector> {
    check_qubits(Family::Ms, n)?;
    check_alpha(alpha)?;
    let dim = 1usize << n;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[dim - 2] = C64::new(FRAC_1_SQRT_2 * alpha.cos(), 0.0);
    amps[dim - 1] = C64::new(FRAC_1_SQRT_2 * alpha.sin(), 0.0);
    StateVector::normalized(amps)
}

/// n-tangle of a pure state.
///
/// Even N: `|<psi| sigma_y^{xN} |psi*>|^2`. N = 3: the residual three-tangle
/// `4 |d1 - 2 d2 + 4 d3|` (Cayley hyperdeterminant). Odd N > 3 is rejected.
pub fn n_tangle_even(state: &StateVector) -> Result<f64> {
    let n = state.num_qubits();
    if n == 3 {
        return Ok(three_tangle(state.amplitudes()));
    }
    if n % 2 == 1 {
        return Err(Error::TangleUndefined(n));
    }
    let mut flipped: Vec<C64> = state.amplitudes().iter().map(|a| a.conj()).collect();
    let y = SingleQubitOperator::pauli_y();
    for k in 1..=n {
        apply_in_place(&mut flipped, n, k, &y);
    }
    Ok(dot(state.amplitudes(), &flipped).norm_sqr().min(1.0))
}

fn three_tangle(a: &[C64]) -> f64 {
    let g = |i: usize| a[i];
    let d1 = g(0) * g(0) * g(7) * g(7)
        + g(1) * g(1) * g(6) * g(6)
        + g(2) * g(2) * g(5) * g(5)
        + g(4) * g(4) * g(3) * g(3);
    let d2 = g(0) * g(7) * g(3) * g(4)
        + g(0) * g(7) * g(5) * g(2)
        + g(0) * g(7) * g(6) * g(1)
        + g(3) * g(4) * g(5) * g(2)
        + g(3) * g(4) * g(6) * g(1)
        + g(5) * g(2) * g(6) * g(1);
    let d3 = g(0) * g(6) * g(5) * g(3) + g(7) * g(1) * g(2) * g(4);
    (4.0 * (d1 - 2.0 * d2 + 4.0 * d3).norm()).min(1.0)
}

/// Parametric GGHZ n-tangle `sin^2(2 alpha)`, used for every N.
pub fn gghz_tangle(alpha: f64) -> f64 {
    (2.0 * alpha).sin().powi(2)
}

/// Parametric MS n-tangle `sin^2(alpha)`; defined for N = 3 and even N.
pub fn ms_tangle(n: usize, alpha: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!("MS states need N >= 3, got {n}")));
    }
    if n != 3 && n % 2 == 1 {
        return Err(Error::TangleUndefined(n));
    }
    Ok(alpha.sin().powi(2))
}

/// GGHZ angle in `[0, pi/4]` with tangle `tau`.
pub fn gghz_alpha_from_tangle(tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(0.5 * tau.sqrt().asin())
}

/// MS angle in `[0, pi/2]` with tangle `tau`.
pub fn ms_alpha_from_tangle(n: usize, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    ms_tangle(n, 0.0)?;
    Ok(tau.sqrt().asin())
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::invalid(format!("tau = {tau} outside [0, 1]")));
    }
    Ok(())
}
