//! Complex linear algebra for N-qubit pure states.
//!
//! Basis index convention: qubit 1 is the most significant bit, so the
//! amplitude of `|b_1 b_2 ... b_N>` lives at index `sum_i b_i * 2^(N-i)` and
//! `|0...0>` is index 0.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on `sum |a_k|^2 = 1` for constructed states.
pub const NORM_TOL: f64 = 1e-12;

/// Largest register the dense Kronecker oracle will build.
pub const DENSE_MAX_QUBITS: usize = 8;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

impl StateVector {
    /// Builds a normalized state; fails if the squared norm is off by more
    /// than [`NORM_TOL`].
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let state = StateVector {
            num_qubits,
            amplitudes,
        };
        let n2 = state.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(state)
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let n2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(n2.is_finite() && n2 > 0.0) {
            return Err(Error::NotNormalized(n2));
        }
        let scale = n2.sqrt().recip();
        Ok(StateVector {
            num_qubits,
            amplitudes: amplitudes.into_iter().map(|a| a * scale).collect(),
        })
    }

    /// Wraps an amplitude array without any norm check. Operator images
    /// (`O|psi>`) are generally not normalized.
    pub fn unnormalized(amplitudes: Vec<C64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::invalid("a register needs at least one qubit"));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    /// Complex conjugate in the computational basis.
    pub fn conj(&self) -> StateVector {
        StateVector {
            num_qubits: self.num_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect(),
        }
    }
}

/// Measurement direction on the Bloch sphere, stored in canonical form
/// `theta in [0, pi]`, `phi in [0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDirection {
    theta: f64,
    phi: f64,
}

impl BlochDirection {
    /// Accepts any finite angles and folds them into the canonical ranges
    /// without changing the direction they describe.
    pub fn new(theta: f64, phi: f64) -> Self {
        debug_assert!(theta.is_finite() && phi.is_finite());
        let tau = std::f64::consts::TAU;
        let mut theta = theta.rem_euclid(tau);
        let mut phi = phi;
        if theta > std::f64::consts::PI {
            theta = tau - theta;
            phi += std::f64::consts::PI;
        }
        let mut phi = phi.rem_euclid(tau);
        if phi >= tau {
            phi = 0.0;
        }
        BlochDirection { theta, phi }
    }

    /// Direction of a nonzero 3-vector.
    pub fn from_vector(v: [f64; 3]) -> Option<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return None;
        }
        let theta = (v[2] / norm).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]);
        Some(BlochDirection::new(theta, phi))
    }

    pub fn z() -> Self {
        BlochDirection::new(0.0, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `(sin t cos p, sin t sin p, cos t)`.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// A 2x2 complex matrix acting on one qubit, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitOperator {
    pub entries: [[C64; 2]; 2],
}

impl SingleQubitOperator {
    pub const fn new(entries: [[C64; 2]; 2]) -> Self {
        SingleQubitOperator { entries }
    }

    pub const fn zero() -> Self {
        Self::new([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn pauli_x() -> Self {
        Self::new([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn pauli_y() -> Self {
        Self::new([[ZERO, C64::new(0.0, -1.0)], [I, ZERO]])
    }

    pub const fn pauli_z() -> Self {
        Self::new([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]])
    }

    pub fn paulis() -> [Self; 3] {
        [Self::pauli_x(), Self::pauli_y(), Self::pauli_z()]
    }

    pub fn scale(&self, c: C64) -> Self {
        let e = &self.entries;
        Self::new([[e[0][0] * c, e[0][1] * c], [e[1][0] * c, e[1][1] * c]])
    }

    pub fn dagger(&self) -> Self {
        let e = &self.entries;
        Self::new([
            [e[0][0].conj(), e[1][0].conj()],
            [e[0][1].conj(), e[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> C64 {
        self.entries[0][0] + self.entries[1][1]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.entries[r][c] - other.entries[r][c]).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.dagger()) <= tol
    }
}

impl Add for SingleQubitOperator {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let (a, b) = (&self.entries, &rhs.entries);
        Self::new([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Mul for SingleQubitOperator {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.entries, &rhs.entries);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self::new(out)
    }
}

/// The observable `v . sigma` for the unit vector of `dir`.
pub fn bloch_operator(dir: BlochDirection) -> SingleQubitOperator {
    let [x, y, z] = dir.unit_vector();
    SingleQubitOperator::new([
        [C64::new(z, 0.0), C64::new(x, -y)],
        [C64::new(x, y), C64::new(-z, 0.0)],
    ])
}

/// Applies `op` to qubit `qubit` (1-based) of a raw amplitude buffer holding
/// `num_qubits` qubits.
pub(crate) fn apply_in_place(
    amplitudes: &mut [C64],
    num_qubits: usize,
    qubit: usize,
    op: &SingleQubitOperator,
) {
    debug_assert!(qubit >= 1 && qubit <= num_qubits);
    let stride = 1usize << (num_qubits - qubit);
    let [[m00, m01], [m10, m11]] = op.entries;
    for block in amplitudes.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x0, x1) = (*a0, *a1);
            *a0 = m00 * x0 + m01 * x1;
            *a1 = m10 * x0 + m11 * x1;
        }
    }
}

fn check_qubit(state: &StateVector, qubit_index: usize) -> Result<()> {
    if qubit_index == 0 || qubit_index > state.num_qubits {
        return Err(Error::QubitIndexOutOfRange {
            index: qubit_index,
            num_qubits: state.num_qubits,
        });
    }
    Ok(())
}

/// `(I x ... x op x ... x I)|psi>` with `op` on qubit `qubit_index`
/// (1-based). The result is not renormalized.
pub fn apply_single_qubit(
    state: &StateVector,
    qubit_index: usize,
    op: &SingleQubitOperator,
) -> Result<StateVector> {
    check_qubit(state, qubit_index)?;
    let mut amplitudes = state.amplitudes.clone();
    apply_in_place(&mut amplitudes, state.num_qubits, qubit_index, op);
    Ok(StateVector {
        num_qubits: state.num_qubits,
        amplitudes,
    })
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: a.num_qubits,
            actual: b.num_qubits,
        });
    }
    Ok(dot(&a.amplitudes, &b.amplitudes))
}

/// `<psi| op_1 x op_2 x ... x op_N |psi>` through the matrix-free kernel.
pub fn product_expectation(state: &StateVector, ops: &[SingleQubitOperator]) -> Result<C64> {
    if ops.len() != state.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: state.num_qubits,
            actual: ops.len(),
        });
    }
    let mut work = state.amplitudes.clone();
    for (k, op) in ops.iter().enumerate() {
        apply_in_place(&mut work, state.num_qubits, k + 1, op);
    }
    Ok(dot(&state.amplitudes, &work))
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.trailing_zeros() as usize,
                actual: state.num_qubits,
            });
        }
        let amplitudes = self
            .data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(&state.amplitudes).map(|(m, a)| m * a).sum())
            .collect();
        StateVector::unnormalized(amplitudes)
    }

    /// `<psi|M|psi>`.
    pub fn sandwich(&self, state: &StateVector) -> Result<C64> {
        let image = self.apply(state)?;
        inner_product(state, &image)
    }
}

/// Kronecker product `ops[0] x ops[1] x ... ` in qubit order 1..N. Only for
/// `N <= DENSE_MAX_QUBITS`; this is the oracle path.
pub fn dense_operator(ops: &[SingleQubitOperator]) -> Result<DenseMatrix> {
    let n = ops.len();
    if n == 0 {
        return Err(Error::invalid("dense_operator needs at least one factor"));
    }
    if n > DENSE_MAX_QUBITS {
        return Err(Error::TooManyQubits {
            what: "dense operator oracle",
            num_qubits: n,
            cap: DENSE_MAX_QUBITS,
        });
    }
    let mut dim = 1usize;
    let mut data = vec![ONE];
    for op in ops {
        let new_dim = dim * 2;
        let mut next = vec![ZERO; new_dim * new_dim];
        for r in 0..dim {
            for c in 0..dim {
                let m = data[r * dim + c];
                if m == ZERO {
                    continue;
                }
                for (a, row) in op.entries.iter().enumerate() {
                    for (b, e) in row.iter().enumerate() {
                        next[(2 * r + a) * new_dim + 2 * c + b] = m * e;
                    }
                }
            }
        }
        dim = new_dim;
        data = next;
    }
    Ok(DenseMatrix { dim, data })
}
