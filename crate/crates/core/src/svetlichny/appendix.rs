//! Decomposition of the GGHZ Svetlichny value around the last two parties.
//!
//! Writing `a = th_{N-1}` and `b = th_N`, the closed form splits into four
//! blocks, one per setting pair `(x(N-1), x(N))`:
//!
//! ```text
//! <S_N^±> = f1 cos a0 cos b0 + g1 sin a0 sin b0     (0, 0)
//!         + f2 cos a0 cos b1 + g2 sin a0 sin b1     (0, 1)
//!         + f3 cos a1 cos b0 + g3 sin a1 sin b0     (1, 0)
//!         + f4 cos a1 cos b1 + g4 sin a1 sin b1     (1, 1)
//! ```
//!
//! With `nu±(w + 1) = ∓nu∓(w)` and `nu±(w + 2) = -nu±(w)` the coefficients
//! reduce to (N-2)-party sums:
//! `f1 = c1 F±`, `f2 = f3 = ∓c1 F∓`, `f4 = -c1 F±`,
//! `g1 = c2 G̃±_00`, `g2 = ∓c2 G̃∓_01`, `g3 = ∓c2 G̃∓_10`, `g4 = -c2 G̃±_11`,
//! where `G̃_ij` carries the extra phase `ph_{N-1}^i + ph_N^j` inside its
//! cosine.

use crate::error::{Error, Result};
use crate::qcore::BlochDirection;

use super::bounds::fmax;
use super::gghz::gghz_coefficients;
use super::{gmax, nu, setting_bit, weight, MeasurementSettings, Variant};

/// Block coefficients in the order (0,0), (0,1), (1,0), (1,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixCoefficients {
    pub f: [f64; 4],
    pub g: [f64; 4],
}

/// `(x(N-1), x(N))` of block `j`.
const BLOCKS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

impl AppendixCoefficients {
    /// Evaluates the four-block form at the polar angles of the last two
    /// parties.
    pub fn reconstruct(&self, theta_penultimate: [f64; 2], theta_last: [f64; 2]) -> f64 {
        BLOCKS
            .iter()
            .enumerate()
            .map(|(j, &(a, b))| {
                let (sa, ca) = theta_penultimate[a].sin_cos();
                let (sb, cb) = theta_last[b].sin_cos();
                self.f[j] * ca * cb + self.g[j] * sa * sb
            })
            .sum()
    }

    /// Coefficients for a full N-party setting list.
    pub fn from_settings(
        alpha: f64,
        settings: &MeasurementSettings,
        variant: Variant,
    ) -> Result<Self> {
        let n = settings.num_qubits();
        let pairs = settings.pairs();
        if n < 4 {
            return Err(Error::invalid(format!(
                "block decomposition needs N >= 4, got {n}"
            )));
        }
        let phi = |p: &[BlochDirection; 2]| [p[0].phi(), p[1].phi()];
        appendix_coefficients(
            n,
            alpha,
            &pairs[..n - 2],
            phi(&pairs[n - 2]),
            phi(&pairs[n - 1]),
            variant,
        )
    }
}

/// `F^±` and `G̃^±` over the first N-2 parties, with `extra_phase` added to
/// the cosine argument of the G sum.
fn sub_sums(sub: &[[BlochDirection; 2]], variant: Variant, extra_phase: f64) -> (f64, f64) {
    let m = sub.len();
    let (mut f, mut g) = (0.0, 0.0);
    for x in 0..(1usize << m) {
        let (mut pc, mut ps, mut phase) = (1.0, 1.0, extra_phase);
        for (k, pair) in sub.iter().enumerate() {
            let d = pair[setting_bit(x, m, k + 1)];
            pc *= d.theta().cos();
            ps *= d.theta().sin();
            phase += d.phi();
        }
        let v = nu(weight(x), variant) as f64;
        f += v * pc;
        g += v * phase.cos() * ps;
    }
    (f, g)
}

/// The eight block coefficients for `gghz(N, alpha)`.
///
/// `sub_settings` holds parties 1..N-2; only the azimuths of the last two
/// parties enter the coefficients.
pub fn appendix_coefficients(
    n: usize,
    alpha: f64,
    sub_settings: &[[BlochDirection; 2]],
    phi_penultimate: [f64; 2],
    phi_last: [f64; 2],
    variant: Variant,
) -> Result<AppendixCoefficients> {
    if n < 4 {
        return Err(Error::invalid(format!(
            "block decomposition needs N >= 4, got {n}"
        )));
    }
    if sub_settings.len() != n - 2 {
        return Err(Error::DimensionMismatch {
            expected: n - 2,
            actual: sub_settings.len(),
        });
    }
    let (c1, c2) = gghz_coefficients(n, alpha);
    let shift = -(variant.sign() as f64);
    let same = variant;
    let other = variant.flipped();

    let extra = |(a, b): (usize, usize)| phi_penultimate[a] + phi_last[b];
    let (f_same, g00) = sub_sums(sub_settings, same, extra(BLOCKS[0]));
    let (f_other, g01) = sub_sums(sub_settings, other, extra(BLOCKS[1]));
    let (_, g10) = sub_sums(sub_settings, other, extra(BLOCKS[2]));
    let (_, g11) = sub_sums(sub_settings, same, extra(BLOCKS[3]));

    Ok(AppendixCoefficients {
        f: [
            c1 * f_same,
            shift * c1 * f_other,
            shift * c1 * f_other,
            -c1 * f_same,
        ],
        g: [c2 * g00, shift * c2 * g01, shift * c2 * g10, -c2 * g11],
    })
}

/// Branch-wise maxima of the two half-sums `H` (blocks with `th_{N-1}^0`) and
/// `K` (blocks with `th_{N-1}^1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HkBounds {
    pub max_h: f64,
    pub max_k: f64,
}

/// `max(f_max, g_max)` for one half-sum: `f_max = |c1| max|F_{N-2}|`,
/// `g_max = 2 c2 max|G_{N-2}|`.
fn half_sum_max(n: usize, alpha: f64) -> f64 {
    let (c1, c2) = gghz_coefficients(n, alpha);
    let f_max = c1.abs() * fmax(n - 2);
    let g_max = 2.0 * c2.abs() * gmax(n - 2);
    f_max.max(g_max)
}

pub fn hk_bounds(n: usize, alpha: f64) -> Result<HkBounds> {
    if n < 4 {
        return Err(Error::invalid(format!("H/K maxima need N >= 4, got {n}")));
    }
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, pi/2]")));
    }
    Ok(HkBounds {
        max_h: half_sum_max(n, alpha),
        max_k: half_sum_max(n, alpha),
    })
}

/// Checks `tan th_N^b = tan th_{N-1}^a * g_j / f_j` for all four blocks,
/// in the pole-free form `f sin th_N^b cos th_{N-1}^a = g cos th_N^b sin th_{N-1}^a`.
pub fn consistency_check(
    settings: &MeasurementSettings,
    coeffs: &AppendixCoefficients,
    tol: f64,
) -> bool {
    let n = settings.num_qubits();
    if n < 2 {
        return false;
    }
    BLOCKS.iter().enumerate().all(|(j, &(a, b))| {
        let ta = settings.direction(n - 1, a).theta();
        let tb = settings.direction(n, b).theta();
        let lhs = coeffs.f[j] * tb.sin() * ta.cos();
        let rhs = coeffs.g[j] * tb.cos() * ta.sin();
        (lhs - rhs).abs() <= tol
    })
}
