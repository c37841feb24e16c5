//! Closed-form maxima of `|<S_N^±>|` and the settings that attain them.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use crate::error::{Error, Result};
use crate::qcore::{BlochDirection, C64};
use crate::states::check_tau;

use super::{MeasurementSettings, Variant};

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Hybrid local hidden-variable bound `2^{N-1}`.
pub fn lhv_bound(n: usize) -> f64 {
    pow2(n as i32 - 1)
}

/// Maximal quantum value `sqrt(2) 2^{N-1}`.
pub fn algebraic_cap(n: usize) -> f64 {
    SQRT_2 * pow2(n as i32 - 1)
}

/// `max |F_N^±|`: `2^{(N+1)/2}` for odd N, `2^{N/2}` for even N. Attained
/// with every party measuring along +-Z.
pub fn fmax(n: usize) -> f64 {
    if n % 2 == 1 {
        pow2((n as i32 + 1) / 2)
    } else {
        pow2(n as i32 / 2)
    }
}

/// `max |G_N^±| = sqrt(2) 2^{N-1}`.
pub fn gmax(n: usize) -> f64 {
    algebraic_cap(n)
}

fn check_n(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::invalid(format!("{what} needs N >= {min}, got {n}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, pi/2]")));
    }
    Ok(())
}

/// Which of the two local maxima of the GGHZ landscape is the larger one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GghzBranch {
    /// All parties along +-Z; value `|c1| F_max`.
    Product,
    /// All parties in the XY plane; value `c2 G_max`.
    Equatorial,
}

/// `(product branch, equatorial branch)` values in terms of `alpha`.
///
/// Odd N: `(2^{(N+1)/2} |cos 2a|, sqrt2 2^{N-1} sin 2a)`; even N:
/// `(2^{N/2}, sqrt2 2^{N-1} sin 2a)`.
pub fn gghz_branches_alpha(n: usize, alpha: f64) -> Result<(f64, f64)> {
    check_n(n, 3, "GGHZ bound")?;
    check_alpha(alpha)?;
    let two_a = 2.0 * alpha;
    let product = if n % 2 == 1 {
        fmax(n) * two_a.cos().abs()
    } else {
        fmax(n)
    };
    Ok((product, gmax(n) * two_a.sin()))
}

/// Global maximum of `|<S_N^±>|` over settings on `gghz(N, alpha)`.
pub fn gghz_bound_alpha(n: usize, alpha: f64) -> Result<f64> {
    let (p, e) = gghz_branches_alpha(n, alpha)?;
    Ok(p.max(e))
}

/// `(product branch, equatorial branch)` values in terms of the tangle.
///
/// Odd N: `(2^{(N+1)/2} sqrt(1 - tau), 2^{N-1} sqrt(2 tau))`; even N:
/// `(2^{N/2}, 2^{N-1} sqrt(2 tau))`.
pub fn gghz_branches_tangle(n: usize, tau: f64) -> Result<(f64, f64)> {
    check_n(n, 3, "GGHZ bound")?;
    check_tau(tau)?;
    let product = if n % 2 == 1 {
        fmax(n) * (1.0 - tau).sqrt()
    } else {
        fmax(n)
    };
    Ok((product, lhv_bound(n) * (2.0 * tau).sqrt()))
}

pub fn gghz_bound_tangle(n: usize, tau: f64) -> Result<f64> {
    let (p, e) = gghz_branches_tangle(n, tau)?;
    Ok(p.max(e))
}

/// Tangle at which the two GGHZ branches cross: `1/(2^{N-2} + 1)` for odd
/// N, `2^{1-N}` for even N.
pub fn gghz_tangle_threshold(n: usize) -> f64 {
    if n % 2 == 1 {
        1.0 / (pow2(n as i32 - 2) + 1.0)
    } else {
        pow2(1 - n as i32)
    }
}

/// Maximal-slice maximum `2^{N-1} sqrt(1 + sin^2 alpha)`.
pub fn ms_bound(n: usize, alpha: f64) -> Result<f64> {
    check_n(n, 3, "MS bound")?;
    check_alpha(alpha)?;
    Ok(lhv_bound(n) * (1.0 + alpha.sin().powi(2)).sqrt())
}

/// The MS maximum in terms of the tangle, `2^{N-1} sqrt(1 + tau)`, for the
/// sizes where `tau = sin^2 alpha` (N = 3 and even N).
pub fn ms_bound_tangle(n: usize, tau: f64) -> Result<f64> {
    check_n(n, 3, "MS bound")?;
    check_tau(tau)?;
    if n != 3 && n % 2 == 1 {
        return Err(Error::TangleUndefined(n));
    }
    Ok(lhv_bound(n) * (1.0 + tau).sqrt())
}

/// Number of parties (0 or 1) whose second setting must point along -Z so
/// that `|Re[(1 ± i) prod_i (cos th_i^0 + i cos th_i^1)]|` reaches `fmax`.
fn product_flips(n: usize, variant: Variant) -> usize {
    let value = |flips: usize| {
        let up = C64::new(1.0, 1.0).powu((n - flips) as u32);
        let down = C64::new(1.0, -1.0).powu(flips as u32);
        (variant.phase() * up * down).re.abs()
    };
    if value(1) > value(0) {
        1
    } else {
        0
    }
}

fn product_settings(n: usize, variant: Variant) -> Result<MeasurementSettings> {
    let up = BlochDirection::z();
    let down = BlochDirection::new(std::f64::consts::PI, 0.0);
    let mut pairs = vec![[up, up]; n];
    if product_flips(n, variant) == 1 {
        pairs[0][1] = down;
    }
    MeasurementSettings::new(pairs)
}

/// `th = pi/2` everywhere, `ph_1^x = ±pi/4 + x pi/2`, `ph_i^x = x pi/2`, so
/// that `cos(sum_i ph_i^{x(i)}) = nu±(x) / sqrt2` for every `x`.
fn equatorial_settings(n: usize, variant: Variant) -> Result<MeasurementSettings> {
    let offset = variant.sign() as f64 * FRAC_PI_4;
    let pairs = (0..n)
        .map(|k| {
            let base = if k == 0 { offset } else { 0.0 };
            [
                BlochDirection::new(FRAC_PI_2, base),
                BlochDirection::new(FRAC_PI_2, base + FRAC_PI_2),
            ]
        })
        .collect();
    MeasurementSettings::new(pairs)
}

/// Settings attaining [`gghz_bound_alpha`] on `gghz(N, alpha)` for the
/// chosen variant.
pub fn optimal_settings_gghz(
    n: usize,
    alpha: f64,
    variant: Variant,
) -> Result<MeasurementSettings> {
    let (p, e) = gghz_branches_alpha(n, alpha)?;
    if p >= e {
        product_settings(n, variant)
    } else {
        equatorial_settings(n, variant)
    }
}

/// The branch that [`optimal_settings_gghz`] selects.
pub fn active_branch(n: usize, alpha: f64) -> Result<GghzBranch> {
    let (p, e) = gghz_branches_alpha(n, alpha)?;
    Ok(if p >= e {
        GghzBranch::Product
    } else {
        GghzBranch::Equatorial
    })
}
