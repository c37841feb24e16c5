//! Closed form of `<S_N^±>` on GGHZ states and its polar-angle gradient.
//!
//! For `|psi> = cos a |0..0> + sin a |1..1>`,
//! `<S_N^±> = c1 F_N^± + c2 G_N^±` with `c1 = cos^2 a + (-1)^N sin^2 a`,
//! `c2 = sin 2a`,
//! `F = sum_x nu(x) prod_i cos th_i^{x(i)}` and
//! `G = sum_x nu(x) cos(sum_i ph_i^{x(i)}) prod_i sin th_i^{x(i)}`.

use crate::error::{Error, Result};

use super::{nu, setting_bit, weight, MeasurementSettings, Variant};

/// `(c1, c2)` for an N-qubit GGHZ state of angle `alpha`.
pub fn gghz_coefficients(n: usize, alpha: f64) -> (f64, f64) {
    let (s, c) = alpha.sin_cos();
    let parity = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    (c * c + parity * s * s, (2.0 * alpha).sin())
}

struct Trig {
    cos_t: [f64; 2],
    sin_t: [f64; 2],
    phi: [f64; 2],
}

fn trig_table(settings: &MeasurementSettings) -> Vec<Trig> {
    settings
        .pairs()
        .iter()
        .map(|pair| Trig {
            cos_t: [pair[0].theta().cos(), pair[1].theta().cos()],
            sin_t: [pair[0].theta().sin(), pair[1].theta().sin()],
            phi: [pair[0].phi(), pair[1].phi()],
        })
        .collect()
}

/// `(F_N^±, G_N^±)` as explicit sums over all `2^N` bit strings.
pub fn gghz_components(settings: &MeasurementSettings, variant: Variant) -> (f64, f64) {
    let n = settings.num_qubits();
    let trig = trig_table(settings);
    let (mut f, mut g) = (0.0, 0.0);
    for x in 0..(1usize << n) {
        let (mut pc, mut ps, mut phase) = (1.0, 1.0, 0.0);
        for (k, t) in trig.iter().enumerate() {
            let b = setting_bit(x, n, k + 1);
            pc *= t.cos_t[b];
            ps *= t.sin_t[b];
            phase += t.phi[b];
        }
        let v = nu(weight(x), variant) as f64;
        f += v * pc;
        g += v * phase.cos() * ps;
    }
    (f, g)
}

/// Signed `c1 F_N^± + c2 G_N^±`.
pub fn gghz_expectation_closed(
    n: usize,
    alpha: f64,
    settings: &MeasurementSettings,
    variant: Variant,
) -> Result<f64> {
    settings.check_qubits(n)?;
    let (c1, c2) = gghz_coefficients(n, alpha);
    let (f, g) = gghz_components(settings, variant);
    Ok(c1 * f + c2 * g)
}

/// `d<S_N^±>/d th_k^l` on a GGHZ state, `k` 1-based and `l` in {0, 1}.
pub fn gghz_gradient_theta(
    n: usize,
    alpha: f64,
    settings: &MeasurementSettings,
    variant: Variant,
    k: usize,
    l: usize,
) -> Result<f64> {
    settings.check_qubits(n)?;
    if k == 0 || k > n {
        return Err(Error::QubitIndexOutOfRange {
            index: k,
            num_qubits: n,
        });
    }
    if l > 1 {
        return Err(Error::invalid(format!("setting index {l} is not 0 or 1")));
    }
    let (c1, c2) = gghz_coefficients(n, alpha);
    let trig = trig_table(settings);
    let (sin_kl, cos_kl) = (trig[k - 1].sin_t[l], trig[k - 1].cos_t[l]);
    let mut grad = 0.0;
    for x in (0..(1usize << n)).filter(|&x| setting_bit(x, n, k) == l) {
        let (mut pc, mut ps, mut phase) = (1.0, 1.0, 0.0);
        for (i, t) in trig.iter().enumerate() {
            let b = setting_bit(x, n, i + 1);
            phase += t.phi[b];
            if i + 1 != k {
                pc *= t.cos_t[b];
                ps *= t.sin_t[b];
            }
        }
        let v = nu(weight(x), variant) as f64;
        grad += -c1 * v * sin_kl * pc + c2 * v * phase.cos() * cos_kl * ps;
    }
    Ok(grad)
}
