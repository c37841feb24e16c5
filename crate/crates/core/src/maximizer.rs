//! Multi-start maximization of `|<S_N^±>|` over the 4N measurement angles.
//!
//! Each restart runs block-coordinate ascent on the signed expectation. The
//! collapsed form `<S> = Re[(1 ± i) <psi| (x)_i M_i |psi>]`,
//! `M_i = A_i^0 + i A_i^1`, is linear in each Bloch vector, so for party `k`
//! it reads `u_0 . v_k^0 + u_1 . v_k^1` and the exact block maximizer is
//! `v_k^l = u_l / |u_l|` (the `x cos t + y sin t <= sqrt(x^2 + y^2)` step
//! applied to a whole direction). The best restart is then polished with a
//! BFGS iteration on finite-difference gradients.
//!
//! Flipping both settings of party 1 negates `<S>`, so the maximum of the
//! signed value equals the maximum of its absolute value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qcore::{apply_in_place, dot, BlochDirection, SingleQubitOperator, StateVector, C64};
use crate::svetlichny::{expectation_fast, MeasurementSettings, Variant};

/// Largest register the maximizer accepts.
pub const MAXIMIZER_MAX_QUBITS: usize = 14;

/// Sweeps in a row with sub-tolerance improvement before a restart stops.
const STALL_SWEEPS: usize = 3;

const POLISH_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Cap on ascent sweeps per restart.
    pub max_iterations: usize,
    /// Per-sweep improvement threshold, relative to `max(1, |<S>|)`.
    pub convergence_tol: f64,
    /// Central-difference step for gradients.
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 64,
            max_iterations: 2000,
            convergence_tol: 1e-10,
            fd_step: 1e-6,
            seed: 1,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::invalid(
                "restarts and max_iterations must be positive",
            ));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= 0.0 {
            return Err(Error::invalid("convergence_tol must be positive"));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 1e-2) {
            return Err(Error::invalid(format!(
                "fd_step = {} outside (0, 1e-2)",
                self.fd_step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizationResult {
    pub best_value: f64,
    pub best_settings: MeasurementSettings,
    pub best_variant: Variant,
    /// Restarts that met the stall criterion before the sweep cap.
    pub restarts_converged: usize,
    /// Largest `|d<S>/d angle|` at the returned settings.
    pub stationarity_residual: f64,
}

struct RestartOutcome {
    value: f64,
    settings: MeasurementSettings,
    converged: bool,
}

/// Scratch space for the ascent on one state.
///
/// With `L_k = (x)_{i<k} M_i^dag psi` and `R_k = (x)_{i>k} M_i psi` the
/// collapsed expectation is `<L_k| M_k |R_k>`, so a sweep keeps all `R_k`
/// from the previous operators and advances `L` one party at a time.
struct Ascent<'a> {
    psi: &'a [C64],
    n: usize,
    phase: C64,
    left: Vec<C64>,
    /// `suffix[k - 1] = R_k`.
    suffix: Vec<Vec<C64>>,
}

impl<'a> Ascent<'a> {
    fn new(state: &'a StateVector, variant: Variant) -> Self {
        let n = state.num_qubits();
        Ascent {
            psi: state.amplitudes(),
            n,
            phase: C64::new(1.0, variant.sign() as f64),
            left: state.amplitudes().to_vec(),
            suffix: vec![state.amplitudes().to_vec(); n],
        }
    }

    fn rebuild_suffix(&mut self, collapsed: &[SingleQubitOperator]) {
        self.suffix[self.n - 1].copy_from_slice(self.psi);
        for k in (1..self.n).rev() {
            let (head, tail) = self.suffix.split_at_mut(k);
            head[k - 1].copy_from_slice(&tail[0]);
            apply_in_place(&mut head[k - 1], self.n, k + 1, &collapsed[k]);
        }
    }

    /// `E_ab = sum_r conj(L[a, r]) R_k[b, r]` with `a`, `b` the bit of party `k`.
    fn environment(&self, k: usize) -> [[C64; 2]; 2] {
        let stride = 1usize << (self.n - k);
        let mut r = [[C64::new(0.0, 0.0); 2]; 2];
        for (p, w) in self
            .left
            .chunks_exact(2 * stride)
            .zip(self.suffix[k - 1].chunks_exact(2 * stride))
        {
            let (p0, p1) = p.split_at(stride);
            let (w0, w1) = w.split_at(stride);
            for j in 0..stride {
                let (c0, c1) = (p0[j].conj(), p1[j].conj());
                r[0][0] += c0 * w0[j];
                r[0][1] += c0 * w1[j];
                r[1][0] += c1 * w0[j];
                r[1][1] += c1 * w1[j];
            }
        }
        r
    }

    /// Linear coefficients `u_l` of `<S>` in the Bloch vectors of party `k`.
    fn block_vectors(&self, k: usize) -> [[f64; 3]; 2] {
        let r = self.environment(k);
        let i = C64::i();
        // Tr(sigma_j E^T) for j = x, y, z.
        let traces = [
            r[0][1] + r[1][0],
            i * (r[1][0] - r[0][1]),
            r[0][0] - r[1][1],
        ];
        let mut u = [[0.0; 3]; 2];
        for (l, ul) in u.iter_mut().enumerate() {
            let pre = self.phase * if l == 0 { C64::new(1.0, 0.0) } else { i };
            for (j, t) in traces.iter().enumerate() {
                ul[j] = (pre * t).re;
            }
        }
        u
    }

    fn value(&mut self, collapsed: &[SingleQubitOperator]) -> f64 {
        self.left.copy_from_slice(self.psi);
        for (i, m) in collapsed.iter().enumerate() {
            apply_in_place(&mut self.left, self.n, i + 1, m);
        }
        (self.phase * dot(self.psi, &self.left)).re
    }

    /// One pass of exact block updates over all parties; returns the value
    /// after the pass.
    fn sweep(
        &mut self,
        pairs: &mut [[BlochDirection; 2]],
        collapsed: &mut [SingleQubitOperator],
    ) -> f64 {
        self.rebuild_suffix(collapsed);
        self.left.copy_from_slice(self.psi);
        let mut value = f64::NEG_INFINITY;
        for k in 1..=self.n {
            let u = self.block_vectors(k);
            for (l, ul) in u.iter().enumerate() {
                if let Some(d) = BlochDirection::from_vector(*ul) {
                    pairs[k - 1][l] = d;
                }
            }
            collapsed[k - 1] = collapse(&pairs[k - 1]);
            if k < self.n {
                apply_in_place(&mut self.left, self.n, k, &collapsed[k - 1].dagger());
            }
            value = u.iter().map(norm3).sum();
        }
        value
    }
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn collapse(pair: &[BlochDirection; 2]) -> SingleQubitOperator {
    crate::qcore::bloch_operator(pair[0]) + crate::qcore::bloch_operator(pair[1]).scale(C64::i())
}

fn run_restart(
    state: &StateVector,
    variant: Variant,
    start: MeasurementSettings,
    config: &OptimizerConfig,
) -> RestartOutcome {
    let mut ascent = Ascent::new(state, variant);
    let mut pairs = start.pairs().to_vec();
    let mut collapsed: Vec<SingleQubitOperator> = pairs.iter().map(collapse).collect();
    let mut value = ascent.value(&collapsed);
    let mut stalled = 0;
    let mut converged = false;
    for _ in 0..config.max_iterations {
        let next = ascent.sweep(&mut pairs, &mut collapsed);
        if next - value < config.convergence_tol * value.abs().max(1.0) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        value = value.max(next);
        if stalled >= STALL_SWEEPS {
            converged = true;
            break;
        }
    }
    let settings = MeasurementSettings::new(pairs).expect("non-empty settings");
    let value = ascent.value(&collapsed);
    RestartOutcome {
        value,
        settings,
        converged,
    }
}

fn signed_value(state: &StateVector, angles: &[f64], variant: Variant) -> f64 {
    let settings = MeasurementSettings::from_angles(angles).expect("4 angles per party");
    expectation_fast(state, &settings, variant).expect("settings sized to state")
}

/// Central-difference gradient of the signed expectation with respect to
/// `[theta0, phi0, theta1, phi1]` of every party.
pub fn fd_gradient(
    state: &StateVector,
    settings: &MeasurementSettings,
    variant: Variant,
    step: f64,
) -> Result<Vec<f64>> {
    settings_match(state, settings)?;
    let angles = settings.to_angles();
    Ok(fd_gradient_angles(state, &angles, variant, step))
}

fn fd_gradient_angles(
    state: &StateVector,
    angles: &[f64],
    variant: Variant,
    step: f64,
) -> Vec<f64> {
    let mut x = angles.to_vec();
    (0..angles.len())
        .map(|j| {
            let orig = x[j];
            x[j] = orig + step;
            let up = signed_value(state, &x, variant);
            x[j] = orig - step;
            let down = signed_value(state, &x, variant);
            x[j] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS ascent on the signed expectation with finite-difference gradients.
/// Returns the improved angles and value, or the input if nothing improved.
fn polish(state: &StateVector, angles: &[f64], variant: Variant, step: f64) -> (Vec<f64>, f64) {
    let dim = angles.len();
    let mut x = angles.to_vec();
    let mut fx = signed_value(state, &x, variant);
    let mut g = fd_gradient_angles(state, &x, variant, step);
    let mut h = identity(dim);
    for _ in 0..POLISH_MAX_ITERS {
        if max_abs(&g) < 1e-9 {
            break;
        }
        // Ascent direction d = H g.
        let mut d: Vec<f64> = h.iter().map(|row| dotv(row, &g)).collect();
        let mut slope = dotv(&g, &d);
        if slope <= 0.0 {
            h = identity(dim);
            d = g.clone();
            slope = dotv(&g, &g);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            let ft = signed_value(state, &trial, variant);
            if ft >= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            break;
        };
        let g_new = fd_gradient_angles(state, &x_new, variant, step);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        // Ascent on f is descent on -f: y = -(g_new - g).
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dotv(&s, &y);
        if sy > 1e-14 {
            bfgs_update(&mut h, &s, &y, sy);
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    (x, fx)
}

fn identity(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let rho = 1.0 / sy;
    let dim = s.len();
    let hy: Vec<f64> = h.iter().map(|row| dotv(row, y)).collect();
    let yhy = dotv(y, &hy);
    for i in 0..dim {
        for j in 0..dim {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

fn settings_match(state: &StateVector, settings: &MeasurementSettings) -> Result<()> {
    if settings.num_qubits() != state.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.num_qubits(),
            actual: settings.num_qubits(),
        });
    }
    Ok(())
}

fn check_state(state: &StateVector) -> Result<()> {
    if state.num_qubits() > MAXIMIZER_MAX_QUBITS {
        return Err(Error::TooManyQubits {
            what: "maximizer",
            num_qubits: state.num_qubits(),
            cap: MAXIMIZER_MAX_QUBITS,
        });
    }
    if !state.is_normalized() {
        return Err(Error::NotNormalized(state.norm_sqr()));
    }
    Ok(())
}

/// Multi-start maximization of `|<S_N^±>|` for one variant.
pub fn maximize(
    state: &StateVector,
    variant: Variant,
    config: &OptimizerConfig,
) -> Result<MaximizationResult> {
    check_state(state)?;
    config.validate()?;
    let n = state.num_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let starts: Vec<MeasurementSettings> = (0..config.restarts)
        .map(|_| MeasurementSettings::random(n, &mut rng))
        .collect();

    let outcomes: Vec<RestartOutcome> = starts
        .into_par_iter()
        .map(|start| run_restart(state, variant, start, config))
        .collect();

    let restarts_converged = outcomes.iter().filter(|o| o.converged).count();
    // First strict maximum in restart order keeps the reduction deterministic.
    let best = outcomes
        .into_iter()
        .reduce(|best, o| if o.value > best.value { o } else { best })
        .expect("at least one restart");

    let angles = best.settings.to_angles();
    let (polished, polished_value) = polish(state, &angles, variant, config.fd_step);
    let (angles, _) = if polished_value > best.value {
        (polished, polished_value)
    } else {
        (angles, best.value)
    };
    let best_settings = MeasurementSettings::from_angles(&angles)?;
    let signed = expectation_fast(state, &best_settings, variant)?;
    let gradient = fd_gradient(state, &best_settings, variant, config.fd_step)?;
    Ok(MaximizationResult {
        best_value: signed.abs(),
        best_settings,
        best_variant: variant,
        restarts_converged,
        stationarity_residual: max_abs(&gradient),
    })
}

/// Runs both variants and keeps the larger maximum (plus on ties).
pub fn maximize_both(state: &StateVector, config: &OptimizerConfig) -> Result<MaximizationResult> {
    let plus = maximize(state, Variant::Plus, config)?;
    let minus = maximize(state, Variant::Minus, config)?;
    Ok(if minus.best_value > plus.best_value {
        minus
    } else {
        plus
    })
}

/// True iff every partial derivative of `<S_N^±>` with respect to the 4N
/// angles is at most `tol` in magnitude (central differences, step `1e-6`).
pub fn certify_stationarity(
    state: &StateVector,
    settings: &MeasurementSettings,
    variant: Variant,
    tol: f64,
) -> Result<bool> {
    let g = fd_gradient(state, settings, variant, OptimizerConfig::default().fd_step)?;
    Ok(max_abs(&g) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{gghz, ms};
    use crate::svetlichny::{gghz_bound_alpha, ms_bound, optimal_settings_gghz};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, SQRT_2};

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 16,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn block_vectors_reproduce_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = ms(5, 0.4).unwrap();
        for v in Variant::ALL {
            let s = MeasurementSettings::random(5, &mut rng);
            let collapsed: Vec<_> = s.pairs().iter().map(collapse).collect();
            let mut a = Ascent::new(&psi, v);
            a.rebuild_suffix(&collapsed);
            let expected = expectation_fast(&psi, &s, v).unwrap();
            for k in 1..=5 {
                let u = a.block_vectors(k);
                let lin: f64 = (0..2)
                    .map(|l| {
                        let d = s.direction(k, l).unit_vector();
                        u[l].iter().zip(d).map(|(x, y)| x * y).sum::<f64>()
                    })
                    .sum();
                assert!((lin - expected).abs() < 1e-12);
                apply_in_place(&mut a.left, 5, k, &collapsed[k - 1].dagger());
            }
        }
    }

    #[test]
    fn ghz3_reaches_algebraic_cap() {
        let r = maximize(&gghz(3, FRAC_PI_4).unwrap(), Variant::Plus, &quick()).unwrap();
        assert!(
            (r.best_value - 4.0 * SQRT_2).abs() < 1e-6,
            "{}",
            r.best_value
        );
        assert!(r.stationarity_residual < 1e-5);
    }

    #[test]
    fn gghz4_product_branch() {
        let alpha = 0.1;
        let r = maximize(&gghz(4, alpha).unwrap(), Variant::Plus, &quick()).unwrap();
        assert!((gghz_bound_alpha(4, alpha).unwrap() - 4.0).abs() < 1e-12);
        assert!((r.best_value - 4.0).abs() < 1e-6, "{}", r.best_value);
    }

    #[test]
    fn ms4_attains_bound() {
        let r = maximize(&ms(4, FRAC_PI_6).unwrap(), Variant::Plus, &quick()).unwrap();
        assert!((r.best_value - 8.0 * 1.25f64.sqrt()).abs() < 1e-5);
        assert!(certify_stationarity(
            &ms(4, FRAC_PI_6).unwrap(),
            &r.best_settings,
            Variant::Plus,
            1e-4
        )
        .unwrap());
    }

    #[test]
    fn both_variants() {
        let r = maximize_both(&gghz(5, std::f64::consts::FRAC_PI_8).unwrap(), &quick()).unwrap();
        let want = gghz_bound_alpha(5, std::f64::consts::FRAC_PI_8).unwrap();
        assert!((r.best_value - want).abs() < 1e-5);
        let r = maximize_both(&ms(3, 0.0).unwrap(), &quick()).unwrap();
        assert!((r.best_value - ms_bound(3, 0.0).unwrap()).abs() < 1e-5);
        assert!((r.best_value - 4.0).abs() < 1e-5);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let psi = ms(4, 0.9).unwrap();
        let a = maximize(&psi, Variant::Minus, &quick()).unwrap();
        let b = maximize(&psi, Variant::Minus, &quick()).unwrap();
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.best_settings, b.best_settings);
    }

    #[test]
    fn stationarity_certificates() {
        for n in 3..=6 {
            for alpha in [0.0, 0.2, FRAC_PI_4, 1.3] {
                let psi = gghz(n, alpha).unwrap();
                for v in Variant::ALL {
                    let s = optimal_settings_gghz(n, alpha, v).unwrap();
                    assert!(
                        certify_stationarity(&psi, &s, v, 1e-6).unwrap(),
                        "n={n} alpha={alpha}"
                    );
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = gghz(4, 0.5).unwrap();
        let s = MeasurementSettings::random(4, &mut rng);
        assert!(!certify_stationarity(&psi, &s, Variant::Plus, 1e-6).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        let big = StateVector::basis(MAXIMIZER_MAX_QUBITS + 1, 0).unwrap();
        assert!(matches!(
            maximize(&big, Variant::Plus, &quick()),
            Err(Error::TooManyQubits { .. })
        ));
        let unnorm = StateVector::unnormalized(vec![C64::new(1.0, 0.0); 8]).unwrap();
        assert!(matches!(
            maximize(&unnorm, Variant::Plus, &quick()),
            Err(Error::NotNormalized(_))
        ));
        let bad = OptimizerConfig {
            fd_step: 0.1,
            ..quick()
        };
        assert!(bad.validate().is_err());
    }
}
