use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::maximizer::{certify_stationarity, maximize, OptimizerConfig};
use crate::qcore::{StateVector, C64};
use crate::states::{
    gghz, gghz_alpha_from_tangle, gghz_tangle, ms, ms_alpha_from_tangle, n_tangle_even, Family,
    FamilyParameter,
};
use crate::svetlichny::{
    expectation_bruteforce, expectation_dense, expectation_fast, gghz_bound_alpha,
    gghz_bound_tangle, gghz_branches_tangle, gghz_expectation_closed, gghz_gradient_theta,
    gghz_tangle_threshold, hk_bounds, ms_bound, nu, nu_collapsed, optimal_settings_gghz,
    violation_report, AppendixCoefficients, MeasurementSettings, Variant,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyLevel {
    /// N <= 6, 16 restarts, 5 angles per N.
    Quick,
    /// N <= 10, 64 restarts, 25 angles per N.
    Full,
}

/// Parameters of a verification run. `nu` is the sign table under test.
#[derive(Debug, Clone, Copy)]
pub struct VerifyContext {
    pub level: VerifyLevel,
    pub max_n: usize,
    pub restarts: usize,
    pub alpha_points: usize,
    pub seed: u64,
    pub nu: fn(u32, Variant) -> i32,
}

impl VerifyContext {
    pub fn new(level: VerifyLevel) -> Self {
        let (max_n, restarts, alpha_points) = match level {
            VerifyLevel::Quick => (6, 16, 5),
            VerifyLevel::Full => (10, 64, 25),
        };
        VerifyContext {
            level,
            max_n,
            restarts,
            alpha_points,
            seed: 1,
            nu,
        }
    }

    pub fn with_nu(mut self, nu: fn(u32, Variant) -> i32) -> Self {
        self.nu = nu;
        self
    }

    fn alphas(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.alpha_points.max(2);
        (0..m).map(move |i| FRAC_PI_2 * i as f64 / (m - 1) as f64)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type CheckFn = fn(&VerifyContext) -> Result<std::result::Result<String, String>>;

pub const NU_CHECK: &str = "nu decomposition";

const CHECKS: [(&str, CheckFn); 11] = [
    (NU_CHECK, check_nu),
    ("engine agreement", check_engines),
    ("gghz closed form", check_closed_form),
    ("gghz optimal settings attain bound", check_attainment),
    ("tangle identities", check_tangles),
    ("violation threshold", check_threshold),
    ("block decomposition", check_blocks),
    ("analytic stationarity", check_analytic_stationarity),
    ("maximizer gghz", check_maximizer_gghz),
    ("maximizer ms", check_maximizer_ms),
    ("random settings never exceed bound", check_never_exceed),
];

pub fn run_checks(ctx: &VerifyContext) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let start = Instant::now();
            let (passed, detail) = match check(ctx) {
                Ok(Ok(d)) => (true, d),
                Ok(Err(d)) => (false, d),
                Err(e) => (false, format!("error: {e}")),
            };
            CheckOutcome {
                name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

/// Tracks the worst deviation seen against a tolerance.
struct Worst {
    tol: f64,
    value: f64,
    at: String,
}

impl Worst {
    fn new(tol: f64) -> Self {
        Worst {
            tol,
            value: 0.0,
            at: String::new(),
        }
    }

    fn record(&mut self, dev: f64, at: impl FnOnce() -> String) {
        if dev > self.value || dev.is_nan() {
            self.value = dev;
            self.at = at();
        }
    }

    fn finish(self, cases: usize) -> std::result::Result<String, String> {
        let msg = format!(
            "{cases} cases, worst {:.3e} (tol {:.0e})",
            self.value, self.tol
        );
        if self.value <= self.tol {
            Ok(msg)
        } else {
            Err(format!("{msg} at {}", self.at))
        }
    }
}

fn random_state<R: Rng>(n: usize, rng: &mut R) -> Result<StateVector> {
    let amps = (0..1usize << n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(amps)
}

fn check_nu(ctx: &VerifyContext) -> Result<std::result::Result<String, String>> {
    for v in Variant::ALL {
        for w in 0..32u32 {
            let got = (ctx.nu)(w, v);
            let w64 = w as i64;
            let e = w64 * (w64 + v.sign() as i64) / 2;
            let parity = if e.rem_euclid(2) == 0 { 1 } else { -1 };
            let collapsed = (C64::new(1.0, v.sign() as f64) * C64::i().powu(w)).re;
            if got != parity || got != nu_collapsed(w, v) || got as f64 != collapsed {
                return Ok(Err(format!(
                    "{v} w={w}: table {got}, parity {parity}, Re[(1±i)i^w] {collapsed}"
                )));
            }
        }
        for w in 0..31u32 {
            if (ctx.nu)(w + 1, v) != -v.sign() * (ctx.nu)(w, v.flipped()) {
                return Ok(Err(format!("shift relation fails for {v} at w={w}")));
            }
        }
    }
    Ok(Ok("w = 0..31, both variants".into()))
}

fn check_engines(ctx: &VerifyContext) -> Result<std::result::Result<String, String>> {
    let mut rng = ctx.rng(2);
    let mut worst = Worst::new(1e-10);
    let mut cases = 0;
    for n in 2..=ctx.max_n.min(8) {
        for trial in 0..6 {
            let state = match trial % 3 {
                0 => gghz(n, rng.gen_range(0.0..FRAC_PI_2))?,
                1 if n >= 3 => ms(n, rng.gen_range(0.0..FRAC_PI_2))?,
                _ => random_state(n, &mut rng)?,
            };
            let settings = MeasurementSettings::random(n, &mut rng);
            for v in Variant::ALL {
                let fast = expectation_fast(&state, &settings, v)?;
                let brute = expectation_bruteforce(&state, &settings, v)?;
                let dense = expectation_dense(&state, &settings, v)?;
                let dev = (fast - brute).abs().max((fast - dense).abs());
                worst.record(dev, || format!("N={n} trial {trial} {v}"));
                cases += 1;
            }
        }
    }
    Ok(worst.finish(cases))
}

fn check_closed_form(ctx: &VerifyContext) -> Result<std::result::Result<String, String>> {
    let mut rng = ctx.rng(3);
    let mut worst = Worst::new(1e-10);
    let mut cases = 0;
    for n in 2..=ctx.max_n {
        for _ in 0..10 {
            let alpha = rng.gen_range(0.0..FRAC_PI_2);
            let settings = MeasurementSettings::random(n, &mut rng);
            let state = gghz(n, alpha)?;
            for v in Variant::ALL {
                let closed = gghz_expectation_closed(n, alpha, &settings, v)?;
                let fast = expectation_fast(&state, &settings, v)?;
                worst.record((closed - fast).abs(), || format!("N={n} alpha={alpha} {v}"));
                cases += 1;
            }
        }
    }
    Ok(worst.finish(cases))
}

fn check_attainment(ctx: &VerifyContext) -> Result<std::result::Result<String, String>> {
    let mut worst = Worst::new(1e-9);
    let mut cases = 0;
    for n in 3..=ctx.max_n {
        for alpha in ctx.alphas() {
            let bound = gghz_bound_alpha(n, alpha)?;
            let state = gghz(n, alpha)?;
            for v in Variant::ALL {
                let s = optimal_settings_gghz(n, alpha, v)?;
                let value = expectation_fast(&state, &s, v)?.abs();
                worst.record((value - bound).abs(), || format!("N={n} alpha={alpha} {v}"));
                cases += 1;
            }
        }
    }
    Ok(worst.finish(cases))
}

fn check_tangles(ctx: &VerifyContext) -> Result<std::result::Result<String, String>> {
    let mut worst = Worst::new(1e-12);
    let mut cases = 0;
    let even_ns = [3usize, 4, 6]
        .into_iter()
        .filter(|&n| n <= ctx.max_n.max(4));
    for n in even_ns {
        for alpha in ctx.alphas() {
            let tg = n_tangle_even(&gghz(n, alpha)?)?;
            worst.record((tg - gghz_tangle(alpha)).abs(), || {
                format!("gghz N={n} alpha={alpha}")
            });
            let tm = n_tangle_even(&ms(n, alpha)?)?;
            let s = alpha.sin();
            worst.record((tm - s * s).abs(), || format!("ms N={n} alpha={alpha}"));
            cases += 2;
        }
    }
    for i in 0..=20 {
        let tau = i as f64 / 20.0;
        let a = gghz_alpha_from_tangle(tau)?;
        worst.record((gghz_tangle(a) - tau).abs(), || {
            format!("gghz round trip tau={tau}")
        });
        let b = ms_alpha_from_tangle(4, tau)?;
        let s = b.sin();
        worst.record((s * s - tau).abs(), || format!("ms round trip tau={tau}"));
        for n in 3..=ctx.max_n {
            let by_tau = gghz_bound_tangle(n, tau)?;
            let by_alpha = gghz_bound_alpha(n, a)?;
            worst.record((by_tau - by_alpha).abs() / by_alpha, || {
                format!("bound forms N={n} tau={tau}")
            });
            cases += 1;
        }
        cases += 2;
    }
    Ok(worst.finish(cases))
}

fn check_threshold(ctx: &VerifyContext) -> Result<std::result::Result<String, String>> {
    let mut worst = Worst::new(1e-12);
    let mut cases = 0;
    for n in 3..=ctx.max_n {
        let t = gghz_tangle_threshold(n);
        let (p, e) = gghz_branches_tangle(n, t)?;
        worst.record((p - e).abs() / p, || format!("branch crossover N={n}"));
        for (tau, expect) in [(0.5 - 1e-6, false), (0.5 + 1e-6, true)] {
            let fp = FamilyParameter::new(Family::Gghz, n, gghz_alpha_from_tangle(tau)?)?;
            if violation_report(&fp)?.violates != expect {
                return Ok(Err(format!("N={n} tau={tau}: violates should be {expect}")));
            }
        }
        cases += 3;
    }
    Ok(worst.finish(cases))
}

fn check_blocks(ctx: &VerifyContext) -> Result<std::result::Result<String, String>> {
    let mut rng = ctx.rng(7);
    let mut worst = Worst::new(1e-10);
    let mut cases = 0;
    for n in 4..=ctx.max_n.max(4) {
        for _ in 0..5 {
            let alpha = rng.gen_range(0.0..FRAC_PI_2);
            let s = MeasurementSettings::random(n, &mut rng);
            for v in Variant::ALL {
                let c = AppendixCoefficients::from_settings(alpha, &s, v)?;
                let th = |k: usize| [s.direction(k, 0).theta(), s.direction(k, 1).theta()];
                let rebuilt = c.reconstruct(th(n - 1), th(n));
                let closed = gghz_expectation_closed(n, alpha, &s, v)?;
                worst.record((rebuilt - closed).abs(), || {
                    format!("N={n} alpha={alpha} {v}")
                });
                cases += 1;
            }
        }
        for alpha in ctx.alphas() {
            let hk = hk_bounds(n, alpha)?;
            let bound = gghz_bound_alpha(n, alpha)?;
            worst.record((2.0 * hk.max_h - bound).abs(), || {
                format!("H/K closure N={n}")
            });
            cases += 1;
        }
    }
    Ok(worst.finish(cases))
}

fn check_analytic_stationarity(ctx: &VerifyContext) -> Result<std::result::Result<String, String>> {
    let mut worst = Worst::new(1e-9);
    let mut cases = 0;
    for n in 3..=ctx.max_n {
        for alpha in ctx.alphas() {
            for v in Variant::ALL {
                let s = optimal_settings_gghz(n, alpha, v)?;
                for k in 1..=n {
                    for l in 0..2 {
                        let g = gghz_gradient_theta(n, alpha, &s, v, k, l)?;
                        worst.record(g.abs(), || format!("N={n} alpha={alpha} {v} k={k} l={l}"));
                        cases += 1;
                    }
                }
            }
        }
    }
    Ok(worst.finish(cases))
}

fn optimizer_config(ctx: &VerifyContext) -> OptimizerConfig {
    OptimizerConfig {
        restarts: ctx.restarts,
        seed: ctx.seed,
        ..OptimizerConfig::default()
    }
}

fn check_maximizer(
    ctx: &VerifyContext,
    family: Family,
) -> Result<std::result::Result<String, String>> {
    let cfg = optimizer_config(ctx);
    let mut worst = Worst::new(1e-5);
    let mut cases = 0;
    for n in family.min_qubits().max(3)..=ctx.max_n {
        for (i, alpha) in ctx.alphas().enumerate() {
            let (state, bound) = match family {
                Family::Gghz => (gghz(n, alpha)?, gghz_bound_alpha(n, alpha)?),
                Family::Ms => (ms(n, alpha)?, ms_bound(n, alpha)?),
            };
            let v = Variant::ALL[(n + i) % 2];
            let r = maximize(&state, v, &cfg)?;
            worst.record((r.best_value - bound).abs(), || {
                format!("N={n} alpha={alpha} {v}")
            });
            if !certify_stationarity(&state, &r.best_settings, v, 1e-4)? {
                return Ok(Err(format!(
                    "N={n} alpha={alpha} {v}: gradient residual {:.2e}",
                    r.stationarity_residual
                )));
            }
            cases += 1;
        }
    }
    Ok(worst.finish(cases))
}

fn check_maximizer_gghz(ctx: &VerifyContext) -> Result<std::result::Result<String, String>> {
    check_maximizer(ctx, Family::Gghz)
}

fn check_maximizer_ms(ctx: &VerifyContext) -> Result<std::result::Result<String, String>> {
    check_maximizer(ctx, Family::Ms)
}

fn check_never_exceed(ctx: &VerifyContext) -> Result<std::result::Result<String, String>> {
    let mut rng = ctx.rng(11);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut cases = 0;
    for n in 3..=ctx.max_n {
        for _ in 0..40 {
            let alpha = rng.gen_range(0.0..FRAC_PI_2);
            let s = MeasurementSettings::random(n, &mut rng);
            let v = Variant::ALL[rng.gen_range(0..2)];
            for (state, bound) in [
                (gghz(n, alpha)?, gghz_bound_alpha(n, alpha)?),
                (ms(n, alpha)?, ms_bound(n, alpha)?),
            ] {
                let excess = expectation_fast(&state, &s, v)?.abs() - bound;
                worst_excess = worst_excess.max(excess);
                cases += 1;
            }
        }
    }
    let msg = format!("{cases} cases, largest |<S>| - bound = {worst_excess:.3e}");
    Ok(if worst_excess <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    })
}
