//! Expectation engines for `<psi|S_N^±|psi>`.
//!
//! Three independent routes:
//! * brute force: all `2^N` correlators, each through the single-qubit kernel;
//! * fast: the collapse `sum_x nu±(x) A(x) = Re[(1 ± i) (x)_i (A_i^0 + i A_i^1)]`,
//!   one product-operator expectation;
//! * dense: the full `2^N x 2^N` operator assembled from Kronecker products
//!   (oracle only, small N).

use crate::error::{Error, Result};
use crate::qcore::{
    apply_in_place, dense_operator, dot, SingleQubitOperator, StateVector, C64, DENSE_MAX_QUBITS,
};

use super::{nu, setting_bit, weight, MeasurementSettings, Variant};

/// Cap on the `2^N`-correlator engine.
pub const BRUTEFORCE_MAX_QUBITS: usize = 16;

/// Largest imaginary part tolerated on an expectation of a Hermitian operator.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_RESIDUE_TOL * (1.0 + z.re.abs()) {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// `sum_x nu±(x) <psi|A(x)|psi>` over all `2^N` bit strings.
pub fn expectation_bruteforce(
    state: &StateVector,
    settings: &MeasurementSettings,
    variant: Variant,
) -> Result<f64> {
    let n = state.num_qubits();
    settings.check_qubits(n)?;
    if n > BRUTEFORCE_MAX_QUBITS {
        return Err(Error::TooManyQubits {
            what: "brute-force expectation",
            num_qubits: n,
            cap: BRUTEFORCE_MAX_QUBITS,
        });
    }
    let ops = settings.operators();
    let psi = state.amplitudes();
    let mut work = vec![C64::new(0.0, 0.0); psi.len()];
    let mut total = 0.0;
    for x in 0..(1usize << n) {
        work.copy_from_slice(psi);
        for (k, pair) in ops.iter().enumerate() {
            apply_in_place(&mut work, n, k + 1, &pair[setting_bit(x, n, k + 1)]);
        }
        let correlator = real_part(dot(psi, &work))?;
        total += nu(weight(x), variant) as f64 * correlator;
    }
    Ok(total)
}

/// `Re[(1 ± i) <psi| (x)_i (A_i^0 + i A_i^1) |psi>]`, cost `O(N 2^N)`.
pub fn expectation_fast(
    state: &StateVector,
    settings: &MeasurementSettings,
    variant: Variant,
) -> Result<f64> {
    let n = state.num_qubits();
    settings.check_qubits(n)?;
    let collapsed: Vec<SingleQubitOperator> = settings
        .operators()
        .into_iter()
        .map(|[a0, a1]| a0 + a1.scale(C64::i()))
        .collect();
    Ok(collapsed_expectation(
        state.amplitudes(),
        n,
        &collapsed,
        variant,
    ))
}

pub(crate) fn collapsed_expectation(
    psi: &[C64],
    n: usize,
    collapsed: &[SingleQubitOperator],
    variant: Variant,
) -> f64 {
    let mut work = psi.to_vec();
    for (k, m) in collapsed.iter().enumerate() {
        apply_in_place(&mut work, n, k + 1, m);
    }
    (variant.phase() * dot(psi, &work)).re
}

/// Dense-matrix sandwich `<psi|S_N^±|psi>`; oracle path for `N <= 8`.
pub fn expectation_dense(
    state: &StateVector,
    settings: &MeasurementSettings,
    variant: Variant,
) -> Result<f64> {
    let n = state.num_qubits();
    settings.check_qubits(n)?;
    if n > DENSE_MAX_QUBITS {
        return Err(Error::TooManyQubits {
            what: "dense expectation oracle",
            num_qubits: n,
            cap: DENSE_MAX_QUBITS,
        });
    }
    let ops = settings.operators();
    let mut total = 0.0;
    for x in 0..(1usize << n) {
        let factors: Vec<SingleQubitOperator> =
            (0..n).map(|k| ops[k][setting_bit(x, n, k + 1)]).collect();
        let corr = real_part(dense_operator(&factors)?.sandwich(state)?)?;
        total += nu(weight(x), variant) as f64 * corr;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::BlochDirection;
    use crate::states::gghz;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    #[test]
    fn product_state_all_z() {
        let psi = gghz(3, 0.0).unwrap();
        let s = MeasurementSettings::uniform(3, BlochDirection::z(), BlochDirection::z()).unwrap();
        // 1 - 3 - 3 + 1
        let bf = expectation_bruteforce(&psi, &s, Variant::Plus).unwrap();
        assert!((bf + 4.0).abs() < 1e-12);
        let fast = expectation_fast(&psi, &s, Variant::Plus).unwrap();
        assert!((fast - bf).abs() < 1e-10);
    }

    #[test]
    fn all_x_settings_on_gghz3() {
        // Every correlator is <XXX> = sin 2a, so the plus sum is
        // (1 - 3 - 3 + 1) sin 2a.
        let x = BlochDirection::new(FRAC_PI_2, 0.0);
        let s = MeasurementSettings::uniform(3, x, x).unwrap();
        for k in 0..=8 {
            let alpha = FRAC_PI_2 * k as f64 / 8.0;
            let psi = gghz(3, alpha).unwrap();
            let want = -4.0 * (2.0 * alpha).sin();
            let bf = expectation_bruteforce(&psi, &s, Variant::Plus).unwrap();
            let fast = expectation_fast(&psi, &s, Variant::Plus).unwrap();
            let dense = expectation_dense(&psi, &s, Variant::Plus).unwrap();
            for got in [bf, fast, dense] {
                assert!((got - want).abs() < 1e-12, "alpha={alpha}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn ghz_optimal_pattern() {
        // phi_1^x = pi/4 + x pi/2, phi_i^x = x pi/2, all theta = pi/2
        let mut pairs = vec![[
            BlochDirection::new(FRAC_PI_2, FRAC_PI_4),
            BlochDirection::new(FRAC_PI_2, 3.0 * FRAC_PI_4),
        ]];
        pairs.extend(vec![
            [
                BlochDirection::new(FRAC_PI_2, 0.0),
                BlochDirection::new(FRAC_PI_2, FRAC_PI_2)
            ];
            2
        ]);
        let s = MeasurementSettings::new(pairs).unwrap();
        let psi = gghz(3, FRAC_PI_4).unwrap();
        let bf = expectation_bruteforce(&psi, &s, Variant::Plus).unwrap();
        let fast = expectation_fast(&psi, &s, Variant::Plus).unwrap();
        assert!((bf.abs() - 4.0 * SQRT_2).abs() < 1e-12);
        assert!((fast - bf).abs() < 1e-10);
    }

    #[test]
    fn literal_equal_phi_pattern_reaches_only_half() {
        // phi_1^0 = phi_1^1 = pi/4 makes both settings of party 1 coincide.
        let mut pairs = vec![[BlochDirection::new(FRAC_PI_2, FRAC_PI_4); 2]];
        pairs.extend(vec![
            [
                BlochDirection::new(FRAC_PI_2, 0.0),
                BlochDirection::new(FRAC_PI_2, FRAC_PI_2)
            ];
            2
        ]);
        let s = MeasurementSettings::new(pairs).unwrap();
        let psi = gghz(3, FRAC_PI_4).unwrap();
        let v = expectation_fast(&psi, &s, Variant::Plus).unwrap();
        assert!((v.abs() - 2.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn chsh_value_for_bell_state() {
        // Alice: Z, X. Bob: (Z + X)/sqrt2, (Z - X)/sqrt2 rotated into the
        // S_2 sign convention.
        let psi = gghz(2, FRAC_PI_4).unwrap();
        let s = MeasurementSettings::new(vec![
            [
                BlochDirection::new(0.0, 0.0),
                BlochDirection::new(FRAC_PI_2, 0.0),
            ],
            [
                BlochDirection::new(FRAC_PI_4, 0.0),
                BlochDirection::new(FRAC_PI_4, std::f64::consts::PI),
            ],
        ])
        .unwrap();
        let best = Variant::ALL
            .iter()
            .map(|&v| expectation_fast(&psi, &s, v).unwrap().abs())
            .fold(0.0, f64::max);
        assert!((best - 2.0 * SQRT_2).abs() < 1e-12, "{best}");
        for v in Variant::ALL {
            let bf = expectation_bruteforce(&psi, &s, v).unwrap();
            assert!((bf - expectation_fast(&psi, &s, v).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn variants_related_by_nu_tables() {
        // Party 1 measures Z for both settings, so the x(1) = 0 and x(1) = 1
        // halves share correlators and each rest-weight u carries
        // nu(u) + nu(u + 1).
        let mut rng = rand::thread_rng();
        for _ in 0..10 {
            let mut s = MeasurementSettings::random(4, &mut rng);
            s.set_direction(1, 0, BlochDirection::z());
            s.set_direction(1, 1, BlochDirection::z());
            let psi = crate::states::ms(4, 0.7).unwrap();
            let plus = expectation_bruteforce(&psi, &s, Variant::Plus).unwrap();
            let minus = expectation_bruteforce(&psi, &s, Variant::Minus).unwrap();
            assert!((plus - expectation_fast(&psi, &s, Variant::Plus).unwrap()).abs() < 1e-10);
            assert!((minus - expectation_fast(&psi, &s, Variant::Minus).unwrap()).abs() < 1e-10);
            let ops = s.operators();
            let mut expect_plus = 0.0;
            let mut expect_minus = 0.0;
            for rest in 0..8usize {
                let u = rest.count_ones();
                let mut factors = vec![ops[0][0]];
                for k in 0..3 {
                    factors.push(ops[k + 1][(rest >> (2 - k)) & 1]);
                }
                let c = crate::qcore::product_expectation(&psi, &factors)
                    .unwrap()
                    .re;
                expect_plus += (nu(u, Variant::Plus) + nu(u + 1, Variant::Plus)) as f64 * c;
                expect_minus += (nu(u, Variant::Minus) + nu(u + 1, Variant::Minus)) as f64 * c;
            }
            assert!((plus - expect_plus).abs() < 1e-10);
            assert!((minus - expect_minus).abs() < 1e-10);
        }
    }

    #[test]
    fn mismatched_settings_rejected() {
        let psi = gghz(3, 0.2).unwrap();
        let s = MeasurementSettings::uniform(4, BlochDirection::z(), BlochDirection::z()).unwrap();
        assert!(matches!(
            expectation_fast(&psi, &s, Variant::Plus),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(expectation_bruteforce(&psi, &s, Variant::Plus).is_err());
    }
}
