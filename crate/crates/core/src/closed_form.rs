//! Closed-form expressions for the heralded sources, transcribed as printed
//! (signs included). These are oracles for the simulator in `detection` and
//! `schemes`; nothing in the simulation path calls them.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::math::ln_factorial;
use crate::optics::{bs_matrix, mode_matrix, BeamSplitterSpec};
use crate::sources::QubitAmplitudes;

/// Relative size below which series terms are dropped.
pub const SERIES_REL_TOL: f64 = 1e-16;

/// `tanh^{2n}(r)/cosh²(r)`: probability of `n` photons in either arm of a
/// two-mode squeezed vacuum.
pub fn herald_prob_n(r: f64, n: u32) -> f64 {
    r.tanh().powi(2 * n as i32) / r.cosh().powi(2)
}

/// `2 − η + η cosh 2r`, the denominator shared by the loss and dark-count
/// formulas.
fn loss_denominator(r: f64, eta: f64) -> f64 {
    2.0 - eta + eta * (2.0 * r).cosh()
}

/// Total single-click probability behind an efficiency-`η` detector:
/// `4η sinh²r / (2 − η + η cosh 2r)²`.
pub fn lossy_click_prob(r: f64, eta: f64) -> f64 {
    let d = loss_denominator(r, eta);
    4.0 * eta * r.sinh().powi(2) / (d * d)
}

/// Single-photon probability of the output given one click:
/// `(2 − η + η cosh 2r)² / (4 cosh⁴ r)`.
pub fn lossy_purity(r: f64, eta: f64) -> f64 {
    let d = loss_denominator(r, eta);
    d * d / (4.0 * r.cosh().powi(4))
}

/// Single-click probability including dark counts, as printed:
/// `p_d + 4(p_d − 1)/D² − 2(p_d − 1)/D`.
pub fn dark_click_prob_cf(r: f64, eta: f64, p_d: f64) -> f64 {
    let d = loss_denominator(r, eta);
    p_d + 4.0 * (p_d - 1.0) / (d * d) - 2.0 * (p_d - 1.0) / d
}

/// Conditional single-photon probability with dark counts, as printed.
/// Carries an overall sign flip relative to the physical value (it returns
/// −1 at `η = 1, p_d = 0`); compare in magnitude.
pub fn dark_purity_cf(r: f64, eta: f64, p_d: f64) -> f64 {
    let d = loss_denominator(r, eta);
    let c2 = (2.0 * r).cosh();
    let sech2 = 1.0 / r.cosh().powi(2);
    let num = (p_d * (eta - 1.0) - eta) * d * d * sech2 * r.tanh().powi(2);
    let den = p_d * (4.0 + (eta - 2.0) * eta) - 2.0 * eta
        + eta * c2 * (2.0 - 2.0 * p_d * (eta - 1.0) + p_d * eta * c2);
    num / den
}

/// Quadratic exponent `A (â₁†)² + 2B â₁†â₂† + C (â₂†)²` produced by sending
/// squeezed vacua with parameters `λ₁, λ₂` through a splitter `Λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingExponent {
    pub a: C64,
    pub b: C64,
    pub c: C64,
}

pub fn mixing_exponent(lambda1: C64, lambda2: C64, spec: &BeamSplitterSpec) -> MixingExponent {
    let l = bs_matrix(spec);
    MixingExponent {
        a: lambda1 * l[(0, 0)].powi(2) + lambda2 * l[(0, 1)].powi(2),
        b: lambda1 * l[(0, 0)] * l[(1, 0)] + lambda2 * l[(0, 1)] * l[(1, 1)],
        c: lambda1 * l[(1, 0)].powi(2) + lambda2 * l[(1, 1)].powi(2),
    }
}

/// `⟨m, n|` amplitudes of `norm · exp[A a₁†² + 2B a₁†a₂† + C a₂†²]|00⟩` for
/// `m, n ≤ cutoff`, row-major in `(m, n)`.
pub fn mixing_amplitudes(e: &MixingExponent, norm: f64, cutoff: usize) -> Vec<C64> {
    let side = cutoff + 1;
    let mut out = vec![C64::new(0.0, 0.0); side * side];
    for m in 0..side {
        for n in 0..side {
            // m = 2i + k, n = 2j + k
            let mut acc = C64::new(0.0, 0.0);
            for k in (m % 2..=m.min(n)).step_by(2) {
                if (n - k) % 2 != 0 {
                    continue;
                }
                let (i, j) = ((m - k) / 2, (n - k) / 2);
                let ln_w = 0.5 * (ln_factorial(m) + ln_factorial(n))
                    - ln_factorial(k)
                    - ln_factorial(i)
                    - ln_factorial(j);
                acc += (2.0 * e.b).powi(k as i32) * e.a.powi(i as i32) * e.c.powi(j as i32) * ln_w.exp();
            }
            out[m * side + n] = norm * acc;
        }
    }
    out
}

/// Amplitudes of `𝒩 · 2B â₁† exp[A (â₁†)²]|0⟩`, the mode-1 state left by
/// one photon detected in mode 2, with `𝒩 = 1/√(cosh r₁ cosh r₂)`.
pub fn single_detection_amplitudes(e: &MixingExponent, norm: f64, cutoff: usize) -> Vec<C64> {
    (0..=cutoff)
        .map(|m| {
            if m % 2 == 0 {
                return C64::new(0.0, 0.0);
            }
            let i = (m - 1) / 2;
            let ln_w = 0.5 * ln_factorial(m) - ln_factorial(i);
            norm * 2.0 * e.b * e.a.powi(i as i32) * ln_w.exp()
        })
        .collect()
}

/// Output amplitudes of the perturbed-splitter source: after a click the
/// output mode is `𝒜₁ â₁† exp[ℬ₁ (â₁†)²] |0⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbedBsAmplitudes {
    pub a1: C64,
    pub b1: C64,
}

pub fn perturbed_amplitudes(r: f64, varphi: f64, delta1: f64, delta2: f64) -> PerturbedBsAmplitudes {
    let i = C64::i();
    let e_varphi = C64::from_polar(1.0, varphi);
    let (s1, c1) = delta1.sin_cos();
    let a1 = i * e_varphi * (r.tanh() / (2.0 * r.cosh()))
        * (c1 * c1 - s1 * s1)
        * (C64::from_polar(1.0, -delta2) + C64::from_polar(1.0, delta2));
    let b1 = -0.25 * e_varphi * r.tanh()
        * ((c1 - s1).powi(2) - C64::from_polar(1.0, 2.0 * delta2) * (c1 + s1).powi(2));
    PerturbedBsAmplitudes { a1, b1 }
}

fn check_convergent(b1: C64) -> SimResult<()> {
    if b1.norm() >= 0.5 {
        return Err(SimError::invalid(format!(
            "|ℬ₁| = {} ≥ 1/2: the odd-photon series diverges",
            b1.norm()
        )));
    }
    Ok(())
}

/// `Σ_n (2n+1)!/(n!)² |ℬ₁|^{2n}`, stopped once terms fall below
/// [`SERIES_REL_TOL`] of the running sum.
fn odd_series(b1: C64) -> f64 {
    let x = b1.norm_sqr();
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0;
    loop {
        term *= 2.0 * (2.0 * n + 3.0) / (n + 1.0) * x;
        sum += term;
        n += 1.0;
        if term < SERIES_REL_TOL * sum {
            return sum;
        }
    }
}

/// Conditional single-photon probability
/// `1 / Σ_n (2n+1)!/(n!)² ‖ℬ₁ⁿ‖²`.
pub fn perturbed_purity(amps: &PerturbedBsAmplitudes) -> SimResult<f64> {
    check_convergent(amps.b1)?;
    Ok(1.0 / odd_series(amps.b1))
}

/// Joint probability of the click and `2n + 1` output photons:
/// `(2n+1)!/(n!)² ‖𝒜₁ ℬ₁ⁿ‖²`.
pub fn perturbed_prob_n(amps: &PerturbedBsAmplitudes, n: usize) -> f64 {
    let ln_comb = ln_factorial(2 * n + 1) - 2.0 * ln_factorial(n);
    let a2 = amps.a1.norm_sqr();
    let b2 = amps.b1.norm_sqr();
    if n == 0 {
        return a2;
    }
    if b2 == 0.0 || a2 == 0.0 {
        return 0.0;
    }
    (ln_comb + a2.ln() + n as f64 * b2.ln()).exp()
}

/// Total click probability `‖𝒜₁‖² Σ_n (2n+1)!/(n!)² ‖ℬ₁ⁿ‖²`.
pub fn perturbed_herald_prob(amps: &PerturbedBsAmplitudes) -> SimResult<f64> {
    check_convergent(amps.b1)?;
    Ok(amps.a1.norm_sqr() * odd_series(amps.b1))
}

/// Splitter angles `(θ, μ)` that null the vacuum term of the three-copy
/// output for splitter phases `(φ, ν)`:
/// `θ = arctan(sin(ν+φ)/sin ν)`,
/// `μ = −arctan(sin(ν+φ) sin ν / (sin φ √(sin²ν + sin²(φ+ν))))`.
///
/// `θ` is taken in the quadrant of `(sin ν, sin(ν+φ))`, so that
/// `cos θ = sin ν / √(sin²ν + sin²(φ+ν))`; with the principal branch the
/// vacuum term survives whenever `sin ν < 0`.
pub fn three_copy_angles(phi: f64, nu: f64) -> SimResult<(f64, f64)> {
    const EPS: f64 = 1e-12;
    let s_nu = nu.sin();
    let s_phi = phi.sin();
    let s_sum = (nu + phi).sin();
    if s_nu.abs() < EPS {
        return Err(SimError::invalid(format!("sin(ν) vanishes at ν = {nu}: θ is undefined")));
    }
    if s_phi.abs() < EPS && s_sum.abs() < EPS {
        return Err(SimError::invalid(format!(
            "sin(φ) and sin(ν+φ) both vanish at (φ, ν) = ({phi}, {nu}): μ is undefined"
        )));
    }
    let theta = s_sum.atan2(s_nu);
    let mu = -(s_sum * s_nu / (s_phi * (s_nu * s_nu + s_sum * s_sum).sqrt())).atan();
    Ok((theta, mu))
}

/// `Λ` of the splitter on paper modes (2,3) and `Λ′` on modes (1,2), as 3×3
/// matrices indexed from zero.
pub fn three_copy_matrices(theta: f64, phi: f64, mu: f64, nu: f64) -> (DMatrix<C64>, DMatrix<C64>) {
    let embed = |spec: BeamSplitterSpec, a: usize, b: usize| {
        mode_matrix(&spec, 3, a, b).expect("fixed mode pair is valid")
    };
    (
        embed(BeamSplitterSpec::new(theta, phi), 1, 2),
        embed(BeamSplitterSpec::new(mu, nu), 0, 1),
    )
}

/// Coefficients `(c₀, c₁)` of `|0⟩` and `|1⟩` in the unnormalized output
/// `β²Λ′₂₂[α(Λ₂₃Λ′₂₁ + Λ₂₂(Λ′₂₁ + Λ₂₃Λ′₂₂))|0⟩ + βΛ₂₂Λ₂₃(2Λ′₁₂Λ′₂₁ + Λ′₁₁Λ′₂₂)|1⟩]`
/// after detecting two photons in mode 2 and none in mode 3. These multiply
/// `(â₂†)²`, so the herald probability is `2(|c₀|² + |c₁|²)`.
pub fn three_copy_coefficients(q: &QubitAmplitudes, theta: f64, phi: f64, mu: f64, nu: f64) -> (C64, C64) {
    let (l, lp) = three_copy_matrices(theta, phi, mu, nu);
    // one-based accessors to keep the transcription legible
    let big = |k: usize, j: usize| l[(k - 1, j - 1)];
    let prime = |k: usize, j: usize| lp[(k - 1, j - 1)];
    let (alpha, beta) = (q.alpha0(), q.beta1());
    let pre = beta * beta * prime(2, 2);
    let c0 = pre * alpha * (big(2, 3) * prime(2, 1) + big(2, 2) * (prime(2, 1) + big(2, 3) * prime(2, 2)));
    let c1 = pre * beta * big(2, 2) * big(2, 3) * (2.0 * prime(1, 2) * prime(2, 1) + prime(1, 1) * prime(2, 2));
    (c0, c1)
}

pub fn three_copy_herald_prob(q: &QubitAmplitudes, theta: f64, phi: f64, mu: f64, nu: f64) -> f64 {
    let (c0, c1) = three_copy_coefficients(q, theta, phi, mu, nu);
    2.0 * (c0.norm_sqr() + c1.norm_sqr())
}

/// The quoted maximum "2","0" detection probability, `16|β|³/81`.
pub fn three_copy_quoted_max(beta: f64) -> f64 {
    16.0 * beta.abs().powi(3) / 81.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    const R_MAX: f64 = 0.881_373_587_019_543;

    #[test]
    fn number_law() {
        assert!((herald_prob_n(0.88137, 1) - 0.25).abs() < 1e-5);
        assert!((herald_prob_n(0.36, 1) - 0.105).abs() < 1e-3);
        assert!((herald_prob_n(0.7, 0) - 1.0 / 0.7f64.cosh().powi(2)).abs() < 1e-15);
        let total: f64 = (0..400).map(|n| herald_prob_n(0.9, n)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_formulas() {
        let r = 0.6;
        assert!((lossy_click_prob(r, 1.0) - herald_prob_n(r, 1)).abs() < 1e-15);
        assert_eq!(lossy_click_prob(r, 0.0), 0.0);
        assert!((lossy_click_prob(R_MAX, 0.5) - 2.0 / 9.0).abs() < 1e-14);
        assert!((lossy_purity(r, 1.0) - 1.0).abs() < 1e-14);
        assert!((lossy_purity(R_MAX, 0.5) - 9.0 / 16.0).abs() < 1e-14);
        for eta in [0.1, 0.4, 0.9] {
            let prod = lossy_click_prob(r, eta) * lossy_purity(r, eta);
            assert!((prod - eta * herald_prob_n(r, 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn dark_formulas() {
        for (r, eta) in [(0.3, 0.2), (R_MAX, 0.8)] {
            assert!((dark_click_prob_cf(r, eta, 0.0) - lossy_click_prob(r, eta)).abs() < 1e-15);
            assert!((dark_click_prob_cf(r, eta, 1.0) - 1.0).abs() < 1e-15);
            assert!((dark_purity_cf(r, eta, 0.0).abs() - lossy_purity(r, eta)).abs() < 1e-14);
        }
        assert!((dark_purity_cf(0.5, 1.0, 0.0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn unperturbed_amplitudes() {
        for r in [0.2, R_MAX, 1.1] {
            let a = perturbed_amplitudes(r, 0.3, 0.0, 0.0);
            assert_eq!(a.b1.norm(), 0.0);
            assert!((a.a1.norm() - r.tanh() / r.cosh()).abs() < 1e-15);
            assert!((a.a1.norm_sqr() - herald_prob_n(r, 1)).abs() < 1e-15);
            assert_eq!(perturbed_purity(&a).unwrap(), 1.0);
        }
    }

    #[test]
    fn purity_is_leading_term_ratio() {
        let a = perturbed_amplitudes(R_MAX, 0.0, 0.2, 0.3);
        let herald = perturbed_herald_prob(&a).unwrap();
        let sum: f64 = (0..200).map(|n| perturbed_prob_n(&a, n)).sum();
        assert!((sum - herald).abs() < 1e-14);
        assert!((perturbed_purity(&a).unwrap() - perturbed_prob_n(&a, 0) / herald).abs() < 1e-14);
    }

    #[test]
    fn divergent_series_rejected() {
        let amps = PerturbedBsAmplitudes { a1: C64::new(0.1, 0.0), b1: C64::new(0.5, 0.0) };
        assert!(perturbed_purity(&amps).is_err());
    }

    #[test]
    fn angles_at_symmetric_point() {
        let (theta, _) = three_copy_angles(FRAC_PI_2, FRAC_PI_4).unwrap();
        assert!((theta - FRAC_PI_4).abs() < 1e-15);
        assert!(three_copy_angles(1.0, 0.0).is_err());
        assert!(three_copy_angles(1.0, std::f64::consts::PI).is_err());
        assert!(three_copy_angles(0.0, std::f64::consts::PI).is_err());
        // sin φ = 0 alone is a finite limit
        assert!(three_copy_angles(0.0, 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn angles_null_vacuum_coefficient(
            phi in 0.0..2.0 * std::f64::consts::PI,
            nu in 0.0..2.0 * std::f64::consts::PI,
            beta in 0.05..1.0f64,
        ) {
            prop_assume!(nu.sin().abs() > 1e-3 && phi.sin().abs().max((phi + nu).sin().abs()) > 1e-3);
            let q = QubitAmplitudes::from_beta(beta).unwrap();
            let (theta, mu) = three_copy_angles(phi, nu).unwrap();
            let (c0, _) = three_copy_coefficients(&q, theta, phi, mu, nu);
            prop_assert!(c0.norm() < 1e-12, "c0 = {c0}");
        }
    }

    #[test]
    fn symmetric_mixing_cancels_single_mode_terms() {
        let lam = C64::new(-0.5 * 0.7f64.tanh(), 0.0);
        let e = mixing_exponent(lam, lam, &BeamSplitterSpec::symmetric());
        assert!(e.a.norm() < 1e-16 && e.c.norm() < 1e-16);
        // cross term i e^{iφ} tanh r / 2 per a₁†a₂†
        assert!((2.0 * e.b - C64::new(0.0, 0.7f64.tanh())).norm() < 1e-15);
    }

    #[test]
    fn quoted_max() {
        assert!((three_copy_quoted_max(1.0) - 0.197_530_864_197_530_87).abs() < 1e-16);
    }
}
