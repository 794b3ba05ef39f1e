//! Input states: coherent, squeezed vacuum, squeezed coherent, qubit-like
//! `α|0⟩ + β|1⟩` and the two-mode squeezed vacuum, plus the Gaussian Wigner
//! function used for pointwise sanity output.
//!
//! Every constructor stores the exact series coefficients up to the cutoff
//! and records the missing tail, `1 − Σ|c_n|²`, as leakage.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::fock::FockState;

/// Tail weight the default cutoff policy leaves outside the basis.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Upper bound on any automatically chosen cutoff.
pub const MAX_AUTO_CUTOFF: usize = 2000;

/// Squeezing `ξ = r·e^{iφ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    r: f64,
    varphi: f64,
}

impl SqueezeParams {
    pub fn new(r: f64, varphi: f64) -> SimResult<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(SimError::invalid(format!("squeezing r must be finite and ≥ 0, got {r}")));
        }
        if !varphi.is_finite() {
            return Err(SimError::invalid("squeezing phase must be finite"));
        }
        Ok(Self { r, varphi })
    }

    pub fn real(r: f64) -> SimResult<Self> {
        Self::new(r, 0.0)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn varphi(&self) -> f64 {
        self.varphi
    }

    pub fn xi(&self) -> C64 {
        C64::from_polar(self.r, self.varphi)
    }

    /// `λ = −½ e^{iφ} tanh r`, the coefficient of `(â†)²` in the normal-ordered
    /// exponent.
    pub fn lambda(&self) -> C64 {
        C64::from_polar(-0.5 * self.r.tanh(), self.varphi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplaceParams {
    pub alpha: C64,
}

impl DisplaceParams {
    pub fn new(alpha: C64) -> Self {
        Self { alpha }
    }

    pub fn real(alpha: f64) -> Self {
        Self { alpha: C64::new(alpha, 0.0) }
    }
}

/// Amplitudes of `α|0⟩ + β|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitAmplitudes {
    alpha0: C64,
    beta1: C64,
}

impl QubitAmplitudes {
    pub fn new(alpha0: C64, beta1: C64) -> SimResult<Self> {
        let n = alpha0.norm_sqr() + beta1.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(SimError::invalid(format!("|α|² + |β|² = {n}, expected 1")));
        }
        Ok(Self { alpha0, beta1 })
    }

    /// Real `β ∈ [0, 1]` with `α = √(1 − β²)`.
    pub fn from_beta(beta: f64) -> SimResult<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(SimError::invalid(format!("β must lie in [0, 1], got {beta}")));
        }
        Self::new(C64::new((1.0 - beta * beta).sqrt(), 0.0), C64::new(beta, 0.0))
    }

    pub fn alpha0(&self) -> C64 {
        self.alpha0
    }

    pub fn beta1(&self) -> C64 {
        self.beta1
    }
}

fn leakage_of(amps: &[C64]) -> f64 {
    let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    (1.0 - n2).max(0.0)
}

/// Smallest `N` such that `1 − Σ_{n≤N} p_n < tol`, where `p_n` are the
/// probabilities produced by `next` in order. Returns `None` past `max`.
fn tail_cutoff(mut next: impl FnMut(usize) -> f64, tol: f64, max: usize) -> Option<usize> {
    let mut acc = 0.0;
    for n in 0..=max {
        acc += next(n);
        if 1.0 - acc < tol {
            return Some(n);
        }
    }
    None
}

/// Fock amplitudes `c_{2n} = (1/√cosh r)·λⁿ·√((2n)!)/n!` built by the
/// recurrence `c_{2n+2} = c_{2n}·λ·√((2n+1)(2n+2))/(n+1)`.
pub fn squeezed_vacuum_amplitudes(params: SqueezeParams, cutoff: usize) -> Vec<C64> {
    let lambda = params.lambda();
    let mut amps = vec![C64::new(0.0, 0.0); cutoff + 1];
    let mut c = C64::new(1.0 / params.r.cosh().sqrt(), 0.0);
    amps[0] = c;
    let mut n = 0usize;
    while 2 * n + 2 <= cutoff {
        let k = n as f64;
        c *= lambda * ((2.0 * k + 1.0) * (2.0 * k + 2.0)).sqrt() / (k + 1.0);
        amps[2 * n + 2] = c;
        n += 1;
    }
    amps
}

/// Cutoff leaving less than `tol` of a squeezed vacuum's norm² outside.
pub fn squeezed_vacuum_cutoff(r: f64, tol: f64) -> SimResult<usize> {
    let params = SqueezeParams::real(r)?;
    let lambda2 = params.lambda().norm_sqr();
    let mut c2 = 1.0 / r.cosh();
    let found = tail_cutoff(
        |n| {
            if n == 0 {
                c2
            } else if n % 2 == 1 {
                0.0
            } else {
                let k = (n / 2 - 1) as f64;
                c2 *= lambda2 * (2.0 * k + 1.0) * (2.0 * k + 2.0) / ((k + 1.0) * (k + 1.0));
                c2
            }
        },
        tol,
        MAX_AUTO_CUTOFF,
    );
    found
        .map(|n| n.max(2))
        .ok_or_else(|| SimError::invalid(format!("squeezing r={r} needs a cutoff above {MAX_AUTO_CUTOFF}")))
}

/// Default cutoff policy: squeezed-vacuum tail below [`DEFAULT_TAIL_TOL`].
pub fn default_cutoff(r: f64) -> SimResult<usize> {
    squeezed_vacuum_cutoff(r, DEFAULT_TAIL_TOL)
}

pub fn squeezed_vacuum(params: SqueezeParams, cutoff: usize) -> SimResult<FockState> {
    let amps = squeezed_vacuum_amplitudes(params, cutoff);
    let leak = leakage_of(&amps);
    FockState::single_mode(amps, leak)
}

/// `e^{−|α|²/2} αⁿ/√(n!)`.
pub fn coherent(params: DisplaceParams, cutoff: usize) -> SimResult<FockState> {
    let alpha = params.alpha;
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..=cutoff {
        c *= alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let leak = leakage_of(&amps);
    FockState::single_mode(amps, leak)
}

pub fn coherent_cutoff(params: DisplaceParams, tol: f64) -> SimResult<usize> {
    let mean = params.alpha.norm_sqr();
    let mut p = (-mean).exp();
    tail_cutoff(
        |n| {
            if n > 0 {
                p *= mean / n as f64;
            }
            p
        },
        tol,
        MAX_AUTO_CUTOFF,
    )
    .map(|n| n.max(1))
    .ok_or_else(|| SimError::invalid(format!("|α|² = {mean} needs a cutoff above {MAX_AUTO_CUTOFF}")))
}

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Displacement that zeroes `H_2` in the squeezed-coherent series:
/// `α = √(sinh(2r)/2)`.
pub fn h2_nulling_displacement(r: f64) -> f64 {
    ((2.0 * r).sinh() / 2.0).sqrt()
}

fn check_squeezed_coherent(sq: SqueezeParams, disp: DisplaceParams) -> SimResult<()> {
    if sq.r == 0.0 {
        return Err(SimError::invalid(
            "squeezed_coherent needs r > 0 (the Hermite argument is singular); use coherent for r = 0",
        ));
    }
    if sq.varphi != 0.0 || disp.alpha.im != 0.0 {
        return Err(SimError::invalid(
            "squeezed_coherent is validated only for real α and squeezing phase 0",
        ));
    }
    Ok(())
}

/// Iterator over the squeezed-coherent amplitudes
/// `c_n = e^{−½(α² − α² tanh r)}/√cosh r · (√(sinh r / 2cosh r))ⁿ · H_n(α/√(2 cosh r sinh r))/√(n!)`.
///
/// The Hermite factor is carried as `h_n = H_n(x)/√(2ⁿ n!)`, which obeys
/// `h_{n+1} = √(2/(n+1))·x·h_n − √(n/(n+1))·h_{n−1}` and never overflows, so
/// `c_n = prefactor · tanh(r)^{n/2} · h_n`.
struct SqueezedCoherentSeries {
    prefactor: f64,
    sqrt_tanh: f64,
    x: f64,
    n: usize,
    h_prev: f64,
    h: f64,
    tanh_pow: f64,
}

impl SqueezedCoherentSeries {
    fn new(r: f64, alpha: f64) -> Self {
        let t = r.tanh();
        let a2 = alpha * alpha;
        Self {
            prefactor: (-0.5 * (a2 - a2 * t)).exp() / r.cosh().sqrt(),
            sqrt_tanh: t.sqrt(),
            x: alpha / (2.0 * r.cosh() * r.sinh()).sqrt(),
            n: 0,
            h_prev: 0.0,
            h: 1.0,
            tanh_pow: 1.0,
        }
    }
}

impl Iterator for SqueezedCoherentSeries {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let c = self.prefactor * self.tanh_pow * self.h;
        let k = self.n as f64;
        let h_next = (2.0 / (k + 1.0)).sqrt() * self.x * self.h - (k / (k + 1.0)).sqrt() * self.h_prev;
        self.h_prev = self.h;
        self.h = h_next;
        self.tanh_pow *= self.sqrt_tanh;
        self.n += 1;
        Some(c)
    }
}

pub fn squeezed_coherent_amplitudes(sq: SqueezeParams, disp: DisplaceParams, cutoff: usize) -> SimResult<Vec<C64>> {
    check_squeezed_coherent(sq, disp)?;
    Ok(SqueezedCoherentSeries::new(sq.r, disp.alpha.re)
        .take(cutoff + 1)
        .map(|c| C64::new(c, 0.0))
        .collect())
}

pub fn squeezed_coherent(sq: SqueezeParams, disp: DisplaceParams, cutoff: usize) -> SimResult<FockState> {
    let amps = squeezed_coherent_amplitudes(sq, disp, cutoff)?;
    let leak = leakage_of(&amps);
    FockState::single_mode(amps, leak)
}

pub fn squeezed_coherent_cutoff(sq: SqueezeParams, disp: DisplaceParams, tol: f64) -> SimResult<usize> {
    check_squeezed_coherent(sq, disp)?;
    let mut series = SqueezedCoherentSeries::new(sq.r, disp.alpha.re);
    tail_cutoff(|_| series.next().map_or(0.0, |c| c * c), tol, MAX_AUTO_CUTOFF)
        .map(|n| n.max(2))
        .ok_or_else(|| SimError::invalid(format!("squeezed coherent state at r={} exceeds cutoff {MAX_AUTO_CUTOFF}", sq.r)))
}

pub fn qubit_state(q: QubitAmplitudes, cutoff: usize) -> SimResult<FockState> {
    QubitAmplitudes::new(q.alpha0, q.beta1)?;
    let mut amps = vec![C64::new(0.0, 0.0); cutoff.max(1) + 1];
    amps[0] = q.alpha0;
    amps[1] = q.beta1;
    FockState::single_mode(amps, 0.0)
}

/// `(1/cosh r)·Σ (i e^{iφ} tanh r)ⁿ |n,n⟩`.
pub fn two_mode_squeezed(sq: SqueezeParams, cutoff: usize) -> SimResult<FockState> {
    let dim = cutoff + 1;
    let ratio = C64::i() * C64::from_polar(sq.r.tanh(), sq.varphi);
    let mut amps = vec![C64::new(0.0, 0.0); dim * dim];
    let mut c = C64::new(1.0 / sq.r.cosh(), 0.0);
    for n in 0..dim {
        amps[n * dim + n] = c;
        c *= ratio;
    }
    let leak = leakage_of(&amps);
    FockState::from_amplitudes(&[cutoff, cutoff], amps, leak)
}

/// Wigner function of a Gaussian state squeezed along the quadrature axes,
/// `(2/π)·exp(−½(x₁′² e^{−2r} + x₂′² e^{2r}))` with `x′ = x − center`. At
/// `r = 0` this is the coherent-state Wigner function.
pub fn wigner_gaussian(x1: f64, x2: f64, center: (f64, f64), r: f64) -> f64 {
    let d1 = x1 - center.0;
    let d2 = x2 - center.1;
    FRAC_2_PI * (-0.5 * (d1 * d1 * (-2.0 * r).exp() + d2 * d2 * (2.0 * r).exp())).exp()
}
