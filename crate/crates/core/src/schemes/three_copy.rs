//! Three single-mode inputs, two beam splitters, and a "2","0" herald.
//!
//! Modes are numbered 0, 1, 2. The first splitter `BS(θ, φ)` mixes modes 1
//! and 2, the second `BS(μ, ν)` mixes modes 0 and 1, and the output is kept
//! when two photons reach mode 1 and none reach mode 2.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::closed_form::three_copy_angles;
use crate::detection::{herald, HeraldOutcome};
use crate::error::{SimError, SimResult};
use crate::fock::FockState;
use crate::math::ln_factorial_table;
use crate::optics::{apply_beamsplitter, mode_matrix, BeamSplitterSpec};
use crate::optimize::grid_refine_max;
use crate::sources::{qubit_state, QubitAmplitudes};

/// Mode/angle assignment, one-based as in the usual drawing of the circuit.
pub const THREE_COPY_ASSIGNMENT: &str =
    "BS(theta, phi) on modes (2, 3), then BS(mu, nu) on modes (1, 2); herald n2 = 2, n3 = 0; output mode 1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeCopyConfig {
    pub qubit: QubitAmplitudes,
    pub phi: f64,
    pub nu: f64,
    pub theta: f64,
    pub mu: f64,
}

impl ThreeCopyConfig {
    /// Derives `θ` and `μ` so that the heralded output has no vacuum term.
    pub fn new(qubit: QubitAmplitudes, phi: f64, nu: f64) -> SimResult<Self> {
        let (theta, mu) = three_copy_angles(phi, nu)?;
        Ok(Self { qubit, phi, nu, theta, mu })
    }

    pub fn first_splitter(&self) -> BeamSplitterSpec {
        BeamSplitterSpec::new(self.theta, self.phi)
    }

    pub fn second_splitter(&self) -> BeamSplitterSpec {
        BeamSplitterSpec::new(self.mu, self.nu)
    }
}

fn herald_pattern() -> BTreeMap<usize, usize> {
    BTreeMap::from([(1, 2), (2, 0)])
}

/// Runs arbitrary single-mode inputs through the circuit.
pub fn three_copy_circuit(
    inputs: [&FockState; 3],
    first: &BeamSplitterSpec,
    second: &BeamSplitterSpec,
) -> SimResult<HeraldOutcome> {
    if inputs.iter().any(|s| s.num_modes() != 1) {
        return Err(SimError::invalid("three-copy inputs must be single-mode states"));
    }
    let state = inputs[0].tensor(inputs[1]).tensor(inputs[2]);
    let state = apply_beamsplitter(&state, 1, 2, first)?;
    let state = apply_beamsplitter(&state, 0, 1, second)?;
    herald(&state, &herald_pattern())
}

/// Three copies of `α|0⟩ + β|1⟩` at per-mode `cutoff` (at least 2).
pub fn run_three_copy(config: &ThreeCopyConfig, cutoff: usize) -> SimResult<HeraldOutcome> {
    if cutoff < 2 {
        return Err(SimError::invalid(format!("three-copy herald needs cutoff ≥ 2, got {cutoff}")));
    }
    let q = qubit_state(config.qubit, cutoff)?;
    three_copy_circuit([&q, &q, &q], &config.first_splitter(), &config.second_splitter())
}

/// Heralded output of three identical single-mode inputs, evaluated through
/// a generating function instead of the full three-mode tensor.
///
/// With `U` acting as `â†_l → Σ_k T_kl â†_k`, the output is the `y²`
/// coefficient of `∏_l F(T_0l x + T_1l y)`, `F(z) = Σ c_n zⁿ/√(n!)`. Series
/// in `x` are stored in Fock-amplitude scale (`√(m!)·[xᵐ]`), so products use
/// the weights `√C(m, j)` and nothing overflows. Only inputs up to
/// `max_out + 2` photons contribute.
#[derive(Clone, Debug)]
pub struct ThreeCopySeries {
    coeffs: Vec<C64>,
    max_out: usize,
    /// `√C(m, j)` packed by rows `m = 0..=max_out`.
    weights: Vec<f64>,
}

impl ThreeCopySeries {
    pub fn new(coeffs: Vec<C64>, max_out: usize) -> SimResult<Self> {
        if coeffs.len() < max_out + 3 {
            return Err(SimError::invalid(format!(
                "need {} input amplitudes for {max_out} output photons, got {}",
                max_out + 3,
                coeffs.len()
            )));
        }
        let lf = ln_factorial_table(max_out);
        let weights = (0..=max_out)
            .flat_map(|m| {
                let lf = &lf;
                (0..=m).map(move |j| (0.5 * (lf[m] - lf[j] - lf[m - j])).exp())
            })
            .collect();
        Ok(Self { coeffs, max_out, weights })
    }

    pub fn max_out(&self) -> usize {
        self.max_out
    }

    fn conv(&self, p: &[C64], q: &[C64]) -> Vec<C64> {
        (0..=self.max_out)
            .map(|m| {
                let w = &self.weights[m * (m + 1) / 2..][..=m];
                (0..=m).map(|j| p[j] * q[m - j] * w[j]).sum()
            })
            .collect()
    }

    /// Unnormalized amplitudes `⟨m, 2, 0|U|ψ⟩⊗³` for `m ≤ max_out`.
    pub fn amplitudes(&self, first: &BeamSplitterSpec, second: &BeamSplitterSpec) -> SimResult<Vec<C64>> {
        let t = mode_matrix(second, 3, 0, 1)? * mode_matrix(first, 3, 1, 2)?;
        let len = self.max_out + 1;
        let c = &self.coeffs;
        // [y⁰], [y¹], [y²] of F(u x + v y) in amplitude scale
        let parts: Vec<[Vec<C64>; 3]> = (0..3)
            .map(|l| {
                let (u, v) = (t[(0, l)], t[(1, l)]);
                let mut y = [Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len)];
                let mut um = C64::new(1.0, 0.0);
                for m in 0..len {
                    let k = m as f64;
                    y[0].push(c[m] * um);
                    y[1].push(c[m + 1] * (k + 1.0).sqrt() * um * v);
                    y[2].push(c[m + 2] * (0.5 * ((k + 1.0) * (k + 2.0)).sqrt()) * um * v * v);
                    um *= u;
                }
                y
            })
            .collect();
        let add = |a: Vec<C64>, b: Vec<C64>| a.into_iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        // pair the first two inputs by total y-degree, then close with the third
        let s0 = self.conv(&parts[0][0], &parts[1][0]);
        let s1 = add(self.conv(&parts[0][1], &parts[1][0]), self.conv(&parts[0][0], &parts[1][1]));
        let s2 = add(
            add(self.conv(&parts[0][2], &parts[1][0]), self.conv(&parts[0][1], &parts[1][1])),
            self.conv(&parts[0][0], &parts[1][2]),
        );
        let out = add(
            add(self.conv(&s0, &parts[2][2]), self.conv(&s1, &parts[2][1])),
            self.conv(&s2, &parts[2][0]),
        );
        // ⟨2| on mode 1 carries √2!
        Ok(out.into_iter().map(|a| a * std::f64::consts::SQRT_2).collect())
    }
}

/// One-shot form of [`ThreeCopySeries::amplitudes`].
pub fn three_copy_herald_series(
    coeffs: &[C64],
    first: &BeamSplitterSpec,
    second: &BeamSplitterSpec,
    max_out: usize,
) -> SimResult<Vec<C64>> {
    ThreeCopySeries::new(coeffs.to_vec(), max_out)?.amplitudes(first, second)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeCopyMaximum {
    pub phi: f64,
    pub nu: f64,
    pub theta: f64,
    pub mu: f64,
    pub herald_prob: f64,
    pub grid_points: usize,
}

/// Brute-force maximum of the herald probability over `(φ, ν) ∈ [0, π]²`
/// with the vacuum-nulling angles, on a `points × points` grid refined
/// locally. Singular grid points are skipped.
pub fn max_three_copy_herald(qubit: QubitAmplitudes, points: usize) -> SimResult<ThreeCopyMaximum> {
    let prob = |phi: f64, nu: f64| {
        ThreeCopyConfig::new(qubit, phi, nu)
            .and_then(|c| run_three_copy(&c, 2))
            .map_or(f64::NEG_INFINITY, |o| o.probability)
    };
    let best = grid_refine_max(prob, (0.0, PI), (0.0, PI), points, 1e-10)?;
    if !best.value.is_finite() {
        return Err(SimError::invalid("no nonsingular (φ, ν) on the search grid"));
    }
    let config = ThreeCopyConfig::new(qubit, best.x, best.y)?;
    Ok(ThreeCopyMaximum {
        phi: best.x,
        nu: best.y,
        theta: config.theta,
        mu: config.mu,
        herald_prob: best.value,
        grid_points: points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::three_copy_herald_prob;
    use crate::sources::{squeezed_coherent_amplitudes, DisplaceParams, SqueezeParams};

    #[test]
    fn certainty_at_symmetric_phases() {
        let q = QubitAmplitudes::from_beta(0.7).unwrap();
        let cfg = ThreeCopyConfig::new(q, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4).unwrap();
        let out = run_three_copy(&cfg, 3).unwrap();
        let d = out.output_distribution(0).unwrap();
        assert!((d[1] - 1.0).abs() < 1e-12);
        let cf = three_copy_herald_prob(&q, cfg.theta, cfg.phi, cfg.mu, cfg.nu);
        assert!((out.probability - cf).abs() < 1e-14);
    }

    #[test]
    fn vacuum_inputs_never_herald() {
        let q = QubitAmplitudes::from_beta(0.0).unwrap();
        let cfg = ThreeCopyConfig::new(q, 1.0, 1.0).unwrap();
        let out = run_three_copy(&cfg, 3).unwrap();
        assert_eq!(out.probability, 0.0);
        assert!(out.is_degenerate());
    }

    #[test]
    fn small_cutoff_rejected() {
        let cfg = ThreeCopyConfig::new(QubitAmplitudes::from_beta(1.0).unwrap(), 1.0, 1.0).unwrap();
        assert!(run_three_copy(&cfg, 1).is_err());
    }

    #[test]
    fn series_matches_fock_simulation() {
        let r = 0.3;
        let sq = SqueezeParams::real(r).unwrap();
        let disp = DisplaceParams::real(crate::sources::h2_nulling_displacement(r));
        let n = 12;
        let coeffs = squeezed_coherent_amplitudes(sq, disp, n).unwrap();
        let input = FockState::single_mode(coeffs.clone(), 0.0).unwrap();
        let (first, second) = (BeamSplitterSpec::new(0.4, 1.1), BeamSplitterSpec::new(-0.7, 2.3));
        let full = {
            let s = input.tensor(&input).tensor(&input);
            let s = apply_beamsplitter(&s, 1, 2, &first).unwrap();
            apply_beamsplitter(&s, 0, 1, &second).unwrap()
        };
        let series = three_copy_herald_series(&coeffs, &first, &second, n - 2).unwrap();
        for (m, a) in series.iter().enumerate() {
            let direct = full.amplitude([m, 2, 0]).unwrap();
            assert!((a - direct).norm() < 1e-14, "m = {m}: {a} vs {direct}");
        }
    }

    #[test]
    fn series_needs_enough_coefficients() {
        let c = vec![C64::new(1.0, 0.0); 4];
        let bs = BeamSplitterSpec::symmetric();
        assert!(three_copy_herald_series(&c, &bs, &bs, 2).is_err());
        assert!(three_copy_herald_series(&c, &bs, &bs, 1).is_ok());
    }
}
