//! Squeezed-coherent inputs with the displacement `α = √(sinh 2r / 2)` that
//! removes the two-photon term.
//!
//! Two readings of the emission statistics are computed side by side:
//!
//! * single-mode: the squeezed-coherent state itself, with production
//!   probability `P(1)` and content `P(1)/Σ_{n≥1} P(n)`;
//! * three-copy: three such states through the "2","0" herald circuit, with
//!   `(φ, ν)` chosen to maximize the conditional single-photon content. The
//!   production probability is the herald probability and the content is
//!   `P(1 | herald)/Σ_{n≥1} P(n | herald)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{SweepKind, SweepMetadata, SweepResult};
use super::three_copy::ThreeCopySeries;
use crate::closed_form::three_copy_angles;
use crate::error::{SimError, SimResult};
use crate::optics::BeamSplitterSpec;
use crate::optimize::{golden_section_max, grid_refine_max, Maximum2};
use crate::sources::{
    h2_nulling_displacement, squeezed_coherent_amplitudes, squeezed_coherent_cutoff, DisplaceParams, SqueezeParams,
};

/// Photon-number tail tolerated in the three-copy input product.
const TOTAL_TAIL_TOL: f64 = 1e-12;
/// Largest output photon number the three-copy series is evaluated to.
const MAX_SERIES_PHOTONS: usize = 600;
/// Angle grid per axis for the content maximization.
const ANGLE_GRID: usize = 25;
/// Half-width of the warm-started angle search.
const WARM_BOX: f64 = 0.1;

fn inputs(r: f64) -> SimResult<(SqueezeParams, DisplaceParams)> {
    if !(r > 0.0) {
        return Err(SimError::invalid(format!("squeezed-coherent study needs r > 0, got {r}")));
    }
    Ok((SqueezeParams::real(r)?, DisplaceParams::real(h2_nulling_displacement(r))))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleModeEmission {
    pub r: f64,
    pub alpha: f64,
    pub p0: f64,
    pub p1: f64,
    pub content: f64,
}

/// Vacuum and one-photon probabilities of the single-mode state, read from
/// its exact leading amplitudes.
pub fn squeezed_coherent_single_mode(r: f64) -> SimResult<SingleModeEmission> {
    let (sq, disp) = inputs(r)?;
    let c = squeezed_coherent_amplitudes(sq, disp, 1)?;
    let (p0, p1) = (c[0].norm_sqr(), c[1].norm_sqr());
    Ok(SingleModeEmission { r, alpha: disp.alpha.re, p0, p1, content: p1 / (1.0 - p0) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeCopyEmission {
    pub r: f64,
    pub alpha: f64,
    pub phi: f64,
    pub nu: f64,
    /// Herald probability of the "2","0" pattern.
    pub production: f64,
    /// `P(herald, one output photon)`.
    pub p1_joint: f64,
    pub content: f64,
    pub max_photons: usize,
    /// Input weight above the evaluated photon number.
    pub leakage: f64,
}

/// Input photon number the three-copy product must reach at squeezing `r`,
/// or `None` when that exceeds the supported series length.
pub fn three_copy_reach(r: f64) -> SimResult<Option<usize>> {
    let (sq, disp) = inputs(r)?;
    // the only failure left after validation is an oversized cutoff
    let top = squeezed_coherent_cutoff(sq, disp, TOTAL_TAIL_TOL / 3.0).ok().map(|n| 3 * n);
    Ok(top.filter(|&t| t <= MAX_SERIES_PHOTONS + 2))
}

/// Input amplitudes reaching far enough that the three-copy product drops
/// less than [`TOTAL_TAIL_TOL`], the largest output photon number, and the
/// dropped weight.
fn series_inputs(r: f64) -> SimResult<(Vec<C64>, usize, f64)> {
    let (sq, disp) = inputs(r)?;
    let top = three_copy_reach(r)?.ok_or_else(|| {
        SimError::invalid(format!("three-copy series at r = {r} needs more than {MAX_SERIES_PHOTONS} photons"))
    })?;
    let coeffs = squeezed_coherent_amplitudes(sq, disp, top)?;
    // total photon number of three independent copies up to `top`
    let p: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
    let conv = |a: &[f64], b: &[f64]| -> Vec<f64> {
        (0..=top).map(|t| (0..=t).map(|j| a[j] * b[t - j]).sum()).collect()
    };
    let total = conv(&conv(&p, &p), &p);
    let leakage = (1.0 - total.iter().sum::<f64>()).max(0.0);
    Ok((coeffs, top - 2, leakage))
}

struct Emission {
    production: f64,
    p1: f64,
    content: f64,
}

fn emission(series: &ThreeCopySeries, phi: f64, nu: f64) -> SimResult<Emission> {
    let (theta, mu) = three_copy_angles(phi, nu)?;
    let amps = series.amplitudes(&BeamSplitterSpec::new(theta, phi), &BeamSplitterSpec::new(mu, nu))?;
    let p: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
    let production: f64 = p.iter().sum();
    let emitted: f64 = p[1..].iter().sum();
    Ok(Emission { production, p1: p[1], content: if emitted > 0.0 { p[1] / emitted } else { 0.0 } })
}

/// Content-maximizing `(φ, ν)`: a full grid over `[0, π]²`, or a small box
/// around `start`.
fn best_angles(series: &ThreeCopySeries, start: Option<(f64, f64)>) -> SimResult<Maximum2> {
    let objective = |phi: f64, nu: f64| emission(series, phi, nu).map_or(f64::NEG_INFINITY, |e| e.content);
    match start {
        None => grid_refine_max(objective, (0.0, PI), (0.0, PI), ANGLE_GRID, 1e-9),
        Some((phi, nu)) => grid_refine_max(
            objective,
            ((phi - WARM_BOX).max(0.0), (phi + WARM_BOX).min(PI)),
            ((nu - WARM_BOX).max(0.0), (nu + WARM_BOX).min(PI)),
            5,
            1e-9,
        ),
    }
}

fn three_copy_at(r: f64, start: Option<(f64, f64)>) -> SimResult<ThreeCopyEmission> {
    let (coeffs, max_out, leakage) = series_inputs(r)?;
    super::check_leakage(leakage, "three-copy squeezed-coherent series")?;
    let series = ThreeCopySeries::new(coeffs, max_out)?;
    let best = best_angles(&series, start)?;
    let e = emission(&series, best.x, best.y)?;
    Ok(ThreeCopyEmission {
        r,
        alpha: h2_nulling_displacement(r),
        phi: best.x,
        nu: best.y,
        production: e.production,
        p1_joint: e.p1,
        content: e.content,
        max_photons: max_out,
        leakage,
    })
}

/// Three-copy reading at squeezing `r`, maximizing content over `(φ, ν) ∈ [0, π]²`.
pub fn squeezed_coherent_three_copy(r: f64) -> SimResult<ThreeCopyEmission> {
    three_copy_at(r, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductionPeak {
    pub single_mode: f64,
    pub three_copy: Option<f64>,
    pub three_copy_production: Option<f64>,
}

/// Squeezing that maximizes the production probability under each reading,
/// searched on `[lo, hi]`.
///
/// The three-copy search scans `r` in steps of about 0.1, carrying the
/// optimal angles from point to point, then refines by golden section.
pub fn production_argmax(lo: f64, hi: f64, tol: f64) -> SimResult<ProductionPeak> {
    let single = golden_section_max(
        |r| squeezed_coherent_single_mode(r).map_or(f64::NEG_INFINITY, |e| e.p1),
        lo,
        hi,
        tol,
    )?;
    let steps = (((hi - lo) / 0.1).ceil() as usize).max(2);
    let h = (hi - lo) / steps as f64;
    let mut start = None;
    let mut best: Option<ThreeCopyEmission> = None;
    for i in 0..=steps {
        let r = lo + i as f64 * h;
        if three_copy_reach(r)?.is_none() {
            break;
        }
        let e = three_copy_at(r, start)?;
        start = Some((e.phi, e.nu));
        if best.is_none_or(|b| e.production > b.production) {
            best = Some(e);
        }
    }
    let three = match best {
        Some(b) => {
            let warm = Some((b.phi, b.nu));
            Some(golden_section_max(
                |r| three_copy_at(r, warm).map_or(f64::NEG_INFINITY, |e| e.production),
                (b.r - h).max(lo),
                (b.r + h).min(hi),
                tol,
            )?)
        }
        None => None,
    };
    Ok(ProductionPeak {
        single_mode: single.x,
        three_copy: three.map(|m| m.x),
        three_copy_production: three.map(|m| m.value),
    })
}

/// Both readings tabulated over `r_grid`. Three-copy columns are empty where
/// the series would need more than the supported photon number.
pub fn squeezed_coherent_study(r_grid: &[f64]) -> SimResult<SweepResult> {
    let rows: Vec<SimResult<Vec<Option<f64>>>> = r_grid
        .par_iter()
        .map(|&r| {
            let single = squeezed_coherent_single_mode(r)?;
            let three = match three_copy_reach(r)? {
                Some(_) => Some(squeezed_coherent_three_copy(r)?),
                None => None,
            };
            Ok(vec![
                Some(r),
                Some(single.alpha),
                Some(single.p0),
                Some(single.p1),
                Some(single.content),
                three.map(|t| t.production),
                three.map(|t| t.p1_joint),
                three.map(|t| t.content),
                three.map(|t| t.phi),
                three.map(|t| t.nu),
                three.map(|t| t.leakage),
            ])
        })
        .collect();
    let rows = rows.into_iter().collect::<SimResult<Vec<_>>>()?;
    let max_leakage = rows.iter().filter_map(|row| row[10]).fold(0.0, f64::max);
    SweepResult::new(
        SweepKind::SqueezedCoherent,
        &["r"],
        &[
            "r",
            "alpha",
            "single_p0",
            "single_p1",
            "single_content",
            "three_copy_production",
            "three_copy_p1_joint",
            "three_copy_content",
            "three_copy_phi",
            "three_copy_nu",
            "leakage",
        ],
        rows,
        SweepMetadata { max_leakage, ..SweepMetadata::default() },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_closed_form() {
        for r in [0.2, 0.36, 1.0, 5.0] {
            let e = squeezed_coherent_single_mode(r).unwrap();
            let a2 = (2.0 * r).sinh() / 2.0;
            let p0 = (-a2 * (1.0 - r.tanh())).exp() / r.cosh();
            assert!((e.p0 - p0).abs() < 1e-14);
            assert!((e.p1 - p0 * r.tanh()).abs() < 1e-14);
        }
        assert!(squeezed_coherent_single_mode(0.0).is_err());
    }

    #[test]
    fn three_copy_content_at_low_squeezing() {
        let e = squeezed_coherent_three_copy(0.36).unwrap();
        assert!((e.content - 0.96896).abs() < 1e-4, "{e:?}");
        assert!((e.production - 0.011575).abs() < 1e-5, "{e:?}");
        assert!(e.leakage < 1e-12);
    }

    #[test]
    fn large_squeezing_is_out_of_reach() {
        assert_eq!(three_copy_reach(5.0).unwrap(), None);
        assert!(squeezed_coherent_three_copy(5.0).is_err());
        assert!(three_copy_reach(0.5).unwrap().is_some());
    }
}
