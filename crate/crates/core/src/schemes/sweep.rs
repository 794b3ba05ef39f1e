//! Parameter sweeps over detector efficiency, dark counts and splitter
//! perturbations, each point checked against its closed form.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dsv::{run_perturbed_bs, DsvSource};
use super::squeezed_coherent::squeezed_coherent_study;
use super::R_MAX;
use crate::closed_form::{
    dark_click_prob_cf, dark_purity_cf, lossy_click_prob, lossy_purity, perturbed_amplitudes, perturbed_herald_prob,
    perturbed_prob_n, perturbed_purity,
};
use crate::detection::DetectorModel;
use crate::error::{SimError, SimResult};
use crate::optics::BeamSplitterSpec;
use crate::sources::SqueezeParams;

pub const DEFAULT_SWEEP_POINTS: usize = 51;

/// Slack allowed on `[0, 1]` for probability columns.
const PROB_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Detector efficiency `η`.
    Eta,
    /// Efficiency and dark-count probability `(η, p_d)`.
    Dark,
    /// Splitter perturbations `(δ₁, δ₂)`.
    Perturbed,
    /// Squeezing `r` of the displaced sources.
    SqueezedCoherent,
}

impl SweepKind {
    pub const ALL: [SweepKind; 4] = [SweepKind::Eta, SweepKind::Dark, SweepKind::Perturbed, SweepKind::SqueezedCoherent];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Eta => "eta",
            SweepKind::Dark => "dark",
            SweepKind::Perturbed => "perturbed",
            SweepKind::SqueezedCoherent => "squeezed-coherent",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = SimError;

    fn from_str(s: &str) -> SimResult<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::invalid(format!("unknown sweep kind '{s}' (expected eta, dark, perturbed or squeezed-coherent)")))
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Grids and fixed parameters of a sweep. `first` and `second` are the axes
/// in the order listed by [`SweepKind`]; `second` is ignored for
/// one-dimensional kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub r: f64,
    pub varphi: f64,
    pub cutoff: Option<usize>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl SweepParams {
    /// Figure ranges at `r = asinh(1)` with `points` per axis.
    pub fn defaults(kind: SweepKind, points: usize) -> Self {
        let (first, second) = match kind {
            SweepKind::Eta => (linspace(0.0, 1.0, points), Vec::new()),
            SweepKind::Dark => (linspace(0.0, 1.0, points), linspace(0.0, 0.1, points)),
            SweepKind::Perturbed => (linspace(-0.5, 0.5, points), linspace(-0.5, 0.5, points)),
            SweepKind::SqueezedCoherent => (linspace(0.1, 2.0, points), Vec::new()),
        };
        Self { r: R_MAX, varphi: 0.0, cutoff: None, first, second }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub r: Option<f64>,
    pub varphi: Option<f64>,
    pub cutoff: Option<usize>,
    pub max_leakage: f64,
    /// Largest numeric-vs-closed-form difference over the sweep.
    pub max_abs_diff: Option<f64>,
    pub notes: Vec<String>,
}

/// A table with named columns; `axes` name the leading grid columns. Empty
/// cells (`None`) mark undefined values such as a purity without clicks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub axes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub metadata: SweepMetadata,
}

fn is_probability_column(name: &str) -> bool {
    !name.contains("verbatim")
        && (name.contains("prob")
            || name.contains("purity")
            || name.contains("content")
            || name.contains("production")
            || name.ends_with("_joint")
            || name.starts_with("single_p"))
}

impl SweepResult {
    /// Checks shape, `[0, 1]` bounds on probability columns, and that the
    /// grid coordinates are strictly increasing in row order.
    pub fn new(
        kind: SweepKind,
        axes: &[&str],
        columns: &[&str],
        rows: Vec<Vec<Option<f64>>>,
        metadata: SweepMetadata,
    ) -> SimResult<Self> {
        if columns[..axes.len()] != *axes {
            return Err(SimError::invalid("axis columns must lead the table"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(SimError::invalid(format!("row {i} has {} cells, expected {}", row.len(), columns.len())));
            }
            for (name, cell) in columns.iter().zip(row) {
                if let Some(v) = cell {
                    if is_probability_column(name) && !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(v) {
                        return Err(SimError::invalid(format!("{name} = {v} outside [0, 1] in row {i}")));
                    }
                }
            }
        }
        let coords = |row: &Vec<Option<f64>>| -> Vec<f64> { row[..axes.len()].iter().map(|c| c.unwrap_or(f64::NAN)).collect() };
        for pair in rows.windows(2) {
            let (a, b) = (coords(&pair[0]), coords(&pair[1]));
            if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
                return Err(SimError::invalid(format!("grid not increasing: {a:?} then {b:?}")));
            }
        }
        Ok(Self {
            kind,
            axes: axes.iter().map(|s| s.to_string()).collect(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows,
            metadata,
        })
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|row| row[j]).collect())
    }
}

fn check_grid(name: &str, grid: &[f64]) -> SimResult<()> {
    if grid.is_empty() {
        return Err(SimError::invalid(format!("{name} grid is empty")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SimError::invalid(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

fn diff(a: Option<f64>, b: Option<f64>) -> f64 {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs(),
        _ => 0.0,
    }
}

fn max_of(rows: &[Vec<Option<f64>>], col: usize) -> f64 {
    rows.iter().filter_map(|r| r[col]).fold(0.0, f64::max)
}

/// Tabulates the metrics of `kind` over the grids in `params`.
///
/// Points are evaluated in parallel and assembled in grid order, so the
/// result does not depend on scheduling.
pub fn sweep(kind: SweepKind, params: &SweepParams) -> SimResult<SweepResult> {
    check_grid(kind.axis_names()[0], &params.first)?;
    if kind.axis_names().len() == 2 {
        check_grid(kind.axis_names()[1], &params.second)?;
    }
    let mut result = match kind {
        SweepKind::Eta => eta_sweep(params),
        SweepKind::Dark => dark_sweep(params),
        SweepKind::Perturbed => perturbed_sweep(params),
        SweepKind::SqueezedCoherent => return squeezed_coherent_study(&params.first),
    }?;
    if let Some(d) = result.metadata.max_abs_diff {
        if d > 1e-8 {
            log::warn!("{kind} sweep deviates from its closed form by {d:e}");
        }
    }
    result.metadata.r = Some(params.r);
    result.metadata.varphi = Some(params.varphi);
    Ok(result)
}

impl SweepKind {
    pub fn axis_names(self) -> &'static [&'static str] {
        match self {
            SweepKind::Eta => &["eta"],
            SweepKind::Dark => &["eta", "p_dark"],
            SweepKind::Perturbed => &["delta1", "delta2"],
            SweepKind::SqueezedCoherent => &["r"],
        }
    }
}

fn symmetric_source(params: &SweepParams) -> SimResult<DsvSource> {
    DsvSource::new(SqueezeParams::new(params.r, params.varphi)?, BeamSplitterSpec::symmetric(), params.cutoff)
}

fn eta_sweep(params: &SweepParams) -> SimResult<SweepResult> {
    let source = symmetric_source(params)?;
    let r = params.r;
    let rows = params
        .first
        .par_iter()
        .map(|&eta| {
            let stats = source.detect(&DetectorModel::lossy(eta)?)?;
            let purity = stats.single_photon();
            let cf_p = lossy_click_prob(r, eta);
            let cf_purity = lossy_purity(r, eta);
            let d = (stats.click_prob - cf_p).abs().max(diff(purity, Some(cf_purity)));
            Ok(vec![Some(eta), Some(stats.click_prob), purity, Some(cf_p), Some(cf_purity), Some(d), Some(source.leakage())])
        })
        .collect::<SimResult<Vec<_>>>()?;
    let metadata = SweepMetadata {
        cutoff: Some(source.cutoff),
        max_leakage: source.leakage(),
        max_abs_diff: Some(max_of(&rows, 5)),
        ..SweepMetadata::default()
    };
    SweepResult::new(
        SweepKind::Eta,
        &["eta"],
        &["eta", "herald_prob", "purity", "closed_form_herald_prob", "closed_form_purity", "abs_diff", "leakage"],
        rows,
        metadata,
    )
}

fn dark_sweep(params: &SweepParams) -> SimResult<SweepResult> {
    let source = symmetric_source(params)?;
    let r = params.r;
    let points: Vec<(f64, f64)> =
        params.first.iter().flat_map(|&eta| params.second.iter().map(move |&pd| (eta, pd))).collect();
    let rows = points
        .par_iter()
        .map(|&(eta, pd)| {
            let stats = source.detect(&DetectorModel::new(eta, pd)?)?;
            let purity = stats.single_photon();
            let cf_p = dark_click_prob_cf(r, eta, pd);
            let cf_purity = dark_purity_cf(r, eta, pd);
            // the printed purity carries a spurious overall sign
            let d = (stats.click_prob - cf_p).abs().max(diff(purity, Some(cf_purity.abs())));
            Ok(vec![
                Some(eta),
                Some(pd),
                Some(stats.click_prob),
                purity,
                Some(cf_p),
                cf_purity.is_finite().then_some(cf_purity),
                Some(d),
                Some(source.leakage()),
            ])
        })
        .collect::<SimResult<Vec<_>>>()?;
    let metadata = SweepMetadata {
        cutoff: Some(source.cutoff),
        max_leakage: source.leakage(),
        max_abs_diff: Some(max_of(&rows, 6)),
        notes: vec!["closed_form_purity_verbatim is the printed expression; it is compared in magnitude".into()],
        ..SweepMetadata::default()
    };
    SweepResult::new(
        SweepKind::Dark,
        &["eta", "p_dark"],
        &[
            "eta",
            "p_dark",
            "herald_prob",
            "purity",
            "closed_form_herald_prob",
            "closed_form_purity_verbatim",
            "abs_diff",
            "leakage",
        ],
        rows,
        metadata,
    )
}

fn perturbed_sweep(params: &SweepParams) -> SimResult<SweepResult> {
    let (r, varphi) = (params.r, params.varphi);
    let points: Vec<(f64, f64)> =
        params.first.iter().flat_map(|&d1| params.second.iter().map(move |&d2| (d1, d2))).collect();
    let rows = points
        .par_iter()
        .map(|&(d1, d2)| {
            let run = run_perturbed_bs(r, varphi, d1, d2, params.cutoff)?;
            let amps = perturbed_amplitudes(r, varphi, d1, d2);
            let cf_herald = perturbed_herald_prob(&amps)?;
            let cf_purity = perturbed_purity(&amps)?;
            let joint = |n: usize| run.joint_odd.get(n).copied().unwrap_or(0.0);
            let (cf1, cf3) = (perturbed_prob_n(&amps, 0), perturbed_prob_n(&amps, 1));
            let purity = run.purity();
            let d = [
                (run.click_prob() - cf_herald).abs(),
                diff(purity, Some(cf_purity)),
                (joint(0) - cf1).abs(),
                (joint(1) - cf3).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            Ok(vec![
                Some(d1),
                Some(d2),
                Some(run.click_prob()),
                purity,
                Some(joint(0)),
                Some(joint(1)),
                Some(cf_herald),
                Some(cf_purity),
                Some(cf1),
                Some(cf3),
                Some(d),
                Some(run.leakage),
            ])
        })
        .collect::<SimResult<Vec<_>>>()?;
    let metadata = SweepMetadata {
        cutoff: params.cutoff,
        max_leakage: max_of(&rows, 11),
        max_abs_diff: Some(max_of(&rows, 10)),
        ..SweepMetadata::default()
    };
    SweepResult::new(
        SweepKind::Perturbed,
        &["delta1", "delta2"],
        &[
            "delta1",
            "delta2",
            "herald_prob",
            "purity",
            "p1_joint",
            "p3_joint",
            "closed_form_herald_prob",
            "closed_form_purity",
            "closed_form_p1_joint",
            "closed_form_p3_joint",
            "abs_diff",
            "leakage",
        ],
        rows,
        metadata,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in SweepKind::ALL {
            assert_eq!(k.name().parse::<SweepKind>().unwrap(), k);
        }
        assert!("fig3".parse::<SweepKind>().is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 1.0, 51);
        assert_eq!(g.len(), 51);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[50], 1.0);
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
    }

    #[test]
    fn eta_sweep_endpoints() {
        let res = sweep(SweepKind::Eta, &SweepParams::defaults(SweepKind::Eta, 11)).unwrap();
        let p = res.column("herald_prob").unwrap();
        let purity = res.column("purity").unwrap();
        assert_eq!(p[0], Some(0.0));
        assert_eq!(purity[0], None);
        assert!((p[10].unwrap() - 0.25).abs() < 1e-10);
        assert!((purity[10].unwrap() - 1.0).abs() < 1e-10);
        assert!(res.metadata.max_abs_diff.unwrap() < 1e-10);
    }

    #[test]
    fn dark_sweep_zero_slice_matches_eta() {
        let mut params = SweepParams::defaults(SweepKind::Dark, 5);
        params.second = vec![0.0, 0.05];
        let dark = sweep(SweepKind::Dark, &params).unwrap();
        let mut eta_params = SweepParams::defaults(SweepKind::Eta, 5);
        eta_params.first = params.first.clone();
        let eta = sweep(SweepKind::Eta, &eta_params).unwrap();
        for (i, row) in eta.rows.iter().enumerate() {
            let d = &dark.rows[2 * i];
            assert_eq!(d[1], Some(0.0));
            assert_eq!(d[2], row[1]);
            assert_eq!(d[3], row[2]);
        }
        assert!(dark.metadata.max_abs_diff.unwrap() < 1e-10);
    }

    #[test]
    fn perturbed_center_is_pure() {
        let mut params = SweepParams::defaults(SweepKind::Perturbed, 3);
        params.second = vec![-0.2, 0.0];
        let res = sweep(SweepKind::Perturbed, &params).unwrap();
        let center = res.rows.iter().find(|r| r[0] == Some(0.0) && r[1] == Some(0.0)).unwrap();
        assert!((center[3].unwrap() - 1.0).abs() < 1e-12);
        assert!(res.metadata.max_abs_diff.unwrap() < 1e-8);
    }

    #[test]
    fn rejects_bad_grids() {
        let mut params = SweepParams::defaults(SweepKind::Eta, 3);
        params.first = vec![0.5, 0.2];
        assert!(sweep(SweepKind::Eta, &params).is_err());
        params.first = Vec::new();
        assert!(sweep(SweepKind::Eta, &params).is_err());
    }

    #[test]
    fn result_validation() {
        let ok = SweepResult::new(SweepKind::Eta, &["eta"], &["eta", "herald_prob"], vec![vec![Some(0.0), Some(0.5)]], SweepMetadata::default());
        assert!(ok.is_ok());
        let bad = SweepResult::new(SweepKind::Eta, &["eta"], &["eta", "herald_prob"], vec![vec![Some(0.0), Some(1.5)]], SweepMetadata::default());
        assert!(bad.is_err());
        let unordered = SweepResult::new(
            SweepKind::Eta,
            &["eta"],
            &["eta", "herald_prob"],
            vec![vec![Some(0.5), Some(0.1)], vec![Some(0.2), Some(0.1)]],
            SweepMetadata::default(),
        );
        assert!(unordered.is_err());
    }
}
