//! The reproduction suite: each published figure or identity recomputed from
//! the simulator and compared with its reference value.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{
    dark_click_prob_cf, dark_purity_cf, herald_prob_n, lossy_click_prob, lossy_purity, mixing_amplitudes,
    mixing_exponent, perturbed_amplitudes, perturbed_herald_prob, perturbed_prob_n, perturbed_purity,
    single_detection_amplitudes, three_copy_coefficients, three_copy_quoted_max,
};
use crate::detection::{herald, DetectorModel};
use crate::error::SimResult;
use crate::fock::FockState;
use crate::optics::{apply_beamsplitter, apply_phase, bs_matrix, unitarity_defect, BeamSplitterSpec};
use crate::schemes::{
    max_three_copy_herald, optimize_herald, production_argmax, run_dsv_source, run_perturbed_bs, run_three_copy,
    squeezed_coherent_single_mode, squeezed_coherent_three_copy, three_copy_reach, DsvSource, ThreeCopyConfig, R_MAX,
};
use crate::sources::{squeezed_vacuum, two_mode_squeezed, QubitAmplitudes, SqueezeParams};

/// Seed of the random `(φ, ν)` draws in the three-copy check.
pub const THREE_COPY_SEED: u64 = 0x5eed_0003;

/// Where a reference value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Quoted in the literature being reproduced.
    Published,
    /// Derived analytically for this suite.
    Derived,
    /// Evaluated from a closed-form expression.
    ClosedForm,
    /// Informational only; the check cannot fail on value.
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub reference: Option<f64>,
    pub source: Reference,
    pub computed: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn within(label: impl Into<String>, reference: f64, source: Reference, computed: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            reference: Some(reference),
            source,
            computed: Some(computed),
            tolerance: Some(tol),
            passed: (computed - reference).abs() <= tol,
        }
    }

    /// `computed ≤ bound`, for worst-case deviations and runtimes.
    pub fn at_most(label: impl Into<String>, computed: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            reference: Some(0.0),
            source: Reference::Derived,
            computed: Some(computed),
            tolerance: Some(bound),
            passed: computed <= bound,
        }
    }

    pub fn in_range(label: impl Into<String>, computed: Option<f64>, lo: f64, hi: f64) -> Self {
        Self {
            label: label.into(),
            reference: Some(0.5 * (lo + hi)),
            source: Reference::Published,
            computed,
            tolerance: Some(0.5 * (hi - lo)),
            passed: computed.is_some_and(|c| (lo..=hi).contains(&c)),
        }
    }

    pub fn report(label: impl Into<String>, computed: f64) -> Self {
        Self {
            label: label.into(),
            reference: None,
            source: Reference::Report,
            computed: Some(computed),
            tolerance: None,
            passed: true,
        }
    }

    fn unavailable(label: impl Into<String>, reference: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            reference: Some(reference),
            source: Reference::Published,
            computed: None,
            tolerance: Some(tol),
            passed: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub elapsed_s: f64,
    pub passed: bool,
}

impl CriterionReport {
    pub fn check(&self, label_prefix: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.label.starts_with(label_prefix))
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        writeln!(f, "[{verdict}] criterion {}: {} ({:.2} s)", self.id, self.title, self.elapsed_s)?;
        for c in &self.checks {
            let num = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.10}"));
            writeln!(
                f,
                "    {} {:<58} ref {:>14} ({:?})  got {:>14}  tol {}",
                if c.passed { "ok  " } else { "FAIL" },
                c.label,
                num(c.reference),
                c.source,
                num(c.computed),
                c.tolerance.map_or_else(|| "-".to_string(), |t| format!("{t:.3e}")),
            )?;
        }
        for n in &self.notes {
            writeln!(f, "    note: {n}")?;
        }
        Ok(())
    }
}

struct Builder {
    id: u8,
    title: &'static str,
    start: Instant,
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl Builder {
    fn new(id: u8, title: &'static str) -> Self {
        Self { id, title, start: Instant::now(), checks: Vec::new(), notes: Vec::new() }
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    /// Closes the report; `pass_rule` overrides the all-checks-pass default.
    fn finish_with(mut self, result: SimResult<()>, pass_rule: Option<bool>) -> CriterionReport {
        if let Err(e) = result {
            self.checks.push(Check {
                label: format!("error: {e}"),
                reference: None,
                source: Reference::Report,
                computed: None,
                tolerance: None,
                passed: false,
            });
        }
        let all = self.checks.iter().all(|c| c.passed);
        let errored = self.checks.iter().any(|c| c.label.starts_with("error:"));
        CriterionReport {
            id: self.id,
            title: self.title.to_string(),
            elapsed_s: self.elapsed(),
            passed: !errored && pass_rule.unwrap_or(all),
            checks: self.checks,
            notes: self.notes,
        }
    }

    fn finish(self, result: SimResult<()>) -> CriterionReport {
        self.finish_with(result, None)
    }
}

/// One-photon herald law of the mixed squeezed vacua.
pub fn criterion_1() -> CriterionReport {
    let mut b = Builder::new(1, "herald probability follows tanh²r/cosh²r");
    let res = (|| {
        for r in [0.1, 0.36, 0.8814, 1.2] {
            let run = run_dsv_source(r, 0.0, None, &DetectorModel::ideal())?;
            b.push(Check::within(format!("P(click) at r={r}"), herald_prob_n(r, 1), Reference::ClosedForm, run.click_prob, 1e-10));
        }
        let p036 = run_dsv_source(0.36, 0.0, None, &DetectorModel::ideal())?.click_prob;
        b.push(Check::within("P(click) at r=0.36", 0.105, Reference::Published, p036, 1e-3));
        let pmax = run_dsv_source(0.88137, 0.0, None, &DetectorModel::ideal())?.click_prob;
        b.push(Check::within("P(click) at r=0.88137", 0.25, Reference::Published, pmax, 1e-4));
        Ok(())
    })();
    b.push(Check::at_most("runtime [s]", b.elapsed(), 1.0));
    b.finish(res)
}

/// Golden-section optimum of the herald probability.
pub fn criterion_2() -> CriterionReport {
    let mut b = Builder::new(2, "optimal squeezing r* = asinh(1), p* = 1/4");
    let res = (|| {
        let (r, p) = optimize_herald(0.5, 1.2, 1e-9)?;
        b.push(Check::within("r*", 1f64.asinh(), Reference::Derived, r, 1e-5));
        b.push(Check::within("p*", 0.25, Reference::Derived, p, 1e-6));
        Ok(())
    })();
    b.push(Check::at_most("runtime [s]", b.elapsed(), 1.0));
    b.finish(res)
}

/// `(φ, ν)` pairs away from the singular lines of the angle formulas.
pub fn three_copy_samples(count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        let nu: f64 = rng.gen_range(0.0..2.0 * PI);
        if nu.sin().abs() > 0.05 && phi.sin().abs().max((phi + nu).sin().abs()) > 0.05 {
            out.push((phi, nu));
        }
    }
    out
}

/// Three-copy circuit heralds `|1⟩` with certainty.
pub fn criterion_3() -> CriterionReport {
    let mut b = Builder::new(3, "three-copy herald yields |1⟩ with certainty");
    let res = (|| {
        let mut worst = 0.0f64;
        let mut worst_vacuum = 0.0f64;
        let samples = three_copy_samples(20, THREE_COPY_SEED);
        for beta in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let q = QubitAmplitudes::from_beta(beta)?;
            for &(phi, nu) in &samples {
                let cfg = ThreeCopyConfig::new(q, phi, nu)?;
                let out = run_three_copy(&cfg, 3)?;
                let dist = out.output_distribution(0).unwrap_or_default();
                let dev = dist
                    .iter()
                    .enumerate()
                    .map(|(n, p)| (p - if n == 1 { 1.0 } else { 0.0 }).abs())
                    .fold(if dist.is_empty() { 1.0 } else { 0.0 }, f64::max);
                worst = worst.max(dev);
                let (c0, _) = three_copy_coefficients(&q, cfg.theta, cfg.phi, cfg.mu, cfg.nu);
                worst_vacuum = worst_vacuum.max(c0.norm());
            }
        }
        b.push(Check::at_most("max |P(n | herald) − δ(n,1)|, 20 (φ,ν) × 5 β", worst, 1e-10));
        b.push(Check::at_most("max |vacuum coefficient| (closed form)", worst_vacuum, 1e-12));
        Ok(())
    })();
    b.push(Check::at_most("runtime [s]", b.elapsed(), 10.0));
    b.finish(res)
}

/// Inefficient detector without dark counts.
pub fn criterion_4() -> CriterionReport {
    let mut b = Builder::new(4, "lossy detector matches the loss formulas");
    let res = (|| {
        let run = run_dsv_source(R_MAX, 0.0, None, &DetectorModel::lossy(0.5)?)?;
        // cosh 2r = 3 at r = asinh(1)
        b.push(Check::within("P(click) at η=0.5", 2.0 / 9.0, Reference::Derived, run.click_prob, 1e-10));
        b.push(Check::within("P(1 | click) at η=0.5", 9.0 / 16.0, Reference::Derived, run.purity.unwrap_or(f64::NAN), 1e-10));
        b.push(Check::within("loss formula P(click) at η=0.5", lossy_click_prob(R_MAX, 0.5), Reference::ClosedForm, run.click_prob, 1e-10));
        b.push(Check::within(
            "loss formula P(1 | click) at η=0.5",
            lossy_purity(R_MAX, 0.5),
            Reference::ClosedForm,
            run.purity.unwrap_or(f64::NAN),
            1e-10,
        ));
        let mut worst = 0.0f64;
        for i in 0..10 {
            let r = 0.1 + 0.11 * i as f64;
            let source = DsvSource::new(SqueezeParams::real(r)?, BeamSplitterSpec::symmetric(), None)?;
            for j in 0..10 {
                let eta = 0.1 + 0.1 * j as f64;
                let stats = source.detect(&DetectorModel::lossy(eta)?)?;
                let prod = stats.click_prob * stats.single_photon().unwrap_or(f64::NAN);
                worst = worst.max((prod - eta * herald_prob_n(r, 1)).abs());
            }
        }
        b.push(Check::at_most("max |P(click)·P(1|click) − η tanh²r/cosh²r|, 10×10", worst, 1e-10));
        Ok(())
    })();
    b.finish(res)
}

/// Dark counts against their closed forms, including the sign of the
/// printed purity.
pub fn criterion_5() -> CriterionReport {
    let mut b = Builder::new(5, "dark-count formulas match the POVM computation");
    let res = (|| {
        let (mut worst_p, mut worst_purity) = (0.0f64, 0.0f64);
        for r in [0.2, 0.45, 0.7, R_MAX, 1.1] {
            let source = DsvSource::new(SqueezeParams::real(r)?, BeamSplitterSpec::symmetric(), None)?;
            for eta in [0.1, 0.3, 0.5, 0.8, 1.0] {
                for pd in [0.0, 0.01, 0.05, 0.1, 0.3] {
                    let stats = source.detect(&DetectorModel::new(eta, pd)?)?;
                    worst_p = worst_p.max((stats.click_prob - dark_click_prob_cf(r, eta, pd)).abs());
                    let purity = stats.single_photon().unwrap_or(f64::NAN);
                    worst_purity = worst_purity.max((purity - dark_purity_cf(r, eta, pd).abs()).abs());
                }
            }
        }
        b.push(Check::at_most("max |P(click) − dark-count formula|, 5×5×5", worst_p, 1e-10));
        b.push(Check::at_most("max |P(1|click) − |printed purity||, 5×5×5", worst_purity, 1e-10));
        let oracle = run_dsv_source(0.6, 0.0, None, &DetectorModel::ideal())?.purity.unwrap_or(f64::NAN);
        b.push(Check::within("P(1|click) at η=1, p_d=0 (simulation)", 1.0, Reference::Derived, oracle, 1e-10));
        b.push(Check::within("printed purity at η=1, p_d=0 (sign anomaly)", -1.0, Reference::Derived, dark_purity_cf(0.6, 1.0, 0.0), 1e-12));
        b.note("the printed conditional purity equals minus the Bayes value everywhere; it is compared in magnitude");
        Ok(())
    })();
    b.finish(res)
}

/// Detuned mixing splitter against the odd-photon series.
pub fn criterion_6() -> CriterionReport {
    let mut b = Builder::new(6, "perturbed splitter matches the odd-photon series");
    let res = (|| {
        let deltas = [-0.3, -0.1, 0.0, 0.1, 0.3];
        let (mut worst_purity, mut worst_n) = (0.0f64, 0.0f64);
        let mut cutoff = None;
        for &d1 in &deltas {
            for &d2 in &deltas {
                let run = run_perturbed_bs(R_MAX, 0.0, d1, d2, cutoff)?;
                cutoff = Some(run.cutoff);
                let amps = perturbed_amplitudes(R_MAX, 0.0, d1, d2);
                let purity = run.purity().unwrap_or(f64::NAN);
                worst_purity = worst_purity.max((purity - perturbed_purity(&amps)?).abs());
                worst_n = worst_n.max((run.click_prob() - perturbed_herald_prob(&amps)?).abs());
                for (n, p) in run.joint_odd.iter().enumerate() {
                    worst_n = worst_n.max((p - perturbed_prob_n(&amps, n)).abs());
                }
                if d1 == 0.0 && d2 == 0.0 {
                    b.push(Check::within("P(1 | click) at δ=(0,0)", 1.0, Reference::Derived, purity, 1e-12));
                }
            }
        }
        b.push(Check::at_most("max |purity − odd-series purity|, δ ∈ {0,±0.1,±0.3}²", worst_purity, 1e-8));
        b.push(Check::at_most("max |P(click, 2n+1) − series term|, all n", worst_n, 1e-8));
        Ok(())
    })();
    b.finish(res)
}

/// Squeezed-coherent figures under both readings of the emission
/// statistics. A quoted figure counts as reproduced when either reading
/// meets it; the criterion passes when one reading meets all of them.
pub fn criterion_7() -> CriterionReport {
    let mut b = Builder::new(7, "squeezed-coherent production and content");
    let mut single_ok = true;
    let mut three_ok = true;
    let res = (|| {
        let three = squeezed_coherent_three_copy(0.36)?;
        let single = squeezed_coherent_single_mode(0.36)?;
        let mut both = |label: &str, reference: f64, tol: f64, s: Option<f64>, t: Option<f64>, b: &mut Builder| {
            let cs = s.map_or_else(|| Check::unavailable(format!("{label} [single-mode]"), reference, tol), |v| {
                Check::within(format!("{label} [single-mode]"), reference, Reference::Published, v, tol)
            });
            let ct = t.map_or_else(|| Check::unavailable(format!("{label} [three-copy]"), reference, tol), |v| {
                Check::within(format!("{label} [three-copy]"), reference, Reference::Published, v, tol)
            });
            single_ok &= cs.passed;
            three_ok &= ct.passed;
            b.push(cs);
            b.push(ct);
        };
        both("7a content at r=0.36", 0.965, 0.005, Some(single.content), Some(three.content), &mut b);
        both("7b production at r=0.36", 0.012, 0.002, Some(single.p1), Some(three.production), &mut b);
        let far = squeezed_coherent_single_mode(5.0)?;
        let far_three = match three_copy_reach(5.0)? {
            Some(_) => Some(squeezed_coherent_three_copy(5.0)?.content),
            None => None,
        };
        both("7c content at r=5", 0.82, 0.01, Some(far.content), far_three, &mut b);
        let peak = production_argmax(0.5, 1.3, 1e-4)?;
        let (cs, ct) = (
            Check::in_range("7d production argmax [single-mode]", Some(peak.single_mode), 0.79, 0.83),
            Check::in_range("7d production argmax [three-copy]", peak.three_copy, 0.79, 0.83),
        );
        single_ok &= cs.passed;
        three_ok &= ct.passed;
        b.push(cs);
        b.push(ct);
        b.note(format!(
            "three-copy optimum at r=0.36: φ={:.5}, ν={:.5}, P(1, herald)={:.6}",
            three.phi, three.nu, three.p1_joint
        ));
        if let Some(p) = peak.three_copy_production {
            b.note(format!("three-copy production peak value {p:.6}"));
        }
        if far_three.is_none() {
            let mut r = 1.0;
            while three_copy_reach(r + 0.1)?.is_some() {
                r += 0.1;
            }
            let last = squeezed_coherent_three_copy(r)?;
            b.note(format!(
                "three-copy series cannot reach r=5; at r={r:.1} its content is {:.4} and falling",
                last.content
            ));
        }
        b.note("content is P(1)/Σ_{n≥1}P(n); a figure is reproduced when either reading meets it");
        Ok(())
    })();
    b.finish_with(res, Some(single_ok || three_ok))
}

/// Structural identities of the optics and sources.
pub fn criterion_8() -> CriterionReport {
    let mut b = Builder::new(8, "structural and property suite");
    let res = (|| {
        let mut defect = 0.0f64;
        for i in 0..50 {
            let x = i as f64;
            let spec = BeamSplitterSpec::new(0.37 * x, 1.3 * x - 2.0).perturbed(0.01 * x, -0.02 * x);
            defect = defect.max(unitarity_defect(&bs_matrix(&spec)));
        }
        b.push(Check::at_most("max |Λ†Λ − I| over 50 splitters", defect, 1e-14));

        let mut drift = 0.0f64;
        let sq = squeezed_vacuum(SqueezeParams::new(0.5, 0.7)?, 20)?;
        let coh = crate::sources::coherent(crate::sources::DisplaceParams::new(C64::new(0.6, -0.4)), 20)?;
        let mut state = sq.tensor(&coh).tensor(&squeezed_vacuum(SqueezeParams::real(0.3)?, 20)?);
        let total = |s: &FockState| s.norm_sqr() + s.leakage();
        for (k, (a, bb)) in [(0, 1), (1, 2), (0, 2), (2, 1)].into_iter().enumerate() {
            let before = total(&state);
            state = apply_beamsplitter(&state, a, bb, &BeamSplitterSpec::new(0.3 + k as f64, 0.9 * k as f64))?;
            drift = drift.max((total(&state) - before).abs());
            let before = total(&state);
            state = apply_phase(&state, a, 0.4 * k as f64)?;
            drift = drift.max((total(&state) - before).abs());
        }
        b.push(Check::at_most("norm² + leakage drift under splitters and phases", drift, 1e-10));

        let (s1, s2) = (SqueezeParams::new(0.4, 0.3)?, SqueezeParams::new(0.7, -1.0)?);
        let spec = BeamSplitterSpec::new(0.3, 1.1);
        let n = 30;
        let mixed = apply_beamsplitter(&squeezed_vacuum(s1, n)?.tensor(&squeezed_vacuum(s2, n)?), 0, 1, &spec)?;
        let e = mixing_exponent(s1.lambda(), s2.lambda(), &spec);
        let norm = 1.0 / (s1.r().cosh() * s2.r().cosh()).sqrt();
        let expect = mixing_amplitudes(&e, norm, n);
        let mut dev = 0.0f64;
        for m in 0..=n {
            for k in 0..=n - m {
                dev = dev.max((mixed.amplitude([m, k])? - expect[m * (n + 1) + k]).norm());
            }
        }
        b.push(Check::at_most("mixing exponent vs simulated mixing (m+n ≤ 30)", dev, 1e-10));
        let heralded = herald(&mixed, &std::collections::BTreeMap::from([(1, 1)]))?;
        let single = single_detection_amplitudes(&e, norm, n);
        let mut dev = 0.0f64;
        if let Some(st) = &heralded.state {
            for m in 0..n {
                dev = dev.max((st.amplitude([m])? * heralded.probability.sqrt() - single[m]).norm());
            }
        }
        b.push(Check::at_most("one-photon detection amplitudes (m ≤ 29)", dev, 1e-10));

        let sq = SqueezeParams::new(0.7, 0.4)?;
        let source = DsvSource::new(sq, BeamSplitterSpec::symmetric(), None)?;
        let tmsv = two_mode_squeezed(sq, source.cutoff)?;
        let cut = source.cutoff;
        let mut dev = 0.0f64;
        for m in 0..=cut {
            for k in 0..=cut - m {
                dev = dev.max((source.state.amplitude([m, k])? - tmsv.amplitude([m, k])?).norm());
            }
        }
        b.push(Check::at_most(format!("two-mode squeezed vacuum vs splitter construction (m+n ≤ {cut})"), dev, 1e-10));

        let pair = FockState::vacuum(2, &[2, 2])?.apply_creation(0)?.apply_creation(1)?;
        let out = apply_beamsplitter(&pair, 0, 1, &BeamSplitterSpec::symmetric())?;
        b.push(Check::at_most("Hong–Ou–Mandel |⟨1,1|U|1,1⟩|", out.amplitude([1, 1])?.norm(), 1e-12));
        Ok(())
    })();
    b.finish(res)
}

/// Brute-force maximum of the three-copy herald probability.
pub fn criterion_9() -> CriterionReport {
    let mut b = Builder::new(9, "three-copy maximum herald probability (reported)");
    let res = (|| {
        let best = max_three_copy_herald(QubitAmplitudes::from_beta(1.0)?, 201)?;
        b.push(Check::report("brute-force max P(herald) at β=1", best.herald_prob));
        b.push(Check::report("quoted 16|β|³/81 at β=1", three_copy_quoted_max(1.0)));
        b.note(format!(
            "maximum at φ={:.6}, ν={:.6} (θ={:.6}, μ={:.6}); difference from 16/81: {:.3e}",
            best.phi,
            best.nu,
            best.theta,
            best.mu,
            best.herald_prob - three_copy_quoted_max(1.0)
        ));
        let beta = 0.8;
        let partial = max_three_copy_herald(QubitAmplitudes::from_beta(beta)?, 61)?;
        b.push(Check::report("brute-force max P(herald) at β=0.8", partial.herald_prob));
        b.note(format!(
            "at β=0.8: 16|β|³/81 = {:.6}, 16|β|⁶/81 = {:.6}",
            three_copy_quoted_max(beta),
            16.0 * beta.powi(6) / 81.0
        ));
        log::info!("three-copy maximum {:?}", best);
        Ok(())
    })();
    b.finish(res)
}

pub fn run_all() -> Vec<CriterionReport> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ]
}
