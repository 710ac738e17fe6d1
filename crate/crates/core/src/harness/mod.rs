//! Monte Carlo experiments: success estimation, minimal-budget search,
//! budget curves with fits, verification and file output.

mod fit;
mod output;
mod verify;

pub use fit::{fit_cubic, fit_exponential, CubicFit, ExponentialFit, Fit};
pub use output::{emit_outputs, render_svg, CSV_HEADER};
pub use verify::{verify_all, verify_profiles, CheckResult, CheckStatus, VerifyReport, ORACLE_MAX_N};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{CoefficientProfile, FamilyInstance};
use crate::pauli::BasisString;
use crate::protocols::{
    run_adaptive, run_nonadaptive_uniform, AdaptiveConfig, ProtocolResult, StageBudgets,
    StageRule, NONADAPTIVE_MAX_QUBITS,
};
use crate::rng::{derive_key, CounterRng};
use crate::sampler::ShotStream;
use crate::stats::{wilson_interval, Z_95};

/// Points with fewer trials are reported but never fitted.
pub const MIN_FIT_TRIALS: u64 = 100;

/// Key domain for hidden-string draws, kept apart from shot streams.
const HIDDEN_DOMAIN: u64 = 0x4849_4444_454E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    AdaptiveLlr,
    AdaptiveArgmax,
    NonadaptiveUniform,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [
        Protocol::AdaptiveLlr,
        Protocol::AdaptiveArgmax,
        Protocol::NonadaptiveUniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::AdaptiveLlr => "adaptive-llr",
            Protocol::AdaptiveArgmax => "adaptive-argmax",
            Protocol::NonadaptiveUniform => "nonadaptive-uniform",
        }
    }

    pub fn is_adaptive(self) -> bool {
        !matches!(self, Protocol::NonadaptiveUniform)
    }

    fn stage_rule(self) -> StageRule {
        match self {
            Protocol::AdaptiveArgmax => StageRule::ArgMaxAbs,
            _ => StageRule::Llr,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown protocol `{s}`")))
    }
}

/// How adaptive stage budgets scale with the search knob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdaptiveAllocation {
    /// Knob `m`: every candidate at every stage gets `m` shots.
    EqualM,
    /// Knob `t`: `m_k = ⌈t (μ_min/μ_k)²⌉`, the per-stage bound's shape
    /// with the weakest stage receiving `t`.
    Theorem1,
}

/// Budget search policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepPolicy {
    /// First knob value tried.
    pub start: u64,
    /// Give up once the knob would exceed this.
    pub ceiling: u64,
    /// Stop bisecting when `(hi − lo) ≤ relative_width · hi`.
    pub relative_width: f64,
    /// A budget passes when the Wilson lower bound is at least
    /// `success_threshold − tolerance`.
    pub tolerance: f64,
}

impl Default for SweepPolicy {
    fn default() -> Self {
        Self {
            start: 1,
            ceiling: 1 << 32,
            relative_width: 0.05,
            tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Qubit counts; `None` means the protocol's default range.
    pub n_values: Option<Vec<usize>>,
    pub epsilon: f64,
    pub eta: f64,
    pub success_threshold: f64,
    pub trials_per_point: u64,
    pub seed: u64,
    pub protocol: Protocol,
    pub sweep: SweepPolicy,
    pub adaptive_allocation: AdaptiveAllocation,
    /// Largest `n` a non-adaptive sweep visits.
    pub nonadaptive_max_n: usize,
    /// Pin `b⋆` instead of drawing it uniformly per trial.
    pub fixed_hidden: Option<BasisString>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_values: None,
            epsilon: 0.5,
            eta: 0.1,
            success_threshold: 0.9,
            trials_per_point: 500,
            seed: 1,
            protocol: Protocol::AdaptiveLlr,
            sweep: SweepPolicy::default(),
            adaptive_allocation: AdaptiveAllocation::EqualM,
            nonadaptive_max_n: 6,
            fixed_hidden: None,
        }
    }
}

fn in_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} must lie in (0, 1)")))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        in_open_unit("epsilon", self.epsilon)?;
        in_open_unit("eta", self.eta)?;
        in_open_unit("success_threshold", self.success_threshold)?;
        if self.trials_per_point == 0 {
            return Err(Error::Config("trials_per_point must be positive".into()));
        }
        if self.sweep.start == 0 || self.sweep.start > self.sweep.ceiling {
            return Err(Error::Config(format!(
                "sweep start {} must lie in [1, ceiling = {}]",
                self.sweep.start, self.sweep.ceiling
            )));
        }
        if !(self.sweep.relative_width > 0.0 && self.sweep.relative_width < 1.0) {
            return Err(Error::Config("sweep.relative_width must lie in (0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.sweep.tolerance) {
            return Err(Error::Config("sweep.tolerance must lie in [0, 1)".into()));
        }
        if self.nonadaptive_max_n > NONADAPTIVE_MAX_QUBITS {
            return Err(Error::Config(format!(
                "nonadaptive_max_n {} exceeds the cap {NONADAPTIVE_MAX_QUBITS}",
                self.nonadaptive_max_n
            )));
        }
        let ns = self.n_values();
        if ns.is_empty() {
            return Err(Error::Config("no qubit counts to run".into()));
        }
        for &n in &ns {
            if n == 0 {
                return Err(Error::Config("n must be positive".into()));
            }
            if !self.protocol.is_adaptive() && n > NONADAPTIVE_MAX_QUBITS {
                return Err(Error::Config(format!(
                    "n = {n} exceeds the non-adaptive cap {NONADAPTIVE_MAX_QUBITS}"
                )));
            }
            CoefficientProfile::corollary(n, self.epsilon)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(h) = &self.fixed_hidden {
            if ns.iter().any(|&n| n != h.len()) {
                return Err(Error::Config(format!(
                    "fixed hidden string {h} does not match every n"
                )));
            }
        }
        Ok(())
    }

    /// Qubit counts for this protocol, with the non-adaptive cap applied to
    /// the default range.
    pub fn n_values(&self) -> Vec<usize> {
        match &self.n_values {
            Some(v) => v.clone(),
            None if self.protocol.is_adaptive() => (2..=12).collect(),
            None => (2..=self.nonadaptive_max_n).collect(),
        }
    }

    /// Total shots a knob value buys at `n`.
    pub fn total_budget(&self, n: usize, knob: u64) -> Result<u64> {
        Ok(if self.protocol.is_adaptive() {
            3 * self.stage_budgets(n, knob)?.iter().sum::<u64>()
        } else {
            knob
        })
    }

    /// Per-stage shots for an adaptive run at this knob.
    pub fn stage_budgets(&self, n: usize, knob: u64) -> Result<Vec<u64>> {
        let profile = CoefficientProfile::corollary(n, self.epsilon)?;
        Ok(match self.adaptive_allocation {
            AdaptiveAllocation::EqualM => vec![knob; n],
            AdaptiveAllocation::Theorem1 => {
                let mu_min = (1..=n)
                    .map(|k| profile.coeff(k).abs())
                    .fold(f64::INFINITY, f64::min);
                (1..=n)
                    .map(|k| {
                        let r = mu_min / profile.coeff(k).abs();
                        // The slack keeps exact ratios from rounding up a whole shot.
                        ((knob as f64) * r * r - 1e-9).ceil().max(1.0) as u64
                    })
                    .collect()
            }
        })
    }
}

/// Success rate of one protocol at one `(n, knob)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessEstimate {
    pub n: usize,
    pub knob: u64,
    pub budget: u64,
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Hidden string for a trial: pinned, or uniform over `{X,Y,Z}^n` from a
/// stream keyed by `(seed, n, trial)`.
pub fn trial_hidden(config: &ExperimentConfig, n: usize, trial: u64) -> Result<BasisString> {
    if let Some(h) = &config.fixed_hidden {
        return Ok(h.clone());
    }
    let mut rng = CounterRng::new(derive_key(&[config.seed, n as u64, trial, HIDDEN_DOMAIN]));
    BasisString::from_index(n, rng.random_range(0..3u64.pow(n as u32)))
}

/// One protocol run for trial `trial`. Streams depend on `(seed, n, trial)`
/// but not on the budget, so success-vs-budget curves share randomness.
pub fn run_trial(config: &ExperimentConfig, n: usize, knob: u64, trial: u64) -> Result<ProtocolResult> {
    let profile = CoefficientProfile::corollary(n, config.epsilon)?;
    let instance = FamilyInstance::new(profile, trial_hidden(config, n, trial)?)?;
    let mut stream = ShotStream::new(instance, derive_key(&[config.seed, n as u64, trial]));
    if config.protocol.is_adaptive() {
        let cfg = AdaptiveConfig {
            rule: config.protocol.stage_rule(),
            budgets: StageBudgets::Explicit(config.stage_budgets(n, knob)?),
            record: false,
        };
        run_adaptive(&mut stream, &cfg)
    } else {
        run_nonadaptive_uniform(&mut stream, knob, false)
    }
}

/// Runs `trials_per_point` trials in parallel; the reduction is ordered by
/// trial index.
pub fn estimate_success(config: &ExperimentConfig, n: usize, knob: u64) -> Result<SuccessEstimate> {
    if knob == 0 {
        return Err(Error::ZeroBudget);
    }
    let outcomes: Vec<bool> = (0..config.trials_per_point)
        .into_par_iter()
        .map(|t| run_trial(config, n, knob, t).map(|r| r.correct))
        .collect::<Result<_>>()?;
    let successes = outcomes.iter().filter(|&&c| c).count() as u64;
    let trials = config.trials_per_point;
    let (ci_low, ci_high) = wilson_interval(successes, trials, Z_95);
    Ok(SuccessEstimate {
        n,
        knob,
        budget: config.total_budget(n, knob)?,
        successes,
        trials,
        rate: successes as f64 / trials as f64,
        ci_low,
        ci_high,
    })
}

/// Outcome of the minimal-budget search at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetSearch {
    pub n: usize,
    /// The accepted estimate, or the last one tried if the ceiling was hit.
    pub chosen: SuccessEstimate,
    pub reached: bool,
    pub evaluations: Vec<SuccessEstimate>,
}

fn passes(config: &ExperimentConfig, e: &SuccessEstimate) -> bool {
    e.ci_low >= config.success_threshold - config.sweep.tolerance
}

/// Doubles the knob until the pass rule holds, then bisects the bracket to
/// the configured relative width and returns the smallest passing knob.
pub fn minimal_budget(config: &ExperimentConfig, n: usize) -> Result<BudgetSearch> {
    config.validate()?;
    let mut evaluations = Vec::new();
    let mut lo = 0u64;
    let mut knob = config.sweep.start;
    let mut hi = loop {
        let e = estimate_success(config, n, knob)?;
        let ok = passes(config, &e);
        evaluations.push(e.clone());
        if ok {
            break e;
        }
        lo = knob;
        if knob.saturating_mul(2) > config.sweep.ceiling {
            return Ok(BudgetSearch {
                n,
                chosen: e,
                reached: false,
                evaluations,
            });
        }
        knob *= 2;
    };
    while (hi.knob - lo) as f64 > config.sweep.relative_width * hi.knob as f64 && hi.knob - lo > 1 {
        let mid = lo + (hi.knob - lo) / 2;
        let e = estimate_success(config, n, mid)?;
        evaluations.push(e.clone());
        if passes(config, &e) {
            hi = e;
        } else {
            lo = mid;
        }
    }
    Ok(BudgetSearch {
        n,
        chosen: hi,
        reached: true,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub budget: u64,
    pub knob: u64,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub reached: bool,
}

/// Minimal budgets of one protocol across `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetCurve {
    pub protocol: Protocol,
    pub epsilon: f64,
    pub eta: f64,
    pub seed: u64,
    pub points: Vec<CurvePoint>,
    pub fit: Option<Fit>,
    /// Why no fit was produced, if none was.
    pub fit_error: Option<String>,
}

impl BudgetCurve {
    /// Points eligible for fitting.
    pub fn fit_points(&self) -> Vec<&CurvePoint> {
        self.points
            .iter()
            .filter(|p| p.reached && p.trials >= MIN_FIT_TRIALS)
            .collect()
    }

    /// `n` values at which the budget drops below the previous point's.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        self.points
            .windows(2)
            .filter(|w| w[1].budget < w[0].budget)
            .map(|w| w[1].n)
            .collect()
    }

    pub fn budget_at(&self, n: usize) -> Option<u64> {
        self.points.iter().find(|p| p.n == n && p.reached).map(|p| p.budget)
    }
}

/// Cubic fit for adaptive curves, exponential for non-adaptive ones.
pub fn fit_curve(curve: &mut BudgetCurve) {
    let pts = curve.fit_points();
    let xs: Vec<f64> = pts.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.budget as f64).collect();
    let fit = if curve.protocol.is_adaptive() {
        fit_cubic(&xs, &ys).map(Fit::Cubic)
    } else {
        fit_exponential(&xs, &ys).map(Fit::Exponential)
    };
    match fit {
        Ok(f) => {
            curve.fit = Some(f);
            curve.fit_error = None;
        }
        Err(e) => {
            curve.fit = None;
            curve.fit_error = Some(e.to_string());
        }
    }
}

/// Minimal-budget search at every configured `n`, followed by a fit.
pub fn budget_curve(config: &ExperimentConfig) -> Result<BudgetCurve> {
    budget_curve_with_progress(config, |_| {})
}

pub fn budget_curve_with_progress(
    config: &ExperimentConfig,
    mut progress: impl FnMut(&BudgetSearch),
) -> Result<BudgetCurve> {
    config.validate()?;
    let mut points = Vec::new();
    for n in config.n_values() {
        let s = minimal_budget(config, n)?;
        progress(&s);
        points.push(CurvePoint {
            n,
            budget: s.chosen.budget,
            knob: s.chosen.knob,
            success_rate: s.chosen.rate,
            ci_low: s.chosen.ci_low,
            ci_high: s.chosen.ci_high,
            trials: s.chosen.trials,
            reached: s.reached,
        });
    }
    let mut curve = BudgetCurve {
        protocol: config.protocol,
        epsilon: config.epsilon,
        eta: config.eta,
        seed: config.seed,
        points,
        fit: None,
        fit_error: None,
    };
    fit_curve(&mut curve);
    Ok(curve)
}
