//! Cross-checks of the closed forms against the dense oracle and of the
//! bound machinery against exact enumeration.

use rand::Rng;
use serde::Serialize;

use crate::analysis::{
    bernoulli_kl, budget_formulas, kl_alpha, one_shot_kl, transcript_kl_bound, Allocation,
    HardPair,
};
use crate::error::{Error, Result};
use crate::family::{
    hard_pair_trace_distance, random_profile, trace_distance_bounds, CoefficientProfile,
    FamilyInstance,
};
use crate::oracle::{
    build_pauli_prefix, build_projector, build_state, born_probability, hermitian_eig,
    trace_distance, ORACLE_MAX_QUBITS,
};
use crate::pauli::{BasisString, Outcome, PauliAxis};
use crate::protocols::theorem1_stage_budget;
use crate::rng::{derive_key, CounterRng};
use crate::sampler::ShotStream;
use crate::stats::chi_square_gof;

pub const ORACLE_MAX_N: usize = ORACLE_MAX_QUBITS;

const PROBABILITY_TOL: f64 = 1e-12;
const SPECTRUM_TOL: f64 = 1e-10;
const TRACE_DISTANCE_TOL: f64 = 1e-10;
const ZERO_KL_TOL: f64 = 1e-15;
const CHI_SQUARE_ALPHA: f64 = 1e-3;
const SAMPLER_SHOTS: u64 = 1_000_000;
/// Past this many bases the Born and expectation checks use a random sample.
const FULL_BASIS_LIMIT: usize = 81;
const SAMPLED_BASES: usize = 12;
const RANDOM_PROFILES_PER_N: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
    /// Informational: outside an assumed regime, not a failure.
    Flagged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub n: Option<usize>,
    pub profile: Option<usize>,
    pub status: CheckStatus,
    /// The measured quantity (an error, a distance or a margin).
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub max_n: usize,
    pub seed: u64,
    pub passed: bool,
    pub counts: StatusCounts,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StatusCounts {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub flagged: usize,
}

impl VerifyReport {
    fn new(max_n: usize, seed: u64, checks: Vec<CheckResult>) -> Self {
        let mut counts = StatusCounts::default();
        for c in &checks {
            match c.status {
                CheckStatus::Pass => counts.pass += 1,
                CheckStatus::Fail => counts.fail += 1,
                CheckStatus::Skipped => counts.skipped += 1,
                CheckStatus::Flagged => counts.flagged += 1,
            }
        }
        Self {
            max_n,
            seed,
            passed: counts.fail == 0,
            counts,
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

struct Recorder<'a> {
    checks: &'a mut Vec<CheckResult>,
    n: Option<usize>,
    profile: Option<usize>,
}

impl Recorder<'_> {
    fn push(&mut self, name: &str, status: CheckStatus, value: f64, detail: String) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            n: self.n,
            profile: self.profile,
            status,
            value,
            detail,
        });
    }

    fn bound(&mut self, name: &str, value: f64, limit: f64, what: &str) {
        let status = if value <= limit {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        self.push(name, status, value, format!("{what} = {value:e}, limit {limit:e}"));
    }

    /// Records a check whose computation itself failed.
    fn error(&mut self, name: &str, e: &Error) {
        self.push(name, CheckStatus::Fail, f64::NAN, e.to_string());
    }
}

fn random_basis(rng: &mut CounterRng, n: usize) -> BasisString {
    BasisString::from_index(n, rng.random_range(0..3u64.pow(n as u32))).expect("n checked")
}

fn bases_to_check(rng: &mut CounterRng, n: usize) -> Vec<BasisString> {
    let total = 3usize.pow(n as u32);
    if total <= FULL_BASIS_LIMIT {
        BasisString::enumerate(n).expect("n checked").collect()
    } else {
        (0..SAMPLED_BASES).map(|_| random_basis(rng, n)).collect()
    }
}

/// Runs every per-profile check on each profile. A profile that fails the
/// physicality check has its remaining checks reported as skipped.
pub fn verify_profiles(profiles: &[CoefficientProfile], seed: u64) -> VerifyReport {
    let mut checks = Vec::new();
    let max_n = profiles.iter().map(|p| p.n()).max().unwrap_or(0);
    for (idx, profile) in profiles.iter().enumerate() {
        let mut rec = Recorder {
            checks: &mut checks,
            n: Some(profile.n()),
            profile: Some(idx),
        };
        let mut rng = CounterRng::new(derive_key(&[seed, idx as u64, 0x5645_5249_4659]));
        profile_checks(&mut rec, profile, &mut rng);
    }
    VerifyReport::new(max_n, seed, checks)
}

const PROFILE_CHECKS: [&str; 9] = [
    "born_probability",
    "spectrum",
    "prefix_expectation",
    "trace_distance_bounds",
    "hard_pair_trace_distance",
    "zero_kl_outside_cylinder",
    "kl_contraction",
    "baseline_floor",
    "r_max",
];

fn profile_checks(rec: &mut Recorder, profile: &CoefficientProfile, rng: &mut CounterRng) {
    let n = profile.n();
    let phys = profile.check_physicality();
    if !phys.passed {
        rec.push(
            "physicality",
            CheckStatus::Fail,
            phys.margin,
            format!("|alpha| + sum|beta| exceeds 1 by {:e}", -phys.margin),
        );
        for name in PROFILE_CHECKS {
            rec.push(name, CheckStatus::Skipped, f64::NAN, "profile is not physical".into());
        }
        return;
    }
    rec.push(
        "physicality",
        CheckStatus::Pass,
        phys.margin,
        format!("margin {:e}", phys.margin),
    );
    if n > ORACLE_MAX_N {
        for name in PROFILE_CHECKS {
            rec.push(name, CheckStatus::Skipped, f64::NAN, format!("n > oracle cap {ORACLE_MAX_N}"));
        }
        return;
    }

    let instance = FamilyInstance::new(profile.clone(), random_basis(rng, n)).expect("length n");
    let rho = match build_state(&instance) {
        Ok(r) => r,
        Err(e) => return rec.error("born_probability", &e),
    };
    let bases = bases_to_check(rng, n);

    // Born probabilities and prefix expectations.
    let born = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for b in &bases {
            for o in Outcome::enumerate(n)? {
                let dense = born_probability(&rho, &build_projector(b, &o)?)?;
                worst = worst.max((dense - instance.outcome_probability(b, &o)?).abs());
            }
        }
        Ok(worst)
    })();
    match born {
        Ok(v) => rec.bound("born_probability", v, PROBABILITY_TOL, "max |closed - dense|"),
        Err(e) => rec.error("born_probability", &e),
    }

    let spectrum = (|| -> Result<(f64, f64)> {
        let closed = profile.state_eigenvalues()?;
        let dense = hermitian_eig(&rho)?.eigenvalues;
        let diff = closed
            .iter()
            .zip(&dense)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok((diff, dense[0]))
    })();
    match spectrum {
        Ok((diff, min_eig)) => {
            let ok = diff <= SPECTRUM_TOL && min_eig >= -SPECTRUM_TOL;
            rec.push(
                "spectrum",
                if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                diff,
                format!("max eigenvalue mismatch {diff:e}, min eigenvalue {min_eig:e}"),
            );
        }
        Err(e) => rec.error("spectrum", &e),
    }

    let expectations = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for b in &bases {
            for k in 1..=n {
                let p = build_pauli_prefix(n, b, k)?;
                let dense = p.trace_product(&rho)?.re;
                worst = worst.max((dense - instance.prefix_expectation(b, k)?).abs());
            }
        }
        Ok(worst)
    })();
    match expectations {
        Ok(v) => rec.bound("prefix_expectation", v, PROBABILITY_TOL, "max |closed - dense|"),
        Err(e) => rec.error("prefix_expectation", &e),
    }

    // Trace distance to another member lies within the prefix-mismatch bounds.
    let bounds = (|| -> Result<(f64, f64, f64)> {
        let mut other = random_basis(rng, n);
        while &other == instance.hidden() {
            other = random_basis(rng, n);
        }
        let (lo, hi) = trace_distance_bounds(profile, instance.hidden(), &other)?;
        let rho2 = build_state(&FamilyInstance::new(profile.clone(), other)?)?;
        Ok((lo, trace_distance(&rho, &rho2)?, hi))
    })();
    match bounds {
        Ok((lo, d, hi)) => {
            let ok = d >= lo - TRACE_DISTANCE_TOL && d <= hi + TRACE_DISTANCE_TOL;
            rec.push(
                "trace_distance_bounds",
                if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                d,
                format!("{lo:e} <= {d:e} <= {hi:e}"),
            );
        }
        Err(e) => rec.error("trace_distance_bounds", &e),
    }

    if n < 2 {
        for name in &PROFILE_CHECKS[4..] {
            rec.push(name, CheckStatus::Skipped, f64::NAN, "hard pairs need n >= 2".into());
        }
        return;
    }
    let prefix: Vec<PauliAxis> = (0..n - 1).map(|_| PauliAxis::ALL[rng.random_range(0..3)]).collect();
    let pair = HardPair::new(profile.clone(), &prefix).expect("prefix has length n - 1");

    let hp = (|| -> Result<f64> {
        let d = trace_distance(&build_state(pair.instance0())?, &build_state(pair.instance1())?)?;
        Ok((d - hard_pair_trace_distance(profile.alpha())).abs())
    })();
    match hp {
        Ok(v) => {
            let status = if v <= TRACE_DISTANCE_TOL {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            rec.push(
                "hard_pair_trace_distance",
                status,
                hard_pair_trace_distance(profile.alpha()),
                format!(
                    "|alpha|/sqrt(2) = {:.12}, oracle deviation {v:e}",
                    hard_pair_trace_distance(profile.alpha())
                ),
            );
        }
        Err(e) => rec.error("hard_pair_trace_distance", &e),
    }

    // Outside {b0, b1} the laws must agree outcome by outcome.
    let zero_kl = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for b in BasisString::enumerate(n)? {
            if &b == pair.instance0().hidden() || &b == pair.instance1().hidden() {
                continue;
            }
            let p0 = pair.instance0().outcome_distribution(&b)?;
            let p1 = pair.instance1().outcome_distribution(&b)?;
            let law_gap = p0.iter().zip(&p1).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
            worst = worst.max(law_gap).max(one_shot_kl(pair.instance0(), pair.instance1(), &b)?);
        }
        Ok(worst)
    })();
    match zero_kl {
        Ok(v) => rec.bound("zero_kl_outside_cylinder", v, ZERO_KL_TOL, "max KL or law gap"),
        Err(e) => rec.error("zero_kl_outside_cylinder", &e),
    }

    let contraction = (|| -> Result<f64> {
        let d = 3usize.pow(n as u32);
        let mut allocs = vec![Allocation::uniform(n)?];
        for _ in 0..5 {
            let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            allocs.push(Allocation::from_unnormalized(n, raw)?);
        }
        let mut worst = f64::NEG_INFINITY;
        for a in &allocs {
            let t = transcript_kl_bound(a, 1000, &pair)?;
            let slack = t.exact - t.cylinder_bound.min(t.two_basis_bound);
            worst = worst.max(slack / t.cylinder_bound.max(f64::MIN_POSITIVE));
        }
        Ok(worst)
    })();
    match contraction {
        // The per-shot bound assumes |r| <= 1/2; outside that regime an
        // excess is reported as flagged rather than failed.
        Ok(v) if v > 1e-12 && pair.r_max_flagged() => rec.push(
            "kl_contraction",
            CheckStatus::Flagged,
            v,
            format!("relative excess {v:e} with r_max = {:.3} > 1/2", pair.r_max()),
        ),
        Ok(v) => rec.bound("kl_contraction", v, 1e-12, "max relative excess of exact KL over bound"),
        Err(e) => rec.error("kl_contraction", &e),
    }

    let floor = (|| -> Result<f64> {
        let mut worst = f64::INFINITY;
        for b in &bases {
            worst = worst.min(pair.baseline_floor(b)?);
        }
        Ok(worst - pair.delta())
    })();
    match floor {
        Ok(v) => {
            let status = if v >= -PROBABILITY_TOL {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            rec.push("baseline_floor", status, v, format!("min 2^n p_pref - delta = {v:e}"));
        }
        Err(e) => rec.error("baseline_floor", &e),
    }

    let r = pair.r_max();
    rec.push(
        "r_max",
        if pair.r_max_flagged() {
            CheckStatus::Flagged
        } else {
            CheckStatus::Pass
        },
        r,
        format!("|alpha|/delta = {r:.6}"),
    );
}

fn global_checks(rec: &mut Recorder, seed: u64) {
    let mut rng = CounterRng::new(derive_key(&[seed, 0x474C_4F42]));

    // Sampler fidelity at n = 3, both the per-shot and the histogram path.
    let sampler = (|| -> Result<(f64, f64)> {
        let mut min_shot = 1.0f64;
        let mut min_hist = 1.0f64;
        for pair in 0..10u64 {
            let abs_sum = rng.random_range(0.2..1.0);
            let profile = random_profile(&mut rng, 3, abs_sum)?;
            let inst = FamilyInstance::new(profile, random_basis(&mut rng, 3))?;
            let b = random_basis(&mut rng, 3);
            let probs = inst.outcome_distribution(&b)?;
            let mut s = ShotStream::new(inst, derive_key(&[seed, pair]));
            let mut counts = vec![0u64; 8];
            for _ in 0..SAMPLER_SHOTS {
                counts[s.draw_outcome(&b)?.rank() as usize] += 1;
            }
            min_shot = min_shot.min(chi_square_gof(&counts, &probs).p_value);
            let hist = s.draw_histogram(&b, SAMPLER_SHOTS)?;
            min_hist = min_hist.min(chi_square_gof(&hist, &probs).p_value);
        }
        Ok((min_shot, min_hist))
    })();
    match sampler {
        Ok((a, b)) => {
            for (name, p) in [("sampler_chi_square", a), ("histogram_chi_square", b)] {
                rec.push(
                    name,
                    if p >= CHI_SQUARE_ALPHA {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    },
                    p,
                    format!("min p-value over 10 pairs {p:e}, level {CHI_SQUARE_ALPHA:e}"),
                );
            }
        }
        Err(e) => rec.error("sampler_chi_square", &e),
    }

    let repro = (|| -> Result<bool> {
        let inst = FamilyInstance::new(random_profile(&mut rng, 4, 0.8)?, random_basis(&mut rng, 4))?;
        let b = random_basis(&mut rng, 4);
        let mut s1 = ShotStream::new(inst.clone(), seed);
        let mut s2 = ShotStream::new(inst, seed);
        for _ in 0..10_000 {
            if s1.draw_outcome(&b)? != s2.draw_outcome(&b)? {
                return Ok(false);
            }
        }
        Ok(true)
    })();
    match repro {
        Ok(ok) => rec.push(
            "sampler_reproducibility",
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            f64::from(u8::from(ok)),
            "10^4 outcomes from equal seeds".into(),
        ),
        Err(e) => rec.error("sampler_reproducibility", &e),
    }

    let mut worst = f64::NEG_INFINITY;
    for a in [0.01, 0.05, 0.1, 0.125, 0.2, -0.2] {
        let k = kl_alpha(a).expect("|a| < 1");
        worst = worst.max((k / (a * a) - 0.5).abs() - a * a);
    }
    rec.push(
        "kl_alpha_series",
        if worst <= 0.0 { CheckStatus::Pass } else { CheckStatus::Fail },
        worst,
        "max |kl/a^2 - 1/2| - a^2 for |a| <= 0.2".into(),
    );

    let mut margin = f64::INFINITY;
    for eta in [0.25, 0.1, 0.01] {
        let kl = bernoulli_kl(eta, 1.0 - eta).expect("valid probabilities");
        margin = margin.min(kl - 0.25 * (1.0 / eta).ln());
    }
    rec.push(
        "testing_bound",
        if margin >= 0.0 { CheckStatus::Pass } else { CheckStatus::Fail },
        margin,
        "min KL(eta, 1-eta) - ln(1/eta)/4".into(),
    );

    let arithmetic = (|| -> Result<(u64, f64)> {
        let p = CoefficientProfile::corollary(2, 0.5)?;
        Ok((
            theorem1_stage_budget(&p, 1, 0.1)?,
            budget_formulas(&p, 0.1)?.adaptive_upper,
        ))
    })();
    match arithmetic {
        Ok((m, upper)) => {
            let expected = 24.0 * 120f64.ln() * 128.0;
            let ok = m == (512.0 * 120f64.ln()).ceil() as u64 && (upper - expected).abs() <= 1e-9;
            rec.push(
                "budget_arithmetic",
                if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                upper,
                format!("m_1 = {m}, adaptive upper = {upper:.6} at n = 2, eps = 0.5, eta = 0.1"),
            );
        }
        Err(e) => rec.error("budget_arithmetic", &e),
    }
}

/// Full suite: the standard profile plus random physical profiles for every
/// `n ≤ max_n`, followed by sampler and formula checks.
pub fn verify_all(max_n: usize, seed: u64) -> Result<VerifyReport> {
    if max_n == 0 || max_n > ORACLE_MAX_N {
        return Err(Error::Config(format!(
            "max_n = {max_n} must lie in [1, {ORACLE_MAX_N}]"
        )));
    }
    let mut rng = CounterRng::new(derive_key(&[seed, 0x5052_4F46]));
    let mut profiles = Vec::new();
    for n in 1..=max_n {
        profiles.push(CoefficientProfile::corollary(n, 0.5)?);
        for _ in 0..RANDOM_PROFILES_PER_N {
            let abs_sum = rng.random_range(0.2..1.0);
            profiles.push(random_profile(&mut rng, n, abs_sum)?);
        }
    }
    let mut report = verify_profiles(&profiles, seed);
    let mut checks = std::mem::take(&mut report.checks);
    let mut rec = Recorder {
        checks: &mut checks,
        n: None,
        profile: None,
    };
    global_checks(&mut rec, seed);
    Ok(VerifyReport::new(max_n, seed, checks))
}
