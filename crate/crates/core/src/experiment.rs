//! Experiment configuration and the verify/simulate drivers behind the CLI.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::certified::PrecisionPolicy;
use crate::cf_params::CFParams;
use crate::constructions::{BuildConfig, BuilderKind, CertificateTrace, TailBounds};
use crate::contfrac::{Theta, ThetaSpec};
use crate::serde_dec;
use crate::simulator::{
    correlation, correlation_profile, decay_windows, eigen_defect, injectivity_gap, Correlation, Cylinder,
    DecayWindow, DefectReport, EigenModel, GapReport, DEFAULT_SUMSET_CAP,
};
use crate::torus::RationalAngle;
use crate::verifier::{
    check_finite_order_necessity, check_injective_arg, check_injective_dist, check_rigidity_shape,
    check_summability, check_torsion_obstruction, check_zerotype_shape, eigenvalue_window_test, replay_trace,
    CheckKind, ReplayReport, SpectralCertificate, Tail, TailSource, Verdict, WindowEigenResult,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub theta: ThetaSpec,
    pub builder: BuilderKind,
    #[serde(default)]
    pub build: BuildConfig,
    /// Window parameter for the two-cut builder; derived when absent.
    #[serde(default, with = "serde_dec::opt", skip_serializing_if = "Option::is_none")]
    pub big_n: Option<BigInt>,
    #[serde(default)]
    pub verify: VerifyPlan,
    #[serde(default)]
    pub simulate: SimulatePlan,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowCandidate {
    Theta,
    Rational {
        #[serde(with = "serde_dec::rat")]
        value: BigRational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub candidate: WindowCandidate,
    #[serde(with = "serde_dec::rat")]
    pub eps: BigRational,
    pub n: usize,
    pub m: usize,
    #[serde(default = "default_cap")]
    pub size_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_SUMSET_CAP
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyPlan {
    pub checks: Vec<CheckKind>,
    /// Levels for the injectivity checks; empty means every built level.
    pub levels: Vec<usize>,
    pub torsion_p: Vec<u64>,
    pub window: Option<WindowPlan>,
    /// Recompute the builder certificates when a trace is available.
    pub replay: bool,
    /// Use the builder's tail majorants.
    pub use_tails: bool,
}

impl Default for VerifyPlan {
    fn default() -> Self {
        VerifyPlan {
            checks: Vec::new(),
            levels: Vec::new(),
            torsion_p: vec![2],
            window: None,
            replay: false,
            use_tails: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationPlan {
    pub a: Cylinder,
    pub b: Cylinder,
    #[serde(with = "serde_dec::vec")]
    pub times: Vec<BigInt>,
    /// Tower level; defaults to the last built level.
    #[serde(default)]
    pub level: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecayPlan {
    pub windows: Vec<usize>,
    #[serde(default = "default_extra")]
    pub extra: usize,
}

fn default_extra() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenPlan {
    /// Truncation depth `K`; defaults to the last built level.
    #[serde(default)]
    pub depth: Option<usize>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulatePlan {
    pub correlations: Vec<CorrelationPlan>,
    /// Correlations of `[0]_{n−1}` at the common difference of each
    /// arithmetic-progression level `n` with `n + 2` built.
    pub rigidity: bool,
    pub decay: Option<DecayPlan>,
    pub eigen: Option<EigenPlan>,
    pub gaps: Vec<usize>,
    pub sumset_cap: usize,
    pub precision: u32,
}

impl Default for SimulatePlan {
    fn default() -> Self {
        SimulatePlan {
            correlations: Vec::new(),
            rigidity: false,
            decay: None,
            eigen: None,
            gaps: Vec::new(),
            sumset_cap: DEFAULT_SUMSET_CAP,
            precision: 64,
        }
    }
}

impl SimulatePlan {
    pub fn is_empty(&self) -> bool {
        self.correlations.is_empty()
            && !self.rigidity
            && self.decay.is_none()
            && self.eigen.is_none()
            && self.gaps.is_empty()
    }
}

impl ExperimentConfig {
    pub fn new(theta: ThetaSpec, builder: BuilderKind, levels: usize) -> Self {
        ExperimentConfig {
            theta,
            builder,
            build: BuildConfig::with_levels(levels),
            big_n: None,
            verify: VerifyPlan::default(),
            simulate: SimulatePlan::default(),
            seed: 0,
            out: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(s)?;
        c.check()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Windows and levels must lie inside the build.
    pub fn check(&self) -> Result<()> {
        self.build.check()?;
        let l = self.build.levels;
        let bad = |what: &str, v: usize| Error::InvalidParams(format!("{what} {v} outside the {l} built levels"));
        if let Some(&n) = self.verify.levels.iter().find(|&&n| n > l) {
            return Err(bad("verify level", n));
        }
        if let Some(w) = &self.verify.window {
            if w.n > l || w.m > l {
                return Err(bad("window", w.n.max(w.m)));
            }
        }
        if let Some(&p) = self.verify.torsion_p.iter().find(|&&p| p < 2) {
            return Err(Error::InvalidParams(format!("torsion p = {p}")));
        }
        if let Some(d) = &self.simulate.decay {
            if let Some(&k) = d.windows.iter().find(|&&k| k + 1 > l) {
                return Err(bad("decay window", k));
            }
        }
        if let Some(depth) = self.simulate.eigen.as_ref().and_then(|e| e.depth) {
            if depth > l {
                return Err(bad("eigen depth", depth));
            }
        }
        if let Some(&n) = self.simulate.gaps.iter().find(|&&n| n > l) {
            return Err(bad("gap level", n));
        }
        for c in &self.simulate.correlations {
            if let Some(n) = c.level.filter(|&n| n > l) {
                return Err(bad("tower level", n));
            }
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub params_hash: String,
    pub checks: Vec<SpectralCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowEigenResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<ReplayReport>,
    pub pass: bool,
}

fn window_certificate(w: &WindowEigenResult, levels: usize) -> SpectralCertificate {
    let mut c = SpectralCertificate {
        kind: CheckKind::WindowEigen,
        window: levels,
        verdict: if w.pass { Verdict::Pass } else { Verdict::Fail },
        summary: format!("{} of {} sumset points in one ε-arc", w.count, w.size),
        levels: Vec::new(),
        tail: None,
        tail_source: TailSource::Absent,
        values: Default::default(),
    };
    c.values.insert("density".into(), w.density.to_string());
    c.values.insert("n".into(), w.n.to_string());
    c.values.insert("m".into(), w.m.to_string());
    c
}

/// Runs the selected checks in order. `tails` and `trace` come from the
/// builder when the params were produced in the same run.
pub fn run_verify(
    plan: &VerifyPlan,
    params: &CFParams,
    theta: &Theta,
    tails: Option<&TailBounds>,
    trace: Option<&CertificateTrace>,
    policy: &PrecisionPolicy,
) -> Result<VerifyReport> {
    let tail = || tails.filter(|_| plan.use_tails).map(Tail::builder);
    let levels: Vec<usize> = if plan.levels.is_empty() {
        (1..=params.levels()).collect()
    } else {
        plan.levels.clone()
    };
    let mut checks = Vec::new();
    let mut window = None;
    for &kind in &plan.checks {
        match kind {
            CheckKind::Summability => checks.push(check_summability(params, theta, tail(), policy)?),
            CheckKind::InjectivityDist => {
                for &n in &levels {
                    checks.push(check_injective_dist(params, theta, n, tail(), policy)?);
                }
            }
            CheckKind::InjectivityArg => {
                for &n in &levels {
                    checks.push(check_injective_arg(params, theta, n, tail(), policy)?);
                }
            }
            CheckKind::WindowEigen => {
                let w = plan
                    .window
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParams("window-eigen needs a window plan".into()))?;
                let r = match &w.candidate {
                    WindowCandidate::Theta => eigenvalue_window_test(params, theta, &w.eps, w.n, w.m, w.size_cap)?,
                    WindowCandidate::Rational { value } => {
                        let cand = RationalAngle(value.clone());
                        eigenvalue_window_test(params, &cand, &w.eps, w.n, w.m, w.size_cap)?
                    }
                };
                checks.push(window_certificate(&r, params.levels()));
                window = Some(r);
            }
            CheckKind::RigidityShape => checks.push(check_rigidity_shape(params)),
            CheckKind::ZerotypeShape => checks.push(check_zerotype_shape(params)),
            CheckKind::TorsionObstruction => {
                for &p in &plan.torsion_p {
                    checks.push(check_torsion_obstruction(params, p)?);
                }
            }
            CheckKind::FiniteOrderNecessity => checks.push(check_finite_order_necessity(params, theta, policy)?),
        }
    }
    let replay = match (plan.replay, trace) {
        (true, Some(t)) => Some(replay_trace(params, theta, t, policy)?),
        _ => None,
    };
    let pass = checks.iter().all(SpectralCertificate::pass) && replay.as_ref().map_or(true, ReplayReport::all_agree);
    Ok(VerifyReport {
        params_hash: params.content_hash(),
        checks,
        window,
        replay,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityRow {
    pub n: usize,
    pub tower_level: usize,
    pub correlation: Correlation,
    #[serde(with = "serde_dec::rat")]
    pub measure: BigRational,
    /// `(1 − 1/#C_n) μ(A)`.
    #[serde(with = "serde_dec::rat")]
    pub target: BigRational,
    /// `value ≥ target − error_bound`.
    pub holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub params_hash: String,
    pub seed: u64,
    pub correlations: Vec<Vec<Correlation>>,
    pub rigidity: Vec<RigidityRow>,
    pub decay: Vec<DecayWindow>,
    /// `e_k` nonincreasing across the sampled windows.
    pub decay_monotone: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<DefectReport>,
    pub gaps: Vec<GapReport>,
}

/// `[0]_{n−1}` against itself at the common difference of `C_n`, on the
/// level-`(n + 2)` tower.
pub fn rigidity_rows(params: &CFParams, cap: usize) -> Result<Vec<RigidityRow>> {
    let l = params.levels();
    let mut out = Vec::new();
    for n in 1..=l.saturating_sub(2) {
        let c = params.cuts(n);
        if c.len() < 2 {
            continue;
        }
        let d = &c[1] - &c[0];
        if !c.windows(2).all(|w| w[1].clone() - &w[0] == d) {
            continue;
        }
        let a = Cylinder::new(n - 1, 0);
        let corr = correlation(params, &a, &a, &d, n + 2, cap)?;
        let measure = a.measure(params);
        let keep = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(c.len()));
        let target = &keep * &measure;
        let holds = corr.value >= &target - &corr.error_bound;
        out.push(RigidityRow {
            n,
            tower_level: n + 2,
            correlation: corr,
            measure,
            target,
            holds,
        });
    }
    Ok(out)
}

pub fn run_simulate(
    plan: &SimulatePlan,
    params: &CFParams,
    theta: &Theta,
    tails: Option<&TailBounds>,
    seed: u64,
) -> Result<SimulateReport> {
    let l = params.levels();
    let cap = plan.sumset_cap;
    let mut rep = SimulateReport {
        params_hash: params.content_hash(),
        seed,
        decay_monotone: true,
        ..Default::default()
    };
    for c in &plan.correlations {
        rep.correlations
            .push(correlation_profile(params, &c.a, &c.b, &c.times, c.level.unwrap_or(l), cap)?);
    }
    if plan.rigidity {
        rep.rigidity = rigidity_rows(params, cap)?;
    }
    if let Some(d) = &plan.decay {
        rep.decay = decay_windows(params, &d.windows, l, d.extra, seed, cap)?;
        rep.decay_monotone = rep.decay.windows(2).all(|w| w[1].max_ratio <= w[0].max_ratio);
    }
    if plan.eigen.is_some() || !plan.gaps.is_empty() {
        let model = EigenModel::new(params, theta, tails, plan.precision)?;
        if let Some(e) = &plan.eigen {
            rep.eigen = Some(eigen_defect(&model, e.depth.unwrap_or(l), e.samples, seed)?);
        }
        for &n in &plan.gaps {
            rep.gaps.push(injectivity_gap(&model, n, cap)?);
        }
    }
    Ok(rep)
}

/// `p/q` or an integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    serde_dec::rat::parse(s.trim()).map_err(|e| Error::Parse(format!("rational {s:?}: {e}")))
}
