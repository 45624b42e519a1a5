//! Run, sweep, analysis and replay reports behind the command-line tool.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{
    estimate_mutual_information, generate_samples, passive_posterior, posterior_from_features,
    sum_channel_information, FeatureExtractor, FeatureVector, PosteriorReport, RampFeatures,
    DEFAULT_MIN_PER_CLASS, MIN_MI_SAMPLES,
};
use crate::error::{Error, Result};
use crate::millionaires::{audit, leakage_bits, LeakageSummary, MAX_ENUMERATED_DOMAIN};
use crate::sim::{
    parse_scenario, replay_digest, run_scenario, AdversaryKind, Protocol, RunOutcome, Scenario,
    SimClock, Transcript, EMPTY_DIGEST,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Allowed excess of the estimated information over the analytic
/// sum-channel reference before the analysis fails.
pub const MI_TOLERANCE_BITS: f64 = 0.05;

pub fn digest_hex(digest: u64) -> String {
    format!("{digest:016x}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub run_id: u64,
    pub protocol: Protocol,
    pub seed: u64,
    pub outcome: Result<RunOutcome, Error>,
    pub success: bool,
    pub digest: String,
    pub flags: Vec<String>,
    pub ticks: u64,
    pub wall_clock_ms: f64,
    pub version: &'static str,
    pub scenario: Scenario,
}

impl RunReport {
    /// 0 on protocol success, 2 on a protocol-level failure.
    pub fn exit_code(&self) -> i32 {
        if self.success {
            0
        } else {
            2
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "run {} protocol={} seed={} version={}",
            self.run_id,
            self.protocol.name(),
            self.seed,
            self.version
        );
        let _ = writeln!(out, "  outcome: {}", outcome_summary(&self.outcome));
        let _ = writeln!(
            out,
            "  status: {}",
            if self.success { "success" } else { "failure" }
        );
        let _ = writeln!(
            out,
            "  ticks: {}  wall-clock: {:.3} ms",
            self.ticks, self.wall_clock_ms
        );
        let _ = writeln!(out, "  digest: {}", self.digest);
        for f in &self.flags {
            let _ = writeln!(out, "  flag: {f}");
        }
        out
    }
}

fn outcome_summary(outcome: &Result<RunOutcome, Error>) -> String {
    match outcome {
        Ok(RunOutcome::Decoy(d)) => match &d.recovered {
            Ok(v) => format!("receiver recovered {v} (sender secret {})", d.sender_secret),
            Err(e) => format!("receiver error: {e}"),
        },
        Ok(RunOutcome::Comparison { outcome, .. }) => format!(
            "{:?} ordering {:?} ({:?} ties, {} round(s))",
            outcome.protocol, outcome.ordering, outcome.tie_convention, outcome.rounds
        ),
        Ok(RunOutcome::Attack(a)) => format!(
            "{:?} attack: receiver {}, adversary estimate {}",
            a.kind,
            match &a.recovered {
                None => "absent".to_string(),
                Some(Ok(v)) => format!("recovered {v}"),
                Some(Err(e)) => format!("error ({e})"),
            },
            a.adversary_estimate
                .map_or("none".to_string(), |v| v.to_string())
        ),
        Err(e) => format!("failed: {e}"),
    }
}

fn flags_for(s: &Scenario, outcome: &Result<RunOutcome, Error>) -> Result<Vec<String>> {
    let mut flags = Vec::new();
    match outcome {
        Ok(RunOutcome::Decoy(d)) => {
            if let Some(p) =
                passive_posterior(&d.transcript, s.secret_domain, s.hold_ticks as usize, 0.0)
            {
                if p.posterior.len() == 1 {
                    flags.push(format!(
                        "single decoy: total {} determines the secret",
                        p.total
                    ));
                }
            }
            if !d.success() {
                flags.push("recovery mismatch".to_string());
            }
        }
        Ok(RunOutcome::Comparison { outcome, .. }) => {
            let dt = SimClock::from_seconds(s.dt)?.dt();
            flags.extend(
                audit(outcome, s.secret_domain, dt)
                    .iter()
                    .map(ToString::to_string),
            );
        }
        Ok(RunOutcome::Attack(a)) => {
            if a.mismatch {
                flags
                    .push("jam detected: receiver did not recover the sender's secret".to_string());
            }
            if a.adversary_learned {
                flags.push(format!(
                    "adversary recovered the secret {}",
                    a.adversary_estimate.unwrap_or(a.sender_secret)
                ));
            }
        }
        Err(e) => flags.push(e.to_string()),
    }
    Ok(flags)
}

fn run_succeeded(outcome: &Result<RunOutcome, Error>) -> bool {
    match outcome {
        Ok(RunOutcome::Decoy(d)) => d.success(),
        Ok(RunOutcome::Comparison { .. }) => true,
        Ok(RunOutcome::Attack(a)) => {
            a.recovered.as_ref().and_then(|r| r.as_ref().ok()) == Some(&a.sender_secret)
                && !a.adversary_learned
        }
        Err(_) => false,
    }
}

/// Execute one run. Configuration problems are returned as errors;
/// protocol failures are recorded inside the report.
pub fn execute(scenario: &Scenario, run_id: u64) -> Result<RunReport> {
    scenario.validate()?;
    let start = Instant::now();
    let outcome = match run_scenario(scenario) {
        Err(e) if !e.is_protocol_failure() => return Err(e),
        r => r,
    };
    let wall_clock_ms = start.elapsed().as_secs_f64() * 1e3;
    let (digest, ticks) = match &outcome {
        Ok(o) => (o.digest(), o.ticks()),
        Err(Error::ProtocolTimeout { transcript, .. }) => (
            replay_digest(transcript),
            transcript.last_tick().map_or(0, |t| t + 1),
        ),
        Err(_) => (EMPTY_DIGEST, 0),
    };
    Ok(RunReport {
        run_id,
        protocol: scenario.protocol,
        seed: scenario.seed,
        success: run_succeeded(&outcome),
        flags: flags_for(scenario, &outcome)?,
        outcome,
        digest: digest_hex(digest),
        ticks,
        wall_clock_ms,
        version: VERSION,
        scenario: scenario.clone(),
    })
}

pub fn cmd_run(scenario: &Scenario) -> Result<RunReport> {
    execute(scenario, 0)
}

/// One `--vary` axis: a scenario key and the values it takes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vary {
    pub key: String,
    pub values: Vec<String>,
}

impl Vary {
    /// Parse `key=v1,v2,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--vary expects KEY=V1,V2,..., got `{spec}`")))?;
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
        if key.trim().is_empty() || values.iter().any(String::is_empty) {
            return Err(Error::Config(format!(
                "--vary expects KEY=V1,V2,..., got `{spec}`"
            )));
        }
        Ok(Self {
            key: key.trim().to_string(),
            values,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// The varied `(key, value)`, if any.
    pub setting: Option<(String, String)>,
    pub runs: usize,
    pub success_rate: f64,
    /// Absolute recovery error over decoy runs that produced a value.
    pub mean_abs_error: Option<f64>,
    pub p50_abs_error: Option<f64>,
    pub p95_abs_error: Option<f64>,
    pub digests: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub version: &'static str,
    pub base_seed: u64,
    pub points: Vec<SweepPoint>,
    #[serde(skip)]
    pub runs: Vec<RunReport>,
}

impl SweepReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "sweep base_seed={} version={}\n",
            self.base_seed, self.version
        );
        for p in &self.points {
            let label = p
                .setting
                .as_ref()
                .map_or("base".to_string(), |(k, v)| format!("{k}={v}"));
            let err = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                out,
                "  {label}: runs={} success_rate={:.4} abs_error mean={} p50={} p95={}",
                p.runs,
                p.success_rate,
                err(p.mean_abs_error),
                err(p.p50_abs_error),
                err(p.p95_abs_error)
            );
        }
        out
    }
}

fn recovery_error(r: &RunReport) -> Option<f64> {
    let (recovered, secret) = match r.outcome.as_ref().ok()? {
        RunOutcome::Decoy(d) => (d.recovered.as_ref().ok()?, d.sender_secret),
        RunOutcome::Attack(a) => (a.recovered.as_ref()?.as_ref().ok()?, a.sender_secret),
        RunOutcome::Comparison { .. } => return None,
    };
    Some((*recovered as f64 - secret as f64).abs())
}

/// Nearest-rank percentile of sorted values.
fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Some(sorted[rank - 1])
}

/// `runs` runs per setting with seeds `base_seed + i`, merged in run order.
pub fn cmd_sweep(
    config: &str,
    overrides: &[(String, String)],
    runs: usize,
    vary: Option<&Vary>,
) -> Result<SweepReport> {
    if runs == 0 {
        return Err(Error::invalid("runs", "must be at least 1"));
    }
    let settings: Vec<Option<(String, String)>> = match vary {
        None => vec![None],
        Some(v) => v
            .values
            .iter()
            .map(|x| Some((v.key.clone(), x.clone())))
            .collect(),
    };
    let mut points = Vec::new();
    let mut all_runs = Vec::new();
    let mut base_seed = 0;
    for (k, setting) in settings.into_iter().enumerate() {
        let mut ov = overrides.to_vec();
        ov.extend(setting.clone());
        let base = parse_scenario(config, &ov)?;
        base_seed = base.seed;
        let reports: Vec<RunReport> = (0..runs as u64)
            .into_par_iter()
            .map(|i| {
                let mut s = base.clone();
                s.seed = base.seed.wrapping_add(i);
                execute(&s, (k * runs) as u64 + i)
            })
            .collect::<Result<_>>()?;
        let successes = reports.iter().filter(|r| r.success).count();
        let mut errors: Vec<f64> = reports.iter().filter_map(recovery_error).collect();
        errors.sort_by(f64::total_cmp);
        points.push(SweepPoint {
            setting,
            runs,
            success_rate: successes as f64 / runs as f64,
            mean_abs_error: (!errors.is_empty())
                .then(|| errors.iter().sum::<f64>() / errors.len() as f64),
            p50_abs_error: percentile(&errors, 0.5),
            p95_abs_error: percentile(&errors, 0.95),
            digests: reports.iter().map(|r| r.digest.clone()).collect(),
        });
        all_runs.extend(reports);
    }
    Ok(SweepReport {
        version: VERSION,
        base_seed,
        points,
        runs: all_runs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL (leakage detected)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "analysis", rename_all = "snake_case")]
pub enum AnalysisReport {
    Decoy {
        version: &'static str,
        scenario: Scenario,
        samples: usize,
        features: String,
        mi_bits: f64,
        analytic_mi_bits: f64,
        tolerance_bits: f64,
        /// Posterior for the scenario's own run; `None` if no sample matched it.
        posterior: Option<PosteriorReport>,
        posterior_error: Option<String>,
        verdict: Verdict,
    },
    Comparison {
        version: &'static str,
        scenario: Scenario,
        findings: Vec<String>,
        leakage: Option<LeakageSummary>,
        verdict: Verdict,
    },
}

impl AnalysisReport {
    pub fn verdict(&self) -> Verdict {
        match self {
            AnalysisReport::Decoy { verdict, .. } | AnalysisReport::Comparison { verdict, .. } => {
                *verdict
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            AnalysisReport::Decoy {
                scenario,
                samples,
                features,
                mi_bits,
                analytic_mi_bits,
                tolerance_bits,
                posterior,
                posterior_error,
                verdict,
                ..
            } => {
                let _ = writeln!(
                    out,
                    "analysis {} ramp={:?} samples={samples}",
                    scenario.protocol.name(),
                    scenario.ramp_model
                );
                let _ = writeln!(out, "  features: {features}");
                let _ = writeln!(out, "  estimated I(secret; transcript) = {mi_bits:.4} bits");
                let _ = writeln!(
                    out,
                    "  analytic I(S; S+K) reference  = {analytic_mi_bits:.4} bits (tolerance {tolerance_bits})"
                );
                match (posterior, posterior_error) {
                    (Some(p), _) => {
                        let _ = writeln!(
                            out,
                            "  posterior: max_prob={:.4} at {} over {} matching samples",
                            p.max_prob, p.map_estimate, p.matching_samples
                        );
                    }
                    (None, Some(e)) => {
                        let _ = writeln!(out, "  posterior: unavailable ({e})");
                    }
                    (None, None) => {}
                }
                let _ = writeln!(out, "  verdict: {verdict}");
            }
            AnalysisReport::Comparison {
                scenario,
                findings,
                leakage,
                verdict,
                ..
            } => {
                let _ = writeln!(out, "analysis {}", scenario.protocol.name());
                for f in findings {
                    let _ = writeln!(out, "  {f}");
                }
                if leakage.is_none() {
                    let _ = writeln!(
                        out,
                        "  leakage enumeration skipped: domain exceeds {MAX_ENUMERATED_DOMAIN} values"
                    );
                }
                let _ = writeln!(out, "  verdict: {verdict}");
            }
        }
        out
    }
}

fn analyze_decoy(s: &Scenario, samples: usize) -> Result<AnalysisReport> {
    if samples < MIN_MI_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "{samples} samples requested, at least {MIN_MI_SAMPLES} required"
        )));
    }
    let extractor = RampFeatures::for_scenario(s);
    let drawn = generate_samples(s, samples)?;
    let features: Vec<(u64, FeatureVector)> = drawn
        .par_iter()
        .map(|x| (x.secret, extractor.extract(&x.transcript)))
        .collect();
    let mi_bits = estimate_mutual_information(&features)?;
    let analytic_mi_bits = sum_channel_information(s.secret_domain, s.secret_domain);
    let observed = match run_scenario(s) {
        Ok(o) => o.transcript().clone(),
        Err(Error::ProtocolTimeout { transcript, .. }) => *transcript,
        Err(e) => return Err(e),
    };
    let (posterior, posterior_error) = match posterior_from_features(
        &features,
        &extractor.extract(&observed),
        s.secret_domain,
        DEFAULT_MIN_PER_CLASS,
    ) {
        Ok(mut p) => {
            p.features = extractor.describe();
            (Some(p), None)
        }
        Err(e @ (Error::UnmatchedObservation | Error::InsufficientSamples(_))) => {
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let verdict = if mi_bits <= analytic_mi_bits + MI_TOLERANCE_BITS {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(AnalysisReport::Decoy {
        version: VERSION,
        scenario: s.clone(),
        samples,
        features: extractor.describe(),
        mi_bits,
        analytic_mi_bits,
        tolerance_bits: MI_TOLERANCE_BITS,
        posterior,
        posterior_error,
        verdict,
    })
}

fn analyze_comparison(s: &Scenario) -> Result<AnalysisReport> {
    let report = execute(s, 0)?;
    let leakage = if s.secret_domain.size() <= MAX_ENUMERATED_DOMAIN {
        Some(leakage_bits(s)?)
    } else {
        None
    };
    let mut findings = report.flags;
    if let Some(l) = &leakage {
        findings.push(crate::millionaires::Finding::Leakage(l.clone()).to_string());
    }
    let verdict = if leakage.as_ref().is_some_and(|l| l.exceeds_one_bit) {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(AnalysisReport::Comparison {
        version: VERSION,
        scenario: s.clone(),
        findings,
        leakage,
        verdict,
    })
}

/// Estimate what a passive observer learns (decoy protocols) or what the
/// public observables leak (comparison protocols).
pub fn cmd_analyze(s: &Scenario, samples: usize) -> Result<AnalysisReport> {
    s.validate()?;
    if s.protocol.is_decoy() {
        if matches!(s.adversary, AdversaryKind::Jammer) {
            log::warn!("analysing jammed runs; transcripts include the jammer's contribution");
        }
        analyze_decoy(s, samples)
    } else {
        analyze_comparison(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayCheck {
    pub run_id: u64,
    pub expected: String,
    pub actual: String,
    pub matches: bool,
}

fn transcript_digest(s: &Scenario) -> Result<String> {
    let t: Transcript = match run_scenario(s) {
        Ok(o) => o.transcript().clone(),
        Err(Error::ProtocolTimeout { transcript, .. }) => *transcript,
        Err(e) if e.is_protocol_failure() => Transcript::new(),
        Err(e) => return Err(e),
    };
    Ok(digest_hex(replay_digest(&t)))
}

/// Run the scenario twice and compare digests.
pub fn replay_check(s: &Scenario) -> Result<ReplayCheck> {
    s.validate()?;
    let expected = transcript_digest(s)?;
    let actual = transcript_digest(s)?;
    Ok(ReplayCheck {
        run_id: 0,
        matches: expected == actual,
        expected,
        actual,
    })
}

/// Re-run every record of a records stream from its echoed scenario and
/// compare against the recorded digest.
pub fn replay_records(records: &str) -> Result<Vec<ReplayCheck>> {
    #[derive(serde::Deserialize)]
    struct Record {
        run_id: u64,
        digest: String,
        scenario: Scenario,
    }
    records
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .filter(|(_, l)| l.contains("\"scenario\"") && l.contains("\"digest\""))
        .map(|(n, line)| {
            let r: Record = serde_json::from_str(line)
                .map_err(|e| Error::Config(format!("record on line {}: {e}", n + 1)))?;
            r.scenario.validate()?;
            let actual = transcript_digest(&r.scenario)?;
            Ok(ReplayCheck {
                run_id: r.run_id,
                matches: actual == r.digest,
                expected: r.digest,
                actual,
            })
        })
        .collect()
}
