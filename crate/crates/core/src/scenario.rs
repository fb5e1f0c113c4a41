//! Scenario files: batches of verification jobs and their reports.
//!
//! ```json
//! {"name": "demo", "seed": 0, "jobs": [
//!   {"id": "bv_disk", "kind": "affine_sobolev_bv",
//!    "function": {"name": "char", "params": {"body": {"kind": "ball", "params": {"n": 2, "radius": 1}}},
//!                 "grid": {"n": 2, "extent": 2, "h": 0.05}}}]}
//! ```

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::affine_energy::BvSource;
use crate::bodies::BodySpec;
use crate::error::{Error, Result};
use crate::funcspace::{CatalogName, FunctionSpec};
use crate::inequalities::{verify, verify_body, InequalityKind, ToleranceLadder, VerificationReport, VerifyParams};
use crate::spherequad::SphereSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub id: String,
    pub kind: InequalityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    #[serde(default)]
    pub params: VerifyParams,
    /// Sphere grid; the default for the dimension if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere: Option<SphereSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceLadder>,
    pub jobs: Vec<Job>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("scenario at line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    /// `sha256:` hex digest of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("scenario serializes");
        format!("sha256:{}", hex::encode(Sha256::digest(&canonical)))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Replaces the scenario seed when set.
    pub seed: Option<u64>,
    pub tolerance_scale: f64,
    pub record_wall_time: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: None, tolerance_scale: 1.0, record_wall_time: false }
    }
}

/// A job that could not produce a report.
#[derive(Debug)]
pub struct JobFailure {
    pub job: String,
    pub error: Error,
}

impl std::fmt::Display for JobFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "job '{}': {}", self.job, self.error)
    }
}

fn run_job(job: &Job, ladder: &ToleranceLadder) -> Result<VerificationReport> {
    let n = match (&job.function, &job.body) {
        (Some(f), None) => f.grid.n,
        (None, Some(b)) => b.build()?.dim(),
        _ => {
            return Err(Error::Config(format!("job '{}' needs exactly one of `function` or `body`", job.id)))
        }
    };
    let spec = job.sphere.unwrap_or_else(|| SphereSpec::default_for(n));
    if spec.n != n {
        return Err(Error::Config(format!("job '{}': sphere dimension {} differs from n = {n}", job.id, spec.n)));
    }
    let grid = Arc::new(spec.build()?);
    if job.kind.is_body_kind() {
        let body = job
            .body
            .as_ref()
            .ok_or_else(|| Error::Config(format!("job '{}': {} needs a body", job.id, job.kind.as_str())))?
            .build()?;
        return verify_body(job.kind, &body, &job.params, grid, ladder);
    }
    let f = job
        .function
        .as_ref()
        .ok_or_else(|| Error::Config(format!("job '{}': {} needs a function", job.id, job.kind.as_str())))?;
    let source = if job.kind == InequalityKind::AffineSobolevBv && f.name == CatalogName::Char {
        BvSource::Exact(f.build_bv()?)
    } else {
        BvSource::Grid(f.build()?)
    };
    verify(job.kind, &source, &job.params, grid, ladder)
}

/// Runs all jobs in parallel on the current rayon pool; reports come back in
/// job order. The first failing job (in job order) is returned as the error.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> std::result::Result<Vec<VerificationReport>, JobFailure> {
    let ladder = scenario.tolerances.unwrap_or_default().scaled(opts.tolerance_scale);
    let hash = scenario.content_hash();
    let seed = opts.seed.unwrap_or(scenario.seed);
    let results: Vec<_> = scenario
        .jobs
        .par_iter()
        .map(|job| {
            let start = std::time::Instant::now();
            run_job(job, &ladder).map(|mut r| {
                r.id = job.id.clone();
                r.seed = seed;
                r.scenario_hash = Some(hash.clone());
                if opts.record_wall_time {
                    r.wall_time_s = Some(start.elapsed().as_secs_f64());
                }
                r
            })
        })
        .collect();
    results
        .into_iter()
        .zip(&scenario.jobs)
        .map(|(r, job)| r.map_err(|error| JobFailure { job: job.id.clone(), error }))
        .collect()
}

pub fn reports_to_json(reports: &[VerificationReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct CsvRow<'a> {
    id: &'a str,
    inequality: &'a str,
    n: usize,
    p: Option<f64>,
    lambda: Option<f64>,
    alpha: Option<f64>,
    lhs: f64,
    rhs: f64,
    deficit: f64,
    tolerance: f64,
    pass: bool,
    seed: u64,
    scenario_hash: &'a str,
    notes: String,
}

/// One row per report, for plotting.
pub fn reports_to_csv(reports: &[VerificationReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(CsvRow {
            id: &r.id,
            inequality: r.inequality.as_str(),
            n: r.n,
            p: r.p,
            lambda: r.lambda,
            alpha: r.alpha,
            lhs: r.lhs,
            rhs: r.rhs,
            deficit: r.deficit,
            tolerance: r.tolerance,
            pass: r.pass,
            seed: r.seed,
            scenario_hash: r.scenario_hash.as_deref().unwrap_or(""),
            notes: r.notes.join("; "),
        })
        .map_err(|e| Error::Numerical(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"{"name": "demo", "jobs": [
      {"id": "bv_disk", "kind": "affine_sobolev_bv",
       "function": {"name": "char", "params": {"body": {"kind": "ball", "params": {"n": 2, "radius": 1}}},
                    "grid": {"n": 2, "extent": 2, "h": 0.05}},
       "sphere": {"n": 2, "resolution": 256, "scheme": "uniform_angle"}},
      {"id": "petty_square", "kind": "petty_projection",
       "body": {"kind": "cube", "params": {"n": 2, "r": 1}}}
    ]}"#;

    #[test]
    fn demo_runs_and_serializes() {
        let s = Scenario::from_json(DEMO).unwrap();
        let reports = run_scenario(&s, &RunOptions::default()).unwrap();
        assert_eq!(reports.len(), 2);
        assert!(reports.iter().all(|r| r.pass));
        assert_eq!(reports[0].id, "bv_disk");
        let json = reports_to_json(&reports);
        let back: Vec<VerificationReport> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, reports);
        let csv = reports_to_csv(&reports).unwrap();
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn parse_error_has_position() {
        let e = Scenario::from_json("{\"jobs\": [\n  {\"id\": 1,}\n]}").unwrap_err();
        assert!(matches!(e, Error::Parse(ref m) if m.contains("line 2")), "{e}");
    }

    #[test]
    fn hash_is_stable() {
        let a = Scenario::from_json(DEMO).unwrap();
        let b = Scenario::from_json(DEMO).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        assert!(a.content_hash().starts_with("sha256:"));
    }

    #[test]
    fn domain_failure_names_job() {
        let text = r#"{"jobs": [{"id": "bad_sobolev", "kind": "affine_sobolev_p",
          "function": {"name": "gaussian", "grid": {"n": 2, "extent": 6, "h": 0.25}},
          "params": {"lambda": 0.5, "p": 0.5}}]}"#;
        let err = run_scenario(&Scenario::from_json(text).unwrap(), &RunOptions::default()).unwrap_err();
        assert_eq!(err.job, "bad_sobolev");
        assert!(err.error.is_numerical_domain());
        assert!(err.to_string().contains("(1, n)"), "{err}");
    }
}
