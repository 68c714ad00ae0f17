use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{relative_residual, PreparedIdentity, SampleGrid};
use crate::catalog::{IdentitySpec, Params};
use crate::elliptic::ModulusContext;
use crate::env::JacobiEnv;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub x0: Complex64,
    pub m: f64,
    pub p: i64,
    pub r: i64,
    pub s: i64,
    pub t: i64,
    pub l: i64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_residual: f64,
}

/// A sample (or a whole parameter set when `x0` is absent) that could not
/// be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub x0: Option<Complex64>,
    pub m: f64,
    pub p: i64,
    pub r: i64,
    pub s: i64,
    pub t: i64,
    pub l: i64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    pub family: String,
    pub environment: String,
    pub tolerance: f64,
    pub seed: u64,
    pub samples: Vec<SampleRecord>,
    pub skipped: Vec<SkipRecord>,
    /// `None` when no sample could be evaluated.
    pub max_rel: Option<f64>,
    pub median_rel: Option<f64>,
    pub pass: bool,
}

impl VerificationReport {
    fn assemble(spec: &IdentitySpec, env: &str, tol: f64, seed: u64, samples: Vec<SampleRecord>, skipped: Vec<SkipRecord>) -> Self {
        let mut rel: Vec<f64> = samples.iter().map(|s| s.rel_residual).collect();
        rel.sort_by(f64::total_cmp);
        let max_rel = rel.last().copied();
        let median_rel = if rel.is_empty() {
            None
        } else if rel.len() % 2 == 1 {
            Some(rel[rel.len() / 2])
        } else {
            Some(0.5 * (rel[rel.len() / 2 - 1] + rel[rel.len() / 2]))
        };
        // NaN residuals count as failures
        let pass = max_rel.is_some_and(|r| r < tol) && samples.iter().all(|s| s.rel_residual.is_finite());
        VerificationReport {
            id: spec.id.clone(),
            family: spec.family.to_string(),
            environment: env.to_string(),
            tolerance: tol,
            seed,
            samples,
            skipped,
            max_rel,
            median_rel,
            pass,
        }
    }

    /// One report over the samples of several runs of the same identity.
    pub fn merge(spec: &IdentitySpec, parts: Vec<VerificationReport>) -> Option<Self> {
        let first = parts.first()?;
        let (env, tol, seed) = (first.environment.clone(), first.tolerance, first.seed);
        let mut samples = Vec::new();
        let mut skipped = Vec::new();
        for r in parts {
            samples.extend(r.samples);
            skipped.extend(r.skipped);
        }
        Some(Self::assemble(spec, &env, tol, seed, samples, skipped))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Sample with the largest residual.
    pub fn worst(&self) -> Option<&SampleRecord> {
        self.samples.iter().max_by(|a, b| a.rel_residual.total_cmp(&b.rel_residual))
    }
}

/// Whether an error only disqualifies the sample rather than the identity.
fn is_skip(e: &Error) -> bool {
    matches!(
        e,
        Error::PoleProximity { .. }
            | Error::TermPole { .. }
            | Error::VanishingDenominator { .. }
            | Error::SingularCoefficient(_)
            | Error::Constraint(_)
    )
}

/// Checks `spec` on every grid point with functions at the real parameter
/// `m`. Samples near poles are skipped and listed in the report.
pub fn verify(spec: &IdentitySpec, grid: &SampleGrid, tol: f64) -> Result<VerificationReport> {
    verify_with_env(spec, grid, tol, |c| c.clone())
}

/// As [`verify`], evaluating through the environment built from each
/// modulus by `wrap`.
pub fn verify_with_env<E, F>(spec: &IdentitySpec, grid: &SampleGrid, tol: f64, wrap: F) -> Result<VerificationReport>
where
    E: JacobiEnv,
    F: Fn(&ModulusContext) -> E + Sync,
{
    let envs = grid
        .moduli
        .iter()
        .map(|&m| Ok((m, wrap(&ModulusContext::new(m)?))))
        .collect::<Result<Vec<_>>>()?;
    let label = envs.first().map(|(_, e)| e.label()).unwrap_or("direct");
    let params = grid.params_for(spec);
    let tasks: Vec<(usize, Params)> = (0..envs.len()).flat_map(|i| params.iter().map(move |p| (i, *p))).collect();
    let chunks = tasks
        .par_iter()
        .map(|&(i, q)| {
            let (m, env) = (&envs[i].0, &envs[i].1);
            run_task(spec, env, *m, q, &grid.base_points)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for (s, k) in chunks {
        samples.extend(s);
        skipped.extend(k);
    }
    Ok(VerificationReport::assemble(spec, label, tol, grid.seed, samples, skipped))
}

fn run_task(
    spec: &IdentitySpec,
    env: &dyn JacobiEnv,
    m: f64,
    q: Params,
    points: &[Complex64],
) -> Result<(Vec<SampleRecord>, Vec<SkipRecord>)> {
    let skip = |x0: Option<Complex64>, e: &Error| SkipRecord {
        x0,
        m,
        p: q.p,
        r: q.r,
        s: q.s,
        t: q.t,
        l: q.l,
        reason: e.to_string(),
    };
    let prep = match PreparedIdentity::new(spec, env, q) {
        Ok(p) => p,
        Err(e) if is_skip(&e) => return Ok((Vec::new(), vec![skip(None, &e)])),
        Err(e) => return Err(e),
    };
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for &x0 in points {
        match prep.eval(x0) {
            Ok((lhs, rhs)) => samples.push(SampleRecord {
                x0,
                m,
                p: q.p,
                r: q.r,
                s: q.s,
                t: q.t,
                l: q.l,
                lhs,
                rhs,
                rel_residual: relative_residual(lhs, rhs),
            }),
            Err(e) if is_skip(&e) => skipped.push(skip(Some(x0), &e)),
            Err(e) => return Err(e),
        }
    }
    Ok((samples, skipped))
}
