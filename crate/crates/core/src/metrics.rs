//! Evaluation quantities and their CSV serialization: satisfied-user counts,
//! per-user similarity reports, network average similarity, and the sweep
//! row format the experiment harness emits.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocator::{AllocationResult, Admission, UserAllocation};
use crate::scenario::UserProfile;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("row {index} is for user {row_id} but user {user_id} was expected")]
    IdMismatch {
        index: usize,
        user_id: usize,
        row_id: usize,
    },
    #[error("result has {rows} rows for {users} users")]
    LengthMismatch { rows: usize, users: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Which users enter the similarity average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityScope {
    /// Only users with both targets met (the default reading of the
    /// network-average figure).
    SatisfiedOnly,
    /// Every served user, satisfied or not.
    AllServed,
}

pub fn satisfied_count(result: &AllocationResult) -> usize {
    result.per_user.iter().filter(|r| r.satisfied).count()
}

/// Mean delivered similarity over the scope; `None` when the scope is empty.
pub fn average_similarity(result: &AllocationResult, scope: SimilarityScope) -> Option<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for row in &result.per_user {
        let include = match scope {
            SimilarityScope::SatisfiedOnly => row.satisfied,
            SimilarityScope::AllServed => row.admission == Admission::Served,
        };
        if include {
            total += row.similarity;
            count += 1;
        }
    }
    (count > 0).then(|| total / count as f64)
}

/// One bar of the per-user similarity chart: delivered similarity plus the
/// user's acceptance band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Row {
    pub user_id: usize,
    pub method: String,
    pub xi: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub satisfied: bool,
}

/// One row per user, aligned with `users` by id. Dropped users report zero
/// similarity.
pub fn per_user_report(
    result: &AllocationResult,
    users: &[UserProfile],
) -> Result<Vec<Fig2Row>, MetricsError> {
    aligned(result, users)?;
    Ok(users
        .iter()
        .zip(&result.per_user)
        .map(|(u, r)| Fig2Row {
            user_id: u.id,
            method: result.method.clone(),
            xi: r.similarity,
            xi_min: u.xi_min,
            xi_max: u.xi_max,
            satisfied: r.satisfied,
        })
        .collect())
}

fn aligned(result: &AllocationResult, users: &[UserProfile]) -> Result<(), MetricsError> {
    if result.per_user.len() != users.len() {
        return Err(MetricsError::LengthMismatch {
            rows: result.per_user.len(),
            users: users.len(),
        });
    }
    for (index, (u, r)) in users.iter().zip(&result.per_user).enumerate() {
        if u.id != r.user_id {
            return Err(MetricsError::IdMismatch {
                index,
                user_id: u.id,
                row_id: r.user_id,
            });
        }
    }
    Ok(())
}

/// Aggregate outcome of one (bandwidth, method, seed) sweep cell. The
/// metric fields are absent when the cell failed; `status` then carries the
/// error text. `runtime_ms` is measured for reporting but never serialized,
/// so output files stay byte-stable across machines.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub bandwidth_hz: f64,
    pub method: String,
    pub seed: u64,
    pub status: String,
    pub satisfied_count: Option<usize>,
    pub average_similarity: Option<f64>,
    pub objective_value: Option<f64>,
    pub runtime_ms: f64,
}

pub const SWEEP_OK: &str = "ok";

impl SweepRow {
    pub fn from_result(
        bandwidth_hz: f64,
        seed: u64,
        result: &AllocationResult,
        scope: SimilarityScope,
        runtime_ms: f64,
    ) -> SweepRow {
        SweepRow {
            bandwidth_hz,
            method: result.method.clone(),
            seed,
            status: SWEEP_OK.to_string(),
            satisfied_count: Some(satisfied_count(result)),
            average_similarity: average_similarity(result, scope),
            objective_value: result.objective_trace.last().copied(),
            runtime_ms,
        }
    }

    pub fn failed(
        bandwidth_hz: f64,
        method: &str,
        seed: u64,
        status: String,
        runtime_ms: f64,
    ) -> SweepRow {
        SweepRow {
            bandwidth_hz,
            method: method.to_string(),
            seed,
            status,
            satisfied_count: None,
            average_similarity: None,
            objective_value: None,
            runtime_ms,
        }
    }
}

/// Canonical output order: method, then bandwidth, then seed. Applied before
/// writing so parallel execution cannot change file bytes.
pub fn sort_sweep_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.bandwidth_hz.total_cmp(&b.bandwidth_hz))
            .then(a.seed.cmp(&b.seed))
    });
}

/// Full per-user operating point with enough context to re-audit every
/// constraint offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserResultRow {
    pub method: String,
    pub seed: u64,
    pub bandwidth_hz: f64,
    pub user_id: usize,
    pub admission: String,
    pub satisfied: bool,
    pub fallback_used: bool,
    pub c7_met: bool,
    pub beta_hz: f64,
    pub power_w: f64,
    pub compression: f64,
    pub xi: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub snr_linear: f64,
    pub snr_threshold_linear: f64,
    pub delay_s: f64,
}

pub fn user_result_rows(
    result: &AllocationResult,
    users: &[UserProfile],
    seed: u64,
    bandwidth_hz: f64,
) -> Result<Vec<UserResultRow>, MetricsError> {
    aligned(result, users)?;
    Ok(users
        .iter()
        .zip(&result.per_user)
        .map(|(u, r): (&UserProfile, &UserAllocation)| UserResultRow {
            method: result.method.clone(),
            seed,
            bandwidth_hz,
            user_id: u.id,
            admission: r.admission.as_str().to_string(),
            satisfied: r.satisfied,
            fallback_used: r.fallback_used,
            c7_met: r.c7_met,
            beta_hz: r.bandwidth_hz,
            power_w: r.power_w,
            compression: r.compression,
            xi: r.similarity,
            xi_min: u.xi_min,
            xi_max: u.xi_max,
            snr_linear: r.snr_linear,
            snr_threshold_linear: u.snr_threshold_linear,
            delay_s: r.delay_s,
        })
        .collect())
}

pub fn sort_user_rows(rows: &mut [UserResultRow]) {
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.bandwidth_hz.total_cmp(&b.bandwidth_hz))
            .then(a.seed.cmp(&b.seed))
            .then(a.user_id.cmp(&b.user_id))
    });
}

#[derive(Serialize)]
struct Fig1Row<'a> {
    bandwidth_hz: f64,
    method: &'a str,
    seed: u64,
    satisfied_count: usize,
}

#[derive(Serialize)]
struct Fig3Row<'a> {
    bandwidth_hz: f64,
    method: &'a str,
    seed: u64,
    avg_similarity: f64,
}

#[derive(Serialize)]
struct SweepCsvRow<'a> {
    bandwidth_hz: f64,
    method: &'a str,
    seed: u64,
    status: &'a str,
    satisfied_count: Option<usize>,
    average_similarity: Option<f64>,
    objective_value: Option<f64>,
}

/// Satisfied-count rows; failed cells are skipped (they have no count).
pub fn write_fig1_csv<W: io::Write>(rows: &[SweepRow], out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        if let Some(count) = r.satisfied_count {
            w.serialize(Fig1Row {
                bandwidth_hz: r.bandwidth_hz,
                method: &r.method,
                seed: r.seed,
                satisfied_count: count,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Average-similarity rows; cells with nobody in scope are skipped.
pub fn write_fig3_csv<W: io::Write>(rows: &[SweepRow], out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        if let Some(avg) = r.average_similarity {
            w.serialize(Fig3Row {
                bandwidth_hz: r.bandwidth_hz,
                method: &r.method,
                seed: r.seed,
                avg_similarity: avg,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Every cell including failures; metric columns are empty on failed rows.
pub fn write_sweep_csv<W: io::Write>(rows: &[SweepRow], out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(SweepCsvRow {
            bandwidth_hz: r.bandwidth_hz,
            method: &r.method,
            seed: r.seed,
            status: &r.status,
            satisfied_count: r.satisfied_count,
            average_similarity: r.average_similarity,
            objective_value: r.objective_value,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fig2_csv<W: io::Write>(rows: &[Fig2Row], out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_users_csv<W: io::Write>(rows: &[UserResultRow], out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_user_rows<R: io::Read>(input: R) -> Result<Vec<UserResultRow>, MetricsError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record?);
    }
    Ok(rows)
}
