//! Joint bandwidth/power/compression allocation.
//!
//! The joint problem is attacked by alternation: hold each user's compression
//! rate fixed and solve the resulting geometric program for bandwidth and
//! power, then re-pick compression rates from the similarity table at the
//! achieved SNRs, and repeat until the penalty objective settles. Users whose
//! minimum demands cannot fit are dropped up front (admission control) so the
//! program stays feasible.

use thiserror::Error;

use crate::gp::{build_f1_prime, solve_gp, GpError, GpStatus, SolverOptions};
use crate::scenario::{
    linear_to_db, snr, transmission_delay, transmission_rate, ScenarioConfig, ScenarioError,
    UserProfile,
};
use crate::similarity::{CandidateEntry, SimilarityError, SimilarityTable};

/// Method tag the alternating allocator stamps on its results.
pub const PROPOSED_METHOD: &str = "proposed";

#[derive(Debug, Clone)]
pub struct AllocatorOptions {
    /// Cap on alternation rounds (compression pick + one GP solve each).
    pub max_iterations: usize,
    /// Stop once `|F_k - F_{k-1}| / max(1, |F_{k-1}|)` drops below this.
    pub convergence_threshold: f64,
    pub solver: SolverOptions,
}

impl Default for AllocatorOptions {
    fn default() -> Self {
        AllocatorOptions {
            max_iterations: 20,
            convergence_threshold: 1e-4,
            solver: SolverOptions::default(),
        }
    }
}

/// Why a user is or is not part of the solved program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Served,
    /// The SNR threshold is unreachable even at minimum bandwidth and full
    /// power; no allocation can help.
    DroppedInfeasible,
    /// Shed so the remaining minimum-bandwidth demands fit the budget.
    DroppedCapacity,
}

impl Admission {
    pub fn as_str(&self) -> &'static str {
        match self {
            Admission::Served => "served",
            Admission::DroppedInfeasible => "dropped_infeasible",
            Admission::DroppedCapacity => "dropped_capacity",
        }
    }
}

impl std::fmt::Display for Admission {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Admission {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "served" => Ok(Admission::Served),
            "dropped_infeasible" => Ok(Admission::DroppedInfeasible),
            "dropped_capacity" => Ok(Admission::DroppedCapacity),
            other => Err(format!("unknown admission state {other:?}")),
        }
    }
}

/// Final operating point for one user. Dropped users carry zeroed resources
/// and `compression = 1` (nothing transmitted).
#[derive(Debug, Clone, PartialEq)]
pub struct UserAllocation {
    pub user_id: usize,
    pub bandwidth_hz: f64,
    pub power_w: f64,
    pub compression: f64,
    pub similarity: f64,
    pub snr_linear: f64,
    pub delay_s: f64,
    pub satisfied: bool,
    pub admission: Admission,
    /// Compression came from the threshold-row fallback, so the delay bound
    /// was not enforced when picking it.
    pub fallback_used: bool,
    /// The delivered similarity lies inside the user's acceptance band.
    pub c7_met: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub method: String,
    pub per_user: Vec<UserAllocation>,
    /// Penalty objective after each alternation round.
    pub objective_trace: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

#[derive(Debug, Error)]
pub enum AllocError {
    #[error("input mismatch: {0}")]
    MismatchedInput(&'static str),
    #[error("channel gain for user {id} must be positive, got {gain}")]
    GainNotPositive { id: usize, gain: f64 },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error("bandwidth/power solve failed with status {status:?}")]
    Solver { status: GpStatus },
}

/// Penalty objective: each served user contributes
/// `((snr_th / snr) * (xi_min / xi))^a`, each dropped user contributes 1.
/// Satisfying both targets exactly therefore also scores 1; exceeding them
/// scores less. A served user delivering nothing (zero SNR or similarity,
/// e.g. an idle channel) scores like a dropped one. `rows` must be aligned
/// with `users`.
pub fn objective_value(
    config: &ScenarioConfig,
    users: &[UserProfile],
    rows: &[UserAllocation],
) -> f64 {
    assert_eq!(users.len(), rows.len(), "users and rows must be aligned");
    let a = config.penalty_exponent;
    let mut total = 0.0;
    for (u, r) in users.iter().zip(rows) {
        assert_eq!(u.id, r.user_id, "users and rows must be aligned by id");
        if r.admission == Admission::Served && r.snr_linear > 0.0 && r.similarity > 0.0 {
            total += ((u.snr_threshold_linear / r.snr_linear) * (u.xi_min / r.similarity)).powf(a);
        } else {
            total += 1.0;
        }
    }
    total
}

/// A user is satisfied when served with both targets met; the boundaries
/// count as met.
pub fn is_satisfied(user: &UserProfile, row: &UserAllocation) -> bool {
    row.admission == Admission::Served
        && row.snr_linear >= user.snr_threshold_linear
        && row.similarity >= user.xi_min
}

/// Outcome of one compression pick.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionChoice {
    pub entry: CandidateEntry,
    pub fallback_used: bool,
    pub c7_met: bool,
}

/// Pick a compression rate for one user given the current SNR estimate and
/// bandwidth share.
///
/// Walk the in-band entries of the estimate's table row from most to least
/// similar and take the first whose transmission delay fits the bound. If
/// none fits, fall back to the best in-band entry of the *threshold* row
/// with the delay unchecked (the final allocation may still repair it). If
/// the band is empty there too, settle for the threshold row's most similar
/// entry, leaving the band requirement unmet.
pub fn select_compression(
    table: &SimilarityTable,
    user: &UserProfile,
    snr_estimate_linear: f64,
    bandwidth_hz: f64,
) -> Result<CompressionChoice, AllocError> {
    let estimate_db = linear_to_db(snr_estimate_linear);
    let rate = transmission_rate(bandwidth_hz, snr_estimate_linear)?;
    for entry in table.candidate_entries(estimate_db, user.xi_min, user.xi_max)? {
        let delay = match transmission_delay(user.raw_data_bits, entry.compression, rate) {
            Ok(d) => d,
            Err(ScenarioError::Undeliverable) => continue,
            Err(e) => return Err(e.into()),
        };
        if delay <= user.delay_bound_s {
            return Ok(CompressionChoice {
                entry,
                fallback_used: false,
                c7_met: true,
            });
        }
    }
    let threshold_db = linear_to_db(user.snr_threshold_linear);
    if let Some(entry) = table
        .candidate_entries(threshold_db, user.xi_min, user.xi_max)?
        .into_iter()
        .next()
    {
        return Ok(CompressionChoice {
            entry,
            fallback_used: true,
            c7_met: true,
        });
    }
    let entry = table.row_max_entry(threshold_db)?;
    Ok(CompressionChoice {
        entry,
        fallback_used: true,
        c7_met: false,
    })
}

/// Gain-to-threshold ratio; the served user minimizing it is shed first.
fn capacity_metric(user: &UserProfile, gain: f64) -> f64 {
    gain / user.snr_threshold_linear
}

/// Index of the hardest-to-serve user among `served`; ties shed the higher
/// id so lower ids are retained.
pub(crate) fn hardest(served: &[usize], users: &[UserProfile], gains: &[f64]) -> usize {
    let mut victim = served[0];
    let mut victim_metric = capacity_metric(&users[victim], gains[victim]);
    for &i in &served[1..] {
        let m = capacity_metric(&users[i], gains[i]);
        if m < victim_metric || (m == victim_metric && i > victim) {
            victim = i;
            victim_metric = m;
        }
    }
    victim
}

pub(crate) fn dropped_row(user_id: usize, admission: Admission) -> UserAllocation {
    UserAllocation {
        user_id,
        bandwidth_hz: 0.0,
        power_w: 0.0,
        compression: 1.0,
        similarity: 0.0,
        snr_linear: 0.0,
        delay_s: 0.0,
        satisfied: false,
        admission,
        fallback_used: false,
        c7_met: false,
    }
}

enum StepError {
    /// The fixed-compression program was infeasible; shed a user and retry.
    Retry,
    Fatal(AllocError),
}

/// Allocate bandwidth, power and compression for every user.
///
/// Admission control runs first: users that cannot reach their SNR threshold
/// even at `(min_bandwidth, max_power)` are dropped, then load is shed until
/// the minimum bandwidths fit the budget. The alternation then runs on the
/// admitted set; if the program still turns out infeasible the hardest user
/// is shed and the alternation restarts. An empty admitted set is a valid
/// outcome, not an error.
pub(crate) fn validate_inputs(
    config: &ScenarioConfig,
    users: &[UserProfile],
    gains_linear: &[f64],
) -> Result<(), AllocError> {
    config.validate()?;
    if users.len() != gains_linear.len() {
        return Err(AllocError::MismatchedInput(
            "users and gains must have equal lengths",
        ));
    }
    for u in users {
        u.validate(config)?;
    }
    for (u, &g) in users.iter().zip(gains_linear) {
        if !(g > 0.0 && g.is_finite()) {
            return Err(AllocError::GainNotPositive { id: u.id, gain: g });
        }
    }
    Ok(())
}

/// Admission pre-pass: drop users whose threshold is unreachable outright,
/// then shed load until the minimum bandwidths fit the budget.
pub(crate) fn initial_admission(
    config: &ScenarioConfig,
    users: &[UserProfile],
    gains_linear: &[f64],
) -> Vec<Admission> {
    let n = users.len();
    let mut admission = vec![Admission::Served; n];
    for i in 0..n {
        let corner = users[i].snr_threshold_linear * config.noise_psd_w_per_hz
            * users[i].min_bandwidth_hz
            / (config.max_power_w * gains_linear[i]);
        if corner >= 1.0 - 1e-9 {
            admission[i] = Admission::DroppedInfeasible;
        }
    }
    loop {
        let served: Vec<usize> = (0..n)
            .filter(|&i| admission[i] == Admission::Served)
            .collect();
        let demand: f64 = served.iter().map(|&i| users[i].min_bandwidth_hz).sum();
        if demand <= config.total_bandwidth_hz {
            return admission;
        }
        admission[hardest(&served, users, gains_linear)] = Admission::DroppedCapacity;
    }
}

/// Result when nobody is served: every user dropped, one trace entry of one
/// penalty unit per user.
pub(crate) fn empty_result(
    method: &str,
    users: &[UserProfile],
    admission: &[Admission],
) -> AllocationResult {
    AllocationResult {
        method: method.to_string(),
        per_user: users
            .iter()
            .zip(admission)
            .map(|(u, &adm)| dropped_row(u.id, adm))
            .collect(),
        objective_trace: vec![users.len() as f64],
        iterations_used: 1,
        converged: true,
    }
}

pub fn allocate(
    config: &ScenarioConfig,
    users: &[UserProfile],
    gains_linear: &[f64],
    table: &SimilarityTable,
    options: &AllocatorOptions,
) -> Result<AllocationResult, AllocError> {
    validate_inputs(config, users, gains_linear)?;
    let n = users.len();
    let mut admission = initial_admission(config, users, gains_linear);

    loop {
        let served: Vec<usize> = (0..n)
            .filter(|&i| admission[i] == Admission::Served)
            .collect();
        if served.is_empty() {
            return Ok(empty_result(PROPOSED_METHOD, users, &admission));
        }
        match alternate(config, users, gains_linear, table, options, &served, &admission) {
            Ok(result) => return Ok(result),
            Err(StepError::Retry) => {
                admission[hardest(&served, users, gains_linear)] = Admission::DroppedCapacity;
            }
            Err(StepError::Fatal(e)) => return Err(e),
        }
    }
}

fn alternate(
    config: &ScenarioConfig,
    users: &[UserProfile],
    gains_linear: &[f64],
    table: &SimilarityTable,
    options: &AllocatorOptions,
    served: &[usize],
    admission: &[Admission],
) -> Result<AllocationResult, StepError> {
    let fatal = |e: AllocError| StepError::Fatal(e);
    let k = served.len();
    let sub_users: Vec<UserProfile> = served.iter().map(|&i| users[i].clone()).collect();
    let sub_gains: Vec<f64> = served.iter().map(|&i| gains_linear[i]).collect();

    // Start the alternation from the guaranteed-admissible corner: minimum
    // bandwidth, SNR estimate at the threshold. The warm start is nudged off
    // that corner so it is strictly inside the constraint set.
    let mut snr_est: Vec<f64> = sub_users.iter().map(|u| u.snr_threshold_linear).collect();
    let mut beta: Vec<f64> = sub_users.iter().map(|u| u.min_bandwidth_hz).collect();
    let mut power: Vec<f64> = vec![config.max_power_w; k];
    let mut warm = Vec::with_capacity(2 * k);
    warm.extend(sub_users.iter().map(|u| u.min_bandwidth_hz * (1.0 + 1e-3)));
    warm.extend(std::iter::repeat(config.max_power_w * (1.0 - 1e-3)).take(k));

    let mut choices: Vec<CompressionChoice> = Vec::new();
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations_used = 0;
    let mut converged = false;
    let dropped_count = (users.len() - k) as f64;

    for _ in 0..options.max_iterations {
        iterations_used += 1;
        let mut xi_fixed = Vec::with_capacity(k);
        choices.clear();
        for (j, u) in sub_users.iter().enumerate() {
            let choice = select_compression(table, u, snr_est[j], beta[j]).map_err(fatal)?;
            xi_fixed.push(choice.entry.xi);
            choices.push(choice);
        }

        let gp = build_f1_prime(config, &sub_users, &sub_gains, &xi_fixed)
            .map_err(|e| fatal(e.into()))?;
        let solver = SolverOptions {
            initial_point: Some(warm.clone()),
            ..options.solver.clone()
        };
        let sol = solve_gp(&gp, &solver);
        match sol.status {
            GpStatus::Optimal => {}
            GpStatus::Infeasible => return Err(StepError::Retry),
            status => return Err(fatal(AllocError::Solver { status })),
        }
        beta.copy_from_slice(&sol.values[..k]);
        power.copy_from_slice(&sol.values[k..]);
        for j in 0..k {
            snr_est[j] = snr(
                power[j],
                sub_gains[j],
                beta[j],
                config.noise_psd_w_per_hz,
            )
            .map_err(|e| fatal(e.into()))?;
        }

        let mut objective = dropped_count;
        for (j, u) in sub_users.iter().enumerate() {
            objective += ((u.snr_threshold_linear / snr_est[j]) * (u.xi_min / xi_fixed[j]))
                .powf(config.penalty_exponent);
        }
        let previous = trace.last().copied();
        trace.push(objective);
        if let Some(prev) = previous {
            if (objective - prev).abs() / prev.abs().max(1.0) < options.convergence_threshold {
                converged = true;
                break;
            }
        }
    }

    let mut slot = vec![usize::MAX; users.len()];
    for (j, &i) in served.iter().enumerate() {
        slot[i] = j;
    }
    let mut per_user = Vec::with_capacity(users.len());
    for (i, u) in users.iter().enumerate() {
        if admission[i] != Admission::Served {
            per_user.push(dropped_row(u.id, admission[i]));
            continue;
        }
        let j = slot[i];
        let choice = &choices[j];
        let rate = transmission_rate(beta[j], snr_est[j]).map_err(|e| fatal(e.into()))?;
        let delay = transmission_delay(u.raw_data_bits, choice.entry.compression, rate)
            .map_err(|e| fatal(e.into()))?;
        let row = UserAllocation {
            user_id: u.id,
            bandwidth_hz: beta[j],
            power_w: power[j],
            compression: choice.entry.compression,
            similarity: choice.entry.xi,
            snr_linear: snr_est[j],
            delay_s: delay,
            satisfied: false,
            admission: Admission::Served,
            fallback_used: choice.fallback_used,
            c7_met: choice.c7_met,
        };
        let satisfied = is_satisfied(u, &row);
        per_user.push(UserAllocation { satisfied, ..row });
    }

    Ok(AllocationResult {
        method: PROPOSED_METHOD.to_string(),
        per_user,
        objective_trace: trace,
        iterations_used,
        converged,
    })
}
