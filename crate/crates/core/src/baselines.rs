//! Comparator allocators: strict-similarity, classical raw transmission, and
//! a single-channel QoE-style scheme.

use crate::allocator::{
    allocate, dropped_row, empty_result, hardest, initial_admission, is_satisfied,
    objective_value, validate_inputs, AllocError, AllocationResult, Admission, AllocatorOptions,
    UserAllocation,
};
use crate::gp::{build_f1_prime, solve_gp, GpStatus, SolverOptions};
use crate::scenario::{
    linear_to_db, snr, transmission_delay, transmission_rate, ScenarioConfig, UserProfile,
};
use crate::similarity::{SimilarityError, SimilarityTable};

pub const STRICT_METHOD: &str = "strict";
pub const CLASSICAL_METHOD: &str = "classical";
pub const QOE_METHOD: &str = "qoe";

/// Strict-similarity allocation: the range method with every user's band
/// collapsed onto its lower edge. Exact-band candidates are almost never
/// available, so compression comes from the most-similar-entry fallback and
/// a user is satisfied only when that entry still clears the target.
pub fn allocate_strict(
    config: &ScenarioConfig,
    users: &[UserProfile],
    gains_linear: &[f64],
    table: &SimilarityTable,
    options: &AllocatorOptions,
) -> Result<AllocationResult, AllocError> {
    let collapsed: Vec<UserProfile> = users
        .iter()
        .cloned()
        .map(|mut u| {
            u.xi_max = u.xi_min;
            u
        })
        .collect();
    let mut result = allocate(config, &collapsed, gains_linear, table, options)?;
    result.method = STRICT_METHOD.to_string();
    Ok(result)
}

/// Classical raw transmission: nothing is compressed (`O = 0`), the
/// bandwidth/power program runs once with unit similarity, and semantic
/// quality is all-or-nothing — `xi = 1` when the SNR threshold is met, else
/// 0. Satisfaction additionally requires the full payload to arrive within
/// the delay bound.
pub fn allocate_classical(
    config: &ScenarioConfig,
    users: &[UserProfile],
    gains_linear: &[f64],
) -> Result<AllocationResult, AllocError> {
    validate_inputs(config, users, gains_linear)?;
    let n = users.len();
    let mut admission = initial_admission(config, users, gains_linear);

    loop {
        let served: Vec<usize> = (0..n)
            .filter(|&i| admission[i] == Admission::Served)
            .collect();
        if served.is_empty() {
            return Ok(empty_result(CLASSICAL_METHOD, users, &admission));
        }
        let k = served.len();
        let sub_users: Vec<UserProfile> = served.iter().map(|&i| users[i].clone()).collect();
        let sub_gains: Vec<f64> = served.iter().map(|&i| gains_linear[i]).collect();
        let xi_fixed = vec![1.0; k];
        let gp = build_f1_prime(config, &sub_users, &sub_gains, &xi_fixed)?;
        let mut warm = Vec::with_capacity(2 * k);
        warm.extend(sub_users.iter().map(|u| u.min_bandwidth_hz * (1.0 + 1e-3)));
        warm.extend(std::iter::repeat(config.max_power_w * (1.0 - 1e-3)).take(k));
        let solver = SolverOptions {
            initial_point: Some(warm),
            ..SolverOptions::default()
        };
        let sol = solve_gp(&gp, &solver);
        match sol.status {
            GpStatus::Optimal => {}
            GpStatus::Infeasible => {
                admission[hardest(&served, users, gains_linear)] = Admission::DroppedCapacity;
                continue;
            }
            status => return Err(AllocError::Solver { status }),
        }

        let mut slot = vec![usize::MAX; n];
        for (j, &i) in served.iter().enumerate() {
            slot[i] = j;
        }
        let mut per_user = Vec::with_capacity(n);
        let mut objective = (n - k) as f64;
        for (i, u) in users.iter().enumerate() {
            if admission[i] != Admission::Served {
                per_user.push(dropped_row(u.id, admission[i]));
                continue;
            }
            let j = slot[i];
            let (beta, power) = (sol.values[j], sol.values[k + j]);
            let snr_linear = snr(power, sub_gains[j], beta, config.noise_psd_w_per_hz)?;
            let rate = transmission_rate(beta, snr_linear)?;
            let delay = transmission_delay(u.raw_data_bits, 0.0, rate)?;
            let meets_snr = snr_linear >= u.snr_threshold_linear;
            let xi = if meets_snr { 1.0 } else { 0.0 };
            objective += ((u.snr_threshold_linear / snr_linear) * u.xi_min)
                .powf(config.penalty_exponent);
            per_user.push(UserAllocation {
                user_id: u.id,
                bandwidth_hz: beta,
                power_w: power,
                compression: 0.0,
                similarity: xi,
                snr_linear,
                delay_s: delay,
                satisfied: meets_snr && delay <= u.delay_bound_s,
                admission: Admission::Served,
                fallback_used: false,
                c7_met: xi >= u.xi_min && xi <= u.xi_max,
            });
        }
        return Ok(AllocationResult {
            method: CLASSICAL_METHOD.to_string(),
            per_user,
            objective_trace: vec![objective],
            iterations_used: 1,
            converged: true,
        });
    }
}

#[derive(Debug, Clone)]
pub struct QoeOptions {
    pub channel_width_hz: f64,
    pub similarity_weight: f64,
    pub rate_weight: f64,
    /// Per-user strict similarity targets; `None` uses each user's band
    /// floor.
    pub strict_xi_targets: Option<Vec<f64>>,
}

impl Default for QoeOptions {
    fn default() -> Self {
        QoeOptions {
            channel_width_hz: 1e6,
            similarity_weight: 0.5,
            rate_weight: 0.5,
            strict_xi_targets: None,
        }
    }
}

impl QoeOptions {
    fn validate(&self, config: &ScenarioConfig, users: &[UserProfile]) -> Result<(), AllocError> {
        if !(self.channel_width_hz > 0.0) {
            return Err(AllocError::MismatchedInput("channel width must be positive"));
        }
        if self.channel_width_hz > config.total_bandwidth_hz {
            return Err(AllocError::MismatchedInput(
                "channel width exceeds the bandwidth budget",
            ));
        }
        for w in [self.similarity_weight, self.rate_weight] {
            if !(0.0..=1.0).contains(&w) {
                return Err(AllocError::MismatchedInput("weights must lie in [0, 1]"));
            }
        }
        if (self.similarity_weight + self.rate_weight - 1.0).abs() > 1e-9 {
            return Err(AllocError::MismatchedInput("weights must sum to 1"));
        }
        if let Some(targets) = &self.strict_xi_targets {
            if targets.len() != users.len() {
                return Err(AllocError::MismatchedInput(
                    "one strict target per user is required",
                ));
            }
            if targets.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
                return Err(AllocError::MismatchedInput(
                    "strict targets must lie in (0, 1]",
                ));
            }
        }
        Ok(())
    }
}

/// Single-channel QoE-style allocation: the budget is cut into
/// `floor(M / width)` equal channels handed to users in descending channel
/// gain (ties by id). Each holder transmits at full power with the
/// compression maximizing `w_xi * xi + w_rate * (R*xi) / (R*xi_best)`
/// subject to `xi >= target`; the rate factor reduces to `xi / xi_best`
/// because the channel fixes `R`. An unreachable target leaves the channel
/// held but idle. Users without a channel — including any whose minimum
/// bandwidth exceeds the channel width — are dropped.
pub fn allocate_qoe(
    config: &ScenarioConfig,
    users: &[UserProfile],
    gains_linear: &[f64],
    table: &SimilarityTable,
    qoe: &QoeOptions,
) -> Result<AllocationResult, AllocError> {
    validate_inputs(config, users, gains_linear)?;
    qoe.validate(config, users)?;
    let n = users.len();
    let width = qoe.channel_width_hz;
    let mut remaining = (config.total_bandwidth_hz / width).floor() as usize;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        gains_linear[b]
            .partial_cmp(&gains_linear[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut holds_channel = vec![false; n];
    for &i in &order {
        if remaining == 0 {
            break;
        }
        if users[i].min_bandwidth_hz > width {
            continue;
        }
        holds_channel[i] = true;
        remaining -= 1;
    }

    let mut per_user = Vec::with_capacity(n);
    for (i, u) in users.iter().enumerate() {
        if !holds_channel[i] {
            per_user.push(dropped_row(u.id, Admission::DroppedCapacity));
            continue;
        }
        let snr_linear = snr(
            config.max_power_w,
            gains_linear[i],
            width,
            config.noise_psd_w_per_hz,
        )?;
        let snr_db = linear_to_db(snr_linear);
        let target = qoe
            .strict_xi_targets
            .as_ref()
            .map(|t| t[i])
            .unwrap_or(u.xi_min);
        let candidates = match table.candidate_entries(snr_db, target, 1.0) {
            Ok(c) => c,
            Err(SimilarityError::BelowTableRange { .. }) => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        let choice = if candidates.is_empty() {
            None
        } else {
            let best_xi = table.row_max_entry(snr_db)?.xi;
            let mut best = &candidates[0];
            let mut best_score = f64::NEG_INFINITY;
            for entry in &candidates {
                let score = qoe.similarity_weight * entry.xi
                    + qoe.rate_weight * entry.xi / best_xi;
                if score > best_score {
                    best_score = score;
                    best = entry;
                }
            }
            Some(best.clone())
        };
        let row = match choice {
            Some(entry) => {
                let rate = transmission_rate(width, snr_linear)?;
                let delay = transmission_delay(u.raw_data_bits, entry.compression, rate)?;
                UserAllocation {
                    user_id: u.id,
                    bandwidth_hz: width,
                    power_w: config.max_power_w,
                    compression: entry.compression,
                    similarity: entry.xi,
                    snr_linear,
                    delay_s: delay,
                    satisfied: false,
                    admission: Admission::Served,
                    fallback_used: false,
                    c7_met: entry.xi >= u.xi_min && entry.xi <= u.xi_max,
                }
            }
            // Target unreachable: the channel stays with the user but
            // nothing is sent.
            None => UserAllocation {
                user_id: u.id,
                bandwidth_hz: width,
                power_w: 0.0,
                compression: 1.0,
                similarity: 0.0,
                snr_linear: 0.0,
                delay_s: 0.0,
                satisfied: false,
                admission: Admission::Served,
                fallback_used: false,
                c7_met: false,
            },
        };
        let satisfied = is_satisfied(u, &row);
        per_user.push(UserAllocation { satisfied, ..row });
    }

    let objective = objective_value(config, users, &per_user);
    Ok(AllocationResult {
        method: QOE_METHOD.to_string(),
        per_user,
        objective_trace: vec![objective],
        iterations_used: 1,
        converged: true,
    })
}
