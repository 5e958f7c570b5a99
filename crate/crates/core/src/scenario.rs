//! Scenario configuration, user sampling and link arithmetic.
//!
//! A scenario is a single cell: one base station, `user_count` uplink users
//! placed uniformly over the cell area, a total bandwidth budget and a shared
//! power cap per user. All dB-valued config keys carry a `_db` /
//! `_dbm_per_hz` suffix and are converted to linear units at load time.

use serde::Deserialize;
use thiserror::Error;

use crate::stream;

/// Cell-level parameters. Linear units throughout (`noise_psd_w_per_hz` is
/// W/Hz, not dBm/Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub user_count: usize,
    /// Total uplink bandwidth budget M in Hz.
    pub total_bandwidth_hz: f64,
    /// Per-user transmit power cap in W.
    pub max_power_w: f64,
    /// Noise power spectral density N0 in W/Hz.
    pub noise_psd_w_per_hz: f64,
    /// Penalty exponent `a` of the objective.
    pub penalty_exponent: f64,
    pub cell_radius_m: f64,
    pub min_user_distance_m: f64,
    /// Log-distance path-loss exponent.
    pub pathloss_exponent: f64,
    /// Channel gain at 1 m.
    pub pathloss_ref_gain: f64,
    pub rng_seed: u64,
    /// Minimum bandwidth assigned to sampled users (overridable per user).
    pub default_min_bandwidth_hz: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            user_count: 10,
            total_bandwidth_hz: 10.0e6,
            max_power_w: 0.5,
            noise_psd_w_per_hz: dbm_per_hz_to_w_per_hz(-173.0),
            penalty_exponent: 2.0,
            cell_radius_m: 100.0,
            min_user_distance_m: 1.0,
            pathloss_exponent: 3.76,
            pathloss_ref_gain: 3.0e-4,
            rng_seed: 7,
            default_min_bandwidth_hz: 0.95e6,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let positive: [(&str, f64); 7] = [
            ("total_bandwidth_hz", self.total_bandwidth_hz),
            ("max_power_w", self.max_power_w),
            ("noise_psd_w_per_hz", self.noise_psd_w_per_hz),
            ("min_user_distance_m", self.min_user_distance_m),
            ("pathloss_exponent", self.pathloss_exponent),
            ("pathloss_ref_gain", self.pathloss_ref_gain),
            ("default_min_bandwidth_hz", self.default_min_bandwidth_hz),
        ];
        for (field, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ScenarioError::InvalidField {
                    field,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        if self.user_count == 0 {
            return Err(ScenarioError::InvalidField {
                field: "user_count",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.penalty_exponent >= 1.0) {
            return Err(ScenarioError::InvalidField {
                field: "penalty_exponent",
                reason: format!("must be >= 1, got {}", self.penalty_exponent),
            });
        }
        if !(self.cell_radius_m > self.min_user_distance_m) {
            return Err(ScenarioError::InvalidField {
                field: "cell_radius_m",
                reason: format!(
                    "must exceed min_user_distance_m ({} <= {})",
                    self.cell_radius_m, self.min_user_distance_m
                ),
            });
        }
        Ok(())
    }
}

/// One uplink user's requirements. `xi_min`/`xi_max` bound the acceptable
/// semantic similarity; `snr_threshold_linear` is the C4 threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub id: usize,
    pub distance_m: f64,
    /// Raw (uncompressed) data size d0 in bits.
    pub raw_data_bits: f64,
    pub snr_threshold_linear: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    /// Delay bound tau in seconds (C6).
    pub delay_bound_s: f64,
    /// Minimum bandwidth beta_min in Hz (C2).
    pub min_bandwidth_hz: f64,
}

impl UserProfile {
    pub fn validate(&self, config: &ScenarioConfig) -> Result<(), ScenarioError> {
        let id = self.id;
        let check = |field: &'static str, ok: bool, reason: String| {
            if ok {
                Ok(())
            } else {
                Err(ScenarioError::InvalidUserField { id, field, reason })
            }
        };
        check(
            "distance_m",
            self.distance_m >= config.min_user_distance_m && self.distance_m.is_finite(),
            format!(
                "must be >= min_user_distance_m ({}), got {}",
                config.min_user_distance_m, self.distance_m
            ),
        )?;
        check(
            "raw_data_bits",
            self.raw_data_bits > 0.0,
            format!("must be positive, got {}", self.raw_data_bits),
        )?;
        check(
            "snr_threshold_linear",
            self.snr_threshold_linear > 0.0,
            format!("must be positive, got {}", self.snr_threshold_linear),
        )?;
        check(
            "xi_min",
            self.xi_min > 0.0 && self.xi_min <= 1.0,
            format!("must be in (0, 1], got {}", self.xi_min),
        )?;
        check(
            "xi_max",
            self.xi_max > 0.0 && self.xi_max <= 1.0,
            format!("must be in (0, 1], got {}", self.xi_max),
        )?;
        check(
            "xi_min",
            self.xi_min <= self.xi_max,
            format!("xi_min exceeds xi_max ({} > {})", self.xi_min, self.xi_max),
        )?;
        check(
            "delay_bound_s",
            self.delay_bound_s > 0.0,
            format!("must be positive, got {}", self.delay_bound_s),
        )?;
        check(
            "min_bandwidth_hz",
            self.min_bandwidth_hz > 0.0,
            format!("must be positive, got {}", self.min_bandwidth_hz),
        )?;
        Ok(())
    }
}

/// Per-user channel gains, index-aligned with the user list.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub gains_linear: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to parse scenario config: {0}")]
    Parse(String),
    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("user {id}: invalid value for `{field}`: {reason}")]
    InvalidUserField {
        id: usize,
        field: &'static str,
        reason: String,
    },
    #[error("both noise_psd_dbm_per_hz and noise_psd_w_per_hz present; give exactly one")]
    ConflictingNoiseKeys,
    #[error("duplicate user override for id {0}")]
    DuplicateOverride(usize),
    #[error("user override id {id} out of range for user_count {user_count}")]
    OverrideOutOfRange { id: usize, user_count: usize },
    #[error("distance {distance_m} m below the minimum user distance {min_m} m")]
    DistanceBelowMinimum { distance_m: f64, min_m: f64 },
    #[error("non-positive `{0}` in link arithmetic")]
    NonPositive(&'static str),
    #[error("negative `{0}` in link arithmetic")]
    Negative(&'static str),
    #[error("compression must lie in [0, 1], got {0}")]
    CompressionOutOfRange(f64),
    #[error("zero rate with compression below 1: payload is undeliverable")]
    Undeliverable,
}

// ---------------------------------------------------------------------------
// Unit conversions
// ---------------------------------------------------------------------------

/// dB -> linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio -> dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// dBm/Hz -> W/Hz.
pub fn dbm_per_hz_to_w_per_hz(dbm_per_hz: f64) -> f64 {
    10f64.powf((dbm_per_hz - 30.0) / 10.0)
}

// ---------------------------------------------------------------------------
// Link arithmetic
// ---------------------------------------------------------------------------

/// Log-distance channel gain `ref_gain * d^-exponent`. Deterministic; no
/// fading term.
pub fn channel_gain(distance_m: f64, config: &ScenarioConfig) -> Result<f64, ScenarioError> {
    if distance_m < config.min_user_distance_m {
        return Err(ScenarioError::DistanceBelowMinimum {
            distance_m,
            min_m: config.min_user_distance_m,
        });
    }
    Ok(config.pathloss_ref_gain * distance_m.powf(-config.pathloss_exponent))
}

/// Uplink SNR `P*h / (beta*N0)`.
pub fn snr(
    power_w: f64,
    gain_linear: f64,
    bandwidth_hz: f64,
    noise_psd_w_per_hz: f64,
) -> Result<f64, ScenarioError> {
    for (name, v) in [
        ("power_w", power_w),
        ("gain_linear", gain_linear),
        ("bandwidth_hz", bandwidth_hz),
        ("noise_psd_w_per_hz", noise_psd_w_per_hz),
    ] {
        if !(v > 0.0) {
            return Err(ScenarioError::NonPositive(name));
        }
    }
    Ok(power_w * gain_linear / (bandwidth_hz * noise_psd_w_per_hz))
}

/// Shannon rate `beta * log2(1 + snr)` in bit/s.
pub fn transmission_rate(bandwidth_hz: f64, snr_linear: f64) -> Result<f64, ScenarioError> {
    if bandwidth_hz < 0.0 {
        return Err(ScenarioError::Negative("bandwidth_hz"));
    }
    if snr_linear < 0.0 {
        return Err(ScenarioError::Negative("snr_linear"));
    }
    Ok(bandwidth_hz * (1.0 + snr_linear).log2())
}

/// Transmission delay `d0 * (1 - O) / R` for payload `d0` bits compressed at
/// rate `O`. `O = 1` means nothing is transmitted: zero delay regardless of
/// rate. A zero rate with a nonempty payload is undeliverable.
pub fn transmission_delay(
    raw_data_bits: f64,
    compression: f64,
    rate_bps: f64,
) -> Result<f64, ScenarioError> {
    if !(0.0..=1.0).contains(&compression) {
        return Err(ScenarioError::CompressionOutOfRange(compression));
    }
    if raw_data_bits < 0.0 {
        return Err(ScenarioError::Negative("raw_data_bits"));
    }
    if rate_bps < 0.0 {
        return Err(ScenarioError::Negative("rate_bps"));
    }
    let payload = raw_data_bits * (1.0 - compression);
    if payload == 0.0 {
        return Ok(0.0);
    }
    if rate_bps == 0.0 {
        return Err(ScenarioError::Undeliverable);
    }
    Ok(payload / rate_bps)
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

// Draw indices within each user's stream. Appending new draws never shifts
// existing ones.
const DRAW_DISTANCE: u64 = 0;
const DRAW_DATA_SIZE: u64 = 1;
const DRAW_DELAY_BOUND: u64 = 2;
const DRAW_SNR_THRESHOLD: u64 = 3;
const DRAW_XI_A: u64 = 4;
const DRAW_XI_B: u64 = 5;

/// Sample the user population for `config`: distances area-uniform over the
/// annulus [min_user_distance_m, cell_radius_m], data sizes uniform in
/// [3, 5] Mbit, delay bounds uniform in [0.4, 0.6] ms, SNR thresholds uniform
/// in [20, 25] dB and similarity bands as two sorted uniform draws from
/// [0.6, 0.9]. Deterministic in `config.rng_seed`.
pub fn sample_users(
    config: &ScenarioConfig,
) -> Result<(Vec<UserProfile>, ChannelRealization), ScenarioError> {
    config.validate()?;
    let seed = config.rng_seed;
    let mut users = Vec::with_capacity(config.user_count);
    for id in 0..config.user_count {
        let s = id as u64;
        // Area-uniform radius: d = sqrt(dmin^2 + u*(R^2 - dmin^2)).
        let u = stream::uniform(seed, s, DRAW_DISTANCE);
        let dmin2 = config.min_user_distance_m * config.min_user_distance_m;
        let r2 = config.cell_radius_m * config.cell_radius_m;
        let distance_m = (dmin2 + u * (r2 - dmin2)).sqrt();
        let raw_data_bits = stream::uniform_in(seed, s, DRAW_DATA_SIZE, 3.0e6, 5.0e6);
        let delay_bound_s = stream::uniform_in(seed, s, DRAW_DELAY_BOUND, 0.4e-3, 0.6e-3);
        let snr_threshold_db = stream::uniform_in(seed, s, DRAW_SNR_THRESHOLD, 20.0, 25.0);
        let xi_a = stream::uniform_in(seed, s, DRAW_XI_A, 0.6, 0.9);
        let xi_b = stream::uniform_in(seed, s, DRAW_XI_B, 0.6, 0.9);
        users.push(UserProfile {
            id,
            distance_m,
            raw_data_bits,
            snr_threshold_linear: db_to_linear(snr_threshold_db),
            xi_min: xi_a.min(xi_b),
            xi_max: xi_a.max(xi_b),
            delay_bound_s,
            min_bandwidth_hz: config.default_min_bandwidth_hz,
        });
    }
    let gains = gains_for(&users, config)?;
    Ok((users, gains))
}

/// Channel gains for an explicit user list.
pub fn gains_for(
    users: &[UserProfile],
    config: &ScenarioConfig,
) -> Result<ChannelRealization, ScenarioError> {
    let gains_linear = users
        .iter()
        .map(|u| channel_gain(u.distance_m, config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChannelRealization { gains_linear })
}

// ---------------------------------------------------------------------------
// Config file loading
// ---------------------------------------------------------------------------

/// Optional per-user overrides from a `[[user]]` block. Any field left out
/// keeps its sampled value.
#[derive(Debug, Clone, Default)]
pub struct UserOverride {
    pub id: usize,
    pub distance_m: Option<f64>,
    pub raw_data_bits: Option<f64>,
    pub snr_threshold_linear: Option<f64>,
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    pub delay_bound_s: Option<f64>,
    pub min_bandwidth_hz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    user_count: Option<usize>,
    total_bandwidth_hz: Option<f64>,
    max_power_w: Option<f64>,
    noise_psd_dbm_per_hz: Option<f64>,
    noise_psd_w_per_hz: Option<f64>,
    penalty_exponent: Option<f64>,
    cell_radius_m: Option<f64>,
    min_user_distance_m: Option<f64>,
    pathloss_exponent: Option<f64>,
    pathloss_ref_gain: Option<f64>,
    rng_seed: Option<u64>,
    default_min_bandwidth_hz: Option<f64>,
    #[serde(default, rename = "user")]
    users: Vec<RawUser>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUser {
    id: usize,
    distance_m: Option<f64>,
    raw_data_bits: Option<f64>,
    snr_threshold_db: Option<f64>,
    xi_min: Option<f64>,
    xi_max: Option<f64>,
    delay_bound_s: Option<f64>,
    min_bandwidth_hz: Option<f64>,
}

/// Parse a scenario config from TOML text. Missing keys fall back to
/// defaults; dB-suffixed keys are converted to linear units. Returns the
/// config plus any per-user override blocks (to be applied on top of sampled
/// users by [`build_users`]).
pub fn load_scenario(text: &str) -> Result<(ScenarioConfig, Vec<UserOverride>), ScenarioError> {
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let defaults = ScenarioConfig::default();
    let noise_psd_w_per_hz = match (raw.noise_psd_dbm_per_hz, raw.noise_psd_w_per_hz) {
        (Some(_), Some(_)) => return Err(ScenarioError::ConflictingNoiseKeys),
        (Some(dbm), None) => dbm_per_hz_to_w_per_hz(dbm),
        (None, Some(w)) => w,
        (None, None) => defaults.noise_psd_w_per_hz,
    };
    let config = ScenarioConfig {
        user_count: raw.user_count.unwrap_or(defaults.user_count),
        total_bandwidth_hz: raw.total_bandwidth_hz.unwrap_or(defaults.total_bandwidth_hz),
        max_power_w: raw.max_power_w.unwrap_or(defaults.max_power_w),
        noise_psd_w_per_hz,
        penalty_exponent: raw.penalty_exponent.unwrap_or(defaults.penalty_exponent),
        cell_radius_m: raw.cell_radius_m.unwrap_or(defaults.cell_radius_m),
        min_user_distance_m: raw
            .min_user_distance_m
            .unwrap_or(defaults.min_user_distance_m),
        pathloss_exponent: raw.pathloss_exponent.unwrap_or(defaults.pathloss_exponent),
        pathloss_ref_gain: raw.pathloss_ref_gain.unwrap_or(defaults.pathloss_ref_gain),
        rng_seed: raw.rng_seed.unwrap_or(defaults.rng_seed),
        default_min_bandwidth_hz: raw
            .default_min_bandwidth_hz
            .unwrap_or(defaults.default_min_bandwidth_hz),
    };
    config.validate()?;
    let mut seen = Vec::new();
    let mut overrides = Vec::with_capacity(raw.users.len());
    for u in raw.users {
        if seen.contains(&u.id) {
            return Err(ScenarioError::DuplicateOverride(u.id));
        }
        if u.id >= config.user_count {
            return Err(ScenarioError::OverrideOutOfRange {
                id: u.id,
                user_count: config.user_count,
            });
        }
        seen.push(u.id);
        overrides.push(UserOverride {
            id: u.id,
            distance_m: u.distance_m,
            raw_data_bits: u.raw_data_bits,
            snr_threshold_linear: u.snr_threshold_db.map(db_to_linear),
            xi_min: u.xi_min,
            xi_max: u.xi_max,
            delay_bound_s: u.delay_bound_s,
            min_bandwidth_hz: u.min_bandwidth_hz,
        });
    }
    Ok((config, overrides))
}

/// Sample users, apply overrides, validate and recompute gains.
pub fn build_users(
    config: &ScenarioConfig,
    overrides: &[UserOverride],
) -> Result<(Vec<UserProfile>, ChannelRealization), ScenarioError> {
    let (mut users, _) = sample_users(config)?;
    for o in overrides {
        let u = &mut users[o.id];
        if let Some(v) = o.distance_m {
            u.distance_m = v;
        }
        if let Some(v) = o.raw_data_bits {
            u.raw_data_bits = v;
        }
        if let Some(v) = o.snr_threshold_linear {
            u.snr_threshold_linear = v;
        }
        if let Some(v) = o.xi_min {
            u.xi_min = v;
        }
        if let Some(v) = o.xi_max {
            u.xi_max = v;
        }
        if let Some(v) = o.delay_bound_s {
            u.delay_bound_s = v;
        }
        if let Some(v) = o.min_bandwidth_hz {
            u.min_bandwidth_hz = v;
        }
    }
    for u in &users {
        u.validate(config)?;
    }
    let gains = gains_for(&users, config)?;
    Ok((users, gains))
}
