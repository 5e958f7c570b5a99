//! The four subcommands: `gen-table`, `run`, `sweep`, `validate`.
//!
//! Failures are split into two exit classes. [`CmdError::Validation`] (exit
//! 1) covers everything the caller can fix — unreadable files, bad flag
//! values, malformed configs, and audit findings. [`CmdError::Infeasible`]
//! (exit 2) covers scenarios the solver genuinely cannot serve.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::anyhow;
use clap::{Args, ValueEnum};
use rayon::prelude::*;

use semra::allocator::{
    self, Admission, AllocError, AllocationResult, AllocatorOptions, PROPOSED_METHOD,
};
use semra::baselines::{self, QoeOptions, CLASSICAL_METHOD, QOE_METHOD, STRICT_METHOD};
use semra::metrics::{self, SimilarityScope, SweepRow, UserResultRow, SWEEP_OK};
use semra::scenario::{self, ScenarioConfig, UserOverride, UserProfile};
use semra::similarity::{
    default_table, generate_table, grid_range, SimilarityTable, SurrogateParams,
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub enum CmdError {
    /// Bad inputs or a failed audit; the caller can fix these.
    Validation(anyhow::Error),
    /// The scenario itself cannot be solved.
    Infeasible(anyhow::Error),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Validation(_) => 1,
            CmdError::Infeasible(_) => 2,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Validation(e) | CmdError::Infeasible(e) => write!(f, "{e:#}"),
        }
    }
}

fn validation(e: impl Into<anyhow::Error>) -> CmdError {
    CmdError::Validation(e.into())
}

/// Allocation failures caused by malformed inputs are the caller's problem;
/// everything else means the scenario could not be served.
fn classify_alloc(e: AllocError) -> CmdError {
    match e {
        AllocError::MismatchedInput(_) | AllocError::Scenario(_) => CmdError::Validation(e.into()),
        _ => CmdError::Infeasible(e.into()),
    }
}

// ---------------------------------------------------------------------------
// Methods
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Proposed,
    Strict,
    Classical,
    Qoe,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Proposed,
        Method::Strict,
        Method::Classical,
        Method::Qoe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Proposed => PROPOSED_METHOD,
            Method::Strict => STRICT_METHOD,
            Method::Classical => CLASSICAL_METHOD,
            Method::Qoe => QOE_METHOD,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn execute(
    method: Method,
    config: &ScenarioConfig,
    users: &[UserProfile],
    gains: &[f64],
    table: &SimilarityTable,
    options: &AllocatorOptions,
) -> Result<AllocationResult, AllocError> {
    match method {
        Method::Proposed => allocator::allocate(config, users, gains, table, options),
        Method::Strict => baselines::allocate_strict(config, users, gains, table, options),
        Method::Classical => baselines::allocate_classical(config, users, gains),
        Method::Qoe => baselines::allocate_qoe(config, users, gains, table, &QoeOptions::default()),
    }
}

// ---------------------------------------------------------------------------
// Shared loading
// ---------------------------------------------------------------------------

fn load_config(path: Option<&Path>) -> Result<(ScenarioConfig, Vec<UserOverride>), CmdError> {
    match path {
        None => Ok((ScenarioConfig::default(), Vec::new())),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| validation(anyhow!("reading config {}: {e}", p.display())))?;
            scenario::load_scenario(&text)
                .map_err(|e| validation(anyhow!("config {}: {e}", p.display())))
        }
    }
}

fn load_table(path: Option<&Path>) -> Result<SimilarityTable, CmdError> {
    match path {
        None => Ok(default_table()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| validation(anyhow!("reading table {}: {e}", p.display())))?;
            SimilarityTable::load_csv(&text)
                .map_err(|e| validation(anyhow!("table {}: {e}", p.display())))
        }
    }
}

fn allocator_options(
    iter_max: Option<usize>,
    delta: Option<f64>,
) -> Result<AllocatorOptions, CmdError> {
    let mut options = AllocatorOptions::default();
    if let Some(n) = iter_max {
        if n == 0 {
            return Err(validation(anyhow!("--iter-max must be at least 1")));
        }
        options.max_iterations = n;
    }
    if let Some(d) = delta {
        if !(d > 0.0) {
            return Err(validation(anyhow!("--delta must be positive")));
        }
        options.convergence_threshold = d;
    }
    Ok(options)
}

fn apply_penalty_exponent(config: &mut ScenarioConfig, a: Option<f64>) -> Result<(), CmdError> {
    if let Some(a) = a {
        if !(a > 0.0) {
            return Err(validation(anyhow!("--a must be positive")));
        }
        config.penalty_exponent = a;
    }
    Ok(())
}

fn create_out(dir: &Path, name: &str) -> Result<fs::File, CmdError> {
    let path = dir.join(name);
    fs::File::create(&path).map_err(|e| validation(anyhow!("creating {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// gen-table
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct GenTableArgs {
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Lowest SNR row in dB.
    #[arg(long, default_value_t = -10.0)]
    pub snr_min: f64,
    /// Highest SNR row in dB.
    #[arg(long, default_value_t = 40.0)]
    pub snr_max: f64,
    /// SNR row spacing in dB.
    #[arg(long, default_value_t = 1.0)]
    pub snr_step: f64,
    /// Smallest compression rate column; must be strictly positive.
    #[arg(long, default_value_t = 0.05)]
    pub o_min: f64,
    /// Largest compression rate column.
    #[arg(long, default_value_t = 1.0)]
    pub o_max: f64,
    /// Compression column spacing.
    #[arg(long, default_value_t = 0.05)]
    pub o_step: f64,
    /// Surrogate exponent on the compression rate.
    #[arg(long, default_value_t = 2.0)]
    pub compression_power: f64,
    /// Logistic midpoint of the SNR response, in dB.
    #[arg(long, default_value_t = 5.0)]
    pub snr_midpoint_db: f64,
    /// Logistic width of the SNR response, in dB.
    #[arg(long, default_value_t = 3.0)]
    pub snr_scale_db: f64,
    /// Similarity floor at very low SNR or full compression.
    #[arg(long, default_value_t = 0.05)]
    pub floor: f64,
}

pub fn gen_table(args: GenTableArgs) -> Result<(), CmdError> {
    if !(args.o_min > 0.0) {
        return Err(validation(anyhow!(
            "--o-min must be strictly positive: a zero compression rate sends the raw payload, which the table does not model"
        )));
    }
    if args.o_max > 1.0 {
        return Err(validation(anyhow!(
            "--o-max must not exceed 1 (nothing left to remove beyond the full payload)"
        )));
    }
    let params = SurrogateParams {
        compression_power: args.compression_power,
        snr_midpoint_db: args.snr_midpoint_db,
        snr_scale_db: args.snr_scale_db,
        floor: args.floor,
    };
    let snr_grid = grid_range(args.snr_min, args.snr_max, args.snr_step).map_err(validation)?;
    let o_grid = grid_range(args.o_min, args.o_max, args.o_step).map_err(validation)?;
    let table = generate_table(&snr_grid, &o_grid, &params).map_err(validation)?;
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| validation(anyhow!("creating {}: {e}", dir.display())))?;
        }
    }
    fs::write(&args.out, table.save_csv())
        .map_err(|e| validation(anyhow!("writing {}: {e}", args.out.display())))?;
    println!(
        "wrote {} ({} SNR rows x {} compression columns)",
        args.out.display(),
        snr_grid.len(),
        o_grid.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct RunArgs {
    /// Scenario TOML; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Similarity table CSV; the built-in surrogate table when omitted.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Proposed)]
    pub method: Method,
    /// Override the scenario's RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the penalty exponent in the objective.
    #[arg(long)]
    pub a: Option<f64>,
    /// Cap on compression/GP alternation rounds.
    #[arg(long)]
    pub iter_max: Option<usize>,
    /// Relative objective change that counts as converged.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Directory for report.txt, users.csv and fig2.csv.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

pub fn run(args: RunArgs) -> Result<(), CmdError> {
    let (mut config, overrides) = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    apply_penalty_exponent(&mut config, args.a)?;
    let table = load_table(args.table.as_deref())?;
    let options = allocator_options(args.iter_max, args.delta)?;
    let (users, channel) = scenario::build_users(&config, &overrides).map_err(validation)?;

    let started = Instant::now();
    let result = execute(
        args.method,
        &config,
        &users,
        &channel.gains_linear,
        &table,
        &options,
    )
    .map_err(classify_alloc)?;
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;

    let mut user_rows =
        metrics::user_result_rows(&result, &users, config.rng_seed, config.total_bandwidth_hz)
            .map_err(validation)?;
    metrics::sort_user_rows(&mut user_rows);
    let fig2 = metrics::per_user_report(&result, &users).map_err(validation)?;

    fs::create_dir_all(&args.out_dir)
        .map_err(|e| validation(anyhow!("creating {}: {e}", args.out_dir.display())))?;
    metrics::write_users_csv(&user_rows, create_out(&args.out_dir, "users.csv")?)
        .map_err(validation)?;
    metrics::write_fig2_csv(&fig2, create_out(&args.out_dir, "fig2.csv")?).map_err(validation)?;
    let report = render_report(&config, &result, &users);
    let report_path = args.out_dir.join("report.txt");
    fs::write(&report_path, report)
        .map_err(|e| validation(anyhow!("writing {}: {e}", report_path.display())))?;

    println!(
        "{}: {} of {} users satisfied ({:.1} ms) -> {}",
        result.method,
        metrics::satisfied_count(&result),
        users.len(),
        runtime_ms,
        args.out_dir.display()
    );
    Ok(())
}

/// Plain key/value summary. Runtime is deliberately left out so the file is
/// byte-identical across repeat runs.
fn render_report(
    config: &ScenarioConfig,
    result: &AllocationResult,
    users: &[UserProfile],
) -> String {
    use fmt::Write;

    let count = |a: Admission| {
        result
            .per_user
            .iter()
            .filter(|r| r.admission == a)
            .count()
    };
    let mut s = String::new();
    let _ = writeln!(s, "method: {}", result.method);
    let _ = writeln!(s, "seed: {}", config.rng_seed);
    let _ = writeln!(s, "bandwidth_hz: {}", config.total_bandwidth_hz);
    let _ = writeln!(s, "users: {}", users.len());
    let _ = writeln!(s, "served: {}", count(Admission::Served));
    let _ = writeln!(s, "dropped_infeasible: {}", count(Admission::DroppedInfeasible));
    let _ = writeln!(s, "dropped_capacity: {}", count(Admission::DroppedCapacity));
    let _ = writeln!(s, "satisfied: {}", metrics::satisfied_count(result));
    match metrics::average_similarity(result, SimilarityScope::SatisfiedOnly) {
        Some(v) => {
            let _ = writeln!(s, "average_similarity_satisfied: {v}");
        }
        None => {
            let _ = writeln!(s, "average_similarity_satisfied: n/a");
        }
    }
    match result.objective_trace.last() {
        Some(v) => {
            let _ = writeln!(s, "objective: {v}");
        }
        None => {
            let _ = writeln!(s, "objective: n/a");
        }
    }
    let _ = writeln!(s, "iterations: {}", result.iterations_used);
    let _ = writeln!(s, "converged: {}", result.converged);
    let _ = writeln!(
        s,
        "fallback_users: {}",
        result.per_user.iter().filter(|r| r.fallback_used).count()
    );
    s
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct SweepArgs {
    /// Scenario TOML; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Similarity table CSV; the built-in surrogate table when omitted.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Comma-separated bandwidths in Hz; items may be start:stop:step ranges.
    #[arg(long, default_value = "8e6:25e6:1e6")]
    pub bandwidths: String,
    /// Comma-separated seeds; items may be lo:hi ranges.
    #[arg(long, default_value = "1:20")]
    pub seeds: String,
    /// Methods to run in every cell.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = Method::ALL)]
    pub methods: Vec<Method>,
    /// Override the penalty exponent in the objective.
    #[arg(long)]
    pub a: Option<f64>,
    /// Cap on compression/GP alternation rounds.
    #[arg(long)]
    pub iter_max: Option<usize>,
    /// Relative objective change that counts as converged.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Directory for sweep.csv, fig1.csv, fig3.csv and users.csv.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

pub fn sweep(args: SweepArgs) -> Result<(), CmdError> {
    let (mut base, overrides) = load_config(args.config.as_deref())?;
    apply_penalty_exponent(&mut base, args.a)?;
    let table = load_table(args.table.as_deref())?;
    let options = allocator_options(args.iter_max, args.delta)?;
    let bandwidths = parse_bandwidths(&args.bandwidths)?;
    let seeds = parse_seeds(&args.seeds)?;
    if args.methods.is_empty() {
        return Err(validation(anyhow!("--methods must name at least one method")));
    }

    let mut cells = Vec::with_capacity(bandwidths.len() * seeds.len() * args.methods.len());
    for &bandwidth in &bandwidths {
        for &seed in &seeds {
            for &method in &args.methods {
                cells.push((bandwidth, seed, method));
            }
        }
    }

    let outcomes: Vec<(SweepRow, Vec<UserResultRow>)> = cells
        .par_iter()
        .map(|&(bandwidth, seed, method)| {
            run_cell(&base, &overrides, &table, &options, bandwidth, seed, method)
        })
        .collect();

    let mut sweep_rows = Vec::with_capacity(outcomes.len());
    let mut user_rows = Vec::new();
    for (row, users) in outcomes {
        sweep_rows.push(row);
        user_rows.extend(users);
    }
    metrics::sort_sweep_rows(&mut sweep_rows);
    metrics::sort_user_rows(&mut user_rows);

    fs::create_dir_all(&args.out_dir)
        .map_err(|e| validation(anyhow!("creating {}: {e}", args.out_dir.display())))?;
    metrics::write_sweep_csv(&sweep_rows, create_out(&args.out_dir, "sweep.csv")?)
        .map_err(validation)?;
    metrics::write_fig1_csv(&sweep_rows, create_out(&args.out_dir, "fig1.csv")?)
        .map_err(validation)?;
    metrics::write_fig3_csv(&sweep_rows, create_out(&args.out_dir, "fig3.csv")?)
        .map_err(validation)?;
    metrics::write_users_csv(&user_rows, create_out(&args.out_dir, "users.csv")?)
        .map_err(validation)?;

    let failed = sweep_rows.iter().filter(|r| r.status != SWEEP_OK).count();
    println!(
        "{} cells ({} failed) -> {}",
        sweep_rows.len(),
        failed,
        args.out_dir.display()
    );
    Ok(())
}

/// One (bandwidth, seed, method) cell. Failures become a status row so a
/// single bad cell cannot abort the rest of the sweep.
fn run_cell(
    base: &ScenarioConfig,
    overrides: &[UserOverride],
    table: &SimilarityTable,
    options: &AllocatorOptions,
    bandwidth: f64,
    seed: u64,
    method: Method,
) -> (SweepRow, Vec<UserResultRow>) {
    let mut config = base.clone();
    config.total_bandwidth_hz = bandwidth;
    config.rng_seed = seed;
    let started = Instant::now();
    let attempt = scenario::build_users(&config, overrides)
        .map_err(AllocError::from)
        .and_then(|(users, channel)| {
            let result = execute(method, &config, &users, &channel.gains_linear, table, options)?;
            Ok((result, users))
        });
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
    match attempt {
        Ok((result, users)) => {
            let rows = metrics::user_result_rows(&result, &users, seed, bandwidth)
                .expect("allocation rows align with the user list");
            (
                SweepRow::from_result(
                    bandwidth,
                    seed,
                    &result,
                    SimilarityScope::SatisfiedOnly,
                    runtime_ms,
                ),
                rows,
            )
        }
        Err(e) => (
            SweepRow::failed(bandwidth, method.as_str(), seed, e.to_string(), runtime_ms),
            Vec::new(),
        ),
    }
}

fn parse_bandwidths(spec: &str) -> Result<Vec<f64>, CmdError> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        let parts: Vec<&str> = item.split(':').collect();
        match parts.len() {
            1 => out.push(parse_f64(parts[0], "bandwidth")?),
            3 => {
                let start = parse_f64(parts[0], "bandwidth range start")?;
                let stop = parse_f64(parts[1], "bandwidth range stop")?;
                let step = parse_f64(parts[2], "bandwidth range step")?;
                out.extend(grid_range(start, stop, step).map_err(validation)?);
            }
            _ => {
                return Err(validation(anyhow!(
                    "bandwidth items are either a number or start:stop:step, got {item:?}"
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(validation(anyhow!("--bandwidths names no bandwidths")));
    }
    if let Some(bad) = out.iter().find(|b| !(**b > 0.0)) {
        return Err(validation(anyhow!("bandwidths must be positive, got {bad}")));
    }
    Ok(out)
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, CmdError> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        let parts: Vec<&str> = item.split(':').collect();
        match parts.len() {
            1 => out.push(parse_u64(parts[0], "seed")?),
            2 => {
                let lo = parse_u64(parts[0], "seed range start")?;
                let hi = parse_u64(parts[1], "seed range end")?;
                if hi < lo {
                    return Err(validation(anyhow!("seed range {item:?} runs backwards")));
                }
                out.extend(lo..=hi);
            }
            _ => {
                return Err(validation(anyhow!(
                    "seed items are either a number or lo:hi, got {item:?}"
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(validation(anyhow!("--seeds names no seeds")));
    }
    Ok(out)
}

fn parse_f64(text: &str, what: &str) -> Result<f64, CmdError> {
    text.trim()
        .parse::<f64>()
        .map_err(|e| validation(anyhow!("{what} {text:?}: {e}")))
}

fn parse_u64(text: &str, what: &str) -> Result<u64, CmdError> {
    text.trim()
        .parse::<u64>()
        .map_err(|e| validation(anyhow!("{what} {text:?}: {e}")))
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct ValidateArgs {
    /// Scenario TOML the results were produced from; built-in defaults when
    /// omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// users.csv produced by `run` or `sweep`.
    #[arg(long)]
    pub users: PathBuf,
    /// Relative slack applied to every constraint check.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

/// Re-derive each (method, seed, bandwidth) cell's scenario and audit the
/// recorded operating points against it: per-user profile consistency, the
/// bandwidth budget, per-user bandwidth floors and power caps, SNR
/// consistency, and — for rows claiming satisfaction — the SNR threshold and
/// the similarity floor. `xi_max` is not audited because the strict method
/// deliberately collapses the band before allocating.
pub fn validate(args: ValidateArgs) -> Result<(), CmdError> {
    if !(args.tol >= 0.0) {
        return Err(validation(anyhow!("--tol must be non-negative")));
    }
    let tol = args.tol;
    let (base, overrides) = load_config(args.config.as_deref())?;
    let file = fs::File::open(&args.users)
        .map_err(|e| validation(anyhow!("opening {}: {e}", args.users.display())))?;
    let rows = metrics::read_user_rows(file)
        .map_err(|e| validation(anyhow!("{}: {e}", args.users.display())))?;
    if rows.is_empty() {
        return Err(validation(anyhow!("{}: no rows to audit", args.users.display())));
    }

    let mut groups: BTreeMap<(String, u64, u64), Vec<&UserResultRow>> = BTreeMap::new();
    for row in &rows {
        groups
            .entry((row.method.clone(), row.seed, row.bandwidth_hz.to_bits()))
            .or_default()
            .push(row);
    }

    let mut findings: Vec<String> = Vec::new();
    for ((method, seed, bits), group) in &groups {
        let bandwidth = f64::from_bits(*bits);
        let label = format!("{method} seed {seed} bandwidth {bandwidth}");
        let mut config = base.clone();
        config.rng_seed = *seed;
        config.total_bandwidth_hz = bandwidth;
        let (users, channel) = match scenario::build_users(&config, &overrides) {
            Ok(v) => v,
            Err(e) => {
                findings.push(format!("{label}: cannot rebuild the scenario: {e}"));
                continue;
            }
        };

        let mut seen = vec![false; users.len()];
        let mut total_beta = 0.0;
        for row in group {
            let Some(user) = users.get(row.user_id) else {
                findings.push(format!(
                    "{label} user {}: not in the scenario (user_count {})",
                    row.user_id,
                    users.len()
                ));
                continue;
            };
            if seen[row.user_id] {
                findings.push(format!("{label} user {}: duplicate row", row.user_id));
                continue;
            }
            seen[row.user_id] = true;
            if rel_err(row.xi_min, user.xi_min) > 1e-9 {
                findings.push(format!(
                    "{label} user {}: xi_min {} does not match the scenario's {}",
                    row.user_id, row.xi_min, user.xi_min
                ));
            }
            if rel_err(row.snr_threshold_linear, user.snr_threshold_linear) > 1e-9 {
                findings.push(format!(
                    "{label} user {}: snr threshold {} does not match the scenario's {}",
                    row.user_id, row.snr_threshold_linear, user.snr_threshold_linear
                ));
            }
            total_beta += row.beta_hz;

            if row.admission == Admission::Served.as_str() {
                if row.beta_hz < user.min_bandwidth_hz * (1.0 - tol) {
                    findings.push(format!(
                        "{label} user {}: min_bandwidth violated: beta {} < {}",
                        row.user_id, row.beta_hz, user.min_bandwidth_hz
                    ));
                }
                if row.power_w > config.max_power_w * (1.0 + tol) {
                    findings.push(format!(
                        "{label} user {}: power_cap violated: power {} > {}",
                        row.user_id, row.power_w, config.max_power_w
                    ));
                }
                // Idle rows (held channel, zero power) legitimately carry
                // zero SNR; everything else must match P*h/(beta*N0).
                let expected_snr = if row.power_w > 0.0 && row.beta_hz > 0.0 {
                    row.power_w * channel.gains_linear[row.user_id]
                        / (row.beta_hz * config.noise_psd_w_per_hz)
                } else {
                    0.0
                };
                if rel_err(row.snr_linear, expected_snr) > 1e-6 {
                    findings.push(format!(
                        "{label} user {}: snr {} is inconsistent with the recorded point (expected {})",
                        row.user_id, row.snr_linear, expected_snr
                    ));
                }
            }

            if row.satisfied {
                if row.admission != Admission::Served.as_str() {
                    findings.push(format!(
                        "{label} user {}: satisfied but admission is {}",
                        row.user_id, row.admission
                    ));
                }
                if row.snr_linear < row.snr_threshold_linear * (1.0 - tol) {
                    findings.push(format!(
                        "{label} user {}: snr_threshold violated: snr {} < {}",
                        row.user_id, row.snr_linear, row.snr_threshold_linear
                    ));
                }
                if row.xi < row.xi_min - tol {
                    findings.push(format!(
                        "{label} user {}: min_similarity violated: xi {} < {}",
                        row.user_id, row.xi, row.xi_min
                    ));
                }
            }
        }
        if total_beta > bandwidth * (1.0 + tol) {
            findings.push(format!(
                "{label}: bandwidth_budget violated: total beta {total_beta} > {bandwidth}"
            ));
        }
    }

    if findings.is_empty() {
        println!("validate: ok ({} rows in {} cells)", rows.len(), groups.len());
        Ok(())
    } else {
        for f in &findings {
            eprintln!("violation: {f}");
        }
        Err(validation(anyhow!(
            "{} constraint violation(s) across {} rows",
            findings.len(),
            rows.len()
        )))
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
