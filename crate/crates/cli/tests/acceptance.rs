//! Acceptance gate: ten end-to-end criteria covering solver accuracy, the
//! bandwidth/power program, figure trends from the default sweep, offline
//! auditing and byte-level reproducibility. Each test prints one
//! `ACCEPTANCE n (...): PASS` line; run with `--nocapture` to see them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use semra::allocator::{allocate, AllocatorOptions};
use semra::baselines::allocate_strict;
use semra::gp::{
    build_f1_prime, check_feasibility, eval_log, solve_gp, GeometricProgram, GpStatus, Monomial,
    Posynomial, SolverOptions,
};
use semra::scenario::{build_users, db_to_linear, ScenarioConfig, UserProfile};
use semra::similarity::{
    default_table, mse, psnr, psnr_to_similarity, surrogate_xi, ImagePair, SurrogateParams,
};
use semra::stream;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semra"))
}

// ---------------------------------------------------------------------------
// Shared default sweep (8-25 MHz x seeds 1-20 x all four methods), run once
// through the binary and reused by criteria 4, 5, 6, 7 and 10.
// ---------------------------------------------------------------------------

struct SweepArtifacts {
    _dir: tempfile::TempDir,
    out: PathBuf,
    duration: Duration,
}

static SWEEP: OnceLock<SweepArtifacts> = OnceLock::new();

fn run_default_sweep(out: &Path, forced_threads: Option<&str>) -> Duration {
    let mut cmd = binary();
    cmd.args(["sweep", "--out-dir"]).arg(out);
    if let Some(threads) = forced_threads {
        cmd.env("RAYON_NUM_THREADS", threads);
    }
    let started = Instant::now();
    let output = cmd.output().expect("sweep binary runs");
    assert!(
        output.status.success(),
        "default sweep failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    started.elapsed()
}

fn default_sweep() -> &'static SweepArtifacts {
    SWEEP.get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");
        let out = dir.path().join("sweep");
        let duration = run_default_sweep(&out, None);
        SweepArtifacts {
            out,
            duration,
            _dir: dir,
        }
    })
}

// Minimal CSV reader for the harness's own output files (no quoting needed:
// every produced field is a plain number, word or bool).
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn load(path: &Path) -> Table {
        let text = fs::read_to_string(path).expect("readable CSV");
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .expect("header line")
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        Table { header, rows }
    }

    fn col(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name} in {:?}", self.header))
    }
}

// ---------------------------------------------------------------------------
// 1. Analytic toy programs
// ---------------------------------------------------------------------------

#[test]
fn acceptance_01_toy_gp_oracles() {
    let started = Instant::now();

    // minimize x subject to 2/x <= 1: optimum x = 2, objective 2.
    let bounded = GeometricProgram {
        variable_names: vec!["x".into()],
        objective: Posynomial::monomial(1.0, vec![1.0]),
        constraints: vec![Posynomial::monomial(2.0, vec![-1.0])],
        constraint_labels: vec!["lower_bound".into()],
    };
    let sol = solve_gp(&bounded, &SolverOptions::default());
    assert_eq!(sol.status, GpStatus::Optimal);
    assert!((sol.values[0] - 2.0).abs() / 2.0 <= 1e-6, "x = {}", sol.values[0]);
    assert!(
        (sol.objective_value - 2.0).abs() / 2.0 <= 1e-6,
        "objective = {}",
        sol.objective_value
    );

    // minimize x + 1/x inside the box [0.1, 10]: interior optimum x = 1 with
    // objective 2.
    let boxed = GeometricProgram {
        variable_names: vec!["x".into()],
        objective: Posynomial {
            terms: vec![
                Monomial {
                    coefficient: 1.0,
                    exponents: vec![1.0],
                },
                Monomial {
                    coefficient: 1.0,
                    exponents: vec![-1.0],
                },
            ],
        },
        constraints: vec![
            Posynomial::monomial(0.1, vec![-1.0]),
            Posynomial::monomial(0.1, vec![1.0]),
        ],
        constraint_labels: vec!["floor".into(), "cap".into()],
    };
    let sol = solve_gp(&boxed, &SolverOptions::default());
    assert_eq!(sol.status, GpStatus::Optimal);
    assert!((sol.values[0] - 1.0).abs() <= 1e-6, "x = {}", sol.values[0]);
    assert!(
        (sol.objective_value - 2.0).abs() / 2.0 <= 1e-6,
        "objective = {}",
        sol.objective_value
    );

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("ACCEPTANCE 1 (analytic toy programs): PASS ({elapsed:.0?})");
}

// ---------------------------------------------------------------------------
// 2. Random bandwidth/power instances against the known corner and a grid
// ---------------------------------------------------------------------------

/// Instances whose optimum provably sits at (beta_min, P_max) for every user:
/// the objective is increasing in beta and decreasing in P, the SNR
/// constraint holds at that corner by construction, and the bandwidth budget
/// keeps half its capacity free.
fn corner_instance(seed: u64, users: usize) -> (ScenarioConfig, Vec<UserProfile>, Vec<f64>) {
    let config = ScenarioConfig::default();
    let mut profiles = Vec::with_capacity(users);
    let mut gains = Vec::with_capacity(users);
    for i in 0..users {
        let s = i as u64;
        let beta_min = stream::uniform_in(seed, s, 0, 0.5e6, 2.4e6);
        let th = db_to_linear(stream::uniform_in(seed, s, 1, 20.0, 25.0));
        let corner_ratio = stream::uniform_in(seed, s, 2, 1e-3, 0.5);
        let gain =
            th * config.noise_psd_w_per_hz * beta_min / (config.max_power_w * corner_ratio);
        profiles.push(UserProfile {
            id: i,
            distance_m: 10.0,
            raw_data_bits: 4e6,
            snr_threshold_linear: th,
            xi_min: 0.6,
            xi_max: 0.9,
            delay_bound_s: 0.5e-3,
            min_bandwidth_hz: beta_min,
        });
        gains.push(gain);
    }
    (config, profiles, gains)
}

/// Exhaustive 200x200 log-space scan of user `i`'s (beta, P) plane with all
/// other users pinned; returns the feasible argmin and the grid spacing.
fn grid_argmin(
    gp: &GeometricProgram,
    at: &[f64],
    i: usize,
    n: usize,
    config: &ScenarioConfig,
    user: &UserProfile,
) -> ((f64, f64), (f64, f64)) {
    const G: usize = 200;
    let lb = user.min_bandwidth_hz.ln();
    let ub = config.total_bandwidth_hz.ln();
    let lp = (config.max_power_w * 1e-4).ln();
    let up = config.max_power_w.ln();
    let step_b = (ub - lb) / (G - 1) as f64;
    let step_p = (up - lp) / (G - 1) as f64;
    let mut best = f64::INFINITY;
    let mut arg = (f64::NAN, f64::NAN);
    let mut point = at.to_vec();
    for bi in 0..G {
        let yb = lb + bi as f64 * step_b;
        point[i] = yb.exp();
        for pi in 0..G {
            let yp = lp + pi as f64 * step_p;
            point[n + i] = yp.exp();
            if !check_feasibility(gp, &point).unwrap().feasible {
                continue;
            }
            let obj = gp.objective.eval(&point);
            if obj < best {
                best = obj;
                arg = (yb, yp);
            }
        }
    }
    assert!(best.is_finite(), "grid found no feasible point");
    (arg, (step_b, step_p))
}

#[test]
fn acceptance_02_bandwidth_power_program_corners() {
    let started = Instant::now();
    let mut checked = 0usize;
    for (count, instances, seed_base) in [(1usize, 50u64, 1000u64), (2, 20, 2000)] {
        for k in 0..instances {
            let seed = seed_base + k;
            let (config, users, gains) = corner_instance(seed, count);
            let xi = vec![0.75; count];
            let gp = build_f1_prime(&config, &users, &gains, &xi).unwrap();
            let sol = solve_gp(&gp, &SolverOptions::default());
            assert_eq!(sol.status, GpStatus::Optimal, "instance seed {seed}");
            let n = users.len();

            let mut corner: Vec<f64> = users.iter().map(|u| u.min_bandwidth_hz).collect();
            corner.extend(std::iter::repeat(config.max_power_w).take(n));
            for (i, u) in users.iter().enumerate() {
                let rel_b = (sol.values[i] - u.min_bandwidth_hz).abs() / u.min_bandwidth_hz;
                let rel_p = (sol.values[n + i] - config.max_power_w).abs() / config.max_power_w;
                assert!(rel_b <= 1e-4, "seed {seed} user {i}: beta off corner by {rel_b:e}");
                assert!(rel_p <= 1e-4, "seed {seed} user {i}: power off corner by {rel_p:e}");
            }
            let corner_obj = gp.objective.eval(&corner);
            let rel = (sol.objective_value - corner_obj).abs() / corner_obj;
            assert!(rel <= 1e-4, "seed {seed}: objective off corner value by {rel:e}");

            for i in 0..n {
                let ((gb, gp_log), (sb, sp)) =
                    grid_argmin(&gp, &sol.values, i, n, &config, &users[i]);
                assert!(
                    (sol.values[i].ln() - gb).abs() <= sb + 1e-9,
                    "seed {seed} user {i}: beta more than one grid cell from brute force"
                );
                assert!(
                    (sol.values[n + i].ln() - gp_log).abs() <= sp + 1e-9,
                    "seed {seed} user {i}: power more than one grid cell from brute force"
                );
            }
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 2 (bandwidth/power corner optima, {checked} instances): PASS ({elapsed:.0?})"
    );
}

// ---------------------------------------------------------------------------
// 3. Log-space calculus of posynomials
// ---------------------------------------------------------------------------

fn random_posynomial(seed: u64, k: u64) -> (Posynomial, Vec<f64>) {
    let n = 1 + (stream::bits(seed, k, 0) % 4) as usize;
    let term_count = 1 + (stream::bits(seed, k, 1) % 5) as usize;
    let mut terms = Vec::with_capacity(term_count);
    for t in 0..term_count {
        let c = stream::uniform_in(seed, k, 100 + 10 * t as u64, -2.0, 2.0).exp();
        let exponents = (0..n)
            .map(|v| stream::uniform_in(seed, k, 200 + (10 * t + v) as u64, -3.0, 3.0))
            .collect();
        terms.push(Monomial {
            coefficient: c,
            exponents,
        });
    }
    let point = (0..n)
        .map(|v| stream::uniform_in(seed, k, 900 + v as u64, -1.0, 1.0))
        .collect();
    (Posynomial { terms }, point)
}

#[test]
fn acceptance_03_log_evaluation_calculus() {
    for k in 0..100u64 {
        let (posy, y) = random_posynomial(77, k);
        let e = eval_log(&posy, &y).unwrap();
        for i in 0..y.len() {
            let h = 1e-6;
            let mut yp = y.clone();
            yp[i] += h;
            let mut ym = y.clone();
            ym[i] -= h;
            let fd = (eval_log(&posy, &yp).unwrap().value - eval_log(&posy, &ym).unwrap().value)
                / (2.0 * h);
            let scale = e.gradient[i].abs().max(1.0);
            assert!(
                (fd - e.gradient[i]).abs() / scale <= 1e-5,
                "posynomial {k} component {i}: analytic {} vs finite difference {fd}",
                e.gradient[i]
            );
        }
        for lambda in e.hessian.symmetric_eigenvalues().iter() {
            assert!(
                *lambda >= -1e-10,
                "posynomial {k}: negative curvature {lambda}"
            );
        }
    }
    println!("ACCEPTANCE 3 (log-space gradients and curvature): PASS");
}

// ---------------------------------------------------------------------------
// 4. Offline audit of the full default sweep
// ---------------------------------------------------------------------------

#[test]
fn acceptance_04_offline_audit_of_default_sweep() {
    let sweep = default_sweep();
    let output = binary()
        .args(["validate", "--users"])
        .arg(sweep.out.join("users.csv"))
        .output()
        .expect("validate runs");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert_eq!(output.status.code(), Some(0), "audit found problems: {stderr}");
    assert!(stderr.is_empty(), "audit reported violations: {stderr}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("validate: ok"), "unexpected output: {stdout}");
    println!("ACCEPTANCE 4 (offline constraint audit of the default sweep): PASS");
}

// ---------------------------------------------------------------------------
// 5. Satisfied-user trend across bandwidth
// ---------------------------------------------------------------------------

#[test]
fn acceptance_05_satisfaction_trend() {
    let sweep = default_sweep();
    assert!(
        sweep.duration < Duration::from_secs(300),
        "sweep took {:?}",
        sweep.duration
    );
    let fig1 = Table::load(&sweep.out.join("fig1.csv"));
    let (bc, mc, sc, cc) = (
        fig1.col("bandwidth_hz"),
        fig1.col("method"),
        fig1.col("seed"),
        fig1.col("satisfied_count"),
    );
    let mut cell: BTreeMap<(String, u64, u64), f64> = BTreeMap::new();
    for row in &fig1.rows {
        let bw: f64 = row[bc].parse().unwrap();
        let seed: u64 = row[sc].parse().unwrap();
        let count: f64 = row[cc].parse().unwrap();
        cell.insert((row[mc].clone(), bw.to_bits(), seed), count);
    }
    let methods = ["proposed", "strict", "classical", "qoe"];
    let bandwidths: Vec<u64> = (8..=25).map(|mhz| (mhz as f64 * 1e6).to_bits()).collect();
    for method in methods {
        let rows = cell.keys().filter(|(m, _, _)| m == method).count();
        assert_eq!(rows, 18 * 20, "{method}: sweep cells missing from fig1");
    }
    let mean = |method: &str, bw: u64| -> f64 {
        let values: Vec<f64> = (1..=20)
            .map(|seed| cell[&(method.to_string(), bw, seed)])
            .collect();
        values.iter().sum::<f64>() / values.len() as f64
    };

    for &bw in &bandwidths {
        let p = mean("proposed", bw);
        let st = mean("strict", bw);
        let cl = mean("classical", bw);
        let label = f64::from_bits(bw);
        assert!(p >= st - 1e-9, "at {label} Hz: proposed {p} < strict {st}");
        assert!(st >= cl - 1e-9, "at {label} Hz: strict {st} < classical {cl}");
    }

    let mut wins = 0usize;
    let mut total = 0usize;
    for &bw in &bandwidths {
        for seed in 1..=20u64 {
            let p = cell[&("proposed".to_string(), bw, seed)];
            let s = cell[&("strict".to_string(), bw, seed)];
            total += 1;
            if p >= s {
                wins += 1;
            }
        }
    }
    assert!(
        wins * 100 >= total * 80,
        "proposed beats or ties strict on only {wins}/{total} cells"
    );

    for method in methods {
        let series: Vec<f64> = bandwidths.iter().map(|&bw| mean(method, bw)).collect();
        let inversions = series
            .windows(2)
            .filter(|w| w[1] < w[0] - 1e-9)
            .count();
        assert!(
            inversions <= 1,
            "{method}: mean satisfied count not monotone ({inversions} inversions): {series:?}"
        );
    }
    println!(
        "ACCEPTANCE 5 (satisfied-user trend across bandwidth): PASS (sweep {:.0?})",
        sweep.duration
    );
}

// ---------------------------------------------------------------------------
// 6. Average similarity: the strict method pays for exactness
// ---------------------------------------------------------------------------

#[test]
fn acceptance_06_similarity_cost_of_strictness() {
    let sweep = default_sweep();
    let fig3 = Table::load(&sweep.out.join("fig3.csv"));
    let (bc, mc, vc) = (
        fig3.col("bandwidth_hz"),
        fig3.col("method"),
        fig3.col("avg_similarity"),
    );
    let mut sums: BTreeMap<(String, u64), (f64, usize)> = BTreeMap::new();
    for row in &fig3.rows {
        let bw: f64 = row[bc].parse().unwrap();
        let v: f64 = row[vc].parse().unwrap();
        let e = sums.entry((row[mc].clone(), bw.to_bits())).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    let mut compared = 0usize;
    for ((method, bw), (sum, count)) in &sums {
        if method != "strict" {
            continue;
        }
        let Some((psum, pcount)) = sums.get(&("proposed".to_string(), *bw)) else {
            continue;
        };
        let strict_mean = sum / *count as f64;
        let proposed_mean = psum / *pcount as f64;
        assert!(
            strict_mean >= proposed_mean - 1e-9,
            "at {} Hz: strict mean similarity {strict_mean} < proposed {proposed_mean}",
            f64::from_bits(*bw)
        );
        compared += 1;
    }
    assert!(compared > 0, "no bandwidth had both methods with satisfied users");
    println!(
        "ACCEPTANCE 6 (average similarity, strict above the range method, {compared} bandwidths): PASS"
    );
}

// ---------------------------------------------------------------------------
// 7. Satisfied users sit inside their similarity band
// ---------------------------------------------------------------------------

#[test]
fn acceptance_07_satisfied_users_in_band() {
    let sweep = default_sweep();
    let users = Table::load(&sweep.out.join("users.csv"));
    let (mc, sat, fb, xic, loc, hic) = (
        users.col("method"),
        users.col("satisfied"),
        users.col("fallback_used"),
        users.col("xi"),
        users.col("xi_min"),
        users.col("xi_max"),
    );
    let mut checked = 0usize;
    let mut excluded = 0usize;
    for row in &users.rows {
        if row[mc] != "proposed" || row[sat] != "true" {
            continue;
        }
        if row[fb] == "true" {
            excluded += 1;
            continue;
        }
        let xi: f64 = row[xic].parse().unwrap();
        let lo: f64 = row[loc].parse().unwrap();
        let hi: f64 = row[hic].parse().unwrap();
        assert!(
            xi >= lo - 1e-9 && xi <= hi + 1e-9,
            "satisfied user outside band: xi {xi} not in [{lo}, {hi}]"
        );
        checked += 1;
    }
    println!(
        "ACCEPTANCE 7 (satisfied users in band: {checked} checked, {excluded} fallback rows excluded): PASS"
    );
}

// ---------------------------------------------------------------------------
// 8. Degenerate similarity ranges reproduce the strict method exactly
// ---------------------------------------------------------------------------

#[test]
fn acceptance_08_degenerate_band_equals_strict() {
    let table = default_table();
    let options = AllocatorOptions::default();
    let r9 = |v: f64| format!("{v:.9}");
    for seed in 300..310u64 {
        let mut config = ScenarioConfig::default();
        config.rng_seed = seed;
        let (users, channel) = build_users(&config, &[]).unwrap();
        let collapsed: Vec<UserProfile> = users
            .iter()
            .cloned()
            .map(|mut u| {
                u.xi_max = u.xi_min;
                u
            })
            .collect();
        let degenerate =
            allocate(&config, &collapsed, &channel.gains_linear, &table, &options).unwrap();
        let strict =
            allocate_strict(&config, &users, &channel.gains_linear, &table, &options).unwrap();

        assert_eq!(degenerate.iterations_used, strict.iterations_used, "seed {seed}");
        assert_eq!(degenerate.converged, strict.converged, "seed {seed}");
        assert_eq!(
            degenerate.objective_trace.len(),
            strict.objective_trace.len(),
            "seed {seed}"
        );
        for (a, b) in degenerate.objective_trace.iter().zip(&strict.objective_trace) {
            assert_eq!(r9(*a), r9(*b), "seed {seed}: trace diverged");
        }
        for (a, b) in degenerate.per_user.iter().zip(&strict.per_user) {
            assert_eq!(a.user_id, b.user_id);
            assert_eq!(a.admission, b.admission, "seed {seed} user {}", a.user_id);
            assert_eq!(a.satisfied, b.satisfied, "seed {seed} user {}", a.user_id);
            assert_eq!(a.fallback_used, b.fallback_used, "seed {seed} user {}", a.user_id);
            assert_eq!(a.c7_met, b.c7_met, "seed {seed} user {}", a.user_id);
            for (x, y) in [
                (a.bandwidth_hz, b.bandwidth_hz),
                (a.power_w, b.power_w),
                (a.compression, b.compression),
                (a.similarity, b.similarity),
                (a.snr_linear, b.snr_linear),
                (a.delay_s, b.delay_s),
            ] {
                assert_eq!(r9(x), r9(y), "seed {seed} user {}", a.user_id);
            }
        }
    }
    println!("ACCEPTANCE 8 (degenerate similarity band equals the strict method): PASS");
}

// ---------------------------------------------------------------------------
// 9. PSNR oracles and surrogate monotonicity
// ---------------------------------------------------------------------------

#[test]
fn acceptance_09_similarity_model_oracles() {
    // Worst case: full-scale error on every pixel gives exactly 0 dB.
    let worst = ImagePair::new(vec![vec![255.0]], vec![vec![0.0]]).unwrap();
    assert_eq!(mse(&worst), 65025.0);
    assert_eq!(psnr(&worst), 0.0);
    // Identical images: infinite PSNR, mapped to similarity 1.
    let identical = ImagePair::new(vec![vec![12.0, 57.0]], vec![vec![12.0, 57.0]]).unwrap();
    assert_eq!(mse(&identical), 0.0);
    assert!(psnr(&identical).is_infinite());
    assert_eq!(psnr_to_similarity(psnr(&identical), 50.0), 1.0);
    // MSE of 6.5025 is exactly 40 dB below the 255^2 peak.
    let mid = ImagePair::new(vec![vec![2.55, 0.0]], vec![vec![0.0, 2.55]]).unwrap();
    assert!((mse(&mid) - 6.5025).abs() < 1e-12);
    assert!((psnr(&mid) - 40.0).abs() < 1e-9);

    for k in 0..1000u64 {
        let params = SurrogateParams {
            compression_power: stream::uniform_in(55, k, 0, 0.5, 4.0),
            snr_midpoint_db: stream::uniform_in(55, k, 1, 0.0, 10.0),
            snr_scale_db: stream::uniform_in(55, k, 2, 0.5, 5.0),
            floor: stream::uniform_in(55, k, 3, 0.0, 0.3),
        };
        let o_a = stream::uniform_in(55, k, 4, 0.01, 1.0);
        let o_b = stream::uniform_in(55, k, 5, 0.01, 1.0);
        let (o_low, o_high) = if o_a <= o_b { (o_a, o_b) } else { (o_b, o_a) };
        let snr_a = stream::uniform_in(55, k, 6, -10.0, 40.0);
        let snr_b = stream::uniform_in(55, k, 7, -10.0, 40.0);
        let (snr_low, snr_high) = if snr_a <= snr_b { (snr_a, snr_b) } else { (snr_b, snr_a) };

        // Removing more data never improves similarity.
        let keep_more = surrogate_xi(o_low, snr_low, &params).unwrap();
        let keep_less = surrogate_xi(o_high, snr_low, &params).unwrap();
        assert!(keep_more >= keep_less, "draw {k}: not decreasing in compression");
        // A better channel never hurts it.
        let worse_channel = surrogate_xi(o_low, snr_low, &params).unwrap();
        let better_channel = surrogate_xi(o_low, snr_high, &params).unwrap();
        assert!(better_channel >= worse_channel, "draw {k}: not increasing in SNR");
    }
    println!("ACCEPTANCE 9 (similarity model oracles and monotonicity): PASS");
}

// ---------------------------------------------------------------------------
// 10. Sweep outputs are byte-stable, parallel execution included
// ---------------------------------------------------------------------------

#[test]
fn acceptance_10_repeatable_sweep_bytes() {
    let sweep = default_sweep();
    let dir = tempfile::tempdir().unwrap();
    let again = dir.path().join("again");
    // Force a multi-threaded pool: ordering must come from sorting, not
    // scheduling.
    run_default_sweep(&again, Some("4"));
    for name in ["sweep.csv", "fig1.csv", "fig3.csv", "users.csv"] {
        let a = fs::read(sweep.out.join(name)).unwrap();
        let b = fs::read(again.join(name)).unwrap();
        assert_eq!(a, b, "{name} is not byte-identical across runs");
    }
    println!("ACCEPTANCE 10 (sweep output is byte-stable, parallel included): PASS");
}
