//! Geometric programs: posynomial types, the bandwidth/power program builder
//! and feasibility reporting. The log-barrier solver lives in [`solver`].
//!
//! A geometric program here is `minimize f0(x) s.t. fj(x) <= 1` with every
//! `f` a posynomial and all variables strictly positive. In log-space
//! (`y = ln x`) each `log fj(e^y)` is a convex log-sum-exp, which is what the
//! solver actually minimizes.

mod solver;

pub use solver::{eval_log, solve_gp, LogEval, SolverOptions};

use std::fmt;

use thiserror::Error;

use crate::scenario::{ScenarioConfig, UserProfile};

/// `coefficient * prod_k x_k^exponents[k]` with `coefficient > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub exponents: Vec<f64>,
}

/// Sum of monomials; positive on the positive orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct Posynomial {
    pub terms: Vec<Monomial>,
}

impl Posynomial {
    /// Single-monomial convenience constructor.
    pub fn monomial(coefficient: f64, exponents: Vec<f64>) -> Self {
        Posynomial {
            terms: vec![Monomial {
                coefficient,
                exponents,
            }],
        }
    }

    pub fn validate(&self, num_vars: usize) -> Result<(), GpError> {
        if self.terms.is_empty() {
            return Err(GpError::EmptyPosynomial);
        }
        for (k, term) in self.terms.iter().enumerate() {
            if !(term.coefficient > 0.0) || !term.coefficient.is_finite() {
                return Err(GpError::BadCoefficient {
                    term: k,
                    value: term.coefficient,
                });
            }
            if term.exponents.len() != num_vars {
                return Err(GpError::ExponentArity {
                    term: k,
                    expected: num_vars,
                    got: term.exponents.len(),
                });
            }
            if term.exponents.iter().any(|e| !e.is_finite()) {
                return Err(GpError::BadExponent { term: k });
            }
        }
        Ok(())
    }

    /// Evaluate at a positive point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coefficient
                    * t.exponents
                        .iter()
                        .zip(x)
                        .map(|(&e, &v)| v.powf(e))
                        .product::<f64>()
            })
            .sum()
    }
}

/// `minimize objective s.t. constraints[j] <= 1`, variables positive.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricProgram {
    pub variable_names: Vec<String>,
    pub objective: Posynomial,
    pub constraints: Vec<Posynomial>,
    pub constraint_labels: Vec<String>,
}

impl GeometricProgram {
    pub fn num_vars(&self) -> usize {
        self.variable_names.len()
    }

    pub fn validate(&self) -> Result<(), GpError> {
        if self.variable_names.is_empty() {
            return Err(GpError::NoVariables);
        }
        if self.constraint_labels.len() != self.constraints.len() {
            return Err(GpError::LabelArity {
                labels: self.constraint_labels.len(),
                constraints: self.constraints.len(),
            });
        }
        self.objective.validate(self.num_vars())?;
        for c in &self.constraints {
            c.validate(self.num_vars())?;
        }
        Ok(())
    }
}

impl fmt::Display for GeometricProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let render = |p: &Posynomial| -> String {
            p.terms
                .iter()
                .map(|t| {
                    let factors: String = t
                        .exponents
                        .iter()
                        .zip(&self.variable_names)
                        .filter(|(&e, _)| e != 0.0)
                        .map(|(&e, name)| format!(" * {name}^{e}"))
                        .collect();
                    format!("{:.6e}{factors}", t.coefficient)
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        writeln!(f, "minimize {}", render(&self.objective))?;
        for (label, c) in self.constraint_labels.iter().zip(&self.constraints) {
            writeln!(f, "  s.t. [{label}] {} <= 1", render(c))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
    NumericalFailure,
}

/// Solver output. `values` are in linear space (not logs); `iterations`
/// counts Newton steps across all centering passes.
#[derive(Debug, Clone, PartialEq)]
pub struct GpSolution {
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub status: GpStatus,
    pub kkt_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Error)]
pub enum GpError {
    #[error("posynomial has no terms")]
    EmptyPosynomial,
    #[error("term {term}: coefficient must be positive and finite, got {value}")]
    BadCoefficient { term: usize, value: f64 },
    #[error("term {term}: exponent is not finite")]
    BadExponent { term: usize },
    #[error("term {term}: expected {expected} exponents, got {got}")]
    ExponentArity {
        term: usize,
        expected: usize,
        got: usize,
    },
    #[error("{labels} constraint labels for {constraints} constraints")]
    LabelArity { labels: usize, constraints: usize },
    #[error("program has no variables")]
    NoVariables,
    #[error("evaluation point must be strictly positive and finite")]
    BadPoint,
    #[error("numeric overflow while evaluating a posynomial in log space")]
    Overflow,
    #[error("mismatched input lengths: {0}")]
    MismatchedInput(&'static str),
    #[error("user {id}: similarity must be in (0, 1] to build the program, got {xi}")]
    XiOutOfRange { id: usize, xi: f64 },
    #[error("user {id}: channel gain must be positive, got {gain}")]
    GainNotPositive { id: usize, gain: f64 },
}

/// Build the bandwidth/power program for the served users at fixed
/// similarities: minimize the satisfaction penalty
/// `sum_i (snr_th_i * xi_min_i * N0 / (xi_i * h_i))^a * beta_i^a * P_i^-a`
/// subject to the bandwidth budget (C1), per-user minimum bandwidth (C2),
/// power cap (C3) and SNR threshold (C4). Variables are ordered
/// `beta_0..beta_{n-1}, P_0..P_{n-1}` following `users` order.
pub fn build_f1_prime(
    config: &ScenarioConfig,
    users: &[UserProfile],
    gains_linear: &[f64],
    xi_fixed: &[f64],
) -> Result<GeometricProgram, GpError> {
    if users.is_empty() {
        return Err(GpError::MismatchedInput("users must be non-empty"));
    }
    if users.len() != gains_linear.len() || users.len() != xi_fixed.len() {
        return Err(GpError::MismatchedInput(
            "users, gains and similarities must have equal lengths",
        ));
    }
    let n = users.len();
    let a = config.penalty_exponent;
    let n0 = config.noise_psd_w_per_hz;

    let mut variable_names = Vec::with_capacity(2 * n);
    for u in users {
        variable_names.push(format!("beta[{}]", u.id));
    }
    for u in users {
        variable_names.push(format!("p[{}]", u.id));
    }

    let mut objective = Posynomial { terms: Vec::with_capacity(n) };
    let mut budget = Posynomial { terms: Vec::with_capacity(n) };
    let mut constraints = Vec::with_capacity(1 + 3 * n);
    let mut constraint_labels = Vec::with_capacity(1 + 3 * n);

    for (i, u) in users.iter().enumerate() {
        let xi = xi_fixed[i];
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(GpError::XiOutOfRange { id: u.id, xi });
        }
        let h = gains_linear[i];
        if !(h > 0.0) {
            return Err(GpError::GainNotPositive { id: u.id, gain: h });
        }
        let mut exponents = vec![0.0; 2 * n];
        exponents[i] = a;
        exponents[n + i] = -a;
        let coefficient = (u.snr_threshold_linear * u.xi_min * n0 / (xi * h)).powf(a);
        objective.terms.push(Monomial {
            coefficient,
            exponents,
        });

        let mut e = vec![0.0; 2 * n];
        e[i] = 1.0;
        budget.terms.push(Monomial {
            coefficient: 1.0 / config.total_bandwidth_hz,
            exponents: e,
        });
    }
    constraints.push(budget);
    constraint_labels.push("bandwidth_budget".to_string());

    for (i, u) in users.iter().enumerate() {
        let mut e = vec![0.0; 2 * n];
        e[i] = -1.0;
        constraints.push(Posynomial::monomial(u.min_bandwidth_hz, e));
        constraint_labels.push(format!("min_bandwidth[{}]", u.id));
    }
    for (i, u) in users.iter().enumerate() {
        let mut e = vec![0.0; 2 * n];
        e[n + i] = 1.0;
        constraints.push(Posynomial::monomial(1.0 / config.max_power_w, e));
        constraint_labels.push(format!("power_cap[{}]", u.id));
    }
    for (i, u) in users.iter().enumerate() {
        let mut e = vec![0.0; 2 * n];
        e[i] = 1.0;
        e[n + i] = -1.0;
        constraints.push(Posynomial::monomial(
            u.snr_threshold_linear * n0 / gains_linear[i],
            e,
        ));
        constraint_labels.push(format!("snr_threshold[{}]", u.id));
    }

    let gp = GeometricProgram {
        variable_names,
        objective,
        constraints,
        constraint_labels,
    };
    gp.validate()?;
    Ok(gp)
}

/// Constraint audit of a candidate point.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// Evaluated constraint posynomials, in program order.
    pub constraint_values: Vec<f64>,
    /// Largest amount by which any constraint exceeds 1 (0 when none do).
    pub max_violation: f64,
    /// True when `max_violation <= 1e-8`.
    pub feasible: bool,
}

pub const FEASIBILITY_TOL: f64 = 1e-8;

pub fn check_feasibility(
    gp: &GeometricProgram,
    values: &[f64],
) -> Result<FeasibilityReport, GpError> {
    if values.len() != gp.num_vars() {
        return Err(GpError::MismatchedInput("values length != num_vars"));
    }
    if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(GpError::BadPoint);
    }
    let constraint_values: Vec<f64> = gp.constraints.iter().map(|c| c.eval(values)).collect();
    let max_violation = constraint_values
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v - 1.0));
    Ok(FeasibilityReport {
        feasible: max_violation <= FEASIBILITY_TOL,
        constraint_values,
        max_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{db_to_linear, dbm_per_hz_to_w_per_hz};
    use crate::stream;

    fn single_user_instance() -> (ScenarioConfig, Vec<UserProfile>, Vec<f64>, Vec<f64>) {
        let config = ScenarioConfig {
            user_count: 1,
            total_bandwidth_hz: 5e6,
            max_power_w: 0.5,
            noise_psd_w_per_hz: dbm_per_hz_to_w_per_hz(-173.0),
            penalty_exponent: 2.0,
            ..Default::default()
        };
        let user = UserProfile {
            id: 0,
            distance_m: 10.0,
            raw_data_bits: 4e6,
            snr_threshold_linear: db_to_linear(22.0),
            xi_min: 0.7,
            xi_max: 0.9,
            delay_bound_s: 0.5e-3,
            min_bandwidth_hz: 2e5,
        };
        (config, vec![user], vec![1e-10], vec![0.8])
    }

    #[test]
    fn test_build_f1_prime_structure() {
        let (config, users, gains, xi) = single_user_instance();
        let gp = build_f1_prime(&config, &users, &gains, &xi).unwrap();
        assert_eq!(gp.num_vars(), 2);
        assert_eq!(gp.constraints.len(), 1 + 3 * 1);
        assert_eq!(gp.objective.terms.len(), 1);
        assert_eq!(gp.variable_names, vec!["beta[0]", "p[0]"]);
        assert_eq!(gp.constraint_labels[0], "bandwidth_budget");
        assert_eq!(gp.objective.terms[0].exponents, vec![2.0, -2.0]);
    }

    #[test]
    fn test_build_f1_prime_three_users() {
        let (config, users, ..) = single_user_instance();
        let mut users3 = Vec::new();
        for id in 0..3 {
            let mut u = users[0].clone();
            u.id = id;
            users3.push(u);
        }
        let config = ScenarioConfig {
            user_count: 3,
            ..config
        };
        let gp = build_f1_prime(&config, &users3, &[1e-10, 2e-10, 3e-10], &[0.8, 0.7, 0.9]).unwrap();
        assert_eq!(gp.num_vars(), 6);
        assert_eq!(gp.constraints.len(), 10);
        assert_eq!(gp.objective.terms.len(), 3);
        // Budget couples all three bandwidth variables.
        assert_eq!(gp.constraints[0].terms.len(), 3);
    }

    #[test]
    fn test_objective_coefficient_oracle() {
        // snr_th=100, xi_min=0.6, xi=0.8, N0 at -173 dBm/Hz, h=1e-10, a=2
        // -> (100 * 0.6/0.8 * N0/h)^2 = 1.4129e-17.
        let (config, mut users, _, _) = single_user_instance();
        users[0].snr_threshold_linear = 100.0;
        users[0].xi_min = 0.6;
        let gp = build_f1_prime(&config, &users, &[1e-10], &[0.8]).unwrap();
        let c = gp.objective.terms[0].coefficient;
        let expected = 1.412936117724134e-17;
        assert!((c - expected).abs() / expected < 1e-4, "coefficient {c}");
    }

    #[test]
    fn test_build_f1_prime_rejects_bad_inputs() {
        let (config, users, gains, _) = single_user_instance();
        assert!(matches!(
            build_f1_prime(&config, &users, &gains, &[0.0]),
            Err(GpError::XiOutOfRange { .. })
        ));
        assert!(matches!(
            build_f1_prime(&config, &users, &[0.0], &[0.8]),
            Err(GpError::GainNotPositive { .. })
        ));
        assert!(build_f1_prime(&config, &users, &[], &[0.8]).is_err());
        assert!(build_f1_prime(&config, &[], &[], &[]).is_err());
    }

    #[test]
    fn test_check_feasibility_corner_and_violations() {
        let (config, users, gains, xi) = single_user_instance();
        let gp = build_f1_prime(&config, &users, &gains, &xi).unwrap();
        // The favourable corner is feasible.
        let report = check_feasibility(&gp, &[2e5, 0.5]).unwrap();
        assert!(report.feasible);
        assert_eq!(report.max_violation, 0.0);
        assert_eq!(report.constraint_values.len(), 4);
        // Doubling the bandwidth budget's worth of beta violates C1.
        let report = check_feasibility(&gp, &[1e7, 0.5]).unwrap();
        assert!(!report.feasible);
        assert!((report.constraint_values[0] - 2.0).abs() < 1e-12);
        assert!(report.max_violation > 0.9);
    }

    #[test]
    fn test_check_feasibility_empty_constraints_and_bad_point() {
        let gp = GeometricProgram {
            variable_names: vec!["x".into()],
            objective: Posynomial::monomial(1.0, vec![1.0]),
            constraints: vec![],
            constraint_labels: vec![],
        };
        let report = check_feasibility(&gp, &[3.0]).unwrap();
        assert!(report.feasible);
        assert_eq!(report.max_violation, 0.0);
        assert!(check_feasibility(&gp, &[-1.0]).is_err());
    }

    #[test]
    fn test_display_renders_program() {
        let (config, users, gains, xi) = single_user_instance();
        let gp = build_f1_prime(&config, &users, &gains, &xi).unwrap();
        let text = gp.to_string();
        assert!(text.contains("minimize"));
        assert!(text.contains("bandwidth_budget"));
        assert!(text.contains("beta[0]"));
        assert!(text.contains("<= 1"));
    }

    #[test]
    fn test_posynomial_eval_matches_hand_value() {
        // 2*x^2/y + 3*sqrt(y) at (2, 4): 2*4/4 + 3*2 = 8.
        let p = Posynomial {
            terms: vec![
                Monomial { coefficient: 2.0, exponents: vec![2.0, -1.0] },
                Monomial { coefficient: 3.0, exponents: vec![0.0, 0.5] },
            ],
        };
        assert!((p.eval(&[2.0, 4.0]) - 8.0).abs() < 1e-12);
    }

    /// Random posynomial for property-style checks, addressed determinstically.
    pub(super) fn random_posynomial(seed: u64, num_vars: usize) -> Posynomial {
        let terms = 1 + (stream::bits(seed, 0, 0) % 4) as usize;
        let mut out = Posynomial { terms: Vec::new() };
        for k in 0..terms {
            let coefficient = (stream::uniform_in(seed, 1, k as u64, -3.0, 3.0)).exp();
            let exponents = (0..num_vars)
                .map(|v| stream::uniform_in(seed, 2 + v as u64, k as u64, -3.0, 3.0))
                .collect();
            out.terms.push(Monomial {
                coefficient,
                exponents,
            });
        }
        out
    }

    #[test]
    fn test_exp_log_consistency() {
        for seed in 0..50u64 {
            let num_vars = 1 + (seed % 3) as usize;
            let p = random_posynomial(seed, num_vars);
            let y: Vec<f64> = (0..num_vars)
                .map(|v| stream::uniform_in(seed, 100 + v as u64, 0, -1.0, 1.0))
                .collect();
            let x: Vec<f64> = y.iter().map(|&v| v.exp()).collect();
            let log_eval = eval_log(&p, &y).unwrap();
            let direct = p.eval(&x);
            assert!(
                (log_eval.value.exp() - direct).abs() <= 1e-12 * direct,
                "seed {seed}: {} vs {direct}",
                log_eval.value.exp()
            );
        }
    }
}
