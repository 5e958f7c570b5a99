//! Log-barrier interior-point solver.
//!
//! Works entirely in log space: for `y = ln x` every posynomial becomes a
//! log-sum-exp `F(y)`, the program becomes `min F0(y) s.t. Fj(y) <= 0`, and
//! the barrier subproblem `min t*F0(y) - sum_j ln(-Fj(y))` is smooth and
//! convex. Centering uses damped Newton with backtracking; the outer loop
//! scales `t` geometrically until the duality-gap bound `m/t` meets the
//! tolerance. Because `F0` is the *log* of the objective, that bound is a
//! relative accuracy on the posynomial objective itself. A Phase-I problem
//! (`min s s.t. Fj(y) <= s`) recovers a strictly feasible start or certifies
//! infeasibility.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::{GeometricProgram, GpError, GpSolution, GpStatus, Posynomial};

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Stop once `m / t` (a bound on the log-objective suboptimality) falls
    /// below this.
    pub duality_gap_tol: f64,
    /// Newton stopping threshold on half the squared Newton decrement.
    pub newton_tol: f64,
    /// Geometric growth factor for the barrier parameter `t`.
    pub barrier_multiplier: f64,
    /// Newton step budget per centering pass.
    pub max_newton_steps: usize,
    /// Initial barrier parameter.
    pub t_initial: f64,
    /// Optional warm start in linear (not log) variable space. Ignored if it
    /// is not strictly feasible.
    pub initial_point: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            duality_gap_tol: 1e-8,
            newton_tol: 1e-10,
            barrier_multiplier: 10.0,
            max_newton_steps: 200,
            t_initial: 1.0,
            initial_point: None,
        }
    }
}

/// Value, gradient and Hessian of `log posy(e^y)` at a log-space point.
#[derive(Debug, Clone)]
pub struct LogEval {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// Evaluate a posynomial in log space with a max-shifted log-sum-exp, so
/// widely scaled coefficients cannot overflow. The Hessian is the softmax
/// covariance of the exponent vectors and is positive semidefinite.
pub fn eval_log(posy: &Posynomial, log_point: &[f64]) -> Result<LogEval, GpError> {
    let n = log_point.len();
    if posy.terms.is_empty() {
        return Err(GpError::EmptyPosynomial);
    }
    if posy.terms.iter().any(|t| t.exponents.len() != n) {
        return Err(GpError::MismatchedInput("exponent arity != point length"));
    }
    if log_point.iter().any(|v| !v.is_finite()) {
        return Err(GpError::BadPoint);
    }
    let mut z = Vec::with_capacity(posy.terms.len());
    for t in &posy.terms {
        let mut s = t.coefficient.ln();
        for (&e, &y) in t.exponents.iter().zip(log_point) {
            s += e * y;
        }
        if !s.is_finite() {
            return Err(GpError::Overflow);
        }
        z.push(s);
    }
    let z_max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = z.iter().map(|&v| (v - z_max).exp()).collect();
    let total: f64 = shifted.iter().sum();
    let value = z_max + total.ln();
    let weights: Vec<f64> = shifted.iter().map(|&v| v / total).collect();

    let mut gradient = DVector::zeros(n);
    for (t, &w) in posy.terms.iter().zip(&weights) {
        for (i, &e) in t.exponents.iter().enumerate() {
            gradient[i] += w * e;
        }
    }
    let mut hessian = DMatrix::zeros(n, n);
    for (t, &w) in posy.terms.iter().zip(&weights) {
        for i in 0..n {
            let wi = w * t.exponents[i];
            for j in 0..n {
                hessian[(i, j)] += wi * t.exponents[j];
            }
        }
    }
    hessian -= &gradient * gradient.transpose();
    Ok(LogEval {
        value,
        gradient,
        hessian,
    })
}

struct BarrierEval {
    value: f64,
    gradient: DVector<f64>,
    hessian: DMatrix<f64>,
}

enum CenterOutcome {
    Converged,
    /// The caller's early-stop predicate fired after an accepted step.
    Stopped,
    /// Progress died (exhausted line search or float-noise decreases) before
    /// the decrement reached `newton_tol`.
    Stalled,
    MaxSteps,
    Failed,
}

/// Slack (in log units) a warm start must have on every constraint before we
/// trust it instead of running Phase I.
const START_MARGIN: f64 = 1e-9;
/// Outer-iteration cap; `t` grows geometrically so this is generous.
const MAX_OUTER: usize = 200;
/// A centering pass that ends with `lambda^2 / 2` below this is close enough
/// to the central path to keep going. Once `t` is large and several
/// constraints are nearly active, f64 cannot reach `newton_tol` exactly, but
/// a decrement this small still certifies a duality gap of
/// `(m + lambda*sqrt(m)) / t`.
const LOOSE_CENTER: f64 = 1e-2;

fn newton_direction(hessian: &DMatrix<f64>, gradient: &DVector<f64>) -> Option<DVector<f64>> {
    let n = hessian.nrows();
    let scale = hessian.diagonal().amax().max(f64::MIN_POSITIVE);
    let mut ridge = 0.0f64;
    for _ in 0..10 {
        let m = if ridge == 0.0 {
            hessian.clone()
        } else {
            hessian + DMatrix::identity(n, n) * ridge
        };
        if let Some(ch) = Cholesky::new(m) {
            let d = ch.solve(&(-gradient));
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        ridge = if ridge == 0.0 { scale * 1e-12 } else { ridge * 100.0 };
    }
    None
}

/// Damped Newton with backtracking line search. `eval` returns `None`
/// outside the barrier domain, which the line search treats as a rejected
/// step. `stop` is checked after every accepted step; Phase I uses it to
/// leave as soon as a strictly feasible point appears, since its centering
/// problem can be unbounded below once one exists. The returned f64 is the
/// last half squared Newton decrement, `lambda^2 / 2`, so callers can judge
/// how centered a pass that did not fully converge still is.
fn damped_newton<F, S>(
    start: DVector<f64>,
    eval: F,
    stop: S,
    newton_tol: f64,
    max_steps: usize,
) -> (DVector<f64>, usize, CenterOutcome, f64)
where
    F: Fn(&DVector<f64>) -> Option<BarrierEval>,
    S: Fn(&DVector<f64>) -> bool,
{
    let mut y = start;
    let Some(mut cur) = eval(&y) else {
        return (y, 0, CenterOutcome::Failed, f64::INFINITY);
    };
    if stop(&y) {
        return (y, 0, CenterOutcome::Stopped, f64::INFINITY);
    }
    let mut stagnant = 0usize;
    let mut decrement_half = f64::INFINITY;
    for step in 0..max_steps {
        let Some(direction) = newton_direction(&cur.hessian, &cur.gradient) else {
            return (y, step, CenterOutcome::Failed, decrement_half);
        };
        let slope = cur.gradient.dot(&direction);
        let decrement_sq = -slope;
        if !decrement_sq.is_finite() {
            return (y, step, CenterOutcome::Failed, f64::INFINITY);
        }
        decrement_half = decrement_sq / 2.0;
        if decrement_half <= newton_tol {
            return (y, step, CenterOutcome::Converged, decrement_half);
        }
        let mut scale = 1.0f64;
        let mut accepted = false;
        let mut decrease = 0.0f64;
        while scale >= 1e-20 {
            let candidate = &y + &direction * scale;
            if let Some(next) = eval(&candidate) {
                if next.value <= cur.value + 0.25 * scale * slope {
                    decrease = cur.value - next.value;
                    y = candidate;
                    cur = next;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if accepted && stop(&y) {
            return (y, step + 1, CenterOutcome::Stopped, decrement_half);
        }
        // A run of steps whose decrease drowns in float noise is as dead as
        // an exhausted line search: report how centered we got and let the
        // caller decide whether that is good enough.
        if accepted && decrease <= 1e-13 * (1.0 + cur.value.abs()) {
            stagnant += 1;
        } else if accepted {
            stagnant = 0;
        }
        if !accepted || stagnant >= 5 {
            return (y, step, CenterOutcome::Stalled, decrement_half);
        }
    }
    (y, max_steps, CenterOutcome::MaxSteps, decrement_half)
}

fn constraint_log_values(gp: &GeometricProgram, y: &DVector<f64>) -> Result<Vec<f64>, GpError> {
    gp.constraints
        .iter()
        .map(|c| eval_log(c, y.as_slice()).map(|e| e.value))
        .collect()
}

fn strictly_feasible(gp: &GeometricProgram, y: &DVector<f64>) -> bool {
    match constraint_log_values(gp, y) {
        Ok(values) => values.iter().all(|&v| v < -START_MARGIN),
        Err(_) => false,
    }
}

/// Barrier merit for one centering pass. `shift` is the objective value at
/// the pass's start point: subtracting it keeps the merit near zero so the
/// line search still resolves decreases of order `newton_tol` once `t` is
/// huge. The gradient, Hessian and minimizer are unaffected.
fn main_barrier<'a>(
    gp: &'a GeometricProgram,
    t: f64,
    shift: f64,
) -> impl Fn(&DVector<f64>) -> Option<BarrierEval> + 'a {
    move |y: &DVector<f64>| {
        let obj = eval_log(&gp.objective, y.as_slice()).ok()?;
        let mut value = t * (obj.value - shift);
        let mut gradient = obj.gradient * t;
        let mut hessian = obj.hessian * t;
        for c in &gp.constraints {
            let e = eval_log(c, y.as_slice()).ok()?;
            let slack = -e.value;
            if slack <= 0.0 {
                return None;
            }
            value -= slack.ln();
            gradient += &e.gradient / slack;
            hessian += &e.gradient * e.gradient.transpose() / (slack * slack);
            hessian += &e.hessian / slack;
        }
        if !value.is_finite() {
            return None;
        }
        Some(BarrierEval {
            value,
            gradient,
            hessian,
        })
    }
}

fn phase_one_barrier<'a>(
    gp: &'a GeometricProgram,
    t: f64,
    shift: f64,
) -> impl Fn(&DVector<f64>) -> Option<BarrierEval> + 'a {
    let n = gp.num_vars();
    move |z: &DVector<f64>| {
        let y = z.rows(0, n).into_owned();
        let s = z[n];
        let mut value = t * (s - shift);
        let mut gradient = DVector::zeros(n + 1);
        gradient[n] = t;
        let mut hessian = DMatrix::zeros(n + 1, n + 1);
        for c in &gp.constraints {
            let e = eval_log(c, y.as_slice()).ok()?;
            let u = s - e.value;
            if u <= 0.0 {
                return None;
            }
            value -= u.ln();
            for i in 0..n {
                gradient[i] += e.gradient[i] / u;
            }
            gradient[n] -= 1.0 / u;
            for i in 0..n {
                for j in 0..n {
                    hessian[(i, j)] += e.gradient[i] * e.gradient[j] / (u * u) + e.hessian[(i, j)] / u;
                }
                let cross = -e.gradient[i] / (u * u);
                hessian[(i, n)] += cross;
                hessian[(n, i)] += cross;
            }
            hessian[(n, n)] += 1.0 / (u * u);
        }
        if !value.is_finite() {
            return None;
        }
        Some(BarrierEval {
            value,
            gradient,
            hessian,
        })
    }
}

/// Find a strictly feasible start by minimizing the worst constraint slack.
fn phase_one(
    gp: &GeometricProgram,
    hint: DVector<f64>,
    options: &SolverOptions,
    steps: &mut usize,
) -> Result<DVector<f64>, GpStatus> {
    let n = gp.num_vars();
    let m = gp.constraints.len() as f64;
    let start_values = match constraint_log_values(gp, &hint) {
        Ok(v) => v,
        Err(_) => {
            // The hint itself overflows; retry from the origin.
            let origin = DVector::zeros(n);
            constraint_log_values(gp, &origin).map_err(|_| GpStatus::NumericalFailure)?
        }
    };
    let worst = start_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = DVector::zeros(n + 1);
    z.rows_mut(0, n).copy_from(&hint);
    z[n] = worst + 1.0;

    let mut t = 1.0;
    for _ in 0..MAX_OUTER {
        let shift = z[n];
        let (next, used, outcome, dec) = damped_newton(
            z,
            phase_one_barrier(gp, t, shift),
            |z: &DVector<f64>| z[n] < -1e-6,
            options.newton_tol,
            options.max_newton_steps,
        );
        *steps += used;
        z = next;
        let exact = matches!(outcome, CenterOutcome::Converged);
        match outcome {
            CenterOutcome::Converged => {}
            CenterOutcome::Stopped => {
                let y = z.rows(0, n).into_owned();
                if strictly_feasible(gp, &y) {
                    return Ok(y);
                }
                return Err(GpStatus::NumericalFailure);
            }
            CenterOutcome::Stalled | CenterOutcome::MaxSteps if dec <= LOOSE_CENTER => {}
            CenterOutcome::MaxSteps => return Err(GpStatus::MaxIterations),
            CenterOutcome::Stalled | CenterOutcome::Failed => {
                return Err(GpStatus::NumericalFailure)
            }
        }
        let s = z[n];
        let y = z.rows(0, gp.num_vars()).into_owned();
        if s < -1e-6 && strictly_feasible(gp, &y) {
            return Ok(y);
        }
        let gap = m / t;
        // The certificate needs an exact center: only then is `s - m/t` a
        // lower bound on the optimal slack.
        if exact && s - gap > 0.0 {
            // Even the optimal slack is positive: no feasible point exists.
            return Err(GpStatus::Infeasible);
        }
        if gap < 1e-9 {
            return if s < -START_MARGIN && strictly_feasible(gp, &y) {
                Ok(y)
            } else {
                Err(GpStatus::Infeasible)
            };
        }
        t *= options.barrier_multiplier;
    }
    Err(GpStatus::MaxIterations)
}

/// Solve a geometric program with the log-barrier method. Failure modes are
/// reported through [`GpStatus`], never through panics, except for malformed
/// programs (wrong arities), which are programmer errors.
pub fn solve_gp(gp: &GeometricProgram, options: &SolverOptions) -> GpSolution {
    gp.validate().expect("malformed geometric program");
    let n = gp.num_vars();
    let m = gp.constraints.len();
    let mut steps = 0usize;

    let finish = |y: &DVector<f64>, t: f64, status: GpStatus, steps: usize| -> GpSolution {
        let values: Vec<f64> = y.iter().map(|&v| v.exp()).collect();
        let (objective_value, kkt_residual) = match eval_log(&gp.objective, y.as_slice()) {
            Ok(obj) => {
                let mut residual = obj.gradient.clone();
                let mut ok = true;
                for c in &gp.constraints {
                    match eval_log(c, y.as_slice()) {
                        Ok(e) if e.value < 0.0 => {
                            residual += &e.gradient / (t * -e.value);
                        }
                        _ => ok = false,
                    }
                }
                let kkt = if ok { residual.amax() } else { f64::NAN };
                (obj.value.exp(), kkt)
            }
            Err(_) => (f64::NAN, f64::NAN),
        };
        GpSolution {
            values,
            objective_value,
            status,
            kkt_residual,
            iterations: steps,
        }
    };
    let bail = |status: GpStatus, steps: usize| GpSolution {
        values: vec![f64::NAN; n],
        objective_value: f64::NAN,
        status,
        kkt_residual: f64::NAN,
        iterations: steps,
    };

    // Starting point: warm start if strictly feasible, then the origin, then
    // Phase I.
    let warm = options.initial_point.as_ref().and_then(|x0| {
        if x0.len() == n && x0.iter().all(|&v| v > 0.0 && v.is_finite()) {
            let y: DVector<f64> = DVector::from_iterator(n, x0.iter().map(|&v| v.ln()));
            strictly_feasible(gp, &y).then_some(y)
        } else {
            None
        }
    });
    let mut y = match warm {
        Some(y) => y,
        None => {
            let origin = DVector::zeros(n);
            if m == 0 || strictly_feasible(gp, &origin) {
                origin
            } else {
                let hint = options
                    .initial_point
                    .as_ref()
                    .filter(|x0| x0.len() == n && x0.iter().all(|&v| v > 0.0 && v.is_finite()))
                    .map(|x0| DVector::from_iterator(n, x0.iter().map(|&v| v.ln())))
                    .unwrap_or_else(|| DVector::zeros(n));
                match phase_one(gp, hint, options, &mut steps) {
                    Ok(y) => y,
                    Err(status) => return bail(status, steps),
                }
            }
        }
    };

    let mut t = options.t_initial;
    for _ in 0..MAX_OUTER {
        let shift = match eval_log(&gp.objective, y.as_slice()) {
            Ok(e) => e.value,
            Err(_) => return finish(&y, t, GpStatus::NumericalFailure, steps),
        };
        let (next, used, outcome, dec) = damped_newton(
            y,
            main_barrier(gp, t, shift),
            |_: &DVector<f64>| false,
            options.newton_tol,
            options.max_newton_steps,
        );
        steps += used;
        y = next;
        match outcome {
            CenterOutcome::Converged | CenterOutcome::Stopped => {}
            CenterOutcome::Stalled | CenterOutcome::MaxSteps if dec <= LOOSE_CENTER => {}
            CenterOutcome::MaxSteps => return finish(&y, t, GpStatus::MaxIterations, steps),
            CenterOutcome::Stalled | CenterOutcome::Failed => {
                return finish(&y, t, GpStatus::NumericalFailure, steps)
            }
        }
        if m == 0 {
            return finish(&y, t, GpStatus::Optimal, steps);
        }
        // Gap certified by an approximate center with decrement lambda.
        let lambda = (2.0 * dec.min(LOOSE_CENTER)).sqrt();
        let gap = (m as f64 + lambda * (m as f64).sqrt()) / t;
        if gap <= options.duality_gap_tol {
            return finish(&y, t, GpStatus::Optimal, steps);
        }
        t *= options.barrier_multiplier;
    }
    finish(&y, t, GpStatus::MaxIterations, steps)
}
