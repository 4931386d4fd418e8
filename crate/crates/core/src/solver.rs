//! Extremal candidates: the closed-form affine extremal, damped Newton on the
//! first Euler-Lagrange system, and exhaustive slope enumeration.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timescale::{delta_derivative, GridFunction, Samples};
use crate::variational::{
    action_of, evaluate, first_el_of, first_el_residual, second_el_of, trajectory_from_slopes,
    Lagrangian, ResidualKind, VariationalError, VariationalProblem,
};

/// Largest slope-sequence count the enumerator accepts.
pub const ENUMERATION_GUARD: f64 = 1e8;

/// Absolute tolerance on reaching `q(b)` during enumeration.
pub const ENUMERATION_BOUNDARY_TOL: f64 = 1e-9;

/// Jacobians with a condition estimate above this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Variational(#[from] VariationalError),
    #[error("Jacobian is singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },
    #[error("no convergence after {iterations} iterations; residual history {history:?}")]
    NoConvergence {
        iterations: usize,
        last: Box<GridFunction>,
        history: Vec<f64>,
    },
    #[error("this solver needs a scale whose gaps are all scattered")]
    NotExactDiscrete,
    #[error("slope enumeration needs a scalar problem, got dimension {0}")]
    NotScalar(usize),
    #[error("{count:e} slope sequences exceed the enumeration guard of {ENUMERATION_GUARD:e}; use Newton instead")]
    GuardExceeded { count: f64 },
    #[error("empty slope alphabet")]
    EmptyAlphabet,
    #[error("invalid Newton options: {0}")]
    InvalidOptions(&'static str),
}

pub type Result<T> = std::result::Result<T, SolverError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonOptions {
    /// Target for the first-EL residual magnitude.
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings tried before giving up on an iteration.
    pub max_halvings: usize,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 20,
            fd_step: 1e-7,
        }
    }
}

/// Converged Newton iterate.
#[derive(Debug, Clone)]
pub struct NewtonSolution {
    pub trajectory: GridFunction,
    pub iterations: usize,
    /// Residual magnitude before each iteration, ending with the final one.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Newton,
    Enumerated,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub action: f64,
    pub first_el: f64,
    pub second_el: f64,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub trajectory: GridFunction,
    /// `q^Δ` on `T^κ`, one row per point.
    pub slopes: Vec<Vec<f64>>,
    pub provenance: Provenance,
    pub diagnostics: Diagnostics,
}

/// One JSON line of a candidate set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub slopes: Samples,
    pub values: Samples,
    pub action: f64,
    pub first_el: f64,
    pub second_el: f64,
    pub provenance: Provenance,
}

impl Candidate {
    pub fn new(
        p: &VariationalProblem,
        trajectory: GridFunction,
        provenance: Provenance,
    ) -> Result<Self> {
        let ev = evaluate(p, &trajectory)?;
        let diagnostics = Diagnostics {
            action: action_of(p, &ev)?,
            first_el: first_el_of(p, &ev).magnitude,
            second_el: second_el_of(&ev, ResidualKind::SecondEl).magnitude,
        };
        let slopes = ev.velocity.rows().map(<[f64]>::to_vec).collect();
        Ok(Self {
            trajectory,
            slopes,
            provenance,
            diagnostics,
        })
    }

    pub fn record(&self) -> CandidateRecord {
        let dim = self.trajectory.dim();
        CandidateRecord {
            slopes: Samples::from_rows(dim, &self.slopes.concat()),
            values: self.trajectory.samples(),
            action: self.diagnostics.action,
            first_el: self.diagnostics.first_el,
            second_el: self.diagnostics.second_el,
            provenance: self.provenance,
        }
    }
}

/// Ordered candidate trajectories with their diagnostics.
#[derive(Debug, Clone, Default)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter()
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.candidates {
            out.push_str(&serde_json::to_string(&c.record()).expect("candidate records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn parse_json_lines(text: &str) -> serde_json::Result<Vec<CandidateRecord>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect()
    }
}

/// `q(t) = c t + k` with `c = (q_b - q_a)/(b - a)` and `k = (b q_a - a q_b)/(b - a)`,
/// componentwise. Endpoints are pinned to the boundary values.
pub fn affine_extremal(p: &VariationalProblem) -> GridFunction {
    let (a, b) = (p.a(), p.b());
    let n = p.n();
    let coeffs: Vec<(f64, f64)> = p
        .q_a()
        .iter()
        .zip(p.q_b())
        .map(|(qa, qb)| ((qb - qa) / (b - a), (b * qa - a * qb) / (b - a)))
        .collect();
    let last = p.scale().len() - 1;
    let mut values = Vec::with_capacity(p.scale().len() * n);
    for (i, &t) in p.scale().points().iter().enumerate() {
        match i {
            0 => values.extend_from_slice(p.q_a()),
            i if i == last => values.extend_from_slice(p.q_b()),
            _ => values.extend(coeffs.iter().map(|(c, k)| c * t + k)),
        }
    }
    GridFunction::new(p.scale().clone(), n, values).expect("one row per point")
}

/// Straight line between the boundary values, the default initial guess.
pub fn straight_line(p: &VariationalProblem) -> GridFunction {
    affine_extremal(p)
}

fn interior(q: &GridFunction) -> Vec<f64> {
    let n = q.dim();
    q.values()[n..q.values().len() - n].to_vec()
}

fn assemble(p: &VariationalProblem, interior: &[f64]) -> GridFunction {
    let mut values = Vec::with_capacity(interior.len() + 2 * p.n());
    values.extend_from_slice(p.q_a());
    values.extend_from_slice(interior);
    values.extend_from_slice(p.q_b());
    GridFunction::new(p.scale().clone(), p.n(), values).expect("interior has (N-2)·n values")
}

fn residual_vector(
    p: &VariationalProblem,
    x: &[f64],
) -> std::result::Result<Vec<f64>, VariationalError> {
    let q = assemble(p, x);
    let ev = evaluate(p, &q)?;
    Ok(first_el_of(p, &ev).values.concat())
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Damped Newton iteration on the interior values for the first
/// Euler-Lagrange system.
///
/// The Jacobian is built column by column from forward differences of the
/// residual. A step is accepted only if it lowers the residual's max norm,
/// halving it up to `max_halvings` times.
pub fn solve_newton(
    p: &VariationalProblem,
    q_init: &GridFunction,
    opts: &NewtonOptions,
) -> Result<NewtonSolution> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(SolverError::InvalidOptions("tol must be positive"));
    }
    if opts.max_iter == 0 {
        return Err(SolverError::InvalidOptions("max_iter must be at least 1"));
    }
    if !p.scale().is_exact_discrete() {
        return Err(SolverError::NotExactDiscrete);
    }
    p.check_trajectory(q_init)?;

    let mut x = interior(q_init);
    let mut r = residual_vector(p, &x)?;
    let mut norm = max_norm(&r);
    let mut history = vec![norm];
    let dim = x.len();

    for iteration in 0..opts.max_iter {
        if norm <= opts.tol {
            return Ok(NewtonSolution {
                trajectory: assemble(p, &x),
                iterations: iteration,
                history,
            });
        }

        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        let mut probe = x.clone();
        for j in 0..dim {
            let h = opts.fd_step * x[j].abs().max(1.0);
            probe[j] = x[j] + h;
            let rp = residual_vector(p, &probe)?;
            probe[j] = x[j];
            for (i, (a, b)) in rp.iter().zip(&r).enumerate() {
                jac[(i, j)] = (a - b) / h;
            }
        }

        let sv = jac.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };
        if condition.is_nan() || condition > SINGULAR_CONDITION {
            return Err(SolverError::SingularSystem { condition });
        }
        let rhs = -DVector::from_column_slice(&r);
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or(SolverError::SingularSystem { condition })?;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(a, d)| a + lambda * d)
                .collect();
            // domain errors at a trial point count as "no decrease"
            if let Ok(rt) = residual_vector(p, &trial) {
                let nt = max_norm(&rt);
                if nt < norm {
                    accepted = Some((trial, rt, nt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, rt, nt)) => {
                x = xt;
                r = rt;
                norm = nt;
                history.push(norm);
            }
            None => {
                return Err(SolverError::NoConvergence {
                    iterations: iteration + 1,
                    last: Box::new(assemble(p, &x)),
                    history,
                })
            }
        }
    }

    if norm <= opts.tol {
        return Ok(NewtonSolution {
            trajectory: assemble(p, &x),
            iterations: opts.max_iter,
            history,
        });
    }
    Err(SolverError::NoConvergence {
        iterations: opts.max_iter,
        last: Box::new(assemble(p, &x)),
        history,
    })
}

/// Numerically detects `L` homogeneous of degree two in `v` with no `t` or `u`
/// dependence, for which the straight line is an extremal.
pub fn is_pure_quadratic_in_v(l: &Lagrangian) -> bool {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let n = l.n();
    for _ in 0..8 {
        let t = rng.gen_range(-2.0..2.0);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v2: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        let (Ok(jet), Ok(twice)) = (l.jet(t, &u, &v), l.value(t, &u, &v2)) else {
            return false;
        };
        let scale = 1.0 + jet.value.abs();
        if jet.dt.abs() > 1e-12 * scale || jet.du.iter().any(|d| d.abs() > 1e-12 * scale) {
            return false;
        }
        if (twice - 4.0 * jet.value).abs() > 1e-9 * scale {
            return false;
        }
    }
    true
}

/// An extremal and how it was found.
#[derive(Debug, Clone)]
pub struct Solution {
    pub trajectory: GridFunction,
    pub provenance: Provenance,
    /// Newton iterations, absent for the closed form.
    pub iterations: Option<usize>,
}

/// The affine closed form when `L` is a pure quadratic in `v`, otherwise
/// Newton from the straight line.
pub fn solve(p: &VariationalProblem, opts: &NewtonOptions) -> Result<Solution> {
    if is_pure_quadratic_in_v(p.lagrangian()) {
        let q = affine_extremal(p);
        if first_el_residual(p, &q)?.magnitude <= opts.tol.max(1e-12) {
            return Ok(Solution {
                trajectory: q,
                provenance: Provenance::ClosedForm,
                iterations: None,
            });
        }
    }
    let sol = solve_newton(p, &straight_line(p), opts)?;
    Ok(Solution {
        trajectory: sol.trajectory,
        provenance: Provenance::Newton,
        iterations: Some(sol.iterations),
    })
}

/// Every slope sequence over `alphabet` whose trajectory reaches `q(b)` and
/// satisfies the first Euler-Lagrange equation within `tol`.
///
/// Candidates come out in lexicographic order of their slope sequences
/// (with the alphabet sorted ascending).
pub fn enumerate_slope_extremals(
    p: &VariationalProblem,
    alphabet: &[f64],
    tol: f64,
) -> Result<CandidateSet> {
    if p.n() != 1 {
        return Err(SolverError::NotScalar(p.n()));
    }
    if !p.scale().is_exact_discrete() {
        return Err(SolverError::NotExactDiscrete);
    }
    let mut alphabet = alphabet.to_vec();
    alphabet.sort_by(f64::total_cmp);
    alphabet.dedup();
    if alphabet.is_empty() {
        return Err(SolverError::EmptyAlphabet);
    }
    let gaps = p.scale().len() - 1;
    let count = (alphabet.len() as f64).powi(gaps as i32);
    if count > ENUMERATION_GUARD {
        return Err(SolverError::GuardExceeded { count });
    }

    let points = p.scale().points();
    let mu: Vec<f64> = points.windows(2).map(|w| w[1] - w[0]).collect();
    // remaining span after gap i, for reachability pruning
    let mut rest = vec![0.0; gaps + 1];
    for i in (0..gaps).rev() {
        rest[i] = rest[i + 1] + mu[i];
    }
    let (lo, hi) = (alphabet[0], alphabet[alphabet.len() - 1]);
    let target = p.q_b()[0];

    let mut out = CandidateSet::default();
    let mut choice = vec![0usize; gaps];
    let mut level = 0usize;
    let mut partial = vec![p.q_a()[0]; gaps + 1];
    // depth-first in lexicographic order
    loop {
        if level == gaps {
            if (partial[gaps] - target).abs() <= ENUMERATION_BOUNDARY_TOL {
                let slopes: Vec<Vec<f64>> = choice.iter().map(|&c| vec![alphabet[c]]).collect();
                let mut q = trajectory_from_slopes(p.scale(), p.q_a(), &slopes)?;
                let mut values = q.values().to_vec();
                *values.last_mut().expect("non-empty") = target;
                q = GridFunction::scalar(p.scale().clone(), values).expect("same length");
                let cand = Candidate::new(p, q, Provenance::Enumerated)?;
                if cand.diagnostics.first_el <= tol {
                    out.candidates.push(cand);
                }
            }
            if !backtrack(&mut choice, &mut level, alphabet.len()) {
                break;
            }
            continue;
        }
        let s = alphabet[choice[level]];
        partial[level + 1] = partial[level] + s * mu[level];
        let reach_lo = partial[level + 1] + lo * rest[level + 1];
        let reach_hi = partial[level + 1] + hi * rest[level + 1];
        let reachable = target >= reach_lo - ENUMERATION_BOUNDARY_TOL
            && target <= reach_hi + ENUMERATION_BOUNDARY_TOL;
        if reachable {
            level += 1;
            if level < gaps {
                choice[level] = 0;
            }
        } else {
            level += 1;
            if !backtrack(&mut choice, &mut level, alphabet.len()) {
                break;
            }
        }
    }
    Ok(out)
}

// Moves to the next sibling at the deepest level that has one. `level` is one
// past the last assigned position on entry.
fn backtrack(choice: &mut [usize], level: &mut usize, width: usize) -> bool {
    while *level > 0 {
        let i = *level - 1;
        if choice[i] + 1 < width {
            choice[i] += 1;
            *level = i;
            return true;
        }
        *level = i;
    }
    false
}

/// Keeps the candidates whose second Euler-Lagrange residual is within `tol`,
/// in their original order.
pub fn filter_second_el(
    p: &VariationalProblem,
    cands: &CandidateSet,
    tol: f64,
) -> Result<CandidateSet> {
    let mut kept = Vec::new();
    for c in &cands.candidates {
        let ev = evaluate(p, &c.trajectory)?;
        if second_el_of(&ev, ResidualKind::SecondEl).magnitude <= tol {
            kept.push(c.clone());
        }
    }
    Ok(CandidateSet { candidates: kept })
}

/// Slopes of a trajectory as rows, `q^Δ` on `T^κ`.
pub fn slopes_of(q: &GridFunction) -> Vec<Vec<f64>> {
    delta_derivative(q).rows().map(<[f64]>::to_vec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timescale::TimeScale;
    use crate::variational::first_el_residual;

    fn problem(scale: TimeScale, l: &str, qa: f64, qb: f64) -> VariationalProblem {
        VariationalProblem::new(scale, Lagrangian::parse(l, 1).unwrap(), vec![qa], vec![qb])
            .unwrap()
    }

    fn eighths() -> TimeScale {
        TimeScale::uniform(0.0, 1.0, 0.125).unwrap()
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn pure_quadratic_detection() {
        let yes = |s: &str, n| is_pure_quadratic_in_v(&Lagrangian::parse(s, n).unwrap());
        assert!(yes("v1^2", 1));
        assert!(yes("3*v1^2 - v1*v2 + v2^2", 2));
        assert!(!yes("v1^2 + u1", 1));
        assert!(!yes("t*v1^2", 1));
        assert!(!yes("(v1^2 - 1)^2", 1));
        assert!(!yes("v1^2 + 1", 1));
        assert!(!yes("sqrt(v1)", 1));
    }

    #[test]
    fn affine_extremal_examples() {
        let p = problem(eighths(), "v1^2", 0.0, 2.0);
        let q = affine_extremal(&p);
        for (t, v) in p.scale().points().iter().zip(q.values()) {
            assert_eq!(*v, 2.0 * t);
        }
        let flat = problem(eighths(), "v1^2", 3.0, 3.0);
        assert!(affine_extremal(&flat).values().iter().all(|v| *v == 3.0));
        let shifted = problem(TimeScale::uniform(1.0, 3.0, 0.5).unwrap(), "v1^2", 5.0, 5.0);
        assert!(affine_extremal(&shifted).values().iter().all(|v| *v == 5.0));
    }

    #[test]
    fn newton_on_quadratic_matches_closed_form() {
        let scale = TimeScale::from_points(vec![0.0, 0.2, 0.7, 0.9, 1.6, 2.0]).unwrap();
        let p = problem(scale, "v1^2", -1.0, 3.0);
        let init =
            GridFunction::scalar(p.scale().clone(), vec![-1.0, 4.0, -2.0, 7.0, 0.0, 3.0]).unwrap();
        let sol = solve_newton(&p, &init, &NewtonOptions::default()).unwrap();
        assert!(sol.iterations <= 2, "{:?}", sol.history);
        let exact = affine_extremal(&p);
        for (a, b) in sol.trajectory.values().iter().zip(exact.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn newton_rejects_bad_initial_guess() {
        let p = problem(eighths(), "v1^2", 0.0, 2.0);
        let bad = GridFunction::from_fn(p.scale().clone(), 1, |t| vec![t]).unwrap();
        assert!(matches!(
            solve_newton(&p, &bad, &NewtonOptions::default()),
            Err(SolverError::Variational(
                VariationalError::BoundaryMismatch { .. }
            ))
        ));
        let dense = problem(
            TimeScale::dense_interval(0.0, 1.0, 8).unwrap(),
            "v1^2",
            0.0,
            2.0,
        );
        assert!(matches!(
            solve_newton(&dense, &affine_extremal(&dense), &NewtonOptions::default()),
            Err(SolverError::NotExactDiscrete)
        ));
    }

    #[test]
    fn newton_reports_singular_systems() {
        // the residual does not depend on q, so the Jacobian vanishes
        let p = problem(eighths(), "v1 + u1", 0.0, 1.0);
        let q = affine_extremal(&p);
        assert!(matches!(
            solve_newton(&p, &q, &NewtonOptions::default()),
            Err(SolverError::SingularSystem { .. })
        ));
    }

    #[test]
    fn newton_reports_non_convergence_with_history() {
        let p = problem(eighths(), "v1^4 + exp(u1)", 0.0, 1.0);
        let opts = NewtonOptions {
            max_iter: 1,
            ..NewtonOptions::default()
        };
        let init = GridFunction::scalar(
            p.scale().clone(),
            vec![0.0, 3.0, -3.0, 3.0, -3.0, 3.0, -3.0, 3.0, 1.0],
        )
        .unwrap();
        match solve_newton(&p, &init, &opts) {
            Err(SolverError::NoConvergence {
                iterations,
                history,
                ..
            }) => {
                assert_eq!(iterations, 1);
                assert_eq!(history.len(), 2);
                assert!(history[1] < history[0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn newton_quartic_from_zero_lands_on_an_enumerated_extremal() {
        let p = problem(eighths(), "(v1^2 - 1)^2", 0.0, 0.0);
        let init = GridFunction::scalar(p.scale().clone(), vec![0.0; 9]).unwrap();
        let sol = solve_newton(&p, &init, &NewtonOptions::default()).unwrap();
        let oracle = enumerate_slope_extremals(&p, &[-1.0, 0.0, 1.0], 1e-8).unwrap();
        let hit = oracle.iter().any(|c| {
            c.trajectory
                .values()
                .iter()
                .zip(sol.trajectory.values())
                .all(|(a, b)| (a - b).abs() < 1e-8)
        });
        assert!(hit);
    }

    #[test]
    fn quartic_enumeration_counts() {
        let p = problem(eighths(), "(v1^2 - 1)^2", 0.0, 0.0);
        let all = enumerate_slope_extremals(&p, &[-1.0, 0.0, 1.0], 1e-8).unwrap();
        let expected: u64 = (0..=4).map(|k| binomial(8, k) * binomial(8 - k, k)).sum();
        assert_eq!(expected, 1107);
        assert_eq!(all.len(), 1107);
        // lexicographic order
        for w in all.candidates.windows(2) {
            let a: Vec<f64> = w[0].slopes.concat();
            let b: Vec<f64> = w[1].slopes.concat();
            assert!(a.partial_cmp(&b) == Some(std::cmp::Ordering::Less));
        }

        let kept = filter_second_el(&p, &all, 1e-8).unwrap();
        assert_eq!(kept.len(), 1 + binomial(8, 4) as usize);
        // the null trajectory survives with action 1, the ±1 paths with action 0
        for c in kept.iter() {
            let flat = c.slopes.iter().all(|s| s[0] == 0.0);
            assert_eq!(c.diagnostics.action, if flat { 1.0 } else { 0.0 });
        }
        let survivors: Vec<Vec<f64>> = kept.iter().map(|c| c.slopes.concat()).collect();
        for c in all.iter() {
            if !survivors.contains(&c.slopes.concat()) {
                assert!(c.diagnostics.action > 0.0);
            }
        }
    }

    #[test]
    fn degenerate_alphabets() {
        let p = problem(eighths(), "(v1^2 - 1)^2", 0.0, 0.0);
        let zero = enumerate_slope_extremals(&p, &[0.0], 1e-8).unwrap();
        assert_eq!(zero.len(), 1);
        assert!(zero.candidates[0]
            .trajectory
            .values()
            .iter()
            .all(|v| *v == 0.0));
        assert!(enumerate_slope_extremals(&p, &[2.0], 1e-8)
            .unwrap()
            .is_empty());
        assert!(filter_second_el(&p, &CandidateSet::default(), 1e-8)
            .unwrap()
            .is_empty());
        assert!(matches!(
            enumerate_slope_extremals(&p, &[], 1e-8),
            Err(SolverError::EmptyAlphabet)
        ));
        let long = problem(
            TimeScale::uniform(0.0, 1.0, 0.01).unwrap(),
            "v1^2",
            0.0,
            0.0,
        );
        assert!(matches!(
            enumerate_slope_extremals(&long, &[-1.0, 0.0, 1.0], 1e-8),
            Err(SolverError::GuardExceeded { .. })
        ));
    }

    #[test]
    fn json_lines_round_trip() {
        let p = problem(eighths(), "(v1^2 - 1)^2", 0.0, 0.0);
        let set = enumerate_slope_extremals(&p, &[-1.0, 0.0, 1.0], 1e-8).unwrap();
        let kept = filter_second_el(&p, &set, 1e-8).unwrap();
        let text = kept.to_json_lines();
        assert_eq!(text.lines().count(), 71);
        let first = text.lines().next().unwrap();
        assert!(first.starts_with(
            r#"{"slopes":[-1.0,-1.0,-1.0,-1.0,1.0,1.0,1.0,1.0],"values":[0.0,-0.125"#
        ));
        assert!(first.ends_with(r#""provenance":"ENUMERATED"}"#));
        let records = CandidateSet::parse_json_lines(&text).unwrap();
        let originals: Vec<CandidateRecord> = kept.iter().map(Candidate::record).collect();
        assert_eq!(records, originals);
    }

    #[test]
    fn enumerated_trajectories_hit_the_boundary_exactly() {
        let p = problem(eighths(), "(v1^2 - 1)^2", 0.0, 0.0);
        for c in enumerate_slope_extremals(&p, &[-1.0, 0.0, 1.0], 1e-8)
            .unwrap()
            .iter()
        {
            assert_eq!(c.trajectory.values()[8], 0.0);
            assert!(first_el_residual(&p, &c.trajectory).unwrap().magnitude <= 1e-8);
        }
    }
}
