//! Variational problems on time scales and their necessary-condition
//! residuals.
//!
//! The action is `I[q] = ∫_a^b L(t, q^σ(t), q^Δ(t)) Δt`. Along a trajectory
//! the Lagrangian is evaluated at every point of `T^κ`; residuals that take an
//! outer delta derivative of such a composite live on `T^{κ²}`, which on a
//! finite discrete scale holds exactly `N - 2` points, one per interior
//! unknown.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::timescale::{
    delta_derivative, delta_integral_flagged, GridFunction, TimeScale, TimeScaleError,
};

/// Boundary values must match within this tolerance (scaled by `max(1, |q|)`).
pub const BOUNDARY_TOL: f64 = 1e-12;

/// `|∂₁L|` bound under which a Lagrangian counts as autonomous along a
/// trajectory.
pub const AUTONOMY_TOL: f64 = 1e-10;

/// Extremality threshold on exact discrete scales.
pub const EXACT_EXTREMAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VariationalError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    TimeScale(#[from] TimeScaleError),
    #[error(
        "trajectory violates the boundary condition at {which}: expected {expected:?}, got {got:?}"
    )]
    BoundaryMismatch {
        which: &'static str,
        expected: Vec<f64>,
        got: Vec<f64>,
    },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("trajectory is not sampled on the problem's time scale")]
    ScaleMismatch,
    #[error("Lagrangian is not autonomous: ∂₁L = {value} at t = {t} (point {index})")]
    NotAutonomous { index: usize, t: f64, value: f64 },
    #[error("the classical check needs a scale whose gaps are all dense")]
    NotDense,
    #[error("point {index} is outside T^κ ({len} points)")]
    OutsideKappa { index: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, VariationalError>;

/// Names of the Lagrangian's variables: `t, u1..un, v1..vn`.
pub fn lagrangian_variables(n: usize) -> Vec<String> {
    let mut names = vec!["t".to_string()];
    names.extend((1..=n).map(|i| format!("u{i}")));
    names.extend((1..=n).map(|i| format!("v{i}")));
    names
}

/// `L(t, u, v)` with `u` in the `q^σ` slot and `v` in the `q^Δ` slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Lagrangian {
    n: usize,
    expr: Expr,
}

/// Value and first partials of `L` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    /// `∂₁L`
    pub dt: f64,
    /// `∂₂L`
    pub du: Vec<f64>,
    /// `∂₃L`
    pub dv: Vec<f64>,
}

impl Lagrangian {
    pub fn parse(text: &str, n: usize) -> std::result::Result<Self, ExprError> {
        let expr = Expr::parse(text, &lagrangian_variables(n))?;
        Ok(Self { n, expr })
    }

    /// Wraps an expression whose variables are exactly `t, u1..un, v1..vn`.
    pub fn from_expr(expr: Expr, n: usize) -> Option<Self> {
        (expr.variables() == lagrangian_variables(n).as_slice()).then_some(Self { n, expr })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// `α · L`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            n: self.n,
            expr: self.expr.scaled(alpha),
        }
    }

    fn env(&self, t: f64, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut env = Vec::with_capacity(1 + 2 * self.n);
        env.push(t);
        env.extend_from_slice(u);
        env.extend_from_slice(v);
        env
    }

    pub fn value(&self, t: f64, u: &[f64], v: &[f64]) -> std::result::Result<f64, ExprError> {
        self.expr.eval(&self.env(t, u, v))
    }

    /// One forward-mode pass per partial.
    pub fn jet(&self, t: f64, u: &[f64], v: &[f64]) -> std::result::Result<Jet, ExprError> {
        let env = self.env(t, u, v);
        let mut seed = vec![0.0; env.len()];
        let mut value = 0.0;
        let mut partials = Vec::with_capacity(env.len());
        for k in 0..env.len() {
            seed[k] = 1.0;
            let (val, d) = self.expr.directional(&env, &seed)?;
            seed[k] = 0.0;
            value = val;
            partials.push(d);
        }
        let n = self.n;
        Ok(Jet {
            value,
            dt: partials[0],
            du: partials[1..=n].to_vec(),
            dv: partials[n + 1..].to_vec(),
        })
    }
}

/// Minimize `∫_a^b L(t, q^σ, q^Δ) Δt` subject to `q(a) = q_a`, `q(b) = q_b`.
#[derive(Debug, Clone)]
pub struct VariationalProblem {
    scale: TimeScale,
    lagrangian: Lagrangian,
    q_a: Vec<f64>,
    q_b: Vec<f64>,
}

impl VariationalProblem {
    pub fn new(
        scale: TimeScale,
        lagrangian: Lagrangian,
        q_a: Vec<f64>,
        q_b: Vec<f64>,
    ) -> Result<Self> {
        let n = lagrangian.n();
        for got in [q_a.len(), q_b.len()] {
            if got != n {
                return Err(VariationalError::DimensionMismatch { expected: n, got });
            }
        }
        // work on the full scale even when handed a view
        let scale = scale.root();
        Ok(Self {
            scale,
            lagrangian,
            q_a,
            q_b,
        })
    }

    pub fn scale(&self) -> &TimeScale {
        &self.scale
    }

    pub fn lagrangian(&self) -> &Lagrangian {
        &self.lagrangian
    }

    pub fn n(&self) -> usize {
        self.lagrangian.n()
    }

    pub fn q_a(&self) -> &[f64] {
        &self.q_a
    }

    pub fn q_b(&self) -> &[f64] {
        &self.q_b
    }

    pub fn a(&self) -> f64 {
        self.scale.first()
    }

    pub fn b(&self) -> f64 {
        self.scale.last()
    }

    /// The same problem with `α · L`.
    pub fn with_scaled_lagrangian(&self, alpha: f64) -> Self {
        Self {
            lagrangian: self.lagrangian.scaled(alpha),
            ..self.clone()
        }
    }

    /// Default extremality threshold: `1e-8` on exact discrete scales,
    /// ten times the dense grid spacing otherwise.
    pub fn default_tolerance(&self) -> f64 {
        match self.scale.dense_spacing() {
            Some(h) => 10.0 * h,
            None => EXACT_EXTREMAL_TOL,
        }
    }

    /// Checks that `q` is an admissible trajectory for this problem.
    pub fn check_trajectory(&self, q: &GridFunction) -> Result<()> {
        if q.scale() != &self.scale {
            return Err(VariationalError::ScaleMismatch);
        }
        if q.dim() != self.n() {
            return Err(VariationalError::DimensionMismatch {
                expected: self.n(),
                got: q.dim(),
            });
        }
        let close = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= BOUNDARY_TOL * x.abs().max(1.0))
        };
        let first = q.at(0);
        if !close(&self.q_a, first) {
            return Err(VariationalError::BoundaryMismatch {
                which: "a",
                expected: self.q_a.clone(),
                got: first.to_vec(),
            });
        }
        let last = q.at(q.len() - 1);
        if !close(&self.q_b, last) {
            return Err(VariationalError::BoundaryMismatch {
                which: "b",
                expected: self.q_b.clone(),
                got: last.to_vec(),
            });
        }
        Ok(())
    }
}

/// The Lagrangian evaluated along a trajectory at every point of `T^κ`.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub kappa: TimeScale,
    /// `q^Δ` on `T^κ`.
    pub velocity: GridFunction,
    /// `q^σ` on `T^κ`.
    pub shifted: Vec<Vec<f64>>,
    pub jets: Vec<Jet>,
    pub mu: Vec<f64>,
}

impl Evaluation {
    pub fn is_approximate(&self) -> bool {
        self.velocity.is_approximate()
    }

    /// `ℋ = -L + ∂₃L·v + ∂₁L·μ` at κ-point `i`.
    pub fn hamiltonian(&self, i: usize) -> f64 {
        let jet = &self.jets[i];
        -jet.value + dot(&jet.dv, self.velocity.at(i)) + jet.dt * self.mu[i]
    }

    /// `-L + ∂₃L·v` at κ-point `i`, without the graininess term.
    pub fn classical_hamiltonian(&self, i: usize) -> f64 {
        let jet = &self.jets[i];
        -jet.value + dot(&jet.dv, self.velocity.at(i))
    }

    fn kappa_function(&self, dim: usize, values: Vec<f64>) -> GridFunction {
        GridFunction::new(self.kappa.clone(), dim, values)
            .expect("one row per κ-point")
            .with_approximate(self.is_approximate())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Evaluates `L` and its partials at `(t, q^σ(t), q^Δ(t))` for every `t` in
/// `T^κ`.
pub fn evaluate(p: &VariationalProblem, q: &GridFunction) -> Result<Evaluation> {
    p.check_trajectory(q)?;
    let scale = p.scale();
    let velocity = delta_derivative(q);
    let kappa = velocity.scale().clone();
    let mut jets = Vec::with_capacity(kappa.len());
    let mut shifted = Vec::with_capacity(kappa.len());
    let mut mu = Vec::with_capacity(kappa.len());
    for (i, &t) in kappa.points().iter().enumerate() {
        let u = q.at(scale.sigma(i)?).to_vec();
        jets.push(p.lagrangian().jet(t, &u, velocity.at(i))?);
        shifted.push(u);
        mu.push(scale.mu(i)?);
    }
    Ok(Evaluation {
        kappa,
        velocity,
        shifted,
        jets,
        mu,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    FirstEl,
    FirstElIntegral,
    SecondEl,
    ClassicalSecondEl,
    Invariance,
}

/// Pointwise values of a necessary condition, zero where it holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub kind: ResidualKind,
    /// Times of the points the residual is defined at (a prefix of the scale).
    pub points: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Max over all entries of `|value|`.
    pub magnitude: f64,
    pub approximate: bool,
}

impl Residual {
    pub fn new(
        kind: ResidualKind,
        points: Vec<f64>,
        values: Vec<Vec<f64>>,
        approximate: bool,
    ) -> Self {
        let magnitude = values.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        Self {
            kind,
            points,
            values,
            magnitude,
            approximate,
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.magnitude <= tol
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The action `I[q]`.
pub fn action(p: &VariationalProblem, q: &GridFunction) -> Result<f64> {
    let ev = evaluate(p, q)?;
    action_of(p, &ev)
}

pub(crate) fn action_of(p: &VariationalProblem, ev: &Evaluation) -> Result<f64> {
    let integrand = ev.kappa_function(1, ev.jets.iter().map(|j| j.value).collect());
    let (sum, _) = delta_integral_flagged(&integrand, 0, p.scale().len() - 1)?;
    Ok(sum[0])
}

/// `Δ/Δt ∂₃L - ∂₂L` on `T^{κ²}`.
pub fn first_el_residual(p: &VariationalProblem, q: &GridFunction) -> Result<Residual> {
    let ev = evaluate(p, q)?;
    Ok(first_el_of(p, &ev))
}

pub(crate) fn first_el_of(p: &VariationalProblem, ev: &Evaluation) -> Residual {
    let n = p.n();
    let momentum = ev.kappa_function(n, ev.jets.iter().flat_map(|j| j.dv.clone()).collect());
    let d_momentum = delta_derivative(&momentum);
    let values = (0..d_momentum.len())
        .map(|i| {
            d_momentum
                .at(i)
                .iter()
                .zip(&ev.jets[i].du)
                .map(|(dp, du)| dp - du)
                .collect()
        })
        .collect();
    Residual::new(
        ResidualKind::FirstEl,
        d_momentum.scale().points().to_vec(),
        values,
        d_momentum.is_approximate(),
    )
}

/// Deviation from constancy of `∂₃L(t) - ∫_a^t ∂₂L Δs` over `T^κ`.
///
/// The values are the excess over the per-component minimum, so the
/// magnitude is the max-minus-min deviation.
pub fn first_el_integral_residual(p: &VariationalProblem, q: &GridFunction) -> Result<Residual> {
    let ev = evaluate(p, q)?;
    let n = p.n();
    let du = ev.kappa_function(n, ev.jets.iter().flat_map(|j| j.du.clone()).collect());
    let mut approximate = ev.is_approximate();
    let mut rows = Vec::with_capacity(ev.kappa.len());
    for (i, jet) in ev.jets.iter().enumerate() {
        let (integral, approx) = delta_integral_flagged(&du, 0, i)?;
        approximate |= approx;
        rows.push(
            jet.dv
                .iter()
                .zip(&integral)
                .map(|(p, s)| p - s)
                .collect::<Vec<f64>>(),
        );
    }
    let values = excess_over_min(&rows, n);
    Ok(Residual::new(
        ResidualKind::FirstElIntegral,
        ev.kappa.points().to_vec(),
        values,
        approximate,
    ))
}

fn excess_over_min(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mins: Vec<f64> = (0..n)
        .map(|k| rows.iter().map(|r| r[k]).fold(f64::INFINITY, f64::min))
        .collect();
    rows.iter()
        .map(|r| r.iter().zip(&mins).map(|(x, m)| x - m).collect())
        .collect()
}

/// `ℋ(t_i, q^σ(t_i), q^Δ(t_i))` at κ-point `i`.
pub fn hamiltonian(p: &VariationalProblem, q: &GridFunction, i: usize) -> Result<f64> {
    let ev = evaluate(p, q)?;
    if i >= ev.kappa.len() {
        return Err(VariationalError::OutsideKappa {
            index: i,
            len: ev.kappa.len(),
        });
    }
    Ok(ev.hamiltonian(i))
}

/// `Δ/Δt ℋ + ∂₁L` on `T^{κ²}`.
pub fn second_el_residual(p: &VariationalProblem, q: &GridFunction) -> Result<Residual> {
    let ev = evaluate(p, q)?;
    Ok(second_el_of(&ev, ResidualKind::SecondEl))
}

pub(crate) fn second_el_of(ev: &Evaluation, kind: ResidualKind) -> Residual {
    let h = ev.kappa_function(1, (0..ev.kappa.len()).map(|i| ev.hamiltonian(i)).collect());
    let dh = delta_derivative(&h);
    let values = (0..dh.len())
        .map(|i| vec![dh.at(i)[0] + ev.jets[i].dt])
        .collect();
    Residual::new(
        kind,
        dh.scale().points().to_vec(),
        values,
        dh.is_approximate(),
    )
}

/// Max minus min over `T^κ` of `-L + ∂₃L·q^Δ`, for autonomous Lagrangians.
pub fn erdmann_deviation(p: &VariationalProblem, q: &GridFunction) -> Result<f64> {
    let ev = evaluate(p, q)?;
    for (index, jet) in ev.jets.iter().enumerate() {
        if jet.dt.abs() > AUTONOMY_TOL {
            return Err(VariationalError::NotAutonomous {
                index,
                t: ev.kappa.points()[index],
                value: jet.dt,
            });
        }
    }
    let energies: Vec<f64> = (0..ev.kappa.len())
        .map(|i| ev.classical_hamiltonian(i))
        .collect();
    Ok(spread(&energies))
}

pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        0.0
    } else {
        max - min
    }
}

/// The classical second Euler-Lagrange residual `d/dt[-L + ∂₃L·q̇] + ∂₁L`
/// on a dense grid (graininess zero everywhere).
pub fn classical_check(p: &VariationalProblem, q: &GridFunction) -> Result<Residual> {
    if !p.scale().is_all_dense() {
        return Err(VariationalError::NotDense);
    }
    let ev = evaluate(p, q)?;
    let mut r = second_el_of(&ev, ResidualKind::ClassicalSecondEl);
    r.approximate = true;
    Ok(r)
}

/// Integrates slopes from `start`: `q(t_{i+1}) = q(t_i) + s_i (t_{i+1} - t_i)`.
pub fn trajectory_from_slopes(
    scale: &TimeScale,
    start: &[f64],
    slopes: &[Vec<f64>],
) -> Result<GridFunction> {
    let scale = scale.root();
    if slopes.len() != scale.len() - 1 {
        return Err(TimeScaleError::ValueCount {
            expected: scale.len() - 1,
            got: slopes.len(),
        }
        .into());
    }
    let dim = start.len();
    let mut values = Vec::with_capacity(scale.len() * dim);
    let mut current = start.to_vec();
    values.extend_from_slice(&current);
    for (i, s) in slopes.iter().enumerate() {
        if s.len() != dim {
            return Err(VariationalError::DimensionMismatch {
                expected: dim,
                got: s.len(),
            });
        }
        let h = scale.points()[i + 1] - scale.points()[i];
        for (c, x) in current.iter_mut().zip(s) {
            *c += x * h;
        }
        values.extend_from_slice(&current);
    }
    Ok(GridFunction::new(scale, dim, values)?)
}
