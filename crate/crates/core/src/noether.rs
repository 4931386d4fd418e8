//! Infinitesimal transformations, the invariance test for the action, and
//! the associated conserved quantity.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::timescale::{delta_derivative, GridFunction};
use crate::variational::{
    dot, evaluate, spread, Evaluation, Residual, ResidualKind, VariationalError, VariationalProblem,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoetherError {
    #[error(transparent)]
    Variational(#[from] VariationalError),
    #[error("in generator {which}: {source}")]
    Generator {
        which: String,
        #[source]
        source: ExprError,
    },
    #[error("transformation acts on dimension {transformation}, problem has dimension {problem}")]
    DimensionMismatch {
        transformation: usize,
        problem: usize,
    },
}

pub type Result<T> = std::result::Result<T, NoetherError>;

/// Names of the generator variables: `t, q1..qn`.
pub fn generator_variables(n: usize) -> Vec<String> {
    let mut names = vec!["t".to_string()];
    names.extend((1..=n).map(|i| format!("q{i}")));
    names
}

/// Generators `(τ, ξ)` of `t ↦ t + ετ(t,q)`, `q ↦ q + εξ(t,q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformation {
    n: usize,
    tau: Expr,
    xi: Vec<Expr>,
}

impl Transformation {
    pub fn parse<S: AsRef<str>>(tau: &str, xi: &[S]) -> Result<Self> {
        let n = xi.len();
        let vars = generator_variables(n);
        let tau = Expr::parse(tau, &vars).map_err(|source| NoetherError::Generator {
            which: "tau".into(),
            source,
        })?;
        let xi = xi
            .iter()
            .enumerate()
            .map(|(k, text)| {
                Expr::parse(text.as_ref(), &vars).map_err(|source| NoetherError::Generator {
                    which: format!("xi[{k}]"),
                    source,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, tau, xi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> &Expr {
        &self.tau
    }

    pub fn xi(&self) -> &[Expr] {
        &self.xi
    }

    /// `τ(t, q(t))` and `ξ(t, q(t))` at every point of the trajectory's scale.
    fn composites(&self, q: &GridFunction) -> Result<(GridFunction, GridFunction)> {
        let n = self.n;
        let mut tau = Vec::with_capacity(q.len());
        let mut xi = Vec::with_capacity(q.len() * n);
        let mut env = vec![0.0; n + 1];
        for (j, &t) in q.scale().points().iter().enumerate() {
            env[0] = t;
            env[1..].copy_from_slice(q.at(j));
            tau.push(
                self.tau
                    .eval(&env)
                    .map_err(|source| NoetherError::Generator {
                        which: "tau".into(),
                        source,
                    })?,
            );
            for (k, e) in self.xi.iter().enumerate() {
                xi.push(e.eval(&env).map_err(|source| NoetherError::Generator {
                    which: format!("xi[{k}]"),
                    source,
                })?);
            }
        }
        let tau = GridFunction::scalar(q.scale().clone(), tau).expect("one value per point");
        let xi = GridFunction::new(q.scale().clone(), n, xi).expect("one row per point");
        Ok((tau, xi))
    }

    fn check(&self, p: &VariationalProblem) -> Result<()> {
        if self.n != p.n() {
            return Err(NoetherError::DimensionMismatch {
                transformation: self.n,
                problem: p.n(),
            });
        }
        Ok(())
    }
}

/// Invariance condition evaluated pointwise on `T^κ`:
/// `∂₁L·τ + ∂₂L·ξ^σ + ∂₃L·ξ^Δ + L·τ^Δ - (q^Δ·∂₃L)·τ^Δ`.
pub fn invariance_residual(
    p: &VariationalProblem,
    q: &GridFunction,
    tr: &Transformation,
) -> Result<Residual> {
    tr.check(p)?;
    let ev = evaluate(p, q)?;
    invariance_of(p, &ev, q, tr)
}

fn invariance_of(
    p: &VariationalProblem,
    ev: &Evaluation,
    q: &GridFunction,
    tr: &Transformation,
) -> Result<Residual> {
    let (tau, xi) = tr.composites(q)?;
    let tau_d = delta_derivative(&tau);
    let xi_d = delta_derivative(&xi);
    let scale = p.scale();
    let mut values = Vec::with_capacity(ev.kappa.len());
    for (i, jet) in ev.jets.iter().enumerate() {
        let s = scale.sigma(i).map_err(VariationalError::from)?;
        let td = tau_d.at(i)[0];
        let r = jet.dt * tau.at(i)[0]
            + dot(&jet.du, xi.at(s))
            + dot(&jet.dv, xi_d.at(i))
            + jet.value * td
            - dot(ev.velocity.at(i), &jet.dv) * td;
        values.push(vec![r]);
    }
    let approximate = ev.is_approximate() || tau_d.is_approximate() || xi_d.is_approximate();
    Ok(Residual::new(
        ResidualKind::Invariance,
        ev.kappa.points().to_vec(),
        values,
        approximate,
    ))
}

/// `∂₃L·ξ + [L - ∂₃L·q^Δ - ∂₁L·μ]·τ` on `T^κ`.
pub fn conserved_quantity(
    p: &VariationalProblem,
    q: &GridFunction,
    tr: &Transformation,
) -> Result<GridFunction> {
    tr.check(p)?;
    let ev = evaluate(p, q)?;
    conserved_of(&ev, q, tr)
}

fn conserved_of(ev: &Evaluation, q: &GridFunction, tr: &Transformation) -> Result<GridFunction> {
    let (tau, xi) = tr.composites(q)?;
    let values = ev
        .jets
        .iter()
        .enumerate()
        .map(|(i, jet)| dot(&jet.dv, xi.at(i)) + (-ev.hamiltonian(i)) * tau.at(i)[0])
        .collect();
    Ok(GridFunction::scalar(ev.kappa.clone(), values)
        .expect("one value per κ-point")
        .with_approximate(ev.is_approximate()))
}

/// Invariance magnitude, the conserved quantity and its spread.
#[derive(Debug, Clone, PartialEq)]
pub struct NoetherReport {
    pub invariance: f64,
    pub conserved: GridFunction,
    pub deviation: f64,
}

/// Serialized form of a [`NoetherReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoetherRecord {
    pub invariance: f64,
    pub conserved: Vec<f64>,
    pub deviation: f64,
}

impl NoetherReport {
    /// True when both the invariance residual and the deviation are within `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.invariance <= tol && self.deviation <= tol
    }

    pub fn record(&self) -> NoetherRecord {
        NoetherRecord {
            invariance: self.invariance,
            conserved: self.conserved.values().to_vec(),
            deviation: self.deviation,
        }
    }
}

pub fn check_conservation(
    p: &VariationalProblem,
    q: &GridFunction,
    tr: &Transformation,
) -> Result<NoetherReport> {
    tr.check(p)?;
    let ev = evaluate(p, q)?;
    let invariance = invariance_of(p, &ev, q, tr)?.magnitude;
    let conserved = conserved_of(&ev, q, tr)?;
    let deviation = spread(conserved.values());
    Ok(NoetherReport {
        invariance,
        conserved,
        deviation,
    })
}

/// Max invariance magnitude over `count` random admissible trajectories.
///
/// Each trajectory is the straight line between the boundary values with
/// interior points perturbed uniformly in `[-1, 1]`.
pub fn invariance_sweep(
    p: &VariationalProblem,
    tr: &Transformation,
    count: usize,
    seed: u64,
) -> Result<f64> {
    tr.check(p)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let line = crate::solver::straight_line(p);
    let n = p.n();
    let last = p.scale().len() - 1;
    let mut worst = 0.0f64;
    for _ in 0..count {
        let mut values = line.values().to_vec();
        for v in &mut values[n..last * n] {
            *v += rng.gen_range(-1.0..=1.0);
        }
        let q = GridFunction::new(p.scale().clone(), n, values).expect("same shape as the line");
        worst = worst.max(invariance_residual(p, &q, tr)?.magnitude);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{affine_extremal, enumerate_slope_extremals};
    use crate::timescale::TimeScale;
    use crate::variational::{
        erdmann_deviation, first_el_residual, trajectory_from_slopes, Lagrangian,
    };

    fn problem(scale: TimeScale, l: &str, qa: f64, qb: f64) -> VariationalProblem {
        VariationalProblem::new(scale, Lagrangian::parse(l, 1).unwrap(), vec![qa], vec![qb])
            .unwrap()
    }

    fn eighths() -> TimeScale {
        TimeScale::uniform(0.0, 1.0, 0.125).unwrap()
    }

    fn tr(tau: &str, xi: &str) -> Transformation {
        Transformation::parse(tau, &[xi]).unwrap()
    }

    #[test]
    fn constant_generators_give_two_s_c_minus_r_c_squared() {
        let p = problem(eighths(), "v1^2", 0.0, 2.0);
        let q = affine_extremal(&p);
        for (r, s) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (-0.5, 3.0)] {
            let t = tr(&format!("{r}"), &format!("{s}"));
            let report = check_conservation(&p, &q, &t).unwrap();
            assert_eq!(report.invariance, 0.0);
            let expected = 2.0 * s * 2.0 - r * 4.0;
            for v in report.conserved.values() {
                assert!((v - expected).abs() <= 1e-12, "{v} vs {expected}");
            }
            assert!(report.deviation <= 1e-12);
            assert_eq!(report.conserved.len(), 8);
        }
    }

    #[test]
    fn invariance_examples() {
        let p = problem(eighths(), "v1^2", 0.0, 1.0);
        let q = GridFunction::from_fn(p.scale().clone(), 1, |t| vec![t * t]).unwrap();
        assert_eq!(
            invariance_residual(&p, &q, &tr("1", "1"))
                .unwrap()
                .magnitude,
            0.0
        );
        assert_eq!(
            invariance_residual(&p, &q, &tr("0", "0"))
                .unwrap()
                .magnitude,
            0.0
        );

        let r = invariance_residual(&p, &q, &tr("0", "t")).unwrap();
        let v = delta_derivative(&q);
        for (row, vel) in r.values.iter().zip(v.rows()) {
            assert!((row[0] - 2.0 * vel[0]).abs() < 1e-12);
        }
        assert!(r.magnitude > 0.0);
        assert_eq!(r.kind, ResidualKind::Invariance);
    }

    #[test]
    fn identity_transformation_is_trivial() {
        let p = problem(eighths(), "t*v1^2 + sin(u1)", 0.0, 1.0);
        let q = GridFunction::from_fn(p.scale().clone(), 1, |t| vec![t * t]).unwrap();
        let report = check_conservation(&p, &q, &tr("0", "0")).unwrap();
        assert_eq!(report.invariance, 0.0);
        assert!(report.conserved.values().iter().all(|v| *v == 0.0));
        assert_eq!(report.deviation, 0.0);
    }

    #[test]
    fn non_extremal_breaks_conservation() {
        let p = problem(eighths(), "v1^2", 0.0, 1.0);
        let q = GridFunction::from_fn(p.scale().clone(), 1, |t| vec![t * t]).unwrap();
        let report = check_conservation(&p, &q, &tr("1", "1")).unwrap();
        assert_eq!(report.invariance, 0.0);
        assert!(report.deviation > 0.0);
    }

    #[test]
    fn quartic_time_translation_on_unit_slopes() {
        let p = problem(eighths(), "(v1^2 - 1)^2", 0.0, 0.0);
        let slopes: Vec<Vec<f64>> = [1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0]
            .iter()
            .map(|s| vec![*s])
            .collect();
        let detour = trajectory_from_slopes(p.scale(), &[0.0], &slopes).unwrap();
        let report = check_conservation(&p, &detour, &tr("1", "0")).unwrap();
        assert!(report.deviation > 0.0);

        for c in enumerate_slope_extremals(&p, &[-1.0, 1.0], 1e-8)
            .unwrap()
            .iter()
        {
            let report = check_conservation(&p, &c.trajectory, &tr("1", "0")).unwrap();
            assert_eq!(report.deviation, 0.0);
            assert_eq!(report.invariance, 0.0);
        }
    }

    #[test]
    fn time_translation_matches_negative_energy() {
        let p = problem(eighths(), "(v1^2 - 1)^2 + u1^2", 0.0, 0.5);
        let q = GridFunction::from_fn(p.scale().clone(), 1, |t| vec![0.5 * t * t]).unwrap();
        let c = conserved_quantity(&p, &q, &tr("1", "0")).unwrap();
        assert!((spread(c.values()) - erdmann_deviation(&p, &q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn conserved_quantity_is_linear_in_generators() {
        let p = problem(eighths(), "t*v1^2 + u1*v1 + exp(u1)", 0.2, 1.0);
        let q = GridFunction::from_fn(p.scale().clone(), 1, |t| vec![0.2 + 0.8 * t * t]).unwrap();
        let c1 = conserved_quantity(&p, &q, &tr("t^2", "q1 + 1")).unwrap();
        let c2 = conserved_quantity(&p, &q, &tr("sin(q1)", "t*q1")).unwrap();
        let mixed =
            conserved_quantity(&p, &q, &tr("2*t^2 - 3*sin(q1)", "2*(q1 + 1) - 3*t*q1")).unwrap();
        for ((a, b), m) in c1.values().iter().zip(c2.values()).zip(mixed.values()) {
            assert!((2.0 * a - 3.0 * b - m).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_scales_drop_the_graininess_term() {
        let p = problem(
            TimeScale::dense_interval(0.0, 1.0, 50).unwrap(),
            "t*v1^2 + u1",
            0.0,
            1.0,
        );
        let q = GridFunction::from_fn(p.scale().clone(), 1, |t| vec![t * t]).unwrap();
        let t = tr("1 + t", "q1");
        let c = conserved_quantity(&p, &q, &t).unwrap();
        assert!(c.is_approximate());
        let ev = evaluate(&p, &q).unwrap();
        for (i, v) in c.values().iter().enumerate() {
            let jet = &ev.jets[i];
            let qdot = ev.velocity.at(i)[0];
            let time = ev.kappa.points()[i];
            let classical = jet.dv[0] * q.at(i)[0] + (jet.value - jet.dv[0] * qdot) * (1.0 + time);
            assert!((v - classical).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_detects_non_invariance() {
        let p = problem(eighths(), "v1^2", 0.0, 1.0);
        assert!(invariance_sweep(&p, &tr("t", "0"), 5, 7).unwrap() > 0.0);
        assert_eq!(invariance_sweep(&p, &tr("1", "1"), 5, 7).unwrap(), 0.0);
        assert_eq!(
            invariance_sweep(&p, &tr("t", "0"), 5, 7).unwrap(),
            invariance_sweep(&p, &tr("t", "0"), 5, 7).unwrap()
        );
    }

    #[test]
    fn generator_errors_are_located() {
        match Transformation::parse("1", &["q1 +"]) {
            Err(NoetherError::Generator { which, .. }) => assert_eq!(which, "xi[0]"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Transformation::parse("q2", &["0"]).is_err());
        let p = problem(eighths(), "v1^2", 0.0, 1.0);
        let two = Transformation::parse("0", &["0", "0"]).unwrap();
        assert!(matches!(
            check_conservation(&p, &affine_extremal(&p), &two),
            Err(NoetherError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn extremal_of_invariant_problem_conserves() {
        let p = problem(
            TimeScale::from_points(vec![0.0, 0.3, 0.4, 1.1, 1.5]).unwrap(),
            "2*v1^2 - v1 + 3",
            1.0,
            -1.0,
        );
        let q = affine_extremal(&p);
        assert!(first_el_residual(&p, &q).unwrap().magnitude < 1e-12);
        let report = check_conservation(&p, &q, &tr("0.7", "-1.3")).unwrap();
        assert!(report.invariance < 1e-12);
        assert!(report.deviation < 1e-12);
    }

    #[test]
    fn report_json_shape() {
        let p = problem(eighths(), "v1^2", 0.0, 2.0);
        let report = check_conservation(&p, &affine_extremal(&p), &tr("1", "1")).unwrap();
        let text = serde_json::to_string(&report.record()).unwrap();
        assert!(text.starts_with(r#"{"invariance":0.0,"conserved":[0.0,"#));
        assert!(text.ends_with(r#""deviation":0.0}"#));
    }
}
