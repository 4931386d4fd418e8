#![allow(dead_code)]

use rand::Rng;
use tsvar::timescale::TimeScale;

/// Exact discrete scale with `len` points and gaps drawn from `[0.05, 1]`.
pub fn random_scale(rng: &mut impl Rng, len: usize) -> TimeScale {
    let mut t = rng.gen_range(-2.0..2.0);
    let mut points = Vec::with_capacity(len);
    for _ in 0..len {
        points.push(t);
        t += rng.gen_range(0.05..1.0);
    }
    TimeScale::from_points(points).unwrap()
}

pub fn random_values(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Random expression over `vars` whose value and derivatives stay finite on
/// `[-1, 1]^k`: denominators, logarithms and square roots only ever see
/// `1 + e^2`.
pub fn random_expr(rng: &mut impl Rng, vars: &[&str], depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.6) {
            vars[rng.gen_range(0..vars.len())].to_string()
        } else {
            format!("{:.3}", rng.gen_range(-2.0..2.0))
        };
    }
    let mut sub = || random_expr(rng, vars, depth - 1);
    let a = sub();
    let b = sub();
    match rng.gen_range(0..12) {
        0 => format!("({a} + {b})"),
        1 => format!("({a} - {b})"),
        2 => format!("({a} * {b})"),
        3 => format!("({a} / (1 + ({b})^2))"),
        4 => format!("({a})^2"),
        5 => format!("({a})^3"),
        6 => format!("(1 + ({a})^2)^0.5"),
        7 => format!("sin({a})"),
        8 => format!("cos({a})"),
        9 => format!("exp(sin({a}) + ({b})/(1 + ({b})^2))"),
        10 => format!("log(1 + ({a})^2)"),
        _ => format!("-sqrt(1 + ({a})^2)"),
    }
}

/// Central difference of `f` in coordinate `k` with step `1e-6·max(1, |x_k|)`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], k: usize) -> f64 {
    let h = 1e-6 * 1f64.max(x[k].abs());
    let at = |d: f64| {
        let mut y = x.to_vec();
        y[k] += d;
        f(&y)
    };
    (at(h) - at(-h)) / (2.0 * h)
}
