//! Time scales with finitely many sample points and the delta-calculus
//! primitives built on them.
//!
//! A [`TimeScale`] is an ordered point set where every gap between
//! consecutive points is either a true jump ([`GapKind::Scattered`]) or a
//! sample of a continuum segment ([`GapKind::Dense`]). On a scale whose gaps
//! are all scattered every quantity in this module is computed exactly (up to
//! IEEE rounding); dense gaps produce approximations of the classical
//! derivative and integral and mark their results as approximate.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used when matching a time value to a point index.
pub const POINT_MATCH_TOL: f64 = 1e-12;

/// Tolerance on `(b - a) / h` being integral in [`TimeScale::uniform`].
pub const UNIFORM_DIVISIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeScaleError {
    #[error("a time scale needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("point {index} is not finite")]
    NonFinite { index: usize },
    #[error("points must be strictly increasing: t[{index}] = {value} does not exceed {previous}")]
    NotIncreasing {
        index: usize,
        previous: f64,
        value: f64,
    },
    #[error("expected {expected} gap kinds for {points} points, got {got}")]
    GapCount {
        points: usize,
        expected: usize,
        got: usize,
    },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("span {span} is not an integer multiple of step {step}")]
    NonDivisibleSpan { span: f64, step: f64 },
    #[error("dense resolution must be at least 2 subintervals, got {0}")]
    InvalidResolution(usize),
    #[error("index {index} out of range for a time scale with {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("grid function has {got} values, expected {expected}")]
    ValueCount { expected: usize, got: usize },
    #[error("grid function dimension must be at least 1")]
    ZeroDimension,
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid functions live on different time scales")]
    ScaleMismatch,
    #[error("integration range [{from}, {to}] needs the value at index {missing}, which is outside the function's domain")]
    OutsideDomain {
        from: usize,
        to: usize,
        missing: usize,
    },
    #[error("integration range is reversed: from {from} > to {to}")]
    ReversedRange { from: usize, to: usize },
    #[error("function is not strictly increasing between indices {index} and {next}", next = index + 1)]
    NotStrictlyIncreasing { index: usize },
    #[error("expected a scalar grid function, got dimension {0}")]
    NotScalar(usize),
}

pub type Result<T> = std::result::Result<T, TimeScaleError>;

/// Kind of the gap between two consecutive points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GapKind {
    /// A true gap: the forward jump of the left point is the right point.
    #[serde(rename = "S")]
    Scattered,
    /// The pair samples a continuum segment.
    #[serde(rename = "D")]
    Dense,
}

/// Density of one side of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Dense,
    Scattered,
}

/// Classification of a point by its left and right neighbourhoods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PointClass {
    pub left: Side,
    pub right: Side,
}

impl PointClass {
    pub fn is_isolated(&self) -> bool {
        self.left == Side::Scattered && self.right == Side::Scattered
    }

    pub fn is_dense(&self) -> bool {
        self.left == Side::Dense && self.right == Side::Dense
    }

    pub fn is_right_scattered(&self) -> bool {
        self.right == Side::Scattered
    }

    pub fn is_left_scattered(&self) -> bool {
        self.left == Side::Scattered
    }
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_isolated() {
            return f.write_str("isolated");
        }
        if self.is_dense() {
            return f.write_str("dense");
        }
        let left = match self.left {
            Side::Dense => "left-dense",
            Side::Scattered => "left-scattered",
        };
        let right = match self.right {
            Side::Dense => "right-dense",
            Side::Scattered => "right-scattered",
        };
        write!(f, "{left}, {right}")
    }
}

/// A finite time scale.
///
/// The point and gap arrays are shared between a scale and every view
/// derived from it by [`TimeScale::kappa`]; a view only shortens the valid
/// prefix. Views are themselves time scales: the jump operators treat the last
/// point of the view as the supremum.
#[derive(Clone)]
pub struct TimeScale {
    points: Arc<[f64]>,
    gaps: Arc<[GapKind]>,
    len: usize,
}

impl fmt::Debug for TimeScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeScale")
            .field("points", &self.points())
            .field("gaps", &self.gaps())
            .finish()
    }
}

impl PartialEq for TimeScale {
    fn eq(&self, other: &Self) -> bool {
        self.points() == other.points() && self.gaps() == other.gaps()
    }
}

impl TimeScale {
    /// Builds a scale from explicit points and one gap kind per adjacent pair.
    pub fn new(points: Vec<f64>, gaps: Vec<GapKind>) -> Result<Self> {
        if points.len() < 3 {
            return Err(TimeScaleError::TooFewPoints(points.len()));
        }
        if gaps.len() != points.len() - 1 {
            return Err(TimeScaleError::GapCount {
                points: points.len(),
                expected: points.len() - 1,
                got: gaps.len(),
            });
        }
        for (index, &p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(TimeScaleError::NonFinite { index });
            }
        }
        for (index, w) in points.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(TimeScaleError::NotIncreasing {
                    index: index + 1,
                    previous: w[0],
                    value: w[1],
                });
            }
        }
        let len = points.len();
        Ok(Self {
            points: points.into(),
            gaps: gaps.into(),
            len,
        })
    }

    /// An exact discrete scale: every gap is scattered.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        let gaps = vec![GapKind::Scattered; points.len().saturating_sub(1)];
        Self::new(points, gaps)
    }

    /// The scale `{a, a+h, ..., b}` (a finite piece of `hZ` shifted to `a`).
    pub fn uniform(a: f64, b: f64, h: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(TimeScaleError::InvalidInterval { a, b });
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(TimeScaleError::InvalidStep(h));
        }
        let ratio = (b - a) / h;
        let steps = ratio.round();
        if (ratio - steps).abs() > UNIFORM_DIVISIBILITY_TOL * steps.max(1.0) {
            return Err(TimeScaleError::NonDivisibleSpan {
                span: b - a,
                step: h,
            });
        }
        let steps = steps as usize;
        let mut points: Vec<f64> = (0..steps).map(|k| a + k as f64 * h).collect();
        points.push(b);
        Self::from_points(points)
    }

    /// A fine uniform grid standing for the real interval `[a, b]`.
    ///
    /// `resolution` is the number of subintervals; every gap is dense.
    pub fn dense_interval(a: f64, b: f64, resolution: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(TimeScaleError::InvalidInterval { a, b });
        }
        if resolution < 2 {
            return Err(TimeScaleError::InvalidResolution(resolution));
        }
        let h = (b - a) / resolution as f64;
        let mut points: Vec<f64> = (0..resolution).map(|k| a + k as f64 * h).collect();
        points.push(b);
        Self::new(points, vec![GapKind::Dense; resolution])
    }

    /// Number of points in this scale (or view).
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false: a scale has at least one point.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn points(&self) -> &[f64] {
        &self.points[..self.len]
    }

    pub fn gaps(&self) -> &[GapKind] {
        &self.gaps[..self.len.saturating_sub(1)]
    }

    pub fn point(&self, i: usize) -> Result<f64> {
        self.check(i)?;
        Ok(self.points[i])
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.len - 1]
    }

    /// The full scale this view was cut from.
    pub fn root(&self) -> TimeScale {
        TimeScale {
            points: Arc::clone(&self.points),
            gaps: Arc::clone(&self.gaps),
            len: self.points.len(),
        }
    }

    /// True when both scales share the same underlying point storage.
    pub fn shares_points_with(&self, other: &TimeScale) -> bool {
        Arc::ptr_eq(&self.points, &other.points)
    }

    /// True when every gap of the underlying scale is scattered.
    pub fn is_exact_discrete(&self) -> bool {
        self.gaps.iter().all(|g| *g == GapKind::Scattered)
    }

    /// True when every gap of the underlying scale is dense.
    pub fn is_all_dense(&self) -> bool {
        self.gaps.iter().all(|g| *g == GapKind::Dense)
    }

    /// Largest spacing over the dense gaps of the underlying scale, if any.
    pub fn dense_spacing(&self) -> Option<f64> {
        self.gaps
            .iter()
            .enumerate()
            .filter(|(_, g)| **g == GapKind::Dense)
            .map(|(i, _)| self.points[i + 1] - self.points[i])
            .fold(None, |acc: Option<f64>, h| {
                Some(acc.map_or(h, |m| m.max(h)))
            })
    }

    /// Kind of the gap to the right of point `i`, `None` at the last point of
    /// this view.
    pub fn right_gap(&self, i: usize) -> Option<GapKind> {
        if i + 1 < self.len {
            Some(self.gaps[i])
        } else {
            None
        }
    }

    /// Kind of the gap to the left of point `i`, `None` at the first point.
    pub fn left_gap(&self, i: usize) -> Option<GapKind> {
        if i > 0 && i < self.len {
            Some(self.gaps[i - 1])
        } else {
            None
        }
    }

    /// Forward jump operator on indices.
    pub fn sigma(&self, i: usize) -> Result<usize> {
        self.check(i)?;
        Ok(match self.right_gap(i) {
            Some(GapKind::Scattered) => i + 1,
            _ => i,
        })
    }

    /// Backward jump operator on indices.
    pub fn rho(&self, i: usize) -> Result<usize> {
        self.check(i)?;
        Ok(match self.left_gap(i) {
            Some(GapKind::Scattered) => i - 1,
            _ => i,
        })
    }

    /// Forward graininess. Zero on dense gaps and at the last point.
    pub fn mu(&self, i: usize) -> Result<f64> {
        let s = self.sigma(i)?;
        Ok(self.points[s] - self.points[i])
    }

    pub fn classify(&self, i: usize) -> Result<PointClass> {
        self.check(i)?;
        let side = |g: Option<GapKind>| match g {
            Some(GapKind::Scattered) => Side::Scattered,
            _ => Side::Dense,
        };
        Ok(PointClass {
            left: side(self.left_gap(i)),
            right: side(self.right_gap(i)),
        })
    }

    /// `T^κ`: drops the maximum when it is left-scattered.
    pub fn kappa(&self) -> TimeScale {
        let len = match self.left_gap(self.len - 1) {
            Some(GapKind::Scattered) => self.len - 1,
            _ => self.len,
        };
        TimeScale {
            points: Arc::clone(&self.points),
            gaps: Arc::clone(&self.gaps),
            len,
        }
    }

    /// Index of the point equal to `t` within `1e-12 * max(1, |t|)`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = POINT_MATCH_TOL * t.abs().max(1.0);
        let pts = self.points();
        let pos = pts.partition_point(|&p| p < t - tol);
        (pos < pts.len() && (pts[pos] - t).abs() <= tol).then_some(pos)
    }

    fn spacing(&self, i: usize) -> f64 {
        self.points[i + 1] - self.points[i]
    }

    fn check(&self, i: usize) -> Result<()> {
        if i < self.len {
            Ok(())
        } else {
            Err(TimeScaleError::IndexOutOfRange {
                index: i,
                len: self.len,
            })
        }
    }
}

/// Serialized form of a time scale, including the shorthand constructors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleSpec {
    Explicit {
        points: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gaps: Option<Vec<GapKind>>,
    },
    Uniform {
        uniform: UniformSpec,
    },
    Dense {
        dense: DenseSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformSpec {
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseSpec {
    pub a: f64,
    pub b: f64,
    pub resolution: usize,
}

impl ScaleSpec {
    pub fn build(&self) -> Result<TimeScale> {
        match self {
            ScaleSpec::Explicit { points, gaps } => match gaps {
                Some(g) => TimeScale::new(points.clone(), g.clone()),
                None => TimeScale::from_points(points.clone()),
            },
            ScaleSpec::Uniform { uniform: u } => TimeScale::uniform(u.a, u.b, u.h),
            ScaleSpec::Dense { dense: d } => TimeScale::dense_interval(d.a, d.b, d.resolution),
        }
    }
}

impl From<&TimeScale> for ScaleSpec {
    fn from(scale: &TimeScale) -> Self {
        ScaleSpec::Explicit {
            points: scale.points().to_vec(),
            gaps: Some(scale.gaps().to_vec()),
        }
    }
}

impl Serialize for TimeScale {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        ScaleSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TimeScale {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let spec = ScaleSpec::deserialize(deserializer)?;
        spec.build().map_err(serde::de::Error::custom)
    }
}

/// Samples either as a flat list (dimension 1) or as one row per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Samples {
    Scalar(Vec<f64>),
    Vector(Vec<Vec<f64>>),
}

impl Samples {
    pub fn rows(&self) -> Vec<Vec<f64>> {
        match self {
            Samples::Scalar(v) => v.iter().map(|x| vec![*x]).collect(),
            Samples::Vector(rows) => rows.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Samples::Scalar(v) => v.len(),
            Samples::Vector(rows) => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat when every row has one entry, nested otherwise.
    pub fn from_rows(dim: usize, flat: &[f64]) -> Self {
        if dim == 1 {
            Samples::Scalar(flat.to_vec())
        } else {
            Samples::Vector(flat.chunks(dim).map(<[f64]>::to_vec).collect())
        }
    }
}

/// A vector-valued function sampled at every point of a time scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    scale: TimeScale,
    dim: usize,
    values: Vec<f64>,
    approximate: bool,
}

impl GridFunction {
    /// `values` is row-major: `dim` entries per point.
    pub fn new(scale: TimeScale, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(TimeScaleError::ZeroDimension);
        }
        let expected = scale.len() * dim;
        if values.len() != expected {
            return Err(TimeScaleError::ValueCount {
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            scale,
            dim,
            values,
            approximate: false,
        })
    }

    pub fn scalar(scale: TimeScale, values: Vec<f64>) -> Result<Self> {
        Self::new(scale, 1, values)
    }

    pub fn from_rows(scale: TimeScale, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(TimeScaleError::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Self::new(scale, dim, rows.concat())
    }

    /// Samples `f` at every point of `scale`.
    pub fn from_fn(
        scale: TimeScale,
        dim: usize,
        mut f: impl FnMut(f64) -> Vec<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(scale.len() * dim);
        for &t in scale.points() {
            let row = f(t);
            if row.len() != dim {
                return Err(TimeScaleError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            values.extend(row);
        }
        Self::new(scale, dim, values)
    }

    pub fn scale(&self) -> &TimeScale {
        &self.scale
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.scale.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scale.is_empty()
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.dim)
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    /// Set when any dense gap contributed to this function.
    pub fn is_approximate(&self) -> bool {
        self.approximate
    }

    pub fn with_approximate(mut self, approximate: bool) -> Self {
        self.approximate = approximate;
        self
    }

    /// `f^σ = f ∘ σ` on the same scale.
    pub fn shifted(&self) -> GridFunction {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.len() {
            let s = self.scale.sigma(i).expect("index in range");
            values.extend_from_slice(self.at(s));
        }
        GridFunction {
            scale: self.scale.clone(),
            dim: self.dim,
            values,
            approximate: self.approximate,
        }
    }

    /// The same values placed on another scale with the same number of points.
    pub fn rebase(&self, scale: TimeScale) -> Result<GridFunction> {
        if scale.len() != self.len() {
            return Err(TimeScaleError::ValueCount {
                expected: scale.len() * self.dim,
                got: self.values.len(),
            });
        }
        Ok(GridFunction {
            scale,
            dim: self.dim,
            values: self.values.clone(),
            approximate: self.approximate,
        })
    }

    /// Restriction to the first `len` points (a view of the same scale).
    pub fn restrict_to(&self, scale: &TimeScale) -> Result<GridFunction> {
        if !scale.shares_points_with(&self.scale) || scale.len() > self.len() {
            return Err(TimeScaleError::ScaleMismatch);
        }
        Ok(GridFunction {
            scale: scale.clone(),
            dim: self.dim,
            values: self.values[..scale.len() * self.dim].to_vec(),
            approximate: self.approximate,
        })
    }

    pub fn samples(&self) -> Samples {
        Samples::from_rows(self.dim, &self.values)
    }

    fn map_rows(&self, other: &GridFunction, op: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.scale != other.scale {
            return Err(TimeScaleError::ScaleMismatch);
        }
        if self.dim != other.dim {
            return Err(TimeScaleError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| op(*a, *b))
            .collect();
        Ok(GridFunction {
            scale: self.scale.clone(),
            dim: self.dim,
            values,
            approximate: self.approximate || other.approximate,
        })
    }

    /// Pointwise product, componentwise for vector functions.
    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.map_rows(other, |a, b| a * b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.map_rows(other, |a, b| a + b)
    }
}

/// Delta derivative of `f`, defined on `T^κ` of `f`'s scale.
///
/// Right-scattered points use the exact difference quotient over the jump.
/// Right-dense points use the forward difference inside the dense run; the
/// terminal point of a dense run with no right neighbour extrapolates the two
/// preceding forward differences linearly (backward difference when only one
/// is available), so the first-order error term is the same at every dense
/// point.
pub fn delta_derivative(f: &GridFunction) -> GridFunction {
    let scale = f.scale();
    let kappa = scale.kappa();
    let dim = f.dim();
    let mut values = Vec::with_capacity(kappa.len() * dim);
    let mut approximate = f.is_approximate();
    let quotient = |i: usize, k: usize| (f.at(i + 1)[k] - f.at(i)[k]) / scale.spacing(i);

    for i in 0..kappa.len() {
        match scale.right_gap(i) {
            Some(GapKind::Scattered) => {
                values.extend((0..dim).map(|k| quotient(i, k)));
            }
            Some(GapKind::Dense) => {
                approximate = true;
                values.extend((0..dim).map(|k| quotient(i, k)));
            }
            None => {
                // terminal right-dense point; kappa keeps it only when left-dense
                approximate = true;
                let two_back = i >= 2 && scale.left_gap(i - 1) == Some(GapKind::Dense);
                if two_back {
                    let m1 = 0.5 * (scale.points[i - 1] + scale.points[i]);
                    let m2 = 0.5 * (scale.points[i - 2] + scale.points[i - 1]);
                    let target = scale.points[i] + 0.5 * scale.spacing(i - 1);
                    let w = (target - m1) / (m1 - m2);
                    values.extend((0..dim).map(|k| {
                        let d1 = quotient(i - 1, k);
                        let d2 = quotient(i - 2, k);
                        d1 + w * (d1 - d2)
                    }));
                } else {
                    values.extend((0..dim).map(|k| quotient(i - 1, k)));
                }
            }
        }
    }

    GridFunction {
        scale: kappa,
        dim,
        values,
        approximate,
    }
}

/// Delta integral of `f` from point `from` to point `to` (indices into the
/// underlying scale).
///
/// Scattered gaps contribute `f(t_i) μ(t_i)`, dense gaps the trapezoid over
/// the segment. `f` may live on a κ-view: a scattered gap only needs the
/// value at its left point.
pub fn delta_integral(f: &GridFunction, from: usize, to: usize) -> Result<Vec<f64>> {
    Ok(delta_integral_flagged(f, from, to)?.0)
}

/// [`delta_integral`] together with a flag set when a dense gap contributed.
pub fn delta_integral_flagged(
    f: &GridFunction,
    from: usize,
    to: usize,
) -> Result<(Vec<f64>, bool)> {
    if from > to {
        return Err(TimeScaleError::ReversedRange { from, to });
    }
    let scale = f.scale();
    let root_len = scale.points.len();
    if to >= root_len {
        return Err(TimeScaleError::IndexOutOfRange {
            index: to,
            len: root_len,
        });
    }
    let dim = f.dim();
    let mut sum = vec![0.0; dim];
    let mut approximate = f.is_approximate();
    for i in from..to {
        let h = scale.spacing(i);
        match scale.gaps[i] {
            GapKind::Scattered => {
                if i >= f.len() {
                    return Err(TimeScaleError::OutsideDomain {
                        from,
                        to,
                        missing: i,
                    });
                }
                for (s, x) in sum.iter_mut().zip(f.at(i)) {
                    *s += x * h;
                }
            }
            GapKind::Dense => {
                if i + 1 >= f.len() {
                    return Err(TimeScaleError::OutsideDomain {
                        from,
                        to,
                        missing: i + 1,
                    });
                }
                approximate = true;
                for ((s, x), y) in sum.iter_mut().zip(f.at(i)).zip(f.at(i + 1)) {
                    *s += 0.5 * (x + y) * h;
                }
            }
        }
    }
    Ok((sum, approximate))
}

/// Result of moving a function along a strictly increasing change of time.
#[derive(Debug, Clone)]
pub struct Pushforward {
    /// `ν(T)`, with the gap kinds of `T`.
    pub image: TimeScale,
    /// The values of `f` placed on the image scale: `f̃(ν(t_i)) = f(t_i)`.
    pub transported: GridFunction,
    /// `ν^Δ` on `T^κ`.
    pub nu_delta: GridFunction,
}

/// Image of `T` under a strictly increasing scalar `nu`, with `f`
/// transported along.
pub fn pushforward(nu: &GridFunction, f: &GridFunction) -> Result<Pushforward> {
    if nu.dim() != 1 {
        return Err(TimeScaleError::NotScalar(nu.dim()));
    }
    if nu.scale() != f.scale() {
        return Err(TimeScaleError::ScaleMismatch);
    }
    let vals = nu.values();
    if let Some(index) = vals.windows(2).position(|w| w[1] <= w[0]) {
        return Err(TimeScaleError::NotStrictlyIncreasing { index });
    }
    let image = TimeScale::new(vals.to_vec(), nu.scale().gaps().to_vec())?;
    let transported = f.rebase(image.clone())?;
    Ok(Pushforward {
        image,
        transported,
        nu_delta: delta_derivative(nu),
    })
}
