//! Grids, sampled scalar fields, and analytic field families.
//!
//! Everything downstream evaluates on or compares against a [`ScalarField`]:
//! complex samples on a uniform rectilinear [`GridSpec`], stored row-major
//! (last axis fastest). Fields are complex even when the data is real; a
//! vanishing imaginary part doubles as a consistency check.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on total node count (keeps accidental huge grids from
/// exhausting memory).
pub const DEFAULT_NODE_CAP: usize = 1 << 24;

/// One uniformly spaced axis of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, min: f64, max: f64, points: usize) -> Self {
        Axis {
            name: name.into(),
            min,
            max,
            points,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    /// Coordinate of node `i`; computed as `min + i*h` so repeated runs are
    /// bit-identical.
    pub fn coord(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    /// Axes named `r` or `rho` (or the Greek letter) denote a cylindrical
    /// radius and pick up the `(1/r) d/dr` term in residual stencils.
    pub fn is_radial(&self) -> bool {
        matches!(self.name.as_str(), "r" | "rho" | "ρ")
    }
}

/// A uniform rectilinear grid over 1 to 4 named axes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        Self::with_cap(axes, DEFAULT_NODE_CAP)
    }

    pub fn with_cap(axes: Vec<Axis>, cap: usize) -> Result<Self> {
        if axes.is_empty() || axes.len() > 4 {
            return Err(Error::InvalidGrid(format!(
                "expected 1..=4 axes, got {}",
                axes.len()
            )));
        }
        let mut total: usize = 1;
        for ax in &axes {
            if !(ax.min.is_finite() && ax.max.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "axis `{}` has non-finite bounds",
                    ax.name
                )));
            }
            if ax.points < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis `{}` needs at least 2 points, got {}",
                    ax.name, ax.points
                )));
            }
            if ax.max <= ax.min {
                return Err(Error::InvalidGrid(format!(
                    "axis `{}` needs max > min, got [{}, {}]",
                    ax.name, ax.min, ax.max
                )));
            }
            total = total
                .checked_mul(ax.points)
                .ok_or_else(|| Error::InvalidGrid("node count overflow".into()))?;
        }
        if total > cap {
            return Err(Error::InvalidGrid(format!(
                "total node count {} exceeds cap {}",
                total, cap
            )));
        }
        for i in 0..axes.len() {
            for j in (i + 1)..axes.len() {
                if axes[i].name == axes[j].name {
                    return Err(Error::InvalidGrid(format!(
                        "duplicate axis name `{}`",
                        axes[i].name
                    )));
                }
            }
        }
        Ok(GridSpec { axes })
    }

    /// Convenience constructor for a 1-axis grid.
    pub fn line(name: &str, min: f64, max: f64, points: usize) -> Result<Self> {
        Self::new(vec![Axis::new(name, min, max, points)])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis_index(&self, name: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.name == name)
    }

    pub fn axis(&self, name: &str) -> Result<&Axis> {
        self.axes
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    /// Decode a flat row-major index into per-axis node indices.
    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dims()];
        let mut rem = flat;
        for (k, ax) in self.axes.iter().enumerate().rev() {
            idx[k] = rem % ax.points;
            rem /= ax.points;
        }
        idx
    }

    /// Flat row-major index of per-axis node indices (last axis fastest).
    pub fn ravel(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims());
        let mut flat = 0usize;
        for (k, ax) in self.axes.iter().enumerate() {
            flat = flat * ax.points + idx[k];
        }
        flat
    }

    /// Physical coordinates of a flat node index.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let idx = self.unravel(flat);
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, ax)| ax.coord(i))
            .collect()
    }

    /// Grid with one axis removed (for slicing).
    pub fn without_axis(&self, axis_idx: usize) -> Result<GridSpec> {
        if self.dims() == 1 {
            return Err(Error::DegenerateSlice);
        }
        let mut axes = self.axes.clone();
        axes.remove(axis_idx);
        GridSpec::new(axes)
    }

    /// Largest |x| over the grid's corner points.
    pub fn bounding_radius(&self) -> f64 {
        let mut r2: f64 = 0.0;
        let corners = 1usize << self.dims();
        for c in 0..corners {
            let mut s = 0.0;
            for (k, ax) in self.axes.iter().enumerate() {
                let v = if (c >> k) & 1 == 0 { ax.min } else { ax.max };
                s += v * v;
            }
            r2 = r2.max(s);
        }
        r2.sqrt()
    }
}

/// Complex samples of a function on a [`GridSpec`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ScalarField {
    /// Build a field, rejecting any NaN/Inf sample.
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "value count {} does not match grid node count {}",
                values.len(),
                grid.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite {
                    index: i,
                    coords: grid.coords(i),
                });
            }
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        ScalarField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, flat: usize) -> Complex64 {
        self.values[flat]
    }

    pub fn value_at(&self, idx: &[usize]) -> Complex64 {
        self.values[self.grid.ravel(idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Extract the hyperplane `axis = index` as a field with one fewer axis.
    pub fn slice(&self, axis: &str, index: usize) -> Result<ScalarField> {
        let ai = self
            .grid
            .axis_index(axis)
            .ok_or_else(|| Error::UnknownAxis(axis.to_string()))?;
        let points = self.grid.axes()[ai].points;
        if index >= points {
            return Err(Error::IndexOutOfRange {
                axis: axis.to_string(),
                index,
                points,
            });
        }
        let sub = self.grid.without_axis(ai)?;
        let mut out = Vec::with_capacity(sub.len());
        for flat in 0..sub.len() {
            let sub_idx = sub.unravel(flat);
            let mut full_idx = Vec::with_capacity(self.grid.dims());
            full_idx.extend_from_slice(&sub_idx[..ai]);
            full_idx.push(index);
            full_idx.extend_from_slice(&sub_idx[ai..]);
            out.push(self.values[self.grid.ravel(&full_idx)]);
        }
        ScalarField::new(sub, out)
    }
}

/// Slice a field on the hyperplane `axis = index` (free-function form).
pub fn field_slice(field: &ScalarField, axis: &str, index: usize) -> Result<ScalarField> {
    field.slice(axis, index)
}

/// Closed-form families used as superposition profiles, sources, and
/// oracles. One-argument families evaluate at complex points; `Gaussian`,
/// `HarmonicPoly` and `PolyNd` evaluate at real points of their arity.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticFamily {
    /// `c0 + c1 z + ... + cd z^d`, degree <= 16.
    Polynomial { coeffs: Vec<Complex64> },
    /// `exp(-|x - center|^2 / (2 sigma^2))`; arity = `center.len()`.
    Gaussian { center: Vec<f64>, sigma: f64 },
    /// `a exp(-k0 z)`; decaying for Re z > 0.
    DampedExponential { amplitude: f64, decay: f64 },
    /// `1 / (z - pole)`.
    RationalInverse { pole: Complex64 },
    /// The degree-n harmonic polynomial obtained by averaging
    /// `(z - i(x cos phi + y sin phi))^n` over the circle; arity 3.
    HarmonicPoly { degree: u32 },
    /// Multivariate polynomial `sum c * x1^e1 ... xd^ed`; covers sources
    /// such as `|x|^2` that the one-argument families cannot express.
    PolyNd {
        dims: usize,
        terms: Vec<(Complex64, Vec<u32>)>,
    },
}

impl AnalyticFamily {
    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidFamily("polynomial needs coefficients".into()));
        }
        if coeffs.len() > 17 {
            return Err(Error::InvalidFamily(format!(
                "polynomial degree {} exceeds 16",
                coeffs.len() - 1
            )));
        }
        Ok(AnalyticFamily::Polynomial { coeffs })
    }

    pub fn polynomial_real(coeffs: &[f64]) -> Result<Self> {
        Self::polynomial(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: f64) -> Self {
        AnalyticFamily::Polynomial {
            coeffs: vec![Complex64::new(c, 0.0)],
        }
    }

    pub fn gaussian(center: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidFamily(format!(
                "gaussian width must be positive, got {sigma}"
            )));
        }
        if center.is_empty() || center.len() > 4 {
            return Err(Error::InvalidFamily("gaussian arity must be 1..=4".into()));
        }
        Ok(AnalyticFamily::Gaussian { center, sigma })
    }

    /// `a exp(-k0 z)`. Either sign of `k0` is constructible; the
    /// superposition operations enforce the sign that keeps their own
    /// half-space convergent.
    pub fn damped_exponential(amplitude: f64, decay: f64) -> Result<Self> {
        if !decay.is_finite() || !amplitude.is_finite() {
            return Err(Error::InvalidFamily(
                "damped exponential needs finite parameters".into(),
            ));
        }
        Ok(AnalyticFamily::DampedExponential { amplitude, decay })
    }

    pub fn rational_inverse(pole: Complex64) -> Self {
        AnalyticFamily::RationalInverse { pole }
    }

    pub fn harmonic_poly(degree: u32) -> Result<Self> {
        if degree > 16 {
            return Err(Error::InvalidFamily(format!(
                "harmonic polynomial degree {degree} exceeds 16"
            )));
        }
        Ok(AnalyticFamily::HarmonicPoly { degree })
    }

    pub fn poly_nd(dims: usize, terms: Vec<(Complex64, Vec<u32>)>) -> Result<Self> {
        if dims == 0 || dims > 4 {
            return Err(Error::InvalidFamily("poly-nd arity must be 1..=4".into()));
        }
        for (_, exps) in &terms {
            if exps.len() != dims {
                return Err(Error::InvalidFamily(
                    "poly-nd exponent tuple length must equal dims".into(),
                ));
            }
        }
        Ok(AnalyticFamily::PolyNd { dims, terms })
    }

    /// Number of coordinates the family consumes.
    pub fn arity(&self) -> usize {
        match self {
            AnalyticFamily::Polynomial { .. }
            | AnalyticFamily::DampedExponential { .. }
            | AnalyticFamily::RationalInverse { .. } => 1,
            AnalyticFamily::Gaussian { center, .. } => center.len(),
            AnalyticFamily::HarmonicPoly { .. } => 3,
            AnalyticFamily::PolyNd { dims, .. } => *dims,
        }
    }

    /// Whether the family extends off the real axis (one complex argument).
    pub fn is_complex_evaluable(&self) -> bool {
        matches!(
            self,
            AnalyticFamily::Polynomial { .. }
                | AnalyticFamily::DampedExponential { .. }
                | AnalyticFamily::RationalInverse { .. }
        ) || (matches!(self, AnalyticFamily::Gaussian { center, .. } if center.len() == 1))
    }

    /// Evaluate at a single complex argument (arity-1 families only).
    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        match self {
            AnalyticFamily::Polynomial { coeffs } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for &c in coeffs.iter().rev() {
                    acc = acc * z + c;
                }
                Ok(acc)
            }
            AnalyticFamily::Gaussian { center, sigma } if center.len() == 1 => {
                let d = z - center[0];
                Ok((-d * d / (2.0 * sigma * sigma)).exp())
            }
            AnalyticFamily::DampedExponential { amplitude, decay } => {
                Ok(*amplitude * (-*decay * z).exp())
            }
            AnalyticFamily::RationalInverse { pole } => {
                let d = z - pole;
                // within rounding of the pole counts as on it
                if d.norm() <= 1e-13 * (1.0 + z.norm() + pole.norm()) {
                    return Err(Error::SingularSample {
                        what: "rational-inverse pole".into(),
                        coords: vec![z.re, z.im],
                    });
                }
                Ok(Complex64::new(1.0, 0.0) / d)
            }
            _ => Err(Error::ComplexArgument(format!(
                "family of arity {} is not complex-evaluable",
                self.arity()
            ))),
        }
    }

    /// d/dz of an arity-1 family.
    pub fn derivative_complex(&self, z: Complex64) -> Result<Complex64> {
        match self {
            AnalyticFamily::Polynomial { coeffs } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
                    acc = acc * z + c * k as f64;
                }
                Ok(acc)
            }
            AnalyticFamily::Gaussian { center, sigma } if center.len() == 1 => {
                let d = z - center[0];
                let s2 = sigma * sigma;
                Ok(-(d / s2) * (-d * d / (2.0 * s2)).exp())
            }
            AnalyticFamily::DampedExponential { amplitude, decay } => {
                Ok(-*decay * *amplitude * (-*decay * z).exp())
            }
            AnalyticFamily::RationalInverse { pole } => {
                let d = z - pole;
                if d.norm() <= 1e-13 * (1.0 + z.norm() + pole.norm()) {
                    return Err(Error::SingularSample {
                        what: "rational-inverse pole".into(),
                        coords: vec![z.re, z.im],
                    });
                }
                Ok(-Complex64::new(1.0, 0.0) / (d * d))
            }
            _ => Err(Error::ComplexArgument(format!(
                "family of arity {} is not complex-evaluable",
                self.arity()
            ))),
        }
    }

    /// Evaluate at a real point whose length matches the arity.
    pub fn eval_real(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.arity() {
            return Err(Error::InvalidFamily(format!(
                "family arity {} but point has {} coordinates",
                self.arity(),
                x.len()
            )));
        }
        match self {
            AnalyticFamily::Gaussian { center, sigma } => {
                let d2: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum();
                Ok(Complex64::new((-d2 / (2.0 * sigma * sigma)).exp(), 0.0))
            }
            AnalyticFamily::HarmonicPoly { degree } => {
                Ok(eval_harmonic_poly(*degree, x[0], x[1], x[2]))
            }
            AnalyticFamily::PolyNd { terms, .. } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, exps) in terms {
                    let mut t = *c;
                    for (xi, &e) in x.iter().zip(exps) {
                        t *= xi.powi(e as i32);
                    }
                    acc += t;
                }
                Ok(acc)
            }
            _ => self.eval_complex(Complex64::new(x[0], 0.0)),
        }
    }

    /// Restrict a multivariate family to the hyperplane `axis = value`,
    /// producing a family of one lower arity. Only `PolyNd` supports an
    /// exact restriction.
    pub fn restrict(&self, axis: usize, value: f64) -> Result<AnalyticFamily> {
        match self {
            AnalyticFamily::PolyNd { dims, terms } => {
                if axis >= *dims {
                    return Err(Error::InvalidFamily(format!(
                        "restriction axis {axis} out of range for arity {dims}"
                    )));
                }
                if *dims == 1 {
                    return Err(Error::InvalidFamily(
                        "cannot restrict an arity-1 family".into(),
                    ));
                }
                let new_terms = terms
                    .iter()
                    .map(|(c, exps)| {
                        let scale = value.powi(exps[axis] as i32);
                        let mut e = exps.clone();
                        e.remove(axis);
                        (*c * scale, e)
                    })
                    .collect();
                AnalyticFamily::poly_nd(dims - 1, new_terms)
            }
            _ => Err(Error::InvalidFamily(
                "only poly-nd supports exact hyperplane restriction".into(),
            )),
        }
    }
}

/// Average of `(z - i(x cos phi + y sin phi))^n` over `phi` with measure
/// `d phi / (2 pi)`: only even powers of the rotated coordinate survive,
/// with exact circle moments `binom(2j, j) / 4^j`.
pub(crate) fn eval_harmonic_poly(degree: u32, x: f64, y: f64, z: f64) -> Complex64 {
    let rho2 = x * x + y * y;
    let n = degree as i64;
    let mut acc = 0.0f64;
    let mut j = 0i64;
    while 2 * j <= n {
        let c = binomial(n, 2 * j) * binomial(2 * j, j) / 4f64.powi(j as i32);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * c * rho2.powi(j as i32) * z.powi((n - 2 * j) as i32);
        j += 1;
    }
    Complex64::new(acc, 0.0)
}

pub(crate) fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Sample an analytic family on a grid of matching arity.
pub fn sample_analytic(family: &AnalyticFamily, grid: &GridSpec) -> Result<ScalarField> {
    if family.arity() != grid.dims() {
        return Err(Error::InvalidFamily(format!(
            "family arity {} does not match grid with {} axes",
            family.arity(),
            grid.dims()
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        let x = grid.coords(flat);
        let v = family.eval_real(&x).map_err(|e| match e {
            Error::SingularSample { what, .. } => Error::SingularSample { what, coords: x.clone() },
            other => other,
        })?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::SingularSample {
                what: "analytic family".into(),
                coords: x,
            });
        }
        values.push(v);
    }
    ScalarField::new(grid.clone(), values)
}

/// Error norms between a candidate field and a reference.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub linf_abs: f64,
    pub linf_rel: f64,
    pub l2_rel: f64,
    pub worst_point: Vec<f64>,
}

/// Relative-error floor: denominators are clamped to this value.
pub const REL_FLOOR: f64 = 1e-30;

impl ErrorReport {
    /// Norms of `a - b` with `b` as the reference.
    pub fn between(a: &ScalarField, b: &ScalarField) -> Result<ErrorReport> {
        if a.grid() != b.grid() {
            return Err(Error::GridMismatch(
                "compared fields live on different grids".into(),
            ));
        }
        let mut linf_abs = 0.0f64;
        let mut linf_rel = 0.0f64;
        let mut worst = 0usize;
        let mut num2 = 0.0f64;
        let mut den2 = 0.0f64;
        for (i, (&va, &vb)) in a.values().iter().zip(b.values()).enumerate() {
            let d = (va - vb).norm();
            if d > linf_abs {
                linf_abs = d;
                worst = i;
            }
            let rel = d / vb.norm().max(REL_FLOOR);
            if rel > linf_rel {
                linf_rel = rel;
            }
            num2 += d * d;
            den2 += vb.norm_sqr();
        }
        Ok(ErrorReport {
            linf_abs,
            linf_rel,
            l2_rel: num2.sqrt() / den2.sqrt().max(REL_FLOOR),
            worst_point: a.grid().coords(worst),
        })
    }
}
