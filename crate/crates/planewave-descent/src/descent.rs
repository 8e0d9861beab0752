//! Classical singular-kernel representations: the spherical average form of
//! the retarded potential, the two-dimensional disk formula with its
//! light-cone singularity flattened out, spherical means, and the static
//! source integrals with their analytic-segment counterpart.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{AnalyticFamily, GridSpec, ScalarField};
use crate::numerics::{pairwise_sum, sample_field_parallel};
use crate::rotations::{gauss_legendre_on, DirectionSet, TWO_PI};

/// A source term evaluable at spatial points. [`AnalyticFamily`] is the
/// canonical implementation; closures serve as test oracles.
pub trait SourceFn: Sync {
    fn eval_source(&self, x: &[f64]) -> Result<Complex64>;
}

impl SourceFn for AnalyticFamily {
    fn eval_source(&self, x: &[f64]) -> Result<Complex64> {
        self.eval_real(x)
    }
}

impl<F> SourceFn for F
where
    F: Fn(&[f64]) -> Result<Complex64> + Sync,
{
    fn eval_source(&self, x: &[f64]) -> Result<Complex64> {
        self(x)
    }
}

/// Sphere average form of the retarded potential:
/// `u(t, x) = t * sum_j w_j psi(x + t n_j)`, so `u_t(0, x) = 4 pi psi(x)`.
pub fn kirchhoff13(
    psi: &dyn SourceFn,
    dirs: &DirectionSet,
    t: f64,
    x: &[f64; 3],
) -> Result<Complex64> {
    if dirs.dim() != 3 {
        return Err(Error::InvalidQuadrature(
            "retarded-potential average integrates over the sphere".into(),
        ));
    }
    if t < 0.0 {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let mut terms = Vec::with_capacity(dirs.len());
    for (n, w) in dirs.iter() {
        let p = [
            x[0] + t * n.components()[0],
            x[1] + t * n.components()[1],
            x[2] + t * n.components()[2],
        ];
        terms.push(w * psi.eval_source(&p)?);
    }
    Ok(t * pairwise_sum(&terms))
}

/// Sample the retarded-potential average on a (t, x, y, z) grid.
pub fn kirchhoff13_field(
    psi: &dyn SourceFn,
    dirs: &DirectionSet,
    grid: &GridSpec,
) -> Result<ScalarField> {
    let idx = grid_axes(grid, &["t", "x", "y", "z"])?;
    sample_field_parallel(grid, &|c: &[f64]| {
        kirchhoff13(psi, dirs, c[idx[0]], &[c[idx[1]], c[idx[2]], c[idx[3]]])
    })
}

/// Disk formula for the (1+2)-dimensional initial-value problem, with
/// `u_t(0, x) = 2 pi psi(x)`. The light-cone singularity of the kernel is
/// removed exactly by the substitution `rho = t sin(alpha)`:
/// `u = t int_0^{2pi} int_0^{pi/2} psi(x + t sin(alpha) e(theta)) sin(alpha) d alpha d theta`.
pub fn poisson12(
    psi: &dyn SourceFn,
    t: f64,
    x: &[f64; 2],
    radial_nodes: usize,
    angular_nodes: usize,
) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if radial_nodes < 1 || angular_nodes < 2 {
        return Err(Error::InvalidQuadrature(
            "disk formula needs at least 1 radial and 2 angular nodes".into(),
        ));
    }
    let (alphas, walphas) = gauss_legendre_on(0.0, std::f64::consts::FRAC_PI_2, radial_nodes);
    let wtheta = TWO_PI / angular_nodes as f64;
    let mut terms = Vec::with_capacity(radial_nodes * angular_nodes);
    for (a, wa) in alphas.iter().zip(&walphas) {
        let rho = t * a.sin();
        for j in 0..angular_nodes {
            let theta = TWO_PI * j as f64 / angular_nodes as f64;
            let p = [x[0] + rho * theta.cos(), x[1] + rho * theta.sin()];
            terms.push(wa * wtheta * a.sin() * psi.eval_source(&p)?);
        }
    }
    Ok(t * pairwise_sum(&terms))
}

/// Sample the disk formula on a (t, x, y) grid.
pub fn poisson12_field(
    psi: &dyn SourceFn,
    grid: &GridSpec,
    radial_nodes: usize,
    angular_nodes: usize,
) -> Result<ScalarField> {
    let idx = grid_axes(grid, &["t", "x", "y"])?;
    sample_field_parallel(grid, &|c: &[f64]| {
        poisson12(
            psi,
            c[idx[0]],
            &[c[idx[1]], c[idx[2]]],
            radial_nodes,
            angular_nodes,
        )
    })
}

/// Normalized spherical mean `Q(x, xi) = (1/4pi) sum_j w_j psi(x + xi n_j)`,
/// with `Q(x, 0) = psi(x)`.
pub fn spherical_mean(
    psi: &dyn SourceFn,
    x: &[f64; 3],
    xi: f64,
    dirs: &DirectionSet,
) -> Result<Complex64> {
    if dirs.dim() != 3 {
        return Err(Error::InvalidQuadrature(
            "spherical mean integrates over the sphere".into(),
        ));
    }
    if xi < 0.0 {
        return Err(Error::Domain(format!(
            "sphere radius must be nonnegative, got {xi}"
        )));
    }
    let mut terms = Vec::with_capacity(dirs.len());
    for (n, w) in dirs.iter() {
        let p = [
            x[0] + xi * n.components()[0],
            x[1] + xi * n.components()[1],
            x[2] + xi * n.components()[2],
        ];
        terms.push(w * psi.eval_source(&p)?);
    }
    Ok(pairwise_sum(&terms) / (2.0 * TWO_PI))
}

/// Odd-dimensional initial-value solution. For N = 3 the time-derivative
/// cascade collapses to `u(t, x) = t Q(x, t)` with `u(0) = 0`,
/// `u_t(0) = psi`.
pub fn odd_n_point(
    psi: &dyn SourceFn,
    n: usize,
    dirs: &DirectionSet,
    t: f64,
    x: &[f64; 3],
) -> Result<Complex64> {
    if n != 3 {
        return Err(Error::UnsupportedDimension {
            got: n,
            supported: "N = 3 (the only implemented odd case)",
        });
    }
    Ok(t * spherical_mean(psi, x, t.abs(), dirs)?)
}

/// Sample the odd-N solution on a (t, x, y, z) grid.
pub fn odd_n_solution(
    psi: &dyn SourceFn,
    n: usize,
    dirs: &DirectionSet,
    grid: &GridSpec,
) -> Result<ScalarField> {
    if n != 3 {
        return Err(Error::UnsupportedDimension {
            got: n,
            supported: "N = 3 (the only implemented odd case)",
        });
    }
    let idx = grid_axes(grid, &["t", "x", "y", "z"])?;
    sample_field_parallel(grid, &|c: &[f64]| {
        odd_n_point(psi, 3, dirs, c[idx[0]], &[c[idx[1]], c[idx[2]], c[idx[3]]])
    })
}

/// Rectangular support of a planar source.
#[derive(Debug, Clone, Copy)]
pub struct Rectangle {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// Static source integral over a plane patch:
/// `V(x, y, z) = int int g(x', y') / sqrt(z^2 + (x-x')^2 + (y-y')^2) dx' dy'`
/// by a tensor Gauss rule; the grid must stay off the source plane.
pub fn laplace_source3(
    g: &dyn SourceFn,
    support: Rectangle,
    quad_nodes: usize,
    grid: &GridSpec,
) -> Result<ScalarField> {
    if !(support.x_max > support.x_min && support.y_max > support.y_min) {
        return Err(Error::Domain("empty source support".into()));
    }
    let idx = grid_axes(grid, &["x", "y", "z"])?;
    let zax = &grid.axes()[idx[2]];
    if zax.min <= 0.0 {
        return Err(Error::Domain(format!(
            "kernel is singular on the source plane: grid needs z > 0, got z_min = {}",
            zax.min
        )));
    }
    let (xs, wxs) = gauss_legendre_on(support.x_min, support.x_max, quad_nodes);
    let (ys, wys) = gauss_legendre_on(support.y_min, support.y_max, quad_nodes);
    let mut samples = Vec::with_capacity(quad_nodes * quad_nodes);
    for (xp, wx) in xs.iter().zip(&wxs) {
        for (yp, wy) in ys.iter().zip(&wys) {
            samples.push((*xp, *yp, wx * wy * g.eval_source(&[*xp, *yp])?));
        }
    }
    sample_field_parallel(grid, &|c: &[f64]| {
        let (x, y, z) = (c[idx[0]], c[idx[1]], c[idx[2]]);
        let terms: Vec<Complex64> = samples
            .iter()
            .map(|(xp, yp, wg)| {
                let dx = x - xp;
                let dy = y - yp;
                wg / (z * z + dx * dx + dy * dy).sqrt()
            })
            .collect();
        Ok(pairwise_sum(&terms))
    })
}

/// Line-source potential on an (rho, x) half-plane:
/// `V(rho, x) = int g0(x') / sqrt(rho^2 + (x - x')^2) dx'` over the support
/// interval. Singular as rho -> 0 wherever g0 is nonzero.
pub fn axisym_line_source(
    g0: &dyn SourceFn,
    support: (f64, f64),
    quad_nodes: usize,
    grid: &GridSpec,
) -> Result<ScalarField> {
    if !(support.1 > support.0) {
        return Err(Error::Domain("empty source support".into()));
    }
    let idx = grid_axes(grid, &["rho", "x"])?;
    let rax = &grid.axes()[idx[0]];
    if rax.min <= 0.0 {
        return Err(Error::Domain(format!(
            "line-source kernel needs rho > 0 on the grid, got rho_min = {}",
            rax.min
        )));
    }
    let (xs, wxs) = gauss_legendre_on(support.0, support.1, quad_nodes);
    let mut samples = Vec::with_capacity(quad_nodes);
    for (xp, wx) in xs.iter().zip(&wxs) {
        samples.push((*xp, wx * g0.eval_source(&[*xp])?));
    }
    sample_field_parallel(grid, &|c: &[f64]| {
        let (rho, x) = (c[idx[0]], c[idx[1]]);
        let terms: Vec<Complex64> = samples
            .iter()
            .map(|(xp, wg)| {
                let dx = x - xp;
                wg / (rho * rho + dx * dx).sqrt()
            })
            .collect();
        Ok(pairwise_sum(&terms))
    })
}

/// Analytic-segment variant: the same kernel integrated from `x - i rho` to
/// `x + i rho`. With `x' = x + i rho s` the radical flattens to
/// `rho sqrt(1 - s^2)` and Gauss-Chebyshev nodes absorb the weight:
/// `V = (i pi / n) sum_i g0(x + i rho s_i)`. Analytic across rho = 0 and
/// even in rho.
pub fn axisym_analytic_segment(
    g0: &AnalyticFamily,
    segment_nodes: usize,
    grid: &GridSpec,
) -> Result<ScalarField> {
    if g0.arity() != 1 || !g0.is_complex_evaluable() {
        return Err(Error::ComplexArgument(
            "analytic segment integral needs a complex-evaluable one-argument source".into(),
        ));
    }
    if segment_nodes < 2 {
        return Err(Error::InvalidQuadrature(
            "segment rule needs at least 2 nodes".into(),
        ));
    }
    let idx = grid_axes(grid, &["rho", "x"])?;
    // Chebyshev nodes of the first kind
    let nodes: Vec<f64> = (0..segment_nodes)
        .map(|i| {
            (std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * segment_nodes as f64)).cos()
        })
        .collect();
    let w = std::f64::consts::PI / segment_nodes as f64;
    sample_field_parallel(grid, &|c: &[f64]| {
        let (rho, x) = (c[idx[0]], c[idx[1]]);
        // the integral itself is divergent when a pole sits on the segment,
        // whether or not a quadrature node lands on it
        if let AnalyticFamily::RationalInverse { pole } = g0 {
            if (pole.re - x).abs() <= 1e-12 * (1.0 + x.abs())
                && pole.im.abs() <= rho.abs() * (1.0 + 1e-12)
            {
                return Err(Error::SingularSample {
                    what: "pole on the integration segment".into(),
                    coords: vec![rho, x],
                });
            }
        }
        let mut terms = Vec::with_capacity(nodes.len());
        for s in &nodes {
            let zeta = Complex64::new(x, rho * s);
            let v = g0.eval_complex(zeta).map_err(|e| match e {
                Error::SingularSample { what, .. } => Error::SingularSample {
                    what,
                    coords: vec![rho, x],
                },
                other => other,
            })?;
            terms.push(v);
        }
        Ok(Complex64::new(0.0, w) * pairwise_sum(&terms))
    })
}

fn grid_axes(grid: &GridSpec, names: &[&str]) -> Result<Vec<usize>> {
    let mut idx = Vec::with_capacity(names.len());
    for name in names {
        idx.push(
            grid.axis_index(name)
                .ok_or_else(|| Error::GridMismatch(format!("grid lacks the `{name}` axis")))?,
        );
    }
    if grid.dims() != names.len() {
        return Err(Error::GridMismatch(format!(
            "grid has {} axes; expected exactly {:?}",
            grid.dims(),
            names
        )));
    }
    Ok(idx)
}
