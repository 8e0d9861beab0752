//! Superpositions of rotated lower-dimensional solutions.
//!
//! A harmonic function of three variables is an integral over the circle of
//! a single analytic profile evaluated at the rotated complex argument
//! `z - i(x cos phi + y sin phi)`; a solution of the wave equation in 1+N
//! dimensions is an integral over the (N-1)-sphere of profiles of the real
//! argument `t - n.x`. This module builds those superpositions, converts
//! between profiles and initial-value sources, and handles the axisymmetric
//! and twistor-curve variants.
//!
//! Superpositions weighted by an arbitrary extra function of the angle are
//! deliberately absent: the per-direction dependence of the profile already
//! carries all the freedom a general solution needs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{AnalyticFamily, GridSpec, ScalarField};
use crate::numerics::{pairwise_sum, sample_field_parallel, CubicTable, OutOfRange};
use crate::rotations::{Direction, DirectionDomain, DirectionSet, TwistorPoint};
use crate::rotations::{gauss_legendre_on, twistor_phase, TWO_PI};
use crate::spectral::SpectralAmplitude;

/// One profile function `F(xi)`: a closed-form family or a cubic table.
#[derive(Debug, Clone)]
pub enum ProfileEvaluator {
    Analytic(AnalyticFamily),
    Tabulated(CubicTable),
}

impl ProfileEvaluator {
    pub fn analytic(family: AnalyticFamily) -> Result<Self> {
        if family.arity() != 1 {
            return Err(Error::InvalidFamily(format!(
                "profiles take one argument; family has arity {}",
                family.arity()
            )));
        }
        Ok(ProfileEvaluator::Analytic(family))
    }

    pub fn is_complex_evaluable(&self) -> bool {
        match self {
            ProfileEvaluator::Analytic(f) => f.is_complex_evaluable(),
            ProfileEvaluator::Tabulated(_) => false,
        }
    }

    pub fn eval_complex(&self, xi: Complex64) -> Result<Complex64> {
        match self {
            ProfileEvaluator::Analytic(f) => f.eval_complex(xi),
            ProfileEvaluator::Tabulated(_) => Err(Error::ComplexArgument(
                "tabulated profiles are defined on the real line only".into(),
            )),
        }
    }

    pub fn eval_real(&self, xi: f64) -> Result<Complex64> {
        match self {
            ProfileEvaluator::Analytic(f) => f.eval_complex(Complex64::new(xi, 0.0)),
            ProfileEvaluator::Tabulated(t) => t.eval(xi),
        }
    }

    pub fn derivative_real(&self, xi: f64) -> Result<Complex64> {
        match self {
            ProfileEvaluator::Analytic(f) => f.derivative_complex(Complex64::new(xi, 0.0)),
            ProfileEvaluator::Tabulated(t) => t.derivative(xi),
        }
    }
}

/// A plane-wave profile, either shared across all quadrature nodes or one
/// evaluator per node.
#[derive(Debug, Clone)]
pub enum PlaneWaveProfile {
    Shared(ProfileEvaluator),
    PerNode(Vec<ProfileEvaluator>),
}

impl PlaneWaveProfile {
    pub fn shared_analytic(family: AnalyticFamily) -> Result<Self> {
        Ok(PlaneWaveProfile::Shared(ProfileEvaluator::analytic(family)?))
    }

    pub fn shared_tabulated(table: CubicTable) -> Self {
        PlaneWaveProfile::Shared(ProfileEvaluator::Tabulated(table))
    }

    pub fn per_node(evaluators: Vec<ProfileEvaluator>) -> Self {
        PlaneWaveProfile::PerNode(evaluators)
    }

    pub fn evaluator(&self, node: usize) -> &ProfileEvaluator {
        match self {
            PlaneWaveProfile::Shared(e) => e,
            PlaneWaveProfile::PerNode(v) => &v[node],
        }
    }

    fn check_nodes(&self, n: usize) -> Result<()> {
        if let PlaneWaveProfile::PerNode(v) = self {
            if v.len() != n {
                return Err(Error::InvalidQuadrature(format!(
                    "profile carries {} per-node evaluators for {} quadrature nodes",
                    v.len(),
                    n
                )));
            }
        }
        Ok(())
    }

    fn evaluators(&self, n: usize) -> impl Iterator<Item = &ProfileEvaluator> {
        (0..n).map(move |j| self.evaluator(j))
    }

    /// Laplace-type superpositions take a complex argument; tabulated
    /// profiles cannot be continued off the real line. Exponential profiles
    /// must decay over the superposition's half-space: `decay_sign` is +1
    /// for the `z - i x'` forms (need k0 > 0) and -1 for the anisotropic
    /// `-sqrt(alpha) z + i x'` form (need k0 < 0).
    fn check_laplace_usable(&self, n: usize, decay_sign: f64) -> Result<()> {
        self.check_nodes(n)?;
        for e in self.evaluators(n) {
            if !e.is_complex_evaluable() {
                return Err(Error::ComplexArgument(
                    "this superposition needs a complex-evaluable profile".into(),
                ));
            }
            if let ProfileEvaluator::Analytic(AnalyticFamily::DampedExponential {
                decay, ..
            }) = e
            {
                if !(*decay * decay_sign > 0.0) {
                    return Err(Error::InvalidFamily(format!(
                        "exponential profile with decay {decay} diverges over this \
                         superposition's half-space"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn axis_indices(grid: &GridSpec, names: &[&str]) -> Result<Vec<usize>> {
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

/// The Whittaker form of a harmonic function: integral over the circle of
/// `F(z - i(x cos phi + y sin phi); phi)`.
pub struct WhittakerLaplace3<'a> {
    profile: &'a PlaneWaveProfile,
    dirs: &'a DirectionSet,
}

impl<'a> WhittakerLaplace3<'a> {
    pub fn new(profile: &'a PlaneWaveProfile, dirs: &'a DirectionSet) -> Result<Self> {
        if dirs.dim() != 2 {
            return Err(Error::InvalidQuadrature(
                "Whittaker superposition integrates over the circle".into(),
            ));
        }
        profile.check_laplace_usable(dirs.len(), 1.0)?;
        Ok(WhittakerLaplace3 { profile, dirs })
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> Result<Complex64> {
        let mut terms = Vec::with_capacity(self.dirs.len());
        for (j, (n, w)) in self.dirs.iter().enumerate() {
            let xp = n.components()[0] * x + n.components()[1] * y;
            let xi = Complex64::new(z, -xp);
            terms.push(w * self.profile.evaluator(j).eval_complex(xi)?);
        }
        Ok(pairwise_sum(&terms))
    }
}

/// Sample the Whittaker superposition on an (x, y, z) grid.
pub fn laplace3_whittaker(
    profile: &PlaneWaveProfile,
    dirs: &DirectionSet,
    grid: &GridSpec,
) -> Result<ScalarField> {
    let rep = WhittakerLaplace3::new(profile, dirs)?;
    let idx = axis_indices(grid, &["x", "y", "z"])?;
    sample_field_parallel(grid, &|c: &[f64]| rep.eval(c[idx[0]], c[idx[1]], c[idx[2]]))
}

/// Anisotropic variant: superposition of `F(-sqrt(alpha) z + i x'; phi)`,
/// each term an exact solution of `u_zz + alpha (u_xx + u_yy) = 0`.
pub struct AnisoWhittaker<'a> {
    profile: &'a PlaneWaveProfile,
    dirs: &'a DirectionSet,
    sqrt_alpha: f64,
}

impl<'a> AnisoWhittaker<'a> {
    pub fn new(profile: &'a PlaneWaveProfile, alpha: f64, dirs: &'a DirectionSet) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!(
                "anisotropy must be positive, got {alpha}"
            )));
        }
        if dirs.dim() != 2 {
            return Err(Error::InvalidQuadrature(
                "anisotropic Whittaker superposition integrates over the circle".into(),
            ));
        }
        profile.check_laplace_usable(dirs.len(), -1.0)?;
        Ok(AnisoWhittaker {
            profile,
            dirs,
            sqrt_alpha: alpha.sqrt(),
        })
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> Result<Complex64> {
        let mut terms = Vec::with_capacity(self.dirs.len());
        for (j, (n, w)) in self.dirs.iter().enumerate() {
            let xp = n.components()[0] * x + n.components()[1] * y;
            let zeta = Complex64::new(-self.sqrt_alpha * z, xp);
            terms.push(w * self.profile.evaluator(j).eval_complex(zeta)?);
        }
        Ok(pairwise_sum(&terms))
    }
}

/// Sample the anisotropic superposition on an (x, y, z) grid.
pub fn aniso_whittaker(
    profile: &PlaneWaveProfile,
    alpha: f64,
    dirs: &DirectionSet,
    grid: &GridSpec,
) -> Result<ScalarField> {
    let rep = AnisoWhittaker::new(profile, alpha, dirs)?;
    let idx = axis_indices(grid, &["x", "y", "z"])?;
    // damped exponentials blow up for z < 0 under the decaying branch
    let has_damped = (0..dirs.len()).any(|j| {
        matches!(
            profile.evaluator(j),
            ProfileEvaluator::Analytic(AnalyticFamily::DampedExponential { .. })
        )
    });
    if has_damped && grid.axes()[idx[2]].min < 0.0 {
        return Err(Error::Domain(
            "damped-exponential profiles need z >= 0 on the grid".into(),
        ));
    }
    sample_field_parallel(grid, &|c: &[f64]| rep.eval(c[idx[0]], c[idx[1]], c[idx[2]]))
}

/// Superposition of rotated (1+1)-dimensional wave solutions over a
/// direction set: `u = sum w F(t - n.x; n)`.
pub struct WaveSuperposition<'a> {
    profile: &'a PlaneWaveProfile,
    dirs: &'a DirectionSet,
}

impl<'a> WaveSuperposition<'a> {
    pub fn new(profile: &'a PlaneWaveProfile, dirs: &'a DirectionSet) -> Result<Self> {
        profile.check_nodes(dirs.len())?;
        Ok(WaveSuperposition { profile, dirs })
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Result<Complex64> {
        let mut terms = Vec::with_capacity(self.dirs.len());
        for (j, (n, w)) in self.dirs.iter().enumerate() {
            let xi = t - n.dot(x);
            terms.push(w * self.profile.evaluator(j).eval_real(xi)?);
        }
        Ok(pairwise_sum(&terms))
    }
}

/// Sample a (1+2)-dimensional wave superposition on a (t, x, y) grid.
pub fn wave12_superpose(
    profile: &PlaneWaveProfile,
    dirs: &DirectionSet,
    grid: &GridSpec,
) -> Result<ScalarField> {
    if dirs.dim() != 2 {
        return Err(Error::InvalidQuadrature(
            "1+2 superposition needs circle directions".into(),
        ));
    }
    let rep = WaveSuperposition::new(profile, dirs)?;
    let idx = axis_indices(grid, &["t", "x", "y"])?;
    sample_field_parallel(grid, &|c: &[f64]| {
        rep.eval(c[idx[0]], &[c[idx[1]], c[idx[2]]])
    })
}

/// Sample a (1+3)-dimensional wave superposition on a (t, x, y, z) grid.
pub fn wave13_superpose(
    profile: &PlaneWaveProfile,
    dirs: &DirectionSet,
    grid: &GridSpec,
) -> Result<ScalarField> {
    if dirs.dim() != 3 {
        return Err(Error::InvalidQuadrature(
            "1+3 superposition needs sphere directions".into(),
        ));
    }
    let rep = WaveSuperposition::new(profile, dirs)?;
    let idx = axis_indices(grid, &["t", "x", "y", "z"])?;
    sample_field_parallel(grid, &|c: &[f64]| {
        rep.eval(c[idx[0]], &[c[idx[1]], c[idx[2]], c[idx[3]]])
    })
}

fn quadrature_nodes_for_support(amp: &SpectralAmplitude, xi_max: f64) -> (f64, usize) {
    let kmax = amp.support_radius();
    // a couple of Gauss-Legendre nodes per oscillation of e^{i k xi}
    let oscillations = kmax * xi_max.max(1.0) / std::f64::consts::PI;
    let n = ((oscillations * 4.0).ceil() as usize).clamp(512, 20_000);
    (kmax, n)
}

/// Tabulate the (1+2)-dimensional profile generated by an initial-velocity
/// source with transform `psi_t`: `F(xi; n)` is the half-line integral
/// `(1/2i) int_0^inf [psi_t(k n) e^{i k xi} - conj(psi_t(k n)) e^{-i k xi}] dk`,
/// real for real sources.
pub fn profile_from_source_2d(
    psi_t: &SpectralAmplitude,
    n: &Direction,
    xi_min: f64,
    xi_max: f64,
    points: usize,
) -> Result<PlaneWaveProfile> {
    profile_from_source(psi_t, n, xi_min, xi_max, points, false)
}

/// (1+3)-dimensional analogue: the integrand gains a factor
/// `k / sqrt(2 pi)` from the radial measure.
pub fn profile_from_source_3d(
    psi_t: &SpectralAmplitude,
    n: &Direction,
    xi_min: f64,
    xi_max: f64,
    points: usize,
) -> Result<PlaneWaveProfile> {
    profile_from_source(psi_t, n, xi_min, xi_max, points, true)
}

fn profile_from_source(
    psi_t: &SpectralAmplitude,
    n: &Direction,
    xi_min: f64,
    xi_max: f64,
    points: usize,
    radial_weight: bool,
) -> Result<PlaneWaveProfile> {
    if !(xi_max > xi_min) || points < 4 {
        return Err(Error::Domain(
            "profile tabulation needs xi_max > xi_min and at least 4 points".into(),
        ));
    }
    let xi_abs = xi_min.abs().max(xi_max.abs());
    let (kmax, nq) = quadrature_nodes_for_support(psi_t, xi_abs);
    if !(kmax.is_finite() && kmax > 0.0) {
        return Err(Error::NonDecaying(
            "source transform has no finite support radius".into(),
        ));
    }
    let (kn, kw) = gauss_legendre_on(0.0, kmax, nq);
    let mut samples: Vec<(f64, Complex64)> = Vec::with_capacity(nq);
    for (k, w) in kn.iter().zip(&kw) {
        let a = psi_t.eval_radial(*k, n.components())?;
        let scale = if radial_weight {
            *k / (TWO_PI).sqrt()
        } else {
            0.5
        };
        samples.push((*k, w * scale * a));
    }
    let table = CubicTable::sample(xi_min, xi_max, points, OutOfRange::Reject, |xi| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, wa) in &samples {
            let phase = Complex64::new(0.0, k * xi).exp();
            // (1/i) [a e^{ik xi} - conj(a) e^{-ik xi}]
            acc += -Complex64::i() * (wa * phase - wa.conj() * phase.conj());
        }
        acc
    })?;
    Ok(PlaneWaveProfile::shared_tabulated(table))
}

/// Recover the initial-velocity source from a differentiable profile:
/// the direction average of `F_xi(-n.x; n)`, normalized by the measure of
/// the direction manifold.
pub fn source_from_profiles(
    profile: &PlaneWaveProfile,
    dirs: &DirectionSet,
    grid: &GridSpec,
) -> Result<ScalarField> {
    profile.check_nodes(dirs.len())?;
    let names: &[&str] = match dirs.dim() {
        2 => &["x", "y"],
        _ => &["x", "y", "z"],
    };
    let idx = axis_indices(grid, names)?;
    let measure = match dirs.dim() {
        2 => TWO_PI,
        _ => 2.0 * TWO_PI,
    };
    sample_field_parallel(grid, &|c: &[f64]| {
        let x: Vec<f64> = idx.iter().map(|&i| c[i]).collect();
        let mut terms = Vec::with_capacity(dirs.len());
        for (j, (n, w)) in dirs.iter().enumerate() {
            let xi = -n.dot(&x);
            terms.push(w * profile.evaluator(j).derivative_real(xi)?);
        }
        Ok(pairwise_sum(&terms) / measure)
    })
}

/// Axis values to axisymmetric harmonic field: with `f(z)` the field on the
/// symmetry axis, `V(r, z)` is the half-circle average of `f(z - i r cos phi)`
/// with weight `1/pi`.
pub struct AxisExtension<'a> {
    axis_family: &'a AnalyticFamily,
    dirs: &'a DirectionSet,
}

impl<'a> AxisExtension<'a> {
    pub fn new(axis_family: &'a AnalyticFamily, dirs: &'a DirectionSet) -> Result<Self> {
        if axis_family.arity() != 1 || !axis_family.is_complex_evaluable() {
            return Err(Error::ComplexArgument(
                "axis extension needs a complex-evaluable one-argument family".into(),
            ));
        }
        if dirs.domain() != DirectionDomain::HalfCircle {
            return Err(Error::InvalidQuadrature(
                "axis extension integrates over the half circle [0, pi]".into(),
            ));
        }
        Ok(AxisExtension { axis_family, dirs })
    }

    pub fn eval(&self, r: f64, z: f64) -> Result<Complex64> {
        let mut terms = Vec::with_capacity(self.dirs.len());
        for (n, w) in self.dirs.iter() {
            let zeta = Complex64::new(z, -r * n.components()[0]);
            let v = self.axis_family.eval_complex(zeta).map_err(|e| match e {
                Error::SingularSample { what, .. } => Error::SingularSample {
                    what,
                    coords: vec![r, z],
                },
                other => other,
            })?;
            terms.push(w * v);
        }
        Ok(pairwise_sum(&terms) / std::f64::consts::PI)
    }
}

/// Sample the axis extension on an (r, z) grid.
pub fn axis_to_axisymmetric(
    axis_family: &AnalyticFamily,
    dirs: &DirectionSet,
    grid: &GridSpec,
) -> Result<ScalarField> {
    let rep = AxisExtension::new(axis_family, dirs)?;
    let idx = axis_indices(grid, &["r", "z"])?;
    sample_field_parallel(grid, &|c: &[f64]| rep.eval(c[idx[0]], c[idx[1]]))
}

/// Azimuthal average of a (1+2)-dimensional solution: the axisymmetric
/// (1+3)-dimensional field `(1/2pi) int u12(t, r cos phi, z) d phi`.
pub fn axisym_wave_from_12(
    u12: &(dyn Fn(f64, f64, f64) -> Result<Complex64> + Sync),
    dirs: &DirectionSet,
    grid: &GridSpec,
) -> Result<ScalarField> {
    if dirs.dim() != 2 || dirs.domain() != DirectionDomain::Circle {
        return Err(Error::InvalidQuadrature(
            "azimuthal average needs a full-circle direction set".into(),
        ));
    }
    let idx = axis_indices(grid, &["t", "r", "z"])?;
    sample_field_parallel(grid, &|c: &[f64]| {
        let (t, r, z) = (c[idx[0]], c[idx[1]], c[idx[2]]);
        let mut terms = Vec::with_capacity(dirs.len());
        for (n, w) in dirs.iter() {
            terms.push(w * u12(t, r * n.components()[0], z)?);
        }
        Ok(pairwise_sum(&terms) / TWO_PI)
    })
}

/// One sample of a curve in the complex-omega plane: the point, the
/// parameter derivative `d omega / ds`, and the quadrature weight in s.
#[derive(Debug, Clone, Copy)]
pub struct TwistorCurveSample {
    pub omega: TwistorPoint,
    pub d_omega: Complex64,
    pub weight: f64,
}

/// A sampled curve for twistor-superposition integrals.
#[derive(Debug, Clone)]
pub struct TwistorCurve {
    samples: Vec<TwistorCurveSample>,
}

impl TwistorCurve {
    pub fn from_samples(samples: Vec<TwistorCurveSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidQuadrature("curve needs samples".into()));
        }
        for s in &samples {
            if !(s.omega.u.is_finite()
                && s.omega.v.is_finite()
                && s.d_omega.re.is_finite()
                && s.d_omega.im.is_finite())
            {
                return Err(Error::Numerical("non-finite curve sample".into()));
            }
        }
        Ok(TwistorCurve { samples })
    }

    /// The circle `omega = radius e^{i s}`, uniform in s.
    pub fn circle(radius: f64, m: usize) -> Result<Self> {
        if m < 2 || !(radius > 0.0) {
            return Err(Error::InvalidQuadrature(
                "circle curve needs radius > 0 and at least 2 samples".into(),
            ));
        }
        let samples = (0..m)
            .map(|j| {
                let s = TWO_PI * j as f64 / m as f64;
                TwistorCurveSample {
                    omega: TwistorPoint::new(radius * s.cos(), radius * s.sin()),
                    d_omega: Complex64::new(0.0, radius) * Complex64::new(s.cos(), s.sin()),
                    weight: TWO_PI / m as f64,
                }
            })
            .collect();
        TwistorCurve::from_samples(samples)
    }

    /// The real axis traversed from -inf to +inf, parameterized through the
    /// angle chart `omega = cot(phi/2)` at m midpoint angles; the Jacobian
    /// `(omega^2 + 1)/2` rides along as `d omega / ds`.
    pub fn real_axis_from_angles(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidQuadrature(
                "real-axis curve needs at least 2 samples".into(),
            ));
        }
        let samples = (0..m)
            .map(|j| {
                // s in (0, 2 pi), phi = 2 pi - s so omega increases with s
                let s = TWO_PI * (j as f64 + 0.5) / m as f64;
                let phi = TWO_PI - s;
                let omega = (0.5 * phi).cos() / (0.5 * phi).sin();
                TwistorCurveSample {
                    omega: TwistorPoint::new(omega, 0.0),
                    d_omega: Complex64::new(0.5 * (omega * omega + 1.0), 0.0),
                    weight: TWO_PI / m as f64,
                }
            })
            .collect();
        TwistorCurve::from_samples(samples)
    }

    pub fn samples(&self) -> &[TwistorCurveSample] {
        &self.samples
    }
}

/// Superposition over a twistor curve:
/// `V(x) = sum_s w_s h(phase(omega_s, x); omega_s) (d omega/ds)_s`.
/// Every integrand term is harmonic because the phase coefficients form a
/// complex null vector.
pub fn twistor_superpose(
    h: &PlaneWaveProfile,
    curve: &TwistorCurve,
    grid: &GridSpec,
) -> Result<ScalarField> {
    h.check_laplace_usable(curve.samples().len(), 1.0)?;
    let idx = axis_indices(grid, &["x", "y", "z"])?;
    sample_field_parallel(grid, &|c: &[f64]| {
        let point = [c[idx[0]], c[idx[1]], c[idx[2]]];
        let mut terms = Vec::with_capacity(curve.samples().len());
        for (j, s) in curve.samples().iter().enumerate() {
            let zeta = twistor_phase(s.omega, &point);
            terms.push(s.weight * s.d_omega * h.evaluator(j).eval_complex(zeta)?);
        }
        Ok(pairwise_sum(&terms))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample_analytic, Axis};
    use crate::rotations::{circle_quadrature, half_circle_quadrature, sphere_quadrature};
    use crate::spectral::OperatorSpec;
    use crate::verify::{compare_fields, fd_residual, fd_residual_with, harmonic_poly_oracle, Stencil};

    const PI: f64 = std::f64::consts::PI;

    fn xyz_grid(n: usize, lo: f64, hi: f64) -> GridSpec {
        GridSpec::new(vec![
            Axis::new("x", lo, hi, n),
            Axis::new("y", lo, hi, n),
            Axis::new("z", lo, hi, n),
        ])
        .unwrap()
    }

    fn poly_profile(coeffs: &[f64]) -> PlaneWaveProfile {
        PlaneWaveProfile::shared_analytic(AnalyticFamily::polynomial_real(coeffs).unwrap())
            .unwrap()
    }

    #[test]
    fn whittaker_constant_profile_gives_total_measure() {
        let dirs = circle_quadrature(8).unwrap();
        let profile = poly_profile(&[3.0]);
        let f = laplace3_whittaker(&profile, &dirs, &xyz_grid(3, -1.0, 1.0)).unwrap();
        for v in f.values() {
            assert!((v - Complex64::new(3.0 * TWO_PI, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn whittaker_linear_profile_gives_z() {
        let dirs = circle_quadrature(8).unwrap();
        let profile = poly_profile(&[0.0, 1.0 / TWO_PI]);
        let grid = xyz_grid(5, -1.0, 1.0);
        let f = laplace3_whittaker(&profile, &dirs, &grid).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let z = grid.coords(i)[2];
            assert!((v - Complex64::new(z, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn whittaker_matches_harmonic_oracle_through_degree_six() {
        let grid = xyz_grid(7, -1.0, 1.0);
        for n in 0..=6u32 {
            let m = (2 * n + 2).max(4) as usize;
            let dirs = circle_quadrature(m).unwrap();
            let mut coeffs = vec![0.0; n as usize + 1];
            coeffs[n as usize] = 1.0 / TWO_PI;
            let f = laplace3_whittaker(&poly_profile(&coeffs), &dirs, &grid).unwrap();
            let oracle = sample_analytic(&harmonic_poly_oracle(n).unwrap(), &grid).unwrap();
            let err = compare_fields(&f, &oracle).unwrap();
            assert!(err.linf_abs < 1e-12, "degree {n}: {}", err.linf_abs);
        }
    }

    #[test]
    fn whittaker_rejects_tabulated_profiles() {
        let dirs = circle_quadrature(4).unwrap();
        let table = CubicTable::sample(-1.0, 1.0, 9, OutOfRange::Reject, |x| {
            Complex64::new(x, 0.0)
        })
        .unwrap();
        let profile = PlaneWaveProfile::shared_tabulated(table);
        assert!(matches!(
            laplace3_whittaker(&profile, &dirs, &xyz_grid(3, -1.0, 1.0)),
            Err(Error::ComplexArgument(_))
        ));
    }

    #[test]
    fn aniso_reduces_to_whittaker_at_unit_alpha() {
        // At alpha = 1 the anisotropic argument is -(z - i x'), so a profile
        // G matches the Whittaker form with F(xi) = G(-xi).
        let dirs = circle_quadrature(12).unwrap();
        let grid = GridSpec::new(vec![
            Axis::new("x", -1.0, 1.0, 5),
            Axis::new("y", -1.0, 1.0, 5),
            Axis::new("z", 0.0, 1.0, 5),
        ])
        .unwrap();
        let g_profile = poly_profile(&[0.5, -1.0, 2.0]);
        let f_profile = poly_profile(&[0.5, 1.0, 2.0]); // G(-xi)
        let a = aniso_whittaker(&g_profile, 1.0, &dirs, &grid).unwrap();
        let b = laplace3_whittaker(&f_profile, &dirs, &grid).unwrap();
        let err = compare_fields(&a, &b).unwrap();
        assert!(err.linf_abs < 1e-12);
    }

    #[test]
    fn aniso_quadratic_profile_closed_form() {
        // zeta^2 averaged over the circle: 2 pi alpha z^2 - pi (x^2 + y^2)
        let alpha = 2.0;
        let dirs = circle_quadrature(8).unwrap();
        let grid = GridSpec::new(vec![
            Axis::new("x", -1.0, 1.0, 9),
            Axis::new("y", -1.0, 1.0, 9),
            Axis::new("z", 0.0, 1.0, 9),
        ])
        .unwrap();
        let f = aniso_whittaker(&poly_profile(&[0.0, 0.0, 1.0]), alpha, &dirs, &grid).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let c = grid.coords(i);
            let expect = TWO_PI * alpha * c[2] * c[2] - PI * (c[0] * c[0] + c[1] * c[1]);
            assert!((v.re - expect).abs() < 1e-12, "{} vs {expect}", v.re);
            assert!(v.im.abs() < 1e-12);
        }
        let op = OperatorSpec::aniso_laplace(alpha, alpha).unwrap();
        let grid33 = GridSpec::new(vec![
            Axis::new("x", -0.5, 0.5, 33),
            Axis::new("y", -0.5, 0.5, 33),
            Axis::new("z", 0.0, 1.0, 33),
        ])
        .unwrap();
        let f = aniso_whittaker(&poly_profile(&[0.0, 0.0, 1.0]), alpha, &dirs, &grid33).unwrap();
        let r = fd_residual(&f, &op).unwrap();
        assert!(r.linf < 1e-10, "residual {}", r.linf);
    }

    #[test]
    fn aniso_single_direction_exponential_is_exact_solution() {
        // F(zeta) = e^zeta at phi = 0: u = e^{-sqrt(alpha) z} e^{i x}, an
        // exact anisotropic solution; fourth-order stencils resolve it to
        // below 1e-8 at h = 1/64.
        let alpha = 2.0;
        let dirs = DirectionSet::new(
            vec![Direction::from_angle(0.0)],
            vec![1.0],
            crate::rotations::QuadratureMode::Deterministic,
            DirectionDomain::Custom,
        )
        .unwrap();
        let profile = PlaneWaveProfile::shared_analytic(
            AnalyticFamily::damped_exponential(1.0, -1.0).unwrap(),
        )
        .unwrap();
        let grid = GridSpec::new(vec![
            Axis::new("x", 0.0, 1.0, 65),
            Axis::new("y", 0.0, 1.0, 7),
            Axis::new("z", 0.0, 1.0, 65),
        ])
        .unwrap();
        let f = aniso_whittaker(&profile, alpha, &dirs, &grid).unwrap();
        for i in 0..grid.len() {
            let c = grid.coords(i);
            let expect = Complex64::new(0.0, c[0]).exp() * (-alpha.sqrt() * c[2]).exp();
            assert!((f.value(i) - expect).norm() < 1e-13);
        }
        let op = OperatorSpec::aniso_laplace(alpha, alpha).unwrap();
        let r = fd_residual_with(&f, &op, Stencil::FourthOrder).unwrap();
        assert!(r.linf < 1e-8, "fourth-order residual {}", r.linf);

        // the growing branch is rejected for this superposition
        let bad = PlaneWaveProfile::shared_analytic(
            AnalyticFamily::damped_exponential(1.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(aniso_whittaker(&bad, alpha, &dirs, &grid).is_err());
    }

    #[test]
    fn wave12_quadratic_profile() {
        let dirs = circle_quadrature(8).unwrap();
        let grid = GridSpec::new(vec![
            Axis::new("t", 0.0, 1.0, 9),
            Axis::new("x", -1.0, 1.0, 9),
            Axis::new("y", -1.0, 1.0, 9),
        ])
        .unwrap();
        let f = wave12_superpose(&poly_profile(&[0.0, 0.0, 1.0]), &dirs, &grid).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let c = grid.coords(i);
            let expect = TWO_PI * c[0] * c[0] + PI * (c[1] * c[1] + c[2] * c[2]);
            assert!((v.re - expect).abs() < 1e-12);
        }
        // u_tt = Delta u = 4 pi: the wave residual vanishes identically
        let op = OperatorSpec::wave(2).unwrap();
        let r = fd_residual(&f, &op).unwrap();
        assert!(r.linf < 1e-12);
    }

    #[test]
    fn wave13_quadratic_profile() {
        let dirs = sphere_quadrature(6, 8).unwrap();
        let grid = GridSpec::new(vec![
            Axis::new("t", 0.0, 1.0, 5),
            Axis::new("x", -1.0, 1.0, 5),
            Axis::new("y", -1.0, 1.0, 5),
            Axis::new("z", -1.0, 1.0, 5),
        ])
        .unwrap();
        let f = wave13_superpose(&poly_profile(&[0.0, 0.0, 1.0]), &dirs, &grid).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let c = grid.coords(i);
            let r2 = c[1] * c[1] + c[2] * c[2] + c[3] * c[3];
            let expect = 2.0 * TWO_PI * c[0] * c[0] + (2.0 * TWO_PI / 3.0) * r2;
            assert!((v.re - expect).abs() < 1e-12);
        }
        // frozen spot value: t = 1, x = (1, 0, 0) gives 16 pi / 3
        let profile = poly_profile(&[0.0, 0.0, 1.0]);
        let rep = WaveSuperposition::new(&profile, &dirs).unwrap();
        let v = rep.eval(1.0, &[1.0, 0.0, 0.0]).unwrap();
        assert!((v.re - 16.755160819145562).abs() < 1e-12);
    }

    #[test]
    fn wave13_constant_profile() {
        let dirs = sphere_quadrature(4, 6).unwrap();
        let profile = poly_profile(&[2.0]);
        let rep = WaveSuperposition::new(&profile, &dirs).unwrap();
        let v = rep.eval(0.3, &[0.1, -0.2, 0.5]).unwrap();
        assert!((v.re - 2.0 * 2.0 * TWO_PI).abs() < 1e-12);
    }

    #[test]
    fn profile_from_source_2d_exponential_transform() {
        // psi_t(k n) = e^{-k}: F(xi) = int_0^inf e^{-k} sin(k xi) dk
        //            = xi / (1 + xi^2)
        let table = CubicTable::sample(0.0, 60.0, 4001, OutOfRange::Zero, |k| {
            Complex64::new((-k).exp(), 0.0)
        })
        .unwrap();
        let amp = SpectralAmplitude::tabulated(table).unwrap();
        let n = Direction::from_angle(0.7);
        let profile = profile_from_source_2d(&amp, &n, -4.0, 4.0, 2001).unwrap();
        let e = profile.evaluator(0);
        for xi in [-3.0, -1.0, -0.25, 0.0, 0.5, 1.0, 2.5] {
            let expect = xi / (1.0 + xi * xi);
            let v = e.eval_real(xi).unwrap();
            assert!((v.re - expect).abs() < 2e-6, "xi={xi}: {} vs {expect}", v.re);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn profile_from_source_2d_gaussian_matches_quadrature_oracle() {
        let amp = SpectralAmplitude::gaussian(1.0, vec![]).unwrap();
        let n = Direction::from_angle(0.0);
        let profile = profile_from_source_2d(&amp, &n, -6.0, 6.0, 4001).unwrap();
        let e = profile.evaluator(0);
        // independent oracle: Simpson rule on int_0^inf e^{-k^2/2} sin(k xi) dk
        for xi in [-4.0, -1.5, 0.0, 0.3, 1.0, 2.0, 5.5] {
            let m = 200_000; // even
            let kmax = 10.0;
            let dk = kmax / m as f64;
            let mut oracle = 0.0;
            for j in 0..=m {
                let k = j as f64 * dk;
                let w = if j == 0 || j == m {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                oracle += w * dk / 3.0 * (-k * k / 2.0).exp() * (k * xi).sin();
            }
            let v = e.eval_real(xi).unwrap();
            assert!(
                (v.re - oracle).abs() < 1e-9,
                "xi={xi}: {} vs {oracle}",
                v.re
            );
        }
        // real source: F(0) = 0 and the profile is real
        assert!(e.eval_real(0.0).unwrap().norm() < 1e-14);
    }

    #[test]
    fn profile_from_source_3d_exponential_transform() {
        // psi_t = e^{-k}: F(xi) = (2/sqrt(2 pi)) int k e^{-k} sin(k xi) dk
        //        = (2/sqrt(2 pi)) 2 xi / (1 + xi^2)^2
        let table = CubicTable::sample(0.0, 60.0, 4001, OutOfRange::Zero, |k| {
            Complex64::new((-k).exp(), 0.0)
        })
        .unwrap();
        let amp = SpectralAmplitude::tabulated(table).unwrap();
        let n = Direction::from_spherical(1.0, 0.5);
        let profile = profile_from_source_3d(&amp, &n, -4.0, 4.0, 2001).unwrap();
        let e = profile.evaluator(0);
        for xi in [-2.0, -0.5, 0.0, 0.75, 1.5, 3.0] {
            let expect = (2.0 / TWO_PI.sqrt()) * 2.0 * xi / (1.0 + xi * xi).powi(2);
            let v = e.eval_real(xi).unwrap();
            assert!((v.re - expect).abs() < 2e-6, "xi={xi}: {} vs {expect}", v.re);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn profile_from_source_3d_zero_amplitude() {
        let zero = CubicTable::sample(0.0, 5.0, 33, OutOfRange::Zero, |_| {
            Complex64::new(0.0, 0.0)
        })
        .unwrap();
        let amp = SpectralAmplitude::tabulated(zero).unwrap();
        let n = Direction::from_spherical(0.3, 0.0);
        let profile = profile_from_source_3d(&amp, &n, -2.0, 2.0, 101).unwrap();
        assert!(profile.evaluator(0).eval_real(1.0).unwrap().norm() == 0.0);
    }

    #[test]
    fn source_from_constant_profile_vanishes() {
        let dirs = circle_quadrature(8).unwrap();
        let grid = GridSpec::new(vec![
            Axis::new("x", -1.0, 1.0, 5),
            Axis::new("y", -1.0, 1.0, 5),
        ])
        .unwrap();
        let s = source_from_profiles(&poly_profile(&[5.0]), &dirs, &grid).unwrap();
        assert!(s.max_abs() < 1e-15);
    }

    #[test]
    fn source_from_single_direction_unit_slope() {
        let dirs = DirectionSet::new(
            vec![Direction::from_angle(0.4)],
            vec![TWO_PI],
            crate::rotations::QuadratureMode::Deterministic,
            DirectionDomain::Circle,
        )
        .unwrap();
        let grid = GridSpec::new(vec![
            Axis::new("x", -1.0, 1.0, 3),
            Axis::new("y", -1.0, 1.0, 3),
        ])
        .unwrap();
        let s = source_from_profiles(&poly_profile(&[0.0, 1.0]), &dirs, &grid).unwrap();
        for v in s.values() {
            assert!((v.re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn source_round_trip_through_profile() {
        // gaussian source, sigma = 1: psi_t = e^{-k^2/2}; the derivative
        // average of the tabulated profile must reproduce psi.
        let amp = SpectralAmplitude::gaussian(1.0, vec![]).unwrap();
        let dirs = circle_quadrature(64).unwrap();
        let n0 = &dirs.nodes()[0];
        let profile = profile_from_source_2d(&amp, n0, -6.0, 6.0, 4001).unwrap();
        let grid = GridSpec::new(vec![
            Axis::new("x", -2.0, 2.0, 17),
            Axis::new("y", -2.0, 2.0, 17),
        ])
        .unwrap();
        let recon = source_from_profiles(&profile, &dirs, &grid).unwrap();
        let psi = sample_analytic(&AnalyticFamily::gaussian(vec![0.0, 0.0], 1.0).unwrap(), &grid)
            .unwrap();
        let err = compare_fields(&recon, &psi).unwrap();
        assert!(err.linf_rel < 1e-3, "relative error {}", err.linf_rel);
    }

    #[test]
    fn axis_extension_polynomials() {
        let dirs = half_circle_quadrature(16).unwrap();
        let grid = GridSpec::new(vec![Axis::new("r", 0.1, 1.0, 7), Axis::new("z", 0.5, 2.0, 7)])
            .unwrap();
        // f(zeta) = zeta: V = z
        let f = axis_to_axisymmetric(
            &AnalyticFamily::polynomial_real(&[0.0, 1.0]).unwrap(),
            &dirs,
            &grid,
        )
        .unwrap();
        for (i, v) in f.values().iter().enumerate() {
            assert!((v.re - grid.coords(i)[1]).abs() < 1e-14);
            assert!(v.im.abs() < 1e-14);
        }
        // f(zeta) = zeta^2: V = z^2 - r^2/2; frozen value 3.5 at (1, 2)
        let f = axis_to_axisymmetric(
            &AnalyticFamily::polynomial_real(&[0.0, 0.0, 1.0]).unwrap(),
            &dirs,
            &grid,
        )
        .unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let c = grid.coords(i);
            assert!((v.re - (c[1] * c[1] - c[0] * c[0] / 2.0)).abs() < 1e-13);
        }
        let square = AnalyticFamily::polynomial_real(&[0.0, 0.0, 1.0]).unwrap();
        let rep = AxisExtension::new(&square, &dirs).unwrap();
        assert!((rep.eval(1.0, 2.0).unwrap().re - 3.5).abs() < 1e-13);
    }

    #[test]
    fn axis_extension_inverse_distance() {
        // f(zeta) = 1/zeta extends to 1/sqrt(r^2 + z^2)
        let dirs = half_circle_quadrature(64).unwrap();
        let fam = AnalyticFamily::rational_inverse(Complex64::new(0.0, 0.0));
        let rep = AxisExtension::new(&fam, &dirs).unwrap();
        let v = rep.eval(1.0, 1.0).unwrap();
        assert!((v.re - 1.0 / 2f64.sqrt()).abs() < 1e-12, "{}", v.re);
        assert!(v.im.abs() < 1e-12);
        for (r, z) in [(0.1, 0.5), (0.5, 0.5), (1.0, 2.0), (0.9, 0.6)] {
            let v = rep.eval(r, z).unwrap();
            let expect = 1.0 / (r * r + z * z).sqrt();
            assert!((v.re - expect).abs() < 1e-10 * expect, "r={r} z={z}");
        }
    }

    #[test]
    fn axis_extension_pole_on_segment_errors() {
        // 1/zeta with z = 0 on the grid: the segment passes through the pole
        let dirs = half_circle_quadrature(9).unwrap();
        let fam = AnalyticFamily::rational_inverse(Complex64::new(0.0, 0.0));
        let rep = AxisExtension::new(&fam, &dirs).unwrap();
        // the middle node of an odd half-circle rule has cos phi = 0
        assert!(matches!(
            rep.eval(1.0, 0.0),
            Err(Error::SingularSample { .. })
        ));
    }

    #[test]
    fn axisym_average_of_x_independent_solution_is_identity() {
        let dirs = circle_quadrature(8).unwrap();
        let grid = GridSpec::new(vec![
            Axis::new("t", 0.0, 1.0, 3),
            Axis::new("r", 0.2, 1.0, 3),
            Axis::new("z", -1.0, 1.0, 3),
        ])
        .unwrap();
        let u12 = |t: f64, _x: f64, z: f64| Ok(Complex64::new(t * t + z, 0.0));
        let f = axisym_wave_from_12(&u12, &dirs, &grid).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let c = grid.coords(i);
            assert!((v.re - (c[0] * c[0] + c[2])).abs() < 1e-14);
        }
    }

    #[test]
    fn axisym_average_of_quadratic_wave_solution() {
        // u12 = 2 t^2 + x^2 + z^2 solves u_tt = u_xx + u_zz; its azimuthal
        // average is 2 t^2 + r^2/2 + z^2.
        let dirs = circle_quadrature(8).unwrap();
        let grid = GridSpec::new(vec![
            Axis::new("t", 0.0, 1.0, 4),
            Axis::new("r", 0.2, 1.0, 4),
            Axis::new("z", -1.0, 1.0, 4),
        ])
        .unwrap();
        let u12 =
            |t: f64, x: f64, z: f64| Ok(Complex64::new(2.0 * t * t + x * x + z * z, 0.0));
        let f = axisym_wave_from_12(&u12, &dirs, &grid).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let c = grid.coords(i);
            let expect = 2.0 * c[0] * c[0] + c[1] * c[1] / 2.0 + c[2] * c[2];
            assert!((v.re - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn twistor_zero_profile_gives_zero_field() {
        let curve = TwistorCurve::circle(1.0, 8).unwrap();
        let h = poly_profile(&[0.0]);
        let f = twistor_superpose(&h, &curve, &xyz_grid(3, -1.0, 1.0)).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn twistor_real_axis_reproduces_whittaker() {
        // With h(zeta; omega) = F(zeta/(omega^2+1)) 2/(omega^2+1) the curve
        // integral is the angle integral after the rational substitution;
        // per-sample profiles carry the scaling.
        let m = 16;
        let curve = TwistorCurve::real_axis_from_angles(m).unwrap();
        let f_coeff = 1.0 / TWO_PI;
        let evaluators: Vec<ProfileEvaluator> = curve
            .samples()
            .iter()
            .map(|s| {
                let d = s.omega.u * s.omega.u + 1.0;
                // F(xi) = xi^2 / (2 pi) composed with xi = zeta / d, times 2/d
                let scale = 2.0 / d * f_coeff / (d * d);
                ProfileEvaluator::analytic(
                    AnalyticFamily::polynomial(vec![
                        Complex64::new(0.0, 0.0),
                        Complex64::new(0.0, 0.0),
                        Complex64::new(scale, 0.0),
                    ])
                    .unwrap(),
                )
                .unwrap()
            })
            .collect();
        let h = PlaneWaveProfile::per_node(evaluators);
        let grid = xyz_grid(5, -1.0, 1.0);
        let twistor_field = twistor_superpose(&h, &curve, &grid).unwrap();

        let dirs = circle_quadrature(m).unwrap();
        let whittaker = laplace3_whittaker(&poly_profile(&[0.0, 0.0, f_coeff]), &dirs, &grid)
            .unwrap();
        let err = compare_fields(&twistor_field, &whittaker).unwrap();
        assert!(err.linf_abs < 1e-8, "difference {}", err.linf_abs);
    }

    #[test]
    fn twistor_circle_curve_output_is_harmonic() {
        // h(zeta) = zeta^2 shared: the integrand is entire in omega, so the
        // closed-curve integral collapses to (numerical) zero, which is
        // trivially harmonic.
        let curve = TwistorCurve::circle(1.0, 8).unwrap();
        let h = poly_profile(&[0.0, 0.0, 1.0]);
        let grid = xyz_grid(33, -0.5, 0.5);
        let f = twistor_superpose(&h, &curve, &grid).unwrap();
        let op = OperatorSpec::laplace(3).unwrap();
        let r = fd_residual(&f, &op).unwrap();
        assert!(r.linf < 1e-9, "residual {}", r.linf);

        // per-sample weight 1/omega makes the integral pick up the residue:
        // V = 2 pi i (z + i x)^2, a genuinely nonzero harmonic field.
        let evaluators: Vec<ProfileEvaluator> = curve
            .samples()
            .iter()
            .map(|s| {
                let inv_omega = Complex64::new(1.0, 0.0) / s.omega.as_complex();
                ProfileEvaluator::analytic(
                    AnalyticFamily::polynomial(vec![
                        Complex64::new(0.0, 0.0),
                        Complex64::new(0.0, 0.0),
                        inv_omega,
                    ])
                    .unwrap(),
                )
                .unwrap()
            })
            .collect();
        let h = PlaneWaveProfile::per_node(evaluators);
        let f = twistor_superpose(&h, &curve, &grid).unwrap();
        assert!(f.max_abs() > 1.0);
        for (i, v) in f.values().iter().enumerate() {
            let c = grid.coords(i);
            let w = Complex64::new(c[2], c[0]); // z + i x
            let expect = Complex64::new(0.0, TWO_PI) * w * w;
            assert!((v - expect).norm() < 1e-12, "at {c:?}: {v} vs {expect}");
        }
        let r = fd_residual(&f, &op).unwrap();
        assert!(r.linf < 1e-9, "residual {}", r.linf);
    }
}
