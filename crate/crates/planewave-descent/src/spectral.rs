//! Direct Fourier synthesis: the oracle every superposition is checked
//! against. A truncated trapezoid sum over wavevectors, with the
//! distinguished component fixed by the operator's dispersion constraint,
//! is an exact solution of the operator (each retained mode solves it),
//! so finite-difference residuals of synthesized fields are pure stencil
//! truncation error.
//!
//! Normalization: the symmetric `(2pi)^{N/2}` Fourier convention is used
//! throughout the crate; amplitudes passed here are summed as
//! `sum_k w_k exp(i(k_{N+1} x_{N+1} + k.x)) amp(k)` with no hidden
//! prefactor, so any convention constant belongs to the amplitude.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{GridSpec, ScalarField};
use crate::numerics::{pairwise_sum, CubicTable};

/// A constant-coefficient second-order operator `sum_i c_i d^2/dx_i^2 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// Laplace equation in `dims` in {2, 3} dimensions; distinguished axis z.
    Laplace { dims: usize },
    /// Wave equation in 1+N dimensions, N in {1, 2, 3}; distinguished axis t
    /// with `u_tt = Delta u`.
    Wave { spatial_dims: usize },
    /// `u_zz + alpha u_xx + beta u_yy = 0`, alpha, beta > 0; distinguished z.
    AnisoLaplace { alpha: f64, beta: f64 },
}

/// Branch choice for the wave dispersion root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WaveBranch {
    #[default]
    Positive,
    Negative,
}

impl OperatorSpec {
    pub fn laplace(dims: usize) -> Result<Self> {
        if dims != 2 && dims != 3 {
            return Err(Error::UnsupportedDimension {
                got: dims,
                supported: "laplace in 2 or 3 dimensions",
            });
        }
        Ok(OperatorSpec::Laplace { dims })
    }

    pub fn wave(spatial_dims: usize) -> Result<Self> {
        if !(1..=3).contains(&spatial_dims) {
            return Err(Error::UnsupportedDimension {
                got: spatial_dims,
                supported: "wave in 1+1, 1+2 or 1+3 dimensions",
            });
        }
        Ok(OperatorSpec::Wave { spatial_dims })
    }

    pub fn aniso_laplace(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::Domain(format!(
                "anisotropic coefficients must be positive, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(OperatorSpec::AnisoLaplace { alpha, beta })
    }

    /// The coordinate singled out by the dispersion constraint.
    pub fn distinguished_axis(&self) -> &'static str {
        match self {
            OperatorSpec::Wave { .. } => "t",
            _ => "z",
        }
    }

    /// Names of the remaining (wavevector) axes, in canonical order.
    pub fn spatial_axes(&self) -> Vec<&'static str> {
        match self {
            OperatorSpec::Laplace { dims: 2 } => vec!["x"],
            OperatorSpec::Laplace { .. } => vec!["x", "y"],
            OperatorSpec::AnisoLaplace { .. } => vec!["x", "y"],
            OperatorSpec::Wave { spatial_dims } => {
                ["x", "y", "z"][..*spatial_dims].to_vec()
            }
        }
    }

    /// Number of wavevector components.
    pub fn k_dims(&self) -> usize {
        self.spatial_axes().len()
    }

    /// Stencil coefficient for a named grid axis. Radial axes (`r`, `rho`)
    /// stand for collapsed transverse pairs of the isotropic operators.
    pub fn coefficient_for_axis(&self, name: &str) -> Result<f64> {
        let radial = matches!(name, "r" | "rho" | "ρ");
        match self {
            OperatorSpec::Laplace { .. } => match name {
                "x" | "y" | "z" => Ok(1.0),
                _ if radial => Ok(1.0),
                _ => Err(Error::OperatorMismatch(format!(
                    "axis `{name}` is not a Laplace coordinate"
                ))),
            },
            OperatorSpec::Wave { .. } => match name {
                "t" => Ok(1.0),
                "x" | "y" | "z" => Ok(-1.0),
                _ if radial => Ok(-1.0),
                _ => Err(Error::OperatorMismatch(format!(
                    "axis `{name}` is not a wave coordinate"
                ))),
            },
            OperatorSpec::AnisoLaplace { alpha, beta } => match name {
                "z" => Ok(1.0),
                "x" => Ok(*alpha),
                "y" => Ok(*beta),
                _ => Err(Error::OperatorMismatch(format!(
                    "axis `{name}` is not an anisotropic-Laplace coordinate (cartesian x, y, z only)"
                ))),
            },
        }
    }

    /// Validate the effective arity of a grid against the operator. Radial
    /// axes already counted double by the caller.
    pub fn check_grid_arity(&self, spatial_effective: usize, has_time: bool) -> Result<()> {
        match self {
            OperatorSpec::Laplace { dims } => {
                if has_time || spatial_effective != *dims {
                    return Err(Error::OperatorMismatch(format!(
                        "laplace({dims}) expects {dims} effective spatial axes and no time axis"
                    )));
                }
            }
            OperatorSpec::Wave { spatial_dims } => {
                if !has_time || spatial_effective != *spatial_dims {
                    return Err(Error::OperatorMismatch(format!(
                        "wave(1+{spatial_dims}) expects a t axis plus {spatial_dims} effective spatial axes"
                    )));
                }
            }
            OperatorSpec::AnisoLaplace { .. } => {
                if has_time || spatial_effective != 3 {
                    return Err(Error::OperatorMismatch(
                        "anisotropic laplace expects cartesian axes x, y, z".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Solve the dispersion constraint for the distinguished component.
    /// Decaying branch `i |k|`-type roots for the Laplace kinds; the wave
    /// kind defaults to the positive-frequency branch.
    pub fn dispersion_root(&self, k: &[f64], branch: WaveBranch) -> Result<Complex64> {
        if k.len() != self.k_dims() {
            return Err(Error::OperatorMismatch(format!(
                "wavevector has {} components, operator expects {}",
                k.len(),
                self.k_dims()
            )));
        }
        if k.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical("non-finite wavevector".into()));
        }
        let norm = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
        Ok(match self {
            OperatorSpec::Laplace { .. } => Complex64::new(0.0, norm(k)),
            OperatorSpec::AnisoLaplace { alpha, beta } => {
                Complex64::new(0.0, (alpha * k[0] * k[0] + beta * k[1] * k[1]).sqrt())
            }
            OperatorSpec::Wave { .. } => match branch {
                WaveBranch::Positive => Complex64::new(norm(k), 0.0),
                WaveBranch::Negative => Complex64::new(-norm(k), 0.0),
            },
        })
    }
}

/// Solve the dispersion constraint (free-function form, default branch).
pub fn dispersion_root(op: &OperatorSpec, k: &[f64]) -> Result<Complex64> {
    op.dispersion_root(k, WaveBranch::Positive)
}

/// Spectral amplitude `f(k)` over the wavevector subspace.
#[derive(Debug, Clone)]
pub enum SpectralAmplitude {
    /// `exp(-|k - center|^2 / (2 sigma^2))`.
    GaussianK { sigma: f64, center: Vec<f64> },
    /// `exp(-(|k| - k0)^2 / (2 width^2))`: an annulus, vanishing fast at
    /// k = 0, which keeps dispersion-cone kinks out of synthesized fields.
    RingK { k0: f64, width: f64 },
    /// Radial table: `amp(k) = s(|k|)`, zero outside its finite support.
    Tabulated { table: CubicTable },
}

impl SpectralAmplitude {
    pub fn gaussian(sigma: f64, center: Vec<f64>) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!(
                "gaussian-k width must be positive, got {sigma}"
            )));
        }
        Ok(SpectralAmplitude::GaussianK { sigma, center })
    }

    pub fn ring(k0: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || k0 < 0.0 {
            return Err(Error::Domain(format!(
                "ring-k needs k0 >= 0 and width > 0, got k0={k0}, width={width}"
            )));
        }
        Ok(SpectralAmplitude::RingK { k0, width })
    }

    /// Radial table on [0, k_max]; the last sample must be negligible so the
    /// support really is finite.
    pub fn tabulated(table: CubicTable) -> Result<Self> {
        let tail = table.values().last().unwrap().norm();
        if tail > 1e-12 * table.max_abs().max(1e-300) {
            return Err(Error::NonDecaying(
                "tabulated amplitude does not vanish at the end of its support".into(),
            ));
        }
        Ok(SpectralAmplitude::Tabulated { table })
    }

    pub fn eval(&self, k: &[f64]) -> Result<Complex64> {
        let kn = k.iter().map(|c| c * c).sum::<f64>().sqrt();
        match self {
            SpectralAmplitude::GaussianK { sigma, center } => {
                let d2: f64 = if center.is_empty() {
                    kn * kn
                } else {
                    k.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum()
                };
                Ok(Complex64::new((-d2 / (2.0 * sigma * sigma)).exp(), 0.0))
            }
            SpectralAmplitude::RingK { k0, width } => {
                let d = kn - k0;
                Ok(Complex64::new((-d * d / (2.0 * width * width)).exp(), 0.0))
            }
            SpectralAmplitude::Tabulated { table } => table.eval(kn),
        }
    }

    /// Evaluate along a ray: `amp(k n)` for scalar k >= 0.
    pub fn eval_radial(&self, k: f64, n: &[f64]) -> Result<Complex64> {
        let kv: Vec<f64> = n.iter().map(|c| c * k).collect();
        self.eval(&kv)
    }

    /// Radius beyond which the amplitude is below roughly 1e-16 of its peak;
    /// half-line integrals over the amplitude truncate here.
    pub fn support_radius(&self) -> f64 {
        // exp(-d^2 / (2 sigma^2)) < 1e-16 for d > 8.6 sigma
        const TAIL_SIGMAS: f64 = 8.6;
        match self {
            SpectralAmplitude::GaussianK { sigma, center } => {
                let c_norm = center.iter().map(|c| c * c).sum::<f64>().sqrt();
                c_norm + TAIL_SIGMAS * sigma
            }
            SpectralAmplitude::RingK { k0, width } => k0 + TAIL_SIGMAS * width,
            SpectralAmplitude::Tabulated { table } => table.x_max(),
        }
    }
}

struct KNode {
    k: Vec<f64>,
    weight: f64,
    root: Complex64,
    amp: Complex64,
}

fn trapezoid_k_nodes(
    op: &OperatorSpec,
    amp: &SpectralAmplitude,
    kmax: f64,
    nk: usize,
    branch: WaveBranch,
) -> Result<Vec<KNode>> {
    if !(kmax > 0.0) {
        return Err(Error::Domain(format!("kmax must be positive, got {kmax}")));
    }
    if nk < 2 {
        return Err(Error::Domain(format!("nk must be at least 2, got {nk}")));
    }
    let nd = op.k_dims();
    let dk = 2.0 * kmax / (nk - 1) as f64;
    let total = nk.pow(nd as u32);
    let mut nodes = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut k = vec![0.0; nd];
        let mut w = 1.0;
        for d in (0..nd).rev() {
            let j = rem % nk;
            rem /= nk;
            k[d] = -kmax + j as f64 * dk;
            let wd = if j == 0 || j == nk - 1 { 0.5 * dk } else { dk };
            w *= wd;
        }
        let root = op.dispersion_root(&k, branch)?;
        let a = amp.eval(&k)?;
        nodes.push(KNode {
            k,
            weight: w,
            root,
            amp: a,
        });
    }
    Ok(nodes)
}

fn grid_axis_map(op: &OperatorSpec, grid: &GridSpec) -> Result<(usize, Vec<usize>)> {
    let dist = op.distinguished_axis();
    let dist_idx = grid
        .axis_index(dist)
        .ok_or_else(|| Error::GridMismatch(format!("grid lacks the `{dist}` axis")))?;
    let mut spatial = Vec::new();
    for name in op.spatial_axes() {
        spatial.push(grid.axis_index(name).ok_or_else(|| {
            Error::GridMismatch(format!("grid lacks the `{name}` axis"))
        })?);
    }
    if grid.dims() != spatial.len() + 1 {
        return Err(Error::GridMismatch(format!(
            "grid has {} axes, operator expects {}",
            grid.dims(),
            spatial.len() + 1
        )));
    }
    Ok((dist_idx, spatial))
}

/// Truncated Fourier synthesis `u(x) = sum_k w_k e^{i(k_{N+1} x_{N+1} + k.x)} amp(k)`
/// with trapezoid weights on `[-kmax, kmax]^N`. The result is an exact
/// solution of the operator; truncation only affects which solution.
pub fn synthesize(
    op: &OperatorSpec,
    amp: &SpectralAmplitude,
    grid: &GridSpec,
    kmax: f64,
    nk: usize,
) -> Result<ScalarField> {
    synthesize_with_branch(op, amp, grid, kmax, nk, WaveBranch::Positive)
}

pub fn synthesize_with_branch(
    op: &OperatorSpec,
    amp: &SpectralAmplitude,
    grid: &GridSpec,
    kmax: f64,
    nk: usize,
    branch: WaveBranch,
) -> Result<ScalarField> {
    let (dist_idx, spatial_idx) = grid_axis_map(op, grid)?;
    if !matches!(op, OperatorSpec::Wave { .. }) {
        let zax = &grid.axes()[dist_idx];
        if zax.min < 0.0 {
            return Err(Error::Domain(format!(
                "decaying branch requires z >= 0 on the grid; z_min = {} would diverge",
                zax.min
            )));
        }
    }
    let knodes = trapezoid_k_nodes(op, amp, kmax, nk, branch)?;

    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let coords = grid.coords(flat);
            let xn1 = coords[dist_idx];
            let x: Vec<f64> = spatial_idx.iter().map(|&i| coords[i]).collect();
            let terms: Vec<Complex64> = knodes
                .iter()
                .map(|node| {
                    let kdotx: f64 = node.k.iter().zip(&x).map(|(a, b)| a * b).sum();
                    let phase = node.root.re * xn1 + kdotx;
                    let decay = (-node.root.im * xn1).exp();
                    node.amp * node.weight * decay * Complex64::new(phase.cos(), phase.sin())
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();

    ScalarField::new(grid.clone(), values).map_err(|e| match e {
        Error::NonFinite { index, coords } => Error::Numerical(format!(
            "non-finite accumulation at node {index} ({coords:?})"
        )),
        other => other,
    })
}

/// Initial-value wave synthesis `u = sum_k w_k amp(k) sin(|k| t) e^{i k.x}`:
/// both dispersion branches combined so that `u(0, x) = 0` exactly and
/// `u_t(0, x) = sum_k w_k |k| amp(k) e^{i k.x}`.
pub fn wave_sine_synthesize(
    amp: &SpectralAmplitude,
    grid: &GridSpec,
    kmax: f64,
    nk: usize,
) -> Result<ScalarField> {
    let n = grid.dims().saturating_sub(1);
    if n != 2 && n != 3 {
        return Err(Error::UnsupportedDimension {
            got: n,
            supported: "1+2 or 1+3 dimensional wave grids",
        });
    }
    let op = OperatorSpec::wave(n)?;
    let (t_idx, spatial_idx) = grid_axis_map(&op, grid)?;
    let knodes = trapezoid_k_nodes(&op, amp, kmax, nk, WaveBranch::Positive)?;

    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let coords = grid.coords(flat);
            let t = coords[t_idx];
            let x: Vec<f64> = spatial_idx.iter().map(|&i| coords[i]).collect();
            let terms: Vec<Complex64> = knodes
                .iter()
                .map(|node| {
                    let kdotx: f64 = node.k.iter().zip(&x).map(|(a, b)| a * b).sum();
                    let s = (node.root.re * t).sin();
                    node.amp * node.weight * s * Complex64::new(kdotx.cos(), kdotx.sin())
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();

    ScalarField::new(grid.clone(), values).map_err(|e| match e {
        Error::NonFinite { index, coords } => Error::Numerical(format!(
            "non-finite accumulation at node {index} ({coords:?})"
        )),
        other => other,
    })
}
