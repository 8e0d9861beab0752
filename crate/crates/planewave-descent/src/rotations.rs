//! Directions, quadrature over the circle and the sphere, Monte Carlo
//! rotation sampling, and the rational (twistor) chart of 3D rotations.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// A unit vector in R^2 or R^3.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    components: Vec<f64>,
}

impl Direction {
    /// Accepts a vector already normalized to 1e-14.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 2 || components.len() > 3 {
            return Err(Error::UnsupportedDimension {
                got: components.len(),
                supported: "2 or 3",
            });
        }
        let norm: f64 = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidQuadrature(format!(
                "direction norm {norm} deviates from 1 by more than 1e-14"
            )));
        }
        Ok(Direction { components })
    }

    pub fn from_angle(phi: f64) -> Self {
        Direction {
            components: vec![phi.cos(), phi.sin()],
        }
    }

    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = (theta.sin(), theta.cos());
        Direction {
            components: vec![st * phi.cos(), st * phi.sin(), ct],
        }
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.components.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// Which manifold a [`DirectionSet`] integrates over, fixing the expected
/// total weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionDomain {
    /// Full circle, total weight 2*pi.
    Circle,
    /// Half circle phi in [0, pi], total weight pi (axis-value formula).
    HalfCircle,
    /// Full sphere, total weight 4*pi.
    Sphere,
    /// Caller-supplied measure; total weight unchecked.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureMode {
    Deterministic,
    MonteCarlo { seed: u64 },
}

/// Quadrature nodes (unit vectors) with weights over S^1 or S^2.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    nodes: Vec<Direction>,
    weights: Vec<f64>,
    mode: QuadratureMode,
    domain: DirectionDomain,
}

impl DirectionSet {
    pub fn new(
        nodes: Vec<Direction>,
        weights: Vec<f64>,
        mode: QuadratureMode,
        domain: DirectionDomain,
    ) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidQuadrature(
                "node and weight counts must match and be nonzero".into(),
            ));
        }
        let dim = nodes[0].dim();
        if nodes.iter().any(|n| n.dim() != dim) {
            return Err(Error::InvalidQuadrature("mixed node dimensions".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidQuadrature("weights must be positive".into()));
        }
        // compensated sum: plain accumulation over 1e5 weights drifts past
        // the 1e-12 tolerance
        let mut total = 0.0f64;
        let mut comp = 0.0f64;
        for &w in &weights {
            let y = w - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        }
        let expected = match domain {
            DirectionDomain::Circle => Some(TWO_PI),
            DirectionDomain::HalfCircle => Some(std::f64::consts::PI),
            DirectionDomain::Sphere => Some(FOUR_PI),
            DirectionDomain::Custom => None,
        };
        if let Some(exp) = expected {
            if (total - exp).abs() > 1e-12 {
                return Err(Error::InvalidQuadrature(format!(
                    "total weight {total} deviates from {exp} by more than 1e-12"
                )));
            }
        }
        Ok(DirectionSet {
            nodes,
            weights,
            mode,
            domain,
        })
    }

    pub fn nodes(&self) -> &[Direction] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mode(&self) -> QuadratureMode {
        self.mode
    }

    pub fn domain(&self) -> DirectionDomain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Direction, f64)> {
        self.nodes.iter().zip(self.weights.iter().copied())
    }

    /// Quadrature of a scalar function of the direction.
    pub fn integrate(&self, mut f: impl FnMut(&Direction) -> f64) -> f64 {
        self.iter().map(|(n, w)| w * f(n)).sum()
    }
}

/// Uniform rule on the full circle: nodes at `2 pi j / m`, weights `2 pi / m`.
/// Exact for trigonometric polynomials of degree below `m`.
pub fn circle_quadrature(m: usize) -> Result<DirectionSet> {
    if m < 2 {
        return Err(Error::InvalidQuadrature(format!(
            "circle rule needs at least 2 nodes, got {m}"
        )));
    }
    let nodes = (0..m)
        .map(|j| Direction::from_angle(TWO_PI * j as f64 / m as f64))
        .collect();
    let w = TWO_PI / m as f64;
    DirectionSet::new(
        nodes,
        vec![w; m],
        QuadratureMode::Deterministic,
        DirectionDomain::Circle,
    )
}

/// Midpoint rule on the half circle phi in [0, pi] with weights `pi / m`;
/// spectrally accurate for integrands even about both endpoints, which is
/// the symmetry of the axis-value integral.
pub fn half_circle_quadrature(m: usize) -> Result<DirectionSet> {
    if m < 2 {
        return Err(Error::InvalidQuadrature(format!(
            "half-circle rule needs at least 2 nodes, got {m}"
        )));
    }
    let nodes = (0..m)
        .map(|j| Direction::from_angle(std::f64::consts::PI * (j as f64 + 0.5) / m as f64))
        .collect();
    let w = std::f64::consts::PI / m as f64;
    DirectionSet::new(
        nodes,
        vec![w; m],
        QuadratureMode::Deterministic,
        DirectionDomain::HalfCircle,
    )
}

/// Product rule on the sphere: Gauss-Legendre in cos(theta) (l nodes) times
/// the uniform circle rule in phi (m nodes). Total weight 4*pi.
pub fn sphere_quadrature(l: usize, m: usize) -> Result<DirectionSet> {
    if l < 1 {
        return Err(Error::InvalidQuadrature(format!(
            "sphere rule needs at least 1 polar node, got {l}"
        )));
    }
    if m < 2 {
        return Err(Error::InvalidQuadrature(format!(
            "sphere rule needs at least 2 azimuthal nodes, got {m}"
        )));
    }
    let (ct_nodes, ct_weights) = gauss_legendre(l);
    let wphi = TWO_PI / m as f64;
    let mut nodes = Vec::with_capacity(l * m);
    let mut weights = Vec::with_capacity(l * m);
    for (ct, wl) in ct_nodes.iter().zip(&ct_weights) {
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        for j in 0..m {
            let phi = TWO_PI * j as f64 / m as f64;
            nodes.push(Direction {
                components: vec![st * phi.cos(), st * phi.sin(), *ct],
            });
            weights.push(wl * wphi);
        }
    }
    DirectionSet::new(
        nodes,
        weights,
        QuadratureMode::Deterministic,
        DirectionDomain::Sphere,
    )
}

/// Uniform random directions with equal weights `measure / m`. Node `j` is
/// derived from `(seed, j)` via an independent stream, so the sample is
/// reproducible and independent of evaluation order.
pub fn monte_carlo_directions(m: usize, seed: u64, dim: usize) -> Result<DirectionSet> {
    if m < 1 {
        return Err(Error::InvalidQuadrature("need at least one sample".into()));
    }
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDimension {
            got: dim,
            supported: "2 or 3",
        });
    }
    let measure = if dim == 2 { TWO_PI } else { FOUR_PI };
    let mut nodes = Vec::with_capacity(m);
    for j in 0..m {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        if dim == 2 {
            let phi: f64 = rng.gen_range(0.0..TWO_PI);
            nodes.push(Direction::from_angle(phi));
        } else {
            let ct: f64 = rng.gen_range(-1.0..=1.0);
            let phi: f64 = rng.gen_range(0.0..TWO_PI);
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            nodes.push(Direction {
                components: vec![st * phi.cos(), st * phi.sin(), ct],
            });
        }
    }
    DirectionSet::new(
        nodes,
        vec![measure / m as f64; m],
        QuadratureMode::MonteCarlo { seed },
        if dim == 2 {
            DirectionDomain::Circle
        } else {
            DirectionDomain::Sphere
        },
    )
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mh = (n + 1) / 2;
    for i in 0..mh {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_and_derivative(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|xi| mid + half * xi).collect(),
        w.iter().map(|wi| half * wi).collect(),
    )
}

/// A point `omega = u + i v` of the rational rotation chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistorPoint {
    pub u: f64,
    pub v: f64,
}

impl TwistorPoint {
    pub fn new(u: f64, v: f64) -> Self {
        TwistorPoint { u, v }
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.u, self.v)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.u * self.u + self.v * self.v
    }
}

/// The 3D rotation parameterized by `omega`, scaled by `1/(|omega|^2 + 1)`.
/// Orthogonal with determinant +1 for every finite `omega`.
pub fn twistor_rotation(omega: TwistorPoint) -> [[f64; 3]; 3] {
    let (u, v) = (omega.u, omega.v);
    let d = omega.norm_sqr() + 1.0;
    [
        [
            (u * u - v * v - 1.0) / d,
            2.0 * u / d,
            -2.0 * u * v / d,
        ],
        [
            -2.0 * u / d,
            (u * u + v * v - 1.0) / d,
            2.0 * v / d,
        ],
        [2.0 * u * v / d, 2.0 * v / d, (u * u - v * v + 1.0) / d],
    ]
}

pub fn apply_rotation(r: &[[f64; 3]; 3], x: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, row) in r.iter().enumerate() {
        out[i] = row[0] * x[0] + row[1] * x[1] + row[2] * x[2];
    }
    out
}

/// The superposition phase `(omega^2+1) z - i (omega^2-1) x - 2 i omega y`.
/// Equals `(|omega|^2 + 1)(z' - i x')` with `(x', z')` from
/// [`twistor_rotation`]; that identity is what fixes the convention.
pub fn twistor_phase(omega: TwistorPoint, point: &[f64; 3]) -> Complex64 {
    let w = omega.as_complex();
    let w2 = w * w;
    let (x, y, z) = (point[0], point[1], point[2]);
    (w2 + 1.0) * z - Complex64::i() * (w2 - 1.0) * x - Complex64::i() * 2.0 * w * y
}

/// Map an angle in (0, 2*pi) to the real twistor parameter `cot(phi/2)`,
/// satisfying `cos phi = (w^2-1)/(w^2+1)` and `sin phi = 2w/(w^2+1)`.
pub fn angle_to_twistor(phi: f64) -> Result<TwistorPoint> {
    if !(phi > 0.0 && phi < TWO_PI) {
        return Err(Error::TwistorDomain { phi });
    }
    let half = 0.5 * phi;
    Ok(TwistorPoint::new(half.cos() / half.sin(), 0.0))
}
