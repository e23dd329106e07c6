use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance on `|signed_distance|` for a point to count as on the membrane.
pub const BOUNDARY_TOL: f64 = 1e-9;

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-10;

type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Minimal-image displacement on the unit circle, in `[-1/2, 1/2)`.
#[inline]
pub fn wrap_delta(dx: f64) -> f64 {
    dx - (dx + 0.5).floor()
}

#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// User level set: `Λ = {phi <= 0}`, with a declared tubular width inside
/// which `grad phi` does not vanish and projection is well defined.
#[derive(Clone)]
pub struct LevelSet {
    dim: usize,
    phi: ScalarField,
    grad: Option<VectorField>,
    tubular_width: f64,
}

impl LevelSet {
    pub fn new(
        dim: usize,
        phi: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        tubular_width: f64,
    ) -> Self {
        Self {
            dim,
            phi: Arc::new(phi),
            grad: None,
            tubular_width,
        }
    }

    pub fn with_gradient(
        mut self,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.grad {
            return g(u);
        }
        let h = 1e-6;
        let mut p = u.to_vec();
        (0..self.dim)
            .map(|j| {
                p[j] = u[j] + h;
                let fp = (self.phi)(&p);
                p[j] = u[j] - h;
                let fm = (self.phi)(&p);
                p[j] = u[j];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }
}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevelSet")
            .field("dim", &self.dim)
            .field("tubular_width", &self.tubular_width)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    /// `[a, b)` on the circle, `0 <= a < b <= 1`.
    Interval { a: f64, b: f64 },
    /// Closed ball on the torus, radius below `1/2`.
    Ball { center: Vec<f64>, radius: f64 },
    LevelSet(LevelSet),
}

/// The region `Λ` of the torus, described through a signed distance.
#[derive(Debug, Clone)]
pub struct MembraneRegion {
    shape: Shape,
}

impl MembraneRegion {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&a) || b <= a || b > 1.0 || b - a >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "interval [{a}, {b}) must satisfy 0 <= a < b <= 1"
            )));
        }
        Ok(Self {
            shape: Shape::Interval { a, b },
        })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidArgument("ball center is empty".into()));
        }
        if !(radius > 0.0 && radius < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "ball radius {radius} must lie in (0, 1/2)"
            )));
        }
        let center = center.into_iter().map(wrap_unit).collect();
        Ok(Self {
            shape: Shape::Ball { center, radius },
        })
    }

    pub fn level_set(level_set: LevelSet) -> Result<Self> {
        if level_set.tubular_width <= 0.0 {
            return Err(Error::InvalidArgument(
                "level set must declare a positive tubular width".into(),
            ));
        }
        Ok(Self {
            shape: Shape::LevelSet(level_set),
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Interval { .. } => 1,
            Shape::Ball { center, .. } => center.len(),
            Shape::LevelSet(ls) => ls.dim,
        }
    }

    /// Width of the neighbourhood of the membrane on which the normal and
    /// the closest-point map are single valued.
    pub fn tubular_width(&self) -> f64 {
        match &self.shape {
            Shape::Interval { a, b } => {
                let len = b - a;
                0.5 * len.min(1.0 - len)
            }
            Shape::Ball { radius, .. } => radius.min(0.5 - radius),
            Shape::LevelSet(ls) => ls.tubular_width,
        }
    }

    /// Negative inside, positive outside, zero on the membrane. Exact
    /// Euclidean distance (minimal image) for the built-in shapes.
    pub fn signed_distance(&self, u: &[f64]) -> f64 {
        match &self.shape {
            Shape::Interval { a, b } => {
                let x = wrap_unit(u[0]);
                let da = wrap_delta(x - a).abs();
                let db = wrap_delta(x - b).abs();
                let d = da.min(db);
                if *a <= x && x < *b {
                    -d
                } else {
                    d
                }
            }
            Shape::Ball { center, radius } => {
                let r2: f64 = center
                    .iter()
                    .zip(u)
                    .map(|(c, x)| wrap_delta(x - c).powi(2))
                    .sum();
                r2.sqrt() - radius
            }
            Shape::LevelSet(ls) => (ls.phi)(u),
        }
    }

    /// Membership in the closed region. Intervals are half open, `[a, b)`.
    pub fn contains(&self, u: &[f64]) -> bool {
        match &self.shape {
            Shape::Interval { a, b } => {
                let x = wrap_unit(u[0]);
                *a <= x && x < *b
            }
            _ => self.signed_distance(u) <= 0.0,
        }
    }

    fn check_dim(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        Ok(())
    }

    fn check_on_boundary(&self, u: &[f64]) -> Result<()> {
        self.check_dim(u)?;
        let distance = self.signed_distance(u);
        if distance.abs() > BOUNDARY_TOL {
            return Err(Error::NotOnBoundary {
                point: u.to_vec(),
                distance,
            });
        }
        Ok(())
    }

    /// Unit normal pointing out of `Λ`, without the on-boundary check.
    /// Valid anywhere in the tubular neighbourhood.
    pub fn normal_near(&self, u: &[f64]) -> Vec<f64> {
        match &self.shape {
            Shape::Interval { a, b } => {
                let x = wrap_unit(u[0]);
                let da = wrap_delta(x - a).abs();
                let db = wrap_delta(x - b).abs();
                vec![if da < db { -1.0 } else { 1.0 }]
            }
            Shape::Ball { center, .. } => {
                let d: Vec<f64> = center.iter().zip(u).map(|(c, x)| wrap_delta(x - c)).collect();
                normalize(d)
            }
            Shape::LevelSet(ls) => normalize(ls.gradient(u)),
        }
    }

    /// Outward unit normal `ζ(u)` at a membrane point.
    pub fn normal(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_on_boundary(u)?;
        Ok(self.normal_near(u))
    }

    /// Closest membrane point `𝐮(u)`; defined on the tubular neighbourhood.
    pub fn closest_point(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(u)?;
        if self.signed_distance(u).abs() >= self.tubular_width() {
            return Err(Error::OutsideTubularNeighborhood { point: u.to_vec() });
        }
        match &self.shape {
            Shape::Interval { a, b } => {
                let x = wrap_unit(u[0]);
                let da = wrap_delta(x - a).abs();
                let db = wrap_delta(x - b).abs();
                Ok(vec![if da < db { *a } else { wrap_unit(*b) }])
            }
            Shape::Ball { center, radius } => {
                let d: Vec<f64> = center.iter().zip(u).map(|(c, x)| wrap_delta(x - c)).collect();
                let n = normalize(d);
                Ok(center
                    .iter()
                    .zip(&n)
                    .map(|(c, nj)| wrap_unit(c + radius * nj))
                    .collect())
            }
            Shape::LevelSet(ls) => {
                let mut p = u.to_vec();
                for _ in 0..NEWTON_MAX_ITER {
                    let phi = (ls.phi)(&p);
                    if phi.abs() <= NEWTON_TOL {
                        break;
                    }
                    let g = ls.gradient(&p);
                    let g2: f64 = g.iter().map(|x| x * x).sum();
                    if g2 == 0.0 {
                        return Err(Error::OutsideTubularNeighborhood { point: u.to_vec() });
                    }
                    for (pj, gj) in p.iter_mut().zip(&g) {
                        *pj -= phi * gj / g2;
                    }
                }
                if (ls.phi)(&p).abs() > BOUNDARY_TOL {
                    return Err(Error::OutsideTubularNeighborhood { point: u.to_vec() });
                }
                Ok(p.into_iter().map(wrap_unit).collect())
            }
        }
    }

    /// Interface conductance `D(u) = α Σ_j |⟨ζ(u), e_j⟩|`.
    pub fn robin_coefficient(&self, u: &[f64], alpha: f64) -> Result<f64> {
        let n = self.normal(u)?;
        Ok(alpha * n.iter().map(|c| c.abs()).sum::<f64>())
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}
