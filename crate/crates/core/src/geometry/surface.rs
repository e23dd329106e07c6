use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::region::{wrap_unit, Shape};
use super::MembraneRegion;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_pieces};

/// Absolute tolerance for the parametric quadrature.
pub const SURFACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceWeight {
    One,
    /// `|⟨ζ, e_j⟩|`
    AbsComponent(usize),
    /// `⟨ζ, e_j⟩`
    SignedComponent(usize),
}

impl SurfaceWeight {
    fn apply(self, normal: &[f64]) -> f64 {
        match self {
            SurfaceWeight::One => 1.0,
            SurfaceWeight::AbsComponent(j) => normal[j].abs(),
            SurfaceWeight::SignedComponent(j) => normal[j],
        }
    }
}

/// `∫_{∂Λ} g(u) w(ζ(u)) dS(u)` for the built-in shapes.
pub fn surface_integral(
    region: &MembraneRegion,
    g: impl Fn(&[f64]) -> f64,
    weight: SurfaceWeight,
) -> Result<f64> {
    surface_integral_with(region, |u, n| g(u) * weight.apply(n))
}

/// `∫_{∂Λ} f(u, ζ(u)) dS(u)`. In one dimension the membrane is two points
/// and `dS` is counting measure.
pub fn surface_integral_with(
    region: &MembraneRegion,
    f: impl Fn(&[f64], &[f64]) -> f64,
) -> Result<f64> {
    match region.shape() {
        Shape::Interval { a, b } => Ok(f(&[*a], &[-1.0]) + f(&[wrap_unit(*b)], &[1.0])),
        Shape::Ball { center, radius } => match center.len() {
            1 => {
                let (c, r) = (center[0], *radius);
                Ok(f(&[wrap_unit(c - r)], &[-1.0]) + f(&[wrap_unit(c + r)], &[1.0]))
            }
            2 => {
                let (cx, cy, r) = (center[0], center[1], *radius);
                // Panel edges at the axis crossings where |ζ_j| has kinks.
                let breaks = [0.0, FRAC_PI_2, PI, 1.5 * PI, TAU];
                Ok(integrate_pieces(
                    |theta: f64| {
                        let n = [theta.cos(), theta.sin()];
                        let u = [wrap_unit(cx + r * n[0]), wrap_unit(cy + r * n[1])];
                        f(&u, &n) * r
                    },
                    &breaks,
                    SURFACE_TOL,
                ))
            }
            3 => {
                let r = *radius;
                let inner = |phi: f64| {
                    let (sp, cp) = phi.sin_cos();
                    integrate_pieces(
                        |theta: f64| {
                            let n = [sp * theta.cos(), sp * theta.sin(), cp];
                            let u: Vec<f64> = center
                                .iter()
                                .zip(&n)
                                .map(|(c, nj)| wrap_unit(c + r * nj))
                                .collect();
                            f(&u, &n) * r * r * sp
                        },
                        &[0.0, FRAC_PI_2, PI, 1.5 * PI, TAU],
                        SURFACE_TOL,
                    )
                };
                Ok(integrate(inner, 0.0, FRAC_PI_2, SURFACE_TOL)
                    + integrate(inner, FRAC_PI_2, PI, SURFACE_TOL))
            }
            _ => Err(Error::UnsupportedRegion(
                "surface quadrature for balls is available in dimensions 1 to 3",
            )),
        },
        Shape::LevelSet(_) => Err(Error::UnsupportedRegion(
            "level sets carry no parametrisation for surface quadrature",
        )),
    }
}
