use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{surface_integral_with, wrap_unit, MembraneRegion, Shape};
use crate::trig::TrigPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenIdentity {
    /// `∫_U Δu = ∫_{∂U} ∂u/∂ν`
    First,
    /// `∫_U ∇v·∇u = -∫_U u Δv + ∫_{∂U} u ∂v/∂ν`
    Second,
    /// `∫_U (u Δv - v Δu) = ∫_{∂U} (u ∂v/∂ν - v ∂u/∂ν)`
    Third,
}

impl fmt::Display for GreenIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GreenIdentity::First => "i",
            GreenIdentity::Second => "ii",
            GreenIdentity::Third => "iii",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenDomain {
    /// `U = Λ`, `ν = ζ`.
    Inside,
    /// `U = Λ^∁`, `ν = -ζ`.
    Outside,
}

impl fmt::Display for GreenDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GreenDomain::Inside => "lambda",
            GreenDomain::Outside => "complement",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenResidual {
    pub identity: GreenIdentity,
    pub domain: GreenDomain,
    pub level: u32,
    pub residual: f64,
}

/// Panels per direction at refinement `level`.
pub fn panels(level: u32) -> usize {
    16 << level
}

/// Midpoint integrals of `f` over `Λ` and over the whole torus.
fn volume_integrals(region: &MembraneRegion, level: u32, f: &dyn Fn(&[f64]) -> f64) -> Result<(f64, f64)> {
    let m = panels(level);
    let mf = m as f64;
    let mid = |k: usize| (k as f64 + 0.5) / mf;
    match region.shape() {
        Shape::Interval { a, b } => {
            let len = b - a;
            let inside: f64 = (0..m).map(|k| f(&[wrap_unit(a + len * mid(k))])).sum::<f64>() * len / mf;
            let torus: f64 = (0..m).map(|k| f(&[mid(k)])).sum::<f64>() / mf;
            Ok((inside, torus))
        }
        Shape::Ball { center, radius } => {
            let r = *radius;
            match center.len() {
                1 => {
                    let inside: f64 = (0..m)
                        .map(|k| f(&[wrap_unit(center[0] - r + 2.0 * r * mid(k))]))
                        .sum::<f64>()
                        * 2.0
                        * r
                        / mf;
                    let torus: f64 = (0..m).map(|k| f(&[mid(k)])).sum::<f64>() / mf;
                    Ok((inside, torus))
                }
                2 => {
                    let (dr, dt) = (r / mf, TAU / mf);
                    let mut inside = 0.0;
                    for i in 0..m {
                        let rho = (i as f64 + 0.5) * dr;
                        for k in 0..m {
                            let th = (k as f64 + 0.5) * dt;
                            let u = [wrap_unit(center[0] + rho * th.cos()), wrap_unit(center[1] + rho * th.sin())];
                            inside += f(&u) * rho;
                        }
                    }
                    let mut torus = 0.0;
                    for i in 0..m {
                        for k in 0..m {
                            torus += f(&[mid(i), mid(k)]);
                        }
                    }
                    Ok((inside * dr * dt, torus / (mf * mf)))
                }
                3 => {
                    let (dr, dp, dt) = (r / mf, PI / mf, TAU / mf);
                    let mut inside = 0.0;
                    for i in 0..m {
                        let rho = (i as f64 + 0.5) * dr;
                        for p in 0..m {
                            let (sp, cp) = ((p as f64 + 0.5) * dp).sin_cos();
                            for k in 0..m {
                                let th = (k as f64 + 0.5) * dt;
                                let n = [sp * th.cos(), sp * th.sin(), cp];
                                let u: Vec<f64> = center.iter().zip(&n).map(|(c, nj)| wrap_unit(c + rho * nj)).collect();
                                inside += f(&u) * rho * rho * sp;
                            }
                        }
                    }
                    let mut torus = 0.0;
                    for i in 0..m {
                        for j in 0..m {
                            for k in 0..m {
                                torus += f(&[mid(i), mid(j), mid(k)]);
                            }
                        }
                    }
                    Ok((inside * dr * dp * dt, torus / (mf * mf * mf)))
                }
                _ => Err(Error::UnsupportedRegion("volume quadrature for balls covers dimensions 1 to 3")),
            }
        }
        Shape::LevelSet(_) => Err(Error::UnsupportedRegion(
            "level sets carry no parametrisation for volume quadrature",
        )),
    }
}

/// Residuals (left minus right side) of the three Green identities on `Λ`
/// and on its complement, for `u = h1` and `v = h2`.
pub fn green_identity_check(region: &MembraneRegion, h1: &TrigPoly, h2: &TrigPoly, level: u32) -> Result<Vec<GreenResidual>> {
    let d = region.dim();
    if h1.dim() != d || h2.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if h1.dim() != d { h1.dim() } else { h2.dim() },
        });
    }
    let grad_dot = |x: &[f64]| -> f64 { h1.gradient(x).iter().zip(h2.gradient(x)).map(|(a, b)| a * b).sum() };

    let vol = |f: &dyn Fn(&[f64]) -> f64| volume_integrals(region, level, f);
    let (lap_in, lap_all) = vol(&|x| h1.laplacian(x))?;
    let (grad_in, grad_all) = vol(&|x| grad_dot(x))?;
    let (ulv_in, ulv_all) = vol(&|x| h1.value(x) * h2.laplacian(x))?;
    let (vlu_in, vlu_all) = vol(&|x| h2.value(x) * h1.laplacian(x))?;

    // Surface terms with ν = ζ; the complement flips their sign.
    let s1 = surface_integral_with(region, |x, n| h1.directional(x, n))?;
    let s2 = surface_integral_with(region, |x, n| h1.value(x) * h2.directional(x, n))?;
    let s3 = surface_integral_with(region, |x, n| h2.value(x) * h1.directional(x, n))?;

    let mut out = Vec::with_capacity(6);
    for (domain, sign) in [(GreenDomain::Inside, 1.0), (GreenDomain::Outside, -1.0)] {
        let pick = |inside: f64, all: f64| if sign > 0.0 { inside } else { all - inside };
        let lap = pick(lap_in, lap_all);
        let grad = pick(grad_in, grad_all);
        let ulv = pick(ulv_in, ulv_all);
        let vlu = pick(vlu_in, vlu_all);
        let residuals = [
            (GreenIdentity::First, lap - sign * s1),
            (GreenIdentity::Second, grad + ulv - sign * s2),
            (GreenIdentity::Third, (ulv - vlu) - sign * (s2 - s3)),
        ];
        out.extend(residuals.into_iter().map(|(identity, r)| GreenResidual {
            identity,
            domain,
            level,
            residual: r.abs(),
        }));
    }
    Ok(out)
}

/// Rows `identity,region,refinement,residual`.
pub fn write_identity_csv<W: Write>(rows: &[GreenResidual], mut out: W) -> std::io::Result<()> {
    writeln!(out, "identity,region,refinement,residual")?;
    for r in rows {
        writeln!(out, "{},{},{},{:e}", r.identity, r.domain, r.level, r.residual)?;
    }
    Ok(())
}
