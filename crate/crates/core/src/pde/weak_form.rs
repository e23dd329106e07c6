//! Integral identities satisfied by weak solutions, evaluated on solved
//! grid fields, and the pointwise Robin flux condition.

use std::f64::consts::TAU;

use super::{DensityField, GeneratorMatrix, Mode};
use crate::error::{Error, Result};
use crate::geometry::{wrap_unit, MembraneRegion, Shape, TorusLattice};
use crate::ssep::Observable;

/// Surface nodes per grid cell along a circle.
const NODES_PER_CELL: usize = 8;

/// One membrane quadrature node with the cells used for its sided traces.
#[derive(Debug, Clone)]
struct TraceNode {
    weight: f64,
    normal: Vec<f64>,
    point: Vec<f64>,
    /// Nearest and next-nearest same-side cells, inside then outside.
    minus: [usize; 2],
    plus: [usize; 2],
}

fn quadrature_nodes(region: &MembraneRegion, lattice: &TorusLattice) -> Result<Vec<(Vec<f64>, Vec<f64>, f64)>> {
    match region.shape() {
        Shape::Interval { a, b } => Ok(vec![(vec![*a], vec![-1.0], 1.0), (vec![wrap_unit(*b)], vec![1.0], 1.0)]),
        Shape::Ball { center, radius } if center.len() == 1 => Ok(vec![
            (vec![wrap_unit(center[0] - radius)], vec![-1.0], 1.0),
            (vec![wrap_unit(center[0] + radius)], vec![1.0], 1.0),
        ]),
        Shape::Ball { center, radius } if center.len() == 2 => {
            let m = NODES_PER_CELL * lattice.side();
            let w = TAU * radius / m as f64;
            Ok((0..m)
                .map(|k| {
                    let theta = TAU * (k as f64 + 0.5) / m as f64;
                    let n = vec![theta.cos(), theta.sin()];
                    let u = vec![wrap_unit(center[0] + radius * n[0]), wrap_unit(center[1] + radius * n[1])];
                    (u, n, w)
                })
                .collect())
        }
        Shape::Ball { .. } => Err(Error::UnsupportedRegion(
            "sided traces are available for intervals and discs",
        )),
        Shape::LevelSet(_) => Err(Error::UnsupportedRegion(
            "sided traces need a parametrised membrane",
        )),
    }
}

/// Two cells on the requested side, walking away from `u` along `±ζ` in
/// half-cell increments.
fn same_side_cells(g: &GeneratorMatrix, u: &[f64], normal: &[f64], inside: bool) -> Result<[usize; 2]> {
    let lattice = g.lattice();
    let class = g.classification();
    let h = 1.0 / lattice.side() as f64;
    let sign = if inside { -1.0 } else { 1.0 };
    let mut found = Vec::with_capacity(2);
    for k in 1..=8 {
        let s = sign * (k as f64 - 0.5) * h;
        let q: Vec<f64> = u.iter().zip(normal).map(|(x, n)| wrap_unit(x + s * n)).collect();
        let cell = lattice.locate(&q);
        if class.is_inside(cell) == inside && !found.contains(&cell) {
            found.push(cell);
            if found.len() == 2 {
                return Ok([found[0], found[1]]);
            }
        }
    }
    Err(Error::ResolutionTooCoarse {
        side: lattice.side(),
        width: g.classification().inside_count() as f64 * h,
    })
}

fn trace_nodes(g: &GeneratorMatrix, region: &MembraneRegion) -> Result<Vec<TraceNode>> {
    quadrature_nodes(region, g.lattice())?
        .into_iter()
        .map(|(point, normal, weight)| {
            let minus = same_side_cells(g, &point, &normal, true)?;
            let plus = same_side_cells(g, &point, &normal, false)?;
            Ok(TraceNode {
                weight,
                normal,
                point,
                minus,
                plus,
            })
        })
        .collect()
}

/// Linear extrapolation from the centres at distances `h/2` and `3h/2`.
fn extrapolate(values: &[f64], cells: [usize; 2]) -> f64 {
    1.5 * values[cells[0]] - 0.5 * values[cells[1]]
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Residual of the weak formulation matching `g.mode()`, over the time
/// span of `fields` (first entry is the initial datum):
///
/// `⟨ρ_t,H⟩ - ⟨ρ_0,H⟩ - ∫⟨ρ_s,ΔH⟩ ds + ∫∫ ρ(u⁻) ∂_ζ h₁ dS ds - ∫∫ ρ(u⁺) ∂_ζ h₂ dS ds
///   + ∫∫ α (ρ(u⁺) - ρ(u⁻)) (H(u⁺) - H(u⁻)) Σ_j |ζ_j| dS ds`.
///
/// Heat mode keeps only the bulk terms and expects a smooth `H`; Neumann
/// drops the `α` term. Time integrals use the trapezoid rule on the field times.
pub fn weak_form_residual(
    fields: &[DensityField],
    g: &GeneratorMatrix,
    region: &MembraneRegion,
    h: &Observable,
) -> Result<f64> {
    let (first, last) = match (fields.first(), fields.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidArgument("weak-form residual needs at least one field".into())),
    };
    let lattice = g.lattice();
    let class = g.classification();
    let hv = h.site_values(lattice, class);
    let mut pos = vec![0.0; lattice.dim()];
    let lap: Vec<f64> = (0..lattice.num_sites())
        .map(|x| {
            lattice.position_into(x, &mut pos);
            h.laplacian(&pos, class.is_inside(x))
        })
        .collect();
    let times: Vec<f64> = fields.iter().map(|f| f.t).collect();
    let bulk: Vec<f64> = fields.iter().map(|f| f.pairing_with(&lap)).collect();
    let mut residual = last.pairing_with(&hv) - first.pairing_with(&hv) - trapezoid(&times, &bulk);

    if g.mode() != Mode::Heat {
        let nodes = trace_nodes(g, region)?;
        let alpha = if g.mode() == Mode::Robin { g.alpha() } else { 0.0 };
        let coeffs: Vec<(f64, f64, f64)> = nodes
            .iter()
            .map(|n| {
                let dh1 = h.piece(true).directional(&n.point, &n.normal);
                let dh2 = h.piece(false).directional(&n.point, &n.normal);
                let (h_minus, h_plus) = h.traces(&n.point);
                let d: f64 = n.normal.iter().map(|z| z.abs()).sum();
                (dh1, dh2, alpha * d * (h_plus - h_minus))
            })
            .collect();
        let surface: Vec<f64> = fields
            .iter()
            .map(|f| {
                nodes
                    .iter()
                    .zip(&coeffs)
                    .map(|(n, &(dh1, dh2, jump))| {
                        let rm = extrapolate(&f.values, n.minus);
                        let rp = extrapolate(&f.values, n.plus);
                        n.weight * (rm * dh1 - rp * dh2 + jump * (rp - rm))
                    })
                    .sum()
            })
            .collect();
        residual += trapezoid(&times, &surface);
    }
    Ok(residual.abs())
}

/// Largest violation of `∂_ζ ρ(u^±) = α Σ_j|ζ_j| (ρ(u⁺) - ρ(u⁻))` over the
/// membrane, with one-sided differences for the normal derivatives.
pub fn fick_flux_residual(field: &DensityField, g: &GeneratorMatrix, region: &MembraneRegion) -> Result<f64> {
    let alpha = match g.mode() {
        Mode::Robin => g.alpha(),
        Mode::Neumann => 0.0,
        Mode::Heat => {
            return Err(Error::InvalidArgument(
                "the flux condition applies to interface modes only".into(),
            ))
        }
    };
    let nodes = trace_nodes(g, region)?;
    let h = 1.0 / g.lattice().side() as f64;
    let v = &field.values;
    Ok(nodes
        .iter()
        .map(|n| {
            let d: f64 = n.normal.iter().map(|z| z.abs()).sum();
            let flux = alpha * d * (extrapolate(v, n.plus) - extrapolate(v, n.minus));
            let slope_minus = (v[n.minus[0]] - v[n.minus[1]]) / h;
            let slope_plus = (v[n.plus[1]] - v[n.plus[0]]) / h;
            (slope_minus - flux).abs().max((slope_plus - flux).abs())
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{assemble, default_dt, solve, uniform_times};
    use crate::ssep::InitialProfile;
    use crate::trig::{TrigPoly, Wave};

    fn interval(n: usize, mode: Mode, alpha: f64) -> (MembraneRegion, GeneratorMatrix) {
        let l = TorusLattice::cell_centered(1, n).unwrap();
        let r = MembraneRegion::interval(0.25, 0.75).unwrap();
        let g = assemble(&l, &r, mode, alpha).unwrap();
        (r, g)
    }

    fn split_h() -> Observable {
        Observable::split(
            "split",
            TrigPoly::wave(1, 0, Wave::Cos, 1, 1.0),
            TrigPoly::wave(1, 0, Wave::Sin, 2, 0.5).plus(TrigPoly::constant(1, 0.3)),
        )
    }

    #[test]
    fn constant_field_has_zero_residual() {
        for mode in [Mode::Robin, Mode::Neumann] {
            let (r, g) = interval(64, mode, 1.0);
            let fields: Vec<DensityField> = uniform_times(0.1, 10)
                .into_iter()
                .map(|t| DensityField::new(t, vec![0.4; 64]))
                .collect();
            // Constant ρ: ⟨ρ,ΔH⟩ integrates to the flux of H through ∂Λ.
            let res = weak_form_residual(&fields, &g, &r, &split_h()).unwrap();
            assert!(res < 1e-3, "{mode}: {res}");
        }
    }

    #[test]
    fn robin_residual_shrinks_under_refinement() {
        let h = split_h();
        let res: Vec<f64> = [32, 64, 128]
            .into_iter()
            .map(|n| {
                let (r, g) = interval(n, Mode::Robin, 1.0);
                let l = g.lattice().clone();
                let f0 = DensityField::from_profile(&l, &InitialProfile::cosine(0.5, 0.3));
                let times = uniform_times(0.05, (0.05 / default_dt(&l) * 4.0).ceil() as usize);
                let sol = solve(f0.clone(), &g, &times[1..], default_dt(&l) / 4.0).unwrap();
                let mut fields = vec![f0];
                fields.extend(sol.fields);
                weak_form_residual(&fields, &g, &r, &h).unwrap()
            })
            .collect();
        assert!(res[2] < res[0], "{res:?}");
        assert!(res[2] < 0.02, "{res:?}");
    }

    #[test]
    fn robin_flux_condition_holds() {
        let (r, g) = interval(256, Mode::Robin, 1.0);
        let l = g.lattice().clone();
        let f0 = DensityField::from_profile(&l, &InitialProfile::indicator(r.clone()));
        let sol = solve(f0, &g, &[0.05], default_dt(&l)).unwrap();
        let res = fick_flux_residual(&sol.fields[0], &g, &r).unwrap();
        assert!(res < 0.02, "{res}");
    }

    #[test]
    fn disc_nodes_find_same_side_cells() {
        let l = TorusLattice::cell_centered(2, 32).unwrap();
        let r = MembraneRegion::ball(vec![0.5, 0.5], 0.25).unwrap();
        let g = assemble(&l, &r, Mode::Neumann, 1.0).unwrap();
        let nodes = trace_nodes(&g, &r).unwrap();
        assert_eq!(nodes.len(), 8 * 32);
        for n in &nodes {
            assert!(n.minus.iter().all(|&c| g.classification().is_inside(c)));
            assert!(n.plus.iter().all(|&c| !g.classification().is_inside(c)));
        }
    }
}
