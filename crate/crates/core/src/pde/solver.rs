use std::io::Write;

use serde::{Deserialize, Serialize};

use super::GeneratorMatrix;
use crate::error::{Error, Result};
use crate::geometry::{BondClassification, Side, TorusLattice};
use crate::ssep::{InitialProfile, Observable};

/// Relative residual demanded of the conjugate-gradient solve.
pub const CG_TOLERANCE: f64 = 1e-12;
/// Slack before a maximum-principle excursion is flagged.
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-8;

/// Grid function `ρ(t, ·)`, one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub t: f64,
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn new(t: f64, values: Vec<f64>) -> Self {
        Self { t, values }
    }

    /// Cell-centre evaluation of `ρ₀`.
    pub fn from_profile(lattice: &TorusLattice, profile: &InitialProfile) -> Self {
        Self::new(0.0, profile.discretize(lattice))
    }

    /// `N_g^{-d} Σ ρ`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sided_mass(&self, class: &BondClassification, side: Side) -> f64 {
        let want = side == Side::Minus;
        self.values
            .iter()
            .enumerate()
            .filter(|&(x, _)| class.is_inside(x) == want)
            .map(|(_, v)| v)
            .sum::<f64>()
            / self.values.len() as f64
    }

    /// `⟨ρ, H⟩` by cell quadrature.
    pub fn pairing_with(&self, site_values: &[f64]) -> f64 {
        self.values.iter().zip(site_values).map(|(r, h)| r * h).sum::<f64>() / self.values.len() as f64
    }

    pub fn pairing(&self, lattice: &TorusLattice, class: &BondClassification, h: &Observable) -> f64 {
        self.pairing_with(&h.site_values(lattice, class))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Diagnostics from one Crank–Nicolson step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub iterations: usize,
    pub residual: f64,
    pub mass_drift: f64,
    /// Largest excursion beyond the range of the input field.
    pub max_principle_excursion: f64,
}

impl StepReport {
    pub fn max_principle_violated(&self) -> bool {
        self.max_principle_excursion > MAX_PRINCIPLE_SLACK
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `(I - c G) x = b` by conjugate gradients, starting from `x`.
fn conjugate_gradient(g: &GeneratorMatrix, c: f64, b: &[f64], x: &mut [f64]) -> Result<(usize, f64)> {
    let n = b.len();
    let op = |v: &[f64], out: &mut [f64]| {
        g.apply_into(v, out);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = vi - c * *o;
        }
    };
    let b_norm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let mut ax = vec![0.0; n];
    op(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let cap = 10 * n + 100;
    for it in 0..cap {
        let rel = rr.sqrt() / b_norm;
        if rel <= CG_TOLERANCE {
            return Ok((it, rel));
        }
        op(&p, &mut ap);
        let step = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    let rel = rr.sqrt() / b_norm;
    if rel <= CG_TOLERANCE {
        Ok((cap, rel))
    } else {
        Err(Error::SolverDiverged {
            residual: rel,
            iterations: cap,
        })
    }
}

/// One Crank–Nicolson step `(I - dt/2 G) ρ' = (I + dt/2 G) ρ`.
pub fn step(field: &DensityField, g: &GeneratorMatrix, dt: f64) -> Result<(DensityField, StepReport)> {
    theta_step(field, g, dt, 0.5)
}

/// One backward Euler step `(I - dt G) ρ' = ρ`.
pub fn implicit_euler_step(field: &DensityField, g: &GeneratorMatrix, dt: f64) -> Result<(DensityField, StepReport)> {
    theta_step(field, g, dt, 1.0)
}

fn theta_step(field: &DensityField, g: &GeneratorMatrix, dt: f64, theta: f64) -> Result<(DensityField, StepReport)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if field.values.len() != g.size() {
        return Err(Error::DimensionMismatch {
            expected: g.size(),
            got: field.values.len(),
        });
    }
    let explicit = (1.0 - theta) * dt;
    let rhs = if explicit > 0.0 {
        let mut rhs = g.apply(&field.values);
        for (r, v) in rhs.iter_mut().zip(&field.values) {
            *r = v + explicit * *r;
        }
        rhs
    } else {
        field.values.clone()
    };
    let mut next = field.values.clone();
    let (iterations, residual) = conjugate_gradient(g, theta * dt, &rhs, &mut next)?;
    let out = DensityField::new(field.t + dt, next);
    let (lo, hi) = (field.min(), field.max());
    let excursion = (lo - out.min()).max(out.max() - hi).max(0.0);
    let report = StepReport {
        iterations,
        residual,
        mass_drift: (out.mass() - field.mass()).abs(),
        max_principle_excursion: excursion,
    };
    Ok((out, report))
}

/// Default step `0.25 / N_g`.
pub fn default_dt(lattice: &TorusLattice) -> f64 {
    0.25 / lattice.side() as f64
}

/// Fields on a time grid plus aggregate step diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub fields: Vec<DensityField>,
    pub steps: usize,
    pub max_mass_drift: f64,
    /// Largest excursion outside `[min ρ₀, max ρ₀]` over all steps.
    pub max_principle_excursion: f64,
    pub max_principle_flags: usize,
}

impl Solution {
    pub fn at(&self, t: f64) -> Option<&DensityField> {
        self.fields.iter().find(|f| (f.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }
}

/// Backward Euler steps taken before switching to Crank–Nicolson.
pub const STARTUP_STEPS: usize = 4;
/// Length of each startup step as a fraction of `dt`.
pub const STARTUP_FRACTION: f64 = 0.125;

/// Evolve `initial` and return the field at every requested time.
///
/// The first [`STARTUP_STEPS`] steps are backward Euler with
/// `STARTUP_FRACTION * dt`, which damps the grid-scale modes of rough data
/// that Crank–Nicolson alone only flips in sign; the rest are Crank–Nicolson
/// with `dt`. Steps are shortened
/// to land on the grid.
pub fn solve(initial: DensityField, g: &GeneratorMatrix, t_grid: &[f64], dt: f64) -> Result<Solution> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.first().is_some_and(|&t| t < initial.t) {
        return Err(Error::InvalidArgument("time grid must be increasing from the initial time".into()));
    }
    let (lo, hi) = (initial.min(), initial.max());
    let mut sol = Solution {
        fields: Vec::with_capacity(t_grid.len()),
        steps: 0,
        max_mass_drift: 0.0,
        max_principle_excursion: 0.0,
        max_principle_flags: 0,
    };
    let mut current = initial;
    for &target in t_grid {
        while target - current.t > 1e-12 * target.abs().max(1.0) {
            let (mut next, report) = if sol.steps < STARTUP_STEPS {
                implicit_euler_step(&current, g, (STARTUP_FRACTION * dt).min(target - current.t))?
            } else {
                step(&current, g, dt.min(target - current.t))?
            };
            if target - next.t <= 1e-12 * target.abs().max(1.0) {
                next.t = target;
            }
            sol.steps += 1;
            sol.max_mass_drift = sol.max_mass_drift.max(report.mass_drift);
            let excursion = (lo - next.min()).max(next.max() - hi).max(0.0);
            sol.max_principle_excursion = sol.max_principle_excursion.max(excursion);
            if excursion > MAX_PRINCIPLE_SLACK {
                sol.max_principle_flags += 1;
            }
            current = next;
        }
        sol.fields.push(DensityField::new(target, current.values.clone()));
    }
    Ok(sol)
}

/// Grid of `n + 1` equally spaced times on `[0, t]`.
pub fn uniform_times(t: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t * k as f64 / n as f64).collect()
}

/// Field snapshots as CSV: `t,cell_index,u1..ud,value`.
pub fn write_fields_csv<W: Write>(lattice: &TorusLattice, fields: &[DensityField], mut out: W) -> std::io::Result<()> {
    write!(out, "t,cell_index")?;
    for j in 0..lattice.dim() {
        write!(out, ",u{}", j + 1)?;
    }
    writeln!(out, ",value")?;
    let mut pos = vec![0.0; lattice.dim()];
    for f in fields {
        for (x, v) in f.values.iter().enumerate() {
            lattice.position_into(x, &mut pos);
            write!(out, "{},{}", f.t, x)?;
            for p in &pos {
                write!(out, ",{p}")?;
            }
            writeln!(out, ",{v}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MembraneRegion;
    use crate::pde::{assemble, Mode};
    use crate::ssep::InitialProfile;
    use std::f64::consts::{PI, TAU};

    fn setup(n: usize, mode: Mode, alpha: f64) -> (TorusLattice, MembraneRegion, GeneratorMatrix) {
        let l = TorusLattice::cell_centered(1, n).unwrap();
        let r = MembraneRegion::interval(0.25, 0.75).unwrap();
        let g = assemble(&l, &r, mode, alpha).unwrap();
        (l, r, g)
    }

    #[test]
    fn constants_are_stationary() {
        for mode in Mode::ALL {
            let (l, _, g) = setup(32, mode, 1.0);
            let f = DensityField::from_profile(&l, &InitialProfile::constant(0.3));
            let (next, rep) = step(&f, &g, 0.01).unwrap();
            assert!(next.values.iter().all(|v| (v - 0.3).abs() < 1e-13));
            assert!(rep.mass_drift < 1e-14);
        }
    }

    #[test]
    fn neumann_keeps_piecewise_constants() {
        let (l, r, g) = setup(64, Mode::Neumann, 1.0);
        let p = InitialProfile::new("two-level", move |u: &[f64]| if r.contains(u) { 0.8 } else { 0.1 });
        let sol = solve(DensityField::from_profile(&l, &p), &g, &[0.05, 0.5], default_dt(&l)).unwrap();
        for f in &sol.fields {
            for (x, v) in f.values.iter().enumerate() {
                let want = if g.classification().is_inside(x) { 0.8 } else { 0.1 };
                assert!((v - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn heat_matches_fourier_mode() {
        let (l, _, g) = setup(128, Mode::Heat, 1.0);
        let f0 = DensityField::from_profile(&l, &InitialProfile::cosine(0.5, 0.25));
        let t = 0.05;
        let sol = solve(f0, &g, &[t], 1.0 / 512.0).unwrap();
        let decay = (-4.0 * PI * PI * t).exp();
        let err = sol.fields[0]
            .values
            .iter()
            .enumerate()
            .map(|(x, v)| (v - (0.5 + 0.25 * decay * (TAU * l.position(x)[0]).cos())).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-4, "{err}");
    }

    #[test]
    fn robin_equilibrates_and_leaks() {
        let (l, r, g) = setup(32, Mode::Robin, 1.0);
        let f0 = DensityField::from_profile(&l, &InitialProfile::indicator(r));
        let inside0 = f0.sided_mass(g.classification(), Side::Minus);
        let sol = solve(f0, &g, &[0.01, 2.0], default_dt(&l)).unwrap();
        assert!(sol.fields[0].sided_mass(g.classification(), Side::Minus) < inside0 - 1e-4);
        assert!(sol.fields[1].values.iter().all(|v| (v - 0.5).abs() <= 0.01));
        assert!(sol.max_mass_drift <= 1e-10);
    }

    #[test]
    fn mass_drift_bounded_in_two_dimensions() {
        let l = TorusLattice::cell_centered(2, 32).unwrap();
        let r = MembraneRegion::ball(vec![0.5, 0.5], 0.25).unwrap();
        let g = assemble(&l, &r, Mode::Robin, 2.0).unwrap();
        let f0 = DensityField::from_profile(&l, &InitialProfile::indicator(r));
        let sol = solve(f0, &g, &uniform_times(0.05, 5), default_dt(&l)).unwrap();
        assert!(sol.max_mass_drift <= 1e-10);
        assert_eq!(sol.fields.len(), 6);
    }

    #[test]
    fn rejects_bad_input() {
        let (l, _, g) = setup(16, Mode::Heat, 1.0);
        let f = DensityField::from_profile(&l, &InitialProfile::constant(0.5));
        assert!(step(&f, &g, 0.0).is_err());
        assert!(solve(f, &g, &[0.2, 0.1], 0.01).is_err());
    }

    #[test]
    fn csv_header() {
        let l = TorusLattice::cell_centered(2, 2).unwrap();
        let mut buf = Vec::new();
        write_fields_csv(&l, &[DensityField::new(0.0, vec![1.0; 4])], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("t,cell_index,u1,u2,value\n0,0,0.25,0.25,1\n"));
    }
}
