use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::{step, DensityField, GeneratorMatrix, Mode};

/// Largest operator handed to the dense eigensolver.
pub const MAX_DENSE_SIZE: usize = 4096;
/// `|λ|` at or below this counts as a zero mode.
pub const ZERO_MODE_TOL: f64 = 1e-9;

/// Eigenpairs of `G`, ordered by increasing `|λ|` (so `0 ≥ λ_0 ≥ λ_1 ≥ …`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub mode: Mode,
    pub alpha: f64,
    pub side: usize,
    pub eigenvalues: Vec<f64>,
    pub zero_modes: usize,
    /// Smallest nonzero `|λ|`.
    pub gap: f64,
    /// `max ‖G v - λ v‖ / max(1, max|G_ij|)` over the returned pairs.
    pub max_residual: f64,
    /// Unit eigenvectors as columns, in the order of `eigenvalues`.
    #[serde(skip)]
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl SpectrumReport {
    pub fn eigenvector(&self, j: usize) -> Option<Vec<f64>> {
        self.eigenvectors.as_ref().map(|v| v.column(j).iter().copied().collect())
    }
}

/// Dense symmetric eigensolve of `G`. `k` limits the number of returned
/// eigenvalues (all when `None`); the zero-mode count and gap always use the
/// whole spectrum.
pub fn spectrum(g: &GeneratorMatrix, k: Option<usize>) -> Result<SpectrumReport> {
    let n = g.size();
    if n > MAX_DENSE_SIZE {
        return Err(Error::TooLarge { size: n });
    }
    let dense = g.to_dense();
    let eig = SymmetricEigen::new(dense.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].abs().total_cmp(&eig.eigenvalues[b].abs()));
    let all: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let zero_modes = all.iter().filter(|l| l.abs() <= ZERO_MODE_TOL).count();
    let gap = all.iter().map(|l| l.abs()).find(|&l| l > ZERO_MODE_TOL).unwrap_or(0.0);
    let keep = k.unwrap_or(n).min(n);
    let vectors = DMatrix::from_fn(n, keep, |r, c| eig.eigenvectors[(r, order[c])]);
    let norm = g.max_abs_entry().max(1.0);
    let max_residual = (0..keep)
        .map(|c| {
            let v: DVector<f64> = vectors.column(c).into_owned();
            (&dense * &v - &v * all[c]).norm() / norm
        })
        .fold(0.0, f64::max);
    Ok(SpectrumReport {
        mode: g.mode(),
        alpha: g.alpha(),
        side: g.lattice().side(),
        eigenvalues: all[..keep].to_vec(),
        zero_modes,
        gap,
        max_residual,
        eigenvectors: Some(vectors),
    })
}

/// Rows `mode,alpha,N_g,index,eigenvalue`.
pub fn write_spectrum_csv<W: Write>(reports: &[SpectrumReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "mode,alpha,N_g,index,eigenvalue")?;
    for r in reports {
        for (i, l) in r.eigenvalues.iter().enumerate() {
            writeln!(out, "{},{},{},{},{}", r.mode, r.alpha, r.side, i, l)?;
        }
    }
    Ok(())
}

/// The functional `R(t)` along two evolutions from different data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest `R(t_{k+1}) - R(t_k)`, nonpositive when `R` never grows.
    pub max_increase: f64,
}

impl DecayReport {
    /// Nonincreasing up to a rounding allowance relative to `R(0)`.
    pub fn nonincreasing(&self) -> bool {
        let r0 = self.values.first().copied().unwrap_or(0.0).abs();
        self.max_increase <= 1e-12 * r0.max(f64::MIN_POSITIVE)
    }
}

/// `R = Σ_j (1 / (j² (1 - μ_j))) ⟨δ, Ψ_j⟩²` with `j = 1, 2, …` in the
/// report's eigenvalue order and `⟨·,·⟩` the cell-weighted inner product.
pub fn decay_functional(spec: &SpectrumReport, delta: &[f64]) -> Result<f64> {
    let vectors = spec
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("spectrum carries no eigenvectors".into()))?;
    if vectors.nrows() != delta.len() {
        return Err(Error::DimensionMismatch {
            expected: vectors.nrows(),
            got: delta.len(),
        });
    }
    let weight = (delta.len() as f64).sqrt().recip();
    Ok((0..vectors.ncols())
        .map(|j| {
            let proj: f64 = vectors.column(j).iter().zip(delta).map(|(p, d)| p * d).sum::<f64>() * weight;
            let jj = (j + 1) as f64;
            proj * proj / (jj * jj * (1.0 - spec.eigenvalues[j]))
        })
        .sum())
}

/// Evolve `rho_a` and `rho_b` by Crank–Nicolson with step `dt` and record
/// `R(t)` of their difference at every time of `t_grid` (which may start at 0).
pub fn uniqueness_decay(
    g: &GeneratorMatrix,
    spec: &SpectrumReport,
    rho_a: &DensityField,
    rho_b: &DensityField,
    t_grid: &[f64],
    dt: f64,
) -> Result<DecayReport> {
    let diff = |a: &DensityField, b: &DensityField| -> Vec<f64> {
        a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect()
    };
    let (mut a, mut b) = (rho_a.clone(), rho_b.clone());
    let mut values = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        while target - a.t > 1e-12 * target.abs().max(1.0) {
            let h = dt.min(target - a.t);
            a = step(&a, g, h)?.0;
            b = step(&b, g, h)?.0;
        }
        values.push(decay_functional(spec, &diff(&a, &b))?);
    }
    let max_increase = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayReport {
        times: t_grid.to_vec(),
        values,
        max_increase: if max_increase.is_finite() { max_increase } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MembraneRegion, TorusLattice};
    use crate::pde::{assemble, uniform_times};
    use crate::ssep::InitialProfile;
    use std::f64::consts::PI;

    fn matrix(n: usize, mode: Mode, alpha: f64) -> GeneratorMatrix {
        let l = TorusLattice::cell_centered(1, n).unwrap();
        assemble(&l, &MembraneRegion::interval(0.25, 0.75).unwrap(), mode, alpha).unwrap()
    }

    #[test]
    fn heat_eigenvalues_are_circulant() {
        let n = 32;
        let s = spectrum(&matrix(n, Mode::Heat, 1.0), None).unwrap();
        let mut want: Vec<f64> = (0..n)
            .map(|k| -4.0 * (n * n) as f64 * (PI * k as f64 / n as f64).sin().powi(2))
            .collect();
        want.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        for (a, b) in s.eigenvalues.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0));
        }
        assert_eq!(s.zero_modes, 1);
        assert!(s.max_residual <= 1e-8);
        let big = spectrum(&matrix(256, Mode::Heat, 1.0), Some(3)).unwrap();
        assert!((big.gap - 4.0 * PI * PI).abs() < 0.01);
    }

    #[test]
    fn zero_modes_count_components() {
        assert_eq!(spectrum(&matrix(32, Mode::Neumann, 1.0), None).unwrap().zero_modes, 2);
        assert_eq!(spectrum(&matrix(32, Mode::Robin, 0.1), None).unwrap().zero_modes, 1);
    }

    #[test]
    fn too_large_is_rejected() {
        let l = TorusLattice::cell_centered(2, 65).unwrap();
        let g = assemble(&l, &MembraneRegion::ball(vec![0.5, 0.5], 0.25).unwrap(), Mode::Heat, 1.0).unwrap();
        assert!(matches!(spectrum(&g, Some(1)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn identical_data_give_zero() {
        let g = matrix(16, Mode::Robin, 1.0);
        let s = spectrum(&g, None).unwrap();
        let f = DensityField::from_profile(g.lattice(), &InitialProfile::cosine(0.5, 0.2));
        let rep = uniqueness_decay(&g, &s, &f, &f, &uniform_times(0.1, 5), 1e-3).unwrap();
        assert!(rep.values.iter().all(|&r| r <= 1e-12));
    }

    #[test]
    fn single_mode_decays_exponentially() {
        let g = matrix(16, Mode::Robin, 1.0);
        let s = spectrum(&g, None).unwrap();
        let gap_vec = s.eigenvector(s.zero_modes).unwrap();
        let mu = s.eigenvalues[s.zero_modes];
        let a = DensityField::from_profile(g.lattice(), &InitialProfile::constant(0.5));
        let b = DensityField::new(0.0, a.values.iter().zip(&gap_vec).map(|(x, p)| x + 0.1 * p).collect());
        let times = uniform_times(0.1, 5);
        let rep = uniqueness_decay(&g, &s, &a, &b, &times, 1e-3).unwrap();
        assert!(rep.nonincreasing());
        for (t, r) in times.iter().zip(&rep.values) {
            let want = rep.values[0] * (2.0 * mu * t).exp();
            assert!((r - want).abs() <= 0.01 * want, "{t}: {r} vs {want}");
        }
    }
}
