use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{classify_bonds, classify_unguarded, BondClassification, MembraneRegion, TorusLattice};
use crate::ssep::Beta;

/// Rows below this size are applied sequentially.
const PARALLEL_ROWS: usize = 1 << 14;

/// Which hydrodynamic equation the grid operator discretises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Periodic heat equation; the membrane is invisible.
    Heat,
    /// Heat equation with the interface flux `α (ρ⁺ - ρ⁻) Σ_j |ζ_j|`.
    Robin,
    /// Insulating interface.
    Neumann,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Heat, Mode::Robin, Mode::Neumann];

    /// The limit equation for a given `β`.
    pub fn for_beta(beta: Beta) -> Self {
        match beta {
            Beta::Finite(b) if b < 1.0 => Mode::Heat,
            Beta::Finite(b) if b == 1.0 => Mode::Robin,
            _ => Mode::Neumann,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Heat => "heat",
            Mode::Robin => "robin",
            Mode::Neumann => "neumann",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" => Ok(Mode::Heat),
            "robin" => Ok(Mode::Robin),
            "neumann" => Ok(Mode::Neumann),
            other => Err(Error::Config(format!("unknown PDE mode {other:?}"))),
        }
    }
}

/// `N_g² 𝕃_{N_g}` on the cell-centred grid, stored as `2d` couplings per row.
///
/// Off-diagonal entries are `N_g² ξ_b` with `ξ_b = 1` except on membrane
/// bonds, where it is `α / N_g` (robin) or `0` (neumann).
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    lattice: TorusLattice,
    class: BondClassification,
    mode: Mode,
    alpha: f64,
    /// Row `x` occupies `[x * 2d, (x + 1) * 2d)`: forward then backward per axis.
    neighbors: Vec<usize>,
    couplings: Vec<f64>,
    diagonal: Vec<f64>,
}

/// Build the grid operator. `lattice` should be cell centred so that the
/// membrane of an interval with grid-aligned ends falls on cell faces.
pub fn assemble(lattice: &TorusLattice, region: &MembraneRegion, mode: Mode, alpha: f64) -> Result<GeneratorMatrix> {
    if region.dim() != lattice.dim() {
        return Err(Error::DimensionMismatch {
            expected: lattice.dim(),
            got: region.dim(),
        });
    }
    if mode == Mode::Robin && !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    // The heat operator never looks at the membrane, so it skips the guard.
    let class = match mode {
        Mode::Heat => classify_unguarded(lattice, region)?,
        Mode::Robin | Mode::Neumann => classify_bonds(lattice, region)?,
    };
    let n = lattice.side() as f64;
    let n2 = n * n;
    let membrane_rate = match mode {
        Mode::Heat => 1.0,
        Mode::Robin => alpha / n,
        Mode::Neumann => 0.0,
    };
    let bond_coupling = |b: usize| {
        if class.is_slow(b) {
            n2 * membrane_rate
        } else {
            n2
        }
    };
    let d = lattice.dim();
    let sites = lattice.num_sites();
    let mut neighbors = Vec::with_capacity(sites * 2 * d);
    let mut couplings = Vec::with_capacity(sites * 2 * d);
    let mut diagonal = Vec::with_capacity(sites);
    for x in 0..sites {
        let mut row = 0.0;
        for j in 0..d {
            let fwd = lattice.forward(x, j);
            let bwd = lattice.backward(x, j);
            let c_fwd = bond_coupling(lattice.bond_id(x, j));
            let c_bwd = bond_coupling(lattice.bond_id(bwd, j));
            neighbors.extend([fwd, bwd]);
            couplings.extend([c_fwd, c_bwd]);
            row += c_fwd + c_bwd;
        }
        diagonal.push(-row);
    }
    Ok(GeneratorMatrix {
        lattice: lattice.clone(),
        class,
        mode,
        alpha,
        neighbors,
        couplings,
        diagonal,
    })
}

impl GeneratorMatrix {
    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn classification(&self) -> &BondClassification {
        &self.class
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn size(&self) -> usize {
        self.diagonal.len()
    }

    fn stride(&self) -> usize {
        2 * self.lattice.dim()
    }

    /// Nonzero off-diagonal entries of row `i` (periodic wrap may repeat a column).
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let s = self.stride();
        self.neighbors[i * s..(i + 1) * s]
            .iter()
            .copied()
            .zip(self.couplings[i * s..(i + 1) * s].iter().copied())
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let off: f64 = self.row(i).filter(|&(k, _)| k == j).map(|(_, c)| c).sum();
        if i == j {
            self.diagonal[i] + off
        } else {
            off
        }
    }

    /// `max |G_ij|`.
    pub fn max_abs_entry(&self) -> f64 {
        (0..self.size())
            .flat_map(|i| self.row(i).map(|(_, c)| c.abs()).chain([self.diagonal[i].abs()]))
            .fold(0.0, f64::max)
    }

    fn apply_row(&self, i: usize, f: &[f64]) -> f64 {
        self.row(i).map(|(k, c)| c * f[k]).sum::<f64>() + self.diagonal[i] * f[i]
    }

    /// `out = G f`.
    pub fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        assert_eq!(f.len(), self.size());
        assert_eq!(out.len(), self.size());
        if self.size() >= PARALLEL_ROWS {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(i, o)| *o = self.apply_row(i, f));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.apply_row(i, f);
            }
        }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size()];
        self.apply_into(f, &mut out);
        out
    }

    /// `½ Σ_{x,y} N_g² ξ_{xy} (f(y) - f(x))²` over ordered neighbour pairs,
    /// i.e. once per undirected bond.
    pub fn dirichlet_form(&self, f: &[f64]) -> f64 {
        let s = self.stride();
        (0..self.size())
            .flat_map(|x| (0..self.lattice.dim()).map(move |j| (x, x * s + 2 * j)))
            .map(|(x, k)| self.couplings[k] * (f[self.neighbors[k]] - f[x]).powi(2))
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] += self.diagonal[i];
            for (k, c) in self.row(i) {
                m[(i, k)] += c;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn interval_matrix(n: usize, mode: Mode, alpha: f64) -> GeneratorMatrix {
        let l = TorusLattice::cell_centered(1, n).unwrap();
        let r = MembraneRegion::interval(0.25, 0.75).unwrap();
        assemble(&l, &r, mode, alpha).unwrap()
    }

    #[test]
    fn heat_row_example() {
        let g = interval_matrix(4, Mode::Heat, 1.0);
        let row: Vec<f64> = (0..4).map(|j| g.entry(0, j)).collect();
        assert_eq!(row, vec![-32.0, 16.0, 0.0, 16.0]);
    }

    #[test]
    fn robin_membrane_coupling() {
        let g = interval_matrix(8, Mode::Robin, 0.5);
        // Cells 1 | 2 straddle the face at 1/4.
        assert_eq!(g.entry(1, 2), 4.0);
        assert_eq!(g.entry(2, 1), 4.0);
        assert_eq!(g.entry(2, 3), 64.0);
    }

    #[test]
    fn neumann_blocks_decouple() {
        let g = interval_matrix(8, Mode::Neumann, 1.0);
        let inside: Vec<bool> = (0..8).map(|x| g.classification().is_inside(x)).collect();
        for i in 0..8 {
            for j in 0..8 {
                if inside[i] != inside[j] {
                    assert_eq!(g.entry(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn heat_ignores_membrane() {
        let l = TorusLattice::cell_centered(2, 16).unwrap();
        let disk = MembraneRegion::ball(vec![0.5, 0.5], 0.25).unwrap();
        let far = MembraneRegion::ball(vec![0.5, 0.5], 0.2).unwrap();
        let a = assemble(&l, &disk, Mode::Heat, 3.0).unwrap().to_dense();
        let b = assemble(&l, &far, Mode::Robin, 3.0).unwrap();
        let c = assemble(&l, &far, Mode::Heat, 3.0).unwrap().to_dense();
        assert_eq!(a, c);
        assert_ne!(b.to_dense(), c);
    }

    #[test]
    fn mode_dispatch() {
        assert_eq!(Mode::for_beta(Beta::Finite(0.0)), Mode::Heat);
        assert_eq!(Mode::for_beta(Beta::Finite(0.99)), Mode::Heat);
        assert_eq!(Mode::for_beta(Beta::Finite(1.0)), Mode::Robin);
        assert_eq!(Mode::for_beta(Beta::Finite(1.5)), Mode::Neumann);
        assert_eq!(Mode::for_beta(Beta::Infinite), Mode::Neumann);
        assert_eq!("robin".parse::<Mode>().unwrap(), Mode::Robin);
    }

    #[test]
    fn dirichlet_identity_matches_quadratic_form() {
        let g = interval_matrix(16, Mode::Robin, 0.3);
        let f: Vec<f64> = (0..16).map(|x| ((x * 7 % 5) as f64).cos()).collect();
        let gf = g.apply(&f);
        let q: f64 = -f.iter().zip(&gf).map(|(a, b)| a * b).sum::<f64>();
        assert!((q - g.dirichlet_form(&f)).abs() < 1e-9 * q.abs().max(1.0));
    }

    proptest! {
        #[test]
        fn invariants_hold(side in 12usize..24, alpha in 0.01f64..10.0, mode_ix in 0usize..3, r in 0.2f64..0.3) {
            let l = TorusLattice::cell_centered(2, side).unwrap();
            let region = MembraneRegion::ball(vec![0.5, 0.5], r).unwrap();
            let g = assemble(&l, &region, Mode::ALL[mode_ix], alpha).unwrap();
            let m = g.to_dense();
            prop_assert_eq!(m.clone(), m.transpose());
            for i in 0..g.size() {
                prop_assert!(m.row(i).sum().abs() < 1e-9 * g.max_abs_entry());
                for j in 0..g.size() {
                    if i != j {
                        prop_assert!(m[(i, j)] >= 0.0);
                    }
                }
            }
        }
    }
}
