use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pde::GeneratorMatrix;

/// Relative tolerance for the symmetry and sign checks.
pub const OPERATOR_TOL: f64 = 1e-12;

/// Outcome of randomised symmetry / nonnegativity checks on `G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorReport {
    pub trials: usize,
    /// `max |⟨f,Gg⟩ - ⟨Gf,g⟩| / scale`.
    pub symmetry_error: f64,
    /// `min ⟨f,-Gf⟩ / scale`.
    pub min_quadratic_form: f64,
    /// `max |⟨f,-Gf⟩ - E(f)| / scale` with `E` the bond-sum Dirichlet form.
    pub dirichlet_identity_error: f64,
    /// `min (⟨f,(I-G)f⟩ - ⟨f,f⟩) / scale`.
    pub min_energetic_margin: f64,
}

impl OperatorReport {
    pub fn symmetric(&self) -> bool {
        self.symmetry_error <= OPERATOR_TOL
    }

    pub fn nonnegative(&self) -> bool {
        self.min_quadratic_form >= -OPERATOR_TOL
    }

    pub fn strongly_monotone(&self) -> bool {
        self.min_energetic_margin >= -OPERATOR_TOL
    }

    pub fn passed(&self) -> bool {
        self.symmetric() && self.nonnegative() && self.strongly_monotone() && self.dirichlet_identity_error <= OPERATOR_TOL
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Test `G` on `trials` random pairs `(f, g)` drawn from `seed`. Each
/// quantity is normalised by `‖f‖ ‖g‖ max|G_ij|`.
pub fn verify_operator(g: &GeneratorMatrix, trials: usize, seed: u64) -> OperatorReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.size();
    let gmax = g.max_abs_entry().max(f64::MIN_POSITIVE);
    let mut report = OperatorReport {
        trials,
        symmetry_error: 0.0,
        min_quadratic_form: f64::INFINITY,
        dirichlet_identity_error: 0.0,
        min_energetic_margin: f64::INFINITY,
    };
    for _ in 0..trials {
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let gf = g.apply(&f);
        let gh = g.apply(&h);
        let nf = dot(&f, &f).sqrt();
        let nh = dot(&h, &h).sqrt();
        let scale_fh = (nf * nh * gmax).max(f64::MIN_POSITIVE);
        let scale_ff = (nf * nf * gmax).max(f64::MIN_POSITIVE);
        report.symmetry_error = report.symmetry_error.max((dot(&f, &gh) - dot(&gf, &h)).abs() / scale_fh);
        let q = -dot(&f, &gf);
        report.min_quadratic_form = report.min_quadratic_form.min(q / scale_ff);
        report.dirichlet_identity_error = report
            .dirichlet_identity_error
            .max((q - g.dirichlet_form(&f)).abs() / scale_ff);
        let energetic = dot(&f, &f) + q;
        report.min_energetic_margin = report.min_energetic_margin.min((energetic - dot(&f, &f)) / scale_ff);
    }
    if trials == 0 {
        report.min_quadratic_form = 0.0;
        report.min_energetic_margin = 0.0;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MembraneRegion, TorusLattice};
    use crate::pde::{assemble, Mode};

    #[test]
    fn every_mode_passes() {
        let l = TorusLattice::cell_centered(2, 16).unwrap();
        let r = MembraneRegion::ball(vec![0.5, 0.5], 0.25).unwrap();
        for mode in Mode::ALL {
            let g = assemble(&l, &r, mode, 0.7).unwrap();
            let rep = verify_operator(&g, 20, 1);
            assert!(rep.passed(), "{mode}: {rep:?}");
        }
    }

    #[test]
    fn robin_small_grid_is_symmetric_to_rounding() {
        let l = TorusLattice::cell_centered(1, 8).unwrap();
        let r = MembraneRegion::interval(0.25, 0.75).unwrap();
        let g = assemble(&l, &r, Mode::Robin, 1.0).unwrap();
        assert_eq!(g.to_dense(), g.to_dense().transpose());
        assert!(verify_operator(&g, 50, 2).symmetry_error < 1e-15);
    }

    #[test]
    fn constants_have_zero_energy() {
        let l = TorusLattice::cell_centered(1, 32).unwrap();
        let r = MembraneRegion::interval(0.25, 0.75).unwrap();
        let g = assemble(&l, &r, Mode::Heat, 1.0).unwrap();
        let c = vec![0.8; 32];
        assert_eq!(dot(&c, &g.apply(&c)), 0.0);
        assert_eq!(g.dirichlet_form(&c), 0.0);
    }
}
