use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{MembraneRegion, TorusLattice};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Inside `Λ`.
    Minus,
    /// Inside the complement of `Λ`.
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SumVariant {
    /// `N^{1-d} Σ_{left ∪ right} g`, approximating `∫ g |ζ_j| dS`.
    Abs,
    /// `N^{1-d} (Σ_right g - Σ_left g)`, approximating `∫ g ζ_j dS`.
    Signed,
}

/// Membrane sites of one side split by axis and by which neighbour is
/// across the membrane. Left and right may share sites; they are kept in
/// both lists.
#[derive(Debug, Clone, Default)]
pub struct DirectionalSets {
    pub left: Vec<Vec<usize>>,
    pub right: Vec<Vec<usize>>,
}

/// Slow bonds and the membrane site sets built from them.
#[derive(Debug, Clone)]
pub struct BondClassification {
    inside: Vec<bool>,
    slow: Vec<bool>,
    slow_bonds: Vec<usize>,
    gamma: Vec<usize>,
    gamma_minus: Vec<usize>,
    gamma_plus: Vec<usize>,
    minus: DirectionalSets,
    plus: DirectionalSets,
    inside_count: usize,
}

/// Mark every bond whose endpoints lie on opposite sides of the membrane.
pub fn classify_bonds(lattice: &TorusLattice, region: &MembraneRegion) -> Result<BondClassification> {
    let d = lattice.dim();
    if region.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: region.dim(),
        });
    }
    let width = region.tubular_width();
    // Width exactly 2/N is accepted: the N = 8 quarter interval sits on it.
    if width < 2.0 / lattice.side() as f64 {
        return Err(Error::ResolutionTooCoarse {
            side: lattice.side(),
            width,
        });
    }
    classify_unguarded(lattice, region)
}

/// Classification without the resolution guard, for callers that never
/// treat the membrane specially.
pub(crate) fn classify_unguarded(lattice: &TorusLattice, region: &MembraneRegion) -> Result<BondClassification> {
    let d = lattice.dim();
    if region.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: region.dim(),
        });
    }
    let n_sites = lattice.num_sites();
    let mut pos = vec![0.0; d];
    let inside: Vec<bool> = (0..n_sites)
        .map(|x| {
            lattice.position_into(x, &mut pos);
            region.contains(&pos)
        })
        .collect();
    let inside_count = inside.iter().filter(|&&b| b).count();
    if inside_count == 0 {
        return Err(Error::EmptyRegion("no lattice site lies in the region"));
    }
    if inside_count == n_sites {
        return Err(Error::EmptyRegion("no lattice site lies outside the region"));
    }

    let mut slow = vec![false; lattice.num_bonds()];
    let mut slow_bonds = Vec::new();
    let mut touched = vec![false; n_sites];
    for x in 0..n_sites {
        for j in 0..d {
            let y = lattice.forward(x, j);
            if inside[x] != inside[y] {
                let b = lattice.bond_id(x, j);
                slow[b] = true;
                slow_bonds.push(b);
                touched[x] = true;
                touched[y] = true;
            }
        }
    }

    let gamma: Vec<usize> = (0..n_sites).filter(|&x| touched[x]).collect();
    let (gamma_minus, gamma_plus): (Vec<usize>, Vec<usize>) =
        gamma.iter().partition(|&&x| inside[x]);

    let mut minus = DirectionalSets {
        left: vec![Vec::new(); d],
        right: vec![Vec::new(); d],
    };
    for &x in &gamma_minus {
        for j in 0..d {
            if !inside[lattice.backward(x, j)] {
                minus.left[j].push(x);
            }
            if !inside[lattice.forward(x, j)] {
                minus.right[j].push(x);
            }
        }
    }
    let mut plus = DirectionalSets {
        left: vec![Vec::new(); d],
        right: vec![Vec::new(); d],
    };
    for &x in &gamma_plus {
        for j in 0..d {
            if inside[lattice.forward(x, j)] {
                plus.left[j].push(x);
            }
            if inside[lattice.backward(x, j)] {
                plus.right[j].push(x);
            }
        }
    }

    Ok(BondClassification {
        inside,
        slow,
        slow_bonds,
        gamma,
        gamma_minus,
        gamma_plus,
        minus,
        plus,
        inside_count,
    })
}

impl BondClassification {
    #[inline]
    pub fn is_inside(&self, site: usize) -> bool {
        self.inside[site]
    }

    pub fn inside_mask(&self) -> &[bool] {
        &self.inside
    }

    pub fn inside_count(&self) -> usize {
        self.inside_count
    }

    #[inline]
    pub fn is_slow(&self, bond: usize) -> bool {
        self.slow[bond]
    }

    pub fn slow_bonds(&self) -> &[usize] {
        &self.slow_bonds
    }

    pub fn num_slow(&self) -> usize {
        self.slow_bonds.len()
    }

    /// `Γ_N`: sites with an incident slow bond, ascending.
    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }

    pub fn gamma_side(&self, side: Side) -> &[usize] {
        match side {
            Side::Minus => &self.gamma_minus,
            Side::Plus => &self.gamma_plus,
        }
    }

    pub fn directional(&self, side: Side) -> &DirectionalSets {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    pub fn left(&self, side: Side, axis: usize) -> &[usize] {
        &self.directional(side).left[axis]
    }

    pub fn right(&self, side: Side, axis: usize) -> &[usize] {
        &self.directional(side).right[axis]
    }

    /// Writes `site_index, coords.., set_name` rows for every membrane set.
    pub fn write_csv<W: Write>(&self, lattice: &TorusLattice, mut out: W) -> std::io::Result<()> {
        let d = lattice.dim();
        write!(out, "site_index")?;
        for j in 1..=d {
            write!(out, ",x{j}")?;
        }
        writeln!(out, ",set_name")?;
        let mut emit = |name: &str, sites: &[usize]| -> std::io::Result<()> {
            for &x in sites {
                write!(out, "{x}")?;
                for c in lattice.coords(x) {
                    write!(out, ",{c}")?;
                }
                writeln!(out, ",{name}")?;
            }
            Ok(())
        };
        emit("gamma", &self.gamma)?;
        emit("gamma_minus", &self.gamma_minus)?;
        emit("gamma_plus", &self.gamma_plus)?;
        for j in 0..d {
            let k = j + 1;
            emit(&format!("gamma_minus_{k}_left"), &self.minus.left[j])?;
            emit(&format!("gamma_minus_{k}_right"), &self.minus.right[j])?;
            emit(&format!("gamma_plus_{k}_left"), &self.plus.left[j])?;
            emit(&format!("gamma_plus_{k}_right"), &self.plus.right[j])?;
        }
        Ok(())
    }
}

/// Lattice Riemann sum over a directional membrane set, scaled by `N^{1-d}`.
pub fn boundary_sum(
    class: &BondClassification,
    lattice: &TorusLattice,
    g: impl Fn(&[f64]) -> f64,
    side: Side,
    axis: usize,
    variant: SumVariant,
) -> f64 {
    let mut pos = vec![0.0; lattice.dim()];
    let mut sum_over = |sites: &[usize]| -> f64 {
        sites
            .iter()
            .map(|&x| {
                lattice.position_into(x, &mut pos);
                g(&pos)
            })
            .sum()
    };
    let right = sum_over(class.right(side, axis));
    let left = sum_over(class.left(side, axis));
    let scale = (lattice.side() as f64).powi(1 - lattice.dim() as i32);
    match variant {
        SumVariant::Abs => scale * (right + left),
        SumVariant::Signed => scale * (right - left),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LevelSet;

    fn unit_interval_case() -> (TorusLattice, BondClassification) {
        let l = TorusLattice::new(1, 8).unwrap();
        let r = MembraneRegion::interval(0.25, 0.75).unwrap();
        let c = classify_bonds(&l, &r).unwrap();
        (l, c)
    }

    #[test]
    fn interval_sets() {
        let (l, c) = unit_interval_case();
        let inside: Vec<usize> = (0..8).filter(|&x| c.is_inside(x)).collect();
        assert_eq!(inside, vec![2, 3, 4, 5]);
        let slow: Vec<(usize, usize)> = c.slow_bonds().iter().map(|&b| l.bond(b)).collect();
        assert_eq!(slow, vec![(1, 2), (5, 6)]);
        assert_eq!(c.gamma(), &[1, 2, 5, 6]);
        assert_eq!(c.gamma_side(Side::Minus), &[2, 5]);
        assert_eq!(c.gamma_side(Side::Plus), &[1, 6]);
        assert_eq!(c.left(Side::Minus, 0), &[2]);
        assert_eq!(c.right(Side::Minus, 0), &[5]);
        assert_eq!(c.left(Side::Plus, 0), &[1]);
        assert_eq!(c.right(Side::Plus, 0), &[6]);
    }

    #[test]
    fn coarse_lattice_is_rejected() {
        let nearly_full = MembraneRegion::interval(0.0, 0.999).unwrap();
        assert!(matches!(
            classify_bonds(&TorusLattice::new(1, 64).unwrap(), &nearly_full),
            Err(Error::ResolutionTooCoarse { .. })
        ));
        let small = MembraneRegion::ball(vec![0.5, 0.5], 0.1).unwrap();
        assert!(matches!(
            classify_bonds(&TorusLattice::new(2, 8).unwrap(), &small),
            Err(Error::ResolutionTooCoarse { .. })
        ));
        assert!(classify_bonds(&TorusLattice::new(2, 32).unwrap(), &small).is_ok());
    }

    #[test]
    fn whole_or_empty_region_is_rejected() {
        let l = TorusLattice::new(1, 40).unwrap();
        let all = MembraneRegion::level_set(LevelSet::new(1, |_: &[f64]| -1.0, 0.3)).unwrap();
        assert!(matches!(classify_bonds(&l, &all), Err(Error::EmptyRegion(_))));
        let none = MembraneRegion::level_set(LevelSet::new(1, |_: &[f64]| 1.0, 0.3)).unwrap();
        assert!(matches!(classify_bonds(&l, &none), Err(Error::EmptyRegion(_))));
    }

    #[test]
    fn interval_boundary_sum_counts_two_sites() {
        for n in [8usize, 16, 64, 256] {
            let l = TorusLattice::new(1, n).unwrap();
            let r = MembraneRegion::interval(0.25, 0.75).unwrap();
            let c = classify_bonds(&l, &r).unwrap();
            let s = boundary_sum(&c, &l, |_| 1.0, Side::Minus, 0, SumVariant::Abs);
            assert_eq!(s, 2.0);
            let s = boundary_sum(&c, &l, |_| 1.0, Side::Minus, 0, SumVariant::Signed);
            assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn slow_bond_symmetry_and_gamma_invariants() {
        let l = TorusLattice::new(2, 32).unwrap();
        let r = MembraneRegion::ball(vec![0.5, 0.5], 0.25).unwrap();
        let c = classify_bonds(&l, &r).unwrap();
        for b in 0..l.num_bonds() {
            let (x, y) = l.bond(b);
            assert_eq!(c.is_slow(b), c.is_inside(x) != c.is_inside(y));
        }
        assert!(c.gamma().len() <= 2 * l.dim() * c.num_slow());
        assert_eq!(
            c.gamma().len(),
            c.gamma_side(Side::Minus).len() + c.gamma_side(Side::Plus).len()
        );
        for &x in c.gamma() {
            let incident = (0..2).any(|j| {
                c.is_slow(l.bond_id(x, j)) || c.is_slow(l.bond_id(l.backward(x, j), j))
            });
            assert!(incident);
        }
    }

    #[test]
    fn csv_dump_lists_every_set() {
        let (l, c) = unit_interval_case();
        let mut buf = Vec::new();
        c.write_csv(&l, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("site_index,x1,set_name\n"));
        assert!(text.contains("2,2,gamma_minus_1_left\n"));
        assert!(text.contains("6,6,gamma_plus_1_right\n"));
        assert_eq!(text.lines().count(), 1 + 4 + 2 + 2 + 4);
    }
}
