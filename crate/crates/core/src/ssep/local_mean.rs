use super::Configuration;
use crate::error::{Error, Result};
use crate::geometry::{BondClassification, TorusLattice};

/// `⌊εN⌋`, the integer window length.
pub fn window_length(lattice: &TorusLattice, epsilon: f64) -> usize {
    (epsilon * lattice.side() as f64).floor() as usize
}

/// Sites of the forward box `x + {0..ℓ-1}^d` (periodic).
pub fn box_window(lattice: &TorusLattice, x: usize, ell: usize) -> Vec<usize> {
    let side = lattice.side() as isize;
    let span = (ell as isize).min(side);
    let offsets: Vec<isize> = (0..span).collect();
    product_window(lattice, x, &offsets)
}

/// Sites of `C_N[x, ℓ]`: the sup-norm ball of radius `ℓ` around `x`
/// restricted to the side of the membrane containing `x`.
pub fn sided_window(lattice: &TorusLattice, class: &BondClassification, x: usize, ell: usize) -> Vec<usize> {
    let side = lattice.side() as isize;
    let width = (2 * ell as isize + 1).min(side);
    let offsets: Vec<isize> = (-(ell as isize)..-(ell as isize) + width).collect();
    let home = class.is_inside(x);
    product_window(lattice, x, &offsets)
        .into_iter()
        .filter(|&y| class.is_inside(y) == home)
        .collect()
}

fn product_window(lattice: &TorusLattice, x: usize, offsets: &[isize]) -> Vec<usize> {
    let mut sites = vec![x];
    for axis in 0..lattice.dim() {
        sites = sites
            .iter()
            .flat_map(|&s| offsets.iter().map(move |&o| (s, o)))
            .map(|(s, o)| lattice.shift(s, axis, o))
            .collect();
    }
    sites
}

fn average(config: &Configuration, sites: &[usize]) -> f64 {
    sites.iter().map(|&y| config.get(y) as f64).sum::<f64>() / sites.len() as f64
}

/// Forward-box local mean `η^{εN}(x)`, used for `β < 1`.
pub fn local_mean_box(config: &Configuration, lattice: &TorusLattice, x: usize, epsilon: f64) -> Result<f64> {
    let ell = window_length(lattice, epsilon);
    if ell < 1 {
        return Err(Error::InvalidArgument(format!(
            "window ⌊εN⌋ = 0 for ε = {epsilon}, N = {}",
            lattice.side()
        )));
    }
    Ok(average(config, &box_window(lattice, x, ell)))
}

/// Same-side local mean over `C_N[x, ⌊εN⌋]`, used for `β ≥ 1`.
pub fn local_mean_sided(
    config: &Configuration,
    lattice: &TorusLattice,
    class: &BondClassification,
    x: usize,
    epsilon: f64,
) -> Result<f64> {
    let sites = sided_window(lattice, class, x, window_length(lattice, epsilon));
    if sites.is_empty() {
        return Err(Error::EmptyWindow { site: x });
    }
    Ok(average(config, &sites))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{classify_bonds, MembraneRegion};
    use proptest::prelude::*;

    fn alternating(n: usize) -> Configuration {
        Configuration::from_bits((0..n).map(|x| x % 2 == 1))
    }

    #[test]
    fn box_examples() {
        let l = TorusLattice::new(1, 8).unwrap();
        let c = alternating(8);
        assert_eq!(local_mean_box(&c, &l, 1, 0.25).unwrap(), 0.5);
        assert_eq!(local_mean_box(&c, &l, 3, 0.125).unwrap(), 1.0);
        assert_eq!(local_mean_box(&Configuration::full(8), &l, 5, 0.5).unwrap(), 1.0);
        assert!(local_mean_box(&c, &l, 3, 0.1).is_err());
        assert_eq!(box_window(&l, 7, 2), vec![7, 0]);
    }

    #[test]
    fn sided_examples() {
        let l = TorusLattice::new(1, 8).unwrap();
        let r = MembraneRegion::interval(0.25, 0.75).unwrap();
        let class = classify_bonds(&l, &r).unwrap();
        let mut w = sided_window(&l, &class, 2, 2);
        w.sort();
        assert_eq!(w, vec![2, 3, 4]);
        let c = Configuration::from_bits([false, true, true, false, true, true, false, true]);
        let m = local_mean_sided(&c, &l, &class, 2, 0.25).unwrap();
        assert!((m - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(local_mean_sided(&Configuration::full(8), &l, &class, 6, 0.25).unwrap(), 1.0);
    }

    #[test]
    fn sided_equals_centered_box_away_from_membrane() {
        let l = TorusLattice::new(2, 32).unwrap();
        let r = MembraneRegion::ball(vec![0.5, 0.5], 0.25).unwrap();
        let class = classify_bonds(&l, &r).unwrap();
        let x = l.site(&[16, 16]);
        let w = sided_window(&l, &class, x, 3);
        assert_eq!(w.len(), 49);
    }

    proptest! {
        #[test]
        fn sided_window_never_mixes_sides(site in 0usize..1024, ell in 1usize..6, bits in proptest::collection::vec(any::<bool>(), 1024)) {
            let l = TorusLattice::new(2, 32).unwrap();
            let r = MembraneRegion::ball(vec![0.5, 0.5], 0.25).unwrap();
            let class = classify_bonds(&l, &r).unwrap();
            let w = sided_window(&l, &class, site, ell);
            prop_assert!(w.iter().all(|&y| class.is_inside(y) == class.is_inside(site)));
            let c = Configuration::from_bits(bits);
            let m = local_mean_sided(&c, &l, &class, site, ell as f64 / 32.0).unwrap();
            prop_assert!((0.0..=1.0).contains(&m));
            let b = local_mean_box(&c, &l, site, ell as f64 / 32.0).unwrap();
            prop_assert!((0.0..=1.0).contains(&b));
        }
    }
}
