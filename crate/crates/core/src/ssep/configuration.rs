use std::io::Write;

use crate::geometry::{BondClassification, TorusLattice};

/// Occupancy `η ∈ {0,1}^{T_N^d}` with a cached particle count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    occupancy: Vec<u8>,
    particles: usize,
}

impl Configuration {
    pub fn empty(num_sites: usize) -> Self {
        Self {
            occupancy: vec![0; num_sites],
            particles: 0,
        }
    }

    pub fn full(num_sites: usize) -> Self {
        Self {
            occupancy: vec![1; num_sites],
            particles: num_sites,
        }
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let occupancy: Vec<u8> = bits.into_iter().map(u8::from).collect();
        let particles = occupancy.iter().map(|&b| b as usize).sum();
        Self {
            occupancy,
            particles,
        }
    }

    pub fn num_sites(&self) -> usize {
        self.occupancy.len()
    }

    #[inline]
    pub fn get(&self, site: usize) -> u8 {
        self.occupancy[site]
    }

    #[inline]
    pub fn is_occupied(&self, site: usize) -> bool {
        self.occupancy[site] != 0
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occupancy
    }

    pub fn particle_count(&self) -> usize {
        self.particles
    }

    /// Recount from scratch; equals [`Self::particle_count`] unless the cache
    /// is broken.
    pub fn recount(&self) -> usize {
        self.occupancy.iter().map(|&b| b as usize).sum()
    }

    /// Particles at sites inside `Λ`.
    pub fn inside_count(&self, class: &BondClassification) -> usize {
        self.occupancy
            .iter()
            .zip(class.inside_mask())
            .filter(|(&b, &inside)| inside && b != 0)
            .count()
    }

    /// `η → η^{x,y}`. Returns whether anything changed.
    #[inline]
    pub fn swap(&mut self, x: usize, y: usize) -> bool {
        if self.occupancy[x] == self.occupancy[y] {
            return false;
        }
        self.occupancy.swap(x, y);
        true
    }

    /// Flat bit dump: a one-line text header `d N t` then one byte per site.
    pub fn write_snapshot<W: Write>(&self, lattice: &TorusLattice, t: f64, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", lattice.dim(), lattice.side(), t)?;
        out.write_all(&self.occupancy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn swaps_preserve_count(bits in proptest::collection::vec(any::<bool>(), 2..64), pairs in proptest::collection::vec((0usize..64, 0usize..64), 0..200)) {
            let mut c = Configuration::from_bits(bits.clone());
            let n = bits.len();
            let before = c.particle_count();
            for (x, y) in pairs {
                c.swap(x % n, y % n);
            }
            prop_assert_eq!(c.particle_count(), before);
            prop_assert_eq!(c.recount(), before);
        }
    }

    #[test]
    fn snapshot_header() {
        let l = TorusLattice::new(1, 4).unwrap();
        let c = Configuration::from_bits([true, false, true, false]);
        let mut buf = Vec::new();
        c.write_snapshot(&l, 0.5, &mut buf).unwrap();
        assert_eq!(&buf[..8], b"1 4 0.5\n");
        assert_eq!(&buf[8..], &[1, 0, 1, 0]);
    }
}
