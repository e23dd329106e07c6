use crate::error::{Error, Result};

/// Discrete torus `{0, .., N-1}^d` embedded in `[0,1)^d`.
///
/// Sites are flattened with axis 0 fastest. Bond `b = site * d + j` joins
/// `site` and `site + e_j` (periodic). Site `x` sits at `(x + offset) / N`;
/// the particle lattice uses offset `0`, the PDE grid uses cell centres
/// (offset `1/2`) so that cell faces carry the interface.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusLattice {
    dim: usize,
    side: usize,
    offset: f64,
    strides: Vec<usize>,
}

impl TorusLattice {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        Self::with_offset(dim, side, 0.0)
    }

    /// Grid whose sites sit at cell centres `(x + 1/2) / N`.
    pub fn cell_centered(dim: usize, side: usize) -> Result<Self> {
        Self::with_offset(dim, side, 0.5)
    }

    fn with_offset(dim: usize, side: usize, offset: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("lattice dimension must be >= 1".into()));
        }
        if side < 2 {
            return Err(Error::InvalidArgument(format!(
                "lattice side must be >= 2, got {side}"
            )));
        }
        let total = (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(side));
        if total.is_none_or(|t| t > u32::MAX as usize) {
            return Err(Error::InvalidArgument(format!(
                "lattice {side}^{dim} is too large"
            )));
        }
        let strides = (0..dim).map(|j| side.pow(j as u32)).collect();
        Ok(Self {
            dim,
            side,
            offset,
            strides,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn num_sites(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn num_bonds(&self) -> usize {
        self.dim * self.num_sites()
    }

    /// `N^{-d}`, the mass of one site.
    pub fn cell_volume(&self) -> f64 {
        (self.side as f64).powi(-(self.dim as i32))
    }

    #[inline]
    pub fn coord(&self, site: usize, axis: usize) -> usize {
        (site / self.strides[axis]) % self.side
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        (0..self.dim).map(|j| self.coord(site, j)).collect()
    }

    pub fn site(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dim);
        coords
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| (c % self.side) * s)
            .sum()
    }

    /// Site reached by moving `delta` steps along `axis`, with wraparound.
    #[inline]
    pub fn shift(&self, site: usize, axis: usize, delta: isize) -> usize {
        let n = self.side as isize;
        let c = self.coord(site, axis) as isize;
        let moved = (c + delta).rem_euclid(n) as usize;
        site - (c as usize) * self.strides[axis] + moved * self.strides[axis]
    }

    #[inline]
    pub fn forward(&self, site: usize, axis: usize) -> usize {
        self.shift(site, axis, 1)
    }

    #[inline]
    pub fn backward(&self, site: usize, axis: usize) -> usize {
        self.shift(site, axis, -1)
    }

    pub fn bond_id(&self, site: usize, axis: usize) -> usize {
        site * self.dim + axis
    }

    /// Endpoints `(x, x + e_j)` of a bond.
    #[inline]
    pub fn bond(&self, bond: usize) -> (usize, usize) {
        let site = bond / self.dim;
        let axis = bond % self.dim;
        (site, self.forward(site, axis))
    }

    pub fn bond_axis(&self, bond: usize) -> usize {
        bond % self.dim
    }

    pub fn position_into(&self, site: usize, out: &mut [f64]) {
        let n = self.side as f64;
        for (j, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = (self.coord(site, j) as f64 + self.offset) / n;
        }
    }

    pub fn position(&self, site: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.position_into(site, &mut out);
        out
    }

    /// Index of the site whose cell contains `u` (nearest site for offset 0).
    pub fn locate(&self, u: &[f64]) -> usize {
        let n = self.side as f64;
        let coords: Vec<usize> = u
            .iter()
            .map(|&x| {
                let c = (x * n - self.offset).round() as isize;
                c.rem_euclid(self.side as isize) as usize
            })
            .collect();
        self.site(&coords)
    }
}
