use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::{Configuration, RateField};
use crate::geometry::{BondClassification, TorusLattice};

/// Hooks called along a trajectory. `elapse` sees the state held during the
/// interval; `swapped` sees the state just after an effective exchange.
pub trait Observer {
    fn elapse(&mut self, _dt: f64, _config: &Configuration) {}
    fn swapped(&mut self, _x: usize, _y: usize, _config: &Configuration) {}
}

impl Observer for () {}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn elapse(&mut self, dt: f64, config: &Configuration) {
        self.0.elapse(dt, config);
        self.1.elapse(dt, config);
    }

    fn swapped(&mut self, x: usize, y: usize, config: &Configuration) {
        self.0.swapped(x, y, config);
        self.1.swapped(x, y, config);
    }
}

impl<O: Observer> Observer for [O] {
    fn elapse(&mut self, dt: f64, config: &Configuration) {
        self.iter_mut().for_each(|o| o.elapse(dt, config));
    }

    fn swapped(&mut self, x: usize, y: usize, config: &Configuration) {
        self.iter_mut().for_each(|o| o.swapped(x, y, config));
    }
}

impl<O: Observer> Observer for Option<O> {
    fn elapse(&mut self, dt: f64, config: &Configuration) {
        if let Some(o) = self {
            o.elapse(dt, config);
        }
    }

    fn swapped(&mut self, x: usize, y: usize, config: &Configuration) {
        if let Some(o) = self {
            o.swapped(x, y, config);
        }
    }
}

impl<O: Observer + ?Sized> Observer for &mut O {
    fn elapse(&mut self, dt: f64, config: &Configuration) {
        (**self).elapse(dt, config);
    }

    fn swapped(&mut self, x: usize, y: usize, config: &Configuration) {
        (**self).swapped(x, y, config);
    }
}

/// `N² (n_normal + n_slow · slow_rate)`: the jump rate of the generator
/// `N² ℒ_N` with every bond counted, void exchanges included.
pub fn total_event_rate(lattice: &TorusLattice, class: &BondClassification, rates: &RateField) -> f64 {
    let n_slow = class.num_slow() as f64;
    let n_normal = lattice.num_bonds() as f64 - n_slow;
    let n2 = (lattice.side() as f64).powi(2);
    n2 * (n_normal + n_slow * rates.slow_rate())
}

/// Event-driven simulator of `N² ℒ_N` with two bond classes.
///
/// Waiting times are exponential with the total rate; a class is picked in
/// proportion to its total rate, then a bond uniformly within the class. An
/// exchange between equal occupations is a no-op. Time is macroscopic.
#[derive(Debug, Clone)]
pub struct Dynamics {
    normal: Vec<(u32, u32)>,
    slow: Vec<(u32, u32)>,
    normal_rate: f64,
    total_rate: f64,
}

impl Dynamics {
    pub fn new(lattice: &TorusLattice, class: &BondClassification, rates: &RateField) -> Self {
        let mut normal = Vec::with_capacity(lattice.num_bonds() - class.num_slow());
        let mut slow = Vec::with_capacity(class.num_slow());
        for b in 0..lattice.num_bonds() {
            let (x, y) = lattice.bond(b);
            let pair = (x as u32, y as u32);
            if class.is_slow(b) {
                slow.push(pair);
            } else {
                normal.push(pair);
            }
        }
        let n2 = (lattice.side() as f64).powi(2);
        let normal_rate = n2 * normal.len() as f64;
        let total_rate = total_event_rate(lattice, class, rates);
        Self {
            normal,
            slow,
            normal_rate,
            total_rate,
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// Run from macroscopic time `t_from` to `t_to`; returns the number of
    /// clock rings (void exchanges included).
    pub fn advance<R: Rng + ?Sized, O: Observer>(
        &self,
        config: &mut Configuration,
        t_from: f64,
        t_to: f64,
        rng: &mut R,
        observer: &mut O,
    ) -> u64 {
        assert!(t_to >= t_from, "cannot advance backwards: {t_from} -> {t_to}");
        if t_to == t_from {
            return 0;
        }
        if self.total_rate <= 0.0 {
            observer.elapse(t_to - t_from, config);
            return 0;
        }
        let mut t = t_from;
        let mut events = 0u64;
        loop {
            let wait: f64 = Exp1.sample(rng);
            let wait = wait / self.total_rate;
            if t + wait >= t_to {
                observer.elapse(t_to - t, config);
                return events;
            }
            observer.elapse(wait, config);
            t += wait;
            events += 1;

            let pick = rng.random::<f64>() * self.total_rate;
            let bonds = if pick < self.normal_rate || self.slow.is_empty() {
                &self.normal
            } else {
                &self.slow
            };
            let (x, y) = bonds[rng.random_range(0..bonds.len())];
            let (x, y) = (x as usize, y as usize);
            if config.swap(x, y) {
                observer.swapped(x, y, config);
            }
        }
    }
}
