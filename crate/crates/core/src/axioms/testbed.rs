use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mixture::{mix, Lottery, PrizeSet};
use crate::streams::Stream;

/// The finite slice of the choice domain on which axioms are certified.
#[derive(Debug, Clone)]
pub struct Testbed {
    prizes: Arc<PrizeSet>,
    anchor: Lottery,
    grid: Vec<f64>,
    n: usize,
    horizon_cap: usize,
    seed: u64,
    pool_size: usize,
    samples: usize,
}

impl Testbed {
    pub fn new(prizes: Arc<PrizeSet>, anchor: Lottery, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::argument("stream length n must be at least 1"));
        }
        if anchor.prizes() != &prizes {
            return Err(Error::domain("anchor is over a different prize set"));
        }
        Ok(Testbed {
            prizes,
            anchor,
            grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            n,
            horizon_cap: 200.max(n),
            seed: 0,
            pool_size: 16,
            samples: 48,
        })
    }

    /// Mixture coefficients; 0 and 1 are always added.
    pub fn with_grid(mut self, grid: &[f64]) -> Result<Self> {
        if let Some(g) = grid.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return Err(Error::argument(format!("grid point {g} outside [0, 1]")));
        }
        let mut g: Vec<f64> = grid.iter().copied().chain([0.0, 1.0]).collect();
        g.sort_by(f64::total_cmp);
        g.dedup();
        self.grid = g;
        Ok(self)
    }

    pub fn with_horizon_cap(mut self, h: usize) -> Result<Self> {
        if h < self.n {
            return Err(Error::argument(format!("horizon cap {h} is below n = {}", self.n)));
        }
        self.horizon_cap = h;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of random streams in each pool and the per-check case budget.
    pub fn with_sizes(mut self, pool_size: usize, samples: usize) -> Self {
        self.pool_size = pool_size;
        self.samples = samples.max(1);
        self
    }

    pub fn prizes(&self) -> &Arc<PrizeSet> {
        &self.prizes
    }

    pub fn anchor(&self) -> &Lottery {
        &self.anchor
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn interior_grid(&self) -> Vec<f64> {
        self.grid.iter().copied().filter(|g| *g > 0.0 && *g < 1.0).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon_cap(&self) -> usize {
        self.horizon_cap
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    pub fn degenerate(&self) -> Vec<Lottery> {
        (0..self.prizes.len()).map(|i| Lottery::degenerate(&self.prizes, i).expect("in range")).collect()
    }

    /// Degenerate lotteries, pairwise mixtures at interior grid points, and
    /// the anchor.
    pub fn lotteries(&self) -> Vec<Lottery> {
        let d = self.degenerate();
        let mut out = d.clone();
        let inner = self.interior_grid();
        for i in 0..d.len() {
            for j in i + 1..d.len() {
                for g in &inner {
                    out.push(mix(&d[i], *g, &d[j]).expect("same prize set"));
                }
            }
        }
        if !out.contains(&self.anchor) {
            out.push(self.anchor.clone());
        }
        out
    }

    /// Streams of length `n`: every degenerate constant stream plus random
    /// draws from [`Testbed::lotteries`].
    pub fn finite_pool(&self) -> Vec<Stream> {
        let lots = self.lotteries();
        let mut rng = self.rng(1);
        let mut out: Vec<Stream> = self
            .degenerate()
            .into_iter()
            .map(|d| Stream::finite(vec![d; self.n]).expect("n >= 1"))
            .collect();
        for _ in 0..self.pool_size {
            let p = (0..self.n).map(|_| lots[rng.gen_range(0..lots.len())].clone()).collect();
            out.push(Stream::finite(p).expect("n >= 1"));
        }
        out
    }

    /// Constant streams of every testbed lottery plus random ultimately
    /// constant streams.
    pub fn anchored_pool(&self) -> Vec<Stream> {
        let lots = self.lotteries();
        let mut rng = self.rng(2);
        let mut out: Vec<Stream> = lots.iter().cloned().map(Stream::constant).collect();
        for _ in 0..self.pool_size {
            let len = rng.gen_range(1..=self.n);
            let p = (0..len).map(|_| lots[rng.gen_range(0..lots.len())].clone()).collect();
            out.push(Stream::infinite(p, self.anchor.clone()).expect("same prize set"));
        }
        out
    }

    /// [`Testbed::anchored_pool`] plus eventually constant streams whose tail
    /// is not the anchor.
    pub fn general_pool(&self) -> Vec<Stream> {
        let lots = self.lotteries();
        let d = self.degenerate();
        let mut rng = self.rng(3);
        let mut out = self.anchored_pool();
        for _ in 0..(self.pool_size / 4).max(2) {
            let len = rng.gen_range(1..=self.n);
            let p = (0..len).map(|_| lots[rng.gen_range(0..lots.len())].clone()).collect();
            let tail = d[rng.gen_range(0..d.len())].clone();
            out.push(Stream::infinite(p, tail).expect("same prize set"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tb() -> Testbed {
        let p = PrizeSet::new(["a", "b", "z"]).unwrap();
        let z = Lottery::degenerate(&p, 2).unwrap();
        Testbed::new(p, z, 3).unwrap()
    }

    #[test]
    fn grid_always_holds_endpoints() {
        let t = tb().with_grid(&[0.5, 0.25]).unwrap();
        assert_eq!(t.grid(), &[0.0, 0.25, 0.5, 1.0]);
        assert_eq!(t.interior_grid(), vec![0.25, 0.5]);
        assert!(tb().with_grid(&[1.5]).is_err());
        assert!(tb().with_horizon_cap(2).is_err());
    }

    #[test]
    fn pools_are_deterministic() {
        let a = tb().with_seed(7);
        let b = tb().with_seed(7);
        assert_eq!(a.finite_pool(), b.finite_pool());
        assert_eq!(a.general_pool(), b.general_pool());
        assert_ne!(a.finite_pool(), tb().with_seed(8).finite_pool());
        assert_eq!(a.lotteries().len(), 3 + 3 * 3);
    }
}
