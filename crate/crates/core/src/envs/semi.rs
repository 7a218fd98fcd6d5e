use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Combinatorial semi-bandit: pick `K/2` items from each of two equal
/// groups and observe a noisy reward for every chosen item.
///
/// Items `0..L/2` form the first group and `L/2..L` the second.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiBanditEnv {
    item_means: Vec<f64>,
    slate_size: usize,
    noise_sd: f64,
}

impl SemiBanditEnv {
    pub fn new(item_means: Vec<f64>, slate_size: usize, noise_sd: f64) -> Result<Self> {
        let items = item_means.len();
        if items % 2 != 0 || items == 0 {
            return Err(Error::config(format!("semi-bandit needs an even item count, got {items}")));
        }
        if slate_size % 2 != 0 || slate_size == 0 || slate_size > items {
            return Err(Error::config(format!(
                "semi-bandit slate size must be even and in 2..={items}, got {slate_size}"
            )));
        }
        if !(noise_sd >= 0.0) {
            return Err(Error::config(format!("noise sd must be nonnegative, got {noise_sd}")));
        }
        Ok(Self {
            item_means,
            slate_size,
            noise_sd,
        })
    }

    pub fn sample<R: Rng + ?Sized>(
        items: usize,
        slate_size: usize,
        max_mean: f64,
        noise_sd: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let means = (0..items).map(|_| max_mean * rng.random::<f64>()).collect();
        Self::new(means, slate_size, noise_sd)
    }

    pub fn item_means(&self) -> &[f64] {
        &self.item_means
    }

    pub fn n_items(&self) -> usize {
        self.item_means.len()
    }

    pub fn slate_size(&self) -> usize {
        self.slate_size
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    /// Item ranges of the two groups.
    pub fn groups(&self) -> [std::ops::Range<usize>; 2] {
        let half = self.n_items() / 2;
        [0..half, half..self.n_items()]
    }

    pub(crate) fn check_slate(&self, slate: &[usize]) {
        assert_eq!(slate.len(), self.slate_size, "semi-bandit action must have K items");
        super::assert_distinct(slate, self.n_items());
        let half = self.n_items() / 2;
        let first = slate.iter().filter(|&&i| i < half).count();
        assert_eq!(first, self.slate_size / 2, "need K/2 items from each group");
    }

    /// Per-item rewards, aligned with `slate`.
    pub fn pull<R: Rng + ?Sized>(&self, slate: &[usize], rng: &mut R) -> Vec<f64> {
        self.check_slate(slate);
        slate
            .iter()
            .map(|&i| {
                let z: f64 = StandardNormal.sample(rng);
                self.item_means[i] + self.noise_sd * z
            })
            .collect()
    }

    pub fn expected_value(&self, slate: &[usize]) -> f64 {
        slate.iter().map(|&i| self.item_means[i]).sum()
    }

    pub fn optimal_slate(&self) -> Vec<usize> {
        let per_group = self.slate_size / 2;
        let mut slate = Vec::with_capacity(self.slate_size);
        for group in self.groups() {
            let offset = group.start;
            let picks = super::top_k_by(&self.item_means[group], per_group);
            slate.extend(picks.into_iter().map(|i| i + offset));
        }
        slate
    }

    pub fn optimal_value(&self) -> f64 {
        self.expected_value(&self.optimal_slate())
    }
}
