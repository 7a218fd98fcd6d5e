use rand::Rng;

use crate::error::{Error, Result};

/// Cascading click model: the user scans a ranked list of `K` items from
/// the top and clicks the first attractive one.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeEnv {
    attractions: Vec<f64>,
    slate_size: usize,
}

/// Outcome of showing one ranked list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CascadeOutcome {
    /// Position (0-based, within the list) of the first click.
    pub click: Option<usize>,
}

impl CascadeOutcome {
    /// Number of leading positions whose click/no-click outcome is observed.
    pub fn examined(&self, slate_len: usize) -> usize {
        self.click.map_or(slate_len, |pos| pos + 1)
    }
}

impl CascadeEnv {
    pub fn new(attractions: Vec<f64>, slate_size: usize) -> Result<Self> {
        if slate_size == 0 || slate_size > attractions.len() {
            return Err(Error::config(format!(
                "cascade slate size {slate_size} must be in 1..={}",
                attractions.len()
            )));
        }
        if let Some(w) = attractions.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::config(format!("attraction {w} outside [0, 1]")));
        }
        Ok(Self {
            attractions,
            slate_size,
        })
    }

    /// Attractions drawn `U(0, max_attraction)`.
    pub fn sample<R: Rng + ?Sized>(
        items: usize,
        slate_size: usize,
        max_attraction: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let attractions = (0..items)
            .map(|_| max_attraction * rng.random::<f64>())
            .collect();
        Self::new(attractions, slate_size)
    }

    pub fn attractions(&self) -> &[f64] {
        &self.attractions
    }

    pub fn n_items(&self) -> usize {
        self.attractions.len()
    }

    pub fn slate_size(&self) -> usize {
        self.slate_size
    }

    pub(crate) fn check_slate(&self, slate: &[usize]) {
        assert_eq!(slate.len(), self.slate_size, "cascade list must have K items");
        super::assert_distinct(slate, self.n_items());
    }

    pub fn pull<R: Rng + ?Sized>(&self, slate: &[usize], rng: &mut R) -> CascadeOutcome {
        self.check_slate(slate);
        let click = slate
            .iter()
            .position(|&item| rng.random::<f64>() < self.attractions[item]);
        CascadeOutcome { click }
    }

    /// Click probability of a list: `1 - Π (1 - w_i)`.
    pub fn expected_value(&self, slate: &[usize]) -> f64 {
        1.0 - slate
            .iter()
            .map(|&i| 1.0 - self.attractions[i])
            .product::<f64>()
    }

    pub fn optimal_slate(&self) -> Vec<usize> {
        super::top_k_by(&self.attractions, self.slate_size)
    }

    pub fn optimal_value(&self) -> f64 {
        self.expected_value(&self.optimal_slate())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn closed_form_value() {
        let env = CascadeEnv::new(vec![0.5, 0.5, 0.1], 2).unwrap();
        assert!((env.optimal_value() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_attraction_never_clicks() {
        let env = CascadeEnv::new(vec![0.0; 6], 3).unwrap();
        let mut rng = RngStream::new(1);
        for _ in 0..1000 {
            let out = env.pull(&[0, 1, 2], &mut rng);
            assert_eq!(out.click, None);
            assert_eq!(out.examined(3), 3);
        }
        assert_eq!(env.optimal_value(), 0.0);
    }

    #[test]
    fn click_rate_matches_expected_value() {
        let env = CascadeEnv::new(vec![0.2, 0.1, 0.3, 0.05], 3).unwrap();
        let slate = [2, 0, 3];
        let mut rng = RngStream::new(2);
        let n = 100_000;
        let clicks = (0..n)
            .filter(|_| env.pull(&slate, &mut rng).click.is_some())
            .count() as f64;
        let p = env.expected_value(&slate);
        assert!((clicks / n as f64 - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    #[should_panic]
    fn duplicate_items_rejected() {
        let env = CascadeEnv::new(vec![0.1; 5], 2).unwrap();
        env.pull(&[1, 1], &mut RngStream::new(0));
    }
}
