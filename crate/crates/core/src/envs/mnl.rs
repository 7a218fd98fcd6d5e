use rand::Rng;

use crate::error::{Error, Result};

/// Multinomial-logit choice model over `L` items with a cardinality-`K`
/// assortment constraint.
///
/// Offering `S`, the user buys item `i ∈ S` with probability
/// `v_i / (1 + Σ_{j∈S} v_j)` and buys nothing otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct MnlEnv {
    attractiveness: Vec<f64>,
    revenues: Vec<f64>,
    slate_size: usize,
}

impl MnlEnv {
    pub fn new(attractiveness: Vec<f64>, revenues: Vec<f64>, slate_size: usize) -> Result<Self> {
        if attractiveness.len() != revenues.len() || attractiveness.is_empty() {
            return Err(Error::config("MNL needs one revenue per item and at least one item"));
        }
        if slate_size == 0 || slate_size > attractiveness.len() {
            return Err(Error::config(format!(
                "MNL slate size {slate_size} must be in 1..={}",
                attractiveness.len()
            )));
        }
        if attractiveness.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::config("MNL attractiveness must be positive"));
        }
        if revenues.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::config("MNL revenues must lie in [0, 1]"));
        }
        Ok(Self {
            attractiveness,
            revenues,
            slate_size,
        })
    }

    /// Attractiveness drawn from `(0, max_attractiveness]`, unit revenues.
    pub fn sample<R: Rng + ?Sized>(
        items: usize,
        slate_size: usize,
        max_attractiveness: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let v = (0..items)
            .map(|_| max_attractiveness * (1.0 - rng.random::<f64>()))
            .collect();
        Self::new(v, vec![1.0; items], slate_size)
    }

    pub fn attractiveness(&self) -> &[f64] {
        &self.attractiveness
    }

    pub fn revenues(&self) -> &[f64] {
        &self.revenues
    }

    pub fn n_items(&self) -> usize {
        self.attractiveness.len()
    }

    pub fn slate_size(&self) -> usize {
        self.slate_size
    }

    pub(crate) fn check_slate(&self, slate: &[usize]) {
        assert!(
            !slate.is_empty() && slate.len() <= self.slate_size,
            "MNL assortment must have 1..=K items"
        );
        super::assert_distinct(slate, self.n_items());
    }

    /// Choice probabilities for each offered item, followed by the
    /// no-purchase probability.
    pub fn choice_probabilities(&self, slate: &[usize]) -> Vec<f64> {
        let total: f64 = slate.iter().map(|&i| self.attractiveness[i]).sum();
        let norm = 1.0 + total;
        let mut p: Vec<f64> = slate.iter().map(|&i| self.attractiveness[i] / norm).collect();
        p.push(1.0 / norm);
        p
    }

    /// The purchased item, or `None` for no purchase.
    pub fn pull<R: Rng + ?Sized>(&self, slate: &[usize], rng: &mut R) -> Option<usize> {
        self.check_slate(slate);
        let total: f64 = slate.iter().map(|&i| self.attractiveness[i]).sum();
        let mut u = rng.random::<f64>() * (1.0 + total);
        for &item in slate {
            u -= self.attractiveness[item];
            if u < 0.0 {
                return Some(item);
            }
        }
        None
    }

    pub fn expected_value(&self, slate: &[usize]) -> f64 {
        assortment_revenue(&self.attractiveness, &self.revenues, slate)
    }

    /// Best assortment by exhaustive search over all subsets of size `1..=K`.
    pub fn optimal_slate(&self) -> Vec<usize> {
        exhaustive_assortment(&self.attractiveness, &self.revenues, self.slate_size)
    }

    pub fn optimal_value(&self) -> f64 {
        self.expected_value(&self.optimal_slate())
    }
}

/// Expected revenue `Σ v_i r_i / (1 + Σ v_j)` of offering `slate`.
pub fn assortment_revenue(v: &[f64], r: &[f64], slate: &[usize]) -> f64 {
    let (num, den) = slate
        .iter()
        .fold((0.0, 1.0), |(n, d), &i| (n + v[i] * r[i], d + v[i]));
    num / den
}

/// Exhaustive search over every nonempty subset of at most `k` items.
/// `C(30,1) + … + C(30,4) = 31,930` subsets at the default size.
pub fn exhaustive_assortment(v: &[f64], r: &[f64], k: usize) -> Vec<usize> {
    fn recurse(
        v: &[f64],
        r: &[f64],
        k: usize,
        start: usize,
        current: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) {
        if !current.is_empty() {
            let value = assortment_revenue(v, r, current);
            if value > best.0 {
                *best = (value, current.clone());
            }
        }
        if current.len() == k {
            return;
        }
        for i in start..v.len() {
            current.push(i);
            recurse(v, r, k, i + 1, current, best);
            current.pop();
        }
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    recurse(v, r, k, 0, &mut Vec::with_capacity(k), &mut best);
    best.1
}

/// Best assortment of at most `k` items for nonnegative `v`, found by
/// bisection on the optimal revenue `z`: an assortment reaching `z` exists
/// iff the top-`k` sum of `v_i (r_i - z)⁺` is at least `z`.
///
/// Runs in `O(L log L)` per bisection step, which is what policies use when
/// re-optimizing every epoch. Agrees with [`exhaustive_assortment`] in value.
pub fn parametric_assortment(v: &[f64], r: &[f64], k: usize) -> Vec<usize> {
    let n = v.len();
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut pick = |z: f64, out: &mut Vec<usize>| -> f64 {
        scratch.clear();
        scratch.extend(
            (0..n)
                .map(|i| (v[i] * (r[i] - z), i))
                .filter(|(gain, _)| *gain > 0.0),
        );
        scratch.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        scratch.truncate(k);
        out.clear();
        out.extend(scratch.iter().map(|&(_, i)| i));
        scratch.iter().map(|&(g, _)| g).sum::<f64>() - z
    };
    let mut lo = 0.0;
    let mut hi = r.iter().copied().fold(0.0, f64::max);
    let mut set = Vec::with_capacity(k);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pick(mid, &mut set) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    pick(lo, &mut set);
    if set.is_empty() {
        // Every gain is zero: any single item is optimal.
        let best = (0..n)
            .max_by(|&a, &b| (v[a] * r[a]).total_cmp(&(v[b] * r[b])).then(b.cmp(&a)))
            .unwrap_or(0);
        set.push(best);
    }
    set
}
