//! Zipf-ranked sampling over a fixed random ranking of items.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct ZipfSampler {
    alpha: f64,
    /// `ranked[i]` is the item at rank `i + 1`.
    ranked: Vec<usize>,
    dist: WeightedIndex<f64>,
}

/// Probability of rank `i` (1-based) among `count` ranks.
pub fn rank_probability(count: usize, alpha: f64, i: usize) -> f64 {
    let norm: f64 = (1..=count).map(|j| (j as f64).powf(-alpha)).sum();
    (i as f64).powf(-alpha) / norm
}

/// Share of the probability mass held by the first `top` ranks.
pub fn top_share(count: usize, alpha: f64, top: usize) -> f64 {
    (1..=top).map(|i| rank_probability(count, alpha, i)).sum()
}

impl ZipfSampler {
    /// Ranks items `0..count` in a random order drawn from `rng`.
    /// Panics if `count` is zero or `alpha` is not positive.
    pub fn new<R: Rng>(count: usize, alpha: f64, rng: &mut R) -> Self {
        let mut ranked: Vec<usize> = (0..count).collect();
        ranked.shuffle(rng);
        Self::with_ranking(ranked, alpha)
    }

    pub fn with_ranking(ranked: Vec<usize>, alpha: f64) -> Self {
        assert!(!ranked.is_empty(), "cannot sample from zero items");
        assert!(alpha > 0.0, "alpha must be positive");
        let weights = (1..=ranked.len()).map(|i| (i as f64).powf(-alpha));
        let dist = WeightedIndex::new(weights).expect("positive weights");
        ZipfSampler { alpha, ranked, dist }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn ranking(&self) -> &[usize] {
        &self.ranked
    }

    /// A 0-based rank.
    pub fn sample_rank<R: Rng>(&self, rng: &mut R) -> usize {
        self.dist.sample(rng)
    }

    /// The item at a sampled rank.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        self.ranked[self.sample_rank(rng)]
    }
}
