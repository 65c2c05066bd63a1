use rand::Rng;

use crate::error::{Error, Result};

use super::policy::Transition;

/// Probability of each rank (1-based) under `P(i) ∝ i^-alpha`.
pub fn rank_probabilities(n: usize, alpha: f64) -> Vec<f64> {
    let w: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-alpha)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Unbounded buffer sampled by rank of `|td_error|`.
#[derive(Debug, Clone, Default)]
pub struct ReplayBuffer {
    items: Vec<Transition>,
    alpha: f64,
    /// Cumulative rank weights for ranks `1..=len`.
    cumulative: Vec<f64>,
}

impl ReplayBuffer {
    pub fn new(alpha: f64) -> Self {
        Self {
            items: Vec::new(),
            alpha,
            cumulative: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        let rank = self.items.len() + 1;
        let prev = self.cumulative.last().copied().unwrap_or(0.0);
        self.cumulative.push(prev + (rank as f64).powf(-self.alpha));
        self.items.push(t);
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    pub fn update_td_error(&mut self, i: usize, td: f64) {
        if let Some(t) = self.items.get_mut(i) {
            t.td_error = td;
        }
    }

    /// Indices ordered by descending `|td_error|`; ties keep insertion order.
    pub fn ranked(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.items.len()).collect();
        order.sort_by(|&a, &b| self.items[b].td_error.abs().total_cmp(&self.items[a].td_error.abs()));
        order
    }

    /// Draws a rank with probability `∝ rank^-alpha`.
    pub fn sample_rank<R: Rng>(&self, rng: &mut R) -> Result<usize> {
        let total = *self.cumulative.last().ok_or(Error::EmptyBuffer)?;
        let u = rng.gen::<f64>() * total;
        Ok(self.cumulative.partition_point(|&c| c <= u).min(self.items.len() - 1))
    }

    /// Index of a transition drawn by priority rank.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<usize> {
        let rank = self.sample_rank(rng)?;
        Ok(self.ranked()[rank])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_buffer_errors() {
        let b = ReplayBuffer::new(1.0);
        assert!(matches!(
            b.sample(&mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::EmptyBuffer)
        ));
    }

    #[test]
    fn harmonic_normalisation() {
        let p = rank_probabilities(100, 1.0);
        let h100: f64 = (1..=100).map(|i| 1.0 / i as f64).sum();
        assert!((p[0] - 1.0 / h100).abs() < 1e-15);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let flat = rank_probabilities(10, 0.0);
        assert!(flat.iter().all(|&x| (x - 0.1).abs() < 1e-15));
    }
}
