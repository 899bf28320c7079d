//! Proportional prioritized replay over a fixed-capacity ring buffer.

use rand::Rng;

use super::Experience;
use crate::error::{Error, Result};

/// Binary sum tree over `p_i^alpha`. Parents are recomputed from their
/// children on every write, so totals never drift.
#[derive(Debug, Clone)]
struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    fn new(capacity: usize) -> Self {
        let leaves = capacity.next_power_of_two();
        SumTree {
            leaves,
            nodes: vec![0.0; 2 * leaves],
        }
    }

    fn total(&self) -> f64 {
        self.nodes[1]
    }

    fn get(&self, i: usize) -> f64 {
        self.nodes[self.leaves + i]
    }

    fn set(&mut self, i: usize, value: f64) {
        let mut node = self.leaves + i;
        self.nodes[node] = value;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Leaf whose cumulative range contains `mass` (in `[0, total)`).
    fn find(&self, mut mass: f64) -> usize {
        let mut node = 1;
        while node < self.leaves {
            let left = 2 * node;
            if mass < self.nodes[left] || self.nodes[left + 1] == 0.0 {
                node = left;
            } else {
                mass -= self.nodes[left];
                node = left + 1;
            }
        }
        node - self.leaves
    }
}

/// Ring buffer of experiences with one positive priority each.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    alpha: f64,
    data: Vec<Experience>,
    priorities: Vec<f64>,
    tree: SumTree,
    cursor: usize,
    max_priority: f64,
}

impl ReplayMemory {
    pub fn new(capacity: usize, alpha: f64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidDqn("replay capacity must be positive".into()));
        }
        if !(alpha >= 0.0) {
            return Err(Error::InvalidDqn(
                "priority exponent must be non-negative".into(),
            ));
        }
        Ok(ReplayMemory {
            capacity,
            alpha,
            data: Vec::with_capacity(capacity),
            priorities: Vec::with_capacity(capacity),
            tree: SumTree::new(capacity),
            cursor: 0,
            max_priority: 1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, i: usize) -> &Experience {
        &self.data[i]
    }

    pub fn priority(&self, i: usize) -> f64 {
        self.priorities[i]
    }

    pub fn priorities(&self) -> &[f64] {
        &self.priorities
    }

    /// Stores `exp` at the current maximum priority, overwriting the oldest
    /// entry once full.
    pub fn push(&mut self, exp: Experience) {
        let p = self.max_priority;
        if self.data.len() < self.capacity {
            self.data.push(exp);
            self.priorities.push(p);
        } else {
            self.data[self.cursor] = exp;
            self.priorities[self.cursor] = p;
        }
        self.tree.set(self.cursor, p.powf(self.alpha));
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Sampling probability `p_i^alpha / sum_k p_k^alpha`.
    pub fn probability(&self, i: usize) -> f64 {
        self.tree.get(i) / self.tree.total()
    }

    /// Draws `n` indices independently, proportionally to `p^alpha`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.data.is_empty() {
            return Err(Error::InsufficientMemory { size: 0, needed: n });
        }
        let total = self.tree.total();
        let last = self.data.len() - 1;
        Ok((0..n)
            .map(|_| {
                let mass = rng.gen::<f64>() * total;
                self.tree.find(mass).min(last)
            })
            .collect())
    }

    /// Importance weights `(size * P(i))^-beta`, normalized by the batch maximum.
    pub fn importance_weights(&self, indices: &[usize], beta: f64) -> Vec<f64> {
        let size = self.data.len() as f64;
        let raw: Vec<f64> = indices
            .iter()
            .map(|&i| (size * self.probability(i)).powf(-beta))
            .collect();
        let max = raw.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
        raw.into_iter().map(|w| w / max).collect()
    }

    /// Sets a new priority for entry `i`. Non-positive values are rejected.
    pub fn set_priority(&mut self, i: usize, priority: f64) -> Result<()> {
        if !(priority > 0.0) || !priority.is_finite() {
            return Err(Error::InvalidDqn(format!(
                "priority {priority} must be positive"
            )));
        }
        self.priorities[i] = priority;
        self.max_priority = self.max_priority.max(priority);
        self.tree.set(i, priority.powf(self.alpha));
        Ok(())
    }
}
