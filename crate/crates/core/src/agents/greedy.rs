/// Per-action reward sums and pull counts.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStats {
    sums: Vec<f64>,
    counts: Vec<u64>,
}

impl GreedyStats {
    pub fn new(n_actions: usize) -> Self {
        GreedyStats {
            sums: vec![0.0; n_actions],
            counts: vec![0; n_actions],
        }
    }

    pub fn record(&mut self, action: usize, reward: f64) {
        self.sums[action] += reward;
        self.counts[action] += 1;
    }

    pub fn count(&self, action: usize) -> u64 {
        self.counts[action]
    }

    /// Average reward of `action`, or `None` if it was never tried.
    pub fn mean(&self, action: usize) -> Option<f64> {
        match self.counts[action] {
            0 => None,
            n => Some(self.sums[action] / n as f64),
        }
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }
}

/// Lowest-indexed untried action if any, otherwise the best running mean
/// (ties to the lowest index).
pub fn act_greedy(stats: &GreedyStats) -> usize {
    if let Some(untried) = stats.counts.iter().position(|&c| c == 0) {
        return untried;
    }
    let mut best = 0;
    for a in 1..stats.len() {
        if stats.sums[a] / stats.counts[a] as f64 > stats.sums[best] / stats.counts[best] as f64 {
            best = a;
        }
    }
    best
}
