use rand::Rng;

use crate::error::{usage_err, Result};
use crate::nn::{Matrix, NetRng};

/// One stored step. `action` is the network-side action, before it was
/// composed with the prior.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: [f64; 2],
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// Goal or collision; timeouts stay `false` so they bootstrap.
    pub done: bool,
}

/// Fixed-capacity FIFO of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay buffer capacity must be positive");
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Append, overwriting the oldest entry once full.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Contents from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.items.len() < self.capacity { 0 } else { self.cursor };
        self.items[split..].iter().chain(&self.items[..split])
    }

    /// Uniform sample with replacement.
    pub fn sample(&self, batch_size: usize, rng: &mut NetRng) -> Result<Batch> {
        if self.items.is_empty() {
            return Err(usage_err("cannot sample from an empty replay buffer"));
        }
        let picks: Vec<&Transition> = (0..batch_size)
            .map(|_| &self.items[rng.random_range(0..self.items.len())])
            .collect();
        Batch::from_transitions(&picks)
    }
}

/// Transitions stacked row-wise.
#[derive(Debug, Clone)]
pub struct Batch {
    pub states: Matrix,
    pub actions: Matrix,
    pub rewards: Vec<f64>,
    pub next_states: Matrix,
    pub dones: Vec<bool>,
}

impl Batch {
    pub fn from_transitions(ts: &[&Transition]) -> Result<Self> {
        let first = ts.first().ok_or_else(|| usage_err("empty batch"))?;
        let dim = first.state.len();
        if ts.iter().any(|t| t.state.len() != dim || t.next_state.len() != dim) {
            return Err(usage_err("transitions in a batch have different state sizes"));
        }
        let n = ts.len();
        let stack = |f: &dyn Fn(&Transition) -> &[f64], cols: usize| {
            let mut data = Vec::with_capacity(n * cols);
            ts.iter().for_each(|t| data.extend_from_slice(f(t)));
            Matrix::from_vec(n, cols, data)
        };
        Ok(Self {
            states: stack(&|t| &t.state, dim)?,
            actions: stack(&|t| &t.action, 2)?,
            rewards: ts.iter().map(|t| t.reward).collect(),
            next_states: stack(&|t| &t.next_state, dim)?,
            dones: ts.iter().map(|t| t.done).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn t(tag: f64) -> Transition {
        Transition {
            state: vec![tag],
            action: [0.0, 0.0],
            reward: 0.0,
            next_state: vec![tag + 1.0],
            done: false,
        }
    }

    #[test]
    fn wraparound_overwrites_oldest_first() {
        let mut b = ReplayBuffer::new(3);
        for i in 0..5 {
            b.push(t(i as f64));
            assert!(b.len() <= 3);
        }
        let order: Vec<f64> = b.iter().map(|x| x.state[0]).collect();
        assert_eq!(order, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn empty_buffer_refuses_to_sample() {
        let b = ReplayBuffer::new(4);
        assert!(b.sample(2, &mut NetRng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn sampling_is_roughly_uniform() {
        let mut b = ReplayBuffer::new(4);
        (0..4).for_each(|i| b.push(t(i as f64)));
        let mut counts = [0usize; 4];
        let batch = b.sample(40_000, &mut NetRng::seed_from_u64(1)).unwrap();
        for r in 0..batch.len() {
            counts[batch.states.row(r)[0] as usize] += 1;
        }
        // 3 binomial standard deviations around 10000
        assert!(counts.iter().all(|&c| (c as f64 - 10_000.0).abs() < 3.0 * 86.6), "{counts:?}");
    }
}
