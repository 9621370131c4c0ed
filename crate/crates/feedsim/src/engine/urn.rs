//! Weighted urn for picking which agent acts next.
//!
//! Phase one draws without replacement (each agent posts at most once);
//! phase two draws with replacement. Both weight agents by activity
//! rate, so a rate-16 agent comes up sixteen times as often as a rate-1
//! agent while both remain in the urn.

use crate::seed::SimRng;
use crate::AgentId;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Urn {
    entries: Vec<(AgentId, f64)>,
    total: f64,
}

impl Urn {
    /// Build from per-agent weights; non-positive weights are excluded.
    pub fn new(weights: &[(AgentId, f64)]) -> Urn {
        let entries: Vec<(AgentId, f64)> =
            weights.iter().copied().filter(|&(_, w)| w > 0.0).collect();
        let total = entries.iter().map(|&(_, w)| w).sum();
        Urn { entries, total }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    fn index_for(&self, roll: f64) -> usize {
        let mut acc = 0.0;
        for (idx, &(_, w)) in self.entries.iter().enumerate() {
            acc += w;
            if roll < acc {
                return idx;
            }
        }
        self.entries.len() - 1
    }

    /// Draw with replacement.
    pub fn pick(&self, rng: &mut SimRng) -> Option<AgentId> {
        if self.entries.is_empty() {
            return None;
        }
        let roll = rng.random::<f64>() * self.total;
        Some(self.entries[self.index_for(roll)].0)
    }

    /// Draw without replacement.
    pub fn draw(&mut self, rng: &mut SimRng) -> Option<AgentId> {
        if self.entries.is_empty() {
            return None;
        }
        let roll = rng.random::<f64>() * self.total;
        let idx = self.index_for(roll);
        let (agent, _) = self.entries.swap_remove(idx);
        self.total = self.entries.iter().map(|&(_, w)| w).sum();
        Some(agent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;

    #[test]
    fn empty_urn_yields_nothing() {
        let mut urn = Urn::new(&[]);
        let mut rng = rng_for(1, "urn-test");
        assert!(urn.pick(&mut rng).is_none());
        assert!(urn.draw(&mut rng).is_none());
        let mut zeros = Urn::new(&[(0, 0.0), (1, -1.0)]);
        assert!(zeros.is_empty());
        assert!(zeros.draw(&mut rng).is_none());
    }

    #[test]
    fn draw_without_replacement_exhausts_everyone_once() {
        let weights: Vec<(AgentId, f64)> = (0..20).map(|i| (i, 1.0 + i as f64)).collect();
        let mut urn = Urn::new(&weights);
        let mut rng = rng_for(7, "urn-test");
        let mut seen = Vec::new();
        while let Some(agent) = urn.draw(&mut rng) {
            seen.push(agent);
        }
        seen.sort_unstable();
        assert_eq!(seen, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn pick_frequency_tracks_weights() {
        // Weights (2, 1, 1): agent 0 should win about half the picks.
        let urn = Urn::new(&[(0, 2.0), (1, 1.0), (2, 1.0)]);
        let mut rng = rng_for(11, "urn-test");
        let n = 40_000;
        let mut hits = [0u32; 3];
        for _ in 0..n {
            hits[urn.pick(&mut rng).unwrap()] += 1;
        }
        let share = hits[0] as f64 / n as f64;
        assert!((share - 0.5).abs() < 0.01, "agent 0 share {share}");
        assert!(hits[1] > 0 && hits[2] > 0);
    }

    #[test]
    fn draws_are_reproducible() {
        let weights: Vec<(AgentId, f64)> = (0..50).map(|i| (i, ((i % 5) + 1) as f64)).collect();
        let run = |seed| {
            let mut urn = Urn::new(&weights);
            let mut rng = rng_for(seed, "urn-test");
            let mut order = Vec::new();
            while let Some(agent) = urn.draw(&mut rng) {
                order.push(agent);
            }
            order
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }
}
