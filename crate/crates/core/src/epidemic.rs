//! Discrete-time stochastic SIR worm propagation, well mixed inside each
//! community. The worm never crosses community borders.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::CommunityId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpidemicError {
    #[error("community {community}: cannot infect {requested} of {available} susceptible UEs")]
    InsufficientSusceptibles {
        community: CommunityId,
        requested: usize,
        available: usize,
    },
    #[error("rate {name}={value} outside [0, 1]")]
    InvalidRate { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Compartment {
    Susceptible,
    Infected,
    Recovered,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SirCounts {
    pub s: usize,
    pub i: usize,
    pub r: usize,
}

impl SirCounts {
    pub fn total(&self) -> usize {
        self.s + self.i + self.r
    }
}

/// Per-susceptible infection probability for one step when `infected` of
/// `population` UEs are infectious: `1 - (1 - beta/N)^I`.
pub fn infection_probability(beta: f64, population: usize, infected: usize) -> f64 {
    if infected == 0 || population == 0 {
        return 0.0;
    }
    let escape = 1.0 - beta / population as f64;
    1.0 - escape.powi(infected as i32)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityEpidemic {
    pub community_id: CommunityId,
    states: Vec<Compartment>,
    counts: SirCounts,
}

impl CommunityEpidemic {
    pub fn states(&self) -> &[Compartment] {
        &self.states
    }

    pub fn counts(&self) -> SirCounts {
        self.counts
    }

    pub fn population(&self) -> usize {
        self.states.len()
    }

    pub fn infected(&self) -> impl Iterator<Item = usize> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Compartment::Infected)
            .map(|(i, _)| i)
    }
}

/// A UE moving between compartments, addressed by community slot and
/// resident index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub slot: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepReport {
    pub infected: Vec<Transition>,
    pub recovered: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicState {
    communities: Vec<CommunityEpidemic>,
    beta: f64,
    gamma: f64,
}

impl EpidemicState {
    /// Everyone starts susceptible. Communities keep the order given.
    pub fn new(
        populations: &[(CommunityId, usize)],
        beta: f64,
        gamma: f64,
    ) -> Result<Self, EpidemicError> {
        for (name, value) in [("beta", beta), ("gamma", gamma)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(EpidemicError::InvalidRate { name, value });
            }
        }
        let communities = populations
            .iter()
            .map(|&(community_id, n)| CommunityEpidemic {
                community_id,
                states: vec![Compartment::Susceptible; n],
                counts: SirCounts { s: n, i: 0, r: 0 },
            })
            .collect();
        Ok(Self {
            communities,
            beta,
            gamma,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn communities(&self) -> &[CommunityEpidemic] {
        &self.communities
    }

    pub fn community(&self, slot: usize) -> &CommunityEpidemic {
        &self.communities[slot]
    }

    pub fn compartment(&self, slot: usize, index: usize) -> Compartment {
        self.communities[slot].states[index]
    }

    /// Moves exactly `count` uniformly chosen susceptibles to infected in
    /// every community. Nothing changes unless every community can comply.
    pub fn seed_infection<R: Rng + ?Sized>(
        &mut self,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<Transition>, EpidemicError> {
        for c in &self.communities {
            if c.counts.s < count {
                return Err(EpidemicError::InsufficientSusceptibles {
                    community: c.community_id,
                    requested: count,
                    available: c.counts.s,
                });
            }
        }
        let mut seeded = Vec::with_capacity(count * self.communities.len());
        for (slot, c) in self.communities.iter_mut().enumerate() {
            let susceptible: Vec<usize> = c
                .states
                .iter()
                .enumerate()
                .filter(|(_, s)| **s == Compartment::Susceptible)
                .map(|(i, _)| i)
                .collect();
            let mut picked: Vec<usize> = index::sample(rng, susceptible.len(), count)
                .into_iter()
                .map(|k| susceptible[k])
                .collect();
            picked.sort_unstable();
            for index in picked {
                c.states[index] = Compartment::Infected;
                seeded.push(Transition { slot, index });
            }
            c.counts.s -= count;
            c.counts.i += count;
        }
        Ok(seeded)
    }

    /// Advances one second. Probabilities use the infected counts from
    /// before the step; UEs are visited in index order with one uniform
    /// draw per susceptible or infected UE.
    pub fn step_sir<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepReport {
        let mut report = StepReport::default();
        for (slot, c) in self.communities.iter_mut().enumerate() {
            if c.counts.i == 0 {
                continue;
            }
            let p_infect = infection_probability(self.beta, c.states.len(), c.counts.i);
            for (index, state) in c.states.iter_mut().enumerate() {
                match *state {
                    Compartment::Susceptible => {
                        if rng.gen::<f64>() < p_infect {
                            *state = Compartment::Infected;
                            report.infected.push(Transition { slot, index });
                        }
                    }
                    Compartment::Infected => {
                        if rng.gen::<f64>() < self.gamma {
                            *state = Compartment::Recovered;
                            report.recovered.push(Transition { slot, index });
                        }
                    }
                    Compartment::Recovered => {}
                }
            }
        }
        for t in &report.infected {
            let c = &mut self.communities[t.slot].counts;
            c.s -= 1;
            c.i += 1;
        }
        for t in &report.recovered {
            let c = &mut self.communities[t.slot].counts;
            c.i -= 1;
            c.r += 1;
        }
        debug_assert!(self
            .communities
            .iter()
            .all(|c| c.counts.total() == c.states.len()));
        report
    }

    pub fn is_extinct(&self) -> bool {
        self.communities.iter().all(|c| c.counts.i == 0)
    }

    pub fn total_infected(&self) -> usize {
        self.communities.iter().map(|c| c.counts.i).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(n: usize) -> EpidemicState {
        EpidemicState::new(&[(1, n)], 0.2, 0.2).unwrap()
    }

    #[test]
    fn seeds_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut st = single(1000);
        let seeded = st.seed_infection(100, &mut rng).unwrap();
        assert_eq!(seeded.len(), 100);
        assert_eq!(st.community(0).counts(), SirCounts { s: 900, i: 100, r: 0 });
        assert_eq!(st.community(0).infected().count(), 100);
        assert!(!st.is_extinct());
    }

    #[test]
    fn seeding_zero_is_a_no_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut st = single(1000);
        let before = st.clone();
        assert!(st.seed_infection(0, &mut rng).unwrap().is_empty());
        assert_eq!(st, before);
        assert!(st.is_extinct());
    }

    #[test]
    fn over_seeding_fails_without_side_effects() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut st = EpidemicState::new(&[(1, 2000), (2, 1000)], 0.2, 0.2).unwrap();
        let before = st.clone();
        assert_eq!(
            st.seed_infection(1001, &mut rng),
            Err(EpidemicError::InsufficientSusceptibles {
                community: 2,
                requested: 1001,
                available: 1000
            })
        );
        assert_eq!(st, before);
    }

    #[test]
    fn absorbing_when_no_infected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut st = single(50);
        let before = st.clone();
        let report = st.step_sir(&mut rng);
        assert_eq!(report, StepReport::default());
        assert_eq!(st, before);
    }

    #[test]
    fn gamma_one_clears_in_one_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut st = EpidemicState::new(&[(1, 1000), (2, 1000)], 0.2, 1.0).unwrap();
        st.seed_infection(100, &mut rng).unwrap();
        let report = st.step_sir(&mut rng);
        assert_eq!(report.recovered.len(), 200);
        // New infections from this step are infectious only from the next.
        let newly = report.infected.len();
        assert_eq!(st.total_infected(), newly);
        if newly == 0 {
            assert!(st.is_extinct());
        }
    }

    #[test]
    fn gamma_one_beta_zero_goes_extinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut st = EpidemicState::new(&[(1, 1000)], 0.0, 1.0).unwrap();
        st.seed_infection(100, &mut rng).unwrap();
        st.step_sir(&mut rng);
        assert!(st.is_extinct());
        assert_eq!(st.community(0).counts(), SirCounts { s: 900, i: 0, r: 100 });
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(EpidemicState::new(&[(1, 10)], 1.5, 0.2).is_err());
        assert!(EpidemicState::new(&[(1, 10)], 0.2, -0.1).is_err());
    }

    #[test]
    fn infection_probability_matches_closed_form() {
        let p = infection_probability(0.2, 1000, 100);
        let expected = 1.0 - (1.0f64 - 0.0002).powf(100.0);
        assert!((p - expected).abs() < 1e-15);
        assert_eq!(infection_probability(0.2, 1000, 0), 0.0);
    }

    #[test]
    fn invariants_hold_along_trajectories() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut st = EpidemicState::new(&[(1, 300), (2, 200)], 0.2, 0.2).unwrap();
            st.seed_infection(30, &mut rng).unwrap();
            let mut prev_r = [0; 2];
            let mut steps = 0;
            while !st.is_extinct() {
                st.step_sir(&mut rng);
                for (k, c) in st.communities().iter().enumerate() {
                    let n = c.counts();
                    assert_eq!(n.total(), c.population());
                    assert!(n.r >= prev_r[k]);
                    prev_r[k] = n.r;
                }
                steps += 1;
                assert!(steps < 10_000);
            }
            let frozen = st.clone();
            st.step_sir(&mut rng);
            assert_eq!(st, frozen);
        }
    }
}
