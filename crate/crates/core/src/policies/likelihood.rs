//! Log-likelihood bookkeeping and the decision rules of the likelihood-ratio policies.

use rand::Rng;

use super::knowledge::PolicyKnowledge;
use super::PolicyError;

/// Cumulative log-likelihoods `Λ_i = Σ_j log f_i(y_j)` for every model.
///
/// Sums are kept rather than averages: every decision depends only on the
/// signs of differences or on which entry is largest, and the averaged
/// statistic `L_{i,h}(t) = (Λ_i − Λ_h) / t` is recovered on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodState {
    cum_loglik: Vec<f64>,
    t: usize,
    last_price: Option<f64>,
}

impl LikelihoodState {
    pub fn new(n_models: usize) -> Self {
        LikelihoodState {
            cum_loglik: vec![0.0; n_models],
            t: 0,
            last_price: None,
        }
    }

    /// A state with given sums after `t` observations.
    pub fn from_parts(cum_loglik: Vec<f64>, t: usize) -> Self {
        LikelihoodState {
            cum_loglik,
            t,
            last_price: None,
        }
    }

    pub fn cum_loglik(&self) -> &[f64] {
        &self.cum_loglik
    }

    pub fn steps(&self) -> usize {
        self.t
    }

    pub fn last_price(&self) -> Option<f64> {
        self.last_price
    }

    /// `L_{i,h}(t)`; zero before any observation.
    pub fn pair_statistic(&self, i: usize, h: usize) -> f64 {
        if self.t == 0 {
            0.0
        } else {
            (self.cum_loglik[i] - self.cum_loglik[h]) / self.t as f64
        }
    }

    /// Add `log f_i(outcome)` at `price` to every `Λ_i`.
    pub fn observe(
        &mut self,
        knowledge: &PolicyKnowledge,
        price: f64,
        outcome: bool,
    ) -> Result<(), PolicyError> {
        let n = self.cum_loglik.len();
        let mut increments = Vec::with_capacity(n);
        for i in 0..n {
            let rho = knowledge.prob(i, price).ok_or(PolicyError::UnknownPrice(price))?;
            increments.push(if outcome { rho.ln() } else { (1.0 - rho).ln() });
        }
        for (acc, inc) in self.cum_loglik.iter_mut().zip(increments) {
            *acc += inc;
        }
        self.t += 1;
        self.last_price = Some(price);
        Ok(())
    }

    /// Index of the largest `Λ_i`; exact ties drawn uniformly.
    pub(crate) fn leader<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        argmax_uniform_ties(&self.cum_loglik, None, rng)
    }

    /// The two largest `Λ`, leader first. Needs at least two models.
    pub(crate) fn top_two<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let d1 = argmax_uniform_ties(&self.cum_loglik, None, rng);
        let d2 = argmax_uniform_ties(&self.cum_loglik, Some(d1), rng);
        (d1, d2)
    }
}

fn argmax_uniform_ties<R: Rng + ?Sized>(values: &[f64], skip: Option<usize>, rng: &mut R) -> usize {
    let max = values
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(i, v)| Some(*i) != skip && **v == max)
        .map(|(i, _)| i)
        .collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    }
}

/// Uniform arm for the very first step.
pub(crate) fn uniform_arm<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    rng.random_range(0..n)
}

/// LRT (two models): arm 1 if `Λ_1 > Λ_0`, arm 0 if below, fair coin on a tie.
pub(crate) fn lrt_arm<R: Rng + ?Sized>(state: &LikelihoodState, rng: &mut R) -> usize {
    if state.t == 0 {
        return uniform_arm(2, rng);
    }
    let diff = state.cum_loglik[1] - state.cum_loglik[0];
    if diff > 0.0 {
        1
    } else if diff < 0.0 {
        0
    } else {
        usize::from(rng.random_bool(0.5))
    }
}

/// Outcome of an exploring decision rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Choice {
    Arm(usize),
    /// Explore between the given pair of models.
    Explore(usize, usize),
}

/// XLRT: arm 0 below `−η_0`, arm 1 above `η_1`, explore inside the closed band.
pub(crate) fn xlrt_choice<R: Rng + ?Sized>(
    state: &LikelihoodState,
    eta0: f64,
    eta1: f64,
    rng: &mut R,
) -> Choice {
    if state.t == 0 {
        return Choice::Arm(uniform_arm(2, rng));
    }
    let l = state.pair_statistic(1, 0);
    if l < -eta0 {
        Choice::Arm(0)
    } else if l > eta1 {
        Choice::Arm(1)
    } else {
        Choice::Explore(0, 1)
    }
}

/// ELRT: the arm of the model with the largest likelihood.
pub(crate) fn elrt_arm<R: Rng + ?Sized>(state: &LikelihoodState, rng: &mut R) -> usize {
    if state.t == 0 {
        return uniform_arm(state.cum_loglik.len(), rng);
    }
    state.leader(rng)
}

/// EXLRT: leader's arm once it beats the runner-up by more than `η_{d1,d2}`,
/// otherwise the exploration price of that pair.
pub(crate) fn exlrt_choice<R: Rng + ?Sized>(
    state: &LikelihoodState,
    eta_pair: &[Vec<f64>],
    rng: &mut R,
) -> Choice {
    if state.t == 0 {
        return Choice::Arm(uniform_arm(state.cum_loglik.len(), rng));
    }
    let (d1, d2) = state.top_two(rng);
    if state.pair_statistic(d1, d2) > eta_pair[d1][d2] {
        Choice::Arm(d1)
    } else {
        Choice::Explore(d1, d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn lrt_follows_sign() {
        let s = LikelihoodState::from_parts(vec![-0.2, 0.3], 1);
        assert_eq!(lrt_arm(&s, &mut rng()), 1);
        let s = LikelihoodState::from_parts(vec![0.3, -0.2], 1);
        assert_eq!(lrt_arm(&s, &mut rng()), 0);
    }

    #[test]
    fn lrt_tie_uses_both_arms() {
        let s = LikelihoodState::from_parts(vec![0.5, 0.5], 3);
        let mut r = rng();
        let ones = (0..1000).filter(|_| lrt_arm(&s, &mut r) == 1).count();
        assert!((400..600).contains(&ones), "{ones}");
    }

    #[test]
    fn xlrt_band() {
        // L = 0.01 after one step sits inside [−0.02, 0.02].
        let s = LikelihoodState::from_parts(vec![0.0, 0.01], 1);
        assert_eq!(xlrt_choice(&s, 0.02, 0.02, &mut rng()), Choice::Explore(0, 1));
        let s = LikelihoodState::from_parts(vec![0.0, 0.06], 2);
        assert_eq!(xlrt_choice(&s, 0.02, 0.02, &mut rng()), Choice::Arm(1));
        let s = LikelihoodState::from_parts(vec![0.0, -0.06], 2);
        assert_eq!(xlrt_choice(&s, 0.02, 0.02, &mut rng()), Choice::Arm(0));
        // Band edges belong to the band.
        let s = LikelihoodState::from_parts(vec![0.0, 0.5], 2);
        assert_eq!(xlrt_choice(&s, 0.25, 0.25, &mut rng()), Choice::Explore(0, 1));
        let s = LikelihoodState::from_parts(vec![0.5, 0.0], 2);
        assert_eq!(xlrt_choice(&s, 0.25, 0.25, &mut rng()), Choice::Explore(0, 1));
    }

    #[test]
    fn xlrt_with_zero_band_matches_lrt_off_tie() {
        for (l0, l1) in [(0.1, 0.3), (0.3, 0.1), (-2.0, -1.0)] {
            let s = LikelihoodState::from_parts(vec![l0, l1], 4);
            let arm = lrt_arm(&s, &mut rng());
            assert_eq!(xlrt_choice(&s, 0.0, 0.0, &mut rng()), Choice::Arm(arm));
        }
    }

    #[test]
    fn elrt_ties_split_between_leaders() {
        let s = LikelihoodState::from_parts(vec![1.0, 2.5, 2.5, 0.0], 5);
        let mut r = rng();
        let mut counts = [0usize; 4];
        for _ in 0..2000 {
            counts[elrt_arm(&s, &mut r)] += 1;
        }
        assert_eq!(counts[0] + counts[3], 0);
        assert!(counts[1] > 800 && counts[2] > 800, "{counts:?}");
    }

    #[test]
    fn first_step_is_uniform() {
        let s = LikelihoodState::new(3);
        let mut r = rng();
        let mut counts = [0usize; 3];
        for _ in 0..3000 {
            counts[elrt_arm(&s, &mut r)] += 1;
        }
        assert!(counts.iter().all(|&c| c > 850), "{counts:?}");
    }

    #[test]
    fn exlrt_second_is_runner_up() {
        let s = LikelihoodState::from_parts(vec![3.0, 1.0, 2.0], 10);
        let (d1, d2) = s.top_two(&mut rng());
        assert_eq!((d1, d2), (0, 2));
        let eta = vec![vec![0.0, 0.05, 0.05]; 3];
        // L_{0,2} = 0.1 > 0.05
        assert_eq!(exlrt_choice(&s, &eta, &mut rng()), Choice::Arm(0));
        let eta = vec![vec![0.0, 0.2, 0.2]; 3];
        assert_eq!(exlrt_choice(&s, &eta, &mut rng()), Choice::Explore(0, 2));
    }

    /// Sums on a 1/1024 lattice so shifting by an integer is exact.
    fn lattice_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((-4096i32..4096).prop_map(|k| k as f64 / 1024.0), n)
    }

    proptest! {
        #[test]
        fn elrt_leader_beats_all_pairs(ls in lattice_vec(5)) {
            let s = LikelihoodState::from_parts(ls.clone(), 10);
            let max = ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let strict = ls.iter().filter(|&&v| v == max).count() == 1;
            prop_assume!(strict);
            let k = elrt_arm(&s, &mut rng());
            for j in 0..ls.len() {
                if j != k {
                    prop_assert!(s.pair_statistic(k, j) > 0.0);
                }
            }
        }

        #[test]
        fn decisions_ignore_common_shift(ls in lattice_vec(4), shift in -50i32..50, seed in any::<u64>()) {
            let shifted: Vec<f64> = ls.iter().map(|v| v + shift as f64).collect();
            let a = LikelihoodState::from_parts(ls.clone(), 7);
            let b = LikelihoodState::from_parts(shifted.clone(), 7);
            let mut ra = ChaCha8Rng::seed_from_u64(seed);
            let mut rb = ChaCha8Rng::seed_from_u64(seed);
            prop_assert_eq!(elrt_arm(&a, &mut ra), elrt_arm(&b, &mut rb));
            let eta = vec![vec![0.01; 4]; 4];
            prop_assert_eq!(exlrt_choice(&a, &eta, &mut ra), exlrt_choice(&b, &eta, &mut rb));
            let a2 = LikelihoodState::from_parts(ls[..2].to_vec(), 7);
            let b2 = LikelihoodState::from_parts(shifted[..2].to_vec(), 7);
            prop_assert_eq!(lrt_arm(&a2, &mut ra), lrt_arm(&b2, &mut rb));
            prop_assert_eq!(xlrt_choice(&a2, 0.01, 0.02, &mut ra), xlrt_choice(&b2, 0.01, 0.02, &mut rb));
        }
    }
}
