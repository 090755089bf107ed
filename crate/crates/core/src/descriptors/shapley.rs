use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DescriptorError, Result};
use crate::rng::{derive_seed, rng};
use crate::stats::{mean, std_error};

/// Largest feature count accepted by exact enumeration.
pub const MAX_EXACT_FEATURES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapleyMode {
    /// Enumerate all `2^n` coalitions.
    Exact,
    /// Average marginal gains over sampled feature orderings.
    PermutationMc,
}

/// Feature indices in the coalition `mask`.
pub(crate) fn members(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|j| mask & (1 << j) != 0).collect()
}

/// Shapley values of the game `value` over `n` players.
///
/// Returns the attributions and, in permutation mode, their Monte Carlo
/// standard errors. `value` is evaluated once per distinct coalition, in
/// parallel; results do not depend on the thread count.
pub fn shapley_values<F>(
    n: usize,
    mode: ShapleyMode,
    permutations: usize,
    seed: u64,
    value: F,
) -> Result<(Vec<f64>, Option<Vec<f64>>)>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if n == 0 {
        return Ok((Vec::new(), None));
    }
    match mode {
        ShapleyMode::Exact => {
            if n > MAX_EXACT_FEATURES {
                return Err(DescriptorError::TooManyFeaturesForExact { n, max: MAX_EXACT_FEATURES });
            }
            let values: Vec<f64> = (0..1u64 << n).into_par_iter().map(&value).collect::<Result<_>>()?;
            // w(s) = s! (n - s - 1)! / n!
            let mut weight = vec![0.0; n];
            for (s, w) in weight.iter_mut().enumerate() {
                let mut acc = 1.0 / n as f64;
                for i in 1..=s {
                    acc *= i as f64 / (n - i) as f64;
                }
                *w = acc;
            }
            let phi = (0..n)
                .map(|j| {
                    let bit = 1u64 << j;
                    (0..1u64 << n)
                        .filter(|m| m & bit == 0)
                        .map(|m| weight[m.count_ones() as usize] * (values[(m | bit) as usize] - values[m as usize]))
                        .sum()
                })
                .collect();
            Ok((phi, None))
        }
        ShapleyMode::PermutationMc => {
            if permutations < 2 {
                return Err(DescriptorError::InvalidSpec("permutation mode needs at least 2 permutations".into()));
            }
            let orders: Vec<Vec<usize>> = (0..permutations)
                .map(|t| {
                    let mut order: Vec<usize> = (0..n).collect();
                    order.shuffle(&mut rng(derive_seed(seed, t as u64)));
                    order
                })
                .collect();
            let mut needed = BTreeSet::new();
            for order in &orders {
                let mut mask = 0u64;
                needed.insert(mask);
                for &j in order {
                    mask |= 1 << j;
                    needed.insert(mask);
                }
            }
            let needed: Vec<u64> = needed.into_iter().collect();
            let computed: Vec<f64> = needed.par_iter().map(|&m| value(m)).collect::<Result<_>>()?;
            let table: HashMap<u64, f64> = needed.into_iter().zip(computed).collect();
            let mut gains = vec![Vec::with_capacity(permutations); n];
            for order in &orders {
                let mut mask = 0u64;
                for &j in order {
                    let next = mask | 1 << j;
                    gains[j].push(table[&next] - table[&mask]);
                    mask = next;
                }
            }
            Ok((gains.iter().map(|g| mean(g)).collect(), Some(gains.iter().map(|g| std_error(g)).collect())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_game_returns_player_weights() {
        let w = [1.0, -2.0, 0.5, 4.0];
        let game = |m: u64| Ok(members(m, 4).iter().map(|&j| w[j]).sum());
        let (phi, _) = shapley_values(4, ShapleyMode::Exact, 0, 0, game).unwrap();
        for (a, b) in phi.iter().zip(w) {
            assert!((a - b).abs() < 1e-12);
        }
        let (mc, se) = shapley_values(4, ShapleyMode::PermutationMc, 50, 1, game).unwrap();
        assert_eq!(mc, w.to_vec());
        assert!(se.unwrap().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn glove_game() {
        // players 0 and 1 each hold a left glove, 2 holds the right glove
        let game = |m: u64| Ok(if m & 4 != 0 && m & 3 != 0 { 1.0 } else { 0.0 });
        let (phi, _) = shapley_values(3, ShapleyMode::Exact, 0, 0, game).unwrap();
        assert!((phi[0] - 1.0 / 6.0).abs() < 1e-12);
        assert!((phi[1] - 1.0 / 6.0).abs() < 1e-12);
        assert!((phi[2] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_many_players() {
        assert!(matches!(
            shapley_values(13, ShapleyMode::Exact, 0, 0, |_| Ok(0.0)),
            Err(DescriptorError::TooManyFeaturesForExact { n: 13, .. })
        ));
    }
}
