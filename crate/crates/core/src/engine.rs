//! Counter-based randomness and the trial executor shared by the Monte Carlo
//! engines.
//!
//! Trial `i` of stream `(seed, stream_id)` always draws from the same ChaCha8
//! keystream window, so results do not depend on how trials are scheduled.
//! With the `parallel` feature the executor folds trials on the rayon pool;
//! accumulators are integer counts, so any reduction order gives the same
//! totals.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// 32-bit words of keystream reserved for each trial (one ChaCha block).
pub const WORDS_PER_TRIAL: u128 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Generator positioned at the start of the stream.
    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Generator for trial `index`. A trial must not draw more than
    /// [`WORDS_PER_TRIAL`] words or it would overlap the next trial.
    pub fn trial_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.generator();
        rng.set_word_pos(u128::from(index) * WORDS_PER_TRIAL);
        rng
    }
}

/// How trials are scheduled. Both give identical results.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Folds `step` over trial indices `0..trials`. `merge` must be associative
/// and commutative over the accumulator.
#[cfg_attr(not(feature = "parallel"), allow(unused_variables))]
pub fn fold_trials<A, I, F, M>(trials: u64, execution: Execution, identity: I, step: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, u64) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..trials)
                .into_par_iter()
                .fold(&identity, |mut acc, i| {
                    step(&mut acc, i);
                    acc
                })
                .reduce(&identity, &merge)
        }
        _ => {
            let mut acc = identity();
            for i in 0..trials {
                step(&mut acc, i);
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn trial_rng_is_positional() {
        let s = RngStream::new(42, 3);
        let mut sequential = s.generator();
        let words: Vec<u32> = (0..48).map(|_| sequential.random()).collect();
        for trial in 0..3u64 {
            let mut r = s.trial_rng(trial);
            let start = trial as usize * 16;
            let got: Vec<u32> = (0..16).map(|_| r.random()).collect();
            assert_eq!(got, words[start..start + 16]);
        }
    }

    #[test]
    fn streams_differ() {
        let a: Vec<u32> = {
            let mut r = RngStream::new(7, 0).generator();
            (0..100).map(|_| r.random()).collect()
        };
        let b: Vec<u32> = {
            let mut r = RngStream::new(7, 1).generator();
            (0..100).map(|_| r.random()).collect()
        };
        assert_ne!(a, b);
    }

    #[test]
    fn executions_agree() {
        let run = |e| {
            fold_trials(
                10_000,
                e,
                || [0u64; 2],
                |acc, i| {
                    let bit: bool = RngStream::new(1, 0).trial_rng(i).random();
                    acc[bit as usize] += 1;
                },
                |a, b| [a[0] + b[0], a[1] + b[1]],
            )
        };
        assert_eq!(run(Execution::Parallel), run(Execution::Sequential));
    }
}
