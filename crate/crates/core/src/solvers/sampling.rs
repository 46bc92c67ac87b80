use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use super::SolverConfig;
use crate::error::{Error, Result};

const GEOMETRIC_STREAM: u64 = 0x6765_6f6d;
const BATCH_STREAM: u64 = 0x6261_7463;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for the stream named by `seed` and `tags`.
///
/// Streams are keyed by content, not by draw order, so results do not
/// depend on how agents are scheduled.
pub fn stream_rng(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let key = tags
        .iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)));
    ChaCha8Rng::seed_from_u64(key)
}

/// Draws `T` with `P(T = k) = (1 - p)^k p` for `k = 0, 1, ...`.
pub fn sample_geometric<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<u64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!(
            "geometric parameter {p} not in (0, 1]"
        )));
    }
    if p == 1.0 {
        return Ok(0);
    }
    let dist = Geometric::new(p).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Inner-loop length `T ~ Geom(1/t0)` for `epoch`; the loop runs `T + 1` steps.
pub fn epoch_inner_len(cfg: &SolverConfig, epoch: usize) -> u64 {
    let mut rng = stream_rng(cfg.seed(), &[GEOMETRIC_STREAM, epoch as u64]);
    sample_geometric(1.0 / cfg.t0() as f64, &mut rng).expect("1/t0 lies in (0, 1]")
}

/// `b` indices drawn uniformly from `[0, n)` with replacement for
/// `(epoch, step, agent)`.
pub fn batch_indices(
    seed: u64,
    epoch: usize,
    step: u64,
    agent: usize,
    n: usize,
    batch: usize,
) -> Vec<usize> {
    let mut rng = stream_rng(seed, &[BATCH_STREAM, epoch as u64, step, agent as u64]);
    (0..batch).map(|_| rng.random_range(0..n)).collect()
}
