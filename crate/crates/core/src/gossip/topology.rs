use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GossipMatrix;
use crate::error::{Error, Result};

/// `laziness * I + (1 - laziness)/2 * (P + P^T)` with `P` the cyclic shift.
///
/// `m = 1` gives `[[1]]` and `m = 2` gives `[[1-c, c], [c, 1-c]]` with
/// `c = (1 - laziness)/2`. For `m >= 3` the eigenvalues are
/// `laziness + (1 - laziness) cos(2 pi k / m)`, so `laziness < 1/2` can
/// produce a negative eigenvalue and is rejected in that case.
pub fn build_lazy_ring(m: usize, laziness: f64) -> Result<GossipMatrix> {
    if m == 0 {
        return Err(Error::InvalidDimension("ring needs m >= 1".into()));
    }
    if !(laziness > 0.0 && laziness < 1.0) {
        return Err(Error::Domain(format!("laziness {laziness} not in (0, 1)")));
    }
    let mut w = vec![0.0; m * m];
    match m {
        1 => w[0] = 1.0,
        2 => {
            let c = 0.5 * (1.0 - laziness);
            w.copy_from_slice(&[1.0 - c, c, c, 1.0 - c]);
        }
        _ => {
            let side = 0.5 * (1.0 - laziness);
            for i in 0..m {
                w[i * m + i] = laziness;
                w[i * m + (i + 1) % m] += side;
                w[i * m + (i + m - 1) % m] += side;
            }
        }
    }
    GossipMatrix::new(m, w)
}

/// Random sparse graph: a ring (for connectivity) plus a random perfect
/// matching, so every agent gains random neighbours. Edges get
/// Metropolis-Hastings weights and the result is lazified to `(I + W)/2`.
pub fn build_random_two_neighbor(m: usize, seed: u64) -> Result<GossipMatrix> {
    if m < 3 {
        return Err(Error::InvalidDimension(format!(
            "random two-neighbour graph needs m >= 3, got {m}"
        )));
    }
    let mut adj = vec![false; m * m];
    let link = |a: usize, b: usize, adj: &mut Vec<bool>| {
        if a != b {
            adj[a * m + b] = true;
            adj[b * m + a] = true;
        }
    };
    for i in 0..m {
        link(i, (i + 1) % m, &mut adj);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng);
    for pair in perm.chunks_exact(2) {
        link(pair[0], pair[1], &mut adj);
    }

    let degree: Vec<usize> = (0..m)
        .map(|i| adj[i * m..(i + 1) * m].iter().filter(|&&e| e).count())
        .collect();
    let mut w = vec![0.0; m * m];
    for i in 0..m {
        let mut off = 0.0;
        for j in 0..m {
            if adj[i * m + j] {
                let wij = 1.0 / (1.0 + degree[i].max(degree[j]) as f64);
                w[i * m + j] = wij;
                off += wij;
            }
        }
        w[i * m + i] = 1.0 - off;
    }
    let lazy: Vec<f64> = (0..m * m)
        .map(|k| {
            let eye = if k / m == k % m { 1.0 } else { 0.0 };
            0.5 * (eye + w[k])
        })
        .collect();
    GossipMatrix::new(m, lazy)
}
