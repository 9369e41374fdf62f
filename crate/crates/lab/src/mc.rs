//! Replica-parallel Monte-Carlo reduction.
//!
//! Replica `r` always writes its outputs to slot `r`, and the slots are
//! reduced in replica order afterwards, so the result does not depend on
//! how rayon schedules the work.

use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Mean and standard error of a sample, two-pass with compensated sums.
pub fn summarize<I: Iterator<Item = f64> + Clone>(xs: I) -> CovarianceEstimate {
    let mut n = 0u64;
    let mut acc = Neumaier::default();
    for x in xs.clone() {
        acc.add(x);
        n += 1;
    }
    if n == 0 {
        return CovarianceEstimate {
            mean: f64::NAN,
            stderr: f64::NAN,
            n,
        };
    }
    let mean = acc.value() / n as f64;
    let mut sq = Neumaier::default();
    for x in xs {
        sq.add((x - mean) * (x - mean));
    }
    let stderr = if n > 1 {
        (sq.value() / (n - 1) as f64 / n as f64).sqrt()
    } else {
        f64::NAN
    };
    CovarianceEstimate { mean, stderr, n }
}

/// Run `replicas` replicas, each producing `k` numbers, and summarize each
/// of the `k` columns. `init` builds per-worker scratch space.
pub fn estimate_columns<S, I, F>(
    replicas: u64,
    k: usize,
    init: I,
    sample: F,
) -> Vec<CovarianceEstimate>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64, &mut [f64]) + Sync + Send,
{
    if k == 0 {
        return Vec::new();
    }
    let mut out = vec![0.0; replicas as usize * k];
    out.par_chunks_mut(k)
        .enumerate()
        .for_each_init(&init, |scratch, (r, slot)| sample(scratch, r as u64, slot));
    (0..k)
        .map(|j| summarize(out.iter().skip(j).step_by(k).copied()))
        .collect()
}
