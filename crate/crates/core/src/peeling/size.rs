//! Exact sampler for the number of internal vertices of a free
//! triangulation of an `(m+2)`-gon.
//!
//! Rejection from a piecewise-constant envelope: one bucket per size up to
//! [`SINGLETONS`], geometrically growing buckets up to a cutoff, and a
//! continuous `x^{-5/2}` Pareto envelope beyond it. The pmf is unimodal
//! (the ratio of consecutive masses exceeds 1 on an initial segment only:
//! the sign of `ratio - 1` is that of a concave quadratic in `n` with a
//! negative smaller root), so each bucket's maximum sits at an endpoint or
//! at the mode.

use std::collections::HashMap;

use rand::Rng;

use crate::combinatorics::logspace::{free_size_tail_constant, ln_free_size_offset, ln_free_size_shape};

const SINGLETONS: u64 = 32;
const BUCKET_GROWTH: f64 = 1.05;
/// Headroom over the asymptotic tail bound to absorb rounding.
const TAIL_SLACK: f64 = 1.001;
/// Tables for larger `m` are built per call instead of cached.
const CACHE_LIMIT: u64 = 4096;
const MAX_SIZE: f64 = (1u64 << 62) as f64;

/// Start of the Pareto tail for boundary parameter `m`.
pub(crate) fn tail_cutoff(m: u64) -> u64 {
    (50 * (m + 1) * (m + 1)).max(1000)
}

/// `P(|T| = n+1) / P(|T| = n)`.
pub(crate) fn size_ratio(m: u64, n: u64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    let s = 2.0 * mf + 3.0 * nf;
    2.0 * (s + 3.0) * (s + 2.0) * (s + 1.0)
        / (13.5 * (nf + 1.0) * (2.0 * mf + 2.0 * nf + 4.0) * (2.0 * mf + 2.0 * nf + 3.0))
}

/// Most likely size: the first `n` where the ratio drops to 1 or below.
pub(crate) fn size_mode(m: u64, upper: u64) -> u64 {
    let (mut lo, mut hi) = (0u64, upper);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if size_ratio(m, mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

#[derive(Debug, Clone)]
struct SizeTable {
    m: u64,
    offset: f64,
    lo: Vec<u64>,
    hi: Vec<u64>,
    ln_top: Vec<f64>,
    cum: Vec<f64>,
    tail_start: u64,
    tail_scale: f64,
    total: f64,
}

impl SizeTable {
    fn new(m: u64) -> Self {
        let cutoff = tail_cutoff(m);
        let mode = size_mode(m, cutoff);
        let offset = ln_free_size_offset(m);
        let ln_p = |n: u64| offset + ln_free_size_shape(m, n);
        let mut table = SizeTable {
            m,
            offset,
            lo: Vec::new(),
            hi: Vec::new(),
            ln_top: Vec::new(),
            cum: Vec::new(),
            tail_start: cutoff + 1,
            tail_scale: 0.0,
            total: 0.0,
        };
        let mut acc = 0.0;
        let mut lo = 0u64;
        while lo <= cutoff {
            let hi = if lo < SINGLETONS {
                lo
            } else {
                ((lo as f64 * BUCKET_GROWTH).ceil() as u64).max(lo + 1).min(cutoff + 1) - 1
            };
            let top = if hi < mode {
                ln_p(hi)
            } else if lo > mode {
                ln_p(lo)
            } else {
                ln_p(mode)
            };
            acc += top.exp() * (hi - lo + 1) as f64;
            table.lo.push(lo);
            table.hi.push(hi);
            table.ln_top.push(top);
            table.cum.push(acc);
            lo = hi + 1;
        }
        let tf = cutoff as f64;
        table.tail_scale = free_size_tail_constant(m) * (1.0 + 1.0 / tf).powf(2.5) * TAIL_SLACK;
        let tail_mass = table.tail_scale * (2.0 / 3.0) * ((cutoff + 1) as f64).powf(-1.5);
        table.total = acc + tail_mass;
        table
    }

    fn ln_prob(&self, n: u64) -> f64 {
        self.offset + ln_free_size_shape(self.m, n)
    }

    /// Envelope mass on `[n, n+1)` in the tail.
    fn tail_envelope(&self, n: u64) -> f64 {
        let x = n as f64;
        let gap = -(-1.5 * (1.0 / x).ln_1p()).exp_m1();
        self.tail_scale * (2.0 / 3.0) * x.powf(-1.5) * gap
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let body = *self.cum.last().expect("non-empty table");
        loop {
            let v = rng.random::<f64>() * self.total;
            if v < body {
                let j = self.cum.partition_point(|&c| c <= v);
                let (lo, hi) = (self.lo[j], self.hi[j]);
                let n = if lo == hi { lo } else { rng.random_range(lo..=hi) };
                if lo == hi || rng.random::<f64>() < (self.ln_prob(n) - self.ln_top[j]).exp() {
                    return n;
                }
            } else {
                let u = 1.0 - rng.random::<f64>();
                let x = (self.tail_start as f64 * u.powf(-2.0 / 3.0)).min(MAX_SIZE);
                let n = (x.floor() as u64).max(self.tail_start);
                if rng.random::<f64>() * self.tail_envelope(n) < self.ln_prob(n).exp() {
                    return n;
                }
            }
        }
    }
}

/// Draws free-triangulation sizes, caching one envelope table per boundary
/// parameter. Not shared between threads; give each run its own.
#[derive(Debug, Default)]
pub struct FreeSizeSampler {
    cache: HashMap<u64, SizeTable>,
}

impl FreeSizeSampler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of internal vertices of a free triangulation of the
    /// `(m+2)`-gon.
    pub fn sample<R: Rng + ?Sized>(&mut self, m: u64, rng: &mut R) -> u64 {
        if m >= CACHE_LIMIT {
            return SizeTable::new(m).sample(rng);
        }
        self.cache.entry(m).or_insert_with(|| SizeTable::new(m)).sample(rng)
    }
}
