use rand::Rng;

use super::free::fill_free;
use super::{FreeSizeSampler, SampleMode, StepBudget};
use crate::chain::Side;
use crate::error::Result;
use crate::mesh::{Filler, Mesh, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum MarkedMove {
    NewUnmarked,
    NewMarked,
    /// Third vertex `k` steps away; a free `(k+1)`-gon is cut off.
    Split(u64),
}

/// Inverts the marked peeling law at boundary parameter `m`.
pub(crate) fn invert_marked_step(m: u64, u: f64) -> MarkedMove {
    let mf = m as f64;
    let p_unmarked = (mf + 2.0) * (2.0 * mf + 3.0) / (3.0 * (mf + 1.0) * (mf + 3.0));
    if u < p_unmarked {
        return MarkedMove::NewUnmarked;
    }
    let p_marked = 1.0 / ((mf + 1.0) * (mf + 3.0));
    let mut rest = u - p_unmarked;
    if rest < p_marked || m == 0 {
        return MarkedMove::NewMarked;
    }
    rest -= p_marked;
    let mut p = mf * (mf + 2.0) / ((2.0 * mf + 2.0) * (2.0 * mf + 1.0));
    let mut k = 1u64;
    while rest >= p && k < m {
        rest -= p;
        let kf = k as f64;
        p *= (2.0 * kf - 1.0) * (mf - kf) * (mf - kf + 2.0)
            / ((kf + 2.0) * (mf - kf + 1.0) * (2.0 * mf - 2.0 * kf + 1.0));
        k += 1;
    }
    MarkedMove::Split(k)
}

/// A free triangulation of an `(m+2)`-gon with one marked internal vertex,
/// drawn with probability proportional to its number of internal vertices.
#[derive(Debug, Clone)]
pub struct MarkedSample {
    /// Number of internal vertices.
    pub size: u64,
    /// Full mode: the triangulation, its boundary vertices are `0..m+2`.
    pub filler: Option<Filler>,
    pub marked: Option<VertexId>,
    /// Full mode: distance from the marked vertex to the boundary.
    pub height: Option<u32>,
}

pub fn sample_free_marked<R: Rng + ?Sized>(m: u64, rng: &mut R, mode: SampleMode) -> Result<MarkedSample> {
    let mut budget = StepBudget::default();
    match mode {
        SampleMode::SizeOnly => {
            let size = marked_size(m, rng, &mut FreeSizeSampler::new(), &mut budget, u64::MAX)?;
            Ok(MarkedSample { size, filler: None, marked: None, height: None })
        }
        SampleMode::Full => marked_full(m, rng, &mut budget),
    }
}

/// Full-mode marked sampling under an explicit step budget. The marked
/// size has infinite mean, so large runs of full samples need a cap.
pub fn sample_marked_full<R: Rng + ?Sized>(m: u64, rng: &mut R, budget: &mut StepBudget) -> Result<MarkedSample> {
    marked_full(m, rng, budget)
}

/// Size-only marked sampling with a caller-owned size sampler.
pub fn sample_marked_size<R: Rng + ?Sized>(
    m: u64,
    rng: &mut R,
    sizes: &mut FreeSizeSampler,
    budget: &mut StepBudget,
) -> Result<u64> {
    marked_size(m, rng, sizes, budget, u64::MAX)
}

/// Size-only marked sampling that gives up once the size is known to
/// exceed `cap`, returning `None`. The size only grows along the way, so
/// the event `size > cap` is decided exactly; runs are at most about
/// `2 cap + m` steps long.
pub fn sample_marked_size_capped<R: Rng + ?Sized>(
    m: u64,
    rng: &mut R,
    sizes: &mut FreeSizeSampler,
    cap: u64,
) -> Result<Option<u64>> {
    let size = marked_size(m, rng, sizes, &mut StepBudget::default(), cap)?;
    Ok((size <= cap).then_some(size))
}

fn marked_size<R: Rng + ?Sized>(
    m0: u64,
    rng: &mut R,
    sizes: &mut FreeSizeSampler,
    budget: &mut StepBudget,
    cap: u64,
) -> Result<u64> {
    let mut m = m0;
    let mut size = 0u64;
    while size <= cap {
        budget.spend(1)?;
        match invert_marked_step(m, rng.random()) {
            MarkedMove::NewUnmarked => {
                size += 1;
                m += 1;
            }
            MarkedMove::NewMarked => {
                return Ok(size.saturating_add(1 + sizes.sample(m + 1, rng)));
            }
            MarkedMove::Split(k) => {
                size = size.saturating_add(sizes.sample(k - 1, rng));
                m -= k;
            }
        }
    }
    Ok(size)
}

fn marked_full<R: Rng + ?Sized>(m0: u64, rng: &mut R, budget: &mut StepBudget) -> Result<MarkedSample> {
    let (mut mesh, open, boundary) = Mesh::polygon(m0 as usize);
    let mut h = open;
    let mut m = m0;
    let marked = loop {
        budget.spend(1)?;
        match invert_marked_step(m, rng.random()) {
            MarkedMove::NewUnmarked => {
                h = mesh.attach_vertex(h, false).front_edge;
                m += 1;
            }
            MarkedMove::NewMarked => {
                let a = mesh.attach_vertex(h, false);
                fill_free(&mut mesh, a.front_edge, m + 1, rng, budget)?;
                break a.vertex;
            }
            MarkedMove::Split(k) => {
                let side = if rng.random() { Side::Left } else { Side::Right };
                let closed = mesh.close_at_distance(h, k as usize, side);
                fill_free(&mut mesh, closed.detached.edge, k - 1, rng, budget)?;
                h = match side {
                    Side::Right => closed.back_edge,
                    Side::Left => closed.front_edge,
                };
                m -= k;
            }
        }
    };
    let sources: Vec<VertexId> = (0..boundary.len() as VertexId).collect();
    let height = mesh.multi_source_distances(&sources)[marked as usize];
    let filler = Filler { mesh, boundary };
    Ok(MarkedSample {
        size: filler.internal_vertices() as u64,
        filler: Some(filler),
        marked: Some(marked),
        height: Some(height),
    })
}
