use rand::Rng;

use super::{FreeSizeSampler, StepBudget};
use crate::chain::Side;
use crate::error::Result;
use crate::mesh::{Filler, HalfEdgeId, Mesh};

/// Outcome of peeling one edge of a free `(m+2)`-gon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FreeMove {
    New,
    /// Only for the 2-gon: the two sides are identified.
    Glue,
    /// Third vertex is the `i`-th boundary vertex to the right.
    Split(u64),
}

/// Inverts the free peeling law. The split masses are symmetric in
/// `i ↔ m+1-i`, so the walk runs over mirror pairs and `coin` picks the
/// member of the pair.
pub(crate) fn invert_free_peel(m: u64, u: f64, coin: bool) -> FreeMove {
    if m == 0 {
        return if u < 1.0 / 9.0 { FreeMove::New } else { FreeMove::Glue };
    }
    let mf = m as f64;
    let p_new = (2.0 * mf + 1.0) / (3.0 * (mf + 3.0));
    if u < p_new {
        return FreeMove::New;
    }
    let mut rest = u - p_new;
    let mut q = (mf + 2.0) / (4.0 * (2.0 * mf - 1.0));
    let half = m.div_ceil(2);
    for i in 1..=half {
        let j = m + 1 - i;
        let mass = if i == j { q } else { 2.0 * q };
        if rest < mass || i == half {
            return FreeMove::Split(if coin { j } else { i });
        }
        rest -= mass;
        let fi = i as f64;
        q *= (2.0 * fi - 1.0) * (mf - fi + 2.0) / ((fi + 2.0) * (2.0 * mf - 2.0 * fi - 1.0));
    }
    unreachable!("loop returns at i = half")
}

/// Fills the open face through `edge` (an `(m+2)`-gon) with a free
/// triangulation, in place. Returns the number of vertices added.
pub(crate) fn fill_free<R: Rng + ?Sized>(
    mesh: &mut Mesh,
    edge: HalfEdgeId,
    m: u64,
    rng: &mut R,
    budget: &mut StepBudget,
) -> Result<u64> {
    let mut stack = vec![(edge, m)];
    let mut added = 0u64;
    while let Some((h, m)) = stack.pop() {
        budget.spend(1)?;
        match invert_free_peel(m, rng.random(), rng.random()) {
            FreeMove::New => {
                let a = mesh.attach_vertex(h, false);
                added += 1;
                stack.push((a.front_edge, m + 1));
            }
            FreeMove::Glue => mesh.glue_two_gon(h).expect("parameter 0 face is a 2-gon"),
            FreeMove::Split(i) => {
                // Walk and relabel whichever way round is shorter.
                let closed = if i < m + 1 - i {
                    let g = (0..=i).fold(h, |e, _| mesh.next(e));
                    mesh.close_triangle(h, g, Side::Right)
                } else {
                    let g = (0..m + 1 - i).fold(h, |e, _| mesh.prev(e));
                    mesh.close_triangle(h, g, Side::Left)
                };
                stack.push((closed.front_edge, i - 1));
                stack.push((closed.back_edge, m - i));
            }
        }
    }
    Ok(added)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    Full,
    SizeOnly,
}

#[derive(Debug, Clone)]
pub enum FreeSample {
    Full(Filler),
    Size(u64),
}

impl FreeSample {
    /// Number of internal vertices.
    pub fn size(&self) -> u64 {
        match self {
            FreeSample::Full(f) => f.internal_vertices() as u64,
            FreeSample::Size(n) => *n,
        }
    }
}

/// A free triangulation of the `(m+2)`-gon, built or only counted.
pub fn sample_free<R: Rng + ?Sized>(m: u64, rng: &mut R, mode: SampleMode) -> Result<FreeSample> {
    match mode {
        SampleMode::Full => sample_free_full(m, rng, &mut StepBudget::default()).map(FreeSample::Full),
        SampleMode::SizeOnly => Ok(FreeSample::Size(FreeSizeSampler::new().sample(m, rng))),
    }
}

pub fn sample_free_full<R: Rng + ?Sized>(m: u64, rng: &mut R, budget: &mut StepBudget) -> Result<Filler> {
    let (mut mesh, open, boundary) = Mesh::polygon(m as usize);
    fill_free(&mut mesh, open, m, rng, budget)?;
    Ok(Filler { mesh, boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{to_f64, FreePeelLaw, FreeSizeLaw};
    use crate::error::Error;
    use crate::mesh::EdgeKind;
    use crate::stats::{chi_square, merge_buckets};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inversion_matches_exact_law() {
        for m in [0u64, 1, 2, 3, 8, 31] {
            let law = FreePeelLaw::new(m);
            let steps = 200_000;
            let mut mass = vec![0.0; m as usize + 2];
            for s in 0..steps {
                let u = (s as f64 + 0.5) / steps as f64;
                for coin in [false, true] {
                    let slot = match invert_free_peel(m, u, coin) {
                        FreeMove::New => 0,
                        FreeMove::Glue => m as usize + 1,
                        FreeMove::Split(i) => i as usize,
                    };
                    mass[slot] += 0.5 / steps as f64;
                }
            }
            assert!((mass[0] - to_f64(&law.p_new)).abs() < 1e-4, "m={m}");
            for (i, p) in law.p_split.iter().enumerate() {
                assert!((mass[i + 1] - to_f64(p)).abs() < 1e-4, "m={m} i={}", i + 1);
            }
            if m == 0 {
                assert!((mass[1] - to_f64(&law.p_glue)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn full_sample_sizes_follow_exact_law() {
        let m = 3u64;
        let cap = 12u64;
        let law = FreeSizeLaw::new(m, cap).unwrap();
        let mut probs: Vec<f64> = law.probs.iter().map(to_f64).collect();
        probs.push(to_f64(&law.tail_mass));
        let mut counts = vec![0u64; probs.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 100_000;
        for _ in 0..draws {
            let f = sample_free_full(m, &mut rng, &mut StepBudget::default()).unwrap();
            counts[(f.internal_vertices() as u64).min(cap + 1) as usize] += 1;
        }
        let (c, p) = merge_buckets(&counts, &probs, 20.0);
        let out = chi_square(&c, &p, 0.001).unwrap();
        assert!(out.passes(), "{out:?}");
    }

    #[test]
    fn full_samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in [0u64, 1, 2, 5, 17] {
            for _ in 0..200 {
                let f = sample_free_full(m, &mut rng, &mut StepBudget::default()).unwrap();
                f.mesh.validate().unwrap();
                assert_eq!(f.mesh.vertex_count() - f.internal_vertices(), m as usize + 2);
                for &out in &f.boundary {
                    assert_eq!(f.mesh.kind(out), EdgeKind::Outside);
                }
                // A triangulated (m+2)-gon with n inner vertices has
                // m + 2n triangles.
                assert_eq!(f.mesh.triangle_count(), m as usize + 2 * f.internal_vertices());
            }
        }
    }

    #[test]
    fn fillers_glue_into_holes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let mut mesh = Mesh::root_triangle();
            let mut h = mesh.frontier_edge().unwrap();
            for _ in 0..6 {
                h = mesh.peel_attach_new(h).unwrap().front_edge;
            }
            let k = rng.random_range(1..=6usize);
            let side = if rng.random() { Side::Left } else { Side::Right };
            let closed = mesh.peel_attach_back(h, k, side).unwrap();
            let filler = sample_free_full(k as u64 - 1, &mut rng, &mut StepBudget::default()).unwrap();
            let (v, t) = (mesh.vertex_count(), mesh.triangle_count());
            mesh.glue_hole(closed.detached, &filler).unwrap();
            assert_eq!(mesh.vertex_count(), v + filler.internal_vertices());
            assert_eq!(mesh.triangle_count(), t + filler.mesh.triangle_count());
            mesh.validate().unwrap();
        }
    }

    #[test]
    fn median_of_means_near_exact_mean() {
        // Infinite variance: report-style check with a loose band.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = FreeSizeSampler::new();
        let means: Vec<f64> = (0..41)
            .map(|_| (0..2000).map(|_| s.sample(5, &mut rng) as f64).sum::<f64>() / 2000.0)
            .collect();
        let med = crate::stats::median(&means);
        assert!(med > 15.0 && med < 26.0, "median of means {med}");
    }

    #[test]
    fn budget_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut budget = StepBudget::new(3);
        let mut failures = 0;
        for _ in 0..50 {
            budget = StepBudget::new(budget.limit());
            if let Err(e) = sample_free_full(30, &mut rng, &mut budget) {
                assert_eq!(e, Error::StepBudgetExceeded { budget: 3 });
                failures += 1;
            }
        }
        assert!(failures > 0);
    }
}
