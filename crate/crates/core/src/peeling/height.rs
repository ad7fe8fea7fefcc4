use rand::Rng;

use super::{sample_free_full, StepBudget};
use crate::error::{Error, Result};
use crate::mesh::VertexId;

/// Histogram of distances to the boundary over the internal vertices of one
/// free triangulation of the `(m+2)`-gon: entry `h` counts vertices at
/// height `h` (entry 0 is always zero).
pub fn height_profile<R: Rng + ?Sized>(m: u64, rng: &mut R) -> Result<Vec<u64>> {
    if m < 2 {
        return Err(Error::invalid("m", "height profile needs m >= 2"));
    }
    let filler = sample_free_full(m, rng, &mut StepBudget::default())?;
    let boundary = filler.boundary.len() as VertexId;
    let sources: Vec<VertexId> = (0..boundary).collect();
    let dist = filler.mesh.multi_source_distances(&sources);
    let mut hist = vec![0u64];
    for &d in &dist[boundary as usize..] {
        let d = d as usize;
        if d >= hist.len() {
            hist.resize(d + 1, 0);
        }
        hist[d] += 1;
    }
    Ok(hist)
}
