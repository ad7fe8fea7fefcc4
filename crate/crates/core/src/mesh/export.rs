use std::io::{self, Write};

use super::{Color, EdgeKind, Mesh, NIL};

impl Mesh {
    /// Plain edge list: a `V E` header then one `u v` line per edge.
    pub fn write_edge_list(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{} {}", self.vertex_count(), self.edge_count())?;
        for h in 0..self.half_edge_count() as u32 {
            if self.kind(h) != EdgeKind::Dead && h < self.twin(h) {
                writeln!(w, "{} {}", self.origin(h), self.dest(h))?;
            }
        }
        Ok(())
    }

    /// `id,distance,color` per vertex; unknown fields are left empty.
    pub fn write_vertex_csv(&self, distances: &[u32], mut w: impl Write) -> io::Result<()> {
        writeln!(w, "id,distance,color")?;
        for v in 0..self.vertex_count() {
            let d = distances.get(v).copied().filter(|&d| d != NIL).map(|d| d.to_string()).unwrap_or_default();
            let c = match self.color[v] {
                Some(Color::Black) => "black",
                Some(Color::White) => "white",
                None => "",
            };
            writeln!(w, "{v},{d},{c}")?;
        }
        Ok(())
    }
}
