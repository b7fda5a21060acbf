use serde::Serialize;

use super::{apply_pastings, find_pasting_sites, make_unit_tile, subdivide, Complex, ComplexError};
use crate::scheme::SubdivisionScheme;

/// Pastings start with the fourth level; K_1..K_3 are plain macrotiles.
pub const FIRST_PASTING_LEVEL: u32 = 4;

#[derive(Debug, Clone, Copy)]
pub struct BuildLimits {
    pub max_vertices: usize,
}

impl Default for BuildLimits {
    fn default() -> Self {
        BuildLimits {
            max_vertices: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelStats {
    pub level: u32,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub core_faces: usize,
    pub macrotiles: usize,
    pub pasting_sites: usize,
}

impl LevelStats {
    pub fn of(c: &Complex, pasting_sites: usize) -> LevelStats {
        LevelStats {
            level: c.stage(),
            vertices: c.vertex_count(),
            edges: c.edge_count(),
            faces: c.unit_face_count(),
            core_faces: c.core_unit_face_count(),
            macrotiles: c.faces().len(),
            pasting_sites,
        }
    }
}

/// K_1..K_n in order.
pub fn build_sequence(
    n: u32,
    scheme: &SubdivisionScheme,
    limits: BuildLimits,
) -> Result<Vec<Complex>, ComplexError> {
    build_sequence_with_stats(n, scheme, limits).map(|(levels, _)| levels)
}

/// K_1..K_n with one stats row per level.
pub fn build_sequence_with_stats(
    n: u32,
    scheme: &SubdivisionScheme,
    limits: BuildLimits,
) -> Result<(Vec<Complex>, Vec<LevelStats>), ComplexError> {
    if n == 0 {
        return Err(ComplexError::ZeroLevel);
    }
    let mut out = vec![make_unit_tile()];
    let mut stats = vec![LevelStats::of(&out[0], 0)];
    while out.len() < n as usize {
        let prev = out.last().expect("non-empty");
        let mut next = subdivide(prev, scheme);
        let mut sites = 0;
        if next.stage() >= FIRST_PASTING_LEVEL {
            let found = find_pasting_sites(&next)?;
            sites = found.len();
            next = apply_pastings(&next, &found)?;
        }
        if next.vertex_count() > limits.max_vertices {
            return Err(ComplexError::CapExceeded {
                level: next.stage(),
                vertices: next.vertex_count(),
                cap: limits.max_vertices,
                partial: stats,
            });
        }
        stats.push(LevelStats::of(&next, sites));
        out.push(next);
    }
    Ok((out, stats))
}

pub fn build_complex(n: u32, scheme: &SubdivisionScheme) -> Result<Complex, ComplexError> {
    let mut seq = build_sequence(n, scheme, BuildLimits::default())?;
    Ok(seq.pop().expect("n >= 1"))
}
