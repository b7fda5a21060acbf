//! Canonical text serialization of a complex.

use std::fmt::Write;

use super::{Complex, Origin, VertexKind};

fn kind_token(k: VertexKind) -> &'static str {
    match k {
        VertexKind::Corner => "corner",
        VertexKind::Side => "side",
        VertexKind::Interior => "interior",
    }
}

fn origin_token(o: Origin) -> String {
    match o {
        Origin::Initial => "initial".into(),
        Origin::Subdivision(slot) => format!("sub:{slot}"),
        Origin::Pasting(role) => format!("paste:{role:?}"),
    }
}

impl Complex {
    /// One record per line, vertices then edges then faces then pastings,
    /// each sorted by id. Two builds from the same scheme dump identically.
    pub fn canonical_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "complex level={} vertices={} edges={} faces={} macrotiles={} pastings={}",
            self.stage,
            self.vertex_count(),
            self.edge_count(),
            self.unit_face_count(),
            self.faces.len(),
            self.pasting_log.len()
        );
        for v in &self.vertices {
            let _ = write!(
                out,
                "V {} {} depth={} stage={} {}",
                v.id.0,
                kind_token(v.kind),
                v.depth,
                v.creation_stage,
                origin_token(v.origin)
            );
            match &v.host {
                Some(h) => {
                    let _ = writeln!(
                        out,
                        " host={}>{} type={} level={} root={} pos={}",
                        h.ends[0].0, h.ends[1].0, h.edge_type, h.level, h.root, h.position
                    );
                }
                None => out.push_str(" host=-\n"),
            }
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "E {} {}>{} type={} level={} stage={} root={} span={}..{}",
                e.id.0,
                e.tail.0,
                e.head.0,
                e.edge_type,
                e.level,
                e.creation_stage,
                e.root,
                e.span.0,
                e.span.1
            );
        }
        for f in &self.faces {
            let c = f.corners;
            let _ = writeln!(
                out,
                "F {} level={} corners={},{},{},{} parent={} pasted={}",
                f.id.0,
                f.level,
                c[0].0,
                c[1].0,
                c[2].0,
                c[3].0,
                f.parent.map_or("-".to_string(), |p| p.0.to_string()),
                u8::from(f.pasted)
            );
        }
        for p in &self.pasting_log {
            let s = &p.site;
            let _ = writeln!(
                out,
                "P stage={} site={},{},{},{},{} base={} rule={:?} created={} macrotile={}",
                p.stage,
                s.x1.0,
                s.x2.0,
                s.y.0,
                s.z2.0,
                s.z1.0,
                s.base_face.0,
                s.rule,
                p.created
                    .iter()
                    .map(|v| v.0.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                p.macrotile.0
            );
        }
        out
    }
}
