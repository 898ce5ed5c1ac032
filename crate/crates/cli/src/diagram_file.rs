//! Diagram CSV: header
//! `dim,birth,death,birth_i,birth_j,death_i,death_j,essential,persistence`,
//! one pair per row in canonical diagram order, reals at 17 significant
//! digits.

use toporeg_core::{GridShape, PersistenceDiagram};

use crate::numfmt::format_g17;

pub const HEADER: &str = "dim,birth,death,birth_i,birth_j,death_i,death_j,essential,persistence";

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramRow {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
    pub birth_ij: (usize, usize),
    pub death_ij: (usize, usize),
    pub essential: bool,
    pub persistence: f64,
}

impl DiagramRow {
    fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.dim,
            format_g17(self.birth),
            format_g17(self.death),
            self.birth_ij.0,
            self.birth_ij.1,
            self.death_ij.0,
            self.death_ij.1,
            self.essential,
            format_g17(self.persistence),
        )
    }
}

/// Rows of `diagram`, keeping essential pairs and pairs with persistence at
/// least `min_persistence`.
pub fn rows(diagram: &PersistenceDiagram, min_persistence: f64) -> Vec<DiagramRow> {
    let shape: GridShape = diagram.shape();
    diagram
        .pairs()
        .iter()
        .filter(|p| p.essential || p.persistence() >= min_persistence)
        .map(|p| DiagramRow {
            dim: p.dim,
            birth: p.birth,
            death: p.death,
            birth_ij: shape.coords(p.birth_vertex),
            death_ij: shape.coords(p.death_vertex),
            essential: p.essential,
            persistence: p.persistence(),
        })
        .collect()
}

pub fn to_csv(rows: &[DiagramRow]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<DiagramRow>, String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(format!("missing header {HEADER:?}")),
    }
    lines
        .map(|(ln, line)| {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 9 {
                return Err(format!("line {}: expected 9 fields, found {}", ln + 1, cells.len()));
            }
            let bad = |what: &str| format!("line {}: bad {what}", ln + 1);
            let int = |i: usize, what: &str| cells[i].parse::<usize>().map_err(|_| bad(what));
            let real = |i: usize, what: &str| cells[i].parse::<f64>().map_err(|_| bad(what));
            Ok(DiagramRow {
                dim: int(0, "dim")?,
                birth: real(1, "birth")?,
                death: real(2, "death")?,
                birth_ij: (int(3, "birth_i")?, int(4, "birth_j")?),
                death_ij: (int(5, "death_i")?, int(6, "death_j")?),
                essential: cells[7].parse::<bool>().map_err(|_| bad("essential"))?,
                persistence: real(8, "persistence")?,
            })
        })
        .collect()
}
