//! Super-level-set lower-star filtration.
//!
//! A simplex takes the minimum of its vertex values and enters the sweep once
//! the threshold drops to that value. Order: value descending, then dimension
//! ascending, then vertex tuple ascending, so faces never follow cofaces.

use std::cmp::Ordering;

use crate::error::{Result, TopoError};
use crate::field::ScalarField;
use crate::grid::{FreudenthalComplex, Simplex};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiltrationEntry {
    pub simplex: Simplex,
    pub value: f64,
    /// Vertex attaining `value`; the lowest id among ties.
    pub critical_vertex: usize,
}

#[derive(Clone, Debug)]
pub struct Filtration<'a> {
    complex: &'a FreudenthalComplex,
    vertex_values: Vec<f64>,
    entries: Vec<FiltrationEntry>,
}

impl<'a> Filtration<'a> {
    pub fn complex(&self) -> &'a FreudenthalComplex {
        self.complex
    }

    pub fn entries(&self) -> &[FiltrationEntry] {
        &self.entries
    }

    pub fn vertex_values(&self) -> &[f64] {
        &self.vertex_values
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Position of each simplex in the sweep.
    pub fn position(&self, simplex: &Simplex) -> Option<usize> {
        self.entries.iter().position(|e| e.simplex == *simplex)
    }
}

fn entry(simplex: Simplex, f: &[f64]) -> FiltrationEntry {
    let verts = simplex.vertices();
    let mut critical = verts[0];
    for &v in &verts[1..] {
        // Vertices are ascending, so strict comparison keeps the lowest id.
        if f[v] < f[critical] {
            critical = v;
        }
    }
    FiltrationEntry {
        simplex,
        value: f[critical],
        critical_vertex: critical,
    }
}

fn sweep_order(a: &FiltrationEntry, b: &FiltrationEntry) -> Ordering {
    // Values are finite, so partial_cmp is total here and treats -0.0 == 0.0.
    b.value
        .partial_cmp(&a.value)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.simplex.cmp(&b.simplex))
}

/// Filtration of every simplex up to `max_dim` (0, 1 or 2).
pub fn build_filtration_skeleton<'a>(
    complex: &'a FreudenthalComplex,
    f: &ScalarField,
    max_dim: usize,
) -> Result<Filtration<'a>> {
    if f.shape() != complex.shape() {
        return Err(TopoError::DimensionMismatch {
            expected: complex.shape().to_string(),
            found: f.shape().to_string(),
        });
    }
    let values = f.values();
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(TopoError::NonFinite {
            index,
            value: values[index],
        });
    }

    let mut entries: Vec<FiltrationEntry> = complex
        .simplices()
        .filter(|s| s.dim() <= max_dim)
        .map(|s| entry(s, values))
        .collect();
    entries.sort_unstable_by(sweep_order);

    Ok(Filtration {
        complex,
        vertex_values: values.to_vec(),
        entries,
    })
}

pub fn build_filtration<'a>(complex: &'a FreudenthalComplex, f: &ScalarField) -> Result<Filtration<'a>> {
    build_filtration_skeleton(complex, f, 2)
}
