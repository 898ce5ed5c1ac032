//! Persistence pairs of the super-level-set filtration.
//!
//! Dimension 0 is a single union-find sweep using the elder rule: when two
//! components meet, the one born at the lower value dies (equal births: the
//! larger birth vertex id dies). Components that are born and absorbed at the
//! same value never become visible in any super-level set and produce no
//! pair. The component that survives the sweep is reported as the essential
//! pair with its death clamped to the global minimum of the field.
//!
//! Dimension 1 reduces the triangle boundary matrix over GF(2).

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Result, TopoError};
use crate::field::ScalarField;
use crate::filtration::{build_filtration_skeleton, Filtration};
use crate::grid::{build_complex, GridShape, Simplex};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
    pub birth_vertex: usize,
    pub death_vertex: usize,
    pub essential: bool,
}

impl PersistencePair {
    /// `birth - death`; never negative in the super-level convention.
    pub fn persistence(&self) -> f64 {
        self.birth - self.death
    }
}

/// Canonical pair order: dimension, persistence descending, birth
/// descending, birth vertex ascending.
pub fn diagram_order(a: &PersistencePair, b: &PersistencePair) -> Ordering {
    a.dim
        .cmp(&b.dim)
        .then_with(|| b.persistence().total_cmp(&a.persistence()))
        .then_with(|| b.birth.total_cmp(&a.birth))
        .then_with(|| a.birth_vertex.cmp(&b.birth_vertex))
        .then_with(|| a.death_vertex.cmp(&b.death_vertex))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceDiagram {
    shape: GridShape,
    pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn new(shape: GridShape, mut pairs: Vec<PersistencePair>) -> Self {
        pairs.sort_by(diagram_order);
        Self { shape, pairs }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn pairs_in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    pub fn count_in_dim(&self, dim: usize) -> usize {
        self.pairs_in_dim(dim).count()
    }

    pub fn max_persistence(&self) -> f64 {
        self.pairs.iter().map(|p| p.persistence()).fold(0.0, f64::max)
    }
}

struct ComponentForest {
    parent: Vec<usize>,
}

impl ComponentForest {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[v] != root {
            let next = self.parent[v];
            self.parent[v] = root;
            v = next;
        }
        root
    }
}

/// Dimension-0 pairs. Each component root is the vertex that created it, so
/// a root's value is the component's birth.
pub fn ph0(filtration: &Filtration) -> Vec<PersistencePair> {
    let f = filtration.vertex_values();
    let n = f.len();
    let mut forest = ComponentForest::new(n);
    let mut pairs = Vec::new();

    // `older(a, b)` is true when root a survives a merge with root b.
    let older = |a: usize, b: usize| f[a] > f[b] || (f[a] == f[b] && a < b);

    for e in filtration.entries() {
        let Simplex::Edge([u, w]) = e.simplex else {
            continue;
        };
        let (ru, rw) = (forest.find(u), forest.find(w));
        if ru == rw {
            continue;
        }
        let (survivor, victim) = if older(ru, rw) { (ru, rw) } else { (rw, ru) };
        forest.parent[victim] = survivor;
        if f[victim] > e.value {
            pairs.push(PersistencePair {
                dim: 0,
                birth: f[victim],
                death: e.value,
                birth_vertex: victim,
                death_vertex: e.critical_vertex,
                essential: false,
            });
        }
    }

    // The complex is connected, but stay correct for any skeleton by
    // emitting one essential pair per surviving root.
    let mut argmin = 0;
    for v in 1..n {
        if f[v] < f[argmin] {
            argmin = v;
        }
    }
    for v in 0..n {
        if forest.find(v) == v {
            pairs.push(PersistencePair {
                dim: 0,
                birth: f[v],
                death: f[argmin],
                birth_vertex: v,
                death_vertex: argmin,
                essential: true,
            });
        }
    }
    pairs
}

/// Dimension-1 pairs by left-to-right column reduction of the triangle
/// boundary matrix, rows and columns in sweep order.
pub fn ph1(filtration: &Filtration) -> Vec<PersistencePair> {
    let mut edge_row: HashMap<[usize; 2], usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut columns: Vec<(Vec<usize>, usize)> = Vec::new();

    for (pos, e) in filtration.entries().iter().enumerate() {
        match e.simplex {
            Simplex::Edge(key) => {
                edge_row.insert(key, edges.len());
                edges.push(pos);
            }
            Simplex::Triangle([a, b, c]) => {
                let mut col: Vec<usize> = [[a, b], [a, c], [b, c]].iter().map(|k| edge_row[k]).collect();
                col.sort_unstable();
                columns.push((col, pos));
            }
            Simplex::Vertex(_) => {}
        }
    }

    let entries = filtration.entries();
    let mut pivot_owner: Vec<Option<usize>> = vec![None; edges.len()];
    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(columns.len());
    let mut pairs = Vec::new();

    for (j, (mut col, tri_pos)) in columns.into_iter().enumerate() {
        while let Some(&low) = col.last() {
            match pivot_owner[low] {
                Some(other) => col = symmetric_difference(&col, &reduced[other]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_owner[low] = Some(j);
            let edge = &entries[edges[low]];
            let tri = &entries[tri_pos];
            pairs.push(PersistencePair {
                dim: 1,
                birth: edge.value,
                death: tri.value,
                birth_vertex: edge.critical_vertex,
                death_vertex: tri.critical_vertex,
                essential: false,
            });
        }
        reduced.push(col);
    }
    pairs
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Build the complex and filtration for `f` and collect pairs up to `max_dim`.
pub fn diagram(f: &ScalarField, max_dim: usize) -> Result<PersistenceDiagram> {
    if max_dim > 1 {
        return Err(TopoError::InvalidParameter(format!(
            "max_dim must be 0 or 1, got {max_dim}"
        )));
    }
    let complex = build_complex(f.shape());
    // ph0 never looks at triangles.
    let skeleton = if max_dim == 0 { 1 } else { 2 };
    let filtration = build_filtration_skeleton(&complex, f, skeleton)?;
    let mut pairs = ph0(&filtration);
    if max_dim == 1 {
        pairs.extend(ph1(&filtration));
    }
    Ok(PersistenceDiagram::new(f.shape(), pairs))
}
