//! Freudenthal triangulation of an H×W pixel grid.
//!
//! Vertex ids are row-major (`row * width + col`). Every unit cell gets the
//! diagonal `(i, j) -> (i + 1, j + 1)` and is split into the triangles
//! `{(i,j), (i,j+1), (i+1,j+1)}` and `{(i,j), (i+1,j), (i+1,j+1)}`.

use std::fmt;

use crate::error::{Result, TopoError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridShape {
    height: usize,
    width: usize,
}

impl GridShape {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(TopoError::InvalidShape { height, width });
        }
        Ok(Self { height, width })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of pixels (vertices).
    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertex(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    pub fn coords(&self, vertex: usize) -> (usize, usize) {
        (vertex / self.width, vertex % self.width)
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.height, self.width)
    }
}

/// A simplex of the triangulated grid with its vertex ids sorted ascending.
///
/// The derived ordering compares dimension first, then the vertex tuple
/// lexicographically, which is exactly the tie-break the filtration needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Simplex {
    Vertex(usize),
    Edge([usize; 2]),
    Triangle([usize; 3]),
}

impl Simplex {
    pub fn dim(&self) -> usize {
        match self {
            Simplex::Vertex(_) => 0,
            Simplex::Edge(_) => 1,
            Simplex::Triangle(_) => 2,
        }
    }

    pub fn vertices(&self) -> &[usize] {
        match self {
            Simplex::Vertex(v) => std::slice::from_ref(v),
            Simplex::Edge(e) => e,
            Simplex::Triangle(t) => t,
        }
    }

    /// Codimension-1 faces. Empty for vertices.
    pub fn facets(&self) -> Vec<Simplex> {
        match *self {
            Simplex::Vertex(_) => Vec::new(),
            Simplex::Edge([a, b]) => vec![Simplex::Vertex(a), Simplex::Vertex(b)],
            Simplex::Triangle([a, b, c]) => vec![Simplex::Edge([a, b]), Simplex::Edge([a, c]), Simplex::Edge([b, c])],
        }
    }
}

/// The full triangulated rectangle. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreudenthalComplex {
    shape: GridShape,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
}

impl FreudenthalComplex {
    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn num_vertices(&self) -> usize {
        self.shape.len()
    }

    /// Edges in lexicographic order of their sorted vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Triangles in lexicographic order of their sorted vertex triples.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// All simplices: vertices, then edges, then triangles.
    pub fn simplices(&self) -> impl Iterator<Item = Simplex> + '_ {
        (0..self.num_vertices())
            .map(Simplex::Vertex)
            .chain(self.edges.iter().map(|&e| Simplex::Edge(e)))
            .chain(self.triangles.iter().map(|&t| Simplex::Triangle(t)))
    }

    pub fn contains_edge(&self, a: usize, b: usize) -> bool {
        let key = if a < b { [a, b] } else { [b, a] };
        self.edges.binary_search(&key).is_ok()
    }

    /// Vertices sharing an edge with `v`, ascending.
    pub fn vertex_neighbors(&self, v: usize) -> Result<Vec<usize>> {
        let n = self.num_vertices();
        if v >= n {
            return Err(TopoError::IndexOutOfRange { index: v, len: n });
        }
        let (h, w) = (self.shape.height as isize, self.shape.width as isize);
        let (i, j) = self.shape.coords(v);
        let (i, j) = (i as isize, j as isize);
        // Axis neighbours plus the two ends of the diagonals through v.
        const OFFSETS: [(isize, isize); 6] = [(-1, -1), (-1, 0), (0, -1), (0, 1), (1, 0), (1, 1)];
        let mut out: Vec<usize> = OFFSETS
            .iter()
            .map(|&(di, dj)| (i + di, j + dj))
            .filter(|&(r, c)| r >= 0 && r < h && c >= 0 && c < w)
            .map(|(r, c)| (r * w + c) as usize)
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }
}

pub fn build_complex(shape: GridShape) -> FreudenthalComplex {
    let (h, w) = (shape.height, shape.width);
    let num_edges = (h - 1) * w + h * (w - 1) + (h - 1) * (w - 1);
    let mut edges = Vec::with_capacity(num_edges);
    let mut triangles = Vec::with_capacity(2 * (h - 1) * (w - 1));

    // For a fixed lower endpoint v the partners v+1 < v+w < v+w+1 come out in
    // ascending order, so row-major generation is already lexicographic.
    for i in 0..h {
        for j in 0..w {
            let v = i * w + j;
            let right = j + 1 < w;
            let down = i + 1 < h;
            if right {
                edges.push([v, v + 1]);
            }
            if down {
                edges.push([v, v + w]);
            }
            if right && down {
                edges.push([v, v + w + 1]);
                triangles.push([v, v + 1, v + w + 1]);
                triangles.push([v, v + w, v + w + 1]);
            }
        }
    }
    debug_assert_eq!(edges.len(), num_edges);

    FreudenthalComplex {
        shape,
        edges,
        triangles,
    }
}

/// Free-function form of [`FreudenthalComplex::vertex_neighbors`].
pub fn vertex_neighbors(complex: &FreudenthalComplex, v: usize) -> Result<Vec<usize>> {
    complex.vertex_neighbors(v)
}

pub fn euler_characteristic(complex: &FreudenthalComplex) -> i64 {
    complex.euler_characteristic()
}
