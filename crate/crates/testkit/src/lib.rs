//! Brute-force oracles and random field generators for the test suites.
//!
//! Nothing here calls into the persistence, filtration or loss code of
//! `toporeg-core`: grid adjacency is re-derived from coordinates and
//! components are found by plain flood fill, so agreement with the library is
//! evidence rather than tautology.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use toporeg_core::{GridShape, MultiChannelField, ScalarField};

/// Edges of the triangulated grid, re-derived from coordinates.
pub fn grid_edges(h: usize, w: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..h {
        for j in 0..w {
            let v = i * w + j;
            if j + 1 < w {
                out.push((v, v + 1));
            }
            if i + 1 < h {
                out.push((v, v + w));
            }
            if i + 1 < h && j + 1 < w {
                out.push((v, v + w + 1));
            }
        }
    }
    out
}

pub fn grid_triangles(h: usize, w: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for i in 0..h.saturating_sub(1) {
        for j in 0..w.saturating_sub(1) {
            let (a, b, c, d) = (i * w + j, i * w + j + 1, (i + 1) * w + j, (i + 1) * w + j + 1);
            out.push([a, b, d]);
            out.push([a, c, d]);
        }
    }
    out
}

pub fn adjacency(h: usize, w: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); h * w];
    for (a, b) in grid_edges(h, w) {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

/// Distinct values in descending order.
fn levels(values: &[f64]) -> Vec<f64> {
    let mut lv: Vec<f64> = values.to_vec();
    lv.sort_by(|a, b| b.total_cmp(a));
    lv.dedup();
    lv
}

/// Dimension-0 `(birth, death)` multiset of the super-level filtration by
/// flood-filling every super-level set and applying the elder rule between
/// consecutive levels. The surviving component is reported with death equal
/// to the global minimum. Sorted descending.
pub fn sweep_ph0(h: usize, w: usize, values: &[f64]) -> Vec<(f64, f64)> {
    let n = h * w;
    let adj = adjacency(h, w);
    // Component birth carried by each vertex from the previous level.
    let mut prev_birth: Vec<Option<f64>> = vec![None; n];
    let mut prev_label: Vec<Option<usize>> = vec![None; n];
    let mut pairs = Vec::new();

    for &t in &levels(values) {
        let mut label = vec![usize::MAX; n];
        let mut births = Vec::new();
        let mut next_label = 0;
        for s in 0..n {
            if values[s] < t || label[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            label[s] = next_label;
            let mut members = Vec::new();
            while let Some(v) = stack.pop() {
                members.push(v);
                for &u in &adj[v] {
                    if values[u] >= t && label[u] == usize::MAX {
                        label[u] = next_label;
                        stack.push(u);
                    }
                }
            }
            // Distinct earlier components absorbed into this one.
            let mut olds: BTreeSet<usize> = BTreeSet::new();
            let mut old_births = Vec::new();
            for &v in &members {
                if let (Some(l), Some(b)) = (prev_label[v], prev_birth[v]) {
                    if olds.insert(l) {
                        old_births.push(b);
                    }
                }
            }
            let birth = if old_births.is_empty() {
                t
            } else {
                old_births.sort_by(|a, b| b.total_cmp(a));
                for &b in &old_births[1..] {
                    pairs.push((b, t));
                }
                old_births[0]
            };
            births.push(birth);
            next_label += 1;
        }
        for v in 0..n {
            if label[v] != usize::MAX {
                prev_label[v] = Some(label[v]);
                prev_birth[v] = Some(births[label[v]]);
            }
        }
    }

    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut survivors: BTreeSet<usize> = BTreeSet::new();
    for v in 0..n {
        if let Some(l) = prev_label[v] {
            if survivors.insert(l) {
                pairs.push((prev_birth[v].unwrap(), min));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    pairs
}

/// Euler characteristic of the super-level subcomplex `{σ : min f(σ) >= t}`.
pub fn superlevel_euler(h: usize, w: usize, values: &[f64], t: f64) -> i64 {
    let v = values.iter().filter(|&&x| x >= t).count() as i64;
    let e = grid_edges(h, w)
        .iter()
        .filter(|&&(a, b)| values[a] >= t && values[b] >= t)
        .count() as i64;
    let f = grid_triangles(h, w)
        .iter()
        .filter(|tri| tri.iter().all(|&x| values[x] >= t))
        .count() as i64;
    v - e + f
}

/// Vertices strictly above all of their neighbours.
pub fn local_maxima(h: usize, w: usize, values: &[f64]) -> usize {
    adjacency(h, w)
        .iter()
        .enumerate()
        .filter(|(v, nbrs)| nbrs.iter().all(|&u| values[*v] > values[u]))
        .count()
}

pub fn distinct_values(values: &[f64]) -> Vec<f64> {
    levels(values)
}

/// Central differences of `loss` at `x` with step `h`.
pub fn central_differences(x: &[f64], h: f64, mut loss: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = loss(&probe);
            probe[i] = orig - h;
            let down = loss(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest violation of the entrywise check: relative error against `rel`
/// where the analytic entry is nonzero, absolute error against `abs_zero`
/// where it is zero. Returns `None` if every entry passes.
pub fn gradient_mismatch(analytic: &[f64], numeric: &[f64], rel: f64, abs_zero: f64) -> Option<(usize, f64, f64)> {
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let ok = if a == 0.0 {
            n.abs() <= abs_zero
        } else {
            (a - n).abs() <= rel * a.abs().max(n.abs())
        };
        if !ok {
            return Some((i, a, n));
        }
    }
    None
}

pub fn shape(h: usize, w: usize) -> GridShape {
    GridShape::new(h, w).expect("positive shape")
}

/// Integer values drawn uniformly from `lo..=hi`, duplicates allowed.
pub fn integer_field<R: Rng>(rng: &mut R, h: usize, w: usize, lo: i64, hi: i64) -> ScalarField {
    let values = (0..h * w).map(|_| rng.gen_range(lo..=hi) as f64).collect();
    ScalarField::new(shape(h, w), values).unwrap()
}

/// Pairwise-distinct values: a random permutation of `0..n` scaled by
/// `spacing`, plus jitter below `spacing / 10`. Minimum gap is at least
/// `0.8 * spacing`.
pub fn distinct_field<R: Rng>(rng: &mut R, h: usize, w: usize, spacing: f64) -> ScalarField {
    let mut ranks: Vec<usize> = (0..h * w).collect();
    ranks.shuffle(rng);
    let values = ranks
        .into_iter()
        .map(|r| r as f64 * spacing + rng.gen_range(0.0..spacing / 10.0))
        .collect();
    ScalarField::new(shape(h, w), values).unwrap()
}

/// Multi-channel field whose per-pixel norms are pairwise distinct (norms
/// drawn like [`distinct_field`], offset away from zero).
pub fn distinct_norm_field<R: Rng>(rng: &mut R, h: usize, w: usize, c: usize, spacing: f64) -> MultiChannelField {
    let norms = distinct_field(rng, h, w, spacing);
    let mut values = Vec::with_capacity(h * w * c);
    for &r in norms.values() {
        let dir: Vec<f64> = (0..c).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
        let target = r + spacing;
        values.extend(dir.iter().map(|x| x / len * target));
    }
    MultiChannelField::new(shape(h, w), c, values).unwrap()
}

pub fn uniform_field<R: Rng>(rng: &mut R, h: usize, w: usize) -> ScalarField {
    let values = (0..h * w).map(|_| rng.gen::<f64>()).collect();
    ScalarField::new(shape(h, w), values).unwrap()
}

/// Smallest gap between distinct sorted values.
pub fn min_gap(values: &[f64]) -> f64 {
    let lv = levels(values);
    lv.windows(2).map(|p| p[0] - p[1]).fold(f64::INFINITY, f64::min)
}
