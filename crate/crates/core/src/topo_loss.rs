//! Penalty on all but the `k` longest dimension-0 bars,
//! `sum_{i > k} (d_i - b_i)^2`, and its subgradient.
//!
//! The gradient is routed to the critical vertices only: each penalized pair
//! adds `2 (b - d)` at its birth vertex and `-2 (b - d)` at its death vertex.

use std::cmp::Ordering;

use crate::error::Result;
use crate::field::{project_channels, project_channels_grad, LossGrad, MultiChannelField, ScalarField};
use crate::persistence::{diagram, PersistenceDiagram, PersistencePair};

/// Default number of protected bars.
pub const DEFAULT_K: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TopoPenaltyConfig {
    /// Number of longest dimension-0 bars left unpenalized.
    pub k: usize,
}

impl TopoPenaltyConfig {
    pub fn new(k: usize) -> Self {
        Self { k }
    }
}

impl Default for TopoPenaltyConfig {
    fn default() -> Self {
        Self { k: DEFAULT_K }
    }
}

fn longest_first(a: &&PersistencePair, b: &&PersistencePair) -> Ordering {
    b.persistence()
        .total_cmp(&a.persistence())
        .then_with(|| b.birth.total_cmp(&a.birth))
        .then_with(|| a.birth_vertex.cmp(&b.birth_vertex))
}

/// Dimension-0 pairs beyond the `k` longest, in descending persistence.
pub fn penalized_pairs<'d>(diagram: &'d PersistenceDiagram, config: &TopoPenaltyConfig) -> Vec<&'d PersistencePair> {
    let mut bars: Vec<&PersistencePair> = diagram.pairs_in_dim(0).collect();
    bars.sort_by(longest_first);
    bars.into_iter().skip(config.k).collect()
}

pub fn topo_penalty(diagram: &PersistenceDiagram, config: &TopoPenaltyConfig) -> f64 {
    penalized_pairs(diagram, config)
        .iter()
        .map(|p| {
            let d = p.death - p.birth;
            d * d
        })
        .sum()
}

pub fn topo_loss_with_grad(f: &ScalarField, config: &TopoPenaltyConfig) -> Result<LossGrad<ScalarField>> {
    let dgm = diagram(f, 0)?;
    let mut value = 0.0;
    let mut grad = vec![0.0; f.shape().len()];
    for p in penalized_pairs(&dgm, config) {
        let gap = p.death - p.birth;
        value += gap * gap;
        grad[p.birth_vertex] -= 2.0 * gap;
        grad[p.death_vertex] += 2.0 * gap;
    }
    Ok(LossGrad {
        value,
        grad: ScalarField::new(f.shape(), grad)?,
    })
}

/// Project channels to their per-pixel 2-norm, penalize, and pull the
/// gradient back through the projection.
pub fn topo_loss_multichannel(
    h: &MultiChannelField,
    config: &TopoPenaltyConfig,
) -> Result<LossGrad<MultiChannelField>> {
    let projected = project_channels(h);
    let scalar = topo_loss_with_grad(&projected, config)?;
    Ok(LossGrad {
        value: scalar.value,
        grad: project_channels_grad(h, &scalar.grad)?,
    })
}
