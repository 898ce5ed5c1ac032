//! The computations behind each subcommand, free of argument parsing and
//! file handling.

use toporeg_core::dense_losses::total_variation;
use toporeg_core::field::project_channels;
use toporeg_core::metrics::{depth_metrics, miou_binary, DepthMetrics, ValidityMask};
use toporeg_core::topo_loss::{topo_loss_multichannel, topo_loss_with_grad};
use toporeg_core::{diagram, MultiChannelField, PersistenceDiagram, ScalarField, TopoPenaltyConfig};

use crate::error::{CliError, Result};

/// The scalar function that gets filtered: the raw plane of a one-channel
/// field, or the per-pixel channel norm when `project` is set or there is
/// more than one channel.
pub fn filter_function(h: &MultiChannelField, project: bool) -> ScalarField {
    match h.as_scalar() {
        Some(plane) if !project => plane,
        _ => project_channels(h),
    }
}

pub fn field_diagram(h: &MultiChannelField, project: bool, max_dim: usize) -> Result<PersistenceDiagram> {
    Ok(diagram(&filter_function(h, project), max_dim)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizerWeights {
    pub k: usize,
    pub tv: f64,
    pub top: f64,
    pub project: bool,
}

impl Default for RegularizerWeights {
    fn default() -> Self {
        Self {
            k: toporeg_core::topo_loss::DEFAULT_K,
            tv: 1.0,
            top: 0.001,
            project: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularizerEval {
    pub topo: f64,
    pub tv: f64,
    pub objective: f64,
    /// Gradient of `top * topo + tv * tv`, laid out like the input.
    pub grad: MultiChannelField,
}

pub fn regularizer(h: &MultiChannelField, w: &RegularizerWeights) -> Result<RegularizerEval> {
    let cfg = TopoPenaltyConfig::new(w.k);
    let (topo, topo_grad) = match h.as_scalar() {
        Some(plane) if !w.project => {
            let lg = topo_loss_with_grad(&plane, &cfg)?;
            (lg.value, lg.grad.into_values())
        }
        _ => {
            let lg = topo_loss_multichannel(h, &cfg)?;
            (lg.value, lg.grad.into_values())
        }
    };
    let tv = total_variation(h);
    let grad: Vec<f64> = topo_grad
        .iter()
        .zip(tv.grad.values())
        .map(|(gt, gv)| w.top * gt + w.tv * gv)
        .collect();
    Ok(RegularizerEval {
        topo,
        tv: tv.value,
        objective: w.top * topo + w.tv * tv.value,
        grad: MultiChannelField::new(h.shape(), h.channels(), grad)
            .map_err(|e| CliError::Numeric(format!("non-finite gradient: {e}")))?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizeConfig {
    pub weights: RegularizerWeights,
    pub steps: usize,
    pub lr: f64,
    /// Halvings tried per step before the step is skipped.
    pub max_halvings: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            weights: RegularizerWeights::default(),
            steps: 100,
            lr: 0.1,
            max_halvings: 40,
        }
    }
}

impl OptimizeConfig {
    /// Step size below which plain gradient descent cannot overshoot on a
    /// single pair or a single TV difference: `2 / (16 tv + 4 top)`.
    pub fn stability_bound(&self) -> f64 {
        let curvature = 16.0 * self.weights.tv + 4.0 * self.weights.top;
        if curvature > 0.0 {
            2.0 / curvature
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub topo: f64,
    pub tv: f64,
    pub objective: f64,
    pub lr: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub field: MultiChannelField,
    /// Row 0 is the input; row `s` is the state after step `s`.
    pub trace: Vec<TraceRow>,
}

/// Gradient descent on `top * topo + tv * tv` with backtracking: a step that
/// would raise the objective is retried with half the step size.
pub fn optimize(h: &MultiChannelField, cfg: &OptimizeConfig) -> Result<OptimizeOutcome> {
    if cfg.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(CliError::Usage(format!("--lr must be positive, got {}", cfg.lr)));
    }
    let (shape, channels) = (h.shape(), h.channels());
    let mut current = h.clone();
    let mut eval = regularizer(&current, &cfg.weights)?;
    let mut lr = cfg.lr;
    let mut trace = vec![TraceRow {
        step: 0,
        topo: eval.topo,
        tv: eval.tv,
        objective: eval.objective,
        lr,
    }];

    for step in 1..=cfg.steps {
        if eval.grad.values().iter().any(|&g| g != 0.0) {
            for _ in 0..=cfg.max_halvings {
                let proposal: Vec<f64> = current
                    .values()
                    .iter()
                    .zip(eval.grad.values())
                    .map(|(x, g)| x - lr * g)
                    .collect();
                if let Some(bad) = proposal.iter().position(|v| !v.is_finite()) {
                    return Err(CliError::Divergence {
                        step,
                        message: format!("value at index {bad} is not finite"),
                    });
                }
                let candidate = MultiChannelField::new(shape, channels, proposal)?;
                let next = regularizer(&candidate, &cfg.weights).map_err(|e| CliError::Divergence {
                    step,
                    message: e.to_string(),
                })?;
                if !next.objective.is_finite() {
                    return Err(CliError::Divergence {
                        step,
                        message: "objective is not finite".into(),
                    });
                }
                if next.objective <= eval.objective {
                    current = candidate;
                    eval = next;
                    break;
                }
                lr *= 0.5;
            }
        }
        trace.push(TraceRow {
            step,
            topo: eval.topo,
            tv: eval.tv,
            objective: eval.objective,
            lr,
        });
    }
    Ok(OptimizeOutcome { field: current, trace })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Evaluation {
    Depth(DepthMetrics),
    Segmentation { miou: f64 },
}

impl Evaluation {
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Evaluation::Depth(m) => vec![
                ("mae", m.mae),
                ("rmse", m.rmse),
                ("abs_rel", m.abs_rel),
                ("mae_log10", m.mae_log10),
                ("rmse_log10", m.rmse_log10),
                ("delta1", m.delta1),
                ("delta2", m.delta2),
                ("delta3", m.delta3),
            ],
            Evaluation::Segmentation { miou } => vec![("miou", miou)],
        }
    }
}

pub fn evaluate_depth(gt: &ScalarField, pred: &ScalarField, mask: Option<&ValidityMask>) -> Result<Evaluation> {
    Ok(Evaluation::Depth(depth_metrics(gt, pred, mask)?))
}

pub fn evaluate_segmentation(gt: &ScalarField, pred: &ScalarField, threshold: f64) -> Result<Evaluation> {
    Ok(Evaluation::Segmentation {
        miou: miou_binary(gt, pred, threshold)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use toporeg_core::GridShape;

    fn row(v: &[f64]) -> MultiChannelField {
        ScalarField::from_rows(&[v]).unwrap().to_multichannel()
    }

    #[test]
    fn regularizer_examples() {
        let w = RegularizerWeights {
            k: 1,
            tv: 0.0,
            top: 1.0,
            project: false,
        };
        let e = regularizer(&row(&[3.0, 1.0, 4.0, 1.0, 5.0]), &w).unwrap();
        assert_eq!((e.topo, e.objective), (13.0, 13.0));

        let h = ScalarField::from_rows(&[[0.0, 1.0], [0.0, 1.0]])
            .unwrap()
            .to_multichannel();
        let w = RegularizerWeights {
            k: 8,
            tv: 1.0,
            top: 0.0,
            project: false,
        };
        assert_eq!(regularizer(&h, &w).unwrap().objective, 2.0);

        let flat = MultiChannelField::new(GridShape::new(3, 3).unwrap(), 2, vec![0.5; 18]).unwrap();
        let e = regularizer(&flat, &RegularizerWeights::default()).unwrap();
        assert_eq!((e.topo, e.tv), (0.0, 0.0));
    }

    #[test]
    fn optimize_one_by_five() {
        let cfg = OptimizeConfig {
            weights: RegularizerWeights {
                k: 1,
                tv: 0.0,
                top: 1.0,
                project: false,
            },
            steps: 200,
            lr: 0.1,
            ..OptimizeConfig::default()
        };
        let out = optimize(&row(&[3.0, 1.0, 4.0, 1.0, 5.0]), &cfg).unwrap();
        assert_eq!(out.trace.len(), 201);
        assert!(out.trace.last().unwrap().topo < 1e-3);
        assert!(out.trace.windows(2).all(|w| w[1].objective <= w[0].objective));
    }

    #[test]
    fn optimize_leaves_simple_field_alone() {
        let h = row(&[1.0, 2.0, 3.0]);
        let cfg = OptimizeConfig {
            weights: RegularizerWeights {
                k: 1,
                tv: 0.0,
                top: 1.0,
                project: false,
            },
            ..OptimizeConfig::default()
        };
        let out = optimize(&h, &cfg).unwrap();
        assert_eq!(out.field, h);
    }

    #[test]
    fn optimize_rejects_bad_settings() {
        let h = row(&[1.0]);
        let zero_steps = OptimizeConfig {
            steps: 0,
            ..OptimizeConfig::default()
        };
        assert!(matches!(optimize(&h, &zero_steps), Err(CliError::Usage(_))));
        let bad_lr = OptimizeConfig {
            lr: -1.0,
            ..OptimizeConfig::default()
        };
        assert!(matches!(optimize(&h, &bad_lr), Err(CliError::Usage(_))));
    }

    #[test]
    fn stability_bound() {
        let cfg = OptimizeConfig {
            weights: RegularizerWeights {
                k: 1,
                tv: 0.0,
                top: 1.0,
                project: false,
            },
            ..OptimizeConfig::default()
        };
        assert_eq!(cfg.stability_bound(), 0.5);
    }
}
