//! Depth-estimation benchmark metrics and binary mIoU.

use crate::error::{Result, TopoError};
use crate::field::ScalarField;
use crate::grid::GridShape;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthMetrics {
    pub mae: f64,
    pub rmse: f64,
    pub abs_rel: f64,
    pub mae_log10: f64,
    pub rmse_log10: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
}

/// Per-pixel validity flags; `true` pixels take part in the metrics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityMask {
    shape: GridShape,
    flags: Vec<bool>,
}

impl ValidityMask {
    pub fn new(shape: GridShape, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != shape.len() {
            return Err(TopoError::DimensionMismatch {
                expected: format!("{} flags for {shape}", shape.len()),
                found: format!("{} flags", flags.len()),
            });
        }
        Ok(Self { shape, flags })
    }

    pub fn all_valid(shape: GridShape) -> Self {
        Self {
            shape,
            flags: vec![true; shape.len()],
        }
    }

    /// Nonzero pixels are valid.
    pub fn from_field(field: &ScalarField) -> Self {
        Self {
            shape: field.shape(),
            flags: field.values().iter().map(|&v| v != 0.0).collect(),
        }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

pub fn depth_metrics(y: &ScalarField, yhat: &ScalarField, mask: Option<&ValidityMask>) -> Result<DepthMetrics> {
    y.ensure_same_shape(yhat)?;
    if let Some(m) = mask {
        if m.shape != y.shape() {
            return Err(TopoError::DimensionMismatch {
                expected: y.shape().to_string(),
                found: m.shape.to_string(),
            });
        }
    }

    let (mut abs, mut sq, mut rel, mut abs_log, mut sq_log) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut within = [0usize; 3];
    let mut n = 0usize;
    for (i, (&a, &b)) in y.values().iter().zip(yhat.values()).enumerate() {
        if mask.is_some_and(|m| !m.flags[i]) {
            continue;
        }
        if a <= 0.0 || b <= 0.0 {
            return Err(TopoError::Domain(format!(
                "depth metrics need positive values, pixel {i} has y={a}, yhat={b}"
            )));
        }
        n += 1;
        let diff = a - b;
        abs += diff.abs();
        sq += diff * diff;
        rel += diff.abs() / b;
        let dl = a.log10() - b.log10();
        abs_log += dl.abs();
        sq_log += dl * dl;
        let ratio = (a / b).max(b / a);
        for (k, count) in within.iter_mut().enumerate() {
            if ratio < 1.25f64.powi(k as i32 + 1) {
                *count += 1;
            }
        }
    }
    if n == 0 {
        return Err(TopoError::EmptyMask);
    }
    let nf = n as f64;
    Ok(DepthMetrics {
        mae: abs / nf,
        rmse: (sq / nf).sqrt(),
        abs_rel: rel / nf,
        mae_log10: abs_log / nf,
        rmse_log10: (sq_log / nf).sqrt(),
        delta1: within[0] as f64 / nf,
        delta2: within[1] as f64 / nf,
        delta3: within[2] as f64 / nf,
    })
}

/// Two-class mean IoU after binarizing both inputs (`value >= threshold` is
/// foreground). A class absent from both inputs scores 1.
pub fn miou_binary(gt: &ScalarField, pred: &ScalarField, threshold: f64) -> Result<f64> {
    gt.ensure_same_shape(pred)?;
    // [class][intersection, union]
    let mut counts = [[0usize; 2]; 2];
    for (&g, &p) in gt.values().iter().zip(pred.values()) {
        let g = g >= threshold;
        let p = p >= threshold;
        for (class, c) in counts.iter_mut().enumerate() {
            let want = class == 1;
            let (in_g, in_p) = (g == want, p == want);
            if in_g && in_p {
                c[0] += 1;
            }
            if in_g || in_p {
                c[1] += 1;
            }
        }
    }
    let iou = |[inter, union]: [usize; 2]| {
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    };
    Ok((iou(counts[0]) + iou(counts[1])) / 2.0)
}
