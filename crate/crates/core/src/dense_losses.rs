//! Dense-prediction losses and the weighted training objective.
//!
//! Sums are unnormalized by default; pass [`Reduction::Mean`] to divide by the
//! pixel count. Only total variation carries an analytic gradient here, the
//! supervised terms are evaluation-only.

use crate::error::{Result, TopoError};
use crate::field::{LossGrad, MultiChannelField, ScalarField};
use crate::topo_loss::{topo_loss_multichannel, TopoPenaltyConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Reduction {
    #[default]
    Sum,
    Mean,
}

impl Reduction {
    fn apply(self, total: f64, count: usize) -> f64 {
        match self {
            Reduction::Sum => total,
            Reduction::Mean => total / count as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Ten => x.log10(),
        }
    }
}

/// Weights of the five objective terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveWeights {
    pub lambda_d: f64,
    pub lambda_g: f64,
    pub lambda_s: f64,
    pub lambda_tv: f64,
    pub lambda_top: f64,
}

impl ObjectiveWeights {
    pub fn new(lambda_d: f64, lambda_g: f64, lambda_s: f64, lambda_tv: f64, lambda_top: f64) -> Result<Self> {
        let w = Self {
            lambda_d,
            lambda_g,
            lambda_s,
            lambda_tv,
            lambda_top,
        };
        let all = [lambda_d, lambda_g, lambda_s, lambda_tv, lambda_top];
        if all.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(TopoError::InvalidParameter(format!(
                "objective weights must be finite and non-negative, got {all:?}"
            )));
        }
        Ok(w)
    }

    /// Weights used for the U-Net runs (also the [`Default`]).
    pub fn unet() -> Self {
        Self {
            lambda_d: 0.1,
            lambda_g: 1.0,
            lambda_s: 1.0,
            lambda_tv: 1.0,
            lambda_top: 0.001,
        }
    }

    /// Weights used for the DenseDepth runs.
    pub fn dense_depth() -> Self {
        Self {
            lambda_tv: 0.1,
            lambda_top: 0.0001,
            ..Self::unet()
        }
    }
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self::unet()
    }
}

pub fn mse_loss(y: &ScalarField, yhat: &ScalarField) -> Result<f64> {
    mse_loss_with(y, yhat, Reduction::Sum)
}

pub fn mse_loss_with(y: &ScalarField, yhat: &ScalarField, reduction: Reduction) -> Result<f64> {
    y.ensure_same_shape(yhat)?;
    let total = y
        .values()
        .iter()
        .zip(yhat.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(reduction.apply(total, y.values().len()))
}

/// `sqrt(sum (ln y - ln yhat)^2)`.
pub fn depth_loss(y: &ScalarField, yhat: &ScalarField) -> Result<f64> {
    depth_loss_with(y, yhat, LogBase::Natural, Reduction::Sum)
}

pub fn depth_loss_with(y: &ScalarField, yhat: &ScalarField, base: LogBase, reduction: Reduction) -> Result<f64> {
    y.ensure_same_shape(yhat)?;
    let mut total = 0.0;
    for (i, (&a, &b)) in y.values().iter().zip(yhat.values()).enumerate() {
        if a <= 0.0 || b <= 0.0 {
            return Err(TopoError::Domain(format!(
                "depth loss needs positive values, pixel {i} has y={a}, yhat={b}"
            )));
        }
        let d = base.log(a) - base.log(b);
        total += d * d;
    }
    Ok(reduction.apply(total, y.values().len()).sqrt())
}

fn replicate(field: &ScalarField, r: isize, c: isize) -> f64 {
    let s = field.shape();
    let r = r.clamp(0, s.height() as isize - 1) as usize;
    let c = c.clamp(0, s.width() as isize - 1) as usize;
    field.get(r, c)
}

/// Horizontal and vertical Sobel responses with replicate padding.
pub fn sobel(field: &ScalarField) -> (ScalarField, ScalarField) {
    let s = field.shape();
    let mut gx = Vec::with_capacity(s.len());
    let mut gy = Vec::with_capacity(s.len());
    for i in 0..s.height() as isize {
        for j in 0..s.width() as isize {
            let p = |di: isize, dj: isize| replicate(field, i + di, j + dj);
            gx.push((p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1)));
            gy.push((p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1)));
        }
    }
    (
        ScalarField::new(s, gx).expect("sobel of finite field is finite"),
        ScalarField::new(s, gy).expect("sobel of finite field is finite"),
    )
}

pub fn sobel_gradient_loss(y: &ScalarField, yhat: &ScalarField) -> Result<f64> {
    sobel_gradient_loss_with(y, yhat, Reduction::Sum)
}

pub fn sobel_gradient_loss_with(y: &ScalarField, yhat: &ScalarField, reduction: Reduction) -> Result<f64> {
    y.ensure_same_shape(yhat)?;
    let (yx, yy) = sobel(y);
    let (px, py) = sobel(yhat);
    let total: f64 = yx
        .values()
        .iter()
        .zip(px.values())
        .chain(yy.values().iter().zip(py.values()))
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(reduction.apply(total, y.values().len()))
}

/// Windowed SSIM settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsimParams {
    /// Side of the square uniform window; must be odd.
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
    /// Dynamic range `L` of the inputs.
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 7,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

impl SsimParams {
    pub fn with_range(dynamic_range: f64) -> Self {
        Self {
            dynamic_range,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dynamic_range > 0.0 && self.dynamic_range.is_finite()) {
            return Err(TopoError::InvalidParameter(format!(
                "SSIM dynamic range must be positive, got {}",
                self.dynamic_range
            )));
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(TopoError::InvalidParameter(format!(
                "SSIM window must be odd, got {}",
                self.window
            )));
        }
        Ok(())
    }

    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }
}

/// Mean of the per-pixel SSIM map.
pub fn ssim(y: &ScalarField, yhat: &ScalarField, params: &SsimParams) -> Result<f64> {
    y.ensure_same_shape(yhat)?;
    params.validate()?;
    let s = y.shape();
    let r = (params.window / 2) as isize;
    let n = (params.window * params.window) as f64;
    let (c1, c2) = (params.c1(), params.c2());

    let mut total = 0.0;
    for i in 0..s.height() as isize {
        for j in 0..s.width() as isize {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for di in -r..=r {
                for dj in -r..=r {
                    let a = replicate(y, i + di, j + dj);
                    let b = replicate(yhat, i + di, j + dj);
                    sx += a;
                    sy += b;
                    sxx += a * a;
                    syy += b * b;
                    sxy += a * b;
                }
            }
            let (mx, my) = (sx / n, sy / n);
            let vx = (sxx / n - mx * mx).max(0.0);
            let vy = (syy / n - my * my).max(0.0);
            let cov = sxy / n - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    Ok(total / s.len() as f64)
}

/// `(1 - SSIM) / 2`.
pub fn ssim_loss(y: &ScalarField, yhat: &ScalarField, params: &SsimParams) -> Result<f64> {
    Ok((1.0 - ssim(y, yhat, params)?) / 2.0)
}

/// Sum of squared forward differences along rows and columns, per channel.
pub fn total_variation(h: &MultiChannelField) -> LossGrad<MultiChannelField> {
    let s = h.shape();
    let c = h.channels();
    let (rows, cols) = (s.height(), s.width());
    let v = h.values();
    let mut grad = vec![0.0; v.len()];
    let mut value = 0.0;
    let idx = |i: usize, j: usize, k: usize| (i * cols + j) * c + k;

    for i in 0..rows {
        for j in 0..cols {
            for k in 0..c {
                let cur = idx(i, j, k);
                let mut step = |next: usize| {
                    let d = v[next] - v[cur];
                    value += d * d;
                    grad[next] += 2.0 * d;
                    grad[cur] -= 2.0 * d;
                };
                if i + 1 < rows {
                    step(idx(i + 1, j, k));
                }
                if j + 1 < cols {
                    step(idx(i, j + 1, k));
                }
            }
        }
    }
    LossGrad {
        value,
        grad: MultiChannelField::new(s, c, grad).expect("gradient layout matches input"),
    }
}

/// Weighted sum of depth, Sobel, SSIM, total variation (on `h_a`) and the
/// topological penalty (on `h_b`). Terms with zero weight are skipped.
pub fn combined_objective(
    y: &ScalarField,
    yhat: &ScalarField,
    h_a: &MultiChannelField,
    h_b: &MultiChannelField,
    weights: &ObjectiveWeights,
    k: usize,
) -> Result<f64> {
    combined_objective_with(y, yhat, h_a, h_b, weights, k, &SsimParams::default())
}

pub fn combined_objective_with(
    y: &ScalarField,
    yhat: &ScalarField,
    h_a: &MultiChannelField,
    h_b: &MultiChannelField,
    weights: &ObjectiveWeights,
    k: usize,
    ssim_params: &SsimParams,
) -> Result<f64> {
    y.ensure_same_shape(yhat)?;
    let mut total = 0.0;
    if weights.lambda_d != 0.0 {
        total += weights.lambda_d * depth_loss(y, yhat)?;
    }
    if weights.lambda_g != 0.0 {
        total += weights.lambda_g * sobel_gradient_loss(y, yhat)?;
    }
    if weights.lambda_s != 0.0 {
        total += weights.lambda_s * ssim_loss(y, yhat, ssim_params)?;
    }
    if weights.lambda_tv != 0.0 {
        total += weights.lambda_tv * total_variation(h_a).value;
    }
    if weights.lambda_top != 0.0 {
        total += weights.lambda_top * topo_loss_multichannel(h_b, &TopoPenaltyConfig::new(k))?.value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridShape;
    use std::f64::consts::E;

    fn field(rows: &[&[f64]]) -> ScalarField {
        ScalarField::from_rows(rows).unwrap()
    }

    #[test]
    fn mse_examples() {
        let a = field(&[&[0.0, 0.0]]);
        assert_eq!(mse_loss(&a, &a).unwrap(), 0.0);
        assert_eq!(mse_loss(&a, &field(&[&[1.0, 2.0]])).unwrap(), 5.0);
        assert_eq!(mse_loss(&field(&[&[3.0]]), &field(&[&[1.0]])).unwrap(), 4.0);
        assert_eq!(mse_loss_with(&a, &field(&[&[1.0, 2.0]]), Reduction::Mean).unwrap(), 2.5);
        assert!(mse_loss(&a, &field(&[&[1.0], &[2.0]])).is_err());
    }

    #[test]
    fn depth_examples() {
        let y = field(&[&[E]]);
        assert_eq!(depth_loss(&y, &y).unwrap(), 0.0);
        assert!((depth_loss(&y, &field(&[&[1.0]])).unwrap() - 1.0).abs() < 1e-15);
        let loss = depth_loss(&field(&[&[E, E]]), &field(&[&[1.0, 1.0]])).unwrap();
        assert!((loss - 2f64.sqrt()).abs() < 1e-15);
        let ten = depth_loss_with(&field(&[&[100.0]]), &field(&[&[1.0]]), LogBase::Ten, Reduction::Sum).unwrap();
        assert!((ten - 2.0).abs() < 1e-15);
        assert!(matches!(
            depth_loss(&field(&[&[0.0]]), &field(&[&[1.0]])),
            Err(TopoError::Domain(_))
        ));
    }

    #[test]
    fn sobel_examples() {
        let ramp = field(&[&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]]);
        let zero = ScalarField::zeros(ramp.shape());
        // Per row the horizontal response is 4, 8, 4 with replicate padding.
        assert_eq!(sobel_gradient_loss(&ramp, &zero).unwrap(), 48.0);
        assert_eq!(sobel_gradient_loss(&ramp, &ramp).unwrap(), 0.0);
        let s = GridShape::new(4, 5).unwrap();
        let a = ScalarField::constant(s, 1.0).unwrap();
        let b = ScalarField::constant(s, 7.0).unwrap();
        assert_eq!(sobel_gradient_loss(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn ssim_examples() {
        let s = GridShape::new(5, 6).unwrap();
        let y = ScalarField::constant(s, 0.4).unwrap();
        let p = SsimParams::default();
        assert!(ssim_loss(&y, &y, &p).unwrap().abs() < 1e-15);

        let (c, d) = (0.4, 0.3);
        let yhat = ScalarField::constant(s, c + d).unwrap();
        let c1 = 1e-4;
        let expected = (1.0 - (2.0 * c * (c + d) + c1) / (c * c + (c + d) * (c + d) + c1)) / 2.0;
        assert!((ssim_loss(&y, &yhat, &p).unwrap() - expected).abs() < 1e-12);

        assert!(ssim_loss(&y, &y, &SsimParams::with_range(0.0)).is_err());
        assert!(ssim_loss(&y, &y, &SsimParams { window: 4, ..p }).is_err());
    }

    #[test]
    fn tv_examples() {
        let s = GridShape::new(2, 2).unwrap();
        let h = MultiChannelField::new(s, 1, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let tv = total_variation(&h);
        assert_eq!(tv.value, 2.0);
        assert_eq!(tv.grad.values(), &[-2.0, 2.0, -2.0, 2.0]);

        let (a, b) = (1.5, -0.25);
        let h = MultiChannelField::new(GridShape::new(1, 2).unwrap(), 1, vec![a, b]).unwrap();
        let tv = total_variation(&h);
        assert_eq!(tv.value, (b - a) * (b - a));
        assert_eq!(tv.grad.values(), &[-2.0 * (b - a), 2.0 * (b - a)]);

        let c = MultiChannelField::new(s, 2, vec![3.0; 8]).unwrap();
        let tv = total_variation(&c);
        assert_eq!(tv.value, 0.0);
        assert!(tv.grad.values().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn combined_examples() {
        let s = GridShape::new(2, 2).unwrap();
        let y = ScalarField::constant(s, 2.0).unwrap();
        let yhat = ScalarField::new(s, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let h_a = MultiChannelField::new(s, 1, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let h_b = MultiChannelField::new(s, 1, vec![0.0, 1.0, 5.0, 1.0]).unwrap();

        let zero = ObjectiveWeights::new(0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(combined_objective(&y, &yhat, &h_a, &h_b, &zero, 8).unwrap(), 0.0);

        let tv_only = ObjectiveWeights::new(0.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(combined_objective(&y, &yhat, &h_a, &h_b, &tv_only, 8).unwrap(), 2.0);

        let flat = MultiChannelField::new(s, 1, vec![1.0; 4]).unwrap();
        let all = ObjectiveWeights::default();
        assert_eq!(combined_objective(&y, &y, &flat, &h_b, &all, 8).unwrap(), 0.0);

        assert!(ObjectiveWeights::new(-1.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn weight_presets() {
        let u = ObjectiveWeights::default();
        assert_eq!(
            (u.lambda_d, u.lambda_g, u.lambda_s, u.lambda_tv, u.lambda_top),
            (0.1, 1.0, 1.0, 1.0, 0.001)
        );
        let d = ObjectiveWeights::dense_depth();
        assert_eq!((d.lambda_tv, d.lambda_top), (0.1, 0.0001));
    }
}
