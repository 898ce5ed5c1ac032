//! Scalar and multi-channel fields over a pixel grid, and the channel
//! projection `h_ij -> ||h_ij||_2` with its chain rule.

use crate::error::{Result, TopoError};
use crate::grid::GridShape;

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(TopoError::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// One real value per pixel, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    shape: GridShape,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(TopoError::DimensionMismatch {
                expected: format!("{} values for {shape}", shape.len()),
                found: format!("{} values", values.len()),
            });
        }
        check_finite(&values)?;
        Ok(Self { shape, values })
    }

    /// Convenience constructor from rows of equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let shape = GridShape::new(height, width)?;
        let mut values = Vec::with_capacity(shape.len());
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != width {
                return Err(TopoError::DimensionMismatch {
                    expected: format!("{width} columns"),
                    found: format!("{} columns in row {i}", row.len()),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(shape, values)
    }

    pub fn zeros(shape: GridShape) -> Self {
        Self {
            shape,
            values: vec![0.0; shape.len()],
        }
    }

    pub fn constant(shape: GridShape, value: f64) -> Result<Self> {
        Self::new(shape, vec![value; shape.len()])
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.shape.vertex(row, col)]
    }

    /// View as a one-channel multi-channel field.
    pub fn to_multichannel(&self) -> MultiChannelField {
        MultiChannelField {
            shape: self.shape,
            channels: 1,
            values: self.values.clone(),
        }
    }

    pub(crate) fn ensure_same_shape(&self, other: &ScalarField) -> Result<()> {
        if self.shape != other.shape {
            return Err(TopoError::DimensionMismatch {
                expected: self.shape.to_string(),
                found: other.shape.to_string(),
            });
        }
        Ok(())
    }
}

/// `channels` values per pixel, pixel-major: index `(row * width + col) * channels + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiChannelField {
    shape: GridShape,
    channels: usize,
    values: Vec<f64>,
}

impl MultiChannelField {
    pub fn new(shape: GridShape, channels: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 {
            return Err(TopoError::InvalidParameter("channel count must be at least 1".into()));
        }
        if values.len() != shape.len() * channels {
            return Err(TopoError::DimensionMismatch {
                expected: format!("{} values for {shape}x{channels}", shape.len() * channels),
                found: format!("{} values", values.len()),
            });
        }
        check_finite(&values)?;
        Ok(Self {
            shape,
            channels,
            values,
        })
    }

    /// Interleave equally shaped single-channel planes.
    pub fn from_channels(planes: &[ScalarField]) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| TopoError::InvalidParameter("no channels given".into()))?;
        for p in &planes[1..] {
            first.ensure_same_shape(p)?;
        }
        let c = planes.len();
        let mut values = vec![0.0; first.shape.len() * c];
        for (k, plane) in planes.iter().enumerate() {
            for (px, &v) in plane.values.iter().enumerate() {
                values[px * c + k] = v;
            }
        }
        Ok(Self {
            shape: first.shape,
            channels: c,
            values,
        })
    }

    pub fn zeros(shape: GridShape, channels: usize) -> Result<Self> {
        Self::new(shape, channels, vec![0.0; shape.len() * channels])
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn pixel(&self, vertex: usize) -> &[f64] {
        &self.values[vertex * self.channels..(vertex + 1) * self.channels]
    }

    pub fn channel(&self, k: usize) -> Result<ScalarField> {
        if k >= self.channels {
            return Err(TopoError::IndexOutOfRange {
                index: k,
                len: self.channels,
            });
        }
        let values = self.values.iter().skip(k).step_by(self.channels).copied().collect();
        Ok(ScalarField {
            shape: self.shape,
            values,
        })
    }

    /// The single plane of a one-channel field.
    pub fn as_scalar(&self) -> Option<ScalarField> {
        (self.channels == 1).then(|| ScalarField {
            shape: self.shape,
            values: self.values.clone(),
        })
    }
}

/// A loss value together with its gradient, laid out like the input.
#[derive(Clone, Debug, PartialEq)]
pub struct LossGrad<F> {
    pub value: f64,
    pub grad: F,
}

pub fn project_channels(field: &MultiChannelField) -> ScalarField {
    let values = field
        .values
        .chunks_exact(field.channels)
        .map(|px| px.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    ScalarField {
        shape: field.shape,
        values,
    }
}

/// Pull an upstream gradient on the projected field back to the channels.
/// Pixels with zero norm receive a zero gradient.
pub fn project_channels_grad(field: &MultiChannelField, upstream: &ScalarField) -> Result<MultiChannelField> {
    if upstream.shape != field.shape {
        return Err(TopoError::DimensionMismatch {
            expected: field.shape.to_string(),
            found: upstream.shape.to_string(),
        });
    }
    let c = field.channels;
    let mut grad = vec![0.0; field.values.len()];
    for (px, (h, g)) in field.values.chunks_exact(c).zip(grad.chunks_exact_mut(c)).enumerate() {
        let up = upstream.values[px];
        if up == 0.0 {
            continue;
        }
        let norm = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for (gk, hk) in g.iter_mut().zip(h) {
            *gk = up * hk / norm;
        }
    }
    Ok(MultiChannelField {
        shape: field.shape,
        channels: c,
        values: grad,
    })
}
