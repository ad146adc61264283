use std::sync::Arc;

use crate::error::{Error, Result};

/// A named tensor inside a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Accumulates tensor records; frozen into a [`ParameterVector`] by [`finish`](Self::finish).
#[derive(Debug, Default)]
pub struct LayoutBuilder {
    specs: Vec<TensorSpec>,
    len: usize,
}

impl LayoutBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a tensor and returns its offset in the flat vector.
    pub fn push(&mut self, name: impl Into<String>, shape: &[usize]) -> usize {
        let offset = self.len;
        let spec = TensorSpec {
            name: name.into(),
            shape: shape.to_vec(),
            offset,
        };
        self.len += spec.len();
        self.specs.push(spec);
        offset
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn finish(self) -> ParameterVector {
        ParameterVector {
            values: vec![0.0; self.len],
            layout: Arc::from(self.specs),
        }
    }
}

/// Flat sequence of real scalars plus an immutable `(name, shape)` layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    values: Vec<f64>,
    layout: Arc<[TensorSpec]>,
}

impl ParameterVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access to the scalars; the length (and so the layout) cannot change.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn layout(&self) -> &[TensorSpec] {
        &self.layout
    }

    pub fn spec(&self, name: &str) -> Option<&TensorSpec> {
        self.layout.iter().find(|s| s.name == name)
    }

    pub fn tensor(&self, name: &str) -> Result<&[f64]> {
        let spec = self
            .spec(name)
            .ok_or_else(|| Error::Config(format!("no tensor named {name:?}")))?;
        Ok(&self.values[spec.range()])
    }

    pub fn tensor_mut(&mut self, name: &str) -> Result<&mut [f64]> {
        let range = self
            .spec(name)
            .ok_or_else(|| Error::Config(format!("no tensor named {name:?}")))?
            .range();
        Ok(&mut self.values[range])
    }

    /// Zero-filled vector with the same layout.
    pub fn zeros_like(&self) -> Self {
        Self {
            values: vec![0.0; self.values.len()],
            layout: Arc::clone(&self.layout),
        }
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) || self.layout == other.layout
    }

    /// Replaces all scalars; `values` must match the layout length.
    pub fn assign(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::Config(format!(
                "expected {} parameters, got {}",
                self.values.len(),
                values.len()
            )));
        }
        self.values.copy_from_slice(values);
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_offsets_are_contiguous() {
        let mut b = LayoutBuilder::new();
        assert_eq!(b.push("a", &[2, 3]), 0);
        assert_eq!(b.push("b", &[4]), 6);
        assert_eq!(b.push("c", &[1, 1]), 10);
        let mut p = b.finish();
        assert_eq!(p.len(), 11);
        p.tensor_mut("b").unwrap().copy_from_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.values()[6..10], [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.tensor("c").unwrap(), &[0.0]);
        assert!(p.tensor("missing").is_err());
        assert!(p.assign(&[0.0; 3]).is_err());
        let z = p.zeros_like();
        assert!(z.same_layout(&p));
        assert!(z.values().iter().all(|v| *v == 0.0));
    }
}
