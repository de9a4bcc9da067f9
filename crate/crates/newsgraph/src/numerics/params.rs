use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{NumericsError, Tensor};

/// Named parameter tensors. Iteration order is name-sorted, so every loop
/// over a `ParamSet` is deterministic.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamSet {
    params: BTreeMap<String, Tensor>,
}

impl ParamSet {
    pub fn new() -> Self {
        ParamSet::default()
    }

    pub fn insert(&mut self, name: &str, tensor: Tensor) -> Result<(), NumericsError> {
        if self.params.contains_key(name) {
            return Err(NumericsError::DuplicateParam(name.to_string()));
        }
        self.params.insert(name.to_string(), tensor);
        Ok(())
    }

    /// Replaces the stored tensor; the shape must not change.
    pub fn set(&mut self, name: &str, tensor: Tensor) -> Result<(), NumericsError> {
        match self.params.get_mut(name) {
            Some(slot) => {
                if !slot.same_shape(&tensor) {
                    return Err(NumericsError::ShapeMismatch(format!(
                        "parameter '{}' has shape {:?}, got {:?}",
                        name,
                        slot.shape(),
                        tensor.shape()
                    )));
                }
                *slot = tensor;
                Ok(())
            }
            None => Err(NumericsError::UnknownParam(name.to_string())),
        }
    }

    pub fn get(&self, name: &str) -> Result<&Tensor, NumericsError> {
        self.params.get(name).ok_or_else(|| NumericsError::UnknownParam(name.to_string()))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor, NumericsError> {
        self.params.get_mut(name).ok_or_else(|| NumericsError::UnknownParam(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalar values across all tensors.
    pub fn value_count(&self) -> usize {
        self.params.values().map(Tensor::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.params.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    /// A set with the same names and shapes, all values zero.
    pub fn zeros_like(&self) -> ParamSet {
        let params = self
            .params
            .iter()
            .map(|(k, v)| (k.clone(), Tensor::zeros(v.shape().to_vec())))
            .collect();
        ParamSet { params }
    }
}
