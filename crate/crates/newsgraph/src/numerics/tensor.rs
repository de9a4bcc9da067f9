use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Dense row-major f64 tensor. Rank 1 and 2 cover everything in this crate;
/// a scalar is a rank-1 tensor of length one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, NumericsError> {
        let count: usize = shape.iter().product();
        if shape.is_empty() || count != data.len() {
            return Err(NumericsError::InvalidTensor(format!(
                "shape {:?} does not hold {} values",
                shape,
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let count: usize = shape.iter().product();
        Tensor { shape, data: vec![0.0; count] }
    }

    pub fn scalar(x: f64) -> Self {
        Tensor { shape: vec![1], data: vec![x] }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        Tensor { shape: vec![data.len()], data }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericsError> {
        Tensor::new(vec![rows, cols], data)
    }

    /// Identity matrix of side `n`.
    pub fn eye(n: usize) -> Self {
        let mut t = Tensor::zeros(vec![n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1
    }

    /// Value of a scalar tensor.
    pub fn item(&self) -> Result<f64, NumericsError> {
        if self.is_scalar() {
            Ok(self.data[0])
        } else {
            Err(NumericsError::NonScalarObjective(self.shape.clone()))
        }
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        if self.shape.len() == 2 {
            self.shape[1]
        } else {
            1
        }
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Uniform sample in `[lo, hi)` for every element.
    pub fn rand_uniform<R: rand::Rng>(shape: Vec<usize>, lo: f64, hi: f64, rng: &mut R) -> Self {
        let count: usize = shape.iter().product();
        let data = (0..count).map(|_| rng.gen_range(lo..hi)).collect();
        Tensor { shape, data }
    }

    /// Glorot-style uniform init for a `rows x cols` weight matrix.
    pub fn glorot<R: rand::Rng>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        Tensor::rand_uniform(vec![rows, cols], -bound, bound, rng)
    }

    pub fn same_shape(&self, other: &Tensor) -> bool {
        self.shape == other.shape
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor { shape: self.shape.clone(), data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub(crate) fn zip(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
        debug_assert_eq!(self.shape, other.shape);
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Tensor { shape: self.shape.clone(), data }
    }

    pub(crate) fn add_in_place(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// `a (r x c) * b (c x k) -> r x k`; rank-1 `b` is treated as a column.
pub(crate) fn matmul_raw(a: &Tensor, b: &Tensor) -> Tensor {
    let (r, c) = (a.rows(), a.cols());
    if b.rank() == 1 {
        let mut out = vec![0.0; r];
        for i in 0..r {
            let row = &a.data[i * c..(i + 1) * c];
            out[i] = row.iter().zip(b.data()).map(|(&x, &y)| x * y).sum();
        }
        Tensor::from_vec(out)
    } else {
        let k = b.cols();
        let mut out = vec![0.0; r * k];
        for i in 0..r {
            for l in 0..c {
                let av = a.data[i * c + l];
                if av == 0.0 {
                    continue;
                }
                let brow = &b.data[l * k..(l + 1) * k];
                let orow = &mut out[i * k..(i + 1) * k];
                for j in 0..k {
                    orow[j] += av * brow[j];
                }
            }
        }
        Tensor { shape: vec![r, k], data: out }
    }
}

/// `a^T (c x r) * b`, without materializing the transpose.
pub(crate) fn matmul_t_raw(a: &Tensor, b: &Tensor) -> Tensor {
    let (r, c) = (a.rows(), a.cols());
    if b.rank() == 1 {
        let mut out = vec![0.0; c];
        for i in 0..r {
            let bv = b.data()[i];
            if bv == 0.0 {
                continue;
            }
            let row = &a.data[i * c..(i + 1) * c];
            for j in 0..c {
                out[j] += row[j] * bv;
            }
        }
        Tensor::from_vec(out)
    } else {
        let k = b.cols();
        let mut out = vec![0.0; c * k];
        for i in 0..r {
            let arow = &a.data[i * c..(i + 1) * c];
            let brow = &b.data[i * k..(i + 1) * k];
            for l in 0..c {
                let av = arow[l];
                if av == 0.0 {
                    continue;
                }
                let orow = &mut out[l * k..(l + 1) * k];
                for j in 0..k {
                    orow[j] += av * brow[j];
                }
            }
        }
        Tensor { shape: vec![c, k], data: out }
    }
}

/// `a * b^T` where the result has shape `rows(a) x rows(b)`; used for
/// gradient outer products. `a` rank-1 is treated as a single column.
pub(crate) fn matmul_bt_raw(a: &Tensor, b: &Tensor) -> Tensor {
    if a.rank() == 1 && b.rank() == 1 {
        // outer product
        let (r, c) = (a.len(), b.len());
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                out[i * c + j] = a.data[i] * b.data[j];
            }
        }
        return Tensor { shape: vec![r, c], data: out };
    }
    let (r, c) = (a.rows(), a.cols());
    let rb = b.rows();
    debug_assert_eq!(c, b.cols());
    let mut out = vec![0.0; r * rb];
    for i in 0..r {
        for j in 0..rb {
            let arow = &a.data[i * c..(i + 1) * c];
            let brow = &b.data[j * c..(j + 1) * c];
            out[i * rb + j] = arow.iter().zip(brow).map(|(&x, &y)| x * y).sum();
        }
    }
    Tensor { shape: vec![r, rb], data: out }
}
