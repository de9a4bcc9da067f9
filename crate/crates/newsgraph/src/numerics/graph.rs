use super::tensor::{matmul_bt_raw, matmul_raw, matmul_t_raw};
use super::{NumericsError, ParamSet, Tensor};

/// Handle to a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Param,
    Constant,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    MatMul(Var, Var),
    /// Matrix plus a row vector broadcast over rows.
    AddRow(Var, Var),
    Concat(Vec<Var>),
    Relu(Var),
    Sigmoid(Var),
    Scale(Var, f64),
    AddScalar(Var),
    Sum(Var),
    SumSquares(Var),
    /// Sum of same-shape inputs; used for batch loss accumulation.
    AddN(Vec<Var>),
    /// Fused log-softmax + negative log likelihood over a rank-1 logit vector.
    SoftmaxXent { logits: Var, target: usize },
}

struct Node {
    op: Op,
    value: Tensor,
}

/// Records operations eagerly: each op computes its value on construction, and
/// [`Graph::backward`] replays the tape in reverse. Parameters are bound by
/// name from a [`ParamSet`] at construction time.
pub struct Graph {
    nodes: Vec<Node>,
    param_vars: Vec<(String, Var)>,
}

impl Graph {
    pub fn new(params: &ParamSet) -> Self {
        let mut g = Graph { nodes: Vec::new(), param_vars: Vec::new() };
        for (name, tensor) in params.iter() {
            let var = g.push(Op::Param, tensor.clone());
            g.param_vars.push((name.to_string(), var));
        }
        g
    }

    fn push(&mut self, op: Op, value: Tensor) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    pub fn param(&self, name: &str) -> Result<Var, NumericsError> {
        self.param_vars
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
            .ok_or_else(|| NumericsError::UnknownParam(name.to_string()))
    }

    pub fn constant(&mut self, tensor: Tensor) -> Var {
        self.push(Op::Constant, tensor)
    }

    pub fn scalar(&mut self, x: f64) -> Var {
        self.constant(Tensor::scalar(x))
    }

    fn binary_same_shape(&mut self, a: Var, b: Var, op: &str) -> Result<(), NumericsError> {
        if !self.value(a).same_shape(self.value(b)) {
            return Err(NumericsError::ShapeMismatch(format!(
                "{op}: {:?} vs {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        self.binary_same_shape(a, b, "add")?;
        let value = self.value(a).zip(self.value(b), |x, y| x + y);
        Ok(self.push(Op::Add(a, b), value))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        self.binary_same_shape(a, b, "sub")?;
        let value = self.value(a).zip(self.value(b), |x, y| x - y);
        Ok(self.push(Op::Sub(a, b), value))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        self.binary_same_shape(a, b, "mul")?;
        let value = self.value(a).zip(self.value(b), |x, y| x * y);
        Ok(self.push(Op::Mul(a, b), value))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.rank() != 2 || av.cols() != bv.rows() || bv.rank() > 2 {
            return Err(NumericsError::ShapeMismatch(format!(
                "matmul: {:?} x {:?}",
                av.shape(),
                bv.shape()
            )));
        }
        let value = matmul_raw(av, bv);
        Ok(self.push(Op::MatMul(a, b), value))
    }

    /// `matrix + row` where `row` is broadcast over every matrix row.
    pub fn add_row(&mut self, matrix: Var, row: Var) -> Result<Var, NumericsError> {
        let (mv, rv) = (self.value(matrix), self.value(row));
        if mv.rank() != 2 || rv.rank() != 1 || mv.cols() != rv.len() {
            return Err(NumericsError::ShapeMismatch(format!(
                "add_row: {:?} + {:?}",
                mv.shape(),
                rv.shape()
            )));
        }
        let (r, c) = (mv.rows(), mv.cols());
        let mut data = mv.data().to_vec();
        for i in 0..r {
            for j in 0..c {
                data[i * c + j] += rv.data()[j];
            }
        }
        let value = Tensor::new(vec![r, c], data).expect("shape checked");
        Ok(self.push(Op::AddRow(matrix, row), value))
    }

    /// Concatenation of rank-1 tensors into one rank-1 tensor.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var, NumericsError> {
        if parts.is_empty() {
            return Err(NumericsError::ShapeMismatch("concat of zero tensors".into()));
        }
        let mut data = Vec::new();
        for &p in parts {
            let v = self.value(p);
            if v.rank() != 1 {
                return Err(NumericsError::ShapeMismatch(format!(
                    "concat expects rank-1 parts, got {:?}",
                    v.shape()
                )));
            }
            data.extend_from_slice(v.data());
        }
        Ok(self.push(Op::Concat(parts.to_vec()), Tensor::from_vec(data)))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| x.max(0.0));
        self.push(Op::Relu(a), value)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| 1.0 / (1.0 + (-x).exp()));
        self.push(Op::Sigmoid(a), value)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|x| x * c);
        self.push(Op::Scale(a, c), value)
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|x| x + c);
        self.push(Op::AddScalar(a), value)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Tensor::scalar(self.value(a).data().iter().sum());
        self.push(Op::Sum(a), value)
    }

    /// Squared L2 norm of all elements.
    pub fn sum_squares(&mut self, a: Var) -> Var {
        let value = Tensor::scalar(self.value(a).data().iter().map(|x| x * x).sum());
        self.push(Op::SumSquares(a), value)
    }

    /// Elementwise sum of same-shape tensors.
    pub fn add_n(&mut self, parts: &[Var]) -> Result<Var, NumericsError> {
        if parts.is_empty() {
            return Err(NumericsError::ShapeMismatch("add_n of zero tensors".into()));
        }
        let mut value = self.value(parts[0]).clone();
        for &p in &parts[1..] {
            if !value.same_shape(self.value(p)) {
                return Err(NumericsError::ShapeMismatch("add_n shape mismatch".into()));
            }
            value.add_in_place(self.value(p));
        }
        Ok(self.push(Op::AddN(parts.to_vec()), value))
    }

    /// Cross-entropy of a rank-1 logit vector against a target class, with the
    /// softmax fused in (max subtraction keeps the exponentials bounded).
    pub fn softmax_cross_entropy(&mut self, logits: Var, target: usize) -> Result<Var, NumericsError> {
        let lv = self.value(logits);
        if lv.rank() != 1 || target >= lv.len() {
            return Err(NumericsError::ShapeMismatch(format!(
                "softmax_cross_entropy: logits {:?}, target {}",
                lv.shape(),
                target
            )));
        }
        let max = lv.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + lv.data().iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        let value = Tensor::scalar(lse - lv.data()[target]);
        Ok(self.push(Op::SoftmaxXent { logits, target }, value))
    }

    /// Gradients of a scalar `root` with respect to every bound parameter.
    /// Parameters that do not influence `root` get zero gradients.
    pub fn backward(&self, root: Var) -> Result<ParamSet, NumericsError> {
        if !self.value(root).is_scalar() {
            return Err(NumericsError::NonScalarObjective(self.value(root).shape().to_vec()));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[root.0] = Some(Tensor::scalar(1.0));

        for idx in (0..=root.0).rev() {
            let g = match grads[idx].take() {
                Some(g) => g,
                None => continue,
            };
            match &self.nodes[idx].op {
                Op::Param | Op::Constant => {
                    grads[idx] = Some(g);
                    continue;
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g.map(|x| -x));
                }
                Op::Mul(a, b) => {
                    let ga = g.zip(self.value(*b), |x, y| x * y);
                    let gb = g.zip(self.value(*a), |x, y| x * y);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::MatMul(a, b) => {
                    let ga = matmul_bt_raw(&g, self.value(*b));
                    let gb = matmul_t_raw(self.value(*a), &g);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::AddRow(m, r) => {
                    let (rows, cols) = (g.rows(), g.cols());
                    let mut col_sum = vec![0.0; cols];
                    for i in 0..rows {
                        for j in 0..cols {
                            col_sum[j] += g.data()[i * cols + j];
                        }
                    }
                    accumulate(&mut grads, *m, g);
                    accumulate(&mut grads, *r, Tensor::from_vec(col_sum));
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let len = self.value(p).len();
                        let slice = g.data()[offset..offset + len].to_vec();
                        accumulate(&mut grads, p, Tensor::from_vec(slice));
                        offset += len;
                    }
                }
                Op::Relu(a) => {
                    let ga = g.zip(self.value(*a), |gx, x| if x > 0.0 { gx } else { 0.0 });
                    accumulate(&mut grads, *a, ga);
                }
                Op::Sigmoid(a) => {
                    let s = &self.nodes[idx].value;
                    let ga = g.zip(s, |gx, sx| gx * sx * (1.0 - sx));
                    accumulate(&mut grads, *a, ga);
                }
                Op::Scale(a, c) => {
                    let c = *c;
                    accumulate(&mut grads, *a, g.map(|x| x * c));
                }
                Op::AddScalar(a) => {
                    accumulate(&mut grads, *a, g);
                }
                Op::Sum(a) => {
                    let gs = g.data()[0];
                    let shape = self.value(*a).shape().to_vec();
                    let count: usize = shape.iter().product();
                    accumulate(&mut grads, *a, Tensor::new(shape, vec![gs; count]).unwrap());
                }
                Op::SumSquares(a) => {
                    let gs = g.data()[0];
                    let ga = self.value(*a).map(|x| 2.0 * gs * x);
                    accumulate(&mut grads, *a, ga);
                }
                Op::AddN(parts) => {
                    for &p in parts {
                        accumulate(&mut grads, p, g.clone());
                    }
                }
                Op::SoftmaxXent { logits, target } => {
                    let gs = g.data()[0];
                    let lv = self.value(*logits);
                    let probs = softmax(lv.data());
                    let mut ga: Vec<f64> = probs.iter().map(|&p| gs * p).collect();
                    ga[*target] -= gs;
                    accumulate(&mut grads, *logits, Tensor::from_vec(ga));
                }
            }
        }

        let mut out = ParamSet::new();
        for (name, var) in &self.param_vars {
            let g = grads[var.0]
                .take()
                .unwrap_or_else(|| Tensor::zeros(self.value(*var).shape().to_vec()));
            out.insert(name, g)?;
        }
        Ok(out)
    }
}

fn accumulate(grads: &mut [Option<Tensor>], var: Var, g: Tensor) {
    match &mut grads[var.0] {
        Some(acc) => acc.add_in_place(&g),
        slot => *slot = Some(g),
    }
}

/// Multiplies `h` by a fresh inverted-dropout mask: each coordinate is
/// kept with probability `1 - rate` and scaled by `1 / (1 - rate)`, so the
/// expectation is unchanged. `rate` 0 returns `h` untouched.
pub fn dropout_mask<R: rand::Rng>(
    g: &mut Graph,
    h: Var,
    rate: f64,
    rng: &mut R,
) -> Result<Var, NumericsError> {
    if rate <= 0.0 {
        return Ok(h);
    }
    let keep = 1.0 - rate;
    let width = g.value(h).len();
    let mask: Vec<f64> = (0..width)
        .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
        .collect();
    let m = g.constant(Tensor::from_vec(mask));
    g.mul(h, m)
}

/// Numerically stable softmax of a slice.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Builds the tape via `build`, returns the scalar objective value and the
/// gradient for every parameter in `params`.
pub fn value_and_grad<F>(params: &ParamSet, build: F) -> Result<(f64, ParamSet), NumericsError>
where
    F: FnOnce(&mut Graph) -> Result<Var, NumericsError>,
{
    let mut graph = Graph::new(params);
    let root = build(&mut graph)?;
    let value = graph.value(root).item()?;
    let grads = graph.backward(root)?;
    Ok((value, grads))
}

/// Value-only evaluation of the same kind of closure `value_and_grad` takes.
pub fn evaluate<F>(params: &ParamSet, build: F) -> Result<f64, NumericsError>
where
    F: FnOnce(&mut Graph) -> Result<Var, NumericsError>,
{
    let mut graph = Graph::new(params);
    let root = build(&mut graph)?;
    graph.value(root).item()
}

/// Compares reverse-mode gradients against central finite differences and
/// returns the worst relative error over every parameter coordinate:
/// `|g_ad - g_fd| / max(1e-12, |g_ad| + |g_fd|)`.
pub fn finite_diff_check<F>(params: &ParamSet, eps: f64, build: F) -> Result<f64, NumericsError>
where
    F: Fn(&mut Graph) -> Result<Var, NumericsError>,
{
    let (_, grads) = value_and_grad(params, &build)?;
    let mut worst = 0.0f64;
    let mut perturbed = params.clone();
    let names: Vec<String> = params.names().map(str::to_string).collect();
    for name in names {
        let len = params.get(&name)?.len();
        for i in 0..len {
            let base = params.get(&name)?.data()[i];
            perturbed.get_mut(&name)?.data_mut()[i] = base + eps;
            let up = evaluate(&perturbed, &build)?;
            perturbed.get_mut(&name)?.data_mut()[i] = base - eps;
            let down = evaluate(&perturbed, &build)?;
            perturbed.get_mut(&name)?.data_mut()[i] = base;
            let g_fd = (up - down) / (2.0 * eps);
            let g_ad = grads.get(&name)?.data()[i];
            let err = (g_ad - g_fd).abs() / f64::max(1e-12, g_ad.abs() + g_fd.abs());
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single(name: &str, t: Tensor) -> ParamSet {
        let mut p = ParamSet::new();
        p.insert(name, t).unwrap();
        p
    }

    #[test]
    fn square_gradient() {
        let params = single("x", Tensor::scalar(3.0));
        let (v, g) = value_and_grad(&params, |g| {
            let x = g.param("x")?;
            g.mul(x, x)
        })
        .unwrap();
        assert_relative_eq!(v, 9.0);
        assert_relative_eq!(g.get("x").unwrap().data()[0], 6.0);
    }

    #[test]
    fn constant_objective_has_zero_grads() {
        let params = single("x", Tensor::from_vec(vec![1.0, 2.0]));
        let (v, g) = value_and_grad(&params, |g| Ok(g.scalar(5.0))).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(g.get("x").unwrap().data(), &[0.0, 0.0]);
    }

    #[test]
    fn non_scalar_objective_is_rejected() {
        let params = single("x", Tensor::from_vec(vec![1.0, 2.0]));
        let err = value_and_grad(&params, |g| g.param("x"));
        assert!(matches!(err, Err(NumericsError::NonScalarObjective(_))));
    }

    #[test]
    fn two_layer_network_matches_finite_differences() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
        let mut params = ParamSet::new();
        params.insert("w1", Tensor::glorot(4, 3, &mut rng)).unwrap();
        params.insert("b1", Tensor::rand_uniform(vec![4], -0.5, 0.5, &mut rng)).unwrap();
        params.insert("w2", Tensor::glorot(2, 4, &mut rng)).unwrap();
        params.insert("b2", Tensor::rand_uniform(vec![2], -0.5, 0.5, &mut rng)).unwrap();
        let x = vec![0.3, -0.7, 1.1];
        let err = finite_diff_check(&params, 1e-5, |g| {
            let input = g.constant(Tensor::from_vec(x.clone()));
            let w1 = g.param("w1")?;
            let b1 = g.param("b1")?;
            let h = g.matmul(w1, input)?;
            let h = g.add(h, b1)?;
            let h = g.relu(h);
            let w2 = g.param("w2")?;
            let b2 = g.param("b2")?;
            let logits = g.matmul(w2, h)?;
            let logits = g.add(logits, b2)?;
            g.softmax_cross_entropy(logits, 1)
        })
        .unwrap();
        assert!(err < 1e-4, "finite diff error {err}");
    }

    #[test]
    fn linear_function_gradient_is_nearly_exact() {
        let params = single("w", Tensor::from_vec(vec![2.0, -3.0, 0.5]));
        let err = finite_diff_check(&params, 1e-5, |g| {
            let w = g.param("w")?;
            let c = g.constant(Tensor::from_vec(vec![1.0, 2.0, 3.0]));
            let prod = g.mul(w, c)?;
            Ok(g.sum(prod))
        })
        .unwrap();
        assert!(err <= 1e-9, "linear gradient error {err}");
    }

    #[test]
    fn finite_diff_flags_a_corrupted_gradient() {
        // Evaluate x^2 but differentiate x^2 + x by sneaking an extra term into
        // the gradient path through a value-dependent constant.
        let params = single("x", Tensor::scalar(2.0));
        let (_, g) = value_and_grad(&params, |g| {
            let x = g.param("x")?;
            g.mul(x, x)
        })
        .unwrap();
        let corrupted = g.get("x").unwrap().data()[0] + 1.0;
        let g_fd = {
            let eps = 1e-5;
            let up = evaluate(&single("x", Tensor::scalar(2.0 + eps)), |g| {
                let x = g.param("x")?;
                g.mul(x, x)
            })
            .unwrap();
            let down = evaluate(&single("x", Tensor::scalar(2.0 - eps)), |g| {
                let x = g.param("x")?;
                g.mul(x, x)
            })
            .unwrap();
            (up - down) / (2.0 * eps)
        };
        let err = (corrupted - g_fd).abs() / f64::max(1e-12, corrupted.abs() + g_fd.abs());
        assert!(err > 1e-2, "corruption went unnoticed: {err}");
    }

    #[test]
    fn softmax_sums_to_one() {
        let probs = softmax(&[1.0, 2.0, 3.0, 4.0]);
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);
        let extreme = softmax(&[1000.0, -1000.0]);
        assert!((extreme.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn concat_backward_slices_gradient() {
        let mut params = ParamSet::new();
        params.insert("a", Tensor::from_vec(vec![1.0, 2.0])).unwrap();
        params.insert("b", Tensor::from_vec(vec![3.0])).unwrap();
        let (v, g) = value_and_grad(&params, |g| {
            let a = g.param("a")?;
            let b = g.param("b")?;
            let joined = g.concat(&[a, b])?;
            let weights = g.constant(Tensor::from_vec(vec![1.0, 10.0, 100.0]));
            let prod = g.mul(joined, weights)?;
            Ok(g.sum(prod))
        })
        .unwrap();
        assert_relative_eq!(v, 1.0 + 20.0 + 300.0);
        assert_eq!(g.get("a").unwrap().data(), &[1.0, 10.0]);
        assert_eq!(g.get("b").unwrap().data(), &[100.0]);
    }

    #[test]
    fn matmul_shape_mismatch_is_an_error() {
        let params = single("w", Tensor::matrix(2, 3, vec![0.0; 6]).unwrap());
        let err = value_and_grad(&params, |g| {
            let w = g.param("w")?;
            let x = g.constant(Tensor::from_vec(vec![1.0, 2.0]));
            g.matmul(w, x)
        });
        assert!(matches!(err, Err(NumericsError::ShapeMismatch(_))));
    }

    #[test]
    fn add_row_broadcast_and_gradient() {
        let mut params = ParamSet::new();
        params.insert("b", Tensor::from_vec(vec![1.0, -1.0])).unwrap();
        let (v, g) = value_and_grad(&params, |g| {
            let m = g.constant(Tensor::matrix(3, 2, vec![0.0; 6]).unwrap());
            let b = g.param("b")?;
            let out = g.add_row(m, b)?;
            Ok(g.sum(out))
        })
        .unwrap();
        assert_relative_eq!(v, 0.0);
        assert_eq!(g.get("b").unwrap().data(), &[3.0, 3.0]);
    }

    #[test]
    fn same_build_same_value() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let mut params = ParamSet::new();
        params.insert("w", Tensor::glorot(5, 5, &mut rng)).unwrap();
        let build = |g: &mut Graph| {
            let w = g.param("w")?;
            let x = g.constant(Tensor::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0]));
            let y = g.matmul(w, x)?;
            g.sum_squares(y);
            let y2 = g.relu(y);
            Ok(g.sum(y2))
        };
        let a = evaluate(&params, build).unwrap();
        let b = evaluate(&params, build).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
