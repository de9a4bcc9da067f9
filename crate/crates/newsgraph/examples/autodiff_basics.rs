//! The reverse-mode tape underneath every trainer in this crate, driven
//! directly: build a loss expression, pull gradients, cross-check them
//! against finite differences, and run a few Adam steps.
//!
//!     cargo run --example autodiff_basics

use newsgraph::numerics::{
    finite_diff_check, value_and_grad, Adam, AdamConfig, Graph, ParamSet, Tensor,
};

fn main() {
    // Fit y = w*x + b to three points by least squares.
    let xs = [0.0, 1.0, 2.0];
    let ys = [1.0, 3.0, 5.0]; // exactly y = 2x + 1

    let mut params = ParamSet::new();
    params.insert("w", Tensor::from_vec(vec![0.0])).unwrap();
    params.insert("b", Tensor::from_vec(vec![0.0])).unwrap();

    let build = |g: &mut Graph| {
        let w = g.param("w")?;
        let b = g.param("b")?;
        let mut residuals = Vec::new();
        for (&x, &y) in xs.iter().zip(&ys) {
            let pred = g.scale(w, x);
            let pred = g.add(pred, b)?;
            let diff = g.add_scalar(pred, -y);
            residuals.push(g.sum_squares(diff));
        }
        g.add_n(&residuals)
    };

    let (loss, grads) = value_and_grad(&params, build).unwrap();
    println!("loss at w=0, b=0: {loss}");
    println!("  dL/dw = {}", grads.get("w").unwrap().data()[0]);
    println!("  dL/db = {}", grads.get("b").unwrap().data()[0]);

    // Central finite differences agree to ~eps^2; this is the same check
    // the trainers' test suites run against their real losses.
    let max_err = finite_diff_check(&params, 1e-5, build).unwrap();
    println!("max |analytic - numeric| over both params: {max_err:.3e}");
    assert!(max_err < 1e-6);

    let mut adam = Adam::new(AdamConfig { learning_rate: 0.1, ..AdamConfig::default() });
    for step in 0..600 {
        let (loss, grads) = value_and_grad(&params, build).unwrap();
        adam.step(&mut params, &grads).unwrap();
        if step % 150 == 0 {
            println!("step {step:3}  loss {loss:.6}");
        }
    }
    let w = params.get("w").unwrap().data()[0];
    let b = params.get("b").unwrap().data()[0];
    println!("fitted: y = {w:.4}x + {b:.4}   (target 2x + 1)");
}
