//! Finite-difference gradient checking.
//!
//! Testing utility kept independent of the tape: it only perturbs raw values
//! and re-runs a caller-supplied forward closure, so it can falsify the
//! analytic gradients rather than restate them.

use crate::tensor::Tensor;

/// Relative error between an analytic and a numeric derivative.
///
/// Central differences with h around 1e-5 resolve roughly 1e-11 absolute in
/// double precision (truncation plus cancellation); differences below 1e-9
/// are reported as agreement since they cannot be distinguished from
/// finite-difference noise.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff <= 1e-9 {
        0.0
    } else {
        diff / analytic.abs().max(numeric.abs())
    }
}

/// Central difference of `f` with respect to element `idx` of `param`.
///
/// The parameter value is restored before returning.
pub fn central_difference(param: &Tensor, idx: usize, h: f64, f: &mut dyn FnMut() -> f64) -> f64 {
    let original = param.value_at(idx);
    param.set_value_at(idx, original + h);
    let plus = f();
    param.set_value_at(idx, original - h);
    let minus = f();
    param.set_value_at(idx, original);
    (plus - minus) / (2.0 * h)
}

/// Worst relative error over every element of every parameter.
///
/// `loss` must rebuild the forward pass from scratch on each call;
/// `analytic` maps (parameter position in `params`, element index) to the
/// gradient produced by the tape.
pub fn max_relative_error(
    params: &[Tensor],
    h: f64,
    loss: &mut dyn FnMut() -> f64,
    analytic: &dyn Fn(usize, usize) -> f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (pi, p) in params.iter().enumerate() {
        for idx in 0..p.numel() {
            let numeric = central_difference(p, idx, h, loss);
            worst = worst.max(relative_error(analytic(pi, idx), numeric));
        }
    }
    worst
}
