//! Central-finite-difference gradient checking for any loss built on the
//! graph engine.

use super::graph::{GradStore, ParamSet};

pub const GRAD_CHECK_EPS: f64 = 1e-5;

/// Compare analytic gradients against central finite differences for every
/// scalar parameter; returns the maximum relative error. `run` must build
/// the forward pass and return (loss, gradients) for the current parameter
/// values.
pub fn grad_check(
    params: &mut ParamSet,
    mut run: impl FnMut(&ParamSet) -> (f64, GradStore),
) -> f64 {
    let (_, analytic) = run(params);
    let mut max_err = 0.0f64;
    let ids: Vec<_> = params.ids().collect();
    for id in ids {
        for i in 0..params.get(id).numel() {
            let original = params.get(id).data[i];
            params.get_mut(id).data[i] = original + GRAD_CHECK_EPS;
            let (loss_plus, _) = run(params);
            params.get_mut(id).data[i] = original - GRAD_CHECK_EPS;
            let (loss_minus, _) = run(params);
            params.get_mut(id).data[i] = original;

            let numeric = (loss_plus - loss_minus) / (2.0 * GRAD_CHECK_EPS);
            let exact = analytic.get(id).data[i];
            let err = if exact.abs() < 1e-6 && numeric.abs() < 1e-6 {
                (exact - numeric).abs()
            } else {
                (exact - numeric).abs() / exact.abs().max(numeric.abs())
            };
            max_err = max_err.max(err);
        }
    }
    max_err
}
