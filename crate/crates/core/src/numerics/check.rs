use super::{GradStore, ParameterSet};

/// Central finite-difference step used throughout the test suites.
pub const DEFAULT_EPS: f64 = 1e-5;

/// Compares an analytic gradient against central finite differences of `f`
/// over every coordinate of every parameter, returning the maximum relative
/// error `|analytic - numeric| / max(1, |analytic|, |numeric|)`.
///
/// `f` must be deterministic (dropout disabled). Parameters are perturbed in
/// place and restored bit-exactly afterwards.
pub fn grad_check<F>(params: &mut ParameterSet, analytic: &GradStore, eps: f64, mut f: F) -> f64
where
    F: FnMut(&ParameterSet) -> f64,
{
    let mut max_rel = 0.0f64;
    let n = params.len();
    for p in 0..n {
        let id = super::ParamId(p);
        let len = params.get(id).len();
        for k in 0..len {
            let orig = params.get(id).data()[k];
            params.get_mut(id).data_mut()[k] = orig + eps;
            let plus = f(params);
            params.get_mut(id).data_mut()[k] = orig - eps;
            let minus = f(params);
            params.get_mut(id).data_mut()[k] = orig;

            let numeric = (plus - minus) / (2.0 * eps);
            let a = analytic.get(id).data()[k];
            let denom = 1.0f64.max(a.abs()).max(numeric.abs());
            let rel = (a - numeric).abs() / denom;
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    max_rel
}
