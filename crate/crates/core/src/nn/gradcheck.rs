//! Central finite-difference checks for analytic gradients.

use super::layers::Module;
use super::tensor::Matrix;

/// Denominator floor for relative errors, so that gradients that are zero
/// up to rounding do not blow the ratio up.
pub const RELATIVE_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

/// `sum(m .* coeffs)`: a scalar loss whose gradient wrt `m` is `coeffs`.
pub fn weighted_sum(m: &Matrix, coeffs: &[f64]) -> f64 {
    assert_eq!(m.data.len(), coeffs.len());
    m.data.iter().zip(coeffs).map(|(a, b)| a * b).sum()
}

/// Numerical gradient of `f` at `x`.
pub fn numeric_gradient(x: &[f64], f: impl Fn(&[f64]) -> f64, h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn max_vector_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic.iter().zip(numeric).map(|(&a, &n)| relative_error(a, n)).fold(0.0, f64::max)
}

/// Compares the gradients currently stored in `module` against central
/// differences of `loss`, returning the largest relative error.
pub fn max_relative_error<M: Module>(module: &mut M, loss: impl Fn(&M) -> f64, h: f64) -> f64 {
    let count = module.params().len();
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let len = module.params()[i].len();
        for k in 0..len {
            let orig = module.params()[i].data[k];
            module.params_mut()[i].data[k] = orig + h;
            let up = loss(module);
            module.params_mut()[i].data[k] = orig - h;
            let down = loss(module);
            module.params_mut()[i].data[k] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = module.params()[i].grad[k];
            worst = worst.max(relative_error(analytic, numeric));
        }
    }
    worst
}
