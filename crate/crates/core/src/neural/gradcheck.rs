/// Outcome of a finite-difference gradient check.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Coordinate where the worst error occurred.
    pub worst_index: Option<usize>,
    pub numeric: Vec<f64>,
}

/// `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares `analytic` against central differences
/// `(f(θ + eps·e_i) - f(θ - eps·e_i)) / (2·eps)` for every coordinate.
pub fn grad_check<F>(mut loss: F, analytic: &[f64], params: &[f64], eps: f64) -> GradCheckReport
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(
        analytic.len(),
        params.len(),
        "gradient and parameter lengths differ"
    );
    let mut theta = params.to_vec();
    let mut numeric = Vec::with_capacity(params.len());
    let mut max_rel_error = 0.0;
    let mut worst_index = None;
    for i in 0..theta.len() {
        let orig = theta[i];
        theta[i] = orig + eps;
        let plus = loss(&theta);
        theta[i] = orig - eps;
        let minus = loss(&theta);
        theta[i] = orig;
        let n = (plus - minus) / (2.0 * eps);
        let err = relative_error(analytic[i], n);
        if worst_index.is_none() || err > max_rel_error {
            max_rel_error = err;
            worst_index = Some(i);
        }
        numeric.push(n);
    }
    GradCheckReport {
        max_rel_error,
        worst_index,
        numeric,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact() {
        let r = grad_check(|t| t[0] * t[0], &[6.0], &[3.0], 1e-5);
        assert!((r.numeric[0] - 6.0).abs() < 1e-8);
        assert!(r.max_rel_error < 1e-10, "{}", r.max_rel_error);
    }

    #[test]
    fn constant_has_zero_gradient() {
        let r = grad_check(|_| 4.2, &[0.0, 0.0], &[1.0, -2.0], 1e-5);
        assert_eq!(r.numeric, vec![0.0, 0.0]);
        assert_eq!(r.max_rel_error, 0.0);
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let r = grad_check(|t| t[0] * t[1], &[2.0, 5.0], &[2.0, 3.0], 1e-5);
        assert_eq!(r.worst_index, Some(1));
        assert!(r.max_rel_error > 0.1);
    }
}
