/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Central-difference gradient of `f` at `x`.
///
/// `x` is perturbed in place one coordinate at a time and restored before
/// returning.
pub fn finite_diff_grad<F>(mut f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let orig = probe[j];
        probe[j] = orig + h;
        let up = f(&probe);
        probe[j] = orig - h;
        let down = f(&probe);
        probe[j] = orig;
        grad.push((up - down) / (2.0 * h));
    }
    grad
}

/// `|a − b| / max(1, |a|, |b|)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Largest [`relative_error`] over paired entries.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "gradient lengths differ");
    a.iter()
        .zip(b)
        .map(|(&x, &y)| relative_error(x, y))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sum_of_squares() {
        let g = finite_diff_grad(|x| x.iter().map(|v| v * v).sum(), &[1.0, 2.0], 1e-5);
        assert!((g[0] - 2.0).abs() < 1e-8);
        assert!((g[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let g = finite_diff_grad(|_| 3.25, &[0.5, -1.0, 9.0], DEFAULT_STEP);
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn relative_error_uses_unit_floor() {
        assert_eq!(relative_error(1e-3, 2e-3), 1e-3);
        assert_eq!(relative_error(100.0, 101.0), 1.0 / 101.0);
    }

    proptest! {
        // central differences are exact up to the third-derivative term h²/6·f'''
        #[test]
        fn cubic_polynomials_within_h_squared(
            a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64, d in -3.0..3.0f64,
            x in -2.0..2.0f64,
        ) {
            let h = 1e-3;
            let f = |v: &[f64]| a * v[0].powi(3) + b * v[0].powi(2) + c * v[0] + d;
            let exact = 3.0 * a * x * x + 2.0 * b * x + c;
            let g = finite_diff_grad(f, &[x], h);
            let bound = a.abs() * h * h + 1e-9;
            prop_assert!((g[0] - exact).abs() <= bound, "{} vs {}", g[0], exact);
        }
    }
}
