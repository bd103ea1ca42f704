mod common;

use common::checks::{finite_difference, grad_error, gradient_checks, lazy_vs_eager};

#[test]
fn finite_differences_are_accurate_on_a_cubic() {
    let f = |x: &[f64]| x[0].powi(3) + 2.0 * x[0] * x[1];
    let fd = finite_difference(&f, &[1.5, -2.0]);
    assert!(grad_error(&[3.0 * 2.25 - 4.0, 3.0], &fd) < 1e-10);
}

#[test]
fn analytic_gradients_match_finite_differences() {
    for (name, err) in gradient_checks(20, 1) {
        assert!(err < 1e-6, "{name}: {err:e}");
    }
}

#[test]
fn lazy_updates_match_eager_oracles() {
    for (name, dev) in lazy_vs_eager(0..2, 3) {
        assert!(dev < 1e-9, "{name}: {dev:e}");
    }
}
