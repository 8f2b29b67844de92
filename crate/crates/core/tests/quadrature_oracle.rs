//! Adaptive integrator against independent references: a closed form, a
//! brute-force composite Simpson rule, and bisection-located kernel roots.

use std::f64::consts::PI;
use xydm_core::{gap_roots, integrate, IntegrationSpec, ModelParams};

/// Composite Simpson over [0, pi] with n (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    assert_eq!(n % 2, 0);
    let h = PI / n as f64;
    let mut acc = f(0.0) + f(PI);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(h * i as f64);
    }
    acc * h / 3.0
}

#[test]
fn damped_oscillation_matches_closed_form_and_simpson() {
    let f = |phi: f64| (12.0 * phi).cos() * (-phi).exp();
    // Int exp(a phi) cos(b phi) with a = -1, b = 12
    let exact = (1.0 - (-PI).exp()) / 145.0;
    let spec = IntegrationSpec::default();
    let got = integrate(f, &spec).unwrap();
    assert!((got - exact).abs() < 1e-12, "vs closed form: {got} vs {exact}");
    let brute = simpson(f, 1_000_000);
    assert!((got - brute).abs() < 1e-10, "vs simpson: {got} vs {brute}");
}

#[test]
fn kink_integrand_with_breakpoint() {
    let spec = IntegrationSpec::with_breakpoints(vec![PI / 2.0]);
    let got = integrate(|phi| phi.cos().abs(), &spec).unwrap();
    assert!((got - 2.0).abs() < 1e-11, "got {got}");
}

#[test]
fn integration_is_linear() {
    let spec = IntegrationSpec::default();
    let f = |phi: f64| (3.0 * phi).cos();
    let g = |phi: f64| 1.0 / (1.0 + phi * phi);
    let (a, b) = (2.5, -1.3);
    let lhs = integrate(|phi| a * f(phi) + b * g(phi), &spec).unwrap();
    let rhs = a * integrate(f, &spec).unwrap() + b * integrate(g, &spec).unwrap();
    assert!((lhs - rhs).abs() < 10.0 * spec.abs_tol, "{lhs} vs {rhs}");
}

#[test]
fn breakpoints_do_not_move_smooth_integrals() {
    let f = |phi: f64| (-phi).exp() * (5.0 * phi).sin();
    let plain = integrate(f, &IntegrationSpec::default()).unwrap();
    let split = integrate(f, &IntegrationSpec::with_breakpoints(vec![1.0, 2.0])).unwrap();
    assert!((plain - split).abs() < 1e-10, "{plain} vs {split}");
}

#[test]
fn kernel_roots_are_accurate_and_complete() {
    let grid_j = [0.3, 0.5, 1.0, 1.3, 1.7, 2.5];
    let grid_d = [0.0, 0.25, 0.5, 1.0];
    for &j in &grid_j {
        for &d in &grid_d {
            let params = ModelParams::new(j, 0.5, d).unwrap();
            let w = |phi: f64| j * (phi.cos() - 2.0 * d * phi.sin()) - 1.0;
            let roots = gap_roots(&params);

            for win in roots.windows(2) {
                assert!(win[0] < win[1], "roots not sorted at J={j} D={d}");
            }
            for &root in &roots {
                assert!((0.0..=PI).contains(&root));
                assert!(
                    w(root).abs() < 1e-9,
                    "residual {} at root {root}, J={j} D={d}",
                    w(root)
                );
            }

            // independent root location: bisection on sign changes
            let n = 20_000;
            for i in 0..n {
                let (mut a, mut b) = (PI * i as f64 / n as f64, PI * (i + 1) as f64 / n as f64);
                if w(a) * w(b) < 0.0 {
                    for _ in 0..80 {
                        let mid = 0.5 * (a + b);
                        if w(a) * w(mid) <= 0.0 {
                            b = mid;
                        } else {
                            a = mid;
                        }
                    }
                    let x = 0.5 * (a + b);
                    assert!(
                        roots.iter().any(|&r| (r - x).abs() < 1e-8),
                        "missed root {x} at J={j} D={d}, got {roots:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn zero_coupling_has_no_roots() {
    let params = ModelParams::new(0.0, 0.5, 0.7).unwrap();
    assert!(gap_roots(&params).is_empty());
    // sub-unit coupling keeps the kernel strictly negative
    let params = ModelParams::new(0.4, 0.5, 0.0).unwrap();
    assert!(gap_roots(&params).is_empty());
}
