//! Finite-difference stencils and quadrature on a uniform node grid.
//!
//! Every spatial derivative in the crate goes through [`ddx`] /
//! [`d2dx2`]: second-order central differences at interior nodes,
//! second-order one-sided stencils at the two boundary nodes. Integrals
//! use the composite trapezoid rule, which matches the second-order
//! accuracy of the stencils.

/// First derivative, second order everywhere. Needs at least 3 nodes.
pub fn ddx(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3, "ddx needs at least 3 nodes, got {n}");
    let mut out = vec![0.0; n];
    let h2 = 2.0 * dx;
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / h2;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / h2;
    }
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / h2;
    out
}

/// Second derivative, second order everywhere. Needs at least 4 nodes.
pub fn d2dx2(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 4, "d2dx2 needs at least 4 nodes, got {n}");
    let mut out = vec![0.0; n];
    let h2 = dx * dx;
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    out
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    assert!(n >= 2);
    let mut sum = 0.5 * (f[0] + f[n - 1]);
    for v in &f[1..n - 1] {
        sum += v;
    }
    sum * dx
}

/// Cumulative trapezoid integral; `out[0] = 0`.
pub fn cumtrapz(f: &[f64], dx: f64) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    for i in 1..f.len() {
        out[i] = out[i - 1] + 0.5 * dx * (f[i - 1] + f[i]);
    }
    out
}

/// Discrete L2 norm with trapezoid quadrature.
pub fn l2_norm(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    assert!(n >= 2);
    let mut sum = 0.5 * (f[0] * f[0] + f[n - 1] * f[n - 1]);
    for v in &f[1..n - 1] {
        sum += v * v;
    }
    (sum * dx).sqrt()
}

/// Trapezoid-weighted inner product of two nodal fields.
pub fn inner(f: &[f64], g: &[f64], dx: f64) -> f64 {
    assert_eq!(f.len(), g.len());
    let n = f.len();
    let mut sum = 0.5 * (f[0] * g[0] + f[n - 1] * g[n - 1]);
    for i in 1..n - 1 {
        sum += f[i] * g[i];
    }
    sum * dx
}

pub fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, len: f64) -> (Vec<f64>, f64) {
        let dx = len / n as f64;
        ((0..=n).map(|i| i as f64 * dx).collect(), dx)
    }

    #[test]
    fn ddx_exact_on_quadratics() {
        // The stencils are exact for polynomials up to degree 2,
        // including the one-sided boundary rows.
        let (xs, dx) = grid(16, 2.0);
        let f: Vec<f64> = xs.iter().map(|x| 3.0 * x * x - 2.0 * x + 1.0).collect();
        let d = ddx(&f, dx);
        for (i, x) in xs.iter().enumerate() {
            assert!((d[i] - (6.0 * x - 2.0)).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn d2dx2_exact_on_cubics() {
        let (xs, dx) = grid(16, 1.0);
        let f: Vec<f64> = xs.iter().map(|x| x * x * x).collect();
        let d2 = d2dx2(&f, dx);
        for (i, x) in xs.iter().enumerate() {
            assert!((d2[i] - 6.0 * x).abs() < 1e-10, "node {i}: {} vs {}", d2[i], 6.0 * x);
        }
    }

    #[test]
    fn ddx_second_order_convergence() {
        let err = |n: usize| {
            let (xs, dx) = grid(n, 1.0);
            let f: Vec<f64> = xs.iter().map(|x| (2.5 * x).sin()).collect();
            let d = ddx(&f, dx);
            xs.iter()
                .enumerate()
                .map(|(i, x)| (d[i] - 2.5 * (2.5 * x).cos()).abs())
                .fold(0.0_f64, f64::max)
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e1 / e2 > 3.5, "observed ratio {}", e1 / e2);
    }

    #[test]
    fn trapezoid_matches_closed_form() {
        let (xs, dx) = grid(4096, 1.0);
        let f: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((trapezoid(&f, dx) - 1.0 / 3.0).abs() < 1e-7);
        let g: Vec<f64> = xs.iter().map(|x| (std::f64::consts::PI * x).sin()).collect();
        assert!((l2_norm(&g, dx) - (0.5_f64).sqrt()).abs() < 1e-7);
    }

    #[test]
    fn cumtrapz_endpoint_equals_trapezoid() {
        let (xs, dx) = grid(100, 3.0);
        let f: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let c = cumtrapz(&f, dx);
        assert!((c[c.len() - 1] - trapezoid(&f, dx)).abs() < 1e-12);
    }
}
