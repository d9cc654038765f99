//! Dense linear-algebra cross-checks, deliberately independent of the
//! production solver paths.
//!
//! Everything here is written for matrices of a few hundred rows: LU
//! with partial pivoting, a scaling-and-squaring matrix exponential,
//! Hessenberg reduction plus double-shift QR for eigenvalues, and
//! inverse power iteration for a targeted eigenpair. The acoustic
//! operator builders at the bottom reconstruct the discrete
//! frozen-coefficient linearization from the stencil formulas directly,
//! so a transcription error in the solver's shared stencil code would
//! show up as a mismatch instead of cancelling out.

/// Deterministic 64-bit generator for randomized suites.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Solve `A x = b` by LU factorization with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, &'static str> {
    let n = a.len();
    assert_eq!(b.len(), n);
    for k in 0..n {
        let (mut pivot_row, mut pivot_val) = (k, a[k][k].abs());
        for i in k + 1..n {
            if a[i][k].abs() > pivot_val {
                pivot_row = i;
                pivot_val = a[i][k].abs();
            }
        }
        if pivot_val == 0.0 {
            return Err("singular matrix");
        }
        if pivot_row != k {
            a.swap(k, pivot_row);
            b.swap(k, pivot_row);
        }
        for i in k + 1..n {
            let factor = a[i][k] / a[k][k];
            if factor != 0.0 {
                for j in k..n {
                    a[i][j] -= factor * a[k][j];
                }
                b[i] -= factor * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = b[i];
        for j in i + 1..n {
            sum -= a[i][j] * x[j];
        }
        x[i] = sum / a[i][i];
    }
    Ok(x)
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let k_dim = b.len();
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for k in 0..k_dim {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..m {
                    c[i][j] += aik * b[k][j];
                }
            }
        }
    }
    c
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(aij, xj)| aij * xj).sum())
        .collect()
}

fn norm_inf(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(t A) y0` by scaling and squaring with a Taylor kernel run to
/// machine precision; exact time integration of `y' = A y`.
pub fn mat_exp_apply(a: &[Vec<f64>], t: f64, y0: &[f64]) -> Vec<f64> {
    let n = a.len();
    let norm = norm_inf(a) * t.abs();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = t / f64::powi(2.0, squarings as i32);
    let b: Vec<Vec<f64>> = a
        .iter()
        .map(|row| row.iter().map(|v| v * scale).collect())
        .collect();
    let mut exp = vec![vec![0.0; n]; n];
    let mut term = vec![vec![0.0; n]; n];
    for i in 0..n {
        exp[i][i] = 1.0;
        term[i][i] = 1.0;
    }
    for k in 1..80 {
        term = mat_mul(&term, &b);
        let inv_k = 1.0 / k as f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv_k;
            }
        }
        for i in 0..n {
            for j in 0..n {
                exp[i][j] += term[i][j];
            }
        }
        if norm_inf(&term) < 1e-20 * norm_inf(&exp) {
            break;
        }
    }
    let mut result = exp;
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    mat_vec(&result, y0)
}

fn sign_like(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Householder reduction to upper Hessenberg form (similarity).
fn hessenberg(a_in: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a_in.len();
    let mut a: Vec<Vec<f64>> = a_in.to_vec();
    if n < 3 {
        return a;
    }
    for col in 0..n - 2 {
        let norm: f64 = (col + 1..n).map(|i| a[i][col] * a[i][col]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = -sign_like(norm, a[col + 1][col]);
        let mut v = vec![0.0; n];
        v[col + 1] = a[col + 1][col] - alpha;
        for i in col + 2..n {
            v[i] = a[i][col];
        }
        let v_norm2: f64 = v.iter().map(|x| x * x).sum();
        if v_norm2 == 0.0 {
            continue;
        }
        // Left: A <- (I - 2 v v^T / v^T v) A
        for j in 0..n {
            let dot: f64 = (col + 1..n).map(|i| v[i] * a[i][j]).sum();
            let c = 2.0 * dot / v_norm2;
            for i in col + 1..n {
                a[i][j] -= c * v[i];
            }
        }
        // Right: A <- A (I - 2 v v^T / v^T v)
        for i in 0..n {
            let dot: f64 = (col + 1..n).map(|j| a[i][j] * v[j]).sum();
            let c = 2.0 * dot / v_norm2;
            for j in col + 1..n {
                a[i][j] -= c * v[j];
            }
        }
    }
    a
}

/// All eigenvalues of a real square matrix as `(re, im)` pairs, via
/// Hessenberg reduction and the classic double-shift QR iteration.
pub fn eigenvalues(a_in: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let n = a_in.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![(a_in[0][0], 0.0)];
    }
    let mut a = hessenberg(a_in);
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn: isize = n as isize - 1;
    let mut t = 0.0;
    'outer: while nn >= 0 {
        let mut its = 0;
        loop {
            // Look for a single negligible subdiagonal element.
            let mut l = nn;
            while l >= 1 {
                let mut s = a[(l - 1) as usize][(l - 1) as usize].abs()
                    + a[l as usize][l as usize].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l as usize][(l - 1) as usize].abs() <= f64::EPSILON * s {
                    a[l as usize][(l - 1) as usize] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn as usize][nn as usize];
            if l == nn {
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
                continue 'outer;
            }
            let mut y = a[(nn - 1) as usize][(nn - 1) as usize];
            let mut w = a[nn as usize][(nn - 1) as usize] * a[(nn - 1) as usize][nn as usize];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign_like(z, p);
                    wr[(nn - 1) as usize] = x + z;
                    wr[nn as usize] = if z != 0.0 { x - w / z } else { x + z };
                    wi[(nn - 1) as usize] = 0.0;
                    wi[nn as usize] = 0.0;
                } else {
                    wr[(nn - 1) as usize] = x + p;
                    wr[nn as usize] = x + p;
                    wi[(nn - 1) as usize] = -z;
                    wi[nn as usize] = z;
                }
                nn -= 2;
                continue 'outer;
            }
            assert!(its < 30, "QR eigenvalue iteration failed to converge");
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in 0..=nn as usize {
                    a[i][i] -= x;
                }
                let s = a[nn as usize][(nn - 1) as usize].abs()
                    + a[(nn - 1) as usize][(nn - 2) as usize].abs();
                y = 0.75 * s;
                x = y;
                w = -0.4375 * s * s;
            }
            its += 1;
            // Form the shift and look for two consecutive small
            // subdiagonal elements.
            let mut m = nn - 2;
            let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
            while m >= l {
                let z = a[m as usize][m as usize];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1) as usize][m as usize]
                    + a[m as usize][(m + 1) as usize];
                q = a[(m + 1) as usize][(m + 1) as usize] - z - rr - ss;
                r = a[(m + 2) as usize][(m + 1) as usize];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m as usize][(m - 1) as usize].abs() * (q.abs() + r.abs());
                let v = p.abs()
                    * (a[(m - 1) as usize][(m - 1) as usize].abs()
                        + z.abs()
                        + a[(m + 1) as usize][(m + 1) as usize].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[i as usize][(i - 2) as usize] = 0.0;
                if i != m + 2 {
                    a[i as usize][(i - 3) as usize] = 0.0;
                }
            }
            // Double QR sweep over rows l..nn, columns m..nn.
            let mut k = m;
            while k <= nn - 1 {
                if k != m {
                    p = a[k as usize][(k - 1) as usize];
                    q = a[(k + 1) as usize][(k - 1) as usize];
                    r = if k != nn - 1 { a[(k + 2) as usize][(k - 1) as usize] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign_like((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k as usize][(k - 1) as usize] = -a[k as usize][(k - 1) as usize];
                        }
                    } else {
                        a[k as usize][(k - 1) as usize] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k as usize..=nn as usize {
                        let mut pp = a[k as usize][j] + q * a[(k + 1) as usize][j];
                        if k != nn - 1 {
                            pp += r * a[(k + 2) as usize][j];
                            a[(k + 2) as usize][j] -= pp * z;
                        }
                        a[(k + 1) as usize][j] -= pp * y;
                        a[k as usize][j] -= pp * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l as usize..=mmin as usize {
                        let mut pp = x * a[i][k as usize] + y * a[i][(k + 1) as usize];
                        if k != nn - 1 {
                            pp += z * a[i][(k + 2) as usize];
                            a[i][(k + 2) as usize] -= pp * r;
                        }
                        a[i][(k + 1) as usize] -= pp * q;
                        a[i][k as usize] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    wr.into_iter().zip(wi).collect()
}

/// Smallest-magnitude eigenpair by inverse power iteration.
///
/// Returns the Rayleigh-quotient eigenvalue and the normalized vector;
/// panics if the final residual indicates non-convergence. Only suited
/// to well-separated smallest eigenvalues; use
/// [`shifted_inverse_eigenpair`] near clustered ones.
pub fn inverse_power_iteration(a: &[Vec<f64>], iters: usize) -> (f64, Vec<f64>) {
    let n = a.len();
    let mut v: Vec<f64> = (0..n)
        .map(|i| ((i + 1) as f64 * 0.7).sin() + 0.01)
        .collect();
    for _ in 0..iters {
        let next = dense_solve(a.to_vec(), v.clone()).expect("singular operator");
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = next.into_iter().map(|x| x / norm).collect();
    }
    let av = mat_vec(a, &v);
    let lambda: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
    let residual: f64 = av
        .iter()
        .zip(&v)
        .map(|(y, x)| (y - lambda * x) * (y - lambda * x))
        .sum::<f64>()
        .sqrt();
    assert!(
        residual <= 1e-8 * lambda.abs().max(1e-300),
        "inverse iteration residual {residual} at eigenvalue {lambda}"
    );
    (lambda, v)
}

/// Eigenpair nearest a shift, by inverse iteration on `A - sigma I`.
///
/// The shift is backed off by a relative `1e-4` so the solve stays
/// regular while convergence to the target remains immediate even
/// inside a near-degenerate cluster (the shift picks the member).
pub fn shifted_inverse_eigenpair(a: &[Vec<f64>], sigma: f64, iters: usize) -> (f64, Vec<f64>) {
    let n = a.len();
    let shift = sigma * (1.0 - 1e-4);
    let mut shifted = a.to_vec();
    for (i, row) in shifted.iter_mut().enumerate() {
        row[i] -= shift;
    }
    let mut v: Vec<f64> = (0..n)
        .map(|i| ((i + 1) as f64 * 0.7).sin() + 0.01)
        .collect();
    for _ in 0..iters {
        let next = dense_solve(shifted.clone(), v.clone()).expect("singular shifted operator");
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = next.into_iter().map(|x| x / norm).collect();
    }
    let av = mat_vec(a, &v);
    let lambda: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
    let residual: f64 = av
        .iter()
        .zip(&v)
        .map(|(y, x)| (y - lambda * x) * (y - lambda * x))
        .sum::<f64>()
        .sqrt();
    assert!(
        residual <= 1e-8 * lambda.abs().max(1e-300),
        "shifted inverse iteration residual {residual} at eigenvalue {lambda}"
    );
    (lambda, v)
}

/// First-derivative matrix for the shared stencil family, written out
/// from the coefficient formulas.
pub fn derivative_matrix(n_nodes: usize, dx: f64) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n_nodes]; n_nodes];
    let h2 = 2.0 * dx;
    d[0][0] = -3.0 / h2;
    d[0][1] = 4.0 / h2;
    d[0][2] = -1.0 / h2;
    for i in 1..n_nodes - 1 {
        d[i][i - 1] = -1.0 / h2;
        d[i][i + 1] = 1.0 / h2;
    }
    d[n_nodes - 1][n_nodes - 1] = 3.0 / h2;
    d[n_nodes - 1][n_nodes - 2] = -4.0 / h2;
    d[n_nodes - 1][n_nodes - 3] = 1.0 / h2;
    d
}

/// Discrete frozen-coefficient acoustic operator in first-order form.
///
/// State vector `z = (P_0..P_n, u_1..u_{n-1})` with
/// `P' = -kappa D(r^2 u)` (boundary velocities identically zero) and
/// `u' = -r^2 D(P)` at interior nodes.
pub fn acoustic_first_order_matrix(kappa: &[f64], r: &[f64], dx: f64) -> Vec<Vec<f64>> {
    let n_nodes = kappa.len();
    assert_eq!(r.len(), n_nodes);
    let n_int = n_nodes - 2;
    let size = n_nodes + n_int;
    let d = derivative_matrix(n_nodes, dx);
    let mut a = vec![vec![0.0; size]; size];
    for i in 0..n_nodes {
        for j in 1..n_nodes - 1 {
            a[i][n_nodes + j - 1] = -kappa[i] * d[i][j] * r[j] * r[j];
        }
    }
    for j in 1..n_nodes - 1 {
        for i in 0..n_nodes {
            a[n_nodes + j - 1][i] = -r[j] * r[j] * d[j][i];
        }
    }
    a
}

/// Second-order form of the same operator on the interior velocity
/// space: `u'' = -L u`, so the eigenvalues of `L` are the squared
/// oscillation frequencies.
pub fn acoustic_second_order_matrix(kappa: &[f64], r: &[f64], dx: f64) -> Vec<Vec<f64>> {
    let n_nodes = kappa.len();
    let n_int = n_nodes - 2;
    let d = derivative_matrix(n_nodes, dx);
    let mut l = vec![vec![0.0; n_int]; n_int];
    for jj in 0..n_int {
        let col = jj + 1;
        // Column of L: apply the operator to the unit vector e_col.
        let mut y = vec![0.0; n_nodes];
        y[col] = r[col] * r[col];
        let dy = mat_vec(&d, &y);
        let flux: Vec<f64> = dy.iter().zip(kappa).map(|(v, k)| v * k).collect();
        let d2 = mat_vec(&d, &flux);
        for ii in 0..n_int {
            let row = ii + 1;
            l[ii][jj] = -r[row] * r[row] * d2[row];
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve_random_system() {
        let mut rng = SplitMix64::new(11);
        let n = 24;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 4.0 + rng.next_f64() } else { rng.next_f64() - 0.5 })
                    .collect()
            })
            .collect();
        let x_true: Vec<f64> = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        let b = mat_vec(&a, &x_true);
        let x = dense_solve(a, b).unwrap();
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn matrix_exponential_rotation() {
        // exp(t [[0, 1], [-1, 0]]) is a rotation by t.
        let a = vec![vec![0.0, 1.0], vec![-1.0, 0.0]];
        let y = mat_exp_apply(&a, 0.7, &[1.0, 0.0]);
        assert!((y[0] - 0.7_f64.cos()).abs() < 1e-14);
        assert!((y[1] + 0.7_f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn matrix_exponential_diagonal() {
        let a = vec![vec![-2.0, 0.0], vec![0.0, 0.5]];
        let y = mat_exp_apply(&a, 3.0, &[1.0, 1.0]);
        assert!((y[0] - (-6.0_f64).exp()).abs() < 1e-16);
        assert!((y[1] - (1.5_f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn eigenvalues_of_triangular_matrix() {
        let a = vec![
            vec![3.0, 1.0, -2.0],
            vec![0.0, -1.5, 0.3],
            vec![0.0, 0.0, 7.0],
        ];
        let mut eigs: Vec<f64> = eigenvalues(&a).into_iter().map(|(re, _)| re).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((eigs[0] + 1.5).abs() < 1e-12);
        assert!((eigs[1] - 3.0).abs() < 1e-12);
        assert!((eigs[2] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_rotation_are_imaginary() {
        let a = vec![vec![0.0, 2.0], vec![-2.0, 0.0]];
        let eigs = eigenvalues(&a);
        let mut ims: Vec<f64> = eigs.iter().map(|&(_, im)| im).collect();
        ims.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((ims[0] + 2.0).abs() < 1e-12);
        assert!((ims[1] - 2.0).abs() < 1e-12);
        assert!(eigs.iter().all(|&(re, _)| re.abs() < 1e-12));
    }

    #[test]
    fn eigenvalues_of_discrete_laplacian() {
        // tridiag(-1, 2, -1) of size m has eigenvalues
        // 2 - 2 cos(k pi / (m+1)).
        let m = 20;
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..m {
            a[i][i] = 2.0;
            if i > 0 {
                a[i][i - 1] = -1.0;
            }
            if i + 1 < m {
                a[i][i + 1] = -1.0;
            }
        }
        let mut eigs: Vec<f64> = eigenvalues(&a).into_iter().map(|(re, _)| re).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for k in 1..=m {
            let exact = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (m as f64 + 1.0)).cos();
            assert!((eigs[k - 1] - exact).abs() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn eigenvalues_of_companion_matrix() {
        // (x-1)(x-2)(x-3)(x^2+1) = x^5 - 6x^4 + 12x^3 - 12x^2 + 11x - 6
        let coeffs = [-6.0, 11.0, -12.0, 12.0, -6.0]; // c0..c4, monic
        let n = 5;
        let mut a = vec![vec![0.0; n]; n];
        for i in 1..n {
            a[i][i - 1] = 1.0;
        }
        for i in 0..n {
            a[i][n - 1] = -coeffs[i];
        }
        let mut eigs = eigenvalues(&a);
        eigs.sort_by(|x, y| (x.0, x.1).partial_cmp(&(y.0, y.1)).unwrap());
        let expected = [(0.0, -1.0), (0.0, 1.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)];
        for (got, want) in eigs.iter().zip(expected) {
            assert!(
                (got.0 - want.0).abs() < 1e-9 && (got.1 - want.1).abs() < 1e-9,
                "got {got:?}, want {want:?}"
            );
        }
    }

    #[test]
    fn eigenvalue_sums_match_traces() {
        let mut rng = SplitMix64::new(5);
        let n = 40;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
            .collect();
        let eigs = eigenvalues(&a);
        let trace: f64 = (0..n).map(|i| a[i][i]).sum();
        let sum_re: f64 = eigs.iter().map(|&(re, _)| re).sum();
        assert!((trace - sum_re).abs() < 1e-8 * trace.abs().max(1.0));
        // Sum of squares (complex-aware) matches trace(A^2).
        let a2 = mat_mul(&a, &a);
        let trace2: f64 = (0..n).map(|i| a2[i][i]).sum();
        let sum2: f64 = eigs.iter().map(|&(re, im)| re * re - im * im).sum();
        assert!((trace2 - sum2).abs() < 1e-7 * trace2.abs().max(1.0));
    }

    #[test]
    fn inverse_iteration_finds_smallest_laplacian_mode() {
        let m = 30;
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..m {
            a[i][i] = 2.0;
            if i > 0 {
                a[i][i - 1] = -1.0;
            }
            if i + 1 < m {
                a[i][i + 1] = -1.0;
            }
        }
        let (lambda, _) = inverse_power_iteration(&a, 60);
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (m as f64 + 1.0)).cos();
        assert!((lambda - exact).abs() < 1e-10);
    }

    #[test]
    fn derivative_matrix_matches_stencil() {
        let n = 12;
        let dx = 0.17;
        let d = derivative_matrix(n + 1, dx);
        let f: Vec<f64> = (0..=n).map(|i| ((i as f64) * dx).powi(2)).collect();
        let from_matrix = mat_vec(&d, &f);
        let from_stencil = crate::stencil::ddx(&f, dx);
        for i in 0..=n {
            assert!((from_matrix[i] - from_stencil[i]).abs() < 1e-12);
        }
    }
}
