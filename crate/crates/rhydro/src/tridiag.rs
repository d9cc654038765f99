//! Thomas algorithm for tridiagonal systems.

/// Tridiagonal matrix in banded storage. `sub[0]` and `sup[n-1]` are
/// unused padding so all three bands have the same length.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Solve `A x = rhs` by forward elimination and back substitution.
    ///
    /// Panics on a zero pivot; the elliptic assemblies in this crate
    /// produce strictly diagonally dominant matrices, so a zero pivot
    /// indicates corrupted coefficients upstream.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        assert!(n > 0);
        let mut c_star = vec![0.0; n];
        let mut d_star = vec![0.0; n];
        assert!(self.diag[0] != 0.0, "zero pivot at row 0");
        c_star[0] = self.sup[0] / self.diag[0];
        d_star[0] = rhs[0] / self.diag[0];
        for i in 1..n {
            let den = self.diag[i] - self.sub[i] * c_star[i - 1];
            assert!(den != 0.0, "zero pivot at row {i}");
            if i < n - 1 {
                c_star[i] = self.sup[i] / den;
            }
            d_star[i] = (rhs[i] - self.sub[i] * d_star[i - 1]) / den;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d_star[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d_star[i] - c_star[i] * x[i + 1];
        }
        x
    }

    /// `A x` for residual checks.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = self.diag[i] * x[i];
            if i > 0 {
                y[i] += self.sub[i] * x[i - 1];
            }
            if i < n - 1 {
                y[i] += self.sup[i] * x[i + 1];
            }
        }
        y
    }
}
