//! Eulerian/Lagrangian coordinate machinery on the annulus.
//!
//! The Lagrangian mass coordinate of a radius `z` is the cumulative
//! shell mass `h(z) = integral_a^z y^2 rho0(y) dy`; it is strictly
//! increasing whenever the density is positive, so its inverse `r0`
//! exists and maps `[0, M]` back to `[a, b]`. Along a flow the radius
//! field obeys `r_t = u` and `r_x = 1/(r^2 rho)`, which gives two
//! independent routes to `r`: advancing it as a prognostic field, and
//! reconstructing it from the density by quadrature. Both are kept and
//! tested against each other.
//!
//! The physical mass interval `[0, M]` is used as the computational
//! domain; the unit normalization `h(b) = 1` is deliberately not
//! applied so that closed-form masses remain directly comparable.

use crate::stencil::{cumtrapz, ddx, trapezoid};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid annulus geometry: {0}")]
    InvalidGeometry(String),
    #[error("density sample {index} is not strictly positive ({value})")]
    NonPositiveDensity { index: usize, value: f64 },
    #[error("need at least 8 density samples, got {0}")]
    TooFewSamples(usize),
    #[error("mass coordinate {x} outside [0, {mass}]")]
    OutOfRange { x: f64, mass: f64 },
    #[error("radius field is not strictly increasing at node {index}")]
    NonMonotoneRadius { index: usize },
    #[error("profile samples must cover [{a}, {b}] with strictly increasing abscissae")]
    BadProfileSamples { a: f64, b: f64 },
    #[error("grid needs at least 8 cells, got {0}")]
    TooFewCells(usize),
}

/// Bounded concentric annulus `a < |x| < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusGeometry {
    pub a: f64,
    pub b: f64,
}

impl AnnulusGeometry {
    pub fn new(a: f64, b: f64) -> Result<Self, GridError> {
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(GridError::InvalidGeometry(format!(
                "need 0 < a < b < inf, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b })
    }

    /// Shell volume integral `(b^3 - a^3)/3`.
    pub fn shell_volume(&self) -> f64 {
        (self.b.powi(3) - self.a.powi(3)) / 3.0
    }
}

/// Uniform discretization of the Lagrangian mass interval `[0, M]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassGrid {
    pub geometry: AnnulusGeometry,
    pub n_cells: usize,
    pub total_mass: f64,
    pub dx: f64,
}

impl MassGrid {
    pub fn new(geometry: AnnulusGeometry, n_cells: usize, total_mass: f64) -> Result<Self, GridError> {
        if n_cells < 8 {
            return Err(GridError::TooFewCells(n_cells));
        }
        if !(total_mass > 0.0 && total_mass.is_finite()) {
            return Err(GridError::InvalidGeometry(format!(
                "total mass must be positive, got {total_mass}"
            )));
        }
        let dx = total_mass / n_cells as f64;
        Ok(Self { geometry, n_cells, total_mass, dx })
    }

    /// Grid for a spatially constant initial density; the total mass is
    /// the closed-form shell integral and carries no quadrature error.
    pub fn from_constant_density(
        geometry: AnnulusGeometry,
        n_cells: usize,
        rho0: f64,
    ) -> Result<Self, GridError> {
        if !(rho0 > 0.0) {
            return Err(GridError::NonPositiveDensity { index: 0, value: rho0 });
        }
        Self::new(geometry, n_cells, rho0 * geometry.shell_volume())
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn node_x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node_x(i)).collect()
    }
}

/// Monotone radius-to-mass table built from density samples on a
/// uniform radius grid.
#[derive(Debug, Clone)]
pub struct HTable {
    /// Uniformly spaced radii from `a` to `b`.
    pub radii: Vec<f64>,
    /// Cumulative shell mass at each radius; `masses[0] = 0`.
    pub masses: Vec<f64>,
    /// Integrand samples `y^2 rho0(y)`, kept for Newton polishing.
    integrand: Vec<f64>,
}

impl HTable {
    pub fn total_mass(&self) -> f64 {
        *self.masses.last().unwrap()
    }
}

/// Build the mass coordinate `h` from an initial density profile
/// sampled on a uniform radius grid over `[a, b]`.
pub fn mass_coordinate(
    rho0: &[f64],
    geom: AnnulusGeometry,
) -> Result<(f64, HTable), GridError> {
    if rho0.len() < 8 {
        return Err(GridError::TooFewSamples(rho0.len()));
    }
    for (i, &v) in rho0.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(GridError::NonPositiveDensity { index: i, value: v });
        }
    }
    let m = rho0.len() - 1;
    let dr = (geom.b - geom.a) / m as f64;
    let radii: Vec<f64> = (0..=m).map(|j| geom.a + j as f64 * dr).collect();
    let integrand: Vec<f64> = radii.iter().zip(rho0).map(|(y, rho)| y * y * rho).collect();
    let masses = cumtrapz(&integrand, dr);
    let table = HTable { radii, masses, integrand };
    Ok((table.total_mass(), table))
}

/// Invert the mass coordinate: the unique radius with `h(r) = x`.
///
/// Bisection brackets the root inside one table cell, then Newton
/// iterations with the piecewise-linear integrand polish it to an
/// absolute radius tolerance of `1e-12 * b`.
pub fn r0_from_x(x: f64, table: &HTable) -> Result<f64, GridError> {
    let mass = table.total_mass();
    if !(x >= 0.0 && x <= mass) {
        return Err(GridError::OutOfRange { x, mass });
    }
    let (a, b) = (table.radii[0], *table.radii.last().unwrap());
    if x == 0.0 {
        return Ok(a);
    }
    if x == mass {
        return Ok(b);
    }
    // Locate the table cell containing x.
    let j = match table.masses.binary_search_by(|m| m.partial_cmp(&x).unwrap()) {
        Ok(j) => return Ok(table.radii[j]),
        Err(j) => j - 1,
    };
    let dr = table.radii[1] - table.radii[0];
    let (r_lo, m_lo) = (table.radii[j], table.masses[j]);
    let (f_lo, f_hi) = (table.integrand[j], table.integrand[j + 1]);
    // Within the cell h is the exact integral of the linearly
    // interpolated integrand: a quadratic in (r - r_lo).
    let h_local = |r: f64| {
        let t = r - r_lo;
        let f_r = f_lo + (f_hi - f_lo) * t / dr;
        m_lo + 0.5 * t * (f_lo + f_r)
    };
    let dh_local = |r: f64| f_lo + (f_hi - f_lo) * (r - r_lo) / dr;
    let tol = 1e-12 * b;
    // Bisection to a loose bracket.
    let (mut lo, mut hi) = (r_lo, r_lo + dr);
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if h_local(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Newton polish; the derivative is bounded away from zero because
    // the integrand is positive.
    let mut r = 0.5 * (lo + hi);
    for _ in 0..30 {
        let step = (h_local(r) - x) / dh_local(r);
        r -= step;
        r = r.clamp(r_lo, r_lo + dr);
        if step.abs() <= tol {
            break;
        }
    }
    Ok(r.clamp(a, b))
}

/// Initial radius field: `r0` evaluated at every grid node.
pub fn initial_radii(grid: &MassGrid, table: &HTable) -> Result<Vec<f64>, GridError> {
    (0..grid.n_nodes())
        .map(|i| r0_from_x(grid.node_x(i).min(table.total_mass()), table))
        .collect()
}

/// Radius field for a constant initial density, from the closed-form
/// inverse `r = (a^3 + 3 x / rho0)^(1/3)`.
pub fn constant_density_radii(grid: &MassGrid, rho0: f64) -> Vec<f64> {
    let a3 = grid.geometry.a.powi(3);
    (0..grid.n_nodes())
        .map(|i| (a3 + 3.0 * grid.node_x(i) / rho0).cbrt())
        .collect()
}

/// Reconstruct the radius field from a density field by quadrature of
/// `r_x = 1/(r^2 rho)`: `r(x) = (a^3 + 3 int_0^x rho^-1)^(1/3)`.
pub fn reconstruct_r(rho: &[f64], grid: &MassGrid) -> Result<Vec<f64>, GridError> {
    for (i, &v) in rho.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(GridError::NonPositiveDensity { index: i, value: v });
        }
    }
    let inv: Vec<f64> = rho.iter().map(|v| 1.0 / v).collect();
    let vol = cumtrapz(&inv, grid.dx);
    let a3 = grid.geometry.a.powi(3);
    let mut r: Vec<f64> = vol.iter().map(|t| (a3 + 3.0 * t).cbrt()).collect();
    r[0] = grid.geometry.a;
    Ok(r)
}

/// One forward-Euler stage of `r_t = u`; the time integrator combines
/// these stages exactly as it does for the state fields.
pub fn advance_r(r: &[f64], u: &[f64], dt: f64) -> Vec<f64> {
    assert_eq!(r.len(), u.len());
    assert!(dt > 0.0, "advance_r needs dt > 0");
    r.iter().zip(u).map(|(ri, ui)| ri + dt * ui).collect()
}

/// Density from the radius field via `rho = 1/(r^2 r_x)`.
pub fn density_from_r(r: &[f64], grid: &MassGrid) -> Result<Vec<f64>, GridError> {
    for i in 1..r.len() {
        if !(r[i] > r[i - 1]) {
            return Err(GridError::NonMonotoneRadius { index: i });
        }
    }
    let drdx = ddx(r, grid.dx);
    let mut rho = Vec::with_capacity(r.len());
    for i in 0..r.len() {
        if !(drdx[i] > 0.0) {
            return Err(GridError::NonMonotoneRadius { index: i });
        }
        rho.push(1.0 / (r[i] * r[i] * drdx[i]));
    }
    Ok(rho)
}

/// Total volume `int_0^M rho^-1 dx`; conserved in time because the
/// boundary velocities vanish.
pub fn total_volume(rho: &[f64], grid: &MassGrid) -> f64 {
    let inv: Vec<f64> = rho.iter().map(|v| 1.0 / v).collect();
    trapezoid(&inv, grid.dx)
}

/// Linear resampling of two-column `(radius, value)` samples onto a
/// uniform radius grid over `[a, b]`.
pub fn uniform_resample(
    points: &[(f64, f64)],
    geom: AnnulusGeometry,
    n_out: usize,
) -> Result<Vec<f64>, GridError> {
    if points.len() < 2
        || points.windows(2).any(|w| w[1].0 <= w[0].0)
        || points[0].0 > geom.a
        || points.last().unwrap().0 < geom.b
    {
        return Err(GridError::BadProfileSamples { a: geom.a, b: geom.b });
    }
    let dr = (geom.b - geom.a) / (n_out - 1) as f64;
    let mut out = Vec::with_capacity(n_out);
    let mut k = 0usize;
    for j in 0..n_out {
        let r = geom.a + j as f64 * dr;
        while k + 2 < points.len() && points[k + 1].0 < r {
            k += 1;
        }
        let (r0, v0) = points[k];
        let (r1, v1) = points[k + 1];
        out.push(v0 + (v1 - v0) * (r - r0) / (r1 - r0));
    }
    Ok(out)
}
