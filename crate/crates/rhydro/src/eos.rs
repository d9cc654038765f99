//! Ideal polytropic gas relations among pressure, entropy, density and
//! temperature.
//!
//! With the gas constant and both radiation constants normalized to 1,
//! the closed-form relations are
//!
//! ```text
//! P     = rho * theta = A rho^((Cv+1)/Cv) exp(s/Cv)
//! theta = A rho^(1/Cv) exp(s/Cv)
//! rho   = (P/A)^(Cv/(Cv+1)) exp(-s/(Cv+1))
//! ```
//!
//! taking `(P, s)` as the independent pair everywhere. The equilibrium
//! state `(P, s) = (1, 1)` maps to `(c_rho, c_theta)` with
//! `c_rho * c_theta = 1` when `A = 1`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EosError {
    #[error("pressure must be strictly positive, got {0}")]
    NonPositivePressure(f64),
    #[error("invalid gas parameters: {0}")]
    InvalidParams(String),
}

/// Thermodynamic constants of the polytropic gas.
///
/// The specific gas constant and the two radiation constants are fixed
/// to 1 and not stored; only the specific heat `cv` and the entropy
/// constant `a_const` remain free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams {
    /// Specific heat at constant volume, `> 0`.
    pub cv: f64,
    /// Entropy constant `A` in the pressure law, `> 0` (default 1).
    pub a_const: f64,
}

impl Default for GasParams {
    fn default() -> Self {
        Self { cv: 1.5, a_const: 1.0 }
    }
}

impl GasParams {
    pub fn new(cv: f64, a_const: f64) -> Result<Self, EosError> {
        if !(cv > 0.0 && cv.is_finite()) {
            return Err(EosError::InvalidParams(format!("cv must be > 0, got {cv}")));
        }
        if !(a_const > 0.0 && a_const.is_finite()) {
            return Err(EosError::InvalidParams(format!("A must be > 0, got {a_const}")));
        }
        Ok(Self { cv, a_const })
    }

    /// `(Cv+1)/Cv`, the coefficient of `P rho (r^2 u)_x` in the
    /// pressure equation.
    pub fn pressure_exponent(&self) -> f64 {
        (self.cv + 1.0) / self.cv
    }
}

/// Density from pressure and specific entropy.
pub fn rho_from_p_s(p: f64, s: f64, params: &GasParams) -> Result<f64, EosError> {
    if !(p > 0.0) {
        return Err(EosError::NonPositivePressure(p));
    }
    let cv = params.cv;
    Ok((p / params.a_const).powf(cv / (cv + 1.0)) * (-s / (cv + 1.0)).exp())
}

/// Temperature from pressure and specific entropy.
pub fn theta_from_p_s(p: f64, s: f64, params: &GasParams) -> Result<f64, EosError> {
    let rho = rho_from_p_s(p, s, params)?;
    Ok(params.a_const * rho.powf(1.0 / params.cv) * (s / params.cv).exp())
}

/// Specific entropy from density and temperature (inverse relation,
/// used by round-trip checks and run summaries).
pub fn entropy_from_rho_theta(rho: f64, theta: f64, params: &GasParams) -> f64 {
    params.cv * (theta / (params.a_const * rho.powf(1.0 / params.cv))).ln()
}

/// Equilibrium density and temperature `(c_rho, c_theta)`, i.e. the
/// state variables at `(P, s) = (1, 1)`.
pub fn equilibrium_constants(params: &GasParams) -> (f64, f64) {
    let c_rho = rho_from_p_s(1.0, 1.0, params).expect("P = 1 is valid");
    let c_theta = theta_from_p_s(1.0, 1.0, params).expect("P = 1 is valid");
    (c_rho, c_theta)
}

/// Density and temperature fields from nodal `(P, s)` fields.
pub fn rho_theta_fields(
    p: &[f64],
    s: &[f64],
    params: &GasParams,
) -> Result<(Vec<f64>, Vec<f64>), EosError> {
    assert_eq!(p.len(), s.len());
    let mut rho = Vec::with_capacity(p.len());
    let mut theta = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        rho.push(rho_from_p_s(p[i], s[i], params)?);
        theta.push(theta_from_p_s(p[i], s[i], params)?);
    }
    Ok((rho, theta))
}
