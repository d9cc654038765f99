//! Discrete norms, energy functionals and a-priori-estimate monitors.
//!
//! The space-time norm of order `m` sums, over `k <= m`, the spatial
//! Sobolev norms `H^(m-k)` of the k-th time derivative of the
//! perturbation tuple `(P-1, u, s-1, q, q_x)`. Time derivatives are
//! never obtained by differencing stored slices; they come from
//! substituting the equation right-hand sides at the current state
//! (the same inductive construction used for the initial data), which
//! is exact for the discrete system and free of differencing noise.
//!
//! The construction provides flux time derivatives only through first
//! order, so the `k = 2` term of the `m = 2` norms carries the gas
//! fields `(P, u, s)` alone; all monitored constants are measured
//! quantities, reported rather than asserted against theory.

use crate::eos::equilibrium_constants;
use crate::evolution::{Problem, SimState};
use crate::initial_data::time_derivatives_at_zero;
use crate::stencil::{d2dx2, ddx, l2_norm, trapezoid};

/// Spatial Sobolev norm `H^j` of a tuple of nodal fields (square root
/// of the summed squares over fields and derivative orders `<= j`).
pub fn hm_norm(fields: &[&[f64]], j: usize, dx: f64) -> f64 {
    assert!(j <= 2, "spatial order capped at 2");
    let mut sum = 0.0;
    for f in fields {
        sum += l2_norm(f, dx).powi(2);
        if j >= 1 {
            sum += l2_norm(&ddx(f, dx), dx).powi(2);
        }
        if j >= 2 {
            sum += l2_norm(&d2dx2(f, dx), dx).powi(2);
        }
    }
    sum.sqrt()
}

fn l2_tuple(fields: &[&[f64]], dx: f64) -> f64 {
    fields.iter().map(|f| l2_norm(f, dx).powi(2)).sum::<f64>().sqrt()
}

/// All substitution derivatives needed by the order-2 norms at one
/// state.
struct Bundle {
    pert_p: Vec<f64>,
    pert_s: Vec<f64>,
    q_x: Vec<f64>,
    dp1: Vec<f64>,
    du1: Vec<f64>,
    ds1: Vec<f64>,
    q_t: Vec<f64>,
    q_x_t: Vec<f64>,
    dp2: Vec<f64>,
    du2: Vec<f64>,
    ds2: Vec<f64>,
}

fn bundle(problem: &Problem, state: &SimState) -> Bundle {
    let dx = problem.grid.dx;
    let derivs = time_derivatives_at_zero(problem, state, 2)
        .expect("substitution derivatives at a valid state");
    let q_t = derivs.q_t.expect("order 2 requested");
    Bundle {
        pert_p: state.p.iter().map(|v| v - 1.0).collect(),
        pert_s: state.s.iter().map(|v| v - 1.0).collect(),
        q_x: ddx(&state.q, dx),
        q_x_t: ddx(&q_t, dx),
        dp1: derivs.dp1,
        du1: derivs.du1,
        ds1: derivs.ds1,
        q_t,
        dp2: derivs.dp2.expect("order 2 requested"),
        du2: derivs.du2.expect("order 2 requested"),
        ds2: derivs.ds2.expect("order 2 requested"),
    }
}

/// Space-time norm of `(P-1, u, s-1, q, q_x)` at a state, `m <= 2`.
pub fn tuple_norm(problem: &Problem, state: &SimState, m: usize) -> f64 {
    assert!(m <= 2, "norm order capped at 2");
    let dx = problem.grid.dx;
    let b = bundle(problem, state);
    let level0: [&[f64]; 5] = [&b.pert_p, &state.u, &b.pert_s, &state.q, &b.q_x];
    let mut total = hm_norm(&level0, m, dx);
    if m >= 1 {
        let level1: [&[f64]; 5] = [&b.dp1, &b.du1, &b.ds1, &b.q_t, &b.q_x_t];
        total += hm_norm(&level1, m - 1, dx);
    }
    if m >= 2 {
        let level2: [&[f64]; 3] = [&b.dp2, &b.du2, &b.ds2];
        total += hm_norm(&level2, 0, dx);
    }
    total
}

/// Tangential norm: only time derivatives, each measured in L2.
pub fn tuple_norm_tan(problem: &Problem, state: &SimState, m: usize) -> f64 {
    assert!(m <= 2, "norm order capped at 2");
    let dx = problem.grid.dx;
    let b = bundle(problem, state);
    let level0: [&[f64]; 5] = [&b.pert_p, &state.u, &b.pert_s, &state.q, &b.q_x];
    let mut total = l2_tuple(&level0, dx);
    if m >= 1 {
        let level1: [&[f64]; 5] = [&b.dp1, &b.du1, &b.ds1, &b.q_t, &b.q_x_t];
        total += l2_tuple(&level1, dx);
    }
    if m >= 2 {
        let level2: [&[f64]; 3] = [&b.dp2, &b.du2, &b.ds2];
        total += l2_tuple(&level2, dx);
    }
    total
}

/// Quadratic energy and dissipation functionals of the lowest-order
/// estimate:
///
/// ```text
/// E0 = int  Cv/((Cv+1) c_rho) (P-1)^2 + u^2 + c_theta/((Cv+1) c_rho) (s-1)^2 dx
/// D0 = int  q^2/(4 c_theta^3) + c_rho^2 ((r^2 q)_x)^2 / (4 c_theta^3) dx
/// ```
pub fn energy_m0(problem: &Problem, state: &SimState) -> (f64, f64) {
    let (c_rho, c_theta) = equilibrium_constants(&problem.gas);
    let cv = problem.gas.cv;
    let wp = cv / ((cv + 1.0) * c_rho);
    let ws = c_theta / ((cv + 1.0) * c_rho);
    let n = state.p.len();
    let dx = problem.grid.dx;
    let e_density: Vec<f64> = (0..n)
        .map(|i| {
            let dp = state.p[i] - 1.0;
            let ds = state.s[i] - 1.0;
            wp * dp * dp + state.u[i] * state.u[i] + ws * ds * ds
        })
        .collect();
    let w_x = ddx(&state.w, dx);
    let ct3 = 4.0 * c_theta.powi(3);
    let d_density: Vec<f64> = (0..n)
        .map(|i| (state.q[i] * state.q[i] + c_rho * c_rho * w_x[i] * w_x[i]) / ct3)
        .collect();
    (trapezoid(&e_density, dx), trapezoid(&d_density, dx))
}

/// One diagnostics record along a trajectory.
#[derive(Debug, Clone)]
pub struct NormRecord {
    pub t: f64,
    /// L2 norms of `(P-1, u, s-1, q, q_x)`.
    pub l2: [f64; 5],
    /// L2 norm of the tuple of first space derivatives.
    pub l2_dx: f64,
    /// L2 norm of the tuple of first (substituted) time derivatives.
    pub l2_dt: f64,
    /// Tuple norms for `m = 0, 1, 2`.
    pub m_norm: [f64; 3],
    /// Tangential tuple norms for `m = 0, 1, 2`.
    pub tan_norm: [f64; 3],
    pub e0: f64,
    pub d0: f64,
    /// Squared order-1 norm of `(P_t, P_x, s_t, s_x)`, the integrand of
    /// the dissipation part of the a priori estimate.
    pub dpds_m1_sq: f64,
    /// Squared order-2 norm of `(u, q, q_x)`, the other integrand.
    pub uqq_m2_sq: f64,
}

pub fn record(problem: &Problem, state: &SimState) -> NormRecord {
    let dx = problem.grid.dx;
    let b = bundle(problem, state);
    let l2 = [
        l2_norm(&b.pert_p, dx),
        l2_norm(&state.u, dx),
        l2_norm(&b.pert_s, dx),
        l2_norm(&state.q, dx),
        l2_norm(&b.q_x, dx),
    ];
    let l2_dx = {
        let fields: [&[f64]; 5] = [&b.pert_p, &state.u, &b.pert_s, &state.q, &b.q_x];
        fields
            .iter()
            .map(|f| l2_norm(&ddx(f, dx), dx).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let l2_dt = {
        let fields: [&[f64]; 5] = [&b.dp1, &b.du1, &b.ds1, &b.q_t, &b.q_x_t];
        fields.iter().map(|f| l2_norm(f, dx).powi(2)).sum::<f64>().sqrt()
    };
    let level0: [&[f64]; 5] = [&b.pert_p, &state.u, &b.pert_s, &state.q, &b.q_x];
    let level1: [&[f64]; 5] = [&b.dp1, &b.du1, &b.ds1, &b.q_t, &b.q_x_t];
    let level2: [&[f64]; 3] = [&b.dp2, &b.du2, &b.ds2];
    let mut m_norm = [0.0; 3];
    let mut tan_norm = [0.0; 3];
    for m in 0..=2 {
        let mut total = hm_norm(&level0, m, dx);
        let mut tan = l2_tuple(&level0, dx);
        if m >= 1 {
            total += hm_norm(&level1, m - 1, dx);
            tan += l2_tuple(&level1, dx);
        }
        if m >= 2 {
            total += hm_norm(&level2, 0, dx);
            tan += l2_tuple(&level2, dx);
        }
        m_norm[m] = total;
        tan_norm[m] = tan;
    }
    let (e0, d0) = energy_m0(problem, state);
    // (DP, Ds) tuple: (P_t, P_x, s_t, s_x) measured at order 1.
    let p_x = ddx(&state.p, dx);
    let s_x = ddx(&state.s, dx);
    let dp1_x = ddx(&b.dp1, dx);
    let ds1_x = ddx(&b.ds1, dx);
    let dpds_level0: [&[f64]; 4] = [&b.dp1, &p_x, &b.ds1, &s_x];
    let dpds_level1: [&[f64]; 4] = [&b.dp2, &dp1_x, &b.ds2, &ds1_x];
    let dpds_m1 = hm_norm(&dpds_level0, 1, dx) + l2_tuple(&dpds_level1, dx);
    // (u, q, q_x) tuple at order 2.
    let uqq_level0: [&[f64]; 3] = [&state.u, &state.q, &b.q_x];
    let uqq_level1: [&[f64]; 3] = [&b.du1, &b.q_t, &b.q_x_t];
    let uqq_level2: [&[f64]; 1] = [&b.du2];
    let uqq_m2 =
        hm_norm(&uqq_level0, 2, dx) + hm_norm(&uqq_level1, 1, dx) + hm_norm(&uqq_level2, 0, dx);
    NormRecord {
        t: state.t,
        l2,
        l2_dx,
        l2_dt,
        m_norm,
        tan_norm,
        e0,
        d0,
        dpds_m1_sq: dpds_m1 * dpds_m1,
        uqq_m2_sq: uqq_m2 * uqq_m2,
    }
}

/// Result of monitoring the a priori inequality along a trajectory.
#[derive(Debug, Clone)]
pub struct AprioriReport {
    /// Smallest constant making the inequality hold at every recorded
    /// time (1 by convention on an equilibrium trajectory).
    pub c0: f64,
    pub pass: bool,
    /// `(t, left-hand side)` per record.
    pub margins: Vec<(f64, f64)>,
    /// Cumulative dissipation integral at the final record.
    pub dissipation_integral: f64,
    /// Supremum over records of the squared m = 1 tuple norm, relative
    /// to its initial value.
    pub m1_sup_ratio: f64,
}

/// Evaluate the discrete analogue of the a priori estimate:
/// `sup_(t'<=t) |||.|||_2^2 + int_0^t (|||(DP,Ds)|||_1^2 +
/// |||(u,q,q_x)|||_2^2) <= C0 |||.(0)|||_2^2`, reporting the smallest
/// admissible `C0` and comparing it against `ceiling`.
pub fn apriori_monitor(records: &[NormRecord], ceiling: f64) -> AprioriReport {
    assert!(!records.is_empty(), "monitor needs at least one record");
    let initial_sq = records[0].m_norm[2].powi(2);
    let m1_initial_sq = records[0].m_norm[1].powi(2);
    let mut sup_sq = 0.0_f64;
    let mut m1_sup_sq = 0.0_f64;
    let mut integral = 0.0;
    let mut diss_integral = 0.0;
    let mut c0 = 1.0_f64;
    let mut margins = Vec::with_capacity(records.len());
    let mut prev: Option<&NormRecord> = None;
    for rec in records {
        if let Some(p) = prev {
            let dt = rec.t - p.t;
            integral += 0.5
                * dt
                * (p.dpds_m1_sq + p.uqq_m2_sq + rec.dpds_m1_sq + rec.uqq_m2_sq);
            diss_integral += 0.5 * dt * (p.d0 + rec.d0);
        }
        sup_sq = sup_sq.max(rec.m_norm[2].powi(2));
        m1_sup_sq = m1_sup_sq.max(rec.m_norm[1].powi(2));
        let lhs = sup_sq + integral;
        margins.push((rec.t, lhs));
        if initial_sq > 0.0 {
            c0 = c0.max(lhs / initial_sq);
        }
        prev = Some(rec);
    }
    let m1_sup_ratio = if m1_initial_sq > 0.0 { m1_sup_sq / m1_initial_sq } else { 1.0 };
    AprioriReport {
        c0,
        pass: c0 <= ceiling,
        margins,
        dissipation_integral: diss_integral,
        m1_sup_ratio,
    }
}

/// L2 norms of the three source expressions of the constant-coefficient
/// linearization around the equilibrium.
///
/// Each expression is assembled as an explicit product of
/// equilibrium-deviation factors, so the measured norms inherit the
/// quadratic smallness of the sources directly.
#[derive(Debug, Clone, Copy)]
pub struct SourceNorms {
    pub s1: f64,
    pub s3: f64,
    pub s4: f64,
}

pub fn perturbation_residuals(problem: &Problem, state: &SimState) -> SourceNorms {
    let (c_rho, c_theta) = equilibrium_constants(&problem.gas);
    let grid = &problem.grid;
    let n = grid.n_nodes();
    let dx = grid.dx;
    let kp = problem.gas.pressure_exponent();
    let cv = problem.gas.cv;
    let cv1 = cv + 1.0;

    let y: Vec<f64> = (0..n).map(|i| state.r[i] * state.r[i] * state.u[i]).collect();
    let y_x = ddx(&y, dx);
    let w_x = ddx(&state.w, dx);
    let w_xx = d2dx2(&state.w, dx);
    let p_x = ddx(&state.p, dx);
    let s_x = ddx(&state.s, dx);
    let rho_sq: Vec<f64> = state.rho.iter().map(|v| v * v).collect();
    let rho_sq_x = ddx(&rho_sq, dx);

    let mut s1 = Vec::with_capacity(n);
    let mut s3 = Vec::with_capacity(n);
    let mut s4 = Vec::with_capacity(n);
    for i in 0..n {
        let pert_p = state.p[i] - 1.0;
        let drho = c_rho - state.rho[i];
        s1.push(
            kp * drho * y_x[i] - kp * state.rho[i] * pert_p * y_x[i] + drho * w_x[i] / cv,
        );
        s3.push((1.0 / c_theta - 1.0 / state.theta[i]) * w_x[i]);
        let r2 = state.r[i] * state.r[i];
        let th3 = state.theta[i].powi(3);
        s4.push(
            r2 * (rho_sq[i] - c_rho * c_rho) * w_xx[i]
                + (4.0 * r2 / cv1) * (c_theta.powi(3) - th3) * (p_x[i] + s_x[i])
                + 0.5 * r2 * rho_sq_x[i] * w_x[i]
                - (4.0 * r2 * th3 / cv1) * pert_p * s_x[i],
        );
    }
    SourceNorms {
        s1: l2_norm(&s1, dx),
        s3: l2_norm(&s3, dx),
        s4: l2_norm(&s4, dx),
    }
}
