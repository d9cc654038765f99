//! Frozen-coefficient linear solver and the Picard iteration built on
//! it.
//!
//! One iterate maps a space-time field triple `(P, u, s)` (the frozen
//! fields) to the solution of the linear system whose coefficients are
//! evaluated at those fields: the flux is solved per time slice from
//! frozen data alone, the entropy is a pure time quadrature of frozen
//! data, and `(P, u)` advance as a symmetric hyperbolic pair with the
//! grouped term `(rbar^2 u)_x` differenced as a whole. Differencing the
//! product keeps the extra spatial derivative of the frozen velocity
//! out of the scheme and makes the exact nonlinear solution a fixed
//! point of the map up to time-discretization error.
//!
//! The frozen radius is rebuilt from the frozen velocity by time
//! quadrature, `rbar = r0 + int_0^t ubar`, deliberately not from the
//! frozen density: in the linearized setting the mass-conservation
//! identity behind `r_x = 1/(r^2 rho)` is not available.
//!
//! Contraction is measured, not assumed: the iteration records the
//! sup-in-time L2 distance between consecutive iterates and their
//! ratios.

use crate::eos;
use crate::evolution::{Problem, SimState};
use crate::radiation::{solve_radiative_flux, EllipticError};
use crate::stencil::{ddx, l2_norm};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IterateError {
    #[error("frozen-field invariant failed at slice {slice}: {what}")]
    FrozenInvariant { slice: usize, what: String },
    #[error("picard horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

/// Fields stored on every time slice of `[0, T]` (absolute variables).
#[derive(Debug, Clone)]
pub struct SpaceTimeFields {
    pub times: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub s: Vec<Vec<f64>>,
    /// Flux of the iterate (solved from the iterate's own fields).
    pub q: Vec<Vec<f64>>,
}

impl SpaceTimeFields {
    /// The initial data held constant on every slice: the starting
    /// iterate of the Picard scheme.
    pub fn constant_in_time(times: Vec<f64>, p0: &[f64], u0: &[f64], s0: &[f64]) -> Self {
        let n_slices = times.len();
        Self {
            times,
            p: vec![p0.to_vec(); n_slices],
            u: vec![u0.to_vec(); n_slices],
            s: vec![s0.to_vec(); n_slices],
            q: Vec::new(),
        }
    }

    pub fn n_slices(&self) -> usize {
        self.times.len()
    }

    pub fn final_slice(&self) -> (&[f64], &[f64], &[f64]) {
        let k = self.n_slices() - 1;
        (&self.p[k], &self.u[k], &self.s[k])
    }
}

/// Frozen fields with their derived quantities, validated slice by
/// slice.
#[derive(Debug, Clone)]
pub struct FrozenFields {
    pub times: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub s: Vec<Vec<f64>>,
    pub rho: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
}

impl FrozenFields {
    /// Derive densities, temperatures, the quadrature radius and the
    /// per-slice flux from an iterate; any invariant failure aborts.
    pub fn from_iterate(
        problem: &Problem,
        r0: &[f64],
        fields: &SpaceTimeFields,
    ) -> Result<Self, IterateError> {
        let grid = &problem.grid;
        let n = grid.n_nodes();
        let n_slices = fields.n_slices();
        let mut rho = Vec::with_capacity(n_slices);
        let mut theta = Vec::with_capacity(n_slices);
        let mut r = Vec::with_capacity(n_slices);
        let mut q = Vec::with_capacity(n_slices);
        let mut w = Vec::with_capacity(n_slices);
        let mut r_current = r0.to_vec();
        for k in 0..n_slices {
            let u_k = &fields.u[k];
            if u_k[0] != 0.0 || u_k[n - 1] != 0.0 {
                return Err(IterateError::FrozenInvariant {
                    slice: k,
                    what: "frozen velocity not zero on the boundary".into(),
                });
            }
            if k > 0 {
                let dt = fields.times[k] - fields.times[k - 1];
                let u_prev = &fields.u[k - 1];
                for i in 0..n {
                    r_current[i] += 0.5 * dt * (u_prev[i] + u_k[i]);
                }
            }
            for i in 1..n {
                if !(r_current[i] > r_current[i - 1]) {
                    return Err(IterateError::FrozenInvariant {
                        slice: k,
                        what: format!("frozen radius not increasing at node {i}"),
                    });
                }
            }
            let (rho_k, theta_k) = eos::rho_theta_fields(&fields.p[k], &fields.s[k], &problem.gas)
                .map_err(|e| IterateError::FrozenInvariant { slice: k, what: e.to_string() })?;
            for (i, (&a, &b)) in rho_k.iter().zip(&theta_k).enumerate() {
                if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
                    return Err(IterateError::FrozenInvariant {
                        slice: k,
                        what: format!("density/temperature invalid at node {i}"),
                    });
                }
            }
            let flux = if problem.radiation_on {
                solve_radiative_flux(
                    &problem.gas,
                    grid,
                    &fields.p[k],
                    &fields.s[k],
                    &rho_k,
                    &theta_k,
                    &r_current,
                )?
            } else {
                crate::radiation::RadiativeFlux::zeros(n)
            };
            rho.push(rho_k);
            theta.push(theta_k);
            r.push(r_current.clone());
            q.push(flux.q);
            w.push(flux.w);
        }
        Ok(Self {
            times: fields.times.clone(),
            p: fields.p.clone(),
            u: fields.u.clone(),
            s: fields.s.clone(),
            rho,
            theta,
            r,
            q,
            w,
        })
    }
}

/// Tendency of the linear `(P, u)` subsystem at frozen slice `k`.
fn linear_pu_tendency(
    problem: &Problem,
    frozen: &FrozenFields,
    k: usize,
    p: &[f64],
    u: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let grid = &problem.grid;
    let n = grid.n_nodes();
    let dx = grid.dx;
    let kp = problem.gas.pressure_exponent();
    let inv_cv = 1.0 / problem.gas.cv;
    let r_k = &frozen.r[k];
    let rho_k = &frozen.rho[k];
    let p_bar = &frozen.p[k];
    let w_x = ddx(&frozen.w[k], dx);
    let y: Vec<f64> = (0..n).map(|i| r_k[i] * r_k[i] * u[i]).collect();
    let y_x = ddx(&y, dx);
    let p_x = ddx(p, dx);
    let mut dp = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    for i in 0..n {
        dp.push(-kp * p_bar[i] * rho_k[i] * y_x[i] - inv_cv * rho_k[i] * w_x[i]);
        du.push(-r_k[i] * r_k[i] * p_x[i]);
    }
    du[0] = 0.0;
    du[n - 1] = 0.0;
    (dp, du)
}

/// Solve the linearized system at frozen fields for given initial data.
///
/// Per slice the flux comes from the frozen fields alone; the entropy
/// integrates its frozen source by the trapezoid rule; `(P, u)` advance
/// by SSP-RK2 with coefficients evaluated at the stage times.
pub fn solve_linearized(
    problem: &Problem,
    frozen: &FrozenFields,
    p0: &[f64],
    u0: &[f64],
    s0: &[f64],
) -> Result<SpaceTimeFields, IterateError> {
    let grid = &problem.grid;
    let n = grid.n_nodes();
    let n_slices = frozen.times.len();
    assert!(u0[0] == 0.0 && u0[n - 1] == 0.0, "initial velocity must vanish on the boundary");
    let mut out = SpaceTimeFields {
        times: frozen.times.clone(),
        p: Vec::with_capacity(n_slices),
        u: Vec::with_capacity(n_slices),
        s: Vec::with_capacity(n_slices),
        q: frozen.q.clone(),
    };
    // Entropy source per slice, all frozen quantities.
    let s_source: Vec<Vec<f64>> = (0..n_slices)
        .map(|k| {
            if problem.radiation_on {
                let w_x = ddx(&frozen.w[k], grid.dx);
                (0..n).map(|i| -w_x[i] / frozen.theta[k][i]).collect()
            } else {
                vec![0.0; n]
            }
        })
        .collect();
    let mut p = p0.to_vec();
    let mut u = u0.to_vec();
    let mut s = s0.to_vec();
    out.p.push(p.clone());
    out.u.push(u.clone());
    out.s.push(s.clone());
    for k in 0..n_slices - 1 {
        let dt = frozen.times[k + 1] - frozen.times[k];
        // Heun for the hyperbolic pair with stage coefficients at the
        // slice times (slice spacing equals the step).
        let (dp1, du1) = linear_pu_tendency(problem, frozen, k, &p, &u);
        let p_mid: Vec<f64> = (0..n).map(|i| p[i] + dt * dp1[i]).collect();
        let mut u_mid: Vec<f64> = (0..n).map(|i| u[i] + dt * du1[i]).collect();
        u_mid[0] = 0.0;
        u_mid[n - 1] = 0.0;
        let (dp2, du2) = linear_pu_tendency(problem, frozen, k + 1, &p_mid, &u_mid);
        for i in 0..n {
            p[i] += 0.5 * dt * (dp1[i] + dp2[i]);
            u[i] += 0.5 * dt * (du1[i] + du2[i]);
            s[i] += 0.5 * dt * (s_source[k][i] + s_source[k + 1][i]);
        }
        u[0] = 0.0;
        u[n - 1] = 0.0;
        out.p.push(p.clone());
        out.u.push(u.clone());
        out.s.push(s.clone());
    }
    Ok(out)
}

/// Sup over slices of the L2 distance between two iterates, measured on
/// the gas fields.
pub fn iterate_distance(a: &SpaceTimeFields, b: &SpaceTimeFields, dx: f64) -> f64 {
    assert_eq!(a.n_slices(), b.n_slices());
    let mut sup: f64 = 0.0;
    for k in 0..a.n_slices() {
        let dp: Vec<f64> = a.p[k].iter().zip(&b.p[k]).map(|(x, y)| x - y).collect();
        let du: Vec<f64> = a.u[k].iter().zip(&b.u[k]).map(|(x, y)| x - y).collect();
        let ds: Vec<f64> = a.s[k].iter().zip(&b.s[k]).map(|(x, y)| x - y).collect();
        let d = (l2_norm(&dp, dx).powi(2) + l2_norm(&du, dx).powi(2) + l2_norm(&ds, dx).powi(2))
            .sqrt();
        sup = sup.max(d);
    }
    sup
}

#[derive(Debug, Clone)]
pub struct PicardParams {
    /// Horizon `T` of the iteration.
    pub t_horizon: f64,
    pub k_max: usize,
    /// Stop once the sup-in-time L2 delta drops below this.
    pub tol: f64,
    /// CFL number used to pick the slice spacing.
    pub cfl: f64,
}

impl PicardParams {
    pub fn new(t_horizon: f64) -> Self {
        Self { t_horizon, k_max: 8, tol: 1e-12, cfl: 0.4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PicardStatus {
    Converged { iterations: usize },
    IterationCap,
    FrozenFailure { at_iterate: usize, message: String },
}

/// Iteration transcript: every iterate, the deltas between consecutive
/// ones, and the contraction ratios.
#[derive(Debug)]
pub struct PicardResult {
    pub iterates: Vec<SpaceTimeFields>,
    /// `deltas[k] = sup-in-time L2 distance between iterate k+1 and k`.
    pub deltas: Vec<f64>,
    /// `gammas[k] = deltas[k+1] / deltas[k]`; `None` where the
    /// denominator is below 1e-14.
    pub gammas: Vec<Option<f64>>,
    pub status: PicardStatus,
    /// Wall time spent per completed iterate.
    pub seconds_per_iterate: Vec<f64>,
}

impl PicardResult {
    pub fn last_iterate(&self) -> &SpaceTimeFields {
        self.iterates.last().expect("iterate 0 always present")
    }
}

/// Run the Picard scheme from an initial state.
///
/// Iterate 0 is the initial data held constant in time; iterate `k+1`
/// solves the linear system at the fields of iterate `k`. The slice
/// spacing equals the hyperbolic step, chosen once from the stable step
/// of the initial state.
pub fn picard_iterate(
    problem: &Problem,
    init: &SimState,
    params: &PicardParams,
) -> Result<PicardResult, IterateError> {
    if !(params.t_horizon > 0.0 && params.t_horizon.is_finite()) {
        return Err(IterateError::BadHorizon(params.t_horizon));
    }
    let dt_target = crate::evolution::stable_dt(problem, init, params.cfl);
    let n_steps = (params.t_horizon / dt_target).ceil().max(1.0) as usize;
    let dt = params.t_horizon / n_steps as f64;
    let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * dt).collect();
    let mut current = SpaceTimeFields::constant_in_time(times, &init.p, &init.u, &init.s);
    // Flux of the starting iterate, for completeness of the transcript.
    match FrozenFields::from_iterate(problem, &init.r, &current) {
        Ok(frozen) => current.q = frozen.q.clone(),
        Err(e) => return Err(e),
    }
    let mut iterates = vec![current];
    let mut deltas = Vec::new();
    let mut seconds = Vec::new();
    let mut status = PicardStatus::IterationCap;
    for k in 0..params.k_max {
        let tick = std::time::Instant::now();
        let frozen = match FrozenFields::from_iterate(problem, &init.r, iterates.last().unwrap()) {
            Ok(f) => f,
            Err(e) => {
                status = PicardStatus::FrozenFailure { at_iterate: k, message: e.to_string() };
                break;
            }
        };
        let next = match solve_linearized(problem, &frozen, &init.p, &init.u, &init.s) {
            Ok(s) => s,
            Err(e) => {
                status = PicardStatus::FrozenFailure { at_iterate: k, message: e.to_string() };
                break;
            }
        };
        let delta = iterate_distance(&next, iterates.last().unwrap(), problem.grid.dx);
        deltas.push(delta);
        seconds.push(tick.elapsed().as_secs_f64());
        iterates.push(next);
        if delta <= params.tol {
            status = PicardStatus::Converged { iterations: k + 1 };
            break;
        }
    }
    let gammas = deltas
        .windows(2)
        .map(|w| if w[0] >= 1e-14 { Some(w[1] / w[0]) } else { None })
        .collect();
    Ok(PicardResult { iterates, deltas, gammas, status, seconds_per_iterate: seconds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{equilibrium_constants, GasParams};
    use crate::evolution::{equilibrium_state, run, DtMode, Problem, RunOptions};
    use crate::geometry::{AnnulusGeometry, MassGrid};
    use crate::initial_data::{build_state, InitialDataSpec, Profile};
    use crate::oracle;

    fn standard_problem(n: usize) -> Problem {
        let gas = GasParams::default();
        let (c_rho, _) = equilibrium_constants(&gas);
        let geom = AnnulusGeometry::new(1.0, 2.0).unwrap();
        let grid = MassGrid::from_constant_density(geom, n, c_rho).unwrap();
        Problem::new(gas, grid)
    }

    #[test]
    fn equilibrium_is_a_fixed_point_of_the_map() {
        let problem = standard_problem(64);
        let init = equilibrium_state(&problem);
        let params = PicardParams { t_horizon: 0.05, k_max: 3, tol: 0.0, cfl: 0.4 };
        let result = picard_iterate(&problem, &init, &params).unwrap();
        assert!(result.deltas.iter().all(|&d| d <= 1e-13), "deltas {:?}", result.deltas);
        assert!(result.gammas.iter().all(Option::is_none));
    }

    #[test]
    fn linear_solve_matches_matrix_exponential_oracle() {
        // Frozen equilibrium, pressure-only data: the discrete system
        // is linear with constant coefficients, so the exact-in-time
        // solution is a matrix exponential.
        let problem = standard_problem(64);
        let grid = &problem.grid;
        let n = grid.n_nodes();
        let eps = 1e-3;
        let init_spec = InitialDataSpec {
            epsilon: eps,
            profile: Profile::CompactBump,
            flatness_order: 1,
            amp_p: 1.0,
            amp_u: 0.0,
            amp_s: 0.0,
        };
        let (init, _) = build_state(&init_spec, &problem).unwrap();
        let t_horizon = 0.05;
        // One iterate from the equilibrium frozen fields equals the
        // pure linear evolution; a small step keeps the RK2 phase
        // error of the highest resolved modes below the tolerance.
        let eq = equilibrium_state(&problem);
        let dt = crate::evolution::stable_dt(&problem, &init, 0.1);
        let n_steps = (t_horizon / dt).ceil() as usize;
        let times: Vec<f64> =
            (0..=n_steps).map(|k| k as f64 * t_horizon / n_steps as f64).collect();
        let frozen_fields = SpaceTimeFields::constant_in_time(times, &eq.p, &eq.u, &eq.s);
        let frozen = FrozenFields::from_iterate(&problem, &eq.r, &frozen_fields).unwrap();
        let out = solve_linearized(&problem, &frozen, &init.p, &init.u, &init.s).unwrap();

        let (c_rho, _) = equilibrium_constants(&problem.gas);
        let kp = problem.gas.pressure_exponent();
        let kappa = vec![kp * c_rho; n];
        let a = oracle::acoustic_first_order_matrix(&kappa, &eq.r, grid.dx);
        let mut z0 = vec![0.0; n + (n - 2)];
        for i in 0..n {
            z0[i] = init.p[i] - 1.0;
        }
        for j in 1..n - 1 {
            z0[n + j - 1] = init.u[j];
        }
        let z = oracle::mat_exp_apply(&a, t_horizon, &z0);
        let (p_fin, u_fin, _) = out.final_slice();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max((p_fin[i] - 1.0 - z[i]).abs());
        }
        for j in 1..n - 1 {
            worst = worst.max((u_fin[j] - z[n + j - 1]).abs());
        }
        assert!(worst <= 1e-6, "max deviation from matrix exponential {worst}");
    }

    #[test]
    fn map_is_linear_in_the_data_at_frozen_equilibrium() {
        // Doubling the data perturbation doubles the output
        // perturbation; measured in the sup norm because the absolute
        // storage of P leaves rounding noise at the 1e-16 level that a
        // per-node relative check near profile zeros would amplify.
        let problem = standard_problem(48);
        let eq = equilibrium_state(&problem);
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 2e-3).collect();
        let frozen_fields = SpaceTimeFields::constant_in_time(times, &eq.p, &eq.u, &eq.s);
        let frozen = FrozenFields::from_iterate(&problem, &eq.r, &frozen_fields).unwrap();
        let (small, _) = build_state(
            &InitialDataSpec::new(5e-3, Profile::CompactBump),
            &problem,
        )
        .unwrap();
        let (big, _) = build_state(
            &InitialDataSpec::new(1e-2, Profile::CompactBump),
            &problem,
        )
        .unwrap();
        let out_small = solve_linearized(&problem, &frozen, &small.p, &small.u, &small.s).unwrap();
        let out_big = solve_linearized(&problem, &frozen, &big.p, &big.u, &big.s).unwrap();
        let k = out_small.n_slices() - 1;
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..problem.grid.n_nodes() {
            worst = worst.max((2.0 * (out_small.p[k][i] - 1.0) - (out_big.p[k][i] - 1.0)).abs());
            worst = worst.max((2.0 * out_small.u[k][i] - out_big.u[k][i]).abs());
            scale = scale.max((out_big.p[k][i] - 1.0).abs()).max(out_big.u[k][i].abs());
        }
        assert!(worst <= 1e-12 * scale, "deviation {worst} vs scale {scale}");
    }

    #[test]
    fn frozen_solve_at_nonlinear_solution_reproduces_it() {
        // Feeding the nonlinear trajectory in as frozen fields must
        // return that trajectory up to discretization error, shrinking
        // under refinement.
        let t_horizon = 0.05;
        let err_at = |n: usize| {
            let problem = standard_problem(n);
            let (init, _) = build_state(
                &InitialDataSpec::new(1e-3, Profile::CompactBump),
                &problem,
            )
            .unwrap();
            // Doubling n halves the stable step, so space and time
            // refine together.
            let base_dt = crate::evolution::stable_dt(&problem, &init, 0.4);
            let n_steps = ((t_horizon / base_dt).ceil() as usize).max(8);
            let dt = t_horizon / n_steps as f64;
            let opts = RunOptions {
                t_final: t_horizon,
                dt: DtMode::Fixed(dt),
                snapshot_every: 1,
                diagnostics_every: 0,
                max_steps: u64::MAX,
            };
            let traj = run(&problem, init.clone(), &opts);
            assert!(traj.status.is_completed());
            let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * dt).collect();
            let mut fields = SpaceTimeFields {
                times,
                p: traj.snapshots.iter().map(|s| s.p.clone()).collect(),
                u: traj.snapshots.iter().map(|s| s.u.clone()).collect(),
                s: traj.snapshots.iter().map(|s| s.s.clone()).collect(),
                q: Vec::new(),
            };
            fields.q = traj.snapshots.iter().map(|s| s.q.clone()).collect();
            let frozen = FrozenFields::from_iterate(&problem, &init.r, &fields).unwrap();
            let out = solve_linearized(&problem, &frozen, &init.p, &init.u, &init.s).unwrap();
            iterate_distance(&out, &fields, problem.grid.dx)
        };
        let e1 = err_at(64);
        let e2 = err_at(128);
        assert!(e1 / e2 >= 3.0, "self-consistency refinement ratio {}", e1 / e2);
    }

    #[test]
    fn contraction_measured_below_one() {
        let problem = standard_problem(64);
        let (init, _) =
            build_state(&InitialDataSpec::new(1e-3, Profile::CompactBump), &problem).unwrap();
        let params = PicardParams { t_horizon: 0.05, k_max: 6, tol: 0.0, cfl: 0.4 };
        let result = picard_iterate(&problem, &init, &params).unwrap();
        let measured: Vec<f64> = result.gammas.iter().flatten().copied().collect();
        assert!(!measured.is_empty());
        for (k, g) in measured.iter().enumerate() {
            assert!(*g < 1.0, "gamma_{k} = {g}");
        }
    }

    #[test]
    fn halving_horizon_shrinks_contraction_ratios() {
        let problem = standard_problem(64);
        let (init, _) =
            build_state(&InitialDataSpec::new(1e-3, Profile::CompactBump), &problem).unwrap();
        let run_at = |t: f64| {
            let params = PicardParams { t_horizon: t, k_max: 5, tol: 0.0, cfl: 0.4 };
            picard_iterate(&problem, &init, &params)
                .unwrap()
                .gammas
                .iter()
                .flatten()
                .copied()
                .collect::<Vec<f64>>()
        };
        let long = run_at(0.05);
        let short = run_at(0.025);
        assert!(!long.is_empty() && short.len() >= long.len().min(3));
        for (k, (a, b)) in short.iter().zip(&long).enumerate() {
            assert!(a < b, "gamma_{k}: T/2 gave {a}, T gave {b}");
        }
    }

    #[test]
    fn slice_grid_respects_the_stability_bound() {
        let problem = standard_problem(64);
        let (init, _) =
            build_state(&InitialDataSpec::new(1e-3, Profile::SineBump), &problem).unwrap();
        let params = PicardParams::new(0.05);
        let result = picard_iterate(&problem, &init, &params).unwrap();
        let dt = result.iterates[0].times[1] - result.iterates[0].times[0];
        assert!(dt <= crate::evolution::stable_dt(&problem, &init, params.cfl) * (1.0 + 1e-12));
        assert!((result.iterates[0].times.last().unwrap() - 0.05).abs() < 1e-14);
    }
}
