//! Explicit time integration of the nonlinear Lagrangian system.
//!
//! The prognostic fields are `(P, u, s, r)`; density and temperature
//! are derived from `(P, s)` through the gas relations and the
//! radiative flux is re-solved from the elliptic equation at every
//! Runge-Kutta stage, so the hyperbolic-elliptic coupling is never
//! lagged. One step is SSP-RK3 (Shu-Osher): three forward-Euler
//! stages combined convexly. Third order is not the point; RK3 is the
//! lowest-order Runge-Kutta scheme whose stability region contains a
//! segment of the imaginary axis, which the undamped part of the
//! central-difference spectrum sits on. Heun's method amplifies those
//! modes by `1 + (omega dt)^4/8` per step, and measured runs at the
//! working resolutions showed that growth overtaking the radiative
//! damping well before `t = 10`. The boundary velocities are pinned to
//! zero after every stage, which keeps the boundary radii at `a` and
//! `b` exactly.

use crate::diagnostics::{self, NormRecord};
use crate::eos::{self, GasParams};
use crate::geometry::MassGrid;
use crate::radiation::{solve_radiative_flux, EllipticError, RadiativeFlux};
use crate::stencil::{d2dx2, ddx};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("field `{field}` invalid at node {node}, t = {time}: value {value}")]
    InvalidField { field: &'static str, node: usize, time: f64, value: f64 },
    #[error("mesh tangled at node {node}, t = {time}: radius not strictly increasing")]
    MeshTangled { node: usize, time: f64 },
    #[error("boundary velocity not zero at node {node}, t = {time}")]
    BoundaryVelocity { node: usize, time: f64 },
    #[error("field length {got}, grid has {expected} nodes")]
    LengthMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

/// Immutable description of one simulation problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub gas: GasParams,
    pub grid: MassGrid,
    /// With radiation off the flux source is dropped entirely, `q` is
    /// identically zero and the entropy is exactly conserved.
    pub radiation_on: bool,
    /// Artificial dissipation strength in multiples of `dx^2`; zero by
    /// default and in every verification run.
    pub nu: f64,
}

impl Problem {
    pub fn new(gas: GasParams, grid: MassGrid) -> Self {
        Self { gas, grid, radiation_on: true, nu: 0.0 }
    }

    pub fn radiation_off(mut self) -> Self {
        self.radiation_on = false;
        self
    }

    pub fn with_dissipation(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }
}

/// Nodal fields at one time instant, with derived caches.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub step: u64,
    pub p: Vec<f64>,
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    /// Density from the gas relations at `(P, s)`.
    pub rho: Vec<f64>,
    /// Temperature from the gas relations at `(P, s)`.
    pub theta: Vec<f64>,
    /// Radiative flux from the elliptic solve at this state.
    pub q: Vec<f64>,
    /// Grouped flux `w = r^2 q`.
    pub w: Vec<f64>,
}

impl SimState {
    /// Build a state from prognostic fields, refreshing all caches and
    /// checking the state invariants.
    pub fn new(
        problem: &Problem,
        t: f64,
        step: u64,
        p: Vec<f64>,
        u: Vec<f64>,
        s: Vec<f64>,
        r: Vec<f64>,
    ) -> Result<Self, StateError> {
        let n = problem.grid.n_nodes();
        for field in [&p, &u, &s, &r] {
            if field.len() != n {
                return Err(StateError::LengthMismatch { got: field.len(), expected: n });
            }
        }
        for (i, &v) in p.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(StateError::InvalidField { field: "P", node: i, time: t, value: v });
            }
        }
        for (i, &v) in u.iter().enumerate() {
            if !v.is_finite() {
                return Err(StateError::InvalidField { field: "u", node: i, time: t, value: v });
            }
        }
        for (i, &v) in s.iter().enumerate() {
            if !v.is_finite() {
                return Err(StateError::InvalidField { field: "s", node: i, time: t, value: v });
            }
        }
        if u[0] != 0.0 {
            return Err(StateError::BoundaryVelocity { node: 0, time: t });
        }
        if u[n - 1] != 0.0 {
            return Err(StateError::BoundaryVelocity { node: n - 1, time: t });
        }
        for i in 1..n {
            if !(r[i] > r[i - 1]) {
                return Err(StateError::MeshTangled { node: i, time: t });
            }
        }
        let (rho, theta) =
            eos::rho_theta_fields(&p, &s, &problem.gas).map_err(|_| StateError::InvalidField {
                field: "P",
                node: 0,
                time: t,
                value: f64::NAN,
            })?;
        for (name, field) in [("rho", &rho), ("theta", &theta)] {
            for (i, &v) in field.iter().enumerate() {
                if !(v > 0.0 && v.is_finite()) {
                    let field = if name == "rho" { "rho" } else { "theta" };
                    return Err(StateError::InvalidField { field, node: i, time: t, value: v });
                }
            }
        }
        let RadiativeFlux { q, w } = if problem.radiation_on {
            solve_radiative_flux(&problem.gas, &problem.grid, &p, &s, &rho, &theta, &r)?
        } else {
            RadiativeFlux::zeros(n)
        };
        Ok(Self { t, step, p, u, s, r, rho, theta, q, w })
    }

    /// Maximum deviation from the equilibrium state `(1, 0, 1)`.
    pub fn max_deviation_from_equilibrium(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.p.len() {
            m = m.max((self.p[i] - 1.0).abs());
            m = m.max(self.u[i].abs());
            m = m.max((self.s[i] - 1.0).abs());
        }
        m
    }
}

/// Time derivatives of the prognostic fields.
#[derive(Debug, Clone)]
pub struct Tendencies {
    pub dp: Vec<f64>,
    pub du: Vec<f64>,
    pub ds: Vec<f64>,
    pub dr: Vec<f64>,
}

/// Evaluate the right-hand side of the Lagrangian system at a state.
///
/// The boundary velocity tendency is forced to zero so the boundary
/// condition is exact under time stepping; the flux cached in `state`
/// is used, which the stepper guarantees to be freshly solved.
pub fn rhs_nonlinear(problem: &Problem, state: &SimState) -> Result<Tendencies, StateError> {
    for (i, &v) in state.p.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(StateError::InvalidField { field: "P", node: i, time: state.t, value: v });
        }
    }
    let n = problem.grid.n_nodes();
    let dx = problem.grid.dx;
    let kp = problem.gas.pressure_exponent();
    let inv_cv = 1.0 / problem.gas.cv;

    let y: Vec<f64> = (0..n).map(|i| state.r[i] * state.r[i] * state.u[i]).collect();
    let y_x = ddx(&y, dx);
    let w_x = ddx(&state.w, dx);
    let p_x = ddx(&state.p, dx);

    let mut dp = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    let mut ds = Vec::with_capacity(n);
    for i in 0..n {
        dp.push(-kp * state.p[i] * state.rho[i] * y_x[i] - inv_cv * state.rho[i] * w_x[i]);
        du.push(-state.r[i] * state.r[i] * p_x[i]);
        if problem.radiation_on {
            ds.push(-w_x[i] / state.theta[i]);
        } else {
            ds.push(0.0);
        }
    }
    du[0] = 0.0;
    du[n - 1] = 0.0;
    if problem.nu > 0.0 {
        let coeff = problem.nu * dx * dx;
        for (field, tendency) in [(&state.p, &mut dp), (&state.u, &mut du), (&state.s, &mut ds)] {
            let lap = d2dx2(field, dx);
            for i in 1..n - 1 {
                tendency[i] += coeff * lap[i];
            }
        }
    }
    Ok(Tendencies { dp, du, ds, dr: state.u.clone() })
}

/// Fastest characteristic speed `max r^2 sqrt(((Cv+1)/Cv) P rho)` of
/// the acoustic subsystem.
pub fn max_signal_speed(gas: &GasParams, p: &[f64], rho: &[f64], r: &[f64]) -> f64 {
    let kp = gas.pressure_exponent();
    let mut lam = 0.0_f64;
    for i in 0..p.len() {
        lam = lam.max(r[i] * r[i] * (kp * p[i] * rho[i]).sqrt());
    }
    lam
}

/// Stable time step from the characteristic bound. `cfl` must lie in
/// `(0, 1]`.
pub fn stable_dt(problem: &Problem, state: &SimState, cfl: f64) -> f64 {
    assert!(cfl > 0.0 && cfl <= 1.0, "cfl must be in (0, 1], got {cfl}");
    let lam = max_signal_speed(&problem.gas, &state.p, &state.rho, &state.r);
    cfl * problem.grid.dx / lam
}

fn euler_stage(state: &SimState, tend: &Tendencies, dt: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = state.p.len();
    let mut p = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for i in 0..n {
        p.push(state.p[i] + dt * tend.dp[i]);
        u.push(state.u[i] + dt * tend.du[i]);
        s.push(state.s[i] + dt * tend.ds[i]);
    }
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let r = crate::geometry::advance_r(&state.r, &tend.dr, dt);
    (p, u, s, r)
}

/// One SSP-RK3 (Shu-Osher) step with the elliptic flux re-solved at
/// every stage. Written in increment form, so a state with identically
/// zero tendencies is reproduced bit for bit.
pub fn step(problem: &Problem, state: &SimState, dt: f64) -> Result<SimState, StateError> {
    let n = state.p.len();
    let f1 = rhs_nonlinear(problem, state)?;
    let (p1, u1, s1, r1) = euler_stage(state, &f1, dt);
    let stage1 = SimState::new(problem, state.t + dt, state.step + 1, p1, u1, s1, r1)?;
    let f2 = rhs_nonlinear(problem, &stage1)?;
    // Midpoint stage: u + (dt/4)(f1 + f2), the Shu-Osher second stage.
    let quarter = 0.25 * dt;
    let mut p2 = Vec::with_capacity(n);
    let mut u2 = Vec::with_capacity(n);
    let mut s2 = Vec::with_capacity(n);
    let mut r2 = Vec::with_capacity(n);
    for i in 0..n {
        p2.push(state.p[i] + quarter * (f1.dp[i] + f2.dp[i]));
        u2.push(state.u[i] + quarter * (f1.du[i] + f2.du[i]));
        s2.push(state.s[i] + quarter * (f1.ds[i] + f2.ds[i]));
        r2.push(state.r[i] + quarter * (f1.dr[i] + f2.dr[i]));
    }
    u2[0] = 0.0;
    u2[n - 1] = 0.0;
    let stage2 = SimState::new(problem, state.t + 0.5 * dt, state.step + 1, p2, u2, s2, r2)?;
    let f3 = rhs_nonlinear(problem, &stage2)?;
    let sixth = dt / 6.0;
    let mut p = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    for i in 0..n {
        p.push(state.p[i] + sixth * (f1.dp[i] + f2.dp[i] + 4.0 * f3.dp[i]));
        u.push(state.u[i] + sixth * (f1.du[i] + f2.du[i] + 4.0 * f3.du[i]));
        s.push(state.s[i] + sixth * (f1.ds[i] + f2.ds[i] + 4.0 * f3.ds[i]));
        r.push(state.r[i] + sixth * (f1.dr[i] + f2.dr[i] + 4.0 * f3.dr[i]));
    }
    u[0] = 0.0;
    u[n - 1] = 0.0;
    SimState::new(problem, state.t + dt, state.step + 1, p, u, s, r)
}

/// Time-step selection for a run.
#[derive(Debug, Clone, Copy)]
pub enum DtMode {
    /// Recompute `stable_dt` every step with this CFL number.
    Cfl(f64),
    /// Constant step, as used by refinement studies.
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub t_final: f64,
    pub dt: DtMode,
    /// Keep a full state snapshot every this many steps (0: only the
    /// initial and final states).
    pub snapshot_every: usize,
    /// Append a diagnostics record every this many steps (0: none).
    pub diagnostics_every: usize,
    pub max_steps: u64,
}

impl RunOptions {
    pub fn to_time(t_final: f64) -> Self {
        Self {
            t_final,
            dt: DtMode::Cfl(0.4),
            snapshot_every: 0,
            diagnostics_every: 0,
            max_steps: u64::MAX,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Termination {
    Completed,
    MaxSteps,
    StateInvalid { error: StateError, t: f64, step: u64 },
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }
}

/// Result of an integration: snapshots at the requested cadence (the
/// initial and final states always included), diagnostics records, and
/// the termination status. A run that hits a state-invalid error still
/// returns everything recorded up to the failure.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<SimState>,
    pub records: Vec<NormRecord>,
    pub status: Termination,
    pub steps: u64,
    pub wall_seconds: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &SimState {
        self.snapshots.last().expect("trajectory always holds the initial state")
    }
}

pub fn run(problem: &Problem, init: SimState, opts: &RunOptions) -> Trajectory {
    run_with(problem, init, opts, |_| {})
}

/// Integrate with a per-step observer; the observer also sees the
/// initial state. The core loop is single-threaded and evaluation
/// order is fixed, so identical inputs give identical trajectories.
pub fn run_with(
    problem: &Problem,
    init: SimState,
    opts: &RunOptions,
    mut observe: impl FnMut(&SimState),
) -> Trajectory {
    let wall_start = std::time::Instant::now();
    let mut snapshots = Vec::new();
    let mut records = Vec::new();
    let mut state = init;
    let t0 = state.t;
    observe(&state);
    if opts.snapshot_every > 0 {
        snapshots.push(state.clone());
    }
    if opts.diagnostics_every > 0 {
        records.push(diagnostics::record(problem, &state));
    }
    let mut steps: u64 = 0;
    let mut status = Termination::Completed;
    let t_end = t0 + opts.t_final;
    while state.t < t_end {
        if steps >= opts.max_steps {
            status = Termination::MaxSteps;
            break;
        }
        let dt_raw = match opts.dt {
            DtMode::Cfl(cfl) => stable_dt(problem, &state, cfl),
            DtMode::Fixed(dt) => dt,
        };
        let remaining = t_end - state.t;
        // Roundoff residue smaller than a relative ulp of the step is
        // the final time, not another step.
        if remaining <= dt_raw * 1e-9 {
            break;
        }
        let dt = dt_raw.min(remaining);
        match step(problem, &state, dt) {
            Ok(next) => state = next,
            Err(error) => {
                status = Termination::StateInvalid { error, t: state.t, step: steps };
                break;
            }
        }
        steps += 1;
        observe(&state);
        if opts.snapshot_every > 0 && steps % opts.snapshot_every as u64 == 0 {
            snapshots.push(state.clone());
        }
        if opts.diagnostics_every > 0 && steps % opts.diagnostics_every as u64 == 0 {
            records.push(diagnostics::record(problem, &state));
        }
    }
    let push_final = snapshots.last().map(|s: &SimState| s.step != state.step).unwrap_or(true);
    if push_final {
        snapshots.push(state.clone());
    }
    if opts.diagnostics_every > 0 && records.last().map(|r| r.t != state.t).unwrap_or(false) {
        records.push(diagnostics::record(problem, &state));
    }
    Trajectory { snapshots, records, status, steps, wall_seconds: wall_start.elapsed().as_secs_f64() }
}

/// Equilibrium state `(P, u, s) = (1, 0, 1)` on a grid whose total
/// mass matches the equilibrium density.
pub fn equilibrium_state(problem: &Problem) -> SimState {
    let (c_rho, _) = eos::equilibrium_constants(&problem.gas);
    let n = problem.grid.n_nodes();
    let r = crate::geometry::constant_density_radii(&problem.grid, c_rho);
    SimState::new(problem, 0.0, 0, vec![1.0; n], vec![0.0; n], vec![1.0; n], r)
        .expect("equilibrium state is valid")
}
