//! Fixed-step RK4 integration of the closed loops, trace recording and
//! post-run monitors.

use std::io::Write;

use crate::dynmodel::{controller, desired_body_velocity, dynamics_deriv, ControllerGains, DynamicModel, Vector6f};
use crate::error::{Error, Result};
use crate::guidance::{guidance_step, track_lyapunov_rate, GuidanceInput, GuidanceMode, GuidanceOutput, GuidanceParams};
use crate::pathframe::{path_quaternion, TrackError};
use crate::phspline::PHSpline;
use crate::quat::Quaternion;
use crate::scenario::{ScenarioConfig, SimMode};
use crate::vec3::Vec3;

type V3 = Vec3<f64>;
type Q = Quaternion<f64>;

/// A state that RK4 can combine linearly.
pub trait OdeState: Clone {
    /// `self + k * d`.
    fn axpy(&self, k: f64, d: &Self) -> Self;
    fn is_finite(&self) -> bool;
    /// Projection applied once per accepted step.
    fn post_step(&mut self) {}
}

impl OdeState for f64 {
    fn axpy(&self, k: f64, d: &Self) -> Self {
        self + k * d
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Classical fourth-order Runge–Kutta step.
pub fn rk4_step<S: OdeState>(
    state: &S,
    t: f64,
    dt: f64,
    mut f: impl FnMut(f64, &S) -> Result<S>,
) -> Result<S> {
    let diverged = || Error::Diverged { t };
    let check = |d: S| if d.is_finite() { Ok(d) } else { Err(diverged()) };
    let k1 = check(f(t, state)?)?;
    let k2 = check(f(t + dt / 2.0, &state.axpy(dt / 2.0, &k1))?)?;
    let k3 = check(f(t + dt / 2.0, &state.axpy(dt / 2.0, &k2))?)?;
    let k4 = check(f(t + dt, &state.axpy(dt, &k3))?)?;
    let mut next = state
        .axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4);
    next.post_step();
    if next.is_finite() {
        Ok(next)
    } else {
        Err(diverged())
    }
}

/// Integrated vehicle state. `nu` is only evolved in dynamic mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub eta: V3,
    pub q: Q,
    pub u: f64,
    pub c_hat: V3,
    pub nu: Vector6f,
}

impl OdeState for VehicleState {
    fn axpy(&self, k: f64, d: &Self) -> Self {
        Self {
            eta: self.eta + d.eta * k,
            q: self.q + d.q * k,
            u: self.u + d.u * k,
            c_hat: self.c_hat + d.c_hat * k,
            nu: self.nu + d.nu * k,
        }
    }

    fn is_finite(&self) -> bool {
        self.eta.is_finite()
            && self.q.is_finite()
            && self.u.is_finite()
            && self.c_hat.is_finite()
            && self.nu.iter().all(|v| v.is_finite())
    }

    fn post_step(&mut self) {
        if let Ok(q) = self.q.normalize() {
            self.q = q;
        }
    }
}

/// `Q_dot = Q (0, w) / 2`.
pub fn attitude_rate(q: Q, w: V3) -> Q {
    q * Q::pure(w) * 0.5
}

/// One trace row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub eta: V3,
    pub q: Q,
    pub error: TrackError<f64>,
    pub err_norm: f64,
    pub u: f64,
    pub u_d: f64,
    pub c_hat: V3,
    pub u_rd: Option<f64>,
    pub wy: Option<f64>,
    pub wz: Option<f64>,
    /// `k_c |eps|^2 / 2 + |c - c_hat|^2 / 2`.
    pub v: f64,
    /// Closed-form track part of the Lyapunov derivative.
    pub vdot_e: f64,
    pub tau: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    PathEnd,
    TimeLimit,
    Diverged { t: f64 },
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub mode: SimMode,
    pub dt: f64,
    pub trace: Vec<TraceRecord>,
    pub stop: StopReason,
    pub true_current: V3,
    /// Steps where the estimate clamp was active.
    pub clamp_events: usize,
}

impl SimResult {
    pub fn last(&self) -> &TraceRecord {
        self.trace.last().expect("trace has the initial record")
    }

    /// Time after which `|eps| < tol` holds to the end of the run.
    pub fn settle_time(&self, tol: f64) -> Option<f64> {
        match self.trace.iter().rposition(|r| r.err_norm >= tol) {
            None => Some(self.trace[0].t),
            Some(i) if i + 1 < self.trace.len() => Some(self.trace[i + 1].t),
            Some(_) => None,
        }
    }

    /// Simulated time needed to reach the end from the first crossing of `u`.
    pub fn simulated_toa(&self, u: f64) -> Option<f64> {
        if self.stop != StopReason::PathEnd {
            return None;
        }
        let t_end = self.last().t;
        self.trace.iter().find(|r| r.u >= u).map(|r| t_end - r.t)
    }

    pub fn final_estimate_error(&self) -> V3 {
        self.last().c_hat - self.true_current
    }
}

struct Loop<'a> {
    cfg: &'a ScenarioConfig,
    spline: &'a PHSpline<f64>,
    params: GuidanceParams<f64>,
    current: V3,
    model: Option<&'a DynamicModel>,
    gains: ControllerGains,
}

struct Eval {
    g: GuidanceOutput<f64>,
    deriv: VehicleState,
    tau: Option<Vector6f>,
}

impl Loop<'_> {
    fn guidance_mode(&self) -> GuidanceMode {
        match self.cfg.mode {
            SimMode::KinematicBasic => GuidanceMode::Basic,
            _ => GuidanceMode::Extended,
        }
    }

    fn eval(&self, s: &VehicleState, prev_chi: Option<f64>) -> Result<Eval> {
        let input = GuidanceInput { eta: s.eta, q: s.q, u: s.u, c_hat: s.c_hat, prev_chi };
        let g = guidance_step(self.guidance_mode(), &input, self.spline, &self.params)?;
        let zero = V3::zeros();
        let mut d = VehicleState {
            eta: zero,
            q: Q::zero(),
            u: g.u_dot,
            c_hat: g.c_hat_ddot.unwrap_or(zero),
            nu: Vector6f::zeros(),
        };
        let mut tau = None;
        match self.cfg.mode {
            SimMode::KinematicBasic => {
                d.eta = g.eta_d_dot + self.current;
            }
            SimMode::KinematicExtended => {
                let c = g.body_cmd.expect("extended law emits body commands");
                d.eta = s.q.rotate(V3::new(c.u_rd, 0.0, 0.0)) + self.current;
                d.q = attitude_rate(s.q, V3::new(0.0, c.wy, c.wz));
            }
            SimMode::Dynamic => {
                let model = self.model.expect("dynamic mode has a model");
                let c = g.body_cmd.expect("extended law emits body commands");
                let nu_d = desired_body_velocity(c.u_rd, c.wy, c.wz);
                let out = controller(model, &self.gains, &s.nu, &nu_d);
                d.nu = dynamics_deriv(model, &s.nu, s.q, &out.tau);
                d.eta = s.q.rotate(V3::new(s.nu[0], s.nu[1], s.nu[2])) + self.current;
                d.q = attitude_rate(s.q, V3::new(s.nu[3], s.nu[4], s.nu[5]));
                tau = Some(out.tau);
            }
        }
        Ok(Eval { g, deriv: d, tau })
    }

    fn record(&self, t: f64, s: &VehicleState, e: &Eval) -> TraceRecord {
        let err = e.g.error;
        let n = err.norm();
        let c_tilde = self.current - s.c_hat;
        let cmd = e.g.body_cmd;
        TraceRecord {
            t,
            eta: s.eta,
            q: s.q,
            error: err,
            err_norm: n,
            u: s.u,
            u_d: e.g.u_d,
            c_hat: s.c_hat,
            u_rd: cmd.map(|c| c.u_rd),
            wy: cmd.map(|c| c.wy),
            wz: cmd.map(|c| c.wz),
            v: self.params.k_c * n * n / 2.0 + c_tilde.norm_squared() / 2.0,
            vdot_e: track_lyapunov_rate(err, &self.params),
            tau: e.tau.map(|t| [t[0], t[4], t[5]]),
        }
    }
}

/// Initial state: attitude aligned with the desired direction at `eta(0)` unless given.
pub fn initial_state(cfg: &ScenarioConfig, spline: &PHSpline<f64>) -> Result<VehicleState> {
    let u = spline.u_start() + cfg.initial.u_offset;
    let eta = cfg.initial.eta;
    let q = match cfg.initial.attitude {
        Some(a) => Q::from_f64(a)
            .normalize()
            .map_err(|_| Error::Config("initial attitude is zero".into()))?,
        None => {
            let input = GuidanceInput { eta, q: Q::identity(), u, c_hat: V3::zeros(), prev_chi: None };
            let g = guidance_step(GuidanceMode::Basic, &input, spline, &cfg.guidance)?;
            path_quaternion(g.chi_d, g.nu_d)
        }
    };
    Ok(VehicleState { eta, q, u, c_hat: V3::zeros(), nu: Vector6f::zeros() })
}

fn run(cfg: &ScenarioConfig, spline: &PHSpline<f64>, model: Option<&DynamicModel>) -> Result<SimResult> {
    cfg.validate()?;
    let lp = Loop {
        cfg,
        spline,
        params: cfg.guidance,
        current: cfg.active_current(),
        model,
        gains: cfg.gains,
    };
    let dt = cfg.dt;
    let mut state = initial_state(cfg, spline)?;
    let mut t = 0.0;
    let mut prev_chi = None;
    let mut trace = Vec::new();
    let mut clamp_events = 0;
    let u_end = spline.u_end();
    let steps_max = (cfg.t_max / dt).ceil() as usize;
    let mut step = 0usize;
    let stop = loop {
        let e = match lp.eval(&state, prev_chi) {
            Ok(e) => e,
            Err(Error::Diverged { t }) => break StopReason::Diverged { t },
            Err(err) => return Err(err),
        };
        trace.push(lp.record(t, &state, &e));
        prev_chi = Some(e.g.frame.chi);
        if state.u >= u_end {
            break StopReason::PathEnd;
        }
        if step >= steps_max {
            break StopReason::TimeLimit;
        }
        let chi = prev_chi;
        let next = rk4_step(&state, t, dt, |_, s| lp.eval(s, chi).map(|e| e.deriv));
        state = match next {
            Ok(s) => s,
            Err(Error::Diverged { .. }) => break StopReason::Diverged { t: t + dt },
            Err(err) => return Err(err),
        };
        if let Some(limit) = cfg.estimate_clamp {
            let n = state.c_hat.norm();
            if n > limit {
                state.c_hat = state.c_hat * (limit / n);
                clamp_events += 1;
            }
        }
        step += 1;
        t = step as f64 * dt;
    };
    Ok(SimResult { mode: cfg.mode, dt, trace, stop, true_current: lp.current, clamp_events })
}

/// Kinematic closed loop (`kinematic-basic` or `kinematic-extended`).
pub fn run_kinematic(cfg: &ScenarioConfig, spline: &PHSpline<f64>) -> Result<SimResult> {
    if cfg.mode == SimMode::Dynamic {
        return Err(Error::Config("run_kinematic called with dynamic mode".into()));
    }
    run(cfg, spline, None)
}

/// Rigid-body closed loop with the extended guidance law.
pub fn run_dynamic(cfg: &ScenarioConfig, spline: &PHSpline<f64>, model: &DynamicModel) -> Result<SimResult> {
    let mut c = cfg.clone();
    c.mode = SimMode::Dynamic;
    run(&c, spline, Some(model))
}

/// Dispatch on the configured mode, loading the model when needed.
pub fn run_scenario(cfg: &ScenarioConfig, spline: &PHSpline<f64>) -> Result<SimResult> {
    match cfg.mode {
        SimMode::Dynamic => run_dynamic(cfg, spline, &cfg.dynamic_model()?),
        _ => run_kinematic(cfg, spline),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    /// Indices `i` where `V[i+1] - V[i] > tol * max(V[i], 1)`.
    pub violations: Vec<usize>,
    pub max_vdot_e: f64,
}

impl LyapunovReport {
    pub fn non_increasing(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const LYAPUNOV_TOL: f64 = 1e-6;

/// Recompute `V = k_c |eps|^2 / 2 + |c - c_hat|^2 / 2` along a trace and flag increases.
pub fn lyapunov_monitor(trace: &[TraceRecord], true_current: V3, k_c: f64) -> LyapunovReport {
    let v: Vec<f64> = trace
        .iter()
        .map(|r| k_c * r.err_norm * r.err_norm / 2.0 + (true_current - r.c_hat).norm_squared() / 2.0)
        .collect();
    let dv: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let violations = dv
        .iter()
        .enumerate()
        .filter(|(i, d)| **d > LYAPUNOV_TOL * v[*i].max(1.0))
        .map(|(i, _)| i)
        .collect();
    let max_vdot_e = trace.iter().map(|r| r.vdot_e).fold(f64::NEG_INFINITY, f64::max);
    LyapunovReport { v, dv, violations, max_vdot_e }
}

pub const TRACE_HEADER: &str =
    "t,x,y,z,s,e,h,err_norm,u,Ud,chat_x,chat_y,chat_z,u_rd,wy,wz,V,tau_x,tau_p,tau_r";

/// Format with 9 significant digits, shortest of fixed or exponent form.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.8e}");
        let (m, e) = s.split_once('e').unwrap();
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        format!("{m}e{e}")
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

pub fn write_trace_csv(w: &mut impl Write, trace: &[TraceRecord]) -> std::io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    for r in trace {
        let tau = r.tau.map(|t| t.map(Some)).unwrap_or([None; 3]);
        let cols = [
            fmt_sig(r.t),
            fmt_sig(r.eta.x),
            fmt_sig(r.eta.y),
            fmt_sig(r.eta.z),
            fmt_sig(r.error.s),
            fmt_sig(r.error.e),
            fmt_sig(r.error.h),
            fmt_sig(r.err_norm),
            fmt_sig(r.u),
            fmt_sig(r.u_d),
            fmt_sig(r.c_hat.x),
            fmt_sig(r.c_hat.y),
            fmt_sig(r.c_hat.z),
            opt(r.u_rd),
            opt(r.wy),
            opt(r.wz),
            fmt_sig(r.v),
            opt(tau[0]),
            opt(tau[1]),
            opt(tau[2]),
        ];
        writeln!(w, "{}", cols.join(","))?;
    }
    Ok(())
}
