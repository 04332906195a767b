//! Pseudo-spectral time integration of the vorticity equation
//! ∂_t ω + ∇⊥Gω·∇ω = 0 on the square.
//!
//! Convective-form advection with nodal products and 2/3 dealiasing: for a
//! dealiased state the nodal quadrature integrates the triple products
//! (u·∇ω)·Gω and (u·∇ω)·ω exactly, so the semi-discrete scheme conserves
//! kinetic energy and enstrophy to round-off and every single basis mode is
//! an exact steady state. Time stepping is classical four-stage Runge-Kutta
//! with a CFL-limited fixed step; no viscosity and no filtering beyond the
//! dealiasing, since conservation drift is exactly what the experiments
//! audit.

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::spectral::SpectralField;
use crate::stability::{orbit_distance, rearrangement_drift, OrbitNorm, OrbitSet};

/// Time-stamped vorticity during evolution.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub omega: SpectralField,
}

/// Step-size and horizon control for one trajectory.
#[derive(Debug, Clone)]
pub struct StepControl {
    /// CFL number in (0, 1]; dt = cfl·h / max nodal speed.
    pub cfl: f64,
    pub t_end: f64,
    pub max_steps: usize,
    /// Diagnostics are recorded every this many steps (and at both ends).
    pub record_every: usize,
    /// A spectral coefficient beyond this magnitude signals blow-up of the
    /// discretization and aborts the trajectory.
    pub blowup_limit: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            cfl: 0.5,
            t_end: 1.0,
            max_steps: 2_000_000,
            record_every: 10,
            blowup_limit: 1e8,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParam {
                name: "cfl",
                value: self.cfl,
                requirement: "must lie in (0, 1]",
            });
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidParam {
                name: "t_end",
                value: self.t_end,
                requirement: "must be positive",
            });
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParam {
                name: "max_steps",
                value: 0.0,
                requirement: "must be at least 1",
            });
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParam {
                name: "record_every",
                value: 0.0,
                requirement: "must be at least 1",
            });
        }
        if !(self.blowup_limit > 0.0) {
            return Err(Error::InvalidParam {
                name: "blowup_limit",
                value: self.blowup_limit,
                requirement: "must be positive",
            });
        }
        Ok(())
    }
}

/// Advection right-hand side −dealias(T(u·∇ω)) with u = ∇⊥Gω; products are
/// formed nodally, derivatives spectrally.
pub fn rhs(omega: &SpectralField) -> SpectralField {
    let (u1, u2) = omega.green().velocity();
    let adv = &u1.mul_pointwise(&omega.dx_nodal()) + &u2.mul_pointwise(&omega.dy_nodal());
    SpectralField::forward(&adv).dealias().scaled(-1.0)
}

/// Largest nodal speed |∇⊥Gω| of the induced velocity.
pub fn max_speed(omega: &SpectralField) -> f64 {
    let (u1, u2) = omega.green().velocity();
    u1.values()
        .iter()
        .zip(u2.values().iter())
        .map(|(a, b)| (a * a + b * b).sqrt())
        .fold(0.0, f64::max)
}

/// CFL step size; falls back to cfl·h when the field induces no motion.
pub fn cfl_dt(omega: &SpectralField, cfl: f64) -> f64 {
    let h = omega.grid().spacing();
    let speed = max_speed(omega);
    if speed > 1e-14 {
        cfl * h / speed
    } else {
        cfl * h
    }
}

fn rk4(w: &SpectralField, dt: f64, f: impl Fn(&SpectralField) -> SpectralField) -> SpectralField {
    let k1 = f(w);
    let k2 = f(&w.scaled_add(0.5 * dt, &k1));
    let k3 = f(&w.scaled_add(0.5 * dt, &k2));
    let k4 = f(&w.scaled_add(dt, &k3));
    let mut incr = k1.scaled_add(2.0, &k2);
    incr = incr.scaled_add(2.0, &k3);
    incr = incr.scaled_add(1.0, &k4);
    w.scaled_add(dt / 6.0, &incr)
}

/// One Runge-Kutta step of prescribed size, with the blow-up guard.
pub fn step_with_dt(state: &FlowState, dt: f64, blowup_limit: f64) -> Result<FlowState> {
    let next = rk4(&state.omega, dt, rhs);
    let max_coeff = next.max_abs_coeff();
    if !next.is_finite() || max_coeff > blowup_limit {
        return Err(Error::Blowup {
            t: state.t,
            max_coeff,
            limit: blowup_limit,
        });
    }
    Ok(FlowState {
        t: state.t + dt,
        omega: next,
    })
}

/// One CFL-limited step, clamped so the trajectory lands on t_end exactly.
pub fn step(state: &FlowState, ctrl: &StepControl) -> Result<FlowState> {
    ctrl.validate()?;
    let dt = cfl_dt(&state.omega, ctrl.cfl).min(ctrl.t_end - state.t);
    step_with_dt(state, dt, ctrl.blowup_limit)
}

/// Named diagnostics sampled along a trajectory.
#[derive(Debug, Clone)]
pub enum Observer {
    Energy,
    /// |E(t) − E(0)| / |E(0)|.
    EnergyDrift,
    LsNorm(f64),
    /// |∥ω(t)∥_{L^s} − ∥ω₀∥_{L^s}| / ∥ω₀∥_{L^s}.
    LsNormDrift(f64),
    /// Sorted-value L¹ distance to the initial state.
    RearrangementDrift,
    OrbitDistanceLs(OrbitSet, f64),
    OrbitDistanceEnergy(OrbitSet),
}

fn fmt_s(s: f64) -> String {
    format!("{s}")
}

impl Observer {
    pub fn name(&self) -> String {
        match self {
            Observer::Energy => "energy".into(),
            Observer::EnergyDrift => "energy_drift".into(),
            Observer::LsNorm(s) => format!("l{}_norm", fmt_s(*s)),
            Observer::LsNormDrift(s) => format!("l{}_drift", fmt_s(*s)),
            Observer::RearrangementDrift => "rearrangement_drift".into(),
            Observer::OrbitDistanceLs(_, s) => format!("dist_L{}", fmt_s(*s)),
            Observer::OrbitDistanceEnergy(_) => "dist_E".into(),
        }
    }
}

/// Reference quantities frozen at t = 0 for the drift observers.
struct Baseline {
    omega0: ScalarField,
    energy0: f64,
    ls0: Vec<f64>,
}

fn evaluate(
    obs: &Observer,
    ls_index: usize,
    state: &FlowState,
    nodal: &ScalarField,
    base: &Baseline,
) -> Result<f64> {
    let v = match obs {
        Observer::Energy => state.omega.energy(),
        Observer::EnergyDrift => {
            (state.omega.energy() - base.energy0).abs() / base.energy0.abs().max(f64::MIN_POSITIVE)
        }
        Observer::LsNorm(s) => nodal.lp_norm(*s)?,
        Observer::LsNormDrift(s) => {
            let n0 = base.ls0[ls_index];
            (nodal.lp_norm(*s)? - n0).abs() / n0.max(f64::MIN_POSITIVE)
        }
        Observer::RearrangementDrift => rearrangement_drift(nodal, &base.omega0)?,
        Observer::OrbitDistanceLs(orbit, s) => orbit_distance(nodal, orbit, OrbitNorm::Ls(*s))?,
        Observer::OrbitDistanceEnergy(orbit) => orbit_distance(nodal, orbit, OrbitNorm::Energy)?,
    };
    Ok(v)
}

/// One diagnostics row.
#[derive(Debug, Clone)]
pub struct Record {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub records: Vec<Record>,
    pub final_state: FlowState,
}

/// Like [`Trajectory`], but kept even when the run aborts on blow-up.
pub(crate) struct EvolveOutcome {
    pub names: Vec<String>,
    pub records: Vec<Record>,
    pub final_state: FlowState,
    pub blowup: Option<(f64, f64)>,
}

pub(crate) fn evolve_detail(
    omega0: &ScalarField,
    ctrl: &StepControl,
    observers: &[Observer],
) -> Result<EvolveOutcome> {
    ctrl.validate()?;
    // keep the state band-limited so the nodal products stay within the
    // quadrature-exact band
    let initial = SpectralField::forward(omega0).dealias();
    let base = Baseline {
        omega0: initial.inverse(),
        energy0: initial.energy(),
        ls0: observers
            .iter()
            .map(|o| match o {
                Observer::LsNormDrift(s) => initial.inverse().lp_norm(*s),
                _ => Ok(0.0),
            })
            .collect::<Result<Vec<f64>>>()?,
    };
    let names: Vec<String> = observers.iter().map(Observer::name).collect();
    let mut state = FlowState {
        t: 0.0,
        omega: initial,
    };
    let mut records = Vec::new();
    let record = |state: &FlowState, records: &mut Vec<Record>| -> Result<()> {
        let nodal = state.omega.inverse();
        let values = observers
            .iter()
            .enumerate()
            .map(|(i, o)| evaluate(o, i, state, &nodal, &base))
            .collect::<Result<Vec<f64>>>()?;
        records.push(Record {
            t: state.t,
            values,
        });
        Ok(())
    };
    record(&state, &mut records)?;
    let eps = 1e-12 * ctrl.t_end;
    let mut steps = 0usize;
    let mut blowup = None;
    while ctrl.t_end - state.t > eps {
        if steps >= ctrl.max_steps {
            return Err(Error::StepLimit {
                t: state.t,
                max_steps: ctrl.max_steps,
            });
        }
        match step(&state, ctrl) {
            Ok(next) => state = next,
            Err(Error::Blowup { t, max_coeff, .. }) => {
                blowup = Some((t, max_coeff));
                break;
            }
            Err(e) => return Err(e),
        }
        steps += 1;
        if steps.is_multiple_of(ctrl.record_every) || ctrl.t_end - state.t <= eps {
            record(&state, &mut records)?;
        }
    }
    if blowup.is_none() && !records.last().map(|r| r.t == state.t).unwrap_or(false) {
        record(&state, &mut records)?;
    }
    Ok(EvolveOutcome {
        names,
        records,
        final_state: state,
        blowup,
    })
}

/// Integrates the vorticity equation from ω₀ to t_end, recording the named
/// diagnostics every `record_every` steps. Blow-up aborts with an error.
pub fn evolve(
    omega0: &ScalarField,
    ctrl: &StepControl,
    observers: &[Observer],
) -> Result<Trajectory> {
    let out = evolve_detail(omega0, ctrl, observers)?;
    if let Some((t, max_coeff)) = out.blowup {
        return Err(Error::Blowup {
            t,
            max_coeff,
            limit: ctrl.blowup_limit,
        });
    }
    Ok(Trajectory {
        names: out.names,
        records: out.records,
        final_state: out.final_state,
    })
}

/// Advects ω along the frozen divergence-free velocity ∇⊥χ for pseudo-time
/// tau, with the same spatial discretization and stepper as the dynamic
/// case. Used to generate (approximate) rearrangements of a base field.
pub fn advect_frozen_stream(
    omega0: &ScalarField,
    stream: &ScalarField,
    tau: f64,
    cfl: f64,
) -> Result<ScalarField> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParam {
            name: "tau",
            value: tau,
            requirement: "must be positive",
        });
    }
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::InvalidParam {
            name: "cfl",
            value: cfl,
            requirement: "must lie in (0, 1]",
        });
    }
    let chi = SpectralField::forward(stream).dealias();
    let (v1, v2) = chi.velocity();
    let speed = v1
        .values()
        .iter()
        .zip(v2.values().iter())
        .map(|(a, b)| (a * a + b * b).sqrt())
        .fold(0.0, f64::max);
    let h = omega0.grid().spacing();
    let dt_cap = if speed > 1e-14 { cfl * h / speed } else { cfl * h };
    let steps = (tau / dt_cap).ceil().max(1.0) as usize;
    let dt = tau / steps as f64;
    let frozen_rhs = |w: &SpectralField| {
        let adv = &v1.mul_pointwise(&w.dx_nodal()) + &v2.mul_pointwise(&w.dy_nodal());
        SpectralField::forward(&adv).dealias().scaled(-1.0)
    };
    let mut w = SpectralField::forward(omega0).dealias();
    for _ in 0..steps {
        w = rk4(&w, dt, frozen_rhs);
    }
    Ok(w.inverse())
}
