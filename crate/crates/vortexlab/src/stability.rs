//! Controlled perturbations of steady states, orbit distances, rearrangement
//! audits, and the finite-horizon orbital-stability experiments.
//!
//! The steady set on this convex domain is the sign pair {ω̃, −ω̃}, so every
//! orbit distance is a minimum over two elements. An experiment perturbs ω̃,
//! evolves, and records orbit distances together with the conserved-quantity
//! drifts; a report whose drifts exceed the frozen gates is flagged invalid,
//! because the stability reading leans on those invariants actually holding.

use crate::error::{Error, Result};
use crate::euler::{advect_frozen_stream, evolve_detail, Observer, StepControl};
use crate::grid::ScalarField;
use crate::lane_emden::LaneEmdenSolution;
use crate::limits;
use crate::spectral::{random_band_limited, SpectralField};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    /// ω₀ = (1 + δ·g)·ω̃ with the fixed smooth profile g = sin(2x)·sin(y).
    Multiplicative,
    /// ω₀ = ω̃ + δ·ξ/∥ξ∥ with a seeded band-limited ξ; the offset has size
    /// exactly δ in the chosen L^s norm.
    RandomSmooth,
    /// ω̃ transported along a fixed divergence-free stream for pseudo-time δ:
    /// an approximate rearrangement of ω̃.
    AreaPreserving,
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PerturbationKind::Multiplicative => "multiplicative",
            PerturbationKind::RandomSmooth => "random-smooth",
            PerturbationKind::AreaPreserving => "area-preserving",
        };
        f.write_str(s)
    }
}

impl serde::Serialize for PerturbationKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiplicative" => Ok(PerturbationKind::Multiplicative),
            "random-smooth" | "random_smooth" => Ok(PerturbationKind::RandomSmooth),
            "area-preserving" | "area_preserving" => Ok(PerturbationKind::AreaPreserving),
            other => Err(Error::validation(
                "pert",
                format!("unknown perturbation kind `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    /// Target size δ ≥ 0 (δ = 0 reproduces the base state).
    pub delta: f64,
    /// Norm exponent in which δ is measured, s ≥ 1.
    pub norm_s: f64,
    pub seed: u64,
    /// Rescale the perturbed state into the closed L^{1+1/p} ball of radius
    /// μ_p when it falls outside.
    pub constrain_to_sp: bool,
}

impl Perturbation {
    fn validate(&self, base: &ScalarField) -> Result<()> {
        if !(self.delta >= 0.0) {
            return Err(Error::InvalidParam {
                name: "delta",
                value: self.delta,
                requirement: "must be nonnegative",
            });
        }
        if !(self.norm_s >= 1.0) {
            return Err(Error::InvalidParam {
                name: "norm_s",
                value: self.norm_s,
                requirement: "must satisfy s >= 1",
            });
        }
        let base_norm = base.lp_norm(self.norm_s)?;
        if self.delta > base_norm {
            return Err(Error::PerturbationTooLarge {
                delta: self.delta,
                base_norm,
            });
        }
        Ok(())
    }
}

/// The set of steady vorticities the orbit distance is measured against.
#[derive(Debug, Clone)]
pub struct OrbitSet {
    pub representative: ScalarField,
    /// True on this domain: the set is exactly {ω̃, −ω̃}.
    pub closed_under_sign: bool,
}

impl OrbitSet {
    pub fn sign_pair(representative: ScalarField) -> Self {
        OrbitSet {
            representative,
            closed_under_sign: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum OrbitNorm {
    Ls(f64),
    Energy,
}

fn norm_of(diff: &ScalarField, norm: OrbitNorm) -> Result<f64> {
    match norm {
        OrbitNorm::Ls(s) => diff.lp_norm(s),
        OrbitNorm::Energy => Ok(SpectralField::forward(diff).energy_norm()),
    }
}

/// Distance from ω to the orbit set: min over {ω̃, −ω̃} when the set is
/// closed under sign, else the distance to the representative alone.
pub fn orbit_distance(omega: &ScalarField, orbit: &OrbitSet, norm: OrbitNorm) -> Result<f64> {
    let rep = &orbit.representative;
    if rep.l2_norm() == 0.0 {
        return Err(Error::InvalidParam {
            name: "representative",
            value: 0.0,
            requirement: "orbit representative must be nonzero",
        });
    }
    omega.same_grid(rep)?;
    let plus = norm_of(&(omega - rep), norm)?;
    if !orbit.closed_under_sign {
        return Ok(plus);
    }
    let minus = norm_of(&(omega + rep), norm)?;
    Ok(plus.min(minus))
}

/// Quadrature measure of the superlevel sets: h²·#{nodes with ω > a} for
/// each level a. Nonincreasing in a, bounded by the interior area.
pub fn distribution_function(omega: &ScalarField, levels: &[f64]) -> Result<Vec<f64>> {
    for &a in levels {
        if !a.is_finite() {
            return Err(Error::InvalidParam {
                name: "level",
                value: a,
                requirement: "levels must be finite",
            });
        }
    }
    let w = omega.grid().cell_area();
    Ok(levels
        .iter()
        .map(|&a| w * omega.values().iter().filter(|&&v| v > a).count() as f64)
        .collect())
}

/// L¹ distance between the sorted nodal value vectors (uniform h² weights):
/// the discrete proxy for comparing rearrangement classes. Zero exactly when
/// the nodal multisets coincide; symmetric in its arguments.
pub fn rearrangement_drift(omega_t: &ScalarField, omega_0: &ScalarField) -> Result<f64> {
    omega_t.same_grid(omega_0)?;
    let a = omega_t.sorted_values();
    let b = omega_0.sorted_values();
    let w = omega_t.grid().cell_area();
    Ok(w * a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>())
}

/// Fixed smooth modulation profile of the multiplicative perturbation.
fn modulation_profile(base: &ScalarField) -> ScalarField {
    ScalarField::from_fn(base.grid(), |x, y| (2.0 * x).sin() * y.sin())
}

/// Fixed stream function whose ∇⊥ field transports the area-preserving
/// perturbation.
fn transport_stream(base: &ScalarField) -> ScalarField {
    ScalarField::from_fn(base.grid(), |x, y| x.sin() * (2.0 * y).sin())
}

/// Builds the perturbed initial vorticity. `p` and `mu_p` define the
/// invariant ball used by the `constrain_to_sp` rescale.
pub fn perturb(
    base: &ScalarField,
    pert: &Perturbation,
    p: f64,
    mu_p: f64,
) -> Result<ScalarField> {
    pert.validate(base)?;
    let mut out = match pert.kind {
        PerturbationKind::Multiplicative => {
            let g = modulation_profile(base);
            let factor = g.map(|v| 1.0 + pert.delta * v);
            base.mul_pointwise(&factor)
        }
        PerturbationKind::RandomSmooth => {
            if pert.delta == 0.0 {
                base.clone()
            } else {
                let noise = random_band_limited(base.grid(), 8, pert.seed).inverse();
                let scale = pert.delta / noise.lp_norm(pert.norm_s)?;
                base + &noise.scaled(scale)
            }
        }
        PerturbationKind::AreaPreserving => {
            if pert.delta == 0.0 {
                base.clone()
            } else {
                advect_frozen_stream(base, &transport_stream(base), pert.delta, 0.5)?
            }
        }
    };
    if pert.constrain_to_sp {
        let q = 1.0 + 1.0 / p;
        let norm = out.lp_norm(q)?;
        if norm > mu_p {
            out = out.scaled(mu_p / norm);
        }
    }
    Ok(out)
}

/// Time series of one orbital-stability experiment.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// The L^s exponents tracked, in the order of the series below.
    pub norms_s: Vec<f64>,
    /// dist_ls[i][k]: orbit distance in L^{norms_s[i]} at times[k].
    pub dist_ls: Vec<Vec<f64>>,
    pub dist_e: Vec<f64>,
    pub energy_drift: Vec<f64>,
    /// ls_drift[i][k]: relative ∥ω∥_{L^{norms_s[i]}} drift at times[k].
    pub ls_drift: Vec<Vec<f64>>,
    pub rearrangement_drift: Vec<f64>,
    pub delta: f64,
    /// False when the trajectory aborted on blow-up.
    pub complete: bool,
    /// False when any conserved-quantity drift exceeded its frozen gate
    /// (the orbit-distance series is then not a trustworthy stability
    /// reading).
    pub valid: bool,
    /// Echo of the resolved experiment configuration.
    pub config: serde_json::Value,
}

impl StabilityReport {
    pub fn sup_dist_ls(&self, i: usize) -> f64 {
        self.dist_ls[i].iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_dist_e(&self) -> f64 {
        self.dist_e.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.energy_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_ls_drift(&self) -> f64 {
        self.ls_drift
            .iter()
            .flat_map(|v| v.iter().copied())
            .fold(0.0, f64::max)
    }
}

/// Perturbs the steady state of `solution`, evolves to the horizon in
/// `ctrl`, and assembles the full report. Blow-up marks the report
/// incomplete instead of erroring; every other failure propagates.
pub fn run_experiment(
    solution: &LaneEmdenSolution,
    pert: &Perturbation,
    ctrl: &StepControl,
    norms: &[f64],
) -> Result<StabilityReport> {
    let omega0 = perturb(&solution.omega, pert, solution.p, solution.mu_p)?;
    let orbit = OrbitSet::sign_pair(solution.omega.clone());
    let mut observers = Vec::new();
    for &s in norms {
        observers.push(Observer::OrbitDistanceLs(orbit.clone(), s));
    }
    observers.push(Observer::OrbitDistanceEnergy(orbit));
    observers.push(Observer::EnergyDrift);
    for &s in norms {
        observers.push(Observer::LsNormDrift(s));
    }
    observers.push(Observer::RearrangementDrift);

    let out = evolve_detail(&omega0, ctrl, &observers)?;
    let k = norms.len();
    let times: Vec<f64> = out.records.iter().map(|r| r.t).collect();
    let column = |j: usize| -> Vec<f64> { out.records.iter().map(|r| r.values[j]).collect() };
    let dist_ls: Vec<Vec<f64>> = (0..k).map(column).collect();
    let dist_e = column(k);
    let energy_drift = column(k + 1);
    let ls_drift: Vec<Vec<f64>> = (0..k).map(|i| column(k + 2 + i)).collect();
    let rearrangement = column(2 * k + 2);

    let complete = out.blowup.is_none();
    let config = serde_json::json!({
        "p": solution.p,
        "n": solution.omega.grid().n(),
        "delta": pert.delta,
        "norm_s": norms,
        "seed": pert.seed,
        "pert": pert.kind.to_string(),
        "constrain_to_sp": pert.constrain_to_sp,
        "cfl": ctrl.cfl,
        "t_end": ctrl.t_end,
        "record_every": ctrl.record_every,
        "blowup_limit": ctrl.blowup_limit,
    });
    let mut report = StabilityReport {
        times,
        norms_s: norms.to_vec(),
        dist_ls,
        dist_e,
        energy_drift,
        ls_drift,
        rearrangement_drift: rearrangement,
        delta: pert.delta,
        complete,
        valid: false,
        config,
    };
    report.valid = complete
        && report.max_energy_drift() <= limits::ENERGY_DRIFT_LIMIT
        && report.max_ls_drift() <= limits::LS_DRIFT_LIMIT;
    Ok(report)
}
