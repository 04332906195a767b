//! Frozen numerical tolerances and measured bounds, with the basis for each
//! value. Tests and the `verify` command import from here rather than
//! scattering ad-hoc magic numbers.

/// Budget for identities that are exact in the discrete algebra (change of
/// basis, diagonal operators, quadrature pairings of band-limited fields).
/// f64 carries ~15.9 digits; 1e-12 relative admits a few digits of
/// accumulated rounding across the transforms involved.
pub const ROUNDOFF_REL: f64 = 1e-12;

/// Max-norm budget for composed exact operations such as −Δ∘G. Slightly
/// looser than `ROUNDOFF_REL` because max norms do not average rounding.
pub const SPECTRAL_EXACTNESS: f64 = 1e-10;

/// Parseval: |∥f∥²_{L²} − Σ a²| relative to Σ a².
pub const PARSEVAL_REL: f64 = 1e-10;

/// energy_norm()² must reproduce 2·energy() essentially bit-for-bit.
pub const ENERGY_NORM_IDENTITY_REL: f64 = 1e-14;

/// Agreement between the two independent variational routes to μ_p, and for
/// the energy-maximum identity 2M_p = μ_p^{1+1/p}, at n = 64. The dominant
/// errors are the fixed-point tolerance and the nodal quadrature of the
/// fractional powers; measured discrepancies are below 1e-5, so 1e-3 leaves
/// two orders of headroom.
pub const CROSS_ROUTE_REL: f64 = 1e-3;

/// Agreement between the spectral solvers at n = 64 and the O(h²)
/// finite-difference oracles at n = 512.
pub const ORACLE_REL: f64 = 1e-3;

/// The unit-ball energy maximum at p = 1 is exactly 1/4 (principal
/// eigenvalue 2); the power iteration at tol 1e-12 leaves far less than
/// this in the last digits.
pub const EIGEN_E1_ABS: f64 = 1e-8;

/// The linearization sign check must match (1−p)·∫|u|^{p+1} to this
/// relative tolerance whenever the Nehari deficit is at round-off.
pub const RAYLEIGH_REL: f64 = 1e-6;

/// Nehari deficit of a converged ground state, absolute: the rescale
/// enforces the constraint each iteration, leaving only round-off of
/// integrals of size O(10).
pub const NEHARI_DEFICIT_ABS: f64 = 1e-10;

/// Relative energy drift admitted over a 10-eddy-turnover evolution at
/// n = 128, cfl = 0.5. The semi-discrete advection conserves energy to
/// round-off, so what remains is RK4 time-stepping error; measured drift is
/// far below, and 1e-6 is the frozen gate.
pub const ENERGY_DRIFT_LIMIT: f64 = 1e-6;

/// Relative L^s vorticity drift over the same horizon. Dealiasing removes
/// enstrophy at the truncation boundary, so this gate is looser than the
/// energy gate.
pub const LS_DRIFT_LIMIT: f64 = 1e-4;

/// Orbital-stability corroboration: sup_t of the orbit distance may not
/// exceed this multiple of the initial perturbation size δ.
pub const STABILITY_DIST_FACTOR: f64 = 5.0;

/// The ratio sup_t dist/δ may vary at most by this factor across the δ
/// ladder {0.02, 0.04, 0.08}; near-linear response is the finite-horizon
/// reading of orbital stability.
pub const STABILITY_RATIO_SPREAD: f64 = 3.0;

/// Floor used when turning |a−b|/|a| into a well-defined relative error
/// for near-zero expected values.
pub const NEAR_ZERO: f64 = 1e-14;

/// Measured sup-norm bounds ∥ω̃∥_∞ for ground states at n = 64, frozen with
/// ~15% headroom over the observed values (boundedness audit; also the
/// denominator of the eddy-turnover time).
pub fn vorticity_sup_bound(p: f64) -> Option<f64> {
    if p == 1.5 {
        Some(16.5) // measured 14.349
    } else if p == 2.0 {
        Some(10.1) // measured 8.772
    } else if p == 3.0 {
        Some(10.8) // measured 9.334
    } else {
        None
    }
}

/// Measured uniform-continuity constant of the kinetic energy on the test
/// family {∥w∥_∞ ≤ 1}: |E(v) − E(w)| ≤ C·∥v−w∥_{L²}. Theory gives
/// C ≤ ∥v+w∥_{L²}/(2λ₁) ≤ π/2 ≈ 1.57 on that family; frozen just above.
pub const ENERGY_LIPSCHITZ_C: f64 = 1.6;

/// Fixed-horizon error of the four-stage time stepper must shrink by ~2⁴
/// when dt halves; the dt-refinement check accepts ratios in [8, 32].
pub const RK4_ORDER_RATIO_LOW: f64 = 8.0;
pub const RK4_ORDER_RATIO_HIGH: f64 = 32.0;

/// Sorted-value L¹ drift of the area-preserving perturbation at n = 128,
/// δ = 0.1: measured 6.5e-3 (dominated by resampling the transported field
/// on the fixed grid, shrinking with h), frozen with ~1.5x headroom.
pub const AREA_PRESERVING_DRIFT_ABS: f64 = 1e-2;

/// Numerical steadiness floor of an unperturbed ground-state experiment at
/// n = 64 over a few eddy turnovers, in L². The floor is set by the
/// dealiasing tail of ω̃ = u^p (4.8e-4 at n = 64) and its induced drift;
/// measured sup distance 1.14e-3 over 3 eddy times, frozen with headroom.
pub const STEADINESS_FLOOR_L2: f64 = 3e-3;

/// Reversed-velocity integration must return to the initial state within
/// this multiple of the forward L² drift: both are O(dt⁴), and the measured
/// ratio is 35–40 (phase error dominates norm drift), frozen at 100.
pub const REVERSIBILITY_DRIFT_FACTOR: f64 = 100.0;
