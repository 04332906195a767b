//! Double-sine spectral representation on the interior grid.
//!
//! Basis: φ_{mn}(x, y) = (2/π)·sin(m x)·sin(n y), orthonormal in L²((0,π)²),
//! eigenfunctions of −Δ with zero Dirichlet data and eigenvalue m² + n².
//! On the n×n interior grid the h²-weighted nodal quadrature reproduces the
//! continuum inner products of band-limited functions exactly, so the
//! forward/inverse transforms below form an exact change of basis:
//!
//!   a_{mn} = h² Σ_{jk} f_{jk} φ_{mn}(x_j, y_k),     f_{jk} = Σ_{mn} a_{mn} φ_{mn}(x_j, y_k).
//!
//! The Green operator (inverse of −Δ) is diagonal here, which is the point
//! of fixing the domain to the square: no elliptic solver error enters.

use crate::error::Result;
use crate::grid::{Grid, ScalarField};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Cached evaluation matrices for one grid size.
struct Basis {
    /// sin[(m-1, j-1)] = sin(m·x_j); symmetric in (m, j).
    sin: Array2<f64>,
    /// cos[(m-1, j-1)] = cos(m·x_j).
    cos: Array2<f64>,
    /// λ_{mn} = m² + n².
    lambda: Array2<f64>,
}

fn basis(n: usize) -> Arc<Basis> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Basis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("basis cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let step = PI / (n as f64 + 1.0);
            let sin = Array2::from_shape_fn((n, n), |(m, j)| {
                (((m + 1) * (j + 1)) as f64 * step).sin()
            });
            let cos = Array2::from_shape_fn((n, n), |(m, j)| {
                (((m + 1) * (j + 1)) as f64 * step).cos()
            });
            let lambda = Array2::from_shape_fn((n, n), |(m, k)| {
                ((m + 1) * (m + 1) + (k + 1) * (k + 1)) as f64
            });
            Arc::new(Basis { sin, cos, lambda })
        })
        .clone()
}

/// Double-sine coefficients a_{mn} of a nodal field, 1 ≤ m, n ≤ grid.n().
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Array2<f64>,
}

impl SpectralField {
    pub fn from_coeffs(grid: Grid, coeffs: Array2<f64>) -> Result<Self> {
        let (rows, cols) = coeffs.dim();
        if rows != grid.n() || cols != grid.n() {
            return Err(crate::error::Error::ShapeMismatch {
                rows,
                cols,
                n: grid.n(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub(crate) fn from_coeffs_unchecked(grid: Grid, coeffs: Array2<f64>) -> Self {
        debug_assert_eq!(coeffs.dim(), (grid.n(), grid.n()));
        SpectralField { grid, coeffs }
    }

    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            coeffs: Array2::zeros((grid.n(), grid.n())),
        }
    }

    /// Single basis mode amplitude·φ_{mn}; m, n are 1-based.
    pub fn mode(grid: Grid, m: usize, n: usize, amplitude: f64) -> Self {
        assert!(
            (1..=grid.n()).contains(&m) && (1..=grid.n()).contains(&n),
            "mode ({m},{n}) outside 1..={}",
            grid.n()
        );
        let mut coeffs = Array2::zeros((grid.n(), grid.n()));
        coeffs[[m - 1, n - 1]] = amplitude;
        SpectralField { grid, coeffs }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &Array2<f64> {
        &self.coeffs
    }

    /// Coefficient of φ_{mn}; m, n are 1-based.
    pub fn coeff(&self, m: usize, n: usize) -> f64 {
        self.coeffs[[m - 1, n - 1]]
    }

    /// Forward transform of a nodal field: a = (2h²/π)·S·F·S.
    pub fn forward(field: &ScalarField) -> Self {
        let grid = field.grid();
        let b = basis(grid.n());
        let scale = 2.0 * grid.cell_area() / PI;
        let coeffs = b.sin.dot(field.values()).dot(&b.sin) * scale;
        SpectralField { grid, coeffs }
    }

    /// Inverse transform back to nodal values: F = (2/π)·S·A·S.
    pub fn inverse(&self) -> ScalarField {
        let b = basis(self.grid.n());
        let values = b.sin.dot(&self.coeffs).dot(&b.sin) * (2.0 / PI);
        ScalarField::from_values_unchecked(self.grid, values)
    }

    /// Green operator with zero Dirichlet data: divide each coefficient by
    /// λ_{mn} = m² + n² (always ≥ 2, so this never degenerates).
    pub fn green(&self) -> Self {
        let b = basis(self.grid.n());
        SpectralField {
            grid: self.grid,
            coeffs: &self.coeffs / &b.lambda,
        }
    }

    /// Exact spectral Laplacian −Δ: multiply each coefficient by λ_{mn}.
    pub fn laplacian_neg(&self) -> Self {
        let b = basis(self.grid.n());
        SpectralField {
            grid: self.grid,
            coeffs: &self.coeffs * &b.lambda,
        }
    }

    /// 2/3-rule truncation: zero every coefficient with m > ⌊2n/3⌋ or
    /// column index > ⌊2n/3⌋, leaving the rest unchanged.
    pub fn dealias(&self) -> Self {
        let cut = dealias_cutoff(self.grid.n());
        let mut coeffs = self.coeffs.clone();
        for ((m, k), c) in coeffs.indexed_iter_mut() {
            if m + 1 > cut || k + 1 > cut {
                *c = 0.0;
            }
        }
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    /// Kinetic energy E = ½ Σ a²_{mn} / λ_{mn} = ½ ⟨w, Gw⟩.
    pub fn energy(&self) -> f64 {
        let b = basis(self.grid.n());
        0.5 * self
            .coeffs
            .iter()
            .zip(b.lambda.iter())
            .map(|(a, l)| a * a / l)
            .sum::<f64>()
    }

    /// Energy norm ∥w∥_E = (2E(w))^{1/2}.
    pub fn energy_norm(&self) -> f64 {
        (2.0 * self.energy()).sqrt()
    }

    /// Dirichlet energy of the represented function: Σ λ_{mn} a²_{mn} = ∫|∇f|².
    pub fn gradient_energy(&self) -> f64 {
        let b = basis(self.grid.n());
        self.coeffs
            .iter()
            .zip(b.lambda.iter())
            .map(|(a, l)| a * a * l)
            .sum::<f64>()
    }

    /// ℓ² norm of the coefficients (equals the quadrature L² norm of the
    /// nodal field, by Parseval).
    pub fn coeff_l2(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|a| a.is_finite())
    }

    /// Nodal ∂f/∂x by exact spectral differentiation (cosine series in x).
    pub fn dx_nodal(&self) -> ScalarField {
        let n = self.grid.n();
        let b = basis(n);
        let mut weighted = self.coeffs.clone();
        for ((m, _), c) in weighted.indexed_iter_mut() {
            *c *= (m + 1) as f64;
        }
        let values = b.cos.t().dot(&weighted).dot(&b.sin) * (2.0 / PI);
        ScalarField::from_values_unchecked(self.grid, values)
    }

    /// Nodal ∂f/∂y by exact spectral differentiation (cosine series in y).
    pub fn dy_nodal(&self) -> ScalarField {
        let n = self.grid.n();
        let b = basis(n);
        let mut weighted = self.coeffs.clone();
        for ((_, k), c) in weighted.indexed_iter_mut() {
            *c *= (k + 1) as f64;
        }
        let values = b.sin.dot(&weighted).dot(&b.cos) * (2.0 / PI);
        ScalarField::from_values_unchecked(self.grid, values)
    }

    /// Velocity ∇⊥ψ = (∂_y ψ, −∂_x ψ) of a stream function, sampled at nodes.
    pub fn velocity(&self) -> (ScalarField, ScalarField) {
        (self.dy_nodal(), self.dx_nodal().scaled(-1.0))
    }

    /// Evaluates the sine series at an arbitrary point of the open square.
    pub fn eval_at(&self, x: f64, y: f64) -> f64 {
        let mut sum = 0.0;
        for ((m, k), a) in self.coeffs.indexed_iter() {
            if *a != 0.0 {
                sum += a * ((m + 1) as f64 * x).sin() * ((k + 1) as f64 * y).sin();
            }
        }
        sum * 2.0 / PI
    }

    /// self + c·other, the workhorse of the time stepper.
    pub fn scaled_add(&self, c: f64, other: &SpectralField) -> Self {
        assert_eq!(self.grid, other.grid, "axpy across grids");
        SpectralField {
            grid: self.grid,
            coeffs: &self.coeffs + &(&other.coeffs * c),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: &self.coeffs * c,
        }
    }
}

impl std::ops::Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.scaled_add(1.0, rhs)
    }
}

impl std::ops::Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.scaled_add(-1.0, rhs)
    }
}

impl std::ops::Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

/// Largest mode index kept by the 2/3 rule.
pub fn dealias_cutoff(n: usize) -> usize {
    2 * n / 3
}

/// Nodal samples of the orthonormal basis function φ_{mn}.
pub fn basis_mode_nodal(grid: Grid, m: usize, n: usize) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| {
        2.0 / PI * (m as f64 * x).sin() * (n as f64 * y).sin()
    })
}

/// Spectral divergence coefficients of a nodal velocity pair.
///
/// Each component is re-expanded from its nodal samples and differentiated
/// spectrally in the direction where it is a genuine sine polynomial (u1 in
/// x, u2 in y); row- and column-wise sine interpolation is exact there, so
/// for any pair produced by `velocity` the result vanishes to round-off.
pub fn divergence_coeffs(u1: &ScalarField, u2: &ScalarField) -> SpectralField {
    assert_eq!(u1.grid(), u2.grid(), "divergence across grids");
    let ddx = SpectralField::forward(u1).dx_nodal();
    let ddy = SpectralField::forward(u2).dy_nodal();
    SpectralField::forward(&(&ddx + &ddy))
}

/// Deterministic random field with uniform [−1, 1] coefficients on modes
/// m, n ≤ max_mode and zeros elsewhere.
pub fn random_band_limited(grid: Grid, max_mode: usize, seed: u64) -> SpectralField {
    let cap = max_mode.min(grid.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = Array2::zeros((grid.n(), grid.n()));
    for m in 0..cap {
        for k in 0..cap {
            coeffs[[m, k]] = rng.gen_range(-1.0..1.0);
        }
    }
    SpectralField::from_coeffs_unchecked(grid, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn forward_of_basis_mode_is_a_delta() {
        let g = grid(16);
        let nodal = basis_mode_nodal(g, 3, 5);
        let hat = SpectralField::forward(&nodal);
        for m in 1..=g.n() {
            for n in 1..=g.n() {
                let expected = if (m, n) == (3, 5) { 1.0 } else { 0.0 };
                assert!(
                    (hat.coeff(m, n) - expected).abs() < 1e-12,
                    "coeff({m},{n}) = {}",
                    hat.coeff(m, n)
                );
            }
        }
    }

    #[test]
    fn forward_is_linear_on_modes() {
        let g = grid(12);
        let f = &basis_mode_nodal(g, 1, 2).scaled(3.0) - &basis_mode_nodal(g, 2, 1).scaled(2.0);
        let hat = SpectralField::forward(&f);
        assert!((hat.coeff(1, 2) - 3.0).abs() < 1e-12);
        assert!((hat.coeff(2, 1) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_is_identity() {
        let g = grid(33);
        let w = random_band_limited(g, 33, 7);
        let back = SpectralField::forward(&w.inverse());
        let err: f64 = w
            .coeffs()
            .iter()
            .zip(back.coeffs().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12 * w.max_abs_coeff().max(1.0), "err = {err}");
    }

    #[test]
    fn green_divides_eigenmodes_by_eigenvalue() {
        let g = grid(8);
        let w = SpectralField::mode(g, 1, 1, 1.0);
        assert!((w.green().coeff(1, 1) - 0.5).abs() < 1e-15);
        let w = SpectralField::mode(g, 2, 3, 1.0);
        assert!((w.green().coeff(2, 3) - 1.0 / 13.0).abs() < 1e-15);
        let z = SpectralField::zeros(g);
        assert_eq!(z.green().max_abs_coeff(), 0.0);
    }

    #[test]
    fn laplacian_inverts_green_spectrally() {
        let g = grid(48);
        let w = random_band_limited(g, 48, 11);
        let recovered = w.green().laplacian_neg();
        let winv = w.inverse();
        let diff = &recovered.inverse() - &winv;
        assert!(diff.max_abs() <= 1e-10 * winv.max_abs());
    }

    #[test]
    fn green_is_self_adjoint_in_quadrature() {
        let g = grid(32);
        for seed in 0..5 {
            let v = random_band_limited(g, 32, seed).inverse();
            let w = random_band_limited(g, 32, seed + 100).inverse();
            let gv = SpectralField::forward(&v).green().inverse();
            let gw = SpectralField::forward(&w).green().inverse();
            let a = v.inner(&gw);
            let b = gv.inner(&w);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
        }
    }

    #[test]
    fn energy_of_modes() {
        let g = grid(10);
        assert!((SpectralField::mode(g, 1, 1, 1.0).energy() - 0.25).abs() < 1e-15);
        let w = SpectralField::mode(g, 1, 1, 2.0).scaled_add(3.0, &SpectralField::mode(g, 1, 2, 1.0));
        let expected = 0.5 * (4.0 / 2.0 + 9.0 / 5.0);
        assert!((w.energy() - expected).abs() < 1e-14);
        assert_eq!(SpectralField::zeros(g).energy(), 0.0);
    }

    #[test]
    fn energy_norm_examples() {
        let g = grid(10);
        let w = SpectralField::mode(g, 1, 1, 1.0);
        assert!((w.energy_norm() - 0.5_f64.sqrt()).abs() < 1e-15);
        assert!((w.scaled(2.0).energy_norm() - 2.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(SpectralField::zeros(g).energy_norm(), 0.0);
        // ∥w∥_E² = 2E(w) by construction
        let r = random_band_limited(g, 10, 3);
        assert!((r.energy_norm().powi(2) - 2.0 * r.energy()).abs() <= 1e-14 * r.energy());
    }

    #[test]
    fn dealias_zeroes_high_modes_only() {
        let g = grid(9); // cutoff = 6
        assert_eq!(dealias_cutoff(9), 6);
        let w = SpectralField::mode(g, 7, 1, 4.0).scaled_add(2.5, &SpectralField::mode(g, 1, 1, 1.0));
        let d = w.dealias();
        assert_eq!(d.coeff(7, 1), 0.0);
        assert_eq!(d.coeff(1, 1), 2.5);
        // idempotent
        let dd = d.dealias();
        assert_eq!(
            dd.coeffs()
                .iter()
                .zip(d.coeffs().iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
            0.0
        );
    }

    #[test]
    fn velocity_of_first_mode_matches_closed_form() {
        let g = grid(20);
        let psi = SpectralField::mode(g, 1, 1, 1.0);
        let (u1, u2) = psi.velocity();
        for j in 0..g.n() {
            for k in 0..g.n() {
                let (x, y) = (g.x(j), g.y(k));
                let e1 = 2.0 / PI * x.sin() * y.cos();
                let e2 = -2.0 / PI * x.cos() * y.sin();
                assert!((u1.get(j, k) - e1).abs() < 1e-13);
                assert!((u2.get(j, k) - e2).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn velocity_is_divergence_free_in_weak_form() {
        let g = grid(24);
        let psi = random_band_limited(g, 24, 42);
        let (u1, u2) = psi.velocity();
        let speed = u1.max_abs().max(u2.max_abs()).max(1.0);
        let div = divergence_coeffs(&u1, &u2);
        let worst = div.max_abs_coeff();
        assert!(worst <= 1e-12 * speed, "worst div coeff {worst}");
        let (z1, z2) = SpectralField::zeros(g).velocity();
        assert_eq!(z1.max_abs(), 0.0);
        assert_eq!(z2.max_abs(), 0.0);
    }

    #[test]
    fn parseval_ties_nodal_and_coefficient_norms() {
        let g = grid(40);
        for seed in [1, 9, 77] {
            let w = random_band_limited(g, 40, seed);
            let f = w.inverse();
            let lhs = f.lp_norm(2.0).unwrap().powi(2);
            let rhs = w.coeff_l2().powi(2);
            assert!((lhs - rhs).abs() <= 1e-10 * rhs);
        }
    }

    #[test]
    fn energy_positive_for_nonzero_fields() {
        let g = grid(16);
        for seed in 0..20 {
            let w = random_band_limited(g, 16, seed);
            assert!(w.energy() > 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn round_trip_random_coeffs(seed in 0u64..1000) {
            let g = grid(17);
            let w = random_band_limited(g, 17, seed);
            let back = SpectralField::forward(&w.inverse());
            let err = w.coeffs().iter().zip(back.coeffs().iter())
                .map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err < 1e-12);
        }

        #[test]
        fn dealias_idempotent_random(seed in 0u64..1000) {
            let g = grid(13);
            let w = random_band_limited(g, 13, seed);
            let once = w.dealias();
            let twice = once.dealias();
            let err = once.coeffs().iter().zip(twice.coeffs().iter())
                .map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err == 0.0);
        }
    }
}
