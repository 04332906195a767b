//! Interior-node discretization of the open square domain (0, π)².

use crate::error::{Error, Result};
use ndarray::Array2;
use std::f64::consts::PI;

/// Coarsest admissible resolution; below this there is no spectral content
/// left after dealiasing.
pub const MIN_RESOLUTION: usize = 4;

/// Uniform grid of n×n interior nodes x_j = j·h, y_k = k·h, h = π/(n+1).
///
/// Boundary nodes are never stored: every nodal field carries an implicit
/// zero trace on the boundary of the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_RESOLUTION {
            return Err(Error::GridTooCoarse {
                n,
                min: MIN_RESOLUTION,
            });
        }
        Ok(Grid { n })
    }

    /// Interior resolution per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh spacing h = π/(n+1).
    pub fn spacing(&self) -> f64 {
        PI / (self.n as f64 + 1.0)
    }

    /// x-coordinate of interior node j (0-based): x = (j+1)·h.
    pub fn x(&self, j: usize) -> f64 {
        (j as f64 + 1.0) * self.spacing()
    }

    /// y-coordinate of interior node k (0-based).
    pub fn y(&self, k: usize) -> f64 {
        self.x(k)
    }

    /// Quadrature weight h² of one interior node.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }
}

/// Nodal samples of a function on the interior grid, zero trace implied.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Grid,
    values: Array2<f64>,
}

impl ScalarField {
    /// Wraps an n×n array of nodal values, validating shape and finiteness.
    pub fn from_values(grid: Grid, values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows != grid.n() || cols != grid.n() {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                n: grid.n(),
            });
        }
        for ((row, col), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
        }
        Ok(ScalarField { grid, values })
    }

    /// Internal constructor for values produced by operations that cannot
    /// introduce shape errors; finiteness is the caller's responsibility.
    pub(crate) fn from_values_unchecked(grid: Grid, values: Array2<f64>) -> Self {
        debug_assert_eq!(values.dim(), (grid.n(), grid.n()));
        ScalarField { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            values: Array2::zeros((grid.n(), grid.n())),
        }
    }

    /// Samples f(x, y) at the interior nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let values = Array2::from_shape_fn((n, n), |(j, k)| f(grid.x(j), grid.y(k)));
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[[j, k]]
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: other.grid.n(),
            });
        }
        Ok(())
    }

    /// Quadrature L^s norm (Σ |f|^s · h²)^{1/s}, s ≥ 1.
    pub fn lp_norm(&self, s: f64) -> Result<f64> {
        if !(s >= 1.0) {
            return Err(Error::InvalidParam {
                name: "s",
                value: s,
                requirement: "norm exponent must satisfy s >= 1",
            });
        }
        let w = self.grid.cell_area();
        if s == 2.0 {
            return Ok((w * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt());
        }
        if s == 1.0 {
            return Ok(w * self.values.iter().map(|v| v.abs()).sum::<f64>());
        }
        let sum: f64 = self.values.iter().map(|v| v.abs().powf(s)).sum();
        Ok((w * sum).powf(1.0 / s))
    }

    /// Quadrature L² norm; infallible shorthand for `lp_norm(2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_area() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Quadrature inner product h² Σ f·g.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.grid, other.grid, "inner product across grids");
        self.grid.cell_area()
            * self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn scaled(&self, c: f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: &self.values * c,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.mapv(&f),
        }
    }

    /// Pointwise product of two fields on the same grid.
    pub fn mul_pointwise(&self, other: &ScalarField) -> Self {
        assert_eq!(self.grid, other.grid, "pointwise product across grids");
        ScalarField {
            grid: self.grid,
            values: &self.values * &other.values,
        }
    }

    /// The odd power g(t) = |t|^{p−1}·t, evaluated nodally.
    pub fn signed_pow(&self, p: f64) -> Self {
        if p == 1.0 {
            return self.clone();
        }
        if p == 2.0 {
            return self.map(|t| t.abs() * t);
        }
        if p == 3.0 {
            return self.map(|t| t * t * t);
        }
        self.map(|t| t.abs().powf(p) * t.signum())
    }

    /// Quadrature integral h² Σ |f|^q.
    pub fn abs_pow_integral(&self, q: f64) -> f64 {
        let sum: f64 = if q == 2.0 {
            self.values.iter().map(|v| v * v).sum()
        } else if q == 3.0 {
            self.values.iter().map(|v| v.abs().powi(3)).sum()
        } else if q == 4.0 {
            self.values.iter().map(|v| (v * v) * (v * v)).sum()
        } else {
            self.values.iter().map(|v| v.abs().powf(q)).sum()
        };
        self.grid.cell_area() * sum
    }

    /// Nodal values sorted ascending (the discrete decreasing-rearrangement
    /// proxy uses these with uniform h² weights).
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("non-finite nodal value"));
        v
    }

    /// Reflection x ↦ π − x; the interior grid maps onto itself exactly.
    pub fn reflected_x(&self) -> Self {
        let n = self.grid.n();
        let values = Array2::from_shape_fn((n, n), |(j, k)| self.values[[n - 1 - j, k]]);
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    /// Swap of the two coordinates (a measure-preserving node permutation).
    pub fn transposed(&self) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.t().to_owned(),
        }
    }
}

impl std::ops::Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        assert_eq!(self.grid, rhs.grid, "field addition across grids");
        ScalarField {
            grid: self.grid,
            values: &self.values + &rhs.values,
        }
    }
}

impl std::ops::Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        assert_eq!(self.grid, rhs.grid, "field subtraction across grids");
        ScalarField {
            grid: self.grid,
            values: &self.values - &rhs.values,
        }
    }
}

impl std::ops::Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scaled(-1.0)
    }
}
