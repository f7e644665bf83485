//! Cell-averaged density fields on uniform 1-D grids.

use crate::error::{Error, Result};
use crate::model::VelocityModel;

/// How the density continues outside the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPolicy {
    /// Extend by the nearest cell value (exact for data constant near
    /// the edges).
    ConstantExtension,
    /// Wrap around with period N·dx.
    Periodic,
}

impl BoundaryPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryPolicy::ConstantExtension => "constant-extension",
            BoundaryPolicy::Periodic => "periodic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "constant-extension" => Some(BoundaryPolicy::ConstantExtension),
            "periodic" => Some(BoundaryPolicy::Periodic),
            _ => None,
        }
    }
}

/// A spatial interval, used for windowed error norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64) -> Self {
        Window { x_min, x_max }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}

/// Piecewise-constant density on a uniform grid: cell i covers
/// [x0 + i·dx, x0 + (i+1)·dx) and holds the cell average `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
    boundary: BoundaryPolicy,
}

impl DensityField {
    pub fn new(x0: f64, dx: f64, values: Vec<f64>, boundary: BoundaryPolicy) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Domain(format!("dx must be > 0, got {dx}")));
        }
        if values.is_empty() {
            return Err(Error::Domain("field needs at least one cell".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite cell value".into()));
        }
        Ok(DensityField {
            x0,
            dx,
            values,
            boundary,
        })
    }

    /// Sample a function at cell centers.
    pub fn from_fn(
        x0: f64,
        dx: f64,
        n: usize,
        boundary: BoundaryPolicy,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = (0..n)
            .map(|i| f(x0 + (i as f64 + 0.5) * dx))
            .collect();
        Self::new(x0, dx, values, boundary)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn boundary(&self) -> BoundaryPolicy {
        self.boundary
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    /// Left edge of cell i; i = len() is the right end of the domain.
    pub fn edge(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.edge(self.len())
    }

    /// Total mass Σ ρ_i · dx.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Check every cell lies in [0, rho_jam] for the run's model.
    pub fn validate_against(&self, model: &VelocityModel) -> Result<()> {
        for (i, &v) in self.values.iter().enumerate() {
            if v < 0.0 || v > model.rho_jam() {
                return Err(Error::Domain(format!(
                    "cell {i} holds {v}, outside [0, {}]",
                    model.rho_jam()
                )));
            }
        }
        Ok(())
    }

    /// True when the grids coincide (same origin, spacing, size, boundary).
    pub fn same_grid(&self, other: &DensityField) -> bool {
        self.len() == other.len()
            && self.boundary == other.boundary
            && (self.x0 - other.x0).abs() <= 1e-9 * self.dx
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
    }

    /// Conservative restriction onto a grid coarser by an integer factor:
    /// coarse cell = mean of its `factor` fine cells.
    pub fn restrict(&self, factor: usize) -> Result<DensityField> {
        if factor == 0 || self.len() % factor != 0 {
            return Err(Error::Usage(format!(
                "restriction factor {factor} does not divide {} cells",
                self.len()
            )));
        }
        let values = self
            .values
            .chunks_exact(factor)
            .map(|chunk| chunk.iter().sum::<f64>() / factor as f64)
            .collect();
        DensityField::new(self.x0, self.dx * factor as f64, values, self.boundary)
    }

    /// Indices of cells whose centers fall inside the window.
    pub fn cells_in(&self, window: &Window) -> std::ops::Range<usize> {
        let first = (0..self.len())
            .find(|&i| self.cell_center(i) >= window.x_min)
            .unwrap_or(self.len());
        let last = (first..self.len())
            .take_while(|&i| self.cell_center(i) <= window.x_max)
            .last()
            .map(|i| i + 1)
            .unwrap_or(first);
        first..last
    }
}

/// Total variation of the cell values; wraparound jump included for
/// periodic fields.
pub(crate) fn field_tv(field: &DensityField) -> f64 {
    let v = field.values();
    let mut tv: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    if field.boundary() == BoundaryPolicy::Periodic && v.len() > 1 {
        tv += (v[0] - v[v.len() - 1]).abs();
    }
    tv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let f = DensityField::new(-1.0, 0.5, vec![0.1, 0.2, 0.3, 0.4], BoundaryPolicy::ConstantExtension)
            .unwrap();
        assert_eq!(f.cell_center(0), -0.75);
        assert_eq!(f.edge(4), 1.0);
        assert!((f.mass() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(DensityField::new(0.0, 0.0, vec![0.1], BoundaryPolicy::Periodic).is_err());
        assert!(DensityField::new(0.0, 1.0, vec![], BoundaryPolicy::Periodic).is_err());
        assert!(DensityField::new(0.0, 1.0, vec![f64::NAN], BoundaryPolicy::Periodic).is_err());
    }

    #[test]
    fn restriction_averages() {
        let f = DensityField::new(0.0, 0.25, vec![1.0, 3.0, 2.0, 4.0], BoundaryPolicy::ConstantExtension)
            .unwrap();
        let c = f.restrict(2).unwrap();
        assert_eq!(c.values(), &[2.0, 3.0]);
        assert_eq!(c.dx(), 0.5);
        assert!(f.restrict(3).is_err());
    }

    #[test]
    fn window_selection() {
        let f = DensityField::from_fn(-2.0, 0.5, 8, BoundaryPolicy::ConstantExtension, |_| 0.0)
            .unwrap();
        let r = f.cells_in(&Window::new(-1.0, 1.0));
        for i in r.clone() {
            assert!(f.cell_center(i) >= -1.0 && f.cell_center(i) <= 1.0);
        }
        assert_eq!(r.len(), 4);
    }
}
