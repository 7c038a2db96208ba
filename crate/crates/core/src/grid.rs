//! Uniform mesh, staggered solution states and cell averaging.
//!
//! Base-parity cells are `[x_min + j dx, x_min + (j+1) dx)` for `j < n_cells`.
//! Half-parity cells are shifted by `dx/2` and centered on the interior
//! interfaces of the base grid, so there are `n_cells - 1` of them. Each step
//! pads the current state with constant ghost cells and flips the parity.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::error::{DfluxError, Result};
use crate::flux::Coefficient;

pub const DEFAULT_QUAD_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Parity {
    Base,
    Half,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Base => Parity::Half,
            Parity::Half => Parity::Base,
        }
    }

    /// Parity of the state after `step_index` steps from a base-parity start.
    pub fn of_step(step_index: u64) -> Self {
        if step_index.is_multiple_of(2) {
            Parity::Base
        } else {
            Parity::Half
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Mesh {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub n_cells: usize,
}

impl Mesh {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(DfluxError::InvalidParameter(format!(
                "mesh domain [{x_min}, {x_max}] must be finite and non-empty"
            )));
        }
        if n_cells < 2 {
            return Err(DfluxError::InvalidParameter(format!(
                "mesh needs at least 2 cells, got {n_cells}"
            )));
        }
        Ok(Mesh {
            x_min,
            x_max,
            dx: (x_max - x_min) / n_cells as f64,
            n_cells,
        })
    }

    /// Mesh with spacing `dx`; the domain length must be a whole number of cells.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(DfluxError::InvalidParameter(format!("dx must be positive, got {dx}")));
        }
        let ratio = (x_max - x_min) / dx;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * n.max(1.0) {
            return Err(DfluxError::InvalidParameter(format!(
                "dx = {dx} does not divide [{x_min}, {x_max}] into whole cells"
            )));
        }
        Self::new(x_min, x_max, n as usize)
    }

    pub fn cell_count(&self, parity: Parity) -> usize {
        match parity {
            Parity::Base => self.n_cells,
            Parity::Half => self.n_cells - 1,
        }
    }

    /// `[lo, hi)` of cell `j` at the given parity.
    pub fn cell_bounds(&self, parity: Parity, j: usize) -> (f64, f64) {
        let shift = match parity {
            Parity::Base => 0.0,
            Parity::Half => 0.5,
        };
        let lo = self.x_min + (j as f64 + shift) * self.dx;
        (lo, lo + self.dx)
    }

    pub fn center(&self, parity: Parity, j: usize) -> f64 {
        let (lo, hi) = self.cell_bounds(parity, j);
        0.5 * (lo + hi)
    }

    /// Position of the interface between cells `j` and `j + 1`.
    pub fn interface(&self, parity: Parity, j: usize) -> f64 {
        self.cell_bounds(parity, j).1
    }
}

/// Initial data `u0(x)`.
#[derive(Clone)]
pub enum InitialData {
    Constant(f64),
    /// `values[i]` for `breaks[i-1] < x <= breaks[i]`.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Constant(c) => write!(f, "Constant({c})"),
            InitialData::Piecewise { breaks, values } => {
                write!(f, "Piecewise {{ breaks: {breaks:?}, values: {values:?} }}")
            }
            InitialData::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl InitialData {
    pub fn step(at: f64, left: f64, right: f64) -> Self {
        InitialData::Piecewise {
            breaks: vec![at],
            values: vec![left, right],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InitialData::Constant(c) => *c,
            InitialData::Piecewise { breaks, values } => values[breaks.partition_point(|&b| b < x)],
            InitialData::Function(g) => g(x),
        }
    }

    fn validate(&self) -> Result<()> {
        if let InitialData::Piecewise { breaks, values } = self {
            if values.len() != breaks.len() + 1 || breaks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(DfluxError::InvalidParameter(
                    "piecewise initial data needs increasing breaks and one more value than breaks"
                        .to_string(),
                ));
            }
        }
        Ok(())
    }

    fn average(&self, a: f64, b: f64, quad_points: usize) -> f64 {
        match self {
            InitialData::Constant(c) => *c,
            InitialData::Piecewise { breaks, values } => {
                let mut i = breaks.partition_point(|&x| x <= a);
                if breaks.get(i).is_none_or(|&x| x >= b) {
                    return values[i];
                }
                let mut total = 0.0;
                let mut lo = a;
                while lo < b {
                    let hi = breaks.get(i).copied().unwrap_or(f64::INFINITY).min(b);
                    total += values[i] * (hi - lo);
                    lo = hi;
                    i += 1;
                }
                total / (b - a)
            }
            InitialData::Function(g) => {
                let q = quad_points.max(1);
                let h = (b - a) / q as f64;
                (0..q).map(|s| g(a + (s as f64 + 0.5) * h)).sum::<f64>() / q as f64
            }
        }
    }

    pub fn min_max(&self, mesh: &Mesh) -> (f64, f64) {
        match self {
            InitialData::Constant(c) => (*c, *c),
            InitialData::Piecewise { values, .. } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))),
            InitialData::Function(g) => {
                let n = 16 * mesh.n_cells;
                (0..=n)
                    .map(|i| g(mesh.x_min + (mesh.x_max - mesh.x_min) * i as f64 / n as f64))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
            }
        }
    }
}

/// Base-parity cell averages of `u0`. Constant and piecewise-constant data
/// are integrated exactly; general functions use a composite midpoint rule.
pub fn cell_average_initial(mesh: &Mesh, u0: &InitialData, quad_points: usize) -> Result<Vec<f64>> {
    if quad_points == 0 {
        return Err(DfluxError::InvalidParameter("quad_points must be >= 1".to_string()));
    }
    u0.validate()?;
    Ok((0..mesh.n_cells)
        .map(|j| {
            let (a, b) = mesh.cell_bounds(Parity::Base, j);
            u0.average(a, b, quad_points)
        })
        .collect())
}

/// Cell averages of `k` at the given parity.
pub fn cell_average_coefficient(mesh: &Mesh, coeff: &Coefficient, parity: Parity) -> Vec<f64> {
    (0..mesh.cell_count(parity))
        .map(|j| {
            let (a, b) = mesh.cell_bounds(parity, j);
            coeff.average(a, b, DEFAULT_QUAD_POINTS)
        })
        .collect()
}

/// Cell averages at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredState {
    pub mesh: Mesh,
    pub values: Vec<f64>,
    pub kbar: Vec<f64>,
    pub parity: Parity,
    pub time: f64,
    pub step_index: u64,
}

impl StaggeredState {
    /// Base-parity state at `t = 0` from initial data.
    pub fn initial(mesh: Mesh, u0: &InitialData, coeff: &Coefficient) -> Result<Self> {
        let values = cell_average_initial(&mesh, u0, DEFAULT_QUAD_POINTS)?;
        Ok(StaggeredState {
            kbar: cell_average_coefficient(&mesh, coeff, Parity::Base),
            mesh,
            values,
            parity: Parity::Base,
            time: 0.0,
            step_index: 0,
        })
    }

    /// Base-parity state at `t = 0` with the given cell averages.
    pub fn from_values(mesh: Mesh, values: Vec<f64>, coeff: &Coefficient) -> Result<Self> {
        if values.len() != mesh.n_cells {
            return Err(DfluxError::InvalidParameter(format!(
                "expected {} values, got {}",
                mesh.n_cells,
                values.len()
            )));
        }
        Ok(StaggeredState {
            kbar: cell_average_coefficient(&mesh, coeff, Parity::Base),
            mesh,
            values,
            parity: Parity::Base,
            time: 0.0,
            step_index: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn center(&self, j: usize) -> f64 {
        self.mesh.center(self.parity, j)
    }

    /// `dx * sum(values)`.
    pub fn mass(&self) -> f64 {
        self.mesh.dx * self.values.iter().sum::<f64>()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Writes `x,u` rows at the cell centers of the current parity.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,u")?;
        for (j, u) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.center(j), u)?;
        }
        Ok(())
    }
}

/// `values` and `kbar` padded with `ghost` copies of their edge entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Extended {
    pub values: Vec<f64>,
    pub kbar: Vec<f64>,
    pub ghost: usize,
}

fn pad(src: &[f64], ghost: usize) -> Vec<f64> {
    let first = src[0];
    let last = src[src.len() - 1];
    let mut out = Vec::with_capacity(src.len() + 2 * ghost);
    out.extend(std::iter::repeat_n(first, ghost));
    out.extend_from_slice(src);
    out.extend(std::iter::repeat_n(last, ghost));
    out
}

/// Zero-gradient (absorbing) extension by `ghost` cells on each side.
pub fn extend_absorbing(state: &StaggeredState, ghost: usize) -> Result<Extended> {
    if state.is_empty() {
        return Err(DfluxError::EmptyState);
    }
    if ghost == 0 {
        return Err(DfluxError::InvalidParameter("ghost width must be >= 1".to_string()));
    }
    Ok(Extended {
        values: pad(&state.values, ghost),
        kbar: pad(&state.kbar, ghost),
        ghost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh_1() -> Mesh {
        Mesh::with_spacing(-1.0, 1.0, 2.0 / 50.0).unwrap()
    }

    #[test]
    fn mesh_geometry() {
        let m = mesh_1();
        assert_eq!(m.n_cells, 50);
        assert!((m.x_min + m.n_cells as f64 * m.dx - m.x_max).abs() <= 1e-12 * 2.0);
        // x = 0 is the base interface between cells 24 and 25
        assert!(m.interface(Parity::Base, 24).abs() < 1e-15);
        assert!(m.center(Parity::Half, 24).abs() < 1e-15);
        assert_eq!(m.cell_count(Parity::Half), 49);
        assert!(Mesh::with_spacing(0.0, 1.0, 0.3).is_err());
        assert!(Mesh::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn constant_initial_data_is_exact() {
        let m = mesh_1();
        let v = cell_average_initial(&m, &InitialData::Constant(0.15), 8).unwrap();
        assert!(v.iter().all(|&x| x == 0.15));
    }

    #[test]
    fn step_split_cell() {
        let m = Mesh::new(-0.24, 0.08, 2).unwrap(); // cells [-0.24,-0.08), [-0.08,0.08)
        let v = cell_average_initial(&m, &InitialData::step(0.0, 0.9, 0.2), 8).unwrap();
        assert!((v[0] - 0.9).abs() < 1e-15);
        assert!((v[1] - 0.55).abs() < 1e-15);
    }

    #[test]
    fn linear_function_midpoint_exact() {
        let m = Mesh::new(0.0, 2.0, 2).unwrap();
        let v = cell_average_initial(&m, &InitialData::Function(Arc::new(|x| x)), 1).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15);
        assert!((v[1] - 1.5).abs() < 1e-15);
        assert!(cell_average_initial(&m, &InitialData::Constant(1.0), 0).is_err());
    }

    #[test]
    fn step_data_point_values() {
        let u0 = InitialData::step(0.0, 0.9, 0.2);
        assert_eq!(u0.eval(-1.0), 0.9);
        assert_eq!(u0.eval(0.0), 0.9);
        assert_eq!(u0.eval(1.0), 0.2);
    }

    #[test]
    fn coefficient_averages_both_parities() {
        let m = Mesh::with_spacing(-0.08, 0.08, 0.04).unwrap();
        let k = Coefficient::piecewise_constant(&[0.0], &[3.0, 1.0]).unwrap();
        assert_eq!(cell_average_coefficient(&m, &k, Parity::Base), vec![3.0, 3.0, 1.0, 1.0]);
        let half = cell_average_coefficient(&m, &k, Parity::Half);
        assert_eq!(half.len(), 3);
        assert_eq!(half[0], 3.0);
        assert!((half[1] - 2.0).abs() < 1e-15);
        assert_eq!(half[2], 1.0);
        let c = Coefficient::constant(1.7);
        for p in [Parity::Base, Parity::Half] {
            assert!(cell_average_coefficient(&m, &c, p).iter().all(|&v| v == 1.7));
        }
    }

    #[test]
    fn half_parity_average_of_interface_aligned_jumps() {
        let m = Mesh::with_spacing(-1.0, 1.0, 0.1).unwrap();
        let k = Coefficient::piecewise_constant(&[-0.5, 0.0, 0.3], &[3.0, 1.0, 2.5, 0.7]).unwrap();
        let base = cell_average_coefficient(&m, &k, Parity::Base);
        let half = cell_average_coefficient(&m, &k, Parity::Half);
        for j in 0..half.len() {
            assert!((half[j] - 0.5 * (base[j] + base[j + 1])).abs() < 1e-14, "j = {j}");
        }
    }

    #[test]
    fn extension() {
        let m = Mesh::new(0.0, 3.0, 3).unwrap();
        let s = StaggeredState {
            mesh: m,
            values: vec![1.0, 2.0, 3.0],
            kbar: vec![3.0, 3.0, 1.0],
            parity: Parity::Base,
            time: 0.0,
            step_index: 0,
        };
        let e = extend_absorbing(&s, 2).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0, 2.0, 3.0, 3.0, 3.0]);
        assert_eq!(e.kbar, vec![3.0, 3.0, 3.0, 3.0, 1.0, 1.0, 1.0]);
        let empty = StaggeredState { values: vec![], kbar: vec![], ..s };
        assert!(matches!(extend_absorbing(&empty, 2), Err(DfluxError::EmptyState)));
    }

    #[test]
    fn csv_layout() {
        let m = Mesh::new(0.0, 1.0, 2).unwrap();
        let s = StaggeredState::from_values(m, vec![0.1, 0.2], &Coefficient::constant(1.0)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,u");
        assert_eq!(lines[1], "2.5000000000000000e-1,1.0000000000000001e-1");
        let parsed: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, 0.2);
    }
}
