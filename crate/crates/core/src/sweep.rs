//! Two-axis order-parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{order_parameter, InitialState};
use crate::error::{Error, Result};
use crate::operators::build_floquet;
use crate::params::ModelParams;
use crate::sector::SectorBasis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    /// Locked `a_xy = a_z`.
    A,
    AXy,
    AZ,
    BZ,
    /// Common pulse error `θ_e = θ_n`.
    Theta,
}

impl AxisName {
    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::A => "a",
            AxisName::AXy => "a_xy",
            AxisName::AZ => "a_z",
            AxisName::BZ => "b_z",
            AxisName::Theta => "theta",
        }
    }

    pub fn apply(&self, params: &mut ModelParams, value: f64) {
        match self {
            AxisName::A => {
                params.a_xy = value;
                params.a_z = value;
            }
            AxisName::AXy => params.a_xy = value,
            AxisName::AZ => params.a_z = value,
            AxisName::BZ => params.b_z = value,
            AxisName::Theta => {
                params.theta_e = value;
                params.theta_n = value;
            }
        }
    }

    fn overlaps(&self, other: &AxisName) -> bool {
        use AxisName::*;
        self == other || matches!((self, other), (A, AXy) | (AXy, A) | (A, AZ) | (AZ, A))
    }
}

impl std::str::FromStr for AxisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "a" => AxisName::A,
            "a_xy" => AxisName::AXy,
            "a_z" => AxisName::AZ,
            "b_z" => AxisName::BZ,
            "theta" => AxisName::Theta,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown axis '{other}' (expected a, a_xy, a_z, b_z or theta)"
                )))
            }
        })
    }
}

impl std::fmt::Display for AxisName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    #[default]
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: AxisScale,
}

impl AxisSpec {
    pub fn linear(name: AxisName, start: f64, stop: f64, count: usize) -> Self {
        Self { name, start, stop, count, scale: AxisScale::Linear }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter(format!("axis {} needs at least one point", self.name)));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.start > self.stop {
            return Err(Error::InvalidParameter(format!(
                "axis {} needs finite start ≤ stop, got {}..{}",
                self.name, self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.stop } else { self.start + step * k as f64 })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub ix: usize,
    pub iy: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_axis: Axis,
    pub y_axis: Axis,
    /// `order_parameter[iy][ix]`; NaN where the cell failed.
    pub order_parameter: Vec<Vec<f64>>,
    pub n_cycles: u64,
    pub params: ModelParams,
    pub failures: Vec<CellFailure>,
}

impl PhaseGrid {
    /// Cells in row-major order: `(x, y, value)` with `x` varying fastest.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.y_axis.values.iter().enumerate().flat_map(move |(iy, &y)| {
            self.x_axis
                .values
                .iter()
                .enumerate()
                .map(move |(ix, &x)| (x, y, self.order_parameter[iy][ix]))
        })
    }
}

/// Order parameter on every `(x, y)` cell; cells run concurrently and each
/// builds its own operators, so values do not depend on scheduling.
pub fn phase_sweep(
    base: &ModelParams,
    basis: &SectorBasis,
    x: &AxisSpec,
    y: &AxisSpec,
    initial: &InitialState,
    n_cycles: u64,
) -> Result<PhaseGrid> {
    x.validate()?;
    y.validate()?;
    if x.name.overlaps(&y.name) {
        return Err(Error::InvalidParameter(format!(
            "axes {} and {} set the same parameter",
            x.name, y.name
        )));
    }
    if n_cycles == 0 {
        return Err(Error::InvalidParameter("order parameter needs at least one cycle".into()));
    }
    let psi0 = initial.state(basis)?;
    let (xs, ys) = (x.values(), y.values());
    let cells: Vec<(usize, usize)> = (0..ys.len()).flat_map(|iy| (0..xs.len()).map(move |ix| (ix, iy))).collect();
    let results: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(ix, iy)| {
            let mut p = base.clone();
            x.name.apply(&mut p, xs[ix]);
            y.name.apply(&mut p, ys[iy]);
            let u = build_floquet(&p, basis)?;
            let value = order_parameter(&u, basis, &psi0, n_cycles)?;
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::Numerical(format!("non-finite order parameter {value}")))
            }
        })
        .collect();

    let mut grid = vec![vec![f64::NAN; xs.len()]; ys.len()];
    let mut failures = Vec::new();
    for (&(ix, iy), r) in cells.iter().zip(results) {
        match r {
            Ok(v) => grid[iy][ix] = v,
            Err(e) => failures.push(CellFailure { ix, iy, message: e.to_string() }),
        }
    }
    Ok(PhaseGrid {
        x_axis: Axis { name: x.name, values: xs },
        y_axis: Axis { name: y.name, values: ys },
        order_parameter: grid,
        n_cycles,
        params: base.clone(),
        failures,
    })
}
