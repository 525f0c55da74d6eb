//! Stroboscopic evolution, staggered magnetization and the time-averaged
//! order parameter.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, CVector, UnitaryMatrix};
use crate::sector::{Label, SectorBasis, Sigma};
use crate::spectral::{spectral_propagator, SpectralPropagator};

/// Normalized state in a sector (or any) basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    pub const NORM_TOLERANCE: f64 = 1e-10;

    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn basis_state(basis: &SectorBasis, label: Label) -> Result<Self> {
        let idx = basis
            .index_of(label)
            .ok_or_else(|| Error::InvalidState(format!("{label} is not in the sector 2j = {}", basis.twice_j())))?;
        Ok(Self::unit(basis.dim(), idx))
    }

    pub fn unit(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_inner(self) -> CVector {
        self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Initial-state selector: `J-up`, `J-down`, or an explicit `|m σ⟩`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialState {
    JUp,
    JDown,
    Basis(Label),
}

impl InitialState {
    pub fn label(&self, basis: &SectorBasis) -> Label {
        let tj = basis.twice_j() as i64;
        match *self {
            InitialState::JUp => Label::new(tj, Sigma::Up),
            InitialState::JDown => Label::new(tj, Sigma::Down),
            InitialState::Basis(l) => l,
        }
    }

    pub fn state(&self, basis: &SectorBasis) -> Result<StateVector> {
        StateVector::basis_state(basis, self.label(basis))
    }
}

impl std::str::FromStr for InitialState {
    type Err = Error;

    /// `J-up`, `J-down`, or `m:<twice_m>,<up|down>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidState(format!("cannot parse initial state '{s}' (expected J-up, J-down or m:<twice_m>,<up|down>)"));
        match s.trim() {
            "J-up" | "j-up" => Ok(InitialState::JUp),
            "J-down" | "j-down" => Ok(InitialState::JDown),
            other => {
                let rest = other.strip_prefix("m:").ok_or_else(bad)?;
                let (m, sigma) = rest.split_once(',').ok_or_else(bad)?;
                let twice_m: i64 = m.trim().parse().map_err(|_| bad())?;
                let sigma = match sigma.trim() {
                    "up" | "u" => Sigma::Up,
                    "down" | "d" => Sigma::Down,
                    _ => return Err(bad()),
                };
                Ok(InitialState::Basis(Label::new(twice_m, sigma)))
            }
        }
    }
}

impl std::fmt::Display for InitialState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialState::JUp => write!(f, "J-up"),
            InitialState::JDown => write!(f, "J-down"),
            InitialState::Basis(l) => {
                let s = if l.sigma == Sigma::Up { "up" } else { "down" };
                write!(f, "m:{},{}", l.twice_m, s)
            }
        }
    }
}

/// Observables recorded at stroboscopic times.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StroboscopicSeries {
    pub cycles: Vec<u64>,
    /// `⟨I^z_t(nT)⟩ / N`.
    pub magnetization: Vec<f64>,
    /// `(−1)^n ⟨I^z_t(nT)⟩ / N`.
    pub staggered: Vec<f64>,
    pub return_probability: Option<Vec<f64>>,
}

impl StroboscopicSeries {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    fn push(&mut self, n: u64, magnetization: f64, ret: f64) {
        self.cycles.push(n);
        self.magnetization.push(magnetization);
        self.staggered.push(stagger(n) * magnetization);
        self.return_probability.get_or_insert_with(Vec::new).push(ret);
    }
}

fn stagger(n: u64) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Diagonal of a diagonal observable, e.g. `I^z_t / N` in the sector basis.
pub fn satellite_magnetization_weights(basis: &SectorBasis) -> Vec<f64> {
    let n = basis.n_satellites() as f64;
    basis.labels().map(|l| l.m() / n).collect()
}

fn expectation_diag(weights: &[f64], psi: &CVector) -> f64 {
    weights.iter().zip(psi.iter()).map(|(w, z)| w * z.norm_sqr()).sum()
}

/// Work above which `evolve` switches to spectral powers.
const SPECTRAL_WORK_THRESHOLD: u64 = 100_000;

/// Stroboscopic evolution of a diagonal observable given by `weights`.
///
/// Records at `n = 0, stride, 2·stride, … ≤ n_cycles`.
pub fn evolve_observable(
    u: &UnitaryMatrix,
    weights: &[f64],
    psi0: &StateVector,
    n_cycles: u64,
    stride: u64,
) -> Result<StroboscopicSeries> {
    if stride == 0 {
        return Err(Error::InvalidParameter("record stride must be at least 1".into()));
    }
    if psi0.dim() != u.dim() || weights.len() != u.dim() {
        return Err(Error::InvalidState("state, observable and propagator dimensions differ".into()));
    }
    let dim = u.dim() as u64;
    if n_cycles.saturating_mul(dim) > SPECTRAL_WORK_THRESHOLD.saturating_mul(stride) {
        evolve_spectral(&spectral_propagator(u)?, weights, psi0, n_cycles, stride)
    } else {
        Ok(evolve_direct(u, weights, psi0, n_cycles, stride))
    }
}

/// `evolve_observable` with the satellite magnetization `I^z_t / N`.
pub fn evolve(
    u: &UnitaryMatrix,
    basis: &SectorBasis,
    psi0: &StateVector,
    n_cycles: u64,
    stride: u64,
) -> Result<StroboscopicSeries> {
    evolve_observable(u, &satellite_magnetization_weights(basis), psi0, n_cycles, stride)
}

pub fn evolve_direct(
    u: &UnitaryMatrix,
    weights: &[f64],
    psi0: &StateVector,
    n_cycles: u64,
    stride: u64,
) -> StroboscopicSeries {
    let mut series = StroboscopicSeries::default();
    let initial = psi0.amplitudes();
    let mut psi = initial.clone();
    let mut next = CVector::zeros(psi.len());
    for n in 0..=n_cycles {
        if n % stride == 0 {
            series.push(n, expectation_diag(weights, &psi), initial.dotc(&psi).norm_sqr());
        }
        if n < n_cycles {
            next.gemv(Complex64::new(1.0, 0.0), u.matrix(), &psi, Complex64::new(0.0, 0.0));
            std::mem::swap(&mut psi, &mut next);
        }
    }
    series
}

pub fn evolve_spectral(
    prop: &SpectralPropagator,
    weights: &[f64],
    psi0: &StateVector,
    n_cycles: u64,
    stride: u64,
) -> Result<StroboscopicSeries> {
    let mut series = StroboscopicSeries::default();
    let initial = psi0.amplitudes();
    let coeffs = prop.coefficients(initial);
    let mut n = 0;
    while n <= n_cycles {
        let psi = prop.evolve_coefficients(&coeffs, n);
        series.push(n, expectation_diag(weights, &psi), initial.dotc(&psi).norm_sqr());
        n = match n.checked_add(stride) {
            Some(v) => v,
            None => break,
        };
    }
    Ok(series)
}

/// `U^n ψ` (spectral powers for large `n`).
pub fn evolve_state(u: &UnitaryMatrix, psi: &StateVector, n: u64) -> Result<StateVector> {
    let v = if n.saturating_mul(u.dim() as u64) > SPECTRAL_WORK_THRESHOLD {
        spectral_propagator(u)?.apply_power(psi.amplitudes(), n)
    } else {
        let mut v = psi.amplitudes().clone();
        for _ in 0..n {
            v = u.matrix() * v;
        }
        v
    };
    StateVector::normalized(v)
}

/// `Σ_{n=1}^{count} e^{i w n}` in closed form.
pub(crate) fn phase_sum(w: f64, count: u64) -> Complex64 {
    let w = (w + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    let half = 0.5 * w;
    let s = half.sin();
    if s == 0.0 {
        return Complex64::new(count as f64, 0.0);
    }
    let nf = count as f64;
    let ratio = (nf * half).sin() / s;
    Complex64::from_polar(ratio, half * (nf + 1.0))
}

/// Time-averaged staggered value `(1/N_C) Σ_{n=1}^{N_C} (−1)^n ⟨O(nT)⟩`
/// for a diagonal observable, evaluated in the Floquet eigenbasis.
pub fn order_parameter_observable(
    u: &UnitaryMatrix,
    weights: &[f64],
    psi0: &StateVector,
    n_cycles: u64,
) -> Result<f64> {
    if n_cycles == 0 {
        return Err(Error::InvalidParameter("order parameter needs at least one cycle".into()));
    }
    let prop = spectral_propagator(u)?;
    let v = &prop.eigenvectors;
    let c = prop.coefficients(psi0.amplitudes());
    // M = V† diag(w) V
    let mut wv = v.clone();
    for (r, &w) in weights.iter().enumerate() {
        for x in wv.row_mut(r).iter_mut() {
            *x *= w;
        }
    }
    let m: CMatrix = v.adjoint() * wv;
    let dim = prop.dim();
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..dim {
        for l in 0..dim {
            let w = prop.eigenphases[l] - prop.eigenphases[k] + std::f64::consts::PI;
            total += c[k].conj() * c[l] * m[(k, l)] * phase_sum(w, n_cycles);
        }
    }
    Ok(total.re / n_cycles as f64)
}

/// `⟨⟨I^z_t⟩⟩ = (1/N_C) Σ_{n=1}^{N_C} (−1)^n ⟨I^z_t(nT)⟩ / N`.
pub fn order_parameter(
    u: &UnitaryMatrix,
    basis: &SectorBasis,
    psi0: &StateVector,
    n_cycles: u64,
) -> Result<f64> {
    order_parameter_observable(u, &satellite_magnetization_weights(basis), psi0, n_cycles)
}
