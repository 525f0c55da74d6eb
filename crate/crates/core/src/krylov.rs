//! Krylov and Floquet-Krylov subspaces, basis-overlap maps and the
//! fragmentation census.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, CVector, HermitianMatrix, UnitaryMatrix};
use crate::operators::build_floquet;
use crate::params::{Interaction, ModelParams};
use crate::sector::{Label, SectorBasis, Sigma};
use crate::spectral::spectral_propagator;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Weight above which a basis state counts as occupied by a subspace.
const OCCUPATION_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct KrylovReport {
    pub dimension: usize,
    /// Orthonormal basis of the subspace.
    pub basis_vectors: Vec<CVector>,
    /// Basis indices carrying weight in the subspace projector.
    pub occupied_indices: Vec<usize>,
    /// Relative residual of each generator application after orthogonalization.
    pub residual_history: Vec<f64>,
}

impl KrylovReport {
    pub fn occupied_labels(&self, basis: &SectorBasis) -> Vec<Label> {
        self.occupied_indices.iter().map(|&i| basis.label(i)).collect()
    }

    /// `‖v − Q Q† v‖`.
    pub fn projection_residual(&self, v: &CVector) -> f64 {
        let mut r = v.clone();
        for q in &self.basis_vectors {
            let c = q.dotc(&r);
            r.axpy(-c, q, Complex64::new(1.0, 0.0));
        }
        r.norm()
    }

    /// `Q` as a matrix with the basis vectors as columns.
    pub fn basis_matrix(&self) -> CMatrix {
        let dim = self.basis_vectors.first().map_or(0, |v| v.len());
        CMatrix::from_fn(dim, self.dimension, |r, c| self.basis_vectors[c][r])
    }
}

fn orthogonalize(w: &mut CVector, basis: &[CVector]) {
    for _ in 0..2 {
        for q in basis {
            let c = q.dotc(w);
            w.axpy(-c, q, Complex64::new(1.0, 0.0));
        }
    }
}

/// Span of `{ψ, Gψ, G²ψ, …}`.
///
/// Every accepted basis vector is expanded once by the generator; the image
/// is orthogonalized against the basis (two passes of modified Gram–Schmidt)
/// and kept when its residual exceeds `rank_tol` relative to `‖G q‖`. The
/// loop stops once all basis vectors are expanded, or after `4·dim` steps.
pub fn krylov_subspace(generator: &CMatrix, psi0: &CVector, rank_tol: f64) -> Result<KrylovReport> {
    let dim = generator.nrows();
    if !generator.is_square() || psi0.len() != dim {
        return Err(Error::InvalidState("generator and state dimensions differ".into()));
    }
    let norm = psi0.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidState("initial state is zero".into()));
    }
    let mut basis = vec![psi0.unscale(norm)];
    let mut residual_history = Vec::new();
    let mut next = 0;
    let mut steps = 0;
    while next < basis.len() && steps < 4 * dim {
        let mut w = generator * &basis[next];
        let scale = w.norm();
        orthogonalize(&mut w, &basis);
        let residual = if scale > 0.0 { w.norm() / scale } else { 0.0 };
        residual_history.push(residual);
        if residual > rank_tol && basis.len() < dim {
            let n = w.norm();
            basis.push(w.unscale(n));
        }
        next += 1;
        steps += 1;
    }

    let occupied_indices = (0..dim)
        .filter(|&i| basis.iter().map(|q| q[i].norm_sqr()).sum::<f64>() > OCCUPATION_THRESHOLD)
        .collect();
    Ok(KrylovReport {
        dimension: basis.len(),
        basis_vectors: basis,
        occupied_indices,
        residual_history,
    })
}

/// Floquet-Krylov subspace `𝒦_F(U_F, ψ)` of the model.
pub fn floquet_krylov(params: &ModelParams, basis: &SectorBasis, psi0: &StateVector) -> Result<KrylovReport> {
    let u = build_floquet(params, basis)?;
    krylov_subspace(u.matrix(), psi0.amplitudes(), DEFAULT_RANK_TOL)
}

/// Branch-cut guard for the principal logarithm.
pub const BRANCH_TOLERANCE: f64 = 1e-9;

/// `H_F = i log(U_F) / T` on the principal branch (eigenphases in (−π, π]).
pub fn floquet_hamiltonian(u: &UnitaryMatrix, period: f64) -> Result<HermitianMatrix> {
    let prop = spectral_propagator(u)?;
    if let Some(&phase) = prop
        .eigenphases
        .iter()
        .find(|&&phi| (PI - phi.abs()) < BRANCH_TOLERANCE)
    {
        return Err(Error::BranchAmbiguity {
            phase,
            tol: BRANCH_TOLERANCE,
        });
    }
    let v = &prop.eigenvectors;
    let mut scaled = v.clone();
    for (k, &phi) in prop.eigenphases.iter().enumerate() {
        let e = Complex64::new(-phi / period, 0.0);
        for x in scaled.column_mut(k).iter_mut() {
            *x *= e;
        }
    }
    let h = scaled * v.adjoint();
    HermitianMatrix::new((&h + h.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Krylov subspace of the Floquet Hamiltonian, `𝒦(H_F, ψ)`.
pub fn floquet_hamiltonian_krylov(
    params: &ModelParams,
    basis: &SectorBasis,
    psi0: &StateVector,
) -> Result<KrylovReport> {
    let u = build_floquet(params, basis)?;
    let hf = floquet_hamiltonian(&u, params.period())?;
    krylov_subspace(hf.matrix(), psi0.amplitudes(), DEFAULT_RANK_TOL)
}

/// Largest projection residual of `inner`'s basis onto `outer`.
pub fn subset_residual(inner: &KrylovReport, outer: &KrylovReport) -> f64 {
    inner
        .basis_vectors
        .iter()
        .map(|v| outer.projection_residual(v))
        .fold(0.0, f64::max)
}

/// Which cycles an overlap map samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CycleSampler {
    /// `n = 10⁵ − 2k`, `k = 0..500`.
    Fig2,
    /// `n = 0, stride, 2·stride, … ≤ max`.
    Stride { stride: u64, max: u64 },
    Explicit(Vec<u64>),
}

impl CycleSampler {
    pub fn cycles(&self) -> Vec<u64> {
        match self {
            CycleSampler::Fig2 => (0..500u64).map(|k| 100_000 - 2 * k).collect(),
            CycleSampler::Stride { stride, max } => {
                let stride = (*stride).max(1);
                (0..=max / stride).map(|k| k * stride).collect()
            }
            CycleSampler::Explicit(v) => v.clone(),
        }
    }
}

impl std::str::FromStr for CycleSampler {
    type Err = Error;

    /// `fig2` or `stride:<s>,max:<M>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse sampler '{s}' (expected fig2 or stride:<s>,max:<M>)"));
        if s.trim() == "fig2" {
            return Ok(CycleSampler::Fig2);
        }
        let rest = s.trim().strip_prefix("stride:").ok_or_else(bad)?;
        let (stride, max) = rest.split_once(",max:").ok_or_else(bad)?;
        let stride: u64 = stride.trim().parse().map_err(|_| bad())?;
        let max: u64 = max.trim().parse().map_err(|_| bad())?;
        if stride == 0 {
            return Err(bad());
        }
        Ok(CycleSampler::Stride { stride, max })
    }
}

impl std::fmt::Display for CycleSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CycleSampler::Fig2 => write!(f, "fig2"),
            CycleSampler::Stride { stride, max } => write!(f, "stride:{stride},max:{max}"),
            CycleSampler::Explicit(v) => write!(f, "explicit:{}", v.len()),
        }
    }
}

/// `F_n(|m σ⟩, ψ) = |⟨m σ| U_F^n |ψ⟩|²` at the sampled cycles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapMap {
    pub sampled_cycles: Vec<u64>,
    /// One row per sampled cycle, one column per sector basis state.
    pub overlaps: Vec<Vec<f64>>,
}

pub fn overlap_map_with(u: &UnitaryMatrix, psi0: &StateVector, cycles: &[u64]) -> Result<OverlapMap> {
    let prop = spectral_propagator(u)?;
    let coeffs = prop.coefficients(psi0.amplitudes());
    let overlaps = cycles
        .par_iter()
        .map(|&n| {
            if n == 0 {
                return psi0.probabilities();
            }
            prop.evolve_coefficients(&coeffs, n)
                .iter()
                .map(|z| z.norm_sqr())
                .collect()
        })
        .collect();
    Ok(OverlapMap {
        sampled_cycles: cycles.to_vec(),
        overlaps,
    })
}

pub fn overlap_map(
    params: &ModelParams,
    basis: &SectorBasis,
    psi0: &StateVector,
    sampler: &CycleSampler,
) -> Result<OverlapMap> {
    overlap_map_with(&build_floquet(params, basis)?, psi0, &sampler.cycles())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowSummary {
    /// Number of basis states with `F_n > threshold`.
    pub occupied: usize,
    /// `1 / Σ_k F_n(k)²`.
    pub inverse_participation_ratio: f64,
}

pub const DEFAULT_OCCUPATION_THRESHOLD: f64 = 1e-3;

pub fn effective_dimension(map: &OverlapMap, threshold: f64) -> Result<Vec<RowSummary>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    Ok(map
        .overlaps
        .iter()
        .map(|row| RowSummary {
            occupied: row.iter().filter(|&&f| f > threshold).count(),
            inverse_participation_ratio: 1.0 / row.iter().map(|f| f * f).sum::<f64>(),
        })
        .collect())
}

/// Distinct states spanning `𝒦_F(U_F, |m σ⟩)` at zero pulse error.
pub fn expected_floquet_krylov_span(
    interaction: Interaction,
    basis: &SectorBasis,
    start: Label,
) -> Vec<Label> {
    let m = start.twice_m;
    let candidates = match (interaction, start.sigma) {
        (Interaction::Ising, _) => vec![start, start.flipped()],
        (_, Sigma::Up) => vec![
            start,
            Label::new(m + 2, Sigma::Down),
            Label::new(-m, Sigma::Down),
            Label::new(-m - 2, Sigma::Up),
        ],
        (_, Sigma::Down) => vec![
            Label::new(m - 2, Sigma::Up),
            start,
            Label::new(-m + 2, Sigma::Down),
            Label::new(-m, Sigma::Up),
        ],
    };
    // A state outside the sector signals the 2D edge case; the partner of the
    // missing state drops out with it.
    let mut span = if candidates.iter().all(|l| basis.contains(*l)) {
        candidates
    } else {
        vec![start, start.flipped()]
    };
    // For half-integer j the sets of |±½⟩ contain each state twice.
    let mut seen = Vec::with_capacity(span.len());
    span.retain(|l| {
        let fresh = !seen.contains(l);
        seen.push(*l);
        fresh
    });
    span
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub initial: Label,
    pub dimension: usize,
    pub expected: Vec<Label>,
    /// Largest projection residual of an expected state onto the computed subspace.
    pub span_residual: f64,
}

impl CensusEntry {
    pub fn matches(&self, tol: f64) -> bool {
        self.dimension == self.expected.len() && self.span_residual <= tol
    }
}

/// Floquet-Krylov dimension and span check for every sector basis state.
pub fn fragmentation_census(params: &ModelParams, basis: &SectorBasis) -> Result<Vec<CensusEntry>> {
    let u = build_floquet(params, basis)?;
    let interaction = params.interaction();
    basis
        .labels()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|label| {
            let psi = StateVector::basis_state(basis, label)?;
            let report = krylov_subspace(u.matrix(), psi.amplitudes(), DEFAULT_RANK_TOL)?;
            let expected = expected_floquet_krylov_span(interaction, basis, label);
            let span_residual = expected
                .iter()
                .map(|l| {
                    let e = StateVector::basis_state(basis, *l).map(StateVector::into_inner)?;
                    Ok(report.projection_residual(&e))
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(CensusEntry {
                initial: label,
                dimension: report.dimension,
                expected,
                span_residual,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::build_h0;

    fn state(b: &SectorBasis, tm: i64, s: Sigma) -> StateVector {
        StateVector::basis_state(b, Label::new(tm, s)).unwrap()
    }

    #[test]
    fn h0_krylov_of_top_state_is_one_dimensional() {
        let b = SectorBasis::largest(7).unwrap();
        for p in [ModelParams::heisenberg(1.3, 100.0, 1.0), ModelParams::xxz(1.3, 0.4, 0.0, 1.0)] {
            let h = build_h0(&p, &b).unwrap();
            let r = krylov_subspace(h.matrix(), state(&b, 7, Sigma::Up).amplitudes(), DEFAULT_RANK_TOL).unwrap();
            assert_eq!(r.dimension, 1);
        }
    }

    #[test]
    fn h0_krylov_of_down_state_pairs_with_lowered_up() {
        let b = SectorBasis::largest(7).unwrap();
        let h = build_h0(&ModelParams::xxz(1.3, 0.4, 2.0, 1.0), &b).unwrap();
        let r = krylov_subspace(h.matrix(), state(&b, 3, Sigma::Down).amplitudes(), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.dimension, 2);
        assert_eq!(
            r.occupied_labels(&b),
            vec![Label::new(3, Sigma::Down), Label::new(1, Sigma::Up)]
        );
    }

    #[test]
    fn floquet_krylov_non_ising_is_four_dimensional() {
        let b = SectorBasis::largest(9).unwrap();
        let p = ModelParams::heisenberg(1.3, 100.0, 1.0);
        let r = floquet_krylov(&p, &b, &state(&b, 3, Sigma::Up)).unwrap();
        assert_eq!(r.dimension, 4);
        let mut labels = r.occupied_labels(&b);
        labels.sort_by_key(|l| (l.twice_m, l.sigma == Sigma::Down));
        let mut expected = expected_floquet_krylov_span(Interaction::Heisenberg, &b, Label::new(3, Sigma::Up));
        expected.sort_by_key(|l| (l.twice_m, l.sigma == Sigma::Down));
        assert_eq!(labels, expected);
    }

    #[test]
    fn floquet_krylov_ising_is_two_dimensional() {
        let b = SectorBasis::largest(9).unwrap();
        let p = ModelParams::ising(1.3, 100.0, 1.0);
        for tm in [-9, -1, 5] {
            let r = floquet_krylov(&p, &b, &state(&b, tm, Sigma::Down)).unwrap();
            assert_eq!(r.dimension, 2);
        }
    }

    #[test]
    fn closure_of_returned_subspace() {
        let b = SectorBasis::largest(6).unwrap();
        let p = ModelParams::xxz(1.3, 0.4, 3.0, 1.0).with_theta(0.2);
        let u = build_floquet(&p, &b).unwrap();
        let r = krylov_subspace(u.matrix(), state(&b, 2, Sigma::Up).amplitudes(), DEFAULT_RANK_TOL).unwrap();
        for q in &r.basis_vectors {
            assert!(r.projection_residual(&(u.matrix() * q)) <= 10.0 * DEFAULT_RANK_TOL);
        }
        let q = r.basis_matrix();
        let gram = q.adjoint() * &q;
        assert!(crate::matrix::max_abs(&(gram - CMatrix::identity(r.dimension, r.dimension))) < 1e-10);
    }

    #[test]
    fn eigenvector_has_one_dimensional_krylov_spaces() {
        let b = SectorBasis::largest(4).unwrap();
        let p = ModelParams::xxz(1.1, 0.3, 2.0, 1.0).with_theta(0.1);
        let u = build_floquet(&p, &b).unwrap();
        let prop = spectral_propagator(&u).unwrap();
        let v = StateVector::normalized(prop.eigenvectors.column(2).clone_owned()).unwrap();
        assert_eq!(floquet_krylov(&p, &b, &v).unwrap().dimension, 1);
        assert_eq!(floquet_hamiltonian_krylov(&p, &b, &v).unwrap().dimension, 1);
    }

    #[test]
    fn branch_ambiguity_reported_for_pure_pulse() {
        // Two spins, H0 = 0: U_F has eigenvalue −1.
        let b = SectorBasis::largest(1).unwrap();
        let p = ModelParams::default();
        let err = floquet_hamiltonian_krylov(&p, &b, &state(&b, 1, Sigma::Up)).unwrap_err();
        assert!(matches!(err, Error::BranchAmbiguity { .. }));
    }

    #[test]
    fn samplers() {
        let fig2 = CycleSampler::Fig2.cycles();
        assert_eq!(fig2.len(), 500);
        assert_eq!(fig2[0], 100_000);
        assert_eq!(fig2[499], 99_002);
        assert_eq!(CycleSampler::Stride { stride: 100, max: 1000 }.cycles().len(), 11);
        assert_eq!(CycleSampler::Stride { stride: 100, max: 0 }.cycles(), vec![0]);
        assert_eq!("fig2".parse::<CycleSampler>().unwrap(), CycleSampler::Fig2);
        assert_eq!(
            "stride:100,max:100000".parse::<CycleSampler>().unwrap(),
            CycleSampler::Stride { stride: 100, max: 100_000 }
        );
        assert!("stride:0,max:10".parse::<CycleSampler>().is_err());
    }

    #[test]
    fn overlap_rows_normalized_and_initial_row_is_delta() {
        let b = SectorBasis::largest(5).unwrap();
        let p = ModelParams::heisenberg(1.3, 100.0, 1.0).with_theta(0.1 * PI);
        let psi = state(&b, 3, Sigma::Down);
        let map = overlap_map(&p, &b, &psi, &CycleSampler::Stride { stride: 37, max: 2000 }).unwrap();
        let start = b.index_of(Label::new(3, Sigma::Down)).unwrap();
        for (k, &f) in map.overlaps[0].iter().enumerate() {
            assert!((f - if k == start { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        for row in &map.overlaps {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn effective_dimension_limits() {
        let map = OverlapMap {
            sampled_cycles: vec![0, 1],
            overlaps: vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.25; 4]],
        };
        let s = effective_dimension(&map, 1e-3).unwrap();
        assert_eq!(s[0].occupied, 1);
        assert!((s[0].inverse_participation_ratio - 1.0).abs() < 1e-15);
        assert_eq!(s[1].occupied, 4);
        assert!((s[1].inverse_participation_ratio - 4.0).abs() < 1e-12);
        assert!(effective_dimension(&map, 0.0).is_err());
    }
}
