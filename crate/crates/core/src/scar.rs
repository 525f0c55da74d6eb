//! Floquet eigensystems, reduced satellite states, Dicke-bipartition
//! entanglement entropy and overlaps with the fully polarized states `|±J⟩`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::cg::{clebsch_gordan_with, LogFactorials};
use crate::error::{Error, Result};
use crate::matrix::{max_abs, CMatrix, CVector, HermitianMatrix, UnitaryMatrix};
use crate::operators::build_floquet;
use crate::params::ModelParams;
use crate::sector::SectorBasis;
use crate::spectral::spectral_propagator;

/// Quasienergies within this distance are treated as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

/// Eigenvalues of ρ below this are dropped from `−Tr ρ ln ρ`.
pub const EIGENVALUE_CLIP: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FloquetEigensystem {
    /// `ε/ω ∈ (−0.5, 0.5]`, ascending.
    pub quasienergy_over_omega: Vec<f64>,
    /// Column `k` belongs to `quasienergy_over_omega[k]`.
    pub eigenvectors: CMatrix,
    /// Member of a degenerate cluster; eigenvector-derived values are then basis dependent.
    pub degenerate: Vec<bool>,
}

fn dominant_index(v: &CVector) -> usize {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, z) in v.iter().enumerate() {
        // Strict comparison with a small margin keeps ties on the lowest index.
        if z.norm() > best_norm + 1e-12 {
            best = i;
            best_norm = z.norm();
        }
    }
    best
}

pub fn floquet_eigensystem(u: &UnitaryMatrix) -> Result<FloquetEigensystem> {
    let prop = spectral_propagator(u)?;
    let n = prop.dim();

    // λ = e^{iφ}, φ ∈ (−π, π]; map φ = π to −π so ε/ω = −φ/2π ∈ (−0.5, 0.5].
    let qe: Vec<f64> = prop
        .eigenphases
        .iter()
        .map(|&phi| {
            let phi = if phi >= PI { phi - TAU } else { phi };
            -phi / TAU
        })
        .collect();
    let dominant: Vec<usize> = (0..n)
        .map(|k| dominant_index(&prop.eigenvectors.column(k).clone_owned()))
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| qe[a].total_cmp(&qe[b]));

    // Flag clusters, then reorder each cluster by dominant index.
    let mut degenerate = vec![false; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (qe[order[end]] - qe[order[end - 1]]).abs() < DEGENERACY_TOLERANCE {
            end += 1;
        }
        if end - start > 1 {
            order[start..end].sort_by_key(|&k| dominant[k]);
            degenerate[start..end].iter_mut().for_each(|d| *d = true);
        }
        start = end;
    }

    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = prop.eigenvectors.column(src).clone_owned();
        // Fix the gauge: dominant amplitude real and positive.
        let pivot = col[dominant[src]];
        if pivot.norm() > 0.0 {
            col *= pivot.conj() / pivot.norm();
        }
        eigenvectors.set_column(dst, &col);
    }
    let quasienergy_over_omega: Vec<f64> = order.iter().map(|&k| qe[k]).collect();

    for (k, &e) in quasienergy_over_omega.iter().enumerate() {
        let v = eigenvectors.column(k);
        let lambda = Complex64::from_polar(1.0, -TAU * e);
        let residual = (u.matrix() * v - v * lambda).norm();
        if residual > 1e-8 {
            return Err(Error::Numerical(format!(
                "Floquet eigenvector {k} residual {residual:e} exceeds 1e-8"
            )));
        }
    }
    Ok(FloquetEigensystem {
        quasienergy_over_omega,
        eigenvectors,
        degenerate,
    })
}

/// `ρ^N_F = Tr_C |ψ⟩⟨ψ|` on the `2j+1` satellite levels (ordered by decreasing m).
pub fn reduce_central(psi: &CVector, basis: &SectorBasis) -> Result<CMatrix> {
    if psi.len() != basis.dim() {
        return Err(Error::InvalidState(format!(
            "state has dimension {}, sector has {}",
            psi.len(),
            basis.dim()
        )));
    }
    let d = basis.satellite_dim();
    Ok(CMatrix::from_fn(d, d, |a, b| {
        psi[2 * a] * psi[2 * b].conj() + psi[2 * a + 1] * psi[2 * b + 1].conj()
    }))
}

/// `(𝔽₊, 𝔽₋) = (⟨J|ρ|J⟩, ⟨−J|ρ|−J⟩)`.
pub fn scar_overlaps(rho: &CMatrix) -> (f64, f64) {
    let last = rho.nrows() - 1;
    (rho[(0, 0)].re, rho[(last, last)].re)
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64> {
    let (values, _) = HermitianMatrix::new((rho + rho.adjoint()) * Complex64::new(0.5, 0.0))?.eigh()?;
    Ok(values
        .into_iter()
        .filter(|&l| l > EIGENVALUE_CLIP)
        .map(|l| -l * l.ln())
        .sum())
}

/// Isometry embedding the spin-`J` Dicke multiplet of `N` spins into the
/// product of two halves of `N/2` spins each (collective spin `N/4`).
///
/// Rows are `(a, b)` flattened as `a · d_half + b`, columns are sector
/// satellite levels; levels are ordered by decreasing `m`.
#[derive(Clone, Debug)]
pub struct DickeBipartition {
    twice_half: i64,
    isometry: CMatrix,
}

impl DickeBipartition {
    pub fn new(basis: &SectorBasis) -> Result<Self> {
        let n = basis.n_satellites();
        if n % 2 != 0 {
            return Err(Error::Unsupported(format!(
                "an equal bipartition needs an even number of satellites, got N = {n}"
            )));
        }
        if !basis.is_fully_symmetric() {
            return Err(Error::Unsupported(format!(
                "the Dicke bipartition requires the symmetric sector 2j = N, got 2j = {}",
                basis.twice_j()
            )));
        }
        let tj = basis.twice_j() as i64;
        let th = tj / 2;
        let dh = (th + 1) as usize;
        let lf = LogFactorials::new(4 * n + 2);
        let mut isometry = CMatrix::zeros(dh * dh, basis.satellite_dim());
        for col in 0..basis.satellite_dim() {
            let tm = tj - 2 * col as i64;
            for a in 0..dh {
                let tm1 = th - 2 * a as i64;
                let tm2 = tm - tm1;
                if tm2.abs() > th {
                    continue;
                }
                let b = ((th - tm2) / 2) as usize;
                let cg = clebsch_gordan_with(&lf, th, tm1, th, tm2, tj, tm);
                isometry[(a * dh + b, col)] = Complex64::new(cg, 0.0);
            }
        }
        Ok(Self {
            twice_half: th,
            isometry,
        })
    }

    pub fn half_dim(&self) -> usize {
        (self.twice_half + 1) as usize
    }

    pub fn isometry(&self) -> &CMatrix {
        &self.isometry
    }

    /// `ρ_A = Tr_B (V ρ V†)`.
    pub fn reduced_half(&self, rho: &CMatrix) -> CMatrix {
        let dh = self.half_dim();
        let full = &self.isometry * rho * self.isometry.adjoint();
        CMatrix::from_fn(dh, dh, |a, ap| (0..dh).map(|b| full[(a * dh + b, ap * dh + b)]).sum())
    }

    pub fn entropy(&self, rho: &CMatrix) -> Result<f64> {
        von_neumann_entropy(&self.reduced_half(rho))
    }
}

/// `S(Tr_{N/2} ρ^N_F)` for a satellite density matrix in the symmetric sector.
pub fn dicke_bipartition_entropy(rho: &CMatrix, basis: &SectorBasis) -> Result<f64> {
    if rho.nrows() != basis.satellite_dim() || !rho.is_square() {
        return Err(Error::InvalidState("density matrix does not match the sector".into()));
    }
    DickeBipartition::new(basis)?.entropy(rho)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScarRecord {
    pub quasienergy_over_omega: f64,
    /// Nats.
    pub entropy: f64,
    pub overlap_plus: f64,
    pub overlap_minus: f64,
    pub degenerate: bool,
}

/// One record per Floquet eigenvector, sorted by quasienergy.
pub fn scar_scatter(params: &ModelParams, basis: &SectorBasis) -> Result<Vec<ScarRecord>> {
    let bip = DickeBipartition::new(basis)?;
    let u = build_floquet(params, basis)?;
    let eig = floquet_eigensystem(&u)?;
    (0..basis.dim())
        .into_par_iter()
        .map(|k| {
            let v = eig.eigenvectors.column(k).clone_owned();
            let rho = reduce_central(&v, basis)?;
            let (overlap_plus, overlap_minus) = scar_overlaps(&rho);
            Ok(ScarRecord {
                quasienergy_over_omega: eig.quasienergy_over_omega[k],
                entropy: bip.entropy(&rho)?,
                overlap_plus,
                overlap_minus,
                degenerate: eig.degenerate[k],
            })
        })
        .collect()
}

/// Trace and Hermiticity sanity numbers of a density matrix: `(|Tr ρ − 1|, max|ρ − ρ†|)`.
pub fn density_defects(rho: &CMatrix) -> (f64, f64) {
    let tr: Complex64 = rho.diagonal().iter().sum();
    ((tr - Complex64::new(1.0, 0.0)).norm(), max_abs(&(rho - rho.adjoint())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sector::{Label, Sigma};

    #[test]
    fn identity_quasienergies() {
        let e = floquet_eigensystem(&UnitaryMatrix::identity(4)).unwrap();
        assert!(e.quasienergy_over_omega.iter().all(|&x| x == 0.0));
        assert!(e.degenerate.iter().all(|&d| d));
    }

    #[test]
    fn quarter_phases_sorted() {
        let d = CVector::from_vec(vec![Complex64::from_polar(1.0, -PI / 2.0), Complex64::from_polar(1.0, PI / 2.0)]);
        let e = floquet_eigensystem(&UnitaryMatrix::new(CMatrix::from_diagonal(&d)).unwrap()).unwrap();
        assert!((e.quasienergy_over_omega[0] + 0.25).abs() < 1e-15);
        assert!((e.quasienergy_over_omega[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn minus_one_maps_to_half() {
        let d = CVector::from_vec(vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)]);
        let e = floquet_eigensystem(&UnitaryMatrix::new(CMatrix::from_diagonal(&d)).unwrap()).unwrap();
        assert_eq!(e.quasienergy_over_omega, vec![0.0, 0.5]);
    }

    #[test]
    fn ising_cat_states_are_eigenvectors() {
        let b = SectorBasis::largest(6).unwrap();
        let p = ModelParams::ising(1.3, 100.0, 1.0);
        let u = build_floquet(&p, &b).unwrap();
        let e = floquet_eigensystem(&u).unwrap();
        let top = b.index_of(Label::new(6, Sigma::Up)).unwrap();
        let bottom = b.index_of(Label::new(-6, Sigma::Down)).unwrap();
        // Exactly two eigenvectors live on {|J↑⟩, |−J↓⟩}, each with equal weights.
        let mut found = 0;
        for k in 0..b.dim() {
            let v = e.eigenvectors.column(k);
            let w = v[top].norm_sqr() + v[bottom].norm_sqr();
            if w > 0.5 {
                assert!((w - 1.0).abs() < 1e-10);
                assert!((v[top].norm_sqr() - 0.5).abs() < 1e-10);
                found += 1;
            }
        }
        assert_eq!(found, 2);
    }

    #[test]
    fn reduce_product_and_mixture() {
        let b = SectorBasis::largest(4).unwrap();
        let mut psi = CVector::zeros(b.dim());
        psi[b.index_of(Label::new(2, Sigma::Up)).unwrap()] = Complex64::new(1.0, 0.0);
        let rho = reduce_central(&psi, &b).unwrap();
        assert_eq!(rho[(1, 1)].re, 1.0);
        assert_eq!(rho.iter().filter(|z| z.norm() > 0.0).count(), 1);

        let r = 0.5f64.sqrt();
        let mut psi = CVector::zeros(b.dim());
        psi[b.index_of(Label::new(2, Sigma::Up)).unwrap()] = Complex64::new(r, 0.0);
        psi[b.index_of(Label::new(-4, Sigma::Down)).unwrap()] = Complex64::new(r, 0.0);
        let rho = reduce_central(&psi, &b).unwrap();
        assert!((rho[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!((rho[(4, 4)].re - 0.5).abs() < 1e-15);
        assert_eq!(rho[(1, 4)].norm(), 0.0);
    }

    #[test]
    fn isometry_is_isometric() {
        for n in [2, 4, 6, 10, 20] {
            let b = SectorBasis::largest(n).unwrap();
            let v = DickeBipartition::new(&b).unwrap();
            let gram = v.isometry().adjoint() * v.isometry();
            let d = b.satellite_dim();
            assert!(max_abs(&(gram - CMatrix::identity(d, d))) < 1e-10);
        }
    }

    #[test]
    fn polarized_state_has_zero_entropy_and_triplet_has_ln2() {
        let b = SectorBasis::largest(2).unwrap();
        let mut rho = CMatrix::zeros(3, 3);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(dicke_bipartition_entropy(&rho, &b).unwrap().abs() < 1e-14);
        let mut rho = CMatrix::zeros(3, 3);
        rho[(1, 1)] = Complex64::new(1.0, 0.0);
        assert!((dicke_bipartition_entropy(&rho, &b).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn bipartition_rejects_odd_and_non_symmetric() {
        assert!(DickeBipartition::new(&SectorBasis::largest(5).unwrap()).is_err());
        assert!(DickeBipartition::new(&SectorBasis::new(6, 4).unwrap()).is_err());
    }

    #[test]
    fn overlaps_of_simple_states() {
        let mut rho = CMatrix::zeros(5, 5);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        assert_eq!(scar_overlaps(&rho), (1.0, 0.0));
        let mixed = CMatrix::identity(5, 5) * Complex64::new(0.2, 0.0);
        assert_eq!(scar_overlaps(&mixed), (0.2, 0.2));
    }

    #[test]
    fn identity_floquet_records_flagged_degenerate() {
        let b = SectorBasis::largest(4).unwrap();
        let p = ModelParams::default().with_theta(PI);
        let records = scar_scatter(&p, &b).unwrap();
        assert_eq!(records.len(), b.dim());
        assert!(records.iter().all(|r| r.quasienergy_over_omega.abs() < 1e-12 && r.degenerate));
    }
}
