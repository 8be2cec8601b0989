//! Dispersion relation, spectral bands, band membership and the Floquet
//! (Fermi) surface of a periodic operator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::floquet::{self, FloquetError};
use crate::lattice::PeriodicOperator;
use crate::laurent::{AlgebraError, Exponent, LaurentPoly, PolyMatrix};
use crate::numeric;
use crate::scalar::GaussRational;

pub const DEFAULT_RESOLUTION: usize = 64;

/// Iterations of golden-section refinement per coordinate.
const GOLDEN_ITERATIONS: usize = 20;

/// Largest tolerated deviation of a sampled symbol from Hermitian.
const HERMITIAN_TOL: f64 = 1e-9;

/// Distance from the unit circle within which a root counts as a torus point.
pub const TORUS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Floquet(#[from] FloquetError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("symbol is not Hermitian on the torus (defect {0:e})")]
    NotHermitian(f64),
    #[error("det(A(z) - λ) vanishes identically: λ is a flat-band eigenvalue")]
    FlatBandDegenerate,
    #[error("Fermi sampling supports dimensions 1 and 2, got {0}")]
    Dimension(usize),
    #[error("energy {0} is not a finite number")]
    NonFinite(f64),
}

/// Sorted eigenvalues `λ_1(k) ≤ … ≤ λ_|W|(k)` on the grid `k ∈ (2π/res)·{0..res-1}^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionGrid {
    pub resolution: usize,
    pub dimension: usize,
    /// Keyed by grid index tuple, in lexicographic order.
    pub samples: Vec<(Vec<usize>, Vec<f64>)>,
}

impl DispersionGrid {
    pub fn branch_count(&self) -> usize {
        self.samples.first().map_or(0, |s| s.1.len())
    }

    /// `(min, max)` of branch `j` over the grid, with the extremizing indices.
    fn branch_extremes(&self, j: usize) -> ((f64, &[usize]), (f64, &[usize])) {
        let mut lo = (f64::INFINITY, &self.samples[0].0[..]);
        let mut hi = (f64::NEG_INFINITY, &self.samples[0].0[..]);
        for (idx, vals) in &self.samples {
            if vals[j] < lo.0 {
                lo = (vals[j], idx);
            }
            if vals[j] > hi.0 {
                hi = (vals[j], idx);
            }
        }
        (lo, hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandList {
    pub bands: Vec<Band>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Membership {
    /// `margin` is the distance to the nearest endpoint of the band containing λ.
    InBandInterior { margin: f64 },
    InSpectrumBoundary,
    NotInSpectrum,
}

impl Membership {
    pub fn label(&self) -> &'static str {
        match self {
            Membership::InBandInterior { .. } => "band-interior",
            Membership::InSpectrumBoundary => "spectrum-boundary",
            Membership::NotInSpectrum => "not-in-spectrum",
        }
    }
}

/// Torus points where `det(A(z) - λ)` vanishes.
#[derive(Clone, Debug, PartialEq)]
pub struct FermiSampleSet {
    pub energy: f64,
    pub points: Vec<Vec<Complex64>>,
}

/// `Δ = det(z^{Re}(A(z) - λ)) = z^q Δ₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FloquetSurface {
    pub interaction_radius: u64,
    pub a1: PolyMatrix,
    pub delta: LaurentPoly,
    pub delta1: LaurentPoly,
    pub q: Exponent,
}

/// Eigenvalues of the symbol at quasimomentum `k`.
pub fn eigenvalues_at(m: &PolyMatrix, k: &[f64]) -> Result<Vec<f64>, SpectrumError> {
    let a = floquet::evaluate_symbol(m, &floquet::torus_point(k))?;
    let defect = numeric::hermitian_defect(&a);
    if defect > HERMITIAN_TOL {
        return Err(SpectrumError::NotHermitian(defect));
    }
    Ok(numeric::hermitian_eigenvalues(&a))
}

fn grid_index(mut flat: usize, resolution: usize, dimension: usize) -> Vec<usize> {
    let mut idx = vec![0; dimension];
    for slot in idx.iter_mut().rev() {
        *slot = flat % resolution;
        flat /= resolution;
    }
    idx
}

fn quasimomentum(idx: &[usize], resolution: usize) -> Vec<f64> {
    idx.iter().map(|&i| 2.0 * PI * i as f64 / resolution as f64).collect()
}

pub fn dispersion(a: &PeriodicOperator, resolution: usize) -> Result<DispersionGrid, SpectrumError> {
    let m = floquet::symbol(a)?;
    dispersion_of_symbol(&m, resolution)
}

pub fn dispersion_of_symbol(m: &PolyMatrix, resolution: usize) -> Result<DispersionGrid, SpectrumError> {
    if resolution < 2 {
        return Err(SpectrumError::Resolution(resolution));
    }
    let dim = m.dimension();
    let total = resolution.pow(dim as u32);
    let samples = (0..total)
        .into_par_iter()
        .map(|flat| {
            let idx = grid_index(flat, resolution, dim);
            let vals = eigenvalues_at(m, &quasimomentum(&idx, resolution))?;
            Ok((idx, vals))
        })
        .collect::<Result<Vec<_>, SpectrumError>>()?;
    Ok(DispersionGrid { resolution, dimension: dim, samples })
}

/// Golden-section search for the extremum of `f` on `[a, b]`.
fn golden(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64, minimize: bool) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let sign = if minimize { 1.0 } else { -1.0 };
    let g = |x: f64| sign * f(x);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = g(d);
        }
    }
    if fc < fd {
        (c, sign * fc)
    } else {
        (d, sign * fd)
    }
}

fn refine(m: &PolyMatrix, branch: usize, start: &[usize], resolution: usize, grid_value: f64, minimize: bool) -> Result<f64, SpectrumError> {
    let h = 2.0 * PI / resolution as f64;
    let mut k = quasimomentum(start, resolution);
    let mut best = grid_value;
    for axis in 0..k.len() {
        let center = k[axis];
        let base = k.clone();
        let eval = |x: f64| {
            let mut p = base.clone();
            p[axis] = x;
            eigenvalues_at(m, &p).map(|v| v[branch]).unwrap_or(f64::NAN)
        };
        let (x, v) = golden(center - h, center + h, eval, minimize);
        if v.is_nan() {
            eigenvalues_at(m, &k)?;
        }
        if (minimize && v < best) || (!minimize && v > best) {
            best = v;
            k[axis] = x;
        }
    }
    Ok(best)
}

pub fn bands(a: &PeriodicOperator, resolution: usize) -> Result<BandList, SpectrumError> {
    let m = floquet::symbol(a)?;
    let grid = dispersion_of_symbol(&m, resolution)?;
    bands_from_grid(&m, &grid)
}

pub fn bands_from_grid(m: &PolyMatrix, grid: &DispersionGrid) -> Result<BandList, SpectrumError> {
    let bands = (0..grid.branch_count())
        .into_par_iter()
        .map(|j| {
            let ((lo, lo_idx), (hi, hi_idx)) = grid.branch_extremes(j);
            let lower = refine(m, j, lo_idx, grid.resolution, lo, true)?;
            let upper = refine(m, j, hi_idx, grid.resolution, hi, false)?;
            Ok(Band { lower, upper })
        })
        .collect::<Result<Vec<_>, SpectrumError>>()?;
    Ok(BandList { bands })
}

pub fn membership(bands: &BandList, lambda: f64) -> Membership {
    let mut interior: Option<f64> = None;
    let mut near = false;
    for b in &bands.bands {
        let delta = (1e-6f64).max(1e-6 * (b.upper - b.lower));
        if lambda >= b.lower + delta && lambda <= b.upper - delta {
            let margin = (lambda - b.lower).min(b.upper - lambda);
            interior = Some(interior.map_or(margin, |m: f64| m.max(margin)));
        } else if lambda >= b.lower - delta && lambda <= b.upper + delta {
            near = true;
        }
    }
    match (interior, near) {
        (Some(margin), _) => Membership::InBandInterior { margin },
        (None, true) => Membership::InSpectrumBoundary,
        (None, false) => Membership::NotInSpectrum,
    }
}

/// `A₁ = z^{Re}(A(z) - λ I)`, a polynomial matrix with exponents in `[0, 2R]`.
pub fn shifted_symbol(m: &PolyMatrix, interaction_radius: u64, lambda: &GaussRational) -> Result<PolyMatrix, AlgebraError> {
    let shift = vec![interaction_radius as i64; m.dimension()];
    Ok(m.sub_identity(lambda)?.mul_monomial(&shift))
}

pub fn floquet_surface_poly(a: &PeriodicOperator, lambda: &GaussRational) -> Result<FloquetSurface, SpectrumError> {
    let m = floquet::symbol(a)?;
    floquet_surface_of_symbol(&m, a.interaction_radius(), lambda)
}

pub fn floquet_surface_of_symbol(m: &PolyMatrix, interaction_radius: u64, lambda: &GaussRational) -> Result<FloquetSurface, SpectrumError> {
    let a1 = shifted_symbol(m, interaction_radius, lambda)?;
    let delta = a1.determinant()?;
    if delta.is_zero() {
        return Err(SpectrumError::FlatBandDegenerate);
    }
    let (q, delta1) = delta.split_monomial_content()?;
    Ok(FloquetSurface { interaction_radius, a1, delta, delta1, q })
}

fn unit_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut roots: Vec<Complex64> =
        numeric::poly_roots(coeffs).into_iter().filter(|z| (z.norm() - 1.0).abs() < TORUS_TOL).collect();
    roots.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    roots
}

pub fn fermi_samples(a: &PeriodicOperator, lambda: f64, grid: usize) -> Result<FermiSampleSet, SpectrumError> {
    let m = floquet::symbol(a)?;
    fermi_samples_of_symbol(&m, a.interaction_radius(), lambda, grid)
}

pub fn fermi_samples_of_symbol(m: &PolyMatrix, interaction_radius: u64, lambda: f64, grid: usize) -> Result<FermiSampleSet, SpectrumError> {
    let exact = GaussRational::from_f64_exact(lambda).ok_or(SpectrumError::NonFinite(lambda))?;
    let dim = m.dimension();
    if dim > 2 || dim == 0 {
        return Err(SpectrumError::Dimension(dim));
    }
    let surface = floquet_surface_of_symbol(m, interaction_radius, &exact)?;
    let p = &surface.delta1;
    let points = if dim == 1 {
        let (_, coeffs) = p.eval_except(0, &[Complex64::new(1.0, 0.0)]);
        unit_roots(&coeffs).into_iter().map(|z| vec![z]).collect()
    } else {
        if grid == 0 {
            return Err(SpectrumError::Resolution(grid));
        }
        (0..grid)
            .into_par_iter()
            .flat_map_iter(|j| {
                let z1 = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / grid as f64);
                let (_, coeffs) = p.eval_except(1, &[z1, Complex64::new(1.0, 0.0)]);
                unit_roots(&coeffs).into_iter().map(move |z2| vec![z1, z2])
            })
            .collect()
    };
    Ok(FermiSampleSet { energy: lambda, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn chain_dispersion_closed_form() {
        let grid = dispersion(&fixtures::chain_laplacian(), 16).unwrap();
        for (idx, vals) in &grid.samples {
            let k = 2.0 * PI * idx[0] as f64 / 16.0;
            assert!((vals[0] - (1.0 - k.cos())).abs() < 1e-10);
        }
        assert_eq!(dispersion(&fixtures::chain_laplacian(), 1), Err(SpectrumError::Resolution(1)));
    }

    #[test]
    fn identity_and_flat_branch() {
        let b = bands(&fixtures::identity_operator(2, 1), 4).unwrap();
        assert_eq!(b.bands.len(), 1);
        assert!((b.bands[0].lower - 1.0).abs() < 1e-12 && (b.bands[0].upper - 1.0).abs() < 1e-12);
        let grid = dispersion(&fixtures::pendant_pair(), 32).unwrap();
        let flat = (0..3).find(|&j| grid.samples.iter().all(|(_, v)| v[j].abs() < 1e-10));
        assert!(flat.is_some());
    }

    #[test]
    fn chain_bands_and_membership() {
        let b = bands(&fixtures::chain_laplacian(), 64).unwrap();
        assert!(b.bands[0].lower.abs() < 1e-8 && (b.bands[0].upper - 2.0).abs() < 1e-8);
        assert!(matches!(membership(&b, 0.5), Membership::InBandInterior { .. }));
        assert_eq!(membership(&b, 3.0), Membership::NotInSpectrum);
        assert_eq!(membership(&b, 0.0), Membership::InSpectrumBoundary);
    }

    #[test]
    fn four_site_bands_within_laplacian_range() {
        let a = fixtures::four_site_laplacian();
        let b1 = bands(&a, 16).unwrap();
        let b2 = bands(&a, 16).unwrap();
        assert_eq!(b1, b2);
        for b in &b1.bands {
            assert!(b.lower > -1e-9 && b.upper < 2.0 + 1e-9);
        }
    }

    #[test]
    fn floquet_surface_examples() {
        let s = floquet_surface_poly(&fixtures::chain_laplacian(), &GaussRational::from_ratio(1, 2)).unwrap();
        assert_eq!(s.delta1.render(), "-1/2*z1^2 + 1/2*z1 - 1/2");
        assert_eq!(s.q, vec![0]);
        assert_eq!(
            floquet_surface_poly(&fixtures::pendant_pair(), &GaussRational::from_int(0)),
            Err(SpectrumError::FlatBandDegenerate)
        );
        let id = floquet_surface_poly(&fixtures::identity_operator(1, 1), &GaussRational::from_int(0)).unwrap();
        assert_eq!(id.delta1, LaurentPoly::one(1));
    }

    #[test]
    fn chain_fermi_points() {
        let a = fixtures::chain_laplacian();
        let half = fermi_samples(&a, 0.5, 0).unwrap();
        assert_eq!(half.points.len(), 2);
        for w in [Complex64::from_polar(1.0, -PI / 3.0), Complex64::from_polar(1.0, PI / 3.0)] {
            assert!(half.points.iter().any(|p| (p[0] - w).norm() < 1e-8));
        }
        assert!(fermi_samples(&a, 3.0, 0).unwrap().points.is_empty());
        let one = fermi_samples(&a, 1.0, 0).unwrap();
        for w in [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)] {
            assert!(one.points.iter().any(|p| (p[0] - w).norm() < 1e-8));
        }
    }

    #[test]
    fn four_site_fermi_points_annihilate_determinant() {
        let a = fixtures::four_site_laplacian();
        let m = floquet::symbol(&a).unwrap();
        let set = fermi_samples(&a, 0.9, 24).unwrap();
        assert!(!set.points.is_empty());
        for p in &set.points {
            let e = floquet::evaluate_symbol(&m, p).unwrap();
            let vals = numeric::hermitian_eigenvalues(&e);
            assert!(vals.iter().any(|v| (v - 0.9).abs() < 1e-7), "{vals:?}");
        }
    }
}
