//! Clustered spectra, semi-simplicity and disk geometry.
//!
//! Raw eigenvalues are merged into clusters (single linkage at
//! `cluster_tol · max(1, ρ(A))`); each cluster records its algebraic
//! multiplicity and the geometric multiplicity `n − rank(A − λI)` evaluated at
//! the cluster mean. For a non-real representative `a + jb` the rank is taken
//! on the real embedding `[[A − aI, bI], [−bI, A − aI]]`, whose nullity is
//! twice the complex geometric multiplicity.

use crate::error::{Error, Result};
use crate::linalg::{self, Tolerances};
use crate::matrix::{ComplexScalar, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub value: ComplexScalar,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
}

impl EigenCluster {
    pub fn is_semisimple(&self) -> bool {
        self.algebraic_multiplicity == self.geometric_multiplicity
    }

    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub clusters: Vec<EigenCluster>,
    pub spectral_radius: f64,
    pub dimension: usize,
    /// Absolute distance used to merge eigenvalues into clusters.
    pub cluster_radius: f64,
    /// Smallest distance between two distinct cluster representatives; a gap
    /// close to `cluster_radius` signals fragile clustering.
    pub cluster_gap: Option<f64>,
}

impl Spectrum {
    /// Cluster whose representative lies within the clustering radius of `lambda`.
    pub fn find(&self, lambda: ComplexScalar) -> Option<&EigenCluster> {
        self.clusters
            .iter()
            .filter(|c| (c.value - lambda).norm() <= self.cluster_radius)
            .min_by(|a, b| (a.value - lambda).norm().total_cmp(&(b.value - lambda).norm()))
    }

    /// Eigenvalues repeated by algebraic multiplicity.
    pub fn eigenvalues(&self) -> impl Iterator<Item = ComplexScalar> + '_ {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.value, c.algebraic_multiplicity))
    }
}

pub fn analyze_spectrum(a: &Matrix, tol: &Tolerances) -> Result<Spectrum> {
    if !(tol.cluster > 0.0) {
        return Err(Error::parameter("cluster tolerance must be positive"));
    }
    let mut eig = linalg::eigenvalues(a)?;
    let n = a.dim();
    let rho_raw = eig.iter().fold(0.0f64, |m, l| m.max(l.norm()));
    let radius = tol.cluster * rho_raw.max(1.0);
    for l in eig.iter_mut() {
        if l.im.abs() <= radius {
            l.im = 0.0;
        }
    }

    // Single-linkage clustering with union-find.
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eig[i] - eig[j]).norm() <= radius {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<ComplexScalar>)> = Vec::new();
    for (i, &l) in eig.iter().enumerate() {
        let r = root(&mut parent, i);
        match groups.iter_mut().find(|(g, _)| *g == r) {
            Some((_, members)) => members.push(l),
            None => groups.push((r, vec![l])),
        }
    }

    let a_scale = a.max_abs().max(1.0);
    let mut clusters = Vec::with_capacity(groups.len());
    for (_, members) in groups {
        let count = members.len();
        let mut value = members.iter().sum::<ComplexScalar>() / count as f64;
        if value.im.abs() <= radius {
            value.im = 0.0;
        }
        let geo = geometric_multiplicity(a, value, tol.rank, a_scale)?.clamp(1, count);
        clusters.push(EigenCluster {
            value,
            algebraic_multiplicity: count,
            geometric_multiplicity: geo,
        });
    }
    clusters.sort_by(|x, y| {
        y.value
            .norm()
            .total_cmp(&x.value.norm())
            .then(x.value.re.total_cmp(&y.value.re))
            .then(y.value.im.total_cmp(&x.value.im))
    });

    let spectral_radius = clusters.iter().fold(0.0f64, |m, c| m.max(c.value.norm()));
    let mut cluster_gap: Option<f64> = None;
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            let d = (clusters[i].value - clusters[j].value).norm();
            cluster_gap = Some(cluster_gap.map_or(d, |g| g.min(d)));
        }
    }
    Ok(Spectrum {
        clusters,
        spectral_radius,
        dimension: n,
        cluster_radius: radius,
        cluster_gap,
    })
}

fn geometric_multiplicity(a: &Matrix, lambda: ComplexScalar, rank_tol: f64, scale: f64) -> Result<usize> {
    let n = a.dim();
    if lambda.im == 0.0 {
        let shifted = a.affine_with_identity(-lambda.re, 1.0);
        let r = rank_with_floor(&shifted, rank_tol, scale)?;
        Ok(n - r)
    } else {
        let shifted = a.affine_with_identity(-lambda.re, 1.0);
        let b = lambda.im;
        let mut emb = Matrix::zeros(2 * n, 2 * n);
        emb.set_block(0, 0, &shifted);
        emb.set_block(n, n, &shifted);
        emb.set_block(0, n, &Matrix::identity(n).scale(b));
        emb.set_block(n, 0, &Matrix::identity(n).scale(-b));
        let r = rank_with_floor(&emb, rank_tol, scale)?;
        Ok((2 * n - r) / 2)
    }
}

/// Rank relative to `max(σ_max, scale)`, so a shifted matrix that is nearly
/// zero does not count its round-off as signal.
fn rank_with_floor(m: &Matrix, tol: f64, scale: f64) -> Result<usize> {
    let sigma = linalg::singular_values(m)?;
    let reference = sigma.first().copied().unwrap_or(0.0).max(scale);
    Ok(sigma.iter().filter(|&&s| s > tol * reference).count())
}

/// Lookup of `lambda` in `s` followed by the multiplicity comparison.
pub fn is_semisimple(s: &Spectrum, lambda: ComplexScalar) -> Result<bool> {
    s.find(lambda)
        .map(EigenCluster::is_semisimple)
        .ok_or(Error::NotInSpectrum {
            re: lambda.re,
            im: lambda.im,
        })
}

/// Closed disk in the complex plane with its center on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskRegion {
    pub center: f64,
    pub radius: f64,
}

impl DiskRegion {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.is_finite() {
            return Err(Error::parameter(format!("invalid disk: center {center}, radius {radius}")));
        }
        Ok(DiskRegion { center, radius })
    }

    /// `D_r = { z : |z − (1 − r)| ≤ r }`; its boundary passes through 1.
    pub fn through_one(r: f64) -> Result<Self> {
        Self::new(1.0 - r, r)
    }

    /// `ℓ·D_1`, the disk of radius ℓ centered at the origin.
    pub fn centered(l: f64) -> Result<Self> {
        Self::new(0.0, l)
    }

    /// Eigenvalue region of η-averaged maps: `D_η`.
    pub fn averaged(eta: f64) -> Result<Self> {
        Self::through_one(eta)
    }

    /// Eigenvalue region of κ-strictly pseudocontractive maps: `D_{1/(1−κ)}`,
    /// centered at `−κ/(1−κ)`.
    pub fn pseudocontractive(kappa: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&kappa) {
            return Err(Error::parameter(format!("kappa must lie in [0, 1), got {kappa}")));
        }
        Self::through_one(1.0 / (1.0 - kappa))
    }

    /// `|λ − center| − radius`: negative inside, positive outside.
    pub fn signed_distance(&self, lambda: ComplexScalar) -> f64 {
        (lambda - ComplexScalar::new(self.center, 0.0)).norm() - self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

pub fn disk_membership(lambda: ComplexScalar, disk: &DiskRegion, boundary_tol: f64) -> Membership {
    let d = disk.signed_distance(lambda);
    if d.abs() <= boundary_tol {
        Membership::Boundary
    } else if d < 0.0 {
        Membership::Interior
    } else {
        Membership::Exterior
    }
}

/// Disk condition shared by the operator classes: every eigenvalue in the closed disk,
/// and every eigenvalue on its boundary semi-simple.
pub fn spectrum_in_disk(s: &Spectrum, disk: &DiskRegion, boundary_tol: f64) -> bool {
    s.clusters.iter().all(|c| match disk_membership(c.value, disk, boundary_tol) {
        Membership::Interior => true,
        Membership::Boundary => c.is_semisimple(),
        Membership::Exterior => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    #[test]
    fn identity_single_semisimple_cluster() {
        let s = analyze_spectrum(&Matrix::identity(2), &Tolerances::default()).unwrap();
        assert_eq!(
            s.clusters,
            vec![EigenCluster {
                value: c(1.0, 0.0),
                algebraic_multiplicity: 2,
                geometric_multiplicity: 2
            }]
        );
        assert!(is_semisimple(&s, c(1.0, 0.0)).unwrap());
    }

    #[test]
    fn jordan_block_is_defective() {
        let j = Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        let s = analyze_spectrum(&j, &Tolerances::default()).unwrap();
        assert_eq!(s.clusters.len(), 1);
        assert_eq!(s.clusters[0].algebraic_multiplicity, 2);
        assert_eq!(s.clusters[0].geometric_multiplicity, 1);
        assert!(!is_semisimple(&s, c(1.0, 0.0)).unwrap());
    }

    #[test]
    fn game_operator_complex_pair() {
        let a = Matrix::from_rows(&[[1.0, 1.0], [-1.0, 1.0]]).unwrap();
        let s = analyze_spectrum(&a, &Tolerances::default()).unwrap();
        assert_eq!(s.clusters.len(), 2);
        for cl in &s.clusters {
            assert_abs_diff_eq!(cl.value.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(cl.value.im.abs(), 1.0, epsilon = 1e-12);
            assert_eq!((cl.algebraic_multiplicity, cl.geometric_multiplicity), (1, 1));
        }
        assert_abs_diff_eq!(s.spectral_radius, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn diagonal_is_semisimple_everywhere() {
        let s = analyze_spectrum(&Matrix::diag(&[1.0, 1.0, 0.5]), &Tolerances::default()).unwrap();
        assert!(is_semisimple(&s, c(1.0, 0.0)).unwrap());
        assert!(is_semisimple(&s, c(0.5, 0.0)).unwrap());
        assert_eq!(
            is_semisimple(&s, c(0.25, 0.0)),
            Err(Error::NotInSpectrum { re: 0.25, im: 0.0 })
        );
    }

    #[test]
    fn repeated_complex_pair_multiplicities() {
        // Rotation blocks: semi-simple double pair versus a defective one.
        let semi = Matrix::from_rows(&[
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let s = analyze_spectrum(&semi, &Tolerances::default()).unwrap();
        assert_eq!(s.clusters.len(), 2);
        assert!(s.clusters.iter().all(|c| c.algebraic_multiplicity == 2 && c.is_semisimple()));

        let mut defective = semi.clone();
        defective[(0, 2)] = 1.0;
        defective[(1, 3)] = 1.0;
        let s = analyze_spectrum(&defective, &Tolerances::default()).unwrap();
        assert_eq!(s.clusters.len(), 2);
        assert!(s
            .clusters
            .iter()
            .all(|c| c.algebraic_multiplicity == 2 && c.geometric_multiplicity == 1));
    }

    #[test]
    fn disk_membership_examples() {
        let tol = 1e-8;
        for eta in [0.1, 0.5, 0.9] {
            let d = DiskRegion::averaged(eta).unwrap();
            assert_eq!(disk_membership(c(1.0, 0.0), &d, tol), Membership::Boundary);
        }
        let unit = DiskRegion::through_one(1.0).unwrap();
        assert_eq!(disk_membership(c(0.0, 0.0), &unit, tol), Membership::Interior);
        // |3/2 + j/2| = sqrt(10)/2 > 1
        assert_eq!(disk_membership(c(1.5, 0.5), &unit, tol), Membership::Exterior);
        assert_abs_diff_eq!(unit.signed_distance(c(1.5, 0.5)), 10f64.sqrt() / 2.0 - 1.0, epsilon = 1e-15);
    }

    #[test]
    fn pseudocontractive_disk_geometry() {
        let d = DiskRegion::pseudocontractive(0.5).unwrap();
        assert_abs_diff_eq!(d.center, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.radius, 2.0, epsilon = 1e-15);
        assert!(DiskRegion::pseudocontractive(1.0).is_err());
        assert!(DiskRegion::new(0.0, 0.0).is_err());
    }
}
