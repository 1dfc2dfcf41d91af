//! Operator classes of `x ↦ Ax`: contractive, nonexpansive, averaged and
//! strictly pseudocontractive.
//!
//! Each class has three equivalent descriptions that this module keeps side by
//! side:
//!
//! * an LMI in a weight matrix `P ≻ 0` (`verify_*_lmi`);
//! * a disk condition on the spectrum, with semi-simple eigenvalues on the
//!   disk boundary (`*_with` predicates on a [`Spectrum`]);
//! * a reduction to nonexpansiveness of an affine combination `aI + bA`,
//!   which is also how certificates are built.
//!
//! The classes are existential in the weight, so [`classify`] reports the
//! union condition over all parameters together with a witness parameter
//! slightly above the infimum and a certificate for it.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, Tolerances};
use crate::matrix::{ComplexScalar, Matrix};
use crate::spectrum::{analyze_spectrum, disk_membership, spectrum_in_disk, DiskRegion, Membership, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorClass {
    Contraction,
    Nonexpansive,
    Averaged,
    Pseudocontractive,
}

impl OperatorClass {
    pub const ALL: [OperatorClass; 4] = [
        OperatorClass::Contraction,
        OperatorClass::Nonexpansive,
        OperatorClass::Averaged,
        OperatorClass::Pseudocontractive,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            OperatorClass::Contraction => "con",
            OperatorClass::Nonexpansive => "ne",
            OperatorClass::Averaged => "avg",
            OperatorClass::Pseudocontractive => "spc",
        }
    }

    /// Affine map `(a, b)` such that `A` is in this class with parameter `p`
    /// iff `aI + bA` is nonexpansive.
    fn nonexpansive_reduction(self, p: f64) -> (f64, f64) {
        match self {
            OperatorClass::Contraction => (0.0, 1.0 / p),
            OperatorClass::Nonexpansive => (0.0, 1.0),
            OperatorClass::Averaged => (1.0 - 1.0 / p, 1.0 / p),
            OperatorClass::Pseudocontractive => (p, 1.0 - p),
        }
    }
}

impl fmt::Display for OperatorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            OperatorClass::Contraction => "contractive",
            OperatorClass::Nonexpansive => "nonexpansive",
            OperatorClass::Averaged => "averaged",
            OperatorClass::Pseudocontractive => "strictly pseudocontractive",
        };
        f.write_str(name)
    }
}

// ---------------------------------------------------------------------------
// LMI checks

fn require_certificate(p: &Matrix, n: usize, tol: &Tolerances) -> Result<()> {
    if p.rows() != n || p.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.rows(),
        });
    }
    if !linalg::is_positive_definite(p, tol)? {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

/// `M ≽ 0` for `M = Σ terms`, up to `−tol_psd` times the largest term.
fn psd_combination(terms: &[Matrix], tol: &Tolerances) -> Result<bool> {
    let mut m = terms[0].clone();
    for t in &terms[1..] {
        m = m.add(t);
    }
    let scale = terms.iter().map(Matrix::max_abs).fold(0.0, f64::max);
    linalg::is_psd_within(&m.symmetric_part(), scale, tol.psd)
}

/// `AᵀPA ≼ ℓ²P`: `A` is ℓ-Lipschitz in `‖·‖_P`.
pub fn verify_lipschitz_lmi(a: &Matrix, p: &Matrix, l: f64, tol: &Tolerances) -> Result<bool> {
    a.check_operator()?;
    require_certificate(p, a.dim(), tol)?;
    if !(l >= 0.0) || !l.is_finite() {
        return Err(Error::parameter(format!("Lipschitz constant must be >= 0, got {l}")));
    }
    let atpa = a.transpose().matmul(p).matmul(a);
    psd_combination(&[p.scale(l * l), atpa.scale(-1.0)], tol)
}

/// `AᵀPA ≼ (2η − 1)P + (1 − η)(AᵀP + PA)`: `A` is η-averaged in `‖·‖_P`.
pub fn verify_avg_lmi(a: &Matrix, p: &Matrix, eta: f64, tol: &Tolerances) -> Result<bool> {
    a.check_operator()?;
    require_certificate(p, a.dim(), tol)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::parameter(format!("eta must lie in (0, 1), got {eta}")));
    }
    let at = a.transpose();
    let atp = at.matmul(p);
    let pa = p.matmul(a);
    let atpa = atp.matmul(a);
    psd_combination(
        &[
            p.scale(2.0 * eta - 1.0),
            atp.add(&pa).scale(1.0 - eta),
            atpa.scale(-1.0),
        ],
        tol,
    )
}

/// `(1 − κ)AᵀPA ≼ (1 + κ)P − κ(AᵀP + PA)`: `A` is κ-strictly pseudocontractive
/// in `‖·‖_P`.
pub fn verify_spc_lmi(a: &Matrix, p: &Matrix, kappa: f64, tol: &Tolerances) -> Result<bool> {
    a.check_operator()?;
    require_certificate(p, a.dim(), tol)?;
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::parameter(format!("kappa must lie in (0, 1), got {kappa}")));
    }
    let at = a.transpose();
    let atp = at.matmul(p);
    let pa = p.matmul(a);
    let atpa = atp.matmul(a);
    psd_combination(
        &[
            p.scale(1.0 + kappa),
            atp.add(&pa).scale(-kappa),
            atpa.scale(-(1.0 - kappa)),
        ],
        tol,
    )
}

/// Dispatches to the LMI of `class`; `witness` is ℓ, ignored, η or κ.
pub fn verify_class_lmi(a: &Matrix, p: &Matrix, class: OperatorClass, witness: f64, tol: &Tolerances) -> Result<bool> {
    match class {
        OperatorClass::Contraction => verify_lipschitz_lmi(a, p, witness, tol),
        OperatorClass::Nonexpansive => verify_lipschitz_lmi(a, p, 1.0, tol),
        OperatorClass::Averaged => verify_avg_lmi(a, p, witness, tol),
        OperatorClass::Pseudocontractive => verify_spc_lmi(a, p, witness, tol),
    }
}

/// Smallest ℓ with `AᵀPA ≼ ℓ²P`, i.e. `‖R A R⁻¹‖₂` for `P = RᵀR`.
pub fn lipschitz_constant_in(a: &Matrix, p: &Matrix) -> Result<f64> {
    let r = linalg::cholesky_upper(p)?;
    let rinv = linalg::inverse(&r)?;
    let m = r.matmul(a).matmul(&rinv);
    Ok(linalg::singular_values(&m)?[0])
}

// ---------------------------------------------------------------------------
// Spectral conditions at a fixed parameter

/// ℓ-contraction: spectrum in `ℓ·D_1`, boundary eigenvalues semi-simple, ℓ ∈ [0, 1).
pub fn is_contraction_with(s: &Spectrum, l: f64, tol: &Tolerances) -> bool {
    if !(0.0..1.0).contains(&l) {
        return false;
    }
    if l == 0.0 {
        // Only the zero matrix is 0-Lipschitz.
        return s
            .clusters
            .iter()
            .all(|c| c.value.norm() <= tol.boundary && c.is_semisimple());
    }
    let disk = DiskRegion::centered(l).expect("positive radius");
    spectrum_in_disk(s, &disk, tol.boundary)
}

pub fn is_nonexpansive(s: &Spectrum, tol: &Tolerances) -> bool {
    let disk = DiskRegion::centered(1.0).expect("unit disk");
    spectrum_in_disk(s, &disk, tol.boundary)
}

/// η-averaged: spectrum in `D_η`, boundary eigenvalues semi-simple.
pub fn is_averaged_with(s: &Spectrum, eta: f64, tol: &Tolerances) -> bool {
    if !(eta > 0.0 && eta < 1.0) {
        return false;
    }
    let disk = DiskRegion::averaged(eta).expect("eta in (0,1)");
    spectrum_in_disk(s, &disk, tol.boundary)
}

/// κ-strictly pseudocontractive: spectrum in `D_{1/(1−κ)}`, boundary
/// eigenvalues semi-simple.
pub fn is_spc_with(s: &Spectrum, kappa: f64, tol: &Tolerances) -> bool {
    if !(kappa > 0.0 && kappa < 1.0) {
        return false;
    }
    let disk = DiskRegion::pseudocontractive(kappa).expect("kappa in (0,1)");
    spectrum_in_disk(s, &disk, tol.boundary)
}

/// Smallest κ ∈ [0, 1) with `|(1 − κ)λ + κ| ≤ 1` for every κ above it.
///
/// Writing `t = 1 − κ` and `μ = 1 − λ`, the condition is
/// `1 − 2t·Re μ + t²|μ|² ≤ 1`, i.e. `t ≤ 2 Re μ / |μ|²`.
pub fn min_kappa(lambda: ComplexScalar) -> Result<f64> {
    let mu = ComplexScalar::new(1.0, 0.0) - lambda;
    if mu.norm_sqr() == 0.0 {
        return Ok(0.0);
    }
    if !(mu.re > 0.0) {
        return Err(Error::NoKappa {
            re: lambda.re,
            im: lambda.im,
        });
    }
    Ok((1.0 - 2.0 * mu.re / mu.norm_sqr()).max(0.0))
}

/// Smallest η with λ ∈ `D_η`: `|1 − λ|² / (2 Re(1 − λ))`. Values ≥ 1 mean λ is
/// outside every averaged disk.
pub fn min_eta(lambda: ComplexScalar) -> Result<f64> {
    let mu = ComplexScalar::new(1.0, 0.0) - lambda;
    if mu.norm_sqr() == 0.0 {
        return Ok(0.0);
    }
    if !(mu.re > 0.0) {
        return Err(Error::parameter(format!(
            "no averaged disk contains {}{:+}j",
            lambda.re, lambda.im
        )));
    }
    Ok(mu.norm_sqr() / (2.0 * mu.re))
}

// ---------------------------------------------------------------------------
// Certificates

/// Builds `P ≻ 0` satisfying the LMI of `class` at `witness`.
///
/// The class is reduced to nonexpansiveness of `T = aI + bA`. `T` is brought
/// to block-diagonal form `S⁻¹TS = diag(D_b, B)` where `D_b` collects the
/// unit-modulus (semi-simple) eigenvalues in a basis where it is orthogonal and
/// `B` has spectral radius below one. Then `P = S⁻ᵀ diag(I, X) S⁻¹` with
/// `BᵀXB − X = −I`.
pub fn construct_certificate(a: &Matrix, class: OperatorClass, witness: f64, tol: &Tolerances) -> Result<Matrix> {
    a.check_operator()?;
    match class {
        OperatorClass::Contraction if !(0.0..1.0).contains(&witness) => {
            return Err(Error::parameter(format!("contraction witness must lie in [0, 1), got {witness}")))
        }
        OperatorClass::Averaged | OperatorClass::Pseudocontractive if !(witness > 0.0 && witness < 1.0) => {
            return Err(Error::parameter(format!("{class} witness must lie in (0, 1), got {witness}")))
        }
        _ => {}
    }
    if class == OperatorClass::Contraction && witness == 0.0 {
        if a.max_abs() == 0.0 {
            return Ok(Matrix::identity(a.dim()));
        }
        return Err(Error::NotInClass { class: "contractive" });
    }
    let (shift, gain) = class.nonexpansive_reduction(witness);
    let t = a.affine_with_identity(shift, gain);
    let p = nonexpansive_certificate(&t, tol).map_err(|e| match e {
        Error::NotInClass { .. } => Error::NotInClass {
            class: match class {
                OperatorClass::Contraction => "contractive",
                OperatorClass::Nonexpansive => "nonexpansive",
                OperatorClass::Averaged => "averaged",
                OperatorClass::Pseudocontractive => "strictly pseudocontractive",
            },
        },
        other => other,
    })?;
    // A badly conditioned P can miss its own LMI by roundoff alone.
    if !verify_class_lmi(a, &p, class, witness, tol).unwrap_or(false) {
        let condition = linalg::condition_number(&p)?;
        if condition > UNRELIABLE_CONDITION {
            return Err(Error::IllConditioned { condition });
        }
    }
    Ok(p)
}

const UNRELIABLE_CONDITION: f64 = 1e8;

fn nonexpansive_certificate(t: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    let n = t.dim();
    let s = analyze_spectrum(t, tol)?;
    if !is_nonexpansive(&s, tol) {
        return Err(Error::NotInClass { class: "nonexpansive" });
    }
    let unit = DiskRegion::centered(1.0).expect("unit disk");
    let boundary: Vec<_> = s
        .clusters
        .iter()
        .filter(|c| disk_membership(c.value, &unit, tol.boundary) == Membership::Boundary)
        .collect();

    if boundary.is_empty() {
        return Ok(normalize(stein_solve(t)?));
    }

    // Basis of the boundary invariant subspace, organised so that T acts as
    // ±1 or as a 2×2 rotation on each piece.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut annihilator = Matrix::identity(n);
    for c in &boundary {
        let (a, b) = (c.value.re, c.value.im);
        if b == 0.0 {
            let shifted = t.affine_with_identity(-a, 1.0);
            let null = linalg::trailing_right_singular_vectors(&shifted, c.algebraic_multiplicity)?;
            for j in 0..null.cols() {
                basis.push(null.column(j));
            }
            annihilator = annihilator.matmul(&shifted);
        } else if b > 0.0 {
            let shifted = t.affine_with_identity(-a, 1.0);
            let quad = shifted.matmul(&shifted).affine_with_identity(b * b, 1.0);
            let m = c.algebraic_multiplicity;
            let null = linalg::trailing_right_singular_vectors(&quad, 2 * m)?;
            let mut ortho: Vec<Vec<f64>> = Vec::new();
            for _ in 0..m {
                let u = (0..null.cols())
                    .map(|j| null.column(j))
                    .max_by(|x, y| residual_norm(x, &ortho).total_cmp(&residual_norm(y, &ortho)))
                    .expect("non-empty null space");
                let norm = crate::matrix::norm2(&u);
                let u: Vec<f64> = u.iter().map(|v| v / norm).collect();
                let tu = t.mul_vec(&u);
                let w: Vec<f64> = u.iter().zip(&tu).map(|(ui, tui)| (a * ui - tui) / b).collect();
                push_orthonormal(&mut ortho, &u);
                push_orthonormal(&mut ortho, &w);
                basis.push(u);
                basis.push(w);
            }
            annihilator = annihilator.matmul(&quad);
        }
    }
    let nb = basis.len();
    let mut s_mat = Matrix::zeros(n, n);
    for (j, col) in basis.iter().enumerate() {
        s_mat.set_column(j, col);
    }
    if nb < n {
        let interior = linalg::leading_left_singular_vectors(&annihilator, n - nb)?;
        s_mat.set_block(0, nb, &interior);
    }
    let condition = linalg::condition_number(&s_mat)?;
    if !(condition <= tol.max_condition) {
        return Err(Error::IllConditioned { condition });
    }
    let s_inv = linalg::inverse(&s_mat)?;
    let d = s_inv.matmul(t).matmul(&s_mat);

    let mut weight = Matrix::identity(n);
    if nb < n {
        let interior_block = d.block(nb, nb, n - nb, n - nb);
        weight.set_block(nb, nb, &stein_solve(&interior_block)?);
    }
    let p = s_inv.transpose().matmul(&weight).matmul(&s_inv);
    Ok(normalize(p.symmetric_part()))
}

fn residual_norm(x: &[f64], ortho: &[Vec<f64>]) -> f64 {
    let mut r = x.to_vec();
    for q in ortho {
        let c = crate::matrix::dot(&r, q);
        r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= c * qi);
    }
    crate::matrix::norm2(&r)
}

fn push_orthonormal(ortho: &mut Vec<Vec<f64>>, x: &[f64]) {
    let mut r = x.to_vec();
    for _ in 0..2 {
        for q in ortho.iter() {
            let c = crate::matrix::dot(&r, q);
            r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= c * qi);
        }
    }
    let norm = crate::matrix::norm2(&r);
    if norm > 0.0 {
        ortho.push(r.into_iter().map(|v| v / norm).collect());
    }
}

fn normalize(p: Matrix) -> Matrix {
    let s = p.max_abs();
    if s > 0.0 {
        p.scale(1.0 / s)
    } else {
        p
    }
}

/// Solves the Stein equation `BᵀXB − X = −I` for `ρ(B) < 1` by squaring:
/// `X = Σ_k (Bᵏ)ᵀBᵏ`, doubling the number of terms per step.
pub fn stein_solve(b: &Matrix) -> Result<Matrix> {
    const MAX_DOUBLINGS: usize = 80;
    let n = b.dim();
    let mut x = Matrix::identity(n);
    let mut power = b.clone();
    for _ in 0..MAX_DOUBLINGS {
        let inc = power.transpose().matmul(&x).matmul(&power);
        x = x.add(&inc);
        power = power.matmul(&power);
        x.check_finite().map_err(|_| Error::NoConvergence {
            algorithm: "Stein doubling",
            iterations: MAX_DOUBLINGS,
        })?;
        if inc.max_abs() <= f64::EPSILON * x.max_abs() && power.max_abs() < 1.0 {
            return Ok(x.symmetric_part());
        }
    }
    Err(Error::NoConvergence {
        algorithm: "Stein doubling",
        iterations: MAX_DOUBLINGS,
    })
}

// ---------------------------------------------------------------------------
// Classification

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    /// ℓ*, η* or κ*; `None` for nonexpansiveness and for negative verdicts.
    pub witness: Option<f64>,
    pub certificate: Option<Matrix>,
}

impl Verdict {
    fn negative() -> Self {
        Verdict {
            holds: false,
            witness: None,
            certificate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BorderlineFlag {
    pub class: OperatorClass,
    pub eigenvalue: Option<ComplexScalar>,
    /// Signed distance to the deciding boundary, when one applies.
    pub distance: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub spectrum: Spectrum,
    pub contraction: Verdict,
    pub nonexpansive: Verdict,
    pub averaged: Verdict,
    pub pseudocontractive: Verdict,
    /// Lipschitz constant of `A` in the norm of the strongest available
    /// certificate (Euclidean norm when no certificate exists).
    pub lipschitz_in_p: Option<(f64, Matrix)>,
    pub borderline_flags: Vec<BorderlineFlag>,
    pub certificate_errors: Vec<(OperatorClass, Error)>,
}

impl ClassificationReport {
    pub fn verdict(&self, class: OperatorClass) -> &Verdict {
        match class {
            OperatorClass::Contraction => &self.contraction,
            OperatorClass::Nonexpansive => &self.nonexpansive,
            OperatorClass::Averaged => &self.averaged,
            OperatorClass::Pseudocontractive => &self.pseudocontractive,
        }
    }

    fn verdict_mut(&mut self, class: OperatorClass) -> &mut Verdict {
        match class {
            OperatorClass::Contraction => &mut self.contraction,
            OperatorClass::Nonexpansive => &mut self.nonexpansive,
            OperatorClass::Averaged => &mut self.averaged,
            OperatorClass::Pseudocontractive => &mut self.pseudocontractive,
        }
    }

    pub fn is_contraction(&self) -> bool {
        self.contraction.holds
    }

    pub fn is_nonexpansive(&self) -> bool {
        self.nonexpansive.holds
    }

    pub fn is_averaged(&self) -> bool {
        self.averaged.holds
    }

    pub fn is_spc(&self) -> bool {
        self.pseudocontractive.holds
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub certificates: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { certificates: true }
    }
}

pub fn classify(a: &Matrix) -> Result<ClassificationReport> {
    classify_with(a, &Tolerances::default(), ClassifyOptions::default())
}

pub fn classify_with(a: &Matrix, tol: &Tolerances, options: ClassifyOptions) -> Result<ClassificationReport> {
    a.check_operator()?;
    let spectrum = analyze_spectrum(a, tol)?;
    let mut flags = Vec::new();
    let rho = spectrum.spectral_radius;
    let one = ComplexScalar::new(1.0, 0.0);
    let at_one = spectrum.clusters.iter().find(|c| (c.value - one).norm() <= tol.boundary);
    let others = || {
        spectrum
            .clusters
            .iter()
            .filter(move |c| at_one.is_none_or(|o| !std::ptr::eq(*c, o)))
    };
    let one_ok = at_one.is_none_or(|c| c.is_semisimple());
    if let Some(c) = at_one.filter(|c| !c.is_semisimple()) {
        for class in [OperatorClass::Nonexpansive, OperatorClass::Averaged, OperatorClass::Pseudocontractive] {
            flags.push(BorderlineFlag {
                class,
                eigenvalue: Some(c.value),
                distance: Some(0.0),
                note: "eigenvalue 1 not semi-simple".into(),
            });
        }
    }

    // Unit circle: decides contraction, nonexpansiveness and averagedness.
    for c in spectrum.clusters.iter() {
        let d = c.value.norm() - 1.0;
        if d.abs() <= tol.boundary && !at_one.is_some_and(|o| std::ptr::eq(c, o)) {
            let note = if c.is_semisimple() {
                "eigenvalue on the unit circle".to_string()
            } else {
                format!("eigenvalue {} on the unit circle is not semi-simple", fmt_complex(c.value))
            };
            for class in [OperatorClass::Contraction, OperatorClass::Nonexpansive, OperatorClass::Averaged] {
                flags.push(BorderlineFlag {
                    class,
                    eigenvalue: Some(c.value),
                    distance: Some(d),
                    note: note.clone(),
                });
            }
        }
    }

    // Contraction.
    let contraction = if rho < 1.0 - tol.boundary {
        let radii: Vec<_> = spectrum.clusters.iter().map(|c| (c.value.norm(), c.is_semisimple())).collect();
        Verdict {
            holds: true,
            witness: Some(witness_from(&radii, rho, 0.0)),
            certificate: None,
        }
    } else {
        Verdict::negative()
    };

    let nonexpansive = Verdict {
        holds: is_nonexpansive(&spectrum, tol),
        witness: None,
        certificate: None,
    };

    // Averagedness: union of D_η over η ∈ (0, 1).
    let unit = DiskRegion::centered(1.0).expect("unit disk");
    let avg_ok = one_ok
        && others().all(|c| disk_membership(c.value, &unit, tol.boundary) == Membership::Interior);
    let averaged = if avg_ok {
        let values: Vec<_> = others()
            .map(|c| (min_eta(c.value).unwrap_or(1.0), c.is_semisimple()))
            .collect();
        let inf = values.iter().map(|v| v.0).fold(0.0, f64::max);
        Verdict {
            holds: true,
            witness: Some(witness_from(&values, inf, tol.witness_margin)),
            certificate: None,
        }
    } else {
        Verdict::negative()
    };

    // Strict pseudocontractivity: union of D_{1/(1−κ)}, i.e. Re λ < 1 or λ = 1.
    for c in others() {
        let d = c.value.re - 1.0;
        if d.abs() <= tol.boundary {
            flags.push(BorderlineFlag {
                class: OperatorClass::Pseudocontractive,
                eigenvalue: Some(c.value),
                distance: Some(d),
                note: "eigenvalue on the line Re = 1".into(),
            });
        }
    }
    let spc_ok = one_ok && others().all(|c| c.value.re < 1.0 - tol.boundary);
    let pseudocontractive = if spc_ok {
        let values: Vec<_> = others()
            .map(|c| (min_kappa(c.value).unwrap_or(1.0), c.is_semisimple()))
            .collect();
        let inf = values.iter().map(|v| v.0).fold(0.0, f64::max);
        Verdict {
            holds: true,
            witness: Some(witness_from(&values, inf, tol.witness_margin)),
            certificate: None,
        }
    } else {
        Verdict::negative()
    };

    let mut report = ClassificationReport {
        spectrum,
        contraction,
        nonexpansive,
        averaged,
        pseudocontractive,
        lipschitz_in_p: None,
        borderline_flags: flags,
        certificate_errors: Vec::new(),
    };

    // Re-check witnesses against the fixed-parameter disk conditions.
    for class in [OperatorClass::Contraction, OperatorClass::Averaged, OperatorClass::Pseudocontractive] {
        let v = report.verdict(class);
        if let (true, Some(w)) = (v.holds, v.witness) {
            let ok = match class {
                OperatorClass::Contraction => is_contraction_with(&report.spectrum, w, tol),
                OperatorClass::Averaged => is_averaged_with(&report.spectrum, w, tol),
                _ => is_spc_with(&report.spectrum, w, tol),
            };
            if !ok {
                report.borderline_flags.push(BorderlineFlag {
                    class,
                    eigenvalue: None,
                    distance: None,
                    note: format!("witness {w:.6e} fails the disk condition"),
                });
            }
        }
    }

    if options.certificates {
        for class in OperatorClass::ALL {
            let v = report.verdict(class);
            if !v.holds {
                continue;
            }
            let w = v.witness.unwrap_or(1.0);
            let built = construct_certificate(a, class, w, tol).and_then(|p| {
                let ok = verify_class_lmi(a, &p, class, w, tol)?;
                Ok((p, ok))
            });
            match built {
                Ok((p, true)) => report.verdict_mut(class).certificate = Some(p),
                Ok((_, false)) => report.borderline_flags.push(BorderlineFlag {
                    class,
                    eigenvalue: None,
                    distance: None,
                    note: "certificate: constructed P fails the LMI check".into(),
                }),
                Err(e) => {
                    report.borderline_flags.push(BorderlineFlag {
                        class,
                        eigenvalue: None,
                        distance: None,
                        note: format!("certificate: {e}"),
                    });
                    report.certificate_errors.push((class, e));
                }
            }
        }
        let p = OperatorClass::ALL
            .iter()
            .find_map(|&c| report.verdict(c).certificate.clone())
            .unwrap_or_else(|| Matrix::identity(a.dim()));
        if let Ok(l) = lipschitz_constant_in(a, &p) {
            report.lipschitz_in_p = Some((l, p));
        }
    }
    Ok(report)
}

/// Witness for per-cluster thresholds `values` with supremum `inf < 1`.
///
/// A defective cluster near the supremum would make every certificate at
/// `inf + margin` nearly singular, so the witness then moves a quarter of the
/// way towards 1.
fn witness_from(values: &[(f64, bool)], inf: f64, margin: f64) -> f64 {
    let room = 1.0 - inf;
    if values.iter().any(|&(v, semisimple)| !semisimple && v >= inf - 0.5 * room) {
        return inf + 0.5 * room;
    }
    if margin == 0.0 {
        return inf;
    }
    witness_above(inf, margin)
}

/// Parameter strictly inside (0, 1) just above an infimum `inf < 1`.
fn witness_above(inf: f64, margin: f64) -> f64 {
    let w = inf + margin;
    if w < 1.0 {
        w
    } else {
        0.5 * (inf + 1.0)
    }
}

pub(crate) fn fmt_complex(z: ComplexScalar) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}j", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn lipschitz_lmi_examples() {
        let t = tol();
        let i2 = Matrix::identity(2);
        assert!(verify_lipschitz_lmi(&Matrix::zeros(2, 2), &i2, 0.5, &t).unwrap());
        assert!(!verify_lipschitz_lmi(&i2, &i2, 0.5, &t).unwrap());
        // AᵀPA = [[0,0],[0,16]] ≼ diag(4,1)? No: 16 > 1.
        let a = m(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let p = Matrix::diag(&[4.0, 1.0]);
        let atpa = a.transpose().matmul(&p).matmul(&a);
        assert_eq!(atpa, Matrix::diag(&[0.0, 16.0]));
        assert!(!verify_lipschitz_lmi(&a, &p, 1.0, &t).unwrap());
        // With the weights swapped, AᵀPA = diag(0, 4) ≼ diag(1, 4).
        assert!(verify_lipschitz_lmi(&a, &Matrix::diag(&[1.0, 4.0]), 1.0, &t).unwrap());
        assert_eq!(
            verify_lipschitz_lmi(&a, &Matrix::diag(&[1.0, 0.0]), 1.0, &t),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn avg_lmi_examples() {
        let t = tol();
        let i2 = Matrix::identity(2);
        for eta in [0.1, 0.5, 0.9] {
            assert!(verify_avg_lmi(&i2, &i2, eta, &t).unwrap());
        }
        assert!(!verify_avg_lmi(&i2.scale(-1.0), &i2, 0.9, &t).unwrap());
        assert!(verify_avg_lmi(&i2.scale(0.5), &i2, 0.5, &t).unwrap());
        assert!(verify_avg_lmi(&i2, &i2, 1.0, &t).is_err());
    }

    #[test]
    fn spc_lmi_examples() {
        let t = tol();
        let i2 = Matrix::identity(2);
        for kappa in [0.1, 0.5, 0.9] {
            assert!(verify_spc_lmi(&i2, &i2, kappa, &t).unwrap());
        }
        assert!(verify_spc_lmi(&i2.scale(-1.0), &i2, 0.5, &t).unwrap());
        assert!(!verify_spc_lmi(&i2.scale(2.0), &i2, 0.1, &t).unwrap());
    }

    #[test]
    fn min_kappa_examples() {
        assert_eq!(min_kappa(ComplexScalar::new(0.0, 0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(min_kappa(ComplexScalar::new(-3.0, 0.0)).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(min_kappa(ComplexScalar::new(-0.5, -0.5)).unwrap(), 0.0);
        assert_eq!(min_kappa(ComplexScalar::new(1.0, 0.0)).unwrap(), 0.0);
        assert!(matches!(min_kappa(ComplexScalar::new(1.0, 1.0)), Err(Error::NoKappa { .. })));
        assert!(matches!(min_kappa(ComplexScalar::new(2.0, 0.0)), Err(Error::NoKappa { .. })));
    }

    #[test]
    fn classify_identity() {
        let r = classify(&Matrix::identity(3)).unwrap();
        assert!(!r.is_contraction());
        assert!(r.is_nonexpansive() && r.is_averaged() && r.is_spc());
        assert!(r.nonexpansive.certificate.is_some());
    }

    #[test]
    fn classify_minus_identity() {
        let r = classify(&Matrix::identity(2).scale(-1.0)).unwrap();
        assert!(r.is_nonexpansive());
        assert!(!r.is_averaged());
        assert!(r.is_spc());
        let kappa = r.pseudocontractive.witness.unwrap();
        assert!(kappa > 0.0 && kappa < 1.0);
    }

    #[test]
    fn classify_jordan_all_false() {
        let r = classify(&m(&[&[1.0, 1.0], &[0.0, 1.0]])).unwrap();
        assert!(!r.is_contraction() && !r.is_nonexpansive() && !r.is_averaged() && !r.is_spc());
        assert!(r.borderline_flags.iter().any(|f| f.note == "eigenvalue 1 not semi-simple"));
    }

    #[test]
    fn classify_game_operator_not_spc() {
        let r = classify(&m(&[&[1.0, -1.0], &[1.0, 1.0]])).unwrap();
        assert!(!r.is_spc());
        assert!(!r.is_nonexpansive());
    }

    #[test]
    fn defective_interior_eigenvalue_is_harmless() {
        // Jordan block at 0.5 lies strictly inside the unit disk.
        let a = m(&[&[0.5, 1.0], &[0.0, 0.5]]);
        let r = classify(&a).unwrap();
        assert!(r.is_contraction() && r.is_nonexpansive() && r.is_averaged() && r.is_spc());
        let l = r.contraction.witness.unwrap();
        assert!(l > 0.5 && l < 1.0);
        assert!(r.borderline_flags.is_empty(), "{:?}", r.borderline_flags);
        for class in OperatorClass::ALL {
            assert!(r.verdict(class).certificate.is_some(), "{class}");
        }
    }

    #[test]
    fn symmetric_nonexpansive_identity_certificate() {
        let a = m(&[&[0.2, 0.5], &[0.5, -0.3]]);
        assert!(verify_lipschitz_lmi(&a, &Matrix::identity(2), 1.0, &tol()).unwrap());
        let p = construct_certificate(&a, OperatorClass::Nonexpansive, 1.0, &tol()).unwrap();
        assert!(verify_lipschitz_lmi(&a, &p, 1.0, &tol()).unwrap());
    }

    #[test]
    fn certificate_for_rotation_with_interior_part() {
        // Unit-modulus rotation coupled to a contracting block.
        let (c, s) = (0.6, 0.8);
        let a = m(&[
            &[c, -s, 0.3, 0.0],
            &[s, c, 0.0, 0.7],
            &[0.0, 0.0, 0.4, 0.2],
            &[0.0, 0.0, -0.1, -0.5],
        ]);
        let p = construct_certificate(&a, OperatorClass::Nonexpansive, 1.0, &tol()).unwrap();
        assert!(linalg::is_positive_definite(&p, &tol()).unwrap());
        assert!(verify_lipschitz_lmi(&a, &p, 1.0, &tol()).unwrap());
        assert!(!verify_lipschitz_lmi(&a, &Matrix::identity(4), 1.0, &tol()).unwrap());
    }

    #[test]
    fn minus_identity_spc_certificate() {
        let a = Matrix::identity(2).scale(-1.0);
        let p = construct_certificate(&a, OperatorClass::Pseudocontractive, 0.5, &tol()).unwrap();
        assert!(verify_spc_lmi(&a, &p, 0.5, &tol()).unwrap());
        assert!(verify_spc_lmi(&a, &Matrix::identity(2), 0.5, &tol()).unwrap());
    }

    #[test]
    fn certificate_rejects_wrong_class() {
        let a = Matrix::identity(2).scale(-1.0);
        assert_eq!(
            construct_certificate(&a, OperatorClass::Averaged, 0.5, &tol()),
            Err(Error::NotInClass { class: "averaged" })
        );
    }

    #[test]
    fn stein_solution_satisfies_equation() {
        let b = m(&[&[0.5, 0.3], &[-0.2, 0.7]]);
        let x = stein_solve(&b).unwrap();
        let lhs = b.transpose().matmul(&x).matmul(&b).sub(&x);
        assert!(lhs.add(&Matrix::identity(2)).max_abs() < 1e-12);
    }
}
