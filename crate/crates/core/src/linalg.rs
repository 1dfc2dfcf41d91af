//! Numerical kernels: nonsymmetric eigenvalues (Hessenberg reduction followed
//! by Francis double-shift QR to real Schur form), singular values via
//! one-sided Jacobi, LU solves and symmetric eigenvalues via cyclic Jacobi.

use crate::error::{Error, Result};
use crate::matrix::{ComplexScalar, Matrix};

/// Numerical tolerances shared by every module. All are relative to a natural
/// scale of the quantity they test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub eig: f64,
    pub sym: f64,
    pub pd: f64,
    pub solve: f64,
    pub rank: f64,
    pub cluster: f64,
    pub boundary: f64,
    pub psd: f64,
    /// Added to the infimum of an open-interval witness (η, κ, ℓ).
    pub witness_margin: f64,
    /// Largest condition number accepted for a certificate similarity.
    pub max_condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig: 1e-9,
            sym: 1e-12,
            pd: 1e-10,
            solve: 1e-10,
            rank: 1e-10,
            cluster: 1e-7,
            boundary: 1e-8,
            psd: 1e-9,
            witness_margin: 1e-6,
            max_condition: 1e12,
        }
    }
}

const MAX_QR_ITER_PER_EIGENVALUE: usize = 200;
const MAX_JACOBI_SWEEPS: usize = 80;

/// All `n` eigenvalues of `a`, repeated according to algebraic multiplicity.
/// Non-real eigenvalues are returned as exact conjugate pairs.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<ComplexScalar>> {
    a.check_operator()?;
    let mut h = a.clone();
    hessenberg_in_place(&mut h);
    hqr(&mut h)
}

/// Householder reduction to upper Hessenberg form (orthogonal similarity).
fn hessenberg_in_place(h: &mut Matrix) {
    let n = h.dim();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
#[allow(clippy::many_single_char_names)]
fn hqr(h: &mut Matrix) -> Result<Vec<ComplexScalar>> {
    let nn = h.dim();
    let mut wr = vec![0.0; nn];
    let mut wi = vec![0.0; nn];
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    while n >= 0 {
        let nu = n as usize;
        // Look for a single small sub-diagonal element.
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            h[(nu, nu)] += exshift;
            wr[nu] = h[(nu, nu)];
            wi[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            x = h[(nu, nu)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                wr[nu - 1] = x + z;
                wr[nu] = wr[nu - 1];
                if z != 0.0 {
                    wr[nu] = x - w / z;
                }
                wi[nu - 1] = 0.0;
                wi[nu] = 0.0;
            } else {
                wr[nu - 1] = x + p;
                wr[nu] = x + p;
                wi[nu - 1] = z;
                wi[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            // Exceptional shifts, repeated while the iteration stalls.
            if iter % 10 == 0 && iter % 30 != 0 && iter > 0 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter % 30 == 0 && iter > 0 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > MAX_QR_ITER_PER_EIGENVALUE {
                return Err(Error::NoConvergence {
                    algorithm: "Francis QR",
                    iterations: iter,
                });
            }

            // Look for two consecutive small sub-diagonal elements.
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=n, columns m..=n.
            let mut k = m;
            while k < nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }

    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| ComplexScalar::new(re, im))
        .collect())
}

/// Thin singular value decomposition `A = U Σ Vᵀ` of an `m × n` matrix with `m ≥ n`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    /// Singular values in non-increasing order.
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

/// One-sided (Hestenes) Jacobi SVD. For `m < n` the transpose is decomposed
/// and the factors swapped.
pub fn svd(a: &Matrix) -> Result<Svd> {
    a.check_finite()?;
    if a.rows() < a.cols() {
        let t = svd(&a.transpose())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let (m, n) = (a.rows(), a.cols());
    let mut u = a.clone();
    let mut v = Matrix::identity(n);
    let eps = f64::EPSILON;
    let negligible = (eps * a.frobenius_norm()).powi(2);
    let orthogonal = (m as f64).sqrt() * eps;

    let mut converged = n < 2;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= orthogonal * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence {
            algorithm: "one-sided Jacobi SVD",
            iterations: MAX_JACOBI_SWEEPS,
        });
    }

    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|j| ((0..m).map(|i| u[(i, j)] * u[(i, j)]).sum::<f64>().sqrt(), j))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut u_out = Matrix::zeros(m, n);
    let mut v_out = Matrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &(sv, src)) in order.iter().enumerate() {
        sigma.push(sv);
        for i in 0..m {
            u_out[(i, dst)] = if sv > 0.0 { u[(i, src)] / sv } else { 0.0 };
        }
        for i in 0..n {
            v_out[(i, dst)] = v[(i, src)];
        }
    }
    Ok(Svd {
        u: u_out,
        sigma,
        v: v_out,
    })
}

pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    Ok(svd(a)?.sigma)
}

/// Numerical rank: the number of singular values above `tol · σ_max`.
pub fn rank(a: &Matrix, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::parameter("rank tolerance must be positive"));
    }
    let sigma = singular_values(a)?;
    Ok(count_above(&sigma, tol))
}

fn count_above(sigma: &[f64], tol: f64) -> usize {
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol * smax).count()
}

/// Orthonormal basis (as columns) of the `dim`-dimensional subspace spanned by
/// the right singular vectors with the smallest singular values.
pub fn trailing_right_singular_vectors(a: &Matrix, dim: usize) -> Result<Matrix> {
    let d = svd(a)?;
    let n = d.v.cols();
    Ok(d.v.block(0, n - dim, d.v.rows(), dim))
}

/// Orthonormal basis (as columns) of the dominant `dim`-dimensional column space.
pub fn leading_left_singular_vectors(a: &Matrix, dim: usize) -> Result<Matrix> {
    let d = svd(a)?;
    Ok(d.u.block(0, 0, d.u.rows(), dim))
}

/// 2-norm condition number `σ_max / σ_min` (infinite when singular).
pub fn condition_number(a: &Matrix) -> Result<f64> {
    let sigma = singular_values(a)?;
    let smax = sigma.first().copied().unwrap_or(0.0);
    let smin = sigma.last().copied().unwrap_or(0.0);
    Ok(if smin == 0.0 { f64::INFINITY } else { smax / smin })
}

/// LU factorisation with partial pivoting, `P A = L U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Lu> {
        a.check_operator()?;
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = n as f64 * f64::EPSILON * a.max_abs();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= threshold {
                let r = rank(a, 1e-12).unwrap_or(0);
                return Err(Error::RankDeficient { rank: r, dim: n });
            }
            if piv != k {
                perm.swap(k, piv);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }
}

/// Solves `A x = b`, rejecting systems whose residual exceeds
/// `tol · (‖A‖·‖x‖ + ‖b‖)`.
pub fn solve_linear(a: &Matrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    a.check_operator()?;
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.len(),
        });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::parameter("right-hand side contains a non-finite value"));
    }
    let x = Lu::factor(a)?.solve(b);
    let ax = a.mul_vec(&x);
    let res = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let bound = tol * (a.frobenius_norm() * crate::matrix::norm2(&x) + crate::matrix::norm2(b));
    if !(res <= bound) {
        let r = rank(a, tol).unwrap_or(0);
        return Err(Error::RankDeficient { rank: r, dim: a.dim() });
    }
    Ok(x)
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let lu = Lu::factor(a)?;
    let n = a.dim();
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        inv.set_column(j, &lu.solve(&e));
    }
    Ok(inv)
}

/// Eigenvalues of the symmetric part of `a`, ascending (cyclic Jacobi).
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    a.check_operator()?;
    let n = a.dim();
    let mut m = a.symmetric_part();
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut converged = false;
    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].abs())
            .fold(0.0, f64::max);
        if off > 1e-12 * scale {
            return Err(Error::NoConvergence {
                algorithm: "symmetric Jacobi",
                iterations: MAX_JACOBI_SWEEPS,
            });
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `P ≻ 0`: symmetric within `tol.sym · max|P|` and smallest eigenvalue above
/// `tol.pd` times the largest eigenvalue magnitude.
pub fn is_positive_definite(p: &Matrix, tol: &Tolerances) -> Result<bool> {
    p.check_operator()?;
    let scale = p.max_abs();
    if scale == 0.0 || p.asymmetry() > tol.sym * scale {
        return Ok(false);
    }
    let ev = symmetric_eigenvalues(p)?;
    let lmax = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ev[0] > tol.pd * lmax)
}

/// Smallest eigenvalue of a symmetric matrix relative to `scale`; used by the
/// LMI checks (`M ≽ 0` up to `−tol·scale`).
pub fn is_psd_within(m: &Matrix, scale: f64, tol: f64) -> Result<bool> {
    let ev = symmetric_eigenvalues(m)?;
    let lmax = ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(ev[0] >= -tol * scale.max(lmax))
}

/// Upper-triangular `R` with `P = RᵀR`.
pub fn cholesky_upper(p: &Matrix) -> Result<Matrix> {
    p.check_operator()?;
    let n = p.dim();
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = p[(j, j)];
        for k in 0..j {
            d -= r[(k, j)] * r[(k, j)];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        r[(j, j)] = djj;
        for i in j + 1..n {
            let mut v = 0.5 * (p[(j, i)] + p[(i, j)]);
            for k in 0..j {
                v -= r[(k, j)] * r[(k, i)];
            }
            r[(j, i)] = v / djj;
        }
    }
    Ok(r)
}
