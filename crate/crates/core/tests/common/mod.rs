#![allow(dead_code)]

use fixpoint_core::{ComplexScalar, Matrix};
use rand::Rng;

/// Real Jordan-form building blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Block {
    Real(f64),
    /// `σ ± jω`, `ω > 0`.
    Complex(f64, f64),
    /// 2×2 Jordan block at a real eigenvalue with coupling `t`.
    JordanReal(f64, f64),
    /// 4×4 real Jordan block of the pair `σ ± jω` with coupling `t`.
    JordanComplex(f64, f64, f64),
}

impl Block {
    pub fn dim(self) -> usize {
        match self {
            Block::Real(_) => 1,
            Block::Complex(..) | Block::JordanReal(..) => 2,
            Block::JordanComplex(..) => 4,
        }
    }

    pub fn eigenvalues(self) -> Vec<ComplexScalar> {
        let c = ComplexScalar::new;
        match self {
            Block::Real(a) => vec![c(a, 0.0)],
            Block::Complex(s, w) => vec![c(s, w), c(s, -w)],
            Block::JordanReal(a, _) => vec![c(a, 0.0); 2],
            Block::JordanComplex(s, w, _) => vec![c(s, w), c(s, w), c(s, -w), c(s, -w)],
        }
    }

    pub fn is_defective(self) -> bool {
        matches!(self, Block::JordanReal(..) | Block::JordanComplex(..))
    }
}

pub fn block_diagonal(blocks: &[Block]) -> Matrix {
    let n: usize = blocks.iter().map(|b| b.dim()).sum();
    let mut d = Matrix::zeros(n, n);
    let mut o = 0;
    for &b in blocks {
        match b {
            Block::Real(a) => d[(o, o)] = a,
            Block::Complex(s, w) => {
                d.set_block(o, o, &Matrix::from_rows(&[[s, -w], [w, s]]).unwrap());
            }
            Block::JordanReal(a, t) => {
                d.set_block(o, o, &Matrix::from_rows(&[[a, t], [0.0, a]]).unwrap());
            }
            Block::JordanComplex(s, w, t) => {
                let r = Matrix::from_rows(&[[s, -w], [w, s]]).unwrap();
                d.set_block(o, o, &r);
                d.set_block(o + 2, o + 2, &r);
                d.set_block(o, o + 2, &Matrix::identity(2).scale(t));
            }
        }
        o += b.dim();
    }
    d
}

pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for q in &cols {
                let c: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut q = Matrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        q.set_column(j, c);
    }
    q
}

/// `S D S⁻¹` with `S = Q1 diag(s) Q2ᵀ`, `s ∈ [1, 3]`, so `cond(S) ≤ 3` and the
/// inverse is available in closed form.
pub fn with_spectrum<R: Rng>(blocks: &[Block], rng: &mut R) -> Matrix {
    let d = block_diagonal(blocks);
    let n = d.dim();
    let q1 = random_orthogonal(n, rng);
    let q2 = random_orthogonal(n, rng);
    let s: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..3.0)).collect();
    let inv: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
    let sim = q1.matmul(&Matrix::diag(&s)).matmul(&q2.transpose());
    let sim_inv = q2.matmul(&Matrix::diag(&inv)).matmul(&q1.transpose());
    sim.matmul(&d).matmul(&sim_inv)
}

/// Point on the boundary of the disk with the given centre and radius, at
/// angle `phi`.
pub fn on_circle(center: f64, radius: f64, phi: f64) -> ComplexScalar {
    ComplexScalar::new(center + radius * phi.cos(), radius * phi.sin())
}

pub fn block_at(z: ComplexScalar) -> Block {
    if z.im.abs() < 1e-12 {
        Block::Real(z.re)
    } else {
        Block::Complex(z.re, z.im.abs())
    }
}

/// Characteristic polynomial roots of the 3-agent Laplacian
/// `[[1, −1/2, −1/2], [0, 1, −1], [−1, 0, 1]]`: `det(λI − L) = λ³ − 3λ² + 5/2 λ`.
pub fn laplacian_roots_by_formula() -> [ComplexScalar; 3] {
    let disc: f64 = 9.0 - 10.0;
    let half = ComplexScalar::new(1.5, 0.0);
    let s = ComplexScalar::new(0.0, (-disc).sqrt() / 2.0);
    [ComplexScalar::new(0.0, 0.0), half + s, half - s]
}

/// Determinant by cofactor expansion, independent of the LU kernel.
pub fn det_cofactor(m: &Matrix) -> f64 {
    let n = m.dim();
    if n == 1 {
        return m[(0, 0)];
    }
    let mut total = 0.0;
    for j in 0..n {
        let minor = Matrix::from_fn(n - 1, n - 1, |r, c| m[(r + 1, if c < j { c } else { c + 1 })]);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * m[(0, j)] * det_cofactor(&minor);
    }
    total
}
