//! Banach–Picard, Krasnoselskij and Mann iterations on `x ↦ Ax`.
//!
//! All three are instances of `x(k+1) = (1 − α_k)x(k) + α_k A x(k)` with
//! `α_k ≡ 1`, `α_k ≡ α` and a vanishing, non-summable `α_k` respectively.
//! Runs stop early once convergence or divergence is detected; otherwise the
//! verdict is decided at `max_iter` from the tail of the trajectory.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, Matrix};

pub const DEFAULT_MAX_ITER: usize = 100_000;

type StepFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ScheduleKind {
    Constant(f64),
    /// `α_k = c / (k + 1)`.
    Harmonic(f64),
    /// `α_k = c / √(k + 1)`.
    SqrtHarmonic(f64),
    /// Caller-supplied sequence. `mann_valid` asserts `α_k → 0` and
    /// `Σ α_k = ∞`; it cannot be checked here.
    Custom { step: StepFn, mann_valid: bool },
}

impl fmt::Debug for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleKind::Constant(a) => write!(f, "Constant({a})"),
            ScheduleKind::Harmonic(c) => write!(f, "Harmonic({c})"),
            ScheduleKind::SqrtHarmonic(c) => write!(f, "SqrtHarmonic({c})"),
            ScheduleKind::Custom { mann_valid, .. } => write!(f, "Custom {{ mann_valid: {mann_valid} }}"),
        }
    }
}

/// Step-size sequence with every emitted value in `(0, alpha_max]`.
#[derive(Debug, Clone)]
pub struct StepSchedule {
    kind: ScheduleKind,
    alpha_max: f64,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::parameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl StepSchedule {
    pub fn constant(alpha: f64) -> Result<Self> {
        let alpha = positive("alpha", alpha)?;
        Ok(StepSchedule {
            kind: ScheduleKind::Constant(alpha),
            alpha_max: alpha.max(1.0),
        })
    }

    pub fn harmonic(c: f64) -> Result<Self> {
        Ok(StepSchedule {
            kind: ScheduleKind::Harmonic(positive("c", c)?),
            alpha_max: 1.0,
        })
    }

    pub fn sqrt_harmonic(c: f64) -> Result<Self> {
        Ok(StepSchedule {
            kind: ScheduleKind::SqrtHarmonic(positive("c", c)?),
            alpha_max: 1.0,
        })
    }

    pub fn custom(step: impl Fn(usize) -> f64 + Send + Sync + 'static, alpha_max: f64, mann_valid: bool) -> Result<Self> {
        Ok(StepSchedule {
            kind: ScheduleKind::Custom {
                step: Arc::new(step),
                mann_valid,
            },
            alpha_max: positive("alpha_max", alpha_max)?,
        })
    }

    pub fn with_alpha_max(mut self, alpha_max: f64) -> Result<Self> {
        self.alpha_max = positive("alpha_max", alpha_max)?;
        Ok(self)
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ScheduleKind::Constant(_))
    }

    pub fn is_mann_valid(&self) -> bool {
        match &self.kind {
            ScheduleKind::Constant(_) => false,
            ScheduleKind::Harmonic(_) | ScheduleKind::SqrtHarmonic(_) => true,
            ScheduleKind::Custom { mann_valid, .. } => *mann_valid,
        }
    }

    fn raw(&self, k: usize) -> f64 {
        let kp1 = (k + 1) as f64;
        match &self.kind {
            ScheduleKind::Constant(a) => *a,
            ScheduleKind::Harmonic(c) => c / kp1,
            ScheduleKind::SqrtHarmonic(c) => c / kp1.sqrt(),
            ScheduleKind::Custom { step, .. } => step(k),
        }
    }

    /// `α_k`, clamped to `alpha_max`. Fails only for custom sequences that
    /// emit a non-positive or non-finite value.
    pub fn step(&self, k: usize) -> Result<f64> {
        let a = self.raw(k);
        if a > 0.0 && a.is_finite() {
            Ok(a.min(self.alpha_max))
        } else {
            Err(Error::parameter(format!("schedule emitted invalid step {a} at k = {k}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvergenceStatus {
    Converged { limit: Vec<f64> },
    Diverged,
    Oscillating,
    Undecided,
}

impl ConvergenceStatus {
    pub fn name(&self) -> &'static str {
        match self {
            ConvergenceStatus::Converged { .. } => "converged",
            ConvergenceStatus::Diverged => "diverged",
            ConvergenceStatus::Oscillating => "oscillating",
            ConvergenceStatus::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    pub final_fix_residual: f64,
    pub final_step_residual: f64,
    /// `‖x(K)‖ / max_{k ≤ K/2} ‖x(k)‖`.
    pub norm_growth: f64,
    /// Angle in radians swept by the direction of `(I − A)x(k)` over the second
    /// half of the run.
    pub rotation: f64,
    /// Smallest fix-point residual over the trailing window.
    pub trailing_min_fix_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceVerdict {
    pub status: ConvergenceStatus,
    pub iterations_used: usize,
    pub evidence: Evidence,
}

impl ConvergenceVerdict {
    pub fn is_converged(&self) -> bool {
        matches!(self.status, ConvergenceStatus::Converged { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConfig {
    pub conv_tol: f64,
    pub window: usize,
    pub divergence_factor: f64,
    pub oscillation_factor: f64,
    /// Relative norm increase over the second half that counts as growth.
    pub growth_tol: f64,
    /// Fraction of the run forming the trailing window.
    pub trailing_fraction: f64,
    /// Store every `store_every`-th iterate (the final one is always stored).
    pub store_every: usize,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            conv_tol: 1e-8,
            window: 50,
            divergence_factor: 1e12,
            oscillation_factor: 10.0,
            growth_tol: 1e-2,
            trailing_fraction: 0.1,
            store_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Stored iterates as `(k, x(k))`.
    pub iterates: Vec<(usize, Vec<f64>)>,
    /// `‖x(k+1) − x(k)‖` for every step taken.
    pub residuals: Vec<f64>,
    /// `‖(I − A)x(k)‖` for every iterate.
    pub fix_residuals: Vec<f64>,
    /// `‖x(k)‖` for every iterate.
    pub norms: Vec<f64>,
    pub verdict: ConvergenceVerdict,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        &self.iterates.last().expect("trajectory holds x(0)").1
    }
}

pub fn picard(a: &Matrix, x0: &[f64], max_iter: usize) -> Result<Trajectory> {
    picard_with(a, x0, max_iter, &DetectionConfig::default())
}

pub fn picard_with(a: &Matrix, x0: &[f64], max_iter: usize, cfg: &DetectionConfig) -> Result<Trajectory> {
    run(a, x0, max_iter, cfg, |_| Ok(1.0))
}

pub fn krasnoselskij(a: &Matrix, x0: &[f64], alpha: f64, max_iter: usize) -> Result<Trajectory> {
    krasnoselskij_with(a, x0, alpha, max_iter, &DetectionConfig::default())
}

pub fn krasnoselskij_with(a: &Matrix, x0: &[f64], alpha: f64, max_iter: usize, cfg: &DetectionConfig) -> Result<Trajectory> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::parameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    run(a, x0, max_iter, cfg, |_| Ok(alpha))
}

pub fn mann(a: &Matrix, x0: &[f64], schedule: &StepSchedule, max_iter: usize) -> Result<Trajectory> {
    mann_with(a, x0, schedule, max_iter, &DetectionConfig::default())
}

pub fn mann_with(a: &Matrix, x0: &[f64], schedule: &StepSchedule, max_iter: usize, cfg: &DetectionConfig) -> Result<Trajectory> {
    if !schedule.is_mann_valid() {
        return Err(Error::parameter(
            "Mann iteration needs a vanishing, non-summable schedule (harmonic, sqrt-harmonic or a Mann-valid custom sequence)",
        ));
    }
    run(a, x0, max_iter, cfg, |k| schedule.step(k))
}

/// Relaxed iteration with an arbitrary step sequence; no Mann-validity check.
pub fn relaxed_with(a: &Matrix, x0: &[f64], schedule: &StepSchedule, max_iter: usize, cfg: &DetectionConfig) -> Result<Trajectory> {
    run(a, x0, max_iter, cfg, |k| schedule.step(k))
}

fn run(
    a: &Matrix,
    x0: &[f64],
    max_iter: usize,
    cfg: &DetectionConfig,
    mut alpha: impl FnMut(usize) -> Result<f64>,
) -> Result<Trajectory> {
    a.check_operator()?;
    let n = a.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if let Some(i) = x0.iter().position(|v| !v.is_finite()) {
        return Err(Error::parameter(format!("x0[{i}] is not finite")));
    }
    if cfg.window == 0 || cfg.store_every == 0 || !(cfg.conv_tol > 0.0) {
        return Err(Error::parameter("detection window, stride and tolerance must be positive"));
    }

    let mut x = x0.to_vec();
    let mut ax = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut r_prev: Option<Vec<f64>> = None;
    let mut rotation = 0.0;

    let mut iterates = vec![(0, x.clone())];
    let mut residuals = Vec::new();
    let mut fix_residuals = Vec::new();
    let mut norms = Vec::new();

    let norm0 = norm2(x0);
    let blowup = cfg.divergence_factor * (1.0 + norm0);
    let mut streak = 0usize;
    let mut status = None;
    let mut k = 0usize;

    loop {
        a.mul_vec_into(&x, &mut ax);
        for i in 0..n {
            r[i] = x[i] - ax[i];
        }
        let xn = norm2(&x);
        let fr = norm2(&r);
        norms.push(xn);
        fix_residuals.push(fr);

        if !xn.is_finite() || !fr.is_finite() || xn > blowup {
            status = Some(ConvergenceStatus::Diverged);
            break;
        }
        if fr == 0.0 {
            status = Some(ConvergenceStatus::Converged { limit: x.clone() });
            break;
        }
        if fr <= cfg.conv_tol * (1.0 + xn) {
            streak += 1;
            if streak >= cfg.window {
                status = Some(ConvergenceStatus::Converged { limit: x.clone() });
                break;
            }
        } else {
            streak = 0;
        }
        if 2 * k >= max_iter {
            if let Some(prev) = &r_prev {
                let denom = fr * norm2(prev);
                if denom > 0.0 {
                    rotation += (dot(&r, prev) / denom).clamp(-1.0, 1.0).acos();
                }
            }
            r_prev = Some(r.clone());
        }
        if k == max_iter {
            break;
        }

        let step = alpha(k)?;
        let mut dx2 = 0.0;
        for i in 0..n {
            let dx = -step * r[i];
            x[i] += dx;
            dx2 += dx * dx;
        }
        residuals.push(dx2.sqrt());
        k += 1;
        if k.is_multiple_of(cfg.store_every) {
            iterates.push((k, x.clone()));
        }
    }
    if iterates.last().map(|(j, _)| *j) != Some(k) {
        iterates.push((k, x.clone()));
    }

    let kk = k;
    let head_max = norms[..=kk / 2].iter().copied().fold(0.0, f64::max);
    let norm_growth = if head_max > 0.0 { norms[kk] / head_max } else { 1.0 };
    let tail_len = ((kk as f64 * cfg.trailing_fraction).ceil() as usize).clamp(1, kk + 1);
    let tail = kk + 1 - tail_len..=kk;
    let trailing_min = fix_residuals[tail.clone()].iter().copied().fold(f64::INFINITY, f64::min);
    let tail_relative_min = tail
        .map(|j| fix_residuals[j] / (1.0 + norms[j]))
        .fold(f64::INFINITY, f64::min);

    let status = status.unwrap_or({
        if norm_growth > 1.0 + cfg.growth_tol {
            ConvergenceStatus::Diverged
        } else if tail_relative_min > cfg.oscillation_factor * cfg.conv_tol {
            ConvergenceStatus::Oscillating
        } else {
            ConvergenceStatus::Undecided
        }
    });

    Ok(Trajectory {
        verdict: ConvergenceVerdict {
            status,
            iterations_used: kk,
            evidence: Evidence {
                final_fix_residual: fix_residuals[kk],
                final_step_residual: residuals.last().copied().unwrap_or(0.0),
                norm_growth,
                rotation,
                trailing_min_fix_residual: trailing_min,
            },
        },
        iterates,
        residuals,
        fix_residuals,
        norms,
    })
}

// ---------------------------------------------------------------------------
// Closed forms for the non-convergent canonical blocks

/// `y(k)` for `y(k+1) = y(k) + (c, 0)·1` on the block `[[1, 1], [0, 1]]` with
/// unit steps: `(y1(0) + k·c, c)`.
pub fn oracle_jordan_growth(c: f64, y1_0: f64, k: usize) -> [f64; 2] {
    [y1_0 + k as f64 * c, c]
}

/// `y(k)` for the Mann iteration on `[[1, 1], [0, 1]]` under `schedule`:
/// `(y1(0) + c·Σ_{h<k} α_h, c)`.
pub fn oracle_jordan_growth_scheduled(c: f64, y1_0: f64, schedule: &StepSchedule, k: usize) -> Result<[f64; 2]> {
    let mut sum = 0.0;
    for h in 0..k {
        sum += schedule.step(h)?;
    }
    Ok([y1_0 + c * sum, c])
}

/// `(∏_{h=0}^{k} (1 + ε α_h)) s0`, the state after `k + 1` steps on the scalar
/// block `1 + ε`.
pub fn oracle_scalar_product(epsilon: f64, schedule: &StepSchedule, s0: f64, k: usize) -> Result<f64> {
    let mut p = s0;
    for h in 0..=k {
        p *= 1.0 + epsilon * schedule.step(h)?;
    }
    Ok(p)
}

/// `(∏ ρ_h) R(Σ θ_h) z0` over `h = 0..=k`, the state after `k + 1` steps on the
/// block `[[σ, −ω], [ω, σ]]`, with `ε = σ − 1`,
/// `ρ_h = √((1 + εα_h)² + ω²α_h²)` and `θ_h = atan2(ωα_h, 1 + εα_h)`.
pub fn oracle_rotation(sigma: f64, omega: f64, schedule: &StepSchedule, z0: [f64; 2], k: usize) -> Result<[f64; 2]> {
    let eps = sigma - 1.0;
    let mut rho = 1.0;
    let mut theta = 0.0;
    for h in 0..=k {
        let a = schedule.step(h)?;
        let re = 1.0 + eps * a;
        let im = omega * a;
        rho *= re.hypot(im);
        theta += im.atan2(re);
    }
    let (s, c) = theta.sin_cos();
    Ok([rho * (c * z0[0] - s * z0[1]), rho * (s * z0[0] + c * z0[1])])
}
