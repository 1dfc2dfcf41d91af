//! Browser bindings for the demo page in `www/`. Each export takes plain text
//! in the CLI's file formats and returns a JSON document for the page to draw.

use fixpoint_core::io::{parse_graph, parse_matrix, parse_vector};
use fixpoint_core::{
    classify, consensus_operator, game_iteration_operator, is_consensus, laplacian, mann_with, DetectionConfig,
    DiskRegion, Error, OperatorClass, StepSchedule, Trajectory, ZeroSumGame,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Points kept per curve.
const CURVE_POINTS: usize = 400;

#[derive(Debug, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub semisimple: bool,
}

#[derive(Debug, Serialize)]
pub struct Disk {
    pub label: String,
    pub center: f64,
    pub radius: f64,
}

#[derive(Debug, Serialize)]
pub struct ClassView {
    pub class: String,
    pub holds: bool,
    pub witness: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SpectrumView {
    pub eigenvalues: Vec<Eigenvalue>,
    pub spectral_radius: f64,
    pub classes: Vec<ClassView>,
    pub disks: Vec<Disk>,
    pub flags: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub k: Vec<usize>,
    pub value: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ConsensusView {
    pub disagreement: Curve,
    pub verdict: String,
    pub iterations: usize,
    pub consensus: bool,
    pub strongly_connected: bool,
    pub final_state: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct GameView {
    /// Stored iterates `(k, x(k))`.
    pub states: Vec<(usize, Vec<f64>)>,
    pub residual: Curve,
    pub verdict: String,
    pub iterations: usize,
    pub eigenvalues: Vec<Eigenvalue>,
}

fn eigenvalue_views(s: &fixpoint_core::Spectrum) -> Vec<Eigenvalue> {
    s.clusters
        .iter()
        .map(|c| Eigenvalue {
            re: c.value.re,
            im: c.value.im,
            multiplicity: c.algebraic_multiplicity,
            semisimple: c.is_semisimple(),
        })
        .collect()
}

fn disk(label: &str, d: DiskRegion) -> Disk {
    Disk {
        label: label.into(),
        center: d.center,
        radius: d.radius,
    }
}

/// Spectrum of the matrix in `text` with the four verdicts and the disks of
/// the reported witnesses.
pub fn spectrum_view(text: &str) -> Result<SpectrumView, Error> {
    let a = parse_matrix(text)?;
    let r = classify(&a)?;
    let mut disks = vec![disk("unit", DiskRegion::centered(1.0)?)];
    if let Some(l) = r.contraction.witness.filter(|l| *l > 0.0) {
        disks.push(disk("contraction", DiskRegion::centered(l)?));
    }
    if let Some(eta) = r.averaged.witness {
        disks.push(disk("averaged", DiskRegion::averaged(eta)?));
    }
    if let Some(kappa) = r.pseudocontractive.witness {
        disks.push(disk("pseudocontractive", DiskRegion::pseudocontractive(kappa)?));
    }
    Ok(SpectrumView {
        eigenvalues: eigenvalue_views(&r.spectrum),
        spectral_radius: r.spectrum.spectral_radius,
        classes: OperatorClass::ALL
            .iter()
            .map(|&c| {
                let v = r.verdict(c);
                ClassView {
                    class: c.to_string(),
                    holds: v.holds,
                    witness: v.witness,
                }
            })
            .collect(),
        disks,
        flags: r.borderline_flags.iter().map(|f| format!("{}: {}", f.class, f.note)).collect(),
    })
}

fn schedule(kind: &str, c: f64) -> Result<StepSchedule, Error> {
    match kind {
        "harmonic" => StepSchedule::harmonic(c),
        "sqrt-harmonic" => StepSchedule::sqrt_harmonic(c),
        other => Err(Error::Parameter(format!("unknown schedule `{other}`"))),
    }
}

fn curve(values: &[f64]) -> Curve {
    let stride = values.len().div_ceil(CURVE_POINTS).max(1);
    let mut k: Vec<usize> = (0..values.len()).step_by(stride).collect();
    if let Some(&last) = k.last() {
        if last + 1 != values.len() {
            k.push(values.len() - 1);
        }
    }
    let value = k.iter().map(|&i| values[i]).collect();
    Curve { k, value }
}

fn config(max_iter: usize) -> DetectionConfig {
    DetectionConfig {
        store_every: max_iter.div_ceil(CURVE_POINTS).max(1),
        ..DetectionConfig::default()
    }
}

/// Mann consensus dynamics on the edge list in `graph`, recording the
/// disagreement `‖Lx(k)‖`.
pub fn consensus_view(graph: &str, x0: &str, kind: &str, c: f64, max_iter: usize) -> Result<ConsensusView, Error> {
    let g = parse_graph(graph)?;
    let a = consensus_operator(&laplacian(&g))?;
    let x0 = if x0.trim().is_empty() {
        fixpoint_core::io::default_x0(g.n_nodes(), fixpoint_core::io::DEFAULT_SEED)
    } else {
        parse_vector(x0)?
    };
    let t = mann_with(&a, &x0, &schedule(kind, c)?, max_iter, &config(max_iter))?;
    Ok(ConsensusView {
        disagreement: curve(&t.fix_residuals),
        verdict: t.verdict.status.name().into(),
        iterations: t.verdict.iterations_used,
        consensus: is_consensus(t.final_state(), 1e-6)?,
        strongly_connected: g.is_strongly_connected(),
        final_state: t.final_state().to_vec(),
    })
}

/// Pseudo-gradient play of the zero-sum game with scalar coupling `c` from
/// `(x1, x2)`.
pub fn game_view(coupling: f64, x1: f64, x2: f64, kind: &str, step: f64, max_iter: usize) -> Result<GameView, Error> {
    let game = ZeroSumGame::new(fixpoint_core::Matrix::from_rows(&[[coupling]])?)?;
    let a = game_iteration_operator(&game);
    let t: Trajectory = mann_with(&a, &[x1, x2], &schedule(kind, step)?, max_iter, &config(max_iter))?;
    let spectrum = fixpoint_core::analyze_spectrum(&a, &fixpoint_core::Tolerances::default())?;
    Ok(GameView {
        states: t.iterates.clone(),
        residual: curve(&t.fix_residuals),
        verdict: t.verdict.status.name().into(),
        iterations: t.verdict.iterations_used,
        eigenvalues: eigenvalue_views(&spectrum),
    })
}

fn to_js<T: Serialize>(r: Result<T, Error>) -> Result<String, JsValue> {
    let value = r.map_err(|e| JsValue::from_str(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn spectrum(text: &str) -> Result<String, JsValue> {
    to_js(spectrum_view(text))
}

#[wasm_bindgen]
pub fn consensus(graph: &str, x0: &str, schedule: &str, c: f64, max_iter: usize) -> Result<String, JsValue> {
    to_js(consensus_view(graph, x0, schedule, c, max_iter))
}

#[wasm_bindgen]
pub fn game(coupling: f64, x1: f64, x2: f64, schedule: &str, c: f64, max_iter: usize) -> Result<String, JsValue> {
    to_js(game_view(coupling, x1, x2, schedule, c, max_iter))
}
