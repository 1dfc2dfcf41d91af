//! Text formats: matrices, edge lists, classification reports and CSV traces.
//!
//! Matrix files hold the dimension `n` on the first line followed by `n` rows
//! of `n` whitespace-separated numbers. Graph files hold the node count
//! followed by one `i j w` edge per line, with nodes numbered from 1. Blank
//! lines and lines starting with `#` are ignored in both.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::applications::DirectedWeightedGraph;
use crate::classify::{fmt_complex, ClassificationReport, OperatorClass};
use crate::error::{Error, Result};
use crate::iteration::{ConvergenceStatus, Trajectory};
use crate::matrix::{norm2, Matrix};

pub const DEFAULT_SEED: u64 = 42;

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn content_lines(src: &str) -> impl Iterator<Item = (usize, Vec<Token<'_>>)> {
    src.lines().enumerate().filter_map(|(i, line)| {
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    tokens.push(Token {
                        text: &line[s..pos],
                        line: i + 1,
                        column: line[..s].chars().count() + 1,
                    });
                    start = None;
                }
                _ => {}
            }
        }
        Some((i + 1, tokens))
    })
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn number(tok: &Token<'_>) -> Result<f64> {
    let v: f64 = tok
        .text
        .parse()
        .map_err(|_| parse_error(tok.line, tok.column, format!("expected a number, found `{}`", tok.text)))?;
    if !v.is_finite() {
        return Err(parse_error(tok.line, tok.column, format!("non-finite value `{}`", tok.text)));
    }
    Ok(v)
}

fn count(tok: &Token<'_>, what: &str) -> Result<usize> {
    match tok.text.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(parse_error(
            tok.line,
            tok.column,
            format!("expected a positive {what}, found `{}`", tok.text),
        )),
    }
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, Vec<Token<'a>>)>, what: &str) -> Result<(usize, usize)> {
    let (line, tokens) = lines
        .next()
        .ok_or_else(|| parse_error(1, 1, format!("missing {what}")))?;
    if tokens.len() != 1 {
        let col = tokens.get(1).map_or(1, |t| t.column);
        return Err(parse_error(line, col, format!("header must hold only the {what}")));
    }
    Ok((count(&tokens[0], what)?, line))
}

pub fn parse_matrix(src: &str) -> Result<Matrix> {
    let mut lines = content_lines(src);
    let (n, mut last_line) = header(&mut lines, "dimension")?;
    let mut data = Vec::with_capacity(n * n);
    for row in 0..n {
        let (line, tokens) = lines
            .next()
            .ok_or_else(|| parse_error(last_line + 1, 1, format!("expected {n} rows, found {row}")))?;
        if tokens.len() != n {
            let col = tokens.get(n).map_or_else(
                || tokens.last().map_or(1, |t| t.column + t.text.chars().count()),
                |t| t.column,
            );
            return Err(parse_error(line, col, format!("expected {n} entries, found {}", tokens.len())));
        }
        for t in &tokens {
            data.push(number(t)?);
        }
        last_line = line;
    }
    if let Some((line, tokens)) = lines.next() {
        return Err(parse_error(line, tokens[0].column, "unexpected content after the last row"));
    }
    Matrix::from_vec(n, n, data)
}

pub fn parse_graph(src: &str) -> Result<DirectedWeightedGraph> {
    let mut lines = content_lines(src);
    let (n, _) = header(&mut lines, "node count")?;
    let mut g = DirectedWeightedGraph::new(n)?;
    for (line, tokens) in lines {
        if tokens.len() != 3 {
            let col = tokens.get(3).map_or(1, |t| t.column);
            return Err(parse_error(line, col, "edge lines must read `i j w`"));
        }
        let node = |t: &Token<'_>| -> Result<usize> {
            match t.text.parse::<usize>() {
                Ok(i) if (1..=n).contains(&i) => Ok(i - 1),
                _ => Err(parse_error(t.line, t.column, format!("node must be an integer in 1..={n}, found `{}`", t.text))),
            }
        };
        let (i, j) = (node(&tokens[0])?, node(&tokens[1])?);
        let w = number(&tokens[2])?;
        g.add_edge(i, j, w).map_err(|e| match e {
            Error::Model(msg) => parse_error(line, tokens[0].column, msg),
            other => other,
        })?;
    }
    Ok(g)
}

/// Comma- or whitespace-separated list of numbers.
pub fn parse_vector(src: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut column = 1;
    for piece in src.split(|c: char| c == ',' || c.is_whitespace()) {
        if !piece.is_empty() {
            let tok = Token {
                text: piece,
                line: 1,
                column,
            };
            out.push(number(&tok)?);
        }
        column += piece.chars().count() + 1;
    }
    if out.is_empty() {
        return Err(parse_error(1, 1, "empty vector"));
    }
    Ok(out)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut s = format!("{}\n", m.rows());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| num(v)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// Deterministic pseudo-random unit vector with entries drawn uniformly from
/// `[−1, 1]` before normalization.
pub fn default_x0(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = norm2(&x);
        if norm > 1e-3 {
            return x.into_iter().map(|v| v / norm).collect();
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), num)
}

/// Key-value report of a classification. Certificates and the weight matrix
/// appear as `[name]` sections in matrix-file format, see [`report_matrix`].
pub fn format_report(r: &ClassificationReport) -> String {
    let mut s = String::new();
    let s_ = &r.spectrum;
    let _ = writeln!(s, "dimension: {}", s_.dimension);
    let _ = writeln!(s, "spectral_radius: {}", num(s_.spectral_radius));
    let _ = writeln!(s, "clusters: {}", s_.clusters.len());
    for (i, c) in s_.clusters.iter().enumerate() {
        let _ = writeln!(
            s,
            "cluster.{i}: re={} im={} algebraic={} geometric={} semisimple={}",
            num(c.value.re),
            num(c.value.im),
            c.algebraic_multiplicity,
            c.geometric_multiplicity,
            c.is_semisimple()
        );
    }
    let _ = writeln!(s, "is_contraction: {}", r.contraction.holds);
    let _ = writeln!(s, "is_nonexpansive: {}", r.nonexpansive.holds);
    let _ = writeln!(s, "is_averaged: {}", r.averaged.holds);
    let _ = writeln!(s, "is_spc: {}", r.pseudocontractive.holds);
    let _ = writeln!(s, "witness.l: {}", opt(r.contraction.witness));
    let _ = writeln!(s, "witness.eta: {}", opt(r.averaged.witness));
    let _ = writeln!(s, "witness.kappa: {}", opt(r.pseudocontractive.witness));
    let _ = writeln!(s, "lipschitz_in_p: {}", opt(r.lipschitz_in_p.as_ref().map(|(l, _)| *l)));
    let _ = writeln!(s, "flags: {}", r.borderline_flags.len());
    for (i, f) in r.borderline_flags.iter().enumerate() {
        let ev = f.eigenvalue.map_or_else(|| "none".to_string(), fmt_complex);
        let _ = writeln!(s, "flag.{i}: class={} eigenvalue={ev} note={}", f.class.short_name(), f.note);
    }
    for class in OperatorClass::ALL {
        if let Some(p) = &r.verdict(class).certificate {
            let _ = writeln!(s, "\n[certificate.{}]", class.short_name());
            s.push_str(&format_matrix(p));
        }
    }
    if let Some((_, p)) = &r.lipschitz_in_p {
        let _ = writeln!(s, "\n[weight]");
        s.push_str(&format_matrix(p));
    }
    s
}

/// Extracts the matrix stored in section `[name]` of a report.
pub fn report_matrix(report: &str, name: &str) -> Result<Option<Matrix>> {
    let marker = format!("[{name}]");
    let mut lines = report.lines().enumerate();
    let start = match lines.find(|(_, l)| l.trim() == marker) {
        Some((i, _)) => i + 1,
        None => return Ok(None),
    };
    let body: Vec<&str> = report
        .lines()
        .skip(start)
        .take_while(|l| !l.trim_start().starts_with('['))
        .collect();
    parse_matrix(&body.join("\n"))
        .map(Some)
        .map_err(|e| match e {
            Error::Parse { line, column, message } => Error::Parse {
                line: line + start,
                column,
                message,
            },
            other => other,
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceOptions {
    pub include_state: bool,
}

/// CSV with columns `k, step_residual, fix_residual, norm` and optionally the
/// stored state, followed by `#`-prefixed verdict lines and `extra` entries.
pub fn format_trace(t: &Trajectory, options: TraceOptions, extra: &[(String, String)]) -> String {
    let n = t.iterates[0].1.len();
    let mut s = String::from("k,step_residual,fix_residual,norm");
    if options.include_state {
        for i in 0..n {
            let _ = write!(s, ",x{i}");
        }
    }
    s.push('\n');
    let mut stored = t.iterates.iter().peekable();
    for k in 0..t.fix_residuals.len() {
        let step = t.residuals.get(k).map_or_else(String::new, |&v| num(v));
        let _ = write!(s, "{k},{step},{},{}", num(t.fix_residuals[k]), num(t.norms[k]));
        if options.include_state {
            while stored.peek().is_some_and(|(j, _)| *j < k) {
                stored.next();
            }
            match stored.peek() {
                Some((j, x)) if *j == k => {
                    for v in x {
                        let _ = write!(s, ",{}", num(*v));
                    }
                }
                _ => s.push_str(&",".repeat(n)),
            }
        }
        s.push('\n');
    }
    let v = &t.verdict;
    let _ = writeln!(s, "# verdict: {}", v.status.name());
    let _ = writeln!(s, "# iterations: {}", v.iterations_used);
    if let ConvergenceStatus::Converged { limit } = &v.status {
        let parts: Vec<String> = limit.iter().map(|&x| num(x)).collect();
        let _ = writeln!(s, "# limit: {}", parts.join(" "));
    }
    let e = &v.evidence;
    let _ = writeln!(s, "# final_fix_residual: {}", num(e.final_fix_residual));
    let _ = writeln!(s, "# final_step_residual: {}", num(e.final_step_residual));
    let _ = writeln!(s, "# trailing_min_fix_residual: {}", num(e.trailing_min_fix_residual));
    let _ = writeln!(s, "# norm_growth: {}", num(e.norm_growth));
    let _ = writeln!(s, "# rotation: {}", num(e.rotation));
    for (k, val) in extra {
        let _ = writeln!(s, "# {k}: {val}");
    }
    s
}

/// Verdict block of a trace as a key-value report.
pub fn format_trace_report(t: &Trajectory, extra: &[(String, String)]) -> String {
    let trace = format_trace(t, TraceOptions { include_state: false }, extra);
    let mut s: String = trace
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        });
    let _ = writeln!(s, "final_state: {}", t.final_state().iter().map(|&v| num(v)).collect::<Vec<_>>().join(" "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_matrix_with_comments() {
        let m = parse_matrix("# operator\n2\n1 0.5\n\n-1e-3 4\n").unwrap();
        assert_eq!(m, Matrix::from_rows(&[[1.0, 0.5], [-1e-3, 4.0]]).unwrap());
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert_eq!(
            parse_matrix("2\n1 2\n3 x\n"),
            Err(Error::Parse {
                line: 3,
                column: 3,
                message: "expected a number, found `x`".into()
            })
        );
        assert!(matches!(parse_matrix("2\n1 2 3\n3 4\n"), Err(Error::Parse { line: 2, column: 5, .. })));
        assert!(matches!(parse_matrix("2\n1 2\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_matrix("0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_matrix("1\nnan\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = Matrix::from_rows(&[[0.1, 1.0 / 3.0], [-2.0e-300, std::f64::consts::PI]]).unwrap();
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn parses_graph() {
        let g = parse_graph("3\n1 2 0.5\n1 3 0.5\n2 3 1\n3 1 1\n").unwrap();
        assert_eq!(g.weights()[(0, 1)], 0.5);
        assert_eq!(g.weights()[(2, 0)], 1.0);
        assert!(matches!(parse_graph("2\n1 1 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_graph("2\n1 3 1\n"), Err(Error::Parse { line: 2, column: 3, .. })));
        assert!(matches!(parse_graph("2\n1 2 1\n1 2 1\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn parses_vectors() {
        assert_eq!(parse_vector("0.5,0").unwrap(), vec![0.5, 0.0]);
        assert_eq!(parse_vector("1 2, 3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(matches!(parse_vector("1,a"), Err(Error::Parse { column: 3, .. })));
    }

    #[test]
    fn default_x0_is_deterministic_unit_vector() {
        let a = default_x0(5, DEFAULT_SEED);
        assert_eq!(a, default_x0(5, DEFAULT_SEED));
        assert!((norm2(&a) - 1.0).abs() < 1e-15);
        assert_ne!(a, default_x0(5, 7));
    }
}
