//! Textual model format for piecewise-polynomial matrices.
//!
//! ```text
//! magnus-model v1
//! dim 2
//! breakpoints 0 2
//! segment
//! 0 0 : 2
//! 0 1 : 0 1
//! 1 0 : 0
//! 1 1 : -1
//! ```
//!
//! `breakpoints` lists m+1 exact fractions; each of the m `segment` blocks
//! gives every entry as `row col : c0 c1 …` with coefficients in degree
//! order as exact fractions. Blank lines and `#` comments are accepted on
//! input; the canonical serialization emits none. Canonical output parses
//! back to an identical value.

use thiserror::Error;

use super::matrix::PolyMatrix;
use super::piecewise::PiecewisePolyMatrix;
use super::poly::Poly;
use super::rational::{format_rational, parse_rational, Rational};

const HEADER: &str = "magnus-model v1";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("model is structurally invalid: {0}")]
    Structure(String),
}

pub fn format_model(model: &PiecewisePolyMatrix) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    out.push_str(&format!("dim {}\n", model.dim()));
    let bps: Vec<String> = model.breakpoints().iter().map(format_rational).collect();
    out.push_str(&format!("breakpoints {}\n", bps.join(" ")));
    for segment in model.segments() {
        out.push_str("segment\n");
        format_matrix_body(segment, &mut out);
    }
    out
}

fn format_matrix_body(m: &PolyMatrix, out: &mut String) {
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            let p = m.entry(i, j);
            let coeffs = if p.is_zero() {
                "0".to_string()
            } else {
                p.coeffs()
                    .iter()
                    .map(format_rational)
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            out.push_str(&format!("{i} {j} : {coeffs}\n"));
        }
    }
}

pub fn parse_model(text: &str) -> Result<PiecewisePolyMatrix, ModelError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| ModelError::Structure("empty model".into()))?;
    if header != HEADER {
        return Err(ModelError::Syntax {
            line: line_no,
            message: format!("expected header {HEADER:?}"),
        });
    }

    let (line_no, dim_line) = lines
        .next()
        .ok_or_else(|| ModelError::Structure("missing dim line".into()))?;
    let dim: usize = dim_line
        .strip_prefix("dim ")
        .and_then(|s| s.trim().parse().ok())
        .filter(|&d| d >= 1)
        .ok_or_else(|| ModelError::Syntax {
            line: line_no,
            message: "expected `dim <positive integer>`".into(),
        })?;

    let (line_no, bp_line) = lines
        .next()
        .ok_or_else(|| ModelError::Structure("missing breakpoints line".into()))?;
    let bp_body = bp_line.strip_prefix("breakpoints").ok_or_else(|| ModelError::Syntax {
        line: line_no,
        message: "expected `breakpoints <fractions…>`".into(),
    })?;
    let breakpoints: Vec<Rational> = bp_body
        .split_whitespace()
        .map(|tok| {
            parse_rational(tok).map_err(|e| ModelError::Syntax { line: line_no, message: e })
        })
        .collect::<Result<_, _>>()?;
    if breakpoints.len() < 2 {
        return Err(ModelError::Syntax {
            line: line_no,
            message: "need at least two breakpoints".into(),
        });
    }

    let mut segments: Vec<PolyMatrix> = Vec::new();
    let mut current: Option<(Vec<Option<Poly>>, usize)> = None;
    for (line_no, line) in lines {
        if line == "segment" {
            if let Some(seg) = current.take() {
                segments.push(finish_segment(seg, dim)?);
            }
            current = Some((vec![None; dim * dim], 0));
            continue;
        }
        let (entries, filled) = current.as_mut().ok_or_else(|| ModelError::Syntax {
            line: line_no,
            message: "entry line before any `segment`".into(),
        })?;
        let (pos, coeff_text) = line.split_once(':').ok_or_else(|| ModelError::Syntax {
            line: line_no,
            message: "expected `row col : coefficients`".into(),
        })?;
        let mut idx = pos.split_whitespace();
        let row: usize = idx
            .next()
            .and_then(|s| s.parse().ok())
            .filter(|&r| r < dim)
            .ok_or_else(|| ModelError::Syntax {
                line: line_no,
                message: format!("invalid row index (dim {dim})"),
            })?;
        let col: usize = idx
            .next()
            .and_then(|s| s.parse().ok())
            .filter(|&c| c < dim)
            .ok_or_else(|| ModelError::Syntax {
                line: line_no,
                message: format!("invalid column index (dim {dim})"),
            })?;
        if idx.next().is_some() {
            return Err(ModelError::Syntax {
                line: line_no,
                message: "trailing tokens before `:`".into(),
            });
        }
        let coeffs: Vec<Rational> = coeff_text
            .split_whitespace()
            .map(|tok| {
                parse_rational(tok)
                    .map_err(|e| ModelError::Syntax { line: line_no, message: e })
            })
            .collect::<Result<_, _>>()?;
        if coeffs.is_empty() {
            return Err(ModelError::Syntax {
                line: line_no,
                message: "missing coefficient list".into(),
            });
        }
        let slot = &mut entries[row * dim + col];
        if slot.is_some() {
            return Err(ModelError::Syntax {
                line: line_no,
                message: format!("duplicate entry ({row}, {col})"),
            });
        }
        *slot = Some(Poly::from_coeffs(coeffs));
        *filled += 1;
    }
    if let Some(seg) = current.take() {
        segments.push(finish_segment(seg, dim)?);
    }
    if segments.len() + 1 != breakpoints.len() {
        return Err(ModelError::Structure(format!(
            "{} breakpoints require {} segments, found {}",
            breakpoints.len(),
            breakpoints.len() - 1,
            segments.len()
        )));
    }
    PiecewisePolyMatrix::new(breakpoints, segments)
        .map_err(|e| ModelError::Structure(e.to_string()))
}

fn finish_segment(
    (entries, filled): (Vec<Option<Poly>>, usize),
    dim: usize,
) -> Result<PolyMatrix, ModelError> {
    if filled != dim * dim {
        return Err(ModelError::Structure(format!(
            "segment has {filled} of {} entries",
            dim * dim
        )));
    }
    let mut rows = Vec::with_capacity(dim);
    let mut it = entries.into_iter();
    for _ in 0..dim {
        rows.push((0..dim).map(|_| it.next().unwrap().unwrap()).collect());
    }
    Ok(PolyMatrix::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::super::rational::rat;
    use super::*;

    fn sample_model() -> PiecewisePolyMatrix {
        // [[2, t], [0, -1]] on [0, 1), [[1/2, 0], [t^2, 0]] on [1, 5/2]
        let a = PolyMatrix::from_rows(vec![
            vec![Poly::constant(rat(2, 1)), Poly::monomial(rat(1, 1), 1)],
            vec![Poly::zero(), Poly::constant(rat(-1, 1))],
        ]);
        let b = PolyMatrix::from_rows(vec![
            vec![Poly::constant(rat(1, 2)), Poly::zero()],
            vec![Poly::monomial(rat(1, 1), 2), Poly::zero()],
        ]);
        PiecewisePolyMatrix::new(vec![rat(0, 1), rat(1, 1), rat(5, 2)], vec![a, b]).unwrap()
    }

    #[test]
    fn canonical_roundtrip_is_exact() {
        let model = sample_model();
        let text = format_model(&model);
        let parsed = parse_model(&text).unwrap();
        assert_eq!(parsed, model);
        assert_eq!(format_model(&parsed), text);
    }

    #[test]
    fn comments_and_blank_lines_accepted() {
        let model = sample_model();
        let mut text = String::from("# a comment\n\n");
        text.push_str(&format_model(&model));
        let parsed = parse_model(&text).unwrap();
        assert_eq!(parsed, model);
    }

    #[test]
    fn missing_entry_rejected() {
        let text = "magnus-model v1\ndim 2\nbreakpoints 0 1\nsegment\n0 0 : 1\n";
        assert!(parse_model(text).is_err());
    }

    #[test]
    fn bad_fraction_reports_line() {
        let text = "magnus-model v1\ndim 1\nbreakpoints 0 1\nsegment\n0 0 : 1/x\n";
        match parse_model(text) {
            Err(ModelError::Syntax { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn segment_count_must_match_breakpoints() {
        let text = "magnus-model v1\ndim 1\nbreakpoints 0 1 2\nsegment\n0 0 : 1\n";
        assert!(matches!(parse_model(text), Err(ModelError::Structure(_))));
    }
}
