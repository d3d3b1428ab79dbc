//! File formats: contour text files, binary-mask rasters (PGM), the
//! Beltrami/signature field format, and the CSV emitters for the
//! classification harness. All writers print shortest round-trip decimals,
//! so identical inputs produce byte-identical files.

use crate::complexgeom::{BeltramiField, DiskGrid};
use crate::contour::{Contour, Mask};
use crate::error::ContourError;
use crate::harmonic::HarmonicField;
use crate::hbs::HbsField;
use crate::scalar::{Cx, Real};
use num_complex::Complex;
use std::fmt::Write as _;
use std::sync::Arc;

/// Parses the contour text format: one `x y` pair per line, `#` comments
/// and blank lines ignored, closed implicitly.
pub fn parse_contour<T: Real>(text: &str) -> Result<Contour<T>, ContourError> {
    let mut pts = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |tok: Option<&str>, lineno: usize| -> Result<T, ContourError> {
            let tok = tok.ok_or(ContourError::Parse {
                line: lineno + 1,
                msg: "expected two coordinates".into(),
            })?;
            tok.parse::<f64>()
                .map(T::of)
                .map_err(|_| ContourError::Parse {
                    line: lineno + 1,
                    msg: format!("bad number {tok:?}"),
                })
        };
        let x = parse(parts.next(), lineno)?;
        let y = parse(parts.next(), lineno)?;
        if parts.next().is_some() {
            return Err(ContourError::Parse {
                line: lineno + 1,
                msg: "expected exactly two coordinates".into(),
            });
        }
        pts.push(Complex::new(x, y));
    }
    Contour::new(pts)
}

pub fn write_contour<T: Real>(c: &Contour<T>) -> String {
    let mut out = String::new();
    for p in c.points() {
        let _ = writeln!(
            out,
            "{} {}",
            p.re.to_f64().unwrap_or(f64::NAN),
            p.im.to_f64().unwrap_or(f64::NAN)
        );
    }
    out
}

/// SVG polyline for visual inspection of a contour.
pub fn contour_svg<T: Real>(c: &Contour<T>) -> String {
    let pts: Vec<(f64, f64)> = c
        .points()
        .iter()
        .map(|p| (p.re.to_f64().unwrap_or(0.0), p.im.to_f64().unwrap_or(0.0)))
        .collect();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    let mut path = String::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let _ = write!(path, "{}{},{}", if i == 0 { "M" } else { " L" }, x, -y);
    }
    path.push_str(" Z");
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n\
         <path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\"/>\n</svg>\n",
        x0 - pad,
        -(y1 + pad),
        (x1 - x0) + 2.0 * pad,
        (y1 - y0) + 2.0 * pad,
        path,
        pad / 10.0
    )
}

/// Reads a PGM/PBM raster (P1, P2, P4, P5); nonzero means foreground.
pub fn parse_pgm(bytes: &[u8]) -> Result<Mask, String> {
    let mut pos = 0usize;
    let mut token = || -> Result<Vec<u8>, String> {
        // skip whitespace and comments
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("unexpected end of raster header".into());
        }
        Ok(bytes[start..pos].to_vec())
    };
    let magic = token()?;
    let magic = String::from_utf8_lossy(&magic).to_string();
    let width: usize = String::from_utf8_lossy(&token()?)
        .parse()
        .map_err(|_| "bad width")?;
    let height: usize = String::from_utf8_lossy(&token()?)
        .parse()
        .map_err(|_| "bad height")?;
    let mut data = Vec::with_capacity(width * height);
    match magic.as_str() {
        "P1" => {
            while data.len() < width * height {
                let t = token()?;
                for ch in t {
                    match ch {
                        b'0' => data.push(false),
                        b'1' => data.push(true),
                        _ => return Err("bad P1 pixel".into()),
                    }
                }
            }
        }
        "P2" => {
            let _maxval = token()?;
            while data.len() < width * height {
                let v: u32 = String::from_utf8_lossy(&token()?)
                    .parse()
                    .map_err(|_| "bad P2 pixel")?;
                data.push(v != 0);
            }
        }
        "P4" => {
            pos += 1; // single whitespace after the header
            let row_bytes = width.div_ceil(8);
            for y in 0..height {
                for x in 0..width {
                    let byte = bytes
                        .get(pos + y * row_bytes + x / 8)
                        .ok_or("truncated P4 raster")?;
                    data.push(byte & (0x80 >> (x % 8)) != 0);
                }
            }
        }
        "P5" => {
            let maxval: u32 = String::from_utf8_lossy(&token()?)
                .parse()
                .map_err(|_| "bad maxval")?;
            if maxval > 255 {
                return Err("16-bit PGM not supported".into());
            }
            pos += 1;
            for k in 0..width * height {
                let b = bytes.get(pos + k).ok_or("truncated P5 raster")?;
                data.push(*b != 0);
            }
        }
        other => return Err(format!("unsupported raster magic {other:?}")),
    }
    Ok(Mask {
        width,
        height,
        data,
    })
}

/// Writes the Beltrami field format: `M <resolution> F <face-count>`
/// header, then one `re im` pair per face in face-index order.
pub fn write_beltrami_field<T: Real>(f: &BeltramiField<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "M {} F {}", f.grid.resolution(), f.grid.face_count());
    for v in &f.values {
        let _ = writeln!(
            out,
            "{} {}",
            v.re.to_f64().unwrap_or(f64::NAN),
            v.im.to_f64().unwrap_or(f64::NAN)
        );
    }
    out
}

/// Signature file: the Beltrami field format preceded by the
/// normalization certificate line `TAU0RES <v> TAU1 <v>`.
pub fn write_signature<T: Real>(s: &HbsField<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "TAU0RES {} TAU1 {}",
        s.tau0_residual.to_f64().unwrap_or(f64::NAN),
        s.tau1.to_f64().unwrap_or(f64::NAN)
    );
    out.push_str(&write_beltrami_field(&s.field));
    out
}

pub fn parse_signature<T: Real>(text: &str) -> Result<HbsField<T>, String> {
    let mut lines = text.lines();
    let head = lines.next().ok_or("empty signature file")?;
    let mut toks = head.split_whitespace();
    if toks.next() != Some("TAU0RES") {
        return Err("missing TAU0RES header".into());
    }
    let tau0_residual: f64 = toks
        .next()
        .ok_or("missing tau0 residual")?
        .parse()
        .map_err(|_| "bad tau0 residual")?;
    if toks.next() != Some("TAU1") {
        return Err("missing TAU1 field".into());
    }
    let tau1: f64 = toks
        .next()
        .ok_or("missing tau1")?
        .parse()
        .map_err(|_| "bad tau1")?;
    let rest: String = lines.collect::<Vec<_>>().join("\n");
    let field = parse_beltrami_field(&rest)?;
    Ok(HbsField {
        field,
        tau0_residual: T::of(tau0_residual),
        tau1: T::of(tau1),
    })
}

pub fn parse_beltrami_field<T: Real>(text: &str) -> Result<BeltramiField<T>, String> {
    let mut lines = text.lines();
    let head = lines.next().ok_or("empty field file")?;
    let mut toks = head.split_whitespace();
    if toks.next() != Some("M") {
        return Err("missing M header".into());
    }
    let resolution: usize = toks
        .next()
        .ok_or("missing resolution")?
        .parse()
        .map_err(|_| "bad resolution")?;
    if toks.next() != Some("F") {
        return Err("missing F header".into());
    }
    let faces: usize = toks
        .next()
        .ok_or("missing face count")?
        .parse()
        .map_err(|_| "bad face count")?;
    let grid: Arc<DiskGrid<T>> =
        DiskGrid::build(resolution).map_err(|e| format!("bad grid: {e}"))?;
    if grid.face_count() != faces {
        return Err(format!(
            "face count {} does not match the resolution-{} grid ({})",
            faces,
            resolution,
            grid.face_count()
        ));
    }
    let mut values: Vec<Cx<T>> = Vec::with_capacity(faces);
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let re: f64 = toks
            .next()
            .ok_or("missing re")?
            .parse()
            .map_err(|_| "bad re")?;
        let im: f64 = toks
            .next()
            .ok_or("missing im")?
            .parse()
            .map_err(|_| "bad im")?;
        values.push(Complex::new(T::of(re), T::of(im)));
    }
    if values.len() != faces {
        return Err(format!("expected {} faces, got {}", faces, values.len()));
    }
    Ok(BeltramiField::new(grid, values))
}

/// Harmonic field serialization mirrors the Beltrami format with per-node
/// records: `M <resolution> N <node-count>` then `re im` per node.
pub fn write_harmonic_field<T: Real>(h: &HarmonicField<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "M {} N {}", h.grid.resolution(), h.grid.node_count());
    for v in &h.values {
        let _ = writeln!(
            out,
            "{} {}",
            v.re.to_f64().unwrap_or(f64::NAN),
            v.im.to_f64().unwrap_or(f64::NAN)
        );
    }
    out
}

/// Distance-matrix CSV with a label header row and column.
pub fn distance_matrix_csv<T: Real>(m: &crate::classify::DistanceMatrix<T>) -> String {
    let mut out = String::new();
    out.push_str("label");
    for l in &m.labels {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for (i, l) in m.labels.iter().enumerate() {
        let _ = write!(out, "{l}");
        for j in 0..m.len() {
            let _ = write!(out, ",{}", m.d[i][j].to_f64().unwrap_or(f64::NAN));
        }
        out.push('\n');
    }
    out
}

/// Embedding CSV: `label,x,y`.
pub fn embedding_csv<T: Real>(labels: &[String], coords: &[Vec<T>]) -> String {
    let mut out = String::from("label,x,y\n");
    for (l, c) in labels.iter().zip(coords) {
        let x = c.first().and_then(|v| v.to_f64()).unwrap_or(0.0);
        let y = c.get(1).and_then(|v| v.to_f64()).unwrap_or(0.0);
        let _ = writeln!(out, "{l},{x},{y}");
    }
    out
}

/// Confusion-matrix CSV.
pub fn confusion_csv(matrix: &[Vec<usize>]) -> String {
    let mut out = String::new();
    for row in matrix {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn contour_round_trip() {
        let c = Contour::new(vec![
            cx::<f64>(0.0, 0.0),
            cx(1.5, -2.25),
            cx(0.125, 3.0),
        ])
        .unwrap();
        let text = write_contour(&c);
        let back = parse_contour::<f64>(&text).unwrap();
        assert_eq!(c.points(), back.points());
    }

    #[test]
    fn contour_comments_and_errors() {
        let ok = "# a square\n0 0\n1 0\n\n1 1\n0 1\n";
        assert_eq!(parse_contour::<f64>(ok).unwrap().len(), 4);
        let bad = "0 0\n1 zzz\n2 2\n";
        match parse_contour::<f64>(bad) {
            Err(ContourError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn pgm_ascii_and_binary() {
        let p2 = b"P2\n# comment\n3 2\n255\n0 255 0\n255 255 255\n";
        let m = parse_pgm(p2).unwrap();
        assert_eq!((m.width, m.height), (3, 2));
        assert!(!m.get(0, 0) && m.get(1, 0) && m.get(0, 1));
        let p5 = b"P5\n2 2\n255\n\x00\xff\xff\x00";
        let m = parse_pgm(p5).unwrap();
        assert!(!m.get(0, 0) && m.get(1, 0) && m.get(0, 1) && !m.get(1, 1));
        let p1 = b"P1\n2 2\n01\n10\n";
        let m = parse_pgm(p1).unwrap();
        assert!(!m.get(0, 0) && m.get(1, 0));
    }

    #[test]
    fn field_round_trip() {
        let grid = DiskGrid::<f64>::build(4).unwrap();
        let values: Vec<Cx<f64>> = (0..grid.face_count())
            .map(|i| cx(i as f64 * 0.001, -(i as f64) * 0.002))
            .collect();
        let f = BeltramiField::new(grid, values);
        let text = write_beltrami_field(&f);
        let back = parse_beltrami_field::<f64>(&text).unwrap();
        assert_eq!(f.values, back.values);
        assert!(text.starts_with(&format!("M 4 F {}", f.grid.face_count())));
    }

    #[test]
    fn signature_round_trip() {
        let grid = DiskGrid::<f64>::build(3).unwrap();
        let values = vec![cx::<f64>(0.01, 0.02); grid.face_count()];
        let s = HbsField {
            field: BeltramiField::new(grid, values),
            tau0_residual: 1e-9,
            tau1: 0.75,
        };
        let text = write_signature(&s);
        let back = parse_signature::<f64>(&text).unwrap();
        assert_eq!(back.tau1, 0.75);
        assert_eq!(back.field.values, s.field.values);
    }

    #[test]
    fn writers_are_deterministic() {
        let grid = DiskGrid::<f64>::build(5).unwrap();
        let values: Vec<Cx<f64>> = (0..grid.face_count())
            .map(|i| cx((i as f64).sin(), (i as f64).cos()))
            .collect();
        let f = BeltramiField::new(grid.clone(), values.clone());
        let g = BeltramiField::new(grid, values);
        assert_eq!(write_beltrami_field(&f), write_beltrami_field(&g));
    }
}
