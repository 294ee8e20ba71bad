//! CSV, JSON and SVG emitters. Floats in CSV carry 17 significant digits so
//! that values round-trip exactly.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::gdpoly::Family;
use crate::levelset::{ComponentClass, LevelCurveAnalysis};
use crate::strips::TheoremCheck;
use crate::zerofinder::ComplexZero;

/// `{:.16e}`: one digit before the point and sixteen after.
pub fn float17(v: f64) -> String {
    format!("{v:.16e}")
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Columns `family,n,re,im,residual,certified`.
pub fn zeros_csv(family: Family, n: u64, zeros: &[ComplexZero]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["family", "n", "re", "im", "residual", "certified"])?;
    for z in zeros {
        w.write_record([
            family.as_str().to_string(),
            n.to_string(),
            float17(z.re),
            float17(z.im),
            float17(z.residual),
            z.certified.to_string(),
        ])?;
    }
    finish(w)
}

/// Columns `theorem,n,verdict,detail`.
pub fn checks_csv(checks: &[TheoremCheck]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theorem", "n", "verdict", "detail"])?;
    for c in checks {
        w.write_record([
            c.theorem.to_string(),
            c.n.map_or(String::new(), |n| n.to_string()),
            c.verdict.to_string(),
            c.detail.clone(),
        ])?;
    }
    finish(w)
}

/// Generic CSV from a header and rows of already formatted cells.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    finish(w)
}

/// Pretty JSON with a trailing newline. Field order follows the struct
/// definitions and maps are ordered, so output is stable.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn stroke(class: ComponentClass) -> (&'static str, &'static str) {
    match class {
        ComponentClass::ClosedLoop => ("#1f77b4", ""),
        ComponentClass::OpenWithAsymptote => ("#d62728", " stroke-dasharray=\"6 3\""),
        ComponentClass::SingleOpenCurve => ("#2ca02c", ""),
        ComponentClass::Clipped => ("#7f7f7f", " stroke-dasharray=\"2 2\""),
    }
}

/// SVG with `y` pointing up, the real axis drawn, one path per component
/// and the class encoded in the stroke. Heights above 1600 px are squeezed.
pub fn level_svg(a: &LevelCurveAnalysis) -> String {
    const WIDTH: f64 = 800.0;
    const MAX_HEIGHT: f64 = 1600.0;
    let w = &a.window;
    let sx = WIDTH / w.width();
    // tall windows are compressed vertically rather than drawn at 1:1
    let sy = sx.min(MAX_HEIGHT / w.height());
    let height = (w.height() * sy).ceil();
    let px = |x: f64| (x - w.x_min) * sx;
    let py = |y: f64| (w.y_max - y) * sy;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" \
         viewBox=\"0 0 {WIDTH} {height}\" data-n=\"{}\" data-x0=\"{}\" data-level=\"{}\" \
         data-window=\"{},{},{},{}\" data-grid=\"{}\">",
        a.n, a.x0, a.level, w.x_min, w.x_max, w.y_min, w.y_max, a.grid
    );
    let _ = writeln!(
        s,
        "  <metadata>|G*_{}(z)| = {}^{} = {}</metadata>",
        a.n,
        crate::gdpoly::last_prime_leq(a.n).unwrap_or(0),
        a.x0,
        a.level
    );
    let _ = writeln!(s, "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    if w.y_min <= 0.0 && w.y_max >= 0.0 {
        let _ = writeln!(
            s,
            "  <line class=\"real-axis\" x1=\"0\" y1=\"{y:.3}\" x2=\"{WIDTH}\" y2=\"{y:.3}\" stroke=\"black\" stroke-width=\"0.5\"/>",
            y = py(0.0)
        );
    }
    if w.x_min <= 0.0 && w.x_max >= 0.0 {
        let _ = writeln!(
            s,
            "  <line class=\"imaginary-axis\" x1=\"{x:.3}\" y1=\"0\" x2=\"{x:.3}\" y2=\"{height}\" stroke=\"black\" stroke-width=\"0.5\"/>",
            x = px(0.0)
        );
    }
    for (k, c) in a.components.iter().enumerate() {
        let (colour, dash) = stroke(c.class);
        let mut d = String::new();
        for (i, v) in c.vertices.iter().enumerate() {
            let _ = write!(d, "{}{:.3},{:.3} ", if i == 0 { "M" } else { "L" }, px(v[0]), py(v[1]));
        }
        if c.class == ComponentClass::ClosedLoop {
            d.push('Z');
        }
        let _ = writeln!(
            s,
            "  <path id=\"c{k}\" data-class=\"{}\" d=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1\"{dash}/>",
            c.class.as_str(),
            d.trim_end()
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_seventeen_digits_and_round_trips() {
        let z = ComplexZero {
            re: 0.1,
            im: std::f64::consts::PI / std::f64::consts::LN_2,
            residual: 1e-17,
            certified: true,
            multiplicity: 1,
        };
        let out = zeros_csv(Family::Zeta, 2, &[z]).unwrap();
        let mut lines = out.lines();
        assert_eq!(lines.next().unwrap(), "family,n,re,im,residual,certified");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "zeta");
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.1);
        assert_eq!(row[3].parse::<f64>().unwrap(), z.im);
        let mantissa = row[3].split('e').next().unwrap().replace('.', "");
        assert_eq!(mantissa.len(), 17);
    }

    #[test]
    fn csv_quotes_commas() {
        let t = table_csv(&["a"], &[vec!["x, y".into()]]).unwrap();
        assert_eq!(t, "a\n\"x, y\"\n");
    }
}
