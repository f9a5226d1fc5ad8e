//! Exponent of N achieved by each bound family when M_δ and v²/(N(D+1)) are
//! held fixed and D+1 = N^α.

use serde::Serialize;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::par::{map_indexed, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimePoint {
    pub delta: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Jl,
    P,
    Cs,
}

impl Winner {
    pub fn as_str(self) -> &'static str {
        match self {
            Winner::Jl => "jl",
            Winner::P => "p",
            Winner::Cs => "cs",
        }
    }

    fn color(self) -> &'static str {
        match self {
            Winner::Jl => "#2ca02c",
            Winner::P => "#ff7f0e",
            Winner::Cs => "#1f77b4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentTable {
    pub jl: f64,
    pub cs: f64,
    /// +∞ for δ < 4
    pub p: f64,
    pub best: Winner,
    /// (α−1)(δ−2)/2, conjectured rate; never a candidate for `best`.
    pub conjectured: f64,
}

pub fn exponents(point: RegimePoint) -> ExponentTable {
    let RegimePoint { delta: d, alpha: a } = point;
    let jl = (a - 1.0) * (d - 2.0) / (2.0 * (d + 1.0));
    let p = if d < 4.0 { f64::INFINITY } else { a - 0.25 };
    let m = d.min(3.0);
    let cs = 1.0 - m / 2.0 + a * (4.5 * m - 5.0);
    // ties resolved in the order jl, p, cs
    let mut best = (Winner::Jl, jl);
    for cand in [(Winner::P, p), (Winner::Cs, cs)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    ExponentTable { jl, cs, p, best: best.0, conjectured: (a - 1.0) * (d - 2.0) / 2.0 }
}

/// α at which the pair (a, b) swaps order, where that crossing exists.
pub fn closed_form_boundary(delta: f64, a: Winner, b: Winner) -> Option<f64> {
    use Winner::*;
    match (a, b) {
        (Cs, Jl) | (Jl, Cs) => Some(if delta >= 3.0 {
            3.0 / (16.0 * delta + 19.0)
        } else {
            (delta * delta - 2.0 * delta) / (9.0 * delta * delta - 2.0 * delta - 8.0)
        }),
        (P, Jl) | (Jl, P) if (4.0..5.0).contains(&delta) => Some((5.0 - delta) / (8.0 + 2.0 * delta)),
        (P, Cs) | (Cs, P) if delta >= 4.0 => Some(1.0 / 30.0),
        _ => None,
    }
}

pub fn default_delta_grid() -> Vec<f64> {
    (101..=500).map(|k| k as f64 * 0.02).collect()
}

pub fn default_alpha_grid() -> Vec<f64> {
    (0..=100).map(|k| k as f64 * 0.001).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionCell {
    pub delta: f64,
    pub alpha: f64,
    pub jl: f64,
    pub cs: f64,
    pub p: f64,
    pub best: Winner,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeMap {
    pub deltas: Vec<f64>,
    pub alphas: Vec<f64>,
    /// delta-major: cell (i, j) at i * alphas.len() + j
    pub cells: Vec<RegionCell>,
}

impl RegimeMap {
    pub fn cell(&self, i: usize, j: usize) -> &RegionCell {
        &self.cells[i * self.alphas.len() + j]
    }

    /// Region map as an SVG image: δ on the x axis, α on the y axis.
    pub fn to_svg(&self) -> String {
        let (w, h, margin) = (800.0, 400.0, 60.0);
        let (nd, na) = (self.deltas.len(), self.alphas.len());
        let cw = w / nd as f64;
        let ch = h / na as f64;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">"#,
            w + 2.0 * margin + 120.0,
            h + 2.0 * margin
        );
        for j in 0..na {
            let y = margin + h - (j + 1) as f64 * ch;
            let mut i = 0;
            while i < nd {
                let win = self.cell(i, j).best;
                let start = i;
                while i < nd && self.cell(i, j).best == win {
                    i += 1;
                }
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                    margin + start as f64 * cw,
                    y,
                    (i - start) as f64 * cw,
                    ch,
                    win.color()
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<rect x="{margin}" y="{margin}" width="{w}" height="{h}" fill="none" stroke="black"/>"#
        );
        if let (Some(d0), Some(d1), Some(a0), Some(a1)) =
            (self.deltas.first(), self.deltas.last(), self.alphas.first(), self.alphas.last())
        {
            let _ = writeln!(s, r#"<text x="{margin}" y="{}">{d0}</text>"#, margin + h + 16.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{d1}</text>"#, margin + w, margin + h + 16.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">delta</text>"#, margin + w / 2.0, margin + h + 36.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{a0}</text>"#, margin - 4.0, margin + h);
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{a1}</text>"#, margin - 4.0, margin + 10.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">alpha</text>"#, margin / 2.0, margin + h / 2.0);
        }
        let lx = margin + w + 20.0;
        for (k, (win, label)) in [(Winner::Jl, "JL (this crate)"), (Winner::P, "Penrose"), (Winner::Cs, "Chen-Shao")]
            .iter()
            .enumerate()
        {
            let ly = margin + 20.0 * k as f64;
            let _ = writeln!(s, r#"<rect x="{lx}" y="{ly}" width="14" height="14" fill="{}"/>"#, win.color());
            let _ = writeln!(s, r#"<text x="{}" y="{}">{label}</text>"#, lx + 20.0, ly + 12.0);
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Winner per (δ, α) cell.
pub fn crossover_curves(deltas: &[f64], alphas: &[f64], exec: Exec) -> Result<RegimeMap> {
    if deltas.iter().any(|&d| !(d > 2.0 && d <= 10.0)) {
        return Err(Error::InvalidInput("delta grid must lie in (2, 10]".into()));
    }
    if alphas.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
        return Err(Error::InvalidInput("alpha grid must lie in [0, 1]".into()));
    }
    let na = alphas.len();
    let cells = map_indexed(deltas.len() * na, exec, |k| {
        let (delta, alpha) = (deltas[k / na], alphas[k % na]);
        let t = exponents(RegimePoint { delta, alpha });
        RegionCell { delta, alpha, jl: t.jl, cs: t.cs, p: t.p, best: t.best }
    });
    Ok(RegimeMap { deltas: deltas.to_vec(), alphas: alphas.to_vec(), cells })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryPoint {
    pub delta: f64,
    pub alpha_below: f64,
    pub alpha_above: f64,
    pub from: Winner,
    pub to: Winner,
}

/// Winner changes along each δ column, scanning α upward.
pub fn boundary_points(map: &RegimeMap) -> Vec<BoundaryPoint> {
    let mut out = Vec::new();
    for i in 0..map.deltas.len() {
        for j in 1..map.alphas.len() {
            let (lo, hi) = (map.cell(i, j - 1), map.cell(i, j));
            if lo.best != hi.best {
                out.push(BoundaryPoint {
                    delta: map.deltas[i],
                    alpha_below: lo.alpha,
                    alpha_above: hi.alpha,
                    from: lo.best,
                    to: hi.best,
                });
            }
        }
    }
    out
}
