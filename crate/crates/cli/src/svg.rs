//! Write-only SVG plots.

use std::fmt::Write;

use catsurf_core::smoothing::RadialProfile;
use catsurf_core::triangulation::{Owner, RefinementOutput};

const SIZE: f64 = 480.0;
const PAD: f64 = 20.0;
const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2"];

struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone, square: bool) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            it.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
        };
        let (x0, x1) = span(&mut xs.clone());
        let (y0, y1) = span(&mut ys.clone());
        let w = (x1 - x0).max(1e-300);
        let h = (y1 - y0).max(1e-300);
        let (mut sx, mut sy) = ((SIZE - 2.0 * PAD) / w, (SIZE - 2.0 * PAD) / h);
        if square {
            sx = sx.min(sy);
            sy = sx;
        }
        Frame { x0, y0, sx, sy }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (PAD + (x - self.x0) * self.sx, SIZE - PAD - (y - self.y0) * self.sy)
    }
}

fn open() -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n")
}

/// Refined triangles in chart coordinates, coloured by owner.
pub fn refinement(out: &RefinementOutput) -> String {
    let pts = || out.triangles.iter().flat_map(|t| t.vertices().iter().copied());
    let frame = Frame::fit(pts().map(|p| p[0]), pts().map(|p| p[1]), true);
    let mut s = open();
    for (t, o) in out.triangles.iter().zip(&out.owner) {
        let fill = match o {
            Owner::Family(i) => PALETTE[i % PALETTE.len()],
            Owner::Background => "#eeeeee",
        };
        let points: Vec<String> = t
            .vertices()
            .iter()
            .map(|p| {
                let (x, y) = frame.map(p[0], p[1]);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(s, "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"0.5\"/>", points.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

/// `log λ` (top) and `K` (bottom) against `log r`.
pub fn profile(p: &RadialProfile) -> String {
    let logr: Vec<f64> = p.r.iter().map(|r| r.ln()).collect();
    let logl: Vec<f64> = p.lambda.iter().map(|l| l.ln()).collect();
    let mut s = open();
    let half = SIZE / 2.0;
    for (i, (ys, colour)) in [(&logl, PALETTE[0]), (&p.k, PALETTE[3])].into_iter().enumerate() {
        let frame = Frame::fit(logr.iter().copied(), ys.iter().copied(), false);
        let points: Vec<String> = logr
            .iter()
            .zip(ys.iter())
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| {
                let (px, py) = frame.map(x, y);
                format!("{:.3},{:.3}", px, half * i as f64 + py / 2.0)
            })
            .collect();
        let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1\"/>", points.join(" "));
    }
    s.push_str("</svg>\n");
    s
}
