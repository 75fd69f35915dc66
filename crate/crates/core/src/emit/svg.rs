use std::fmt::Write;

use crate::construct::{Figure, GeoObject};
use crate::locus::Locus;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    /// Width and height of the square canvas in pixels.
    pub size: f64,
    pub margin: f64,
    /// Scene window `[x_min, x_max, y_min, y_max]`; fitted when absent.
    pub window: Option<[f64; 4]>,
    pub show_construction: bool,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            size: 640.0,
            margin: 24.0,
            window: None,
            show_construction: true,
        }
    }
}

/// Scene-to-screen mapping. The y flip happens here and nowhere else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub x0: f64,
    pub y0: f64,
    pub scale: f64,
    pub size: f64,
    pub margin: f64,
    window: [f64; 4],
}

impl Frame {
    fn new(style: &SvgStyle, extent: f64) -> Frame {
        let window = style.window.unwrap_or_else(|| {
            let pad = 0.08 * extent;
            [-pad, extent + pad, -pad, extent + pad]
        });
        let span = (window[1] - window[0]).max(window[3] - window[2]).max(f64::MIN_POSITIVE);
        Frame {
            x0: window[0],
            y0: window[2],
            scale: (style.size - 2.0 * style.margin) / span,
            size: style.size,
            margin: style.margin,
            window,
        }
    }

    pub fn to_screen(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.margin + (x - self.x0) * self.scale,
            self.size - self.margin - (y - self.y0) * self.scale,
        )
    }

    pub fn to_scene(&self, sx: f64, sy: f64) -> (f64, f64) {
        (
            (sx - self.margin) / self.scale + self.x0,
            (self.size - self.margin - sy) / self.scale + self.y0,
        )
    }

    /// Clips the line through `p` and `q` to the window.
    fn clip_line(&self, p: [f64; 2], q: [f64; 2]) -> Option<([f64; 2], [f64; 2])> {
        let d = [q[0] - p[0], q[1] - p[1]];
        let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
        for (k, lo, hi) in [(0, self.window[0], self.window[1]), (1, self.window[2], self.window[3])] {
            if d[k].abs() < 1e-300 {
                if p[k] < lo || p[k] > hi {
                    return None;
                }
                continue;
            }
            let (a, b) = ((lo - p[k]) / d[k], (hi - p[k]) / d[k]);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        (t0 < t1 && t0.is_finite() && t1.is_finite()).then(|| {
            (
                [p[0] + t0 * d[0], p[1] + t0 * d[1]],
                [p[0] + t1 * d[0], p[1] + t1 * d[1]],
            )
        })
    }
}

fn finite(p: [f64; 2]) -> bool {
    p[0].is_finite() && p[1].is_finite()
}

fn extent<'a>(points: impl Iterator<Item = &'a [f64; 2]>) -> f64 {
    points
        .filter(|p| finite(**p))
        .fold(1.0f64, |m, p| m.max(p[0]).max(p[1]))
}

fn figure_points(fig: &Figure<f64>) -> Vec<[f64; 2]> {
    fig.objects
        .iter()
        .filter_map(|(_, o)| match o {
            GeoObject::Point(p) => Some([p.x, p.y]),
            _ => None,
        })
        .collect()
}

struct Canvas {
    out: String,
    frame: Frame,
}

impl Canvas {
    fn open(frame: Frame) -> Canvas {
        let mut out = String::new();
        let s = frame.size;
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s:.0}\" height=\"{s:.0}\" viewBox=\"0 0 {s:.0} {s:.0}\">"
        );
        let _ = writeln!(
            out,
            "<desc>scene-to-screen: sx = {:.6} + {:.6}*(x - {:.6}); sy = {:.6} - {:.6}*(y - {:.6})</desc>",
            frame.margin,
            frame.scale,
            frame.x0,
            frame.size - frame.margin,
            frame.scale,
            frame.y0
        );
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        let mut c = Canvas { out, frame };
        c.axes();
        c
    }

    fn axes(&mut self) {
        let w = self.frame.window;
        let (ax0, ay) = self.frame.to_screen(w[0], 0.0);
        let (ax1, _) = self.frame.to_screen(w[1], 0.0);
        let (cx, cy0) = self.frame.to_screen(0.0, w[2]);
        let (_, cy1) = self.frame.to_screen(0.0, w[3]);
        let _ = writeln!(
            self.out,
            "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\"><line x1=\"{ax0:.6}\" y1=\"{ay:.6}\" x2=\"{ax1:.6}\" y2=\"{ay:.6}\"/><line x1=\"{cx:.6}\" y1=\"{cy0:.6}\" x2=\"{cx:.6}\" y2=\"{cy1:.6}\"/></g>"
        );
    }

    fn segment(&mut self, a: [f64; 2], b: [f64; 2], attrs: &str) {
        if !finite(a) || !finite(b) {
            return;
        }
        let (x1, y1) = self.frame.to_screen(a[0], a[1]);
        let (x2, y2) = self.frame.to_screen(b[0], b[1]);
        let _ = writeln!(
            self.out,
            "<line x1=\"{x1:.6}\" y1=\"{y1:.6}\" x2=\"{x2:.6}\" y2=\"{y2:.6}\" {attrs}/>"
        );
    }

    fn construction(&mut self, fig: &Figure<f64>) {
        self.out
            .push_str("<g id=\"construction\" stroke=\"#888\" stroke-width=\"0.75\" stroke-dasharray=\"4 3\" fill=\"none\">\n");
        for (_, o) in &fig.objects {
            match o {
                GeoObject::Line(l) => {
                    if let Some((a, b)) = self.frame.clip_line([l.p.x, l.p.y], [l.q.x, l.q.y]) {
                        self.segment(a, b, "");
                    }
                }
                GeoObject::Circle(c) => {
                    let r = ((c.through.x - c.center.x).powi(2) + (c.through.y - c.center.y).powi(2)).sqrt();
                    if !finite([c.center.x, c.center.y]) || !r.is_finite() || r == 0.0 {
                        continue;
                    }
                    let (cx, cy) = self.frame.to_screen(c.center.x, c.center.y);
                    let _ = writeln!(
                        self.out,
                        "<circle cx=\"{cx:.6}\" cy=\"{cy:.6}\" r=\"{:.6}\"/>",
                        r * self.frame.scale
                    );
                }
                GeoObject::Point(_) => {}
            }
        }
        self.out.push_str("</g>\n");
    }

    fn labelled_points(&mut self, fig: &Figure<f64>) {
        let find = |id: &str| fig.point(id).map(|p| [p.x, p.y]).filter(|p| finite(*p));
        let (x, y, yp) = (find("X"), find("Y"), find(&fig.output_id));
        if let (Some(o), Some(y)) = (find("O"), y) {
            self.segment(o, y, "stroke=\"#1f5fbf\" stroke-width=\"2\"");
        }
        if let (Some(x), Some(yp)) = (x, yp) {
            self.segment(x, yp, "stroke=\"#c0392b\" stroke-width=\"2\"");
        }
        self.out.push_str("<g id=\"points\" font-family=\"serif\" font-size=\"14\">\n");
        for (id, label) in [("O", "O"), ("U", "U"), ("X", "X"), ("Y", "Y")]
            .into_iter()
            .chain([(fig.output_id.as_str(), "Y′")])
        {
            if let Some(p) = find(id) {
                let (sx, sy) = self.frame.to_screen(p[0], p[1]);
                let _ = writeln!(
                    self.out,
                    "<circle class=\"point\" data-id=\"{id}\" cx=\"{sx:.6}\" cy=\"{sy:.6}\" r=\"3\"/><text x=\"{:.6}\" y=\"{:.6}\">{label}</text>",
                    sx + 5.0,
                    sy - 5.0
                );
            }
        }
        self.out.push_str("</g>\n");
    }

    fn locus(&mut self, locus: &Locus) {
        self.out
            .push_str("<g id=\"locus\" stroke=\"#c0392b\" stroke-width=\"1.5\" fill=\"none\">\n");
        for (i, br) in locus.branches.iter().enumerate() {
            let mut d = String::new();
            for p in br.iter().filter(|p| finite(**p)) {
                let (sx, sy) = self.frame.to_screen(p[0], p[1]);
                let _ = write!(d, "{}{sx:.6} {sy:.6}", if d.is_empty() { "M" } else { " L" });
            }
            if !d.is_empty() {
                let _ = writeln!(self.out, "<path data-branch=\"{i}\" d=\"{d}\"/>");
            }
        }
        self.out.push_str("</g>\n");
    }

    fn close(mut self) -> Vec<u8> {
        self.out.push_str("</svg>\n");
        self.out.into_bytes()
    }
}

/// The scene frame `figure_to_svg` would use.
pub fn figure_frame(fig: &Figure<f64>, style: &SvgStyle) -> Frame {
    Frame::new(style, extent(figure_points(fig).iter()))
}

/// The scene frame `locus_to_svg` would use.
pub fn locus_frame(locus: &Locus, fig: Option<&Figure<f64>>, style: &SvgStyle) -> Frame {
    let fig_pts = fig.map(figure_points).unwrap_or_default();
    Frame::new(style, extent(locus.points().chain(fig_pts.iter())))
}

pub fn figure_to_svg(fig: &Figure<f64>, style: &SvgStyle) -> Vec<u8> {
    let mut c = Canvas::open(figure_frame(fig, style));
    if style.show_construction {
        c.construction(fig);
    }
    c.labelled_points(fig);
    c.close()
}

pub fn locus_to_svg(locus: &Locus, fig: Option<&Figure<f64>>, style: &SvgStyle) -> Vec<u8> {
    let mut c = Canvas::open(locus_frame(locus, fig, style));
    if let Some(f) = fig {
        if style.show_construction {
            c.construction(f);
        }
    }
    c.locus(locus);
    if let Some(f) = fig {
        c.labelled_points(f);
    }
    c.close()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile_source, CompileOptions};
    use crate::construct::interpret;
    use crate::expr::CoeffEnv;

    fn square_at(x: f64) -> Figure<f64> {
        let p = compile_source("x^2", &CompileOptions::default()).unwrap();
        interpret(&p, &x, &CoeffEnv::new()).unwrap()
    }

    #[test]
    fn labels_y_prime_at_scene_position() {
        let fig = square_at(1.5);
        let style = SvgStyle::default();
        let svg = String::from_utf8(figure_to_svg(&fig, &style)).unwrap();
        let frame = figure_frame(&fig, &style);
        let (sx, sy) = frame.to_screen(1.5, 2.25);
        let needle = format!("data-id=\"Yp\" cx=\"{sx:.6}\" cy=\"{sy:.6}\"");
        assert!(svg.contains(&needle), "{needle}");
        assert!(svg.contains(">Y′</text>"));
        assert!(svg.contains("stroke-dasharray"));
        let (x, y) = frame.to_scene(sx, sy);
        assert!((x - 1.5).abs() < 1e-9 && (y - 2.25).abs() < 1e-9);
    }

    #[test]
    fn deterministic_bytes() {
        let fig = square_at(2.0);
        let style = SvgStyle::default();
        assert_eq!(figure_to_svg(&fig, &style), figure_to_svg(&fig, &style));
    }

    #[test]
    fn empty_locus_has_axes_only() {
        let l = Locus {
            branches: vec![],
            breaks: vec![],
            domain: [0.0, 1.0],
            samples: 0,
            reflected: false,
        };
        let svg = String::from_utf8(locus_to_svg(&l, None, &SvgStyle::default())).unwrap();
        assert!(svg.contains("id=\"axes\""));
        assert!(!svg.contains("<path"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
