//! Static SVG phase portraits: the region boundary as a thick closed path,
//! nullclines and asymptotes as thin paths, equilibria as markers, and any
//! number of trajectories overlaid.

use regionkit::geometry::{nullcline_x2, oblique_asymptote_x2};
use regionkit::region::InvariantRegion;
use regionkit::system::{equilibria, State};
use std::fmt::Write;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 620.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;
const TRAJECTORY_COLORS: [&str; 6] = [
    "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b",
];

struct Window {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Window {
    fn fit(region: &InvariantRegion, trajectories: &[Vec<(f64, State)>]) -> Self {
        let mut pts: Vec<State> = region.polygon.clone();
        pts.extend(equilibria(&region.params).iter().map(|eq| eq.location));
        for t in trajectories {
            pts.extend(t.iter().map(|(_, s)| *s));
        }
        let mut w = Window {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for s in &pts {
            w.x_min = w.x_min.min(s.x1);
            w.x_max = w.x_max.max(s.x1);
            w.y_min = w.y_min.min(s.x2);
            w.y_max = w.y_max.max(s.x2);
        }
        // 10% margins around the data.
        let dx = (w.x_max - w.x_min).max(1e-6) * 0.1;
        let dy = (w.y_max - w.y_min).max(1e-6) * 0.1;
        w.x_min -= dx;
        w.x_max += dx;
        w.y_min -= dy;
        w.y_max += dy;
        w
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        // SVG y grows downward.
        MARGIN_T + (self.y_max - y) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    fn contains(&self, s: State) -> bool {
        s.x1 >= self.x_min && s.x1 <= self.x_max && s.x2 >= self.y_min && s.x2 <= self.y_max
    }
}

fn path_from(points: impl IntoIterator<Item = State>, w: &Window, close: bool) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for s in points {
        if !w.contains(s) || !s.is_finite() {
            pen_down = false;
            continue;
        }
        let cmd = if pen_down { 'L' } else { 'M' };
        let _ = write!(d, "{cmd}{:.2} {:.2} ", w.px(s.x1), w.py(s.x2));
        pen_down = true;
    }
    if close && pen_down {
        d.push('Z');
    }
    d
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let step = 10f64.powf(span.log10().floor());
    let step = if span / step > 8.0 {
        step * 2.0
    } else if span / step < 3.0 {
        step / 2.0
    } else {
        step
    };
    let mut v = Vec::new();
    let mut t = (lo / step).ceil() * step;
    while t <= hi {
        v.push(t);
        t += step;
    }
    v
}

/// Render the phase portrait. Trajectories are `(t, state)` sample lists.
pub fn render(region: &InvariantRegion, trajectories: &[Vec<(f64, State)>]) -> String {
    let p = &region.params;
    let w = Window::fit(region, trajectories);
    let mut out = String::new();
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = write!(
        out,
        "<desc>Phase portrait, window auto-fit to contents with 10% margins: \
         x1 in [{:.4}, {:.4}], x2 in [{:.4}, {:.4}]</desc>",
        w.x_min, w.x_max, w.y_min, w.y_max
    );
    out.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);

    // Frame and axis ticks.
    let _ = write!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333" stroke-width="1"/>"##,
        MARGIN_L,
        MARGIN_T,
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    );
    for t in ticks(w.x_min, w.x_max) {
        let x = w.px(t);
        let _ = write!(
            out,
            r##"<line x1="{x:.1}" y1="{0}" x2="{x:.1}" y2="{1}" stroke="#333"/><text x="{x:.1}" y="{2}" font-size="12" text-anchor="middle">{t:.2}</text>"##,
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0,
            HEIGHT - MARGIN_B + 18.0
        );
    }
    for t in ticks(w.y_min, w.y_max) {
        let y = w.py(t);
        let _ = write!(
            out,
            r##"<line x1="{0}" y1="{y:.1}" x2="{1}" y2="{y:.1}" stroke="#333"/><text x="{2}" y="{3:.1}" font-size="12" text-anchor="end">{t:.2}</text>"##,
            MARGIN_L - 5.0,
            MARGIN_L,
            MARGIN_L - 8.0,
            y + 4.0
        );
    }
    let _ = write!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">x1</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 10.0
    );
    let _ = write!(
        out,
        r#"<text x="18" y="{:.1}" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.1})">x2</text>"#,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0
    );

    // Nullclines: the x1-axis (vertical flow) and the three branches of the
    // horizontal-flow curve, split at the vertical asymptotes x1 = +-nu.
    let _ = write!(
        out,
        r##"<line x1="{}" y1="{:.1}" x2="{}" y2="{:.1}" stroke="#999" stroke-width="0.8"/>"##,
        MARGIN_L,
        w.py(0.0),
        WIDTH - MARGIN_R,
        w.py(0.0)
    );
    let n = 600;
    let eps = 1e-4;
    let branches = [
        (w.x_min, -p.nu() - eps),
        (-p.nu() + eps, p.nu() - eps),
        (p.nu() + eps, w.x_max),
    ];
    for (lo, hi) in branches {
        if hi <= lo {
            continue;
        }
        let pts = (0..=n).filter_map(|k| {
            let x1 = lo + (hi - lo) * k as f64 / n as f64;
            nullcline_x2(p, x1).ok().map(|x2| State::new(x1, x2))
        });
        let d = path_from(pts, &w, false);
        if !d.is_empty() {
            let _ = write!(
                out,
                r##"<path d="{d}" fill="none" stroke="#999" stroke-width="0.8"/>"##
            );
        }
    }
    // Vertical and oblique asymptotes, dashed.
    for sign in [-1.0, 1.0] {
        let x = sign * p.nu();
        if x >= w.x_min && x <= w.x_max {
            let _ = write!(
                out,
                r##"<line x1="{0:.1}" y1="{1}" x2="{0:.1}" y2="{2}" stroke="#bbb" stroke-width="0.8" stroke-dasharray="4 3"/>"##,
                w.px(x),
                MARGIN_T,
                HEIGHT - MARGIN_B
            );
        }
    }
    let oblique = (0..=n).map(|k| {
        let x1 = w.x_min + (w.x_max - w.x_min) * k as f64 / n as f64;
        State::new(x1, oblique_asymptote_x2(p, x1))
    });
    let d = path_from(oblique, &w, false);
    if !d.is_empty() {
        let _ = write!(
            out,
            r##"<path d="{d}" fill="none" stroke="#bbb" stroke-width="0.8" stroke-dasharray="4 3"/>"##
        );
    }

    // Trajectories under the boundary so the thick line stays visible.
    for (i, traj) in trajectories.iter().enumerate() {
        let color = TRAJECTORY_COLORS[i % TRAJECTORY_COLORS.len()];
        let d = path_from(traj.iter().map(|(_, s)| *s), &w, false);
        if !d.is_empty() {
            let _ = write!(
                out,
                r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1"/>"#
            );
        }
    }

    // The region boundary, thick.
    let d = path_from(region.polygon.iter().copied(), &w, true);
    let _ = write!(
        out,
        r##"<path d="{d}" fill="none" stroke="#111" stroke-width="2.5"/>"##
    );

    // Equilibria markers.
    for eq in equilibria(p) {
        if w.contains(eq.location) {
            let _ = write!(
                out,
                r##"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="#d62728"/>"##,
                w.px(eq.location.x1),
                w.py(eq.location.x2)
            );
        }
    }

    out.push_str("</svg>");
    out
}
