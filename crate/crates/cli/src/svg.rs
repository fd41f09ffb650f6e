//! Minimal static SVG charts for eyeballing the plot CSVs.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 4] = ["#3b6ea5", "#d1495b", "#66a182", "#edae49"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A plot area mapping data coordinates onto one panel.
struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Panel {
    fn new(x0: f64, y0: f64, w: f64, h: f64, xr: (f64, f64), yr: (f64, f64)) -> Panel {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Panel {
            x0,
            y0,
            w,
            h,
            xr: widen(xr),
            yr: widen(yr),
        }
    }

    fn x(&self, v: f64) -> f64 {
        self.x0 + (v - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    fn y(&self, v: f64) -> f64 {
        self.y0 + self.h - (v - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }

    fn frame(&self, s: &mut String, xlabel: &str, ylabel: &str) {
        let (l, t, r, b) = (self.x0, self.y0, self.x0 + self.w, self.y0 + self.h);
        let _ = writeln!(s, r##"<path d="M{l:.1},{t:.1} L{l:.1},{b:.1} L{r:.1},{b:.1}" stroke="#333" fill="none"/>"##);
        for (v, anchor_x) in [(self.xr.0, l), (self.xr.1, r)] {
            let _ = writeln!(s, r#"<text x="{anchor_x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#, b + 12.0, tick(v));
        }
        for (v, anchor_y) in [(self.yr.0, b), (self.yr.1, t)] {
            let _ = writeln!(s, r#"<text x="{:.1}" y="{anchor_y:.1}" font-size="10" text-anchor="end">{}</text>"#, l - 4.0, tick(v));
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#, l + self.w / 2.0, b + 26.0, esc(xlabel));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
            l - 30.0,
            t + self.h / 2.0,
            l - 30.0,
            t + self.h / 2.0,
            esc(ylabel)
        );
    }
}

fn tick(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn document(title: &str, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n{body}</svg>\n",
        W / 2.0,
        esc(title)
    )
}

fn legend(s: &mut String, names: &[&str]) {
    for (i, n) in names.iter().enumerate() {
        let y = 34.0 + 14.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{}"/>"#, W - 150.0, y - 9.0, PALETTE[i % 4]);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}" font-size="11">{}</text>"#, W - 135.0, esc(n));
    }
}

/// Overlaid histograms sharing bin edges, with an optional vertical marker.
pub fn histogram(title: &str, xlabel: &str, lo: f64, hi: f64, series: &[(&str, &[usize])], marker: Option<(&str, f64)>) -> String {
    let bins = series.first().map_or(1, |s| s.1.len()).max(1);
    let ymax = series.iter().flat_map(|s| s.1.iter()).copied().max().unwrap_or(0).max(1) as f64;
    let p = Panel::new(MARGIN + 10.0, MARGIN, W - 2.0 * MARGIN - 10.0, H - 2.0 * MARGIN, (lo, hi), (0.0, ymax));
    let mut s = String::new();
    let bw = (hi - lo) / bins as f64;
    for (i, (_, counts)) in series.iter().enumerate() {
        for (k, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (x, x1) = (p.x(lo + bw * k as f64), p.x(lo + bw * (k + 1) as f64));
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}" fill-opacity="0.55"/>"#,
                p.y(c as f64),
                (x1 - x).max(0.5),
                p.y(0.0) - p.y(c as f64),
                PALETTE[i % 4]
            );
        }
    }
    if let Some((name, v)) = marker {
        let x = p.x(v);
        let _ = writeln!(s, r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#c00" stroke-width="2"/>"##, p.y0, p.y0 + p.h);
        let _ = writeln!(s, r##"<text x="{:.1}" y="{:.1}" font-size="10" fill="#c00">{}</text>"##, x + 3.0, p.y0 + 10.0, esc(name));
    }
    p.frame(&mut s, xlabel, "count");
    legend(&mut s, &series.iter().map(|x| x.0).collect::<Vec<_>>());
    document(title, &s)
}

/// Vertical bars, one per category, in one or more series side by side.
pub fn bars(title: &str, ylabel: &str, categories: &[String], series: &[(&str, Vec<f64>)]) -> String {
    let n = categories.len().max(1);
    let ymax = series.iter().flat_map(|s| s.1.iter()).copied().fold(0.0, f64::max).max(1e-9);
    let p = Panel::new(MARGIN + 10.0, MARGIN, W - 2.0 * MARGIN - 10.0, H - 2.0 * MARGIN - 20.0, (0.0, n as f64), (0.0, ymax));
    let mut s = String::new();
    let m = series.len().max(1) as f64;
    for (i, (_, values)) in series.iter().enumerate() {
        for (k, &v) in values.iter().enumerate() {
            let slot = (p.x(k as f64 + 1.0) - p.x(k as f64)) * 0.8 / m;
            let x = p.x(k as f64) + (p.x(k as f64 + 1.0) - p.x(k as f64)) * 0.1 + slot * i as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{:.1}" width="{slot:.1}" height="{:.1}" fill="{}"/>"#,
                p.y(v),
                p.y(0.0) - p.y(v),
                PALETTE[i % 4]
            );
        }
    }
    for (k, c) in categories.iter().enumerate() {
        let x = (p.x(k as f64) + p.x(k as f64 + 1.0)) / 2.0;
        let y = p.y0 + p.h + 14.0;
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" font-size="9" text-anchor="end" transform="rotate(-45 {x:.1} {y:.1})">{}</text>"#,
            esc(c)
        );
    }
    p.frame(&mut s, "", ylabel);
    if series.len() > 1 {
        legend(&mut s, &series.iter().map(|x| x.0).collect::<Vec<_>>());
    }
    document(title, &s)
}

/// One box per series: (name, min, q1, median, q3, max, outliers).
pub type BoxRow<'a> = (&'a str, f64, f64, f64, f64, f64, &'a [f64]);

pub fn boxplots(title: &str, ylabel: &str, rows: &[BoxRow]) -> String {
    let lo = rows.iter().flat_map(|r| std::iter::once(r.1).chain(r.6.iter().copied())).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().flat_map(|r| std::iter::once(r.5).chain(r.6.iter().copied())).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let n = rows.len().max(1) as f64;
    let p = Panel::new(MARGIN + 10.0, MARGIN, W - 2.0 * MARGIN - 10.0, H - 2.0 * MARGIN, (0.0, n), (lo, hi));
    let mut s = String::new();
    for (k, &(name, min, q1, med, q3, max, outliers)) in rows.iter().enumerate() {
        let (l, r) = (p.x(k as f64 + 0.3), p.x(k as f64 + 0.7));
        let c = (l + r) / 2.0;
        let col = PALETTE[k % 4];
        let _ = writeln!(s, r##"<line x1="{c:.1}" y1="{:.1}" x2="{c:.1}" y2="{:.1}" stroke="#333"/>"##, p.y(min), p.y(max));
        let _ = writeln!(
            s,
            r##"<rect x="{l:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{col}" fill-opacity="0.6" stroke="#333"/>"##,
            p.y(q3),
            r - l,
            (p.y(q1) - p.y(q3)).max(0.5)
        );
        let _ = writeln!(s, r##"<line x1="{l:.1}" y1="{:.1}" x2="{r:.1}" y2="{:.1}" stroke="#000" stroke-width="2"/>"##, p.y(med), p.y(med));
        for &o in outliers {
            let _ = writeln!(s, r##"<circle cx="{c:.1}" cy="{:.1}" r="2.5" fill="none" stroke="#333"/>"##, p.y(o));
        }
        let _ = writeln!(s, r#"<text x="{c:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#, p.y0 + p.h + 14.0, esc(name));
    }
    p.frame(&mut s, "", ylabel);
    document(title, &s)
}

/// Small-multiple scatter panels sharing the x variable.
pub fn scatter_panels(title: &str, xlabel: &str, panels: &[(&str, Vec<(f64, f64)>, Option<f64>)]) -> String {
    let cols = panels.len().clamp(1, 3);
    let rows = panels.len().div_ceil(cols).max(1);
    let (cw, ch) = ((W - 20.0) / cols as f64, (H - 40.0) / rows as f64);
    let mut s = String::new();
    for (i, (ylabel, pts, r)) in panels.iter().enumerate() {
        let (cx, cy) = (10.0 + cw * (i % cols) as f64, 30.0 + ch * (i / cols) as f64);
        let range = |f: fn(&(f64, f64)) -> f64| {
            pts.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
        };
        let (xr, yr) = (range(|p| p.0), range(|p| p.1));
        let fix = |r: (f64, f64)| if r.0.is_finite() { r } else { (0.0, 1.0) };
        let p = Panel::new(cx + 45.0, cy + 10.0, cw - 60.0, ch - 50.0, fix(xr), fix(yr));
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{}"/>"#, p.x(x), p.y(y), PALETTE[0]);
        }
        let label = match r {
            Some(r) => format!("{ylabel} (r = {r:.3})"),
            None => format!("{ylabel} (r undefined)"),
        };
        p.frame(&mut s, xlabel, &label);
    }
    document(title, &s)
}
