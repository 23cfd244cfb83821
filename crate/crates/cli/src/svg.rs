//! Minimal SVG line plots: solid polylines for numeric columns, a dashed
//! black overlay for matching analytic columns, and dashed vertical markers
//! at the two relaxation timescales. No interactivity, no text beyond axis
//! labels and a small legend.

use crate::csvio::Table;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

struct Axis {
    min: f64,
    max: f64,
    log: bool,
}

impl Axis {
    fn project(&self, v: f64, lo_px: f64, hi_px: f64) -> f64 {
        let (v, min, max) = if self.log {
            (v.log10(), self.min.log10(), self.max.log10())
        } else {
            (v, self.min, self.max)
        };
        lo_px + (v - min) / (max - min) * (hi_px - lo_px)
    }
}

/// Render a table as polylines over `t`. `overlay` columns are matched by
/// name and drawn dashed. With `log_x` the t = 0 sample is dropped (it has no
/// place on a log axis).
pub fn line_plot(
    table: &Table,
    overlay: Option<&Table>,
    tau1: Option<f64>,
    tau2: Option<f64>,
    log_x: bool,
) -> String {
    let t_idx = table.column_index("t").expect("time column");
    let series: Vec<usize> = (0..table.columns.len())
        .filter(|&i| i != t_idx && !table.columns[i].ends_with("_se"))
        .collect();

    let usable = |t: f64| !log_x || t > 0.0;
    let ts: Vec<f64> = table.column(t_idx).filter(|&t| usable(t)).collect();
    let (t_min, t_max) = bounds(ts.iter().copied());

    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for &s in &series {
        for row in &table.rows {
            if usable(row[t_idx]) {
                y_min = y_min.min(row[s]);
                y_max = y_max.max(row[s]);
            }
        }
    }
    if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad = 0.05 * (y_max - y_min);
    let x_axis = Axis {
        min: t_min,
        max: t_max,
        log: log_x,
    };
    let y_axis = Axis {
        min: y_min - pad,
        max: y_max + pad,
        log: false,
    };

    let px = |t: f64| x_axis.project(t, MARGIN_L, WIDTH - MARGIN_R);
    let py = |y: f64| y_axis.project(y, HEIGHT - MARGIN_B, MARGIN_T);

    let mut out = String::with_capacity(1 << 16);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));

    // axes
    out.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = MARGIN_L,
        r = WIDTH - MARGIN_R,
        t = MARGIN_T,
        b = HEIGHT - MARGIN_B
    ));

    // x ticks: decades on log axes, six uniform ticks otherwise
    if log_x {
        let lo = t_min.log10().ceil() as i32;
        let hi = t_max.log10().floor() as i32;
        for d in lo..=hi {
            let t = 10f64.powi(d);
            let x = px(t);
            out.push_str(&format!(
                "<line x1=\"{x:.1}\" y1=\"{b}\" x2=\"{x:.1}\" y2=\"{b2}\" stroke=\"black\"/>\n\
                 <text x=\"{x:.1}\" y=\"{ty}\" text-anchor=\"middle\">1e{d}</text>\n",
                b = HEIGHT - MARGIN_B,
                b2 = HEIGHT - MARGIN_B + 5.0,
                ty = HEIGHT - MARGIN_B + 18.0
            ));
        }
    } else {
        for k in 0..=5 {
            let t = t_min + (t_max - t_min) * k as f64 / 5.0;
            let x = px(t);
            out.push_str(&format!(
                "<line x1=\"{x:.1}\" y1=\"{b}\" x2=\"{x:.1}\" y2=\"{b2}\" stroke=\"black\"/>\n\
                 <text x=\"{x:.1}\" y=\"{ty}\" text-anchor=\"middle\">{t:.4}</text>\n",
                b = HEIGHT - MARGIN_B,
                b2 = HEIGHT - MARGIN_B + 5.0,
                ty = HEIGHT - MARGIN_B + 18.0
            ));
        }
    }
    for k in 0..=4 {
        let y = y_axis.min + (y_axis.max - y_axis.min) * k as f64 / 4.0;
        let ypx = py(y);
        out.push_str(&format!(
            "<line x1=\"{l2}\" y1=\"{ypx:.1}\" x2=\"{l}\" y2=\"{ypx:.1}\" stroke=\"black\"/>\n\
             <text x=\"{tx}\" y=\"{typ:.1}\" text-anchor=\"end\">{y:.3}</text>\n",
            l = MARGIN_L,
            l2 = MARGIN_L - 5.0,
            tx = MARGIN_L - 8.0,
            typ = ypx + 4.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\">t</text>\n",
        x = (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        y = HEIGHT - 12.0
    ));

    // timescale markers
    for (tau, label) in [(tau2, "tau2"), (tau1, "tau1")] {
        if let Some(tau) = tau {
            if tau > t_min && tau < t_max {
                let x = px(tau);
                out.push_str(&format!(
                    "<line x1=\"{x:.1}\" y1=\"{t}\" x2=\"{x:.1}\" y2=\"{b}\" stroke=\"gray\" \
                     stroke-dasharray=\"4 4\"/>\n\
                     <text x=\"{x:.1}\" y=\"{ty}\" text-anchor=\"middle\" fill=\"gray\">{label}</text>\n",
                    t = MARGIN_T,
                    b = HEIGHT - MARGIN_B,
                    ty = MARGIN_T + 12.0
                ));
            }
        }
    }

    // numeric series, solid
    for (k, &s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut points = String::new();
        for row in &table.rows {
            if usable(row[t_idx]) {
                points.push_str(&format!("{:.2},{:.2} ", px(row[t_idx]), py(row[s])));
            }
        }
        out.push_str(&format!(
            "<polyline points=\"{points}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" fill=\"{color}\">{name}</text>\n",
            x = WIDTH - MARGIN_R - 110.0,
            y = MARGIN_T + 16.0 * (k as f64 + 1.0),
            name = table.columns[s]
        ));
    }

    // analytic overlay, dashed black, matched by column name
    if let Some(reference) = overlay {
        if let Some(rt) = reference.column_index("t") {
            for (s, name) in reference.columns.iter().enumerate() {
                if s == rt || table.column_index(name).is_none() {
                    continue;
                }
                let mut points = String::new();
                for row in &reference.rows {
                    if usable(row[rt]) {
                        points.push_str(&format!("{:.2},{:.2} ", px(row[rt]), py(row[s])));
                    }
                }
                out.push_str(&format!(
                    "<polyline points=\"{points}\" fill=\"none\" stroke=\"black\" \
                     stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n"
                ));
            }
        }
    }

    out.push_str("</svg>\n");
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}
