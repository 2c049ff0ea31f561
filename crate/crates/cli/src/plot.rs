//! Self-contained SVG line charts rendered from sweep CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Horizontal reference line `(label, y)`.
    pub reference: Option<(String, f64)>,
    pub log_x: bool,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|k| k * mag)
        .find(|s| span / s <= count as f64)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

impl Chart {
    pub fn render(&self) -> String {
        let tx = |x: f64| if self.log_x { x.log10() } else { x };
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|&(x, y)| (tx(x), y)))
            .collect();
        let (mut x0, mut x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
        let (mut y0, mut y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
        if let Some((_, r)) = &self.reference {
            y0 = y0.min(*r);
            y1 = y1.max(*r);
        }
        y0 = y0.min(0.0);
        if x1 - x0 < 1e-12 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        y1 += 0.05 * (y1 - y0);
        let pw = WIDTH - MARGIN_L - MARGIN_R;
        let ph = HEIGHT - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut svg = String::new();
        writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(
            svg,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_L + pw / 2.0,
            esc(&self.title)
        )
        .unwrap();
        // axes and ticks
        writeln!(
            svg,
            r##"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
        )
        .unwrap();
        for t in nice_ticks(x0, x1, 8) {
            let label = if self.log_x { format!("{}", 10f64.powf(t)) } else { format!("{t}") };
            writeln!(
                svg,
                r##"<line x1="{x:.1}" y1="{b:.1}" x2="{x:.1}" y2="{b2:.1}" stroke="#333"/><text x="{x:.1}" y="{ty:.1}" text-anchor="middle">{label}</text>"##,
                x = sx(t),
                b = MARGIN_T + ph,
                b2 = MARGIN_T + ph + 5.0,
                ty = MARGIN_T + ph + 18.0
            )
            .unwrap();
        }
        for t in nice_ticks(y0, y1, 6) {
            writeln!(
                svg,
                r##"<line x1="{l:.1}" y1="{y:.1}" x2="{r:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{tx:.1}" y="{ty:.1}" text-anchor="end">{t}</text>"##,
                l = MARGIN_L,
                r = MARGIN_L + pw,
                y = sy(t),
                tx = MARGIN_L - 6.0,
                ty = sy(t) + 4.0
            )
            .unwrap();
        }
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_L + pw / 2.0,
            HEIGHT - 12.0,
            esc(&self.x_label)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text transform="translate(18 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            MARGIN_T + ph / 2.0,
            esc(&self.y_label)
        )
        .unwrap();

        if let Some((label, r)) = &self.reference {
            writeln!(
                svg,
                r##"<line x1="{MARGIN_L}" y1="{y:.1}" x2="{x2:.1}" y2="{y:.1}" stroke="#555" stroke-dasharray="6 4"/><text x="{tx:.1}" y="{y:.1}" fill="#555">{}</text>"##,
                esc(label),
                y = sy(*r),
                x2 = MARGIN_L + pw,
                tx = MARGIN_L + pw + 6.0
            )
            .unwrap();
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(tx(x)), sy(y)))
                .collect();
            writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            )
            .unwrap();
            for &(x, y) in &s.points {
                writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"><title>{x}, {y}</title></circle>"#,
                    sx(tx(x)),
                    sy(y)
                )
                .unwrap();
            }
            let ly = MARGIN_T + 14.0 + 16.0 * i as f64;
            writeln!(
                svg,
                r#"<line x1="{a:.1}" y1="{ly:.1}" x2="{b:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{c:.1}" y="{t:.1}">{}</text>"#,
                esc(&s.label),
                a = MARGIN_L + pw + 8.0,
                b = MARGIN_L + pw + 24.0,
                c = MARGIN_L + pw + 28.0,
                t = ly + 4.0
            )
            .unwrap();
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// A parsed CSV: header plus rows of raw cells.
struct Table {
    path: PathBuf,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> CliResult<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .flexible(true)
            .from_path(path)
            .map_err(|e| CliError::io(path, e))?;
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| CliError::Csv(format!("{}: {e}", path.display())))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()
            .map_err(|e| CliError::Csv(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path: path.to_path_buf(),
            header,
            rows,
        })
    }

    fn col(&self, name: &str) -> CliResult<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Csv(format!("{}: missing column `{name}`", self.path.display()))
        })
    }

    fn has(&self, names: &[&str]) -> bool {
        names.iter().all(|n| self.header.iter().any(|h| h == n))
    }

    /// Numeric values of `cols`, skipping rows where any cell is not a number.
    fn numeric(&self, cols: &[&str]) -> CliResult<Vec<Vec<f64>>> {
        let idx = cols.iter().map(|c| self.col(c)).collect::<CliResult<Vec<_>>>()?;
        Ok(self
            .rows
            .iter()
            .filter_map(|r| idx.iter().map(|&i| r.get(i)?.parse::<f64>().ok()).collect())
            .collect())
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Median of `col` per `(n, rank of M within n)`, one series per rank.
fn median_series(t: &Table, col: &str) -> CliResult<Vec<Series>> {
    let mut cells: BTreeMap<(u64, u64), Vec<f64>> = BTreeMap::new();
    for r in t.numeric(&["n", "M", col])? {
        cells.entry((r[0] as u64, r[1] as u64)).or_default().push(r[2]);
    }
    let mut by_rank: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    let mut rank = 0;
    let mut last_n = None;
    for ((n, _), mut vals) in cells {
        rank = if last_n == Some(n) { rank + 1 } else { 0 };
        last_n = Some(n);
        by_rank.entry(rank).or_default().push((n as f64, median(&mut vals)));
    }
    Ok(by_rank
        .into_iter()
        .map(|(k, points)| Series {
            label: format!("rate #{}", k + 1),
            points,
        })
        .collect())
}

fn nonempty(charts: &[(String, Chart)], source: &Path) -> CliResult<()> {
    if charts.iter().any(|(_, c)| c.series.iter().all(|s| s.points.is_empty())) {
        return Err(CliError::Csv(format!("{}: no data rows", source.display())));
    }
    Ok(())
}

/// Builds every chart the given CSVs support, as `(file name, chart)`.
pub fn charts_for(paths: &[PathBuf]) -> CliResult<Vec<(String, Chart)>> {
    let tables = paths.iter().map(|p| Table::read(p)).collect::<CliResult<Vec<_>>>()?;
    let reference = tables
        .iter()
        .find(|t| t.has(&["b", "thm2_rhs"]))
        .map(|t| t.numeric(&["b", "thm2_rhs"]))
        .transpose()?
        .and_then(|rows| rows.into_iter().find(|r| r[0] == 0.0))
        .map(|r| ("Gaussian bound, b = 0".to_string(), r[1]));

    let mut charts = Vec::new();
    for t in &tables {
        let mut made = Vec::new();
        if t.has(&["n", "M", "seed", "delta", "D_over_sqrt_n"]) {
            made.push((
                "delta_vs_n.svg".to_string(),
                Chart {
                    title: "Variational distance of the key".into(),
                    x_label: "n".into(),
                    y_label: "median Delta".into(),
                    series: median_series(t, "delta")?,
                    reference: None,
                    log_x: false,
                },
            ));
            made.push((
                "d_over_sqrt_n.svg".to_string(),
                Chart {
                    title: "Divergence over sqrt(n)".into(),
                    x_label: "n".into(),
                    y_label: "median D / sqrt(n) (nats)".into(),
                    series: median_series(t, "D_over_sqrt_n")?,
                    reference: reference.clone(),
                    log_x: false,
                },
            ));
        } else if t.has(&["n", "delta", "best_M"]) {
            let pts = t.numeric(&["n", "delta"])?.into_iter().map(|r| (r[0], r[1])).collect();
            made.push((
                "delta_n.svg".to_string(),
                Chart {
                    title: "delta(P) versus n".into(),
                    x_label: "n".into(),
                    y_label: "delta".into(),
                    series: vec![Series { label: "delta".into(), points: pts }],
                    reference: None,
                    log_x: false,
                },
            ));
        } else if t.has(&["n", "M", "d"]) {
            let mut by_n: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
            for r in t.numeric(&["n", "M", "d"])? {
                by_n.entry(r[0] as u64).or_default().push((r[1], r[2]));
            }
            made.push((
                "delta_curve.svg".to_string(),
                Chart {
                    title: "Distance to the flat family".into(),
                    x_label: "M".into(),
                    y_label: "d(P, P_C)".into(),
                    series: by_n
                        .into_iter()
                        .map(|(n, points)| Series { label: format!("n = {n}"), points })
                        .collect(),
                    reference: None,
                    log_x: true,
                },
            ));
        } else if t.has(&["b", "thm2_rhs"]) {
            continue;
        } else {
            return Err(CliError::Csv(format!(
                "{}: missing columns for any known plot",
                t.path.display()
            )));
        }
        nonempty(&made, &t.path)?;
        charts.extend(made);
    }
    Ok(charts)
}

/// Renders every chart, then writes them all into `out_dir`.
pub fn plot(paths: &[PathBuf], out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    let rendered: Vec<(PathBuf, String)> = charts_for(paths)?
        .into_iter()
        .map(|(name, c)| (out_dir.join(name), c.render()))
        .collect();
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    for (path, svg) in &rendered {
        fs::write(path, svg).map_err(|e| CliError::io(path, e))?;
    }
    Ok(rendered.into_iter().map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(0.0, 1.0, 5);
        assert_eq!(t.first(), Some(&0.0));
        assert!((t.last().unwrap() - 1.0).abs() < 1e-12);
        assert!(nice_ticks(3.0, 12.0, 8).len() >= 4);
    }

    #[test]
    fn render_is_deterministic_and_escapes() {
        let c = Chart {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series { label: "s".into(), points: vec![(1.0, 0.2), (2.0, 0.4)] }],
            reference: Some(("ref".into(), 0.3)),
            log_x: false,
        };
        let a = c.render();
        assert_eq!(a, c.render());
        assert!(a.contains("a &lt; b"));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<circle").count(), 2);
    }
}
