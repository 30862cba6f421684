//! Static SVG line charts written by hand, so identical inputs give
//! identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lossforge::harness::io::{write_atomic, CURVE_HEADER, INPUT_NOISE_HEADER, LABEL_NOISE_HEADER};
use lossforge::harness::parse_manifest;
use lossforge::losses::LossId;

use crate::{CliError, CliResult};

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    TestAcc,
    TrainAcc,
    TrainLoss,
    Accuracy,
}

impl Metric {
    fn column(self) -> &'static str {
        match self {
            Metric::TestAcc => "test_acc",
            Metric::TrainAcc => "train_acc",
            Metric::TrainLoss => "train_loss",
            Metric::Accuracy => "accuracy",
        }
    }
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Curve, input-noise or label-noise CSVs; all must share one schema
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// SVG file to write
    #[arg(long)]
    pub output: PathBuf,
    /// Column to plot [default: test_acc, or accuracy for input-noise files]
    #[arg(long, value_enum)]
    pub metric: Option<Metric>,
    /// Legend entry per input, in order [default: loss name from the manifest or path]
    #[arg(long = "label")]
    pub labels: Vec<String>,
    /// Chart title
    #[arg(long)]
    pub title: Option<String>,
    /// Logarithmic x axis; points with x <= 0 are left out
    #[arg(long)]
    pub log_x: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Schema {
    Curve,
    InputNoise,
    LabelNoise,
}

impl Schema {
    fn detect(header: &str) -> Option<Schema> {
        match header {
            CURVE_HEADER => Some(Schema::Curve),
            INPUT_NOISE_HEADER => Some(Schema::InputNoise),
            LABEL_NOISE_HEADER => Some(Schema::LabelNoise),
            _ => None,
        }
    }

    fn x_label(self) -> &'static str {
        match self {
            Schema::InputNoise => "epsilon",
            Schema::Curve | Schema::LabelNoise => "iteration",
        }
    }

    fn default_metric(self) -> Metric {
        match self {
            Schema::InputNoise => Metric::Accuracy,
            Schema::Curve | Schema::LabelNoise => Metric::TestAcc,
        }
    }
}

struct Table {
    schema: Schema,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

fn read_table(path: &Path) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| usage(format!("{}: {e}", path.display())))?
        .clone();
    if headers.is_empty() {
        return Err(usage(format!("{}: empty file", path.display())));
    }
    let header_line = headers.iter().collect::<Vec<_>>().join(",");
    let schema = Schema::detect(&header_line)
        .ok_or_else(|| usage(format!("{}: unrecognised header `{header_line}`", path.display())))?;

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| usage(format!("{}: row {}: `{field}` is not a number", path.display(), i + 2)))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(usage(format!("{}: no data rows", path.display())));
    }
    Ok(Table {
        schema,
        columns: headers.iter().map(String::from).collect(),
        rows,
    })
}

/// Loss name for the legend: the manifest beside the file, then any path
/// component that is a loss id, then the file stem.
fn legend_name(path: &Path) -> String {
    let candidates = [
        path.with_file_name("manifest.txt"),
        path.with_extension("manifest.txt"),
    ];
    for manifest in &candidates {
        let Ok(text) = fs::read_to_string(manifest) else { continue };
        let Ok(entries) = parse_manifest(&text) else { continue };
        if let Some(loss) = entries
            .iter()
            .find(|(k, _)| k == "loss")
            .and_then(|(_, v)| v.parse::<LossId>().ok())
        {
            return loss.symbol().to_string();
        }
    }
    for part in path.iter().rev() {
        if let Ok(loss) = part.to_string_lossy().parse::<LossId>() {
            return loss.symbol().to_string();
        }
    }
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn series_for(table: &Table, label: &str, metric: Metric, log_x: bool) -> CliResult<Vec<Series>> {
    let x_col = table.column(table.schema.x_label()).expect("schema has an x column");
    let y_col = table.column(metric.column()).ok_or_else(|| {
        usage(format!(
            "metric `{}` is not a column of `{}` files",
            metric.column(),
            table.columns.join(",")
        ))
    })?;
    let keep = |x: f64| !log_x || x > 0.0;
    let point = |row: &[f64]| (if log_x { row[x_col].log10() } else { row[x_col] }, row[y_col]);

    if table.schema != Schema::LabelNoise {
        let points = table.rows.iter().filter(|r| keep(r[x_col])).map(|r| point(r)).collect();
        return Ok(vec![Series {
            label: label.to_string(),
            points,
        }]);
    }
    // one series per corruption fraction, in order of appearance
    let f_col = table.column("fraction").expect("label-noise files have a fraction column");
    let mut out: Vec<(f64, Series)> = Vec::new();
    for row in &table.rows {
        if !keep(row[x_col]) {
            continue;
        }
        let fraction = row[f_col];
        let idx = match out.iter().position(|(f, _)| *f == fraction) {
            Some(i) => i,
            None => {
                out.push((
                    fraction,
                    Series {
                        label: format!("{label} f={fraction}"),
                        points: Vec::new(),
                    },
                ));
                out.len() - 1
            }
        };
        out[idx].1.points.push(point(row));
    }
    Ok(out.into_iter().map(|(_, s)| s).collect())
}

/// Round tick spacing covering `span` in about `target` steps.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let magnitude = 10f64.powf(raw.log10().floor());
    let scaled = raw / magnitude;
    let nice = if scaled <= 1.0 {
        1.0
    } else if scaled <= 2.0 {
        2.0
    } else if scaled <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * magnitude
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = tick_step(hi - lo, 5.0);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        // avoid printing -0
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(v: f64, log: bool) -> String {
    let v = if log { 10f64.powf(v) } else { v };
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn render(series: &[Series], metric: Metric, x_label: &str, title: &str, log_x: bool) -> CliResult<String> {
    let (x_lo, x_hi) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)))
        .ok_or_else(|| usage("nothing to plot".into()))?;
    let (x_lo, x_hi) = padded(x_lo, x_hi);
    let (y_lo, y_hi) = if metric == Metric::TrainLoss {
        let (lo, hi) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))).unwrap_or((0.0, 1.0));
        padded(lo, hi)
    } else {
        (0.0, 1.0)
    };

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );

    for t in ticks(x_lo, x_hi) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##,
            TOP,
            TOP + plot_h
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 16.0,
            tick_label(t, log_x)
        );
    }
    for t in ticks(y_lo, y_hi) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            tick_label(t, false)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    let x_caption = if log_x { format!("{x_label} (log scale)") } else { x_label.to_string() };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(&x_caption)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        metric.column()
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + plot_w + 14.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn run(args: &PlotArgs) -> CliResult {
    if !args.labels.is_empty() && args.labels.len() != args.input.len() {
        return Err(usage(format!(
            "{} labels given for {} inputs",
            args.labels.len(),
            args.input.len()
        )));
    }
    let tables = args.input.iter().map(|p| read_table(p)).collect::<CliResult<Vec<_>>>()?;
    let schema = tables[0].schema;
    if let Some((path, _)) = args.input.iter().zip(&tables).find(|(_, t)| t.schema != schema) {
        return Err(usage(format!(
            "schema mismatch: {} does not match {}",
            path.display(),
            args.input[0].display()
        )));
    }
    let metric = args.metric.unwrap_or(schema.default_metric());

    let mut series = Vec::new();
    for (i, (path, table)) in args.input.iter().zip(&tables).enumerate() {
        let label = args.labels.get(i).cloned().unwrap_or_else(|| legend_name(path));
        series.extend(series_for(table, &label, metric, args.log_x)?);
    }
    let title = args.title.clone().unwrap_or_else(|| format!("{} vs {}", metric.column(), schema.x_label()));
    let svg = render(&series, metric, schema.x_label(), &title, args.log_x)?;
    write_atomic(&args.output, svg.as_bytes()).map_err(|e| CliError::Failed(e.to_string()))?;
    println!("wrote {} ({} series)", args.output.display(), series.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(tick_step(60_000.0, 5.0), 20_000.0);
        assert_eq!(tick_label(0.6000000000000001, false), "0.6");
        assert_eq!(tick_label(2.0, true), "100");
    }

    #[test]
    fn escaping() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn legend_from_path() {
        assert_eq!(legend_name(Path::new("results/checkerboard/hinge2/5/curve.csv")), "hinge²");
        assert_eq!(legend_name(Path::new("elsewhere/run.csv")), "run");
    }
}
