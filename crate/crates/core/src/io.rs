//! Text formats: channel and structure files, CSV tables and SVG plots.
//!
//! Channel files are line oriented with `#` comments:
//!
//! ```text
//! twc 2 2 2 2        # nx1 nx2 ny1 ny2
//! W1:
//! 0.9 0.1            # one row per (x1, x2), x1 major
//! ...
//! W2:
//! ...
//! ```
//!
//! Structure files start with `isd`, followed by integer tables under
//! `g1:`, `f1:`, `g2:`, `f2:` and noise laws on `pz1:` and `pz2:` lines.

use crate::bounds::{RatePair, RateRegion};
use crate::channel::TwcChannel;
use crate::error::{Error, Result};
use crate::infocore::{Pmf, SIMPLEX_TOL};
use crate::isd::IsdStructure;

use std::fmt::Write as _;
use std::path::Path;

/// A non-blank, comment-stripped line with its 1-based number.
struct Line<'a> {
    number: usize,
    text: &'a str,
    /// Byte offset of `text` inside the original line.
    offset: usize,
}

fn content_lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let trimmed = body.trim_start();
            let offset = body.len() - trimmed.len();
            let trimmed = trimmed.trim_end();
            (!trimmed.is_empty()).then_some(Line {
                number: i + 1,
                text: trimmed,
                offset,
            })
        })
        .collect()
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with 1-based columns.
fn tokens<'a>(line: &Line<'a>) -> Vec<(usize, &'a str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.text.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((line.offset + s + 1, &line.text[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((line.offset + s + 1, &line.text[s..]));
    }
    out
}

fn parse_number<T: std::str::FromStr>(
    line: &Line<'_>,
    col: usize,
    tok: &str,
    what: &str,
) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_error(line.number, col, format!("expected {what}, found '{tok}'")))
}

fn parse_prob_row(line: &Line<'_>, expected: usize) -> Result<Vec<f64>> {
    let toks = tokens(line);
    if toks.len() != expected {
        return Err(parse_error(
            line.number,
            1 + line.offset,
            format!("expected {expected} probabilities, found {}", toks.len()),
        ));
    }
    let mut row = Vec::with_capacity(expected);
    for (col, tok) in toks {
        let v: f64 = parse_number(line, col, tok, "a probability")?;
        if !(0.0..=1.0).contains(&v) {
            return Err(parse_error(
                line.number,
                col,
                format!("probability {v} outside [0, 1]"),
            ));
        }
        row.push(v);
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(parse_error(
            line.number,
            1 + line.offset,
            format!("row sums to {sum}, not 1"),
        ));
    }
    Ok(row)
}

/// Parses a channel file.
pub fn parse_channel(text: &str) -> Result<TwcChannel> {
    let lines = content_lines(text);
    let mut it = lines.iter();
    let header = it
        .next()
        .ok_or_else(|| parse_error(1, 1, "empty channel file"))?;
    let toks = tokens(header);
    if toks.first().map(|t| t.1) != Some("twc") {
        return Err(parse_error(
            header.number,
            1 + header.offset,
            "expected header 'twc nx1 nx2 ny1 ny2'",
        ));
    }
    if toks.len() != 5 {
        return Err(parse_error(
            header.number,
            1 + header.offset,
            "header needs four sizes: nx1 nx2 ny1 ny2",
        ));
    }
    let mut dims = [0usize; 4];
    for (d, (col, tok)) in dims.iter_mut().zip(&toks[1..]) {
        *d = parse_number(header, *col, tok, "a positive size")?;
        if *d == 0 {
            return Err(parse_error(header.number, *col, "sizes must be positive"));
        }
    }
    let [nx1, nx2, ny1, ny2] = dims;
    let rows = nx1 * nx2;
    let mut read_section = |name: &str, ny: usize, after: usize| -> Result<(Vec<f64>, usize)> {
        let head = it
            .next()
            .ok_or_else(|| parse_error(after + 1, 1, format!("missing section '{name}'")))?;
        if head.text != name {
            return Err(parse_error(
                head.number,
                1 + head.offset,
                format!("expected '{name}', found '{}'", head.text),
            ));
        }
        let mut flat = Vec::with_capacity(rows * ny);
        let mut last = head.number;
        for k in 0..rows {
            let line = it.next().ok_or_else(|| {
                parse_error(
                    last + 1,
                    1,
                    format!("section '{name}' has {k} rows, expected {rows}"),
                )
            })?;
            flat.extend(parse_prob_row(line, ny)?);
            last = line.number;
        }
        Ok((flat, last))
    };
    let (w1, last) = read_section("W1:", ny1, header.number)?;
    let (w2, _) = read_section("W2:", ny2, last)?;
    if let Some(extra) = it.next() {
        return Err(parse_error(
            extra.number,
            1 + extra.offset,
            "unexpected content after W2 section",
        ));
    }
    TwcChannel::new(nx1, nx2, ny1, ny2, w1, w2)
}

/// Serializes a channel in the format read by [`parse_channel`].
pub fn format_channel(ch: &TwcChannel) -> String {
    let mut out = format!("twc {} {} {} {}\n", ch.nx1(), ch.nx2(), ch.ny1(), ch.ny2());
    for (name, w1) in [("W1:", true), ("W2:", false)] {
        out.push_str(name);
        out.push('\n');
        for x1 in 0..ch.nx1() {
            for x2 in 0..ch.nx2() {
                let row = if w1 {
                    ch.w1_row(x1, x2)
                } else {
                    ch.w2_row(x1, x2)
                };
                let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                out.push_str(&cells.join(" "));
                out.push('\n');
            }
        }
    }
    out
}

/// Parses a structure file into an [`IsdStructure`].
pub fn parse_isd(text: &str) -> Result<IsdStructure> {
    let lines = content_lines(text);
    let header = lines
        .first()
        .ok_or_else(|| parse_error(1, 1, "empty structure file"))?;
    if header.text != "isd" {
        return Err(parse_error(
            header.number,
            1 + header.offset,
            "expected header 'isd'",
        ));
    }
    let names = ["g1:", "f1:", "g2:", "f2:"];
    let mut tables: [Option<Vec<Vec<usize>>>; 4] = Default::default();
    let mut noise: [Option<Pmf>; 2] = [None, None];
    let mut current: Option<usize> = None;
    for line in &lines[1..] {
        let toks = tokens(line);
        let (col, first) = toks[0];
        if let Some(k) = names.iter().position(|n| *n == first) {
            if tables[k].is_some() {
                return Err(parse_error(
                    line.number,
                    col,
                    format!("section '{first}' repeated"),
                ));
            }
            if toks.len() > 1 {
                return Err(parse_error(
                    line.number,
                    toks[1].0,
                    format!("table rows go on the lines after '{first}'"),
                ));
            }
            tables[k] = Some(Vec::new());
            current = Some(k);
            continue;
        }
        if let Some(k) = ["pz1:", "pz2:"].iter().position(|n| *n == first) {
            if noise[k].is_some() {
                return Err(parse_error(line.number, col, format!("'{first}' repeated")));
            }
            let rest = Line {
                number: line.number,
                text: line.text,
                offset: line.offset,
            };
            let probs = tokens(&rest)[1..]
                .iter()
                .map(|(c, t)| parse_number::<f64>(line, *c, t, "a probability"))
                .collect::<Result<Vec<f64>>>()?;
            noise[k] =
                Some(Pmf::new(probs).map_err(|e| parse_error(line.number, col, e.to_string()))?);
            current = None;
            continue;
        }
        let k = current.ok_or_else(|| {
            parse_error(
                line.number,
                col,
                format!("unexpected '{first}' outside a table"),
            )
        })?;
        let row = toks
            .iter()
            .map(|(c, t)| parse_number::<usize>(line, *c, t, "a nonnegative integer"))
            .collect::<Result<Vec<usize>>>()?;
        tables[k].as_mut().expect("section opened").push(row);
    }
    let last = lines.last().map_or(1, |l| l.number);
    let take_table = |k: usize| {
        tables[k]
            .clone()
            .ok_or_else(|| parse_error(last, 1, format!("missing table '{}'", names[k])))
    };
    let take_noise = |k: usize| {
        noise[k]
            .clone()
            .ok_or_else(|| parse_error(last, 1, format!("missing line 'pz{}:'", k + 1)))
    };
    IsdStructure::new(
        take_table(0)?,
        take_table(1)?,
        take_table(2)?,
        take_table(3)?,
        take_noise(0)?,
        take_noise(1)?,
    )
}

/// Formats a float with 12 significant digits, switching to exponent
/// notation for very small or large magnitudes.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{v:.11e}");
        let (mant, e) = s.split_once('e').expect("exponent form");
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{mant}e{e}")
    }
}

/// One row of a region table.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub group: String,
    pub series: String,
    pub index: usize,
    pub r1: f64,
    pub r2: f64,
}

const REGION_HEADER: [&str; 5] = ["group", "series", "index", "r1_nats", "r2_nats"];
const SCALAR_HEADER: [&str; 2] = ["name", "value"];

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(pos) => parse_error(pos.line() as usize, 1, e.to_string()),
        None => Error::Validation(format!("csv: {e}")),
    }
}

/// Region rows for every vertex of `region`.
pub fn region_rows(group: &str, series: &str, region: &RateRegion) -> Vec<RegionRow> {
    point_rows(group, series, region.vertices())
}

pub fn point_rows(group: &str, series: &str, points: &[RatePair]) -> Vec<RegionRow> {
    points
        .iter()
        .enumerate()
        .map(|(index, p)| RegionRow {
            group: group.into(),
            series: series.into(),
            index,
            r1: p.r1,
            r2: p.r2,
        })
        .collect()
}

/// `group,series,index,r1_nats,r2_nats`.
pub fn write_region_csv(rows: &[RegionRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REGION_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.group.as_str(),
            r.series.as_str(),
            &r.index.to_string(),
            &format_float(r.r1),
            &format_float(r.r2),
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}

/// `name,value`.
pub fn write_scalar_csv(rows: &[(String, f64)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SCALAR_HEADER).map_err(csv_error)?;
    for (name, v) in rows {
        w.write_record([name.as_str(), &format_float(*v)])
            .map_err(csv_error)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Validation(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Validation(format!("csv: {e}")))
}

fn check_header(r: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let header = r.headers().map_err(csv_error)?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(parse_error(
            1,
            1,
            format!("expected header '{}'", expected.join(",")),
        ));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize, what: &str) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line() as usize);
    let raw = rec.get(k).unwrap_or("");
    raw.parse()
        .map_err(|_| parse_error(line, k + 1, format!("expected {what}, found '{raw}'")))
}

/// Reads a table written by [`write_region_csv`].
pub fn read_region_csv(text: &str) -> Result<Vec<RegionRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    check_header(&mut r, &REGION_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            Ok(RegionRow {
                group: field(&rec, 0, "a group name")?,
                series: field(&rec, 1, "a series name")?,
                index: field(&rec, 2, "an index")?,
                r1: field(&rec, 3, "a rate")?,
                r2: field(&rec, 4, "a rate")?,
            })
        })
        .collect()
}

/// Reads a table written by [`write_scalar_csv`].
pub fn read_scalar_csv(text: &str) -> Result<Vec<(String, f64)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    check_header(&mut r, &SCALAR_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            Ok((field(&rec, 0, "a name")?, field(&rec, 1, "a value")?))
        })
        .collect()
}

/// How a series is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesStyle {
    /// Region boundary through the vertices.
    Polyline,
    /// Marked points, e.g. corner points.
    Circles,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgSeries {
    pub label: String,
    pub style: SeriesStyle,
    pub points: Vec<RatePair>,
}

impl SvgSeries {
    /// The closed boundary of a region: its vertices plus the two axis feet.
    pub fn region(label: impl Into<String>, region: &RateRegion) -> Self {
        let v = region.vertices();
        let mut points = Vec::with_capacity(v.len() + 2);
        points.push(RatePair::new(0.0, 0.0));
        points.extend_from_slice(v);
        points.push(RatePair::new(0.0, 0.0));
        Self {
            label: label.into(),
            style: SeriesStyle::Polyline,
            points,
        }
    }

    pub fn corners(label: impl Into<String>, points: Vec<RatePair>) -> Self {
        Self {
            label: label.into(),
            style: SeriesStyle::Circles,
            points,
        }
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 70.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Renders region boundaries and corner points on fixed 800×600 axes.
pub fn render_svg(title: &str, unit: &str, series: &[SvgSeries]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut xmax, mut ymax) = all.fold((0.0f64, 0.0f64), |(x, y), p| (x.max(p.r1), y.max(p.r2)));
    if xmax <= 0.0 {
        xmax = 1.0;
    }
    if ymax <= 0.0 {
        ymax = 1.0;
    }
    xmax *= 1.05;
    ymax *= 1.05;
    let px = |x: f64| MARGIN + x / xmax * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - y / ymax * (HEIGHT - 2.0 * MARGIN);
    let esc = |s: &str| {
        s.replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;")
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600">"#
    );
    let _ = writeln!(out, r#"<rect width="800" height="600" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="400" y="30" text-anchor="middle" font-size="18">{}</text>"#,
        esc(title)
    );
    let (x0, y0) = (px(0.0), py(0.0));
    let _ = writeln!(
        out,
        r#"<g stroke="black" stroke-width="1"><line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{:.2}"/></g>"#,
        WIDTH - MARGIN,
        MARGIN
    );
    for k in 0..=5 {
        let (tx, ty) = (xmax * k as f64 / 5.0, ymax * k as f64 / 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
            px(tx),
            y0 + 20.0,
            format_tick(tx)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{}</text>"#,
            x0 - 8.0,
            py(ty) + 4.0,
            format_tick(ty)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="400" y="{:.2}" text-anchor="middle" font-size="14">R1 ({})</text>"#,
        HEIGHT - 20.0,
        esc(unit)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="300" text-anchor="middle" font-size="14" transform="rotate(-90 20 300)">R2 ({})</text>"#,
        esc(unit)
    );
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        match s.style {
            SeriesStyle::Polyline => {
                let pts: Vec<String> = s
                    .points
                    .iter()
                    .map(|p| format!("{:.2},{:.2}", px(p.r1), py(p.r2)))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            SeriesStyle::Circles => {
                for p in &s.points {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="none" stroke="{color}" stroke-width="2"/>"#,
                        px(p.r1),
                        py(p.r2)
                    );
                }
            }
        }
        let ly = MARGIN + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{ly:.2}" text-anchor="end" font-size="12" fill="{color}">{}</text>"#,
            WIDTH - MARGIN,
            esc(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.3e}")
    }
}

/// Writes `contents` next to `path` under a temporary name, then renames it
/// into place so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path.file_name().ok_or_else(|| {
        std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "output path has no file name",
        )
    })?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}
