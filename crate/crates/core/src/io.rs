//! File formats.
//!
//! * csv-matrix: first line `# q_grid: L N`, then `N` lines of `N`
//!   comma-separated values; line `j` holds `W(q_0..q_{N-1}, p_j)` with `p`
//!   running from `-L` to `+L`.
//! * csv-series: a header line of column names, then one row per sample.
//! * pgm: binary P5, 8-bit, top row `p = +L`; pixel
//!   `round(255 (v + m) / (2 m))` with `m = max|W|`.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which re-reads
//! bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::elliptic::SpectralCoeffs;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, WignerGrid};
use crate::params::{Model, ModeIndex, NhParams, Parity};

/// 17 significant digits; both zeros print as `0`.
pub fn format_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

pub fn write_csv_matrix<W: Write>(out: &mut W, grid: &WignerGrid) -> Result<()> {
    let spec = grid.spec();
    let n = spec.n_points();
    writeln!(out, "# q_grid: {} {}", spec.half_width(), n)?;
    let mut line = String::new();
    for j in 0..n {
        line.clear();
        for i in 0..n {
            if i > 0 {
                line.push(',');
            }
            write!(line, "{:.16e}", grid.at(i, j)).expect("write to String");
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_csv_matrix<R: Read>(input: R) -> Result<WignerGrid> {
    let mut lines = BufReader::new(input).lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty csv-matrix".into()))??;
    let rest = header
        .strip_prefix("# q_grid:")
        .ok_or_else(|| Error::Parse(format!("bad csv-matrix header {header:?}")))?;
    let mut parts = rest.split_whitespace();
    let l = parse_f64(parts.next().unwrap_or(""))?;
    let n: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad csv-matrix header {header:?}")))?;
    let spec = GridSpec::new(l, n)?;
    let mut values = Vec::with_capacity(n * n);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for field in line.split(',') {
            values.push(parse_f64(field)?);
        }
        if values.len() - before != n {
            return Err(Error::Parse(format!("row with {} values, expected {n}", values.len() - before)));
        }
    }
    WignerGrid::from_values(spec, values, 0.0)
}

/// Writes a header row and one row per record. Readers skip `#` lines.
pub fn write_csv_series<W: Write>(out: &mut W, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    writeln!(out, "{}", columns.join(","))?;
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_csv_series<R: Read>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = BufReader::new(input).lines();
    let header = loop {
        let line = lines.next().ok_or_else(|| Error::Parse("empty csv-series".into()))??;
        if !line.trim().is_empty() && !line.starts_with('#') {
            break line;
        }
    };
    let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?;
        if row.len() != columns.len() {
            return Err(Error::Parse(format!("row with {} fields, expected {}", row.len(), columns.len())));
        }
        rows.push(row);
    }
    Ok((columns, rows))
}

/// Gray level of `v` for symmetric range `[-m, m]`.
pub fn pgm_level(v: f64, m: f64) -> u8 {
    if m == 0.0 {
        return 128;
    }
    (255.0 * (v + m) / (2.0 * m)).round().clamp(0.0, 255.0) as u8
}

pub fn write_pgm<W: Write>(out: &mut W, grid: &WignerGrid) -> Result<()> {
    let n = grid.n_points();
    let m = grid.max_abs();
    write!(out, "P5\n{n} {n}\n255\n")?;
    let mut row = vec![0u8; n];
    for j in (0..n).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            *px = pgm_level(grid.at(i, j), m);
        }
        out.write_all(&row)?;
    }
    Ok(())
}

/// Coefficient table `n,nu,parity,coeff`.
pub fn write_coeffs<W: Write>(out: &mut W, coeffs: &SpectralCoeffs) -> Result<()> {
    writeln!(out, "n,nu,parity,coeff")?;
    for (m, parity, c) in coeffs.iter() {
        writeln!(out, "{},{},{},{}", m.n, m.nu, parity.symbol(), format_f64(c))?;
    }
    Ok(())
}

pub fn read_coeffs<R: Read>(input: R) -> Result<SpectralCoeffs> {
    let mut coeffs = SpectralCoeffs::default();
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (k == 0 && line.starts_with('n')) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("coefficient row {line:?} needs 4 fields")));
        }
        let n: u32 = fields[0].parse().map_err(|_| Error::Parse(format!("bad n in {line:?}")))?;
        let nu: i32 = fields[1].parse().map_err(|_| Error::Parse(format!("bad nu in {line:?}")))?;
        let parity = Parity::parse(fields[2]).ok_or_else(|| Error::Parse(format!("bad parity in {line:?}")))?;
        coeffs.add(ModeIndex::new(n, nu), parity, parse_f64(fields[3])?)?;
    }
    Ok(coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutputFormat {
    CsvMatrix,
    CsvSeries,
    Pgm,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::CsvMatrix => "csv-matrix",
            OutputFormat::CsvSeries => "csv-series",
            OutputFormat::Pgm => "pgm",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv-matrix" => Ok(OutputFormat::CsvMatrix),
            "csv-series" => Ok(OutputFormat::CsvSeries),
            "pgm" => Ok(OutputFormat::Pgm),
            other => Err(Error::Parse(format!("unknown output format {other:?}"))),
        }
    }
}

/// Mode list entry `n:nu[:parity]`.
pub fn parse_mode(s: &str) -> Result<(ModeIndex, Parity)> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(Error::Parse(format!("mode {s:?} is not n:nu[:parity]")));
    }
    let n: u32 = parts[0].trim().parse().map_err(|_| Error::Parse(format!("bad n in {s:?}")))?;
    let nu: i32 = parts[1].trim().parse().map_err(|_| Error::Parse(format!("bad nu in {s:?}")))?;
    let parity = match parts.get(2) {
        Some(p) => Parity::parse(p).ok_or_else(|| Error::Parse(format!("bad parity in {s:?}")))?,
        None => Parity::Plus,
    };
    Ok((ModeIndex::new(n, nu), parity))
}

pub fn format_mode(mode: ModeIndex, parity: Parity) -> String {
    format!("{}:{}:{}", mode.n, mode.nu, parity.symbol())
}

/// Flat `key = value` text with `#` comments.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", k + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Everything one `evolve`/`basis` run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: NhParams,
    pub half_width: f64,
    pub n_points: usize,
    /// `None` picks half the stability bound.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub record_every: usize,
    pub normalized: bool,
    pub modes: Vec<(ModeIndex, Parity)>,
    pub out: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: NhParams::elliptic(1.0, 0.0).expect("valid defaults"),
            half_width: 6.0,
            n_points: 257,
            dt: None,
            t_end: 1.0,
            record_every: 100,
            normalized: false,
            modes: vec![(ModeIndex::new(0, 0), Parity::Plus)],
            out: PathBuf::from("out"),
            formats: vec![OutputFormat::CsvMatrix, OutputFormat::CsvSeries],
        }
    }
}

pub const RUN_CONFIG_KEYS: &[&str] = &[
    "model", "alpha", "beta", "gamma", "L", "N", "dt", "t_end", "record_every", "normalized", "modes", "out",
    "format",
];

impl RunConfig {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        writeln!(s, "alpha = {}", format_f64(p.alpha())).unwrap();
        writeln!(s, "beta = {}", format_f64(p.beta())).unwrap();
        writeln!(s, "gamma = {}", format_f64(p.gamma())).unwrap();
        writeln!(s, "L = {}", format_f64(self.half_width)).unwrap();
        writeln!(s, "N = {}", self.n_points).unwrap();
        match self.dt {
            Some(dt) => writeln!(s, "dt = {}", format_f64(dt)).unwrap(),
            None => writeln!(s, "dt = auto").unwrap(),
        }
        writeln!(s, "t_end = {}", format_f64(self.t_end)).unwrap();
        writeln!(s, "record_every = {}", self.record_every).unwrap();
        writeln!(s, "normalized = {}", self.normalized).unwrap();
        let modes: Vec<String> = self.modes.iter().map(|&(m, p)| format_mode(m, p)).collect();
        writeln!(s, "modes = {}", modes.join(", ")).unwrap();
        writeln!(s, "out = {}", self.out.display()).unwrap();
        let formats: Vec<&str> = self.formats.iter().map(|f| f.name()).collect();
        writeln!(s, "format = {}", formats.join(", ")).unwrap();
        s
    }

    /// Applies `key = value` pairs on top of `self`.
    pub fn apply(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        if let Some(key) = map.keys().find(|k| !RUN_CONFIG_KEYS.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown configuration key {key:?}")));
        }
        let get_f = |k: &str| map.get(k).map(|v| parse_f64(v)).transpose();
        let alpha = get_f("alpha")?.unwrap_or(self.params.alpha());
        let gamma = get_f("gamma")?.unwrap_or(self.params.gamma());
        let beta = match (map.get("model").map(String::as_str), get_f("beta")?) {
            (Some("elliptic"), None) => alpha,
            (Some("hyperbolic"), None) => -alpha,
            (Some("elliptic" | "hyperbolic" | "general") | None, Some(b)) => b,
            (Some("general"), None) => self.params.beta(),
            (None, None) => match self.params.classification() {
                Model::Elliptic => alpha,
                Model::Hyperbolic => -alpha,
                Model::General => self.params.beta(),
            },
            (Some(other), _) => return Err(Error::Parse(format!("unknown model {other:?}"))),
        };
        self.params = NhParams::new(alpha, beta, gamma)?;
        if let Some(l) = get_f("L")? {
            self.half_width = l;
        }
        if let Some(n) = map.get("N") {
            self.n_points = n.trim().parse().map_err(|_| Error::Parse(format!("bad N {n:?}")))?;
        }
        if let Some(dt) = map.get("dt") {
            self.dt = if dt.trim() == "auto" { None } else { Some(parse_f64(dt)?) };
        }
        if let Some(t) = get_f("t_end")? {
            self.t_end = t;
        }
        if let Some(r) = map.get("record_every") {
            self.record_every = r.trim().parse().map_err(|_| Error::Parse(format!("bad record_every {r:?}")))?;
        }
        if let Some(v) = map.get("normalized") {
            self.normalized = v.trim().parse().map_err(|_| Error::Parse(format!("bad normalized {v:?}")))?;
        }
        if let Some(v) = map.get("modes") {
            self.modes = v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(parse_mode)
                .collect::<Result<Vec<_>>>()?;
        }
        if let Some(v) = map.get("out") {
            self.out = PathBuf::from(v);
        }
        if let Some(v) = map.get("format") {
            self.formats = v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(OutputFormat::from_str)
                .collect::<Result<Vec<_>>>()?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply(&parse_key_values(text)?)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.half_width, self.n_points)
    }
}
