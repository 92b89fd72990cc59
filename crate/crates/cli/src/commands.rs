use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use nhwigner::elliptic::{
    basis_real, count_extrema, count_radial_extrema, critical_state, eigenvalue, evolve_analytic,
    resonance_energy,
};
use nhwigner::evolution::{
    decay_rate_fit, evolve as run_evolver, fit_decay_rate, hyperbolic_eigenvalue, stability_bound, EvolverConfig,
    TraceSeries,
};
use nhwigner::io::{
    format_f64, format_mode, parse_mode, read_coeffs, read_csv_matrix, write_coeffs, write_csv_matrix,
    write_csv_series, write_pgm, OutputFormat, RunConfig,
};
use nhwigner::lineshape::{
    energy_distribution, hyperbolic_energy_distribution, hyperbolic_time_signal, time_signal, Lorentzian, TimeSignal,
};
use nhwigner::{integrate, Error, Model, ModeIndex, NhParams, Parity, WignerGrid};
use rayon::prelude::*;

use crate::error::CliError;
use crate::{Common, EvolveArgs};

/// Fitted rates below this are reported as long-lived.
const LONG_LIVED_RATE: f64 = 1e-3;

fn fmt(v: f64) -> String {
    v.to_string()
}

/// Config file (or defaults) with the shared flags applied on top.
fn run_config(common: &Common, mut extra: BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &common.model {
        extra.insert("model".into(), m.clone());
    }
    for (key, v) in [("alpha", common.alpha), ("beta", common.beta), ("gamma", common.gamma), ("L", common.half_width)]
    {
        if let Some(v) = v {
            extra.insert(key.into(), fmt(v));
        }
    }
    if let Some(n) = common.n_points {
        extra.insert("N".into(), n.to_string());
    }
    cfg.apply(&extra)?;
    Ok(cfg)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_parity(s: &str) -> Result<Parity, CliError> {
    Parity::parse(s).ok_or_else(|| CliError::Usage(format!("parity must be + or -, got {s:?}")))
}

fn parse_formats(s: &str) -> Result<Vec<OutputFormat>, CliError> {
    s.split(',').filter(|f| !f.trim().is_empty()).map(|f| f.parse().map_err(CliError::from)).collect()
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> nhwigner::Result<()>) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    f(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn spectrum(common: &Common, n_max: u32, nu_max: u32, out: Option<PathBuf>) -> Result<(), CliError> {
    let p = run_config(common, BTreeMap::new())?.params;
    let mut rows = Vec::new();
    let columns: &[&str] = match p.classification() {
        Model::Elliptic => {
            for n in 0..=n_max {
                for nu in 0..=nu_max as i32 {
                    let l = eigenvalue(ModeIndex::new(n, nu), &p)?;
                    rows.push(vec![n as f64, nu as f64, l.re, l.im, l.lifetime()]);
                }
            }
            &["n", "nu", "lambda_re", "lambda_im", "tau"]
        }
        Model::Hyperbolic => {
            for nu in 0..=nu_max as i32 {
                let l = hyperbolic_eigenvalue(nu, &p)?;
                rows.push(vec![nu as f64, l.re, l.im]);
            }
            &["nu", "lambda_re", "lambda_im"]
        }
        Model::General => {
            return Err(CliError::Usage("spectrum needs an elliptic or hyperbolic model".into()));
        }
    };
    let mut w = output(out.as_deref())?;
    write_csv_series(&mut w, columns, &rows)?;
    w.flush()?;
    Ok(())
}

pub fn basis(
    common: &Common,
    n: u32,
    nu: i32,
    parity: &str,
    t: f64,
    out: Option<PathBuf>,
    format: Option<String>,
) -> Result<(), CliError> {
    let cfg = run_config(common, BTreeMap::new())?;
    let parity = parse_parity(parity)?;
    let formats = match format {
        Some(f) => parse_formats(&f)?,
        None => vec![OutputFormat::CsvMatrix],
    };
    let mode = ModeIndex::new(n, nu);
    let b = basis_real(mode, parity, &cfg.params)?;
    let grid = b.sample(cfg.grid_spec()?, t);

    let dir = out.unwrap_or(cfg.out);
    fs::create_dir_all(&dir)?;
    let stem = format!("basis_{}_{}_{}", n, nu, if parity == Parity::Plus { "plus" } else { "minus" });
    for f in &formats {
        match f {
            OutputFormat::CsvMatrix => write_file(&dir.join(format!("{stem}.csv")), |w| write_csv_matrix(w, &grid))?,
            OutputFormat::Pgm => write_file(&dir.join(format!("{stem}.pgm")), |w| write_pgm(w, &grid))?,
            OutputFormat::CsvSeries => return Err(CliError::Usage("basis writes csv-matrix or pgm".into())),
        }
    }

    let peak = grid.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("mode: {}", format_mode(mode, parity));
    println!("extrema: {}", count_extrema(&grid));
    if nu == 0 {
        let r_max = cfg.half_width;
        println!("radial_extrema: {}", count_radial_extrema(mode, r_max, 4000));
    }
    println!("peak: {}", format_f64(peak));
    println!("trace: {}", format_f64(integrate(&grid)));
    Ok(())
}

pub fn project(input: &Path, n_max: u32, nu_max: u32, out: Option<PathBuf>) -> Result<(), CliError> {
    let w = read_csv_matrix(File::open(input)?)?;
    let proj = nhwigner::elliptic::project(&w, n_max, nu_max);
    let mut o = output(out.as_deref())?;
    write_coeffs(&mut o, &proj.coeffs)?;
    o.flush()?;
    eprintln!("residual: {}", format_f64(proj.residual));
    eprintln!("trace: {}", format_f64(proj.coeffs.trace()));
    Ok(())
}

pub fn resonance(common: &Common, nu_max: u32, out: Option<PathBuf>) -> Result<(), CliError> {
    let p = run_config(common, BTreeMap::new())?.params;
    let mut rows = Vec::new();
    for nu in 0..=nu_max as i32 {
        let c = critical_state(nu, &p)?;
        let e_c = resonance_energy(nu, &p)?;
        rows.push(vec![nu as f64, e_c, c.nearest_critical_ratio(), c.n_c, if c.realizable { 1.0 } else { 0.0 }]);
    }
    let mut w = output(out.as_deref())?;
    write_csv_series(&mut w, &["nu", "E_c", "gamma_over_alpha_c", "n_c", "realizable"], &rows)?;
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn bw(
    common: &Common,
    n: u32,
    nu: i32,
    e_min: Option<f64>,
    e_max: Option<f64>,
    samples: usize,
    numeric: bool,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let p = run_config(common, BTreeMap::new())?.params;
    let (dist, signal): (Lorentzian, TimeSignal) = match p.classification() {
        Model::Elliptic => {
            let mode = ModeIndex::new(n, nu);
            let dist = energy_distribution(mode, &p).map_err(|e| match e {
                Error::NonPositiveDecay(v) => CliError::Usage(format!(
                    "1/tau = {v} is not positive; the distribution exists only as a limit \
                     (a delta function as 1/tau -> 0)"
                )),
                other => other.into(),
            })?;
            (dist, time_signal(mode, &p)?)
        }
        Model::Hyperbolic => (hyperbolic_energy_distribution(nu, &p)?, hyperbolic_time_signal(nu, &p)?),
        Model::General => return Err(CliError::Usage("bw needs an elliptic or hyperbolic model".into())),
    };
    if samples < 2 {
        return Err(CliError::Usage("need at least 2 samples".into()));
    }
    let (ups, loc) = (dist.hwhm(), dist.location());
    let lo = e_min.unwrap_or(loc - 5.0 * ups);
    let hi = e_max.unwrap_or(loc + 5.0 * ups);
    if !(hi > lo) {
        return Err(CliError::Usage(format!("empty energy window [{lo}, {hi}]")));
    }
    let mut rows = Vec::with_capacity(samples);
    for k in 0..samples {
        let e = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        let mut row = vec![e, dist.pdf(e)];
        if numeric {
            let f = signal.half_line_fourier_numeric(e)?;
            row.push(ups / PI * f.norm_sqr());
        }
        rows.push(row);
    }
    let mut w = output(out.as_deref())?;
    writeln!(w, "# upsilon: {}", format_f64(ups))?;
    writeln!(w, "# location: {}", format_f64(loc))?;
    let columns: &[&str] = if numeric { &["E", "f", "f_numeric"] } else { &["E", "f"] };
    write_csv_series(&mut w, columns, &rows)?;
    w.flush()?;
    Ok(())
}

struct Run {
    name: String,
    initial: WignerGrid,
}

fn gaussian(spec: nhwigner::GridSpec, text: &str) -> Result<WignerGrid, CliError> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("gaussian must be q0,p0,width, got {text:?}")))?;
    let [q0, p0, width] = parts[..] else {
        return Err(CliError::Usage(format!("gaussian must be q0,p0,width, got {text:?}")));
    };
    if !(width > 0.0) {
        return Err(CliError::Usage("gaussian width must be positive".into()));
    }
    let s2 = width * width;
    Ok(WignerGrid::from_fn(spec, |q, p| (-((q - q0).powi(2) + (p - p0).powi(2)) / s2).exp() / (PI * s2)))
}

fn initial_runs(args: &EvolveArgs, cfg: &RunConfig) -> Result<Vec<Run>, CliError> {
    let spec = cfg.grid_spec()?;
    // basis functions at t = 0 do not depend on the parameters
    let synth = NhParams::elliptic(1.0, 0.0)?;
    if let Some(g) = &args.gaussian {
        return Ok(vec![Run { name: "gaussian".into(), initial: gaussian(spec, g)? }]);
    }
    if let Some(path) = &args.coeffs {
        let c = read_coeffs(File::open(path)?)?;
        return Ok(vec![Run { name: "coeffs".into(), initial: evolve_analytic(&c, 0.0, spec, &synth)? }]);
    }
    cfg.modes
        .iter()
        .map(|&(mode, parity)| {
            let b = basis_real(mode, parity, &synth)?;
            let name = format!("n{}_nu{}_{}", mode.n, mode.nu, if parity == Parity::Plus { "plus" } else { "minus" });
            Ok(Run { name, initial: b.sample(spec, 0.0) })
        })
        .collect()
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("NHWIGNER_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("NHWIGNER_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(e.to_string()))
}

/// Initial traces below this fraction of the L2 norm count as zero.
const ZERO_TRACE_FRACTION: f64 = 1e-8;

/// Rate fitted to the trace when it is non-zero and stays positive, else to
/// the L2 norm.
fn summary_rate(series: &TraceSeries) -> nhwigner::Result<(f64, &'static str)> {
    let negligible = series.traces.first().is_none_or(|&tr| tr.abs() <= ZERO_TRACE_FRACTION * series.norms[0]);
    if negligible {
        return Ok((series.norm_decay_rate()?, "l2_norm"));
    }
    match decay_rate_fit(series) {
        Ok(r) => Ok((r, "trace")),
        Err(Error::NonPositiveSeries { .. }) => Ok((series.norm_decay_rate()?, "l2_norm")),
        Err(e) => Err(e),
    }
}

fn running_rates(series: &TraceSeries, source: &str) -> Vec<f64> {
    let values = if source == "trace" { &series.traces } else { &series.norms };
    (0..series.len())
        .map(|k| {
            if k == 0 {
                f64::NAN
            } else {
                fit_decay_rate(&series.times[..=k], &values[..=k]).unwrap_or(f64::NAN)
            }
        })
        .collect()
}

fn write_run(dir: &Path, formats: &[OutputFormat], run: &nhwigner::evolution::Evolution) -> Result<String, CliError> {
    fs::create_dir_all(dir)?;
    let (rate, source) = summary_rate(&run.series)?;
    for (k, snap) in run.snapshots.iter().enumerate() {
        if formats.contains(&OutputFormat::CsvMatrix) {
            write_file(&dir.join(format!("snapshot_{k:05}.csv")), |w| write_csv_matrix(w, snap))?;
        }
        if formats.contains(&OutputFormat::Pgm) {
            write_file(&dir.join(format!("snapshot_{k:05}.pgm")), |w| write_pgm(w, snap))?;
        }
    }
    if formats.contains(&OutputFormat::CsvSeries) {
        let s = &run.series;
        let fitted = running_rates(s, source);
        let rows: Vec<Vec<f64>> =
            (0..s.len()).map(|k| vec![s.times[k], s.traces[k], s.norms[k], fitted[k]]).collect();
        write_file(&dir.join("trace.csv"), |w| write_csv_series(w, &["t", "trace", "l2_norm", "fitted_rate"], &rows))?;
    }
    let flag = if rate.abs() < LONG_LIVED_RATE { " LONG-LIVED" } else { "" };
    let line = format!("decay_rate = {} (fit to {source}){flag}", format_f64(rate));
    fs::write(dir.join("summary.txt"), format!("{line}\n"))?;
    Ok(line)
}

pub fn evolve(args: &EvolveArgs) -> Result<(), CliError> {
    let mut extra = BTreeMap::new();
    if let Some(dt) = args.dt {
        extra.insert("dt".to_string(), fmt(dt));
    }
    if let Some(t) = args.t_end {
        extra.insert("t_end".to_string(), fmt(t));
    }
    if let Some(r) = args.record_every {
        extra.insert("record_every".to_string(), r.to_string());
    }
    if args.normalized {
        extra.insert("normalized".to_string(), "true".into());
    }
    if let Some(o) = &args.out {
        extra.insert("out".to_string(), o.display().to_string());
    }
    if let Some(f) = &args.format {
        extra.insert("format".to_string(), f.clone());
    }
    if let Some(m) = &args.modes {
        extra.insert("modes".to_string(), m.clone());
    }
    if args.n.is_some() || args.nu.is_some() || args.parity.is_some() {
        let mode = format!(
            "{}:{}:{}",
            args.n.unwrap_or(0),
            args.nu.unwrap_or(0),
            args.parity.as_deref().unwrap_or("+")
        );
        parse_mode(&mode)?;
        extra.insert("modes".to_string(), mode);
    }
    let cfg = run_config(&args.common, extra)?;
    let spec = cfg.grid_spec()?;
    let bound = stability_bound(&spec, &cfg.params);
    let mut ev = match cfg.dt {
        Some(dt) => EvolverConfig::new(dt, cfg.t_end, &spec, &cfg.params)?,
        None => EvolverConfig::at_fraction_of_bound(0.5, cfg.t_end, &spec, &cfg.params)?,
    };
    ev = ev.record_every(cfg.record_every).normalized(cfg.normalized);
    ev.validate(&spec, &cfg.params)?;
    info!("dt = {} (stability bound {bound})", ev.dt);

    let runs = initial_runs(args, &cfg)?;
    if runs.is_empty() {
        return Err(CliError::Usage("no initial state given".into()));
    }
    let pool = thread_pool()?;
    fs::create_dir_all(&cfg.out)?;
    let results: Vec<Result<String, CliError>> = pool.install(|| {
        runs.par_iter()
            .map(|r| {
                let evo = run_evolver(&r.initial, &cfg.params, &ev)?;
                let line = write_run(&cfg.out.join(&r.name), &cfg.formats, &evo)?;
                Ok(format!("{}: {line}", r.name))
            })
            .collect()
    });
    fs::write(cfg.out.join("config.txt"), cfg.to_text())?;
    let mut first_err = None;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
