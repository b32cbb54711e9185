//! Command-line front end. Every command reads the same keys from flags or
//! from a `key = value` file (`--config`); flags win. Exit status: 0 when
//! every requested check passes, 2 for invalid input, 3 for numerical
//! failures and failed checks.

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{model_from_config, parse_complex, parse_real, parse_t_grid, KvConfig, SeriesTable, MODEL_KEYS};
use crate::contour::{jm_series, ContourSpec};
use crate::error::{Error, Result};
use crate::lowfreq::{fit_expansion, sample_pointwise};
use crate::models::{delta_ring_presonance, robin_disc_presonance, round_well_presonance, RadialModel, ResonantState};
use crate::radial::find_bound_states;
use crate::specfun::{bessel_j_real, BranchedComplex};
use crate::verify;
use crate::wave::{
    at_threshold, decompose, evolve_fd, evolve_spectral, fit_decay, pointwise_fit, zero_eigenstate, DecayLaw, FdOptions,
    RadialSamples, SpectralOptions, SplitInputs, WaveField,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "logdecay", version, about = "Zero-energy resonances and logarithmic wave decay for radial 2D scatterers")]
pub struct Cli {
    /// `key = value` file with the same keys as the flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: standard output)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: LOGDECAY_WORKERS, else available parallelism)
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Seed for randomized test data
    #[arg(long, global = true)]
    seed: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// round-well, delta-ring, robin-disc or free
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long = "R")]
    radius: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
    /// Amplitude of the 2D variable-speed construction (`--model vws`)
    #[arg(long)]
    a0: Option<String>,
    /// Grid spacing of the 2D variable-speed construction
    #[arg(long)]
    h: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Resonance condition residuals and resonant-state parameters
    Resonance {
        #[command(flatten)]
        model: ModelArgs,
        /// Index of the Bessel zero for the round well
        #[arg(long)]
        n: Option<String>,
        /// Residual tolerance
        #[arg(long)]
        tol: Option<String>,
    },
    /// Samples (R(lambda) f)(r) on rays lambda = s e^{i theta}
    Resolvent {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        mode: Option<String>,
        /// Moduli `lo:hi:n` or a comma list
        #[arg(long = "lambda-grid")]
        lambda_grid: Option<String>,
        /// Ray angles in radians, comma separated
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        /// `bump:lo:hi` or `random`
        #[arg(long)]
        data: Option<String>,
        #[arg(long)]
        r: Option<String>,
    },
    /// Zero-energy time profile: t, J, J log(t)/t
    Contour {
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long = "t-grid")]
        t_grid: Option<String>,
        #[arg(long = "A")]
        big_a: Option<String>,
        #[arg(long = "C")]
        big_c: Option<String>,
        #[arg(long = "C-prime")]
        c_prime: Option<String>,
        #[arg(long)]
        eta: Option<String>,
    },
    /// Evolves one angular mode and splits the series into u_d, u_z, u_r
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        mode: Option<String>,
        #[arg(long = "T")]
        t_final: Option<String>,
        /// Observer radii, comma separated
        #[arg(long)]
        observers: Option<String>,
        /// fd or spectral
        #[arg(long)]
        method: Option<String>,
        #[arg(long = "sample-dt")]
        sample_dt: Option<String>,
        #[arg(long)]
        data: Option<String>,
        /// Also write a plotting script for the CSV here
        #[arg(long = "plot-script")]
        plot_script: Option<String>,
    },
    /// Fits a CSV series: t_over_log, log_power:M or expansion
    Fit {
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        law: Option<String>,
        /// Series column (default u)
        #[arg(long)]
        column: Option<String>,
        /// Observer radius to select when the CSV has an `r` column
        #[arg(long)]
        r: Option<String>,
        /// `lo:hi`
        #[arg(long)]
        window: Option<String>,
    },
    /// Runs the acceptance matrix and prints a pass/fail table
    VerifyAll {
        /// Comma-separated check ids (default: all)
        #[arg(long)]
        only: Option<String>,
    },
}

/// Failure split by exit status.
enum Failure {
    Input(Error),
    Numeric(Error),
    /// Checks ran but did not pass; the report has been written.
    Checks,
}

fn input(e: Error) -> Failure {
    Failure::Input(e)
}

fn numeric(e: Error) -> Failure {
    Failure::Numeric(e)
}

type Run<T> = std::result::Result<T, Failure>;

/// Parses `args`, runs the command and returns the exit status. Errors go
/// to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Input(e)) => {
            eprintln!("error: {}", describe(&e));
            EXIT_INPUT
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("numerical failure: {e}");
            EXIT_NUMERIC
        }
        Err(Failure::Checks) => EXIT_NUMERIC,
    }
}

fn describe(e: &Error) -> String {
    match e {
        Error::Config { line: 0, message } => message.clone(),
        other => other.to_string(),
    }
}

/// The merged configuration of one invocation.
struct Settings {
    cfg: KvConfig,
}

impl Settings {
    fn load(path: &Option<PathBuf>) -> Run<Self> {
        let cfg = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| input(Error::Config { line: 0, message: format!("cannot read {}: {e}", p.display()) }))?;
                KvConfig::parse(&text).map_err(input)?
            }
            None => KvConfig::default(),
        };
        Ok(Self { cfg })
    }

    fn flag(&mut self, key: &str, value: &Option<String>) {
        if let Some(v) = value {
            self.cfg.set(key, v.clone());
        }
    }

    fn model_flags(&mut self, m: &ModelArgs) {
        self.flag("variant", &m.model);
        self.flag("a", &m.a);
        self.flag("R", &m.radius);
        self.flag("rho", &m.rho);
        self.flag("sigma", &m.sigma);
        self.flag("a0", &m.a0);
        self.flag("h", &m.h);
    }

    fn bad(&self, key: &str, message: String) -> Failure {
        input(Error::Config { line: self.cfg.line_of(key), message: format!("key `{key}`: {message}") })
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.cfg.get(key)
    }

    fn positive(&self, key: &str, default: f64) -> Run<f64> {
        Ok(self.cfg.positive(key).map_err(input)?.unwrap_or(default))
    }

    fn mode(&self) -> Run<i32> {
        let m = self.cfg.i32("mode").map_err(input)?.unwrap_or(1);
        if m.unsigned_abs() > 4 {
            return Err(self.bad("mode", format!("|m| = {} exceeds 4", m.abs())));
        }
        Ok(m)
    }

    fn model(&self) -> Run<RadialModel> {
        model_from_config(&self.cfg).map_err(input)
    }

    fn seed(&self) -> Run<u64> {
        Ok(self.cfg.u64("seed").map_err(input)?.unwrap_or(0))
    }

    /// Initial data `f`: `bump:lo:hi` (sin^4 profile) or `random` (three
    /// seeded bumps inside `[0.2, 4]`).
    fn data(&self, model: &RadialModel) -> Run<Box<dyn Fn(f64) -> f64>> {
        let spec = self.str("data").unwrap_or("bump:1.5:3.5");
        let floor = model.inner_radius();
        if spec == "random" {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed()?);
            let bumps: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| {
                    let lo = floor + rng.random_range(0.2..2.5);
                    let width = rng.random_range(0.5..1.5);
                    (lo, lo + width, rng.random_range(-1.0..1.0))
                })
                .collect();
            return Ok(Box::new(move |r| bumps.iter().map(|&(lo, hi, c)| c * sin4(r, lo, hi)).sum()));
        }
        let parts: Vec<&str> = spec.split(':').collect();
        let parsed = match parts[..] {
            ["bump", lo, hi] => parse_real(lo).ok().zip(parse_real(hi).ok()),
            _ => None,
        };
        match parsed {
            Some((lo, hi)) if lo >= floor && hi > lo => Ok(Box::new(move |r| sin4(r, lo, hi))),
            _ => Err(self.bad("data", format!("expected `bump:lo:hi` with {floor} <= lo < hi, or `random`; found `{spec}`"))),
        }
    }

    /// Rejects keys not in `known` (plus the global ones).
    fn check_keys(&self, known: &[&str]) -> Run<()> {
        let mut all: Vec<&str> = known.to_vec();
        all.extend(["seed", "workers", "out"]);
        self.cfg.reject_unknown(&all).map_err(input)
    }

    /// `# key = value` lines of the merged configuration.
    fn metadata(&self, command: &str, table: &mut SeriesTable) {
        table.meta("command", command);
        for key in self.cfg.keys().filter(|k| !matches!(*k, "workers" | "out")) {
            table.meta(key, self.cfg.get(key).unwrap_or_default());
        }
    }

    fn record(&self, command: &str) -> serde_json::Map<String, serde_json::Value> {
        let mut config = serde_json::Map::new();
        for key in self.cfg.keys().filter(|k| !matches!(*k, "workers" | "out")) {
            config.insert(key.to_string(), json!(self.cfg.get(key)));
        }
        let mut rec = serde_json::Map::new();
        rec.insert("command".into(), json!(command));
        rec.insert("config".into(), serde_json::Value::Object(config));
        rec
    }
}

fn sin4(r: f64, lo: f64, hi: f64) -> f64 {
    if r <= lo || r >= hi {
        0.0
    } else {
        (PI * (r - lo) / (hi - lo)).sin().powi(4)
    }
}

/// Single writer for the command output. The path is checked up front
/// without truncating it; a file created by the check is removed again if
/// the command fails before writing.
struct Output {
    path: Option<PathBuf>,
    created: bool,
    written: std::cell::Cell<bool>,
}

impl Output {
    fn open(path: Option<PathBuf>) -> Run<Self> {
        let mut created = false;
        if let Some(p) = &path {
            created = !p.exists();
            fs::OpenOptions::new()
                .append(true)
                .create(true)
                .open(p)
                .map_err(|e| input(Error::Config { line: 0, message: format!("output {} is not writable: {e}", p.display()) }))?;
        }
        Ok(Self { path, created, written: std::cell::Cell::new(false) })
    }

    fn write(&self, text: &str) -> Run<()> {
        self.written.set(true);
        match &self.path {
            Some(p) => fs::write(p, text).map_err(|e| numeric(Error::from(e))),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| numeric(Error::from(e))),
        }
    }
}

impl Drop for Output {
    fn drop(&mut self) {
        if let (Some(p), true, false) = (&self.path, self.created, self.written.get()) {
            let _ = fs::remove_file(p);
        }
    }
}

fn configure_workers(settings: &Settings) -> Run<()> {
    let (source, raw) = match (settings.str("workers"), std::env::var("LOGDECAY_WORKERS")) {
        (Some(v), _) => ("key `workers`", v.to_string()),
        (None, Ok(v)) => ("LOGDECAY_WORKERS", v),
        (None, Err(_)) => return Ok(()),
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| {
            input(Error::Config {
                line: settings.cfg.line_of("workers"),
                message: format!("{source}: expected a positive integer, found `{raw}`"),
            })
        })?;
    // a pool may already exist when run is called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cli: Cli) -> Run<()> {
    let mut s = Settings::load(&cli.config)?;
    s.flag("workers", &cli.workers);
    s.flag("seed", &cli.seed);
    let out_path = cli.out.or_else(|| s.str("out").map(PathBuf::from));
    match &cli.command {
        Command::Resonance { model, n, tol } => {
            s.model_flags(model);
            s.flag("n", n);
            s.flag("tol", tol);
            s.check_keys(&[&MODEL_KEYS[..], &["n", "tol", "a0", "h"]].concat())?;
            configure_workers(&s)?;
            let out = Output::open(out_path)?;
            resonance(&s, &out)
        }
        Command::Resolvent { model, mode, lambda_grid, theta, data, r } => {
            s.model_flags(model);
            for (k, v) in [("mode", mode), ("lambda-grid", lambda_grid), ("theta", theta), ("data", data), ("r", r)] {
                s.flag(k, v);
            }
            s.check_keys(&[&MODEL_KEYS[..], &["mode", "lambda-grid", "theta", "data", "r", "h"]].concat())?;
            configure_workers(&s)?;
            let out = Output::open(out_path)?;
            resolvent(&s, &out)
        }
        Command::Contour { b, t_grid, big_a, big_c, c_prime, eta } => {
            for (k, v) in [("b", b), ("t-grid", t_grid), ("A", big_a), ("C", big_c), ("C-prime", c_prime), ("eta", eta)] {
                s.flag(k, v);
            }
            s.check_keys(&["b", "t-grid", "A", "C", "C-prime", "eta"])?;
            configure_workers(&s)?;
            let out = Output::open(out_path)?;
            contour(&s, &out)
        }
        Command::Simulate { model, mode, t_final, observers, method, sample_dt, data, plot_script } => {
            s.model_flags(model);
            for (k, v) in [
                ("mode", mode),
                ("T", t_final),
                ("observers", observers),
                ("method", method),
                ("sample-dt", sample_dt),
                ("data", data),
                ("plot-script", plot_script),
            ] {
                s.flag(k, v);
            }
            let keys = ["mode", "h", "T", "observers", "method", "sample-dt", "data", "plot-script"];
            s.check_keys(&[&MODEL_KEYS[..], &keys].concat())?;
            configure_workers(&s)?;
            let out = Output::open(out_path)?;
            simulate(&s, &out)
        }
        Command::Fit { input: file, law, column, r, window } => {
            for (k, v) in [("input", file), ("law", law), ("column", column), ("r", r), ("window", window)] {
                s.flag(k, v);
            }
            s.check_keys(&["input", "law", "column", "r", "window"])?;
            configure_workers(&s)?;
            let out = Output::open(out_path)?;
            fit(&s, &out)
        }
        Command::VerifyAll { only } => {
            s.flag("only", only);
            s.check_keys(&["only"])?;
            configure_workers(&s)?;
            let out = Output::open(out_path)?;
            verify_all(&s, &out)
        }
    }
}

fn state_record(st: &ResonantState) -> serde_json::Value {
    json!({
        "mode": st.mode,
        "angular": st.angular,
        "inner_coeff": st.inner_coeff,
        "outer_coeff": st.outer_coeff,
        "decay_exponent": st.decay_exponent,
        "interface_residuals": st.interface_residuals(),
    })
}

fn resonance(s: &Settings, out: &Output) -> Run<()> {
    let variant = s.str("variant").ok_or_else(|| s.bad("variant", "is required".into()))?;
    let tol = s.positive("tol", 1e-10)?;
    // the family fixes the coupling, so only its geometry keys are accepted
    let own: &[&str] = match variant {
        "round-well" => &["R", "n"],
        "delta-ring" => &["R"],
        "robin-disc" => &["rho"],
        _ => &["a0", "h"],
    };
    let foreign = ["a", "R", "rho", "sigma", "a0", "h", "n"].into_iter().filter(|k| !own.contains(k)).find(|k| s.str(k).is_some());
    if let Some(k) = foreign {
        return Err(s.bad(k, format!("does not apply to variant `{variant}`")));
    }
    let mut lines = vec![format!("variant = {variant}")];
    let (model, states, residual) = match variant {
        "round-well" => {
            let radius = s.positive("R", 1.0)?;
            let n = s.cfg.u32("n").map_err(input)?.unwrap_or(1);
            let (model, states) = round_well_presonance(radius, n).map_err(input)?;
            let RadialModel::RoundWell { a, .. } = model else { unreachable!() };
            let j0 = bessel_j_real(0, a * radius).abs();
            lines.push(format!("R = {radius}"));
            lines.push(format!("n = {n}"));
            lines.push(format!("a = {a}"));
            lines.push(format!("abs_J0_aR = {j0:e}"));
            let worst = states
                .iter()
                .filter_map(|st| st.interface_residuals())
                .fold(j0, |m, (c, d)| m.max(c).max(d));
            (model, states, worst)
        }
        "delta-ring" => {
            let radius = s.positive("R", 1.0)?;
            let (model, states) = delta_ring_presonance(radius).map_err(input)?;
            let RadialModel::DeltaRing { a, .. } = model else { unreachable!() };
            lines.push(format!("R = {radius}"));
            lines.push(format!("a = {a}"));
            let worst = states.iter().filter_map(|st| st.interface_residuals()).fold(0.0f64, |m, (c, d)| m.max(c).max(d));
            (model, states, worst)
        }
        "robin-disc" => {
            let rho = s.positive("rho", 1.0)?;
            let (model, states) = robin_disc_presonance(rho).map_err(input)?;
            let RadialModel::RobinDisc { sigma, .. } = model else { unreachable!() };
            lines.push(format!("rho = {rho}"));
            lines.push(format!("sigma = {sigma}"));
            let worst = states.iter().filter_map(|st| st.robin_residual(sigma)).fold(0.0f64, |m, r| m.max(r.abs()));
            (model, states, worst)
        }
        "vws" => {
            let a0 = s.positive("a0", 1.0)?;
            let h = s.positive("h", 0.02)?;
            let constant = verify::vws_residual(h, a0, false).map_err(numeric)?;
            let variable = verify::vws_residual(h, a0, true).map_err(numeric)?;
            let coarse = verify::vws_residual(2.0 * h, a0, false).map_err(numeric)?;
            lines.push(format!("a0 = {a0}"));
            lines.push(format!("h = {h}"));
            lines.push(format!("residual_constant_c = {constant:e}"));
            lines.push(format!("residual_variable_c = {variable:e}"));
            let ratio = coarse / constant;
            lines.push(format!("refinement_ratio = {ratio}"));
            let passed = (3.5..=4.5).contains(&ratio);
            lines.push(format!("passed = {passed}"));
            out.write(&(lines.join("\n") + "\n"))?;
            return if passed { Ok(()) } else { Err(Failure::Checks) };
        }
        other => return Err(s.bad("variant", format!("no resonance family `{other}`"))),
    };
    lines.push(format!("max_residual = {residual:e}"));
    lines.push(format!("tolerance = {tol:e}"));
    let passed = residual <= tol;
    lines.push(format!("passed = {passed}"));
    let record = json!({ "model": model, "states": states.iter().map(state_record).collect::<Vec<_>>() });
    lines.push(format!("states = {record}"));
    out.write(&(lines.join("\n") + "\n"))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn resolvent(s: &Settings, out: &Output) -> Run<()> {
    let model = s.model()?;
    let mode = s.mode()?;
    let thetas: Vec<f64> = match s.str("theta") {
        None => vec![PI / 2.0, PI / 4.0, 3.0 * PI / 4.0],
        Some(list) => list
            .split(',')
            .map(|x| parse_real(x).ok().filter(|th| *th > -PI / 2.0 && *th <= 3.0 * PI / 2.0))
            .collect::<Option<_>>()
            .ok_or_else(|| s.bad("theta", format!("expected angles in (-pi/2, 3pi/2], found `{list}`")))?,
    };
    let moduli = parse_t_grid(s.str("lambda-grid").unwrap_or("1e-4:1e-1:16")).map_err(|e| s.bad("lambda-grid", describe(&e)))?;
    let h = s.positive("h", 0.01)?;
    let r = s.positive("r", 2.0)?;
    if r < model.inner_radius() {
        return Err(s.bad("r", format!("observer {r} lies inside the obstacle")));
    }
    let f = s.data(&model)?;
    let samples = RadialSamples::from_fn(&model, 8.0_f64.max(r + 1.0), h, f).map_err(input)?;
    let lambdas: Vec<BranchedComplex> = thetas
        .iter()
        .flat_map(|&th| moduli.iter().map(move |&m| BranchedComplex::from_polar(m, th)))
        .collect::<Result<_>>()
        .map_err(input)?;
    let values = sample_pointwise(&model, mode, &samples.grid, &samples.values, r, &lambdas).map_err(numeric)?;
    let mut table = SeriesTable::new(&["lambda_re", "lambda_im", "re", "im"]);
    s.metadata("resolvent", &mut table);
    for (l, v) in lambdas.iter().zip(values) {
        table.rows.push(vec![l.value().re, l.value().im, v.re, v.im]);
    }
    out.write(&table.render().map_err(numeric)?)
}

fn contour(s: &Settings, out: &Output) -> Run<()> {
    let b = parse_complex(s.str("b").unwrap_or("-1i")).map_err(|e| s.bad("b", describe(&e)))?;
    if !(b.norm() > 0.0) || (b.arg() + PI / 2.0).abs() > 1e-12 {
        return Err(s.bad("b", format!("{b} must be a negative imaginary number (arg b = -pi/2)")));
    }
    let times = parse_t_grid(s.str("t-grid").unwrap_or("e6:e12:4")).map_err(|e| s.bad("t-grid", describe(&e)))?;
    if times[0] < 2.0 {
        return Err(s.bad("t-grid", "times must be at least 2".into()));
    }
    let a = s.positive("A", 4.0)?;
    let c = s.positive("C", 1.0)?;
    let c_prime = s.positive("C-prime", 1.0)?;
    let eta = s.positive("eta", 0.05)?;
    let base = ContourSpec::with_constants(a, c, c_prime, times[0].max(3.0), eta.min(0.25 / b.norm()))
        .or_else(|_| ContourSpec::with_constants(a, c, c_prime, times[times.len() - 1], eta.min(0.25 / b.norm())))
        .map_err(input)?;
    let samples = jm_series(&base, b, &times).map_err(numeric)?;
    let mut table = SeriesTable::new(&["t", "J", "J_norm"]);
    s.metadata("contour", &mut table);
    for smp in samples {
        table.rows.push(vec![smp.t, smp.value, smp.normalized]);
    }
    out.write(&table.render().map_err(numeric)?)
}

fn simulate(s: &Settings, out: &Output) -> Run<()> {
    let model = s.model()?;
    let mode = s.mode()?;
    let h = s.positive("h", 0.05)?;
    let t_final = s.positive("T", 100.0)?;
    let sample_dt = s.positive("sample-dt", 0.5)?;
    let observers: Vec<f64> = s
        .str("observers")
        .unwrap_or("2")
        .split(',')
        .map(|x| parse_real(x).ok().filter(|r| *r > model.inner_radius()))
        .collect::<Option<_>>()
        .ok_or_else(|| s.bad("observers", "expected comma-separated radii outside the obstacle".into()))?;
    let f = s.data(&model)?;
    let r_max = observers.iter().fold(8.0f64, |m, r| m.max(r + 1.0));
    let samples = RadialSamples::from_fn(&model, r_max, h, f).map_err(input)?;
    let method = s.str("method").unwrap_or("fd");
    let field: WaveField = match method {
        "fd" => {
            let opts = FdOptions { sample_dt, ..FdOptions::default() };
            evolve_fd(&model, mode, &samples, t_final, &observers, &opts).map_err(|e| match e {
                Error::Grid(_) | Error::Stability(_) => input(e),
                other => numeric(other),
            })?
        }
        "spectral" => {
            let n = (t_final / sample_dt).round().max(1.0) as usize;
            let times: Vec<f64> = (0..=n).map(|k| t_final * k as f64 / n as f64).collect();
            evolve_spectral(&model, mode, &samples, &times, &observers, &SpectralOptions::default()).map_err(numeric)?
        }
        other => return Err(s.bad("method", format!("expected fd or spectral, found `{other}`"))),
    };

    let bound = find_bound_states(&model, mode).map_err(numeric)?;
    let zero = zero_eigenstate(&model, mode).map_err(numeric)?;
    let presonant = mode.abs() == 1 && at_threshold(&model, mode);
    let mut table = SeriesTable::new(&["t", "r", "u", "u_d", "u_z", "u_r"]);
    s.metadata("simulate", &mut table);
    table.meta("method", method);
    table.meta("grid_h", field.r_grid.h);
    table.meta("grid_nodes", field.r_grid.n);
    table.meta("cfl", field.cfl);
    table.meta("bound_states", bound.len());
    for (i, &r) in observers.iter().enumerate() {
        let fit = if presonant { Some(pointwise_fit(&model, mode, &samples, r).map_err(numeric)?) } else { None };
        let inputs = SplitInputs { bound: bound.clone(), fit, zero, ..SplitInputs::default() };
        let split = decompose(&field, i, &model, &samples, &inputs).map_err(numeric)?;
        table.meta(&format!("u_z_amp_r{r}"), split.u_z_amp);
        if let Some(alpha) = split.fit_alpha {
            table.meta(&format!("fit_alpha_r{r}"), alpha);
        }
        for j in 0..split.times.len() {
            table.rows.push(vec![split.times[j], r, split.u[j], split.u_d[j], split.u_z[j], split.u_r[j]]);
        }
    }
    out.write(&table.render().map_err(numeric)?)?;
    if let Some(path) = s.str("plot-script") {
        let csv = out.path.as_ref().map_or("series.csv".to_string(), |p| p.display().to_string());
        fs::write(path, plot_script(&csv)).map_err(|e| numeric(Error::from(e)))?;
    }
    Ok(())
}

/// Python script that plots a `simulate` CSV; written as text so the
/// crate needs no plotting dependency.
pub fn plot_script(csv: &str) -> String {
    format!(
        r##"# Plots the u / u_d / u_z / u_r split written by `logdecay simulate`.
import csv
import matplotlib.pyplot as plt

rows = [r for r in csv.DictReader(l for l in open({csv:?}) if not l.startswith("#"))]
for radius in sorted({{r["r"] for r in rows}}, key=float):
    sel = [r for r in rows if r["r"] == radius]
    t = [float(r["t"]) for r in sel]
    for key in ("u", "u_d", "u_z", "u_r"):
        plt.plot(t, [float(r[key]) for r in sel], label=f"{{key}} at r={{radius}}")
plt.xlabel("t")
plt.legend()
plt.show()
"##
    )
}

fn fit(s: &Settings, out: &Output) -> Run<()> {
    let path = s.str("input").ok_or_else(|| s.bad("input", "is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| s.bad("input", format!("cannot read {path}: {e}")))?;
    let table = SeriesTable::parse(&text).map_err(input)?;
    let law = s.str("law").unwrap_or("t_over_log");
    let mut rec = s.record("fit");
    let passed = if law == "expansion" {
        let cols: Vec<Vec<f64>> = ["lambda_re", "lambda_im", "re", "im"]
            .iter()
            .map(|c| table.column(c).ok_or_else(|| s.bad("input", format!("CSV lacks column `{c}`"))))
            .collect::<Run<_>>()?;
        let samples = (0..cols[0].len())
            .map(|k| Ok((BranchedComplex::new(crate::Complex64::new(cols[0][k], cols[1][k]))?, crate::Complex64::new(cols[2][k], cols[3][k]))))
            .collect::<Result<Vec<_>>>()
            .map_err(input)?;
        let fit = fit_expansion(&samples).map_err(|e| match e {
            Error::InsufficientData(_) => input(e),
            other => numeric(other),
        })?;
        rec.insert("fit".into(), json!(fit));
        true
    } else {
        let decay_law = match law.split_once(':') {
            None if law == "t_over_log" => DecayLaw::TOverLog,
            Some(("log_power", m)) => DecayLaw::LogPower(m.parse().map_err(|_| s.bad("law", format!("bad power `{m}`")))?),
            _ => return Err(s.bad("law", format!("expected t_over_log, log_power:M or expansion, found `{law}`"))),
        };
        let column = s.str("column").unwrap_or("u");
        let t = table.column("t").ok_or_else(|| s.bad("input", "CSV lacks column `t`".into()))?;
        let y = table.column(column).ok_or_else(|| s.bad("column", format!("CSV lacks column `{column}`")))?;
        let keep: Vec<usize> = match (s.cfg.f64("r").map_err(input)?, table.column("r")) {
            (Some(r0), Some(rs)) => (0..t.len()).filter(|&k| rs[k] == r0).collect(),
            (Some(_), None) => return Err(s.bad("r", "CSV has no `r` column".into())),
            (None, Some(rs)) if rs.iter().any(|r| *r != rs[0]) => {
                return Err(s.bad("r", "CSV holds several observers; select one with `r`".into()))
            }
            _ => (0..t.len()).collect(),
        };
        let window = match s.str("window") {
            None => None,
            Some(w) => {
                let parsed = w.split_once(':').and_then(|(a, b)| Some((parse_real(a).ok()?, parse_real(b).ok()?)));
                match parsed {
                    Some((lo, hi)) if hi > lo => Some((lo, hi)),
                    _ => return Err(s.bad("window", format!("expected lo:hi, found `{w}`"))),
                }
            }
        };
        let times: Vec<f64> = keep.iter().map(|&k| t[k]).collect();
        let series: Vec<f64> = keep.iter().map(|&k| y[k]).collect();
        let fit = fit_decay(&times, &series, decay_law, window).map_err(|e| match e {
            Error::InsufficientData(_) => input(e),
            other => numeric(other),
        })?;
        rec.insert("fit".into(), json!(fit));
        fit.passes
    };
    rec.insert("passed".into(), json!(passed));
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(rec)).map_err(|e| numeric(Error::Io(e.to_string())))?;
    out.write(&(text + "\n"))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn verify_all(s: &Settings, out: &Output) -> Run<()> {
    let ids: Vec<u8> = match s.str("only") {
        None => Vec::new(),
        Some(list) => list
            .split(',')
            .map(|x| x.trim().parse::<u8>().ok().filter(|id| (1..=9).contains(id)))
            .collect::<Option<_>>()
            .ok_or_else(|| s.bad("only", format!("expected check ids 1..9, found `{list}`")))?,
    };
    let outcomes = verify::run(&ids);
    let mut text = String::from("id | check | result | seconds | detail\n");
    for o in &outcomes {
        text.push_str(&format!(
            "{} | {} | {} | {:.1} | {}\n",
            o.id,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.seconds,
            o.detail
        ));
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    text.push_str(&format!("{} of {} checks passed\n", outcomes.len() - failed, outcomes.len()));
    out.write(&text)?;
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}
