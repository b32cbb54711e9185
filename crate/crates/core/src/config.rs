//! Text formats shared by the command line: `key = value` configs, CSV
//! series with a `#` metadata block, time grids and complex literals.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::RadialModel;

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

/// Parsed `key = value` lines. Blank lines and `#` comments are skipped;
/// keys are unique.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KvConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split_once('#').map_or(raw, |(b, _)| b).trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected `key = value`, found `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(config_err(line, format!("invalid key `{key}`")));
            }
            if value.is_empty() {
                return Err(config_err(line, format!("key `{key}` has no value")));
            }
            if let Some((_, first)) = entries.get(key) {
                return Err(config_err(line, format!("duplicate key `{key}` (first set on line {first})")));
            }
            entries.insert(key.to_string(), (value.to_string(), line));
        }
        Ok(Self { entries })
    }

    /// Sets `key`, replacing any earlier value. Line 0 marks values that
    /// did not come from a file.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (value.into(), 0));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.1)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rejects any key outside `known`, reporting the first by line.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        let mut unknown: Vec<(usize, &str)> = self
            .entries
            .iter()
            .filter(|(k, _)| !known.contains(&k.as_str()))
            .map(|(k, (_, line))| (*line, k.as_str()))
            .collect();
        unknown.sort();
        match unknown.first() {
            Some((line, key)) => Err(config_err(*line, format!("unknown key `{key}`"))),
            None => Ok(()),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.parsed(key, |s| parse_real(s).ok())
    }

    pub fn u32(&self, key: &str) -> Result<Option<u32>> {
        self.parsed(key, |s| s.parse().ok())
    }

    pub fn i32(&self, key: &str) -> Result<Option<i32>> {
        self.parsed(key, |s| s.parse().ok())
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.parsed(key, |s| s.parse().ok())
    }

    fn parsed<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => parse(v)
                .map(Some)
                .ok_or_else(|| config_err(*line, format!("key `{key}`: cannot parse `{v}`"))),
        }
    }

    /// `f64` value that must be positive and finite when present.
    pub fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.f64(key)? {
            Some(v) if !(v > 0.0 && v.is_finite()) => {
                Err(config_err(self.line_of(key), format!("key `{key}` must be positive, got {v}")))
            }
            v => Ok(v),
        }
    }

    /// Lines `key = value` in key order.
    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, (v, _))| format!("{k} = {v}\n")).collect()
    }
}

/// Keys read by [`model_from_config`].
pub const MODEL_KEYS: [&str; 5] = ["variant", "a", "R", "rho", "sigma"];

/// Builds a model from the keys `variant` (`round-well`, `delta-ring`,
/// `robin-disc` or `free`), `a`, `R`, `rho` and `sigma`.
pub fn model_from_config(cfg: &KvConfig) -> Result<RadialModel> {
    let variant = cfg.get("variant").ok_or_else(|| config_err(0, "missing key `variant`"))?;
    let need = |key: &str| -> Result<f64> {
        cfg.f64(key)?
            .ok_or_else(|| config_err(cfg.line_of("variant"), format!("variant `{variant}` needs key `{key}`")))
    };
    let at = |e: Error| match e {
        Error::Domain(m) => config_err(cfg.line_of("variant"), m),
        other => other,
    };
    let allowed: &[&str] = match variant {
        "round-well" | "delta-ring" => &["variant", "a", "R"],
        "robin-disc" => &["variant", "rho", "sigma"],
        "free" => &["variant"],
        other => return Err(config_err(cfg.line_of("variant"), format!("unknown variant `{other}`"))),
    };
    if let Some(extra) = MODEL_KEYS.iter().find(|k| !allowed.contains(k) && cfg.get(k).is_some()) {
        return Err(config_err(cfg.line_of(extra), format!("key `{extra}` does not apply to variant `{variant}`")));
    }
    match variant {
        "round-well" => RadialModel::round_well(need("a")?, need("R")?).map_err(at),
        "delta-ring" => RadialModel::delta_ring(need("a")?, need("R")?).map_err(at),
        "robin-disc" => RadialModel::robin_disc(need("rho")?, need("sigma")?).map_err(at),
        _ => Ok(RadialModel::Free),
    }
}

/// Inverse of [`model_from_config`].
pub fn model_to_config(model: &RadialModel) -> KvConfig {
    let mut cfg = KvConfig::default();
    cfg.set("variant", model.name());
    match *model {
        RadialModel::RoundWell { a, radius } | RadialModel::DeltaRing { a, radius } => {
            cfg.set("a", a.to_string());
            cfg.set("R", radius.to_string());
        }
        RadialModel::RobinDisc { rho, sigma } => {
            cfg.set("rho", rho.to_string());
            cfg.set("sigma", sigma.to_string());
        }
        RadialModel::Free => {}
    }
    cfg
}

/// A real literal; `eX` stands for `exp(X)`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Domain(format!("cannot parse `{s}` as a real number"));
    let v = match s.strip_prefix('e') {
        Some(x) if !x.is_empty() => x.parse::<f64>().map_err(|_| bad())?.exp(),
        _ => s.parse::<f64>().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// A complex literal such as `2`, `-1i`, `i`, `0.5-2i` or `1e-3+4j`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Domain(format!("cannot parse `{s}` as a complex number"));
    if t.is_empty() {
        return Err(bad());
    }
    let finite = |v: f64| if v.is_finite() { Ok(v) } else { Err(bad()) };
    let imag_part = |body: &str| -> Result<f64> {
        match body {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            b => finite(b.parse::<f64>().map_err(|_| bad())?),
        }
    };
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(finite(t.parse::<f64>().map_err(|_| bad())?)?, 0.0));
    };
    // split at the last sign that does not belong to an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = finite(body[..k].parse::<f64>().map_err(|_| bad())?)?;
            Ok(Complex64::new(re, imag_part(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, imag_part(body)?)),
    }
}

/// Time grid `lo:hi:n` with `n` log-uniform points (endpoints included) or
/// a comma-separated list. Endpoints accept the `eX` shorthand.
pub fn parse_t_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    let bad = |why: &str| Error::Domain(format!("time grid `{s}`: {why}"));
    let times = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(bad("expected lo:hi:n"));
        };
        let (lo, hi) = (parse_real(lo)?, parse_real(hi)?);
        let n: usize = n.trim().parse().map_err(|_| bad("count is not a positive integer"))?;
        if n == 0 || n > 1_000_000 {
            return Err(bad("count must lie in 1..=1000000"));
        }
        if !(lo > 0.0 && hi >= lo) {
            return Err(bad("need 0 < lo <= hi"));
        }
        if n == 1 {
            if hi != lo {
                return Err(bad("a single point needs lo = hi"));
            }
            vec![lo]
        } else {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
        }
    } else {
        s.split(',').map(parse_real).collect::<Result<Vec<_>>>()?
    };
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) {
        return Err(bad("times must be positive"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("times must be strictly increasing"));
    }
    Ok(times)
}

/// Numeric CSV table with the `# key = value` block that precedes the
/// header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeriesTable {
    pub metadata: Vec<(String, String)>,
    pub headers: Vec<String>,
    /// Row-major values.
    pub rows: Vec<Vec<f64>>,
}

impl SeriesTable {
    pub fn new(headers: &[&str]) -> Self {
        Self { metadata: Vec::new(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut body_start = 0;
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if let Some(c) = trimmed.strip_prefix('#') {
                if let Some((k, v)) = c.split_once('=') {
                    metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
            } else if !trimmed.is_empty() {
                body_start = i;
                break;
            }
            body_start = i + 1;
        }
        let body: String = text.lines().skip(body_start).collect::<Vec<_>>().join("\n");
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(body.as_bytes());
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| config_err(body_start + 1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.is_empty() || headers.iter().any(String::is_empty) {
            return Err(config_err(body_start + 1, "missing or empty header"));
        }
        if let Some(h) = headers.iter().find(|h| h.chars().any(|c| c.is_control() || c == '"' || c == '#')) {
            return Err(config_err(body_start + 1, format!("column name {h:?} contains a quote, `#` or a control character")));
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize + body_start);
                config_err(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize + body_start);
            if rec.len() != headers.len() {
                return Err(config_err(line, format!("expected {} fields, found {}", headers.len(), rec.len())));
            }
            let row = rec
                .iter()
                .map(|f| match f.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(config_err(line, format!("`{f}` is not a finite number"))),
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { metadata, headers, rows })
    }

    /// CSV text; numbers use the shortest round-trip representation so the
    /// output is deterministic.
    pub fn render(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k} = {}\n", v.replace('\n', " ")));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.headers).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?);
        Ok(out)
    }
}
