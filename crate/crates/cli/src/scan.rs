//! Parameter scans over (k, λ, γ, p, q) with truncated-norm growth columns.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use latpdo::fractional::{
    classify_conjecture1, classify_weak_and_strong, fractional_kernel, FractionalParams,
};
use latpdo::norms::RearrangementProfile;
use rayon::prelude::*;

use crate::output::csv_number;
use crate::{parse_list, CliError, ScanArgs};

pub const HEADER: &str = "k,lambda,gamma,p,q,M,weak_norm,strong_norm,weak_flag,strong_flag,predicted_bounded";

/// Rows are computed and written in blocks of this many cells.
const BLOCK: usize = 256;

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub k: Vec<u32>,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub terms: u64,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub resume: bool,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    k: u32,
    lambda: f64,
    gamma: f64,
    p: f64,
    q: f64,
}

fn read_config(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::parse(format!("config line {}: expected key=value", n + 1)))?;
        map.insert(key.trim().replace('_', "-"), value.trim().trim_matches('"').to_string());
    }
    Ok(map)
}

impl ScanConfig {
    /// Merges flags over the optional key=value file; flags win.
    pub fn resolve(args: &ScanArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => read_config(p)?,
            None => HashMap::new(),
        };
        let pick = |flag: &Option<String>, key: &str, default: &str| -> String {
            flag.clone()
                .or_else(|| file.get(key).cloned())
                .unwrap_or_else(|| default.to_string())
        };
        let known = ["k", "lambda", "gamma", "p", "q", "terms", "out", "jobs", "resume"];
        if let Some(bad) = file.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(CliError::parse(format!("unknown config key {bad:?}")));
        }
        let k: Vec<u32> = parse_list(&pick(&args.k, "k", "1"))?
            .into_iter()
            .map(|v: f64| {
                if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                    Ok(v as u32)
                } else {
                    Err(CliError::parse(format!("k must be a positive integer, got {v}")))
                }
            })
            .collect::<Result<_, _>>()?;
        let terms_text = pick(&args.terms.map(|t| t.to_string()), "terms", "1000");
        let terms: u64 = terms_text
            .parse()
            .map_err(|_| CliError::parse(format!("bad terms value {terms_text:?}")))?;
        let out = args
            .common
            .out
            .clone()
            .or_else(|| file.get("out").map(PathBuf::from));
        let jobs = match args.common.jobs {
            Some(j) => Some(j),
            None => file
                .get("jobs")
                .map(|j| j.parse().map_err(|_| CliError::parse(format!("bad jobs value {j:?}"))))
                .transpose()?,
        };
        let resume = args.resume || file.get("resume").is_some_and(|v| v == "true");
        let cfg = ScanConfig {
            k,
            lambda: parse_list(&pick(&args.lambda, "lambda", "0.5"))?,
            gamma: parse_list(&pick(&args.gamma, "gamma", "0"))?,
            p: parse_list(&pick(&args.p, "p", "2"))?,
            q: parse_list(&pick(&args.q, "q", "1"))?,
            terms,
            out,
            jobs,
            resume,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("k", self.k.len()), ("lambda", self.lambda.len()), ("gamma", self.gamma.len()), ("p", self.p.len()), ("q", self.q.len())] {
            if v == 0 {
                return Err(CliError::parse(format!("empty range for {name}")));
            }
        }
        if self.terms < 1 {
            return Err(CliError::parse("terms must be at least 1"));
        }
        for &k in &self.k {
            for &l in &self.lambda {
                for &g in &self.gamma {
                    FractionalParams::new(k, l, g).map_err(CliError::from)?;
                }
            }
        }
        if let Some(p) = self.p.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
            return Err(CliError::parse(format!("p must lie in (1, inf), got {p}")));
        }
        if let Some(q) = self.q.iter().find(|q| !(**q >= 1.0 && q.is_finite())) {
            return Err(CliError::parse(format!("q must be at least 1, got {q}")));
        }
        Ok(())
    }

    fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &k in &self.k {
            for &lambda in &self.lambda {
                for &gamma in &self.gamma {
                    for &p in &self.p {
                        for &q in &self.q {
                            cells.push(Cell { k, lambda, gamma, p, q });
                        }
                    }
                }
            }
        }
        cells
    }
}

fn row(cell: Cell, terms: u64) -> Result<String, CliError> {
    let params = FractionalParams::new(cell.k, cell.lambda, cell.gamma)?;
    let kernel = fractional_kernel(&params, terms)?;
    let profile = RearrangementProfile::of(&kernel);
    let weak = profile.weak_norm(cell.p);
    let strong = latpdo::lp_norm(&kernel, cell.p)?;
    let verdict = classify_weak_and_strong(&params, cell.p)?;
    let predicted = classify_conjecture1(cell.p, cell.q, cell.lambda, cell.k)
        .map(|b| b.to_string())
        .unwrap_or_default();
    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        cell.k,
        csv_number(cell.lambda),
        csv_number(cell.gamma),
        csv_number(cell.p),
        csv_number(cell.q),
        terms,
        csv_number(weak),
        csv_number(strong),
        verdict.weak_1p,
        verdict.strong_1p,
        predicted
    ))
}

/// Number of complete data rows already in `path`, after dropping a partial last line.
fn completed_rows(path: &Path) -> Result<usize, CliError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(_) => return Ok(0),
    };
    if text.is_empty() {
        return Ok(0);
    }
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    let mut lines = complete.lines();
    match lines.next() {
        Some(h) if h == HEADER => {}
        None => return Ok(0),
        Some(_) => return Err(CliError::parse(format!("{} is not a scan output; refusing to resume", path.display()))),
    }
    let rows = lines.count();
    if complete.len() != text.len() {
        let f = OpenOptions::new().write(true).open(path).map_err(|e| CliError::unwritable(path, e))?;
        f.set_len(complete.len() as u64).map_err(|e| CliError::unwritable(path, e))?;
    }
    Ok(rows)
}

pub fn run(cfg: &ScanConfig) -> Result<(), CliError> {
    let cells = cfg.cells();
    let done = match (&cfg.out, cfg.resume) {
        (Some(p), true) => completed_rows(p)?,
        _ => 0,
    };
    let mut out: Box<dyn Write> = match &cfg.out {
        Some(p) if done > 0 || (cfg.resume && p.exists() && fs::metadata(p).map(|m| m.len() > 0).unwrap_or(false)) => Box::new(
            OpenOptions::new()
                .append(true)
                .open(p)
                .map_err(|e| CliError::unwritable(p, e))?,
        ),
        Some(p) => {
            let mut f = crate::output::sink(Some(p))?;
            writeln!(f, "{HEADER}").map_err(CliError::write)?;
            f
        }
        None => {
            let mut f = crate::output::sink(None)?;
            writeln!(f, "{HEADER}").map_err(CliError::write)?;
            f
        }
    };
    for block in cells[done.min(cells.len())..].chunks(BLOCK) {
        let rows: Vec<String> = block
            .par_iter()
            .map(|&c| row(c, cfg.terms))
            .collect::<Result<_, _>>()?;
        for r in rows {
            writeln!(out, "{r}").map_err(CliError::write)?;
        }
        out.flush().map_err(CliError::write)?;
    }
    Ok(())
}
