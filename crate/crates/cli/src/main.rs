use std::fmt;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latpdo::builtin::{Builtin, BuiltinKind};
use latpdo::classes::{class_check, cv_check, gohberg_decay, singular_tail, ClassParams, WeightStyle};
use latpdo::fractional::{
    apply_fractional, classify_conjecture1, classify_weak_and_strong, fractional_kernel,
    kstar_norm_probe, kstar_parseval_pair, strong_norm_closed_form, weak_norm_closed_form,
    FractionalParams, NormValue,
};
use latpdo::matrix::DEFAULT_MATRIX_CAP;
use latpdo::norms::{default_seminorm_exponent, sandwich_constant};
use latpdo::operators::{apply_multiplier, apply_pdo, opnorm_l1_lp, opnorm_l1_weakp, pdo_matrix};
use latpdo::symbol::{Identity, Modulation, MultiplierSymbol, SampledMultiplier, ToroidalFromLattice};
use latpdo::torus::check_alias_free;
use latpdo::verify::{run_criterion, VerifyOptions, CRITERIA_COUNT, DEFAULT_SEED};
use latpdo::{
    dft, equivalent_seminorm, inverse_dft, lp_norm, opnorm_l2, weak_norm, Error, LatticeSequence,
    MultiIndex, TorusGrid, TorusSamples, Window,
};
use serde::Serialize;

mod output;
mod scan;

use output::{emit, sink, Format};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn parse(msg: impl Into<String>) -> Self {
        CliError { code: 2, message: msg.into() }
    }

    pub fn unwritable(path: &Path, e: std::io::Error) -> Self {
        CliError {
            code: 4,
            message: format!("cannot write {}: {e}", path.display()),
        }
    }

    pub fn write(e: std::io::Error) -> Self {
        CliError { code: 4, message: format!("write failed: {e}") }
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        CliError { code: 1, message: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Aliasing { .. } => 3,
            Error::NonConvergence { .. } => 1,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser)]
#[command(name = "latpdo", version, about = "Fourier multipliers and pseudo-differential operators on the integer lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a multiplier, fractional integral or built-in symbol to a sequence file
    Apply(ApplyArgs),
    /// Write a kernel (inverse transform of a symbol) or the samples of a sequence's transform
    Kernel(KernelArgs),
    /// Norms of a sequence file
    Norm(NormArgs),
    /// Operator norms: l1 to weak/strong lp for multipliers, l2 for built-in symbols
    Opnorm(OpnormArgs),
    /// Boundedness verdicts for fractional integrals, or class constants for a built-in symbol
    Classify(ClassifyArgs),
    /// Parameter scan over (k, lambda, gamma, p, q) written as CSV
    Scan(ScanArgs),
    /// Tabulate grid L^2k norms of truncated fractional symbols
    Kstar(KstarArgs),
    /// Gohberg decay profile d(R) of a built-in symbol
    Gohberg(GohbergArgs),
    /// Leading singular values of a finite section
    Spectrum(SpectrumArgs),
    /// Run the verification suite
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Lattice dimension
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Torus grid resolution M (nodes per axis)
    #[arg(long = "grid-res", default_value_t = 64)]
    grid_res: usize,
    /// Window: `lo:hi` per axis, comma separated, or a radius `r`
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Output path (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for randomized checks (default 42)
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn grid(&self) -> Result<TorusGrid, CliError> {
        if self.grid_res < 2 {
            return Err(CliError::parse("grid resolution must be at least 2"));
        }
        Ok(TorusGrid::new(self.dim, self.grid_res)?)
    }

    fn window(&self) -> Result<Option<Window>, CliError> {
        self.window.as_deref().map(|w| parse_window(w, self.dim)).transpose()
    }

    fn require_window(&self) -> Result<Window, CliError> {
        self.window()?.ok_or_else(|| CliError::parse("--window is required"))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

type KernelSupport = Option<Vec<MultiIndex>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SymbolKind {
    Identity,
    Modulation,
    Fractional,
    Grid,
    Pdo,
}

#[derive(Args, Clone)]
struct SymbolArgs {
    #[arg(long, value_enum)]
    symbol: Option<SymbolKind>,
    /// Translation for the modulation symbol, e.g. `3` or `1,-2`
    #[arg(long, allow_hyphen_values = true)]
    shift: Option<String>,
    /// Power k of the fractional integral
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,
    /// Truncation M of fractional kernels
    #[arg(long, default_value_t = 1000)]
    terms: u64,
    /// Symbol samples in the CSV format written by `kernel --to-symbol`
    #[arg(long = "grid-file")]
    grid_file: Option<PathBuf>,
    /// Built-in symbol name (identity, half, decay, finite-rank, cv-smooth, cv-half, linear)
    #[arg(long)]
    pdo: Option<String>,
}

impl SymbolArgs {
    fn kind(&self) -> SymbolKind {
        self.symbol.unwrap_or(if self.pdo.is_some() {
            SymbolKind::Pdo
        } else if self.grid_file.is_some() {
            SymbolKind::Grid
        } else if self.lambda.is_some() {
            SymbolKind::Fractional
        } else {
            SymbolKind::Identity
        })
    }

    fn fractional(&self) -> Result<FractionalParams, CliError> {
        let k = self.k.ok_or_else(|| CliError::parse("--k is required for the fractional symbol"))?;
        let lambda = self
            .lambda
            .ok_or_else(|| CliError::parse("--lambda is required for the fractional symbol"))?;
        Ok(FractionalParams::new(k, lambda, self.gamma)?)
    }

    fn builtin(&self, dim: usize) -> Result<Builtin, CliError> {
        let name = self.pdo.as_deref().ok_or_else(|| CliError::parse("--pdo is required"))?;
        Ok(Builtin::new(name.parse::<BuiltinKind>()?, dim))
    }

    fn shift(&self, dim: usize) -> Result<MultiIndex, CliError> {
        let text = self.shift.as_deref().ok_or_else(|| CliError::parse("--shift is required for modulation"))?;
        let coords = parse_ints(text)?;
        if coords.len() != dim {
            return Err(CliError::parse(format!("shift has {} coordinates, expected {dim}", coords.len())));
        }
        Ok(MultiIndex::new(&coords))
    }

    /// Multiplier symbols sampled on `grid`, with the kernel support when it is known.
    fn multiplier(&self, grid: &TorusGrid) -> Result<(Box<dyn MultiplierSymbol>, KernelSupport), CliError> {
        let dim = grid.dim();
        match self.kind() {
            SymbolKind::Identity => Ok((Box::new(Identity { dim }), Some(vec![MultiIndex::zeros(dim)]))),
            SymbolKind::Modulation => {
                let shift = self.shift(dim)?;
                Ok((Box::new(Modulation { shift: shift.clone() }), Some(vec![shift])))
            }
            SymbolKind::Grid => {
                let samples = read_samples(self.grid_file.as_deref().unwrap_or(Path::new("")))?;
                if samples.grid() != grid {
                    return Err(CliError::parse(format!(
                        "grid file has resolution {} and dim {}; pass matching --grid-res and --dim",
                        samples.grid().resolution(),
                        samples.grid().dim()
                    )));
                }
                Ok((Box::new(SampledMultiplier::new(samples)), None))
            }
            SymbolKind::Fractional => {
                if dim != 1 {
                    return Err(CliError::parse("fractional integrals live on Z (use --dim 1)"));
                }
                let params = self.fractional()?;
                let kernel = fractional_kernel(&params, self.terms)?;
                let support: Vec<MultiIndex> = kernel.support().cloned().collect();
                Ok((Box::new(SampledMultiplier::new(dft(&kernel, grid)?)), Some(support)))
            }
            SymbolKind::Pdo => Err(CliError::parse("a built-in pseudo-differential symbol is not a multiplier here")),
        }
    }
}

#[derive(Args)]
struct ApplyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    symbol: SymbolArgs,
    /// Input sequence (JSON Lines)
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    symbol: SymbolArgs,
    /// Write the samples of the transform of this sequence file instead
    #[arg(long = "to-symbol")]
    to_symbol: Option<PathBuf>,
}

#[derive(Args)]
struct NormArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Seminorm exponent r in (0, p); default p/2
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args)]
struct OpnormArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    symbol: SymbolArgs,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Largest window cardinality for assembled matrices
    #[arg(long, default_value_t = DEFAULT_MATRIX_CAP)]
    cap: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WeightArg {
    JapaneseBracket,
    OnePlusNorm,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    symbol: SymbolArgs,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Built-in symbols: rho of the Calderon-Vaillancourt condition
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    /// Built-in symbols: run the general class check of this order instead
    #[arg(long = "class-order", allow_hyphen_values = true)]
    class_order: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, value_enum)]
    weight: Option<WeightArg>,
    #[arg(long, default_value_t = 1)]
    n1: u32,
    #[arg(long, default_value_t = 1)]
    n2: u32,
    #[arg(long, default_value_t = 100.0)]
    tolerance: f64,
}

#[derive(Args)]
pub struct ScanArgs {
    #[command(flatten)]
    common: Common,
    /// Values of k: list `1,2,3` or inclusive linspace `start:stop:count`
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    /// Kernel truncation M
    #[arg(long)]
    terms: Option<u64>,
    /// key=value file with any of the options above; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Skip cells already present in --out and append the rest
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct KstarArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "2")]
    k: String,
    #[arg(long, default_value = "0.8")]
    lambda: String,
    /// Truncations M, list or `start:stop:count`
    #[arg(long, default_value = "10,20,40")]
    terms: String,
}

#[derive(Args)]
struct GohbergArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    pdo: String,
    /// Radii: list or inclusive integer range `a:b`
    #[arg(long, default_value = "0:64")]
    radii: String,
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    pdo: String,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_MATRIX_CAP)]
    cap: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Corrupt one kernel value in the first criterion
    #[arg(long = "inject-fault")]
    inject_fault: bool,
    /// Run only these criteria, e.g. `1,5,8`
    #[arg(long)]
    only: Option<String>,
}

/// `1,2,3` or inclusive linspace `start:stop:count`.
pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::parse(format!("bad value list {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, count] => {
            let (a, b) = (num(start)?, num(stop)?);
            let n: usize = count.trim().parse().map_err(|_| bad())?;
            match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        [single] => single.split(',').map(num).collect::<Result<_, _>>()?,
        _ => return Err(bad()),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

fn parse_ints(text: &str) -> Result<Vec<i64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<i64>().map_err(|_| CliError::parse(format!("bad integer list {text:?}"))))
        .collect()
}

/// `a:b` inclusive range or comma list of nonnegative integers.
fn parse_radii(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::parse(format!("bad radii {text:?}"));
    if let Some((a, b)) = text.split_once(':') {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        Ok((a..=b).collect())
    } else {
        text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
    }
}

fn parse_window(text: &str, dim: usize) -> Result<Window, CliError> {
    let bad = || CliError::parse(format!("bad window {text:?}; expected lo:hi[,lo:hi...] or a radius"));
    if !text.contains(':') {
        let r: i64 = text.trim().parse().map_err(|_| bad())?;
        return Ok(Window::cube(dim, r)?);
    }
    let mut axes: Vec<(i64, i64)> = text
        .split(',')
        .map(|part| {
            let (a, b) = part.split_once(':').ok_or_else(bad)?;
            Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
        })
        .collect::<Result<_, CliError>>()?;
    if axes.len() == 1 && dim > 1 {
        axes = vec![axes[0]; dim];
    }
    if axes.len() != dim {
        return Err(CliError::parse(format!("window has {} axes, expected {dim}", axes.len())));
    }
    let lo: Vec<i64> = axes.iter().map(|a| a.0).collect();
    let hi: Vec<i64> = axes.iter().map(|a| a.1).collect();
    Ok(Window::new(lo.into(), hi.into())?)
}

fn read_sequence_file(path: &Path) -> Result<LatticeSequence, CliError> {
    let f = File::open(path).map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    Ok(latpdo::io::read_sequence(BufReader::new(f))?)
}

fn read_samples(path: &Path) -> Result<TorusSamples, CliError> {
    let f = File::open(path).map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    Ok(TorusSamples::read_csv(BufReader::new(f))?)
}

fn write_sequence_out(f: &LatticeSequence, out: Option<&Path>) -> Result<(), CliError> {
    let mut w = sink(out)?;
    latpdo::io::write_sequence(f, &mut w).map_err(|e| match e {
        Error::Io(io) => CliError::write(io),
        other => other.into(),
    })
}

/// Smallest window containing the support.
fn bounding_window(f: &LatticeSequence) -> Result<Window, CliError> {
    let mut it = f.support();
    let first = it.next().ok_or_else(|| CliError::parse("empty input sequence; pass --window"))?;
    let mut lo = first.coords().to_vec();
    let mut hi = lo.clone();
    for p in it {
        for (axis, &c) in p.coords().iter().enumerate() {
            lo[axis] = lo[axis].min(c);
            hi[axis] = hi[axis].max(c);
        }
    }
    Ok(Window::new(lo.into(), hi.into())?)
}

#[derive(Serialize)]
struct Summary {
    support: usize,
    l1: f64,
    l2: f64,
    weak_2: f64,
}

fn summary(f: &LatticeSequence) -> Result<Summary, CliError> {
    Ok(Summary {
        support: f.len(),
        l1: lp_norm(f, 1.0)?,
        l2: lp_norm(f, 2.0)?,
        weak_2: weak_norm(f, 2.0)?,
    })
}

fn cmd_apply(a: &ApplyArgs) -> Result<(), CliError> {
    let f = read_sequence_file(&a.input)?;
    if f.dim() != a.common.dim {
        return Err(CliError::parse(format!("input has dimension {}, --dim is {}", f.dim(), a.common.dim)));
    }
    let window = match a.common.window()? {
        Some(w) => w,
        None => bounding_window(&f)?,
    };
    let result = match a.symbol.kind() {
        SymbolKind::Fractional => apply_fractional(&a.symbol.fractional()?, &f, &window)?,
        SymbolKind::Pdo => {
            let grid = a.common.grid()?;
            check_alias_free(f.support(), &grid)?;
            check_alias_free(window.points().collect::<Vec<_>>().iter(), &grid)?;
            apply_pdo(&a.symbol.builtin(grid.dim())?, &f, &grid, &window)?
        }
        _ => {
            let grid = a.common.grid()?;
            let (m, kernel_support) = a.symbol.multiplier(&grid)?;
            // the output window and every shifted input point must be distinct mod M
            let mut points: Vec<MultiIndex> = window.points().collect();
            match kernel_support {
                Some(ks) => {
                    for y in f.support() {
                        for k in &ks {
                            points.push(y + k);
                        }
                    }
                }
                None => points.extend(f.support().cloned()),
            }
            check_alias_free(points.iter(), &grid)?;
            apply_multiplier(m.as_ref(), &f, &grid, &window)?
        }
    };
    write_sequence_out(&result, a.common.out.as_deref())?;
    let s = serde_json::to_string(&summary(&result)?).map_err(|e| CliError::internal(e.to_string()))?;
    eprintln!("{s}");
    Ok(())
}

fn cmd_kernel(a: &KernelArgs) -> Result<(), CliError> {
    if let Some(path) = &a.to_symbol {
        let f = read_sequence_file(path)?;
        let grid = TorusGrid::new(f.dim(), a.common.grid_res)?;
        check_alias_free(f.support(), &grid)?;
        let mut w = sink(a.common.out.as_deref())?;
        return dft(&f, &grid)?.write_csv(&mut w).map_err(|e| match e {
            Error::Io(io) => CliError::write(io),
            other => other.into(),
        });
    }
    let kernel = match a.symbol.kind() {
        SymbolKind::Fractional => {
            let k = fractional_kernel(&a.symbol.fractional()?, a.symbol.terms)?;
            match a.common.window()? {
                Some(w) => k.restrict(&w),
                None => k,
            }
        }
        SymbolKind::Pdo => return Err(CliError::parse("built-in pseudo-differential symbols have no single kernel")),
        _ => {
            let grid = a.common.grid()?;
            let window = a.common.require_window()?;
            let (m, _) = a.symbol.multiplier(&grid)?;
            check_alias_free(window.points().collect::<Vec<_>>().iter(), &grid)?;
            inverse_dft(&m.sample(&grid)?, &window)?
        }
    };
    write_sequence_out(&kernel, a.common.out.as_deref())
}

#[derive(Serialize)]
struct NormReport {
    support: usize,
    p: f64,
    r: f64,
    lp_norm: f64,
    weak_norm: f64,
    seminorm: f64,
    sandwich_constant: f64,
}

fn cmd_norm(a: &NormArgs) -> Result<(), CliError> {
    let f = read_sequence_file(&a.input)?;
    let r = a.r.unwrap_or_else(|| default_seminorm_exponent(a.p));
    let report = NormReport {
        support: f.len(),
        p: a.p,
        r,
        lp_norm: lp_norm(&f, a.p)?,
        weak_norm: weak_norm(&f, a.p)?,
        seminorm: equivalent_seminorm(&f, a.p, r)?,
        sandwich_constant: sandwich_constant(a.p, r),
    };
    emit(&report, a.common.format, &mut *sink(a.common.out.as_deref())?)
}

#[derive(Serialize)]
struct FractionalNorms {
    k: u32,
    lambda: f64,
    gamma: f64,
    p: f64,
    truncation: u64,
    weak_truncated: f64,
    strong_truncated: f64,
    weak_closed_form: NormValue,
    strong_closed_form: NormValue,
}

#[derive(Serialize)]
struct L2Norm {
    symbol: String,
    window_lo: Vec<i64>,
    window_hi: Vec<i64>,
    grid_resolution: usize,
    l2: f64,
}

#[derive(Serialize)]
struct MultiplierNorms {
    p: f64,
    weak: latpdo::operators::OpNormEstimate,
    strong: latpdo::operators::OpNormEstimate,
}

fn cmd_opnorm(a: &OpnormArgs) -> Result<(), CliError> {
    let mut out = sink(a.common.out.as_deref())?;
    match a.symbol.kind() {
        SymbolKind::Fractional => {
            let params = a.symbol.fractional()?;
            let kernel = fractional_kernel(&params, a.symbol.terms)?;
            let report = FractionalNorms {
                k: params.k,
                lambda: params.lambda,
                gamma: params.gamma,
                p: a.p,
                truncation: a.symbol.terms,
                weak_truncated: weak_norm(&kernel, a.p)?,
                strong_truncated: lp_norm(&kernel, a.p)?,
                weak_closed_form: weak_norm_closed_form(&params, a.p)?,
                strong_closed_form: strong_norm_closed_form(&params, a.p)?,
            };
            emit(&report, a.common.format, &mut *out)
        }
        SymbolKind::Pdo => {
            let grid = a.common.grid()?;
            let window = a.common.require_window()?;
            let symbol = a.symbol.builtin(grid.dim())?;
            let matrix = pdo_matrix(&symbol, &window, &grid, a.cap)?;
            let report = L2Norm {
                symbol: symbol.kind.name().to_string(),
                window_lo: window.lo().coords().to_vec(),
                window_hi: window.hi().coords().to_vec(),
                grid_resolution: grid.resolution(),
                l2: opnorm_l2(&matrix, a.tol)?,
            };
            emit(&report, a.common.format, &mut *out)
        }
        _ => {
            let grid = a.common.grid()?;
            let window = a.common.require_window()?;
            let (m, _) = a.symbol.multiplier(&grid)?;
            let report = MultiplierNorms {
                p: a.p,
                weak: opnorm_l1_weakp(m.as_ref(), a.p, &grid, &window)?,
                strong: opnorm_l1_lp(m.as_ref(), a.p, &grid, &window)?,
            };
            emit(&report, a.common.format, &mut *out)
        }
    }
}

#[derive(Serialize)]
struct FractionalVerdict {
    k: u32,
    lambda: f64,
    gamma: f64,
    p: f64,
    weak_1p: bool,
    strong_1p: bool,
    weak_norm: NormValue,
    strong_norm: NormValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_bounded: Option<bool>,
}

fn cmd_classify(a: &ClassifyArgs) -> Result<(), CliError> {
    let mut out = sink(a.common.out.as_deref())?;
    if a.symbol.kind() == SymbolKind::Pdo {
        let grid = a.common.grid()?;
        let probe = a.common.require_window()?;
        let symbol = a.symbol.builtin(grid.dim())?;
        let report = match a.class_order {
            None => cv_check(&symbol, a.rho, a.n1, a.n2, &probe, &grid, a.tolerance)?,
            Some(order) => {
                let params = ClassParams {
                    order,
                    rho: a.rho,
                    delta: a.delta,
                    n1: a.n1,
                    n2: a.n2,
                    weight: match a.weight {
                        Some(WeightArg::OnePlusNorm) => WeightStyle::OnePlusNorm,
                        _ => WeightStyle::JapaneseBracket,
                    },
                    tolerance: a.tolerance,
                };
                class_check(&ToroidalFromLattice(&symbol), params, &probe, &grid)?
            }
        };
        return emit(&report, a.common.format, &mut *out);
    }
    let params = a.symbol.fractional()?;
    let p = a.p.ok_or_else(|| CliError::parse("--p is required"))?;
    let verdict = classify_weak_and_strong(&params, p)?;
    let predicted = a
        .q
        .map(|q| classify_conjecture1(p, q, params.lambda, params.k))
        .transpose()?;
    let report = FractionalVerdict {
        k: params.k,
        lambda: params.lambda,
        gamma: params.gamma,
        p,
        weak_1p: verdict.weak_1p,
        strong_1p: verdict.strong_1p,
        weak_norm: weak_norm_closed_form(&params, p)?,
        strong_norm: strong_norm_closed_form(&params, p)?,
        q: a.q,
        predicted_bounded: predicted,
    };
    emit(&report, a.common.format, &mut *out)
}

#[derive(Serialize)]
struct KstarRow {
    k: u32,
    lambda: f64,
    terms: u64,
    resolution: usize,
    l2k_norm: f64,
    grid_l2: f64,
    parseval_l2: f64,
}

fn cmd_kstar(a: &KstarArgs) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for k in parse_list(&a.k)? {
        if !(k >= 1.0 && k.fract() == 0.0 && k <= 16.0) {
            return Err(CliError::parse(format!("k must be an integer in 1..=16, got {k}")));
        }
        let k = k as u32;
        for lambda in parse_list(&a.lambda)? {
            for m in parse_list(&a.terms)? {
                if !(m >= 1.0 && m.fract() == 0.0) {
                    return Err(CliError::parse(format!("truncation must be a positive integer, got {m}")));
                }
                let m = m as u64;
                let top = m
                    .checked_pow(k)
                    .and_then(|t| t.checked_mul(2))
                    .ok_or_else(|| CliError::parse("M^k overflows"))?;
                let res = (top as usize).max(a.common.grid_res);
                let grid = TorusGrid::new(1, res)?;
                let (grid_l2, parseval_l2) = kstar_parseval_pair(k, lambda, m, &grid)?;
                rows.push(KstarRow {
                    k,
                    lambda,
                    terms: m,
                    resolution: res,
                    l2k_norm: kstar_norm_probe(k, lambda, m, &grid)?,
                    grid_l2,
                    parseval_l2,
                });
            }
        }
    }
    emit(&rows, a.common.format, &mut *sink(a.common.out.as_deref())?)
}

fn cmd_gohberg(a: &GohbergArgs) -> Result<(), CliError> {
    let grid = a.common.grid()?;
    let symbol = Builtin::new(a.pdo.parse::<BuiltinKind>()?, grid.dim());
    let report = gohberg_decay(&symbol, &grid, &parse_radii(&a.radii)?, a.tolerance)?;
    let mut out = sink(a.common.out.as_deref())?;
    match a.common.format {
        Format::Json => emit(&report, Format::Json, &mut *out),
        Format::Csv => {
            let rows: Vec<DecayRow> = report
                .radii
                .iter()
                .zip(&report.decay)
                .map(|(&radius, &decay)| DecayRow {
                    radius,
                    decay,
                    verdict: report.verdict,
                })
                .collect();
            emit(&rows, Format::Csv, &mut *out)
        }
    }
}

#[derive(Serialize)]
struct DecayRow {
    radius: u64,
    decay: f64,
    verdict: latpdo::classes::CompactnessVerdict,
}

#[derive(Serialize)]
struct SingularValue {
    j: usize,
    sigma: f64,
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<(), CliError> {
    let grid = a.common.grid()?;
    let window = a.common.require_window()?;
    let symbol = Builtin::new(a.pdo.parse::<BuiltinKind>()?, grid.dim());
    let matrix = pdo_matrix(&symbol, &window, &grid, a.cap)?;
    let values: Vec<SingularValue> = singular_tail(&matrix, a.count)?
        .into_iter()
        .enumerate()
        .map(|(j, sigma)| SingularValue { j, sigma })
        .collect();
    emit(&values, a.common.format, &mut *sink(a.common.out.as_deref())?)
}

#[derive(Serialize)]
struct VerifyReport {
    seed: u64,
    passed: bool,
    criteria: Vec<latpdo::verify::CriterionResult>,
}

fn cmd_verify(a: &VerifyArgs) -> Result<bool, CliError> {
    let ids: Vec<u32> = match &a.only {
        Some(list) => parse_ints(list)?
            .into_iter()
            .map(|i| {
                u32::try_from(i)
                    .ok()
                    .filter(|i| (1..=CRITERIA_COUNT).contains(i))
                    .ok_or_else(|| CliError::parse(format!("no criterion {i}")))
            })
            .collect::<Result<_, _>>()?,
        None => (1..=CRITERIA_COUNT).collect(),
    };
    let opts = VerifyOptions {
        seed: a.common.seed(),
        inject_fault: a.inject_fault,
    };
    let mut out = sink(a.common.out.as_deref())?;
    let mut criteria = Vec::new();
    for id in ids {
        let r = run_criterion(id, &opts);
        eprintln!("{}", r.line());
        criteria.push(r);
    }
    let passed = criteria.iter().all(|r| r.passed);
    match a.common.format {
        Format::Json => emit(
            &VerifyReport {
                seed: opts.seed,
                passed,
                criteria,
            },
            Format::Json,
            &mut *out,
        )?,
        Format::Csv => emit(&criteria, Format::Csv, &mut *out)?,
    }
    Ok(passed)
}

fn init_pool(jobs: Option<usize>) -> Result<(), CliError> {
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::parse("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::internal(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Apply(a) => init_pool(a.common.jobs).and_then(|_| cmd_apply(a)).map(|_| true),
        Command::Kernel(a) => init_pool(a.common.jobs).and_then(|_| cmd_kernel(a)).map(|_| true),
        Command::Norm(a) => init_pool(a.common.jobs).and_then(|_| cmd_norm(a)).map(|_| true),
        Command::Opnorm(a) => init_pool(a.common.jobs).and_then(|_| cmd_opnorm(a)).map(|_| true),
        Command::Classify(a) => init_pool(a.common.jobs).and_then(|_| cmd_classify(a)).map(|_| true),
        Command::Scan(a) => {
            let cfg = scan::ScanConfig::resolve(a)?;
            init_pool(cfg.jobs)?;
            scan::run(&cfg).map(|_| true)
        }
        Command::Kstar(a) => init_pool(a.common.jobs).and_then(|_| cmd_kstar(a)).map(|_| true),
        Command::Gohberg(a) => init_pool(a.common.jobs).and_then(|_| cmd_gohberg(a)).map(|_| true),
        Command::Spectrum(a) => init_pool(a.common.jobs).and_then(|_| cmd_spectrum(a)).map(|_| true),
        Command::Verify(a) => init_pool(a.common.jobs).and_then(|_| cmd_verify(a)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_linspaces() {
        assert_eq!(parse_list("1, 2.5,3").unwrap(), [1.0, 2.5, 3.0]);
        assert_eq!(parse_list("0:1:5").unwrap(), [0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_list("7:9:1").unwrap(), [7.0]);
        assert!(parse_list("0:1:0").unwrap().is_empty());
        assert!(parse_list("1:2").is_err());
        assert!(parse_list("inf").is_err());
        assert!(parse_list("a,b").is_err());
    }

    #[test]
    fn radii_and_ints() {
        assert_eq!(parse_radii("2:5").unwrap(), [2, 3, 4, 5]);
        assert_eq!(parse_radii("0,8").unwrap(), [0, 8]);
        assert!(parse_radii("-1:3").is_err());
        assert_eq!(parse_ints("1,-2").unwrap(), [1, -2]);
    }

    #[test]
    fn windows() {
        let w = parse_window("3", 2).unwrap();
        assert_eq!((w.lo().coords(), w.hi().coords()), (&[-3i64, -3][..], &[3i64, 3][..]));
        let w = parse_window("-1:4,0:2", 2).unwrap();
        assert_eq!((w.lo().coords(), w.hi().coords()), (&[-1i64, 0][..], &[4i64, 2][..]));
        // a single axis is repeated
        assert_eq!(parse_window("0:1", 3).unwrap().len(), 8);
        assert_eq!(parse_window("0:1,0:1", 3).unwrap_err().code, 2);
        assert_eq!(parse_window("1:", 1).unwrap_err().code, 2);
    }

    #[test]
    fn library_errors_map_to_exit_codes() {
        let points = [MultiIndex::new(&[0]), MultiIndex::new(&[4])];
        let aliasing = check_alias_free(&points, &TorusGrid::new(1, 4).unwrap()).unwrap_err();
        assert_eq!(CliError::from(aliasing).code, 3);
        let domain = FractionalParams::new(0, 0.5, 0.0).unwrap_err();
        assert_eq!(CliError::from(domain).code, 2);
    }
}
