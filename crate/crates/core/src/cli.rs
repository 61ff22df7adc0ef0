//! Command-line surface: construct, classify, scan, verify, and emit
//! plot-ready data.
//!
//! Six subcommands (`spectrum`, `scan`, `locus`, `classify`, `fom`,
//! `propagate`) wrap the library, each emitting UTF-8 CSV (comma separated,
//! header row) or JSON (an object with `"meta"` and `"rows"`/`"clusters"`/
//! `"branches"` keys).  Identical configurations produce byte-identical
//! output: rows are emitted in a fixed order and every float is printed with
//! 17 significant digits (`{:.16e}`).
//!
//! Every flag can instead come from a flat key-value config file
//! (`--config FILE`, lines of `key = value` using the long flag names);
//! flags given on the command line override the file.
//!
//! Exit codes: 0 success, 1 I/O or numerical failure, 2 input validation
//! failure, 3 verification mismatch (`fom --verify-table`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::atlas::{
    classify_point, hp_locus, locus_residual, scan_plane, DegeneracyCluster, ScanGrid,
};
use crate::fom::{fom2_classify, verify_table, MomentVariant};
use crate::network::{build_full_matrix, params_from_plane, PlanePoint, SystemParams, Topology};
use crate::numeric::{eig, match_spectra, propagate, TolPolicy};
use crate::spectra::assemble_full_spectrum;
use crate::{Error, Result, C};

/// Spectral analysis of non-Hermitian quadratic bosonic mode networks.
#[derive(Debug, Parser)]
#[command(name = "modenet", version, about)]
pub struct Cli {
    /// Subcommand to run.
    #[command(subcommand)]
    pub command: Command,
}

/// Available subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the closed-form and numeric spectra of a network plus their
    /// optimal-matching error.
    Spectrum(SpectrumArgs),
    /// Scan the (κ/ε, γ₋/ε) plane and write the eigenvalue/degeneracy table.
    Scan(ScanArgs),
    /// Emit the analytic degeneracy-locus ellipses (and, at a point, the
    /// branch residuals).
    Locus(LocusArgs),
    /// Classify the degeneracy clusters of the first-order dynamical matrix
    /// at a point.
    Classify(ClassifyArgs),
    /// Classify second-order field-operator-moment degeneracies, or verify
    /// a topology's tabulated moment degeneracy structure.
    Fom(FomArgs),
    /// Evaluate the propagator U(t) = exp(−iMt) and dump its entries.
    Propagate(PropagateArgs),
}

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// JSON object with "meta" and data keys.
    Json,
    /// Comma-separated values with a header row.
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidInput(format!(
                "unknown format '{other}' (expected json or csv)"
            ))),
        }
    }
}

impl FromStr for MomentVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "genuine" => Ok(Self::Genuine),
            "induced" => Ok(Self::Induced),
            other => Err(Error::InvalidInput(format!(
                "unknown variant '{other}' (expected genuine or induced)"
            ))),
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Network topology (two_mode, three_mode_linear, four_mode_linear_l1,
    /// four_mode_linear_l2, four_mode_circular, five_mode_linear,
    /// five_mode_pyramid).
    #[arg(long)]
    pub topology: Option<String>,
    /// Output format: json or csv.
    #[arg(long)]
    pub format: Option<String>,
    /// Output file path (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Flat key-value config file mirroring the long flag names; command-line
    /// flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Point selection: either a dimensionless plane point or explicit rates.
#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Mode frequency scale ε (defaults to 1; plane-point inputs are
    /// expressed in units of ε).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Coupling κ (explicit-rate input, paired with --gammas).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Comma-separated per-mode damping rates γ₁,…,γₙ (explicit-rate input).
    #[arg(long)]
    pub gammas: Option<String>,
    /// κ/ε of a plane point.
    #[arg(long = "kappa-over-eps")]
    pub kappa_over_eps: Option<f64>,
    /// γ₋/ε of a plane point.
    #[arg(long = "gamma-minus-over-eps")]
    pub gamma_minus_over_eps: Option<f64>,
    /// γ₊/ε of a plane point (defaults to 0).
    #[arg(long = "gamma-plus-over-eps")]
    pub gamma_plus_over_eps: Option<f64>,
}

/// Arguments of `spectrum`.
#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    point: PointArgs,
}

/// Arguments of `scan`.
#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Mode frequency scale ε.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Grid minimum of κ/ε (default 0).
    #[arg(long = "kappa-min")]
    kappa_min: Option<f64>,
    /// Grid maximum of κ/ε (default 1.5).
    #[arg(long = "kappa-max")]
    kappa_max: Option<f64>,
    /// Grid point count along κ/ε (default 301).
    #[arg(long = "kappa-steps")]
    kappa_steps: Option<usize>,
    /// Grid minimum of γ₋/ε (default −1.5).
    #[arg(long = "gamma-minus-min")]
    gamma_minus_min: Option<f64>,
    /// Grid maximum of γ₋/ε (default 1.5).
    #[arg(long = "gamma-minus-max")]
    gamma_minus_max: Option<f64>,
    /// Grid point count along γ₋/ε (default 301).
    #[arg(long = "gamma-minus-steps")]
    gamma_minus_steps: Option<usize>,
    /// Fixed γ₊/ε for the whole scan (default 0).
    #[arg(long = "gamma-plus")]
    gamma_plus: Option<f64>,
}

/// Arguments of `locus`.
#[derive(Debug, Args)]
pub struct LocusArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// κ/ε of an optional evaluation point (with --gamma-minus-over-eps,
    /// adds the branch residuals there).
    #[arg(long = "kappa-over-eps")]
    kappa_over_eps: Option<f64>,
    /// γ₋/ε of the optional evaluation point.
    #[arg(long = "gamma-minus-over-eps")]
    gamma_minus_over_eps: Option<f64>,
}

/// Arguments of `classify`.
#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    point: PointArgs,
    /// Eigenvalue clustering radius override, in units of max(1, ‖M‖)
    /// (default 10⁻⁴, sized for the scatter at defective eigenvalues).
    #[arg(long = "cluster-radius")]
    cluster_radius: Option<f64>,
    /// Rank-decision safety factor override (default 10³).
    #[arg(long = "rank-safety")]
    rank_safety: Option<f64>,
}

/// Arguments of `fom`.
#[derive(Debug, Args)]
pub struct FomArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    point: PointArgs,
    /// Moment-space variant: genuine or induced.
    #[arg(long)]
    variant: Option<String>,
    /// Verify the topology's tabulated second-order degeneracy structure at
    /// its locus verification point instead of classifying a given point;
    /// exits 3 when any cluster mismatches.
    #[arg(long = "verify-table")]
    verify_table: bool,
    /// Eigenvalue clustering radius override, in units of max(1, ‖M‖)
    /// (default 2·10⁻³ for moment matrices).
    #[arg(long = "cluster-radius")]
    cluster_radius: Option<f64>,
    /// Rank-decision safety factor override (default 10³).
    #[arg(long = "rank-safety")]
    rank_safety: Option<f64>,
}

/// Arguments of `propagate`.
#[derive(Debug, Args)]
pub struct PropagateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    point: PointArgs,
    /// Evolution time t of U(t) = exp(−iMt).
    #[arg(long)]
    t: Option<f64>,
}

/// Parsed flat key-value config file.
#[derive(Debug, Default)]
struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)?;
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidInput(format!(
                    "config line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self(map))
    }

    /// Flag value if given, else the parsed config entry, else None.
    fn merge<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::InvalidInput(format!("config key '{key}': {e}"))),
        }
    }
}

fn require<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidInput(format!("missing required option --{name}")))
}

/// Resolved point input: system parameters plus a warning slot.
fn resolve_params(topology: Topology, point: &PointArgs, cfg: &ConfigMap) -> Result<SystemParams> {
    let epsilon = cfg.merge(point.epsilon, "epsilon")?.unwrap_or(1.0);
    let kappa = cfg.merge(point.kappa, "kappa")?;
    let gammas = cfg.merge(point.gammas.clone(), "gammas")?;
    let kov = cfg.merge(point.kappa_over_eps, "kappa-over-eps")?;
    let gmov = cfg.merge(point.gamma_minus_over_eps, "gamma-minus-over-eps")?;
    let gpov = cfg
        .merge(point.gamma_plus_over_eps, "gamma-plus-over-eps")?
        .unwrap_or(0.0);

    let explicit = gammas.is_some();
    let plane = kov.is_some() || gmov.is_some();
    if explicit == plane {
        return Err(Error::InvalidInput(
            "give exactly one of --gammas (with --kappa) or a plane point \
             (--kappa-over-eps with --gamma-minus-over-eps)"
                .into(),
        ));
    }
    if explicit {
        let kappa = require(kappa, "kappa")?;
        let gammas: Vec<f64> = gammas
            .unwrap()
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("bad gamma '{s}': {e}")))
            })
            .collect::<Result<_>>()?;
        SystemParams::new(topology, epsilon, kappa, gammas)
    } else {
        let p = PlanePoint::new(
            require(kov, "kappa-over-eps")?,
            require(gmov, "gamma-minus-over-eps")?,
        )
        .with_gamma_plus(gpov);
        params_from_plane(topology, epsilon, p)
    }
}

fn resolve_common(common: &CommonArgs, cfg: &ConfigMap) -> Result<(Topology, OutputFormat)> {
    let topology: Topology = require(cfg.merge(common.topology.clone(), "topology")?, "topology")?
        .parse()?;
    let format = cfg
        .merge(
            common
                .format
                .as_deref()
                .map(|s| s.parse::<OutputFormat>())
                .transpose()?,
            "format",
        )?
        .unwrap_or(OutputFormat::Json);
    Ok((topology, format))
}

/// Prints 17 significant digits, the fixed float formatting of all output.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_c(z: C) -> [String; 2] {
    [fmt_f(z.re), fmt_f(z.im)]
}

fn emit(common: &CommonArgs, text: &str) -> Result<()> {
    match &common.output {
        Some(path) => std::fs::write(path, text)?,
        // CSV bodies already end in a newline; avoid printing a blank line.
        None if text.ends_with('\n') => print!("{text}"),
        None => println!("{text}"),
    }
    Ok(())
}

fn json_meta(topology: Topology, params: Option<&SystemParams>) -> serde_json::Value {
    match params {
        Some(p) => json!({
            "topology": topology.label(),
            "epsilon": fmt_f(p.epsilon),
            "kappa": fmt_f(p.kappa),
            "gammas": p.gammas.iter().map(|g| fmt_f(*g)).collect::<Vec<_>>(),
        }),
        None => json!({ "topology": topology.label() }),
    }
}

#[derive(Serialize)]
struct ClusterOut {
    eigenvalue: [String; 2],
    algebraic: usize,
    geometric: usize,
    blocks: Vec<usize>,
    class: String,
    exceptional_order: usize,
    diabolical_order: usize,
}

impl From<&DegeneracyCluster> for ClusterOut {
    fn from(cl: &DegeneracyCluster) -> Self {
        Self {
            eigenvalue: fmt_c(cl.eigenvalue),
            algebraic: cl.algebraic,
            geometric: cl.geometric,
            blocks: cl.blocks.clone(),
            class: serde_json::to_value(cl.class)
                .expect("enum serializes")
                .as_str()
                .expect("string variant")
                .to_string(),
            exceptional_order: cl.exceptional_order,
            diabolical_order: cl.diabolical_order,
        }
    }
}

fn clusters_csv(clusters: &[DegeneracyCluster]) -> String {
    let mut out = String::from(
        "eigenvalue_re,eigenvalue_im,algebraic,geometric,blocks,class,\
         exceptional_order,diabolical_order\n",
    );
    for cl in clusters {
        let o = ClusterOut::from(cl);
        let blocks = o
            .blocks
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join("|");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            o.eigenvalue[0],
            o.eigenvalue[1],
            o.algebraic,
            o.geometric,
            blocks,
            o.class,
            o.exceptional_order,
            o.diabolical_order
        );
    }
    out
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<i32> {
    let cfg = ConfigMap::load(args.common.config.as_ref())?;
    let (topology, format) = resolve_common(&args.common, &cfg)?;
    let params = resolve_params(topology, &args.point, &cfg)?;

    let m = build_full_matrix(&params)?;
    let mut numeric: Vec<C> = eig(&m.entries)?.into_iter().map(|(l, _)| l).collect();
    numeric.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());

    // The closed-form branch needs ζ ≠ 0; at ζ = 0 report the numeric
    // spectrum alone with a warning.
    let (analytic, warning) = match assemble_full_spectrum(&params) {
        Ok(pairs) => (Some(pairs.iter().map(|p| p.value).collect::<Vec<C>>()), None),
        Err(Error::DefectiveXi(msg)) => (
            None,
            Some(format!("defective xi block, numeric spectrum only: {msg}")),
        ),
        Err(e) => return Err(e),
    };
    let match_error = match &analytic {
        Some(a) => Some(match_spectra(a, &numeric)?.1),
        None => None,
    };
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }

    // Emit in a fixed order: analytic index order when available, else the
    // sorted numeric order.
    let (rows, aligned_numeric): (Vec<Option<C>>, Vec<C>) = match &analytic {
        Some(a) => {
            let (perm, _) = match_spectra(a, &numeric)?;
            (
                a.iter().copied().map(Some).collect(),
                perm.iter().map(|&j| numeric[j]).collect(),
            )
        }
        None => (vec![None; numeric.len()], numeric.clone()),
    };

    let text = match format {
        OutputFormat::Json => {
            let mut meta = json_meta(topology, Some(&params));
            if let Some(w) = &warning {
                meta["warning"] = json!(w);
            }
            if let Some(e) = match_error {
                meta["match_error"] = json!(fmt_f(e));
            }
            let rows: Vec<_> = rows
                .iter()
                .zip(&aligned_numeric)
                .enumerate()
                .map(|(i, (a, n))| {
                    json!({
                        "index": i + 1,
                        "analytic": a.map(fmt_c),
                        "numeric": fmt_c(*n),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&json!({ "meta": meta, "rows": rows }))?
        }
        OutputFormat::Csv => {
            let mut out =
                String::from("index,analytic_re,analytic_im,numeric_re,numeric_im,match_error\n");
            let err = match_error.map(fmt_f).unwrap_or_default();
            for (i, (a, n)) in rows.iter().zip(&aligned_numeric).enumerate() {
                let [are, aim] = a.map(fmt_c).unwrap_or_default();
                let [nre, nim] = fmt_c(*n);
                let _ = writeln!(out, "{},{are},{aim},{nre},{nim},{err}", i + 1);
            }
            out
        }
    };
    emit(&args.common, &text)?;
    Ok(0)
}

fn cmd_scan(args: &ScanArgs) -> Result<i32> {
    let cfg = ConfigMap::load(args.common.config.as_ref())?;
    let (topology, format) = resolve_common(&args.common, &cfg)?;
    let epsilon = cfg.merge(args.epsilon, "epsilon")?.unwrap_or(1.0);
    let d = ScanGrid::default_plane();
    let grid = ScanGrid {
        kappa: (
            cfg.merge(args.kappa_min, "kappa-min")?.unwrap_or(d.kappa.0),
            cfg.merge(args.kappa_max, "kappa-max")?.unwrap_or(d.kappa.1),
            cfg.merge(args.kappa_steps, "kappa-steps")?
                .unwrap_or(d.kappa.2),
        ),
        gamma_minus: (
            cfg.merge(args.gamma_minus_min, "gamma-minus-min")?
                .unwrap_or(d.gamma_minus.0),
            cfg.merge(args.gamma_minus_max, "gamma-minus-max")?
                .unwrap_or(d.gamma_minus.1),
            cfg.merge(args.gamma_minus_steps, "gamma-minus-steps")?
                .unwrap_or(d.gamma_minus.2),
        ),
        gamma_plus: cfg
            .merge(args.gamma_plus, "gamma-plus")?
            .unwrap_or(d.gamma_plus),
    };

    let table = scan_plane(topology, epsilon, &grid, &TolPolicy::first_order())?;
    let text = match format {
        OutputFormat::Json => {
            let rows: Vec<_> = table
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "kappa_over_eps": fmt_f(r.kappa_over_eps),
                        "gamma_minus_over_eps": fmt_f(r.gamma_minus_over_eps),
                        "lambdas": r.lambdas.iter().map(|l| fmt_c(*l)).collect::<Vec<_>>(),
                        "residuals": r.residuals.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>(),
                        "degenerate_flag": r.degenerate_flag,
                    })
                })
                .collect();
            let meta = json!({
                "topology": topology.label(),
                "epsilon": fmt_f(epsilon),
                "grid": table.grid,
                "branches": table.branches.iter().map(|b| b.name()).collect::<Vec<_>>(),
                "n_lambdas": table.n_lambdas,
            });
            serde_json::to_string_pretty(&json!({ "meta": meta, "rows": rows }))?
        }
        OutputFormat::Csv => table.to_csv(),
    };
    emit(&args.common, &text)?;
    Ok(0)
}

fn cmd_locus(args: &LocusArgs) -> Result<i32> {
    let cfg = ConfigMap::load(args.common.config.as_ref())?;
    let (topology, format) = resolve_common(&args.common, &cfg)?;
    let kov = cfg.merge(args.kappa_over_eps, "kappa-over-eps")?;
    let gmov = cfg.merge(args.gamma_minus_over_eps, "gamma-minus-over-eps")?;

    let loci = hp_locus(topology);
    let residuals = match (kov, gmov) {
        (Some(k), Some(g)) => Some(locus_residual(topology, PlanePoint::new(k, g))?),
        (None, None) => None,
        _ => {
            return Err(Error::InvalidInput(
                "--kappa-over-eps and --gamma-minus-over-eps must be given together".into(),
            ))
        }
    };

    let text = match format {
        OutputFormat::Json => {
            let branches: Vec<_> = loci
                .iter()
                .map(|l| {
                    json!({
                        "branch": l.branch.name(),
                        "c": fmt_f(l.c),
                        "expected": l.expected,
                    })
                })
                .collect();
            let mut doc = json!({
                "meta": json_meta(topology, None),
                "branches": branches,
            });
            if let Some(res) = &residuals {
                doc["residuals"] = json!(res
                    .iter()
                    .map(|(b, z)| (b.name(), fmt_c(*z)))
                    .collect::<BTreeMap<_, _>>());
            }
            serde_json::to_string_pretty(&doc)?
        }
        OutputFormat::Csv => {
            let mut out = String::from("branch,c,residual_re,residual_im\n");
            for l in &loci {
                let [re, im] = residuals
                    .as_ref()
                    .and_then(|r| r.get(&l.branch))
                    .map(|z| fmt_c(*z))
                    .unwrap_or_default();
                let _ = writeln!(out, "{},{},{re},{im}", l.branch.name(), fmt_f(l.c));
            }
            out
        }
    };
    emit(&args.common, &text)?;
    Ok(0)
}

fn policy_with(
    base: TolPolicy,
    cluster_radius: Option<f64>,
    rank_safety: Option<f64>,
) -> TolPolicy {
    TolPolicy {
        cluster_radius: cluster_radius.unwrap_or(base.cluster_radius),
        rank_safety: rank_safety.unwrap_or(base.rank_safety),
    }
}

fn emit_clusters(
    common: &CommonArgs,
    format: OutputFormat,
    topology: Topology,
    params: &SystemParams,
    clusters: &[DegeneracyCluster],
) -> Result<()> {
    let text = match format {
        OutputFormat::Json => {
            let out: Vec<ClusterOut> = clusters.iter().map(ClusterOut::from).collect();
            serde_json::to_string_pretty(&json!({
                "meta": json_meta(topology, Some(params)),
                "clusters": out,
            }))?
        }
        OutputFormat::Csv => clusters_csv(clusters),
    };
    emit(common, &text)
}

fn cmd_classify(args: &ClassifyArgs) -> Result<i32> {
    let cfg = ConfigMap::load(args.common.config.as_ref())?;
    let (topology, format) = resolve_common(&args.common, &cfg)?;
    let params = resolve_params(topology, &args.point, &cfg)?;
    let policy = policy_with(
        TolPolicy::first_order(),
        cfg.merge(args.cluster_radius, "cluster-radius")?,
        cfg.merge(args.rank_safety, "rank-safety")?,
    );
    let clusters = classify_point(&params, &policy)?;
    emit_clusters(&args.common, format, topology, &params, &clusters)?;
    Ok(0)
}

fn cmd_fom(args: &FomArgs) -> Result<i32> {
    let cfg = ConfigMap::load(args.common.config.as_ref())?;
    let (topology, format) = resolve_common(&args.common, &cfg)?;
    let variant: MomentVariant = require(
        cfg.merge(
            args.variant.as_deref().map(str::parse).transpose()?,
            "variant",
        )?,
        "variant",
    )?;
    let policy = policy_with(
        TolPolicy::moment(),
        cfg.merge(args.cluster_radius, "cluster-radius")?,
        cfg.merge(args.rank_safety, "rank-safety")?,
    );

    let verify = args.verify_table
        || cfg
            .merge::<bool>(None, "verify-table")?
            .unwrap_or(false);
    if verify {
        let report = verify_table(topology, variant, &policy)?;
        let text = match format {
            OutputFormat::Json => serde_json::to_string_pretty(&report)?,
            OutputFormat::Csv => {
                let mut out = String::from(
                    "gamma_plus,eigenvalue_re,eigenvalue_im,expected_dd,expected_blocks,\
                     observed_dd,observed_blocks,match\n",
                );
                for run in &report.runs {
                    for cl in &run.clusters {
                        let shape = |s: &Option<crate::fom::ClusterShape>| match s {
                            Some(s) => (
                                s.dd.to_string(),
                                s.blocks
                                    .iter()
                                    .map(|b| b.to_string())
                                    .collect::<Vec<_>>()
                                    .join("|"),
                            ),
                            None => (String::new(), String::new()),
                        };
                        let (edd, ebl) = shape(&cl.expected);
                        let (odd, obl) = shape(&cl.observed);
                        let _ = writeln!(
                            out,
                            "{},{},{},{edd},{ebl},{odd},{obl},{}",
                            fmt_f(run.gamma_plus),
                            fmt_f(cl.eigenvalue[0]),
                            fmt_f(cl.eigenvalue[1]),
                            cl.matches
                        );
                    }
                }
                out
            }
        };
        emit(&args.common, &text)?;
        return Ok(if report.all_match { 0 } else { 3 });
    }

    let params = resolve_params(topology, &args.point, &cfg)?;
    let clusters = fom2_classify(&params, variant, &policy)?;
    emit_clusters(&args.common, format, topology, &params, &clusters)?;
    Ok(0)
}

fn cmd_propagate(args: &PropagateArgs) -> Result<i32> {
    let cfg = ConfigMap::load(args.common.config.as_ref())?;
    let (topology, format) = resolve_common(&args.common, &cfg)?;
    let params = resolve_params(topology, &args.point, &cfg)?;
    let t = require(cfg.merge(args.t, "t")?, "t")?;

    let m = build_full_matrix(&params)?;
    let u = propagate(&m.entries, t);

    let text = match format {
        OutputFormat::Json => {
            let rows: Vec<_> = (0..u.nrows())
                .flat_map(|i| (0..u.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| {
                    json!({
                        "i": i,
                        "j": j,
                        "re": fmt_f(u[(i, j)].re),
                        "im": fmt_f(u[(i, j)].im),
                    })
                })
                .collect();
            let mut meta = json_meta(topology, Some(&params));
            meta["t"] = json!(fmt_f(t));
            meta["dim"] = json!(u.nrows());
            serde_json::to_string_pretty(&json!({ "meta": meta, "rows": rows }))?
        }
        OutputFormat::Csv => {
            let mut out = String::from("i,j,re,im\n");
            for i in 0..u.nrows() {
                for j in 0..u.ncols() {
                    let _ = writeln!(
                        out,
                        "{i},{j},{},{}",
                        fmt_f(u[(i, j)].re),
                        fmt_f(u[(i, j)].im)
                    );
                }
            }
            out
        }
    };
    emit(&args.common, &text)?;
    Ok(0)
}

fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::ConstraintViolation(_) | Error::InvalidInput(_) | Error::LengthMismatch { .. } => 2,
        _ => 1,
    }
}

/// Parses the process arguments, runs the selected subcommand, and returns
/// the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Locus(a) => cmd_locus(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Fom(a) => cmd_fom(a),
        Command::Propagate(a) => cmd_propagate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    }
}
