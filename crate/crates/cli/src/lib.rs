//! Library side of the `wits` command-line tool.
//!
//! [`run`] parses an argument list, executes the subcommand and writes the
//! payload to `stdout` (or to `--out`), returning the process exit status:
//!
//! | status | meaning |
//! |---|---|
//! | 0 | success |
//! | 1 | Monte-Carlo verification found a disagreement, or an I/O failure |
//! | 2 | usage error or out-of-domain argument |
//! | 3 | infeasible configuration or no feasible point |
//! | 4 | numerical convergence failure |

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use witsenhausen::baselines::{lindpc_cost, lindpc_zero_cost_power, DpcConfig};
use witsenhausen::gaussian::sg_cost;
use witsenhausen::montecarlo::McConfig;
use witsenhausen::strategies::{kpoint_costs, linear_cost, quantizer_entropy_bits, tradeoff_optimize, twopoint_costs};
use witsenhausen::zec::{zecf_min_power, zeck_min_power};
use witsenhausen::{OptimizerConfig, QuadConfig, QuantizerSpec, SystemParams, TradeoffWeight};

pub mod output;
pub mod verify;

use output::{render_csv, render_json, Format, Payload, Record, RunManifest};
use verify::{run_suite, Suite};

#[derive(Debug, Parser)]
#[command(name = "wits", version, about = "Power/estimation cost trade-offs for the Witsenhausen counterexample")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format; JSON for single evaluations, CSV for sweeps, curves and tables by default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the payload to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit the run manifest.
    #[arg(long, global = true)]
    no_manifest: bool,
    /// Seed for the optimizer's start perturbations and for Monte-Carlo streams.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one strategy at one operating point.
    #[command(subcommand)]
    Eval(Eval),
    /// Minimum-power optimization at one noise level.
    #[command(subcommand)]
    Opt(Opt),
    /// Minimum-power optimization over a range of noise levels.
    #[command(subcommand)]
    Sweep(Sweep),
    /// Trade-off curves.
    #[command(subcommand)]
    Curve(Curve),
    /// Tables of optimized parameters.
    #[command(subcommand)]
    Table(Table),
    /// Monte-Carlo cross-checks.
    #[command(subcommand)]
    Mc(Mc),
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a positive finite number, got {s}"))
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a nonnegative finite number, got {s}"))
    }
}

#[derive(Debug, Args)]
struct SysArgs {
    /// Source variance.
    #[arg(long = "Q", default_value = "1", value_parser = positive, allow_hyphen_values = true)]
    q: f64,
    /// Channel noise variance.
    #[arg(long = "N", value_parser = positive, allow_hyphen_values = true)]
    n: f64,
}

impl SysArgs {
    fn sys(&self) -> witsenhausen::Result<SystemParams> {
        SystemParams::new(self.q, self.n)
    }
}

#[derive(Debug, Args)]
struct QArg {
    /// Source variance.
    #[arg(long = "Q", default_value = "1", value_parser = positive, allow_hyphen_values = true)]
    q: f64,
}

#[derive(Debug, Args)]
struct NRange {
    #[arg(long = "N-from", value_parser = positive, allow_hyphen_values = true)]
    from: f64,
    #[arg(long = "N-to", value_parser = positive, allow_hyphen_values = true)]
    to: f64,
    #[arg(long, default_value_t = 8)]
    steps: usize,
}

#[derive(Debug, Args)]
struct OptArgs {
    /// Grid points per search dimension.
    #[arg(long, default_value_t = OptimizerConfig::default().grid_points_per_dim)]
    grid: usize,
    /// Number of grid points refined by the simplex search.
    #[arg(long, default_value_t = OptimizerConfig::default().top_starts)]
    starts: usize,
}

impl OptArgs {
    fn config(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig { grid_points_per_dim: self.grid, top_starts: self.starts, seed, ..OptimizerConfig::default() }
    }
}

#[derive(Debug, Subcommand)]
enum Eval {
    Linear {
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long = "P", value_parser = nonnegative, allow_hyphen_values = true)]
        p: f64,
    },
    Twopoint {
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long, value_parser = nonnegative, allow_hyphen_values = true)]
        a: f64,
    },
    Kpoint {
        #[command(flatten)]
        sys: SysArgs,
        /// Number of quantizer levels
        #[arg(long)]
        k: usize,
        /// Nonnegative levels a₁ ≤ … ≤ a_m (a₁ = 0 for odd k), comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<f64>,
        /// Boundaries 0 = B₁ ≤ … ≤ B_m, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        boundaries: Vec<f64>,
    },
    Sg {
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long = "P", value_parser = nonnegative, allow_hyphen_values = true)]
        p: f64,
    },
    Lindpc {
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long = "P", value_parser = nonnegative, allow_hyphen_values = true)]
        p: f64,
    },
}

#[derive(Debug, Subcommand)]
enum Opt {
    Zec {
        #[command(flatten)]
        sys: SysArgs,
        /// Number of quantizer levels
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        opt: OptArgs,
    },
    Zecf {
        #[command(flatten)]
        sys: SysArgs,
        #[command(flatten)]
        opt: OptArgs,
    },
    LindpcRoot {
        #[command(flatten)]
        sys: SysArgs,
    },
}

#[derive(Debug, Subcommand)]
enum Sweep {
    Zec {
        #[command(flatten)]
        q: QArg,
        /// Number of quantizer levels
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        range: NRange,
        #[command(flatten)]
        opt: OptArgs,
    },
    Zecf {
        #[command(flatten)]
        q: QArg,
        #[command(flatten)]
        range: NRange,
        #[command(flatten)]
        opt: OptArgs,
    },
    LindpcRoot {
        #[command(flatten)]
        q: QArg,
        #[command(flatten)]
        range: NRange,
    },
}

#[derive(Debug, Subcommand)]
enum Curve {
    /// Minimizers of ω·P + (1−ω)·S for ω on a uniform grid over [0, 1].
    Kpoint {
        #[command(flatten)]
        sys: SysArgs,
        /// Number of quantizer levels
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 21)]
        omega_steps: usize,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Jointly Gaussian cost on a uniform power grid over [0, Q].
    Sg {
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
    /// Linear + DPC cost on a uniform power grid over [0, Q].
    Lindpc {
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
}

#[derive(Debug, Subcommand)]
enum Table {
    /// Optimized ZEC-2, ZEC-3, ZEC-4 and ZEC-f parameters per noise level.
    ZecPar {
        #[command(flatten)]
        q: QArg,
        #[arg(long = "N-from", value_parser = positive, allow_hyphen_values = true, default_value = "0.1")]
        from: f64,
        #[arg(long = "N-to", value_parser = positive, allow_hyphen_values = true, default_value = "0.8")]
        to: f64,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[command(flatten)]
        opt: OptArgs,
    },
}

#[derive(Debug, Subcommand)]
enum Mc {
    /// Compare closed forms with simulation on random configurations.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 20)]
        configs: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 16)]
        streams: usize,
    },
}

enum Failure {
    Usage(String),
    Lib(witsenhausen::Error),
    Io(String),
    Verification(usize),
}

impl From<witsenhausen::Error> for Failure {
    fn from(e: witsenhausen::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn status(&self) -> i32 {
        use witsenhausen::Error as E;
        match self {
            Failure::Usage(_) | Failure::Lib(E::Domain(_)) => 2,
            Failure::Lib(E::Infeasible(_) | E::NoFeasiblePoint { .. }) => 3,
            Failure::Lib(E::Convergence { .. }) => 4,
            Failure::Io(_) | Failure::Verification(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Io(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
            Failure::Verification(n) => {
                format!("{n} comparison(s) disagree beyond {} standard errors", verify::Z_LIMIT)
            }
        }
    }
}

/// Output of a subcommand before rendering.
struct Produced {
    payload: Payload,
    default_format: Format,
    /// Set when the payload is valid but the run should still fail.
    failure: Option<Failure>,
}

fn single(r: Record) -> Produced {
    Produced { payload: Payload::Single(r), default_format: Format::Json, failure: None }
}

fn rows(rs: Vec<Record>) -> Produced {
    Produced { payload: Payload::Rows(rs), default_format: Format::Csv, failure: None }
}

fn grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, Failure> {
    if steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    if from > to {
        return Err(Failure::Usage(format!("empty range: {from} > {to}")));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    let mut xs: Vec<f64> = (0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect();
    xs[steps - 1] = to;
    Ok(xs)
}

fn sys_fields(r: Record, sys: &SystemParams) -> Record {
    r.with("Q", sys.q).with("N", sys.n)
}

fn zeck_record(k: usize, sys: &SystemParams, opt: &OptimizerConfig, quad: &QuadConfig) -> Result<Record, Failure> {
    let r = zeck_min_power(k, sys, opt, quad)?;
    let q = &r.scheme.quantizer;
    Ok(Record::new()
        .with("scheme", format!("zec-{k}"))
        .with("Q", sys.q)
        .with("N", sys.n)
        .with("P_star", r.power)
        .with("V1", r.scheme.v1)
        .with("levels", q.levels())
        .with("boundaries", q.boundaries())
        .with("entropy_bits", quantizer_entropy_bits(q, sys.q))
        .with("gap", r.gap)
        .with("evaluations", r.evaluations))
}

fn zecf_record(sys: &SystemParams, opt: &OptimizerConfig, quad: &QuadConfig) -> Result<Record, Failure> {
    let r = zecf_min_power(sys, opt, quad)?;
    Ok(Record::new()
        .with("scheme", "zec-f")
        .with("Q", sys.q)
        .with("N", sys.n)
        .with("P_star", r.power)
        .with("V1", r.scheme.v1)
        .with("a", r.scheme.a)
        .with("b", r.scheme.b)
        .with("gap", r.gap)
        .with("evaluations", r.evaluations))
}

fn lindpc_root_record(sys: &SystemParams) -> Record {
    Record::new()
        .with("scheme", "lin-dpc")
        .with("Q", sys.q)
        .with("N", sys.n)
        .with("P_star", lindpc_zero_cost_power(sys))
}

fn execute(cli: &Cli) -> Result<Produced, Failure> {
    let quad = QuadConfig::default();
    let seed = cli.seed;
    match &cli.command {
        Command::Eval(e) => {
            let record = match e {
                Eval::Linear { sys, p } => {
                    let s = sys.sys()?;
                    Record::new().with("P", *p).with("S", linear_cost(*p, &s)?).with("scheme", "linear")
                }
                Eval::Twopoint { sys, a } => {
                    let c = twopoint_costs(*a, &sys.sys()?, &quad)?;
                    Record::new().with("P", c.p).with("S", c.s).with("scheme", "two-point").with("a", *a)
                }
                Eval::Kpoint { sys, k, levels, boundaries } => {
                    let s = sys.sys()?;
                    let spec = QuantizerSpec::new(*k, levels.clone(), boundaries.clone())?;
                    let c = kpoint_costs(&spec, &s, &quad)?;
                    Record::new()
                        .with("P", c.p)
                        .with("S", c.s)
                        .with("scheme", format!("{k}-point"))
                        .with("entropy_bits", quantizer_entropy_bits(&spec, s.q))
                }
                Eval::Sg { sys, p } => {
                    Record::new().with("P", *p).with("S", sg_cost(*p, &sys.sys()?)?).with("scheme", "joint-gaussian")
                }
                Eval::Lindpc { sys, p } => Record::new()
                    .with("P", *p)
                    .with("S", lindpc_cost(*p, &sys.sys()?, &DpcConfig::default())?)
                    .with("scheme", "lin-dpc"),
            };
            let sys = match e {
                Eval::Linear { sys, .. }
                | Eval::Twopoint { sys, .. }
                | Eval::Kpoint { sys, .. }
                | Eval::Sg { sys, .. }
                | Eval::Lindpc { sys, .. } => sys.sys()?,
            };
            Ok(single(sys_fields(record, &sys)))
        }
        Command::Opt(o) => Ok(single(match o {
            Opt::Zec { sys, k, opt } => zeck_record(*k, &sys.sys()?, &opt.config(seed), &quad)?,
            Opt::Zecf { sys, opt } => zecf_record(&sys.sys()?, &opt.config(seed), &quad)?,
            Opt::LindpcRoot { sys } => lindpc_root_record(&sys.sys()?),
        })),
        Command::Sweep(s) => {
            let (q, range) = match s {
                Sweep::Zec { q, range, .. } | Sweep::Zecf { q, range, .. } | Sweep::LindpcRoot { q, range } => {
                    (q, range)
                }
            };
            let mut out = Vec::new();
            for n in grid(range.from, range.to, range.steps)? {
                let sys = SystemParams::new(q.q, n)?;
                out.push(match s {
                    Sweep::Zec { k, opt, .. } => zeck_record(*k, &sys, &opt.config(seed), &quad)?,
                    Sweep::Zecf { opt, .. } => zecf_record(&sys, &opt.config(seed), &quad)?,
                    Sweep::LindpcRoot { .. } => lindpc_root_record(&sys),
                });
            }
            Ok(rows(out))
        }
        Command::Curve(c) => {
            let mut out = Vec::new();
            match c {
                Curve::Kpoint { sys, k, omega_steps, opt } => {
                    let s = sys.sys()?;
                    for omega in grid(0.0, 1.0, *omega_steps)? {
                        let (spec, cost) =
                            tradeoff_optimize(*k, TradeoffWeight::new(omega)?, &s, &opt.config(seed), &quad)?;
                        out.push(
                            Record::new()
                                .with("omega", omega)
                                .with("P", cost.p)
                                .with("S", cost.s)
                                .with("levels", spec.levels())
                                .with("boundaries", spec.boundaries()),
                        );
                    }
                }
                Curve::Sg { sys, steps } | Curve::Lindpc { sys, steps } => {
                    let s = sys.sys()?;
                    for p in grid(0.0, s.q, *steps)? {
                        let cost = match c {
                            Curve::Sg { .. } => sg_cost(p, &s)?,
                            _ => lindpc_cost(p, &s, &DpcConfig::default())?,
                        };
                        out.push(Record::new().with("P", p).with("S", cost));
                    }
                }
            }
            Ok(rows(out))
        }
        Command::Table(Table::ZecPar { q, from, to, steps, opt }) => {
            let cfg = opt.config(seed);
            let mut out = Vec::new();
            for n in grid(*from, *to, *steps)? {
                let sys = SystemParams::new(q.q, n)?;
                let z2 = zeck_min_power(2, &sys, &cfg, &quad)?;
                let z3 = zeck_min_power(3, &sys, &cfg, &quad)?;
                let z4 = zeck_min_power(4, &sys, &cfg, &quad)?;
                let zf = zecf_min_power(&sys, &cfg, &quad)?;
                let (q3, q4) = (&z3.scheme.quantizer, &z4.scheme.quantizer);
                out.push(
                    Record::new()
                        .with("N", n)
                        .with("P_zec2", z2.power)
                        .with("V1_zec2", z2.scheme.v1)
                        .with("a_zec2", z2.scheme.quantizer.levels()[0])
                        .with("P_zec3", z3.power)
                        .with("V1_zec3", z3.scheme.v1)
                        .with("a2_zec3", q3.levels()[1])
                        .with("B2_zec3", q3.boundaries()[1])
                        .with("P_zec4", z4.power)
                        .with("V1_zec4", z4.scheme.v1)
                        .with("a1_zec4", q4.levels()[0])
                        .with("a2_zec4", q4.levels()[1])
                        .with("B2_zec4", q4.boundaries()[1])
                        .with("P_zecf", zf.power)
                        .with("a_zecf", zf.scheme.a)
                        .with("b_zecf", zf.scheme.b),
                );
            }
            Ok(rows(out))
        }
        Command::Mc(Mc::Verify { suite, configs, samples, streams }) => {
            let mc = McConfig { samples: *samples, seed, streams: *streams };
            mc.validate()?;
            let checks = run_suite(*suite, *configs, &mc, &quad, seed)?;
            let misses = checks.iter().filter(|c| !c.passes()).count();
            let mut produced = rows(checks.iter().map(|c| c.record(*suite)).collect());
            if misses > 0 {
                produced.failure = Some(Failure::Verification(misses));
            }
            Ok(produced)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("WITS_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("WITS_THREADS must be a positive integer, got {v:?}")))?;
    // A pool may already exist when `run` is called repeatedly in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

/// Runs the tool on `argv` (without the program name) and returns the exit
/// status. The payload goes to `stdout` unless `--out` is given.
pub fn run(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(std::iter::once("wits".to_owned()).chain(argv.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if status == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return status;
        }
    };
    match run_parsed(&cli, argv, stdout, stderr) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.status()
        }
    }
}

fn run_parsed(cli: &Cli, argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    configure_threads()?;
    let produced = execute(cli)?;
    let manifest = (!cli.no_manifest).then(|| RunManifest::from_argv(argv, cli.seed));
    let format = cli.format.unwrap_or(produced.default_format);
    let text = match format {
        Format::Json => render_json(&produced.payload, manifest.as_ref()),
        Format::Csv => render_csv(&produced.payload).map_err(|e| Failure::Io(e.to_string()))?,
    };
    // CSV cannot carry the manifest inline: it goes to a sidecar file, or to
    // stderr when the payload is printed.
    let sidecar = match (format, &manifest) {
        (Format::Csv, Some(m)) => Some(serde_json::to_string_pretty(m).expect("manifest serializes") + "\n"),
        _ => None,
    };
    match &cli.out {
        Some(path) => {
            write_file(path, &text)?;
            if let Some(m) = sidecar {
                let mut name = path.clone().into_os_string();
                name.push(".manifest.json");
                write_file(Path::new(&name), &m)?;
            }
        }
        None => {
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))?;
            if let Some(m) = sidecar {
                let _ = stderr.write_all(m.as_bytes());
            }
        }
    }
    match produced.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use witsenhausen::Error;

    #[test]
    fn exit_statuses() {
        assert_eq!(Failure::Usage("x".into()).status(), 2);
        assert_eq!(Failure::Lib(Error::Domain("x".into())).status(), 2);
        assert_eq!(Failure::Lib(Error::Infeasible("x".into())).status(), 3);
        assert_eq!(Failure::Lib(Error::NoFeasiblePoint { best_gap: -1.0 }).status(), 3);
        assert_eq!(Failure::Lib(Error::Convergence { estimate: 0.0 }).status(), 4);
        assert_eq!(Failure::Verification(2).status(), 1);
        assert_eq!(Failure::Io("x".into()).status(), 1);
    }

    #[test]
    fn grids() {
        assert_eq!(grid(0.1, 0.3, 3).ok(), Some(vec![0.1, 0.2, 0.3]));
        assert_eq!(grid(0.5, 0.5, 1).ok(), Some(vec![0.5]));
        assert!(grid(0.5, 0.1, 3).is_err());
        assert!(grid(0.1, 0.5, 0).is_err());
    }

    #[test]
    fn run_in_process() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv: Vec<String> =
            ["eval", "twopoint", "--N", "0.15", "--a", "0", "--no-manifest"].map(String::from).into();
        assert_eq!(run(&argv, &mut out, &mut err), 0);
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["S"], serde_json::json!(0.0));
        assert_eq!(v["P"], serde_json::json!(1.0));
    }
}
