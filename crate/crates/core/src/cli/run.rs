use std::process::ExitCode;

use clap::Parser;
use damped_chain::bounds::{
    deviation_report, estimate_class_tail_constants, estimate_tail_constants, geometric_report,
    singular_report, smallest_contracting_block, BoundReport, TailConstants, Theorem,
};
use damped_chain::io::{ingest, read_damping, read_distribution, IngestError, IngestOptions};
use damped_chain::report::{
    coupling_section, expansion_section, spectrum_section, stationary_grid, stationary_section,
    structure_section, to_json_string,
};
use damped_chain::spectral::{expansion_with_tol, DEFAULT_CLUSTER_TOL};
use damped_chain::structure::{decompose, ChainStructure, Regime};
use damped_chain::triangular::{steps_for_time, triangular_sweep};
use damped_chain::{ChainError, DampingVector, Distribution, StochasticMatrix, DEFAULT_ROW_TOL};
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::plot;
use super::{Cli, Command, Common, InitialSpec, TheoremArg};

/// Largest block length tried when N is chosen automatically.
const MAX_AUTO_BLOCK: usize = 50;
/// Default triangular sweep covers εn up to this time.
const DEFAULT_SWEEP_TIME: f64 = 3.0;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(IngestError),
    Analysis(ChainError),
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Input(_) => 3,
            Self::Analysis(_) => 4,
            Self::Output(_) => 5,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Input(e) => e.kind(),
            Self::Analysis(e) => e.kind(),
            Self::Output(_) => "output",
        }
    }

    fn message(&self) -> String {
        match self {
            Self::Usage(m) | Self::Output(m) => m.clone(),
            Self::Input(e) => e.to_string(),
            Self::Analysis(e) => e.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        json!({"error": {"kind": self.kind(), "message": self.message(), "exit_code": self.exit_code()}})
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        Self::Input(e)
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        Self::Analysis(e)
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| execute(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            println!(
                "{}",
                serde_json::to_string(&e.to_json()).expect("error JSON")
            );
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("DAMPED_CHAIN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "DAMPED_CHAIN_THREADS=`{raw}` is not a positive integer"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

struct Context {
    common: Common,
    p0: StochasticMatrix,
    d: DampingVector,
    structure: ChainStructure,
    inputs: Map<String, Value>,
}

fn load(common: Common) -> CliResult<Context> {
    if !(common.tol > 0.0 && common.tol < 1.0) {
        return Err(CliError::Usage(format!(
            "--tol {} must lie in (0, 1)",
            common.tol
        )));
    }
    let options = IngestOptions {
        format: common.format,
        dangling: common.dangling_policy,
        row_tol: DEFAULT_ROW_TOL,
    };
    let input = ingest(&common.input, &options)?;
    let m = input.node_count;
    let (d, source) = match common.damping.as_deref() {
        None => match &input.damping {
            Some(d) => (d.clone(), "input".to_string()),
            None => (DampingVector::uniform(m), "uniform".to_string()),
        },
        Some("uniform") => (DampingVector::uniform(m), "uniform".to_string()),
        Some(path) => (
            read_damping(path.as_ref(), m, DEFAULT_ROW_TOL)?,
            format!("file:{path}"),
        ),
    };
    let structure = decompose(&input.matrix);
    let inputs = json!({
        "input": common.input.display().to_string(),
        "format": input.format.as_str(),
        "node_count": m,
        "dangling_policy": common.dangling_policy.as_str(),
        "damping": {"source": source, "weights": d.weights()},
        "tol": common.tol,
    });
    let Value::Object(inputs) = inputs else {
        unreachable!()
    };
    Ok(Context {
        common,
        p0: input.matrix,
        d,
        structure,
        inputs,
    })
}

impl Context {
    fn dim(&self) -> usize {
        self.p0.dim()
    }

    fn initial(&self, spec: &InitialSpec) -> CliResult<Distribution> {
        let m = self.dim();
        Ok(match spec {
            InitialSpec::Uniform => Distribution::uniform(m),
            InitialSpec::Damping => self.d.to_distribution(),
            InitialSpec::Point(k) => {
                if *k > m {
                    return Err(CliError::Usage(format!("state {k} exceeds the {m} states")));
                }
                Distribution::point_mass(m, k - 1)?
            }
            InitialSpec::File(path) => read_distribution(path, m, DEFAULT_ROW_TOL)?,
        })
    }

    /// The given N, or the smallest N ≤ 50 with Δ_N < 1.
    fn block(&self, given: Option<usize>) -> CliResult<usize> {
        if let Some(n) = given {
            if n == 0 {
                return Err(CliError::Usage("--coupling-N must be at least 1".into()));
            }
            return Ok(n);
        }
        smallest_contracting_block(&self.p0, &self.structure, MAX_AUTO_BLOCK)?.ok_or_else(|| {
            CliError::Analysis(ChainError::InvalidArgument(format!(
                "no N ≤ {MAX_AUTO_BLOCK} has Delta_N < 1"
            )))
        })
    }

    fn emit<T: Serialize>(
        &self,
        command: &str,
        extra: Value,
        result: &T,
        table: Option<plot::Table>,
    ) -> CliResult<()> {
        let mut inputs = self.inputs.clone();
        if let Value::Object(extra) = extra {
            inputs.extend(extra);
        }
        let envelope = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": inputs,
            "result": serde_json::to_value(result).map_err(|e| CliError::Output(e.to_string()))?,
        });
        let text = to_json_string(&envelope);
        match &self.common.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?,
            None => print!("{text}"),
        }
        if let Some(path) = &self.common.plot_data {
            let table =
                table.ok_or_else(|| CliError::Usage(format!("{command} has no plot data")))?;
            table
                .write(path)
                .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn check_epsilon(epsilon: f64, allow_zero: bool) -> CliResult<()> {
    let ok = if allow_zero {
        (0.0..=1.0).contains(&epsilon)
    } else {
        epsilon > 0.0 && epsilon <= 1.0
    };
    if ok {
        Ok(())
    } else {
        Err(ChainError::InvalidEpsilon(epsilon).into())
    }
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Structure { common, horizon } => {
            let ctx = load(common)?;
            let sec = structure_section(&ctx.p0, &ctx.structure, horizon)?;
            let table = plot::ergodicity(&sec.ergodicity);
            ctx.emit("structure", json!({"horizon": horizon}), &sec, Some(table))
        }
        Command::Stationary {
            common,
            epsilon,
            epsilon_grid,
            max_iter,
        } => {
            let ctx = load(common)?;
            let grid = epsilon.map_or(epsilon_grid, |e| vec![e]);
            for &e in &grid {
                check_epsilon(e, true)?;
            }
            let sections = stationary_grid(
                &ctx.p0,
                &ctx.d,
                &ctx.structure,
                &grid,
                ctx.common.tol,
                max_iter,
            )?;
            let table = plot::stationary(&sections);
            ctx.emit(
                "stationary",
                json!({"epsilon_grid": grid, "max_iter": max_iter}),
                &json!({"sections": sections}),
                Some(table),
            )
        }
        Command::Expand {
            common,
            order,
            epsilon,
            cluster_tol,
        } => {
            let ctx = load(common)?;
            if let Some(e) = epsilon {
                check_epsilon(e, false)?;
            }
            let series = expansion_with_tol(&ctx.p0, &ctx.d, &ctx.structure, order, cluster_tol)?;
            let spectrum = spectrum_section(&ctx.p0, cluster_tol)?;
            let expansion = expansion_section(&ctx.p0, &ctx.d, &series, epsilon)?;
            let table = plot::expansion(&expansion);
            ctx.emit(
                "expand",
                json!({"order": order, "epsilon": epsilon, "cluster_tol": cluster_tol}),
                &json!({"spectrum": spectrum, "expansion": expansion}),
                Some(table),
            )
        }
        Command::Bounds {
            common,
            epsilon,
            theorem,
            coupling_n,
            horizon,
            initial,
            constant_c,
            lambda,
            scan_horizon,
        } => {
            let ctx = load(common)?;
            check_epsilon(epsilon, false)?;
            let p = ctx.initial(&initial)?;
            let constants = match (constant_c, lambda) {
                (Some(c), Some(l)) => Some(TailConstants::new(c, l)?),
                _ => None,
            };
            let request = BoundsRequest {
                epsilon,
                theorem,
                coupling_n,
                horizon,
                constants,
                scan_horizon,
            };
            let (reports, block) = bounds(&ctx, &p, &request)?;
            let table = plot::bounds(&reports);
            ctx.emit(
                "bounds",
                json!({
                    "epsilon": epsilon,
                    "theorem": theorem.map(|t| t.number()),
                    "coupling_N": coupling_n,
                    "horizon": horizon,
                    "initial": initial.to_string(),
                    "constant_c": constant_c,
                    "lambda": lambda,
                    "scan_horizon": scan_horizon,
                }),
                &json!({"block": block, "reports": reports}),
                Some(table),
            )
        }
        Command::CouplingSim {
            common,
            epsilon,
            seed,
            trials,
            horizon,
            coupling_n,
            initial,
        } => {
            let ctx = load(common)?;
            check_epsilon(epsilon, false)?;
            if trials == 0 {
                return Err(CliError::Usage("--trials must be at least 1".into()));
            }
            let block = ctx.block(Some(coupling_n))?;
            let p = ctx.initial(&initial)?;
            let sec = coupling_section(&ctx.p0, &ctx.d, &p, epsilon, block, trials, seed, horizon)?;
            let table = plot::coupling(&sec);
            ctx.emit(
                "coupling-sim",
                json!({
                    "epsilon": epsilon,
                    "seed": seed,
                    "trials": trials,
                    "horizon": horizon,
                    "coupling_N": coupling_n,
                    "initial": initial.to_string(),
                }),
                &sec,
                Some(table),
            )
        }
        Command::Triangular {
            common,
            epsilon,
            n_grid,
            initial,
            coupling_n,
        } => {
            let ctx = load(common)?;
            check_epsilon(epsilon, false)?;
            let grid = n_grid.map_or_else(|| default_grid(epsilon), |g| g.0);
            let p = ctx.initial(&initial)?;
            let block = match coupling_n {
                Some(n) => Some(ctx.block(Some(n))?),
                None => ctx.block(None).ok(),
            };
            let sweep =
                triangular_sweep(&ctx.p0, &ctx.d, &p, &ctx.structure, epsilon, &grid, block)?;
            let table = plot::triangular(&sweep);
            ctx.emit(
                "triangular",
                json!({
                    "epsilon": epsilon,
                    "n_grid": grid,
                    "initial": initial.to_string(),
                    "coupling_N": coupling_n,
                }),
                &sweep,
                Some(table),
            )
        }
        Command::Report {
            common,
            epsilon,
            order,
            seed,
            trials,
            horizon,
            coupling_n,
            initial,
        } => {
            let ctx = load(common)?;
            check_epsilon(epsilon, false)?;
            let p = ctx.initial(&initial)?;
            let sec = full_report(&ctx, &p, epsilon, order, seed, trials, horizon, coupling_n);
            let table = structure_section(&ctx.p0, &ctx.structure, 12)
                .ok()
                .map(|s| plot::ergodicity(&s.ergodicity));
            ctx.emit(
                "report",
                json!({
                    "epsilon": epsilon,
                    "order": order,
                    "seed": seed,
                    "trials": trials,
                    "horizon": horizon,
                    "coupling_N": coupling_n,
                    "initial": initial.to_string(),
                }),
                &Value::Object(sec),
                table,
            )
        }
    }
}

fn default_grid(epsilon: f64) -> Vec<usize> {
    (0..=steps_for_time(DEFAULT_SWEEP_TIME, epsilon)).collect()
}

struct BoundsRequest {
    epsilon: f64,
    theorem: Option<TheoremArg>,
    coupling_n: Option<usize>,
    horizon: usize,
    constants: Option<TailConstants>,
    scan_horizon: usize,
}

fn bounds(
    ctx: &Context,
    p: &Distribution,
    req: &BoundsRequest,
) -> CliResult<(Vec<BoundReport>, Option<usize>)> {
    let regime = ctx.structure.regime;
    let theorems = match req.theorem {
        Some(t) => vec![t],
        None => match regime {
            Regime::Regular => {
                let mut v = vec![TheoremArg::T1, TheoremArg::T5];
                if ctx.block(req.coupling_n).is_ok_and(|b| b > 1) {
                    v.push(TheoremArg::T6);
                }
                v
            }
            Regime::Singular => vec![TheoremArg::T2, TheoremArg::T5, TheoremArg::T7],
            Regime::Unsupported => vec![TheoremArg::T5],
        },
    };
    let mut block_used = None;
    let mut reports = Vec::new();
    for t in theorems {
        let report = match t {
            TheoremArg::T1 | TheoremArg::T2 => {
                let want = if t == TheoremArg::T1 {
                    Regime::Regular
                } else {
                    Regime::Singular
                };
                if regime != want {
                    return Err(ChainError::RegimeMismatch(format!(
                        "theorem {} needs a {want:?} chain, found {regime:?}",
                        t.number()
                    ))
                    .into());
                }
                let constants = match req.constants {
                    Some(c) => c,
                    None if t == TheoremArg::T1 => {
                        estimate_tail_constants(&ctx.p0, req.scan_horizon)?
                    }
                    None => {
                        estimate_class_tail_constants(&ctx.p0, &ctx.structure, req.scan_horizon)?
                    }
                };
                deviation_report(&ctx.p0, &ctx.d, &ctx.structure, req.epsilon, &constants)?
            }
            TheoremArg::T5 => geometric_report(&ctx.p0, &ctx.d, p, req.epsilon, 1, req.horizon)?,
            TheoremArg::T6 => {
                let block = ctx.block(req.coupling_n)?;
                block_used = Some(block);
                let mut r = geometric_report(&ctx.p0, &ctx.d, p, req.epsilon, block, req.horizon)?;
                r.theorem = Theorem::T6;
                r
            }
            TheoremArg::T7 => {
                let block = ctx.block(req.coupling_n)?;
                block_used = Some(block);
                singular_report(
                    &ctx.p0,
                    &ctx.d,
                    p,
                    &ctx.structure,
                    req.epsilon,
                    block,
                    req.horizon,
                )?
            }
        };
        reports.push(report);
    }
    Ok((reports, block_used))
}

fn section<T: Serialize>(result: CliResult<T>) -> Value {
    match result {
        Ok(v) => serde_json::to_value(v).unwrap_or(Value::Null),
        Err(e) => json!({"error": {"kind": e.kind(), "message": e.message()}}),
    }
}

#[allow(clippy::too_many_arguments)]
fn full_report(
    ctx: &Context,
    p: &Distribution,
    epsilon: f64,
    order: usize,
    seed: Option<u64>,
    trials: usize,
    horizon: usize,
    coupling_n: Option<usize>,
) -> Map<String, Value> {
    let (p0, d, s, tol) = (&ctx.p0, &ctx.d, &ctx.structure, ctx.common.tol);
    let max_iter = damped_chain::stationary::DEFAULT_MAX_ITER;
    let mut out = Map::new();
    out.insert(
        "structure".into(),
        section(structure_section(p0, s, 12).map_err(CliError::from)),
    );
    out.insert(
        "stationary".into(),
        section(stationary_section(p0, d, s, epsilon, tol, max_iter).map_err(CliError::from)),
    );
    out.insert(
        "limit".into(),
        section(stationary_section(p0, d, s, 0.0, tol, max_iter).map_err(CliError::from)),
    );
    out.insert(
        "spectrum".into(),
        section(spectrum_section(p0, DEFAULT_CLUSTER_TOL).map_err(CliError::from)),
    );
    out.insert(
        "expansion".into(),
        section(
            expansion_with_tol(p0, d, s, order, DEFAULT_CLUSTER_TOL)
                .and_then(|series| expansion_section(p0, d, &series, Some(epsilon)))
                .map_err(CliError::from),
        ),
    );
    let request = BoundsRequest {
        epsilon,
        theorem: None,
        coupling_n,
        horizon,
        constants: None,
        scan_horizon: damped_chain::bounds::DEFAULT_SCAN_HORIZON,
    };
    out.insert(
        "bounds".into(),
        section(
            bounds(ctx, p, &request)
                .map(|(reports, block)| json!({"block": block, "reports": reports})),
        ),
    );
    if let Some(seed) = seed {
        out.insert(
            "coupling".into(),
            section(
                coupling_section(p0, d, p, epsilon, 1, trials, seed, horizon)
                    .map_err(CliError::from),
            ),
        );
    }
    let block = ctx.block(coupling_n).ok();
    out.insert(
        "triangular".into(),
        section(
            triangular_sweep(p0, d, p, s, epsilon, &default_grid(epsilon), block)
                .map_err(CliError::from),
        ),
    );
    out
}
