use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use perturb_icp::bench::{run_experiment, Estimate, ExperimentSpec, MethodSummary};
use perturb_icp::icp::{icp_confidence_intervals, icp_graph, icp_target, IcpConfig, CI_CSV_HEADER};
use perturb_icp::io::{read_csv_labels, read_csv_str, to_csv_string};
use perturb_icp::perturb::{build_perturbation_graph, transitive_reduce, PerturbationGraph};
use perturb_icp::sem::{parse_contexts, simulate as simulate_sem, SemConfig};
use perturb_icp::{Dataset, Error};

use crate::stamp::{sha256_hex, Stamp};
use crate::{BenchArgs, DataArgs, IcpArgs, PgraphArgs, SimulateArgs, TrArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// 1 usage, 2 data or format, 3 numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Input { source, .. } | CliError::Core(source) => {
                if source.is_numerical() {
                    3
                } else {
                    2
                }
            }
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn at(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |source| CliError::Input { path: path.to_path_buf(), source }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--alpha must lie in (0,1), got {alpha}")))
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

/// Writes `json` to `out` (and `dot` beside it), or prints the JSON.
fn emit(out: Option<&Path>, json: &str, dot: Option<&str>) -> Result<()> {
    match out {
        Some(path) => {
            write(path, json)?;
            if let Some(dot) = dot {
                write(&path.with_extension("dot"), dot)?;
            }
            Ok(())
        }
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let sem_text = read(&a.sem)?;
    let cfg: SemConfig = serde_json::from_str(&sem_text).map_err(|e| at(&a.sem)(e.into()))?;
    let sem = cfg.build().map_err(at(&a.sem))?;
    let ctxs = parse_contexts(&read(&a.contexts)?, sem.labels()).map_err(at(&a.contexts))?;
    let ds = simulate_sem(&sem, &ctxs, a.n, a.seed)?;
    let csv = to_csv_string(&ds);
    match &a.out {
        Some(path) => write(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

/// Reads the dataset, applying the context sidecar if given. Also returns the
/// input digests for the stamp.
fn load(d: &DataArgs) -> Result<(Dataset, Value)> {
    let text = read(&d.data)?;
    let (ds, ctx_digest) = match &d.contexts {
        Some(cpath) => {
            let ctext = read(cpath)?;
            let labels = read_csv_labels(text.as_bytes()).map_err(at(&d.data))?;
            let specs = parse_contexts(&ctext, &labels).map_err(at(cpath))?;
            (read_csv_str(&text, Some(&specs)).map_err(at(&d.data))?, Value::from(sha256_hex(ctext.as_bytes())))
        }
        None => (read_csv_str(&text, None).map_err(at(&d.data))?, Value::Null),
    };
    Ok((ds, json!({ "data": sha256_hex(text.as_bytes()), "contexts": ctx_digest })))
}

pub fn pgraph(a: PgraphArgs) -> Result<()> {
    check_alpha(a.alpha)?;
    let (ds, inputs) = load(&a.data)?;
    let pg = build_perturbation_graph(&ds, a.alpha, a.mode).map_err(at(&a.data.data))?;
    warn_all(&pg.warnings);
    let stamp = Stamp::new(None, &json!({ "command": "pgraph", "alpha": a.alpha, "mode": a.mode, "inputs": inputs }));
    emit(a.out.as_deref(), &stamp.wrap("perturbation_graph", &pg), Some(&pg.to_dot()))
}

pub fn tr(a: TrArgs) -> Result<()> {
    let text = read(&a.pg)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| at(&a.pg)(e.into()))?;
    // accept a stamped artifact or a bare graph
    let inner = match value.get("perturbation_graph") {
        Some(g) => g.to_string(),
        None => text.clone(),
    };
    let pg = PerturbationGraph::from_json(&inner).map_err(at(&a.pg))?;
    let res = transitive_reduce(&pg)?;
    let stamp = Stamp::new(None, &json!({ "command": "tr", "inputs": { "pg": sha256_hex(text.as_bytes()) } }));
    emit(a.out.as_deref(), &stamp.wrap("transitive_reduction", &res), Some(&res.to_dot()))
}

pub fn icp(a: IcpArgs) -> Result<()> {
    check_alpha(a.alpha)?;
    let cfg = IcpConfig {
        alpha: a.alpha,
        test: a.test,
        max_set_size: a.max_set_size,
        max_p: a.max_p,
        residual_scope: a.residual_scope,
        bonferroni_targets: a.bonferroni_targets,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let (ds, inputs) = load(&a.data)?;
    let config = json!({ "command": "icp", "target": a.target, "all": a.all, "config": cfg, "inputs": inputs });
    let stamp = Stamp::new(None, &config);

    if a.all {
        if ds.p() - 1 > cfg.max_p {
            return Err(Error::TooManyCandidates { candidates: ds.p() - 1, cap: cfg.max_p }.into());
        }
        let g = icp_graph(&ds, &cfg)?;
        for o in &g.targets {
            if let Some(e) = &o.error {
                eprintln!("warning: target `{}`: {e}", g.labels[o.target]);
            }
            if let Some(r) = &o.result {
                for w in &r.warnings {
                    eprintln!("warning: target `{}`: {w}", g.labels[o.target]);
                }
            }
        }
        if let Some(path) = &a.ci_csv {
            write(path, &g.ci_csv())?;
        }
        return emit(a.out.as_deref(), &stamp.wrap("icp_graph", &g), Some(&g.to_dot()));
    }

    let label = a.target.as_deref().expect("clap requires --target or --all");
    let t = ds
        .index_of(label)
        .ok_or_else(|| CliError::Usage(format!("--target `{label}` is not a column of {}", a.data.data.display())))?;
    let res = icp_target(&ds, t, &cfg)?;
    let res = icp_confidence_intervals(&ds, res, &cfg)?;
    warn_all(&res.warnings);
    if let Some(path) = &a.ci_csv {
        let mut text = format!("{CI_CSV_HEADER}\n");
        for row in res.ci_csv_rows() {
            text.push_str(&row);
            text.push('\n');
        }
        write(path, &text)?;
    }
    emit(a.out.as_deref(), &stamp.wrap("icp", &res), None)
}

fn describe(name: &str, m: &Option<MethodSummary>) -> Option<String> {
    let m = m.as_ref()?;
    let f = |e: &Option<Estimate>| e.map_or("n/a".to_string(), |e| format!("{:.3} ± {:.3}", e.mean, e.se));
    let mut line = format!("{name}: precision {} recall {} shd {}", f(&m.precision), f(&m.recall), f(&m.shd));
    if m.watched_rate.is_some() {
        line.push_str(&format!(" watched edge {}", f(&m.watched_rate)));
    }
    Some(line)
}

pub fn bench(a: BenchArgs) -> Result<()> {
    let text = read(&a.spec)?;
    let spec = ExperimentSpec::from_json(&text).map_err(at(&a.spec))?;
    let res = run_experiment(&spec)?;
    fs::create_dir_all(&a.out).map_err(|source| CliError::Io { path: a.out.clone(), source })?;
    let stamp = Stamp::new(Some(spec.seed), &json!({ "command": "bench", "spec": spec }));
    write(&a.out.join("summary.json"), &stamp.wrap("summary", &res.summary))?;
    write(&a.out.join("records.csv"), &res.records_csv())?;

    let s = &res.summary;
    println!("{}: {} replications, {} failed", s.name, s.replications, s.failed);
    for line in [describe("pruning", &s.tr), describe("icp", &s.icp)].into_iter().flatten() {
        println!("{line}");
    }
    if let Some(c) = s.min_coverage() {
        println!("min coverage: {c:.3}");
    }
    Ok(())
}
