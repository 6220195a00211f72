use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crossedge::constants::{lookup, read_cache, stabilization_tail, write_cache};
use crossedge::experiments::{
    clt_diagnostic, power_curve, power_curve_svg, CltConfig, PowerConfig, TestSpec,
};
use crossedge::geom::build_graph;
use crossedge::stats::{asymptotic_test_on_graph, hp_dissimilarity, permutation_test_on_graph, SizeMeans};
use crossedge::{
    estimate_constants, ConstantsConfig, Error, Functional, FunctionalConstants, LabeledSample, Metric,
    SeededRng, TestReport,
};

use crate::args::{Cli, CltArgs, Command, ConstantsArgs, DissimArgs, Method, PowerArgs, TailsArgs, TestArgs};

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) | Error::Internal(_) | Error::Resource(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

pub fn run(cli: &Cli) -> Outcome {
    std::fs::create_dir_all(&cli.output_dir).map_err(|e| {
        Failure::config(format!("--output-dir: cannot create {}: {e}", cli.output_dir.display()))
    })?;
    let mut manifest = vec![
        ("seed", cli.seed.to_string()),
        ("threads", cli.threads.to_string()),
        ("output-dir", cli.output_dir.display().to_string()),
        ("svg", cli.svg.to_string()),
    ];
    match &cli.command {
        Command::Test(a) => test(cli, a, &mut manifest)?,
        Command::Constants(a) => constants(cli, a, &mut manifest)?,
        Command::Power(a) => power(cli, a, &mut manifest)?,
        Command::Clt(a) => clt(cli, a, &mut manifest)?,
        Command::Dissim(a) => dissim(cli, a, &mut manifest)?,
        Command::Tails(a) => tails(cli, a, &mut manifest)?,
    }
    let path = cli.output_dir.join(format!("{}_manifest.txt", cli.command.name()));
    std::fs::write(&path, crate::config::render_manifest(cli.command.name(), &manifest))?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

fn written(path: &Path) {
    println!("wrote {}", path.display());
}

fn load_cache(path: &Path, flag: &str) -> Result<Vec<FunctionalConstants>, Failure> {
    let file = File::open(path).map_err(|e| {
        Failure::config(format!(
            "{flag}: cannot read {}: {e}; run `crossedge constants --cache {}` first",
            path.display(),
            path.display()
        ))
    })?;
    Ok(read_cache(file)?)
}

fn cached(
    entries: &[FunctionalConstants],
    kind: Functional,
    d: usize,
    path: &Path,
) -> Result<FunctionalConstants, Failure> {
    lookup(entries, kind, d).cloned().ok_or_else(|| {
        let how = match kind {
            Functional::Knn(k) => format!("--functional knn --k {k}"),
            Functional::Mst => "--functional mst".to_string(),
        };
        Failure::config(format!(
            "--constants: no {kind} constants for d = {d} in {}; run `crossedge constants {how} --d {d} --cache {}` first",
            path.display(),
            path.display()
        ))
    })
}

fn opt_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

fn test(cli: &Cli, a: &TestArgs, m: &mut Vec<(&'static str, String)>) -> Outcome {
    m.extend([
        ("data", a.data.display().to_string()),
        ("functional", format!("{:?}", a.functional).to_lowercase()),
        ("k", a.k.to_string()),
        ("p", a.p.map(|p| p.to_string()).unwrap_or_default()),
        ("alpha", a.alpha.to_string()),
        ("method", format!("{:?}", a.method).to_lowercase()),
        ("permutations", a.permutations.to_string()),
        ("constants", opt_path(&a.constants)),
    ]);
    let sample = LabeledSample::load(&a.data)
        .map_err(|e| Failure::config(format!("--data: cannot load {}: {e}", a.data.display())))?;
    if sample.n1 == 0 || sample.n2 == 0 {
        return Err(Failure::config("--data: both labels 1 and 2 must occur"));
    }
    let kind = a.functional.with_k(a.k);
    let graph = build_graph(&sample.cloud, kind, Metric::Euclidean)?;
    let report = match a.method {
        Method::Asymptotic => {
            let path = a.constants.as_ref().ok_or_else(|| {
                Failure::config(
                    "--constants: required by the asymptotic method; run `crossedge constants` first",
                )
            })?;
            let c = cached(&load_cache(path, "--constants")?, kind, sample.cloud.dim(), path)?;
            let sizes = match a.p {
                Some(p) => {
                    let n = sample.len() as f64;
                    SizeMeans::new(p * n, (1.0 - p) * n)
                }
                None => SizeMeans::realized(&sample),
            };
            asymptotic_test_on_graph(&graph, &sample.labels, kind, &c, a.alpha, sizes)?
        }
        Method::Permutation => permutation_test_on_graph(
            &graph,
            &sample.labels,
            a.alpha,
            a.permutations,
            &SeededRng::new(cli.seed),
        )?,
    };
    TestReport::write_csv(&[report], io::stdout().lock())?;
    let path = cli.output_dir.join("test.csv");
    TestReport::write_csv(&[report], create(&path)?)?;
    Ok(())
}

fn constants(cli: &Cli, a: &ConstantsArgs, m: &mut Vec<(&'static str, String)>) -> Outcome {
    let kind = a.functional.with_k(a.k);
    let mut cfg = ConstantsConfig::new(kind, a.d, a.reps, cli.seed);
    cfg.side = a.side;
    m.extend([
        ("functional", format!("{:?}", a.functional).to_lowercase()),
        ("k", a.k.to_string()),
        ("d", a.d.to_string()),
        ("reps", a.reps.to_string()),
        ("side", cfg.resolved_side().to_string()),
        ("cache", a.cache.display().to_string()),
    ]);
    let fresh = estimate_constants(&cfg)?;
    let mut entries = if a.cache.exists() { load_cache(&a.cache, "--cache")? } else { Vec::new() };
    entries.retain(|c| !(c.kind == kind && c.d == a.d));
    entries.push(fresh);
    let mut out = Vec::new();
    write_cache(&mut out, &entries)?;
    std::fs::write(&a.cache, out)
        .map_err(|e| Failure::config(format!("--cache: cannot write {}: {e}", a.cache.display())))?;
    written(&a.cache);
    Ok(())
}

fn power(cli: &Cli, a: &PowerArgs, m: &mut Vec<(&'static str, String)>) -> Outcome {
    m.extend([
        ("d", a.d.to_string()),
        ("a", a.a.to_string()),
        ("h-grid", a.h_grid.spec.clone()),
        ("n1", a.n1.to_string()),
        ("n2", a.n2.to_string()),
        ("iters", a.iters.to_string()),
        ("tests", a.tests.spec.clone()),
        ("alpha", a.alpha.to_string()),
        ("mode", a.mode.to_string()),
        ("radius", a.radius.to_string()),
        ("permutations", a.permutations.to_string()),
        ("constants", opt_path(&a.constants)),
    ]);
    let mut cfg = PowerConfig::new(a.d, a.a, a.h_grid.values.clone(), a.n1, a.n2, a.iters, cli.seed);
    cfg.tests = a.tests.tests.clone();
    cfg.alpha = a.alpha;
    cfg.mode = a.mode;
    cfg.radius = a.radius;
    cfg.permutations = a.permutations;

    let mut consts = Vec::new();
    for t in &cfg.tests {
        if let TestSpec::Knn(k) = t {
            let path = a.constants.as_ref().ok_or_else(|| {
                Failure::config(format!("--constants: required by {t}; run `crossedge constants` first"))
            })?;
            consts.push(cached(&load_cache(path, "--constants")?, Functional::Knn(*k), a.d, path)?);
        }
    }
    let curve = power_curve(&cfg, &consts)?;
    let path = cli.output_dir.join("power.csv");
    curve.write_csv(create(&path)?)?;
    written(&path);
    if cli.svg {
        let path = cli.output_dir.join("power.svg");
        std::fs::write(&path, power_curve_svg(&curve))?;
        written(&path);
    }
    Ok(())
}

fn clt(cli: &Cli, a: &CltArgs, m: &mut Vec<(&'static str, String)>) -> Outcome {
    m.extend([
        ("k", a.k.to_string()),
        ("f", a.f.to_string()),
        ("g", a.g.to_string()),
        ("p", a.p.to_string()),
        ("n", a.n.to_string()),
        ("reps", a.reps.to_string()),
        ("mc-n", a.mc_n.to_string()),
        ("constants", a.constants.display().to_string()),
    ]);
    if a.f.dim() != a.g.dim() {
        return Err(Failure::config("--g: dimension differs from --f"));
    }
    let c = cached(&load_cache(&a.constants, "--constants")?, Functional::Knn(a.k), a.f.dim(), &a.constants)?;
    let mut cfg = CltConfig::new(a.k, a.f.clone(), a.g.clone(), a.p, a.n, a.reps, cli.seed);
    cfg.mc_n = a.mc_n;
    let report = clt_diagnostic(&cfg, &c)?;
    let path = cli.output_dir.join("clt_summary.csv");
    report.write_summary_csv(create(&path)?)?;
    written(&path);
    let path = cli.output_dir.join("clt_z.csv");
    report.write_z_csv(create(&path)?)?;
    written(&path);
    Ok(())
}

fn dissim(cli: &Cli, a: &DissimArgs, m: &mut Vec<(&'static str, String)>) -> Outcome {
    m.extend([
        ("f", a.f.to_string()),
        ("g", a.g.to_string()),
        ("p", a.p.to_string()),
        ("mc-n", a.mc_n.to_string()),
    ]);
    if a.f.dim() != a.g.dim() {
        return Err(Failure::config("--g: dimension differs from --f"));
    }
    let delta = hp_dissimilarity(&a.f, &a.g, a.p, a.mc_n, &SeededRng::new(cli.seed))?;
    let mut s = String::from("quantity,value,se\n");
    writeln!(s, "dissimilarity,{:?},{:?}", delta.value, delta.se).unwrap();
    // T/N -> (E out-degree / 2)(1 - δ); out-degree is K for K-NN, 2 for the MST
    for (name, out_deg) in [("knn1", 1.0), ("knn2", 2.0), ("knn3", 3.0), ("mst", 2.0)] {
        let h = 0.5 * out_deg;
        writeln!(s, "weak_limit_{name},{:?},{:?}", h * (1.0 - delta.value), h * delta.se).unwrap();
    }
    let path = cli.output_dir.join("dissim.csv");
    create(&path)?.write_all(s.as_bytes())?;
    print!("{s}");
    Ok(())
}

fn tails(cli: &Cli, a: &TailsArgs, m: &mut Vec<(&'static str, String)>) -> Outcome {
    m.extend([
        ("k", a.k.to_string()),
        ("d", a.d.to_string()),
        ("s-grid", a.s_grid.spec.clone()),
        ("reps", a.reps.to_string()),
    ]);
    let t = stabilization_tail(a.k, a.d, &a.s_grid.values, a.reps, &SeededRng::new(cli.seed))?;
    let mut s = String::from("s,tau,se,tau_monotone\n");
    for ((si, e), h) in t.s_grid.iter().zip(&t.tau_raw).zip(&t.tau_hat) {
        writeln!(s, "{si:?},{:?},{:?},{h:?}", e.value, e.se).unwrap();
    }
    let path = cli.output_dir.join("tails.csv");
    create(&path)?.write_all(s.as_bytes())?;
    written(&path);
    let path = cli.output_dir.join("tails_fit.csv");
    create(&path)?
        .write_all(format!("k,d,log_tail_slope\n{},{},{:?}\n", a.k, a.d, t.fit_slope).as_bytes())?;
    written(&path);
    Ok(())
}
