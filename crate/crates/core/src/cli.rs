//! Command-line front end: one TOML file describes the run; flags only
//! override the seed, worker count and output directory.
//!
//! Exit codes: 0 ok, 1 validation, 2 degeneracy, 3 runtime failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{iid_p3_constants, nonuniform_fs_bound, uniform_fs_bound, BoundInputs};
use crate::config::{parse_config, Command, Format, RunConfig};
use crate::error::{Error, Result};
use crate::simulation::{bound_vs_truth, optimality_demo, run_experiment, DemoSpec, ExperimentSpec, TruthSpec, ZRule};
use crate::statistics::{build_model, degeneracy_check, BuildOptions, DegeneracyReport};

#[derive(Debug, Clone, Parser)]
#[command(name = "berry", version, about = "Berry-Esseen bounds and Monte Carlo checks for smooth statistics")]
pub struct Args {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `simulation.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `simulation.workers`.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a dispatch produced.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: Command,
    pub digest: String,
    pub seed: u64,
    pub artifacts: Vec<PathBuf>,
    pub passed: bool,
    pub details: Value,
}

/// Load the config and apply flag overrides.
pub fn load(args: &Args) -> Result<RunConfig> {
    let mut cfg = parse_config(&args.config)?;
    if let Some(s) = args.seed {
        cfg.simulation.seed = s;
    }
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(Error::Config(vec!["--workers must be positive".into()]));
        }
        cfg.simulation.workers = w;
    }
    if let Some(o) = &args.out {
        cfg.output.dir = o.clone();
    }
    Ok(cfg)
}

/// Parse, dispatch and report; returns the process exit code.
pub fn run(args: &Args) -> i32 {
    let outcome = load(args).and_then(|cfg| dispatch(&cfg));
    match outcome {
        Ok(m) => {
            for a in &m.artifacts {
                println!("{}", a.display());
            }
            if m.passed {
                0
            } else {
                eprintln!("one or more checks failed; see {}", m.artifacts.last().map_or(String::new(), |p| p.display().to_string()));
                3
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    digest: String,
    artifacts: Vec<PathBuf>,
}

impl Writer<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.output.dir.join(name)
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.path(name);
        fs::create_dir_all(&self.cfg.output.dir).map_err(io_err(&self.cfg.output.dir))?;
        fs::write(&path, body).map_err(io_err(&path))?;
        self.artifacts.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, mut value: Value) -> Result<()> {
        if self.cfg.wants(Format::Json) {
            value["digest"] = json!(self.digest);
            value["seed"] = json!(self.cfg.simulation.seed);
            self.write(name, &(serde_json::to_string_pretty(&value).expect("json") + "\n"))?;
        }
        Ok(())
    }

    fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        if self.cfg.wants(Format::Csv) {
            let head = format!("# digest={} seed={}\n", self.digest, self.cfg.simulation.seed);
            self.write(name, &(head + body))?;
        }
        Ok(())
    }

    fn plot(&mut self, name: &str, body: &str) -> Result<()> {
        if self.cfg.wants(Format::Plot) {
            let head = format!("# digest={} seed={}\n", self.digest, self.cfg.simulation.seed);
            self.write(name, &(head + body))?;
        }
        Ok(())
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Evaluation(format!("{}: {e}", path.display()))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

/// Run the configured command and write its artifacts.
pub fn dispatch(cfg: &RunConfig) -> Result<Manifest> {
    let mut w = Writer { cfg, digest: cfg.digest(), artifacts: Vec::new() };
    let (passed, details) = match cfg.command {
        Command::Bound => bound(&mut w)?,
        Command::Simulate => simulate(&mut w)?,
        Command::Verify => verify(&mut w)?,
        Command::Demo => demo(&mut w)?,
    };
    let manifest = Manifest {
        command: cfg.command,
        digest: w.digest.clone(),
        seed: cfg.simulation.seed,
        artifacts: w.artifacts.clone(),
        passed,
        details,
    };
    let mut m = to_value(&manifest);
    m["config"] = to_value(cfg);
    let path = w.path("manifest.json");
    fs::create_dir_all(&cfg.output.dir).map_err(io_err(&cfg.output.dir))?;
    fs::write(&path, serde_json::to_string_pretty(&m).expect("json") + "\n").map_err(io_err(&path))?;
    let mut manifest = manifest;
    manifest.artifacts.push(path);
    Ok(manifest)
}

/// Degeneracy is checked before anything else; a degenerate model writes
/// its report and stops with [`Error::Degenerate`].
fn check_degeneracy(w: &mut Writer) -> Result<DegeneracyReport> {
    let (kind, obs) = (w.cfg.statistic.as_ref().expect("validated"), w.cfg.distribution.as_ref().expect("validated"));
    let report = degeneracy_check(kind, obs)?;
    if report.degenerate {
        w.write("degeneracy.json", &(serde_json::to_string_pretty(&report).expect("json") + "\n"))?;
        eprintln!("degenerate model: {}", report.witness.as_deref().unwrap_or("sigma1 vanishes"));
        return Err(Error::Degenerate { sigma: report.sigma1 });
    }
    Ok(report)
}

fn build_options(cfg: &RunConfig) -> BuildOptions {
    BuildOptions {
        epsilon: cfg.bound.epsilon.unwrap_or(0.5),
        certify_points: cfg.bound.certify_points,
        m_override: cfg.bound.m,
        seed: cfg.simulation.seed,
        ..BuildOptions::default()
    }
}

fn bound(w: &mut Writer) -> Result<(bool, Value)> {
    let cfg = w.cfg;
    let degeneracy = check_degeneracy(w)?;
    let opts = build_options(cfg);
    let model = build_model(cfg.statistic.clone().expect("validated"), cfg.distribution.as_ref().expect("validated"), &opts)?;
    let n = cfg.bound.n.expect("validated");
    let p = cfg.bound.p;
    let mut alphas = BoundInputs::required_alphas(p);
    alphas.extend([2.0, 3.0]);
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let profile = model.moment_profile(n, &alphas, &opts)?;
    let inputs = BoundInputs::iid(model.norm_l, model.sigma1.value, model.m, model.epsilon, p, profile)?;
    let uniform = uniform_fs_bound(&inputs, None, None)?.with_user_constant(cfg.bound.user_constant);
    let mut csv = String::from("report,z,label,value,equation_tag\n");
    let mut push = |r: &crate::report::BoundReport| {
        for t in &r.terms {
            csv += &format!("{},{},{},{:e},{}\n", r.bound, r.z.map_or(String::new(), |z| z.to_string()), t.label, t.value, t.equation_tag);
        }
    };
    push(&uniform);
    let mut nonuniform = Vec::new();
    let mut skipped = Vec::new();
    for &z in &cfg.bound.z {
        match nonuniform_fs_bound(&inputs, z) {
            Ok(r) => {
                let r = r.with_user_constant(cfg.bound.user_constant);
                push(&r);
                nonuniform.push(r);
            }
            Err(Error::OutOfRange { z, lo, hi }) => skipped.push(json!({"z": z, "valid_range": [lo, hi]})),
            Err(e) => return Err(e),
        }
    }
    let v2 = inputs.profile.norm_v(2.0)?;
    let constants = match inputs.profile.norm_v(3.0) {
        Ok(v3) => {
            let (a1, a2) = iid_p3_constants(&model.scalars(), v2, v3, n)?;
            json!({"a1": a1, "a2": a2})
        }
        Err(_) => Value::Null,
    };
    let details = json!({
        "model": {
            "statistic": model.kind().map(|k| k.name()),
            "norm_l": model.norm_l,
            "norm_l_exact": model.norm_l_exact,
            "sigma1": model.sigma1,
            "m": model.m,
            "m_certified": model.m_certified,
            "certification_violations": model.certification_violations,
            "epsilon": model.epsilon,
            "c1": model.c1(),
            "exact_moments": model.exact_moments,
        },
        "n": n,
        "p": p,
        "degeneracy": degeneracy,
        "uniform": uniform,
        "nonuniform": nonuniform,
        "out_of_range": skipped,
        "iid_constants": constants,
    });
    w.json("bound.json", details.clone())?;
    w.csv("bound.csv", &csv)?;
    Ok((true, details))
}

fn simulate(w: &mut Writer) -> Result<(bool, Value)> {
    let cfg = w.cfg;
    check_degeneracy(w)?;
    let s = &cfg.simulation;
    let spec = ExperimentSpec {
        kind: cfg.statistic.clone().expect("validated"),
        observation: cfg.distribution.clone().expect("validated"),
        n_grid: s.n_grid.clone(),
        replicates: s.replicates,
        z_grid: s.z_grid.clone(),
        seed: s.seed,
        workers: s.workers,
        bootstrap: s.bootstrap,
    };
    let mut run = run_experiment(&spec)?;
    run.digest = Some(w.digest.clone());
    let mut details = to_value(&run);
    w.csv("simulation.csv", &run.to_csv())?;
    w.plot("simulation_loglog.dat", &run.loglog())?;
    if s.bound_vs_truth {
        let model = build_model(spec.kind.clone(), &spec.observation, &build_options(cfg))?;
        let table = bound_vs_truth(
            &model,
            &TruthSpec { n_grid: s.n_grid.clone(), z_grid: s.z_grid.clone(), replicates: s.replicates, seed: s.seed, workers: s.workers },
        )?;
        w.csv("bound_vs_truth.csv", &table.to_csv())?;
        details["bound_vs_truth"] = to_value(&table);
    }
    w.json("simulation.json", details.clone())?;
    Ok((true, details))
}

fn verify(w: &mut Writer) -> Result<(bool, Value)> {
    let cfg = w.cfg;
    let suites = crate::verify::run_all(&cfg.verify, cfg.simulation.seed)?;
    let passed = suites.iter().all(|s| s.passed);
    let mut csv = String::from("invariant,checks,violations,worst,status\n");
    for s in &suites {
        csv += &format!("{},{},{},{:e},{}\n", s.name, s.checks, s.violations, s.worst, if s.passed { "pass" } else { "fail" });
    }
    let details = json!({ "invariants": suites, "passed": passed });
    w.json("verify.json", details.clone())?;
    w.csv("verify.csv", &csv)?;
    Ok((passed, details))
}

fn demo(w: &mut Writer) -> Result<(bool, Value)> {
    let cfg = w.cfg;
    let d = &cfg.demo;
    let mut rules: Vec<ZRule> = d.kappas.iter().map(|&k| ZRule::Kappa(k)).collect();
    if let Some(a) = d.z_power {
        rules.push(ZRule::Power(a));
    }
    let spec = DemoSpec {
        p: d.p,
        n_grid: d.n_grid.clone(),
        rules,
        replicates: d.replicates,
        seed: cfg.simulation.seed,
        workers: cfg.simulation.workers,
        linear: d.linear,
    };
    let report = optimality_demo(&spec)?;
    let details = to_value(&report);
    w.json("demo.json", details.clone())?;
    w.csv("demo.csv", &report.to_csv())?;
    Ok((true, details))
}
