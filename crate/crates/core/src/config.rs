//! TOML run configuration with strict keys and a content digest.
//!
//! Parsing never stops at the first problem: every unknown key, type
//! mismatch and out-of-range value is collected into one
//! [`Error::Config`].

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::simulation::{default_z_grid, DEFAULT_BOOTSTRAP, DEFAULT_REPLICATES};
use crate::statistics::StatisticKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Bound,
    Simulate,
    Verify,
    Demo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    /// Two-column whitespace-separated data.
    Plot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSection {
    pub p: f64,
    pub n: Option<usize>,
    /// Replaces the statistic's smoothness radius.
    pub epsilon: Option<f64>,
    /// Replaces the certified smoothness constant.
    pub m: Option<f64>,
    /// Multiplies reported totals; the bounds hold modulo this constant.
    pub user_constant: Option<f64>,
    /// Classical Berry–Esseen constant used by the explicit chain.
    pub be_constant: f64,
    pub z: Vec<f64>,
    pub certify_points: usize,
}

impl Default for BoundSection {
    fn default() -> Self {
        Self {
            p: 3.0,
            n: None,
            epsilon: None,
            m: None,
            user_constant: None,
            be_constant: crate::bounds::DEFAULT_BE_CONSTANT,
            z: vec![2.0, 3.0, 4.0, 5.0],
            certify_points: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSection {
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub z_grid: Vec<f64>,
    pub seed: u64,
    pub workers: usize,
    pub bootstrap: usize,
    /// Also tabulate distances against the non-uniform bound shape.
    pub bound_vs_truth: bool,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            n_grid: vec![50, 100, 200, 400, 800, 1600, 3200],
            replicates: DEFAULT_REPLICATES,
            z_grid: default_z_grid(),
            seed: 0,
            workers: 1,
            bootstrap: DEFAULT_BOOTSTRAP,
            bound_vs_truth: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoSection {
    pub p: f64,
    pub n_grid: Vec<usize>,
    /// `z = κ √n` for each entry.
    pub kappas: Vec<f64>,
    /// Additionally `z = n^a`.
    pub z_power: Option<f64>,
    pub replicates: usize,
    pub linear: bool,
}

impl Default for DemoSection {
    fn default() -> Self {
        Self { p: 2.5, n_grid: vec![1_000, 4_000, 16_000], kappas: vec![1.0], z_power: Some(0.75), replicates: 4_000, linear: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySection {
    /// Families for the Hoeffding and tilt suites.
    pub families: usize,
    /// Symmetric families for the max-of-sums suite.
    pub max_families: usize,
    /// Fuzzed samples per statistic invariance.
    pub samples: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { families: 100, max_families: 1000, samples: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![Format::Json, Format::Csv] }
    }
}

/// A validated run configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub statistic: Option<StatisticKind>,
    pub distribution: Option<DistributionSpec>,
    pub bound: BoundSection,
    pub simulation: SimulationSection,
    pub demo: DemoSection,
    pub verify: VerifySection,
    pub output: OutputSection,
}

impl RunConfig {
    /// SHA-256 of the canonical (key-sorted) JSON form.
    pub fn digest(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config_str(&text)
}

struct Collector {
    errors: Vec<String>,
}

impl Collector {
    fn section<'a>(&mut self, root: &'a Table, name: &str, allowed: &[&str]) -> Option<&'a Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => {
                for key in t.keys() {
                    if !allowed.contains(&key.as_str()) {
                        self.errors.push(format!("{name}.{key}: unknown key"));
                    }
                }
                Some(t)
            }
            Some(_) => {
                self.errors.push(format!("{name}: expected a table"));
                None
            }
        }
    }

    fn get<T: DeserializeOwned>(&mut self, table: Option<&Table>, section: &str, key: &str) -> Option<T> {
        let v = table?.get(key)?;
        match v.clone().try_into::<T>() {
            Ok(x) => Some(x),
            Err(e) => {
                self.errors.push(format!("{section}.{key}: {}", e.to_string().trim()));
                None
            }
        }
    }

    fn set<T: DeserializeOwned>(&mut self, table: Option<&Table>, section: &str, key: &str, slot: &mut T) {
        if let Some(v) = self.get(table, section, key) {
            *slot = v;
        }
    }

    fn require(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.errors.push(msg());
        }
    }

    fn tagged<T: DeserializeOwned>(&mut self, root: &Table, name: &str) -> Option<T> {
        match root.get(name) {
            None => None,
            Some(v) => match v.clone().try_into::<T>() {
                Ok(x) => Some(x),
                Err(e) => {
                    self.errors.push(format!("{name}: {}", e.to_string().trim()));
                    None
                }
            },
        }
    }
}

const SECTIONS: [&str; 8] = ["command", "statistic", "distribution", "bound", "simulation", "demo", "verify", "output"];

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string().trim().to_string()]))?;
    let mut c = Collector { errors: Vec::new() };
    for key in root.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            c.errors.push(format!("{key}: unknown key"));
        }
    }
    let command: Option<Command> = if root.contains_key("command") {
        c.tagged(&root, "command")
    } else {
        c.errors.push("command: missing (one of bound, simulate, verify, demo)".into());
        None
    };
    let statistic: Option<StatisticKind> = c.tagged(&root, "statistic");
    let distribution: Option<DistributionSpec> = c.tagged(&root, "distribution");

    let mut bound = BoundSection::default();
    let t = c.section(&root, "bound", &["p", "n", "epsilon", "m", "user_constant", "be_constant", "z", "certify_points"]);
    c.set(t, "bound", "p", &mut bound.p);
    bound.n = c.get(t, "bound", "n");
    bound.epsilon = c.get(t, "bound", "epsilon");
    bound.m = c.get(t, "bound", "m");
    bound.user_constant = c.get(t, "bound", "user_constant");
    c.set(t, "bound", "be_constant", &mut bound.be_constant);
    c.set(t, "bound", "z", &mut bound.z);
    c.set(t, "bound", "certify_points", &mut bound.certify_points);

    let mut sim = SimulationSection::default();
    let t = c.section(&root, "simulation", &["n_grid", "replicates", "z_grid", "seed", "workers", "bootstrap", "bound_vs_truth"]);
    c.set(t, "simulation", "n_grid", &mut sim.n_grid);
    c.set(t, "simulation", "replicates", &mut sim.replicates);
    c.set(t, "simulation", "z_grid", &mut sim.z_grid);
    c.set(t, "simulation", "seed", &mut sim.seed);
    c.set(t, "simulation", "workers", &mut sim.workers);
    c.set(t, "simulation", "bootstrap", &mut sim.bootstrap);
    c.set(t, "simulation", "bound_vs_truth", &mut sim.bound_vs_truth);

    let mut demo = DemoSection::default();
    let t = c.section(&root, "demo", &["p", "n_grid", "kappas", "z_power", "replicates", "linear"]);
    c.set(t, "demo", "p", &mut demo.p);
    c.set(t, "demo", "n_grid", &mut demo.n_grid);
    c.set(t, "demo", "kappas", &mut demo.kappas);
    if t.is_some_and(|t| t.contains_key("z_power")) {
        demo.z_power = c.get(t, "demo", "z_power");
    }
    c.set(t, "demo", "replicates", &mut demo.replicates);
    c.set(t, "demo", "linear", &mut demo.linear);

    let mut verify = VerifySection::default();
    let t = c.section(&root, "verify", &["families", "max_families", "samples"]);
    c.set(t, "verify", "families", &mut verify.families);
    c.set(t, "verify", "max_families", &mut verify.max_families);
    c.set(t, "verify", "samples", &mut verify.samples);

    let mut output = OutputSection::default();
    let t = c.section(&root, "output", &["dir", "formats"]);
    c.set(t, "output", "dir", &mut output.dir);
    c.set(t, "output", "formats", &mut output.formats);

    // value checks
    c.require(bound.p > 2.0 && bound.p.is_finite(), || format!("bound.p must exceed 2 (got {})", bound.p));
    c.require(bound.n.is_none_or(|n| n >= 2), || "bound.n must be at least 2".into());
    c.require(bound.epsilon.is_none_or(|e| e > 0.0), || "bound.epsilon must be positive".into());
    c.require(bound.m.is_none_or(|m| m > 0.0), || "bound.m must be positive".into());
    c.require(bound.user_constant.is_none_or(|a| a > 0.0), || "bound.user_constant must be positive".into());
    c.require(bound.be_constant > 0.0, || "bound.be_constant must be positive".into());
    c.require(bound.certify_points > 0, || "bound.certify_points must be positive".into());
    c.require(!sim.n_grid.is_empty() && sim.n_grid.iter().all(|&n| n >= 2), || {
        "simulation.n_grid must be a non-empty list of sizes >= 2".into()
    });
    c.require(sim.replicates > 0, || "simulation.replicates must be positive".into());
    c.require(sim.workers > 0, || "simulation.workers must be positive".into());
    c.require(sim.z_grid.iter().all(|z| z.is_finite()), || "simulation.z_grid must be finite".into());
    c.require(demo.p > 2.0, || format!("demo.p must exceed 2 (got {})", demo.p));
    c.require(!demo.n_grid.is_empty() && demo.n_grid.iter().all(|&n| n >= 2), || "demo.n_grid must be sizes >= 2".into());
    c.require(demo.kappas.iter().all(|&k| k >= 1.0), || "demo.kappas must all be >= 1".into());
    c.require(demo.replicates >= 2, || "demo.replicates must be at least 2".into());
    c.require(!output.formats.is_empty(), || "output.formats must not be empty".into());

    if let Some(cmd) = command {
        if matches!(cmd, Command::Bound | Command::Simulate) {
            c.require(root.contains_key("statistic"), || format!("statistic: required for `{}`", cmd_name(cmd)));
            c.require(root.contains_key("distribution"), || format!("distribution: required for `{}`", cmd_name(cmd)));
        }
        if cmd == Command::Bound {
            c.require(bound.n.is_some() || t_has(&root, "bound", "n"), || "bound.n: required for `bound`".into());
        }
    }
    if let (Some(s), Some(d)) = (&statistic, &distribution) {
        if s.observation_dim() != d.dimension() {
            c.errors.push(format!(
                "distribution: {} needs {}-dimensional observations, got {}",
                s.name(),
                s.observation_dim(),
                d.dimension()
            ));
        }
        if let Err(e) = d.validate() {
            c.errors.push(format!("distribution: {e}"));
        }
    }

    if !c.errors.is_empty() {
        return Err(Error::Config(c.errors));
    }
    Ok(RunConfig {
        command: command.expect("checked above"),
        statistic,
        distribution,
        bound,
        simulation: sim,
        demo,
        verify,
        output,
    })
}

fn t_has(root: &Table, section: &str, key: &str) -> bool {
    root.get(section).and_then(Value::as_table).is_some_and(|t| t.contains_key(key))
}

fn cmd_name(c: Command) -> &'static str {
    match c {
        Command::Bound => "bound",
        Command::Simulate => "simulate",
        Command::Verify => "verify",
        Command::Demo => "demo",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
command = "simulate"
[statistic]
kind = "student"
mu = 1.0
[distribution]
kind = "standardized-exponential"
shift = 1.0
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.simulation.replicates, DEFAULT_REPLICATES);
        assert_eq!(c.simulation.workers, 1);
        assert_eq!(c.statistic, Some(StatisticKind::Student { mu: 1.0 }));
    }

    #[test]
    fn collects_every_error() {
        let text = format!("{MINIMAL}\n[simulation]\nreplicates = -1\nworkers = 0\ncolour = 3\n");
        let Err(Error::Config(errs)) = parse_config_str(&text) else { panic!("expected config error") };
        assert!(errs.iter().any(|e| e.starts_with("simulation.replicates")), "{errs:?}");
        assert!(errs.iter().any(|e| e.starts_with("simulation.workers")), "{errs:?}");
        assert!(errs.iter().any(|e| e == "simulation.colour: unknown key"), "{errs:?}");
    }

    #[test]
    fn digest_ignores_key_order() {
        let reordered = r#"
[distribution]
shift = 1.0
kind = "standardized-exponential"
[statistic]
mu = 1.0
kind = "student"
"#;
        let a = parse_config_str(MINIMAL).unwrap();
        let b = parse_config_str(&format!("command = \"simulate\"\n{reordered}")).unwrap();
        assert_eq!(a.digest(), b.digest());
        let mut c = a.clone();
        c.simulation.seed = 9;
        assert_ne!(a.digest(), c.digest());
    }
}
