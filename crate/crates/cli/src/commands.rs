use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slseg::calibrate::{calibrate_null, CalibrationCurve, NullDesign};
use slseg::rng::derive_seed;
use slseg::segment::{detect, prepare_panel, single_changepoint, SegmentationResult};
use slseg::simulate::{
    ari, gen_multi_cp, gen_poisson, gen_single_cp, MultiCPScenario, PoissonScenario, SingleCPScenario,
};
use slseg::theory;
use slseg::Model;

use crate::config::{FileConfig, RunConfig};
use crate::error::{CliError, Result};
use crate::ingest::ingest;

pub const DETECT_FORMAT: &str = "slseg-detect/1";

/// Document written by `detect`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectDocument {
    pub format: String,
    pub input: String,
    pub row_ids: Vec<String>,
    pub result: SegmentationResult,
}

impl DetectDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("not a detect document: {e}")))
    }
}

pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

pub fn run_detect(input: &Path, cfg: &RunConfig) -> Result<DetectDocument> {
    let table = ingest(input, cfg.model, cfg.row_ids)?;
    let sl = cfg.sl_config(table.panel.length())?;
    let result = detect(&table.panel, &sl)?;
    Ok(DetectDocument {
        format: DETECT_FORMAT.to_string(),
        input: input.display().to_string(),
        row_ids: table.row_ids,
        result,
    })
}

/// Parses `lo:hi:step` or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Config(format!("bad grid '{spec}'; use lo:hi:step or a comma-separated list"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0 && hi >= lo) {
            return Err(bad());
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|k| lo + k as f64 * step).collect());
    }
    spec.split(',').map(num).collect()
}

pub fn run_calibrate(
    cfg: &RunConfig,
    n_sequences: usize,
    length: usize,
    reps: usize,
    grid: &[f64],
    poisson_rate: f64,
) -> Result<CalibrationCurve> {
    let design = NullDesign { n_sequences, length, poisson_rate };
    let sl = cfg.sl_config(length)?;
    Ok(calibrate_null(&design, &sl, grid, reps, cfg.seed)?)
}

/// A simulation-study description, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub config: FileConfig,
    pub scenario: ScenarioSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScenarioSpec {
    /// Known single change-point, estimated by the global argmax.
    Single(SingleCPScenario),
    Multi(MultiCPScenario),
    Poisson(PoissonScenario),
}

impl ScenarioSpec {
    fn model(&self) -> Model {
        match self {
            ScenarioSpec::Poisson(_) => Model::Poisson,
            _ => Model::Normal,
        }
    }

    fn length(&self) -> usize {
        match self {
            ScenarioSpec::Single(s) => s.length,
            ScenarioSpec::Multi(s) => s.length,
            ScenarioSpec::Poisson(s) => s.length,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub replication: usize,
    pub seed: u64,
    pub n_change_points: usize,
    /// Estimated locations joined by `;`.
    pub locations: String,
    pub ari: f64,
    /// Largest distance from a true change-point to its nearest estimate.
    pub max_error: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSummary {
    pub replications: Vec<Replication>,
    pub counts: BTreeMap<usize, usize>,
    pub mean_ari: f64,
}

impl SimulationSummary {
    pub fn replications_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.replications {
            w.serialize(r).map_err(|e| CliError::Config(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// `statistic,value` rows: runs, mean ARI, count per number of points and
    /// hit fractions at tolerances 3 and 10.
    pub fn summary_csv(&self) -> String {
        let runs = self.replications.len();
        let mut out = format!("statistic,value\nruns,{runs}\nmean_ari,{}\n", self.mean_ari);
        for (n, c) in &self.counts {
            out.push_str(&format!("count_{n},{c}\n"));
        }
        for k in [3usize, 10] {
            let hits = self.replications.iter().filter(|r| r.max_error.is_some_and(|e| e <= k)).count();
            out.push_str(&format!("hit_within_{k},{}\n", hits as f64 / runs as f64));
        }
        out
    }
}

fn max_error(truth: &[usize], found: &[usize]) -> Option<usize> {
    if found.is_empty() {
        return None;
    }
    truth.iter().map(|&t| found.iter().map(|&f| f.abs_diff(t)).min().expect("nonempty")).max()
}

pub fn load_simulation(path: &Path) -> Result<SimulationFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Runs every replication of `sim`; flags in `overrides` win over the file's
/// `[config]` table.
pub fn run_simulate(sim: &SimulationFile, overrides: &crate::config::CommonArgs) -> Result<SimulationSummary> {
    if sim.replications == 0 {
        return Err(CliError::Config("replications must be positive".into()));
    }
    let mut file_cfg = sim.config.clone();
    file_cfg.model = Some(sim.scenario.model());
    let mut args = overrides.clone();
    args.model = None;
    let cfg = RunConfig::merge(&file_cfg, &args, false)?;
    let length = sim.scenario.length();
    let base = cfg.sl_config(length)?;

    let mut replications = Vec::with_capacity(sim.replications);
    for rep in 0..sim.replications {
        let seed = derive_seed(sim.seed, rep as u64);
        let sl = base.clone().with_seed(seed);
        let (truth, found) = match &sim.scenario {
            ScenarioSpec::Single(sc) => {
                let panel = prepare_panel(&gen_single_cp(sc, seed)?, &sl)?;
                (vec![sc.tau], vec![single_changepoint(&panel, &sl)?])
            }
            ScenarioSpec::Multi(sc) => {
                let (panel, truth) = gen_multi_cp(sc, seed)?;
                (truth, detect(&panel, &sl)?.locations())
            }
            ScenarioSpec::Poisson(sc) => {
                let (panel, truth) = gen_poisson(sc, seed)?;
                (truth, detect(&panel, &sl)?.locations())
            }
        };
        replications.push(Replication {
            replication: rep,
            seed,
            n_change_points: found.len(),
            locations: found.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(";"),
            ari: ari(&truth, &found, length),
            max_error: max_error(&truth, &found),
        });
    }
    let mut counts = BTreeMap::new();
    for r in &replications {
        *counts.entry(r.n_change_points).or_insert(0) += 1;
    }
    let mean_ari = replications.iter().map(|r| r.ari).sum::<f64>() / replications.len() as f64;
    Ok(SimulationSummary { replications, counts, mean_ari })
}

/// Boundary constants as `name = value` lines.
pub fn run_boundary(beta: f64, zeta: f64, r: Option<f64>) -> Result<String> {
    let mut out = format!("beta = {beta}\nzeta = {zeta}\n");
    if zeta == 0.0 {
        out.push_str(&format!("rho_z = {}\n", theory::rho_z(beta)?));
    }
    out.push_str(&format!("rho_z_changepoint = {}\n", theory::rho_z2(beta, zeta)?));
    if let Some(r) = r {
        let (rho, omega) = theory::rho_r(beta, zeta, r)?;
        let (closed, closed_omega) = theory::rho_r_closed_form(beta, zeta, r)?;
        out.push_str(&format!("r = {r}\npoisson_info = {}\n", theory::poisson_info(r)?));
        out.push_str(&format!("rho_r = {rho}\nomega = {omega}\n"));
        out.push_str(&format!("rho_r_closed_form = {closed}\nomega_closed_form = {closed_omega}\n"));
        out.push_str(&format!("regime_threshold = {}\n", theory::boundary_regime_threshold(r)?));
    }
    Ok(out)
}

/// Writes `text` to `path`, creating nothing when `path` is `None`.
pub fn write_side_file(path: Option<&PathBuf>, text: &str) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, text).map_err(|e| CliError::io(p, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("2:3:0.5").unwrap(), vec![2.0, 2.5, 3.0]);
        assert_eq!(parse_grid("1, 4,9").unwrap(), vec![1.0, 4.0, 9.0]);
        assert!(parse_grid("1:0:1").is_err() && parse_grid("a").is_err());
    }

    #[test]
    fn max_error_nearest() {
        assert_eq!(max_error(&[10, 20], &[12, 19]), Some(2));
        assert_eq!(max_error(&[10], &[]), None);
    }

    #[test]
    fn scenario_file_parses() {
        let text = r#"
replications = 3
seed = 7
[config]
critical = 5.0
[scenario]
kind = "multi"
length = 2000
n_sequences = 200
taus = [500, 1000, 1500]
offset = 0
amplitude = 0.6
n_altered = 40
"#;
        let sim: SimulationFile = toml::from_str(text).unwrap();
        assert_eq!(sim.scenario, ScenarioSpec::Multi(MultiCPScenario::standard(0.6, 0)));
        assert_eq!(sim.config.critical, Some(5.0));
    }

    #[test]
    fn boundary_lines() {
        let text = run_boundary(0.8, 0.0, Some(2.0)).unwrap();
        assert!(text.contains("rho_z = "));
        assert!(text.contains("rho_r_closed_form = "));
        assert!(run_boundary(0.3, 0.0, None).is_err());
    }
}
