//! Scenario files, trajectory export and run summaries.
//!
//! Scenarios are TOML. Internally everything is shifted so that the target is
//! the origin; exported trajectories and summaries are in the scenario's own
//! frame.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::controller::{control_bound, Gains, JumpPolicy};
use crate::error::{Error, Result};
use crate::geometry::{SpdMatrix, Vector};
use crate::obstacle::{in_workspace, Mode, Obstacle, ObstacleParams, Workspace};
use crate::parallel::Execution;
use crate::sampling::DEFAULT_SEED;
use crate::simulator::{check_trajectory, simulate, Sample, SolverConfig, Termination, Trajectory, TrajectoryReport};
use crate::tuning::{auto_tune, validate_params, ParamOverrides, TuneOptions, Tuned, TuningReport};

/// Raw contents of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dimension: usize,
    #[serde(default)]
    pub target: Option<Vec<f64>>,
    #[serde(default)]
    pub vehicle_radius: Option<f64>,
    pub initial_conditions: Vec<Vec<f64>>,
    pub gains: GainsFile,
    pub obstacles: Vec<ObstacleFile>,
    #[serde(default)]
    pub solver: SolverFile,
    #[serde(default)]
    pub tuning: TuningFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsFile {
    pub k0: f64,
    pub k1: f64,
    pub km1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleFile {
    pub center: Vec<f64>,
    /// Row-major shape matrix.
    pub shape: Vec<Vec<f64>>,
    #[serde(default)]
    pub params: Option<ParamOverrides>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    #[default]
    Margin,
    Random,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverFile {
    pub step: Option<f64>,
    pub t_max: Option<f64>,
    pub boundary_tol: Option<f64>,
    pub stop_radius: Option<f64>,
    pub max_jumps: Option<usize>,
    pub seed: Option<u64>,
    pub policy: Option<PolicyName>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningFile {
    /// Lower bound on every `δ`.
    pub delta_floor: Option<f64>,
    pub max_retries: Option<usize>,
}

/// A validated, tuned scenario in target-centred coordinates.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub target: Vector,
    pub tuned: Tuned,
    pub gains: Gains,
    pub initial_conditions: Vec<Vector>,
    pub solver: SolverConfig,
    pub seed: u64,
    pub policy: PolicyName,
    pub vehicle_radius: Option<f64>,
}

impl Scenario {
    pub fn workspace(&self) -> &Workspace {
        &self.tuned.workspace
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    /// Replaces the seed, keeping the jump policy kind.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        if self.policy == PolicyName::Random {
            self.solver.policy = JumpPolicy::Random { seed };
        }
    }
}

fn check_len(expected: usize, v: &[f64]) -> Result<Vector> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parse(format!("non-finite coordinate in {v:?}")));
    }
    Ok(Vector::from_column_slice(v))
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Validates, shifts the target to the origin and tunes.
    pub fn build(&self, name: &str, exec: Execution) -> Result<Scenario> {
        let n = self.dimension;
        if n == 0 {
            return Err(Error::Parse("dimension must be positive".into()));
        }
        let target = match &self.target {
            Some(t) => check_len(n, t)?,
            None => Vector::zeros(n),
        };
        let gains = Gains::new(self.gains.k0, self.gains.k1, self.gains.km1)?;
        if self.obstacles.is_empty() {
            return Err(Error::Parse("at least one obstacle is required".into()));
        }
        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        let mut overrides = Vec::with_capacity(self.obstacles.len());
        for o in &self.obstacles {
            let c = check_len(n, &o.center)?;
            if o.shape.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: o.shape.len(),
                });
            }
            for row in &o.shape {
                check_len(n, row)?;
            }
            let shape = SpdMatrix::from_rows(&o.shape)?;
            obstacles.push(Obstacle::new(&c - &target, shape)?);
            let mut ov = o.params.clone().unwrap_or_default();
            if let Some(p1) = &ov.p1 {
                ov.p1 = Some((check_len(n, p1)? - &target).as_slice().to_vec());
            }
            if let Some(axis) = &ov.rotation_axis {
                check_len(n, axis)?;
            }
            overrides.push(ov);
        }
        let opts = TuneOptions {
            vehicle_radius: self.vehicle_radius,
            delta_floor: self.tuning.delta_floor,
            max_retries: self.tuning.max_retries.unwrap_or(TuneOptions::default().max_retries),
            execution: exec,
            ..TuneOptions::default()
        };
        let tuned = auto_tune(&obstacles, &overrides, &opts)?;
        let w = &tuned.workspace;

        let mut initial_conditions = Vec::with_capacity(self.initial_conditions.len());
        for x0 in &self.initial_conditions {
            let x = check_len(n, x0)? - &target;
            if !in_workspace(w, &x) {
                return Err(Error::UnsafeStart(x0.clone()));
            }
            initial_conditions.push(x);
        }

        let seed = self.solver.seed.unwrap_or(DEFAULT_SEED);
        let policy = self.solver.policy.unwrap_or_default();
        let d = SolverConfig::default();
        let solver = SolverConfig {
            step: self.solver.step.unwrap_or(d.step),
            boundary_tol: self.solver.boundary_tol.unwrap_or(d.boundary_tol),
            t_max: self.solver.t_max.unwrap_or(d.t_max),
            stop_radius: self.solver.stop_radius.unwrap_or(d.stop_radius),
            max_jumps: self.solver.max_jumps,
            policy: match policy {
                PolicyName::Margin => JumpPolicy::Margin,
                PolicyName::Random => JumpPolicy::Random { seed },
            },
        };
        solver.validate()?;
        Ok(Scenario {
            name: name.to_string(),
            target,
            tuned,
            gains,
            initial_conditions,
            solver,
            seed,
            policy,
            vehicle_radius: self.vehicle_radius,
        })
    }
}

/// Reads, validates and tunes a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    ScenarioFile::parse(&text)?.build(name, Execution::default())
}

/// CSV header for an `n`-dimensional trajectory.
pub fn csv_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = ["t", "j", "i", "m"].iter().map(|s| s.to_string()).collect();
    h.extend((1..=n).map(|k| format!("x{k}")));
    h
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the samples as CSV, translated by `offset`. Indices are 1-based.
pub fn write_trajectory_csv<W: std::io::Write>(tr: &Trajectory, offset: &Vector, out: W) -> Result<()> {
    write_samples_csv(&tr.samples, offset, out)
}

pub fn write_samples_csv<W: std::io::Write>(samples: &[Sample], offset: &Vector, out: W) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let io = |e: csv::Error| Error::Io(e.into());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(offset.len())).map_err(io)?;
    for s in samples {
        let mut rec = vec![fmt_f64(s.t), s.j.to_string(), (s.i + 1).to_string(), s.m.value().to_string()];
        rec.extend((&s.x + offset).iter().map(|&x| fmt_f64(x)));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_trajectory(tr: &Trajectory, offset: &Vector, path: &Path) -> Result<()> {
    write_trajectory_csv(tr, offset, fs::File::create(path)?)
}

/// Parses a trajectory CSV, rejecting any header other than the exact schema.
/// Indices come back 0-based; positions stay in the file's frame.
pub fn read_trajectory_csv<R: std::io::Read>(input: R) -> Result<Vec<Sample>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let n = header.len().saturating_sub(4);
    let want = csv_header(n);
    if n == 0 || header.iter().ne(want.iter().map(String::as_str)) {
        return Err(Error::Parse(format!(
            "bad trajectory header {:?}, expected t,j,i,m,x1..xn",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", row + 1));
        let f = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(&want[k]));
        let i: usize = rec[2].parse().map_err(|_| bad("i"))?;
        if i == 0 {
            return Err(bad("i"));
        }
        out.push(Sample {
            t: f(0)?,
            j: rec[1].parse().map_err(|_| bad("j"))?,
            i: i - 1,
            m: Mode::from_value(rec[3].parse().map_err(|_| bad("m"))?)?,
            x: Vector::from_iterator(n, (4..4 + n).map(f).collect::<Result<Vec<_>>>()?),
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(out)
}

pub fn import_trajectory(path: &Path) -> Result<Vec<Sample>> {
    read_trajectory_csv(fs::File::open(path)?)
}

/// An obstacle and its parameters in the scenario frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSummary {
    pub center: Vec<f64>,
    pub shape: Vec<Vec<f64>>,
    pub params: ObstacleParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub file: String,
    pub x0: Vec<f64>,
    pub final_norm: Option<f64>,
    pub jump_count: usize,
    pub min_clearance: Option<f64>,
    pub max_control: Option<f64>,
    pub wall_time_s: f64,
    pub termination: Option<Termination>,
    pub report: Option<TrajectoryReport>,
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
}

/// Everything a run produced except the sample rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub dimension: usize,
    pub target: Vec<f64>,
    pub gains: Gains,
    pub solver: SolverConfig,
    pub seed: u64,
    pub obstacles: Vec<ObstacleSummary>,
    /// Values relative to the target.
    pub tuning: TuningReport,
    pub control_bound: f64,
    pub runs: Vec<RunRecord>,
    pub checks: Vec<CheckLine>,
    pub passed: bool,
}

impl RunSummary {
    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }

    pub fn from_text(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Result of simulating every initial condition of a scenario.
#[derive(Debug)]
pub struct ScenarioRun {
    pub trajectories: Vec<Result<Trajectory>>,
    pub wall_times: Vec<f64>,
}

pub fn run_scenario(sc: &Scenario, exec: Execution) -> ScenarioRun {
    let w = sc.workspace();
    let timed: Vec<(Result<Trajectory>, f64)> = exec.map(&sc.initial_conditions, |x0| {
        let start = Instant::now();
        let tr = simulate(w, &sc.gains, x0, &sc.solver);
        (tr, start.elapsed().as_secs_f64())
    });
    let (trajectories, wall_times) = timed.into_iter().unzip();
    ScenarioRun {
        trajectories,
        wall_times,
    }
}

fn shifted(v: &Vector, by: &Vector) -> Vec<f64> {
    (v + by).as_slice().to_vec()
}

pub fn trajectory_file_name(k: usize) -> String {
    format!("traj_{}.csv", k + 1)
}

/// Builds the summary of a run.
pub fn summarize(sc: &Scenario, run: &ScenarioRun) -> RunSummary {
    let w = sc.workspace();
    let q = &sc.target;
    let mut runs = Vec::with_capacity(run.trajectories.len());
    for (k, (tr, &wall)) in run.trajectories.iter().zip(&run.wall_times).enumerate() {
        let x0 = shifted(&sc.initial_conditions[k], q);
        let file = trajectory_file_name(k);
        runs.push(match tr {
            Ok(tr) => {
                let rep = check_trajectory(tr, w, &sc.gains);
                RunRecord {
                    index: k + 1,
                    file,
                    x0,
                    final_norm: Some(tr.monitors.final_norm),
                    jump_count: tr.jump_count(),
                    min_clearance: Some(tr.monitors.min_clearance),
                    max_control: Some(tr.monitors.max_control),
                    wall_time_s: wall,
                    termination: Some(tr.termination),
                    passed: rep.passed(),
                    report: Some(rep),
                    error: None,
                }
            }
            Err(e) => RunRecord {
                index: k + 1,
                file,
                x0,
                final_norm: None,
                jump_count: 0,
                min_clearance: None,
                max_control: None,
                wall_time_s: wall,
                termination: None,
                report: None,
                error: Some(e.to_string()),
                passed: false,
            },
        });
    }
    let tuning = sc.tuned.report.clone();
    let mut checks = vec![
        CheckLine {
            name: "parameter validation".into(),
            passed: validate_params(w, true).is_empty(),
        },
        CheckLine {
            name: "weak disjointness".into(),
            passed: tuning.weak_disjoint,
        },
        CheckLine {
            name: "dilated disjointness".into(),
            passed: tuning.dilated_disjoint,
        },
        CheckLine {
            name: "escape regions clear".into(),
            passed: tuning.ri_disjoint,
        },
    ];
    for r in &runs {
        checks.push(CheckLine {
            name: format!("trajectory {}", r.index),
            passed: r.passed,
        });
    }
    let obstacles = w
        .obstacles()
        .iter()
        .zip(w.params())
        .map(|(o, p)| {
            let mut params = p.clone();
            params.p1 = &params.p1 + q;
            params.pm1 = &params.pm1 + q;
            ObstacleSummary {
                center: shifted(o.center(), q),
                shape: o.shape().to_rows(),
                params,
            }
        })
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    RunSummary {
        scenario: sc.name.clone(),
        dimension: sc.dim(),
        target: q.as_slice().to_vec(),
        gains: sc.gains,
        solver: sc.solver.clone(),
        seed: sc.seed,
        obstacles,
        tuning,
        control_bound: control_bound(w, &sc.gains),
        runs,
        checks,
        passed,
    }
}

/// Writes `traj_<k>.csv` for every successful run and `summary.txt` into
/// `dir`, returning the written paths.
pub fn write_run(sc: &Scenario, run: &ScenarioRun, summary: &RunSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (k, tr) in run.trajectories.iter().enumerate() {
        if let Ok(tr) = tr {
            let path = dir.join(trajectory_file_name(k));
            export_trajectory(tr, &sc.target, &path)?;
            written.push(path);
        }
    }
    let path = dir.join("summary.txt");
    fs::write(&path, summary.to_text())?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE: &str = r#"
dimension = 2
initial_conditions = [[8.0, 0.0], [0.5, 0.0]]

[gains]
k0 = 0.25
k1 = 0.25
km1 = 0.25

[[obstacles]]
center = [4.0, 0.0]
shape = [[1.0, 0.0], [0.0, 1.0]]
"#;

    #[test]
    fn minimal_file_tunes() {
        let sc = ScenarioFile::parse(SINGLE).unwrap().build("single", Execution::Sequential).unwrap();
        assert_eq!(sc.workspace().len(), 1);
        assert_eq!(sc.solver, SolverConfig::default());
        assert_eq!(sc.seed, DEFAULT_SEED);
        assert!(sc.tuned.report.violations.is_empty());
    }

    #[test]
    fn assumption_errors_are_named() {
        let inside = SINGLE.replace("center = [4.0, 0.0]", "center = [0.5, 0.0]");
        let err = ScenarioFile::parse(&inside).unwrap().build("x", Execution::Sequential).unwrap_err();
        assert!(matches!(err, Error::AssumptionViolated { assumption: "Assumption 2", .. }), "{err}");

        let two = format!("{SINGLE}\n[[obstacles]]\ncenter = [5.0, 0.0]\nshape = [[1.0, 0.0], [0.0, 1.0]]\n");
        let err = ScenarioFile::parse(&two).unwrap().build("x", Execution::Sequential).unwrap_err();
        assert!(matches!(err, Error::AssumptionViolated { assumption: "Assumption 3", .. }), "{err}");
    }

    #[test]
    fn malformed_files_rejected() {
        let bad_dim = SINGLE.replace("[[8.0, 0.0], [0.5, 0.0]]", "[[8.0, 0.0, 1.0]]");
        assert!(matches!(
            ScenarioFile::parse(&bad_dim).unwrap().build("x", Execution::Sequential),
            Err(Error::DimensionMismatch { .. })
        ));
        let not_spd = SINGLE.replace("[[1.0, 0.0], [0.0, 1.0]]", "[[1.0, 2.0], [2.0, 1.0]]");
        assert!(matches!(
            ScenarioFile::parse(&not_spd).unwrap().build("x", Execution::Sequential),
            Err(Error::NonSpdMatrix(_))
        ));
        assert!(matches!(ScenarioFile::parse("dimension = "), Err(Error::Parse(_))));
        assert!(matches!(ScenarioFile::parse(&format!("{SINGLE}\nbogus = 1\n")), Err(Error::Parse(_))));
        let unsafe_start = SINGLE.replace("[0.5, 0.0]]", "[4.0, 0.0]]");
        assert!(matches!(
            ScenarioFile::parse(&unsafe_start).unwrap().build("x", Execution::Sequential),
            Err(Error::UnsafeStart(_))
        ));
    }

    #[test]
    fn csv_round_trip_and_jump_rows() {
        let sc = ScenarioFile::parse(SINGLE).unwrap().build("single", Execution::Sequential).unwrap();
        let tr = simulate(sc.workspace(), &sc.gains, &sc.initial_conditions[0], &sc.solver).unwrap();
        let q = Vector::from_column_slice(&[0.25, -1.0]);
        let mut buf = Vec::new();
        write_trajectory_csv(&tr, &q, &mut buf).unwrap();
        let back = read_trajectory_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), tr.samples.len());
        for (a, b) in tr.samples.iter().zip(&back) {
            assert_eq!((a.t.to_bits(), a.j, a.i, a.m), (b.t.to_bits(), b.j, b.i, b.m));
            assert_eq!(&a.x + &q, b.x);
        }
        let jumps: Vec<_> = back.windows(2).filter(|p| p[1].j != p[0].j).collect();
        assert_eq!(jumps.len(), 2);
        for p in jumps {
            assert_eq!((p[0].t, &p[0].x), (p[1].t, &p[1].x));
            assert_eq!(p[1].j, p[0].j + 1);
        }
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,j,i,m,x1,x2\n"));
    }

    #[test]
    fn header_is_strict() {
        assert!(matches!(read_trajectory_csv("t,j,i,m\n".as_bytes()), Err(Error::Parse(_))));
        assert!(matches!(read_trajectory_csv("t,j,i,mode,x1\n0,0,1,0,1\n".as_bytes()), Err(Error::Parse(_))));
        assert!(matches!(read_trajectory_csv("t,j,i,m,x1\n".as_bytes()), Err(Error::EmptyTrajectory)));
        let empty = Trajectory {
            samples: vec![],
            jumps: vec![],
            monitors: crate::simulator::Monitors {
                min_clearance: 1.0,
                min_clearance_obstacle: 0,
                max_control: 0.0,
                final_norm: 0.0,
            },
            termination: Termination::Converged,
            step: 1e-3,
            stop_radius: 1e-2,
        };
        assert!(matches!(
            write_trajectory_csv(&empty, &Vector::zeros(2), Vec::new()),
            Err(Error::EmptyTrajectory)
        ));
    }

    #[test]
    fn summary_round_trips() {
        let sc = ScenarioFile::parse(SINGLE).unwrap().build("single", Execution::Sequential).unwrap();
        let run = run_scenario(&sc, Execution::default());
        let s = summarize(&sc, &run);
        assert!(s.passed, "{:?}", s.checks);
        assert_eq!(s.runs[0].jump_count, 2);
        assert_eq!(s.runs[1].jump_count, 0);
        let back = RunSummary::from_text(&s.to_text()).unwrap();
        assert_eq!(back.runs.len(), 2);
        assert_eq!(back.obstacles, s.obstacles);
    }
}
