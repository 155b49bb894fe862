//! Batch commands behind the `iostab` binary. Each command renders one
//! artifact (CSV or JSON) and a list of failed checks; nothing here computes
//! beyond calling the library and formatting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::json;

use crate::duality::{sweep_duality, NamedSystem, BRACKET_TOL, EXACT_TOL};
use crate::error::{Error, Result};
use crate::kernel::{catalogue_kernel, closed_form_laplace, laplace_csv, KERNEL_CATALOGUE};
use crate::signal::{band_cells, Lp};
use crate::stability::{
    control_admissibility, counterexample_sweep, gain_bracket, observation_admissibility, AdmissibilityReport,
    ControlFlavor, DEFAULT_SEED,
};
use crate::sysnode::{catalogue_system, DiscreteSystemNode, CATALOGUE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK: i32 = 2;

/// Witness replays must reproduce the reported lower bound to this
/// relative accuracy.
pub const WITNESS_TOL: f64 = 1e-12;
/// Closed-form Laplace comparison at `dt = 1e-3`.
pub const LAPLACE_TOL: f64 = 5e-3;
/// Difference relation between kernel and realization transfer functions.
pub const DIFFERENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SweepCounterexample,
    Gains,
    CheckDuality,
    Admissibility,
    LaplaceCheck,
    Catalogue,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SweepCounterexample => "sweep-counterexample",
            Command::Gains => "gains",
            Command::CheckDuality => "check-duality",
            Command::Admissibility => "admissibility",
            Command::LaplaceCheck => "laplace-check",
            Command::Catalogue => "catalogue",
        }
    }

    /// Grid size used when none is given: `1000` (so `dt = 1e-3`) for
    /// `laplace-check`, `64` otherwise.
    pub fn default_grid_size(&self) -> usize {
        match self {
            Command::LaplaceCheck => 1000,
            _ => 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub grid_size: usize,
    pub eps_list: Vec<f64>,
    /// Horizon in steps; `None` uses the system's default horizon.
    pub horizon: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub probes: usize,
    /// Catalogue system; `None` means every entry where that makes sense.
    pub system: Option<String>,
    pub kernel: String,
    pub s_points: Vec<Complex64>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            grid_size: command.default_grid_size(),
            eps_list: vec![1.0, 0.25, 0.0625],
            horizon: None,
            seed: DEFAULT_SEED,
            trials: 100,
            probes: 32,
            system: None,
            kernel: "delay1".into(),
            s_points: vec![Complex64::new(0.0, 0.0)],
            output_path: None,
            format: Format::Json,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 2 {
            return Err(Error::InvalidArgument(format!("grid size must be >= 2, got {}", self.grid_size)));
        }
        if self.command == Command::SweepCounterexample {
            if self.eps_list.is_empty() {
                return Err(Error::InvalidArgument("--eps needs at least one value".into()));
            }
            for &e in &self.eps_list {
                band_cells(self.grid_size, e)?;
            }
        }
        if self.horizon == Some(0) {
            return Err(Error::InvalidArgument("horizon must be at least one step".into()));
        }
        if let Some(name) = &self.system {
            catalogue_system(name, self.grid_size)?;
        }
        Ok(())
    }

    fn systems(&self) -> Vec<String> {
        match &self.system {
            Some(s) => vec![s.clone()],
            None => CATALOGUE.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn horizon_for(&self, sys: &DiscreteSystemNode) -> Result<usize> {
        match self.horizon {
            Some(h) => Ok(h),
            None => sys.default_horizon(),
        }
    }
}

/// A rendered artifact and the checks it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifact: String,
    /// Extra files (e.g. gain witnesses) as `(path, contents)`.
    pub side_files: Vec<(PathBuf, String)>,
    pub failures: Vec<String>,
}

fn to_json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` (`j` also accepted).
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::InvalidArgument(format!("cannot parse complex number `{text}`"));
    let num = |s: &str| -> Result<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(t.parse::<f64>().map_err(|_| bad())?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex64::new(body[..k].parse::<f64>().map_err(|_| bad())?, num(&body[k..])?)),
        None => Ok(Complex64::new(0.0, num(body)?)),
    }
}

fn witness_path(output: &Path, p: Lp, system: &str) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("gains");
    output.with_file_name(format!("{stem}.{system}.witness-{}.csv", p.as_str()))
}

fn sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let table = counterexample_sweep(cfg.grid_size, &cfg.eps_list)?;
    let artifact = match cfg.format {
        Format::Csv => table.to_csv(),
        Format::Json => to_json_text(&serde_json::to_value(&table).expect("table serializes")),
    };
    Ok(Outcome {
        artifact,
        side_files: Vec::new(),
        failures: table.failures(1e-9),
    })
}

fn gains(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut side_files = Vec::new();
    let mut json_reports = Vec::new();
    let mut csv = String::from("system,p,lower_bound,upper_bound,horizon\n");
    for name in cfg.systems() {
        let sys = catalogue_system(&name, cfg.grid_size)?;
        let horizon = cfg.horizon_for(&sys)?;
        for p in [Lp::Inf, Lp::One] {
            let rep = gain_bracket(&sys, p, horizon, cfg.seed)?;
            let replay = rep.replay(&sys)?;
            if rep.lower_bound > rep.upper_bound.value() + BRACKET_TOL {
                failures.push(format!("{name} p={}: lower {} > upper {}", p.as_str(), rep.lower_bound, rep.upper_bound.value()));
            }
            if (replay - rep.lower_bound).abs() > WITNESS_TOL * rep.lower_bound.abs().max(1.0) {
                failures.push(format!("{name} p={}: witness replays to {replay}, reported {}", p.as_str(), rep.lower_bound));
            }
            let wfile = cfg.output_path.as_deref().map(|o| witness_path(o, p, &name));
            if let Some(w) = &wfile {
                side_files.push((w.clone(), rep.witness.to_csv()));
            }
            let mut v = rep.to_json(wfile.as_deref().and_then(|w| w.to_str()));
            v["system"] = json!(name);
            json_reports.push(v);
            writeln!(
                csv,
                "{name},{},{},{},{}",
                p.as_str(),
                rep.lower_bound,
                serde_json::to_value(rep.upper_bound).expect("bound serializes").to_string().trim_matches('"'),
                rep.horizon
            )
            .unwrap();
        }
    }
    let artifact = match cfg.format {
        Format::Csv => csv,
        Format::Json => to_json_text(&json!(json_reports)),
    };
    Ok(Outcome {
        artifact,
        side_files,
        failures,
    })
}

fn check_duality(cfg: &ExperimentConfig) -> Result<Outcome> {
    let systems = cfg
        .systems()
        .iter()
        .map(|n| NamedSystem::catalogue(n, cfg.grid_size))
        .collect::<Result<Vec<_>>>()?;
    let reports = sweep_duality(&systems, cfg.trials, cfg.seed)?;
    let failures: Vec<String> = reports.iter().flat_map(|r| r.failures()).collect();
    let residual = reports.iter().map(|r| r.pairing_residual).fold(0.0, f64::max);
    let artifact = match cfg.format {
        Format::Json => to_json_text(&json!({
            "grid_size": cfg.grid_size,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "pairing_residual": residual,
            "pairing_tolerance": EXACT_TOL,
            "bracket_tolerance": BRACKET_TOL,
            "reports": reports,
            "failures": failures,
        })),
        Format::Csv => {
            let mut out = String::from(
                "system,grid_size,horizon_steps,pairing_residual,primal_inf_lower,primal_inf_upper,\
                 primal_one_lower,primal_one_upper,dual_inf_lower,dual_inf_upper,dual_one_lower,dual_one_upper,checks_passed,checks_total\n",
            );
            for r in &reports {
                let g = [&r.primal_gain_infty, &r.primal_gain_one, &r.dual_gain_infty, &r.dual_gain_one];
                write!(out, "{},{},{},{}", r.system, r.grid_size, r.horizon_steps, r.pairing_residual).unwrap();
                for x in g {
                    write!(out, ",{},{}", x.lower_bound, x.upper_bound.value()).unwrap();
                }
                writeln!(out, ",{},{}", r.verdicts.iter().filter(|v| v.passed).count(), r.verdicts.len()).unwrap();
            }
            out
        }
    };
    Ok(Outcome {
        artifact,
        side_files: Vec::new(),
        failures,
    })
}

fn bracket_failures(label: &str, r: &AdmissibilityReport, out: &mut Vec<String>) {
    if r.constant_lower > r.constant_upper + BRACKET_TOL {
        out.push(format!("{label}: lower {} > upper {}", r.constant_lower, r.constant_upper));
    }
    if let (Some(lo), Some(hi)) = (r.max_regularity_lower, r.max_regularity_upper) {
        if lo > r.constant_upper + BRACKET_TOL || r.constant_lower > hi + BRACKET_TOL {
            out.push(format!(
                "{label}: observation bracket [{}, {}] and maximal-regularity bracket [{lo}, {hi}] do not overlap",
                r.constant_lower, r.constant_upper
            ));
        }
    }
}

fn admissibility(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut entries = Vec::new();
    let mut csv = String::from(
        "system,kind,constant_lower,constant_upper,probe_count,horizon,max_regularity_lower,max_regularity_upper\n",
    );
    for name in cfg.systems() {
        let sys = catalogue_system(&name, cfg.grid_size)?;
        let horizon = cfg.horizon_for(&sys)?;
        let obs = observation_admissibility(&sys, horizon, cfg.probes, cfg.seed)?;
        let ctl = control_admissibility(&sys, ControlFlavor::C, horizon, cfg.probes, cfg.seed)?;
        bracket_failures(&format!("{name} observation"), &obs, &mut failures);
        bracket_failures(&format!("{name} control"), &ctl, &mut failures);
        for (kind, r) in [("observation", &obs), ("control", &ctl)] {
            writeln!(
                csv,
                "{name},{kind},{},{},{},{},{},{}",
                r.constant_lower,
                r.constant_upper,
                r.probe_count,
                r.horizon,
                opt(r.max_regularity_lower),
                opt(r.max_regularity_upper)
            )
            .unwrap();
        }
        entries.push(json!({ "system": name, "observation": obs, "control": ctl }));
    }
    let artifact = match cfg.format {
        Format::Csv => csv,
        Format::Json => to_json_text(&json!(entries)),
    };
    Ok(Outcome {
        artifact,
        side_files: Vec::new(),
        failures,
    })
}

fn laplace_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let dt = 1.0 / cfg.grid_size as f64;
    let h = catalogue_kernel(&cfg.kernel, dt)?;
    let real = DiscreteSystemNode::from_kernel(&h, dt)?;
    let mut failures = Vec::new();
    let mut points = Vec::new();
    let base = cfg.s_points[0];
    let (g0, t0) = (h.laplace(base), real.transfer(base)?);
    for &s in &cfg.s_points {
        let g = h.laplace(s);
        let closed = closed_form_laplace(&cfg.kernel, s)?;
        let closed_err = (&g - &closed).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let diff = (&g - &g0) - (real.transfer(s)? - &t0);
        let diff_err = diff.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if closed_err > LAPLACE_TOL {
            failures.push(format!("s = {s}: |L(h)(s) - closed form| = {closed_err:e} > {LAPLACE_TOL:e}"));
        }
        if diff_err > DIFFERENCE_TOL {
            failures.push(format!("s = {s}: difference relation defect {diff_err:e} > {DIFFERENCE_TOL:e}"));
        }
        let entries = |m: &nalgebra::DMatrix<Complex64>| -> Vec<Vec<[f64; 2]>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
        };
        points.push(json!({
            "s": [s.re, s.im],
            "G": entries(&g),
            "closed_form": entries(&closed),
            "closed_form_error": closed_err,
            "difference_defect": diff_err,
        }));
    }
    let artifact = match cfg.format {
        Format::Csv => laplace_csv(&h, &cfg.s_points),
        Format::Json => to_json_text(&json!({
            "kernel": cfg.kernel,
            "dt": dt,
            "reference_point": [base.re, base.im],
            "points": points,
            "failures": failures,
        })),
    };
    Ok(Outcome {
        artifact,
        side_files: Vec::new(),
        failures,
    })
}

fn catalogue(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut entries = Vec::new();
    let mut csv = String::from("name,kind,state_dim,input_dim,output_dim,input_norm,output_norm,dt,nilpotency_index\n");
    for name in CATALOGUE {
        let sys = catalogue_system(name, cfg.grid_size)?;
        let nil = sys.nilpotency_index();
        writeln!(
            csv,
            "{name},system,{},{},{},{},{},{},{}",
            sys.state_space().dim(),
            sys.input_space().dim(),
            sys.output_space().dim(),
            sys.input_space().kind().as_str(),
            sys.output_space().kind().as_str(),
            sys.dt(),
            nil.map_or(String::new(), |k| k.to_string())
        )
        .unwrap();
        entries.push(json!({
            "name": name,
            "kind": "system",
            "state_dim": sys.state_space().dim(),
            "input_dim": sys.input_space().dim(),
            "output_dim": sys.output_space().dim(),
            "input_norm": sys.input_space().kind().as_str(),
            "output_norm": sys.output_space().kind().as_str(),
            "dt": sys.dt(),
            "nilpotency_index": nil,
        }));
    }
    for name in KERNEL_CATALOGUE {
        let h = catalogue_kernel(name, 1.0 / cfg.grid_size as f64)?;
        writeln!(csv, "{name},kernel,,{},{},sup,sup,{},", h.cols(), h.rows(), 1.0 / cfg.grid_size as f64).unwrap();
        entries.push(json!({
            "name": name,
            "kind": "kernel",
            "input_dim": h.cols(),
            "output_dim": h.rows(),
            "gain_inf": h.induced_gain(Lp::Inf).value,
            "gain_one": h.induced_gain(Lp::One).value,
        }));
    }
    let artifact = match cfg.format {
        Format::Csv => csv,
        Format::Json => to_json_text(&json!(entries)),
    };
    Ok(Outcome {
        artifact,
        side_files: Vec::new(),
        failures: Vec::new(),
    })
}

/// Validates `cfg` and runs its command without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.command {
        Command::SweepCounterexample => sweep(cfg),
        Command::Gains => gains(cfg),
        Command::CheckDuality => check_duality(cfg),
        Command::Admissibility => admissibility(cfg),
        Command::LaplaceCheck => laplace_check(cfg),
        Command::Catalogue => catalogue(cfg),
    }
}

/// Runs `cfg`, writes the artifact to `output_path` (stdout otherwise) and
/// returns the exit status: [`EXIT_OK`], [`EXIT_USAGE`] for invalid
/// parameters, [`EXIT_CHECK`] when any check fails. Failed checks go to
/// stderr.
pub fn run(cfg: &ExperimentConfig) -> i32 {
    let outcome = match execute(cfg) {
        Ok(o) => o,
        Err(e @ (Error::Io(_) | Error::Parse { .. })) => {
            eprintln!("error: {e}");
            return EXIT_CHECK;
        }
        Err(e) => {
            eprintln!("usage error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cfg.output_path {
        Some(path) => std::fs::write(path, &outcome.artifact),
        None => {
            print!("{}", outcome.artifact);
            Ok(())
        }
    };
    let written = written.and_then(|_| outcome.side_files.iter().try_for_each(|(p, c)| std::fs::write(p, c)));
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return EXIT_CHECK;
    }
    if outcome.failures.is_empty() {
        EXIT_OK
    } else {
        for f in &outcome.failures {
            eprintln!("check failed: {f}");
        }
        EXIT_CHECK
    }
}
