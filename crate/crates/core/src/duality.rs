//! Duality between a system node and its weighted adjoint: the time-reversed
//! pairing identity, and gain inequalities between primal and dual checked
//! as one-sided bracket comparisons.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::kernel::MatrixMeasure;
use crate::signal::{pairing, Lp, Signal, TimeGrid, ValueSpace};
use crate::stability::{gain_bracket, kernel_gain, GainReport, UpperBound};
use crate::sysnode::{catalogue_system, DiscreteSystemNode};

/// Tolerance for identities that hold exactly on the grid.
pub const EXACT_TOL: f64 = 1e-10;
/// Slack for `lower ≤ upper` comparisons between brackets.
pub const BRACKET_TOL: f64 = 1e-9;

fn random_signal(rng: &mut ChaCha8Rng, grid: TimeGrid, space: &ValueSpace) -> Result<Signal> {
    let values = (0..grid.n_steps() * space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Signal::new(grid, space.clone(), values)
}

/// `(pairing(y, u^d), pairing(u, y^d))` with `y`, `y^d` the zero-state
/// responses of `sys` to `u` and of `dual(sys)` to `u^d`.
pub fn pairing_sides(sys: &DiscreteSystemNode, u: &Signal, ud: &Signal) -> Result<(f64, f64)> {
    let y = sys.respond(u)?;
    let yd = sys.dual().respond(ud)?;
    Ok((pairing(&y, ud)?, pairing(u, &yd)?))
}

/// Largest `|pairing(y, u^d) - pairing(u, y^d)| / (1 + |pairing(y, u^d)|)`
/// over `trials` random input pairs; trial `i` draws from seed `seed + i`.
pub fn pairing_identity_check(sys: &DiscreteSystemNode, trials: usize, horizon: usize, seed: u64) -> Result<f64> {
    let grid = TimeGrid::new(sys.dt(), horizon)?;
    let dual = sys.dual();
    let defects = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let u = random_signal(&mut rng, grid, sys.input_space())?;
            let ud = random_signal(&mut rng, grid, dual.input_space())?;
            let lhs = pairing(&sys.respond(&u)?, &ud)?;
            let rhs = pairing(&u, &dual.respond(&ud)?)?;
            Ok((lhs - rhs).abs() / (1.0 + lhs.abs()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// Max defect of the second-difference commutation
/// `Δ²(respond(u)) = respond(Δ²u)`, relative to `1 + max|Δ²y|`.
pub fn second_difference_residual(sys: &DiscreteSystemNode, u: &Signal) -> Result<f64> {
    let lhs = sys.respond(u)?.second_difference();
    let rhs = sys.respond(&u.second_difference())?;
    let scale = lhs.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(lhs.max_abs_diff(&rhs) / (1.0 + scale))
}

/// `|induced_gain(h, p) - kernel gain of dual(from_kernel(h)) at p'|`,
/// maximized over `(p, p') ∈ {(1, ∞), (∞, 1)}`.
pub fn kernel_duality_defect(h: &MatrixMeasure, dt: f64) -> Result<f64> {
    let sys = DiscreteSystemNode::from_kernel(h, dt)?;
    let dual = sys.dual();
    let horizon = h.max_lag(dt)? + 2;
    let one = (h.induced_gain(Lp::One).value - kernel_gain(&dual, Lp::Inf, horizon)?.lower_bound).abs();
    let inf = (h.induced_gain(Lp::Inf).value - kernel_gain(&dual, Lp::One, horizon)?.lower_bound).abs();
    Ok(one.max(inf))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    /// The inequality as checked, `lhs ≤ rhs + tol`.
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    /// `rhs + tolerance - lhs`; nonnegative iff passed.
    pub margin: f64,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn new(check: &str, inequality: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs + tolerance - lhs;
        Self {
            check: check.into(),
            inequality: inequality.into(),
            lhs,
            rhs,
            tolerance,
            margin,
            passed: margin >= 0.0,
            notes: Vec::new(),
        }
    }

    fn with_note(mut self, note: &str) -> Self {
        self.notes.push(note.into());
        self
    }
}

const RN_NOTE: &str = "finite-dimensional spaces have the Radon-Nikodým property, so continuous and essentially bounded dual inputs are not distinguished";

/// Dual `L^1` lower bound against the primal `L^∞` upper bound.
pub fn bibo_to_lilo_check(sys: &DiscreteSystemNode, horizon: usize, seed: u64) -> Result<Verdict> {
    let primal = gain_bracket(sys, Lp::Inf, horizon, seed)?;
    let dual = gain_bracket(&sys.dual(), Lp::One, horizon, seed)?;
    Ok(bibo_to_lilo(&primal, &dual))
}

/// Dual `L^∞` lower bound against the primal `L^1` upper bound.
pub fn lilo_to_bibo_check(sys: &DiscreteSystemNode, horizon: usize, seed: u64) -> Result<Verdict> {
    let primal = gain_bracket(sys, Lp::One, horizon, seed)?;
    let dual = gain_bracket(&sys.dual(), Lp::Inf, horizon, seed)?;
    Ok(lilo_to_bibo(&primal, &dual))
}

fn bibo_to_lilo(primal_inf: &GainReport, dual_one: &GainReport) -> Verdict {
    Verdict::new(
        "bibo-implies-dual-lilo",
        "dual L1 lower <= primal Linf upper",
        dual_one.lower_bound,
        primal_inf.upper_bound.value(),
        BRACKET_TOL,
    )
}

fn lilo_to_bibo(primal_one: &GainReport, dual_inf: &GainReport) -> Verdict {
    Verdict::new(
        "lilo-implies-dual-bibo",
        "dual Linf lower <= primal L1 upper",
        dual_inf.lower_bound,
        primal_one.upper_bound.value(),
        BRACKET_TOL,
    )
    .with_note(RN_NOTE)
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub system: String,
    pub grid_size: usize,
    /// Horizon in steps; every gain and the pairing check use it.
    pub horizon_steps: usize,
    pub pairing_residual: f64,
    pub primal_gain_infty: GainReport,
    pub dual_gain_one: GainReport,
    pub primal_gain_one: GainReport,
    pub dual_gain_infty: GainReport,
    pub verdicts: Vec<Verdict>,
}

impl DualityReport {
    /// Failed checks, one line each.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.pairing_residual.is_nan() || self.pairing_residual > EXACT_TOL {
            out.push(format!(
                "{} (M = {}): pairing residual {:e} > {EXACT_TOL:e}",
                self.system, self.grid_size, self.pairing_residual
            ));
        }
        for v in self.verdicts.iter().filter(|v| !v.passed) {
            out.push(format!(
                "{} (M = {}): {} failed, {} vs {} (margin {:e})",
                self.system, self.grid_size, v.check, v.lhs, v.rhs, v.margin
            ));
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Pairing residual, the four gain brackets and all dual-gain verdicts for
/// one system.
pub fn duality_report(
    name: &str,
    grid_size: usize,
    sys: &DiscreteSystemNode,
    trials: usize,
    seed: u64,
) -> Result<DualityReport> {
    let horizon = sys.default_horizon()?;
    let dual = sys.dual();
    let pairing_residual = pairing_identity_check(sys, trials, horizon, seed)?;
    let primal_inf = gain_bracket(sys, Lp::Inf, horizon, seed)?;
    let primal_one = gain_bracket(sys, Lp::One, horizon, seed)?;
    let dual_inf = gain_bracket(&dual, Lp::Inf, horizon, seed)?;
    let dual_one = gain_bracket(&dual, Lp::One, horizon, seed)?;

    let mut verdicts = vec![
        bibo_to_lilo(&primal_inf, &dual_one),
        lilo_to_bibo(&primal_one, &dual_inf),
        Verdict::new(
            "dual-bibo-implies-lilo",
            "primal L1 lower <= dual Linf upper",
            primal_one.lower_bound,
            dual_inf.upper_bound.value(),
            BRACKET_TOL,
        ),
        Verdict::new(
            "dual-lilo-implies-bibo",
            "primal Linf lower <= dual L1 upper",
            primal_inf.lower_bound,
            dual_one.upper_bound.value(),
            BRACKET_TOL,
        ),
    ];
    if sys.input_space().is_coordinate() && sys.output_space().is_coordinate() {
        // kernel certificates on both sides: equalities, not just brackets
        let d1 = (primal_inf.upper_bound.value() - dual_one.upper_bound.value()).abs();
        let d2 = (primal_one.upper_bound.value() - dual_inf.upper_bound.value()).abs();
        verdicts.push(Verdict::new(
            "kernel-gain-duality",
            "|primal Linf - dual L1| + |primal L1 - dual Linf| <= tol",
            d1 + d2,
            0.0,
            EXACT_TOL,
        ));
    }
    Ok(DualityReport {
        system: name.into(),
        grid_size,
        horizon_steps: horizon,
        pairing_residual,
        primal_gain_infty: primal_inf,
        dual_gain_one: dual_one,
        primal_gain_one: primal_one,
        dual_gain_infty: dual_inf,
        verdicts,
    })
}

#[derive(Debug, Clone)]
pub struct NamedSystem {
    pub name: String,
    pub grid_size: usize,
    pub system: DiscreteSystemNode,
}

impl NamedSystem {
    pub fn catalogue(name: &str, grid_size: usize) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            grid_size,
            system: catalogue_system(name, grid_size)?,
        })
    }
}

/// One [`duality_report`] per system, computed concurrently, in input order.
pub fn sweep_duality(systems: &[NamedSystem], trials: usize, seed: u64) -> Result<Vec<DualityReport>> {
    systems
        .par_iter()
        .map(|s| duality_report(&s.name, s.grid_size, &s.system, trials, seed))
        .collect()
}

/// Lower bounds of one gain (`side`, `p`) of one system across grid sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthCell {
    pub system: String,
    pub side: &'static str,
    pub p: Lp,
    pub grid_sizes: Vec<usize>,
    pub lower_bounds: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    /// `lower(M_{i+1}) / lower(M_i)`.
    pub growth: Vec<f64>,
    /// Every step grows by `sqrt(M_{i+1}/M_i)` within `1e-6`.
    pub divergent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityMatrix {
    pub reports: Vec<DualityReport>,
    pub growth: Vec<GrowthCell>,
    /// Systems whose `L^1` upper bound stays `≤ 1` at every grid size while
    /// their `L^∞` lower bound diverges.
    pub lilo_not_bibo: Vec<String>,
}

const GROWTH_TOL: f64 = 1e-6;

fn gain_of<'a>(r: &'a DualityReport, side: &str, p: Lp) -> &'a GainReport {
    match (side, p) {
        ("primal", Lp::Inf) => &r.primal_gain_infty,
        ("primal", _) => &r.primal_gain_one,
        (_, Lp::Inf) => &r.dual_gain_infty,
        _ => &r.dual_gain_one,
    }
}

fn gain_of_mut<'a>(r: &'a mut DualityReport, side: &str, p: Lp) -> &'a mut GainReport {
    match (side, p) {
        ("primal", Lp::Inf) => &mut r.primal_gain_infty,
        ("primal", _) => &mut r.primal_gain_one,
        (_, Lp::Inf) => &mut r.dual_gain_infty,
        _ => &mut r.dual_gain_one,
    }
}

/// Runs the catalogue entries `names` at every grid size, tracks each gain's
/// lower bound under refinement and marks square-root growth as
/// [`UpperBound::UnboundedEvidence`].
pub fn duality_matrix(names: &[&str], grid_sizes: &[usize], trials: usize, seed: u64) -> Result<DualityMatrix> {
    let mut sizes = grid_sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let systems = names
        .iter()
        .flat_map(|n| sizes.iter().map(move |&m| NamedSystem::catalogue(n, m)))
        .collect::<Result<Vec<_>>>()?;
    let mut reports = sweep_duality(&systems, trials, seed)?;

    let mut growth = Vec::new();
    for name in names {
        let idx: Vec<usize> = (0..reports.len()).filter(|&i| reports[i].system == *name).collect();
        for side in ["primal", "dual"] {
            for p in [Lp::Inf, Lp::One] {
                let lower: Vec<f64> = idx.iter().map(|&i| gain_of(&reports[i], side, p).lower_bound).collect();
                let upper: Vec<f64> =
                    idx.iter().map(|&i| gain_of(&reports[i], side, p).upper_bound.value()).collect();
                let ratios: Vec<f64> = lower.windows(2).map(|w| w[1] / w[0]).collect();
                let divergent = !ratios.is_empty()
                    && ratios.iter().enumerate().all(|(k, r)| {
                        let expected = (sizes[k + 1] as f64 / sizes[k] as f64).sqrt();
                        (r - expected).abs() <= GROWTH_TOL
                    });
                if divergent {
                    for &i in &idx {
                        let g = gain_of_mut(&mut reports[i], side, p);
                        g.upper_bound = UpperBound::UnboundedEvidence(g.upper_bound.value());
                        g.notes.push("lower bound grows like sqrt(M) under grid refinement".into());
                    }
                }
                growth.push(GrowthCell {
                    system: name.to_string(),
                    side,
                    p,
                    grid_sizes: sizes.clone(),
                    lower_bounds: lower,
                    upper_bounds: upper,
                    growth: ratios,
                    divergent,
                });
            }
        }
    }
    let lilo_not_bibo = names
        .iter()
        .filter(|n| {
            let cell = |p: Lp| growth.iter().find(|c| c.system == **n && c.side == "primal" && c.p == p);
            match (cell(Lp::One), cell(Lp::Inf)) {
                (Some(one), Some(inf)) => {
                    inf.divergent && one.upper_bounds.iter().all(|&u| u <= 1.0 + BRACKET_TOL)
                }
                _ => false,
            }
        })
        .map(|n| n.to_string())
        .collect();
    Ok(DualityMatrix {
        reports,
        growth,
        lilo_not_bibo,
    })
}

fn fmt_bracket(g: &GainReport) -> String {
    match g.upper_bound {
        UpperBound::Finite(u) => format!("[{:.6}, {:.6}]", g.lower_bound, u),
        UpperBound::UnboundedEvidence(u) => format!("[{:.6}, {:.6}] unbounded-evidence", g.lower_bound, u),
    }
}

/// Markdown summary table, one row per report.
pub fn markdown_table(reports: &[DualityReport]) -> String {
    let mut out = String::from(
        "| system | M | steps | pairing residual | primal L∞ | primal L¹ | dual L∞ | dual L¹ | checks |\n\
         |---|---|---|---|---|---|---|---|---|\n",
    );
    for r in reports {
        let passed = r.verdicts.iter().filter(|v| v.passed).count();
        writeln!(
            out,
            "| {} | {} | {} | {:.1e} | {} | {} | {} | {} | {}/{} |",
            r.system,
            r.grid_size,
            r.horizon_steps,
            r.pairing_residual,
            fmt_bracket(&r.primal_gain_infty),
            fmt_bracket(&r.primal_gain_one),
            fmt_bracket(&r.dual_gain_infty),
            fmt_bracket(&r.dual_gain_one),
            passed,
            r.verdicts.len()
        )
        .unwrap();
    }
    out
}

impl DualityMatrix {
    pub fn failures(&self) -> Vec<String> {
        self.reports.iter().flat_map(|r| r.failures()).collect()
    }

    pub fn markdown(&self) -> String {
        let mut out = markdown_table(&self.reports);
        if !self.lilo_not_bibo.is_empty() {
            writeln!(out, "\nL¹-stable but L∞-divergent under refinement: {}", self.lilo_not_bibo.join(", ")).unwrap();
        }
        out
    }
}
