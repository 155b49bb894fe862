//! BIBO (`p = ∞`) and LILO (`p = 1`) gain brackets.
//!
//! Every gain is reported as a bracket: the lower bound is the measured
//! output/input ratio of a concrete witness input, the upper bound a summed
//! operator-norm certificate over the simulated horizon. Coordinate
//! input/output spaces additionally admit the closed-form kernel gain.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::opnorm::convolution_gain_bound;
use crate::signal::{band_cells, u_epsilon, Lp, NormKind, Signal, TimeGrid, ValueSpace};
use crate::sysnode::{left_shift_distributed_input, DiscreteSystemNode};

/// Seed used by random probes unless overridden.
pub const DEFAULT_SEED: u64 = 0x5EED_0B1B;

/// Candidate functionals/directions enumerated one by one are capped here.
const MAX_BASIS_CANDIDATES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperBound {
    Finite(f64),
    /// The certificate grows under grid refinement; the value is the bound
    /// at the reported horizon and resolution.
    UnboundedEvidence(f64),
}

impl UpperBound {
    pub fn value(&self) -> f64 {
        match *self {
            UpperBound::Finite(v) | UpperBound::UnboundedEvidence(v) => v,
        }
    }

    pub fn is_unbounded_evidence(&self) -> bool {
        matches!(self, UpperBound::UnboundedEvidence(_))
    }
}

impl Serialize for UpperBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            UpperBound::Finite(v) => s.serialize_f64(*v),
            UpperBound::UnboundedEvidence(_) => s.serialize_str("unbounded-evidence"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GainReport {
    pub p: Lp,
    pub lower_bound: f64,
    pub upper_bound: UpperBound,
    /// Input attaining `lower_bound`, expressed in the gain-view input space.
    pub witness: Signal,
    /// Simulated horizon in time units.
    pub horizon: f64,
    pub notes: Vec<String>,
}

impl GainReport {
    /// JSON object with fields `p, lower_bound, upper_bound, horizon,
    /// witness_file, notes`.
    pub fn to_json(&self, witness_file: Option<&str>) -> serde_json::Value {
        json!({
            "p": self.p,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "horizon": self.horizon,
            "witness_file": witness_file,
            "notes": self.notes,
        })
    }

    /// Re-simulates the witness on `sys` and returns its output/input ratio.
    pub fn replay(&self, sys: &DiscreteSystemNode) -> Result<f64> {
        measured_ratio(&gain_system(sys, self.p)?, &self.witness, self.p)
    }
}

impl Serialize for GainReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json(None).serialize(s)
    }
}

/// `sys` with its coordinate input/output spaces read in the norms used for
/// an `L^p` gain (sup for `p = ∞`, plain 1-norm for `p = 1`).
pub fn gain_system(sys: &DiscreteSystemNode, p: Lp) -> Result<DiscreteSystemNode> {
    sys.with_io_spaces(sys.input_space().gain_view(p), sys.output_space().gain_view(p))
}

/// `‖y‖_{L^p} / ‖u‖_{L^p}` for the zero-state response (0 for `u = 0`).
pub fn measured_ratio(sys: &DiscreteSystemNode, u: &Signal, p: Lp) -> Result<f64> {
    let u = u.with_space(sys.input_space().clone())?;
    let un = u.lp_norm(p);
    if un == 0.0 {
        return Ok(0.0);
    }
    Ok(sys.respond(&u)?.lp_norm(p) / un)
}

fn check_gain_exponent(p: Lp) -> Result<()> {
    if p == Lp::Two {
        return Err(Error::InvalidArgument("gains are defined for p = 1 and p = ∞ only".into()));
    }
    Ok(())
}

fn signal_from_rows(grid: TimeGrid, space: &ValueSpace, rows: Vec<Vec<f64>>) -> Result<Signal> {
    Signal::new(grid, space.clone(), rows.into_iter().flatten().collect())
}

/// Closed-form gain for systems with coordinate input and output spaces:
/// `lower = upper = induced_gain(impulse_response(sys, horizon), p)`.
///
/// The witness is sign-aligned: for `p = ∞` it is `u_j = sign(C_{t*-j})`
/// along the worst row, `t*` the earliest time reaching the full row TV and
/// `sign(0) = +1`; for `p = 1` it is a unit impulse along the worst column.
pub fn kernel_gain(sys: &DiscreteSystemNode, p: Lp, horizon: usize) -> Result<GainReport> {
    check_gain_exponent(p)?;
    if !sys.input_space().is_coordinate() {
        return Err(Error::OperatorValued { which: "input" });
    }
    if !sys.output_space().is_coordinate() {
        return Err(Error::OperatorValued { which: "output" });
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least one step".into()));
    }
    let view = gain_system(sys, p)?;
    let gain = sys.impulse_response(horizon)?.induced_gain(p).value;
    let coeffs = sys.markov_parameters(horizon);
    let (ny, nu) = (sys.output_space().dim(), sys.input_space().dim());
    let grid = TimeGrid::new(sys.dt(), horizon)?;
    let abs_sum = |c: &DMatrix<f64>, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| -> f64 {
        rows.flat_map(|i| cols.clone().map(move |j| (i, j))).map(|(i, j)| c[(i, j)].abs()).sum()
    };
    let argmax = |vals: Vec<f64>| -> usize {
        let mut best = 0;
        for (i, v) in vals.iter().enumerate() {
            if *v > vals[best] {
                best = i;
            }
        }
        best
    };

    let witness = match p {
        Lp::Inf => {
            let row = argmax((0..ny).map(|i| coeffs.iter().map(|c| abs_sum(c, i..i + 1, 0..nu)).sum()).collect());
            let mut prefix = Vec::with_capacity(horizon);
            let mut acc = 0.0;
            for c in &coeffs {
                acc += abs_sum(c, row..row + 1, 0..nu);
                prefix.push(acc);
            }
            let t_star = prefix.iter().position(|&v| v == acc).unwrap_or(0);
            let sign = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
            let rows = (0..horizon)
                .map(|j| {
                    (0..nu)
                        .map(|c| if j <= t_star { sign(coeffs[t_star - j][(row, c)]) } else { 1.0 })
                        .collect()
                })
                .collect();
            signal_from_rows(grid, view.input_space(), rows)?
        }
        _ => {
            let col = argmax((0..nu).map(|j| coeffs.iter().map(|c| abs_sum(c, 0..ny, j..j + 1)).sum()).collect());
            let rows = (0..horizon)
                .map(|k| {
                    let mut v = vec![0.0; nu];
                    if k == 0 {
                        v[col] = 1.0 / sys.dt();
                    }
                    v
                })
                .collect();
            signal_from_rows(grid, view.input_space(), rows)?
        }
    };
    let witnessed = measured_ratio(&view, &witness, p)?;
    Ok(GainReport {
        p,
        lower_bound: gain,
        upper_bound: UpperBound::Finite(gain),
        witness,
        horizon: grid.horizon(),
        notes: vec![
            format!("kernel certificate: induced gain of the impulse response over {horizon} steps"),
            format!("witness ratio {witnessed}"),
            format!("tail beyond t = {} truncated", grid.horizon()),
        ],
    })
}

/// Worst-case input search strategies for [`empirical_gain`].
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// The moving band family `u_ε` for the listed widths (input must be
    /// `L^2[0,1]` on `M` cells with `dt = 1/M`).
    BandFamily(Vec<f64>),
    /// Sign/Riesz alignment of every input sample with the functional the
    /// final-time output applies to it (`p = ∞`), or impulses along extreme
    /// input directions (`p = 1`).
    GreedyAlignment,
    /// Uniform random inputs with entries in `[-1, 1]`.
    RandomProbe { count: usize, seed: u64 },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::BandFamily(_) => "band-family",
            Strategy::GreedyAlignment => "greedy-alignment",
            Strategy::RandomProbe { .. } => "random-probe",
        }
    }

    /// Band widths `1/M, 2/M, 4/M, ..., 1` (plus 1 when `M` is not a power of two).
    pub fn dyadic_bands(m: usize) -> Self {
        let mut eps = Vec::new();
        let mut n = 1;
        while n < m {
            eps.push(n as f64 / m as f64);
            n *= 2;
        }
        eps.push(1.0);
        Strategy::BandFamily(eps)
    }
}

fn random_input(rng: &mut ChaCha8Rng, grid: TimeGrid, space: &ValueSpace) -> Result<Signal> {
    let values = (0..grid.n_steps() * space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Signal::new(grid, space.clone(), values)
}

/// Candidate inputs a strategy proposes for the gain-view system `view`.
fn candidates(
    view: &DiscreteSystemNode,
    coeffs: &[DMatrix<f64>],
    p: Lp,
    grid: TimeGrid,
    strategy: &Strategy,
) -> Result<Vec<Signal>> {
    let (u_space, y_space) = (view.input_space(), view.output_space());
    let (nu, ny) = (u_space.dim(), y_space.dim());
    match strategy {
        Strategy::BandFamily(eps) => {
            let m = nu;
            if *u_space != ValueSpace::uniform_l2(m) {
                return Err(Error::InvalidArgument(
                    "band family needs an L^2[0,1] input space with uniform weights".into(),
                ));
            }
            eps.iter().map(|&e| u_epsilon(grid, m, e)).collect()
        }
        Strategy::RandomProbe { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*count).map(|_| random_input(&mut rng, grid, u_space)).collect()
        }
        Strategy::GreedyAlignment if p == Lp::Inf => {
            // functionals w on Y to align with at the final time
            let b: Vec<f64> = (0..ny)
                .map(|i| {
                    coeffs
                        .iter()
                        .map(|c| (0..nu).map(|j| u_space.dual_l1_dominating_weight(j) * c[(i, j)].abs()).sum::<f64>())
                        .sum()
                })
                .collect();
            let w_inner = y_space.inner_weights();
            let mut functionals = vec![
                b.iter().zip(&w_inner).map(|(x, w)| x * w).collect::<Vec<_>>(),
                vec![1.0; ny],
                w_inner.clone(),
            ];
            if ny <= MAX_BASIS_CANDIDATES {
                functionals.extend((0..ny).map(|i| {
                    let mut e = vec![0.0; ny];
                    e[i] = 1.0;
                    e
                }));
            }
            if ny == 1 {
                functionals.truncate(1);
                functionals[0] = vec![1.0];
            }
            let last = grid.n_steps() - 1;
            functionals
                .into_iter()
                .map(|w| {
                    let rows = (0..grid.n_steps())
                        .map(|j| {
                            let lag = last - j;
                            let c: Vec<f64> = match coeffs.get(lag) {
                                Some(cl) => (0..nu).map(|col| (0..ny).map(|i| cl[(i, col)] * w[i]).sum()).collect(),
                                None => vec![0.0; nu],
                            };
                            u_space.maximizer(&c)
                        })
                        .collect();
                    signal_from_rows(grid, u_space, rows)
                })
                .collect()
        }
        Strategy::GreedyAlignment => {
            // impulses at t = 0 along extreme directions of the input ball
            let a: Vec<f64> = (0..nu)
                .map(|j| {
                    coeffs
                        .iter()
                        .map(|c| (0..ny).map(|i| y_space.l1_dominating_weight(i) * c[(i, j)].abs()).sum::<f64>())
                        .sum()
                })
                .collect();
            let mut directions = vec![u_space.maximizer(&a), vec![1.0; nu]];
            if nu <= MAX_BASIS_CANDIDATES {
                directions.extend((0..nu).map(|j| {
                    let mut e = vec![0.0; nu];
                    e[j] = 1.0;
                    e
                }));
            }
            directions
                .into_iter()
                .filter(|v| u_space.norm(v) > 0.0)
                .map(|v| {
                    let scale = 1.0 / (u_space.norm(&v) * grid.dt());
                    let rows = (0..grid.n_steps())
                        .map(|k| if k == 0 { v.iter().map(|x| x * scale).collect() } else { vec![0.0; nu] })
                        .collect();
                    signal_from_rows(grid, u_space, rows)
                })
                .collect()
        }
    }
}

/// Gain bracket by searching worst-case inputs; works for operator-valued
/// input and output spaces where no kernel certificate exists.
///
/// `lower_bound` is the best ratio over all candidates of all strategies
/// (ties keep the earliest candidate). `upper_bound` is
/// [`convolution_gain_bound`] of the lag coefficients over the horizon.
pub fn empirical_gain(
    sys: &DiscreteSystemNode,
    p: Lp,
    horizon: usize,
    strategies: &[Strategy],
) -> Result<GainReport> {
    check_gain_exponent(p)?;
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least one step".into()));
    }
    let view = gain_system(sys, p)?;
    let grid = TimeGrid::new(sys.dt(), horizon)?;
    let coeffs = view.markov_parameters(horizon);
    let upper = convolution_gain_bound(&coeffs, view.input_space(), view.output_space(), p);

    let mut pool: Vec<(usize, Signal)> = Vec::new();
    for (si, s) in strategies.iter().enumerate() {
        pool.extend(candidates(&view, &coeffs, p, grid, s)?.into_iter().map(|c| (si, c)));
    }
    let ratios: Vec<f64> = pool
        .par_iter()
        .map(|(_, u)| measured_ratio(&view, u, p))
        .collect::<Result<_>>()?;
    let mut best: Option<usize> = None;
    for (i, r) in ratios.iter().enumerate() {
        if best.is_none_or(|b| *r > ratios[b]) {
            best = Some(i);
        }
    }
    let mut notes = vec![
        format!("upper bound: summed operator norms over {horizon} steps (t = {})", grid.horizon()),
        format!("{} candidate inputs", pool.len()),
    ];
    let (lower, witness) = match best {
        Some(i) => {
            notes.push(format!("best witness from {}", strategies[pool[i].0].name()));
            (ratios[i], pool[i].1.clone())
        }
        None => (0.0, Signal::zeros(grid, view.input_space().clone())),
    };
    Ok(GainReport {
        p,
        lower_bound: lower,
        upper_bound: UpperBound::Finite(upper),
        witness,
        horizon: grid.horizon(),
        notes,
    })
}

/// Picks [`kernel_gain`] when both I/O spaces are coordinate spaces and
/// otherwise [`empirical_gain`] with greedy alignment plus random probes (and
/// the band family when the input space admits it).
pub fn gain_bracket(sys: &DiscreteSystemNode, p: Lp, horizon: usize, seed: u64) -> Result<GainReport> {
    if sys.input_space().is_coordinate() && sys.output_space().is_coordinate() {
        return kernel_gain(sys, p, horizon);
    }
    let mut strategies = vec![Strategy::GreedyAlignment, Strategy::RandomProbe { count: 16, seed }];
    let m = sys.input_space().dim();
    if p == Lp::Inf
        && *sys.input_space() == ValueSpace::uniform_l2(m)
        && (sys.dt() * m as f64 - 1.0).abs() < 1e-12
        && horizon > m
    {
        strategies.push(Strategy::dyadic_bands(m));
    }
    empirical_gain(sys, p, horizon, &strategies)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub input_norm: f64,
    pub output_norm: f64,
    pub ratio: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleTable {
    pub grid_size: usize,
    pub rows: Vec<SweepRow>,
}

impl CounterexampleTable {
    /// CSV with header `eps,input_norm,output_norm,ratio,predicted`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,input_norm,output_norm,ratio,predicted\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.eps, r.input_norm, r.output_norm, r.ratio, r.predicted).unwrap();
        }
        out
    }

    pub fn max_relative_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.ratio - r.predicted).abs() / r.predicted)
            .fold(0.0, f64::max)
    }

    /// Failed checks: ratio off `1/sqrt(eps)` by more than `tol` relative, or
    /// not strictly increasing as eps decreases.
    pub fn failures(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rows {
            let rel = (r.ratio - r.predicted).abs() / r.predicted;
            if rel > tol {
                out.push(format!("eps = {}: ratio {} vs predicted {} (rel {rel:e})", r.eps, r.ratio, r.predicted));
            }
        }
        let mut sorted = self.rows.clone();
        sorted.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        for w in sorted.windows(2) {
            if w[0].eps > w[1].eps && w[1].ratio <= w[0].ratio {
                out.push(format!("ratio not increasing from eps = {} to eps = {}", w[0].eps, w[1].eps));
            }
        }
        out
    }
}

/// Ratios `‖y_ε‖_{L∞} / ‖u_ε‖_{L∞(L²)}` for the left-shift system at grid
/// size `m`, one row per band width.
pub fn counterexample_sweep(m: usize, eps_list: &[f64]) -> Result<CounterexampleTable> {
    for &e in eps_list {
        band_cells(m, e)?;
    }
    let sys = left_shift_distributed_input(m)?;
    let grid = TimeGrid::new(1.0 / m as f64, m + 1)?;
    let rows = eps_list
        .par_iter()
        .map(|&eps| {
            let u = u_epsilon(grid, m, eps)?;
            let y = sys.respond(&u)?;
            let input_norm = u.lp_norm(Lp::Inf);
            let output_norm = y.lp_norm(Lp::Inf);
            Ok(SweepRow {
                eps,
                input_norm,
                output_norm,
                ratio: output_norm / input_norm,
                predicted: 1.0 / eps.sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CounterexampleTable { grid_size: m, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub constant_lower: f64,
    pub constant_upper: f64,
    pub probe_count: usize,
    pub horizon: f64,
    /// Bracket for the maximal-regularity operator
    /// `u ↦ H Σ_{j<k} F^{k-1-j} dt u_j` on `L^1` (observation reports only).
    pub max_regularity_lower: Option<f64>,
    pub max_regularity_upper: Option<f64>,
    pub notes: Vec<String>,
}

/// `dt Σ_{k<horizon} ‖H F^k x‖_Y`, the truncated `L^1` norm of the free output.
pub fn observation_l1_norm(sys: &DiscreteSystemNode, x: &[f64], horizon: usize) -> Result<f64> {
    let view = gain_system(sys, Lp::One)?;
    let grid = TimeGrid::new(sys.dt(), horizon)?;
    let u = Signal::zeros(grid, view.input_space().clone());
    Ok(view.simulate(&u, x)?.output.lp_norm(Lp::One))
}

/// Observation coefficients `dt H F^k` for `k < n`.
fn observation_coefficients(sys: &DiscreteSystemNode, n: usize) -> Vec<DMatrix<f64>> {
    let ft = sys.evolution().transpose();
    let mut q = sys.output_map().transpose().to_dense();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(q.transpose() * sys.dt());
        q = ft.mul_dense(&q);
    }
    out
}

/// Infinite-time `L^1` observation admissibility constant of `H` for `F`,
/// probed on the canonical basis, `probes` random states and the extremal
/// direction of the certificate, together with the maximal-regularity
/// bracket of the same pair.
pub fn observation_admissibility(
    sys: &DiscreteSystemNode,
    horizon: usize,
    probes: usize,
    seed: u64,
) -> Result<AdmissibilityReport> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least one step".into()));
    }
    let x_space = sys.state_space().clone();
    let y_space = sys.output_space().gain_view(Lp::One);
    let nx = x_space.dim();
    let coeffs = observation_coefficients(sys, horizon);
    let upper = convolution_gain_bound(&coeffs, &x_space, &y_space, Lp::One);

    let a: Vec<f64> = (0..nx)
        .map(|j| {
            coeffs
                .iter()
                .map(|c| (0..y_space.dim()).map(|i| y_space.l1_dominating_weight(i) * c[(i, j)].abs()).sum::<f64>())
                .sum()
        })
        .collect();
    let mut states = vec![x_space.maximizer(&a)];
    states.extend((0..nx.min(MAX_BASIS_CANDIDATES)).map(|i| {
        let mut e = vec![0.0; nx];
        e[i] = 1.0;
        e
    }));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    states.extend((0..probes).map(|_| (0..nx).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>()));
    states.retain(|x| x_space.norm(x) > 0.0);
    let lower = states
        .par_iter()
        .map(|x| Ok(observation_l1_norm(sys, x, horizon)? / x_space.norm(x)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    // maximal regularity: input X-valued, G = dt I, output Y
    let aux = DiscreteSystemNode::new(
        x_space.clone(),
        x_space.clone(),
        y_space,
        sys.evolution().clone(),
        SparseMatrix::identity(nx).scale(sys.dt()),
        sys.output_map().clone(),
        SparseMatrix::zeros(sys.output_space().dim(), nx),
        sys.dt(),
    )?;
    let mr = empirical_gain(
        &aux,
        Lp::One,
        horizon + 1,
        &[Strategy::GreedyAlignment, Strategy::RandomProbe { count: probes, seed }],
    )?;
    Ok(AdmissibilityReport {
        constant_lower: lower,
        constant_upper: upper,
        probe_count: states.len(),
        horizon: horizon as f64 * sys.dt(),
        max_regularity_lower: Some(mr.lower_bound),
        max_regularity_upper: Some(mr.upper_bound.value()),
        notes: vec![
            "observation constant: dt Σ_k ‖H F^k x‖ / ‖x‖ over probe states".into(),
            "no invertibility of the generator is assumed".into(),
        ],
    })
}

/// Input class for control admissibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ControlFlavor {
    /// Continuous inputs.
    C,
    /// Essentially bounded inputs.
    LInf,
}

/// Infinite-time control admissibility constant
/// `sup_k ‖Σ_{j<k} F^{k-1-j} G u_j‖_X / ‖u‖_{L∞}`.
pub fn control_admissibility(
    sys: &DiscreteSystemNode,
    flavor: ControlFlavor,
    horizon: usize,
    probes: usize,
    seed: u64,
) -> Result<AdmissibilityReport> {
    let x_space = sys.state_space().clone();
    let u_space = sys.input_space().gain_view(Lp::Inf);
    let nx = x_space.dim();
    let aux = DiscreteSystemNode::new(
        x_space.clone(),
        u_space.clone(),
        x_space,
        sys.evolution().clone(),
        sys.input_map().clone(),
        SparseMatrix::identity(nx),
        SparseMatrix::zeros(nx, u_space.dim()),
        sys.dt(),
    )?;
    let rep = empirical_gain(
        &aux,
        Lp::Inf,
        horizon + 1,
        &[Strategy::GreedyAlignment, Strategy::RandomProbe { count: probes, seed }],
    )?;
    let flavor_note = match flavor {
        ControlFlavor::C => "flavor C",
        ControlFlavor::LInf => "flavor L∞",
    };
    Ok(AdmissibilityReport {
        constant_lower: rep.lower_bound,
        constant_upper: rep.upper_bound.value(),
        probe_count: probes,
        horizon: horizon as f64 * sys.dt(),
        max_regularity_lower: None,
        max_regularity_upper: None,
        notes: vec![
            flavor_note.into(),
            "inputs are piecewise constant on the grid, so the C and L∞ flavors coincide here".into(),
        ],
    })
}

/// True when `space` is `L^2[0,1]` on a uniform grid.
pub fn is_uniform_l2(space: &ValueSpace) -> bool {
    space.kind() == NormKind::Weighted2 && *space == ValueSpace::uniform_l2(space.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::MatrixMeasure;
    use crate::sysnode::{catalogue_system, exponential_diagonal, transport_boundary_control};
    use approx::assert_abs_diff_eq;

    #[test]
    fn delay_kernel_gain_is_one_with_constant_witness() {
        let sys = catalogue_system("delay1", 8).unwrap();
        let rep = kernel_gain(&sys, Lp::Inf, 24).unwrap();
        assert_eq!(rep.lower_bound, 1.0);
        assert_eq!(rep.upper_bound, UpperBound::Finite(1.0));
        assert!(rep.witness.values().iter().all(|&v| v == 1.0));
        assert_eq!(rep.replay(&sys).unwrap(), 1.0);
    }

    #[test]
    fn exponential_kernel_gain_at_finite_horizon() {
        let dt: f64 = 1e-3;
        let n = 3000;
        let sys = exponential_diagonal(&[1.0], &[1.0], dt).unwrap();
        let rep = kernel_gain(&sys, Lp::Inf, n).unwrap();
        // ZOH lag masses sum to 1 - e^{-(n-1) dt}
        let t = (n - 1) as f64 * dt;
        assert_abs_diff_eq!(rep.lower_bound, 1.0 - (-t).exp(), epsilon = 1e-12);
        assert!(rep.witness.values().iter().all(|&v| v == 1.0));
        assert_abs_diff_eq!(rep.replay(&sys).unwrap(), rep.lower_bound, epsilon = 1e-12);
    }

    #[test]
    fn cross_kernel_column_gain() {
        let dt = 0.01;
        let grid = TimeGrid::new(dt, 3000).unwrap();
        let h = MatrixMeasure::from_density_fn(2, 2, grid, |t| {
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, (-t).exp(), 0.0])
        })
        .unwrap()
        .add(&MatrixMeasure::dirac(0.0, DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0])).unwrap())
        .unwrap();
        let sys = DiscreteSystemNode::from_kernel(&h, dt).unwrap();
        let rep = kernel_gain(&sys, Lp::One, 3000).unwrap();
        assert_abs_diff_eq!(rep.lower_bound, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.replay(&sys).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn kernel_gain_rejects_operator_valued() {
        let sys = transport_boundary_control(4).unwrap();
        assert!(matches!(kernel_gain(&sys, Lp::Inf, 12), Err(Error::OperatorValued { which: "output" })));
    }

    #[test]
    fn left_shift_band_family_reaches_sqrt_m() {
        for m in [8, 32] {
            let sys = left_shift_distributed_input(m).unwrap();
            let rep = empirical_gain(&sys, Lp::Inf, 3 * m, &[Strategy::BandFamily(vec![1.0 / m as f64])]).unwrap();
            assert_abs_diff_eq!(rep.lower_bound, (m as f64).sqrt(), epsilon = 1e-12);
            assert_abs_diff_eq!(rep.upper_bound.value(), (m as f64).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn transport_gain_bracket_is_one() {
        let m = 16;
        let sys = transport_boundary_control(m).unwrap();
        let rep = empirical_gain(
            &sys,
            Lp::Inf,
            3 * m,
            &[Strategy::GreedyAlignment, Strategy::RandomProbe { count: 20, seed: 1 }],
        )
        .unwrap();
        assert!(rep.lower_bound <= 1.0 + 1e-12);
        assert_abs_diff_eq!(rep.lower_bound, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.upper_bound.value(), 1.0, epsilon = 1e-12);
        assert!(empirical_gain(&sys, Lp::Inf, 3 * m, &[Strategy::BandFamily(vec![1.0])]).is_err());
    }

    #[test]
    fn left_shift_l1_bracket_at_most_one() {
        let m = 16;
        let sys = left_shift_distributed_input(m).unwrap();
        let rep = empirical_gain(
            &sys,
            Lp::One,
            3 * m,
            &[Strategy::GreedyAlignment, Strategy::RandomProbe { count: 50, seed: 2 }],
        )
        .unwrap();
        assert!(rep.upper_bound.value() <= 1.0 + 1e-12);
        assert!(rep.lower_bound <= rep.upper_bound.value() + 1e-12);
        assert_abs_diff_eq!(rep.lower_bound, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sweep_matches_inverse_sqrt() {
        let t = counterexample_sweep(64, &[1.0, 0.25, 1.0 / 16.0, 1.0 / 64.0]).unwrap();
        assert!(t.failures(1e-9).is_empty(), "{:?}", t.failures(1e-9));
        assert_eq!(t.rows[0].ratio, 1.0);
        assert_abs_diff_eq!(t.rows[1].ratio, 2.0, epsilon = 1e-12);
        assert!(t.to_csv().starts_with("eps,input_norm,output_norm,ratio,predicted\n1,1,1,1,1\n"));
        assert!(matches!(counterexample_sweep(64, &[0.3]), Err(Error::InvalidEpsilon { .. })));
    }

    #[test]
    fn halving_eps_scales_ratio_by_sqrt2() {
        let t = counterexample_sweep(256, &[1.0 / 8.0, 1.0 / 16.0]).unwrap();
        assert_abs_diff_eq!(t.rows[1].ratio / t.rows[0].ratio, 2f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn left_shift_observation_is_l1_norm() {
        let m = 16;
        let sys = left_shift_distributed_input(m).unwrap();
        let x: Vec<f64> = (0..m).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let l1: f64 = x.iter().map(|v| v.abs()).sum::<f64>() / m as f64;
        assert_abs_diff_eq!(observation_l1_norm(&sys, &x, 3 * m).unwrap(), l1, epsilon = 1e-14);
        let rep = observation_admissibility(&sys, 3 * m, 10, 3).unwrap();
        assert!(rep.constant_upper <= 1.0 + 1e-12);
        assert_abs_diff_eq!(rep.constant_lower, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn scalar_observation_constant() {
        let dt: f64 = 1e-3;
        let f = (-dt).exp();
        let sys = DiscreteSystemNode::new(
            ValueSpace::weighted_l2(vec![1.0]).unwrap(),
            ValueSpace::sup(1),
            ValueSpace::sup(1),
            SparseMatrix::diagonal(&[f]),
            SparseMatrix::diagonal(&[1.0 - f]),
            SparseMatrix::identity(1),
            SparseMatrix::zeros(1, 1),
            dt,
        )
        .unwrap();
        let rep = observation_admissibility(&sys, 30_000, 2, 1).unwrap();
        assert_abs_diff_eq!(rep.constant_lower, 1.0, epsilon = 2.0 * dt);
        assert_abs_diff_eq!(rep.constant_upper, rep.constant_lower, epsilon = 1e-12);
    }

    #[test]
    fn transport_observation_constant_at_most_one() {
        let sys = transport_boundary_control(8).unwrap();
        let rep = observation_admissibility(&sys, 24, 10, 4).unwrap();
        assert!(rep.constant_lower <= rep.constant_upper + 1e-12);
        assert!(rep.constant_upper <= 1.0 + 1e-12);
    }

    #[test]
    fn control_admissibility_examples() {
        let sys = transport_boundary_control(16).unwrap();
        let rep = control_admissibility(&sys, ControlFlavor::C, 48, 10, 1).unwrap();
        assert!(rep.constant_upper <= 1.0 + 1e-12);
        assert_abs_diff_eq!(rep.constant_lower, 1.0, epsilon = 1e-12);

        let zero_g = DiscreteSystemNode::new(
            ValueSpace::weighted_l2(vec![1.0, 1.0]).unwrap(),
            ValueSpace::sup(1),
            ValueSpace::sup(1),
            SparseMatrix::diagonal(&[0.5, 0.5]),
            SparseMatrix::zeros(2, 1),
            SparseMatrix::zeros(1, 2),
            SparseMatrix::zeros(1, 1),
            0.1,
        )
        .unwrap();
        let rep = control_admissibility(&zero_g, ControlFlavor::LInf, 20, 5, 1).unwrap();
        assert_eq!((rep.constant_lower, rep.constant_upper), (0.0, 0.0));

        let dt = 0.01;
        let n = 500;
        let exp = exponential_diagonal(&[1.0], &[1.0], dt).unwrap();
        let rep = control_admissibility(&exp, ControlFlavor::C, n, 5, 1).unwrap();
        let t = n as f64 * dt;
        assert_abs_diff_eq!(rep.constant_lower, 1.0 - (-t).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(rep.constant_upper, 1.0 - (-t).exp(), epsilon = 1e-12);
    }

    #[test]
    fn random_probe_lower_bound_monotone_in_count() {
        let sys = transport_boundary_control(8).unwrap();
        let mut last = 0.0;
        for count in [1, 5, 20] {
            let rep = empirical_gain(&sys, Lp::Inf, 24, &[Strategy::RandomProbe { count, seed: 9 }]).unwrap();
            assert!(rep.lower_bound >= last);
            last = rep.lower_bound;
        }
    }

    #[test]
    fn gain_report_json_fields() {
        let sys = catalogue_system("delay1", 4).unwrap();
        let rep = kernel_gain(&sys, Lp::Inf, 12).unwrap();
        let v = rep.to_json(Some("w.csv"));
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        for k in ["p", "lower_bound", "upper_bound", "horizon", "witness_file", "notes"] {
            assert!(keys.contains(&k), "{k}");
        }
        assert_eq!(v["p"], "inf");
        let mut unbounded = rep.clone();
        unbounded.upper_bound = UpperBound::UnboundedEvidence(3.0);
        assert_eq!(unbounded.to_json(None)["upper_bound"], "unbounded-evidence");
    }
}
