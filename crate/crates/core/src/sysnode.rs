//! Discrete realizations `x_{k+1} = F x_k + G u_k`, `y_k = H x_k + J u_k`.
//!
//! `F` is the exact one-step map of the semigroup over `dt` and `G` already
//! carries the integral over one step, so the lag coefficients of the
//! input-output map are `C_0 = J` and `C_l = H F^{l-1} G`. The generator is
//! never formed. Unbounded control and observation operators become bounded
//! matrices at finite resolution (e.g. boundary injection `G = e_0`).

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::{Atom, Density, MatrixMeasure};
use crate::linalg::SparseMatrix;
use crate::signal::{same_step, NormKind, Signal, TimeGrid, ValueSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystemNode {
    state_space: ValueSpace,
    input_space: ValueSpace,
    output_space: ValueSpace,
    evolution: SparseMatrix,
    input_map: SparseMatrix,
    output_map: SparseMatrix,
    feedthrough: SparseMatrix,
    dt: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub states: Signal,
    pub output: Signal,
}

fn check_shape(m: &SparseMatrix, rows: usize, cols: usize, name: &'static str) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::InvalidArgument(format!(
            "{name} has shape {:?}, expected ({rows}, {cols})",
            m.shape()
        )));
    }
    if m.triplets().any(|(_, _, v)| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} has non-finite entries")));
    }
    Ok(())
}

/// Weighted adjoint `W_dom^{-1} Mᵀ W_cod` of `M : dom → cod`.
fn weighted_adjoint(m: &SparseMatrix, dom: &ValueSpace, cod: &ValueSpace) -> SparseMatrix {
    let left: Vec<f64> = dom.inner_weights().iter().map(|w| 1.0 / w).collect();
    m.transpose().scale_rows_cols(&left, &cod.inner_weights())
}

impl DiscreteSystemNode {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        state_space: ValueSpace,
        input_space: ValueSpace,
        output_space: ValueSpace,
        evolution: SparseMatrix,
        input_map: SparseMatrix,
        output_map: SparseMatrix,
        feedthrough: SparseMatrix,
        dt: f64,
    ) -> Result<Self> {
        let (nx, nu, ny) = (state_space.dim(), input_space.dim(), output_space.dim());
        check_shape(&evolution, nx, nx, "F")?;
        check_shape(&input_map, nx, nu, "G")?;
        check_shape(&output_map, ny, nx, "H")?;
        check_shape(&feedthrough, ny, nu, "J")?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            state_space,
            input_space,
            output_space,
            evolution,
            input_map,
            output_map,
            feedthrough,
            dt,
        })
    }

    pub fn state_space(&self) -> &ValueSpace {
        &self.state_space
    }

    pub fn input_space(&self) -> &ValueSpace {
        &self.input_space
    }

    pub fn output_space(&self) -> &ValueSpace {
        &self.output_space
    }

    /// `F`
    pub fn evolution(&self) -> &SparseMatrix {
        &self.evolution
    }

    /// `G`
    pub fn input_map(&self) -> &SparseMatrix {
        &self.input_map
    }

    /// `H`
    pub fn output_map(&self) -> &SparseMatrix {
        &self.output_map
    }

    /// `J`
    pub fn feedthrough(&self) -> &SparseMatrix {
        &self.feedthrough
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Same dynamics with the given input and output spaces (dimensions must
    /// agree).
    pub fn with_io_spaces(&self, input: ValueSpace, output: ValueSpace) -> Result<Self> {
        Self::new(
            self.state_space.clone(),
            input,
            output,
            self.evolution.clone(),
            self.input_map.clone(),
            self.output_map.clone(),
            self.feedthrough.clone(),
            self.dt,
        )
    }

    /// Runs the recursion from `x0`. States and output share `u`'s grid.
    pub fn simulate(&self, u: &Signal, x0: &[f64]) -> Result<SimulationResult> {
        if u.dim() != self.input_space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_space.dim(),
                actual: u.dim(),
                context: "simulation input",
            });
        }
        if x0.len() != self.state_space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.state_space.dim(),
                actual: x0.len(),
                context: "initial state",
            });
        }
        if !same_step(u.grid().dt(), self.dt) {
            return Err(Error::GridMismatch(format!(
                "input dt {} differs from system dt {}",
                u.grid().dt(),
                self.dt
            )));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("initial state must be finite".into()));
        }
        let grid = *u.grid();
        let mut states = Signal::zeros(grid, self.state_space.clone());
        let mut output = Signal::zeros(grid, self.output_space.clone());
        let mut x = x0.to_vec();
        let mut next = vec![0.0; x.len()];
        for k in 0..grid.n_steps() {
            let uk = u.value(k);
            states.value_mut(k).copy_from_slice(&x);
            let y = output.value_mut(k);
            self.output_map.mul_vec_into(&x, y);
            self.feedthrough.mul_vec_add(uk, y);
            self.evolution.mul_vec_into(&x, &mut next);
            self.input_map.mul_vec_add(uk, &mut next);
            std::mem::swap(&mut x, &mut next);
        }
        Ok(SimulationResult { states, output })
    }

    /// Output from the zero state.
    pub fn respond(&self, u: &Signal) -> Result<Signal> {
        let x0 = vec![0.0; self.state_space.dim()];
        Ok(self.simulate(u, &x0)?.output)
    }

    /// The dual node `(F♯, H♯, G♯, J♯)` with input and output spaces swapped;
    /// `♯` is the adjoint for the weighted inner products of the spaces.
    pub fn dual(&self) -> Self {
        let (x, u, y) = (&self.state_space, &self.input_space, &self.output_space);
        Self {
            state_space: x.clone(),
            input_space: y.clone(),
            output_space: u.clone(),
            evolution: weighted_adjoint(&self.evolution, x, x),
            input_map: weighted_adjoint(&self.output_map, x, y),
            output_map: weighted_adjoint(&self.input_map, u, x),
            feedthrough: weighted_adjoint(&self.feedthrough, u, y),
            dt: self.dt,
        }
    }

    /// Lag coefficients `C_0 = J`, `C_l = H F^{l-1} G` for `l < n_lags`.
    pub fn markov_parameters(&self, n_lags: usize) -> Vec<DMatrix<f64>> {
        let (nu, ny) = (self.input_space.dim(), self.output_space.dim());
        let mut out = Vec::with_capacity(n_lags);
        if n_lags == 0 {
            return out;
        }
        out.push(self.feedthrough.to_dense());
        if nu <= ny {
            let mut p = self.input_map.to_dense();
            for _ in 1..n_lags {
                out.push(self.output_map.mul_dense(&p));
                p = self.evolution.mul_dense(&p);
            }
        } else {
            let ft = self.evolution.transpose();
            let gt = self.input_map.transpose();
            let mut q = self.output_map.transpose().to_dense();
            for _ in 1..n_lags {
                out.push(gt.mul_dense(&q).transpose());
                q = ft.mul_dense(&q);
            }
        }
        out
    }

    /// Kernel of the input-output map: atom `J δ_0` plus density
    /// `D_k = H F^{k-1} G / dt` (and `D_0 = 0`) for `k < horizon`.
    pub fn impulse_response(&self, horizon: usize) -> Result<MatrixMeasure> {
        let (nu, ny) = (self.input_space.dim(), self.output_space.dim());
        let mut coeffs = self.markov_parameters(horizon.max(1));
        let j = std::mem::replace(&mut coeffs[0], DMatrix::zeros(ny, nu));
        let atoms = if j.iter().any(|&v| v != 0.0) {
            vec![Atom { time: 0.0, weight: j }]
        } else {
            Vec::new()
        };
        let samples = coeffs.into_iter().map(|c| c / self.dt).collect();
        let density = Density::new(TimeGrid::new(self.dt, horizon.max(1))?, samples)?;
        MatrixMeasure::new(ny, nu, atoms, Some(density))
    }

    /// Canonical shift realization of `u ↦ h * u` on the grid `dt`.
    ///
    /// The state buffers the last `L` inputs (`L` = largest lag of `h`),
    /// `H = [C_1 ... C_L]` reads the buffer against the lag coefficients and
    /// `J = C_0` holds the atom at zero plus the density mass of the first
    /// cell. Input and output are coordinate (sup-normed) spaces.
    pub fn from_kernel(h: &MatrixMeasure, dt: f64) -> Result<Self> {
        let (ny, nu) = (h.rows(), h.cols());
        let lags = h.max_lag(dt)?;
        let coeffs = h.lag_coefficients(dt, lags + 1)?;
        let input_space = ValueSpace::sup(nu);
        let output_space = ValueSpace::sup(ny);
        let feedthrough = SparseMatrix::from_dense(&coeffs[0]);
        if lags == 0 {
            return Self::new(
                ValueSpace::weighted_l2(vec![1.0])?,
                input_space,
                output_space,
                SparseMatrix::zeros(1, 1),
                SparseMatrix::zeros(1, nu),
                SparseMatrix::zeros(ny, 1),
                feedthrough,
                dt,
            );
        }
        let nx = nu * lags;
        let evolution = SparseMatrix::from_triplets(
            nx,
            nx,
            (0..lags - 1).flat_map(|b| (0..nu).map(move |i| (nu * (b + 1) + i, nu * b + i, 1.0))),
        );
        let input_map = SparseMatrix::from_triplets(nx, nu, (0..nu).map(|i| (i, i, 1.0)));
        let output_map = SparseMatrix::from_triplets(
            ny,
            nx,
            coeffs[1..].iter().enumerate().flat_map(|(b, c)| {
                (0..ny).flat_map(move |r| (0..nu).map(move |i| (r, nu * b + i, c[(r, i)])))
            }),
        );
        Self::new(
            ValueSpace::weighted_l2(vec![1.0; nx])?,
            input_space,
            output_space,
            evolution,
            input_map,
            output_map,
            feedthrough,
            dt,
        )
    }

    /// Smallest `k ≥ 1` with `F^k = 0`, searched up to the state dimension.
    pub fn nilpotency_index(&self) -> Option<usize> {
        let n = self.state_space.dim();
        let mut p = self.evolution.clone();
        for k in 1..=n {
            if p.is_zero() {
                return Some(k);
            }
            p = self.evolution.mul_sparse(&p);
        }
        None
    }

    /// Default simulation horizon in steps: three transit times for
    /// nilpotent `F`, otherwise the first `k` with `max|F^k| < 1e-12`.
    pub fn default_horizon(&self) -> Result<usize> {
        const MAX_STEPS: usize = 1_000_000;
        if let Some(k) = self.nilpotency_index() {
            return Ok(3 * k);
        }
        let mut p = self.evolution.clone();
        for k in 1..MAX_STEPS {
            if p.max_abs() < 1e-12 {
                return Ok(k);
            }
            p = self.evolution.mul_sparse(&p);
        }
        Err(Error::InvalidArgument(format!(
            "F^k does not decay below 1e-12 within {MAX_STEPS} steps; pass an explicit horizon"
        )))
    }

    /// Growth bound estimate `log ρ(F) / dt` (`-∞` for nilpotent `F`).
    pub fn growth_bound(&self) -> f64 {
        if self.nilpotency_index().is_some() {
            return f64::NEG_INFINITY;
        }
        let f = self.evolution.to_dense();
        let rho = f
            .complex_eigenvalues()
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        rho.ln() / self.dt
    }

    /// Transfer function `J + H (zI - F)^{-1} G` at `z = e^{s dt}`.
    ///
    /// Strictly triangular `F` (all shift realizations) is solved by
    /// substitution; anything else goes through a dense LU with at most
    /// [`DENSE_TRANSFER_LIMIT`] states.
    pub fn transfer(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        let z = (s * self.dt).exp();
        let (nx, nu) = (self.state_space.dim(), self.input_space.dim());
        let f = &self.evolution;
        let g = self.input_map.to_dense();
        let zero = Complex64::new(0.0, 0.0);
        let mut x = DMatrix::from_element(nx, nu, zero);
        let lower = f.is_strictly_lower();
        if lower || f.is_strictly_upper() {
            let order: Box<dyn Iterator<Item = usize>> = if lower { Box::new(0..nx) } else { Box::new((0..nx).rev()) };
            for i in order {
                for c in 0..nu {
                    let mut acc = Complex64::new(g[(i, c)], 0.0);
                    for (j, v) in f.row_entries(i) {
                        acc += x[(j, c)] * v;
                    }
                    x[(i, c)] = acc / z;
                }
            }
        } else {
            if nx > DENSE_TRANSFER_LIMIT {
                return Err(Error::InvalidArgument(format!(
                    "dense transfer evaluation limited to {DENSE_TRANSFER_LIMIT} states, got {nx}"
                )));
            }
            let a = DMatrix::from_fn(nx, nx, |i, j| if i == j { z } else { zero } - f.get(i, j));
            let rhs = g.map(|v| Complex64::new(v, 0.0));
            x = a
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::InvalidArgument(format!("e^(s dt) = {z} is an eigenvalue of F")))?;
        }
        let h = self.output_map.to_dense().map(|v| Complex64::new(v, 0.0));
        Ok(self.feedthrough.to_dense().map(|v| Complex64::new(v, 0.0)) + h * x)
    }

    /// Line-oriented text form.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "sysnode dt {} state {} input {} output {}\n",
            self.dt,
            self.state_space.kind().as_str(),
            self.input_space.kind().as_str(),
            self.output_space.kind().as_str()
        );
        for (name, m) in [
            ("F", &self.evolution),
            ("G", &self.input_map),
            ("H", &self.output_map),
            ("J", &self.feedthrough),
        ] {
            writeln!(out, "{name} {} {}", m.rows(), m.cols()).unwrap();
            let d = m.to_dense();
            for r in 0..d.nrows() {
                let row: Vec<String> = (0..d.ncols()).map(|c| d[(r, c)].to_string()).collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
        }
        for (name, s) in [
            ("w_state", &self.state_space),
            ("w_in", &self.input_space),
            ("w_out", &self.output_space),
        ] {
            let w: Vec<String> = s.weights().iter().map(|v| v.to_string()).collect();
            writeln!(out, "{name} {}", w.join(" ")).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse().map_err(|_| perr(line, format!("cannot parse `{s}`")))
        };
        let (ln, header) = *lines.first().ok_or(perr(1, "empty system file".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 9 || h[0] != "sysnode" || h[1] != "dt" || h[3] != "state" || h[5] != "input" || h[7] != "output" {
            return Err(perr(ln, "expected `sysnode dt <dt> state <kind> input <kind> output <kind>`".into()));
        }
        let dt = num(h[2], ln)?;
        let kind = |s: &str| NormKind::parse(s).ok_or(perr(ln, format!("unknown norm kind `{s}`")));
        let kinds = [kind(h[4])?, kind(h[6])?, kind(h[8])?];

        let mut idx = 1;
        let mut mats = Vec::new();
        for name in ["F", "G", "H", "J"] {
            let (ln, l) = *lines.get(idx).ok_or(perr(0, format!("missing {name} block")))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 || f[0] != name {
                return Err(perr(ln, format!("expected `{name} <rows> <cols>`")));
            }
            let rows = num(f[1], ln)? as usize;
            let cols = num(f[2], ln)? as usize;
            idx += 1;
            let mut entries = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (ln, l) = *lines.get(idx).ok_or(perr(ln, format!("truncated {name} block")))?;
                let row = l
                    .split_whitespace()
                    .map(|s| num(s, ln))
                    .collect::<Result<Vec<_>>>()?;
                if row.len() != cols {
                    return Err(perr(ln, format!("{name} row needs {cols} entries")));
                }
                entries.extend(row);
                idx += 1;
            }
            mats.push(SparseMatrix::from_dense(&DMatrix::from_row_slice(rows, cols, &entries)));
        }
        let mut spaces = Vec::new();
        for (name, kind) in ["w_state", "w_in", "w_out"].into_iter().zip(kinds) {
            let (ln, l) = *lines.get(idx).ok_or(perr(0, format!("missing {name}")))?;
            let mut f = l.split_whitespace();
            if f.next() != Some(name) {
                return Err(perr(ln, format!("expected `{name}` line")));
            }
            let w = f.map(|s| num(s, ln)).collect::<Result<Vec<_>>>()?;
            spaces.push(ValueSpace::new(kind, w)?);
            idx += 1;
        }
        let [x, u, y]: [ValueSpace; 3] = spaces.try_into().expect("three spaces");
        let [f, g, hh, j]: [SparseMatrix; 4] = mats.try_into().expect("four blocks");
        Self::new(x, u, y, f, g, hh, j, dt)
    }
}

/// Transport on `[0, 1]` with boundary control at 0 and identity observation.
///
/// `dt = 1/M`, `F` is the down-shift, `G = e_0`, `H = I`, `J = 0`; state and
/// output are `L^2[0,1]` on `M` cells. The state is `x_k[i] = u_{k-1-i}`.
pub fn transport_boundary_control(m: usize) -> Result<DiscreteSystemNode> {
    if m == 0 {
        return Err(Error::InvalidArgument("grid size must be >= 1".into()));
    }
    let x = ValueSpace::uniform_l2(m);
    DiscreteSystemNode::new(
        x.clone(),
        ValueSpace::sup(1),
        x,
        SparseMatrix::from_triplets(m, m, (1..m).map(|i| (i, i - 1, 1.0))),
        SparseMatrix::from_triplets(m, 1, [(0, 0, 1.0)]),
        SparseMatrix::identity(m),
        SparseMatrix::zeros(m, 1),
        1.0 / m as f64,
    )
}

/// Left shift on `[0, 1]` with distributed input and observation at 0.
///
/// `dt = 1/M`, `F` is the up-shift, `G = dt I`, `H = e_0ᵀ`, `J = 0`; input
/// and state are `L^2[0,1]` on `M` cells, so that
/// `y_k = dt Σ_{j<k} u_j[k-1-j]`.
pub fn left_shift_distributed_input(m: usize) -> Result<DiscreteSystemNode> {
    if m == 0 {
        return Err(Error::InvalidArgument("grid size must be >= 1".into()));
    }
    let dt = 1.0 / m as f64;
    let x = ValueSpace::uniform_l2(m);
    DiscreteSystemNode::new(
        x.clone(),
        x,
        ValueSpace::sup(1),
        SparseMatrix::from_triplets(m, m, (1..m).map(|i| (i - 1, i, 1.0))),
        SparseMatrix::identity(m).scale(dt),
        SparseMatrix::from_triplets(1, m, [(0, 0, 1.0)]),
        SparseMatrix::zeros(1, m),
        dt,
    )
}

/// Diagonal system with kernel `diag(c_i e^{-a_i t})`, discretized exactly
/// for piecewise-constant inputs (zero-order hold).
pub fn exponential_diagonal(rates: &[f64], out_gains: &[f64], dt: f64) -> Result<DiscreteSystemNode> {
    if rates.len() != out_gains.len() || rates.is_empty() {
        return Err(Error::InvalidArgument("rates and gains must be non-empty and equal length".into()));
    }
    if rates.iter().any(|&a| a.is_nan() || a <= 0.0) {
        return Err(Error::InvalidArgument("decay rates must be positive".into()));
    }
    let n = rates.len();
    let decay: Vec<f64> = rates.iter().map(|a| (-a * dt).exp()).collect();
    let hold: Vec<f64> = rates.iter().map(|a| -(-a * dt).exp_m1() / a).collect();
    DiscreteSystemNode::new(
        ValueSpace::weighted_l2(vec![1.0; n])?,
        ValueSpace::sup(n),
        ValueSpace::sup(n),
        SparseMatrix::diagonal(&decay),
        SparseMatrix::diagonal(&hold),
        SparseMatrix::diagonal(out_gains),
        SparseMatrix::zeros(n, n),
        dt,
    )
}

/// Largest state dimension for which [`DiscreteSystemNode::transfer`] falls
/// back to a dense solve.
pub const DENSE_TRANSFER_LIMIT: usize = 2000;

/// Names accepted by [`catalogue_system`].
pub const CATALOGUE: [&str; 5] = ["delay1", "exp1", "diag-exp-2", "transport", "leftshift"];

/// Built-in systems at grid size `m` (`dt = 1/m`).
pub fn catalogue_system(name: &str, m: usize) -> Result<DiscreteSystemNode> {
    if m == 0 {
        return Err(Error::InvalidArgument("grid size must be >= 1".into()));
    }
    let dt = 1.0 / m as f64;
    match name {
        "delay1" => DiscreteSystemNode::from_kernel(&MatrixMeasure::delay(1.0)?, dt),
        "exp1" => exponential_diagonal(&[1.0], &[1.0], dt),
        "diag-exp-2" => exponential_diagonal(&[1.0, 1.0], &[1.0, 2.0], dt),
        "transport" => transport_boundary_control(m),
        "leftshift" => left_shift_distributed_input(m),
        other => Err(Error::InvalidArgument(format!(
            "unknown system `{other}` (expected one of {})",
            CATALOGUE.join(", ")
        ))),
    }
}

/// Random system with the given dimensions: weighted-2 state with random
/// positive weights, random input/output norm kinds, and `F` scaled to
/// induced 2-norm `contraction` in the unweighted sense.
pub fn random_system<R: Rng + ?Sized>(
    rng: &mut R,
    nx: usize,
    nu: usize,
    ny: usize,
    dt: f64,
    contraction: f64,
) -> Result<DiscreteSystemNode> {
    let dense = |r: usize, c: usize, rng: &mut R| DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
    let mut f = dense(nx, nx, rng);
    let norm = f.clone().svd(false, false).singular_values.max();
    if norm > 0.0 {
        f *= contraction / norm;
    }
    let g = dense(nx, nu, rng);
    let h = dense(ny, nx, rng);
    let j = dense(ny, nu, rng);
    let space = |d: usize, rng: &mut R, kinds: &[NormKind]| -> Result<ValueSpace> {
        let kind = kinds[rng.random_range(0..kinds.len())];
        ValueSpace::new(kind, (0..d).map(|_| rng.random_range(0.05..2.0)).collect())
    };
    let all = [NormKind::Sup, NormKind::Weighted1, NormKind::Weighted2];
    let x = space(nx, rng, &[NormKind::Weighted2])?;
    let u = space(nu, rng, &all)?;
    let y = space(ny, rng, &all)?;
    DiscreteSystemNode::new(
        x,
        u,
        y,
        SparseMatrix::from_dense(&f),
        SparseMatrix::from_dense(&g),
        SparseMatrix::from_dense(&h),
        SparseMatrix::from_dense(&j),
        dt,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{u_epsilon, Lp};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_input(dt: f64, vals: Vec<f64>) -> Signal {
        Signal::new(TimeGrid::new(dt, vals.len()).unwrap(), ValueSpace::sup(1), vals).unwrap()
    }

    #[test]
    fn transport_shift_is_nilpotent() {
        let sys = transport_boundary_control(2).unwrap();
        let f = sys.evolution().to_dense();
        assert_eq!(f, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]));
        assert!((&f * &f).iter().all(|&v| v == 0.0));
        assert_eq!(transport_boundary_control(16).unwrap().nilpotency_index(), Some(16));
    }

    #[test]
    fn transport_fills_with_constant_input() {
        let m = 4;
        let sys = transport_boundary_control(m).unwrap();
        let u = scalar_input(0.25, vec![1.0; 8]);
        let res = sys.simulate(&u, &[0.0; 4]).unwrap();
        assert_eq!(res.states.value(m), &[1.0; 4]);
        assert_eq!(sys.output_space().norm(res.output.value(m)), 1.0);
    }

    #[test]
    fn transport_state_is_delayed_input() {
        let m = 8;
        let sys = transport_boundary_control(m).unwrap();
        let vals: Vec<f64> = (0..30).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let res = sys.simulate(&scalar_input(1.0 / m as f64, vals.clone()), &[0.0; 8]).unwrap();
        for k in 0..30 {
            for i in 0..m {
                let expect = if k > i { vals[k - 1 - i] } else { 0.0 };
                assert_eq!(res.states.value(k)[i], expect);
            }
        }
    }

    #[test]
    fn transport_impulse_travels_one_cell_per_step() {
        let m = 4;
        let sys = transport_boundary_control(m).unwrap();
        let mut vals = vec![0.0; 7];
        vals[0] = 1.0;
        let res = sys.simulate(&scalar_input(0.25, vals), &[0.0; 4]).unwrap();
        for k in 0..7 {
            let expect: Vec<f64> = (0..m).map(|i| if k == i + 1 { 1.0 } else { 0.0 }).collect();
            assert_eq!(res.states.value(k), expect.as_slice());
        }
    }

    #[test]
    fn zero_input_zero_output() {
        for name in CATALOGUE {
            let sys = catalogue_system(name, 4).unwrap();
            let u = Signal::zeros(TimeGrid::new(0.25, 10).unwrap(), sys.input_space().clone());
            let y = sys.respond(&u).unwrap();
            assert!(y.values().iter().all(|&v| v == 0.0), "{name}");
        }
    }

    #[test]
    fn left_shift_constant_input_reaches_one() {
        let m = 16;
        let sys = left_shift_distributed_input(m).unwrap();
        let grid = TimeGrid::new(1.0 / m as f64, m + 1).unwrap();
        let u = Signal::from_fn(grid, ValueSpace::uniform_l2(m), |_, _| vec![1.0; m]).unwrap();
        let y = sys.respond(&u).unwrap();
        assert_abs_diff_eq!(y.value(m)[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn left_shift_band_input_output_one() {
        let m = 32;
        let sys = left_shift_distributed_input(m).unwrap();
        let grid = TimeGrid::new(1.0 / m as f64, m + 1).unwrap();
        let eps = 1.0 / m as f64;
        let u = u_epsilon(grid, m, eps).unwrap();
        let y = sys.respond(&u).unwrap();
        assert_abs_diff_eq!(y.value(m)[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u.lp_norm(Lp::Inf), eps.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn simulate_rejects_mismatches() {
        let sys = transport_boundary_control(4).unwrap();
        let wrong_dt = scalar_input(0.5, vec![1.0; 4]);
        assert!(matches!(sys.simulate(&wrong_dt, &[0.0; 4]), Err(Error::GridMismatch(_))));
        let wrong_dim = Signal::zeros(TimeGrid::new(0.25, 4).unwrap(), ValueSpace::sup(2));
        assert!(matches!(sys.simulate(&wrong_dim, &[0.0; 4]), Err(Error::DimensionMismatch { .. })));
        let u = scalar_input(0.25, vec![1.0; 4]);
        assert!(matches!(sys.simulate(&u, &[0.0; 3]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn dual_of_transport_is_scaled_left_shift() {
        let m = 8;
        let dt = 1.0 / m as f64;
        let d = transport_boundary_control(m).unwrap().dual();
        let ls = left_shift_distributed_input(m).unwrap();
        assert_eq!(d.evolution(), ls.evolution());
        // state scaling x_ls = dt x_dual
        assert!(d.input_map().scale(dt).max_abs_diff(ls.input_map()) < 1e-15);
        assert!(ls.output_map().scale(dt).max_abs_diff(d.output_map()) < 1e-15);
        assert_eq!(d.input_space(), ls.input_space());
        assert_eq!(d.output_space(), ls.output_space());
        let a = d.markov_parameters(3 * m);
        let b = ls.markov_parameters(3 * m);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).amax() < 1e-15);
        }
    }

    #[test]
    fn dual_is_involution_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let sys = random_system(&mut rng, 5, 2, 3, 0.1, 0.9).unwrap();
            let back = sys.dual().dual();
            assert!(back.evolution().max_abs_diff(sys.evolution()) < 1e-12);
            assert!(back.input_map().max_abs_diff(sys.input_map()) < 1e-12);
            assert!(back.output_map().max_abs_diff(sys.output_map()) < 1e-12);
            assert!(back.feedthrough().max_abs_diff(sys.feedthrough()) < 1e-12);
            assert_eq!(back.input_space(), sys.input_space());
        }
    }

    #[test]
    fn impulse_response_of_dual_is_transposed() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sys = random_system(&mut rng, 4, 2, 3, 0.1, 0.8).unwrap();
        // unit weights on I/O make the weighted adjoint a transpose
        let sys = sys
            .with_io_spaces(ValueSpace::sup(2), ValueSpace::sup(3))
            .unwrap();
        let a = sys.dual().impulse_response(40).unwrap();
        let b = sys.impulse_response(40).unwrap().transpose();
        let ca = a.lag_coefficients(0.1, 40).unwrap();
        let cb = b.lag_coefficients(0.1, 40).unwrap();
        for (x, y) in ca.iter().zip(&cb) {
            assert!((x - y).amax() < 1e-12);
        }
    }

    #[test]
    fn delay_line_impulse_response() {
        let m = 8;
        let sys = catalogue_system("delay1", m).unwrap();
        let h = sys.impulse_response(2 * m).unwrap();
        let c = h.lag_coefficients(1.0 / m as f64, 2 * m).unwrap();
        for (l, cl) in c.iter().enumerate() {
            assert_eq!(cl[(0, 0)], if l == m { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn scalar_exponential_impulse_response() {
        let dt = 1e-3;
        let sys = exponential_diagonal(&[1.0], &[1.0], dt).unwrap();
        let h = sys.impulse_response(5000).unwrap();
        let d = h.density().unwrap();
        for k in [1usize, 100, 4999] {
            let t = k as f64 * dt;
            assert_abs_diff_eq!(d.samples()[k][(0, 0)], (-t).exp(), epsilon = 2.0 * dt);
        }
    }

    #[test]
    fn from_kernel_round_trip() {
        let dt = 0.1;
        let grid = TimeGrid::new(dt, 30).unwrap();
        let h = MatrixMeasure::from_density_fn(2, 1, grid, |t| DMatrix::from_row_slice(2, 1, &[(-t).exp(), t.sin()]))
            .unwrap()
            .add(&MatrixMeasure::dirac(0.5, DMatrix::from_row_slice(2, 1, &[0.0, -2.0])).unwrap())
            .unwrap();
        let sys = DiscreteSystemNode::from_kernel(&h, dt).unwrap();
        let back = sys.impulse_response(30).unwrap();
        let a = h.lag_coefficients(dt, 30).unwrap();
        let b = back.lag_coefficients(dt, 30).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).amax() < 1e-13);
        }
    }

    #[test]
    fn from_kernel_delay_and_zero() {
        let dt = 0.25;
        let sys = DiscreteSystemNode::from_kernel(&MatrixMeasure::delay(1.0).unwrap(), dt).unwrap();
        let u = scalar_input(dt, (1..=8).map(f64::from).collect());
        assert_eq!(sys.respond(&u).unwrap().values(), &[0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0]);

        let zero = DiscreteSystemNode::from_kernel(&MatrixMeasure::zero(1, 1), dt).unwrap();
        assert!(zero.respond(&u).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(DiscreteSystemNode::from_kernel(&MatrixMeasure::delay(0.3).unwrap(), dt).is_err());
    }

    #[test]
    fn from_kernel_matches_exponential_realization() {
        // the ZOH realization's kernel, realized again by the shift buffer
        let dt = 0.05;
        let exp = exponential_diagonal(&[1.0], &[1.0], dt).unwrap();
        let n = 200;
        let shift = DiscreteSystemNode::from_kernel(&exp.impulse_response(n).unwrap(), dt).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = scalar_input(dt, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
        let a = exp.respond(&u).unwrap();
        let b = shift.respond(&u).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }

    #[test]
    fn default_horizons() {
        assert_eq!(transport_boundary_control(8).unwrap().default_horizon().unwrap(), 24);
        let exp = exponential_diagonal(&[1.0], &[1.0], 0.125).unwrap();
        let k = exp.default_horizon().unwrap();
        assert!((-(k as f64) * 0.125).exp() < 1e-12);
        assert!((-((k - 1) as f64) * 0.125).exp() >= 1e-12);
    }

    #[test]
    fn growth_bounds() {
        assert_eq!(transport_boundary_control(4).unwrap().growth_bound(), f64::NEG_INFINITY);
        let g = exponential_diagonal(&[2.0], &[1.0], 0.1).unwrap().growth_bound();
        assert_abs_diff_eq!(g, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sys = random_system(&mut rng, 3, 2, 2, 0.1, 0.5).unwrap();
        let back = DiscreteSystemNode::from_text(&sys.to_text()).unwrap();
        assert_eq!(back, sys);
        let t = transport_boundary_control(4).unwrap();
        assert_eq!(DiscreteSystemNode::from_text(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn transfer_matches_kernel_laplace_differences() {
        let dt = 0.01;
        let h = crate::kernel::catalogue_kernel("exp1", dt).unwrap();
        let sys = DiscreteSystemNode::from_kernel(&h, dt).unwrap();
        let (a, b) = (Complex64::new(0.5, 2.0), Complex64::new(3.0, -1.0));
        let lhs = h.laplace(a)[(0, 0)] - h.laplace(b)[(0, 0)];
        let rhs = sys.transfer(a).unwrap()[(0, 0)] - sys.transfer(b).unwrap()[(0, 0)];
        assert!((lhs - rhs).norm() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn exponential_transfer_close_to_rational() {
        let sys = exponential_diagonal(&[1.0], &[1.0], 1e-3).unwrap();
        let s = Complex64::new(1.0, 1.0);
        let g = sys.transfer(s).unwrap()[(0, 0)];
        assert!((g - 1.0 / (s + 1.0)).norm() < 2e-3);
        let delay = DiscreteSystemNode::from_kernel(&MatrixMeasure::delay(1.0).unwrap(), 0.125).unwrap();
        assert!((delay.transfer(Complex64::new(0.0, 0.0)).unwrap()[(0, 0)] - 1.0).norm() < 1e-14);
    }
}
