//! Time-sampled vector-valued signals.
//!
//! All time integrals use the left-endpoint rule on a uniform grid: sample
//! `k` stands for the interval `[k dt, (k+1) dt)`. Norms, pairings and
//! convolutions share that rule so discrete identities hold exactly.
//!
//! Spatial grids on `[0, 1]` with `M` cells associate cell `i` with the point
//! `xi_i = (i + 1) / M`. With `dt = 1/M` this makes the transport state
//! satisfy `x(xi_i, t_k) = u(t_k - xi_i)` without any interpolation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidArgument("time grid needs at least one step".into()));
        }
        Ok(Self { dt, n_steps })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Length of the covered interval, `n_steps * dt`.
    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    pub(crate) fn same_dt(&self, other: &TimeGrid) -> bool {
        same_step(self.dt, other.dt)
    }
}

pub(crate) fn same_step(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Sup,
    Weighted1,
    Weighted2,
}

impl NormKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormKind::Sup => "sup",
            NormKind::Weighted1 => "weighted-1",
            NormKind::Weighted2 => "weighted-2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sup" => Some(NormKind::Sup),
            "weighted-1" => Some(NormKind::Weighted1),
            "weighted-2" => Some(NormKind::Weighted2),
            _ => None,
        }
    }
}

/// Exponent of a Bochner `L^p` norm in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lp {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl Lp {
    pub fn as_str(&self) -> &'static str {
        match self {
            Lp::One => "1",
            Lp::Two => "2",
            Lp::Inf => "inf",
        }
    }
}

/// A finite-dimensional normed space with quadrature weights.
///
/// Sup-normed spaces are coordinate spaces `R^d`; the weights are ignored
/// by the norm and the inner product uses unit weights. When a gain is taken
/// for `p = 1` a coordinate space is read with the plain 1-norm instead
/// (see [`ValueSpace::gain_view`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueSpace {
    kind: NormKind,
    weights: Vec<f64>,
}

impl ValueSpace {
    pub fn new(kind: NormKind, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("value space needs dimension >= 1".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidArgument(format!("weights must be positive, got {w}")));
        }
        Ok(Self { kind, weights })
    }

    pub fn sup(dim: usize) -> Self {
        assert!(dim >= 1, "value space needs dimension >= 1");
        Self {
            kind: NormKind::Sup,
            weights: vec![1.0; dim],
        }
    }

    pub fn unit_l1(dim: usize) -> Self {
        assert!(dim >= 1, "value space needs dimension >= 1");
        Self {
            kind: NormKind::Weighted1,
            weights: vec![1.0; dim],
        }
    }

    pub fn weighted_l1(weights: Vec<f64>) -> Result<Self> {
        Self::new(NormKind::Weighted1, weights)
    }

    pub fn weighted_l2(weights: Vec<f64>) -> Result<Self> {
        Self::new(NormKind::Weighted2, weights)
    }

    /// `L^2[0,1]` sampled on `m` uniform cells (weights `1/m`).
    pub fn uniform_l2(m: usize) -> Self {
        assert!(m >= 1, "value space needs dimension >= 1");
        Self {
            kind: NormKind::Weighted2,
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight used by the inner product (unit for sup-normed spaces).
    pub fn inner_weight(&self, i: usize) -> f64 {
        match self.kind {
            NormKind::Sup => 1.0,
            _ => self.weights[i],
        }
    }

    pub fn inner_weights(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.inner_weight(i)).collect()
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim());
        match self.kind {
            NormKind::Sup => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            NormKind::Weighted1 => v.iter().zip(&self.weights).map(|(x, w)| w * x.abs()).sum(),
            NormKind::Weighted2 => v
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| w * x * x)
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| self.inner_weight(i) * x * y)
            .sum()
    }

    /// `sup { c·v : ‖v‖ ≤ 1 }` for the plain (unweighted) dot product.
    pub fn dual_norm(&self, c: &[f64]) -> f64 {
        match self.kind {
            NormKind::Sup => c.iter().map(|x| x.abs()).sum(),
            NormKind::Weighted1 => c
                .iter()
                .zip(&self.weights)
                .fold(0.0f64, |m, (x, w)| m.max(x.abs() / w)),
            NormKind::Weighted2 => c
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| x * x / w)
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// A unit vector attaining [`dual_norm`](Self::dual_norm).
    ///
    /// Sup spaces use `sign(0) = +1`; weighted-1 picks the earliest maximal
    /// coordinate; weighted-2 returns the normalized Riesz representer, or
    /// the zero vector for the zero functional.
    pub fn maximizer(&self, c: &[f64]) -> Vec<f64> {
        let sign = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
        match self.kind {
            NormKind::Sup => c.iter().map(|&x| sign(x)).collect(),
            NormKind::Weighted1 => {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (i, (x, w)) in c.iter().zip(&self.weights).enumerate() {
                    if x.abs() / w > best_val {
                        best = i;
                        best_val = x.abs() / w;
                    }
                }
                let mut v = vec![0.0; c.len()];
                v[best] = sign(c[best]) / self.weights[best];
                v
            }
            NormKind::Weighted2 => {
                let n = self.dual_norm(c);
                if n == 0.0 {
                    return vec![0.0; c.len()];
                }
                c.iter().zip(&self.weights).map(|(x, w)| x / w / n).collect()
            }
        }
    }

    /// Weights `ω` with `‖z‖ ≤ Σ ω_i |z_i|`, with equality in dimension one.
    pub fn l1_dominating_weight(&self, i: usize) -> f64 {
        match self.kind {
            NormKind::Sup => 1.0,
            NormKind::Weighted1 => self.weights[i],
            NormKind::Weighted2 => self.weights[i].sqrt(),
        }
    }

    /// Weights `ω'` with `dual_norm(c) ≤ Σ ω'_i |c_i|`.
    pub fn dual_l1_dominating_weight(&self, i: usize) -> f64 {
        match self.kind {
            NormKind::Sup => 1.0,
            NormKind::Weighted1 => 1.0 / self.weights[i],
            NormKind::Weighted2 => 1.0 / self.weights[i].sqrt(),
        }
    }

    /// True for `R^d` with its canonical coordinates: sup-normed, or
    /// one-dimensional with unit weight.
    pub fn is_coordinate(&self) -> bool {
        self.kind == NormKind::Sup || (self.dim() == 1 && self.weights[0] == 1.0)
    }

    /// The space in which `L^p` gains are measured: coordinate spaces use the
    /// sup norm for `p = ∞` and the plain 1-norm for `p = 1`.
    pub fn gain_view(&self, p: Lp) -> ValueSpace {
        if !self.is_coordinate() {
            return self.clone();
        }
        match p {
            Lp::Inf => ValueSpace::sup(self.dim()),
            Lp::One => ValueSpace::unit_l1(self.dim()),
            Lp::Two => ValueSpace {
                kind: NormKind::Weighted2,
                weights: vec![1.0; self.dim()],
            },
        }
    }
}

/// A vector-valued function sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: TimeGrid,
    space: ValueSpace,
    values: Vec<f64>,
}

impl Signal {
    /// `values` holds `n_steps` consecutive vectors of length `space.dim()`.
    pub fn new(grid: TimeGrid, space: ValueSpace, values: Vec<f64>) -> Result<Self> {
        let expected = grid.n_steps() * space.dim();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: values.len(),
                context: "signal samples",
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("signal samples must be finite".into()));
        }
        Ok(Self { grid, space, values })
    }

    pub fn zeros(grid: TimeGrid, space: ValueSpace) -> Self {
        let values = vec![0.0; grid.n_steps() * space.dim()];
        Self { grid, space, values }
    }

    /// Builds a signal from `f(k, t_k)`, which must return `space.dim()` values.
    pub fn from_fn<F>(grid: TimeGrid, space: ValueSpace, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, f64) -> Vec<f64>,
    {
        let d = space.dim();
        let mut values = Vec::with_capacity(grid.n_steps() * d);
        for k in 0..grid.n_steps() {
            let v = f(k, grid.time(k));
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: v.len(),
                    context: "signal sample",
                });
            }
            values.extend(v);
        }
        Self::new(grid, space, values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn space(&self) -> &ValueSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn n_steps(&self) -> usize {
        self.grid.n_steps()
    }

    pub fn value(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.values[k * d..(k + 1) * d]
    }

    pub(crate) fn value_mut(&mut self, k: usize) -> &mut [f64] {
        let d = self.dim();
        &mut self.values[k * d..(k + 1) * d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lp_norm(&self, p: Lp) -> f64 {
        lp_norm(self, p)
    }

    /// Same samples read in another space of equal dimension.
    pub fn with_space(&self, space: ValueSpace) -> Result<Self> {
        if space.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: space.dim(),
                context: "reinterpreted signal space",
            });
        }
        Ok(Self {
            grid: self.grid,
            space,
            values: self.values.clone(),
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            space: self.space.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Signal) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            grid: self.grid,
            space: self.space.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Signal) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// Zeroes every sample from index `k` on.
    pub fn truncated_from(&self, k: usize) -> Self {
        let mut out = self.clone();
        let d = self.dim();
        for v in out.values.iter_mut().skip(k * d) {
            *v = 0.0;
        }
        out
    }

    /// Largest absolute sample difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Signal) -> f64 {
        if self.values.len() != other.values.len() {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Backward second difference `s_k - 2 s_{k-1} + s_{k-2}` with zero
    /// samples before `t = 0`, divided by `dt²`.
    pub fn second_difference(&self) -> Self {
        let d = self.dim();
        let scale = 1.0 / (self.grid.dt() * self.grid.dt());
        let at = |k: isize, i: usize| -> f64 {
            if k < 0 {
                0.0
            } else {
                self.values[k as usize * d + i]
            }
        };
        let mut values = vec![0.0; self.values.len()];
        for k in 0..self.n_steps() {
            let ki = k as isize;
            for i in 0..d {
                values[k * d + i] = (at(ki, i) - 2.0 * at(ki - 1, i) + at(ki - 2, i)) * scale;
            }
        }
        Self {
            grid: self.grid,
            space: self.space.clone(),
            values,
        }
    }

    fn check_compatible(&self, other: &Signal) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
                context: "signal value dimension",
            });
        }
        if !self.grid.same_dt(&other.grid) || self.n_steps() != other.n_steps() {
            return Err(Error::GridMismatch(format!(
                "dt {} x {} steps vs dt {} x {} steps",
                self.grid.dt(),
                self.n_steps(),
                other.grid.dt(),
                other.n_steps()
            )));
        }
        Ok(())
    }

    /// CSV with header `t,v0,...,v{d-1}` and one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 0..self.dim() {
            write!(out, ",v{i}").unwrap();
        }
        out.push('\n');
        for k in 0..self.n_steps() {
            write!(out, "{}", self.grid.time(k)).unwrap();
            for v in self.value(k) {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`to_csv`](Self::to_csv) output. `dt` is inferred from the
    /// first two rows unless given; a single-row file requires it.
    pub fn from_csv(text: &str, space: ValueSpace, dt: Option<f64>) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty signal file".into(),
        })?;
        let cols = header.split(',').count();
        if cols != space.dim() + 1 || !header.starts_with('t') {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header with {} value columns", space.dim()),
            });
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (ln, line) in lines {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(Error::Parse {
                    line: ln + 1,
                    message: format!("expected {cols} fields, got {}", fields.len()),
                });
            }
            for (i, f) in fields.iter().enumerate() {
                let v: f64 = f.trim().parse().map_err(|_| Error::Parse {
                    line: ln + 1,
                    message: format!("not a number: {f}"),
                })?;
                if i == 0 {
                    times.push(v);
                } else {
                    values.push(v);
                }
            }
        }
        let dt = match (dt, times.len()) {
            (Some(dt), _) => dt,
            (None, n) if n >= 2 => times[1] - times[0],
            _ => {
                return Err(Error::Parse {
                    line: 2,
                    message: "cannot infer dt from fewer than two rows".into(),
                })
            }
        };
        Self::new(TimeGrid::new(dt, times.len())?, space, values)
    }
}

/// `L^p([0, n dt], V)` norm by the left-endpoint rule.
pub fn lp_norm(s: &Signal, p: Lp) -> f64 {
    let dt = s.grid.dt();
    let pointwise = (0..s.n_steps()).map(|k| s.space.norm(s.value(k)));
    match p {
        Lp::Inf => pointwise.fold(0.0f64, f64::max),
        Lp::One => dt * pointwise.sum::<f64>(),
        Lp::Two => (dt * pointwise.map(|n| n * n).sum::<f64>()).sqrt(),
    }
}

/// Time-reversed pairing `dt Σ_k ⟨a_k, b_{N-1-k}⟩_w`, weights taken from `a`.
pub fn pairing(a: &Signal, b: &Signal) -> Result<f64> {
    a.check_compatible(b)?;
    let n = a.n_steps();
    let sum: f64 = (0..n)
        .map(|k| a.space.inner(a.value(k), b.value(n - 1 - k)))
        .sum();
    Ok(a.grid.dt() * sum)
}

/// Validates `eps` against a grid of `m` cells and returns the band width in
/// cells.
pub fn band_cells(m: usize, eps: f64) -> Result<usize> {
    let invalid = |reason| Error::InvalidEpsilon {
        eps,
        grid_size: m,
        reason,
    };
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("must be positive"));
    }
    let cells = eps * m as f64;
    let n = cells.round();
    if (cells - n).abs() > 1e-9 * cells.max(1.0) {
        return Err(invalid("not an integer multiple of 1/M"));
    }
    let n = n as usize;
    if n == 0 || n > m {
        return Err(invalid("must lie in (0, 1]"));
    }
    Ok(n)
}

/// The moving band indicator `1_[0,1](t) 1_[1-t-eps/2, 1-t+eps/2)(xi)` on an
/// `m`-cell spatial grid.
///
/// The band is half-open so that it covers exactly `eps * m` grid points
/// whenever it lies inside `[0, 1]`, which makes the `L^2` norm exactly
/// `sqrt(eps)` at those times. Requires `dt = 1/m` and a grid reaching `t = 1`.
pub fn u_epsilon(grid: TimeGrid, m: usize, eps: f64) -> Result<Signal> {
    if m == 0 {
        return Err(Error::InvalidArgument("spatial grid needs at least one cell".into()));
    }
    if (grid.dt() * m as f64 - 1.0).abs() > 1e-12 {
        return Err(Error::GridMismatch(format!(
            "band family needs dt = 1/M = {}, got {}",
            1.0 / m as f64,
            grid.dt()
        )));
    }
    if grid.n_steps() < m + 1 {
        return Err(Error::GridMismatch(format!(
            "band family needs the grid to reach t = 1 ({} steps), got {}",
            m + 1,
            grid.n_steps()
        )));
    }
    let n = band_cells(m, eps)? as i64;
    let m_i = m as i64;
    Signal::from_fn(grid, ValueSpace::uniform_l2(m), |k, _| {
        let k = k as i64;
        if k > m_i {
            return vec![0.0; m];
        }
        // point q = i + 1 (in units of 1/M) lies in [c - n/2, c + n/2) with c = M - k
        let lo = 2 * (m_i - k) - n;
        let hi = 2 * (m_i - k) + n;
        (0..m_i)
            .map(|i| {
                let q2 = 2 * (i + 1);
                if q2 >= lo && q2 < hi {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar(dt: f64, vals: &[f64]) -> Signal {
        Signal::new(TimeGrid::new(dt, vals.len()).unwrap(), ValueSpace::sup(1), vals.to_vec()).unwrap()
    }

    #[test]
    fn constant_signal_norms() {
        let s = scalar(0.25, &[1.0; 4]);
        assert_eq!(s.lp_norm(Lp::Inf), 1.0);
        assert_eq!(s.lp_norm(Lp::One), 1.0);
        assert_eq!(s.lp_norm(Lp::Two), 1.0);
    }

    #[test]
    fn single_sample_norms() {
        let s = scalar(0.25, &[4.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.lp_norm(Lp::One), 1.0);
        assert_eq!(s.lp_norm(Lp::Inf), 4.0);
    }

    #[test]
    fn pairing_of_constants_and_zero() {
        let one = scalar(0.25, &[1.0; 4]);
        let zero = scalar(0.25, &[0.0; 4]);
        assert_eq!(pairing(&one, &one).unwrap(), 1.0);
        assert_eq!(pairing(&zero, &one).unwrap(), 0.0);
    }

    #[test]
    fn pairing_reverses_time() {
        let a = scalar(1.0, &[1.0, 0.0, 0.0]);
        let b = scalar(1.0, &[0.0, 0.0, 5.0]);
        assert_eq!(pairing(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn pairing_rejects_mismatch() {
        let a = scalar(0.25, &[1.0; 4]);
        let b = scalar(0.5, &[1.0; 4]);
        assert!(matches!(pairing(&a, &b), Err(Error::GridMismatch(_))));
        let c = Signal::zeros(TimeGrid::new(0.25, 4).unwrap(), ValueSpace::sup(2));
        assert!(matches!(pairing(&a, &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn weighted_norms() {
        let w1 = ValueSpace::weighted_l1(vec![0.5, 0.25]).unwrap();
        let w2 = ValueSpace::weighted_l2(vec![0.5, 0.25]).unwrap();
        assert_eq!(w1.norm(&[2.0, -4.0]), 2.0);
        assert_eq!(w2.norm(&[2.0, -4.0]), (2.0f64 + 4.0).sqrt());
        assert_eq!(ValueSpace::sup(2).norm(&[2.0, -4.0]), 4.0);
        assert!(ValueSpace::weighted_l2(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn maximizers_attain_dual_norm() {
        let c = [0.3, -1.2, 0.0, 2.0];
        for space in [
            ValueSpace::sup(4),
            ValueSpace::weighted_l1(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
            ValueSpace::weighted_l2(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
        ] {
            let v = space.maximizer(&c);
            assert_abs_diff_eq!(space.norm(&v), 1.0, epsilon = 1e-14);
            let dot: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(dot, space.dual_norm(&c), epsilon = 1e-14);
        }
        assert_eq!(ValueSpace::sup(2).maximizer(&[0.0, -1.0]), vec![1.0, -1.0]);
        assert_eq!(ValueSpace::uniform_l2(2).maximizer(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn u_epsilon_single_cell_at_start() {
        let grid = TimeGrid::new(0.25, 5).unwrap();
        let u = u_epsilon(grid, 4, 0.25).unwrap();
        assert_eq!(u.value(0), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(u.space().norm(u.value(0)), 0.5);
    }

    #[test]
    fn u_epsilon_full_width_band() {
        // the full band is clipped at t = 0 and fully inside [0,1] at t = 1/2 - dt
        let m = 4;
        let grid = TimeGrid::new(0.25, 8).unwrap();
        let u = u_epsilon(grid, m, 1.0).unwrap();
        assert_eq!(u.value(1), &[1.0; 4]);
        assert_eq!(u.lp_norm(Lp::Inf), 1.0);
        assert!(u.space().norm(u.value(0)) < 1.0);
        for k in m + 1..8 {
            assert!(u.value(k).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn u_epsilon_sup_norm_is_sqrt_eps() {
        let m = 64;
        let grid = TimeGrid::new(1.0 / m as f64, m + 1).unwrap();
        for n in [1, 2, 3, 7, 16, 33, 64] {
            let eps = n as f64 / m as f64;
            let u = u_epsilon(grid, m, eps).unwrap();
            assert_abs_diff_eq!(u.lp_norm(Lp::Inf), eps.sqrt(), epsilon = 1e-14);
            for k in 0..=m {
                let cells = u.value(k).iter().filter(|&&v| v == 1.0).count();
                assert!(cells <= n);
            }
        }
    }

    #[test]
    fn u_epsilon_rejects_off_grid_eps() {
        let grid = TimeGrid::new(0.25, 5).unwrap();
        assert!(matches!(u_epsilon(grid, 4, 0.3), Err(Error::InvalidEpsilon { .. })));
        assert!(matches!(u_epsilon(grid, 4, 1.25), Err(Error::InvalidEpsilon { .. })));
        assert!(matches!(u_epsilon(grid, 4, 0.0), Err(Error::InvalidEpsilon { .. })));
        let coarse = TimeGrid::new(0.5, 5).unwrap();
        assert!(matches!(u_epsilon(coarse, 4, 0.25), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn second_difference_of_ramp() {
        let s = scalar(0.5, &[0.0, 1.0, 2.0, 3.0]);
        let d2 = s.second_difference();
        assert_eq!(d2.values(), &[0.0, 4.0, 0.0, 0.0]);
    }

    #[test]
    fn csv_round_trip() {
        let s = Signal::new(
            TimeGrid::new(0.1, 3).unwrap(),
            ValueSpace::sup(2),
            vec![0.1, -2.5e-17, 3.0, 1.0 / 3.0, 7.0, f64::MIN_POSITIVE],
        )
        .unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("t,v0,v1\n"));
        let back = Signal::from_csv(&csv, ValueSpace::sup(2), Some(0.1)).unwrap();
        assert_eq!(back, s);
    }
}
