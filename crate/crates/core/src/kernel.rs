//! Matrix-valued measures of bounded total variation on `[0, ∞)`.
//!
//! A measure is a finite list of atoms `M_j δ_{τ_j}` plus a piecewise-constant
//! density sampled on a uniform grid. On that class total variation,
//! convolution and the Laplace transform are exact up to the left-endpoint
//! quadrature shared with [`crate::signal`].

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::signal::{same_step, Lp, NormKind, Signal, TimeGrid, ValueSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub time: f64,
    pub weight: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    grid: TimeGrid,
    samples: Vec<DMatrix<f64>>,
}

impl Density {
    pub fn new(grid: TimeGrid, samples: Vec<DMatrix<f64>>) -> Result<Self> {
        if samples.len() != grid.n_steps() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_steps(),
                actual: samples.len(),
                context: "density samples",
            });
        }
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[DMatrix<f64>] {
        &self.samples
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMeasure {
    rows: usize,
    cols: usize,
    atoms: Vec<Atom>,
    density: Option<Density>,
}

/// An induced-norm value together with its exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainValue {
    pub p: Lp,
    pub value: f64,
}

/// Index of `time` on a grid with step `dt`, if it lies on it.
pub(crate) fn grid_index(time: f64, dt: f64) -> Option<usize> {
    let ratio = time / dt;
    let k = ratio.round();
    if (ratio - k).abs() <= 1e-9 * ratio.abs().max(1.0) && k >= 0.0 {
        Some(k as usize)
    } else {
        None
    }
}

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} has non-finite entries")))
    }
}

impl MatrixMeasure {
    pub fn new(rows: usize, cols: usize, atoms: Vec<Atom>, density: Option<Density>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("measure needs rows, cols >= 1".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.weight.shape() != (rows, cols) {
                return Err(Error::InvalidArgument(format!(
                    "atom {i} has shape {:?}, expected ({rows}, {cols})",
                    a.weight.shape()
                )));
            }
            if !(a.time.is_finite() && a.time >= 0.0) {
                return Err(Error::InvalidArgument(format!("atom time {} must be >= 0", a.time)));
            }
            if i > 0 && a.time <= atoms[i - 1].time {
                return Err(Error::InvalidArgument("atom times must be strictly increasing".into()));
            }
            check_finite(&a.weight, "atom")?;
        }
        if let Some(d) = &density {
            for s in &d.samples {
                if s.shape() != (rows, cols) {
                    return Err(Error::InvalidArgument(format!(
                        "density sample has shape {:?}, expected ({rows}, {cols})",
                        s.shape()
                    )));
                }
                check_finite(s, "density sample")?;
            }
        }
        Ok(Self {
            rows,
            cols,
            atoms,
            density,
        })
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            atoms: Vec::new(),
            density: None,
        }
    }

    pub fn dirac(time: f64, weight: DMatrix<f64>) -> Result<Self> {
        let (r, c) = weight.shape();
        Self::new(r, c, vec![Atom { time, weight }], None)
    }

    /// Scalar unit delay `δ_τ`.
    pub fn delay(time: f64) -> Result<Self> {
        Self::dirac(time, DMatrix::from_element(1, 1, 1.0))
    }

    /// Density `f(t_k)` sampled on `grid`, no atoms.
    pub fn from_density_fn<F>(rows: usize, cols: usize, grid: TimeGrid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64>,
    {
        let samples = (0..grid.n_steps()).map(|k| f(grid.time(k))).collect();
        Self::new(rows, cols, Vec::new(), Some(Density::new(grid, samples)?))
    }

    /// Scalar `e^{-t} dt` truncated at `grid`'s horizon.
    pub fn exponential(grid: TimeGrid) -> Result<Self> {
        Self::from_density_fn(1, 1, grid, |t| DMatrix::from_element(1, 1, (-t).exp()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    /// Time at which the density is truncated (0 without a density).
    pub fn truncation_horizon(&self) -> f64 {
        self.density.as_ref().map_or(0.0, |d| d.grid.horizon())
    }

    pub fn density_dt(&self) -> Option<f64> {
        self.density.as_ref().map(|d| d.grid.dt())
    }

    pub fn entry_tv(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::IndexOutOfRange {
                row: i,
                col: j,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.entry_tv_unchecked(i, j))
    }

    fn entry_tv_unchecked(&self, i: usize, j: usize) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight[(i, j)].abs()).sum();
        let density = self.density.as_ref().map_or(0.0, |d| {
            d.grid.dt() * d.samples.iter().map(|s| s[(i, j)].abs()).sum::<f64>()
        });
        atoms + density
    }

    /// Matrix of entrywise total variations.
    pub fn tv_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.entry_tv_unchecked(i, j))
    }

    /// Induced norm of `u ↦ h * u`: worst row TV for `p = ∞` (sup value
    /// norm), worst column TV for `p = 1` (plain 1-norm).
    pub fn induced_gain(&self, p: Lp) -> GainValue {
        let tv = self.tv_matrix();
        let value = match p {
            Lp::Inf => (0..self.rows).map(|i| tv.row(i).sum()).fold(0.0, f64::max),
            Lp::One => (0..self.cols).map(|j| tv.column(j).sum()).fold(0.0, f64::max),
            Lp::Two => panic!("closed-form induced gain is only available for p = 1 and p = ∞"),
        };
        GainValue { p, value }
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    time: a.time,
                    weight: a.weight.transpose(),
                })
                .collect(),
            density: self.density.as_ref().map(|d| Density {
                grid: d.grid,
                samples: d.samples.iter().map(|s| s.transpose()).collect(),
            }),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    time: a.time,
                    weight: &a.weight * c,
                })
                .collect(),
            density: self.density.as_ref().map(|d| Density {
                grid: d.grid,
                samples: d.samples.iter().map(|s| s * c).collect(),
            }),
        }
    }

    /// Sum of two measures; densities must share `dt` (the shorter one is
    /// zero-extended).
    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::InvalidArgument("measure shapes differ".into()));
        }
        let mut atoms: Vec<Atom> = self.atoms.clone();
        for b in &other.atoms {
            match atoms.iter_mut().find(|a| a.time == b.time) {
                Some(a) => a.weight += &b.weight,
                None => atoms.push(b.clone()),
            }
        }
        atoms.sort_by(|a, b| a.time.total_cmp(&b.time));
        let density = match (&self.density, &other.density) {
            (None, None) => None,
            (Some(d), None) | (None, Some(d)) => Some(d.clone()),
            (Some(a), Some(b)) => {
                if !a.grid.same_dt(&b.grid) {
                    return Err(Error::GridMismatch("density steps differ".into()));
                }
                let n = a.samples.len().max(b.samples.len());
                let zero = DMatrix::zeros(self.rows, self.cols);
                let samples = (0..n)
                    .map(|k| a.samples.get(k).unwrap_or(&zero) + b.samples.get(k).unwrap_or(&zero))
                    .collect();
                Some(Density {
                    grid: TimeGrid::new(a.grid.dt(), n)?,
                    samples,
                })
            }
        };
        Self::new(self.rows, self.cols, atoms, density)
    }

    fn check_step(&self, dt: f64) -> Result<()> {
        if let Some(d) = &self.density {
            if !same_step(d.grid.dt(), dt) {
                return Err(Error::GridMismatch(format!(
                    "density dt {} differs from signal dt {dt}",
                    d.grid.dt()
                )));
            }
        }
        Ok(())
    }

    fn atom_lags(&self, dt: f64) -> Result<Vec<usize>> {
        self.atoms
            .iter()
            .map(|a| grid_index(a.time, dt).ok_or(Error::OffGridAtom { time: a.time, dt }))
            .collect()
    }

    /// Largest lag (in steps of `dt`) carrying mass.
    pub fn max_lag(&self, dt: f64) -> Result<usize> {
        self.check_step(dt)?;
        let atom_max = self.atom_lags(dt)?.into_iter().max().unwrap_or(0);
        let dens_max = self.density.as_ref().map_or(0, |d| d.samples.len().saturating_sub(1));
        Ok(atom_max.max(dens_max))
    }

    /// Per-lag weights `C_l = Σ_{τ_a = l dt} M_a + dt D_l` for `l < n_lags`,
    /// i.e. the block-Toeplitz coefficients of the discrete convolution.
    pub fn lag_coefficients(&self, dt: f64, n_lags: usize) -> Result<Vec<DMatrix<f64>>> {
        self.check_step(dt)?;
        let lags = self.atom_lags(dt)?;
        let mut out = vec![DMatrix::zeros(self.rows, self.cols); n_lags];
        for (a, &l) in self.atoms.iter().zip(&lags) {
            if l < n_lags {
                out[l] += &a.weight;
            }
        }
        if let Some(d) = &self.density {
            for (l, s) in d.samples.iter().enumerate().take(n_lags) {
                out[l] += s * dt;
            }
        }
        Ok(out)
    }

    /// `y_k = Σ_a M_a u_{k - τ_a/dt} + dt Σ_{j ≤ k} D_{k-j} u_j`.
    pub fn convolve(&self, u: &Signal) -> Result<Signal> {
        if u.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: u.dim(),
                context: "convolution input",
            });
        }
        let dt = u.grid().dt();
        self.check_step(dt)?;
        let lags = self.atom_lags(dt)?;
        let n = u.n_steps();
        let mut y = Signal::zeros(*u.grid(), output_space_like(u.space(), self.rows));
        let mut acc = vec![0.0; self.rows];
        for k in 0..n {
            acc.iter_mut().for_each(|v| *v = 0.0);
            for (a, &l) in self.atoms.iter().zip(&lags) {
                if l <= k {
                    add_mat_vec(&a.weight, u.value(k - l), 1.0, &mut acc);
                }
            }
            if let Some(d) = &self.density {
                let reach = d.samples.len().min(k + 1);
                for (l, s) in d.samples.iter().enumerate().take(reach) {
                    add_mat_vec(s, u.value(k - l), dt, &mut acc);
                }
            }
            y.value_mut(k).copy_from_slice(&acc);
        }
        Ok(y)
    }

    /// `L(h)(s) = Σ_a e^{-s τ_a} M_a + dt Σ_k e^{-s t_k} D_k`.
    pub fn laplace(&self, s: Complex64) -> DMatrix<Complex64> {
        let mut out = DMatrix::from_element(self.rows, self.cols, Complex64::new(0.0, 0.0));
        for a in &self.atoms {
            let e = (-s * a.time).exp();
            out += a.weight.map(|v| e * v);
        }
        if let Some(d) = &self.density {
            let dt = d.grid.dt();
            for (k, m) in d.samples.iter().enumerate() {
                let e = (-s * d.grid.time(k)).exp() * dt;
                out += m.map(|v| e * v);
            }
        }
        out
    }

    /// Line-oriented text form: `kernel n m dt horizon`, then `atom <t> ...`
    /// and `d <k> ...` lines with row-major entries. `dt` is 0 and `horizon`
    /// 0 when there is no density.
    pub fn to_text(&self) -> String {
        let (dt, horizon) = self
            .density
            .as_ref()
            .map_or((0.0, 0), |d| (d.grid.dt(), d.samples.len()));
        let mut out = format!("kernel {} {} {} {}\n", self.rows, self.cols, dt, horizon);
        for a in &self.atoms {
            write!(out, "atom {}", a.time).unwrap();
            write_row_major(&mut out, &a.weight);
        }
        if let Some(d) = &self.density {
            for (k, s) in d.samples.iter().enumerate() {
                write!(out, "d {k}").unwrap();
                write_row_major(&mut out, s);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty kernel file".into(),
        })?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != "kernel" {
            return Err(Error::Parse {
                line: ln,
                message: "expected `kernel n m dt horizon`".into(),
            });
        }
        let rows: usize = parse_field(h[1], ln)?;
        let cols: usize = parse_field(h[2], ln)?;
        let dt: f64 = parse_field(h[3], ln)?;
        let horizon: usize = parse_field(h[4], ln)?;
        let mut atoms = Vec::new();
        let mut samples = vec![None; horizon];
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 2 + rows * cols {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("expected {} entries", rows * cols),
                });
            }
            let entries = f[2..]
                .iter()
                .map(|s| parse_field::<f64>(s, ln))
                .collect::<Result<Vec<_>>>()?;
            let m = DMatrix::from_row_slice(rows, cols, &entries);
            match f[0] {
                "atom" => atoms.push(Atom {
                    time: parse_field(f[1], ln)?,
                    weight: m,
                }),
                "d" => {
                    let k: usize = parse_field(f[1], ln)?;
                    let slot = samples.get_mut(k).ok_or(Error::Parse {
                        line: ln,
                        message: format!("density index {k} beyond horizon {horizon}"),
                    })?;
                    *slot = Some(m);
                }
                other => {
                    return Err(Error::Parse {
                        line: ln,
                        message: format!("unknown record `{other}`"),
                    })
                }
            }
        }
        let density = if horizon == 0 {
            None
        } else {
            let samples = samples
                .into_iter()
                .map(|s| s.unwrap_or_else(|| DMatrix::zeros(rows, cols)))
                .collect();
            Some(Density::new(TimeGrid::new(dt, horizon)?, samples)?)
        };
        Self::new(rows, cols, atoms, density)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{s}`"),
    })
}

fn write_row_major(out: &mut String, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            write!(out, " {}", m[(i, j)]).unwrap();
        }
    }
    out.push('\n');
}

fn add_mat_vec(m: &DMatrix<f64>, x: &[f64], scale: f64, acc: &mut [f64]) {
    for (i, a) in acc.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, xj) in x.iter().enumerate() {
            s += m[(i, j)] * xj;
        }
        *a += scale * s;
    }
}

/// Output space for a convolution: same norm kind as the input, unit weights.
pub(crate) fn output_space_like(input: &ValueSpace, dim: usize) -> ValueSpace {
    match input.kind() {
        NormKind::Sup => ValueSpace::sup(dim),
        NormKind::Weighted1 => ValueSpace::unit_l1(dim),
        NormKind::Weighted2 => ValueSpace::weighted_l2(vec![1.0; dim]).expect("unit weights"),
    }
}

/// CSV of Laplace evaluations: `re_s,im_s,re_G_i_j,im_G_i_j,...` (row-major).
pub fn laplace_csv(h: &MatrixMeasure, points: &[Complex64]) -> String {
    let mut out = String::from("re_s,im_s");
    for i in 0..h.rows() {
        for j in 0..h.cols() {
            write!(out, ",re_G_{i}_{j},im_G_{i}_{j}").unwrap();
        }
    }
    out.push('\n');
    for &s in points {
        let g = h.laplace(s);
        write!(out, "{},{}", s.re, s.im).unwrap();
        for i in 0..h.rows() {
            for j in 0..h.cols() {
                write!(out, ",{},{}", g[(i, j)].re, g[(i, j)].im).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

/// Default truncation horizon (time units) for exponentially decaying kernels.
pub const EXPONENTIAL_HORIZON: f64 = 30.0;

/// Names accepted by [`catalogue_kernel`].
pub const KERNEL_CATALOGUE: [&str; 3] = ["delay1", "exp1", "diag-exp-2"];

/// Exact Laplace transform of the untruncated catalogue kernel: `e^{-s}`,
/// `1/(s+1)` and `diag(1, 2)/(s+1)`.
pub fn closed_form_laplace(name: &str, s: Complex64) -> Result<DMatrix<Complex64>> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match name {
        "delay1" => Ok(DMatrix::from_element(1, 1, (-s).exp())),
        "exp1" => Ok(DMatrix::from_element(1, 1, one / (s + 1.0))),
        "diag-exp-2" => {
            let r = one / (s + 1.0);
            Ok(DMatrix::from_row_slice(2, 2, &[r, zero, zero, r * 2.0]))
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown kernel `{other}` (expected delay1, exp1 or diag-exp-2)"
        ))),
    }
}

/// Built-in kernels addressed by name: `delay1`, `exp1`, `diag-exp-2`.
pub fn catalogue_kernel(name: &str, dt: f64) -> Result<MatrixMeasure> {
    let exp_grid = || TimeGrid::new(dt, (EXPONENTIAL_HORIZON / dt).ceil() as usize);
    match name {
        "delay1" => {
            grid_index(1.0, dt).ok_or(Error::OffGridAtom { time: 1.0, dt })?;
            MatrixMeasure::delay(1.0)
        }
        "exp1" => MatrixMeasure::exponential(exp_grid()?),
        "diag-exp-2" => MatrixMeasure::from_density_fn(2, 2, exp_grid()?, |t| {
            DMatrix::from_row_slice(2, 2, &[(-t).exp(), 0.0, 0.0, 2.0 * (-t).exp()])
        }),
        other => Err(Error::InvalidArgument(format!(
            "unknown kernel `{other}` (expected delay1, exp1 or diag-exp-2)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar_signal(dt: f64, vals: Vec<f64>) -> Signal {
        Signal::new(TimeGrid::new(dt, vals.len()).unwrap(), ValueSpace::sup(1), vals).unwrap()
    }

    fn cross_kernel(dt: f64) -> MatrixMeasure {
        // [[0, 3 δ_0], [e^{-t}, 0]]
        let grid = TimeGrid::new(dt, (30.0 / dt) as usize).unwrap();
        let dens = MatrixMeasure::from_density_fn(2, 2, grid, |t| {
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, (-t).exp(), 0.0])
        })
        .unwrap();
        let atom = MatrixMeasure::dirac(0.0, DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0])).unwrap();
        dens.add(&atom).unwrap()
    }

    #[test]
    fn tv_of_unit_atom() {
        let h = MatrixMeasure::delay(1.0).unwrap();
        assert_eq!(h.entry_tv(0, 0).unwrap(), 1.0);
        assert!(matches!(h.entry_tv(1, 0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn tv_of_exponential_density() {
        let h = MatrixMeasure::exponential(TimeGrid::new(1e-3, 30_000).unwrap()).unwrap();
        assert_abs_diff_eq!(h.entry_tv(0, 0).unwrap(), 1.0, epsilon = 2e-3);
    }

    #[test]
    fn tv_adds_absolute_atom_mass() {
        let h = MatrixMeasure::exponential(TimeGrid::new(1e-3, 30_000).unwrap())
            .unwrap()
            .add(&MatrixMeasure::dirac(0.0, DMatrix::from_element(1, 1, -2.0)).unwrap())
            .unwrap();
        assert_abs_diff_eq!(h.entry_tv(0, 0).unwrap(), 3.0, epsilon = 2e-3);
    }

    #[test]
    fn induced_gains() {
        let delay = MatrixMeasure::delay(1.0).unwrap();
        assert_eq!(delay.induced_gain(Lp::Inf).value, 1.0);
        assert_eq!(delay.induced_gain(Lp::One).value, 1.0);

        let grid = TimeGrid::new(1e-3, 30_000).unwrap();
        let diag = catalogue_kernel("diag-exp-2", 1e-3).unwrap();
        assert_eq!(diag.density().unwrap().grid(), &grid);
        assert_abs_diff_eq!(diag.induced_gain(Lp::Inf).value, 2.0, epsilon = 4e-3);
        assert_abs_diff_eq!(diag.induced_gain(Lp::One).value, 2.0, epsilon = 4e-3);

        let cross = cross_kernel(1e-3);
        assert_abs_diff_eq!(cross.induced_gain(Lp::Inf).value, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cross.induced_gain(Lp::One).value, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cross.transpose().induced_gain(Lp::One).value, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn transpose_swaps_entries() {
        let cross = cross_kernel(0.01);
        let t = cross.transpose();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(t.entry_tv(j, i).unwrap(), cross.entry_tv(i, j).unwrap());
            }
        }
        let s = MatrixMeasure::exponential(TimeGrid::new(0.1, 10).unwrap()).unwrap();
        assert_eq!(s.transpose(), s);
    }

    #[test]
    fn delay_convolution_shifts() {
        let dt = 0.25;
        let h = MatrixMeasure::delay(1.0).unwrap();
        let u = scalar_signal(dt, (1..=8).map(f64::from).collect());
        let y = h.convolve(&u).unwrap();
        assert_eq!(y.values(), &[0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn exponential_convolution_against_analytic() {
        let dt = 1e-3;
        let h = MatrixMeasure::exponential(TimeGrid::new(dt, 5000).unwrap()).unwrap();
        let u = scalar_signal(dt, vec![1.0; 3000]);
        let y = h.convolve(&u).unwrap();
        for k in [10, 500, 2999] {
            let t = k as f64 * dt;
            // left rule includes the sample at t_k itself: error O(dt)
            assert_abs_diff_eq!(y.value(k)[0], 1.0 - (-t).exp(), epsilon = 2.0 * dt);
        }
    }

    #[test]
    fn off_grid_atom_rejected() {
        let h = MatrixMeasure::delay(0.3).unwrap();
        let u = scalar_signal(0.25, vec![1.0; 4]);
        assert!(matches!(h.convolve(&u), Err(Error::OffGridAtom { .. })));
    }

    #[test]
    fn density_step_mismatch_rejected() {
        let h = MatrixMeasure::exponential(TimeGrid::new(0.1, 4).unwrap()).unwrap();
        let u = scalar_signal(0.2, vec![1.0; 4]);
        assert!(matches!(h.convolve(&u), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn laplace_of_delay_and_exponential() {
        let h = MatrixMeasure::delay(1.0).unwrap();
        assert_eq!(h.laplace(Complex64::new(0.0, 0.0))[(0, 0)], Complex64::new(1.0, 0.0));
        let s = Complex64::new(0.7, -2.0);
        assert_abs_diff_eq!((h.laplace(s)[(0, 0)] - (-s).exp()).norm(), 0.0, epsilon = 1e-15);

        let e = MatrixMeasure::exponential(TimeGrid::new(1e-3, 30_000).unwrap()).unwrap();
        assert_abs_diff_eq!(e.laplace(Complex64::new(1.0, 0.0))[(0, 0)].re, 0.5, epsilon = 2e-3);
    }

    #[test]
    fn laplace_at_large_real_part_tends_to_origin_atom() {
        let h = cross_kernel(0.01);
        let g = h.laplace(Complex64::new(1e6, 0.0));
        let expect = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0]);
        for i in 0..2 {
            for j in 0..2 {
                // density mass at t = 0 contributes dt * D_0 = 0.01
                assert_abs_diff_eq!(g[(i, j)].re, expect[(i, j)], epsilon = 0.011);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let h = cross_kernel(0.5);
        let text = h.to_text();
        assert!(text.starts_with("kernel 2 2 0.5 60\n"));
        assert_eq!(MatrixMeasure::from_text(&text).unwrap(), h);
        let d = MatrixMeasure::delay(1.0).unwrap();
        assert_eq!(MatrixMeasure::from_text(&d.to_text()).unwrap(), d);
        assert!(MatrixMeasure::from_text("kernel 1 1 0.1 2\nd 5 1\n").is_err());
    }

    #[test]
    fn laplace_csv_layout() {
        let csv = laplace_csv(&MatrixMeasure::delay(1.0).unwrap(), &[Complex64::new(0.0, 0.0)]);
        assert_eq!(csv, "re_s,im_s,re_G_0_0,im_G_0_0\n0,0,1,0\n");
    }

    #[test]
    fn lag_coefficients_merge_atoms_and_density() {
        let h = cross_kernel(0.5);
        let c = h.lag_coefficients(0.5, 3).unwrap();
        assert_eq!(c[0], DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.5, 0.0]));
        assert_abs_diff_eq!(c[2][(1, 0)], 0.5 * (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(h.max_lag(0.5).unwrap(), 59);
    }
}
