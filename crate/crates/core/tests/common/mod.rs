#![allow(dead_code)]

use iostab::kernel::{Atom, Density};
use iostab::{MatrixMeasure, Signal, TimeGrid, ValueSpace};
use nalgebra::DMatrix;
use rand::Rng;

/// Random kernel on the grid `dt` with up to `max_lag + 1` lags. Each lag
/// carries either an atom or a density sample, never both, so the lag
/// coefficients have exactly the total variation of the measure.
pub fn random_kernel<R: Rng>(rng: &mut R, n: usize, m: usize, dt: f64, max_lag: usize) -> MatrixMeasure {
    let lags = rng.random_range(1..=max_lag + 1);
    let mut atoms = Vec::new();
    let mut samples = Vec::new();
    for l in 0..lags {
        let w = DMatrix::from_fn(n, m, |_, _| if rng.random_bool(0.7) { rng.random_range(-2.0..2.0) } else { 0.0 });
        if rng.random_bool(0.3) {
            atoms.push(Atom { time: l as f64 * dt, weight: w });
            samples.push(DMatrix::zeros(n, m));
        } else {
            samples.push(w / dt);
        }
    }
    let density = Density::new(TimeGrid::new(dt, samples.len()).unwrap(), samples).unwrap();
    MatrixMeasure::new(n, m, atoms, Some(density)).unwrap()
}

pub fn random_signal<R: Rng>(rng: &mut R, grid: TimeGrid, space: &ValueSpace) -> Signal {
    let values = (0..grid.n_steps() * space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Signal::new(grid, space.clone(), values).unwrap()
}

/// Sum of a few random sinusoids plus a quadratic, per component.
pub fn smooth_signal<R: Rng>(rng: &mut R, grid: TimeGrid, space: &ValueSpace) -> Signal {
    let params: Vec<[f64; 8]> = (0..space.dim())
        .map(|_| std::array::from_fn(|_| rng.random_range(-3.0..3.0)))
        .collect();
    Signal::from_fn(grid, space.clone(), |_, t| {
        params
            .iter()
            .map(|c| {
                c[0] * (c[1] * t + c[2]).sin() + c[3] * (c[4] * t).cos() + c[5] + c[6] * t + 0.1 * c[7] * t * t
            })
            .collect()
    })
    .unwrap()
}
