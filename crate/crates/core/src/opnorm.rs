//! Operator norms between weighted value spaces and certified upper bounds
//! for the `L^p` gain of a discrete convolution.

use nalgebra::DMatrix;

use crate::signal::{Lp, NormKind, ValueSpace};

/// Induced norm of `c : U → Y`.
///
/// Exact when either side is one-dimensional, when `U` is weighted-1, when
/// `Y` is sup-normed, or for weighted-2 to weighted-2. Otherwise returns the
/// entrywise upper bound `dual_norm_U(a)`, `a_j = Σ_i ω_i |c_ij|`.
pub fn induced_norm(c: &DMatrix<f64>, u: &ValueSpace, y: &ValueSpace) -> f64 {
    let (ny, nu) = c.shape();
    debug_assert_eq!(nu, u.dim());
    debug_assert_eq!(ny, y.dim());
    let row = |i: usize| -> Vec<f64> { c.row(i).iter().copied().collect() };
    let col = |j: usize| -> Vec<f64> { c.column(j).iter().copied().collect() };
    if ny == 1 {
        return y.norm(&[1.0]) * u.dual_norm(&row(0));
    }
    if nu == 1 {
        return y.norm(&col(0)) / u.norm(&[1.0]);
    }
    if u.kind() == NormKind::Weighted1 {
        return (0..nu)
            .map(|j| y.norm(&col(j)) / u.weights()[j])
            .fold(0.0, f64::max);
    }
    if y.kind() == NormKind::Sup {
        return (0..ny).map(|i| u.dual_norm(&row(i))).fold(0.0, f64::max);
    }
    if u.kind() == NormKind::Weighted2 && y.kind() == NormKind::Weighted2 {
        let scaled = DMatrix::from_fn(ny, nu, |i, j| {
            y.weights()[i].sqrt() * c[(i, j)] / u.weights()[j].sqrt()
        });
        return scaled.svd(false, false).singular_values.max();
    }
    let a: Vec<f64> = (0..nu)
        .map(|j| (0..ny).map(|i| y.l1_dominating_weight(i) * c[(i, j)].abs()).sum())
        .collect();
    u.dual_norm(&a)
}

/// Upper bound on the `L^p` gain of `y_k = Σ_l C_l u_{k-l}` from `L^p(U)` to
/// `L^p(Y)` (left-endpoint quadrature, any horizon covered by `coeffs`).
///
/// Takes the smaller of two valid bounds: the sum of per-lag induced norms,
/// and an entrywise aggregation that is exact on coordinate spaces
/// (worst row TV for `p = ∞`, worst column TV for `p = 1`) and on the
/// one-sided operator-valued shift examples.
pub fn convolution_gain_bound(coeffs: &[DMatrix<f64>], u: &ValueSpace, y: &ValueSpace, p: Lp) -> f64 {
    let (nu, ny) = (u.dim(), y.dim());
    let per_lag: f64 = coeffs.iter().map(|c| induced_norm(c, u, y)).sum();
    let aggregated = match p {
        Lp::One => {
            // Σ_l ‖C_l v‖_Y ≤ a·|v| ≤ dual_norm_U(a) ‖v‖_U
            let a: Vec<f64> = (0..nu)
                .map(|j| {
                    coeffs
                        .iter()
                        .map(|c| (0..ny).map(|i| y.l1_dominating_weight(i) * c[(i, j)].abs()).sum::<f64>())
                        .sum()
                })
                .collect();
            u.dual_norm(&a)
        }
        Lp::Inf => {
            // w·y_k ≤ Σ_l dual_norm_U(C_lᵀ w) ‖u‖_∞ ≤ b·|w| ‖u‖_∞, sup over w is ‖b‖_Y
            let b: Vec<f64> = (0..ny)
                .map(|i| {
                    coeffs
                        .iter()
                        .map(|c| (0..nu).map(|j| u.dual_l1_dominating_weight(j) * c[(i, j)].abs()).sum::<f64>())
                        .sum()
                })
                .collect();
            y.norm(&b)
        }
        Lp::Two => f64::INFINITY,
    };
    per_lag.min(aggregated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spaces(rng: &mut ChaCha8Rng, d: usize) -> Vec<ValueSpace> {
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..2.0)).collect();
        vec![
            ValueSpace::sup(d),
            ValueSpace::weighted_l1(w.clone()).unwrap(),
            ValueSpace::weighted_l2(w).unwrap(),
        ]
    }

    // brute force: sample the unit sphere of U, never exceed the bound
    #[test]
    fn induced_norm_dominates_sampled_ratios() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let (ny, nu) = (rng.random_range(1..4), rng.random_range(1..4));
            let c = DMatrix::from_fn(ny, nu, |_, _| rng.random_range(-1.0..1.0));
            for u in spaces(&mut rng, nu) {
                for y in spaces(&mut rng, ny) {
                    let bound = induced_norm(&c, &u, &y);
                    let mut best = 0.0f64;
                    for _ in 0..400 {
                        let v: Vec<f64> = (0..nu).map(|_| rng.random_range(-1.0..1.0)).collect();
                        let cv: Vec<f64> = (0..ny).map(|i| (0..nu).map(|j| c[(i, j)] * v[j]).sum()).collect();
                        best = best.max(y.norm(&cv) / u.norm(&v));
                    }
                    assert!(best <= bound * (1.0 + 1e-12), "{best} > {bound}");
                }
            }
        }
    }

    #[test]
    fn exact_cases() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.5, 3.0]);
        // sup -> sup: max row sum
        assert_eq!(induced_norm(&c, &ValueSpace::sup(2), &ValueSpace::sup(2)), 3.5);
        // l1 -> l1: max column sum
        assert_eq!(induced_norm(&c, &ValueSpace::unit_l1(2), &ValueSpace::unit_l1(2)), 5.0);
        // l2 -> l2 with unit weights: spectral norm
        let l2 = ValueSpace::weighted_l2(vec![1.0, 1.0]).unwrap();
        let s = c.clone().svd(false, false).singular_values.max();
        assert_abs_diff_eq!(induced_norm(&c, &l2, &l2), s, epsilon = 1e-14);
    }

    #[test]
    fn coordinate_bounds_are_tv() {
        let coeffs = vec![
            DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.5, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.25, 0.0]),
        ];
        assert_eq!(convolution_gain_bound(&coeffs, &ValueSpace::sup(2), &ValueSpace::sup(2), Lp::Inf), 3.0);
        assert_eq!(
            convolution_gain_bound(&coeffs, &ValueSpace::unit_l1(2), &ValueSpace::unit_l1(2), Lp::One),
            3.0
        );
    }
}
