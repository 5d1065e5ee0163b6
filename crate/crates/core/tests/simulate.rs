use decompound::model::{MixtureDensity, ModelParams};
use decompound::simulate::{discretize, equidistant_grid, simulate_increments, simulate_path};
use proptest::prelude::*;

fn truth() -> ModelParams {
    ModelParams::new(vec![0.8, 0.2], vec![2.0, -1.0], 1.0).unwrap()
}

fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn path_and_direct_routes_agree() {
    let n = 40_000;
    let params = truth();
    let path = simulate_path(params.lambda(), &params.jump_density(), n as f64, 11).unwrap();
    let from_path = discretize(&path, &equidistant_grid(n, 1.0)).unwrap();
    let (direct, _) = simulate_increments(&params, &vec![1.0; n], 12).unwrap();
    let d = ks_distance(from_path.increments(), direct.increments());
    assert!(d < 0.02, "KS distance {d}");
}

#[test]
fn zero_fraction_and_mean() {
    let n = 20_000;
    let params = truth();
    let (data, aux) = simulate_increments(&params, &vec![1.0; n], 3).unwrap();
    let zeros = 1.0 - data.nonzero().len() as f64 / n as f64;
    assert!((zeros - (-1.0f64).exp()).abs() < 0.02, "zero fraction {zeros}");

    // E Z = λΔ E Y = 1.4 and Var Z = λΔ E Y² = 4.4.
    let mean = data.increments().iter().sum::<f64>() / n as f64;
    let se = (4.4 / n as f64).sqrt();
    assert!((mean - 1.4).abs() < 4.0 * se, "mean {mean}");

    let totals = aux.type_totals();
    let share = totals[0] as f64 / (totals[0] + totals[1]) as f64;
    assert!((share - 0.8).abs() < 0.02, "type-1 share {share}");
}

#[test]
fn conditional_on_counts_increments_are_normal() {
    // Standardised residuals given the latent counts should be N(0, 1).
    let params = truth();
    let (data, aux) = simulate_increments(&params, &vec![1.5; 20_000], 5).unwrap();
    let resid: Vec<f64> = aux
        .rows()
        .map(|(i, a)| {
            let n: u32 = a.iter().sum();
            let m = a[0] as f64 * 2.0 - a[1] as f64;
            (data.increments()[i] - m) / (n as f64).sqrt()
        })
        .collect();
    let k = resid.len() as f64;
    let mean = resid.iter().sum::<f64>() / k;
    let var = resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0);
    assert!(mean.abs() < 4.0 / k.sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 4.0 * (2.0 / k).sqrt(), "var {var}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn increments_telescope_to_path_value(
        lambda in 0.1f64..5.0, horizon in 1.0f64..30.0, cells in 1usize..40, seed in any::<u64>(),
    ) {
        let f = MixtureDensity::new(vec![0.5, 0.5], vec![1.0, -2.0], 2.0).unwrap();
        let path = simulate_path(lambda, &f, horizon, seed).unwrap();
        let mut grid: Vec<f64> = (1..=cells).map(|i| horizon * i as f64 / cells as f64).collect();
        grid[cells - 1] = horizon;
        let data = discretize(&path, &grid).unwrap();
        let total: f64 = data.increments().iter().sum();
        prop_assert!((total - path.value_at(horizon)).abs() < 1e-9);
        prop_assert!(path.jump_times().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((data.total_time() - horizon).abs() < 1e-9);
    }

    #[test]
    fn nonzero_set_matches_counts(seed in any::<u64>(), n in 1usize..200, scale in 0.05f64..3.0) {
        let params = ModelParams::new(vec![0.6 * scale, 0.4 * scale], vec![0.5, -0.5], 3.0).unwrap();
        let (data, aux) = simulate_increments(&params, &vec![1.0; n], seed).unwrap();
        prop_assert!(aux.matches(&data));
        for (i, a) in aux.rows() {
            prop_assert!(a.iter().sum::<u32>() >= 1);
            prop_assert!(data.increments()[i] != 0.0);
        }
    }
}
