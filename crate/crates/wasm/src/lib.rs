//! Browser bindings for the static demo page in `www/`.
//!
//! Each export is a thin wrapper over a plain function so the numerics can be
//! tested natively.

use wasm_bindgen::prelude::*;

use coherence_engine::charging::{population_curve, BathSpec, InitialState, DEFAULT_ACC};
use coherence_engine::engine::maximally_coherent_benchmark;
use coherence_engine::optimize::{grid_sweep, AxisRange, Objective, SweepGrid};
use coherence_engine::Result;

fn js(e: coherence_engine::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Objective values over a `βω₀ × gt` grid, row-major with `βω₀` outer.
pub fn heatmap(
    objective: &str,
    n_qubits: usize,
    beta: (f64, f64, usize),
    gt: (f64, f64, usize),
) -> Result<Vec<f64>> {
    let grid = SweepGrid::new(
        AxisRange::new(beta.0, beta.1, beta.2)?,
        AxisRange::new(gt.0, gt.1, gt.2)?,
        objective.parse::<Objective>()?,
        n_qubits,
    )?;
    Ok(grid_sweep(&grid)?.into_iter().map(|r| r.value).collect())
}

/// Evolved ground population on `points` evenly spaced `gt ∈ [0, gt_max]`
/// at `βω₀ = 1`. A negative `kappa` starts from the ground state.
pub fn populations(kappa: f64, gt_max: f64, points: usize) -> Result<Vec<f64>> {
    let init = if kappa < 0.0 {
        InitialState::Ground
    } else {
        InitialState::Kappa(kappa)
    };
    let gts: Vec<f64> = (0..points)
        .map(|i| gt_max * i as f64 / (points.max(2) - 1) as f64)
        .collect();
    let spec = BathSpec::new(1.0, DEFAULT_ACC)?;
    Ok(population_curve(init, &spec, &gts)?
        .into_iter()
        .map(|p| p.evolved)
        .collect())
}

/// Per-qubit internal coherence of `N` maximally coherent qubits, `N = 1..=n_max`.
pub fn benchmark(beta_omega0: f64, n_max: usize) -> Result<Vec<f64>> {
    (1..=n_max)
        .map(|n| maximally_coherent_benchmark(beta_omega0, n))
        .collect()
}

#[wasm_bindgen(js_name = heatmap)]
#[allow(clippy::too_many_arguments)]
pub fn heatmap_js(
    objective: &str,
    n_qubits: usize,
    beta_min: f64,
    beta_max: f64,
    beta_steps: usize,
    gt_min: f64,
    gt_max: f64,
    gt_steps: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    heatmap(
        objective,
        n_qubits,
        (beta_min, beta_max, beta_steps),
        (gt_min, gt_max, gt_steps),
    )
    .map_err(js)
}

#[wasm_bindgen(js_name = populations)]
pub fn populations_js(
    kappa: f64,
    gt_max: f64,
    points: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    populations(kappa, gt_max, points).map_err(js)
}

#[wasm_bindgen(js_name = benchmark)]
pub fn benchmark_js(beta_omega0: f64, n_max: usize) -> std::result::Result<Vec<f64>, JsError> {
    benchmark(beta_omega0, n_max).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_shape() {
        let v = heatmap("eta", 2, (0.5, 2.0, 3), (0.0, 20.0, 4)).unwrap();
        assert_eq!(v.len(), 12);
        assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!(heatmap("work", 2, (0.5, 2.0, 3), (0.0, 20.0, 4)).is_err());
    }

    #[test]
    fn populations_start_at_initial_value() {
        let g = populations(-1.0, 10.0, 11).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert!(g.iter().any(|p| (p - 1.0).abs() > 0.05));
    }

    #[test]
    fn single_qubit_benchmark_is_zero() {
        let b = benchmark(1.0, 4).unwrap();
        assert_eq!(b.len(), 4);
        assert!(b[0].abs() < 1e-12 && b[3] > b[1]);
    }
}
