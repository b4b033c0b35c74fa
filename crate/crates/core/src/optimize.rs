//! Grid sweeps over `(βω₀, gt)` and downhill-simplex refinement.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::charging::{SeriesConvention, DEFAULT_ACC};
use crate::engine::{
    cycle_performance, CyclePerformance, EngineOperatingPoint, DEFAULT_MAX_QUBITS,
};
use crate::error::{invalid, Error, Result};

/// Smallest admissible `βω₀`; the bath partition function diverges at zero.
pub const MIN_BETA: f64 = 0.01;
pub const DEFAULT_GRID_STEPS: usize = 60;
/// Simplex stops once both coordinates span less than this.
pub const SIMPLEX_TOL: f64 = 1e-3;
pub const MAX_EVALUATIONS: usize = 200;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Evenly spaced closed interval with `steps` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(invalid(
                "range",
                format!("need finite min < max, got {min}:{max}"),
            ));
        }
        if steps < 2 {
            return Err(invalid(
                "range",
                format!("need at least 2 steps, got {steps}"),
            ));
        }
        Ok(Self { min, max, steps })
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.steps - 1) as f64
    }

    /// Node values; the last one is exactly `max`.
    pub fn values(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + i as f64 * h
                }
            })
            .collect()
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }
}

impl FromStr for AxisRange {
    type Err = Error;

    /// Parses `min:max:steps`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, steps] = parts.as_slice() else {
            return Err(invalid(
                "range",
                format!("expected min:max:steps, got {s:?}"),
            ));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid("range", format!("bad number {t:?}")))
        };
        let steps = steps
            .trim()
            .parse::<usize>()
            .map_err(|_| invalid("range", format!("bad step count {steps:?}")))?;
        Self::new(num(min)?, num(max)?, steps)
    }
}

impl fmt::Display for AxisRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}:{}", self.min, self.max, self.steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `C_ext(ρ_S)` of one charged qubit.
    ExternalCoherence,
    /// Cycle efficiency `η`.
    Efficiency,
}

impl Objective {
    pub fn value(self, perf: &CyclePerformance) -> f64 {
        match self {
            Objective::ExternalCoherence => perf.c_ext_per_qubit,
            Objective::Efficiency => perf.eta,
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ext" | "external_coherence" => Ok(Objective::ExternalCoherence),
            "eta" | "efficiency" => Ok(Objective::Efficiency),
            _ => Err(invalid("objective", format!("unknown objective {s:?}"))),
        }
    }
}

/// Sweep domain and the model settings used at every node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub beta_range: AxisRange,
    pub gt_range: AxisRange,
    pub objective: Objective,
    pub n_qubits: usize,
    pub acc: f64,
    pub max_qubits: usize,
    pub convention: SeriesConvention,
}

impl SweepGrid {
    pub fn new(
        beta_range: AxisRange,
        gt_range: AxisRange,
        objective: Objective,
        n_qubits: usize,
    ) -> Result<Self> {
        if beta_range.min <= 0.0 {
            return Err(invalid("beta_range", "minimum must be positive"));
        }
        if gt_range.min < 0.0 {
            return Err(invalid("gt_range", "minimum must be non-negative"));
        }
        if n_qubits == 0 {
            return Err(invalid("n_qubits", "must be at least 1"));
        }
        Ok(Self {
            beta_range,
            gt_range,
            objective,
            n_qubits,
            acc: DEFAULT_ACC,
            max_qubits: DEFAULT_MAX_QUBITS,
            convention: SeriesConvention::WithPrefactor,
        })
    }

    /// 60×60 over `βω₀ ∈ [0.01, 3]`, `gt ∈ [0, 30]`.
    pub fn standard(objective: Objective, n_qubits: usize) -> Result<Self> {
        Self::new(
            AxisRange::new(MIN_BETA, 3.0, DEFAULT_GRID_STEPS)?,
            AxisRange::new(0.0, 30.0, DEFAULT_GRID_STEPS)?,
            objective,
            n_qubits,
        )
    }

    pub fn with_acc(mut self, acc: f64) -> Self {
        self.acc = acc;
        self
    }

    pub fn with_max_qubits(mut self, max_qubits: usize) -> Self {
        self.max_qubits = max_qubits;
        self
    }

    pub fn with_convention(mut self, convention: SeriesConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_n_qubits(mut self, n_qubits: usize) -> Self {
        self.n_qubits = n_qubits;
        self
    }

    /// Nodes in row-major order, `βω₀` outer.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let gts = self.gt_range.values();
        self.beta_range
            .values()
            .into_iter()
            .flat_map(|b| gts.iter().map(move |&g| (b, g)))
            .collect()
    }

    pub fn evaluate(&self, beta_omega0: f64, gt: f64) -> Result<CyclePerformance> {
        let mut op = EngineOperatingPoint::with_max_qubits(
            self.n_qubits,
            beta_omega0,
            gt,
            self.acc,
            self.max_qubits,
        )?;
        op.convention = self.convention;
        cycle_performance(&op)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta_omega0: f64,
    pub gt: f64,
    pub value: f64,
    pub performance: CyclePerformance,
}

/// Evaluates every node; rows come back in node order whatever the thread
/// schedule.
pub fn grid_sweep(grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    let eval = |&(b, g): &(f64, f64)| -> Result<SweepRow> {
        let performance = grid.evaluate(b, g)?;
        Ok(SweepRow {
            beta_omega0: b,
            gt: g,
            value: grid.objective.value(&performance),
            performance,
        })
    };
    let nodes = grid.nodes();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        nodes.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        nodes.iter().map(eval).collect()
    }
}

/// First row holding the maximum; with row-major order that prefers smaller
/// `βω₀`, then smaller `gt`.
pub fn grid_argmax(rows: &[SweepRow]) -> Option<&SweepRow> {
    rows.iter()
        .fold(None, |best: Option<&SweepRow>, r| match best {
            Some(b) if r.value <= b.value => Some(b),
            _ => Some(r),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub point: (f64, f64),
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_point: (f64, f64),
    pub best_value: f64,
    /// Every objective evaluation, in order.
    pub trace: Vec<Evaluation>,
    /// Best vertex after each simplex iteration.
    pub best_history: Vec<Evaluation>,
    /// Whether the simplex met the size tolerance within the budget.
    pub refined: bool,
}

/// Axis-aligned box for the simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub beta: (f64, f64),
    pub gt: (f64, f64),
}

impl Bounds {
    fn clip(&self, p: (f64, f64)) -> (f64, f64) {
        (
            p.0.clamp(self.beta.0, self.beta.1),
            p.1.clamp(self.gt.0, self.gt.1),
        )
    }
}

/// `a` is better than `b`: higher value, then smaller `βω₀`, then smaller `gt`.
fn better(a: &Evaluation, b: &Evaluation) -> bool {
    if a.value != b.value {
        return a.value > b.value;
    }
    (a.point.0, a.point.1) < (b.point.0, b.point.1)
}

fn order(simplex: &mut [Evaluation]) {
    simplex.sort_by(|a, b| {
        if better(a, b) {
            std::cmp::Ordering::Less
        } else if better(b, a) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
}

/// Downhill-simplex maximization of `f` inside `bounds`, starting from a
/// triangle with legs `scale` along each axis.
pub fn nelder_mead<F>(
    start: (f64, f64),
    scale: (f64, f64),
    bounds: Bounds,
    mut f: F,
) -> Result<OptimizationResult>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let mut trace = Vec::new();
    let mut eval = |p: (f64, f64), trace: &mut Vec<Evaluation>| -> Result<Evaluation> {
        let p = bounds.clip(p);
        let e = Evaluation {
            point: p,
            value: f(p.0, p.1)?,
        };
        trace.push(e);
        Ok(e)
    };

    let start = bounds.clip(start);
    let leg =
        |x: f64, h: f64, (lo, hi): (f64, f64)| if x + h <= hi { x + h } else { (x - h).max(lo) };
    let mut simplex = [
        eval(start, &mut trace)?,
        eval((leg(start.0, scale.0, bounds.beta), start.1), &mut trace)?,
        eval((start.0, leg(start.1, scale.1, bounds.gt)), &mut trace)?,
    ];
    order(&mut simplex);
    let mut best_history = vec![simplex[0]];
    let mut refined = false;

    while trace.len() < MAX_EVALUATIONS {
        let span = |k: usize| {
            let xs = simplex
                .iter()
                .map(|e| if k == 0 { e.point.0 } else { e.point.1 });
            xs.clone().fold(f64::NEG_INFINITY, f64::max) - xs.fold(f64::INFINITY, f64::min)
        };
        if span(0) < SIMPLEX_TOL && span(1) < SIMPLEX_TOL {
            refined = true;
            break;
        }

        let [best, mid, worst] = simplex;
        let c = (
            0.5 * (best.point.0 + mid.point.0),
            0.5 * (best.point.1 + mid.point.1),
        );
        let towards = |t: f64| {
            (
                c.0 + t * (worst.point.0 - c.0),
                c.1 + t * (worst.point.1 - c.1),
            )
        };

        let reflected = eval(towards(-REFLECT), &mut trace)?;
        if better(&reflected, &best) {
            let expanded = eval(towards(-REFLECT * EXPAND), &mut trace)?;
            simplex[2] = if better(&expanded, &reflected) {
                expanded
            } else {
                reflected
            };
        } else if better(&reflected, &mid) {
            simplex[2] = reflected;
        } else {
            let outside = better(&reflected, &worst);
            let contracted = eval(
                towards(if outside { -CONTRACT } else { CONTRACT }),
                &mut trace,
            )?;
            let accept = if outside {
                !better(&reflected, &contracted)
            } else {
                better(&contracted, &worst)
            };
            if accept {
                simplex[2] = contracted;
            } else {
                for vertex in &mut simplex[1..] {
                    let p = vertex.point;
                    let q = (
                        best.point.0 + SHRINK * (p.0 - best.point.0),
                        best.point.1 + SHRINK * (p.1 - best.point.1),
                    );
                    *vertex = eval(q, &mut trace)?;
                }
            }
        }
        order(&mut simplex);
        best_history.push(simplex[0]);
    }

    Ok(OptimizationResult {
        best_point: simplex[0].point,
        best_value: simplex[0].value,
        trace,
        best_history,
        refined,
    })
}

/// Simplex refinement of the grid objective from `start`, with initial legs of
/// one grid cell.
pub fn refine(grid: &SweepGrid, start: (f64, f64)) -> Result<OptimizationResult> {
    let bounds = Bounds {
        beta: (grid.beta_range.min, grid.beta_range.max),
        gt: (grid.gt_range.min, grid.gt_range.max),
    };
    let scale = (grid.beta_range.spacing(), grid.gt_range.spacing());
    nelder_mead(start, scale, bounds, |b, g| {
        Ok(grid.objective.value(&grid.evaluate(b, g)?))
    })
}

/// Grid sweep followed by refinement from the grid argmax. The trace starts
/// with all grid evaluations.
pub fn optimize(grid: &SweepGrid) -> Result<OptimizationResult> {
    let rows = grid_sweep(grid)?;
    let top = grid_argmax(&rows).ok_or_else(|| invalid("grid", "no nodes"))?;
    let start = Evaluation {
        point: (top.beta_omega0, top.gt),
        value: top.value,
    };
    let simplex = refine(grid, start.point)?;
    let mut trace: Vec<Evaluation> = rows
        .iter()
        .map(|r| Evaluation {
            point: (r.beta_omega0, r.gt),
            value: r.value,
        })
        .collect();
    let best = if better(
        &start,
        &Evaluation {
            point: simplex.best_point,
            value: simplex.best_value,
        },
    ) {
        start
    } else {
        Evaluation {
            point: simplex.best_point,
            value: simplex.best_value,
        }
    };
    trace.extend(simplex.trace);
    Ok(OptimizationResult {
        best_point: best.point,
        best_value: best.value,
        trace,
        best_history: simplex.best_history,
        refined: simplex.refined,
    })
}

/// Optimum for one system size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerNOptimum {
    pub n_qubits: usize,
    pub best_point: (f64, f64),
    pub best_value: f64,
    pub refined: bool,
    /// Full metrics at the optimum; `c_int_total / N` is the per-qubit
    /// internal coherence there.
    pub performance: CyclePerformance,
}

/// Runs [`optimize`] for `N = 1..=n_max`, reusing the grid's other settings.
pub fn optimal_per_n(grid: &SweepGrid, n_max: usize) -> Result<Vec<PerNOptimum>> {
    if n_max == 0 {
        return Err(invalid("n_max", "must be at least 1"));
    }
    (1..=n_max)
        .map(|n| optimum_for_size(&grid.with_n_qubits(n)))
        .collect()
}

/// [`optimize`] at the grid's own `N`, with full metrics at the optimum.
pub fn optimum_for_size(grid: &SweepGrid) -> Result<PerNOptimum> {
    let r = optimize(grid)?;
    Ok(PerNOptimum {
        n_qubits: grid.n_qubits,
        best_point: r.best_point,
        best_value: r.best_value,
        refined: r.refined,
        performance: grid.evaluate(r.best_point.0, r.best_point.1)?,
    })
}
