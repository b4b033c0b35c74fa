//! Verification suites: each check is a residual compared with a tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use coherence_engine::charging::{
    analytic_system_matrix, charged_qubit_state, coherence_amplitude, effective_bath_dimension,
    evolve_joint, gibbs_qubit, population_curve, series_remainder_bound, truncated_gibbs_bath,
    BathSpec, InitialState, SeriesConvention,
};
use coherence_engine::collective::{
    collective_coherence_check, energy_commutator_norm, random_couplings,
    tc_interaction_hamiltonian, tc_reduced_system, TcSpec, DEFAULT_DIM_CAP,
};
use coherence_engine::engine::{conservation_check, rate_checks, DEFAULT_RATE_STEP};
use coherence_engine::operator::{max_abs_diff, trace_distance_matrices};
use coherence_engine::Result;

use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Invariants,
    Conservation,
    Rates,
    Truncation,
    Populations,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    /// Pass when `residual ≤ tolerance`.
    AtMost,
    /// Pass when `residual > tolerance`: the check must detect a difference.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub expect: Expect,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_owned(),
            residual,
            tolerance,
            expect: Expect::AtMost,
            pass: residual <= tolerance,
        }
    }

    pub fn above(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_owned(),
            residual,
            tolerance,
            expect: Expect::Above,
            pass: residual > tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub acc: f64,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["name", "residual", "tolerance", "expect", "pass"]);
        for c in &self.checks {
            let expect = match c.expect {
                Expect::AtMost => "at_most",
                Expect::Above => "above",
            };
            t.push(vec![
                Cell::Text(c.name.clone()),
                c.residual.into(),
                c.tolerance.into(),
                expect.into(),
                c.pass.into(),
            ]);
        }
        t
    }
}

/// `n` evenly spaced points on `[a, b]`, both ends included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// The 10×10 `(βω₀, gt)` grid shared by the oracle and conservation checks.
pub fn check_grid() -> Vec<(f64, f64)> {
    let gts = linspace(0.0, 30.0, 10);
    linspace(0.3, 3.0, 10)
        .into_iter()
        .flat_map(|b| gts.iter().map(move |&g| (b, g)))
        .collect()
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

pub fn run_suite(suite: Suite, seed: u64, acc: f64) -> Result<Report> {
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Invariants {
        checks.extend(invariants(seed, acc)?);
    }
    if all || suite == Suite::Conservation {
        checks.extend(conservation()?);
    }
    if all || suite == Suite::Rates {
        checks.extend(rates(seed)?);
    }
    if all || suite == Suite::Truncation {
        checks.extend(truncation(acc)?);
    }
    if all || suite == Suite::Populations {
        checks.extend(nonthermal_starts(acc)?);
    }
    let name = match suite {
        Suite::Invariants => "invariants",
        Suite::Conservation => "conservation",
        Suite::Rates => "rates",
        Suite::Truncation => "truncation",
        Suite::Populations => "populations",
        Suite::All => "all",
    };
    Ok(Report {
        suite: name.to_owned(),
        seed,
        acc,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Thermal populations survive charging (system and bath); collective
/// charging adds no internal coherence.
pub fn invariants(seed: u64, acc: f64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sys, mut bath) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let beta = rng.random_range(0.2..3.0);
        let gt = rng.random_range(0.0..30.0);
        let spec = BathSpec::new(beta, acc)?;
        let joint = evolve_joint(&gibbs_qubit(beta), &spec, gt)?;
        let rho = joint.reduced_system();
        let gibbs = gibbs_qubit(beta).populations();
        sys = sys.max(max(rho
            .populations()
            .iter()
            .zip(&gibbs)
            .map(|(a, b)| (a - b).abs())));
        let thermal = truncated_gibbs_bath(&spec);
        bath =
            bath.max(max(joint.bath_populations().iter().enumerate().map(
                |(n, p)| (p - thermal.get(n).copied().unwrap_or(0.0)).abs(),
            )));
    }

    let (mut c_int, mut block, mut diag, mut comm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in [2usize, 3] {
        for _ in 0..10 {
            let beta = rng.random_range(0.5..3.0);
            let gt = rng.random_range(0.0..30.0);
            let couplings = random_couplings(n, rng.random());
            let spec = TcSpec::new(couplings, BathSpec::new(beta, acc)?, gt)?;
            let h = tc_interaction_hamiltonian(&spec, DEFAULT_DIM_CAP)?;
            comm = comm.max(energy_commutator_norm(&h, &spec.basis()));
            let r = collective_coherence_check(&spec)?;
            c_int = c_int.max(r.c_int);
            block = block.max(r.block_residual);
            diag = diag.max(r.diagonal_residual);
        }
    }

    let bath1 = BathSpec::new(1.0, acc)?;
    let tc = tc_reduced_system(&TcSpec::uniform(1, bath1, 5.0)?)?;
    let jc = evolve_joint(&gibbs_qubit(1.0), &bath1, 5.0)?.reduced_system();

    Ok(vec![
        Check::at_most("thermal.system_populations", sys, 1e-8),
        Check::at_most("thermal.bath_populations", bath, 1e-8),
        Check::at_most("collective.internal_coherence", c_int, 1e-8),
        Check::at_most("collective.block_proportionality", block, 1e-8),
        Check::at_most("collective.register_populations", diag, 1e-8),
        Check::at_most("collective.energy_commutator", comm, 1e-10),
        Check::at_most(
            "collective.single_qubit_reduction",
            max_abs_diff(tc.matrix(), jc.matrix()),
            1e-9,
        ),
    ])
}

/// External-coherence conservation on the shared grid.
pub fn conservation() -> Result<Vec<Check>> {
    let reports = check_grid()
        .into_iter()
        .map(|(b, g)| conservation_check(b, g))
        .collect::<Result<Vec<_>>>()?;
    let residual = max(reports.iter().map(|r| r.residual));
    let negative = max(reports.iter().map(|r| -r.correlated));
    Ok(vec![
        Check::at_most("conservation.residual", residual, 1e-7),
        Check::at_most("conservation.correlated_nonnegative", negative, 1e-9),
    ])
}

/// Zero heat flow and entropy production against the coherence rate at ten
/// seeded points.
pub fn rates(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e_ed0f_7a7e);
    let (mut heat, mut identity) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let beta = rng.random_range(0.3..3.0);
        let gt = rng.random_range(1.0..29.0);
        let r = rate_checks(beta, gt, DEFAULT_RATE_STEP)?;
        heat = heat.max(r.heat_rate.abs());
        identity = identity.max(r.identity_residual());
    }
    Ok(vec![
        Check::at_most("rates.heat_flow", heat, 1e-6),
        Check::at_most("rates.entropy_production_identity", identity, 1e-3),
    ])
}

/// Bath truncation and the two conventions of the coherence series.
pub fn truncation(acc: f64) -> Result<Vec<Check>> {
    let mut checks = vec![
        Check::at_most(
            "truncation.dimension_beta_1",
            (effective_bath_dimension(1.0, 1e-8)? as f64 - 17.0).abs(),
            0.0,
        ),
        Check::at_most(
            "truncation.dimension_beta_0.5",
            (effective_bath_dimension(0.5, 1e-8)? as f64 - 35.0).abs(),
            0.0,
        ),
    ];

    let (mut tail, mut bound_excess) = (0.0f64, f64::NEG_INFINITY);
    for beta in [0.5, 1.0, 2.0] {
        for gt in [1.0, 10.0, 30.0] {
            let d = effective_bath_dimension(beta, acc)?;
            let far = coherence_amplitude(beta, gt, d + 200, SeriesConvention::WithPrefactor);
            // Partial sum through p = d*.
            let near = coherence_amplitude(beta, gt, d + 1, SeriesConvention::WithPrefactor);
            tail = tail.max((far - near).norm());
            bound_excess =
                bound_excess.max((far - near).norm() - series_remainder_bound(beta, d, gt));
        }
    }
    checks.push(Check::at_most("truncation.series_tail", tail, acc));
    checks.push(Check::at_most(
        "truncation.remainder_bound_excess",
        bound_excess.max(0.0),
        0.0,
    ));

    let (mut with, mut literal_min) = (0.0f64, f64::INFINITY);
    for (beta, gt) in check_grid() {
        let spec = BathSpec::new(beta, acc)?;
        let evolved = evolve_joint(&gibbs_qubit(beta), &spec, gt)?.reduced_system_matrix();
        let (on, _) =
            analytic_system_matrix(beta, gt, spec.levels(), SeriesConvention::WithPrefactor);
        with = with.max(trace_distance_matrices(&on, &evolved)?);
        if beta >= 3.0 && gt > 0.0 {
            let (off, _) =
                analytic_system_matrix(beta, gt, spec.levels(), SeriesConvention::Literal);
            literal_min = literal_min.min(trace_distance_matrices(&off, &evolved)?);
        }
    }
    checks.push(Check::at_most(
        "series.prefactor_on_vs_evolution",
        with,
        1e-8,
    ));
    checks.push(Check::above(
        "series.prefactor_off_vs_evolution_cold",
        literal_min,
        1e-3,
    ));

    let ch = charged_qubit_state(
        &BathSpec::new(1.0, acc)?,
        5.0,
        SeriesConvention::WithPrefactor,
    )?;
    checks.push(Check::at_most(
        "series.route_discrepancy_1_5",
        ch.route_discrepancy,
        1e-8,
    ));
    Ok(checks)
}

/// Non-thermal starting states do change their populations, and the series
/// tracks the evolution.
pub fn nonthermal_starts(acc: f64) -> Result<Vec<Check>> {
    let spec = BathSpec::new(1.0, acc)?;
    let gts = linspace(0.0, 10.0, 201);
    let mut checks = Vec::new();
    for (label, init) in [
        ("ground", InitialState::Ground),
        ("kappa", InitialState::Kappa(0.3)),
    ] {
        let curve = population_curve(init, &spec, &gts)?;
        let start = curve[0].evolved;
        checks.push(Check::at_most(
            &format!("populations.{label}.series_vs_evolution"),
            max(curve.iter().map(|p| (p.series - p.evolved).abs())),
            1e-8,
        ));
        checks.push(Check::at_most(
            &format!("populations.{label}.closed_form_vs_evolution"),
            max(curve.iter().map(|p| (p.closed_form - p.evolved).abs())),
            1e-8,
        ));
        checks.push(Check::above(
            &format!("populations.{label}.population_change"),
            max(curve.iter().map(|p| (p.evolved - start).abs())),
            0.05,
        ));
    }
    Ok(checks)
}
