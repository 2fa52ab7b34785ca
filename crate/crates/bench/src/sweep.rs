//! Seeded sweeps over an `n` grid and their CSV form.

use std::io::Write;
use std::time::Instant;

use dpsco::base::{default_epoch_count, epoch_growth_solver, GradientOracle, SolverConfig, SolverResult};
use dpsco::hardness::{
    make_cubic_growth, make_margin_classification, make_noiseless_least_squares, make_noisy_least_squares,
};
use dpsco::interpolation::{adaptive_solver, default_schedule, interpolation_localization, kappa_interpolation};
use dpsco::{excess_risk, Ball, Dataset, Instance, Point, PrivacyBudget, RngStream, Schedule};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Family, SolverId};
use crate::error::{BenchError, Result};

pub const CSV_HEADER: [&str; 16] = [
    "run_id",
    "solver",
    "family",
    "n",
    "d",
    "eps",
    "delta",
    "seed",
    "constant_scale",
    "T",
    "m",
    "beta",
    "excess_risk",
    "final_D",
    "final_L",
    "wall_ms",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub run_id: String,
    pub solver: SolverId,
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub constant_scale: f64,
    pub epochs: usize,
    pub block: usize,
    pub beta: f64,
    pub excess_risk: f64,
    pub final_diameter: f64,
    pub final_lipschitz: f64,
    pub wall_ms: u128,
}

impl Row {
    fn record(&self) -> [String; 16] {
        [
            self.run_id.clone(),
            self.solver.to_string(),
            self.family.to_string(),
            self.n.to_string(),
            self.d.to_string(),
            self.eps.to_string(),
            self.delta.to_string(),
            self.seed.to_string(),
            self.constant_scale.to_string(),
            self.epochs.to_string(),
            self.block.to_string(),
            self.beta.to_string(),
            self.excess_risk.to_string(),
            self.final_diameter.to_string(),
            self.final_lipschitz.to_string(),
            self.wall_ms.to_string(),
        ]
    }
}

/// Domain shared by the anchored families: radius 1 around
/// `(0.3, −0.2, 0, …)`, so the optimum at the origin is interior but off
/// center.
pub fn standard_domain(d: usize) -> Ball {
    let mut c = vec![0.0; d];
    c[0] = 0.3;
    if d > 1 {
        c[1] = -0.2;
    }
    Ball { center: Point::new(c), radius: 1.0 }
}

/// Starting point `center + 0.5·e₁ + 0.5·e₂` (inside the domain).
pub fn standard_start(domain: &Ball) -> Point {
    let mut x = domain.center.clone().into_vec();
    for v in x.iter_mut().take(2) {
        *v += 0.5;
    }
    Point::new(x)
}

fn data_stream(cfg: &ExperimentConfig, n: usize, seed: u64) -> RngStream {
    RngStream::new(cfg.seed_base.wrapping_add(seed), 2 * n as u64)
}

fn solver_stream(cfg: &ExperimentConfig, n: usize, seed: u64) -> RngStream {
    RngStream::new(cfg.seed_base.wrapping_add(seed), 2 * n as u64 + 1)
}

/// The instance for grid point `n` and `seed`, truncated to the configured
/// data fraction, together with its starting point.
pub fn build_instance(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<(Instance, Point)> {
    let mut rng = data_stream(cfg, n, seed);
    let origin = Point::zeros(cfg.dim);
    let domain = standard_domain(cfg.dim);
    let start = standard_start(&domain);
    let full = match cfg.family {
        Family::NoiselessLs => make_noiseless_least_squares(n, &origin, cfg.curvature, domain)?,
        Family::NoisyLs => make_noisy_least_squares(n, &origin, cfg.curvature, cfg.noise_std, domain, &mut rng)?,
        Family::CubicGrowth => make_cubic_growth(n, &origin, cfg.curvature, domain)?,
        Family::Margin => {
            let inst = make_margin_classification(cfg.dim, n, cfg.margin, &mut rng)?;
            let start = inst.domain.center.clone();
            return Ok((truncate(inst, cfg.data_fraction)?, start));
        }
    };
    Ok((truncate(full, cfg.data_fraction)?, start))
}

fn truncate(inst: Instance, fraction: f64) -> Result<Instance> {
    if fraction >= 1.0 {
        return Ok(inst);
    }
    let keep = ((inst.n() as f64 * fraction).floor() as usize).max(1);
    let samples = inst.dataset.samples()[..keep].to_vec();
    Ok(Instance::new(inst.family, Dataset::new(samples)?, inst.domain, inst.constants, inst.optimum, inst.population)?)
}

pub fn budget(cfg: &ExperimentConfig) -> Result<PrivacyBudget> {
    Ok(PrivacyBudget::new(cfg.epsilon, cfg.delta)?)
}

fn beta_for(cfg: &ExperimentConfig, n: usize) -> f64 {
    cfg.beta.unwrap_or_else(|| (n as f64).powf(-cfg.mu))
}

/// Outer schedule of a localization solver that has `n_loc` samples.
pub fn localization_schedule(cfg: &ExperimentConfig, inst: &Instance, n_loc: usize) -> Result<Schedule> {
    let beta = beta_for(cfg, n_loc);
    let fixed = |block: usize| -> Result<Schedule> {
        let block = block.max(1);
        let epochs = cfg.epochs.unwrap_or(n_loc / block);
        Ok(Schedule::new(epochs, block, beta, cfg.mu, cfg.constant_scale)?)
    };
    if let Some(m) = cfg.block {
        return fixed(m);
    }
    if let Some(cap) = cfg.block_cap {
        return fixed(cap.min(n_loc / 2));
    }
    if let Some(t) = cfg.epochs {
        return fixed(n_loc / t);
    }
    let mut schedule = default_schedule(n_loc, &inst.constants, inst.dim(), &budget(cfg)?, cfg.mu, cfg.constant_scale)?;
    schedule.beta = beta;
    Ok(schedule)
}

pub fn solver_config(cfg: &ExperimentConfig) -> SolverConfig {
    SolverConfig {
        step_scale: cfg.step_scale,
        inner_epochs: cfg.inner_epochs,
        growth_epochs: cfg.growth_epochs,
        ..SolverConfig::default()
    }
}

/// Summary of one solver run as recorded in a [`Row`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: SolverResult,
    pub epochs: usize,
    pub block: usize,
    pub beta: f64,
    pub final_diameter: f64,
    pub final_lipschitz: f64,
}

/// Run the configured solver on `inst` from `x0`.
pub fn run_solver(cfg: &ExperimentConfig, inst: &Instance, x0: &Point, rng: &mut RngStream) -> Result<RunOutcome> {
    let budget = budget(cfg)?;
    let scfg = solver_config(cfg);
    let n = inst.n();
    let outcome = match cfg.solver {
        SolverId::EpochGrowth => {
            let epochs = cfg.growth_epochs.unwrap_or_else(|| default_epoch_count(n, inst.constants.growth_floor));
            let beta = beta_for(cfg, n);
            let lip = inst.constants.lipschitz;
            let result = epoch_growth_solver(inst, &GradientOracle::raw(), x0, lip, epochs, beta, &budget, &scfg, rng)?;
            let final_diameter = result.trace.epochs.last().map_or(inst.domain.diameter(), |e| e.diameter());
            RunOutcome { result, epochs, block: n / epochs, beta, final_diameter, final_lipschitz: lip }
        }
        SolverId::Interpolation | SolverId::KappaInterpolation | SolverId::Adaptive => {
            let n_loc = if cfg.solver == SolverId::Adaptive { n - n / 2 } else { n };
            let schedule = localization_schedule(cfg, inst, n_loc)?;
            let result = match cfg.solver {
                SolverId::Interpolation => interpolation_localization(inst, x0, &schedule, &budget, &scfg, rng)?,
                SolverId::KappaInterpolation => kappa_interpolation(inst, x0, &schedule, &budget, &scfg, rng)?,
                _ => adaptive_solver(inst, x0, &schedule, &budget, &scfg, rng)?,
            };
            let outer = match cfg.solver {
                SolverId::Adaptive => {
                    result.trace.epochs.last().and_then(|e| e.inner.as_ref()).map(|t| t.epochs.as_slice())
                }
                _ => Some(result.trace.epochs.as_slice()),
            };
            let last = outer.and_then(|e| e.last());
            let final_diameter = last.map_or(inst.domain.diameter(), |e| e.diameter());
            let final_lipschitz = last.map_or(inst.constants.lipschitz, |e| e.lipschitz);
            RunOutcome {
                result,
                epochs: schedule.epochs,
                block: schedule.block,
                beta: schedule.beta,
                final_diameter,
                final_lipschitz,
            }
        }
    };
    Ok(outcome)
}

/// One `(n, seed)` grid point.
pub fn run_point(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<Row> {
    let started = Instant::now();
    let (inst, x0) = build_instance(cfg, n, seed)?;
    let mut rng = solver_stream(cfg, n, seed);
    let out = run_solver(cfg, &inst, &x0, &mut rng)?;
    let excess = excess_risk(&inst, &out.result.point)?;
    let wall_ms = if cfg.timing { started.elapsed().as_millis() } else { 0 };
    Ok(Row {
        run_id: format!("{}-{}-n{n}-s{seed}", cfg.solver, cfg.family),
        solver: cfg.solver,
        family: cfg.family,
        n,
        d: cfg.dim,
        eps: cfg.epsilon,
        delta: cfg.delta,
        seed,
        constant_scale: cfg.constant_scale,
        epochs: out.epochs,
        block: out.block,
        beta: out.beta,
        excess_risk: excess,
        final_diameter: out.final_diameter,
        final_lipschitz: out.final_lipschitz,
        wall_ms,
    })
}

/// Every `(n, seed)` point of the grid, sorted by `n` then seed regardless
/// of completion order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    cfg.validate()?;
    let jobs: Vec<(usize, u64)> = cfg.n_grid.iter().flat_map(|&n| (0..cfg.seeds as u64).map(move |s| (n, s))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallel)
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    let mut rows = pool.install(|| jobs.par_iter().map(|&(n, s)| run_point(cfg, n, s)).collect::<Result<Vec<_>>>())?;
    rows.sort_by_key(|r| (r.n, r.seed));
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Parse rows written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<Row>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(BenchError::Input("CSV header does not match the sweep schema".into()));
    }
    let field = |rec: &csv::StringRecord, i: usize| -> Result<String> {
        rec.get(i).map(str::to_string).ok_or_else(|| BenchError::Input(format!("missing column {}", CSV_HEADER[i])))
    };
    fn num<T: std::str::FromStr>(s: String, name: &str) -> Result<T> {
        s.parse().map_err(|_| BenchError::Input(format!("bad value '{s}' in column {name}")))
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| field(&rec, i);
        rows.push(Row {
            run_id: f(0)?,
            solver: SolverId::from_name(&f(1)?).ok_or_else(|| BenchError::Input("unknown solver in CSV".into()))?,
            family: Family::from_name(&f(2)?).ok_or_else(|| BenchError::Input("unknown family in CSV".into()))?,
            n: num(f(3)?, "n")?,
            d: num(f(4)?, "d")?,
            eps: num(f(5)?, "eps")?,
            delta: num(f(6)?, "delta")?,
            seed: num(f(7)?, "seed")?,
            constant_scale: num(f(8)?, "constant_scale")?,
            epochs: num(f(9)?, "T")?,
            block: num(f(10)?, "m")?,
            beta: num(f(11)?, "beta")?,
            excess_risk: num(f(12)?, "excess_risk")?,
            final_diameter: num(f(13)?, "final_D")?,
            final_lipschitz: num(f(14)?, "final_L")?,
            wall_ms: num(f(15)?, "wall_ms")?,
        });
    }
    Ok(rows)
}
