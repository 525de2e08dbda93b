//! Configuration, stage orchestration and the three-way comparison report.

mod checks;
pub mod config;
pub mod output;
mod sweep;

pub use config::{Auto, ExperimentConfig, SweepAxis};
pub use sweep::{sweep, SweepRow, SweepTable};

use serde::Serialize;

use crate::agmon::{self, AgmonField, AgmonPropertyReport};
use crate::domain::{BoundaryPatch, DomainSpec, OTHER};
use crate::error::{Error, Result};
use crate::kmc::{self, ExitEvent, KmcModel, KmcSummary};
use crate::landscape::{
    self, AssumptionReport, CriticalPoint, GeneralizedCounts, HypothesisReport, SaddleTable,
};
use crate::langevin::{self, ComparisonRow, ExitSample, ExitStatistics, SimConfig};
use crate::potential::PotentialSpec;
use crate::rates::{self, RatePrediction};
use crate::rng;
use crate::spectral::{self, BoundaryCondition, FluxReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Ek,
    Spectral,
    Mc,
    Analytic,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Ek => "ek",
            Source::Spectral => "spectral",
            Source::Mc => "mc",
            Source::Analytic => "analytic",
        }
    }
}

/// A number together with where it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    pub source: Source,
}

impl Cell {
    pub fn new(value: f64, source: Source) -> Self {
        Cell {
            value,
            se: None,
            source,
        }
    }

    pub fn with_se(value: f64, se: f64, source: Source) -> Self {
        Cell {
            value,
            se: Some(se),
            source,
        }
    }
}

/// Which stages a command asks for. A stage also needs to be enabled in
/// the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub agmon: bool,
    pub rates: bool,
    pub spectral: bool,
    pub mixed: bool,
    pub langevin: bool,
    pub kmc: bool,
}

impl Stages {
    pub const ALL: Stages = Stages {
        agmon: true,
        rates: true,
        spectral: true,
        mixed: true,
        langevin: true,
        kmc: true,
    };

    pub const LANDSCAPE: Stages = Stages {
        agmon: false,
        rates: false,
        spectral: false,
        mixed: false,
        langevin: false,
        kmc: false,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeSection {
    pub source: Source,
    pub points: Vec<CriticalPoint>,
    pub warnings: Vec<String>,
    pub table: SaddleTable,
    pub counts: GeneralizedCounts,
    pub assumptions: AssumptionReport,
    pub rho: f64,
    pub patches: Vec<BoundaryPatch>,
    /// `f(z_1) - f(x_0)` against `f(z_N) - f(z_1)`.
    pub hypo2_lhs: f64,
    pub hypo2_rhs: f64,
    pub hypo2_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgmonDistance {
    pub from: Vec<f64>,
    pub to: String,
    pub distance: Cell,
    /// `|f(to) - f(from)|`.
    pub expected: Cell,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgmonSection {
    pub delta: f64,
    pub eps_grid: f64,
    pub distances: Vec<AgmonDistance>,
    pub hypotheses: HypothesisReport,
    pub properties: AgmonPropertyReport,
    /// Field from the minimum.
    #[serde(skip)]
    pub field: AgmonField,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchRow {
    pub label: String,
    pub probability_ek: Cell,
    pub probability_spec: Option<Cell>,
    pub probability_mc: Option<Cell>,
    pub rate_ek: Option<Cell>,
    pub rate_spec: Option<Cell>,
    pub flux_ek: Option<Cell>,
    /// Same flux with the `pi^{-3d/4}` coefficient.
    pub flux_ek_alt: Option<Cell>,
    pub flux_spec: Option<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HRow {
    pub h: f64,
    pub lambda_ek: Cell,
    pub lambda_spec: Option<Cell>,
    pub lambda_mc: Option<Cell>,
    /// `lambda_spec / lambda_ek`.
    pub prefactor_ratio: Option<Cell>,
    pub mass_ek: Cell,
    pub mass_spec: Option<Cell>,
    pub identity_rel_err: Option<f64>,
    pub patches: Vec<PatchRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedRow {
    pub h: f64,
    pub delta: f64,
    pub label: String,
    pub lambda_witten: Cell,
    pub predicted: Cell,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallEigCount {
    pub h: f64,
    pub delta: f64,
    pub threshold: f64,
    pub count: usize,
    pub expected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSection {
    pub config: SimConfig,
    pub stats: ExitStatistics,
    pub halved: Option<ExitStatistics>,
    /// `|lambda(dt/2) - lambda(dt)| / se(dt)`.
    pub halving_shift_se: Option<f64>,
    pub comparison: Vec<ComparisonRow>,
    #[serde(skip)]
    pub samples: Vec<ExitSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KmcSection {
    pub h: f64,
    pub model: KmcModel,
    /// `k_z / K` from the closed-form rates.
    pub expected: Vec<f64>,
    pub summary: KmcSummary,
    #[serde(skip)]
    pub events: Vec<ExitEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub seed: u64,
    pub landscape: Option<LandscapeSection>,
    pub agmon: Option<AgmonSection>,
    pub rows: Vec<HRow>,
    pub predictions: Vec<RatePrediction>,
    pub small_eig: Option<SmallEigCount>,
    pub mixed: Vec<MixedRow>,
    pub mc: Option<McSection>,
    pub kmc: Option<KmcSection>,
    pub assertions: Vec<Assertion>,
    /// Set when a stage failed and the report is partial.
    pub failure: Option<String>,
    #[serde(skip)]
    pub flux_reports: Vec<FluxReport>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.assertions.iter().all(|a| a.passed)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn row(&self, h: f64) -> Option<&HRow> {
        self.rows.iter().find(|r| (r.h - h).abs() <= 1e-12 * h)
    }
}

/// Everything the stages share once the landscape is known.
pub(crate) struct Context {
    pub p: PotentialSpec,
    pub dom: DomainSpec,
    pub table: SaddleTable,
}

pub(crate) fn landscape_stage(cfg: &ExperimentConfig) -> Result<(Context, LandscapeSection)> {
    let p = cfg.potential()?;
    let mut dom = cfg.domain()?;
    let lc = &cfg.landscape;
    let set = landscape::find_critical_points(&p, &dom, lc.seeds_per_axis, lc.tol)?;
    let assumptions = landscape::check_assumptions(&p, &dom, &set.points, lc.boundary_samples);
    let table = landscape::build_saddle_table(&set.points, &dom)?;
    let rho = match cfg.domain.rho {
        Auto::Auto => table.default_patch_radius(&dom),
        Auto::Value(r) => r,
    };
    table.attach_patches(&mut dom, rho)?;
    let counts = landscape::count_generalized(&set.points, dom.dimension());
    let f1 = table.saddles[0].value;
    let hypo2_lhs = f1 - table.minimum.value;
    let hypo2_rhs = table.saddles.last().expect("non-empty").value - f1;
    let section = LandscapeSection {
        source: Source::Analytic,
        points: set.points,
        warnings: set.warnings,
        table: table.clone(),
        counts,
        assumptions,
        rho,
        patches: dom.patches().to_vec(),
        hypo2_lhs,
        hypo2_rhs,
        hypo2_ok: hypo2_lhs > hypo2_rhs,
    };
    Ok((Context { p, dom, table }, section))
}

fn agmon_stage(cfg: &ExperimentConfig, ctx: &Context) -> Result<AgmonSection> {
    let delta = cfg.agmon.delta;
    let fields = landscape::saddle_agmon_fields(&ctx.p, &ctx.dom, &ctx.table, delta)?;
    let hypotheses = landscape::check_hypotheses(&ctx.table, &ctx.dom, &fields)?;
    let x0 = ctx.table.minimum.location.clone();
    let mut sources = vec![x0];
    sources.extend(cfg.agmon.sources.iter().cloned());
    let mut distances = Vec::new();
    let mut min_field = None;
    for src in &sources {
        let field = agmon::agmon_field(&ctx.p, &ctx.dom, src, delta)?;
        let fs = ctx.p.value(src);
        for s in &ctx.table.saddles {
            let d = field.value_at(&s.location);
            let expected = (s.value - fs).abs();
            distances.push(AgmonDistance {
                from: src.clone(),
                to: s.label.clone(),
                distance: Cell::new(d, Source::Analytic),
                expected: Cell::new(expected, Source::Analytic),
                rel_err: if expected > 0.0 {
                    (d - expected).abs() / expected
                } else {
                    d.abs()
                },
            });
        }
        if min_field.is_none() {
            min_field = Some(field);
        }
    }
    let field = min_field.expect("minimum is always a source");
    let properties = agmon::check_agmon_properties(
        &ctx.p,
        &ctx.dom,
        &field,
        cfg.agmon.n_pairs,
        rng::derive_seed(cfg.seed, "agmon"),
    )?;
    Ok(AgmonSection {
        delta,
        eps_grid: field.eps_grid,
        distances,
        hypotheses,
        properties,
        field,
    })
}

fn row_temperatures(cfg: &ExperimentConfig, stages: Stages) -> Vec<f64> {
    let mut hs = cfg.rates.h.clone();
    if stages.langevin && cfg.langevin.enabled {
        hs.push(cfg.langevin.h);
    }
    if stages.kmc && cfg.kmc.enabled {
        hs.push(cfg.kmc.h);
    }
    hs.sort_by(|a, b| b.total_cmp(a));
    hs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    hs
}

fn ek_row(ctx: &Context, h: f64) -> Result<(HRow, RatePrediction)> {
    let pred = rates::predict(&ctx.table, h)?;
    let mut patches = Vec::with_capacity(pred.saddles.len() + 1);
    for (k, s) in pred.saddles.iter().enumerate() {
        patches.push(PatchRow {
            label: s.label.clone(),
            probability_ek: Cell::new(s.probability, Source::Ek),
            probability_spec: None,
            probability_mc: None,
            rate_ek: Some(Cell::new(s.rate, Source::Ek)),
            rate_spec: None,
            flux_ek: Some(Cell::new(s.flux, Source::Ek)),
            flux_ek_alt: Some(Cell::new(
                rates::flux_asymptotic_alt(&ctx.table, k, h)?,
                Source::Ek,
            )),
            flux_spec: None,
        });
    }
    patches.push(PatchRow {
        label: OTHER.into(),
        probability_ek: Cell::new(pred.other_probability, Source::Ek),
        probability_spec: None,
        probability_mc: None,
        rate_ek: None,
        rate_spec: None,
        flux_ek: None,
        flux_ek_alt: None,
        flux_spec: None,
    });
    let row = HRow {
        h,
        lambda_ek: Cell::new(pred.lambda, Source::Ek),
        lambda_spec: None,
        lambda_mc: None,
        prefactor_ratio: None,
        mass_ek: Cell::new(pred.mass, Source::Ek),
        mass_spec: None,
        identity_rel_err: None,
        patches,
    };
    Ok((row, pred))
}

pub(crate) fn spectral_solve(
    cfg: &ExperimentConfig,
    ctx: &Context,
    h: f64,
    delta: f64,
) -> Result<FluxReport> {
    let gen = spectral::assemble(&ctx.p, &ctx.dom, h, delta, BoundaryCondition::DirichletAll)?;
    let sol = spectral::principal_eigenpair(&gen, cfg.spectral.tol, cfg.spectral.max_iters)?;
    Ok(spectral::exit_analysis(&gen, &sol, &ctx.dom)?.report)
}

fn attach_spectral(row: &mut HRow, rep: &FluxReport) {
    row.lambda_spec = Some(Cell::new(rep.lambda, Source::Spectral));
    row.prefactor_ratio = Some(Cell::new(
        rep.lambda / row.lambda_ek.value,
        Source::Spectral,
    ));
    row.mass_spec = Some(Cell::new(rep.mass, Source::Spectral));
    row.identity_rel_err = Some(rep.identity_rel_err);
    for pr in &mut row.patches {
        if let Some(pf) = rep.patch(&pr.label) {
            pr.probability_spec = Some(Cell::new(pf.probability, Source::Spectral));
            pr.rate_spec = Some(Cell::new(pf.rate, Source::Spectral));
            pr.flux_spec = Some(Cell::new(pf.flux, Source::Spectral));
        }
    }
}

fn mixed_stage(cfg: &ExperimentConfig, ctx: &Context) -> Result<Vec<MixedRow>> {
    let m = &cfg.mixed;
    let sub = DomainSpec::new(m.lower.clone(), m.upper.clone())?;
    let mut rows = Vec::new();
    for &h in &m.h {
        let me = spectral::mixed_eigenvalue(&ctx.p, &sub, m.face, h, m.delta)?;
        let k = ctx
            .table
            .saddles
            .iter()
            .position(|s| crate::domain::distance(&s.location, &me.saddle) <= 1e-6)
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "subdomain saddle {:?} is not a saddle of the basin",
                    me.saddle
                ))
            })?;
        let predicted = rates::mixed_eigenvalue_asymptotic(&ctx.table, k, h)?;
        rows.push(MixedRow {
            h,
            delta: m.delta,
            label: ctx.table.saddles[k].label.clone(),
            lambda_witten: Cell::new(me.lambda_witten, Source::Spectral),
            predicted: Cell::new(predicted, Source::Ek),
            ratio: me.lambda_witten / predicted,
        });
    }
    Ok(rows)
}

pub(crate) fn sim_config(cfg: &ExperimentConfig, ctx: &Context) -> Result<SimConfig> {
    let l = &cfg.langevin;
    let x0 = &ctx.table.minimum.location;
    let start = match &l.start {
        Auto::Auto => x0.clone(),
        Auto::Value(s) => s.clone(),
    };
    let burn_in = match l.burn_in {
        Auto::Auto => langevin::default_burn_in(&ctx.p, x0)?,
        Auto::Value(t) => t,
    };
    Ok(SimConfig {
        h: l.h,
        dt: l.dt,
        max_steps: l.max_steps,
        seed: rng::derive_seed(cfg.seed, "langevin"),
        start,
        burn_in,
        record_path: false,
        noise_refine: 1,
        exit_test: l.exit_test,
    })
}

fn langevin_stage(
    cfg: &ExperimentConfig,
    ctx: &Context,
    report: &ComparisonReport,
) -> Result<McSection> {
    let mut sim = sim_config(cfg, ctx)?;
    if cfg.langevin.dt_halving {
        sim.noise_refine = 2;
    }
    let samples = langevin::sample_exits(&sim, &ctx.p, &ctx.dom, cfg.langevin.n)?;
    let stats = langevin::summarize(&samples, &ctx.dom, sim.h, sim.dt);
    let (halved, shift) = if cfg.langevin.dt_halving {
        let mut fine = sim.clone();
        fine.dt = sim.dt / 2.0;
        fine.noise_refine = 1;
        let s = langevin::estimate(&fine, &ctx.p, &ctx.dom, cfg.langevin.n)?;
        let shift = (s.lambda_hat - stats.lambda_hat).abs() / stats.lambda_se;
        (Some(s), Some(shift))
    } else {
        (None, None)
    };
    let h = sim.h;
    let ek = rates::predict(&ctx.table, h)?;
    let spec = report
        .flux_reports
        .iter()
        .find(|r| (r.h - h).abs() <= 1e-12 * h);
    let comparison = langevin::compare(&stats, Some(&ek), spec);
    Ok(McSection {
        config: sim,
        stats,
        halved,
        halving_shift_se: shift,
        comparison,
        samples,
    })
}

fn kmc_stage(cfg: &ExperimentConfig, ctx: &Context) -> Result<KmcSection> {
    let h = cfg.kmc.h;
    let ek = rates::ek_rates(&ctx.table)?;
    let model = KmcModel::new(ek.iter().map(|r| (r.label.clone(), r.rate(h))).collect())?;
    let total = model.total_rate();
    let expected = model.rates().iter().map(|k| k / total).collect();
    let batch = kmc::batch_sample(&model, cfg.kmc.n, rng::derive_seed(cfg.seed, "kmc"))?;
    Ok(KmcSection {
        h,
        model,
        expected,
        summary: batch.summary,
        events: batch.events,
    })
}

fn execute(cfg: &ExperimentConfig, stages: Stages, report: &mut ComparisonReport) -> Result<()> {
    let (ctx, section) = landscape_stage(cfg).map_err(|e| e.in_stage("landscape"))?;
    report.landscape = Some(section);
    if stages.agmon && cfg.agmon.enabled {
        report.agmon = Some(agmon_stage(cfg, &ctx).map_err(|e| e.in_stage("agmon"))?);
    }
    let any_rows = stages.rates || stages.spectral || stages.langevin || stages.kmc;
    if any_rows {
        for h in row_temperatures(cfg, stages) {
            let (row, pred) = ek_row(&ctx, h).map_err(|e| e.in_stage("rates"))?;
            report.rows.push(row);
            report.predictions.push(pred);
        }
    }
    if stages.spectral && cfg.spectral.enabled {
        let delta = cfg.spectral.delta[0];
        for i in 0..report.rows.len() {
            let h = report.rows[i].h;
            let rep = spectral_solve(cfg, &ctx, h, delta).map_err(|e| e.in_stage("spectral"))?;
            attach_spectral(&mut report.rows[i], &rep);
            report.flux_reports.push(rep);
        }
        let count_h = match cfg.spectral.count_h {
            Auto::Value(h) => h,
            Auto::Auto => *cfg
                .rates
                .h
                .iter()
                .min_by(|a, b| (*a - 0.3).abs().total_cmp(&(*b - 0.3).abs()))
                .expect("validated non-empty"),
        };
        let threshold = cfg.spectral.count_factor * count_h;
        let count = spectral::assemble(
            &ctx.p,
            &ctx.dom,
            count_h,
            delta,
            BoundaryCondition::DirichletAll,
        )
        .and_then(|g| spectral::small_eig_count(&g, threshold))
        .map_err(|e| e.in_stage("spectral"))?;
        let expected = report
            .landscape
            .as_ref()
            .expect("landscape ran")
            .counts
            .m_total[0];
        report.small_eig = Some(SmallEigCount {
            h: count_h,
            delta,
            threshold,
            count,
            expected,
        });
    }
    if stages.mixed && cfg.mixed.enabled {
        report.mixed = mixed_stage(cfg, &ctx).map_err(|e| e.in_stage("mixed"))?;
    }
    if stages.langevin && cfg.langevin.enabled {
        let mc = langevin_stage(cfg, &ctx, report).map_err(|e| e.in_stage("langevin"))?;
        if let Some(row) = report
            .rows
            .iter_mut()
            .find(|r| (r.h - mc.stats.h).abs() <= 1e-12 * r.h)
        {
            row.lambda_mc = Some(Cell::with_se(
                mc.stats.lambda_hat,
                mc.stats.lambda_se,
                Source::Mc,
            ));
            for pr in &mut row.patches {
                if let Some(pe) = mc.stats.patch(&pr.label) {
                    pr.probability_mc = Some(Cell::with_se(pe.freq, pe.se, Source::Mc));
                }
            }
        }
        report.mc = Some(mc);
    }
    if stages.kmc && cfg.kmc.enabled {
        report.kmc = Some(kmc_stage(cfg, &ctx).map_err(|e| e.in_stage("kmc"))?);
    }
    Ok(())
}

/// Runs the selected stages and returns whatever was computed, with the
/// error of the failing stage if any. Configuration errors stop before any
/// stage runs.
pub fn run_partial(cfg: &ExperimentConfig, stages: Stages) -> (ComparisonReport, Option<Error>) {
    let mut report = ComparisonReport {
        seed: cfg.seed,
        ..Default::default()
    };
    if let Err(e) = cfg.validate() {
        report.failure = Some(e.to_string());
        return (report, Some(e));
    }
    let outcome = execute(cfg, stages, &mut report);
    report.assertions = checks::evaluate(&report, &cfg.landscape.expected_counts);
    match outcome {
        Ok(()) => (report, None),
        Err(e) => {
            report.failure = Some(e.to_string());
            (report, Some(e))
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    match run_partial(cfg, Stages::ALL) {
        (report, None) => Ok(report),
        (_, Some(e)) => Err(e),
    }
}
