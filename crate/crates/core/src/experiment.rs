//! Monte Carlo strong-convergence studies and field-evolution demos.
//!
//! Strong error is measured against a reference solution driven by the same
//! coefficient realization and the same Brownian path: coarse time levels see
//! exact aggregates of the fine increments, coarse space levels see the
//! coefficient restricted to their nested nodes and the endpoint prolonged
//! back to the reference grid (lossless for nested P1 spaces).

use std::time::Instant;

use rayon::prelude::*;

use crate::covariance::{extended_column, CovarianceSpec};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_mass, l2_norm, prolong_to_fine, FemFunction, Grid1D, TridiagonalSystem,
};
use crate::grf::{build_plan, lift_to_coefficient, sample_pair, EmbeddingPlan};
use crate::noise::{generate_path, BrownianPath, ModeBasis, NoiseSpec};
use crate::rng::sample_stream;
use crate::stepper::{evolve, ModelSpec, NoiseCoupling, NoiseSource, Trajectory, ZeroNoise};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    ConvergeTime,
    ConvergeSpace,
    EvolveDemo,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::ConvergeTime => "converge_time",
            ExperimentKind::ConvergeSpace => "converge_space",
            ExperimentKind::EvolveDemo => "evolve_demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    Zero,
    SinTwoPi,
    SinFourPi,
}

impl InitialData {
    pub fn interior_values(&self, grid: &Grid1D) -> Vec<f64> {
        let f = |x: f64| match self {
            InitialData::Zero => 0.0,
            InitialData::SinTwoPi => (2.0 * std::f64::consts::PI * x).sin(),
            InitialData::SinFourPi => (4.0 * std::f64::consts::PI * x).sin(),
        };
        grid.interior_nodes().iter().map(|&x| f(x)).collect()
    }
}

/// Whether the diffusion coefficient is frozen at eps_a or sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientField {
    Deterministic,
    LogGaussian { cov: CovarianceSpec, padding: usize },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub samples: usize,
    pub master_seed: u64,
    pub model: ModelSpec,
    pub u0: InitialData,
    pub field: CoefficientField,
    pub noise: NoiseSpec,
    /// Element count of the reference mesh.
    pub mesh_ref: usize,
    /// Element counts of the coarse meshes (spatial studies).
    pub mesh_levels: Vec<usize>,
    /// Coarse time steps (temporal studies); integer multiples of dt_ref.
    pub dt_levels: Vec<f64>,
    pub dt_ref: f64,
    /// Abort when the embedding's truncated spectrum exceeds this.
    pub rho_limit: f64,
    pub workers: Option<usize>,
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub level_param: f64,
    pub u_error: f64,
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    /// Consecutive-pair observed orders: ln(e_{i-1}/e_i) / ln(p_{i-1}/p_i).
    pub fn from_errors(params: &[f64], errors: &[f64]) -> Self {
        assert_eq!(params.len(), errors.len());
        let rows = params
            .iter()
            .zip(errors)
            .enumerate()
            .map(|(i, (&p, &e))| {
                let order = (i > 0).then(|| {
                    (errors[i - 1] / e).ln() / (params[i - 1] / p).ln()
                });
                ErrorRow { level_param: p, u_error: e, order }
            })
            .collect();
        Self { rows }
    }

    pub fn mean_order(&self) -> Option<f64> {
        let orders: Vec<f64> = self.rows.iter().filter_map(|r| r.order).collect();
        if orders.is_empty() {
            None
        } else {
            Some(orders.iter().sum::<f64>() / orders.len() as f64)
        }
    }

    /// Full-precision CSV, byte-stable for a given table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level_param,u_error,order\n");
        for row in &self.rows {
            match row.order {
                Some(o) => {
                    out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", row.level_param, row.u_error, o));
                }
                None => {
                    out.push_str(&format!("{:.16e},{:.16e},\n", row.level_param, row.u_error));
                }
            }
        }
        out
    }
}

/// Root mean square of per-sample endpoint errors.
pub fn mean_square_error(per_sample_errors: &[f64]) -> Result<f64> {
    if per_sample_errors.is_empty() {
        return Err(Error::ContractViolation("no per-sample errors to average".into()));
    }
    let mean_sq: f64 =
        per_sample_errors.iter().map(|e| e * e).sum::<f64>() / per_sample_errors.len() as f64;
    Ok(mean_sq.sqrt())
}

/// Reproducibility record written next to every table.
#[derive(Debug, Clone)]
pub struct RunMetadata {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub samples: usize,
    pub modes: usize,
    pub padding: usize,
    pub rho_minus: f64,
    pub workers: usize,
    pub wall_secs: f64,
}

enum Level {
    Temporal { dt: f64, ratio: usize },
    Spatial { grid: Grid1D, basis: ModeBasis, stride: usize, u0: Vec<f64> },
}

/// Everything shared by all samples of one study: grids, the embedding plan,
/// mode tables and initial data. Immutable during the parallel sweep.
pub struct StudyContext {
    config: ExperimentConfig,
    grid_ref: Grid1D,
    mass_ref: TridiagonalSystem,
    basis_ref: ModeBasis,
    u0_ref: Vec<f64>,
    plan: Option<EmbeddingPlan>,
    n_fine: usize,
    levels: Vec<Level>,
}

impl StudyContext {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        config.model.validate()?;
        if config.samples == 0 {
            return Err(Error::InvalidSpec("at least one sample is required".into()));
        }
        if !(config.dt_ref > 0.0) {
            return Err(Error::InvalidSpec("dt_ref must be positive".into()));
        }
        let n_fine_f = config.model.t_final / config.dt_ref;
        let n_fine = n_fine_f.round() as usize;
        if n_fine == 0 || (n_fine_f - n_fine as f64).abs() > 1e-6 {
            return Err(Error::InvalidSpec(format!(
                "T / dt_ref = {n_fine_f} is not an integer step count"
            )));
        }

        let grid_ref = Grid1D::from_elements(config.mesh_ref)?;
        let mass_ref = assemble_mass(&grid_ref);
        let basis_ref = ModeBasis::new(&config.noise, &grid_ref.interior_nodes());
        let u0_ref = config.u0.interior_values(&grid_ref);

        let plan = match &config.field {
            CoefficientField::Deterministic => None,
            CoefficientField::LogGaussian { cov, padding } => {
                let p = config.mesh_ref + 1;
                let col = extended_column(cov, p, *padding)?;
                let plan = build_plan(&col, p)?;
                if plan.rho_minus() > config.rho_limit {
                    return Err(Error::EmbeddingRejected {
                        rho_minus: plan.rho_minus(),
                        limit: config.rho_limit,
                    });
                }
                Some(plan)
            }
        };

        let levels = match config.kind {
            ExperimentKind::ConvergeTime => {
                if config.dt_levels.is_empty() {
                    return Err(Error::InvalidSpec("temporal study needs dt levels".into()));
                }
                config
                    .dt_levels
                    .iter()
                    .map(|&dt| {
                        let ratio_f = dt / config.dt_ref;
                        let ratio = ratio_f.round() as usize;
                        if ratio == 0 || (ratio_f - ratio as f64).abs() > 1e-6 {
                            return Err(Error::InvalidSpec(format!(
                                "dt level {dt} is not an integer multiple of dt_ref"
                            )));
                        }
                        if n_fine % ratio != 0 {
                            return Err(Error::InvalidSpec(format!(
                                "dt level {dt} does not divide the fine horizon"
                            )));
                        }
                        Ok(Level::Temporal { dt, ratio })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            ExperimentKind::ConvergeSpace => {
                if config.mesh_levels.is_empty() {
                    return Err(Error::InvalidSpec("spatial study needs mesh levels".into()));
                }
                config
                    .mesh_levels
                    .iter()
                    .map(|&elements| {
                        if elements < 2 || config.mesh_ref % elements != 0 {
                            return Err(Error::InvalidSpec(format!(
                                "mesh level {elements} is not nested in reference {}",
                                config.mesh_ref
                            )));
                        }
                        let grid = Grid1D::from_elements(elements)?;
                        let basis = ModeBasis::new(&config.noise, &grid.interior_nodes());
                        let u0 = config.u0.interior_values(&grid);
                        Ok(Level::Spatial {
                            grid,
                            basis,
                            stride: config.mesh_ref / elements,
                            u0,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            ExperimentKind::EvolveDemo => Vec::new(),
        };

        Ok(Self {
            config: config.clone(),
            grid_ref,
            mass_ref,
            basis_ref,
            u0_ref,
            plan,
            n_fine,
            levels,
        })
    }

    pub fn rho_minus(&self) -> f64 {
        self.plan.as_ref().map_or(0.0, |p| p.rho_minus())
    }

    pub fn grid_ref(&self) -> &Grid1D {
        &self.grid_ref
    }

    pub fn level_params(&self) -> Vec<f64> {
        self.levels
            .iter()
            .map(|lvl| match lvl {
                Level::Temporal { dt, .. } => *dt,
                Level::Spatial { grid, .. } => grid.h(),
            })
            .collect()
    }

    /// Coefficient nodal values on the reference grid for sample `j`, plus
    /// the Brownian path at the finest step. The draw order is fixed: field
    /// first, then path, both from stream `j` of the master seed.
    fn draw_sample(&self, sample_index: u64) -> Result<(Vec<f64>, BrownianPath)> {
        let mut rng = sample_stream(self.config.master_seed, sample_index);
        let z = match &self.plan {
            Some(plan) => sample_pair(plan, &mut rng).0,
            None => vec![0.0; self.config.mesh_ref + 1],
        };
        let field = lift_to_coefficient(&z, self.config.model.eps_a)?;
        let path =
            generate_path(&self.config.noise, self.n_fine, self.config.dt_ref, &mut rng)?;
        Ok((field.a, path))
    }

    fn solve_on(
        &self,
        grid: &Grid1D,
        basis: &ModeBasis,
        a_nodes: &[f64],
        u0: &[f64],
        dt: f64,
        n_steps: usize,
        path: &BrownianPath,
        ratio: usize,
    ) -> Result<FemFunction> {
        let traj = if self.config.model.coupling.is_zero() {
            evolve(&self.config.model, grid, a_nodes, u0, dt, n_steps, &mut ZeroNoise, &[])?
        } else {
            let mut source = PathSource { path, basis, ratio, modal: vec![0.0; path.modes()] };
            evolve(&self.config.model, grid, a_nodes, u0, dt, n_steps, &mut source, &[])?
        };
        Ok(traj.final_u)
    }
}

/// Synthesizes P_J^w DeltaW at the interior nodes from an aggregated slice of
/// the shared Brownian path.
struct PathSource<'a> {
    path: &'a BrownianPath,
    basis: &'a ModeBasis,
    ratio: usize,
    modal: Vec<f64>,
}

impl NoiseSource for PathSource<'_> {
    fn increment(&mut self, step: usize, out: &mut [f64]) -> Result<()> {
        self.path.aggregate(step, self.ratio, &mut self.modal)?;
        self.basis.synthesize(&self.modal, out);
        Ok(())
    }
}

/// Endpoint solutions of one sample: the reference plus every coarse level
/// (on its own grid for spatial studies).
#[derive(Debug, Clone)]
pub struct SampleEndpoints {
    pub reference: FemFunction,
    pub levels: Vec<FemFunction>,
}

/// Solve the reference and every coarse problem for one sample, all driven by
/// the same coefficient field and the same Brownian path.
pub fn run_sample(ctx: &StudyContext, sample_index: u64) -> Result<SampleEndpoints> {
    let (a_ref, path) = ctx.draw_sample(sample_index)?;
    let attach = |e: Error| match e {
        Error::Divergence { step, node, value } => Error::ContractViolation(format!(
            "sample {sample_index} diverged at step {step}, node {node}: |u| = {value:.3e}"
        )),
        other => other,
    };

    let reference = ctx
        .solve_on(
            &ctx.grid_ref,
            &ctx.basis_ref,
            &a_ref,
            &ctx.u0_ref,
            ctx.config.dt_ref,
            ctx.n_fine,
            &path,
            1,
        )
        .map_err(attach)?;

    let mut levels = Vec::with_capacity(ctx.levels.len());
    for lvl in &ctx.levels {
        let endpoint = match lvl {
            Level::Temporal { dt, ratio } => ctx
                .solve_on(
                    &ctx.grid_ref,
                    &ctx.basis_ref,
                    &a_ref,
                    &ctx.u0_ref,
                    *dt,
                    ctx.n_fine / ratio,
                    &path,
                    *ratio,
                )
                .map_err(attach)?,
            Level::Spatial { grid, basis, stride, u0 } => {
                let a_coarse: Vec<f64> =
                    (0..=grid.interior() + 1).map(|i| a_ref[i * stride]).collect();
                ctx.solve_on(grid, basis, &a_coarse, u0, ctx.config.dt_ref, ctx.n_fine, &path, 1)
                    .map_err(attach)?
            }
        };
        levels.push(endpoint);
    }
    Ok(SampleEndpoints { reference, levels })
}

/// L2 endpoint error of every level against the reference, evaluated on the
/// reference grid with its mass matrix.
pub fn level_errors(ctx: &StudyContext, endpoints: &SampleEndpoints) -> Result<Vec<f64>> {
    endpoints
        .levels
        .iter()
        .zip(&ctx.levels)
        .map(|(u_level, lvl)| {
            let on_ref = match lvl {
                Level::Temporal { .. } => u_level.clone(),
                Level::Spatial { grid, .. } => prolong_to_fine(u_level, grid, &ctx.grid_ref)?,
            };
            let diff = FemFunction {
                coeffs: ctx
                    .reference_diff(&on_ref, &endpoints.reference),
            };
            Ok(l2_norm(&diff, &ctx.mass_ref))
        })
        .collect()
}

impl StudyContext {
    fn reference_diff(&self, a: &FemFunction, b: &FemFunction) -> Vec<f64> {
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect()
    }
}

pub struct StudyOutput {
    pub table: ErrorTable,
    pub metadata: RunMetadata,
}

/// Run all samples (in parallel), aggregate the mean-square errors and fit
/// consecutive-pair orders. Output is identical for any worker count.
pub fn convergence_table(config: &ExperimentConfig) -> Result<StudyOutput> {
    let started = Instant::now();
    let ctx = StudyContext::build(config)?;
    if matches!(config.kind, ExperimentKind::EvolveDemo) {
        return Err(Error::InvalidSpec("convergence_table needs a converge_* kind".into()));
    }

    let sweep = || -> Result<Vec<Vec<f64>>> {
        (0..config.samples as u64)
            .into_par_iter()
            .map(|j| run_sample(&ctx, j).and_then(|e| level_errors(&ctx, &e)))
            .collect()
    };
    let per_sample: Vec<Vec<f64>> = match config.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::InvalidSpec(format!("cannot build worker pool: {e}")))?;
            pool.install(sweep)?
        }
        None => sweep()?,
    };

    let n_levels = ctx.levels.len();
    let errors: Vec<f64> = (0..n_levels)
        .map(|l| {
            let level: Vec<f64> = per_sample.iter().map(|row| row[l]).collect();
            mean_square_error(&level)
        })
        .collect::<Result<_>>()?;
    let table = ErrorTable::from_errors(&ctx.level_params(), &errors);
    let metadata = RunMetadata {
        kind: config.kind,
        master_seed: config.master_seed,
        samples: config.samples,
        modes: config.noise.modes(),
        padding: match &config.field {
            CoefficientField::Deterministic => 0,
            CoefficientField::LogGaussian { padding, .. } => *padding,
        },
        rho_minus: ctx.rho_minus(),
        workers: config.workers.unwrap_or_else(rayon::current_num_threads),
        wall_secs: started.elapsed().as_secs_f64(),
    };
    Ok(StudyOutput { table, metadata })
}

/// One named variant of the field-evolution demo.
#[derive(Debug, Clone)]
pub struct DemoVariant {
    pub name: String,
    pub field: CoefficientField,
    /// Overrides the regularity of the base noise spec when set.
    pub gamma: Option<f64>,
    pub coupling: NoiseCoupling,
}

/// Snapshot record for one variant: frames of full nodal values (boundaries
/// included) at evenly spaced times.
#[derive(Debug, Clone)]
pub struct DemoRun {
    pub name: String,
    pub nodes: Vec<f64>,
    pub times: Vec<f64>,
    pub frames: Vec<Vec<f64>>,
    pub rho_minus: f64,
}

/// Evolve one sample trajectory per variant and capture `snapshot_count`
/// evenly spaced frames (always including t = 0 and t = T).
pub fn evolve_demo(
    config: &ExperimentConfig,
    variants: &[DemoVariant],
    snapshot_count: usize,
) -> Result<Vec<DemoRun>> {
    if variants.is_empty() {
        return Err(Error::ContractViolation("no demo variants requested".into()));
    }
    if snapshot_count < 2 {
        return Err(Error::ContractViolation("need at least two snapshots".into()));
    }
    let grid = Grid1D::from_elements(config.mesh_ref)?;
    let n_fine_f = config.model.t_final / config.dt_ref;
    let n_fine = n_fine_f.round() as usize;
    if n_fine == 0 || (n_fine_f - n_fine as f64).abs() > 1e-6 {
        return Err(Error::InvalidSpec("T / dt_ref is not an integer step count".into()));
    }
    let u0 = config.u0.interior_values(&grid);
    let times: Vec<f64> = (0..snapshot_count)
        .map(|i| config.model.t_final * i as f64 / (snapshot_count - 1) as f64)
        .collect();

    variants
        .iter()
        .map(|variant| {
            let mut model = config.model;
            model.coupling = variant.coupling;
            let noise = match variant.gamma {
                Some(g) => NoiseSpec::new(g, config.noise.eps_q(), config.noise.modes())?,
                None => config.noise,
            };
            let mut rng = sample_stream(config.master_seed, 0);
            let (a_nodes, rho) = match &variant.field {
                CoefficientField::Deterministic => {
                    (vec![model.eps_a; config.mesh_ref + 1], 0.0)
                }
                CoefficientField::LogGaussian { cov, padding } => {
                    let p = config.mesh_ref + 1;
                    let col = extended_column(cov, p, *padding)?;
                    let plan = build_plan(&col, p)?;
                    if plan.rho_minus() > config.rho_limit {
                        return Err(Error::EmbeddingRejected {
                            rho_minus: plan.rho_minus(),
                            limit: config.rho_limit,
                        });
                    }
                    let z = sample_pair(&plan, &mut rng).0;
                    (lift_to_coefficient(&z, model.eps_a)?.a, plan.rho_minus())
                }
            };

            let trajectory: Trajectory = if model.coupling.is_zero() {
                evolve(&model, &grid, &a_nodes, &u0, config.dt_ref, n_fine, &mut ZeroNoise, &times)?
            } else {
                let path = generate_path(&noise, n_fine, config.dt_ref, &mut rng)?;
                let basis = ModeBasis::new(&noise, &grid.interior_nodes());
                let mut source =
                    PathSource { path: &path, basis: &basis, ratio: 1, modal: vec![0.0; noise.modes()] };
                evolve(&model, &grid, &a_nodes, &u0, config.dt_ref, n_fine, &mut source, &times)?
            };

            let frames = trajectory
                .snapshots
                .iter()
                .map(|(_, u)| {
                    let mut full = Vec::with_capacity(grid.interior() + 2);
                    full.push(0.0);
                    full.extend_from_slice(&u.coeffs);
                    full.push(0.0);
                    full
                })
                .collect();
            Ok(DemoRun {
                name: variant.name.clone(),
                nodes: grid.all_nodes(),
                times: trajectory.snapshots.iter().map(|(t, _)| *t).collect(),
                frames,
                rho_minus: rho,
            })
        })
        .collect()
}

/// Ready-made configurations for the reference studies and demos.
pub mod presets {
    use super::*;
    use crate::stepper::DriftKind;

    pub const DEFAULT_SEED: u64 = 42;

    fn allen_cahn_model(coupling: NoiseCoupling, eps_a: f64, t_final: f64) -> ModelSpec {
        ModelSpec { drift: DriftKind::AllenCahn, coupling, eps_a, t_final }
    }

    fn log_gaussian_field(q: f64, mesh_ref: usize) -> CoefficientField {
        let cov = CovarianceSpec::new(q).expect("preset covariance is valid");
        // covariance padding: the wrap-around lag must cover ~24 correlation
        // lengths before the circulant spectrum is nonnegative
        CoefficientField::LogGaussian { cov, padding: 24 * (mesh_ref + 1) }
    }

    /// Desk-scale temporal study: minutes, same asymptotic regime as the
    /// full-size configuration.
    pub fn temporal_desk(coupling: NoiseCoupling) -> ExperimentConfig {
        ExperimentConfig {
            kind: ExperimentKind::ConvergeTime,
            samples: 100,
            master_seed: DEFAULT_SEED,
            model: allen_cahn_model(coupling, 1e-3, 0.1),
            u0: InitialData::SinTwoPi,
            field: log_gaussian_field(2.0, 64),
            noise: NoiseSpec::new(1.0, 0.1, 128).expect("preset noise is valid"),
            mesh_ref: 64,
            mesh_levels: Vec::new(),
            dt_levels: vec![4e-3, 2e-3, 1e-3, 5e-4],
            dt_ref: 1e-5,
            rho_limit: 1e-6,
            workers: None,
        }
    }

    /// Full-size temporal study (reference step 1e-6, five coarse levels).
    pub fn temporal_full(coupling: NoiseCoupling) -> ExperimentConfig {
        let mut cfg = temporal_desk(coupling);
        cfg.mesh_ref = 128;
        cfg.field = log_gaussian_field(2.0, 128);
        cfg.dt_ref = 1e-6;
        cfg.dt_levels = vec![1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4];
        cfg
    }

    /// Desk-scale spatial study: reference mesh 256, nested coarse meshes.
    pub fn spatial_desk(coupling: NoiseCoupling) -> ExperimentConfig {
        ExperimentConfig {
            kind: ExperimentKind::ConvergeSpace,
            samples: 100,
            master_seed: DEFAULT_SEED,
            model: allen_cahn_model(coupling, 1e-3, 0.1),
            u0: InitialData::SinTwoPi,
            field: log_gaussian_field(2.0, 256),
            noise: NoiseSpec::new(1.0, 0.1, 128).expect("preset noise is valid"),
            mesh_ref: 256,
            mesh_levels: vec![16, 32, 64, 128],
            dt_levels: Vec::new(),
            dt_ref: 1e-5,
            rho_limit: 1e-6,
            workers: None,
        }
    }

    /// Full-size spatial study (reference mesh 512, reference step 1e-6).
    pub fn spatial_full(coupling: NoiseCoupling) -> ExperimentConfig {
        let mut cfg = spatial_desk(coupling);
        cfg.mesh_ref = 512;
        cfg.field = log_gaussian_field(2.0, 512);
        cfg.mesh_levels = vec![16, 32, 64, 128, 256];
        cfg.dt_ref = 1e-6;
        cfg
    }

    /// Diffusion-coefficient comparison: deterministic vs sampled fields of
    /// different smoothness, no driving noise.
    pub fn demo_diffusion() -> (ExperimentConfig, Vec<DemoVariant>) {
        let config = ExperimentConfig {
            kind: ExperimentKind::EvolveDemo,
            samples: 1,
            master_seed: DEFAULT_SEED,
            model: allen_cahn_model(NoiseCoupling::Zero, 1e-2, 0.1),
            u0: InitialData::SinFourPi,
            field: CoefficientField::Deterministic,
            noise: NoiseSpec::new(1.0, 0.1, 1).expect("preset noise is valid"),
            mesh_ref: 128,
            mesh_levels: Vec::new(),
            dt_levels: Vec::new(),
            dt_ref: 1e-5,
            rho_limit: 1e-3,
            workers: None,
        };
        let rough = CovarianceSpec::relaxed(0.1, 1e-8).expect("relaxed covariance is valid");
        let variants = vec![
            DemoVariant {
                name: "deterministic".into(),
                field: CoefficientField::Deterministic,
                gamma: None,
                coupling: NoiseCoupling::Zero,
            },
            DemoVariant {
                name: "q0.1".into(),
                field: CoefficientField::LogGaussian { cov: rough, padding: 129 },
                gamma: None,
                coupling: NoiseCoupling::Zero,
            },
            DemoVariant {
                name: "q2".into(),
                field: log_gaussian_field(2.0, 128),
                gamma: None,
                coupling: NoiseCoupling::Zero,
            },
        ];
        (config, variants)
    }

    /// Multiplicative-noise comparison: deterministic baseline vs two noise
    /// regularities on a long horizon with a weak coefficient.
    pub fn demo_noise() -> (ExperimentConfig, Vec<DemoVariant>) {
        let config = ExperimentConfig {
            kind: ExperimentKind::EvolveDemo,
            samples: 1,
            master_seed: DEFAULT_SEED,
            model: allen_cahn_model(NoiseCoupling::HalfOneMinusSquare, 1e-5, 4.0),
            u0: InitialData::SinFourPi,
            field: log_gaussian_field(2.0, 128),
            noise: NoiseSpec::new(1.0, 0.1, 128).expect("preset noise is valid"),
            mesh_ref: 128,
            mesh_levels: Vec::new(),
            dt_levels: Vec::new(),
            dt_ref: 1e-4,
            rho_limit: 1e-6,
            workers: None,
        };
        let field = log_gaussian_field(2.0, 128);
        let variants = vec![
            DemoVariant {
                name: "deterministic".into(),
                field: CoefficientField::Deterministic,
                gamma: None,
                coupling: NoiseCoupling::Zero,
            },
            DemoVariant {
                name: "gamma0.5".into(),
                field: field.clone(),
                gamma: Some(0.5),
                coupling: NoiseCoupling::HalfOneMinusSquare,
            },
            DemoVariant {
                name: "gamma1".into(),
                field,
                gamma: Some(1.0),
                coupling: NoiseCoupling::HalfOneMinusSquare,
            },
        ];
        (config, variants)
    }
}
