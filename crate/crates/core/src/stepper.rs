//! Semi-implicit Euler-Maruyama time stepping of the spatially discretized
//! equation: the elliptic part is implicit, drift and noise are explicit,
//!
//!   (M + dt S) u^{n+1} = M ( u^n + dt f(u^n) + G(u^n) DeltaW^n ),
//!
//! with the iteration matrix factorized once per trajectory (the sampled
//! coefficient is frozen in time).

use crate::error::{Error, Result};
use crate::fem::{
    assemble_mass, assemble_stiffness, l2_project, FemFunction, Grid1D, TridiagonalFactor,
    TridiagonalSystem,
};

/// Nodal drift f(u).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftKind {
    /// f(u) = u - u^3
    AllenCahn,
    Zero,
    /// f(u) = alpha + beta u
    Affine { alpha: f64, beta: f64 },
}

impl DriftKind {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            DriftKind::AllenCahn => u - u * u * u,
            DriftKind::Zero => 0.0,
            DriftKind::Affine { alpha, beta } => alpha + beta * u,
        }
    }
}

/// Nodal noise intensity G(u) multiplying the Q-Wiener increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseCoupling {
    Zero,
    /// G(u) = u / 2
    HalfLinear,
    /// G(u) = (1 - u^2) / 2
    HalfOneMinusSquare,
}

impl NoiseCoupling {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            NoiseCoupling::Zero => 0.0,
            NoiseCoupling::HalfLinear => 0.5 * u,
            NoiseCoupling::HalfOneMinusSquare => 0.5 * (1.0 - u * u),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, NoiseCoupling::Zero)
    }
}

/// Model data shared by every trajectory of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub drift: DriftKind,
    pub coupling: NoiseCoupling,
    pub eps_a: f64,
    pub t_final: f64,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_a > 0.0) {
            return Err(Error::InvalidSpec(format!("eps_a must be positive, got {}", self.eps_a)));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::InvalidSpec(format!("T must be positive, got {}", self.t_final)));
        }
        Ok(())
    }
}

const OVERFLOW_GUARD: f64 = 1e8;

/// One trajectory in flight: current coefficients plus the frozen matrices.
pub struct SolverState {
    step_index: usize,
    u: FemFunction,
    mass: TridiagonalSystem,
    factor: TridiagonalFactor,
    dt: f64,
}

impl SolverState {
    pub fn step_index(&self) -> usize {
        self.step_index
    }
    pub fn solution(&self) -> &FemFunction {
        &self.u
    }
    pub fn mass(&self) -> &TridiagonalSystem {
        &self.mass
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Project the initial data and factorize M + dt S for the whole trajectory.
pub fn init_state(
    model: &ModelSpec,
    grid: &Grid1D,
    a_nodes: &[f64],
    u0_nodes: &[f64],
    dt: f64,
) -> Result<SolverState> {
    model.validate()?;
    if !(dt > 0.0) {
        return Err(Error::InvalidSpec(format!("dt must be positive, got {dt}")));
    }
    let mass = assemble_mass(grid);
    let stiffness = assemble_stiffness(grid, a_nodes)?;
    let iteration = mass.add_scaled(dt, &stiffness);
    let factor = iteration.factorize()?;
    let u = l2_project(u0_nodes, &mass)?;
    Ok(SolverState { step_index: 0, u, mass, factor, dt })
}

impl SolverState {
    /// Advance one step given the noise increment at the interior nodes.
    pub fn step(&mut self, model: &ModelSpec, noise_increment: &[f64]) -> Result<()> {
        let k = self.u.dim();
        if noise_increment.len() != k {
            return Err(Error::ContractViolation(format!(
                "noise increment has {} nodes, solution has {k}",
                noise_increment.len()
            )));
        }
        let dt = self.dt;
        let mut g = vec![0.0; k];
        for i in 0..k {
            let u = self.u.coeffs[i];
            g[i] = u + dt * model.drift.eval(u) + model.coupling.eval(u) * noise_increment[i];
        }
        let rhs = self.mass.mul_vec(&g);
        let next = self.factor.solve(&rhs);
        for (i, &v) in next.iter().enumerate() {
            if !v.is_finite() || v.abs() > OVERFLOW_GUARD {
                return Err(Error::Divergence { step: self.step_index, node: i + 1, value: v });
            }
        }
        self.u.coeffs = next;
        self.step_index += 1;
        Ok(())
    }
}

/// Per-step supplier of the Q-Wiener increment at the interior nodes.
pub trait NoiseSource {
    fn increment(&mut self, step: usize, out: &mut [f64]) -> Result<()>;
}

/// Deterministic runs: identically zero increments.
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn increment(&mut self, _step: usize, out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }
}

impl<F> NoiseSource for F
where
    F: FnMut(usize, &mut [f64]) -> Result<()>,
{
    fn increment(&mut self, step: usize, out: &mut [f64]) -> Result<()> {
        self(step, out)
    }
}

/// Endpoint plus any requested interior snapshots of one trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_u: FemFunction,
    /// (time, solution) pairs in increasing time order.
    pub snapshots: Vec<(f64, FemFunction)>,
}

/// March `n_steps` of size `dt`, pulling increments from `noise`.
///
/// `snapshot_times` must be sorted; each requested time is captured at the
/// first step boundary reaching it. The endpoint is always returned.
pub fn evolve(
    model: &ModelSpec,
    grid: &Grid1D,
    a_nodes: &[f64],
    u0_nodes: &[f64],
    dt: f64,
    n_steps: usize,
    noise: &mut dyn NoiseSource,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    let horizon = n_steps as f64 * dt;
    if (horizon - model.t_final).abs() > 1e-9 * model.t_final.max(1.0) {
        return Err(Error::ContractViolation(format!(
            "N dt = {horizon} does not reach T = {}",
            model.t_final
        )));
    }
    let mut state = init_state(model, grid, a_nodes, u0_nodes, dt)?;
    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    let mut next_snap = snapshot_times.iter().copied().peekable();
    let tol = 0.5 * dt.max(f64::MIN_POSITIVE);
    while next_snap.peek().is_some_and(|&t| t <= tol) {
        next_snap.next();
        snapshots.push((0.0, state.u.clone()));
    }
    let mut dw = vec![0.0; grid.interior()];
    for n in 0..n_steps {
        noise.increment(n, &mut dw)?;
        state.step(model, &dw)?;
        let t = (n + 1) as f64 * dt;
        while next_snap.peek().is_some_and(|&ts| ts <= t + tol) {
            next_snap.next();
            snapshots.push((t, state.u.clone()));
        }
    }
    Ok(Trajectory { final_u: state.u, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::l2_norm;
    use crate::rng::sample_stream;
    use rand::Rng;

    fn model(drift: DriftKind, coupling: NoiseCoupling) -> ModelSpec {
        ModelSpec { drift, coupling, eps_a: 1e-3, t_final: 0.1 }
    }

    #[test]
    fn init_projects_initial_data() {
        let g = Grid1D::new(15).unwrap();
        let m = model(DriftKind::Zero, NoiseCoupling::Zero);
        let a = vec![1e-3; 17];
        let zero = init_state(&m, &g, &a, &vec![0.0; 15], 0.01).unwrap();
        assert!(zero.solution().coeffs.iter().all(|&v| v == 0.0));

        // nodal interpolant of sin(2 pi x) lies in V_h: projection keeps it
        let u0: Vec<f64> = g
            .interior_nodes()
            .iter()
            .map(|x| (2.0 * std::f64::consts::PI * x).sin())
            .collect();
        let state = init_state(&m, &g, &a, &u0, 0.01).unwrap();
        for (c, v) in state.solution().coeffs.iter().zip(&u0) {
            assert!((c - v).abs() < 1e-12);
        }

        assert!(init_state(&m, &g, &a, &u0, 0.0).is_err());
        assert!(init_state(&m, &g, &a, &u0, -0.1).is_err());
    }

    #[test]
    fn linear_step_solves_defining_system() {
        // f = 0, G = 0: (M + dt S) u1 = M u0
        let g = Grid1D::new(8).unwrap();
        let m = model(DriftKind::Zero, NoiseCoupling::Zero);
        let mut rng = sample_stream(41, 0);
        let a: Vec<f64> = (0..10).map(|_| 1e-3 * (0.5 + rng.random::<f64>())).collect();
        let u0: Vec<f64> = (0..8).map(|_| rng.random::<f64>() - 0.5).collect();
        let dt = 0.0125;
        let mut state = init_state(&m, &g, &a, &u0, dt).unwrap();
        let prev = state.solution().clone();
        state.step(&m, &vec![0.0; 8]).unwrap();

        let mass = assemble_mass(&g);
        let stiff = assemble_stiffness(&g, &a).unwrap();
        let lhs = mass.add_scaled(dt, &stiff).mul_vec(&state.solution().coeffs);
        let rhs = mass.mul_vec(&prev.coeffs);
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_case_contracts_in_mass_norm() {
        let g = Grid1D::new(16).unwrap();
        let m = model(DriftKind::Zero, NoiseCoupling::Zero);
        let mut rng = sample_stream(43, 0);
        let a: Vec<f64> = (0..18).map(|_| 0.02 * (0.5 + rng.random::<f64>())).collect();
        let u0: Vec<f64> = (0..16).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut state = init_state(&m, &g, &a, &u0, 1e-3).unwrap();
        let mass = assemble_mass(&g);
        let mut prev = l2_norm(state.solution(), &mass);
        for _ in 0..100 {
            state.step(&m, &vec![0.0; 16]).unwrap();
            let cur = l2_norm(state.solution(), &mass);
            assert!(cur <= prev + 1e-14, "norm grew: {prev} -> {cur}");
            prev = cur;
        }
    }

    #[test]
    fn zero_fixed_point_is_exact() {
        // u0 = 0, f(0) = 0, G(0) = 0 => u stays exactly zero
        let g = Grid1D::new(12).unwrap();
        let m = model(DriftKind::AllenCahn, NoiseCoupling::HalfLinear);
        let a = vec![5e-2; 14];
        let mut src = |_step: usize, out: &mut [f64]| {
            out.fill(0.7); // nonzero increments; G(0) kills them
            Ok(())
        };
        let traj =
            evolve(&m, &g, &a, &vec![0.0; 12], 1e-3, 100, &mut src, &[]).unwrap();
        assert!(traj.final_u.coeffs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_step_nonzero_noise_response() {
        // u = 0, allen-cahn drift, G = (1-u^2)/2: g = delta / 2
        let g = Grid1D::new(1).unwrap();
        let m = model(DriftKind::AllenCahn, NoiseCoupling::HalfOneMinusSquare);
        let a = vec![0.25; 3];
        let dt = 0.01;
        let delta = 0.3;
        let mut state = init_state(&m, &g, &a, &[0.0], dt).unwrap();
        state.step(&m, &[delta]).unwrap();
        // hand assembly for K=1, h=1/2: M = [1/3], S = [2/h * abar] = [4 a]
        let m11 = 1.0 / 3.0;
        let s11 = 4.0 * 0.25;
        let expected = m11 * (delta / 2.0) / (m11 + dt * s11);
        assert!((state.solution().coeffs[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn evolve_zero_steps_returns_projection() {
        let g = Grid1D::new(7).unwrap();
        let mut m = model(DriftKind::Zero, NoiseCoupling::Zero);
        m.t_final = 1.0;
        let a = vec![1e-2; 9];
        let u0: Vec<f64> = g.interior_nodes().iter().map(|x| x * (1.0 - x)).collect();
        // zero steps cannot reach T > 0
        assert!(evolve(&m, &g, &a, &u0, 0.1, 0, &mut ZeroNoise, &[]).is_err());
        let traj = evolve(&m, &g, &a, &u0, 0.125, 8, &mut ZeroNoise, &[0.0]).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        for (c, v) in traj.snapshots[0].1.coeffs.iter().zip(&u0) {
            assert!((c - v).abs() < 1e-12);
        }
    }

    #[test]
    fn trajectories_are_deterministic() {
        let g = Grid1D::new(9).unwrap();
        let m = model(DriftKind::AllenCahn, NoiseCoupling::HalfOneMinusSquare);
        let a = vec![1e-3; 11];
        let u0: Vec<f64> = g
            .interior_nodes()
            .iter()
            .map(|x| (2.0 * std::f64::consts::PI * x).sin())
            .collect();
        let run = || {
            let mut rng = sample_stream(77, 5);
            let mut src = move |_s: usize, out: &mut [f64]| {
                for o in out.iter_mut() {
                    *o = 0.05 * (rng.random::<f64>() - 0.5);
                }
                Ok(())
            };
            evolve(&m, &g, &a, &u0, 1e-3, 100, &mut src, &[]).unwrap()
        };
        assert_eq!(run().final_u, run().final_u);
    }

    #[test]
    fn divergence_guard_fires() {
        // huge affine drift with explicit treatment blows up quickly
        let g = Grid1D::new(4).unwrap();
        let m = ModelSpec {
            drift: DriftKind::Affine { alpha: 0.0, beta: 1e6 },
            coupling: NoiseCoupling::Zero,
            eps_a: 1e-3,
            t_final: 1.0,
        };
        let a = vec![1e-3; 6];
        let u0 = vec![1.0; 4];
        let err = evolve(&m, &g, &a, &u0, 0.05, 20, &mut ZeroNoise, &[]).unwrap_err();
        match err {
            Error::Divergence { step, node, .. } => {
                assert!(node >= 1);
                let _ = step;
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn dense_single_step_oracle() {
        // compare one semi-implicit step on K = 8 against a dense
        // reimplementation of the same update
        let g = Grid1D::new(8).unwrap();
        let m = model(DriftKind::AllenCahn, NoiseCoupling::HalfOneMinusSquare);
        let mut rng = sample_stream(51, 3);
        let a: Vec<f64> = (0..10).map(|_| 1e-2 * (0.5 + rng.random::<f64>())).collect();
        let u0: Vec<f64> = (0..8).map(|_| rng.random::<f64>() - 0.5).collect();
        let dw: Vec<f64> = (0..8).map(|_| 0.1 * (rng.random::<f64>() - 0.5)).collect();
        let dt = 2e-3;

        let mut state = init_state(&m, &g, &a, &u0, dt).unwrap();
        state.step(&m, &dw).unwrap();

        // dense path
        let h = g.h();
        let n = 8;
        let mut mass = vec![vec![0.0; n]; n];
        let mut stiff = vec![vec![0.0; n]; n];
        for i in 0..n {
            mass[i][i] = 2.0 * h / 3.0;
            if i + 1 < n {
                mass[i][i + 1] = h / 6.0;
                mass[i + 1][i] = h / 6.0;
            }
            let abar = |e: usize| 0.5 * (a[e] + a[e + 1]);
            stiff[i][i] = (abar(i) + abar(i + 1)) / h;
            if i + 1 < n {
                stiff[i][i + 1] = -abar(i + 1) / h;
                stiff[i + 1][i] = -abar(i + 1) / h;
            }
        }
        let mut lhs = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                lhs[i][j] = mass[i][j] + dt * stiff[i][j];
            }
        }
        let g_vec: Vec<f64> = (0..n)
            .map(|i| u0[i] + dt * m.drift.eval(u0[i]) + m.coupling.eval(u0[i]) * dw[i])
            .collect();
        let rhs: Vec<f64> =
            (0..n).map(|i| (0..n).map(|j| mass[i][j] * g_vec[j]).sum()).collect();
        // Gaussian elimination
        let mut aug = lhs;
        let mut b = rhs;
        for col in 0..n {
            let piv =
                (col..n).max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs())).unwrap();
            aug.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..n {
                let f = aug[row][col] / aug[col][col];
                for c in col..n {
                    aug[row][c] -= f * aug[col][c];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut s = b[row];
            for c in row + 1..n {
                s -= aug[row][c] * x[c];
            }
            x[row] = s / aug[row][row];
        }

        for (got, want) in state.solution().coeffs.iter().zip(&x) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }
}
