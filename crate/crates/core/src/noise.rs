//! Truncated Q-Wiener increments on the spatial grid.
//!
//! The driving process is W(t, x) = sum_j sqrt(q_j) sin(j pi x) beta_j(t)
//! with power-law eigenvalues q_j = j^{-(2 gamma + 1 + eps_q)}, truncated at
//! J modes. Brownian increments are pre-generated at the finest time step so
//! coarse levels see exactly the same paths through exact aggregation.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Regularity, eigenvalue offset and truncation of the covariance operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    gamma: f64,
    eps_q: f64,
    modes: usize,
    orthonormal: bool,
}

impl NoiseSpec {
    pub const DEFAULT_EPS_Q: f64 = 0.1;
    pub const MODE_CAP: usize = 10_000;

    pub fn new(gamma: f64, eps_q: f64, modes: usize) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::InvalidSpec(format!("gamma must be nonnegative, got {gamma}")));
        }
        if !(eps_q > 0.0) {
            return Err(Error::InvalidSpec(format!("eps_q must be positive, got {eps_q}")));
        }
        if modes == 0 {
            return Err(Error::InvalidSpec("at least one noise mode is required".into()));
        }
        Ok(Self { gamma, eps_q, modes, orthonormal: false })
    }

    /// Truncation tied to the mesh through J = ceil(h^{-2/gamma}), capped.
    pub fn coupled_to_mesh(gamma: f64, eps_q: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidSpec(format!("mesh width must lie in (0,1), got {h}")));
        }
        let modes = if gamma > 0.0 {
            (h.powf(-2.0 / gamma).ceil() as usize).min(Self::MODE_CAP)
        } else {
            Self::MODE_CAP
        };
        Self::new(gamma, eps_q, modes.max(1))
    }

    /// Switch the basis from plain sin(j pi x) to the L2-orthonormal
    /// sqrt(2) sin(j pi x).
    pub fn with_orthonormal_basis(mut self) -> Self {
        self.orthonormal = true;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn eps_q(&self) -> f64 {
        self.eps_q
    }
    pub fn modes(&self) -> usize {
        self.modes
    }
    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    /// q_j = j^{-(2 gamma + 1 + eps_q)}, 1-based.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        (j as f64).powf(-(2.0 * self.gamma + 1.0 + self.eps_q))
    }

    /// sum_{j<=J} q_j
    pub fn eigenvalue_sum(&self) -> f64 {
        (1..=self.modes).map(|j| self.eigenvalue(j)).sum()
    }
}

/// Brownian increments of every mode at the finest step: entry (n, j) is
/// beta_j(t_{n+1}) - beta_j(t_n).
#[derive(Debug, Clone)]
pub struct BrownianPath {
    increments: Array2<f64>,
    dt_fine: f64,
}

impl BrownianPath {
    pub fn n_fine(&self) -> usize {
        self.increments.nrows()
    }
    pub fn modes(&self) -> usize {
        self.increments.ncols()
    }
    pub fn dt_fine(&self) -> f64 {
        self.dt_fine
    }
    pub fn increments(&self) -> &Array2<f64> {
        &self.increments
    }

    /// Per-mode increment over coarse step `step` of size `ratio * dt_fine`:
    /// the exact sum of the underlying fine rows, no resampling.
    pub fn aggregate(&self, step: usize, ratio: usize, out: &mut [f64]) -> Result<()> {
        let j = self.modes();
        if out.len() != j {
            return Err(Error::ContractViolation(format!(
                "aggregate buffer has {} slots for {} modes",
                out.len(),
                j
            )));
        }
        let lo = step * ratio;
        let hi = lo + ratio;
        if ratio == 0 || hi > self.n_fine() {
            return Err(Error::ContractViolation(format!(
                "coarse step {step} at ratio {ratio} overruns {} fine rows",
                self.n_fine()
            )));
        }
        out.fill(0.0);
        for n in lo..hi {
            let row = self.increments.row(n);
            for (o, v) in out.iter_mut().zip(row.iter()) {
                *o += v;
            }
        }
        Ok(())
    }
}

/// Independent N(0, dt_fine) increments for every (step, mode).
pub fn generate_path<R: Rng + ?Sized>(
    spec: &NoiseSpec,
    n_fine: usize,
    dt_fine: f64,
    rng: &mut R,
) -> Result<BrownianPath> {
    if n_fine == 0 {
        return Err(Error::ContractViolation("need at least one fine step".into()));
    }
    if !(dt_fine > 0.0) {
        return Err(Error::ContractViolation(format!("dt_fine must be positive, got {dt_fine}")));
    }
    let sd = dt_fine.sqrt();
    let increments = Array2::from_shape_simple_fn((n_fine, spec.modes()), || {
        let z: f64 = rng.sample(StandardNormal);
        sd * z
    });
    Ok(BrownianPath { increments, dt_fine })
}

/// Precomputed sqrt(q_j) phi_j(x_k) table so per-step synthesis is one
/// dense mode-by-node pass.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    /// modes x nodes
    weights: Array2<f64>,
}

impl ModeBasis {
    pub fn new(spec: &NoiseSpec, nodes: &[f64]) -> Self {
        let scale = if spec.is_orthonormal() { std::f64::consts::SQRT_2 } else { 1.0 };
        let weights = Array2::from_shape_fn((spec.modes(), nodes.len()), |(j, k)| {
            let mode = (j + 1) as f64;
            scale * spec.eigenvalue(j + 1).sqrt() * (mode * std::f64::consts::PI * nodes[k]).sin()
        });
        Self { weights }
    }

    pub fn nodes(&self) -> usize {
        self.weights.ncols()
    }
    pub fn modes(&self) -> usize {
        self.weights.nrows()
    }

    /// out[k] = sum_j modal[j] * sqrt(q_j) phi_j(x_k)
    pub fn synthesize(&self, modal: &[f64], out: &mut [f64]) {
        assert_eq!(modal.len(), self.modes());
        assert_eq!(out.len(), self.nodes());
        out.fill(0.0);
        for (j, row) in self.weights.rows().into_iter().enumerate() {
            let c = modal[j];
            if c == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(row.iter()) {
                *o += c * w;
            }
        }
    }
}

/// P_J^w DeltaW^n evaluated at `nodes` for coarse step `step` of size
/// `ratio * dt_fine`.
pub fn increment_on_grid(
    spec: &NoiseSpec,
    path: &BrownianPath,
    step: usize,
    ratio: usize,
    nodes: &[f64],
) -> Result<Vec<f64>> {
    if path.modes() != spec.modes() {
        return Err(Error::ContractViolation(format!(
            "path carries {} modes, spec expects {}",
            path.modes(),
            spec.modes()
        )));
    }
    let mut modal = vec![0.0; spec.modes()];
    path.aggregate(step, ratio, &mut modal)?;
    let basis = ModeBasis::new(spec, nodes);
    let mut out = vec![0.0; nodes.len()];
    basis.synthesize(&modal, &mut out);
    Ok(out)
}
