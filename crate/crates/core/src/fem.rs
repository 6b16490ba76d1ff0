//! P1 finite elements on a uniform grid of (0,1) with homogeneous Dirichlet
//! boundaries: tridiagonal mass/stiffness assembly, Thomas solves, discrete
//! L2 norms, projection and nested-grid transfer.

use crate::error::{Error, Result};

/// Uniform grid with K interior nodes, h = 1/(K+1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    k: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(interior_nodes: usize) -> Result<Self> {
        if interior_nodes == 0 {
            return Err(Error::InvalidSpec("grid needs at least one interior node".into()));
        }
        Ok(Self { k: interior_nodes, h: 1.0 / (interior_nodes + 1) as f64 })
    }

    /// Grid with `elements` elements (K = elements - 1 interior nodes).
    pub fn from_elements(elements: usize) -> Result<Self> {
        if elements < 2 {
            return Err(Error::InvalidSpec("grid needs at least two elements".into()));
        }
        Self::new(elements - 1)
    }

    pub fn interior(&self) -> usize {
        self.k
    }
    pub fn elements(&self) -> usize {
        self.k + 1
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    /// x_i for i = 0 ..= K+1.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h
    }
    pub fn all_nodes(&self) -> Vec<f64> {
        (0..=self.k + 1).map(|i| self.node(i)).collect()
    }
    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..=self.k).map(|i| self.node(i)).collect()
    }
}

/// Symmetric-storage tridiagonal matrix acting on interior coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.sup[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                self.diag[i].abs()
                    + if i > 0 { self.sub[i - 1].abs() } else { 0.0 }
                    + if i + 1 < n { self.sup[i].abs() } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    /// A + scale * B, entrywise.
    pub fn add_scaled(&self, scale: f64, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            sub: self.sub.iter().zip(&other.sub).map(|(a, b)| a + scale * b).collect(),
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a + scale * b).collect(),
            sup: self.sup.iter().zip(&other.sup).map(|(a, b)| a + scale * b).collect(),
        }
    }

    /// Thomas factorization, reusable across many right-hand sides.
    pub fn factorize(&self) -> Result<TridiagonalFactor> {
        let n = self.dim();
        let mut inv_pivot = vec![0.0; n];
        let mut lower = vec![0.0; n.saturating_sub(1)];
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                let l = self.sub[i - 1] * inv_pivot[i - 1];
                lower[i - 1] = l;
                pivot = self.diag[i] - l * self.sup[i - 1];
            }
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularSystem { row: i });
            }
            inv_pivot[i] = 1.0 / pivot;
        }
        Ok(TridiagonalFactor { inv_pivot, lower, sup: self.sup.clone() })
    }
}

/// LU factors from the Thomas algorithm (no pivoting; the systems assembled
/// here are strictly diagonally dominant).
#[derive(Debug, Clone)]
pub struct TridiagonalFactor {
    inv_pivot: Vec<f64>,
    lower: Vec<f64>,
    sup: Vec<f64>,
}

impl TridiagonalFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.inv_pivot.len();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 1..n {
            x[i] -= self.lower[i - 1] * x[i - 1];
        }
        x[n - 1] *= self.inv_pivot[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.sup[i] * x[i + 1]) * self.inv_pivot[i];
        }
        x
    }
}

/// Solve A x = b once.
pub fn solve_tridiagonal(a: &TridiagonalSystem, b: &[f64]) -> Result<Vec<f64>> {
    let x = a.factorize()?.solve(b);
    #[cfg(debug_assertions)]
    {
        let r = a.mul_vec(&x);
        let resid = r.iter().zip(b).map(|(ri, bi)| (ri - bi).abs()).fold(0.0, f64::max);
        let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        debug_assert!(
            resid <= 1e-10 * (a.norm_inf() * xn + bn).max(f64::MIN_POSITIVE),
            "tridiagonal residual {resid} out of contract"
        );
    }
    Ok(x)
}

/// Mass matrix: diag 2h/3, off-diagonals h/6.
pub fn assemble_mass(grid: &Grid1D) -> TridiagonalSystem {
    let k = grid.interior();
    let h = grid.h();
    TridiagonalSystem {
        sub: vec![h / 6.0; k.saturating_sub(1)],
        diag: vec![2.0 * h / 3.0; k],
        sup: vec![h / 6.0; k.saturating_sub(1)],
    }
}

/// Stiffness matrix with the sampled coefficient averaged per element:
/// on I_k the coefficient is (a(x_{k-1}) + a(x_k)) / 2.
///
/// `a_nodes` holds nodal coefficient values at all K+2 grid nodes.
pub fn assemble_stiffness(grid: &Grid1D, a_nodes: &[f64]) -> Result<TridiagonalSystem> {
    let k = grid.interior();
    let h = grid.h();
    if a_nodes.len() != k + 2 {
        return Err(Error::ContractViolation(format!(
            "coefficient has {} nodes, grid has {}",
            a_nodes.len(),
            k + 2
        )));
    }
    if let Some(bad) = a_nodes.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::ContractViolation(format!("coefficient must be positive, got {bad}")));
    }
    // element averages: a_bar[e] for element I_{e+1} = [x_e, x_{e+1}], e = 0..K
    let a_bar: Vec<f64> = (0..=k).map(|e| 0.5 * (a_nodes[e] + a_nodes[e + 1])).collect();
    let diag: Vec<f64> = (0..k).map(|i| (a_bar[i] + a_bar[i + 1]) / h).collect();
    let off: Vec<f64> = (1..k).map(|i| -a_bar[i] / h).collect();
    Ok(TridiagonalSystem { sub: off.clone(), diag, sup: off })
}

/// Interior coefficients of a V_h function (boundary values are zero).
#[derive(Debug, Clone, PartialEq)]
pub struct FemFunction {
    pub coeffs: Vec<f64>,
}

impl FemFunction {
    pub fn zeros(k: usize) -> Self {
        Self { coeffs: vec![0.0; k] }
    }
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }
}

/// Exact L2 norm of the piecewise-linear function: sqrt(u^T M u).
pub fn l2_norm(u: &FemFunction, mass: &TridiagonalSystem) -> f64 {
    assert_eq!(u.dim(), mass.dim());
    let mu = mass.mul_vec(&u.coeffs);
    u.coeffs.iter().zip(&mu).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
}

/// L2 projection onto V_h of the function given by its interior nodal values
/// (load vector formed from the nodal interpolant, so this is the identity
/// on V_h and second-order accurate otherwise).
pub fn l2_project(values_at_nodes: &[f64], mass: &TridiagonalSystem) -> Result<FemFunction> {
    if values_at_nodes.len() != mass.dim() {
        return Err(Error::ContractViolation(format!(
            "projection data has {} nodes, mass matrix has {}",
            values_at_nodes.len(),
            mass.dim()
        )));
    }
    let rhs = mass.mul_vec(values_at_nodes);
    Ok(FemFunction { coeffs: solve_tridiagonal(mass, &rhs)? })
}

fn nesting_ratio(fine: &Grid1D, coarse: &Grid1D) -> Result<usize> {
    let nf = fine.elements();
    let nc = coarse.elements();
    if nf % nc != 0 {
        return Err(Error::ContractViolation(format!(
            "grids are not nested: {nf} elements vs {nc}"
        )));
    }
    Ok(nf / nc)
}

/// Sample a fine-grid function at the shared coarse nodes.
pub fn restrict_to_coarse(
    fine: &FemFunction,
    fine_grid: &Grid1D,
    coarse_grid: &Grid1D,
) -> Result<FemFunction> {
    if fine.dim() != fine_grid.interior() {
        return Err(Error::ContractViolation("function does not match fine grid".into()));
    }
    let r = nesting_ratio(fine_grid, coarse_grid)?;
    let coeffs = (1..=coarse_grid.interior()).map(|i| fine.coeffs[i * r - 1]).collect();
    Ok(FemFunction { coeffs })
}

/// Piecewise-linear interpolation onto the fine grid; lossless because
/// V_H is a subspace of V_h for nested grids.
pub fn prolong_to_fine(
    coarse: &FemFunction,
    coarse_grid: &Grid1D,
    fine_grid: &Grid1D,
) -> Result<FemFunction> {
    if coarse.dim() != coarse_grid.interior() {
        return Err(Error::ContractViolation("function does not match coarse grid".into()));
    }
    let r = nesting_ratio(fine_grid, coarse_grid)?;
    let kf = fine_grid.interior();
    let coarse_at = |i: usize| -> f64 {
        // nodal value at coarse node i, including boundary zeros
        if i == 0 || i == coarse_grid.interior() + 1 {
            0.0
        } else {
            coarse.coeffs[i - 1]
        }
    };
    let mut coeffs = vec![0.0; kf];
    for fine_idx in 1..=kf {
        let cell = fine_idx / r;
        let rem = fine_idx % r;
        coeffs[fine_idx - 1] = if rem == 0 {
            coarse_at(cell)
        } else {
            let t = rem as f64 / r as f64;
            (1.0 - t) * coarse_at(cell) + t * coarse_at(cell + 1)
        };
    }
    Ok(FemFunction { coeffs })
}
