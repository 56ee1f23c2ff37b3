//! Operational separability tests for bipartite states.
//!
//! Three necessary conditions are implemented, from strongest to weakest:
//! positivity of the partial transpose, the reduction criterion and the
//! majorization criterion. In `2 × 2` and `2 × 3` the PPT test is also
//! sufficient, so [`analyze`] can return a definite answer there; in larger
//! dimensions a state passing every test is reported as undecided.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64, HERMITIAN_TOL};
use crate::par::{self, Execution};
use crate::states::{DensityMatrix, PureState};

/// Eigenvalues above `-ZERO_TOL` count as non-negative.
pub const ZERO_TOL: f64 = 1e-10;

/// Schmidt coefficients at or below this are dropped.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    Ppt,
    Reduction,
    Majorization,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Ppt => "PPT",
            Criterion::Reduction => "REDUCTION",
            Criterion::Majorization => "MAJORIZATION",
        })
    }
}

/// Outcome of a single criterion.
///
/// `margin` is the minimum eigenvalue for PPT and reduction, and the most
/// negative majorization slack otherwise. It is reported raw so callers can
/// apply their own threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub satisfied: bool,
    pub margin: f64,
    /// `|margin| <= ZERO_TOL`: the state sits on the boundary and counts as satisfied.
    pub boundary: bool,
}

impl CriterionReport {
    fn from_margin(criterion: Criterion, margin: f64) -> Self {
        Self {
            criterion,
            satisfied: margin >= -ZERO_TOL,
            margin,
            boundary: margin.abs() <= ZERO_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Separable,
    Entangled,
    Undecided,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Separable => "SEPARABLE",
            Status::Entangled => "ENTANGLED",
            Status::Undecided => "UNDECIDED",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    /// PPT, reduction and majorization reports, in that order.
    pub basis: Vec<CriterionReport>,
    pub dims: Vec<usize>,
}

impl Verdict {
    pub fn report(&self, criterion: Criterion) -> &CriterionReport {
        self.basis
            .iter()
            .find(|r| r.criterion == criterion)
            .expect("every verdict carries all three reports")
    }
}

/// `|ψ⟩ = Σ_i a_i |e_i⟩|f_i⟩` with descending positive coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<Vec<C64>>,
    pub right_basis: Vec<Vec<C64>>,
    pub rank: usize,
}

impl SchmidtDecomposition {
    /// `Σ_i a_i |e_i⟩⊗|f_i⟩`.
    pub fn reconstruct(&self) -> Vec<C64> {
        let da = self.left_basis.first().map_or(0, Vec::len);
        let db = self.right_basis.first().map_or(0, Vec::len);
        let mut out = vec![linalg::ZERO; da * db];
        for ((a, e), f) in self.coefficients.iter().zip(&self.left_basis).zip(&self.right_basis) {
            for (o, t) in out.iter_mut().zip(linalg::kron_vec(e, f)) {
                *o += t * *a;
            }
        }
        out
    }
}

fn require_bipartite(dims: &[usize]) -> Result<(usize, usize)> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::NotBipartite(dims.to_vec())),
    }
}

pub fn schmidt_decompose(psi: &PureState, rank_tol: f64) -> Result<SchmidtDecomposition> {
    let (da, db) = require_bipartite(psi.dims())?;
    let amps = psi.amplitudes();
    // ψ = Σ_ij M_ij |i⟩|j⟩
    let m = ComplexMatrix::from_fn(da, db, |i, j| amps[i * db + j]);
    let eig = linalg::hermitian_eig(&m.matmul(&m.adjoint()).hermitian_part(), HERMITIAN_TOL)?;

    let mut coefficients = Vec::new();
    let mut left_basis = Vec::new();
    let mut right_basis = Vec::new();
    for k in (0..da).rev() {
        let e = eig.eigenvectors.column(k);
        // a f_j = Σ_i conj(e_i) M_ij; taking a as this norm rather than the
        // square root of the eigenvalue keeps null directions at roundoff
        // (√1e-16 would already be 1e-8)
        let f: Vec<C64> = (0..db)
            .map(|j| (0..da).map(|i| e[i].conj() * m[(i, j)]).sum::<C64>())
            .collect();
        let a = linalg::norm(&f);
        if a <= rank_tol {
            continue;
        }
        coefficients.push(a);
        left_basis.push(e);
        right_basis.push(linalg::normalized(&f));
    }
    let rank = coefficients.len();
    Ok(SchmidtDecomposition {
        coefficients,
        left_basis,
        right_basis,
        rank,
    })
}

pub fn schmidt_rank(psi: &PureState, rank_tol: f64) -> Result<usize> {
    Ok(schmidt_decompose(psi, rank_tol)?.rank)
}

fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(linalg::hermitian_eig(m, HERMITIAN_TOL)?.min())
}

/// Minimum eigenvalue of `ρ^{T_A}`.
pub fn ppt_criterion(rho: &DensityMatrix) -> Result<CriterionReport> {
    require_bipartite(rho.dims())?;
    let pt = linalg::partial_transpose(rho.matrix(), rho.dims(), 0)?;
    Ok(CriterionReport::from_margin(Criterion::Ppt, min_eigenvalue(&pt)?))
}

/// Minimum eigenvalue over `ρ_A ⊗ 1 − ρ` and `1 ⊗ ρ_B − ρ`.
pub fn reduction_criterion(rho: &DensityMatrix) -> Result<CriterionReport> {
    let (da, db) = require_bipartite(rho.dims())?;
    let rho_a = rho.reduced(0)?;
    let rho_b = rho.reduced(1)?;
    let left = &linalg::tensor(rho_a.matrix(), &ComplexMatrix::identity(db)) - rho.matrix();
    let right = &linalg::tensor(&ComplexMatrix::identity(da), rho_b.matrix()) - rho.matrix();
    let margin = min_eigenvalue(&left)?.min(min_eigenvalue(&right)?);
    Ok(CriterionReport::from_margin(Criterion::Reduction, margin))
}

/// Most negative partial-sum slack `Σ_{j≤k} λ↓(reduced) − Σ_{j≤k} λ↓(ρ)`
/// over `k = 1..d−1` and both reduced states, zero-padded to length `d`.
pub fn majorization_criterion(rho: &DensityMatrix) -> Result<CriterionReport> {
    require_bipartite(rho.dims())?;
    let global = descending(rho.matrix())?;
    let mut margin = f64::INFINITY;
    for side in 0..2 {
        let local = descending(rho.reduced(side)?.matrix())?;
        margin = margin.min(majorization_slack(&global, &local));
    }
    Ok(CriterionReport::from_margin(Criterion::Majorization, margin))
}

fn descending(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(linalg::hermitian_eig(m, HERMITIAN_TOL)?.descending())
}

/// `min_k Σ_{j≤k} (y_j − x_j)` for `k < len(x)`, with `y` zero-padded.
pub fn majorization_slack(x: &[f64], y: &[f64]) -> f64 {
    let mut slack = f64::INFINITY;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (k, xk) in x.iter().enumerate().take(x.len().saturating_sub(1)) {
        sx += xk;
        sy += y.get(k).copied().unwrap_or(0.0);
        slack = slack.min(sy - sx);
    }
    if slack.is_infinite() {
        0.0
    } else {
        slack
    }
}

/// Dimensions in which PPT is necessary and sufficient.
pub fn ppt_is_sufficient(dims: &[usize]) -> bool {
    matches!(dims, [2, 2] | [2, 3] | [3, 2])
}

/// Runs all three criteria and combines them.
pub fn analyze(rho: &DensityMatrix) -> Result<Verdict> {
    require_bipartite(rho.dims())?;
    let basis = vec![
        ppt_criterion(rho)?,
        reduction_criterion(rho)?,
        majorization_criterion(rho)?,
    ];
    let status = if ppt_is_sufficient(rho.dims()) {
        if basis[0].satisfied {
            Status::Separable
        } else {
            Status::Entangled
        }
    } else if basis.iter().any(|r| !r.satisfied) {
        Status::Entangled
    } else {
        Status::Undecided
    };
    Ok(Verdict {
        status,
        basis,
        dims: rho.dims().to_vec(),
    })
}

/// [`analyze`] over many states; results come back in input order.
pub fn analyze_batch(states: &[DensityMatrix], execution: Execution) -> Vec<Result<Verdict>> {
    par::map_indexed(states.len(), execution, |i| analyze(&states[i]))
}
