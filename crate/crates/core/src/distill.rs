//! Two-pair recurrence distillation and the n-copy distillability test.
//!
//! One recurrence step takes two copies of a two-qubit state. Alice and Bob
//! each apply a CNOT from their first qubit onto their second, measure the
//! second qubits in the computational basis and keep the first pair when
//! the outcomes agree. [`recurrence_step`] computes the kept state exactly
//! on the 16-dimensional two-pair space.
//!
//! Index convention: `ρ ⊗ ρ` is ordered `(A1, B1, A2, B2)` and permuted to
//! `(A1, A2, B1, B2)` so that each party's CNOT is a local 4×4 block.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64, HERMITIAN_TOL, ONE};
use crate::par::{self, SearchOptions};
use crate::separability;
use crate::states::{self, BellKind, DensityMatrix, PureState};

/// Largest operator the distillability test will build.
pub const DIMENSION_BUDGET: usize = 256;

const SUCCESS_FLOOR: f64 = 1e-12;
const ALTERNATION_TOL: f64 = 1e-12;
const ALTERNATION_MAX_ITERS: usize = 500;

/// Fidelity with `|Φ+⟩` and the matching isotropic parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicParams {
    /// `(4F − 1)/3`. Lies in `[−1/3, 1]`; negative only for `F < 1/4`.
    pub p: f64,
    pub fidelity: f64,
}

impl IsotropicParams {
    pub fn from_fidelity(fidelity: f64) -> Self {
        Self {
            p: (4.0 * fidelity - 1.0) / 3.0,
            fidelity,
        }
    }
}

/// `F = ⟨Φ+|ρ|Φ+⟩`, `p = (4F − 1)/3`. Twirling by random bilateral
/// rotations maps `ρ` onto the isotropic state with this fidelity.
pub fn twirl_to_isotropic(rho: &DensityMatrix) -> Result<IsotropicParams> {
    require_two_qubits(rho)?;
    let f = rho.overlap(states::bell(BellKind::PhiPlus).amplitudes());
    Ok(IsotropicParams::from_fidelity(f))
}

/// Isotropic state at a given fidelity, allowing the full `[1/4, 1]` range.
pub fn isotropic_at_fidelity(fidelity: f64) -> Result<DensityMatrix> {
    if !(0.25..=1.0).contains(&fidelity) {
        return Err(Error::InvalidParameter(format!(
            "fidelity {fidelity} not in [1/4, 1]"
        )));
    }
    let p = ((4.0 * fidelity - 1.0) / 3.0).clamp(0.0, 1.0);
    states::werner(p)
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::InvalidParameter(format!(
            "two-qubit state required, got dims {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

/// CNOT with the first qubit as control, basis `|a1 a2⟩`.
fn cnot() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

const TWO_PAIR_DIMS: [usize; 4] = [2, 2, 2, 2];
/// `(A1, B1, A2, B2) <-> (A1, A2, B1, B2)`; the permutation is its own inverse.
const PAIR_TO_LOCAL: [usize; 4] = [0, 2, 1, 3];

/// Unnormalized kept state on `(A1, B1)` after CNOTs and the agreeing
/// measurement outcomes on `(A2, B2)`.
fn kept_branch(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let joint = linalg::tensor(rho, rho);
    let local = linalg::permute_subsystems(&joint, &TWO_PAIR_DIMS, &PAIR_TO_LOCAL)?;
    let c = cnot();
    let u = linalg::tensor(&c, &c);
    let after = u.matmul(&local).matmul(&u.adjoint());
    // local index = 8·a1 + 4·a2 + 2·b1 + b2; keep a2 == b2
    let keep = |i: usize| ((i >> 2) & 1) == (i & 1);
    let projected = ComplexMatrix::from_fn(16, 16, |r, c| {
        if keep(r) && keep(c) {
            after[(r, c)]
        } else {
            linalg::ZERO
        }
    });
    let back = linalg::permute_subsystems(&projected, &TWO_PAIR_DIMS, &PAIR_TO_LOCAL)?;
    linalg::reduce(&back, &TWO_PAIR_DIMS, &[0, 1])
}

/// One recurrence step: returns the renormalized kept state and the
/// probability that the two measurement outcomes agree.
pub fn recurrence_step(rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    require_two_qubits(rho)?;
    let kept = kept_branch(rho.matrix())?;
    let success = kept.trace().re;
    if success < SUCCESS_FLOOR {
        return Err(Error::DegenerateInput(success));
    }
    let out = DensityMatrix::new(kept.scale(1.0 / success), vec![2, 2])?;
    Ok((out, success))
}

/// `F ↦ F'` for the isotropic input of fidelity `F`, re-twirled after the step.
pub fn fidelity_map(f: f64) -> Result<(f64, f64)> {
    let rho = isotropic_at_fidelity(f)?;
    let (after, success) = recurrence_step(&rho)?;
    Ok((twirl_to_isotropic(&after)?.fidelity, success))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceStep {
    pub fidelity_before: f64,
    pub fidelity_after: f64,
    pub success_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTrace {
    pub steps: Vec<RecurrenceStep>,
    /// `2^k / Π success_probability` input pairs per output pair.
    pub pairs_consumed_estimate: f64,
    pub reached_target: bool,
}

impl RecurrenceTrace {
    pub fn final_fidelity(&self) -> Option<f64> {
        self.steps.last().map(|s| s.fidelity_after)
    }
}

/// Whether the state is projected back onto isotropic form between steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Twirl {
    #[default]
    EachStep,
    /// Feed the raw output of each step into the next one.
    Never,
}

impl fmt::Display for Twirl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Twirl::EachStep => "each-step",
            Twirl::Never => "never",
        })
    }
}

pub fn iterate(f0: f64, target: f64, max_steps: usize) -> Result<RecurrenceTrace> {
    iterate_with(f0, target, max_steps, Twirl::EachStep)
}

/// Repeats the recurrence step from fidelity `f0` until the fidelity
/// reaches `target` or `max_steps` steps were taken.
pub fn iterate_with(f0: f64, target: f64, max_steps: usize, twirl: Twirl) -> Result<RecurrenceTrace> {
    if !(0.25..=1.0).contains(&f0) {
        return Err(Error::InvalidParameter(format!("fidelity {f0} not in [1/4, 1]")));
    }
    if target > 1.0 {
        return Err(Error::InvalidParameter(format!("target {target} exceeds 1")));
    }
    if f0 >= target {
        return Ok(RecurrenceTrace {
            steps: Vec::new(),
            pairs_consumed_estimate: 1.0,
            reached_target: true,
        });
    }
    if f0 <= 0.5 {
        return Err(Error::NonImproving { fidelity: f0 });
    }
    iterate_state(isotropic_at_fidelity(f0)?, target, max_steps, twirl)
}

/// Runs the recurrence starting from an arbitrary two-qubit state.
pub fn iterate_state(
    rho: DensityMatrix,
    target: f64,
    max_steps: usize,
    twirl: Twirl,
) -> Result<RecurrenceTrace> {
    require_two_qubits(&rho)?;
    let phi = states::bell(BellKind::PhiPlus);
    let mut state = match twirl {
        Twirl::EachStep => isotropic_at_fidelity(twirl_to_isotropic(&rho)?.fidelity.max(0.25))?,
        Twirl::Never => rho,
    };
    let mut fidelity = state.overlap(phi.amplitudes());
    if twirl == Twirl::EachStep && fidelity <= 0.5 && target > fidelity {
        return Err(Error::NonImproving { fidelity });
    }
    let mut steps = Vec::new();
    let mut pairs = 1.0;
    while fidelity < target && steps.len() < max_steps {
        let (after, success) = recurrence_step(&state)?;
        let next = after.overlap(phi.amplitudes());
        steps.push(RecurrenceStep {
            fidelity_before: fidelity,
            fidelity_after: next,
            success_probability: success,
        });
        pairs *= 2.0 / success;
        fidelity = next;
        state = match twirl {
            Twirl::EachStep => isotropic_at_fidelity(next.clamp(0.25, 1.0))?,
            Twirl::Never => after,
        };
    }
    Ok(RecurrenceTrace {
        steps,
        pairs_consumed_estimate: pairs,
        reached_target: fidelity >= target,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distillability {
    /// A Schmidt-rank-2 vector with negative expectation on `(ρ^{T_A})^{⊗n}` was found.
    Distillable(usize),
    Inconclusive,
}

impl fmt::Display for Distillability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distillability::Distillable(n) => write!(f, "DISTILLABLE({n})"),
            Distillability::Inconclusive => f.write_str("INCONCLUSIVE"),
        }
    }
}

/// `a1|e1 f1⟩ + a2|e2 f2⟩` across the `(A1..An | B1..Bn)` cut.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtTwoVector {
    pub coefficients: Vec<f64>,
    pub left: Vec<Vec<C64>>,
    pub right: Vec<Vec<C64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistillabilityCertificate {
    pub n: usize,
    /// Best `⟨ψ²|(ρ^{T_A})^{⊗n}|ψ²⟩` found.
    pub value: f64,
    pub witness_vector: SchmidtTwoVector,
    pub verdict: Distillability,
    pub restarts: usize,
}

/// `(ρ^{T_A})^{⊗n}` with subsystems reordered to `(A1..An, B1..Bn)`.
fn copies_operator(rho: &DensityMatrix, n: usize) -> Result<(ComplexMatrix, usize, usize)> {
    let (da, db) = rho.bipartite_dims()?;
    let big_a = da.pow(n as u32);
    let big_b = db.pow(n as u32);
    let total = big_a * big_b;
    if total > DIMENSION_BUDGET {
        return Err(Error::DimensionBudget {
            dim: total,
            budget: DIMENSION_BUDGET,
        });
    }
    let pt = linalg::partial_transpose(rho.matrix(), rho.dims(), 0)?;
    let copies: Vec<&ComplexMatrix> = std::iter::repeat_n(&pt, n).collect();
    let joint = linalg::tensor_all(copies);
    let dims: Vec<usize> = std::iter::repeat_n([da, db], n).flatten().collect();
    let perm: Vec<usize> = (0..n).map(|k| 2 * k).chain((0..n).map(|k| 2 * k + 1)).collect();
    Ok((linalg::permute_subsystems(&joint, &dims, &perm)?, big_a, big_b))
}

/// Columns spanning the same space as `vs`, padded with random directions
/// to exactly two orthonormal columns.
fn two_frame(vs: Vec<Vec<C64>>, dim: usize, rng: &mut impl Rng) -> Vec<Vec<C64>> {
    let mut cols = vs;
    linalg::gram_schmidt(&mut cols);
    cols.retain(|c| linalg::norm(c) > 0.5);
    while cols.len() < 2 {
        cols.push(states::gaussian_vector(rng, dim));
        linalg::gram_schmidt(&mut cols);
        cols.retain(|c| linalg::norm(c) > 0.5);
    }
    cols.truncate(2);
    cols
}

/// `J = E ⊗ 1_{db}` or `1_{da} ⊗ F`, as a `(da·db) × (2·other)` isometry.
fn embed_left(frame: &[Vec<C64>], db: usize) -> ComplexMatrix {
    let da = frame[0].len();
    ComplexMatrix::from_fn(da * db, 2 * db, |row, col| {
        let (i, b) = (row / db, row % db);
        let (k, b2) = (col / db, col % db);
        if b == b2 {
            frame[k][i]
        } else {
            linalg::ZERO
        }
    })
}

fn embed_right(frame: &[Vec<C64>], da: usize) -> ComplexMatrix {
    let db = frame[0].len();
    ComplexMatrix::from_fn(da * db, da * 2, |row, col| {
        let (i, b) = (row / db, row % db);
        let (i2, l) = (col / 2, col % 2);
        if i == i2 {
            frame[l][b]
        } else {
            linalg::ZERO
        }
    })
}

fn compressed_min(x: &ComplexMatrix, j: &ComplexMatrix) -> (f64, Vec<C64>) {
    let y = j.adjoint().matmul(x).matmul(j).hermitian_part();
    let eig = linalg::hermitian_eig(&y, f64::INFINITY).expect("compression is Hermitian");
    (eig.min(), j.apply(&eig.min_vector()))
}

/// Alternating minimisation over Schmidt-rank-≤2 vectors: with Alice's
/// two-dimensional support fixed the best vector is an eigenvector of the
/// compressed operator, and likewise for Bob.
fn rank_two_search(x: &ComplexMatrix, da: usize, db: usize, rng: &mut impl Rng) -> (f64, Vec<C64>) {
    let mut frame_a = two_frame(Vec::new(), da, rng);
    let mut value = f64::INFINITY;
    let mut best = Vec::new();
    for _ in 0..ALTERNATION_MAX_ITERS {
        let (_, psi) = compressed_min(x, &embed_left(&frame_a, db));
        // Bob's support: rows of the da×db coefficient matrix projected on frame_a
        let right: Vec<Vec<C64>> = frame_a
            .iter()
            .map(|e| {
                (0..db)
                    .map(|b| (0..da).map(|i| e[i].conj() * psi[i * db + b]).sum())
                    .collect()
            })
            .collect();
        let frame_b = two_frame(right, db, rng);
        // psi from the first half lies in the new subspace, so vb <= va
        let (vb, psi) = compressed_min(x, &embed_right(&frame_b, da));
        let left: Vec<Vec<C64>> = frame_b
            .iter()
            .map(|f| {
                (0..da)
                    .map(|i| (0..db).map(|b| f[b].conj() * psi[i * db + b]).sum())
                    .collect()
            })
            .collect();
        frame_a = two_frame(left, da, rng);
        let next = vb;
        let improvement = value - next;
        if next < value {
            value = next;
            best = psi;
        }
        if improvement < ALTERNATION_TOL {
            break;
        }
    }
    (value, best)
}

/// Searches for a Schmidt-rank-2 vector with negative expectation on
/// `(ρ^{T_A})^{⊗n}`, `n ∈ {1, 2}`.
pub fn distillability_test(
    rho: &DensityMatrix,
    n: usize,
    opts: &SearchOptions,
) -> Result<DistillabilityCertificate> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidParameter(format!("copies n = {n} must be 1 or 2")));
    }
    let (x, big_a, big_b) = copies_operator(rho, n)?;
    let restarts = opts.restarts.max(1);
    let runs = par::map_indexed(restarts, opts.execution, |i| {
        rank_two_search(&x, big_a, big_b, &mut par::restart_rng(opts.seed, i))
    });
    let best = par::argmin_by_key(&runs, |r| r.0).expect("at least one restart");
    let (value, psi) = runs[best].clone();
    let decomposition = separability::schmidt_decompose(
        &PureState::normalize(psi, vec![big_a, big_b])?,
        separability::RANK_TOL,
    )?;
    let verdict = if value < -separability::ZERO_TOL {
        Distillability::Distillable(n)
    } else {
        Distillability::Inconclusive
    };
    Ok(DistillabilityCertificate {
        n,
        value,
        witness_vector: SchmidtTwoVector {
            coefficients: decomposition.coefficients,
            left: decomposition.left_basis,
            right: decomposition.right_basis,
        },
        verdict,
        restarts,
    })
}

/// `⟨ψ|(ρ^{T_A})^{⊗n}|ψ⟩` for a vector on the `(A1..An, B1..Bn)` space.
pub fn copies_expectation(rho: &DensityMatrix, n: usize, psi: &[C64]) -> Result<f64> {
    let (x, _, _) = copies_operator(rho, n)?;
    Ok(x.expectation(psi).re)
}

/// Minimum eigenvalue of `(ρ^{T_A})^{⊗n}`: a lower bound for any test vector.
pub fn copies_min_eigenvalue(rho: &DensityMatrix, n: usize) -> Result<f64> {
    let (x, _, _) = copies_operator(rho, n)?;
    Ok(linalg::hermitian_eig(&x, HERMITIAN_TOL)?.min())
}
