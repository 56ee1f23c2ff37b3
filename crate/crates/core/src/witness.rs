//! Witness operators.
//!
//! A witness `W` is Hermitian with `tr(Wσ) >= 0` on every separable `σ`, so
//! `tr(Wρ) < 0` certifies that `ρ` is entangled. This module builds witnesses
//! from NPT states and from positive maps, shifts them until they touch the
//! product states, evaluates Schmidt-number witnesses and provides the
//! GHZ and W witnesses for three qubits.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64, HERMITIAN_TOL, ZERO};
use crate::par::{self, SearchOptions};
use crate::states::{self, DensityMatrix, PureState};

const SEESAW_TOL: f64 = 1e-12;
const SEESAW_MAX_ITERS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    Entanglement,
    /// Detects Schmidt number at least `k`.
    Schmidt(usize),
    Ghz,
    W,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessKind::Entanglement => f.write_str("entanglement"),
            WitnessKind::Schmidt(k) => write!(f, "schmidt-{k}"),
            WitnessKind::Ghz => f.write_str("ghz"),
            WitnessKind::W => f.write_str("w"),
        }
    }
}

impl FromStr for WitnessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "entanglement" => Ok(WitnessKind::Entanglement),
            "ghz" => Ok(WitnessKind::Ghz),
            "w" => Ok(WitnessKind::W),
            _ => lower
                .strip_prefix("schmidt-")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 2)
                .map(WitnessKind::Schmidt)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown witness kind {s:?}"))),
        }
    }
}

/// Positive but not completely positive maps with a matrix realisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Transpose,
    /// `Λ(σ) = tr(σ)·1 − σ`
    Reduction,
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "transpose" => Ok(MapKind::Transpose),
            "reduction" => Ok(MapKind::Reduction),
            other => Err(Error::InvalidParameter(format!("unknown map {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessOperator {
    mat: ComplexMatrix,
    dims: Vec<usize>,
    kind: WitnessKind,
    provenance: String,
}

impl WitnessOperator {
    pub fn new(
        mat: ComplexMatrix,
        dims: Vec<usize>,
        kind: WitnessKind,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        if total != mat.rows() || dims.contains(&0) {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: mat.rows(),
            });
        }
        let deviation = mat.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitian {
                deviation,
                tol: HERMITIAN_TOL,
            });
        }
        Ok(Self {
            mat: mat.hermitian_part(),
            dims,
            kind,
            provenance: provenance.into(),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn kind(&self) -> WitnessKind {
        self.kind
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// `⟨ψ|W|ψ⟩` for a vector on the witness space.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        self.mat.expectation(psi).re
    }
}

/// `Re tr(Wρ)`; fails if the imaginary part exceeds `1e-10`.
pub fn evaluate(w: &WitnessOperator, rho: &DensityMatrix) -> Result<f64> {
    if w.dims() != rho.dims() {
        return Err(Error::InvalidParameter(format!(
            "witness dims {:?} do not match state dims {:?}",
            w.dims(),
            rho.dims()
        )));
    }
    let value = w.matrix().trace_product(rho.matrix());
    if value.im.abs() > 1e-10 {
        return Err(Error::NonRealExpectation(value.im));
    }
    Ok(value.re)
}

fn bipartite(dims: &[usize]) -> Result<(usize, usize)> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::NotBipartite(dims.to_vec())),
    }
}

/// `W = (|η⟩⟨η|)^{T_A}` with `η` the eigenvector of the most negative
/// eigenvalue of `ρ^{T_A}`. Then `tr(Wρ) = λ_min(ρ^{T_A})` and
/// `⟨ab|W|ab⟩ = |⟨a* b|η⟩|² >= 0`.
pub fn construct_from_npt(rho: &DensityMatrix) -> Result<WitnessOperator> {
    bipartite(rho.dims())?;
    let pt = linalg::partial_transpose(rho.matrix(), rho.dims(), 0)?;
    let eig = linalg::hermitian_eig(&pt, HERMITIAN_TOL)?;
    let min_eigenvalue = eig.min();
    if min_eigenvalue >= -crate::separability::ZERO_TOL {
        return Err(Error::PositivePartialTranspose { min_eigenvalue });
    }
    let eta = eig.min_vector();
    let mat = linalg::partial_transpose(&ComplexMatrix::projector(&eta), rho.dims(), 0)?;
    WitnessOperator::new(
        mat,
        rho.dims().to_vec(),
        WitnessKind::Entanglement,
        format!("npt-eigenvector lambda_min={min_eigenvalue:e}"),
    )
}

/// Best product state found by the see-saw search.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMinimum {
    pub value: f64,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub restarts: usize,
    pub best_restart: usize,
}

/// `(⟨a| ⊗ 1) W (|a⟩ ⊗ 1)`.
fn contract_first(w: &ComplexMatrix, a: &[C64], db: usize) -> ComplexMatrix {
    let da = a.len();
    ComplexMatrix::from_fn(db, db, |k, l| {
        let mut acc = ZERO;
        for i in 0..da {
            for j in 0..da {
                acc += a[i].conj() * w[(i * db + k, j * db + l)] * a[j];
            }
        }
        acc
    })
}

/// `(1 ⊗ ⟨b|) W (1 ⊗ |b⟩)`.
fn contract_second(w: &ComplexMatrix, b: &[C64], da: usize) -> ComplexMatrix {
    let db = b.len();
    ComplexMatrix::from_fn(da, da, |i, j| {
        let mut acc = ZERO;
        for k in 0..db {
            for l in 0..db {
                acc += b[k].conj() * w[(i * db + k, j * db + l)] * b[l];
            }
        }
        acc
    })
}

fn seesaw(w: &ComplexMatrix, da: usize, db: usize, rng: &mut impl Rng) -> (f64, Vec<C64>, Vec<C64>) {
    let mut a = linalg::normalized(&states::gaussian_vector(rng, da));
    let mut b = linalg::normalized(&states::gaussian_vector(rng, db));
    let mut value = w.expectation(&linalg::kron_vec(&a, &b)).re;
    for _ in 0..SEESAW_MAX_ITERS {
        let eb = linalg::hermitian_eig(&contract_first(w, &a, db).hermitian_part(), f64::INFINITY)
            .expect("contraction of a Hermitian operator is Hermitian");
        b = eb.min_vector();
        let ea = linalg::hermitian_eig(&contract_second(w, &b, da).hermitian_part(), f64::INFINITY)
            .expect("contraction of a Hermitian operator is Hermitian");
        a = ea.min_vector();
        let next = ea.min();
        let improvement = value - next;
        value = next.min(value);
        if improvement < SEESAW_TOL {
            break;
        }
    }
    (w.expectation(&linalg::kron_vec(&a, &b)).re, a, b)
}

/// Lowest `⟨a⊗b|W|a⊗b⟩` over product vectors found by alternating
/// smallest-eigenvector updates from `opts.restarts` random starts.
pub fn min_product_expectation(w: &WitnessOperator, opts: &SearchOptions) -> Result<ProductMinimum> {
    let (da, db) = bipartite(w.dims())?;
    let restarts = opts.restarts.max(1);
    let runs = par::map_indexed(restarts, opts.execution, |i| {
        seesaw(w.matrix(), da, db, &mut par::restart_rng(opts.seed, i))
    });
    let best = par::argmin_by_key(&runs, |r| r.0).expect("at least one restart");
    let (value, a, b) = runs[best].clone();
    Ok(ProductMinimum {
        value,
        a,
        b,
        restarts,
        best_restart: best,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftResult {
    pub witness: WitnessOperator,
    /// `m`, the minimum product expectation of the input witness.
    pub shift: f64,
    /// Minimum product expectation of the shifted witness.
    pub post_min: f64,
}

/// `W' = W − m·1` with `m` the minimum product expectation of `W`, moving
/// the separating hyperplane until it touches the product states.
pub fn shift_optimize(w: &WitnessOperator, opts: &SearchOptions) -> Result<ShiftResult> {
    let found = min_product_expectation(w, opts)?;
    let m = found.value;
    let n = w.matrix().rows();
    let mat = w.matrix() - &ComplexMatrix::identity(n).scale(m);
    let shifted = WitnessOperator::new(
        mat,
        w.dims().to_vec(),
        w.kind(),
        format!(
            "shift-optimized m={m:e} restarts={} seed={} from [{}]",
            found.restarts,
            opts.seed,
            w.provenance()
        ),
    )?;
    let post_min = min_product_expectation(&shifted, opts)?.value;
    if !(-1e-8..=1e-6).contains(&post_min) {
        return Err(Error::ShiftCheckFailed(post_min));
    }
    Ok(ShiftResult {
        witness: shifted,
        shift: m,
        post_min,
    })
}

/// `(1 ⊗ Λ)ρ` with the map acting on the second subsystem.
pub fn apply_map_to_second(map: MapKind, rho: &ComplexMatrix, dims: &[usize]) -> Result<ComplexMatrix> {
    let (_, db) = bipartite(dims)?;
    match map {
        MapKind::Transpose => linalg::partial_transpose(rho, dims, 1),
        MapKind::Reduction => {
            let rho_a = linalg::partial_trace(rho, dims, 0)?;
            Ok(&linalg::tensor(&rho_a, &ComplexMatrix::identity(db)) - rho)
        }
    }
}

/// `W = (1 ⊗ Λ) P₊` on `d × d`.
pub fn jamiolkowski(map: MapKind, d: usize) -> Result<WitnessOperator> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("local dimension {d} < 2")));
    }
    let p_plus = states::max_entangled_projector(d);
    let mat = apply_map_to_second(map, &p_plus, &[d, d])?;
    WitnessOperator::new(
        mat,
        vec![d, d],
        WitnessKind::Entanglement,
        format!("jamiolkowski map={map:?} d={d}"),
    )
}

fn projector_witness(bound: f64, psi: &PureState, kind: WitnessKind, label: &str) -> WitnessOperator {
    let n = psi.amplitudes().len();
    let mat = &ComplexMatrix::identity(n).scale(bound) - &ComplexMatrix::projector(psi.amplitudes());
    WitnessOperator::new(mat, psi.dims().to_vec(), kind, label)
        .expect("identity minus a projector is Hermitian")
}

/// `3/4·1 − P_GHZ`.
pub fn ghz_witness() -> WitnessOperator {
    projector_witness(0.75, &states::ghz(), WitnessKind::Ghz, "3/4 - P_GHZ")
}

/// `2/3·1 − P_W`.
pub fn w_witness() -> WitnessOperator {
    projector_witness(2.0 / 3.0, &states::w_state(), WitnessKind::W, "2/3 - P_W")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchmidtConclusion {
    /// Schmidt number is certified to be at least this value.
    AtLeast(usize),
    NoConclusion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtVerdict {
    pub value: f64,
    pub conclusion: SchmidtConclusion,
}

/// Evaluates a Schmidt-`k` witness: a negative value certifies Schmidt
/// number `>= k`.
pub fn schmidt_witness_eval(w: &WitnessOperator, rho: &DensityMatrix) -> Result<SchmidtVerdict> {
    let WitnessKind::Schmidt(k) = w.kind() else {
        return Err(Error::KindMismatch {
            expected: "schmidt-k".into(),
            found: w.kind().to_string(),
        });
    };
    let value = evaluate(w, rho)?;
    let conclusion = if value < 0.0 {
        SchmidtConclusion::AtLeast(k)
    } else {
        SchmidtConclusion::NoConclusion
    };
    Ok(SchmidtVerdict { value, conclusion })
}

/// One-sided class evidence for a three-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripartiteEvidence {
    pub ghz_value: f64,
    pub w_value: f64,
}

impl TripartiteEvidence {
    /// `tr(W_W ρ) < 0`: not in the biseparable class.
    pub fn outside_biseparable(&self) -> bool {
        self.w_value < 0.0
    }

    /// `tr(W_GHZ ρ) < 0`: in the GHZ class but not the W class.
    pub fn ghz_not_w(&self) -> bool {
        self.ghz_value < 0.0
    }

    pub fn summary(&self) -> &'static str {
        match (self.ghz_not_w(), self.outside_biseparable()) {
            (true, _) => "GHZ\\W",
            (false, true) => "outside B",
            (false, false) => "no conclusion",
        }
    }
}

pub fn classify_tripartite(rho: &DensityMatrix) -> Result<TripartiteEvidence> {
    if rho.dims() != [2, 2, 2] {
        return Err(Error::InvalidParameter(format!(
            "three-qubit state required, got dims {:?}",
            rho.dims()
        )));
    }
    Ok(TripartiteEvidence {
        ghz_value: evaluate(&ghz_witness(), rho)?,
        w_value: evaluate(&w_witness(), rho)?,
    })
}

/// Random pure three-qubit state that is a product across a randomly
/// chosen cut (A–BC, B–AC or C–AB).
pub fn sample_biseparable(rng: &mut impl Rng) -> PureState {
    let single = states::random_pure_with(&[2], rng).expect("valid dims");
    let pair = states::random_pure_with(&[2, 2], rng).expect("valid dims");
    let psi = linalg::kron_vec(single.amplitudes(), pair.amplitudes());
    // product is ordered (X, Y, Z) with X the lone qubit
    let lone = rng.random_range(0..3);
    let perm: [usize; 3] = match lone {
        0 => [0, 1, 2],
        1 => [1, 0, 2],
        _ => [1, 2, 0],
    };
    let vec = linalg::permute_vector(&psi, &[2, 2, 2], &perm).expect("valid permutation");
    PureState::normalize(vec, vec![2, 2, 2]).expect("normalized product")
}

fn condition_number(m: &ComplexMatrix) -> f64 {
    let eig = linalg::hermitian_eig(&m.adjoint().matmul(m).hermitian_part(), f64::INFINITY)
        .expect("Gram matrix is Hermitian");
    let lo = eig.eigenvalues[0].max(0.0).sqrt();
    let hi = eig.eigenvalues[eig.eigenvalues.len() - 1].sqrt();
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Random invertible 2×2 operator with condition number at most `1e3`.
fn random_local_invertible(rng: &mut impl Rng) -> ComplexMatrix {
    loop {
        let v = states::gaussian_vector(rng, 4);
        let m = ComplexMatrix::new(2, 2, v).expect("finite entries");
        if condition_number(&m) <= 1e3 {
            return m;
        }
    }
}

/// `(A⊗B⊗C)|ψ_W⟩` renormalized, with random invertible local operators.
pub fn sample_w_class(rng: &mut impl Rng) -> PureState {
    let ops: Vec<ComplexMatrix> = (0..3).map(|_| random_local_invertible(rng)).collect();
    let op = linalg::tensor_all(&ops);
    let vec = op.apply(states::w_state().amplitudes());
    PureState::normalize(vec, vec![2, 2, 2]).expect("invertible image is nonzero")
}
