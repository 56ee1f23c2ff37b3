//! Validated state types and the named state families: Bell states,
//! isotropic/Werner states, GHZ and W states, the symmetric/antisymmetric
//! family, and seeded random states.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64, HERMITIAN_TOL, ONE, ZERO};

pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;

/// A Hermitian, unit-trace, positive semidefinite matrix on a composite
/// space with the given subsystem dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    dims: Vec<usize>,
    psd_tol: f64,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::with_tolerance(mat, dims, PSD_TOL)
    }

    /// Validates `mat`. Matrices within the Hermiticity tolerance are
    /// replaced by their Hermitian part.
    pub fn with_tolerance(mat: ComplexMatrix, dims: Vec<usize>, psd_tol: f64) -> Result<Self> {
        check_dims(&dims, mat.rows())?;
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        let deviation = mat.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitian {
                deviation,
                tol: HERMITIAN_TOL,
            });
        }
        let mat = mat.hermitian_part();
        let trace = mat.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotUnit {
                deviation: trace - 1.0,
            });
        }
        let min_eigenvalue = linalg::hermitian_eig(&mat, HERMITIAN_TOL)?.min();
        if min_eigenvalue < -psd_tol {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { mat, dims, psd_tol })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            mat: ComplexMatrix::projector(psi.amplitudes()).hermitian_part(),
            dims: psi.dims().to_vec(),
            psd_tol: PSD_TOL,
        }
    }

    pub fn maximally_mixed(dims: &[usize]) -> Result<Self> {
        let n: usize = dims.iter().product();
        Self::new(ComplexMatrix::identity(n).scale(1.0 / n as f64), dims.to_vec())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn psd_tol(&self) -> f64 {
        self.psd_tol
    }

    /// `(dA, dB)` for a two-party state.
    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::NotBipartite(self.dims.clone())),
        }
    }

    /// Reduced state of one subsystem.
    pub fn reduced(&self, keep: usize) -> Result<DensityMatrix> {
        let mat = linalg::partial_trace(&self.mat, &self.dims, keep)?;
        Ok(Self {
            mat: mat.hermitian_part(),
            dims: vec![self.dims[keep]],
            psd_tol: self.psd_tol,
        })
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap(&self, psi: &[C64]) -> f64 {
        self.mat.expectation(psi).re
    }

    pub fn spectrum(&self) -> Vec<f64> {
        linalg::hermitian_eig(&self.mat, HERMITIAN_TOL)
            .expect("density matrices are Hermitian")
            .eigenvalues
    }

    /// `weight·self + (1 − weight)·other`.
    pub fn mix(&self, other: &DensityMatrix, weight: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::InvalidParameter(format!(
                "cannot mix dims {:?} with {:?}",
                self.dims, other.dims
            )));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidParameter(format!("mixing weight {weight} not in [0,1]")));
        }
        let m = &self.mat.scale(weight) + &other.mat.scale(1.0 - weight);
        Self::new(m, self.dims.clone())
    }

    /// `(U_A ⊗ U_B ⊗ …) ρ (…)†` for local operators given per subsystem.
    pub fn conjugate_local(&self, locals: &[ComplexMatrix]) -> Result<DensityMatrix> {
        if locals.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: locals.len(),
            });
        }
        let u = linalg::tensor_all(locals);
        let m = u.matmul(&self.mat).matmul(&u.adjoint());
        Self::new(m, self.dims.clone())
    }
}

/// A normalized state vector on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vec: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(vec: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, vec.len())?;
        if let Some(index) = vec.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let deviation = linalg::norm(&vec) - 1.0;
        if deviation.abs() > NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self { vec, dims })
    }

    /// Normalizes `vec` before validating.
    pub fn normalize(vec: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let n = linalg::norm(&vec);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize a zero vector".into()));
        }
        Self::new(vec.iter().map(|z| z / n).collect(), dims)
    }

    /// `|a⟩⊗|b⟩⊗…` from normalized-or-not factors.
    pub fn product(factors: &[Vec<C64>]) -> Result<Self> {
        let dims = factors.iter().map(Vec::len).collect();
        let vec = factors
            .iter()
            .map(|f| linalg::normalized(f))
            .reduce(|acc, f| linalg::kron_vec(&acc, &f))
            .ok_or_else(|| Error::InvalidParameter("empty product".into()))?;
        Self::normalize(vec, dims)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.vec
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        linalg::inner(&self.vec, &other.vec)
    }
}

fn check_dims(dims: &[usize], total: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidParameter(format!("invalid dims {dims:?}")));
    }
    let product: usize = dims.iter().product();
    if product != total {
        return Err(Error::DimensionMismatch {
            expected: product,
            found: total,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        })
    }
}

impl FromStr for BellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi+" | "phiplus" => Ok(BellKind::PhiPlus),
            "phi-" | "phiminus" => Ok(BellKind::PhiMinus),
            "psi+" | "psiplus" => Ok(BellKind::PsiPlus),
            "psi-" | "psiminus" => Ok(BellKind::PsiMinus),
            other => Err(Error::InvalidParameter(format!("unknown Bell state {other:?}"))),
        }
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn bell(kind: BellKind) -> PureState {
    let h = FRAC_1_SQRT_2;
    let vec = match kind {
        BellKind::PhiPlus => [h, 0.0, 0.0, h],
        BellKind::PhiMinus => [h, 0.0, 0.0, -h],
        BellKind::PsiPlus => [0.0, h, h, 0.0],
        BellKind::PsiMinus => [0.0, h, -h, 0.0],
    };
    PureState {
        vec: vec.into_iter().map(real).collect(),
        dims: vec![2, 2],
    }
}

/// `(1/√d) Σ_i |ii⟩`.
pub fn maximally_entangled(d: usize) -> Result<PureState> {
    if d < 1 {
        return Err(Error::InvalidParameter("local dimension must be positive".into()));
    }
    let amp = 1.0 / (d as f64).sqrt();
    let mut vec = vec![ZERO; d * d];
    for i in 0..d {
        vec[i * d + i] = real(amp);
    }
    Ok(PureState {
        vec,
        dims: vec![d, d],
    })
}

/// `P₊` with entries exactly `1/d` on the `(ii, jj)` positions.
pub fn max_entangled_projector(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = real(1.0 / d as f64);
        }
    }
    m
}

/// `(1 − p)·1/d² + p·P₊` on `d × d`.
pub fn isotropic(p: f64, d: usize) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} not in [0,1]")));
    }
    if d < 2 {
        return Err(Error::InvalidParameter(format!("local dimension {d} < 2")));
    }
    let n = d * d;
    let proj = max_entangled_projector(d);
    let mat = &ComplexMatrix::identity(n).scale((1.0 - p) / n as f64) + &proj.scale(p);
    DensityMatrix::new(mat, vec![d, d])
}

/// Two-qubit Werner state `(1 − p)·1/4 + p·|Φ+⟩⟨Φ+|`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    isotropic(p, 2)
}

pub fn ghz() -> PureState {
    let h = real(FRAC_1_SQRT_2);
    let mut vec = vec![ZERO; 8];
    vec[0] = h;
    vec[7] = h;
    PureState {
        vec,
        dims: vec![2, 2, 2],
    }
}

pub fn w_state() -> PureState {
    let t = real(1.0 / 3f64.sqrt());
    let mut vec = vec![ZERO; 8];
    // |100⟩, |010⟩, |001⟩
    vec[4] = t;
    vec[2] = t;
    vec[1] = t;
    PureState {
        vec,
        dims: vec![2, 2, 2],
    }
}

/// `(1 − p)/8·1 + p·P_W`.
pub fn noisy_w(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} not in [0,1]")));
    }
    let proj = ComplexMatrix::projector(w_state().amplitudes());
    let mat = &ComplexMatrix::identity(8).scale((1.0 - p) / 8.0) + &proj.scale(p);
    DensityMatrix::new(mat, vec![2, 2, 2])
}

/// Computational basis state `|index⟩`.
pub fn basis_state(dims: &[usize], index: usize) -> Result<PureState> {
    let n: usize = dims.iter().product();
    if index >= n {
        return Err(Error::InvalidParameter(format!(
            "basis index {index} out of range for dimension {n}"
        )));
    }
    let mut vec = vec![ZERO; n];
    vec[index] = ONE;
    PureState::new(vec, dims.to_vec())
}

/// Swap operator `S|ij⟩ = |ji⟩` on `n × n`.
pub fn swap_operator(n: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            s[(j * n + i, i * n + j)] = ONE;
        }
    }
    s
}

/// `alpha·P_sym/tr(P_sym) + (1 − alpha)·P_anti/tr(P_anti)` on `n × n`,
/// with `P_sym = (1 + S)/2` and `P_anti = (1 − S)/2`. `alpha` is the
/// weight of the symmetric part.
pub fn sym_antisym_family(n: usize, alpha: f64) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("local dimension {n} < 2")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} not in [0,1]")));
    }
    let nf = n as f64;
    let id = ComplexMatrix::identity(n * n);
    let swap = swap_operator(n);
    let p_sym = (&id + &swap).scale(0.5);
    let p_anti = (&id - &swap).scale(0.5);
    let sym_weight = alpha / (nf * (nf + 1.0) / 2.0);
    let anti_weight = (1.0 - alpha) / (nf * (nf - 1.0) / 2.0);
    let mat = &p_sym.scale(sym_weight) + &p_anti.scale(anti_weight);
    DensityMatrix::new(mat, vec![n, n])
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Vector of independent standard complex Gaussians.
pub fn gaussian_vector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Unitarily invariant random pure state drawn from `rng`.
pub fn random_pure_with(dims: &[usize], rng: &mut impl Rng) -> Result<PureState> {
    let n: usize = dims.iter().product();
    check_dims(dims, n)?;
    PureState::normalize(gaussian_vector(rng, n), dims.to_vec())
}

pub fn random_pure(dims: &[usize], seed: u64) -> Result<PureState> {
    random_pure_with(dims, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `GG†/tr(GG†)` with `G` a `dim × rank` complex Gaussian matrix.
pub fn random_density_with(dims: &[usize], rank: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let n: usize = dims.iter().product();
    check_dims(dims, n)?;
    if rank == 0 || rank > n {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} must lie in 1..={n}"
        )));
    }
    let g = ComplexMatrix::from_fn(n, rank, |_, _| gaussian(rng));
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / tr), dims.to_vec())
}

pub fn random_density(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(dims, rank, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Random product of independently drawn local pure states.
pub fn random_product_with(dims: &[usize], rng: &mut impl Rng) -> Result<PureState> {
    let factors: Vec<Vec<C64>> = dims.iter().map(|&d| gaussian_vector(rng, d)).collect();
    PureState::product(&factors)
}

/// Convex mixture of `terms` random product pure states with uniformly
/// drawn weights. Separable by construction.
pub fn random_separable_with(
    dims: &[usize],
    terms: usize,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    if terms == 0 {
        return Err(Error::InvalidParameter("need at least one product term".into()));
    }
    let n: usize = dims.iter().product();
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = ComplexMatrix::zeros(n, n);
    for w in weights {
        let psi = random_product_with(dims, rng)?;
        acc = &acc + &ComplexMatrix::projector(psi.amplitudes()).scale(w / total);
    }
    DensityMatrix::new(acc, dims.to_vec())
}

pub fn random_separable(dims: &[usize], terms: usize, seed: u64) -> Result<DensityMatrix> {
    random_separable_with(dims, terms, &mut ChaCha8Rng::seed_from_u64(seed))
}
