//! Entanglement measures in ebits.
//!
//! Pure states get the exact entropy of entanglement. For mixed states the
//! entanglement of formation and the relative entropy of entanglement are
//! infima over decompositions and over separable states; both are estimated
//! by local search with restarts. Every point the search visits is a
//! feasible decomposition or a feasible separable state, so the reported
//! value is always an upper bound on the true measure.

use std::f64::consts::LN_2;
use std::fmt;

use rand::Rng;

use crate::distill::{self, Distillability};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64, HERMITIAN_TOL, ZERO};
use crate::par::{self, SearchOptions};
use crate::separability;
use crate::states::{self, DensityMatrix, PureState};

/// Eigenvalues of `σ` are clamped to this floor before taking the log.
pub const SIGMA_FLOOR: f64 = 1e-12;
/// Restarts used by the estimators when the caller does not choose.
pub const DEFAULT_RESTARTS: usize = 8;

const RANK_CUTOFF: f64 = 1e-14;
const PROXY_ITERS: usize = 2000;
const ENTROPY_ITERS: usize = 200;
const RELENT_ITERS: usize = 400;
const STALL_TOL: f64 = 1e-14;
const LBFGS_MEMORY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    EntropyPure,
    FormationUpper,
    RelativeEntropyUpper,
}

impl MeasureKind {
    pub fn is_upper_bound(self) -> bool {
        !matches!(self, MeasureKind::EntropyPure)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureKind::EntropyPure => "entropy",
            MeasureKind::FormationUpper => "formation-upper",
            MeasureKind::RelativeEntropyUpper => "relent-upper",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptimizerStats {
    pub restarts: usize,
    /// Accepted steps summed over all restarts.
    pub iterations: usize,
    pub best_restart: usize,
    /// Best value seen after each restart, in restart order.
    pub best_so_far: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureEstimate {
    pub kind: MeasureKind,
    /// Ebits.
    pub value: f64,
    pub stats: OptimizerStats,
}

/// `E_D <= E <= E_C` sandwich for a bipartite state.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    /// Floor on distillable entanglement. Always 0 here; PPT states are
    /// undistillable and no positive rate is computed for NPT states.
    pub lower: f64,
    /// Formation estimate, standing in for `E_C` under the conjecture
    /// `E_F = E_C`.
    pub upper: f64,
    pub ppt_flag: bool,
    /// Single-copy distillability verdict, present for NPT input.
    pub distillability: Option<Distillability>,
}

impl BoundsReport {
    pub const UPPER_LABEL: &'static str = "E_F upper estimate (E_C only if E_F = E_C, conjectured)";
}

/// `−Σ λ log₂ λ` over a spectrum, with `0·log 0 = 0`. Negative round-off
/// eigenvalues are treated as zero.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.spectrum())
}

/// Entropy of either reduced density matrix of a bipartite pure state.
pub fn pure_entanglement(psi: &PureState) -> Result<MeasureEstimate> {
    let (da, db) = bipartite(psi.dims())?;
    let rho_a = reduced_a(psi.amplitudes(), da, db);
    let spectrum = linalg::hermitian_eig(&rho_a, HERMITIAN_TOL)?.eigenvalues;
    Ok(MeasureEstimate {
        kind: MeasureKind::EntropyPure,
        value: entropy_of_spectrum(&spectrum).max(0.0),
        stats: OptimizerStats::default(),
    })
}

fn bipartite(dims: &[usize]) -> Result<(usize, usize)> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::NotBipartite(dims.to_vec())),
    }
}

/// `M M†` with `M` the `da × db` reshape of `psi`. Not normalized.
fn reduced_a(psi: &[C64], da: usize, db: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(da, da, |i, j| {
        (0..db).map(|k| psi[i * db + k] * psi[j * db + k].conj()).sum()
    })
}

/// `(R ⊗ 1)·psi` for an operator `R` on the first factor.
fn apply_left(r: &ComplexMatrix, psi: &[C64], da: usize, db: usize) -> Vec<C64> {
    let mut out = vec![ZERO; da * db];
    for i in 0..da {
        for j in 0..da {
            let rij = r[(i, j)];
            if rij == ZERO {
                continue;
            }
            for k in 0..db {
                out[i * db + k] += rij * psi[j * db + k];
            }
        }
    }
    out
}

fn real_inner(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

fn run_restarts<F>(opts: &SearchOptions, kind: MeasureKind, run: F) -> MeasureEstimate
where
    F: Fn(usize) -> (f64, usize) + Sync + Send,
{
    let restarts = opts.restarts.max(1);
    let runs = par::map_indexed(restarts, opts.execution, run);
    let best_restart = par::argmin_by_key(&runs, |r| r.0).expect("at least one restart");
    let mut best = f64::INFINITY;
    let best_so_far = runs
        .iter()
        .map(|r| {
            best = best.min(r.0);
            best
        })
        .collect();
    MeasureEstimate {
        kind,
        value: runs[best_restart].0.max(0.0),
        stats: OptimizerStats {
            restarts,
            iterations: runs.iter().map(|r| r.1).sum(),
            best_restart,
            best_so_far,
        },
    }
}

// ---------------------------------------------------------------------------
// Entanglement of formation

/// Decompositions of `ρ = Σ_i w_i w_i†` (with `w_i = √λ_i v_i`) of the form
/// `ψ̃_j = Σ_i U_ji w_i`, where `U` is an `m × r` isometry.
struct Formation {
    da: usize,
    db: usize,
    m: usize,
    w: Vec<Vec<C64>>,
}

#[derive(Clone, Copy, PartialEq)]
enum FormationObjective {
    /// `Σ_j (p_j − tr ρ̃_j²/p_j)`: linear entropy, smooth at product states.
    Linear,
    Entropy,
}

impl Formation {
    fn r(&self) -> usize {
        self.w.len()
    }

    /// Members as subnormalized vectors; `u` is row-major `m × r`.
    fn members(&self, u: &[C64]) -> Vec<Vec<C64>> {
        let r = self.r();
        (0..self.m)
            .map(|j| {
                let mut psi = vec![ZERO; self.da * self.db];
                for (i, wi) in self.w.iter().enumerate() {
                    let c = u[j * r + i];
                    for (o, x) in psi.iter_mut().zip(wi) {
                        *o += c * x;
                    }
                }
                psi
            })
            .collect()
    }

    /// Average reduced entropy in ebits.
    fn entropy(&self, u: &[C64]) -> f64 {
        self.members(u)
            .iter()
            .map(|psi| {
                let p = linalg::norm(psi).powi(2);
                if p < 1e-300 {
                    return 0.0;
                }
                let rho_a = reduced_a(psi, self.da, self.db).scale(1.0 / p);
                let spec = linalg::hermitian_eig(&rho_a, HERMITIAN_TOL)
                    .map(|e| e.eigenvalues)
                    .unwrap_or_default();
                p * entropy_of_spectrum(&spec)
            })
            .sum()
    }

    /// Objective value and Euclidean gradient with respect to `U*`.
    fn value_and_gradient(&self, u: &[C64], objective: FormationObjective) -> (f64, Vec<C64>) {
        let r = self.r();
        let mut value = 0.0;
        let mut grad = vec![ZERO; self.m * r];
        for (j, psi) in self.members(u).iter().enumerate() {
            let p = linalg::norm(psi).powi(2);
            if p < 1e-300 {
                continue;
            }
            let rho_a = reduced_a(psi, self.da, self.db);
            let g = match objective {
                FormationObjective::Linear => {
                    let purity = rho_a.trace_product(&rho_a).re;
                    value += p - purity / p;
                    let rpsi = apply_left(&rho_a, psi, self.da, self.db);
                    psi.iter()
                        .zip(&rpsi)
                        .map(|(x, y)| x * (1.0 + purity / (p * p)) - y * (2.0 / p))
                        .collect::<Vec<_>>()
                }
                FormationObjective::Entropy => {
                    let Ok(eig) = linalg::hermitian_eig(&rho_a.scale(1.0 / p), HERMITIAN_TOL) else {
                        continue;
                    };
                    value += p * entropy_of_spectrum(&eig.eigenvalues);
                    let log = eig.map_spectrum(|l| l.max(1e-300).log2());
                    apply_left(&log, psi, self.da, self.db)
                        .into_iter()
                        .map(|x| -x)
                        .collect()
                }
            };
            for (i, wi) in self.w.iter().enumerate() {
                grad[j * r + i] = linalg::inner(wi, &g);
            }
        }
        (value, grad)
    }

    /// Orthonormalizes the columns of the row-major `m × r` matrix.
    fn retract(&self, u: &[C64]) -> Vec<C64> {
        let r = self.r();
        let mut cols: Vec<Vec<C64>> = (0..r).map(|i| (0..self.m).map(|j| u[j * r + i]).collect()).collect();
        linalg::gram_schmidt(&mut cols);
        let mut out = vec![ZERO; self.m * r];
        for (i, col) in cols.iter().enumerate() {
            for (j, x) in col.iter().enumerate() {
                out[j * r + i] = *x;
            }
        }
        out
    }

    /// Projection of a Euclidean gradient onto the tangent space at `u`:
    /// `E − U·sym(U†E)`.
    fn tangent(&self, u: &[C64], e: &[C64]) -> Vec<C64> {
        let r = self.r();
        let mut ue = vec![ZERO; r * r];
        for a in 0..r {
            for b in 0..r {
                ue[a * r + b] = (0..self.m).map(|j| u[j * r + a].conj() * e[j * r + b]).sum();
            }
        }
        let mut out = e.to_vec();
        for j in 0..self.m {
            for b in 0..r {
                let s: C64 = (0..r)
                    .map(|a| u[j * r + a] * (ue[a * r + b] + ue[b * r + a].conj()) * 0.5)
                    .sum();
                out[j * r + b] -= s;
            }
        }
        out
    }

    fn random_isometry(&self, rng: &mut impl Rng) -> Vec<C64> {
        self.retract(&states::gaussian_vector(rng, self.m * self.r()))
    }

    /// Eigen-ensemble padded with empty members.
    fn eigen_isometry(&self) -> Vec<C64> {
        let r = self.r();
        let mut u = vec![ZERO; self.m * r];
        for i in 0..r {
            u[i * r + i] = linalg::ONE;
        }
        u
    }

    /// Riemannian descent with Barzilai–Borwein trial steps and Armijo
    /// backtracking. Returns the final point, the lowest entropy seen at
    /// any accepted point and the number of accepted steps.
    fn descend(&self, mut u: Vec<C64>, objective: FormationObjective, max_iters: usize) -> (Vec<C64>, f64, usize) {
        let mut best = self.entropy(&u);
        let (mut f, e) = self.value_and_gradient(&u, objective);
        let mut xi = self.tangent(&u, &e);
        let mut step = 1.0;
        let mut accepted = 0;
        for _ in 0..max_iters {
            let g2 = real_inner(&xi, &xi);
            if g2 < 1e-28 {
                break;
            }
            let mut t = step;
            let mut moved = None;
            for _ in 0..40 {
                let trial: Vec<C64> = u.iter().zip(&xi).map(|(a, b)| a - b * t).collect();
                let trial = self.retract(&trial);
                let (ft, et) = self.value_and_gradient(&trial, objective);
                if ft <= f - 1e-4 * t * g2 {
                    moved = Some((trial, ft, et));
                    break;
                }
                t *= 0.5;
            }
            let Some((next, fnext, enext)) = moved else { break };
            let xi_next = self.tangent(&next, &enext);
            let s: Vec<C64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
            let y: Vec<C64> = xi_next.iter().zip(&xi).map(|(a, b)| a - b).collect();
            let sy = real_inner(&s, &y);
            step = if sy > 1e-300 { (real_inner(&s, &s) / sy).clamp(1e-6, 1e3) } else { t * 2.0 };
            let improvement = f - fnext;
            u = next;
            f = fnext;
            xi = xi_next;
            accepted += 1;
            best = best.min(match objective {
                FormationObjective::Entropy => f,
                FormationObjective::Linear => self.entropy(&u),
            });
            if improvement < STALL_TOL * f.abs().max(1e-3) {
                break;
            }
        }
        (u, best, accepted)
    }
}

/// Upper estimate of `E_F(ρ) = inf Σ p_j S(ρ_A,j)` over decompositions into
/// `ensemble_size` members (default: the total dimension).
///
/// Each restart first minimizes the linear entropy of the members, which is
/// smooth where the von Neumann entropy is not, then refines on the entropy
/// itself. The lowest entropy seen anywhere along the way is kept.
pub fn entanglement_of_formation(
    rho: &DensityMatrix,
    ensemble_size: Option<usize>,
    opts: &SearchOptions,
) -> Result<MeasureEstimate> {
    let (da, db) = bipartite(rho.dims())?;
    let eig = linalg::hermitian_eig(rho.matrix(), HERMITIAN_TOL)?;
    let w: Vec<Vec<C64>> = (0..eig.eigenvalues.len())
        .rev()
        .filter(|&i| eig.eigenvalues[i] > RANK_CUTOFF)
        .map(|i| {
            let s = eig.eigenvalues[i].sqrt();
            eig.eigenvectors.column(i).into_iter().map(|x| x * s).collect()
        })
        .collect();
    let rank = w.len();
    let m = ensemble_size.unwrap_or(da * db);
    if m < rank {
        return Err(Error::EnsembleTooSmall { size: m, rank });
    }
    let problem = Formation { da, db, m, w };
    if rank == 1 {
        // every decomposition of a pure state is the state itself
        let value = problem.entropy(&problem.eigen_isometry());
        return Ok(run_restarts(&SearchOptions { restarts: 1, ..*opts }, MeasureKind::FormationUpper, |_| (value, 0)));
    }
    Ok(run_restarts(opts, MeasureKind::FormationUpper, |i| {
        let start = if i == 0 {
            problem.eigen_isometry()
        } else {
            problem.random_isometry(&mut par::restart_rng(opts.seed, i))
        };
        let (u, best1, n1) = problem.descend(start, FormationObjective::Linear, PROXY_ITERS);
        let (_, best2, n2) = problem.descend(u, FormationObjective::Entropy, ENTROPY_ITERS);
        (best1.min(best2), n1 + n2)
    }))
}

// ---------------------------------------------------------------------------
// Relative entropy of entanglement

/// `σ = Σ_k q_k |a_k b_k⟩⟨a_k b_k|` with `q = softmax(θ)` and `a_k`, `b_k`
/// normalized from free complex vectors. Parameters are packed as
/// `[θ_1..θ_K, (Re a_1, Im a_1, Re b_1, Im b_1), ...]`.
struct RelativeEntropy<'a> {
    rho: &'a ComplexMatrix,
    da: usize,
    db: usize,
    terms: usize,
    /// `tr ρ log₂ ρ`.
    neg_entropy: f64,
}

struct Unpacked {
    q: Vec<f64>,
    a: Vec<Vec<C64>>,
    b: Vec<Vec<C64>>,
    a_norm: Vec<f64>,
    b_norm: Vec<f64>,
}

impl RelativeEntropy<'_> {
    fn dim(&self) -> usize {
        self.terms * (1 + 2 * (self.da + self.db))
    }

    fn unpack(&self, x: &[f64]) -> Unpacked {
        let k = self.terms;
        let max = x[..k].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = x[..k].iter().map(|t| (t - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        let q = exp.iter().map(|e| e / total).collect();
        let stride = 2 * (self.da + self.db);
        let mut a = Vec::with_capacity(k);
        let mut b = Vec::with_capacity(k);
        let mut a_norm = Vec::with_capacity(k);
        let mut b_norm = Vec::with_capacity(k);
        for t in 0..k {
            let base = k + t * stride;
            let raw_a: Vec<C64> = (0..self.da).map(|i| C64::new(x[base + 2 * i], x[base + 2 * i + 1])).collect();
            let off = base + 2 * self.da;
            let raw_b: Vec<C64> = (0..self.db).map(|i| C64::new(x[off + 2 * i], x[off + 2 * i + 1])).collect();
            let na = linalg::norm(&raw_a).max(1e-150);
            let nb = linalg::norm(&raw_b).max(1e-150);
            a.push(raw_a.iter().map(|z| z / na).collect());
            b.push(raw_b.iter().map(|z| z / nb).collect());
            a_norm.push(na);
            b_norm.push(nb);
        }
        Unpacked { q, a, b, a_norm, b_norm }
    }

    fn sigma(&self, u: &Unpacked) -> ComplexMatrix {
        let n = self.da * self.db;
        let mut s = ComplexMatrix::zeros(n, n);
        for t in 0..self.terms {
            let phi = linalg::kron_vec(&u.a[t], &u.b[t]);
            for i in 0..n {
                let pi = phi[i] * u.q[t];
                for j in 0..n {
                    s[(i, j)] += pi * phi[j].conj();
                }
            }
        }
        s
    }

    /// Clamped, renormalized spectrum of `σ` with its eigenvectors.
    fn clamped_eig(&self, sigma: &ComplexMatrix) -> Option<(Vec<f64>, ComplexMatrix)> {
        let eig = linalg::hermitian_eig(sigma, HERMITIAN_TOL).ok()?;
        let clamped: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(SIGMA_FLOOR)).collect();
        let total: f64 = clamped.iter().sum();
        Some((clamped.iter().map(|l| l / total).collect(), eig.eigenvectors))
    }

    fn value(&self, x: &[f64]) -> f64 {
        let u = self.unpack(x);
        let Some((s, v)) = self.clamped_eig(&self.sigma(&u)) else {
            return f64::INFINITY;
        };
        let rho_v = v.adjoint().matmul(self.rho).matmul(&v);
        let cross: f64 = s.iter().enumerate().map(|(i, l)| rho_v[(i, i)].re * l.log2()).sum();
        self.neg_entropy - cross
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let u = self.unpack(x);
        let n = self.da * self.db;
        let Some((s, v)) = self.clamped_eig(&self.sigma(&u)) else {
            return (f64::INFINITY, vec![0.0; x.len()]);
        };
        let rho_v = v.adjoint().matmul(self.rho).matmul(&v);
        let cross: f64 = s.iter().enumerate().map(|(i, l)| rho_v[(i, i)].re * l.log2()).sum();
        // Fréchet derivative of log₂ at σ in its eigenbasis
        let divided = |i: usize, j: usize| {
            if (s[i] - s[j]).abs() <= 1e-12 * s[i].max(s[j]) {
                1.0 / (0.5 * (s[i] + s[j]) * LN_2)
            } else {
                (s[i].log2() - s[j].log2()) / (s[i] - s[j])
            }
        };
        let inner = ComplexMatrix::from_fn(n, n, |i, j| -rho_v[(i, j)] * divided(i, j));
        let gamma = v.matmul(&inner).matmul(&v.adjoint());

        let k = self.terms;
        let stride = 2 * (self.da + self.db);
        let mut grad = vec![0.0; x.len()];
        let mut c = vec![0.0; k];
        #[allow(clippy::needless_range_loop)]
        for t in 0..k {
            let phi = linalg::kron_vec(&u.a[t], &u.b[t]);
            let gphi = gamma.apply(&phi);
            c[t] = linalg::inner(&phi, &gphi).re;
            // Γ_a â and Γ_b b̂ by contracting Γφ with the other factor
            let mut ga = vec![ZERO; self.da];
            let mut gb = vec![ZERO; self.db];
            for i in 0..self.da {
                for j in 0..self.db {
                    let z = gphi[i * self.db + j];
                    ga[i] += u.b[t][j].conj() * z;
                    gb[j] += u.a[t][i].conj() * z;
                }
            }
            let scale_a = 2.0 * u.q[t] / u.a_norm[t];
            let scale_b = 2.0 * u.q[t] / u.b_norm[t];
            let base = k + t * stride;
            for i in 0..self.da {
                let g = (ga[i] - u.a[t][i] * c[t]) * scale_a;
                grad[base + 2 * i] = g.re;
                grad[base + 2 * i + 1] = g.im;
            }
            let off = base + 2 * self.da;
            for j in 0..self.db {
                let g = (gb[j] - u.b[t][j] * c[t]) * scale_b;
                grad[off + 2 * j] = g.re;
                grad[off + 2 * j + 1] = g.im;
            }
        }
        let mean: f64 = u.q.iter().zip(&c).map(|(q, c)| q * c).sum();
        for t in 0..k {
            grad[t] = u.q[t] * (c[t] - mean);
        }
        (self.neg_entropy - cross, grad)
    }

    fn random_start(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut x: Vec<f64> = states::gaussian_vector(rng, self.dim()).iter().map(|z| z.re).collect();
        x[..self.terms].iter_mut().for_each(|t| *t *= 0.1);
        x
    }
}

/// Limited-memory BFGS with Armijo backtracking. Returns the best point's
/// value and the number of accepted steps.
fn lbfgs(problem: &RelativeEntropy<'_>, mut x: Vec<f64>, max_iters: usize) -> (f64, usize) {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (mut f, mut g) = problem.value_and_gradient(&x);
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut accepted = 0;
    for _ in 0..max_iters {
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.last() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        if -slope < 1e-24 {
            break;
        }
        let mut t = 1.0;
        let mut moved = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let ft = problem.value(&trial);
            if ft <= f + 1e-4 * t * slope {
                moved = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((next, fnext)) = moved else { break };
        let (_, gnext) = problem.value_and_gradient(&next);
        let s: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnext.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-20 {
            if history.len() == LBFGS_MEMORY {
                history.remove(0);
            }
            history.push((s, y, 1.0 / sy));
        }
        let improvement = f - fnext;
        x = next;
        f = fnext;
        g = gnext;
        accepted += 1;
        if improvement < STALL_TOL * f.abs().max(1e-3) {
            break;
        }
    }
    (f, accepted)
}

/// Upper estimate of `E_R(ρ) = min_σ tr ρ(log₂ ρ − log₂ σ)` with `σ`
/// ranging over mixtures of `mixture_size` product states (default: twice
/// the total dimension).
pub fn relative_entropy_estimate(
    rho: &DensityMatrix,
    mixture_size: Option<usize>,
    opts: &SearchOptions,
) -> Result<MeasureEstimate> {
    let (da, db) = bipartite(rho.dims())?;
    let terms = mixture_size.unwrap_or(2 * da * db);
    if terms == 0 {
        return Err(Error::InvalidParameter("mixture size must be positive".into()));
    }
    let problem = RelativeEntropy {
        rho: rho.matrix(),
        da,
        db,
        terms,
        neg_entropy: -von_neumann_entropy(rho),
    };
    Ok(run_restarts(opts, MeasureKind::RelativeEntropyUpper, |i| {
        let start = problem.random_start(&mut par::restart_rng(opts.seed, i));
        lbfgs(&problem, start, RELENT_ITERS)
    }))
}

/// Distillable-entanglement floor, PPT flag and formation upper estimate.
pub fn bounds_report(rho: &DensityMatrix, opts: &SearchOptions) -> Result<BoundsReport> {
    let ppt = separability::ppt_criterion(rho)?;
    let distillability = if ppt.satisfied {
        None
    } else {
        Some(distill::distillability_test(rho, 1, opts)?.verdict)
    };
    let upper = entanglement_of_formation(rho, None, opts)?.value;
    Ok(BoundsReport {
        lower: 0.0,
        upper,
        ppt_flag: ppt.satisfied,
        distillability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::BellKind;

    fn opts() -> SearchOptions {
        SearchOptions::new(DEFAULT_RESTARTS, 11)
    }

    #[test]
    fn entropy_examples() {
        let bell = states::bell(BellKind::PsiMinus).to_density();
        assert!(von_neumann_entropy(&bell).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(&[2, 2]).unwrap();
        assert!((von_neumann_entropy(&mixed) - 2.0).abs() < 1e-12);
        let w = states::werner(0.5).unwrap();
        let expected = -(0.625f64 * 0.625f64.log2()) - 3.0 * 0.125 * 0.125f64.log2();
        assert!((von_neumann_entropy(&w) - expected).abs() < 1e-12);
    }

    #[test]
    fn pure_entanglement_examples() {
        let bell = pure_entanglement(&states::bell(BellKind::PhiPlus)).unwrap();
        assert!((bell.value - 1.0).abs() < 1e-9);
        assert_eq!(bell.kind, MeasureKind::EntropyPure);
        let product = pure_entanglement(&states::basis_state(&[2, 2], 0).unwrap()).unwrap();
        assert!(product.value.abs() < 1e-12);
        let psi = PureState::new(
            vec![C64::new(0.9f64.sqrt(), 0.0), ZERO, ZERO, C64::new(0.1f64.sqrt(), 0.0)],
            vec![2, 2],
        )
        .unwrap();
        let h = -0.9 * 0.9f64.log2() - 0.1 * 0.1f64.log2();
        assert!((pure_entanglement(&psi).unwrap().value - h).abs() < 1e-12);
        for d in 2..=4 {
            let e = pure_entanglement(&states::maximally_entangled(d).unwrap()).unwrap();
            assert!((e.value - (d as f64).log2()).abs() < 1e-9);
        }
        assert!(pure_entanglement(&states::ghz()).is_err());
    }

    #[test]
    fn both_reduced_entropies_agree() {
        for seed in 0..10 {
            let psi = states::random_pure(&[3, 4], seed).unwrap();
            let rho = psi.to_density();
            let a = von_neumann_entropy(&rho.reduced(0).unwrap());
            let b = von_neumann_entropy(&rho.reduced(1).unwrap());
            assert!((a - b).abs() < 1e-10);
            assert!((pure_entanglement(&psi).unwrap().value - a).abs() < 1e-10);
        }
    }

    #[test]
    fn formation_gradient_matches_finite_differences() {
        let rho = states::random_density(&[2, 3], 3, 5).unwrap();
        let eig = linalg::hermitian_eig(rho.matrix(), HERMITIAN_TOL).unwrap();
        let w = (3..6)
            .map(|i| {
                let s = eig.eigenvalues[i].sqrt();
                eig.eigenvectors.column(i).into_iter().map(|x| x * s).collect()
            })
            .collect();
        let problem = Formation { da: 2, db: 3, m: 5, w };
        let mut rng = par::restart_rng(3, 0);
        let u = problem.random_isometry(&mut rng);
        for objective in [FormationObjective::Linear, FormationObjective::Entropy] {
            let (_, grad) = problem.value_and_gradient(&u, objective);
            let h = 1e-6;
            for idx in [0, 4, 9, 14] {
                for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    let mut up = u.clone();
                    up[idx] += dir * h;
                    let mut down = u.clone();
                    down[idx] -= dir * h;
                    let fd = (problem.value_and_gradient(&up, objective).0
                        - problem.value_and_gradient(&down, objective).0)
                        / (2.0 * h);
                    let analytic = 2.0 * (grad[idx].conj() * dir).re;
                    assert!((fd - analytic).abs() < 1e-5, "{fd} vs {analytic}");
                }
            }
        }
    }

    #[test]
    fn relative_entropy_gradient_matches_finite_differences() {
        let rho = states::random_density(&[2, 2], 4, 9).unwrap();
        let problem = RelativeEntropy {
            rho: rho.matrix(),
            da: 2,
            db: 2,
            terms: 6,
            neg_entropy: -von_neumann_entropy(&rho),
        };
        let x = problem.random_start(&mut par::restart_rng(1, 0));
        let (f, grad) = problem.value_and_gradient(&x);
        assert!((f - problem.value(&x)).abs() < 1e-12);
        let h = 1e-6;
        for idx in 0..x.len() {
            let mut up = x.clone();
            up[idx] += h;
            let mut down = x.clone();
            down[idx] -= h;
            let fd = (problem.value(&up) - problem.value(&down)) / (2.0 * h);
            assert!((fd - grad[idx]).abs() < 1e-5, "index {idx}: {fd} vs {}", grad[idx]);
        }
    }

    #[test]
    fn formation_of_pure_states_is_exact() {
        let bell = states::bell(BellKind::PhiPlus).to_density();
        let e = entanglement_of_formation(&bell, None, &opts()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-9);
        assert_eq!(e.kind, MeasureKind::FormationUpper);
        let psi = states::random_pure(&[3, 3], 2).unwrap();
        let e = entanglement_of_formation(&psi.to_density(), Some(4), &opts()).unwrap();
        assert!((e.value - pure_entanglement(&psi).unwrap().value).abs() < 1e-6);
    }

    #[test]
    fn formation_finds_product_decompositions() {
        let a = PureState::product(&[states::basis_state(&[2], 0).unwrap().amplitudes().to_vec(), states::basis_state(&[2], 1).unwrap().amplitudes().to_vec()]).unwrap();
        let plus = vec![C64::new(0.5f64.sqrt(), 0.0); 2];
        let b = PureState::product(&[plus.clone(), plus]).unwrap();
        let rho = a.to_density().mix(&b.to_density(), 0.3).unwrap();
        let e = entanglement_of_formation(&rho, None, &opts()).unwrap();
        assert!(e.value <= 1e-4, "{}", e.value);
    }

    #[test]
    fn formation_rejects_small_ensembles() {
        let rho = DensityMatrix::maximally_mixed(&[2, 2]).unwrap();
        assert!(matches!(
            entanglement_of_formation(&rho, Some(3), &opts()),
            Err(Error::EnsembleTooSmall { size: 3, rank: 4 })
        ));
    }

    #[test]
    fn relative_entropy_examples() {
        let bell = states::bell(BellKind::PhiPlus).to_density();
        let e = relative_entropy_estimate(&bell, None, &opts()).unwrap();
        assert!((0.95..=1.10).contains(&e.value), "{}", e.value);
        let mixed = DensityMatrix::maximally_mixed(&[2, 3]).unwrap();
        assert!(relative_entropy_estimate(&mixed, None, &opts()).unwrap().value <= 1e-3);
    }

    #[test]
    fn more_restarts_never_hurt() {
        let rho = states::random_density(&[2, 2], 3, 4).unwrap();
        let few = entanglement_of_formation(&rho, None, &SearchOptions::new(2, 8)).unwrap();
        let many = entanglement_of_formation(&rho, None, &SearchOptions::new(8, 8)).unwrap();
        assert!(many.value <= few.value + 1e-9);
        assert!(many.stats.best_so_far.windows(2).all(|w| w[1] <= w[0]));
        let few = relative_entropy_estimate(&rho, None, &SearchOptions::new(2, 8)).unwrap();
        let many = relative_entropy_estimate(&rho, None, &SearchOptions::new(8, 8)).unwrap();
        assert!(many.value <= few.value + 1e-9);
    }

    #[test]
    fn bounds_report_examples() {
        let o = SearchOptions::new(4, 1);
        let bell = states::bell(BellKind::PhiPlus).to_density();
        let r = bounds_report(&bell, &o).unwrap();
        assert!(!r.ppt_flag && r.lower == 0.0 && (r.upper - 1.0).abs() < 1e-3);
        assert_eq!(r.distillability, Some(Distillability::Distillable(1)));
        let mixed = DensityMatrix::maximally_mixed(&[2, 2]).unwrap();
        let r = bounds_report(&mixed, &o).unwrap();
        assert!(r.ppt_flag && r.lower == 0.0 && r.upper <= 1e-3);
        assert_eq!(r.distillability, None);
    }
}
