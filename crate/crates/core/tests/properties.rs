//! Cross-module properties checked on many sampled inputs.

use entangle_core::distill::{self, Distillability};
use entangle_core::linalg::{self, ComplexMatrix, C64};
use entangle_core::par::restart_rng;
use entangle_core::separability::{self, Status};
use entangle_core::states::{self, BellKind, DensityMatrix, PureState};
use entangle_core::witness::{self, MapKind};
use entangle_core::SearchOptions;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = restart_rng(seed, 3);
    let mut cols: Vec<Vec<C64>> = (0..d).map(|_| states::gaussian_vector(&mut rng, d)).collect();
    linalg::gram_schmidt(&mut cols);
    ComplexMatrix::from_columns(&cols)
}

#[test]
fn npt_witnesses_are_non_negative_on_products() {
    let mut rng = restart_rng(2024, 0);
    let mut built = 0;
    for (k, dims) in [[2usize, 2], [2, 3], [3, 3]].iter().enumerate() {
        for seed in 0..20u64 {
            let rho = states::random_density(dims, 2, 100 * k as u64 + seed).unwrap();
            let Ok(w) = witness::construct_from_npt(&rho) else { continue };
            built += 1;
            for _ in 0..10_000 / 20 {
                let psi = states::random_product_with(dims, &mut rng).unwrap();
                assert!(w.expectation(psi.amplitudes()) >= 0.0 - 1e-15);
            }
        }
    }
    assert!(built > 30);
}

#[test]
fn shifting_keeps_detection() {
    let opts = SearchOptions::new(12, 5);
    for seed in 0..8u64 {
        let rho = states::random_density(&[2, 3], 2, 300 + seed).unwrap();
        let Ok(w) = witness::construct_from_npt(&rho) else { continue };
        let before = witness::evaluate(&w, &rho).unwrap();
        let shifted = witness::shift_optimize(&w, &opts).unwrap();
        assert!(shifted.post_min >= -1e-8);
        assert!(shifted.shift >= -1e-12);
        let after = witness::evaluate(&shifted.witness, &rho).unwrap();
        assert!(before < 0.0 && after < 0.0);
        assert!(after <= before + 1e-12);
    }
}

/// For `W = S/2` (the transpose map's Choi operator on 2×2),
/// `tr(Wρ) = tr(P₊ ρ^{T_B}) = ⟨Φ+|ρ^{T_B}|Φ+⟩`, because `S^{T_B} = 2P₊`.
#[test]
fn transpose_choi_witness_identity() {
    let w = witness::jamiolkowski(MapKind::Transpose, 2).unwrap();
    let phi = states::bell(BellKind::PhiPlus);
    let swap = states::swap_operator(2);
    for seed in 0..100u64 {
        let rho = states::random_density(&[2, 2], 1 + seed as usize % 4, 900 + seed).unwrap();
        let value = witness::evaluate(&w, &rho).unwrap();
        let pt = linalg::partial_transpose(rho.matrix(), &[2, 2], 1).unwrap();
        let via_pt = pt.expectation(phi.amplitudes()).re;
        let via_swap = swap.trace_product(rho.matrix()).re / 2.0;
        assert!((value - via_pt).abs() < 1e-12);
        assert!((value - via_swap).abs() < 1e-12);
    }
}

#[test]
fn tripartite_witness_bounds_on_samples() {
    let ww = witness::w_witness();
    let wg = witness::ghz_witness();
    let mut rng = restart_rng(77, 1);
    let (mut min_b, mut min_w) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..10_000 {
        min_b = min_b.min(ww.expectation(witness::sample_biseparable(&mut rng).amplitudes()));
        min_w = min_w.min(wg.expectation(witness::sample_w_class(&mut rng).amplitudes()));
    }
    assert!(min_b >= -1e-8, "{min_b}");
    assert!(min_w >= -1e-8, "{min_w}");
}

#[test]
fn distillability_is_local_unitary_invariant() {
    let opts = SearchOptions::new(20, 13);
    let cases: Vec<DensityMatrix> = vec![
        states::random_density(&[2, 2], 2, 1).unwrap(),
        states::random_density(&[2, 3], 3, 2).unwrap(),
        states::sym_antisym_family(3, 0.2).unwrap(),
        states::isotropic(0.6, 3).unwrap(),
        states::random_density(&[3, 3], 2, 3).unwrap(),
    ];
    for (k, rho) in cases.iter().enumerate() {
        let (da, db) = rho.bipartite_dims().unwrap();
        let u = random_unitary(da, 40 + k as u64);
        let v = random_unitary(db, 50 + k as u64);
        let moved = rho.conjugate_local(&[u, v]).unwrap();
        let a = distill::distillability_test(rho, 1, &opts).unwrap();
        let b = distill::distillability_test(&moved, 1, &opts).unwrap();
        assert_eq!(a.verdict, b.verdict, "case {k}");
        assert!((a.value - b.value).abs() < 1e-8, "case {k}: {} vs {}", a.value, b.value);
    }
}

#[test]
fn two_qubit_npt_states_are_distillable_and_ppt_ones_are_not_flagged() {
    let opts = SearchOptions::new(10, 1);
    for seed in 0..40u64 {
        let rho = states::random_density(&[2, 2], 1 + seed as usize % 4, 4000 + seed).unwrap();
        let ppt = separability::ppt_criterion(&rho).unwrap();
        let cert = distill::distillability_test(&rho, 1, &opts).unwrap();
        if ppt.satisfied {
            assert_eq!(cert.verdict, Distillability::Inconclusive);
        } else {
            assert_eq!(cert.verdict, Distillability::Distillable(1));
            assert!((cert.value - ppt.margin).abs() < 1e-9);
        }
    }
}

#[test]
fn pair_reordering_matches_index_arithmetic() {
    // (A1, B1, A2, B2) -> (A1, A2, B1, B2): bit pattern a1 b1 a2 b2 -> a1 a2 b1 b2
    for idx in 0..16usize {
        let mut v = vec![C64::new(0.0, 0.0); 16];
        v[idx] = C64::new(1.0, 0.0);
        let moved = linalg::permute_vector(&v, &[2, 2, 2, 2], &[0, 2, 1, 3]).unwrap();
        let (a1, b1, a2, b2) = (idx >> 3 & 1, idx >> 2 & 1, idx >> 1 & 1, idx & 1);
        let expected = a1 << 3 | a2 << 2 | b1 << 1 | b2;
        assert_eq!(moved.iter().position(|z| z.re == 1.0), Some(expected));
    }
}

/// Shot-by-shot recurrence on a general two-qubit input: each pair is drawn
/// from the eigen-ensemble of ρ, both CNOTs are applied to the 16 amplitudes
/// by index arithmetic and the targets are measured. Returns mean kept
/// fidelity, its standard error, success fraction and its standard error.
fn sampled_round(rho: &DensityMatrix, shots: usize, seed: u64) -> (f64, f64, f64, f64) {
    let eig = linalg::hermitian_eig(rho.matrix(), 1e-12).unwrap();
    let weights: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let vectors: Vec<Vec<C64>> = (0..4).map(|k| eig.eigenvectors.column(k)).collect();
    let total: f64 = weights.iter().sum();
    let mut rng = StdRng::seed_from_u64(seed);
    let pick = |rng: &mut StdRng, w: &[f64], total: f64| {
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for (k, x) in w.iter().enumerate() {
            acc += x;
            if u < acc {
                return k;
            }
        }
        w.len() - 1
    };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (mut kept, mut sum, mut sum_sq) = (0usize, 0.0, 0.0);
    for _ in 0..shots {
        let p1 = &vectors[pick(&mut rng, &weights, total)];
        let p2 = &vectors[pick(&mut rng, &weights, total)];
        let mut out = [C64::new(0.0, 0.0); 16];
        for (i, x) in p1.iter().enumerate() {
            for (j, y) in p2.iter().enumerate() {
                let (a1, b1, a2, b2) = (i >> 1, i & 1, j >> 1, j & 1);
                out[i << 2 | (a2 ^ a1) << 1 | (b2 ^ b1)] = x * y;
            }
        }
        let mut probs = [0.0; 4];
        for (idx, z) in out.iter().enumerate() {
            probs[idx & 3] += z.norm_sqr();
        }
        let ptotal: f64 = probs.iter().sum();
        let outcome = pick(&mut rng, &probs, ptotal);
        if outcome != 0 && outcome != 3 {
            continue;
        }
        let norm = probs[outcome].sqrt();
        let overlap = (out[outcome] + out[12 | outcome]) * (h / norm);
        let fid = overlap.norm_sqr();
        kept += 1;
        sum += fid;
        sum_sq += fid * fid;
    }
    let n = kept as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    let p = n / shots as f64;
    (mean, (var / n).sqrt(), p, (p * (1.0 - p) / shots as f64).sqrt())
}

#[test]
fn recurrence_step_matches_sampling_on_random_inputs() {
    let phi = states::bell(BellKind::PhiPlus);
    for seed in 0..10u64 {
        let rho = states::random_density(&[2, 2], 1 + seed as usize % 4, 7000 + seed).unwrap();
        let (out, success) = distill::recurrence_step(&rho).unwrap();
        let exact = out.overlap(phi.amplitudes());
        let (mean, se, p, se_p) = sampled_round(&rho, 200_000, seed);
        assert!((mean - exact).abs() <= 3.0 * se, "seed {seed}: {mean} vs {exact} (se {se})");
        assert!((p - success).abs() <= 3.0 * se_p, "seed {seed}: {p} vs {success}");
    }
}

/// Second sampler for random two-qubit pure states, written from the
/// sampling rule alone: independent standard complex Gaussian amplitudes
/// (Box–Muller on a different generator), then normalization.
fn independent_pure_pair(rng: &mut StdRng) -> [C64; 4] {
    let mut normal = || {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        (r * (2.0 * std::f64::consts::PI * u2).cos(), r * (2.0 * std::f64::consts::PI * u2).sin())
    };
    let mut v = [C64::new(0.0, 0.0); 4];
    for z in v.iter_mut() {
        let (a, b) = normal();
        *z = C64::new(a, b);
    }
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / n)
}

/// `|λ1 − λ2|` of the reduced state of `a|00⟩ + b|01⟩ + c|10⟩ + d|11⟩`:
/// `sqrt(1 − 4|ad − bc|²)`.
fn reduced_gap(v: &[C64]) -> f64 {
    let det = v[0] * v[3] - v[1] * v[2];
    (1.0 - 4.0 * det.norm_sqr()).max(0.0).sqrt()
}

#[test]
fn random_pure_matches_an_independent_sampler() {
    let n = 10_000;
    let ours: Vec<f64> = (0..n as u64)
        .map(|s| {
            let psi = states::random_pure(&[2, 2], 11_000 + s).unwrap();
            let spec = psi.to_density().reduced(0).unwrap().spectrum();
            spec[1] - spec[0]
        })
        .collect();
    let mut rng = StdRng::seed_from_u64(31337);
    let theirs: Vec<f64> = (0..n).map(|_| reduced_gap(&independent_pure_pair(&mut rng))).collect();
    let stats = |x: &[f64]| {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
        (m, var / x.len() as f64)
    };
    let (m1, v1) = stats(&ours);
    let (m2, v2) = stats(&theirs);
    let se = (v1 + v2).sqrt();
    assert!((m1 - m2).abs() <= 3.0 * se, "{m1} vs {m2}, se {se}");
    // the closed-form gap also agrees with the eigensolver sample by sample
    for s in 0..100u64 {
        let psi = states::random_pure(&[2, 2], 11_000 + s).unwrap();
        assert!((reduced_gap(psi.amplitudes()) - ours[s as usize]).abs() < 1e-10);
    }
}

#[test]
fn constructed_separable_states_pass_every_criterion() {
    for (k, dims) in [[2usize, 2], [2, 3], [3, 3], [2, 4], [3, 4]].iter().enumerate() {
        for seed in 0..20u64 {
            let terms = 1 + seed as usize % 6;
            let rho = states::random_separable(dims, terms, 100 * k as u64 + seed).unwrap();
            let v = separability::analyze(&rho).unwrap();
            assert!(v.basis.iter().all(|r| r.satisfied), "{dims:?} seed {seed}: {:?}", v.basis);
            assert_ne!(v.status, Status::Entangled);
        }
    }
}

fn arb_density(dims: [usize; 2]) -> impl Strategy<Value = DensityMatrix> {
    let n = dims[0] * dims[1];
    (any::<u64>(), 1..=n).prop_map(move |(seed, rank)| states::random_density(&dims, rank, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn low_dimension_verdict_follows_ppt_sign(rho in prop_oneof![arb_density([2, 2]), arb_density([2, 3])]) {
        let v = separability::analyze(&rho).unwrap();
        let margin = v.basis[0].margin;
        let expected = if margin >= -separability::ZERO_TOL { Status::Separable } else { Status::Entangled };
        prop_assert_eq!(v.status, expected);
    }

    #[test]
    fn schmidt_rank_one_iff_single_reduced_eigenvalue(seed in any::<u64>(), product in any::<bool>()) {
        let psi = if product {
            states::random_product_with(&[3, 3], &mut restart_rng(seed, 0)).unwrap()
        } else {
            states::random_pure(&[3, 3], seed).unwrap()
        };
        let rank = separability::schmidt_rank(&psi, separability::RANK_TOL).unwrap();
        let reduced = psi.to_density().reduced(0).unwrap().spectrum();
        // roundoff in the eigenvalues is ~1e-16, so their square roots can pass 1e-8
        let nonzero = reduced.iter().filter(|&&l| l > 1e-12).count();
        prop_assert_eq!(rank == 1, nonzero == 1);
        prop_assert_eq!(rank == 1, product);
    }

    #[test]
    fn recurrence_output_is_a_state(rho in arb_density([2, 2])) {
        let (out, success) = distill::recurrence_step(&rho).unwrap();
        prop_assume!(success > 1e-6);
        prop_assert!((out.matrix().trace().re - 1.0).abs() <= 1e-10);
        prop_assert!(out.spectrum()[0] >= -1e-10);
    }

    #[test]
    fn pure_state_factories_are_normalized(seed in any::<u64>(), d in 2usize..5) {
        let psi = states::random_pure(&[d, d], seed).unwrap();
        prop_assert!((linalg::norm(psi.amplitudes()) - 1.0).abs() <= 1e-12);
        let phi = states::maximally_entangled(d).unwrap();
        prop_assert!((linalg::norm(phi.amplitudes()) - 1.0).abs() <= 1e-12);
        let again = PureState::new(psi.amplitudes().to_vec(), vec![d, d]);
        prop_assert!(again.is_ok());
    }
}
