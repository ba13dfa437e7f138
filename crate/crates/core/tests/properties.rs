use mlea::inequality::{jensen_gap, sample_jensen_pair, SpectralFunction};
use mlea::learners::{reduce_predict, surrogate, LeaLearner, LearningRate, MatrixLearner, MmwuLearner};
use mlea::linalg::{Density, Hermitian};
use mlea::potentials::PotentialFamily;
use mlea::rng::{gaussian_hermitian, haar_unitary, haar_vector, hermitian_with_op_norm, rng_from_seed};
use proptest::prelude::*;

type H = Hermitian<f64>;

fn conjugate(u: &mlea::linalg::CMatrix<f64>, a: &H) -> H {
    Hermitian::symmetrized(u.matmul(a.as_matrix()).matmul(&u.adjoint()))
}

fn assert_density(x: &Density<f64>, tol: f64) {
    let h = x.as_hermitian();
    assert!((h.trace() - 1.0).abs() < tol, "trace {}", h.trace());
    let lmin = h.eigenvalues().unwrap()[0];
    assert!(lmin > -tol, "min eigenvalue {lmin}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_functions_have_zero_gap(seed in any::<u64>(), d in 1usize..7, a in -3.0f64..3.0, b in -3.0f64..3.0, eps in 0.1f64..2.0) {
        let (s, g) = sample_jensen_pair(d, eps, &mut rng_from_seed(seed));
        let gap = jensen_gap(&SpectralFunction::Affine { a, b }, &s, &g, eps).unwrap();
        prop_assert!(gap.abs() < 1e-9 * (1.0 + s.op_norm().unwrap()) * (1.0 + a.abs() + b.abs()) * d as f64);
    }

    #[test]
    fn gap_is_unitarily_invariant(seed in any::<u64>(), d in 1usize..6, degree in 2u32..5) {
        let mut rng = rng_from_seed(seed);
        let (s, g) = sample_jensen_pair(d, 1.0, &mut rng);
        let u = haar_unitary::<f64>(d, &mut rng);
        let phi = SpectralFunction::Monomial { degree };
        let a = jensen_gap(&phi, &s, &g, 1.0).unwrap();
        let b = jensen_gap(&phi, &conjugate(&u, &s), &conjugate(&u, &g), 1.0).unwrap();
        let scale = 1.0 + (s.op_norm().unwrap() + 1.0).powi(degree as i32) * d as f64;
        prop_assert!((a - b).abs() < 1e-9 * scale, "{a} vs {b}");
    }

    #[test]
    fn monomial_gap_scales_homogeneously(seed in any::<u64>(), d in 1usize..6, degree in 2u32..6, c in 0.2f64..3.0) {
        let (s, g) = sample_jensen_pair(d, 1.0, &mut rng_from_seed(seed));
        let phi = SpectralFunction::Monomial { degree };
        let a = jensen_gap(&phi, &s, &g, 1.0).unwrap();
        let b = jensen_gap(&phi, &s.scale(c), &g.scale(c), c).unwrap();
        let want = c.powi(degree as i32) * a;
        let scale = 1.0 + c.powi(degree as i32) * (s.op_norm().unwrap() + 1.0).powi(degree as i32) * d as f64;
        prop_assert!((b - want).abs() < 1e-9 * scale, "{b} vs {want}");
    }

    #[test]
    fn reduction_clauses(seed in any::<u64>(), d in 1usize..7, round in 1u64..100) {
        let mut rng = rng_from_seed(seed);
        let x_tilde: H = gaussian_hermitian(d, &mut rng);
        let g: H = hermitian_with_op_norm(d, 1.0, &mut rng);
        let (x, ctx) = reduce_predict(x_tilde.clone(), round).unwrap();
        assert_density(&x, 1e-12);
        let s = surrogate(&g, &ctx, round).unwrap();
        // ‖G̃‖ ≤ 2‖G‖ and G̃ is orthogonal to X
        prop_assert!(s.g_tilde.op_norm().unwrap() <= 2.0 + 1e-9);
        prop_assert!(s.g_tilde.inner(x.as_hermitian()).unwrap().abs() < 1e-10);
        // linearization: ⟨G,X − Y⟩ ≤ ⟨G̃,X̃ − Y⟩ for every density Y
        for _ in 0..8 {
            let y = Density::pure(&haar_vector::<f64>(d, &mut rng)).unwrap();
            let lhs = s.loss - g.inner(y.as_hermitian()).unwrap();
            let rhs = s.g_tilde_dot_x_tilde - s.g_tilde.inner(y.as_hermitian()).unwrap();
            prop_assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
        }
    }

    #[test]
    fn density_invariants(seed in any::<u64>(), d in 1usize..9, gamma in 0.0f64..1.0) {
        let mut rng = rng_from_seed(seed);
        let rho = Density::pure(&haar_vector::<f64>(d, &mut rng)).unwrap();
        let noisy = rho.depolarize(gamma).unwrap();
        assert_density(&noisy, 1e-12);
        let s = noisy.relative_entropy_vs_mixed().unwrap();
        prop_assert!(s >= -1e-12 && s <= (d as f64).ln() + 1e-12);
        let ent = noisy.von_neumann_entropy().unwrap();
        prop_assert!((ent + s - (d as f64).ln()).abs() < 1e-10);
        prop_assert!(noisy.purity() <= rho.purity() + 1e-12);
        prop_assert!(noisy.purity() >= 1.0 / d as f64 - 1e-12);
    }

    #[test]
    fn learners_play_densities(seed in any::<u64>(), d in 1usize..6, l in 0.1f64..4.0, rounds in 1usize..40) {
        let mut rng = rng_from_seed(seed);
        let mut learners: Vec<Box<dyn MatrixLearner<f64>>> = vec![
            Box::new(LeaLearner::erfi(l, d).unwrap()),
            Box::new(LeaLearner::new(PotentialFamily::ExpSquare, l, d).unwrap()),
            Box::new(MmwuLearner::new(l, d, LearningRate::Fixed { eta: 0.7 }).unwrap()),
        ];
        for _ in 0..rounds {
            let g: H = hermitian_with_op_norm(d, l, &mut rng);
            for learner in learners.iter_mut() {
                let x = learner.step(&g).unwrap();
                assert_density(&x, 1e-9);
            }
        }
    }
}

#[test]
fn single_precision_learner_plays_densities() {
    let mut rng = rng_from_seed(3);
    let mut learner = LeaLearner::<f32>::erfi(1.0, 4).unwrap();
    for _ in 0..200 {
        let g: Hermitian<f32> = hermitian_with_op_norm(4, 1.0, &mut rng);
        let x = learner.step(&g).unwrap();
        let h = x.as_hermitian();
        assert!((h.trace() - 1.0).abs() < 1e-4);
        assert!(h.eigenvalues().unwrap()[0] > -1e-5);
    }
}
