//! Property tests for the algebraic identities every g-inverse of I - P must
//! satisfy, plus randomized coverage of the solver substrate.

mod common;

use common::*;
use markov_ginv::chain::{d_matrix, pi_matrix, StationaryVector};
use markov_ginv::ginv::{
    build, check_conditions, extract_params, GInvRecipe, GInverse, TChoice, UChoice,
};
use markov_ginv::linalg::{diag_of, make_diag, mat_power, rank1, Matrix, Vector};
use markov_ginv::oracle;
use markov_ginv::passage;
use markov_ginv::stationary;
use markov_ginv::TransitionMatrix;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn vec_strategy(len: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(lo..hi, len)
}

fn chain_strategy(max_m: usize) -> impl Strategy<Value = TransitionMatrix> {
    (2..=max_m).prop_flat_map(|m| {
        vec_strategy(m * m, 0.05, 1.0).prop_map(move |flat| {
            let rows: Vec<Vec<f64>> = flat
                .chunks(m)
                .map(|row| {
                    let s: f64 = row.iter().sum();
                    row.iter().map(|x| x / s).collect()
                })
                .collect();
            TransitionMatrix::validate(Matrix::from_rows(&rows).unwrap()).unwrap()
        })
    })
}

fn pi_of(p: &TransitionMatrix) -> StationaryVector {
    stationary::pi_default(p).unwrap()
}

fn all_recipes(m: usize) -> Vec<GInvRecipe> {
    let a = 2.min(m);
    let mut v = GInvRecipe::table_recipes(a, 1);
    v.push(GInvRecipe::Fundamental);
    v.push(GInvRecipe::GroupInverse);
    v.push(GInvRecipe::MoorePenrose);
    v
}

fn build_any(p: &TransitionMatrix, recipe: GInvRecipe, pi: &StationaryVector) -> GInverse {
    build(p, recipe, Some(pi)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inverse_of_well_conditioned_matrix(flat in vec_strategy(36, -1.0, 1.0)) {
        // Diagonal dominance keeps the condition number tame.
        let m = 6;
        let a = Matrix::from_fn(m, m, |i, j| {
            flat[i * m + j] + if i == j { m as f64 } else { 0.0 }
        });
        let inv = markov_ginv::linalg::inverse(&a).unwrap();
        let resid = a.matmul(&inv).max_diff(&Matrix::identity(m));
        prop_assert!(resid < 1e-9, "residual {resid}");
    }

    #[test]
    fn solve_reproduces_rhs(flat in vec_strategy(25, -1.0, 1.0), rhs in vec_strategy(10, -2.0, 2.0)) {
        let m = 5;
        let a = Matrix::from_fn(m, m, |i, j| {
            flat[i * m + j] + if i == j { m as f64 } else { 0.0 }
        });
        let b = Matrix::from_fn(m, 2, |i, j| rhs[i * 2 + j]);
        let x = markov_ginv::linalg::solve(&a, &b).unwrap();
        prop_assert!(a.matmul(&x).max_diff(&b) < 1e-9);
    }

    #[test]
    fn power_is_additive_on_stochastic_matrices(p in chain_strategy(6), j in 0usize..8, k in 0usize..8) {
        prop_assume!(j + k <= 16);
        let pj = mat_power(p.p(), j).unwrap();
        let pk = mat_power(p.p(), k).unwrap();
        let pjk = mat_power(p.p(), j + k).unwrap();
        prop_assert!(pj.matmul(&pk).max_diff(&pjk) < 1e-9);
    }

    #[test]
    fn diagonal_operator_identities(p in chain_strategy(6), flat in vec_strategy(36, -2.0, 2.0), lam in vec_strategy(6, -1.0, 1.0)) {
        let m = p.m();
        let x = Matrix::from_fn(m, m, |i, j| flat[i * m + j]);
        let pi = pi_of(&p);
        let big_pi = pi_matrix(&pi);
        let d = d_matrix(&pi);
        let e = Matrix::from_fn(m, m, |_, _| 1.0);

        // (X E)_d = (X Pi)_d D
        let lhs = diag_of(&x.matmul(&e)).unwrap();
        let rhs = diag_of(&x.matmul(&big_pi)).unwrap().matmul(&d);
        prop_assert!(lhs.max_diff(&rhs) < 1e-9);

        // (X Lambda)_d = X_d Lambda for diagonal Lambda
        let lambda = make_diag(&Vector::new(lam[..m].to_vec()).unwrap());
        let lhs = diag_of(&x.matmul(&lambda)).unwrap();
        let rhs = diag_of(&x).unwrap().matmul(&lambda);
        prop_assert!(lhs.max_diff(&rhs) < 1e-12);

        // E Pi_d = Pi
        let lhs = e.matmul(&diag_of(&big_pi).unwrap());
        prop_assert!(lhs.max_diff(&big_pi) < 1e-12);
    }

    #[test]
    fn stationary_projector_identities(p in chain_strategy(8)) {
        let pi = pi_of(&p);
        let big_pi = pi_matrix(&pi);
        prop_assert!(big_pi.matmul(&big_pi).max_diff(&big_pi) < 1e-10);
        prop_assert!(big_pi.matmul(p.p()).max_diff(&big_pi) < 1e-10);
        prop_assert!(p.p().matmul(&big_pi).max_diff(&big_pi) < 1e-10);
        // Pi_d D = I
        let prod = diag_of(&big_pi).unwrap().matmul(&d_matrix(&pi));
        prop_assert!(prod.max_diff(&Matrix::identity(p.m())) < 1e-12);
    }

    #[test]
    fn every_recipe_satisfies_condition_one(p in chain_strategy(8)) {
        let pi = pi_of(&p);
        for recipe in all_recipes(p.m()) {
            let g = build_any(&p, recipe, &pi);
            let resid = markov_ginv::ginv::condition1_residual(&p, g.matrix());
            prop_assert!(resid < 1e-9, "{}: residual {resid}", g.label());
        }
    }

    #[test]
    fn signature_matches_table_columns(p in chain_strategy(7), a in 1usize..7, b in 1usize..7) {
        prop_assume!(a <= p.m() && b <= p.m());
        let m = p.m();
        let pi = pi_of(&p);
        let e = Vector::ones(m);
        let pa = pi.get(a - 1);
        let expected: Vec<(GInvRecipe, Vector, Vector, f64)> = vec![
            (GInvRecipe::g_ee(), e.clone(), e.scale(1.0 / m as f64), 1.0 / m as f64 - 1.0),
            (GInvRecipe::g_eb_r(b), e.clone(), p.p().row_vector(b - 1), 0.0),
            (GInvRecipe::g_eb(b), e.clone(), Vector::unit(m, b - 1), 0.0),
            (GInvRecipe::g_ae_c(a), p.p().col(a - 1).scale(1.0 / pa), e.scale(1.0 / m as f64), 1.0 / (m as f64 * pa) - 1.0),
            (GInvRecipe::g_ab_cr(a, b), p.p().col(a - 1).scale(1.0 / pa), p.p().row_vector(b - 1), 1.0 / pa - 1.0),
            (GInvRecipe::g_ab_c(a, b), p.p().col(a - 1).scale(1.0 / pa), Vector::unit(m, b - 1), 1.0 / pa - 1.0),
            (GInvRecipe::g_ae(a), Vector::unit(m, a - 1).scale(1.0 / pa), e.scale(1.0 / m as f64), 1.0 / (m as f64 * pa) - 1.0),
            (GInvRecipe::g_ab_r(a, b), Vector::unit(m, a - 1).scale(1.0 / pa), p.p().row_vector(b - 1), 1.0 / pa - 1.0),
            (GInvRecipe::g_ab(a, b), Vector::unit(m, a - 1).scale(1.0 / pa), Vector::unit(m, b - 1), 1.0 / pa - 1.0),
            (GInvRecipe::g_tb_c(b), e.sub(&Vector::unit(m, b - 1)).add(&p.p().col(b - 1)), Vector::unit(m, b - 1), 0.0),
        ];
        for (recipe, ea, eb, eg) in expected {
            let g = build(&p, recipe, None).unwrap();
            let params = extract_params(&p, &g).unwrap();
            prop_assert!(params.alpha.max_diff(&ea) < 1e-8, "{} alpha", g.label());
            prop_assert!(params.beta.max_diff(&eb) < 1e-8, "{} beta", g.label());
            prop_assert!((params.gamma - eg).abs() < 1e-8, "{} gamma", g.label());
        }
    }

    #[test]
    fn projection_factor_identities(p in chain_strategy(7)) {
        // A = alpha pi' is idempotent with A alpha = alpha and pi'A = pi';
        // B = e beta' fixes beta' and e.
        let m = p.m();
        let pi = pi_of(&p);
        let ident = Matrix::identity(m);
        for recipe in all_recipes(m) {
            let g = build_any(&p, recipe, &pi);
            let params = extract_params(&p, &g).unwrap();
            let a = ident.sub(&p.kernel().matmul(g.matrix()));
            let b = ident.sub(&g.matrix().matmul(&p.kernel()));
            let pv = Vector::new(pi.pi().to_vec()).unwrap();

            prop_assert!(a.max_diff(&rank1(&params.alpha, &pv)) < 1e-9, "{} A=alpha pi'", g.label());
            prop_assert!(a.matmul(&a).max_diff(&a) < 1e-9, "{} A idempotent", g.label());
            prop_assert!(b.max_diff(&rank1(&Vector::ones(m), &params.beta)) < 1e-9, "{} B=e beta'", g.label());
            prop_assert!(a.mul_vec(&params.alpha).max_diff(&params.alpha) < 1e-9);
            prop_assert!(a.vec_mul(&pv).max_diff(&pv) < 1e-9);
            prop_assert!(b.vec_mul(&params.beta).max_diff(&params.beta) < 1e-9);
            prop_assert!(b.mul_vec(&Vector::ones(m)).max_diff(&Vector::ones(m)) < 1e-9);
            // pi'alpha = 1 and beta'e = 1.
            prop_assert!((pv.dot(&params.alpha) - 1.0).abs() < 1e-9);
            prop_assert!((params.beta.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn update_inverse_side_identities(p in chain_strategy(7)) {
        // u'G = pi'/pi't and G t = e/u'e for G the inverse of I - P + t u'.
        let pi = pi_of(&p);
        let pv = Vector::new(pi.pi().to_vec()).unwrap();
        for recipe in GInvRecipe::table_recipes(2.min(p.m()), 1) {
            let g = build(&p, recipe, None).unwrap();
            let (t, u) = (g.t_vector().unwrap(), g.u_vector().unwrap());
            let pt = pv.dot(t);
            let ue = u.sum();
            let lhs = g.matrix().vec_mul(u);
            prop_assert!(lhs.max_diff(&pv.scale(1.0 / pt)) < 1e-9, "{} u'G", g.label());
            let rhs = g.matrix().mul_vec(t);
            prop_assert!(rhs.max_diff(&Vector::ones(p.m()).scale(1.0 / ue)) < 1e-9, "{} Gt", g.label());
        }
    }

    #[test]
    fn invariant_sandwich_is_recipe_independent(p in chain_strategy(7)) {
        let pi = pi_of(&p);
        let mut sandwiches = Vec::new();
        for recipe in all_recipes(p.m()) {
            let g = build_any(&p, recipe, &pi);
            sandwiches.push(markov_ginv::ginv::group_inverse_via_invariance(g.matrix(), &pi));
        }
        let rhode = build(&p, GInvRecipe::Rhode, None).unwrap();
        sandwiches.push(markov_ginv::ginv::group_inverse_via_invariance(rhode.matrix(), &pi));
        for pair in sandwiches.windows(2) {
            prop_assert!(pair[0].max_diff(&pair[1]) < 1e-8);
        }
    }

    #[test]
    fn stationary_routes_agree(p in chain_strategy(7)) {
        let reference = oracle::pi_power_iteration(&p, 1e-12, 200_000).unwrap();
        let rv = Vector::new(reference.pi().to_vec()).unwrap();
        for recipe in GInvRecipe::table_recipes(2.min(p.m()), 1) {
            let g = build(&p, recipe, None).unwrap();
            let direct = stationary::pi_from_tu(&p, &g).unwrap();
            prop_assert!(Vector::new(direct.pi().to_vec()).unwrap().max_diff(&rv) < 1e-8, "{}", g.label());
            let scan = stationary::pi_from_a(&p, &g, None).unwrap();
            prop_assert!(Vector::new(scan.pi().to_vec()).unwrap().max_diff(&rv) < 1e-8);
            let brt = stationary::pi_from_b(&p, &g, None).unwrap();
            prop_assert!(Vector::new(brt.pi().to_vec()).unwrap().max_diff(&rv) < 1e-8);
        }
        let rhode = stationary::pi_rhode(&p).unwrap();
        prop_assert!(Vector::new(rhode.pi().to_vec()).unwrap().max_diff(&rv) < 1e-8);
    }

    #[test]
    fn probing_vector_independence(p in chain_strategy(6), probes in vec_strategy(60, -1.0, 1.0)) {
        let g = build(&p, GInvRecipe::g_eb(1), None).unwrap();
        let baseline = stationary::pi_from_a(&p, &g, None).unwrap();
        let bv = Vector::new(baseline.pi().to_vec()).unwrap();
        let m = p.m();
        let mut tried = 0;
        for chunk in probes.chunks(m).take(10) {
            let v = Vector::new(chunk.to_vec()).unwrap();
            match stationary::pi_from_a(&p, &g, Some(&v)) {
                Ok(pi) => {
                    tried += 1;
                    prop_assert!(Vector::new(pi.pi().to_vec()).unwrap().max_diff(&bv) < 1e-9);
                }
                // Unlucky probes orthogonal to alpha are allowed to refuse.
                Err(markov_ginv::Error::ZeroProjection) => {}
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            }
        }
        prop_assert!(tried >= 1);
    }

    #[test]
    fn every_scannable_row_yields_the_same_pi(p in chain_strategy(6)) {
        let pi = pi_of(&p);
        let g = build_any(&p, GInvRecipe::GroupInverse, &pi);
        let m = p.m();
        let a = Matrix::identity(m).sub(&p.kernel().matmul(g.matrix()));
        let pv = Vector::new(pi.pi().to_vec()).unwrap();
        let mut rows = 0;
        for r in 0..m {
            let sum: f64 = a.row(r).iter().sum();
            if sum.abs() > 1e-10 * (1.0 + a.max_norm()) {
                rows += 1;
                let candidate = a.row_vector(r).scale(1.0 / sum);
                prop_assert!(candidate.max_diff(&pv) < 1e-9, "row {r}");
            }
        }
        prop_assert!(rows >= 1);
    }

    #[test]
    fn passage_moments_match_oracle(p in chain_strategy(7)) {
        let pi = pi_of(&p);
        let m_direct = oracle::mfpt_direct(&p).unwrap();
        let m2_direct = oracle::m2_direct(&p, &m_direct).unwrap();
        for recipe in [GInvRecipe::Fundamental, GInvRecipe::g_ab(2.min(p.m()), 1), GInvRecipe::g_tb_c(1)] {
            let g = build_any(&p, recipe, &pi);
            let m1 = passage::mfpt(&p, &g, Some(&pi)).unwrap();
            prop_assert!(m1.max_diff(&m_direct) < 1e-7, "{} m1", g.label());
            let m2 = passage::m2(&p, &g, &pi, &m1).unwrap();
            prop_assert!(m2.max_diff(&m2_direct) < 1e-7, "{} m2", g.label());
        }
        // Return-time diagonal and the floor on every passage time.
        for i in 0..p.m() {
            let rel = (m_direct[(i, i)] - 1.0 / pi.get(i)).abs() / (1.0 / pi.get(i));
            prop_assert!(rel < 1e-8);
            for j in 0..p.m() {
                prop_assert!(m_direct[(i, j)] >= 1.0 - 1e-10);
            }
        }
    }

    #[test]
    fn return_moment_identity(p in chain_strategy(7)) {
        // m_jj(2) + m_jj = 2 m_jj sum_i pi_i m_ij
        let pi = pi_of(&p);
        let m1 = oracle::mfpt_direct(&p).unwrap();
        let m2 = oracle::m2_direct(&p, &m1).unwrap();
        for j in 0..p.m() {
            let weighted: f64 = (0..p.m()).map(|i| pi.get(i) * m1[(i, j)]).sum();
            let lhs = m2[(j, j)] + m1[(j, j)];
            let rhs = 2.0 * m1[(j, j)] * weighted;
            prop_assert!((lhs - rhs).abs() / (1.0 + rhs.abs()) < 1e-8);
        }
    }

    #[test]
    fn constant_row_sum_conditions_are_equivalent(p in chain_strategy(6)) {
        // The three characterizations of the short-form condition must agree
        // on every g-inverse: constant row sums, GE = E(G Pi)_d D, and
        // G Pi = E (G Pi)_d.
        let pi = pi_of(&p);
        let m = p.m();
        let e = Matrix::from_fn(m, m, |_, _| 1.0);
        let big_pi = pi_matrix(&pi);
        let d = d_matrix(&pi);
        for recipe in all_recipes(m) {
            let g = build_any(&p, recipe, &pi);
            let gm = g.matrix();
            let scale = 1.0 + gm.max_norm();
            let sums = gm.row_sums();
            let mut spread: f64 = 0.0;
            for &s in sums.iter() {
                spread = spread.max((s - sums[0]).abs());
            }
            let c1 = spread <= 1e-8 * scale;
            let gpid = diag_of(&gm.matmul(&big_pi)).unwrap();
            let c2 = gm.matmul(&e).max_diff(&e.matmul(&gpid).matmul(&d)) <= 1e-8 * scale;
            let c3 = gm.matmul(&big_pi).max_diff(&e.matmul(&gpid)) <= 1e-8 * scale;
            prop_assert_eq!(c1, c2, "{}", g.label());
            prop_assert_eq!(c2, c3, "{}", g.label());
        }
    }

    #[test]
    fn occupation_identities(p in chain_strategy(6), n in 1usize..24) {
        let pi = pi_of(&p);
        let g = build_any(&p, GInvRecipe::g_ab_cr(2.min(p.m()), 1), &pi);
        let explicit = markov_ginv::occupation::occupation_explicit(&p, n).unwrap();
        let pn = mat_power(p.p(), n).unwrap();
        let i_minus_pn = Matrix::identity(p.m()).sub(&pn);
        for side in [markov_ginv::occupation::ClosedSide::Left, markov_ginv::occupation::ClosedSide::Right] {
            let closed = markov_ginv::occupation::occupation_closed(&p, &g, &pi, n, side).unwrap();
            prop_assert!(closed.a_n.max_diff(&explicit.a_n) < 1e-8);
            prop_assert!(p.kernel().matmul(&closed.a_n).max_diff(&i_minus_pn) < 1e-9);
            prop_assert!(closed.a_n.matmul(&p.kernel()).max_diff(&i_minus_pn) < 1e-9);
            let big_pi = pi_matrix(&pi);
            prop_assert!(closed.a_n.matmul(&big_pi).max_diff(&big_pi.scale(n as f64)) < 1e-8);
            prop_assert!(big_pi.matmul(&closed.a_n).max_diff(&big_pi.scale(n as f64)) < 1e-8);
        }
    }

    #[test]
    fn oracle_moments_satisfy_defining_equations(p in chain_strategy(7)) {
        let m = p.m();
        let m1 = oracle::mfpt_direct(&p).unwrap();
        let m2 = oracle::m2_direct(&p, &m1).unwrap();
        let kernel = p.kernel();
        let e = Matrix::from_fn(m, m, |_, _| 1.0);
        let m1d = diag_of(&m1).unwrap();
        let m2d = diag_of(&m2).unwrap();
        prop_assert!(kernel.matmul(&m1).max_diff(&e.sub(&p.p().matmul(&m1d))) < 1e-9);
        let rhs = e.add(&p.p().matmul(&m1.sub(&m1d)).scale(2.0)).sub(&p.p().matmul(&m2d));
        prop_assert!(kernel.matmul(&m2).max_diff(&rhs) < 1e-9);
    }
}

#[test]
fn table_two_structure() {
    // Row/column structure of each canonical recipe, checked on seeded
    // random chains with both a = b and a != b.
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for &m in &[3usize, 5, 8] {
        let p = random_chain(m, &mut rng);
        let pi = stationary::pi_default(&p).unwrap();
        let pv = Vector::new(pi.pi().to_vec()).unwrap();
        let e = Vector::ones(m);
        let tol = 1e-9;
        for (a, b) in [(2usize, 1usize), (2, 2)] {
            let pa = pi.get(a - 1);
            let prow = p.p().row_vector(b - 1);

            let g = build(&p, GInvRecipe::g_ee(), None).unwrap();
            assert!(g.matrix().col_sums().max_diff(&pv) < tol);
            assert!(g.matrix().row_sums().max_diff(&e.scale(1.0 / m as f64)) < tol);

            let g = build(&p, GInvRecipe::g_eb_r(b), None).unwrap();
            assert!(g.matrix().row_vector(b - 1).max_diff(&Vector::unit(m, b - 1)) < tol);
            assert!(g.matrix().row_sums().max_diff(&e) < tol);
            assert!(g.matrix().vec_mul(&prow).max_diff(&pv) < tol);

            let g = build(&p, GInvRecipe::g_eb(b), None).unwrap();
            assert!(g.matrix().row_vector(b - 1).max_diff(&pv) < tol);
            assert!(g.matrix().row_sums().max_diff(&e) < tol);

            let g = build(&p, GInvRecipe::g_ae_c(a), None).unwrap();
            assert!(g.matrix().col(a - 1).max_diff(&Vector::unit(m, a - 1)) < tol);
            assert!(g.matrix().col_sums().max_diff(&pv.scale(1.0 / pa)) < tol);
            assert!(g.matrix().mul_vec(&p.p().col(a - 1)).max_diff(&e.scale(1.0 / m as f64)) < tol);

            let g = build(&p, GInvRecipe::g_ab_cr(a, b), None).unwrap();
            let expected_col = Vector::unit(m, a - 1)
                .add(&e.scale(1.0 - p.p()[(b - 1, a - 1)]));
            assert!(g.matrix().col(a - 1).max_diff(&expected_col) < tol);
            assert!(g.matrix().vec_mul(&prow).max_diff(&pv.scale(1.0 / pa)) < tol);
            assert!(g.matrix().mul_vec(&p.p().col(a - 1)).max_diff(&e) < tol);

            let g = build(&p, GInvRecipe::g_ab_c(a, b), None).unwrap();
            let expected_col = if a == b {
                Vector::unit(m, a - 1)
            } else {
                e.add(&Vector::unit(m, a - 1))
            };
            assert!(g.matrix().col(a - 1).max_diff(&expected_col) < tol);
            assert!(g.matrix().row_vector(b - 1).max_diff(&pv.scale(1.0 / pa)) < tol);

            let g = build(&p, GInvRecipe::g_ae(a), None).unwrap();
            assert!(g.matrix().col(a - 1).max_diff(&e.scale(1.0 / m as f64)) < tol);
            assert!(g.matrix().col_sums().max_diff(&pv.scale(1.0 / pa)) < tol);

            let g = build(&p, GInvRecipe::g_ab_r(a, b), None).unwrap();
            assert!(g.matrix().col(a - 1).max_diff(&e) < tol);
            let expected_row = if a == b {
                Vector::unit(m, a - 1)
            } else {
                Vector::unit(m, b - 1).add(&pv.scale(1.0 / pa))
            };
            assert!(g.matrix().row_vector(b - 1).max_diff(&expected_row) < tol);
            assert!(g.matrix().vec_mul(&prow).max_diff(&pv.scale(1.0 / pa)) < tol);

            let g = build(&p, GInvRecipe::g_ab(a, b), None).unwrap();
            assert!(g.matrix().col(a - 1).max_diff(&e) < tol);
            assert!(g.matrix().row_vector(b - 1).max_diff(&pv.scale(1.0 / pa)) < tol);

            let g = build(&p, GInvRecipe::g_tb_c(b), None).unwrap();
            assert!(g.matrix().row_vector(b - 1).max_diff(&pv) < tol);
            assert!(g.matrix().row_sums().max_diff(&Vector::unit(m, b - 1)) < tol);
            let tb = e.sub(&Vector::unit(m, b - 1)).add(&p.p().col(b - 1));
            assert!(g.matrix().mul_vec(&tb).max_diff(&e) < tol);
        }
    }
}

#[test]
fn condition_one_holds_on_every_suite_chain() {
    for p in test_suite() {
        let pi = stationary::pi_default(&p).unwrap();
        for recipe in all_recipes(p.m()) {
            let g = build(&p, recipe, Some(&pi)).unwrap();
            let resid = markov_ginv::ginv::condition1_residual(&p, g.matrix());
            assert!(resid < 1e-9, "m={} {}: residual {resid:.2e}", p.m(), g.label());
        }
    }
}

#[test]
fn inverse_accuracy_at_fifty_states() {
    let mut rng = ChaCha12Rng::seed_from_u64(50);
    let m = 50;
    let a = Matrix::from_fn(m, m, |i, j| {
        let x = 2.0 * unit(&mut rng) - 1.0;
        x + if i == j { m as f64 } else { 0.0 }
    });
    let inv = markov_ginv::linalg::inverse(&a).unwrap();
    assert!(a.matmul(&inv).max_diff(&Matrix::identity(m)) < 1e-9);
}

#[test]
fn condition_profiles_on_structured_chains() {
    for p in structured_suite() {
        let pi = oracle::pi_power_iteration(&p, 1e-12, 200_000).unwrap();
        let z = build(&p, GInvRecipe::Fundamental, Some(&pi)).unwrap();
        let prof = check_conditions(&p, z.matrix(), 1e-8).unwrap();
        assert!(prof.holds(1) && prof.holds(5));
        let sharp = build(&p, GInvRecipe::GroupInverse, Some(&pi)).unwrap();
        let prof = check_conditions(&p, sharp.matrix(), 1e-8).unwrap();
        assert!(prof.holds(1) && prof.holds(2) && prof.holds(5));
        let mp = build(&p, GInvRecipe::MoorePenrose, Some(&pi)).unwrap();
        let prof = check_conditions(&p, mp.matrix(), 1e-8).unwrap();
        assert!(prof.holds(1) && prof.holds(2) && prof.holds(3) && prof.holds(4));
    }
}

#[test]
fn asymptotic_error_decays_with_horizon() {
    let mut rng = ChaCha12Rng::seed_from_u64(21);
    let p = random_chain(6, &mut rng);
    let pi = stationary::pi_default(&p).unwrap();
    let g = build(&p, GInvRecipe::g_eb(1), None).unwrap();
    let mut last = f64::INFINITY;
    for n in [25usize, 50, 100, 200] {
        let approx = markov_ginv::occupation::occupation_asymptotic(&p, &g, &pi, n).unwrap();
        let exact = markov_ginv::occupation::occupation_explicit(&p, n).unwrap();
        let err = approx.max_diff(&exact.a_n);
        assert!(err <= last + 1e-12, "error grew from {last:.3e} to {err:.3e} at n={n}");
        last = err;
    }
    assert!(last < 1e-5, "error {last:.3e} at n=200");
}

#[test]
fn single_state_chain_works() {
    let p = chain_from(&[&[1.0]]);
    let pi = stationary::pi_default(&p).unwrap();
    assert_eq!(pi.get(0), 1.0);
    let out = passage::m2_geb(&p, 1).unwrap();
    assert_eq!(out.m1[(0, 0)], 1.0);
    assert_eq!(out.m2[(0, 0)], 1.0);
    assert_eq!(out.var[(0, 0)], 0.0);
    let occ = markov_ginv::occupation::occupation_explicit(&p, 4).unwrap();
    assert_eq!(occ.a_n[(0, 0)], 4.0);
    let est = oracle::simulate_passage(&p, 1, 1, 10, 3).unwrap();
    assert_eq!(est.mean, 1.0);
}

#[test]
fn monte_carlo_error_shrinks_with_trials() {
    // Quadrupling the trial count should halve the standard error of the
    // mean, up to sampling noise.
    let p = two_state();
    let small = oracle::simulate_passage(&p, 1, 2, 25_000, 11).unwrap();
    let large = oracle::simulate_passage(&p, 1, 2, 100_000, 12).unwrap();
    let ratio = small.std_error_mean / large.std_error_mean;
    assert!(
        (ratio - 2.0).abs() <= 0.4,
        "expected ratio near 2, got {ratio}"
    );
}

#[test]
fn rhode_inverse_drives_the_full_pipeline() {
    // The partitioned inverse zeroes all but the last row of A, stressing
    // the row scan, and has non-constant row sums, stressing the general
    // elemental forms.
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    for m in [3usize, 10, 30] {
        let p = random_chain(m, &mut rng);
        let g = build(&p, GInvRecipe::Rhode, None).unwrap();
        let (pi, m1) = passage::mfpt_joint(&p, &g).unwrap();
        let direct = oracle::mfpt_direct(&p).unwrap();
        assert!(m1.max_diff(&direct) < 1e-7, "m={m}");
        let m2 = passage::m2(&p, &g, &pi, &m1).unwrap();
        let direct2 = oracle::m2_direct(&p, &direct).unwrap();
        assert!(m2.max_diff(&direct2) < 1e-7, "m={m}");
        let alpha = passage::alpha_vector(&p, &g, &pi).unwrap();
        let weighted = m1
            .transpose()
            .mul_vec(&Vector::new(pi.pi().to_vec()).unwrap());
        assert!(alpha.max_diff(&weighted) < 1e-8, "m={m}");
    }
}

#[test]
fn custom_tu_recipes_match_generic_machinery() {
    // A custom (t, u) build behaves exactly like its canonical twin.
    let p = two_state();
    let custom = build(
        &p,
        GInvRecipe::CustomTU { t: Vector::ones(2), u: Vector::unit(2, 0) },
        None,
    )
    .unwrap();
    let canonical = build(&p, GInvRecipe::g_eb(1), None).unwrap();
    assert!(custom.matrix().max_diff(canonical.matrix()) < 1e-14);
    let pi_custom = stationary::pi_from_tu(&p, &custom).unwrap();
    let pi_canonical = stationary::pi_from_tu(&p, &canonical).unwrap();
    assert!(
        Vector::new(pi_custom.pi().to_vec())
            .unwrap()
            .max_diff(&Vector::new(pi_canonical.pi().to_vec()).unwrap())
            < 1e-14
    );
}

#[test]
fn table_family_enum_covers_ten_recipes() {
    let recipes = GInvRecipe::table_recipes(2, 1);
    assert_eq!(recipes.len(), 10);
    let labels: Vec<String> = recipes.iter().map(|r| r.label()).collect();
    assert!(labels.contains(&"ee".to_string()));
    assert!(labels.contains(&"tb_c(b=1)".to_string()));
    // Choices are distinguishable.
    assert!(matches!(
        recipes[0],
        GInvRecipe::TableFamily { t: TChoice::Ones, u: UChoice::Ones }
    ));
}
