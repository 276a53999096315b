//! Cross-checks against independent dense computations.

mod common;

use num_complex::Complex64;
use rqmkit_core::classical::lift_random_map;
use rqmkit_core::invariant::transition_matrix;
use rqmkit_core::linalg::{c, CMatrix};
use rqmkit_core::*;

use common::*;

fn matrix_unit(n: usize, p: usize, q: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(p, q)] = c(1.0, 0.0);
    m
}

/// `ψₙ(a)` for single-block algebras, built as `Σ_{pq} ψₙ₋₁(e_pq) ⊗ X_pq`
/// where `φ(a) = Σ e_pq ⊗ X_pq` in the Kronecker layout of `A ⊗ C`.
fn dense_psi(phi: &LinearMap, a_size: usize, c_size: usize, n: usize, a: &CMatrix) -> CMatrix {
    if n == 0 {
        return a.clone();
    }
    let image = only_block(&phi.apply(&Element::from_matrix(a.clone()).unwrap()).unwrap());
    let mut out: Option<CMatrix> = None;
    for p in 0..a_size {
        for q in 0..a_size {
            let x = image.view((p * c_size, q * c_size), (c_size, c_size)).clone_owned();
            let term = kron(&dense_psi(phi, a_size, c_size, n - 1, &matrix_unit(a_size, p, q)), &x);
            out = Some(match out {
                Some(acc) => acc + term,
                None => term,
            });
        }
    }
    out.unwrap()
}

fn full_chain(seed: u64, depth: usize) -> (Rqm, State, TruncatedChain) {
    let mut fx = Fixtures::new(seed);
    let a = Algebra::full(2);
    let r = fx.random_rqm(&a, &a, &Algebra::full(2)).unwrap();
    let sigma = fx.random_state(&a);
    let chain = build_chain(&ChainSpec::homogeneous(r.clone(), sigma.clone(), depth)).unwrap();
    (r, sigma, chain)
}

#[test]
fn state_pairing_is_the_trace() {
    let mut fx = Fixtures::new(3);
    let a = Algebra::full(3);
    let s = fx.random_state(&a);
    let x = fx.random_element(&a);
    let want = (&s.densities()[0] * x.block(0)).trace();
    assert!(complex_close(s.evaluate(&x).unwrap(), want, 1e-12));
}

#[test]
fn psi_matches_dense_recursion() {
    for seed in 0..5 {
        let (r, _, chain) = full_chain(seed, 3);
        for n in 0..=3 {
            let psi = chain.psi(n).unwrap();
            for p in 0..2 {
                for q in 0..2 {
                    let e = matrix_unit(2, p, q);
                    let want = dense_psi(r.phi(), 2, 2, n, &e);
                    let got = only_block(&psi.apply(&Element::from_matrix(e).unwrap()).unwrap());
                    assert!((got - want).norm() < 1e-12, "seed {seed}, n = {n}, e_{p}{q}");
                }
            }
        }
    }
}

#[test]
fn word_distributions_match_dense_traces() {
    let depth = 3;
    for seed in 0..5 {
        let (r, sigma, chain) = full_chain(100 + seed, depth);
        let mut fx = Fixtures::new(200 + seed);
        // ρ_N = σ ⊗ ν ⊗ ⋯ ⊗ ν
        let mut rho = sigma.densities()[0].clone();
        for _ in 0..depth {
            rho = kron(&rho, &r.nu().densities()[0]);
        }
        for r_len in 1..=3 {
            let times: Vec<usize> = (0..r_len).map(|_| fx.index(depth + 1)).collect();
            let elems: Vec<Element> = (0..r_len).map(|_| fx.random_element(&Algebra::full(2))).collect();
            let mut word = CMatrix::identity(rho.nrows(), rho.ncols());
            for (&t, x) in times.iter().zip(&elems) {
                let psi = dense_psi(r.phi(), 2, 2, t, x.block(0));
                let pad = 1usize << (depth - t);
                word *= kron(&psi, &CMatrix::identity(pad, pad));
            }
            let want = (&rho * word).trace();
            let got = chain.finite_dim_distribution(&times, &elems).unwrap();
            assert!(complex_close(got, want, 1e-10), "seed {seed}, times {times:?}: {got} vs {want}");
        }
    }
}

/// `dim ker(F − I)` from the singular values of the Heisenberg-picture matrix.
fn dense_fixed_dim(f: &LinearMap) -> usize {
    let n = f.matrix().nrows();
    let m = f.matrix() - CMatrix::identity(n, n);
    m.svd(false, false).singular_values.iter().filter(|&&s| s < 1e-8).count()
}

#[test]
fn fixed_dimension_matches_heisenberg_picture() {
    let params = [Algebra::scalars(), Algebra::commutative(2), Algebra::full(2)];
    let algebras = [Algebra::full(2), Algebra::commutative(3), algebra(&[1, 2])];
    let mut fx = Fixtures::new(31);
    let mut seen = 0;
    for a in &algebras {
        for _ in 0..6 {
            let Some(r) = random_rqm_between(&mut fx, a, a, &params) else { continue };
            let rep = invariant_states(&r).unwrap();
            assert_eq!(rep.fixed_dim, dense_fixed_dim(&r.induced_nfmo().unwrap()), "{a:?}");
            assert_eq!(transition_matrix(&r).unwrap().nrows(), a.dim());
            seen += 1;
        }
    }
    assert!(seen >= 10);
    // identity: everything is fixed
    for a in &algebras {
        let r = Rqm::trivial(a);
        assert_eq!(invariant_states(&r).unwrap().fixed_dim, dense_fixed_dim(&r.induced_nfmo().unwrap()));
    }
}

#[test]
fn canonical_state_matches_power_iteration() {
    let mut fx = Fixtures::new(41);
    let a = Algebra::full(2);
    let mut checked = 0;
    for _ in 0..10 {
        let r = fx.random_rqm(&a, &a, &Algebra::full(2)).unwrap();
        let rep = invariant_states(&r).unwrap();
        if rep.fixed_dim != 1 {
            continue;
        }
        let mut rho = State::maximally_mixed(&a);
        for _ in 0..2000 {
            rho = r.transition_apply(&rho).unwrap();
        }
        // a unique invariant state with a peripheral eigenvalue would not converge
        let next = r.transition_apply(&rho).unwrap();
        if next.trace_distance(&rho).unwrap() > 1e-12 {
            continue;
        }
        assert!(rho.trace_distance(&rep.canonical).unwrap() < 1e-9);
        checked += 1;
    }
    assert!(checked >= 5, "only {checked} primitive maps drawn");
}

#[test]
fn semicommutativity_examples() {
    // every ψₙ is the same copy of M₂: distinct times do not commute
    let trivial = build_chain(&ChainSpec::homogeneous(Rqm::trivial(&Algebra::full(2)), State::maximally_mixed(&Algebra::full(2)), 2)).unwrap();
    let rep = trivial.check_semi_commutative(1e-9).unwrap();
    assert!(!rep.condition_holds);
    assert!(rep.max_commutator > 0.5);

    let c2 = Algebra::commutative(2);
    let commutative = build_chain(&ChainSpec::homogeneous(Rqm::trivial(&c2), State::maximally_mixed(&c2), 2)).unwrap();
    assert!(commutative.check_semi_commutative(1e-9).unwrap().condition_holds);

    let mut fx = Fixtures::new(5);
    let m = fx.random_classical_map(3, 3, 2);
    let classical = build_chain(&ChainSpec::homogeneous(
        lift_random_map(&m),
        State::maximally_mixed(&Algebra::commutative(3)),
        3,
    ))
    .unwrap();
    assert!(classical.check_semi_commutative(1e-9).unwrap().condition_holds);
}

#[test]
fn classical_words_match_path_enumeration() {
    for seed in 0..10 {
        let mut fx = Fixtures::new(500 + seed);
        let nx = 2 + fx.index(3);
        let maps: Vec<_> = (0..3)
            .map(|_| {
                let nz = 1 + fx.index(3);
                fx.random_classical_map(nx, nx, nz)
            })
            .collect();
        let sigma = fx.random_probability(nx);
        let chain = build_chain(&ChainSpec::sequence(
            maps.iter().map(lift_random_map).collect(),
            State::from_probabilities(&sigma, 1e-12).unwrap(),
        ))
        .unwrap();
        let times = [fx.index(4), fx.index(4), fx.index(4)];
        let fs: Vec<Vec<f64>> = (0..3).map(|_| (0..nx).map(|_| fx.uniform()).collect()).collect();
        let elems: Vec<Element> = fs
            .iter()
            .map(|f| Element::from_function(&f.iter().map(|&v| c(v, 0.0)).collect::<Vec<Complex64>>()).unwrap())
            .collect();
        let got = chain.finite_dim_distribution(&times, &elems).unwrap();
        let want = path_word_expectation(&maps, &sigma, &times, &fs);
        assert!(complex_close(got, c(want, 0.0), 1e-12), "seed {seed}");
    }
}

#[test]
fn diamond_matches_elementwise_expansion() {
    let mut fx = Fixtures::new(61);
    let algs = [Algebra::full(2), algebra(&[1, 1]), algebra(&[1, 2])];
    let params = [Algebra::scalars(), Algebra::commutative(2), Algebra::full(2)];
    for _ in 0..20 {
        let inner = random_rqm_from(&mut fx, &algs, &algs, &params);
        let a = algs[fx.index(3)].clone();
        let Some(outer) = random_rqm_between(&mut fx, inner.target(), &a, &params) else {
            continue;
        };
        let composed = outer.qfm().diamond(inner.qfm()).unwrap();
        let want = diamond_oracle(outer.phi(), inner.phi(), inner.parameter());
        for (k, w) in want.iter().enumerate() {
            assert!(composed.phi().image(k).distance(w).unwrap() < 1e-12);
        }
    }
}
