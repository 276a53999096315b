#![allow(dead_code)]

use num_complex::Complex64;
use rqmkit_core::classical::ClassicalRandomMap;
use rqmkit_core::linalg::CMatrix;
use rqmkit_core::{Algebra, Element, Fixtures, LinearMap, Rqm, State};

pub fn algebra(blocks: &[usize]) -> Algebra {
    Algebra::new(blocks.to_vec()).unwrap()
}

pub fn pick<'a, T>(fx: &mut Fixtures, xs: &'a [T]) -> &'a T {
    &xs[fx.index(xs.len())]
}

/// Draw a random quantum map `source → target` with a parameter algebra
/// from `params`, retrying shapes until a unital representation exists.
pub fn random_rqm_from(fx: &mut Fixtures, sources: &[Algebra], targets: &[Algebra], params: &[Algebra]) -> Rqm {
    for _ in 0..1000 {
        let b = pick(fx, sources).clone();
        let a = pick(fx, targets).clone();
        let c = pick(fx, params).clone();
        if let Some(r) = fx.random_rqm(&b, &a, &c) {
            return r;
        }
    }
    panic!("no admissible shape found");
}

pub fn random_rqm_between(fx: &mut Fixtures, b: &Algebra, a: &Algebra, params: &[Algebra]) -> Option<Rqm> {
    let mut order: Vec<usize> = (0..params.len()).collect();
    let start = fx.index(params.len());
    order.rotate_left(start);
    order.into_iter().find_map(|i| fx.random_rqm(b, a, &params[i]))
}

/// `(φ₁ ⊗ id)φ₂` assembled element by element from the basis expansion of
/// `φ₂(b)` in matrix units of `A₂ ⊗ C₂`.
pub fn diamond_oracle(outer: &LinearMap, inner: &LinearMap, c2: &Algebra) -> Vec<Element> {
    let a2 = outer.domain();
    let target = outer.codomain().tensor(c2);
    (0..inner.domain().dim())
        .map(|k| {
            let mut acc = target.zero();
            for (idx, v) in inner.image(k).coords().iter().enumerate() {
                if v.norm() == 0.0 {
                    continue;
                }
                let (a, c) = a2.split_tensor_coord(c2, idx);
                let term = outer.image(a).tensor(&c2.basis_element(c)).scale(*v);
                acc = acc.add(&term).unwrap();
            }
            acc
        })
        .collect()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Single-block view of an element of a single-block algebra.
pub fn only_block(x: &Element) -> CMatrix {
    assert_eq!(x.algebra().num_blocks(), 1);
    x.block(0).clone()
}

pub fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// `E[∏ fᵢ(X_{tᵢ})]` for the chain `X₀ ~ σ`, `X_n = φ_n(X_{n−1}, Z_n)`,
/// summed over every path `(x₀, z₁, …, z_T)`.
pub fn path_word_expectation(maps: &[ClassicalRandomMap], sigma: &[f64], times: &[usize], fs: &[Vec<f64>]) -> f64 {
    let horizon = times.iter().copied().max().unwrap_or(0);
    let mut total = 0.0;
    let mut zs = vec![0usize; horizon];
    loop {
        for (x0, &p0) in sigma.iter().enumerate() {
            let mut p = p0;
            let mut path = vec![x0];
            for (n, &z) in zs.iter().enumerate() {
                p *= maps[n].nu()[z];
                path.push(maps[n].apply(path[n], z));
            }
            let value: f64 = times.iter().zip(fs).map(|(&t, f)| f[path[t]]).product();
            total += p * value;
        }
        // next z tuple
        let mut i = 0;
        loop {
            if i == horizon {
                return total;
            }
            zs[i] += 1;
            if zs[i] < maps[i].z_size() {
                break;
            }
            zs[i] = 0;
            i += 1;
        }
    }
}

/// Distribution of `X_n` by exhaustive path enumeration.
pub fn path_marginal(maps: &[ClassicalRandomMap], sigma: &[f64], n: usize) -> Vec<f64> {
    let size = if n == 0 { sigma.len() } else { maps[n - 1].y_size() };
    (0..size)
        .map(|y| {
            let mut indicator = vec![0.0; size];
            indicator[y] = 1.0;
            path_word_expectation(maps, sigma, &[n], &[indicator])
        })
        .collect()
}

pub fn diagonal(state: &State) -> Vec<f64> {
    state.densities().iter().map(|m| m[(0, 0)].re).collect()
}

pub fn complex_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}
