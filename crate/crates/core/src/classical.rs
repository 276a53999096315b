//! Finite classical counterparts: kernels, Feller–Markov operators on `ℂ^X`,
//! random maps `(Z, φ, ν)` and their lift to random quantum maps between
//! commutative algebras.

use crate::algebra::{check_probability_vector, Algebra, State, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, ONE};
use crate::maps::{LinearMap, MapKind};
use crate::rqm::{Qfm, Rqm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSpace {
    size: usize,
    labels: Option<Vec<String>>,
}

impl FiniteSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidSpec("a finite space needs at least one point".into()));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut s = Self::new(labels.len())?;
        s.labels = Some(labels);
        Ok(s)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => x.to_string(),
        }
    }

    /// `C(X) = ℂ^X`.
    pub fn algebra(&self) -> Algebra {
        Algebra::commutative(self.size)
    }
}

/// A row-stochastic matrix: row `x` is the distribution `𝒦x` on `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    rows: Vec<Vec<f64>>,
}

impl Kernel {
    pub fn new(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || width == 0 {
            return Err(Error::InvalidSpec("kernel needs at least one row and one column".into()));
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(Error::NotStochastic {
                    row,
                    reason: format!("{} entries, expected {width}", r.len()),
                });
            }
            if let Some((y, v)) = r.iter().enumerate().find(|(_, &v)| v < -tol || !v.is_finite()) {
                return Err(Error::NotStochastic {
                    row,
                    reason: format!("entry {y} is {v}"),
                });
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > tol {
                return Err(Error::NotStochastic {
                    row,
                    reason: format!("row sums to {s}"),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(|x| (0..n).map(|y| if x == y { 1.0 } else { 0.0 }).collect()).collect(),
        }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn source_size(&self) -> usize {
        self.rows.len()
    }

    pub fn target_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// `(K₁K₂)[x][w] = Σ_y K₁[x][y] K₂[y][w]`: first `self`, then `next`.
    pub fn then(&self, next: &Kernel) -> Result<Kernel> {
        if self.target_size() != next.source_size() {
            return Err(Error::Dimension(format!(
                "kernel into {} points followed by a kernel on {} points",
                self.target_size(),
                next.source_size()
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..next.target_size())
                    .map(|w| r.iter().enumerate().map(|(y, p)| p * next.rows[y][w]).sum())
                    .collect()
            })
            .collect();
        Ok(Kernel { rows })
    }

    /// `σK`.
    pub fn push(&self, sigma: &[f64]) -> Result<Vec<f64>> {
        if sigma.len() != self.source_size() {
            return Err(Error::Dimension(format!(
                "distribution on {} points pushed through a kernel on {}",
                sigma.len(),
                self.source_size()
            )));
        }
        Ok((0..self.target_size())
            .map(|y| sigma.iter().enumerate().map(|(x, p)| p * self.rows[x][y]).sum())
            .collect())
    }

    pub fn max_deviation(&self, other: &Kernel) -> f64 {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A random map `(Z, φ, ν)` with `φ: X × Z → Y` given as a table `φ[x][z]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalRandomMap {
    x: usize,
    y: usize,
    table: Vec<Vec<usize>>,
    nu: Vec<f64>,
}

impl ClassicalRandomMap {
    pub fn new(y: usize, table: Vec<Vec<usize>>, nu: Vec<f64>, tol: f64) -> Result<Self> {
        check_probability_vector(&nu, tol)?;
        if table.is_empty() || y == 0 {
            return Err(Error::InvalidSpec("random map needs nonempty X and Y".into()));
        }
        for (x, row) in table.iter().enumerate() {
            if row.len() != nu.len() {
                return Err(Error::InvalidSpec(format!(
                    "table row {x} has {} entries for |Z| = {}",
                    row.len(),
                    nu.len()
                )));
            }
            if let Some((z, v)) = row.iter().enumerate().find(|(_, &v)| v >= y) {
                return Err(Error::InvalidSpec(format!("φ({x}, {z}) = {v} is outside Y of size {y}")));
            }
        }
        Ok(Self {
            x: table.len(),
            y,
            table,
            nu,
        })
    }

    pub fn x_size(&self) -> usize {
        self.x
    }

    pub fn y_size(&self) -> usize {
        self.y
    }

    pub fn z_size(&self) -> usize {
        self.nu.len()
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn apply(&self, x: usize, z: usize) -> usize {
        self.table[x][z]
    }

    /// `(x, (z₁, z₂)) ↦ next(self(x, z₁), z₂)` with `ν₁ × ν₂`; the pair
    /// `(z₁, z₂)` has index `z₁·|Z₂| + z₂`.
    pub fn then(&self, next: &ClassicalRandomMap) -> Result<ClassicalRandomMap> {
        if self.y != next.x {
            return Err(Error::Dimension(format!(
                "map into {} points followed by a map on {} points",
                self.y, next.x
            )));
        }
        let (z1, z2) = (self.z_size(), next.z_size());
        let table = self
            .table
            .iter()
            .map(|row| {
                (0..z1 * z2)
                    .map(|z| next.table[row[z / z2]][z % z2])
                    .collect()
            })
            .collect();
        let nu = (0..z1 * z2).map(|z| self.nu[z / z2] * next.nu[z % z2]).collect();
        Ok(ClassicalRandomMap {
            x: self.x,
            y: next.y,
            table,
            nu,
        })
    }
}

/// `K[x][y] = ν{z : φ(x, z) = y}`.
pub fn kernel_of_random_map(m: &ClassicalRandomMap) -> Kernel {
    let rows = m
        .table
        .iter()
        .map(|row| {
            let mut r = vec![0.0; m.y];
            for (z, &y) in row.iter().enumerate() {
                r[y] += m.nu[z];
            }
            r
        })
        .collect();
    Kernel { rows }
}

/// `f ↦ (x ↦ Σ_y K[x][y] f(y))` as a map `ℂ^Y → ℂ^X`.
pub fn fmo_of_kernel(k: &Kernel) -> LinearMap {
    let (nx, ny) = (k.source_size(), k.target_size());
    let m = CMatrix::from_fn(nx, ny, |x, y| c(k.rows[x][y], 0.0));
    LinearMap::from_matrix(&Algebra::commutative(ny), &Algebra::commutative(nx), m)
        .expect("shape by construction")
        .assume_kind(MapKind::CpUnital)
}

/// `K[x][y] = F(δ_y)(x)`, the inverse of [`fmo_of_kernel`].
pub fn kernel_of_fmo(f: &LinearMap, tol: f64) -> Result<Kernel> {
    if !f.domain().is_commutative() || !f.codomain().is_commutative() {
        return Err(Error::UnsupportedShape(format!(
            "kernels correspond to maps between commutative algebras, got {:?} → {:?}",
            f.domain(),
            f.codomain()
        )));
    }
    let (nx, ny) = (f.codomain().dim(), f.domain().dim());
    let mut rows = vec![vec![0.0; ny]; nx];
    for (x, row) in rows.iter_mut().enumerate() {
        for (y, slot) in row.iter_mut().enumerate() {
            let v = f.matrix()[(x, y)];
            if v.im.abs() > tol {
                return Err(Error::NotStochastic {
                    row: x,
                    reason: format!("entry {y} has imaginary part {}", v.im),
                });
            }
            *slot = v.re;
        }
    }
    Kernel::new(rows, tol)
}

/// The morphism `ℂ^Y → ℂ^X ⊗ ℂ^Z`, `δ_y ↦ Σ_{φ(x,z) = y} δ_x ⊗ δ_z`, with `ν` on `ℂ^Z`.
pub fn lift_random_map(m: &ClassicalRandomMap) -> Rqm {
    let (nx, nz) = (m.x, m.z_size());
    let a = Algebra::commutative(nx);
    let cz = Algebra::commutative(nz);
    let mut phi = CMatrix::zeros(nx * nz, m.y);
    for x in 0..nx {
        for z in 0..nz {
            // ℂ^X ⊗ ℂ^Z has the point (x, z) at index x·|Z| + z
            phi[(x * nz + z, m.table[x][z])] = ONE;
        }
    }
    let phi = LinearMap::from_matrix(&Algebra::commutative(m.y), &a.tensor(&cz), phi)
        .expect("shape by construction")
        .assume_kind(MapKind::Morphism);
    let qfm = Qfm::new(&a, &cz, phi, DEFAULT_TOL).expect("codomain is X ⊗ Z");
    let nu = State::from_probabilities(&m.nu, DEFAULT_TOL).expect("validated on construction");
    Rqm::new(qfm, nu).expect("ν lives on ℂ^Z")
}

/// Distribution of `X_n` for the chain driven by `maps[0], …, maps[n−1]`
/// started from `sigma`: `σ K₁ ⋯ Kₙ`.
pub fn classical_chain_marginals(maps: &[ClassicalRandomMap], sigma: &[f64], n: usize) -> Result<Vec<f64>> {
    check_probability_vector(sigma, DEFAULT_TOL)?;
    if n > maps.len() {
        return Err(Error::LevelOutOfRange {
            level: n,
            depth: maps.len(),
        });
    }
    let mut dist = sigma.to_vec();
    for m in &maps[..n] {
        dist = kernel_of_random_map(m).push(&dist)?;
    }
    Ok(dist)
}

/// The Cesàro limit of `σKⁿ` from the uniform distribution, computed as
/// the limit of powers of the lazy chain `(I + K)/2` by repeated squaring.
pub fn stationary_distribution(k: &Kernel) -> Result<Vec<f64>> {
    let n = k.source_size();
    if k.target_size() != n {
        return Err(Error::Dimension("stationary distributions need a square kernel".into()));
    }
    let mut lazy = nalgebra::DMatrix::<f64>::from_fn(n, n, |x, y| {
        0.5 * k.rows[x][y] + if x == y { 0.5 } else { 0.0 }
    });
    // 2⁶⁴ steps; rows are renormalized so rounding cannot leak mass
    for _ in 0..64 {
        let mut next = &lazy * &lazy;
        for mut row in next.row_iter_mut() {
            let s = row.sum();
            row /= s;
        }
        let delta = (&next - &lazy).amax();
        lazy = next;
        if delta < 1e-15 {
            break;
        }
    }
    let uniform = nalgebra::RowDVector::from_element(n, 1.0 / n as f64);
    let out = uniform * lazy;
    Ok(out.iter().copied().collect())
}

/// A random map implementing `K` by quantile coupling: `Z` is the set of
/// intervals cut out of `[0, 1)` by all cumulative row sums, `ν` their
/// lengths, and `φ(x, z)` the `y` whose `x`-row quantile interval contains `z`.
pub fn implement_kernel(k: &Kernel) -> Result<ClassicalRandomMap> {
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    for r in &k.rows {
        let mut acc = 0.0;
        for &p in &r[..r.len() - 1] {
            acc += p;
            cuts.push(acc.clamp(0.0, 1.0));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let intervals: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect();
    let nu: Vec<f64> = intervals.iter().map(|(a, b)| b - a).collect();
    let table = k
        .rows
        .iter()
        .map(|r| {
            intervals
                .iter()
                .map(|&(lo, hi)| {
                    let mid = 0.5 * (lo + hi);
                    let mut acc = 0.0;
                    for (y, &p) in r.iter().enumerate() {
                        acc += p;
                        if mid < acc {
                            return y;
                        }
                    }
                    // rounding at the top of the last interval
                    r.iter().rposition(|&p| p > 0.0).unwrap_or(r.len() - 1)
                })
                .collect()
        })
        .collect();
    ClassicalRandomMap::new(k.target_size(), table, nu, DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_map() -> ClassicalRandomMap {
        ClassicalRandomMap::new(2, vec![vec![0, 1], vec![1, 0]], vec![0.5, 0.5], DEFAULT_TOL).unwrap()
    }

    #[test]
    fn xor_kernel_is_uniform() {
        let k = kernel_of_random_map(&xor_map());
        assert_eq!(k.rows(), &[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let f = lift_random_map(&xor_map()).induced_nfmo().unwrap();
        assert!(f.max_deviation(&fmo_of_kernel(&k)).unwrap() < 1e-15);
    }

    #[test]
    fn deterministic_maps() {
        let id = ClassicalRandomMap::new(3, vec![vec![0, 0], vec![1, 1], vec![2, 2]], vec![0.3, 0.7], DEFAULT_TOL)
            .unwrap();
        assert_eq!(kernel_of_random_map(&id), Kernel::identity(3));
        let point = ClassicalRandomMap::new(2, vec![vec![1, 0], vec![0, 0]], vec![1.0, 0.0], DEFAULT_TOL).unwrap();
        assert_eq!(kernel_of_random_map(&point).rows(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn kernel_validation_names_row() {
        let err = Kernel::new(vec![vec![0.5, 0.5], vec![0.7, 0.7]], 1e-12).unwrap_err();
        assert!(matches!(err, Error::NotStochastic { row: 1, .. }));
        let err = Kernel::new(vec![vec![1.5, -0.5]], 1e-12).unwrap_err();
        assert!(matches!(err, Error::NotStochastic { row: 0, .. }));
    }

    #[test]
    fn fmo_round_trip_and_unitality() {
        let k = Kernel::new(vec![vec![0.2, 0.3, 0.5], vec![1.0, 0.0, 0.0]], 1e-12).unwrap();
        let f = fmo_of_kernel(&k);
        f.clone().validate_cp_unital(1e-12).unwrap();
        assert_eq!(kernel_of_fmo(&f, 1e-12).unwrap(), k);
        let one = f.apply(&Algebra::commutative(3).unit()).unwrap();
        assert!(one.distance(&Algebra::commutative(2).unit()).unwrap() < 1e-15);
    }

    #[test]
    fn permutation_chain_permutes() {
        let shift = ClassicalRandomMap::new(3, vec![vec![1], vec![2], vec![0]], vec![1.0], DEFAULT_TOL).unwrap();
        let got = classical_chain_marginals(&[shift.clone(), shift], &[0.5, 0.3, 0.2], 2).unwrap();
        assert_eq!(got, vec![0.3, 0.2, 0.5]);
    }

    #[test]
    fn then_matches_kernel_product() {
        let m1 = xor_map();
        let m2 = ClassicalRandomMap::new(2, vec![vec![0, 0, 1], vec![1, 1, 1]], vec![0.2, 0.3, 0.5], DEFAULT_TOL)
            .unwrap();
        let k = kernel_of_random_map(&m1.then(&m2).unwrap());
        let want = kernel_of_random_map(&m1).then(&kernel_of_random_map(&m2)).unwrap();
        assert!(k.max_deviation(&want) < 1e-15);
    }

    #[test]
    fn quantile_coupling_reproduces_kernel() {
        let k = Kernel::new(vec![vec![0.25, 0.75], vec![0.5, 0.5], vec![0.0, 1.0]], 0.0).unwrap();
        let m = implement_kernel(&k).unwrap();
        assert_eq!(kernel_of_random_map(&m), k);
    }

    #[test]
    fn stationary_of_symmetric_doubly_stochastic() {
        let k = Kernel::new(vec![vec![0.3, 0.7], vec![0.7, 0.3]], 1e-12).unwrap();
        let s = stationary_distribution(&k).unwrap();
        assert!((s[0] - 0.5).abs() < 1e-12 && (s[1] - 0.5).abs() < 1e-12);
    }
}
