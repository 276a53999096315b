//! Quantum Markov chains generated by a sequence of random quantum maps,
//! truncated at a finite depth `N`.
//!
//! Level `n` is `Bₙ = A ⊗ C₁ ⊗ ⋯ ⊗ Cₙ` with state `μₙ = σ ⊗ ν₁ ⊗ ⋯ ⊗ νₙ` and
//! embedding `ψₙ = φ₁ ◇ ⋯ ◇ φₙ: A → Bₙ`. An element of `Bₙ` is viewed inside
//! `B_N` by tensoring with units on the trailing legs.

use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{Algebra, Element, State, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::maps::{densities_of_functional, LinearMap};
use crate::random::Fixtures;
use crate::rqm::{slice_map, Qfm, Rqm};

/// Default bound on `dim B_N`.
pub const DEFAULT_DIM_CAP: usize = 1 << 24;

/// Word count above which stationarity switches from full enumeration to sampling.
pub const EXHAUSTIVE_WORD_LIMIT: usize = 4096;

#[derive(Clone, Debug)]
pub struct ChainSpec {
    pub sigma: State,
    /// `(Cₙ, φₙ, νₙ)` for `n = 1..=N`, or a single entry when homogeneous.
    pub rqms: Vec<Rqm>,
    pub homogeneous: bool,
    pub depth: usize,
    pub dim_cap: usize,
}

impl ChainSpec {
    pub fn homogeneous(rqm: Rqm, sigma: State, depth: usize) -> Self {
        Self {
            sigma,
            rqms: vec![rqm],
            homogeneous: true,
            depth,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    /// A chain whose depth is the number of maps given.
    pub fn sequence(rqms: Vec<Rqm>, sigma: State) -> Self {
        Self {
            sigma,
            depth: rqms.len(),
            rqms,
            homogeneous: false,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    pub fn with_dim_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }
}

#[derive(Clone, Debug)]
pub struct TruncatedChain {
    sigma: State,
    rqms: Vec<Rqm>,
    homogeneous: bool,
    levels: Vec<Algebra>,
    mus: Vec<State>,
    psis: Vec<LinearMap>,
    /// Largest morphism-identity residual over the ψₙ.
    psi_residual: f64,
}

pub fn build_chain(spec: &ChainSpec) -> Result<TruncatedChain> {
    let a = spec.sigma.algebra().clone();
    if spec.depth == 0 {
        return Err(Error::InsufficientDepth("a chain needs depth at least 1".into()));
    }
    let rqms: Vec<Rqm> = if spec.homogeneous {
        let r = spec
            .rqms
            .first()
            .ok_or_else(|| Error::InvalidSpec("homogeneous chain without a random quantum map".into()))?;
        vec![r.clone(); spec.depth]
    } else {
        if spec.rqms.len() != spec.depth {
            return Err(Error::InvalidSpec(format!(
                "{} random quantum maps for depth {}",
                spec.rqms.len(),
                spec.depth
            )));
        }
        spec.rqms.clone()
    };
    for (i, r) in rqms.iter().enumerate() {
        if r.source() != &a || r.target() != &a {
            return Err(Error::Dimension(format!(
                "step {} goes from {:?} to {:?}, the chain lives on {:?}",
                i + 1,
                r.source(),
                r.target(),
                a
            )));
        }
    }
    let mut required = a.dim();
    for r in &rqms {
        required = required.saturating_mul(r.parameter().dim());
        if required > spec.dim_cap {
            return Err(Error::DimensionCap {
                required,
                allowed: spec.dim_cap,
            });
        }
    }

    let mut levels = vec![a.clone()];
    let mut mus = vec![spec.sigma.clone()];
    let mut psis = vec![LinearMap::identity(&a)];
    let mut family = Qfm::trivial(&a);
    let mut psi_residual: f64 = 0.0;
    for r in &rqms {
        // ψₙ = ψₙ₋₁ ◇ φₙ
        let next = family.diamond(r.qfm())?;
        let level = a.tensor(next.parameter());
        psi_residual = psi_residual.max(next.phi().morphism_residuals().max());
        levels.push(level);
        mus.push(mus.last().expect("nonempty").tensor(r.nu()));
        psis.push(next.phi().clone());
        family = next;
    }
    if psi_residual > DEFAULT_TOL {
        return Err(Error::NumericalFailure(format!(
            "chain embedding violates the morphism identities by {psi_residual:.3e}"
        )));
    }
    Ok(TruncatedChain {
        sigma: spec.sigma.clone(),
        rqms,
        homogeneous: spec.homogeneous,
        levels,
        mus,
        psis,
        psi_residual,
    })
}

/// Residuals of the Markov-property identities at one level.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovReport {
    pub level: usize,
    /// `max ‖F̄ₙ(xy) − x F̄ₙ(y)‖` for `x ∈ Bₙ ⊗ 1`, `y ∈ Bₙ₊₁`.
    pub module_property: f64,
    /// `max |μₙ(F̄ₙ(y)) − μₙ₊₁(y)|`.
    pub state_compatibility: f64,
    /// `max ‖F̄ₙ(ψₙ₊₁(a)) − ψₙ(a′)‖` with `a′ = (id ⊗ νₙ₊₁)φₙ₊₁(a)`.
    pub containment: f64,
    /// `max |μₙ₊₁(x ⊗ 1) − μₙ(x)|`.
    pub consistency: f64,
    /// Whether the module property was checked on all basis pairs.
    pub exhaustive: bool,
    pub tolerance: f64,
}

impl MarkovReport {
    pub fn max_residual(&self) -> f64 {
        self.module_property
            .max(self.state_compatibility)
            .max(self.containment)
            .max(self.consistency)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= self.tolerance
    }
}

#[derive(Clone, Debug)]
pub struct StationarityOptions {
    pub r_max: usize,
    pub l_max: usize,
    /// Random words per `(r, ℓ)` when the basis is too large to enumerate.
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for StationarityOptions {
    fn default() -> Self {
        Self {
            r_max: 2,
            l_max: 1,
            samples: 512,
            seed: 0,
            tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordViolation {
    pub times: Vec<usize>,
    /// Basis coordinates of `a₁, …, a_r` in `A`.
    pub word: Vec<usize>,
    pub shift: usize,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarityReport {
    pub max_violation: f64,
    /// `(r, ℓ, max violation)` for every word length and shift tried.
    pub by_length_and_shift: Vec<(usize, usize, f64)>,
    pub worst: Option<WordViolation>,
    pub words_checked: usize,
    pub exhaustive: bool,
    pub tolerance: f64,
}

impl StationarityReport {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tolerance
    }

    pub fn violation_at(&self, r: usize, shift: usize) -> Option<f64> {
        self.by_length_and_shift
            .iter()
            .find(|&&(rr, ll, _)| rr == r && ll == shift)
            .map(|&(_, _, v)| v)
    }
}

/// Result of the commuting-images test. A `true` value of `condition_holds`
/// is sufficient for semi-commutativity; `false` decides nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiCommutativityReport {
    /// `max ‖[ψₙ(e), ψₙ′(e′)]‖` over basis elements and `n ≠ n′ ≤ N`.
    pub max_commutator: f64,
    pub worst_levels: Option<(usize, usize)>,
    pub condition_holds: bool,
    pub tolerance: f64,
}

impl SemiCommutativityReport {
    pub const CONDITION: &'static str =
        "sufficient condition: images of A at distinct times commute (not a characterization)";
}

impl TruncatedChain {
    pub fn algebra(&self) -> &Algebra {
        self.sigma.algebra()
    }

    pub fn sigma(&self) -> &State {
        &self.sigma
    }

    pub fn depth(&self) -> usize {
        self.rqms.len()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// `(Cₙ, φₙ, νₙ)` for `1 ≤ n ≤ N`.
    pub fn step(&self, n: usize) -> Result<&Rqm> {
        if n == 0 || n > self.depth() {
            return Err(self.out_of_range(n));
        }
        Ok(&self.rqms[n - 1])
    }

    pub fn level(&self, n: usize) -> Result<&Algebra> {
        self.levels.get(n).ok_or_else(|| self.out_of_range(n))
    }

    pub fn mu(&self, n: usize) -> Result<&State> {
        self.mus.get(n).ok_or_else(|| self.out_of_range(n))
    }

    pub fn psi(&self, n: usize) -> Result<&LinearMap> {
        self.psis.get(n).ok_or_else(|| self.out_of_range(n))
    }

    pub fn psi_residual(&self) -> f64 {
        self.psi_residual
    }

    fn out_of_range(&self, level: usize) -> Error {
        Error::LevelOutOfRange {
            level,
            depth: self.depth(),
        }
    }

    fn trailing_unit(&self, from: usize, to: usize) -> Element {
        let mut u = Algebra::scalars().unit();
        for r in &self.rqms[from..to] {
            u = u.tensor(&r.parameter().unit());
        }
        u
    }

    /// `x ⊗ 1` with `x ∈ B_from`, placed in `B_to`.
    pub fn lift(&self, x: &Element, from: usize, to: usize) -> Result<Element> {
        let level = self.level(from)?;
        self.level(to)?;
        if x.algebra() != level {
            return Err(Error::Dimension(format!(
                "element of {:?} is not in level {from} ({:?})",
                x.algebra(),
                level
            )));
        }
        if to < from {
            return Err(Error::InvalidSpec(format!("cannot lift from level {from} down to {to}")));
        }
        if to == from {
            return Ok(x.clone());
        }
        // 1_ℂ ⊗ 1 has the coordinates of 1, and x ⊗ 1_ℂ those of x
        let unit = self.trailing_unit(from, to);
        let out = x.tensor(&unit);
        Element::new(self.level(to)?, out.into_blocks())
    }

    /// `ψₜ(a) ⊗ 1 ∈ B_N`.
    pub fn embed(&self, t: usize, a: &Element) -> Result<Element> {
        let x = self.psi(t)?.apply(a)?;
        self.lift(&x, t, self.depth())
    }

    /// `F̄ₙ: Bₙ₊₁ → Bₙ`, the slice of the last leg against `νₙ₊₁`.
    pub fn conditional_expectation(&self, n: usize) -> Result<LinearMap> {
        if n >= self.depth() {
            return Err(self.out_of_range(n + 1));
        }
        let f = slice_map(&self.levels[n], self.rqms[n].nu());
        debug_assert_eq!(f.domain(), &self.levels[n + 1]);
        Ok(f)
    }

    /// The marginal `μ ∘ ψₙ`, a state on `A`.
    pub fn marginal(&self, n: usize) -> Result<State> {
        let w = self.mu(n)?.functional();
        let pulled: CVector = self.psis[n].matrix().transpose() * w;
        Ok(State::new_unchecked(self.algebra(), densities_of_functional(self.algebra(), &pulled)))
    }

    /// Checks the Markov-property identities between levels `n` and `n + 1`.
    ///
    /// The module property is tested on all basis pairs when there are at
    /// most `pair_limit` of them, otherwise on `samples` random pairs of
    /// dense elements drawn from `seed`.
    pub fn verify_markov(&self, n: usize, pair_limit: usize, samples: usize, seed: u64, tol: f64) -> Result<MarkovReport> {
        let e = self.conditional_expectation(n)?;
        let (bn, bn1) = (&self.levels[n], &self.levels[n + 1]);
        let (mu_n, mu_n1) = (&self.mus[n], &self.mus[n + 1]);

        let mut consistency: f64 = 0.0;
        let lifted: Vec<Element> = (0..bn.dim())
            .map(|k| self.lift(&bn.basis_element(k), n, n + 1))
            .collect::<Result<_>>()?;
        for (k, x) in lifted.iter().enumerate() {
            let d = mu_n1.evaluate(x)? - mu_n.evaluate_basis(k);
            consistency = consistency.max(d.norm());
        }

        let mut state_compatibility: f64 = 0.0;
        let w_n = mu_n.functional();
        let w_n1 = mu_n1.functional();
        for y in 0..bn1.dim() {
            let ey = e.matrix().column(y);
            let lhs: Complex64 = ey.iter().zip(w_n.iter()).map(|(a, b)| a * b).sum();
            state_compatibility = state_compatibility.max((lhs - w_n1[y]).norm());
        }

        let mut module_property: f64 = 0.0;
        let exhaustive = bn.dim() * bn1.dim() <= pair_limit;
        let mut check = |x: &Element, y: &Element| -> Result<()> {
            let lhs = e.apply(&x.mul(y)?)?;
            let x_n = e.apply(x)?;
            let rhs = x_n.mul(&e.apply(y)?)?;
            module_property = module_property.max(lhs.distance(&rhs)?);
            Ok(())
        };
        if exhaustive {
            for x in &lifted {
                for yk in 0..bn1.dim() {
                    check(x, &bn1.basis_element(yk))?;
                }
            }
        } else {
            let mut fx = Fixtures::new(seed);
            for _ in 0..samples {
                let x = self.lift(&fx.random_element(bn), n, n + 1)?;
                let y = fx.random_element(bn1);
                check(&x, &y)?;
            }
        }

        let mut containment: f64 = 0.0;
        let a = self.algebra();
        let step = &self.rqms[n];
        let induced = step.induced_nfmo()?;
        for k in 0..a.dim() {
            let lhs = e.apply(&self.psis[n + 1].image(k))?;
            let a_prime = induced.image(k);
            let rhs = self.psis[n].apply(&a_prime)?;
            containment = containment.max(lhs.distance(&rhs)?);
        }

        Ok(MarkovReport {
            level: n,
            module_property,
            state_compatibility,
            containment,
            consistency,
            exhaustive,
            tolerance: tol,
        })
    }

    /// `μ(ψ_{t₁}(a₁) ⋯ ψ_{t_r}(a_r))`, evaluated in `B_N`.
    pub fn finite_dim_distribution(&self, times: &[usize], elements: &[Element]) -> Result<Complex64> {
        if times.len() != elements.len() {
            return Err(Error::Dimension(format!(
                "{} times for {} elements",
                times.len(),
                elements.len()
            )));
        }
        if let Some(&t) = times.iter().find(|&&t| t > self.depth()) {
            return Err(self.out_of_range(t));
        }
        let top = &self.levels[self.depth()];
        let mut word = top.unit();
        for (&t, a) in times.iter().zip(elements) {
            word = word.mul(&self.embed(t, a)?)?;
        }
        self.mus[self.depth()].evaluate(&word)
    }

    /// Tests `μ(ψ_{t₁}(a₁)⋯ψ_{t_r}(a_r)) = μ(ψ_{t₁+ℓ}(a₁)⋯ψ_{t_r+ℓ}(a_r))` for
    /// word lengths `1..=r_max`, shifts `1..=l_max` and all times with
    /// `tᵢ + ℓ ≤ N`.
    pub fn check_stationarity(&self, opts: &StationarityOptions) -> Result<StationarityReport> {
        if !self.homogeneous {
            return Err(Error::NotHomogeneous);
        }
        if opts.l_max == 0 || opts.r_max == 0 {
            return Err(Error::InvalidSpec("word length and shift must be at least 1".into()));
        }
        if opts.l_max > self.depth() {
            return Err(Error::InsufficientDepth(format!(
                "shift {} needs depth at least {}, chain has {}",
                opts.l_max,
                opts.l_max,
                self.depth()
            )));
        }
        let a = self.algebra();
        let depth = self.depth();
        let embedded: Vec<Vec<Element>> = (0..=depth)
            .map(|t| (0..a.dim()).map(|k| self.embed(t, &a.basis_element(k))).collect())
            .collect::<Result<_>>()?;
        let mu = &self.mus[depth];
        let eval = |times: &[usize], word: &[usize]| -> Result<Complex64> {
            let mut x = embedded[times[0]][word[0]].clone();
            for (&t, &k) in times.iter().zip(word).skip(1) {
                x = x.mul(&embedded[t][k])?;
            }
            mu.evaluate(&x)
        };

        let mut fx = Fixtures::new(opts.seed);
        let mut report = StationarityReport {
            max_violation: 0.0,
            by_length_and_shift: Vec::new(),
            worst: None,
            words_checked: 0,
            exhaustive: true,
            tolerance: opts.tolerance,
        };
        for r in 1..=opts.r_max {
            let word_count = a.dim().checked_pow(r as u32).unwrap_or(usize::MAX);
            let words: Vec<Vec<usize>> = if word_count <= EXHAUSTIVE_WORD_LIMIT {
                (0..word_count).map(|w| digits(w, a.dim(), r)).collect()
            } else {
                report.exhaustive = false;
                (0..opts.samples)
                    .map(|_| (0..r).map(|_| fx.rng().random_range(0..a.dim())).collect())
                    .collect()
            };
            for shift in 1..=opts.l_max {
                let span = depth - shift + 1;
                let tuples = span.pow(r as u32);
                let mut worst_here: f64 = 0.0;
                for ti in 0..tuples {
                    let times = digits(ti, span, r);
                    let shifted: Vec<usize> = times.iter().map(|t| t + shift).collect();
                    for word in &words {
                        let v = (eval(&times, word)? - eval(&shifted, word)?).norm();
                        report.words_checked += 1;
                        worst_here = worst_here.max(v);
                        if v > report.max_violation || report.worst.is_none() {
                            report.max_violation = report.max_violation.max(v);
                            report.worst = Some(WordViolation {
                                times: times.clone(),
                                word: word.clone(),
                                shift,
                                violation: v,
                            });
                        }
                    }
                }
                report.by_length_and_shift.push((r, shift, worst_here));
            }
        }
        Ok(report)
    }

    /// Whether `ψₙ(A)` and `ψₙ′(A)` commute in `B_N` for all `n ≠ n′`.
    pub fn check_semi_commutative(&self, tol: f64) -> Result<SemiCommutativityReport> {
        let a = self.algebra();
        let depth = self.depth();
        let embedded: Vec<Vec<Element>> = (0..=depth)
            .map(|t| (0..a.dim()).map(|k| self.embed(t, &a.basis_element(k))).collect())
            .collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        let mut worst_levels = None;
        for n in 0..=depth {
            for m in n + 1..=depth {
                for x in &embedded[n] {
                    for y in &embedded[m] {
                        let c = x.commutator(y)?.norm();
                        if c > worst {
                            worst = c;
                            worst_levels = Some((n, m));
                        }
                    }
                }
            }
        }
        Ok(SemiCommutativityReport {
            max_commutator: worst,
            worst_levels,
            condition_holds: worst <= tol,
            tolerance: tol,
        })
    }
}

/// Base-`base` digits of `x`, most significant first, padded to `len`.
fn digits(mut x: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = x % base;
        x /= base;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn random_homogeneous(seed: u64, a: &Algebra, cp: &Algebra, depth: usize) -> TruncatedChain {
        let mut fx = Fixtures::new(seed);
        let r = fx.random_rqm(a, a, cp).expect("representation exists");
        let sigma = fx.random_state(a);
        build_chain(&ChainSpec::homogeneous(r, sigma, depth)).unwrap()
    }

    #[test]
    fn trivial_chain_levels_are_a() {
        let a = Algebra::full(2);
        let ch = build_chain(&ChainSpec::homogeneous(Rqm::trivial(&a), State::maximally_mixed(&a), 3)).unwrap();
        for n in 0..=3 {
            assert_eq!(ch.level(n).unwrap(), &a);
            assert!(ch.psi(n).unwrap().max_deviation(&LinearMap::identity(&a)).unwrap() < 1e-15);
        }
    }

    #[test]
    fn block_bookkeeping() {
        let ch = random_homogeneous(1, &Algebra::full(2), &Algebra::commutative(2), 2);
        assert_eq!(ch.level(2).unwrap().blocks(), &[2, 2, 2, 2]);
        assert_eq!(ch.level(2).unwrap().dim(), 16);
    }

    #[test]
    fn dimension_cap_reports_sizes() {
        let a = Algebra::full(2);
        let mut fx = Fixtures::new(2);
        let r = fx.random_rqm(&a, &a, &Algebra::full(2)).unwrap();
        let spec = ChainSpec::homogeneous(r, State::maximally_mixed(&a), 4).with_dim_cap(1000);
        assert_eq!(
            build_chain(&spec).unwrap_err(),
            Error::DimensionCap {
                required: 1024,
                allowed: 1000
            }
        );
    }

    #[test]
    fn conditional_expectation_at_zero() {
        let ch = random_homogeneous(3, &Algebra::full(2), &Algebra::full(2), 2);
        let e0 = ch.conditional_expectation(0).unwrap();
        let nu = ch.step(1).unwrap().nu().clone();
        let mut fx = Fixtures::new(4);
        let a = fx.random_element(&Algebra::full(2));
        let cc = fx.random_element(&Algebra::full(2));
        let got = e0.apply(&a.tensor(&cc)).unwrap();
        let want = a.scale(nu.evaluate(&cc).unwrap());
        assert!(got.distance(&want).unwrap() < 1e-13);
        e0.validate_cp_unital(1e-10).unwrap();
        assert!(matches!(ch.conditional_expectation(2), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn markov_on_random_chain() {
        let ch = random_homogeneous(5, &Algebra::full(2), &Algebra::commutative(2), 2);
        for n in 0..2 {
            let rep = ch.verify_markov(n, 1 << 14, 16, 0, 1e-10).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert!(rep.exhaustive);
        }
    }

    #[test]
    fn distribution_normalization_and_sigma() {
        let ch = random_homogeneous(6, &Algebra::new(vec![1, 2]).unwrap(), &Algebra::commutative(2), 3);
        let a = ch.algebra().clone();
        let one = ch.finite_dim_distribution(&[3, 1, 2], &[a.unit(), a.unit(), a.unit()]).unwrap();
        assert!((one - c(1.0, 0.0)).norm() < 1e-13);
        let mut fx = Fixtures::new(7);
        let x = fx.random_element(&a);
        let got = ch.finite_dim_distribution(&[0], std::slice::from_ref(&x)).unwrap();
        assert!((got - ch.sigma().evaluate(&x).unwrap()).norm() < 1e-13);
        assert!(matches!(
            ch.finite_dim_distribution(&[4], &[x]),
            Err(Error::LevelOutOfRange { level: 4, depth: 3 })
        ));
    }

    #[test]
    fn marginals_follow_the_transition() {
        let ch = random_homogeneous(8, &Algebra::full(2), &Algebra::full(2), 3);
        let t = ch.step(1).unwrap().induced_transition().unwrap();
        let mut rho = ch.sigma().clone();
        for n in 0..=3 {
            assert!(ch.marginal(n).unwrap().distance(&rho).unwrap() < 1e-12);
            rho = t.apply(&rho).unwrap();
        }
    }

    #[test]
    fn trivial_chain_stationary_and_commutators() {
        let a = Algebra::full(2);
        let ch = build_chain(&ChainSpec::homogeneous(Rqm::trivial(&a), State::maximally_mixed(&a), 2)).unwrap();
        let rep = ch.check_stationarity(&StationarityOptions::default()).unwrap();
        assert_eq!(rep.max_violation, 0.0);
        let sc = ch.check_semi_commutative(1e-12).unwrap();
        assert!(!sc.condition_holds);
        let c2 = Algebra::commutative(2);
        let ch = build_chain(&ChainSpec::homogeneous(Rqm::trivial(&c2), State::maximally_mixed(&c2), 2)).unwrap();
        assert!(ch.check_semi_commutative(1e-12).unwrap().condition_holds);
    }

    #[test]
    fn stationarity_requires_homogeneity_and_depth() {
        let a = Algebra::full(2);
        let ch = build_chain(&ChainSpec::sequence(vec![Rqm::trivial(&a)], State::maximally_mixed(&a))).unwrap();
        assert!(matches!(
            ch.check_stationarity(&StationarityOptions::default()),
            Err(Error::NotHomogeneous)
        ));
        let ch = build_chain(&ChainSpec::homogeneous(Rqm::trivial(&a), State::maximally_mixed(&a), 1)).unwrap();
        let opts = StationarityOptions {
            l_max: 2,
            ..Default::default()
        };
        assert!(matches!(ch.check_stationarity(&opts), Err(Error::InsufficientDepth(_))));
    }

    #[test]
    fn digits_enumerate() {
        assert_eq!(digits(5, 2, 3), vec![1, 0, 1]);
        assert_eq!(digits(0, 4, 2), vec![0, 0]);
    }
}
