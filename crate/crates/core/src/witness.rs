//! The positive map `Φ_{n,t,π}(A) = (n-t) Σ E_ii A E_ii + t Σ E_{i,π(i)} A E_{i,π(i)}† - A`,
//! its Choi matrix `W_{n,t,π} = Σ_ij E_ij ⊗ Φ(E_ij)`, and the decomposability
//! classification of that witness.
//!
//! The map is evaluated exactly as written, which gives
//! `Φ(E_ii) = (n-t-1) E_ii + t E_{π⁻¹(i),π⁻¹(i)}`. Cycle lengths and
//! involutivity are the same for `π` and `π⁻¹`, so the classification does
//! not depend on which of the two conventions is used.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::criteria;
use crate::error::{Error, Result};
use crate::matops::{
    c, hermitian_eigen, min_eigenvalue, partial_transpose, BipartiteMatrix, SquareComplexMatrix,
    Subsystem, PSD_TOL,
};
use crate::perm::Permutation;
use crate::states::{self, FamilyWeights};

/// Applies `Φ_{n,t,π}` to an `n×n` matrix. `t` is not range-checked here so
/// the map can be probed outside the witness regime.
pub fn phi_apply(
    n: usize,
    t: f64,
    p: &Permutation,
    a: &SquareComplexMatrix,
) -> Result<SquareComplexMatrix> {
    if a.dim() != n || p.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "map on M_{n} applied to a {}x{} matrix with a permutation of {}",
            a.dim(),
            a.dim(),
            p.n()
        )));
    }
    let mut out = a.as_matrix().map(|z| -z);
    for i in 0..n {
        let pi = p.apply0(i);
        out[(i, i)] += a.get(i, i) * (n as f64 - t) + a.get(pi, pi) * t;
    }
    SquareComplexMatrix::new(out)
}

/// `W = Σ_ij E_ij ⊗ Φ(E_ij)` for any `t`, without the witness-range check.
pub fn choi_of_map(n: usize, t: f64, p: &Permutation) -> Result<BipartiteMatrix> {
    if p.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation of {} elements for n={n}",
            p.n()
        )));
    }
    let mut w = BipartiteMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let img = phi_apply(n, t, p, &SquareComplexMatrix::unit(n, i, j))?;
            for k in 0..n {
                for l in 0..n {
                    let v = img.get(k, l);
                    if v != c(0.0) {
                        w.add_at(i, k, j, l, v);
                    }
                }
            }
        }
    }
    Ok(w)
}

/// `n / l(π)`, the largest `t` for which `Φ_{n,t,π}` is positive.
pub fn t_max(p: &Permutation) -> f64 {
    p.n() as f64 / p.cycles().length() as f64
}

/// `n / l(π)` as a reduced fraction, e.g. `"4/3"` or `"2"`.
pub fn t_max_fraction(p: &Permutation) -> String {
    let (mut a, mut b) = (p.n(), p.cycles().length());
    let g = gcd(a, b);
    a /= g;
    b /= g;
    if b == 1 {
        a.to_string()
    } else {
        format!("{a}/{b}")
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn check_parameter(n: usize, t: f64, p: &Permutation) -> Result<()> {
    if p.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation of {} elements for n={n}",
            p.n()
        )));
    }
    if p.is_identity() {
        return Err(Error::IdentityPermutation);
    }
    let tm = t_max(p);
    if !(t > 0.0 && t <= tm) {
        return Err(Error::ParameterOutOfRange {
            t,
            t_max: tm,
            t_max_display: t_max_fraction(p),
        });
    }
    Ok(())
}

/// A realized entanglement witness `W_{n,t,π}` with `π ≠ id` and
/// `0 < t ≤ n/l(π)`.
#[derive(Debug, Clone)]
pub struct WitnessSpec {
    n: usize,
    t: f64,
    perm: Permutation,
    choi: BipartiteMatrix,
    t_max: f64,
}

impl WitnessSpec {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn choi(&self) -> &BipartiteMatrix {
        &self.choi
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn verdict(&self) -> Verdict {
        if self.perm.cycles().is_involution() {
            Verdict::Decomposable
        } else {
            Verdict::Indecomposable
        }
    }
}

/// Builds `W_{n,t,π}`, refusing parameters outside the witness regime.
pub fn choi_matrix(n: usize, t: f64, p: &Permutation) -> Result<WitnessSpec> {
    check_parameter(n, t, p)?;
    let choi = choi_of_map(n, t, p)?;
    Ok(WitnessSpec {
        n,
        t,
        perm: p.clone(),
        choi,
        t_max: t_max(p),
    })
}

/// Product vector pair and the value `⟨a⊗b|W|a⊗b⟩` it attains.
#[derive(Debug, Clone)]
pub struct ProductMinimum {
    pub value: f64,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

fn product_expectation(w: &BipartiteMatrix, a: &[Complex64], b: &[Complex64]) -> f64 {
    let x: Vec<Complex64> = a
        .iter()
        .flat_map(|ai| b.iter().map(move |bk| ai * bk))
        .collect();
    let x = DVector::from_vec(x);
    (x.adjoint() * w.as_matrix() * &x)[(0, 0)].re
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    normalize(v)
}

fn normalize(v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Minimum of `Tr(W (|a⟩⟨a| ⊗ |b⟩⟨b|))` over `samples` unit product vectors.
/// The first sample is always `a = b = e₁`; the rest are complex Gaussian
/// vectors drawn from a ChaCha stream seeded with `seed`.
pub fn block_positivity_sample(
    w: &BipartiteMatrix,
    samples: usize,
    seed: u64,
) -> Result<ProductMinimum> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let (da, db) = (w.dim_a(), w.dim_b());
    let mut a = vec![c(0.0); da];
    let mut b = vec![c(0.0); db];
    a[0] = c(1.0);
    b[0] = c(1.0);
    let mut best = ProductMinimum {
        value: product_expectation(w, &a, &b),
        a,
        b,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 1..samples {
        let a = random_unit(&mut rng, da);
        let b = random_unit(&mut rng, db);
        let value = product_expectation(w, &a, &b);
        if value < best.value {
            best = ProductMinimum { value, a, b };
        }
    }
    Ok(best)
}

// ⟨a|W|a⟩ on the second factor
fn contract_first(w: &BipartiteMatrix, a: &[Complex64]) -> SquareComplexMatrix {
    let (da, db) = (w.dim_a(), w.dim_b());
    SquareComplexMatrix::from_fn(db, |k, l| {
        let mut acc = c(0.0);
        for i in 0..da {
            for j in 0..da {
                acc += a[i].conj() * a[j] * w.get(i, k, j, l);
            }
        }
        acc
    })
}

// ⟨b|W|b⟩ on the first factor
fn contract_second(w: &BipartiteMatrix, b: &[Complex64]) -> SquareComplexMatrix {
    let (da, db) = (w.dim_a(), w.dim_b());
    SquareComplexMatrix::from_fn(da, |i, j| {
        let mut acc = c(0.0);
        for k in 0..db {
            for l in 0..db {
                acc += b[k].conj() * b[l] * w.get(i, k, j, l);
            }
        }
        acc
    })
}

fn lowest(m: &SquareComplexMatrix) -> Result<(f64, Vec<Complex64>)> {
    let (vals, vecs) = hermitian_eigen(m)?;
    Ok((vals[0], vecs.column(0).iter().copied().collect()))
}

fn polish(w: &BipartiteMatrix, mut a: Vec<Complex64>, max_iter: usize) -> Result<ProductMinimum> {
    let (_, mut b) = lowest(&contract_first(w, &a))?;
    let mut value = product_expectation(w, &a, &b);
    for _ in 0..max_iter {
        let (va, na) = lowest(&contract_second(w, &b))?;
        a = na;
        let (vb, nb) = lowest(&contract_first(w, &a))?;
        b = nb;
        let improved = value - vb;
        value = vb.min(va);
        if improved.abs() < 1e-15 {
            break;
        }
    }
    let value = product_expectation(w, &a, &b);
    Ok(ProductMinimum { value, a, b })
}

/// Seeded local search for a product vector minimizing `⟨a⊗b|W|a⊗b⟩`.
///
/// Restart 0 polishes `start` itself; each further restart polishes
/// `start + g` for a complex Gaussian `g`. Polishing alternates exact
/// minimization over `b` (lowest eigenvector of `⟨a|W|a⟩`) and over `a`.
pub fn local_search_product_minimum(
    w: &BipartiteMatrix,
    start: &[Complex64],
    restarts: usize,
    seed: u64,
) -> Result<ProductMinimum> {
    if start.len() != w.dim_a() {
        return Err(Error::DimensionMismatch("start vector length".into()));
    }
    if start.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::InvalidArgument("start vector is zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = polish(w, normalize(start.to_vec()), 500)?;
    for _ in 0..restarts {
        let noise = random_unit(&mut rng, start.len());
        let a: Vec<Complex64> = normalize(start.to_vec())
            .iter()
            .zip(&noise)
            .map(|(s, g)| s + g)
            .collect();
        if a.iter().all(|z| z.norm() < 1e-12) {
            continue;
        }
        let cand = polish(w, normalize(a), 500)?;
        if cand.value < best.value {
            best = cand;
        }
    }
    Ok(best)
}

/// Unit vector spread uniformly over the first longest cycle of `p`.
pub fn uniform_on_longest_cycle(p: &Permutation) -> Vec<Complex64> {
    let cycle = &p.cycles().cycles()[0];
    let amp = 1.0 / (cycle.len() as f64).sqrt();
    let mut v = vec![c(0.0); p.n()];
    for &i in cycle {
        v[i - 1] = c(amp);
    }
    v
}

/// Classification of `W_{n,t,π}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Decomposable,
    Indecomposable,
    NotAWitness,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Decomposable => "decomposable",
            Verdict::Indecomposable => "indecomposable",
            Verdict::NotAWitness => "not_a_witness",
        }
    }
}

/// `not_a_witness` outside `0 < t ≤ n/l(π)`, otherwise `decomposable` iff
/// `π² = id`.
pub fn decomposability_verdict(n: usize, t: f64, p: &Permutation) -> Result<Verdict> {
    if p.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation of {} elements for n={n}",
            p.n()
        )));
    }
    if p.is_identity() {
        return Err(Error::IdentityPermutation);
    }
    if !(t > 0.0 && t <= t_max(p)) {
        return Ok(Verdict::NotAWitness);
    }
    Ok(if p.cycles().is_involution() {
        Verdict::Decomposable
    } else {
        Verdict::Indecomposable
    })
}

/// `W = Q₁ + Q₂` with `Q₁ ≥ 0` and `Q₂^{T₂} ≥ 0` for involutive `π`.
#[derive(Debug, Clone)]
pub struct DecompositionPair {
    pub q1: BipartiteMatrix,
    pub q2: BipartiteMatrix,
    /// One-based fixed points of `π`.
    pub fixed_points: Vec<usize>,
}

/// Numerical confirmation of the three defining predicates of a
/// [`DecompositionPair`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionCheck {
    pub sum_matches: bool,
    pub max_sum_deviation: f64,
    pub q1_min_eig: f64,
    pub q1_psd: bool,
    pub q2_pt_min_eig: f64,
    pub q2_pt_psd: bool,
}

impl DecompositionPair {
    pub fn verify(&self, choi: &BipartiteMatrix) -> Result<DecompositionCheck> {
        self.verify_with_tol(choi, PSD_TOL)
    }

    pub fn verify_with_tol(&self, choi: &BipartiteMatrix, tol: f64) -> Result<DecompositionCheck> {
        let sum = self.q1.add(&self.q2)?;
        let diff = sum.sub(choi)?;
        let max_sum_deviation = diff
            .as_matrix()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let q1_min_eig = min_eigenvalue(self.q1.matrix())?;
        let q2_pt_min_eig =
            min_eigenvalue(partial_transpose(&self.q2, Subsystem::Second).matrix())?;
        Ok(DecompositionCheck {
            sum_matches: max_sum_deviation <= 1e-14,
            max_sum_deviation,
            q1_min_eig,
            q1_psd: q1_min_eig >= -tol,
            q2_pt_min_eig,
            q2_pt_psd: q2_pt_min_eig >= -tol,
        })
    }
}

/// Explicit decomposition of `W_{n,t,π}` for an involution `π ≠ id`:
///
/// `Q₁ = Σ_{i∈F}(n-1)E_ii⊗E_ii + Σ_{i∉F}(n-1-t)E_ii⊗E_ii - Σ_{i≠j, π(i)≠j}E_ij⊗E_ij - Σ_{i∉F}(1-t)E_{iπ(i)}⊗E_{iπ(i)}`
///
/// `Q₂ = Σ_{i∉F} t E_{π(i)π(i)}⊗E_ii - Σ_{i∉F} t E_{iπ(i)}⊗E_{iπ(i)}`
///
/// where `F` is the fixed-point set.
pub fn decompose_involutive(n: usize, t: f64, p: &Permutation) -> Result<DecompositionPair> {
    check_parameter(n, t, p)?;
    if !p.cycles().is_involution() {
        return Err(Error::NotInvolutive);
    }
    let nf = n as f64;
    let mut q1 = BipartiteMatrix::zeros(n, n);
    let mut q2 = BipartiteMatrix::zeros(n, n);
    for i in 0..n {
        let pi = p.apply0(i);
        if pi == i {
            q1.add_at(i, i, i, i, c(nf - 1.0));
        } else {
            q1.add_at(i, i, i, i, c(nf - t - 1.0));
            q1.add_at(i, i, pi, pi, c(-(1.0 - t)));
            q2.add_at(pi, i, pi, i, c(t));
            q2.add_at(i, i, pi, pi, c(-t));
        }
        for j in 0..n {
            if j != i && j != pi {
                q1.add_at(i, i, j, j, c(-1.0));
            }
        }
    }
    Ok(DecompositionPair {
        q1,
        q2,
        fixed_points: p.cycles().fixed_points(),
    })
}

/// A PPT state on which `(Φ_{n,t,π} ⊗ I)` has a negative eigenvalue. Its
/// existence shows `W_{n,t,π}` is not decomposable.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub weights: FamilyWeights,
    pub state: crate::matops::DensityMatrix,
    pub ppt_min_eig: f64,
    pub map_min_eig: f64,
}

impl Certificate {
    pub fn is_valid(&self, tol: f64) -> bool {
        self.ppt_min_eig >= -tol && self.map_min_eig < -tol
    }
}

/// Builds the canonical PPT-entangled state for a non-involutive `π` and
/// evaluates both criteria on it.
pub fn indecomposability_certificate(n: usize, t: f64, p: &Permutation) -> Result<Certificate> {
    check_parameter(n, t, p)?;
    let weights = states::canonical_weights(n, p)?;
    let state = states::theorem21_state(n, p, &weights)?;
    let ppt_min_eig = criteria::ppt_criterion(&state)?;
    let map_min_eig = criteria::map_criterion(n, t, p, &state)?;
    Ok(Certificate {
        weights,
        state,
        ppt_min_eig,
        map_min_eig,
    })
}
