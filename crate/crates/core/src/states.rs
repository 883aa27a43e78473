//! State families built from the cycle structure of a permutation.
//!
//! Every family member is a mixture
//! `ρ = q₀ ρ₀ + Σ_s Σ_j q_{s,j} ρ_{s,j} + q̃ ρ̃` where
//!
//! * `ρ₀ = |ω⟩⟨ω|`, `|ω⟩ = n^{-1/2} Σ_i |ii⟩`,
//! * `ρ_{s,j} = l_s^{-1} Σ_{i∈F_s} |i⟩⟨i| ⊗ |π^j(i)⟩⟨π^j(i)|` for each
//!   nontrivial cycle `F_s` and `1 ≤ j < l_s`,
//! * `ρ̃` is uniform over every ordered pair `(i, j)` whose indices lie in
//!   different cycles (fixed points count as cycles), normalized by
//!   `n² - Σ_s l_s²`.
//!
//! Cycles are indexed in canonical order (see [`crate::perm`]), so `s = 1`
//! is always a longest cycle.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matops::{
    c, hermitian_eigenvalues, BipartiteMatrix, DensityMatrix, SquareComplexMatrix,
};
use crate::perm::Permutation;

const WEIGHT_SUM_TOL: f64 = 1e-12;
const FLAG_RTOL: f64 = 1e-12;

/// Mixture weights for one permutation together with the three
/// feasibility conditions:
///
/// * detection: `q_{s,l_s-1} ≤ (l_s/n) q₀` for every nontrivial cycle,
///   strictly for at least one;
/// * pairing: `q_{s,l_s-i} q_{s,i} ≥ (l_s/n)² q₀²` for all `s, i`;
/// * cross weight: `q̃ ≥ ((n² - Σ_s l_s²)/n) q₀`.
///
/// The last two together are equivalent to the state being PPT.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyWeights {
    pub q0: f64,
    /// `q[s-1][j-1] = q_{s,j}` over nontrivial cycles in canonical order.
    pub q: Vec<Vec<f64>>,
    pub q_tilde: f64,
    pub satisfies_21: bool,
    pub satisfies_22: bool,
    pub satisfies_23: bool,
    #[serde(skip)]
    n: usize,
    #[serde(skip)]
    cycle_lengths: Vec<usize>,
    #[serde(skip)]
    cross_pairs: usize,
}

fn geq(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - FLAG_RTOL * rhs.abs().max(f64::MIN_POSITIVE)
}

fn strictly_less(lhs: f64, rhs: f64) -> bool {
    lhs < rhs - FLAG_RTOL * rhs.abs()
}

impl FamilyWeights {
    /// Validates the shape (one row per nontrivial cycle, `l_s - 1` entries
    /// each) and sign of the weights, then evaluates the feasibility flags.
    /// Normalization is checked when a state is built.
    pub fn new(p: &Permutation, q0: f64, q: Vec<Vec<f64>>, q_tilde: f64) -> Result<Self> {
        let d = p.cycles();
        let lengths: Vec<usize> = d.lengths()[..d.nontrivial_count()].to_vec();
        if q.len() != lengths.len() {
            return Err(Error::InvalidWeights(format!(
                "expected weights for {} nontrivial cycles, got {}",
                lengths.len(),
                q.len()
            )));
        }
        for (s, (row, &l)) in q.iter().zip(&lengths).enumerate() {
            if row.len() != l - 1 {
                return Err(Error::InvalidWeights(format!(
                    "cycle {} has length {l} and needs {} weights, got {}",
                    s + 1,
                    l - 1,
                    row.len()
                )));
            }
        }
        let all = std::iter::once(q0)
            .chain(q.iter().flatten().copied())
            .chain(std::iter::once(q_tilde));
        for v in all {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidWeights(format!(
                    "weight {v} is negative or not finite"
                )));
            }
        }
        let n = p.n();
        let nf = n as f64;
        let cross_pairs = d.cross_pair_count();

        let mut all_le = true;
        let mut some_lt = false;
        for (row, &l) in q.iter().zip(&lengths) {
            let bound = l as f64 / nf * q0;
            let last = row[l - 2];
            all_le &= geq(bound, last);
            some_lt |= strictly_less(last, bound);
        }
        let satisfies_21 = all_le && some_lt;

        let satisfies_22 = q.iter().zip(&lengths).all(|(row, &l)| {
            let bound = (l as f64 / nf).powi(2) * q0 * q0;
            (1..l).all(|i| geq(row[l - i - 1] * row[i - 1], bound))
        });
        let satisfies_23 = geq(q_tilde, cross_pairs as f64 / nf * q0);

        Ok(Self {
            q0,
            q,
            q_tilde,
            satisfies_21,
            satisfies_22,
            satisfies_23,
            n,
            cycle_lengths: lengths,
            cross_pairs,
        })
    }

    pub fn total(&self) -> f64 {
        self.q0 + self.q.iter().flatten().sum::<f64>() + self.q_tilde
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= WEIGHT_SUM_TOL
    }

    /// Predicted PPT-ness, from the pairing and cross-weight conditions.
    pub fn predicts_ppt(&self) -> bool {
        self.satisfies_22 && self.satisfies_23
    }

    fn matches(&self, n: usize, p: &Permutation) -> Result<()> {
        let d = p.cycles();
        if self.n != n || p.n() != n || self.cycle_lengths != d.lengths()[..d.nontrivial_count()] {
            return Err(Error::InvalidWeights(
                "weights were built for a different cycle structure".into(),
            ));
        }
        Ok(())
    }
}

/// `|ω⟩⟨ω|` with `|ω⟩ = n^{-1/2} Σ_i |ii⟩`.
pub fn omega_state(n: usize) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "n must be at least 2, got {n}"
        )));
    }
    Ok(into_density(omega_matrix(n)))
}

fn omega_matrix(n: usize) -> BipartiteMatrix {
    let v = 1.0 / n as f64;
    BipartiteMatrix::from_fn(
        n,
        n,
        |i, k, j, l| if i == k && j == l { c(v) } else { c(0.0) },
    )
}

// constituent states are density matrices by construction
fn into_density(b: BipartiteMatrix) -> DensityMatrix {
    DensityMatrix::new(b).expect("constructed state is a density matrix")
}

fn diagonal_state(n: usize, support: &[(usize, usize)]) -> BipartiteMatrix {
    let w = 1.0 / support.len() as f64;
    let mut m = BipartiteMatrix::zeros(n, n);
    for &(i, k) in support {
        m.add_at(i, k, i, k, c(w));
    }
    m
}

fn cycle_support(p: &Permutation, s: usize, j: usize) -> Result<Vec<(usize, usize)>> {
    let d = p.cycles();
    let m = d.nontrivial_count();
    if s < 1 || s > m {
        return Err(Error::BadCycle {
            cycle: s,
            available: m,
        });
    }
    let cycle = &d.cycles()[s - 1];
    if j < 1 || j >= cycle.len() {
        return Err(Error::BadPower {
            j,
            max: cycle.len() - 1,
        });
    }
    cycle
        .iter()
        .map(|&i| Ok((i - 1, p.power_image(j, i)? - 1)))
        .collect()
}

/// `ρ_{s,j}` for the `s`-th nontrivial cycle (one-based, canonical order).
pub fn cycle_state(p: &Permutation, s: usize, j: usize) -> Result<DensityMatrix> {
    let support = cycle_support(p, s, j)?;
    Ok(into_density(diagonal_state(p.n(), &support)))
}

fn cross_support(p: &Permutation) -> Vec<(usize, usize)> {
    let n = p.n();
    let mut owner = vec![0; n];
    for (s, cycle) in p.cycles().cycles().iter().enumerate() {
        for &i in cycle {
            owner[i - 1] = s;
        }
    }
    let mut support = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if owner[i] != owner[j] {
                support.push((i, j));
            }
        }
    }
    support
}

/// `ρ̃`, uniform over ordered cross-cycle pairs.
pub fn cross_block_state(p: &Permutation) -> Result<DensityMatrix> {
    if p.cycles().cycle_count() < 2 {
        return Err(Error::SingleCycle);
    }
    Ok(into_density(diagonal_state(p.n(), &cross_support(p))))
}

/// Weights that satisfy all three feasibility conditions.
///
/// For each nontrivial cycle of length `l`: the first `⌊(l-1)/2⌋` weights
/// equal `q₀`, the middle one (even `l` only) is `(l/n) q₀`, the rest are
/// `(l/n)² q₀`. The cross weight sits at its lower bound and `q₀` follows
/// from normalization.
///
/// When a single cycle covers all of `{1..n}` that recipe makes every
/// ratio 1 and the detection condition cannot hold strictly, so the cycle
/// instead gets `q_{1,1} = 2 q₀`, `q_{1,l-1} = q₀/2` and `q₀` elsewhere.
pub fn canonical_weights(n: usize, p: &Permutation) -> Result<FamilyWeights> {
    if p.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation of {} elements for n={n}",
            p.n()
        )));
    }
    if p.is_identity() {
        return Err(Error::IdentityPermutation);
    }
    let d = p.cycles();
    if d.is_involution() {
        return Err(Error::Involutive);
    }
    let nf = n as f64;
    let mut ratios: Vec<Vec<f64>> = Vec::new();
    for cycle in d.nontrivial() {
        let l = cycle.len();
        let r = l as f64 / nf;
        let row: Vec<f64> = if l == n {
            (1..l)
                .map(|j| match j {
                    1 => 2.0,
                    _ if j == l - 1 => 0.5,
                    _ => 1.0,
                })
                .collect()
        } else if l % 2 == 0 {
            (1..l)
                .map(|j| match j.cmp(&(l / 2)) {
                    std::cmp::Ordering::Less => 1.0,
                    std::cmp::Ordering::Equal => r,
                    std::cmp::Ordering::Greater => r * r,
                })
                .collect()
        } else {
            (1..l)
                .map(|j| if j <= (l - 1) / 2 { 1.0 } else { r * r })
                .collect()
        };
        ratios.push(row);
    }
    let cross_ratio = d.cross_pair_count() as f64 / nf;
    let total = 1.0 + ratios.iter().flatten().sum::<f64>() + cross_ratio;
    let q0 = 1.0 / total;
    let q = ratios
        .into_iter()
        .map(|row| row.into_iter().map(|v| v * q0).collect())
        .collect();
    FamilyWeights::new(p, q0, q, cross_ratio * q0)
}

/// Assembles the mixture for explicit weights.
pub fn theorem21_state(n: usize, p: &Permutation, w: &FamilyWeights) -> Result<DensityMatrix> {
    w.matches(n, p)?;
    if !w.is_normalized() {
        return Err(Error::InvalidWeights(format!(
            "weights sum to {}, not 1",
            w.total()
        )));
    }
    let single_cycle = p.cycles().cycle_count() == 1;
    if single_cycle && w.q_tilde > 0.0 {
        return Err(Error::InvalidWeights(
            "a single-cycle permutation has no cross-cycle pairs, so q_tilde must be 0".into(),
        ));
    }
    let mut rho = omega_matrix(n).scale(w.q0);
    for (s, row) in w.q.iter().enumerate() {
        for (j, &q) in row.iter().enumerate() {
            let support = cycle_support(p, s + 1, j + 1)?;
            rho = rho.add(&diagonal_state(n, &support).scale(q))?;
        }
    }
    if !single_cycle {
        rho = rho.add(&diagonal_state(n, &cross_support(p)).scale(w.q_tilde))?;
    }
    DensityMatrix::new(rho)
}

/// Weights of the one-parameter family on `n = 4`, `π = (2,3,1,4)`:
/// `q₀ = 1/(x+21)`, `q_{1,1} = q̃ = 10 q₀`, `q_{1,2} = x q₀`.
pub fn rho_x_weights(x: f64) -> Result<FamilyWeights> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::BadFamilyParameter(x, "x >= 0"));
    }
    let q0 = 1.0 / (x + 21.0);
    FamilyWeights::new(
        &rho_x_permutation(),
        q0,
        vec![vec![10.0 * q0, x * q0]],
        10.0 * q0,
    )
}

pub fn rho_x_permutation() -> Permutation {
    Permutation::new(vec![2, 3, 1, 4]).expect("valid permutation")
}

/// The family member `ρ_x`, `x ≥ 0`.
pub fn rho_x(x: f64) -> Result<DensityMatrix> {
    theorem21_state(4, &rho_x_permutation(), &rho_x_weights(x)?)
}

/// Closed-form spectrum of `(Φ_{n,t,π} ⊗ I)(ρ)` for a family member.
///
/// The image splits into an `n×n` block `A` on `span{|ii⟩}` and scalar
/// blocks: for cycle `s` and `1 ≤ j < l_s` the value
/// `((n-1-t)/l_s) q_{s,j} + t q_{s,j-1}/l_s` (with `t q₀/n` in place of the
/// second term when `j = 1`) with multiplicity `l_s`, and the cross-cycle
/// value `(n-1) q̃ / N` with multiplicity `N = n² - Σ_s l_s²`.
#[derive(Debug, Clone)]
pub struct PredictedSpectrum {
    pub a_matrix: SquareComplexMatrix,
    pub diagonal_blocks: Vec<(f64, usize)>,
}

impl PredictedSpectrum {
    pub fn total_dimension(&self) -> usize {
        self.a_matrix.dim() + self.diagonal_blocks.iter().map(|b| b.1).sum::<usize>()
    }

    /// Eigenvalues of `A` together with the scalar blocks, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut all = hermitian_eigenvalues(&self.a_matrix)?;
        for &(v, mult) in &self.diagonal_blocks {
            all.extend(std::iter::repeat_n(v, mult));
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }
}

pub fn predicted_map_image_spectrum(
    n: usize,
    t: f64,
    p: &Permutation,
    w: &FamilyWeights,
) -> Result<PredictedSpectrum> {
    w.matches(n, p)?;
    if !w.is_normalized() {
        return Err(Error::InvalidWeights(format!(
            "weights sum to {}, not 1",
            w.total()
        )));
    }
    let d = p.cycles();
    if d.cycle_count() == 1 && w.q_tilde > 0.0 {
        return Err(Error::InvalidWeights(
            "a single-cycle permutation has no cross-cycle pairs, so q_tilde must be 0".into(),
        ));
    }
    let nf = n as f64;
    let q0 = w.q0;

    let mut diag = vec![(nf - 1.0) / nf * q0; n];
    for (cycle, row) in d.nontrivial().iter().zip(&w.q) {
        let l = cycle.len() as f64;
        let ti = (nf - 1.0 - t) / nf * q0 + t / l * row[cycle.len() - 2];
        for &i in cycle {
            diag[i - 1] = ti;
        }
    }
    let a = DMatrix::from_fn(n, n, |i, j| if i == j { c(diag[i]) } else { c(-q0 / nf) });
    let a_matrix = SquareComplexMatrix::new(a)?;

    let mut diagonal_blocks = Vec::new();
    for (cycle, row) in d.nontrivial().iter().zip(&w.q) {
        let len = cycle.len();
        let l = len as f64;
        for j in 1..len {
            let carried = if j == 1 {
                t / nf * q0
            } else {
                t / l * row[j - 2]
            };
            diagonal_blocks.push(((nf - 1.0 - t) / l * row[j - 1] + carried, len));
        }
    }
    let cross = d.cross_pair_count();
    if cross > 0 {
        diagonal_blocks.push(((nf - 1.0) * w.q_tilde / cross as f64, cross));
    }
    Ok(PredictedSpectrum {
        a_matrix,
        diagonal_blocks,
    })
}
