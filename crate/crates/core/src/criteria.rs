//! Entanglement detectors and their scores.
//!
//! Every score is oriented so that a single threshold decides detection:
//! witness value and minimal eigenvalues fire when negative, the
//! realignment norm fires above one and the covariance slack fires when
//! positive.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matops::{
    c, hermitian_eigenvalues, kron, min_eigenvalue, partial_trace, partial_transpose, realign,
    trace_norm, trace_of_product, BipartiteMatrix, DensityMatrix, SquareComplexMatrix, Subsystem,
};
use crate::perm::Permutation;
use crate::witness::{phi_apply, t_max, t_max_fraction, WitnessSpec};

/// Shared verdict threshold.
pub const DEFAULT_TOL: f64 = 1e-10;

/// `Tr(W ρ)`. Fails if the trace has a non-negligible imaginary part.
pub fn witness_expectation(w: &WitnessSpec, rho: &DensityMatrix) -> Result<f64> {
    let (wa, wb) = (w.choi().dim_a(), w.choi().dim_b());
    if wa != rho.dim_a() || wb != rho.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "witness on {wa}⊗{wb}, state on {}⊗{}",
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    let v = trace_of_product(w.choi().as_matrix(), rho.state().as_matrix())?;
    if v.im.abs() > 1e-12 {
        return Err(Error::ComplexExpectation(v.im));
    }
    Ok(v.re)
}

/// `(Φ_{n,t,π} ⊗ I)(ρ)` with the map acting on the first factor.
pub fn map_image(
    n: usize,
    t: f64,
    p: &Permutation,
    rho: &BipartiteMatrix,
) -> Result<BipartiteMatrix> {
    if rho.dim_a() != n {
        return Err(Error::DimensionMismatch(format!(
            "map on M_{n} but first factor has dimension {}",
            rho.dim_a()
        )));
    }
    let db = rho.dim_b();
    let mut out = BipartiteMatrix::zeros(n, db);
    for k in 0..db {
        for l in 0..db {
            let slice = SquareComplexMatrix::from_fn(n, |i, j| rho.get(i, k, j, l));
            let img = phi_apply(n, t, p, &slice)?;
            for i in 0..n {
                for j in 0..n {
                    out.add_at(i, k, j, l, img.get(i, j));
                }
            }
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of `(Φ_{n,t,π} ⊗ I)(ρ)`.
pub fn map_criterion(n: usize, t: f64, p: &Permutation, rho: &DensityMatrix) -> Result<f64> {
    if p.is_identity() {
        return Err(Error::IdentityPermutation);
    }
    let tm = t_max(p);
    if p.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation of {} elements for n={n}",
            p.n()
        )));
    }
    if !(t > 0.0 && t <= tm) {
        return Err(Error::ParameterOutOfRange {
            t,
            t_max: tm,
            t_max_display: t_max_fraction(p),
        });
    }
    min_eigenvalue(map_image(n, t, p, rho.state())?.matrix())
}

/// Smallest eigenvalue of `ρ^{T₂}`.
pub fn ppt_criterion(rho: &DensityMatrix) -> Result<f64> {
    min_eigenvalue(partial_transpose(rho.state(), Subsystem::Second).matrix())
}

/// `‖R(ρ)‖₁`.
pub fn ccnr_criterion(rho: &DensityMatrix) -> f64 {
    trace_norm(&realign(rho.state()))
}

/// `‖R(ρ - ρ_A⊗ρ_B)‖₁ - √((1 - Tr ρ_A²)(1 - Tr ρ_B²))`; positive values
/// certify entanglement.
pub fn covariance_realignment_criterion(rho: &DensityMatrix) -> Result<f64> {
    let (rho_a, rho_b) = reduced_states(rho);
    let product = kron(&rho_a, &rho_b);
    let centered = rho.state().sub(&product)?;
    let lhs = trace_norm(&realign(&centered));
    Ok(lhs - linear_entropy(&rho_a).max(0.0).sqrt() * linear_entropy(&rho_b).max(0.0).sqrt())
}

pub fn reduced_states(rho: &DensityMatrix) -> (SquareComplexMatrix, SquareComplexMatrix) {
    (
        partial_trace(rho.state(), Subsystem::First),
        partial_trace(rho.state(), Subsystem::Second),
    )
}

/// `1 - Tr ρ²`.
pub fn linear_entropy(rho: &SquareComplexMatrix) -> f64 {
    1.0 - rho.as_matrix().iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Closed-form `‖R(ρ_x)‖₁` for `x ∈ [0, 2]`:
/// `(36 + 2√(16x² - 172x + 1489) + √y₊ + √y₋) / (12(21 + x))` with
/// `y± = 8x² + 172x + 2129 ± √((16x²+172x+1320)(172x+520) + 300(8x+92)² + (8x²+400)²)`.
pub fn closed_form_ccnr_rho_x(x: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&x) {
        return Err(Error::BadFamilyParameter(x, "[0, 2]"));
    }
    let x2 = x * x;
    let inner = (16.0 * x2 + 172.0 * x + 1320.0) * (172.0 * x + 520.0)
        + 300.0 * (8.0 * x + 92.0).powi(2)
        + (8.0 * x2 + 400.0).powi(2);
    let base = 8.0 * x2 + 172.0 * x + 2129.0;
    let (y_plus, y_minus) = (base + inner.sqrt(), base - inner.sqrt());
    Ok(
        (36.0 + 2.0 * (16.0 * x2 - 172.0 * x + 1489.0).sqrt() + y_plus.sqrt() + y_minus.sqrt())
            / (12.0 * (21.0 + x)),
    )
}

/// Matrix with diagonal `t_i` and every off-diagonal entry `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaMatrixParams {
    pub t_values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LemmaCheck {
    pub matrix: SquareComplexMatrix,
    pub min_eigenvalue: f64,
    /// `0 ≤ t_i ≤ n-1` for all `i` and `t_{i₀} < n-1` for some `i₀`.
    pub hypothesis_met: bool,
}

pub fn lemma22_check(params: &LemmaMatrixParams) -> Result<LemmaCheck> {
    let t = &params.t_values;
    let n = t.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 diagonal values, got {n}"
        )));
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "diagonal values must be finite".into(),
        ));
    }
    let top = (n - 1) as f64;
    let matrix = SquareComplexMatrix::new(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(t[i])
        } else {
            c(-1.0)
        }
    }))?;
    let min = min_eigenvalue(&matrix)?;
    let hypothesis_met = t.iter().all(|&v| (0.0..=top).contains(&v)) && t.iter().any(|&v| v < top);
    if hypothesis_met && min >= 0.0 {
        return Err(Error::LemmaViolated(min));
    }
    Ok(LemmaCheck {
        matrix,
        min_eigenvalue: min,
        hypothesis_met,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    Entangled,
    Inconclusive,
}

impl Detection {
    fn from(fired: bool) -> Self {
        if fired {
            Detection::Entangled
        } else {
            Detection::Inconclusive
        }
    }

    pub fn is_entangled(self) -> bool {
        self == Detection::Entangled
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub witness: Detection,
    pub map: Detection,
    pub ppt: Detection,
    pub ccnr: Detection,
    pub cov: Detection,
}

impl Verdicts {
    pub fn any_entangled(&self) -> bool {
        [self.witness, self.map, self.ppt, self.ccnr, self.cov]
            .iter()
            .any(|d| d.is_entangled())
    }
}

/// Scores of all criteria on one state. Witness and map scores need a
/// witness and are absent otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub witness_value: Option<f64>,
    pub map_min_eig: Option<f64>,
    pub ppt_min_eig: f64,
    pub ccnr_norm: f64,
    pub cov_slack: f64,
    pub tol: f64,
    pub verdicts: Verdicts,
}

pub fn full_report(rho: &DensityMatrix, w: Option<&WitnessSpec>) -> Result<CriterionReport> {
    full_report_with_tol(rho, w, DEFAULT_TOL)
}

pub fn full_report_with_tol(
    rho: &DensityMatrix,
    w: Option<&WitnessSpec>,
    tol: f64,
) -> Result<CriterionReport> {
    let (witness_value, map_min_eig) = match w {
        Some(w) => (
            Some(witness_expectation(w, rho)?),
            Some(map_criterion(w.n(), w.t(), w.perm(), rho)?),
        ),
        None => (None, None),
    };
    let ppt_min_eig = ppt_criterion(rho)?;
    let ccnr_norm = ccnr_criterion(rho);
    let cov_slack = covariance_realignment_criterion(rho)?;
    let verdicts = Verdicts {
        witness: Detection::from(witness_value.is_some_and(|v| v < -tol)),
        map: Detection::from(map_min_eig.is_some_and(|v| v < -tol)),
        ppt: Detection::from(ppt_min_eig < -tol),
        ccnr: Detection::from(ccnr_norm > 1.0 + tol),
        cov: Detection::from(cov_slack > tol),
    };
    Ok(CriterionReport {
        witness_value,
        map_min_eig,
        ppt_min_eig,
        ccnr_norm,
        cov_slack,
        tol,
        verdicts,
    })
}

/// Full spectrum of `(Φ ⊗ I)(ρ)`, ascending.
pub fn map_image_spectrum(
    n: usize,
    t: f64,
    p: &Permutation,
    rho: &DensityMatrix,
) -> Result<Vec<f64>> {
    hermitian_eigenvalues(map_image(n, t, p, rho.state())?.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::{kron, SquareComplexMatrix};
    use crate::perm::parse_permutation;
    use crate::states::{omega_state, rho_x};
    use crate::witness::choi_matrix;

    fn perm(s: &str) -> Permutation {
        parse_permutation(s).unwrap()
    }

    fn product_basis_state(n: usize, i: usize, k: usize) -> DensityMatrix {
        DensityMatrix::new(kron(
            &SquareComplexMatrix::unit(n, i, i),
            &SquareComplexMatrix::unit(n, k, k),
        ))
        .unwrap()
    }

    #[test]
    fn witness_expectation_examples() {
        let w = choi_matrix(2, 1.0, &perm("2,1")).unwrap();
        assert_eq!(
            witness_expectation(&w, &product_basis_state(2, 0, 0)).unwrap(),
            0.0
        );
        let bell = omega_state(2).unwrap();
        assert!((witness_expectation(&w, &bell).unwrap() + 1.0).abs() < 1e-15);
        let other = DensityMatrix::maximally_mixed(3, 3);
        assert!(witness_expectation(&w, &other).is_err());
    }

    #[test]
    fn map_criterion_on_maximally_mixed_is_nonnegative() {
        let rho = DensityMatrix::maximally_mixed(4, 4);
        let v = map_criterion(4, 1.0, &perm("2,3,1,4"), &rho).unwrap();
        assert!(v >= -1e-12);
        assert!(map_criterion(4, 2.0, &perm("2,3,1,4"), &rho).is_err());
    }

    #[test]
    fn map_criterion_example_value() {
        use crate::states::{theorem21_state, FamilyWeights};
        let p = perm("2,3,1,4");
        let w = FamilyWeights::new(
            &p,
            16.0 / 65.0,
            vec![vec![16.0 / 65.0, 9.0 / 65.0]],
            24.0 / 65.0,
        )
        .unwrap();
        let rho = theorem21_state(4, &p, &w).unwrap();
        let v = map_criterion(4, 1.0, &p, &rho).unwrap();
        assert!((v - (15.0 - 273f64.sqrt()) / 130.0).abs() < 1e-9);
    }

    #[test]
    fn ppt_and_ccnr_on_bell_state() {
        let bell = omega_state(2).unwrap();
        assert!((ppt_criterion(&bell).unwrap() + 0.5).abs() < 1e-12);
        assert!((ccnr_criterion(&bell) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ccnr_on_maximally_mixed_qubits() {
        assert!((ccnr_criterion(&DensityMatrix::maximally_mixed(2, 2)) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn covariance_on_product_of_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(4, 4);
        assert!((covariance_realignment_criterion(&rho).unwrap() + 0.75).abs() < 1e-14);
    }

    #[test]
    fn closed_form_values() {
        let at0 = (36.0 + 2.0 * 1489f64.sqrt() + 63.0 + 17.0) / 252.0;
        assert!((closed_form_ccnr_rho_x(0.0).unwrap() - at0).abs() < 1e-15);
        assert!((at0 - 0.7665680).abs() < 1e-7);
        let inner = (16.0 + 172.0 + 1320.0) * 692.0 + 300.0 * 100f64.powi(2) + 408f64.powi(2);
        let at1 = (36.0
            + 2.0 * 1333f64.sqrt()
            + (2309.0 + inner.sqrt()).sqrt()
            + (2309.0 - inner.sqrt()).sqrt())
            / 264.0;
        assert!((closed_form_ccnr_rho_x(1.0).unwrap() - at1).abs() < 1e-15);
        assert!((ccnr_criterion(&rho_x(1.0).unwrap()) - at1).abs() < 1e-8);
        assert!(closed_form_ccnr_rho_x(2.5).is_err());
        assert!(closed_form_ccnr_rho_x(-0.1).is_err());
    }

    #[test]
    fn lemma_examples() {
        let r = lemma22_check(&LemmaMatrixParams {
            t_values: vec![0.0, 0.0],
        })
        .unwrap();
        assert!(r.hypothesis_met);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-14);

        let r = lemma22_check(&LemmaMatrixParams {
            t_values: vec![2.0, 2.0, 1.0],
        })
        .unwrap();
        assert!(r.hypothesis_met && r.min_eigenvalue < 0.0);

        let r = lemma22_check(&LemmaMatrixParams {
            t_values: vec![2.0, 2.0, 2.0],
        })
        .unwrap();
        assert!(!r.hypothesis_met);
        assert!(r.min_eigenvalue.abs() < 1e-10);

        let r = lemma22_check(&LemmaMatrixParams {
            t_values: vec![5.0, 5.0, 5.0],
        })
        .unwrap();
        assert!(!r.hypothesis_met);
        assert!(lemma22_check(&LemmaMatrixParams {
            t_values: vec![1.0]
        })
        .is_err());
    }

    #[test]
    fn report_on_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(4, 4);
        let w = choi_matrix(4, 1.0, &perm("2,3,1,4")).unwrap();
        for report in [
            full_report(&rho, None).unwrap(),
            full_report(&rho, Some(&w)).unwrap(),
        ] {
            assert!(!report.verdicts.any_entangled(), "{report:?}");
        }
        let r = full_report(&rho, None).unwrap();
        assert!(r.witness_value.is_none() && r.map_min_eig.is_none());
    }

    #[test]
    fn report_on_rho_x_above_ppt_boundary() {
        let w = choi_matrix(4, 1.0, &perm("2,3,1,4")).unwrap();
        let r = full_report(&rho_x(0.1).unwrap(), Some(&w)).unwrap();
        assert_eq!(r.verdicts.map, Detection::Entangled);
        assert_eq!(r.verdicts.ppt, Detection::Inconclusive);
        assert_eq!(r.verdicts.ccnr, Detection::Inconclusive);
        assert_eq!(r.verdicts.cov, Detection::Inconclusive);
    }

    fn random_unitary(seed: u64, d: usize) -> crate::matops::CMatrix {
        use num_complex::Complex64;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        use rand_distr::StandardNormal;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = crate::matops::CMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        g.qr().q()
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(48))]

        #[test]
        fn scores_are_local_unitary_invariant(x in 0.0f64..2.0, seed in proptest::prelude::any::<u64>()) {
            let rho = rho_x(x).unwrap();
            let u = random_unitary(seed, 4);
            let v = random_unitary(seed ^ 0x9e37_79b9, 4);
            let moved = DensityMatrix::new(rho.state().local_conjugate(&u, &v).unwrap()).unwrap();
            proptest::prop_assert!((ccnr_criterion(&rho) - ccnr_criterion(&moved)).abs() < 1e-10);
            proptest::prop_assert!((ppt_criterion(&rho).unwrap() - ppt_criterion(&moved).unwrap()).abs() < 1e-10);
            let cov = covariance_realignment_criterion(&rho).unwrap();
            proptest::prop_assert!((cov - covariance_realignment_criterion(&moved).unwrap()).abs() < 1e-10);
        }

        #[test]
        fn rho_x_detection_regions(x in 0.0f64..2.0) {
            let w = choi_matrix(4, 1.0, &perm("2,3,1,4")).unwrap();
            let r = full_report(&rho_x(x).unwrap(), Some(&w)).unwrap();
            proptest::prop_assert_eq!(r.verdicts.ccnr, Detection::Inconclusive);
            proptest::prop_assert_eq!(r.verdicts.cov, Detection::Inconclusive);
            let boundary = 9.0 / 160.0;
            if x < boundary - 1e-6 {
                proptest::prop_assert_eq!(r.verdicts.ppt, Detection::Entangled);
            } else if x > boundary + 1e-6 {
                proptest::prop_assert_eq!(r.verdicts.ppt, Detection::Inconclusive);
            }
            if x < 0.75 - 1e-6 {
                proptest::prop_assert_eq!(r.verdicts.map, Detection::Entangled);
            } else if x > 0.75 + 1e-6 {
                proptest::prop_assert_eq!(r.verdicts.map, Detection::Inconclusive);
            }
        }

        #[test]
        fn ccnr_matches_closed_form(x in 0.0f64..=2.0) {
            let direct = ccnr_criterion(&rho_x(x).unwrap());
            proptest::prop_assert!((direct - closed_form_ccnr_rho_x(x).unwrap()).abs() <= 1e-8);
        }

        #[test]
        fn lemma_holds_on_random_diagonals(
            t in proptest::collection::vec(0.0f64..=1.0, 2..=7),
            pick in proptest::prelude::any::<proptest::sample::Index>(),
        ) {
            let n = t.len();
            let top = (n - 1) as f64;
            let mut t: Vec<f64> = t.into_iter().map(|v| v * top).collect();
            let i0 = pick.index(n);
            t[i0] = t[i0].min(top * 0.999);
            let r = lemma22_check(&LemmaMatrixParams { t_values: t }).unwrap();
            proptest::prop_assert!(r.hypothesis_met && r.min_eigenvalue < 0.0);
        }

        #[test]
        fn pure_products_are_never_detected(seed in proptest::prelude::any::<u64>(), n in 2usize..=4) {
            let a = random_unitary(seed, n).column(0).into_owned();
            let b = random_unitary(seed.wrapping_add(1), n).column(0).into_owned();
            let psi: Vec<_> = a.iter().flat_map(|ai| b.iter().map(move |bk| ai * bk)).collect();
            let rho = DensityMatrix::pure(n, n, &psi).unwrap();
            let p = Permutation::cyclic_shift(n).unwrap();
            let w = choi_matrix(n, crate::witness::t_max(&p), &p).unwrap();
            let r = full_report(&rho, Some(&w)).unwrap();
            proptest::prop_assert!(!r.verdicts.any_entangled(), "{:?}", r);
        }
    }
}
