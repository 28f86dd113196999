//! Measurement operators induced on the field by reading out the atom.
//!
//! Projecting the atom after the protocol unitary leaves the field under a
//! three-element generalized measurement. This module extracts the Kraus
//! operators from the unitary, forms the positive elements, evaluates
//! outcome statistics for a two-state ensemble along independent routes
//! that must agree, and conditions the field state on an observed outcome.
//!
//! The discrimination operating point draws its parameters from
//! [`SystemParams::unambiguous`]: there outcome `b` never fires for the
//! second input state and outcome `c` never fires for the first, so both
//! identify the preparation with certainty, while outcome `a` is
//! inconclusive.

use crate::dynamics::{
    analytic_columns, joint_index, protocol_unitary, AtomLevel, SystemParams, FOCK_LEVELS,
    JOINT_DIM,
};
use crate::error::{Error, Result};
use crate::linalg::{OperatorMatrix, StateVector, C64};
use crate::tol;

/// Kraus operators of the field measurement, indexed by the atom level
/// found in the readout. Each acts on the photon-number space.
#[derive(Clone, Debug)]
pub struct KrausSet {
    m_a: OperatorMatrix,
    m_b: OperatorMatrix,
    m_c: OperatorMatrix,
}

impl KrausSet {
    pub fn element(&self, level: AtomLevel) -> &OperatorMatrix {
        match level {
            AtomLevel::A => &self.m_a,
            AtomLevel::B => &self.m_b,
            AtomLevel::C => &self.m_c,
        }
    }

    /// Largest entrywise deviation of the completeness sum from the
    /// identity.
    pub fn completeness_defect(&self) -> f64 {
        let sum = AtomLevel::ALL
            .iter()
            .map(|&level| {
                let m = self.element(level);
                m.adjoint().matmul(m).expect("square factors")
            })
            .reduce(|acc, e| acc.add(&e).expect("equal shapes"))
            .expect("three elements");
        sum.max_norm_diff(&OperatorMatrix::identity(FOCK_LEVELS))
            .expect("equal shapes")
    }
}

/// Reads the Kraus operators out of a joint unitary: entry `(n, n')` of the
/// element for `level` is the joint matrix element taking `(A, n')` to
/// `(level, n)`, since the atom always enters the protocol in its lowest
/// level.
///
/// Returns `CompletenessViolation` when the three operators fail to resolve
/// the identity within [`tol::COMPLETENESS_TOL`], which catches inputs that
/// are not unitary on the atom-ground sector.
pub fn extract_kraus(u: &OperatorMatrix) -> Result<KrausSet> {
    if u.rows() != JOINT_DIM || u.cols() != JOINT_DIM {
        return Err(Error::ShapeMismatch {
            op: "extract_kraus",
            lhs: format!("{}x{}", u.rows(), u.cols()),
            rhs: format!("{}x{}", JOINT_DIM, JOINT_DIM),
        });
    }
    let block = |level: AtomLevel| {
        OperatorMatrix::from_fn(FOCK_LEVELS, FOCK_LEVELS, |n, n_in| {
            u[(joint_index(level, n), joint_index(AtomLevel::A, n_in))]
        })
    };
    let set = KrausSet {
        m_a: block(AtomLevel::A),
        m_b: block(AtomLevel::B),
        m_c: block(AtomLevel::C),
    };
    let defect = set.completeness_defect();
    if defect > tol::COMPLETENESS_TOL {
        return Err(Error::CompletenessViolation {
            defect,
            tol: tol::COMPLETENESS_TOL,
        });
    }
    Ok(set)
}

/// Positive measurement elements, indexed like [`KrausSet`].
///
/// A full set resolves the identity on the whole photon-number space. A
/// set restricted to the vacuum/one-photon sector instead resolves the
/// identity on that sector, carries zero entries in the two-photon row and
/// column, and declares the per-outcome weight it dropped there in
/// `dropped_two_weight`; those weights sum to 1 because the restriction
/// discards exactly the two-photon input, which the ensemble never
/// populates.
#[derive(Clone, Debug)]
pub struct PovmSet {
    e_a: OperatorMatrix,
    e_b: OperatorMatrix,
    e_c: OperatorMatrix,
    dropped_two_weight: Option<[f64; 3]>,
}

impl PovmSet {
    pub fn element(&self, level: AtomLevel) -> &OperatorMatrix {
        match level {
            AtomLevel::A => &self.e_a,
            AtomLevel::B => &self.e_b,
            AtomLevel::C => &self.e_c,
        }
    }

    /// Per-outcome two-photon weight a restricted set dropped, in `(a, b,
    /// c)` order; `None` for a full set.
    pub fn dropped_two_weight(&self) -> Option<[f64; 3]> {
        self.dropped_two_weight
    }

    fn element_sum(&self) -> OperatorMatrix {
        self.e_a
            .add(&self.e_b)
            .and_then(|s| s.add(&self.e_c))
            .expect("equal shapes")
    }

    /// Largest deviation from the completeness relation. For a full set
    /// this compares the element sum against the identity. For a restricted
    /// set it compares the vacuum/one-photon block against the sector
    /// identity, requires the two-photon row and column of the sum to
    /// vanish, and requires the declared dropped weights to sum to 1.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self.element_sum();
        match self.dropped_two_weight {
            None => sum
                .max_norm_diff(&OperatorMatrix::identity(FOCK_LEVELS))
                .expect("equal shapes"),
            Some(weights) => {
                let mut defect = 0.0f64;
                for i in 0..FOCK_LEVELS {
                    for j in 0..FOCK_LEVELS {
                        let expected = if i == j && i < 2 { C64::ONE } else { C64::ZERO };
                        defect = defect.max((sum[(i, j)] - expected).norm());
                    }
                }
                let total: f64 = weights.iter().sum();
                defect.max((total - 1.0).abs())
            }
        }
    }

    /// Largest hermiticity defect over the three elements.
    pub fn hermiticity_defect(&self) -> f64 {
        AtomLevel::ALL
            .iter()
            .map(|&level| {
                self.element(level)
                    .hermiticity_defect()
                    .expect("square elements")
            })
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over the three elements; positivity holds when
    /// this is no more negative than [`tol::PSD_TOL`].
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut smallest = f64::INFINITY;
        for level in AtomLevel::ALL {
            smallest = smallest.min(self.element(level).min_eigenvalue()?);
        }
        Ok(smallest)
    }

    pub fn is_psd(&self) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol::PSD_TOL)
    }
}

/// Forms the positive elements from the Kraus operators.
pub fn povm_from_kraus(kraus: &KrausSet) -> PovmSet {
    let square = |level: AtomLevel| {
        let m = kraus.element(level);
        m.adjoint().matmul(m).expect("square factors")
    };
    PovmSet {
        e_a: square(AtomLevel::A),
        e_b: square(AtomLevel::B),
        e_c: square(AtomLevel::C),
        dropped_two_weight: None,
    }
}

/// Parameters of discrimination family member `m` at coupling ratio
/// `kappa`; shorthand for [`SystemParams::unambiguous`].
pub fn discrimination_params(m: u32, kappa: f64) -> Result<SystemParams> {
    SystemParams::unambiguous(m, kappa)
}

/// Measurement elements at the discrimination point, restricted to the
/// vacuum/one-photon sector in closed form.
///
/// Writing `s = sin(theta_m)`, `c = cos(theta_m)`, and `w = 2 + kappa^2`,
/// the sector blocks are
/// `E_a = [[c^2 + s^4, s^2 c^2], [s^2 c^2, c^4 + 2 s^2 / w]]`,
/// `E_b = s^2 c^2 [[1, -1], [-1, 1]]`, and
/// `E_c = diag(0, kappa^2 s^2 / w)`.
/// The dropped two-photon weights are taken from the closed-form protocol
/// columns so both descriptions share one source.
pub fn effective_povm(m: u32, kappa: f64) -> Result<PovmSet> {
    let params = SystemParams::unambiguous(m, kappa)?;
    let (s, c) = params.theta().sin_cos();
    let (s2, c2) = (s * s, c * c);
    let w = 2.0 + kappa * kappa;
    let re = |x: f64| C64::new(x, 0.0);

    let mut e_a = OperatorMatrix::zeros(FOCK_LEVELS, FOCK_LEVELS);
    e_a[(0, 0)] = re(c2 + s2 * s2);
    e_a[(0, 1)] = re(s2 * c2);
    e_a[(1, 0)] = re(s2 * c2);
    e_a[(1, 1)] = re(c2 * c2 + 2.0 * s2 / w);

    let mut e_b = OperatorMatrix::zeros(FOCK_LEVELS, FOCK_LEVELS);
    e_b[(0, 0)] = re(s2 * c2);
    e_b[(0, 1)] = re(-s2 * c2);
    e_b[(1, 0)] = re(-s2 * c2);
    e_b[(1, 1)] = re(s2 * c2);

    let mut e_c = OperatorMatrix::zeros(FOCK_LEVELS, FOCK_LEVELS);
    e_c[(1, 1)] = re(kappa * kappa * s2 / w);

    let cols = analytic_columns(&params);
    let two_photon_image = &cols[2];
    let mut weights = [0.0f64; 3];
    for level in AtomLevel::ALL {
        for n in 0..FOCK_LEVELS {
            weights[level.index()] += two_photon_image[joint_index(level, n)].norm_sqr();
        }
    }

    Ok(PovmSet {
        e_a,
        e_b,
        e_c,
        dropped_two_weight: Some(weights),
    })
}

/// Two known field preparations with prior weights `q1` and `q2 = 1 - q1`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    psi1: StateVector,
    psi2: StateVector,
    q1: f64,
    q2: f64,
}

impl Ensemble {
    /// Validates that both states live on the photon-number space, are
    /// normalized within [`tol::NORMALIZATION_TOL`], and that `q1` is a
    /// probability.
    pub fn new(psi1: StateVector, psi2: StateVector, q1: f64) -> Result<Ensemble> {
        if psi1.dim() != FOCK_LEVELS || psi2.dim() != FOCK_LEVELS {
            return Err(Error::ShapeMismatch {
                op: "Ensemble::new",
                lhs: format!("dims {} and {}", psi1.dim(), psi2.dim()),
                rhs: format!("dim {}", FOCK_LEVELS),
            });
        }
        for psi in [&psi1, &psi2] {
            let norm_sq = psi.norm_sqr();
            if (norm_sq - 1.0).abs() > tol::NORMALIZATION_TOL {
                return Err(Error::NotNormalized {
                    norm_sq,
                    tol: tol::NORMALIZATION_TOL,
                });
            }
        }
        if !(0.0..=1.0).contains(&q1) || !q1.is_finite() {
            return Err(Error::InvalidPrior { q1 });
        }
        Ok(Ensemble {
            psi1,
            psi2,
            q1,
            q2: 1.0 - q1,
        })
    }

    /// The canonical pair: the vacuum and the balanced superposition of
    /// vacuum and one photon, with overlap `1/sqrt(2)`.
    pub fn standard(q1: f64) -> Result<Ensemble> {
        let psi1 = StateVector::basis(FOCK_LEVELS, 0);
        let mut psi2 = StateVector::zeros(FOCK_LEVELS);
        let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi2[0] = amp;
        psi2[1] = amp;
        Ensemble::new(psi1, psi2, q1)
    }

    pub fn psi1(&self) -> &StateVector {
        &self.psi1
    }

    pub fn psi2(&self) -> &StateVector {
        &self.psi2
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn q2(&self) -> f64 {
        self.q2
    }

    /// Whether the states are the canonical pair of [`Ensemble::standard`],
    /// entrywise within 1e-12.
    pub fn is_standard_pair(&self) -> bool {
        let standard = Ensemble::standard(0.5).expect("canonical pair is valid");
        let d1 = self.psi1.max_diff(&standard.psi1).expect("equal dims");
        let d2 = self.psi2.max_diff(&standard.psi2).expect("equal dims");
        d1 <= 1e-12 && d2 <= 1e-12
    }

    /// Unit vector orthogonal to the second state inside the span of the
    /// pair, with its component along the first state rotated to the
    /// positive real axis. `None` when the states are parallel, where no
    /// such direction exists.
    pub fn psi2_perp(&self) -> Option<StateVector> {
        let overlap = self.psi2.inner(&self.psi1).expect("equal dims");
        let projected = self
            .psi1
            .sub(&self.psi2.scaled(overlap))
            .expect("equal dims");
        let norm = projected.norm();
        if norm < 1e-12 {
            return None;
        }
        let unit = projected.scaled(C64::new(1.0 / norm, 0.0));
        let along_first = self.psi1.inner(&unit).expect("equal dims");
        if along_first.norm() < 1e-12 {
            return Some(unit);
        }
        let phase = along_first.conj() / along_first.norm();
        Some(unit.scaled(phase))
    }

    /// Prior-weighted mixture of the two preparations.
    pub fn density_matrix(&self) -> OperatorMatrix {
        let rho1 = self.psi1.outer(&self.psi1);
        let rho2 = self.psi2.outer(&self.psi2);
        rho1.scale(C64::new(self.q1, 0.0))
            .add(&rho2.scale(C64::new(self.q2, 0.0)))
            .expect("equal shapes")
    }
}

/// Outcome statistics of one operating point: `p_b` and `p_c` are the
/// conclusive rates, `p_in` the inconclusive rate, and `p_s = p_b + p_c`
/// the total success rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscriminationReport {
    pub m: Option<u32>,
    pub theta: f64,
    pub kappa: f64,
    pub q1: f64,
    pub p_b: f64,
    pub p_c: f64,
    pub p_in: f64,
    pub p_s: f64,
}

impl DiscriminationReport {
    /// Checks that every rate is a probability within
    /// [`tol::PROBABILITY_RANGE_TOL`], that the three outcomes exhaust
    /// probability within [`tol::PROBABILITY_SUM_TOL`], and that the
    /// success rate is the sum of the conclusive rates.
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_b", self.p_b),
            ("p_c", self.p_c),
            ("p_in", self.p_in),
            ("p_s", self.p_s),
        ] {
            if !(-tol::PROBABILITY_RANGE_TOL..=1.0 + tol::PROBABILITY_RANGE_TOL).contains(&p) {
                return Err(Error::ProbabilityInvariant {
                    detail: format!("{name} = {p} is outside [0, 1]"),
                });
            }
        }
        let total = self.p_b + self.p_c + self.p_in;
        if (total - 1.0).abs() > tol::PROBABILITY_SUM_TOL {
            return Err(Error::ProbabilityInvariant {
                detail: format!("outcome probabilities sum to {total}"),
            });
        }
        let split = self.p_b + self.p_c;
        if (split - self.p_s).abs() > tol::PROBABILITY_SUM_TOL {
            return Err(Error::ProbabilityInvariant {
                detail: format!("p_s = {} but p_b + p_c = {split}", self.p_s),
            });
        }
        Ok(())
    }
}

/// Closed-form outcome rates at the discrimination point, as
/// `(p_b, p_c, p_in, p_s)` for the canonical pair with prior `q1`.
///
/// `p_in` comes from its own expression rather than from `1 - p_s`, so the
/// sum rule is a real cross-check downstream.
pub(crate) fn closed_form_probabilities(
    m: u32,
    kappa: f64,
    q1: f64,
) -> Result<(f64, f64, f64, f64)> {
    if !(0.0..=1.0).contains(&q1) || !q1.is_finite() {
        return Err(Error::InvalidPrior { q1 });
    }
    let theta = SystemParams::quantized_theta(m, kappa)?;
    let q2 = 1.0 - q1;
    let (s, c) = theta.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let w = 2.0 + kappa * kappa;

    let p_b = q1 * s2 * c2;
    let p_c = q2 * 0.5 * kappa * kappa * s2 / w;
    let p_in = q1 * (c2 + s2 * s2) + q2 * 0.5 * (1.0 + c2 + 2.0 * s2 / w);
    let p_s = p_b + p_c;
    Ok((p_b, p_c, p_in, p_s))
}

/// Closed-form report at the discrimination point. Only the canonical pair
/// admits these expressions; any other ensemble is rejected.
pub fn closed_form_report(m: u32, kappa: f64, ensemble: &Ensemble) -> Result<DiscriminationReport> {
    if !ensemble.is_standard_pair() {
        return Err(Error::UnsupportedEnsemble);
    }
    let (p_b, p_c, p_in, p_s) = closed_form_probabilities(m, kappa, ensemble.q1())?;
    let report = DiscriminationReport {
        m: Some(m),
        theta: SystemParams::quantized_theta(m, kappa)?,
        kappa,
        q1: ensemble.q1(),
        p_b,
        p_c,
        p_in,
        p_s,
    };
    report.validate()?;
    Ok(report)
}

fn clamp_rate(x: f64) -> Result<f64> {
    if !(-tol::PSD_TOL..=1.0 + tol::PSD_TOL).contains(&x) {
        return Err(Error::ProbabilityInvariant {
            detail: format!("expectation {x} is outside [0, 1]"),
        });
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Outcome rates evaluated as `tr(E rho)` against the ensemble's density
/// matrix.
pub fn trace_report(
    povm: &PovmSet,
    params: &SystemParams,
    ensemble: &Ensemble,
) -> Result<DiscriminationReport> {
    let rho = ensemble.density_matrix();
    let mut rates = [0.0f64; 3];
    for level in AtomLevel::ALL {
        let product = povm.element(level).matmul(&rho)?;
        rates[level.index()] = clamp_rate(product.trace()?.re)?;
    }
    let report = DiscriminationReport {
        m: params.m(),
        theta: params.theta(),
        kappa: params.kappa(),
        q1: ensemble.q1(),
        p_b: rates[AtomLevel::B.index()],
        p_c: rates[AtomLevel::C.index()],
        p_in: rates[AtomLevel::A.index()],
        p_s: rates[AtomLevel::B.index()] + rates[AtomLevel::C.index()],
    };
    report.validate()?;
    Ok(report)
}

/// Outcome rates through the full numerical pipeline: protocol unitary,
/// Kraus extraction, positive elements, then the trace formula.
pub fn pipeline_report(params: &SystemParams, ensemble: &Ensemble) -> Result<DiscriminationReport> {
    let u = protocol_unitary(params)?;
    let kraus = extract_kraus(&u)?;
    let povm = povm_from_kraus(&kraus);
    trace_report(&povm, params, ensemble)
}

/// Conditional outcome distributions, one row per preparation in `(a, b,
/// c)` column order. Each row is checked to sum to 1 within
/// [`tol::PROBABILITY_SUM_TOL`].
pub fn outcome_distributions(povm: &PovmSet, ensemble: &Ensemble) -> Result<[[f64; 3]; 2]> {
    let mut rows = [[0.0f64; 3]; 2];
    for (row, psi) in [ensemble.psi1(), ensemble.psi2()].into_iter().enumerate() {
        for level in AtomLevel::ALL {
            let image = povm.element(level).apply(psi)?;
            rows[row][level.index()] = clamp_rate(psi.inner(&image)?.re)?;
        }
        let total: f64 = rows[row].iter().sum();
        if (total - 1.0).abs() > tol::PROBABILITY_SUM_TOL {
            return Err(Error::ProbabilityInvariant {
                detail: format!("conditional outcome row sums to {total}"),
            });
        }
    }
    Ok(rows)
}

/// Field state after observing `outcome`, with the outcome probability:
/// `rho' = M rho M^dag / p` where `p = tr(M^dag M rho)`.
///
/// The input must be a density matrix on the photon-number space. Outcomes
/// with `p` at or below [`tol::ZERO_PROB_TOL`] leave no state to condition
/// on and are rejected.
pub fn post_measurement_state(
    kraus: &KrausSet,
    outcome: AtomLevel,
    rho: &OperatorMatrix,
) -> Result<(OperatorMatrix, f64)> {
    rho.require_square("post_measurement_state")?;
    if rho.rows() != FOCK_LEVELS {
        return Err(Error::ShapeMismatch {
            op: "post_measurement_state",
            lhs: format!("{}x{}", rho.rows(), rho.cols()),
            rhs: format!("{}x{}", FOCK_LEVELS, FOCK_LEVELS),
        });
    }
    let defect = rho.hermiticity_defect()?;
    if defect > tol::HERMITICITY_TOL {
        return Err(Error::NonHermitianInput {
            defect,
            tol: tol::HERMITICITY_TOL,
        });
    }
    let trace = rho.trace()?.re;
    if (trace - 1.0).abs() > tol::PROBABILITY_SUM_TOL {
        return Err(Error::ProbabilityInvariant {
            detail: format!("density matrix trace is {trace}"),
        });
    }
    if rho.min_eigenvalue()? < -tol::PSD_TOL {
        return Err(Error::ProbabilityInvariant {
            detail: "density matrix has a negative eigenvalue".to_string(),
        });
    }

    let m = kraus.element(outcome);
    let m_rho = m.matmul(rho)?;
    let updated = m_rho.matmul(&m.adjoint())?;
    let probability = updated.trace()?.re;
    if probability <= tol::ZERO_PROB_TOL {
        return Err(Error::ZeroProbabilityOutcome {
            outcome: outcome.label(),
            probability,
        });
    }
    let normalized = updated.scale(C64::new(1.0 / probability, 0.0));
    Ok((normalized, probability))
}
