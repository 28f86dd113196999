//! Joint atom-field space and the protocol unitary.
//!
//! A three-level ladder atom crosses a single-mode cavity after a classical
//! Ramsey rotation of its lower two levels. Photon numbers are truncated at
//! 2, giving a 9-dimensional joint space ordered atom-major:
//! `index = 3 * atom + photon`. The composed evolution is
//! `U = exp(-i * theta * H) * R`, with `R` the Ramsey rotation and `H` the
//! resonant interaction Hamiltonian in units of the lower-transition
//! coupling. The images of the three relevant input states also exist in
//! closed form and serve as an independent transcription check on the
//! matrix-exponential route.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, OperatorMatrix, StateVector, C64};
use crate::tol;

/// Number of atomic levels.
pub const ATOM_LEVELS: usize = 3;
/// Number of retained photon-number states (0, 1, 2).
pub const FOCK_LEVELS: usize = 3;
/// Dimension of the joint atom-field space.
pub const JOINT_DIM: usize = ATOM_LEVELS * FOCK_LEVELS;

/// The three rungs of the ladder atom, lowest first. Reading the atom out
/// in this basis labels the measurement outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomLevel {
    A,
    B,
    C,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 3] = [AtomLevel::A, AtomLevel::B, AtomLevel::C];

    /// Basis position of the level: A is 0, B is 1, C is 2.
    pub fn index(self) -> usize {
        match self {
            AtomLevel::A => 0,
            AtomLevel::B => 1,
            AtomLevel::C => 2,
        }
    }

    pub fn from_index(idx: usize) -> Option<AtomLevel> {
        AtomLevel::ALL.get(idx).copied()
    }

    /// Lower-case letter used in reports and error messages.
    pub fn label(self) -> char {
        match self {
            AtomLevel::A => 'a',
            AtomLevel::B => 'b',
            AtomLevel::C => 'c',
        }
    }

    /// Ladder quanta the level holds (A none, B one, C two); the interaction
    /// conserves this count plus the photon number.
    pub fn quanta(self) -> usize {
        self.index()
    }
}

/// Index of the joint basis state `(level, photon)` under the atom-major
/// ordering.
pub fn joint_index(level: AtomLevel, photon: usize) -> usize {
    debug_assert!(photon < FOCK_LEVELS);
    ATOM_LEVELS * level.index() + photon
}

/// Dimensionless protocol parameters.
///
/// `theta` is the product of the lower-transition coupling and the
/// interaction time, `kappa` the ratio of the upper to the lower coupling.
/// `alpha` and `beta` are the Ramsey amplitudes applied to the atom before
/// it enters the cavity. When `theta` is drawn from the discrete family
/// that makes conclusive outcomes unambiguous, the family index is recorded
/// in `m`; it is set only by [`SystemParams::unambiguous`], which computes
/// `theta` from it, so the two can never disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    theta: f64,
    kappa: f64,
    alpha: C64,
    beta: C64,
    m: Option<u32>,
}

impl SystemParams {
    /// Free parameter set; validates that `kappa` is positive and finite,
    /// `theta` finite, and |alpha|^2 + |beta|^2 = 1 within
    /// [`tol::NORMALIZATION_TOL`].
    pub fn new(theta: f64, kappa: f64, alpha: C64, beta: C64) -> Result<SystemParams> {
        check_kappa(kappa)?;
        if !theta.is_finite() {
            return Err(Error::InvalidTheta { theta });
        }
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sq - 1.0).abs() > tol::NORMALIZATION_TOL {
            return Err(Error::NotNormalized {
                norm_sq,
                tol: tol::NORMALIZATION_TOL,
            });
        }
        Ok(SystemParams {
            theta,
            kappa,
            alpha,
            beta,
            m: None,
        })
    }

    /// Interaction phase of family member `m` at coupling ratio `kappa`:
    /// `theta_m = (m + 1/2) * pi / sqrt(2 + kappa^2)`, the phase at which the
    /// middle-level amplitude of a singly excited joint state completes an
    /// odd quarter period.
    pub fn quantized_theta(m: u32, kappa: f64) -> Result<f64> {
        check_kappa(kappa)?;
        Ok((f64::from(m) + 0.5) * PI / (2.0 + kappa * kappa).sqrt())
    }

    /// Parameter set satisfying all three unambiguity conditions for family
    /// index `m`: quantized `theta`, `alpha = cos(theta)`, and
    /// `beta = i sin(theta)`.
    pub fn unambiguous(m: u32, kappa: f64) -> Result<SystemParams> {
        let theta = Self::quantized_theta(m, kappa)?;
        Ok(SystemParams {
            theta,
            kappa,
            alpha: C64::new(theta.cos(), 0.0),
            beta: C64::new(0.0, theta.sin()),
            m: Some(m),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    /// Family index, when `theta` was constructed from one.
    pub fn m(&self) -> Option<u32> {
        self.m
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidKappa { kappa })
    }
}

/// Interaction Hamiltonian on the joint space, in units of the
/// lower-transition coupling.
///
/// Absorbing a photon raises the atom one rung; each element carries the
/// bosonic sqrt(n) factor of the photon it removes, and the upper-transition
/// elements are scaled by `kappa`. Photon numbers stop at 2, so the coupling
/// that would connect `(B, 2)` to a three-photon state is absent on both
/// sides, keeping the matrix Hermitian.
pub fn build_hamiltonian(kappa: f64) -> Result<OperatorMatrix> {
    check_kappa(kappa)?;
    let mut h = OperatorMatrix::zeros(JOINT_DIM, JOINT_DIM);
    for n in 1..FOCK_LEVELS {
        let root_n = (n as f64).sqrt();
        let lower = (
            joint_index(AtomLevel::B, n - 1),
            joint_index(AtomLevel::A, n),
        );
        h[lower] = C64::new(root_n, 0.0);
        h[(lower.1, lower.0)] = C64::new(root_n, 0.0);

        let upper = (
            joint_index(AtomLevel::C, n - 1),
            joint_index(AtomLevel::B, n),
        );
        h[upper] = C64::new(kappa * root_n, 0.0);
        h[(upper.1, upper.0)] = C64::new(kappa * root_n, 0.0);
    }
    Ok(h)
}

/// Ramsey rotation of the atom's lower two levels, tensored with the field
/// identity: `A -> alpha A + beta B`, `B -> -conj(beta) A + conj(alpha) B`,
/// `C` untouched.
pub fn ramsey_unitary(alpha: C64, beta: C64) -> Result<OperatorMatrix> {
    let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
    if (norm_sq - 1.0).abs() > tol::NORMALIZATION_TOL {
        return Err(Error::NotNormalized {
            norm_sq,
            tol: tol::NORMALIZATION_TOL,
        });
    }
    let mut atom = OperatorMatrix::zeros(ATOM_LEVELS, ATOM_LEVELS);
    atom[(0, 0)] = alpha;
    atom[(1, 0)] = beta;
    atom[(0, 1)] = -beta.conj();
    atom[(1, 1)] = alpha.conj();
    atom[(2, 2)] = C64::ONE;
    Ok(atom.tensor(&OperatorMatrix::identity(FOCK_LEVELS)))
}

/// Full protocol unitary: Ramsey rotation first, then the cavity
/// interaction for phase `theta`.
pub fn protocol_unitary(p: &SystemParams) -> Result<OperatorMatrix> {
    let h = build_hamiltonian(p.kappa())?;
    let cavity = expm_hermitian(&h, p.theta())?;
    cavity.matmul(&ramsey_unitary(p.alpha(), p.beta())?)
}

/// Closed-form images of the joint inputs `(A, 0)`, `(A, 1)`, `(A, 2)`
/// under the protocol unitary, written directly from the block dynamics of
/// the excitation-conserving Hamiltonian.
///
/// These are the transcription-check companions of [`protocol_unitary`]:
/// the two routes must agree to [`tol::CLOSED_FORM_AGREEMENT_TOL`], and each
/// column is normalized to the same tolerance.
pub fn analytic_columns(p: &SystemParams) -> [StateVector; 3] {
    let theta = p.theta();
    let kappa = p.kappa();
    let omega_sq = 2.0 + kappa * kappa;
    let omega = omega_sq.sqrt();
    let (sin_t, cos_t) = theta.sin_cos();
    let (sin_o, cos_o) = (omega * theta).sin_cos();
    let (sin_u, cos_u) = (SQRT_2 * kappa * theta).sin_cos();
    let alpha = p.alpha();
    let beta = p.beta();
    let minus_i = C64::new(0.0, -1.0);

    let mut col0 = StateVector::zeros(JOINT_DIM);
    col0[joint_index(AtomLevel::A, 0)] = alpha;
    col0[joint_index(AtomLevel::A, 1)] = minus_i * beta * sin_t;
    col0[joint_index(AtomLevel::B, 0)] = beta * cos_t;

    let mut col1 = StateVector::zeros(JOINT_DIM);
    col1[joint_index(AtomLevel::A, 1)] = alpha * cos_t;
    col1[joint_index(AtomLevel::B, 0)] = minus_i * alpha * sin_t;
    col1[joint_index(AtomLevel::A, 2)] = minus_i * beta * (SQRT_2 * sin_o / omega);
    col1[joint_index(AtomLevel::B, 1)] = beta * cos_o;
    col1[joint_index(AtomLevel::C, 0)] = minus_i * beta * (kappa * sin_o / omega);

    let mut col2 = StateVector::zeros(JOINT_DIM);
    col2[joint_index(AtomLevel::A, 2)] = alpha * ((kappa * kappa + 2.0 * cos_o) / omega_sq);
    col2[joint_index(AtomLevel::B, 1)] = minus_i * alpha * (SQRT_2 * sin_o / omega);
    col2[joint_index(AtomLevel::C, 0)] = alpha * (SQRT_2 * kappa * (cos_o - 1.0) / omega_sq);
    col2[joint_index(AtomLevel::B, 2)] = beta * cos_u;
    col2[joint_index(AtomLevel::C, 1)] = minus_i * beta * sin_u;

    [col0, col1, col2]
}

/// Largest entrywise deviation between the closed-form columns and the
/// matching columns of the matrix-exponential unitary.
pub fn column_agreement_defect(p: &SystemParams) -> Result<f64> {
    let u = protocol_unitary(p)?;
    let cols = analytic_columns(p);
    let mut worst = 0.0f64;
    for (input, col) in cols.iter().enumerate() {
        let from_u = u.apply(&StateVector::basis(JOINT_DIM, joint_index(AtomLevel::A, input)))?;
        worst = worst.max(col.max_diff(&from_u)?);
    }
    Ok(worst)
}
