//! The named checks behind `verify`: operator invariants at one parameter
//! point, plus the discrimination guarantees when the point comes from the
//! quantized family.

use serde_json::{json, Value};

use uqsd_core::dynamics::{column_agreement_defect, protocol_unitary, AtomLevel, SystemParams};
use uqsd_core::povm::{
    closed_form_report, extract_kraus, pipeline_report, povm_from_kraus, Ensemble,
};
use uqsd_core::tol;
use uqsd_core::Result;

/// How the parameter point was given, which decides the applicable
/// checks. Free points get the operator invariants only; family points
/// also promise unambiguity, and unperturbed family points additionally
/// admit the closed-form rates.
#[derive(Clone, Copy, Debug)]
pub enum VerifyRoute {
    Free,
    Family { m: u32, kappa: f64, perturbed: bool },
}

/// One named check with its observed value and the bound it was held to.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub observed: f64,
    pub bound: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &'static str, quantity: &str, observed: f64, bound: f64) -> Check {
        Check {
            name,
            passed: observed <= bound,
            observed,
            bound,
            detail: format!("{quantity} {observed:.3e} (tolerance {bound:.0e})"),
        }
    }

    fn at_least(name: &'static str, quantity: &str, observed: f64, bound: f64) -> Check {
        Check {
            name,
            passed: observed >= bound,
            observed,
            bound,
            detail: format!("{quantity} {observed:.3e} (floor {bound:.0e})"),
        }
    }

    pub fn json(&self) -> Value {
        json!({
            "name": self.name,
            "passed": self.passed,
            "observed": self.observed,
            "bound": self.bound,
        })
    }
}

/// Runs the checks applicable to one parameter point, in a fixed order.
pub fn verify_point(params: &SystemParams, route: VerifyRoute) -> Result<Vec<Check>> {
    let u = protocol_unitary(params)?;
    let kraus = extract_kraus(&u)?;
    let povm = povm_from_kraus(&kraus);
    let mut checks = vec![
        Check::at_most(
            "unitarity",
            "defect",
            u.unitarity_defect()?,
            tol::UNITARITY_TOL,
        ),
        Check::at_most(
            "kraus-completeness",
            "defect",
            kraus.completeness_defect(),
            tol::COMPLETENESS_TOL,
        ),
        Check::at_most(
            "povm-hermiticity",
            "defect",
            povm.hermiticity_defect(),
            tol::HERMITICITY_TOL,
        ),
        Check::at_least(
            "povm-psd",
            "min eigenvalue",
            povm.min_eigenvalue()?,
            -tol::PSD_TOL,
        ),
        Check::at_most(
            "analytic-columns",
            "defect",
            column_agreement_defect(params)?,
            tol::CLOSED_FORM_AGREEMENT_TOL,
        ),
    ];

    if let VerifyRoute::Family { m, kappa, perturbed } = route {
        let ensemble = Ensemble::standard(0.5)?;
        let misfire_b = ensemble
            .psi2()
            .inner(&povm.element(AtomLevel::B).apply(ensemble.psi2())?)?
            .re;
        let misfire_c = ensemble
            .psi1()
            .inner(&povm.element(AtomLevel::C).apply(ensemble.psi1())?)?
            .re;
        checks.push(Check::at_most(
            "unambiguity",
            "worst misfire rate",
            misfire_b.abs().max(misfire_c.abs()),
            tol::UNAMBIGUITY_TOL,
        ));

        if !perturbed {
            let closed = closed_form_report(m, kappa, &ensemble)?;
            let piped = pipeline_report(params, &ensemble)?;
            let disagreement = [
                (closed.p_b - piped.p_b).abs(),
                (closed.p_c - piped.p_c).abs(),
                (closed.p_in - piped.p_in).abs(),
                (closed.p_s - piped.p_s).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            checks.push(Check::at_most(
                "closed-form-agreement",
                "worst rate disagreement",
                disagreement,
                tol::CLOSED_FORM_AGREEMENT_TOL,
            ));
        }
    }

    Ok(checks)
}

/// Family indices and coupling ratios of the standing verification grid.
pub fn grid_points() -> Vec<(u32, f64)> {
    let mut points = Vec::new();
    for m in 0..=5u32 {
        for i in 1..=24u32 {
            points.push((m, f64::from(i) * 0.5));
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use uqsd_core::linalg::C64;

    #[test]
    fn family_route_runs_seven_checks_and_passes() {
        let params = SystemParams::unambiguous(1, 4.5).unwrap();
        let route = VerifyRoute::Family {
            m: 1,
            kappa: 4.5,
            perturbed: false,
        };
        let checks = verify_point(&params, route).unwrap();
        assert_eq!(checks.len(), 7);
        assert!(checks.iter().all(|c| c.passed));
        assert_eq!(checks[5].name, "unambiguity");
    }

    #[test]
    fn free_route_runs_five_checks() {
        let params = SystemParams::new(0.7, 2.0, C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let checks = verify_point(&params, VerifyRoute::Free).unwrap();
        assert_eq!(checks.len(), 5);
        assert!(checks.iter().all(|c| c.passed));
    }

    #[test]
    fn perturbed_family_route_fails_only_unambiguity() {
        let kappa = 4.5;
        let theta = SystemParams::quantized_theta(1, kappa).unwrap() + 0.1;
        let params = SystemParams::new(
            theta,
            kappa,
            C64::new(theta.cos(), 0.0),
            C64::new(0.0, theta.sin()),
        )
        .unwrap();
        let route = VerifyRoute::Family {
            m: 1,
            kappa,
            perturbed: true,
        };
        let checks = verify_point(&params, route).unwrap();
        assert_eq!(checks.len(), 6);
        for check in &checks {
            assert_eq!(
                check.passed,
                check.name != "unambiguity",
                "unexpected verdict for {}",
                check.name
            );
        }
    }

    #[test]
    fn the_grid_covers_all_family_members_up_to_five() {
        let points = grid_points();
        assert_eq!(points.len(), 144);
        assert!(points.iter().all(|&(_, k)| (0.5..=12.0).contains(&k)));
        assert_eq!(points.iter().filter(|&&(m, _)| m == 3).count(), 24);
    }
}
