//! Coupling-ratio sweeps and the optimal operating point.
//!
//! Within discrimination family member `m` the only free knob is the
//! coupling ratio `kappa`; the success rate is smooth in it with a single
//! broad maximum whose location grows roughly linearly with `m`. The
//! optimizer scans a fixed coarse grid and then tightens the best bracket
//! by golden-section search, evaluating only the closed-form rates, so a
//! whole table costs milliseconds and repeated runs are bit-identical.

use crate::dynamics::SystemParams;
use crate::error::{Error, Result};
use crate::povm::closed_form_probabilities;

/// Best possible equal-prior success rate for states with overlap
/// `1/sqrt(2)`, which no measurement exceeds: `1 - 1/sqrt(2)` quoted to
/// three figures. Useful as a yardstick for how much of the attainable
/// rate an operating point captures.
pub const EQUAL_PRIOR_REFERENCE_BOUND: f64 = 0.292;

/// Coarse scan resolution in `kappa`.
const COARSE_STEP: f64 = 1e-2;

/// Coarse scan upper limit grows with the family index because the
/// optimum does: member `m` is scanned over `(0, 12 * (m + 1)]`.
const COARSE_SPAN_PER_FAMILY: u32 = 1200;

/// Golden-section refinement stops when the bracket is this narrow.
const REFINE_WIDTH: f64 = 1e-6;

/// One evaluated operating point of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub kappa: f64,
    pub p_b: f64,
    pub p_c: f64,
    pub p_in: f64,
    pub p_s: f64,
}

/// Success-rate curve over a `kappa` grid at fixed family index and prior.
#[derive(Clone, Debug)]
pub struct SweepCurve {
    pub m: u32,
    pub q1: f64,
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    /// Point with the largest success rate; ties resolve to the smaller
    /// `kappa`. `None` only for an empty curve.
    pub fn best(&self) -> Option<&SweepPoint> {
        self.points
            .iter()
            .reduce(|best, p| if p.p_s > best.p_s { p } else { best })
    }
}

/// Optimal operating point of one family member.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimumRow {
    pub m: u32,
    pub q1: f64,
    pub kappa: f64,
    pub theta: f64,
    pub p_b: f64,
    pub p_c: f64,
    pub p_in: f64,
    pub p_s: f64,
}

/// Evaluates the closed-form rates over the grid `lo, lo + step, ...` up
/// to `hi` inclusive. A degenerate range with `lo == hi` yields the single
/// point `lo`.
pub fn sweep(m: u32, q1: f64, lo: f64, hi: f64, step: f64) -> Result<SweepCurve> {
    let well_formed =
        lo.is_finite() && hi.is_finite() && step.is_finite() && lo > 0.0 && lo <= hi && step > 0.0;
    if !well_formed {
        return Err(Error::InvalidRange { lo, hi, step });
    }
    let mut points = Vec::new();
    let mut i = 0u64;
    loop {
        let kappa = lo + (i as f64) * step;
        // Absorbs accumulated rounding so the intended endpoint is kept.
        if kappa > hi + step * 1e-9 {
            break;
        }
        let (p_b, p_c, p_in, p_s) = closed_form_probabilities(m, kappa, q1)?;
        points.push(SweepPoint {
            kappa,
            p_b,
            p_c,
            p_in,
            p_s,
        });
        i += 1;
    }
    Ok(SweepCurve { m, q1, points })
}

struct Candidate {
    kappa: f64,
    probs: (f64, f64, f64, f64),
}

impl Candidate {
    fn improves_on(&self, other: &Candidate) -> bool {
        let (p_s, other_p_s) = (self.probs.3, other.probs.3);
        p_s > other_p_s || (p_s == other_p_s && self.kappa < other.kappa)
    }
}

/// Locates the coupling ratio maximizing the success rate of family member
/// `m` at prior `q1`.
///
/// A coarse scan with step 1e-2 over `(0, 12 * (m + 1)]` brackets the
/// maximum, then golden-section search narrows the bracket to width 1e-6.
/// The best parameter seen during either phase is returned, so refinement
/// can only improve on the scan; ties resolve to the smaller `kappa`. The
/// whole procedure is free of randomness and bit-deterministic.
pub fn optimize_kappa(m: u32, q1: f64) -> Result<OptimumRow> {
    let mut best: Option<Candidate> = None;
    let mut best_index = 1u64;
    let steps = u64::from(COARSE_SPAN_PER_FAMILY) * (u64::from(m) + 1);
    for i in 1..=steps {
        let kappa = (i as f64) * COARSE_STEP;
        let probs = closed_form_probabilities(m, kappa, q1)?;
        let candidate = Candidate { kappa, probs };
        if best.as_ref().is_none_or(|b| candidate.improves_on(b)) {
            best = Some(candidate);
            best_index = i;
        }
    }
    let mut best = best.expect("coarse grid is nonempty");

    // The true maximum lies within one step of the best grid point. The
    // bracket may touch zero when the first point wins; golden-section
    // search only ever evaluates interior points, which stay positive.
    let mut a = ((best_index - 1) as f64) * COARSE_STEP;
    let mut b = ((best_index + 1) as f64) * COARSE_STEP;
    let invphi = (5.0f64.sqrt() - 1.0) / 2.0;

    let evaluate = |kappa: f64, best: &mut Candidate| -> Result<f64> {
        let probs = closed_form_probabilities(m, kappa, q1)?;
        let candidate = Candidate { kappa, probs };
        if candidate.improves_on(best) {
            *best = candidate;
        }
        Ok(probs.3)
    };

    let mut x1 = b - invphi * (b - a);
    let mut x2 = a + invphi * (b - a);
    let mut f1 = evaluate(x1, &mut best)?;
    let mut f2 = evaluate(x2, &mut best)?;
    while b - a > REFINE_WIDTH {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = evaluate(x2, &mut best)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = evaluate(x1, &mut best)?;
        }
    }

    let (p_b, p_c, p_in, p_s) = best.probs;
    Ok(OptimumRow {
        m,
        q1,
        kappa: best.kappa,
        theta: SystemParams::quantized_theta(m, best.kappa)?,
        p_b,
        p_c,
        p_in,
        p_s,
    })
}

/// Optimal rows for each requested family index at a common prior.
pub fn table(q1: f64, family_indices: &[u32]) -> Result<Vec<OptimumRow>> {
    family_indices
        .iter()
        .map(|&m| optimize_kappa(m, q1))
        .collect()
}

/// Success rate of the best ancilla-free comparator: counting photons.
/// Seeing one photon identifies the superposition state with certainty,
/// which happens with probability `(1 - q1) / 2`; no projective
/// measurement discriminates without error at a higher rate when the
/// second state is the likelier one.
pub fn projective_baseline(q1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q1) || !q1.is_finite() {
        return Err(Error::InvalidPrior { q1 });
    }
    Ok((1.0 - q1) / 2.0)
}

/// Distance of a success rate below [`EQUAL_PRIOR_REFERENCE_BOUND`]. The
/// yardstick only applies to equal priors; other priors are rejected.
pub fn bound_gap(q1: f64, p_s: f64) -> Result<f64> {
    if q1 != 0.5 {
        return Err(Error::UnsupportedPrior { q1 });
    }
    Ok(EQUAL_PRIOR_REFERENCE_BOUND - p_s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimizer_reproduces_frozen_equal_prior_optima() {
        let cases = [
            (0u32, 1.482568636, 0.187819090747),
            (1, 4.568522778, 0.264532984382),
            (5, 16.527131218, 0.279884288373),
        ];
        for (m, kappa, p_s) in cases {
            let row = optimize_kappa(m, 0.5).unwrap();
            assert!(
                (row.kappa - kappa).abs() <= 5e-6,
                "m={m}: kappa {} vs {kappa}",
                row.kappa
            );
            assert!(
                (row.p_s - p_s).abs() <= 1e-9,
                "m={m}: p_s {} vs {p_s}",
                row.p_s
            );
        }
    }

    #[test]
    fn optimizer_reproduces_frozen_skewed_prior_optima() {
        let row = optimize_kappa(2, 0.3).unwrap();
        assert!((row.kappa - 5.714477790).abs() <= 5e-6);
        assert!((row.p_s - 0.327256813427).abs() <= 1e-9);

        let row = optimize_kappa(4, 0.7).unwrap();
        assert!((row.kappa - 15.798183329).abs() <= 5e-6);
        assert!((row.p_s - 0.257311254260).abs() <= 1e-9);
    }

    #[test]
    fn optimizer_is_bit_deterministic() {
        let first = optimize_kappa(3, 0.5).unwrap();
        let second = optimize_kappa(3, 0.5).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn success_rate_improves_with_the_family_index() {
        let mut last = 0.0;
        for m in 0..=5 {
            let row = optimize_kappa(m, 0.5).unwrap();
            assert!(row.p_s > last, "m={m} regressed: {} <= {last}", row.p_s);
            last = row.p_s;
        }
    }

    #[test]
    fn sweep_grid_is_inclusive_and_supports_degenerate_ranges() {
        let curve = sweep(1, 0.5, 1.0, 1.005, 0.001).unwrap();
        assert_eq!(curve.points.len(), 6);
        assert!((curve.points[0].kappa - 1.0).abs() <= 1e-12);
        assert!((curve.points[5].kappa - 1.005).abs() <= 1e-12);

        let single = sweep(1, 0.5, 4.5, 4.5, 0.1).unwrap();
        assert_eq!(single.points.len(), 1);
        assert!((single.points[0].p_s - 0.264441659909).abs() <= 1e-9);
    }

    #[test]
    fn sweep_maximum_agrees_with_the_optimizer() {
        let row = optimize_kappa(1, 0.5).unwrap();
        let curve = sweep(1, 0.5, 4.0, 5.0, 0.001).unwrap();
        let best = curve.best().unwrap();
        assert!((best.kappa - row.kappa).abs() <= 0.001 + 1e-9);
        assert!(best.p_s <= row.p_s + 1e-15);
    }

    #[test]
    fn sweep_rejects_malformed_ranges() {
        for (lo, hi, step) in [
            (0.0, 1.0, 0.1),
            (-1.0, 1.0, 0.1),
            (2.0, 1.0, 0.1),
            (1.0, 2.0, 0.0),
            (1.0, 2.0, -0.1),
            (f64::NAN, 2.0, 0.1),
            (1.0, f64::INFINITY, 0.1),
        ] {
            assert!(
                matches!(
                    sweep(0, 0.5, lo, hi, step),
                    Err(Error::InvalidRange { .. })
                ),
                "accepted lo={lo} hi={hi} step={step}"
            );
        }
    }

    #[test]
    fn certain_first_state_reduces_the_rate_to_its_middle_outcome_term() {
        let curve = sweep(0, 1.0, 0.5, 2.5, 0.5).unwrap();
        for p in &curve.points {
            let theta = SystemParams::quantized_theta(0, p.kappa).unwrap();
            let (s, c) = theta.sin_cos();
            let expected = s * s * c * c;
            assert!((p.p_s - expected).abs() <= 1e-15);
            assert_eq!(p.p_c, 0.0);
        }
    }

    #[test]
    fn curve_best_breaks_ties_toward_smaller_kappa() {
        let flat = |kappa: f64, p_s: f64| SweepPoint {
            kappa,
            p_b: p_s,
            p_c: 0.0,
            p_in: 1.0 - p_s,
            p_s,
        };
        let curve = SweepCurve {
            m: 0,
            q1: 0.5,
            points: vec![flat(1.0, 0.2), flat(2.0, 0.25), flat(3.0, 0.25)],
        };
        assert_eq!(curve.best().unwrap().kappa, 2.0);
    }

    #[test]
    fn baseline_and_gap_take_their_defining_values() {
        assert_eq!(projective_baseline(0.5).unwrap(), 0.25);
        assert_eq!(projective_baseline(0.3).unwrap(), 0.35);
        assert!(matches!(
            projective_baseline(1.2),
            Err(Error::InvalidPrior { .. })
        ));

        let row = optimize_kappa(1, 0.5).unwrap();
        let gap = bound_gap(0.5, row.p_s).unwrap();
        assert!(gap > 0.02 && gap < 0.03);
        assert!(matches!(
            bound_gap(0.3, row.p_s),
            Err(Error::UnsupportedPrior { .. })
        ));
    }

    #[test]
    fn gap_shrinks_as_the_family_index_grows() {
        let near = bound_gap(0.5, optimize_kappa(5, 0.5).unwrap().p_s).unwrap();
        let far = bound_gap(0.5, optimize_kappa(0, 0.5).unwrap().p_s).unwrap();
        assert!(near < far);
    }
}
