//! Independent brute-force verification: certified sandwich enclosures with
//! no shape assumption, and randomized member distributions whose
//! expectations every engine's bounds must cover.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::lp::{sample_points, Sampler};
use crate::objective::{ObjectiveFn, Shape};
use crate::pbox::{Curve, PBox};
use crate::randomset::{default_levels, sandwich_bounds};
use crate::result::Enclosure;

/// Outer and inner random-set bounds at 2^ceil(log2 m) levels with dense-scan
/// cell optimization. Deliberately ignores shape information: independence
/// from the code paths it audits is the point.
pub fn certified_enclosure(pbox: &PBox, h: &ObjectiveFn, m: usize) -> Result<Enclosure> {
    let m = m.max(2).next_power_of_two();
    let levels = default_levels(m);
    let sw = sandwich_bounds(pbox, h, &Shape::Unknown, &levels)?;
    Ok(Enclosure {
        lower: sw.lower,
        upper: sw.upper,
        resolution: sw.cells,
    })
}

/// A random step CDF inside the band: values drawn uniformly in
/// [F_lower, F_upper] at sorted knots, monotonicity enforced by running max.
#[derive(Debug, Clone)]
pub struct MemberCdf {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl MemberCdf {
    /// Expectation of h under the step distribution; any mass left above the
    /// last knot value sits on the last knot.
    pub fn expectation(&self, h: &ObjectiveFn) -> f64 {
        self.expectation_cached(&self.knots.iter().map(|&x| h.value(x)).collect::<Vec<_>>())
    }

    /// Same, with h already evaluated on the knots.
    pub fn expectation_cached(&self, h_at_knots: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut prev = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            total += (v - prev) * h_at_knots[i];
            prev = v;
        }
        total += (1.0 - prev) * h_at_knots[h_at_knots.len() - 1];
        total
    }
}

/// Deterministic per seed; the band is sampled at the given knots.
pub fn sample_member_cdf(pbox: &PBox, seed: u64, knots: &[f64]) -> Result<MemberCdf> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(knots.len());
    let mut running = 0.0f64;
    for &x in knots {
        let fl = pbox.eval_cdf(Curve::Lower, x)?;
        let fu = pbox.eval_cdf(Curve::Upper, x)?;
        let v = if fu > fl { rng.gen_range(fl..fu) } else { fl };
        running = running.max(v);
        values.push(running);
    }
    Ok(MemberCdf {
        knots: knots.to_vec(),
        values,
    })
}

/// Default knot grid for member sampling.
pub fn member_knots(pbox: &PBox, n: usize) -> Result<Vec<f64>> {
    sample_points(pbox, &Shape::Unknown, Sampler::QuantileSpaced, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::ObjectiveFn;

    fn example_pbox() -> PBox {
        PBox::exponential(0.2, 0.5).unwrap()
    }

    #[test]
    fn enclosure_brackets_worked_examples() {
        let pb = example_pbox();
        let m = 1 << 14;
        let h1 = ObjectiveFn::affine(20.0, -1.0);
        let e1 = certified_enclosure(&pb, &h1, m).unwrap();
        assert!(e1.lower.contains(15.0, 1e-9));
        assert!(e1.upper.contains(18.0, 1e-9));
        assert!(e1.lower.width() < 0.01, "width {}", e1.lower.width());

        let h3 = ObjectiveFn::quadratic_peak(60.0, 5.0);
        let e3 = certified_enclosure(&pb, &h3, m).unwrap();
        assert!(e3.lower.contains(29.7451253761921, 1e-9));
        assert!(e3.upper.contains(52.7372920695809, 1e-9));
    }

    #[test]
    fn constant_objective_zero_width() {
        let pb = example_pbox();
        let h = ObjectiveFn::from_fn(|_| 4.25, "4.25");
        let e = certified_enclosure(&pb, &h, 256).unwrap();
        assert!(e.lower.width() < 1e-12);
        assert!(e.upper.width() < 1e-12);
        assert!((e.lower.center() - 4.25).abs() < 1e-12);
    }

    #[test]
    fn members_are_monotone_in_band_and_deterministic() {
        let pb = example_pbox();
        let knots = member_knots(&pb, 512).unwrap();
        let a = sample_member_cdf(&pb, 42, &knots).unwrap();
        let b = sample_member_cdf(&pb, 42, &knots).unwrap();
        assert_eq!(a.values, b.values);
        let mut prev = 0.0;
        for (i, &v) in a.values.iter().enumerate() {
            assert!(v >= prev);
            let fl = pb.eval_cdf(Curve::Lower, a.knots[i]).unwrap();
            let fu = pb.eval_cdf(Curve::Upper, a.knots[i]).unwrap();
            assert!(v >= fl - 1e-12 && v <= fu + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn degenerate_pbox_member_is_the_distribution() {
        let spec = crate::pbox::CdfSpec::tabulated(vec![(0.0, 0.0), (2.0, 1.0)]).unwrap();
        let pb = PBox::degenerate(spec).unwrap();
        let knots: Vec<f64> = (1..200).map(|i| 2.0 * i as f64 / 200.0).collect();
        let m = sample_member_cdf(&pb, 7, &knots).unwrap();
        for (i, &v) in m.values.iter().enumerate() {
            assert!((v - knots[i] / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn member_expectations_respect_monotone_bounds() {
        let pb = example_pbox();
        let h = ObjectiveFn::affine(20.0, -1.0);
        let knots = member_knots(&pb, 1024).unwrap();
        let h_cache: Vec<f64> = knots.iter().map(|&x| h.value(x)).collect();
        let mut min_e = f64::INFINITY;
        let mut max_e = f64::NEG_INFINITY;
        for seed in 0..500 {
            let m = sample_member_cdf(&pb, seed, &knots).unwrap();
            let e = m.expectation_cached(&h_cache);
            min_e = min_e.min(e);
            max_e = max_e.max(e);
        }
        assert!(min_e >= 15.0 - 1e-3, "member mean {min_e} below lower bound");
        assert!(max_e <= 18.0 + 1e-3, "member mean {max_e} above upper bound");
    }
}
