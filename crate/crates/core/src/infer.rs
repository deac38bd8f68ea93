//! Wald tests, interval inversion, and exact enumeration for small binary
//! toy families.

use crate::{Error, Result};

/// Outcome of a two-sided Wald test of `m0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub m0: f64,
    /// Critical value `z = Phi^{-1}(1 - alpha/2)`.
    pub z: f64,
    pub reject: bool,
}

/// Closed-form inverted confidence interval `[t - s z, t + s z]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiResult {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl CiResult {
    pub fn contains(&self, m: f64) -> bool {
        self.lo <= m && m <= self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

fn check_ts(s: f64, alpha: f64) -> Result<()> {
    if !(s > 0.0) {
        return Err(Error::Argument(format!("standard error {s} must be positive")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Argument(format!("alpha {alpha} must be in (0, 1)")));
    }
    Ok(())
}

pub fn wald_test(t: f64, s: f64, m0: f64, alpha: f64) -> Result<TestOutcome> {
    check_ts(s, alpha)?;
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let statistic = (t - m0) / s;
    Ok(TestOutcome { statistic, m0, z, reject: statistic.abs() > z })
}

pub fn invert_ci(t: f64, s: f64, alpha: f64) -> Result<CiResult> {
    check_ts(s, alpha)?;
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    Ok(CiResult { lo: t - s * z, hi: t + s * z, level: 1.0 - alpha })
}

/// Inverse standard normal CDF (Wichura's PPND16 rational approximation,
/// absolute error below 1e-9 over [1e-12, 1 - 1e-12]).
#[allow(clippy::excessive_precision)] // published coefficients kept verbatim
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Argument(format!("probability {p} must be in (0, 1)")));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((5.226_495_278_852_545_5e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return Ok(q * num / den);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_9e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_8e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_68e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    Ok(if q < 0.0 { -val } else { val })
}

/// One model in a finite toy family: `n` independent Bernoulli draws with
/// per-observation success probabilities, mapped to a functional value `mu`.
#[derive(Debug, Clone)]
pub struct ToyModel {
    pub probs: Vec<f64>,
    pub mu: f64,
}

#[derive(Debug, Clone)]
pub struct ToyFamily {
    pub models: Vec<ToyModel>,
}

impl ToyFamily {
    pub fn n(&self) -> usize {
        self.models.first().map(|m| m.probs.len()).unwrap_or(0)
    }
}

/// Exact enumeration over all `2^n` binary samples: returns the confidence
/// level (infimum coverage of the inverted region) and the supremum of the
/// sizes of the per-`m` tests. The two sides are computed independently; for
/// a finite family they agree as `coverage = 1 - sup_size`.
///
/// `rule(m, z)` returns `true` when the test of `mu = m` rejects on sample
/// `z`; it must be nonrandomized and defined for every `m` in the family's
/// range.
pub fn toy_duality_check<F>(family: &ToyFamily, rule: F) -> Result<(f64, f64)>
where
    F: Fn(f64, &[bool]) -> bool,
{
    if family.models.is_empty() {
        return Err(Error::Argument("toy family must contain at least one model".into()));
    }
    let n = family.n();
    if n == 0 || n > 12 {
        return Err(Error::Argument(format!("toy sample size {n} must be in 1..=12")));
    }
    for m in &family.models {
        if m.probs.len() != n {
            return Err(Error::Argument("all models must share the sample size".into()));
        }
        if m.probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Argument("Bernoulli probabilities must be in [0, 1]".into()));
        }
    }

    let mut bits = vec![false; n];
    // rejection probability of phi_m under model P, exact enumeration
    let mut reject_prob = |m: f64, probs: &[f64]| -> f64 {
        let mut total = 0.0;
        for mask in 0u32..(1u32 << n) {
            let mut p = 1.0;
            for (i, bit) in bits.iter_mut().enumerate() {
                *bit = mask & (1 << i) != 0;
                p *= if *bit { probs[i] } else { 1.0 - probs[i] };
            }
            if rule(m, &bits) {
                total += p;
            }
        }
        total
    };

    // coverage of each model by the inverted region
    let mut coverage = f64::INFINITY;
    for model in &family.models {
        coverage = coverage.min(1.0 - reject_prob(model.mu, &model.probs));
    }

    // sup over m of the size of phi_m
    let mut mus: Vec<f64> = family.models.iter().map(|m| m.mu).collect();
    mus.sort_by(|a, b| a.total_cmp(b));
    mus.dedup();
    let mut sup_size = 0.0f64;
    for &m in &mus {
        for model in family.models.iter().filter(|md| md.mu == m) {
            sup_size = sup_size.max(reject_prob(m, &model.probs));
        }
    }
    Ok((coverage, sup_size))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn quantile_against_reference() {
        let n = Normal::new(0.0, 1.0).unwrap();
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert!((normal_quantile(0.975).unwrap() - 1.959964).abs() < 1e-6);
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let expect = n.inverse_cdf(p);
            assert!((normal_quantile(p).unwrap() - expect).abs() < 1e-9, "p = {p}");
        }
        for &p in &[1e-12, 1e-9, 1e-4, 1.0 - 1e-4, 1.0 - 1e-9] {
            let expect = n.inverse_cdf(p);
            assert!((normal_quantile(p).unwrap() - expect).abs() < 1e-8, "p = {p}");
        }
    }

    #[test]
    fn quantile_symmetry_and_domain() {
        for &p in &[0.01, 0.2, 0.77, 0.999] {
            let a = normal_quantile(p).unwrap();
            let b = normal_quantile(1.0 - p).unwrap();
            assert!((a + b).abs() < 1e-12);
        }
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn wald_examples() {
        let out = wald_test(0.3, 0.1, 0.3, 0.05).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert!(!out.reject);

        let out = wald_test(2.0, 1.0, 0.0, 0.05).unwrap();
        assert_eq!(out.statistic, 2.0);
        assert!(out.reject);
        assert!((out.z - 1.959964).abs() < 1e-5);

        assert!(wald_test(1.0, 0.0, 0.0, 0.05).is_err());
        assert!(wald_test(1.0, -1.0, 0.0, 0.05).is_err());
    }

    #[test]
    fn ci_examples() {
        let ci = invert_ci(1.0, 0.4, 0.05).unwrap();
        assert!((ci.lo - 0.216).abs() < 1e-3);
        assert!((ci.hi - 1.784).abs() < 1e-3);
        assert!((ci.length() - 2.0 * 0.4 * normal_quantile(0.975).unwrap()).abs() < 1e-12);
        assert!(ci.contains(1.0)); // always contains t

        let narrow = invert_ci(1.0, 0.4, 0.999).unwrap();
        assert!(narrow.length() < 0.002);
    }

    #[test]
    fn test_ci_duality() {
        let mut rng = StdRng::seed_from_u64(123);
        for _ in 0..10_000 {
            let t = rng.gen_range(-5.0..5.0);
            let s = rng.gen_range(1e-3..3.0);
            let m0 = rng.gen_range(-5.0..5.0);
            let alpha = rng.gen_range(0.001..0.999);
            let out = wald_test(t, s, m0, alpha).unwrap();
            let ci = invert_ci(t, s, alpha).unwrap();
            assert_eq!(out.reject, !ci.contains(m0));
        }
    }

    #[test]
    fn rejection_monotone_in_alpha() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..1000 {
            let t = rng.gen_range(-3.0..3.0);
            let s = rng.gen_range(0.1..2.0);
            let a1 = rng.gen_range(0.01..0.5);
            let a2 = rng.gen_range(a1..0.99);
            let r1 = wald_test(t, s, 0.0, a1).unwrap().reject;
            let r2 = wald_test(t, s, 0.0, a2).unwrap().reject;
            if r1 {
                assert!(r2);
            }
        }
    }

    #[test]
    fn toy_single_bernoulli_example() {
        // n = 1, theta in {0.2, 0.8}, mu = theta; phi_m rejects iff z != I{m > 0.5}
        let family = ToyFamily {
            models: vec![
                ToyModel { probs: vec![0.2], mu: 0.2 },
                ToyModel { probs: vec![0.8], mu: 0.8 },
            ],
        };
        let (coverage, sup_size) =
            toy_duality_check(&family, |m, z| z[0] != (m > 0.5)).unwrap();
        // phi_{0.2} under theta=0.2 rejects when Z=1: size 0.2; same for 0.8
        assert!((sup_size - 0.2).abs() < 1e-12);
        assert!((coverage - 0.8).abs() < 1e-12);
        assert!((coverage - (1.0 - sup_size)).abs() < 1e-12);
    }

    #[test]
    fn toy_degenerate_rules() {
        let family = ToyFamily {
            models: vec![
                ToyModel { probs: vec![0.3, 0.6, 0.9], mu: 0.0 },
                ToyModel { probs: vec![0.5, 0.5, 0.5], mu: 1.0 },
            ],
        };
        let (cov, size) = toy_duality_check(&family, |_, _| false).unwrap();
        assert_eq!((cov, size), (1.0, 0.0));
        let (cov, size) = toy_duality_check(&family, |_, _| true).unwrap();
        assert_eq!((cov, size), (0.0, 1.0));
    }

    #[test]
    fn toy_equality_on_random_families() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..25 {
            let n = rng.gen_range(1..=8usize);
            let n_models = rng.gen_range(1..=5usize);
            let models: Vec<ToyModel> = (0..n_models)
                .map(|_| ToyModel {
                    probs: (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
                    mu: rng.gen_range(0..3) as f64,
                })
                .collect();
            let family = ToyFamily { models };
            let salt: u64 = rng.gen();
            let rule = |m: f64, z: &[bool]| {
                // arbitrary deterministic rule hashed from (m, z)
                let mut h = salt ^ m.to_bits();
                for &b in z {
                    h = h.wrapping_mul(0x100000001b3).wrapping_add(b as u64);
                }
                h & 1 == 0
            };
            let (coverage, sup_size) = toy_duality_check(&family, rule).unwrap();
            assert!(
                (coverage - (1.0 - sup_size)).abs() < 1e-12,
                "coverage {coverage} vs 1 - sup_size {}",
                1.0 - sup_size
            );
        }
    }

    #[test]
    fn toy_rejects_oversized_samples() {
        let family = ToyFamily {
            models: vec![ToyModel { probs: vec![0.5; 13], mu: 0.0 }],
        };
        assert!(toy_duality_check(&family, |_, _| false).is_err());
        assert!(toy_duality_check(&ToyFamily { models: vec![] }, |_, _| false).is_err());
    }
}
