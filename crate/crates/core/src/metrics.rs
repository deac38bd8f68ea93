//! Distribution distances: total variation between discrete laws, exact
//! total variation against any continuous law, and Kolmogorov-distance
//! probes of weak convergence.

use statrs::function::erf::erf;
use statrs::function::gamma::ln_gamma;

use crate::model::Sample;
use crate::{Error, Result};

/// Finitely supported distribution with strictly increasing atom points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteDist {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Argument("distribution needs at least one atom".into()));
        }
        let mut total = 0.0;
        for window in atoms.windows(2) {
            if !(window[0].0 < window[1].0) {
                return Err(Error::Argument("atom points must be strictly increasing".into()));
            }
        }
        for &(point, prob) in &atoms {
            if !point.is_finite() || !(prob >= 0.0) {
                return Err(Error::Argument("atoms need finite points and probs >= 0".into()));
            }
            total += prob;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!("atom probabilities sum to {total}")));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// Binomial(n, p) standardized to mean 0 and variance 1. Probabilities are
/// computed through log binomial coefficients and renormalized, so n = 10^4
/// stays well conditioned.
pub fn standardized_binomial(n: u64, p: f64) -> Result<DiscreteDist> {
    if n == 0 {
        return Err(Error::Argument("binomial needs at least one trial".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Argument(format!("success probability {p} must be in (0, 1)")));
    }
    let nf = n as f64;
    let sd = (nf * p * (1.0 - p)).sqrt();
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let ln_n_fact = ln_gamma(nf + 1.0);
    let mut atoms = Vec::with_capacity(n as usize + 1);
    for j in 0..=n {
        let jf = j as f64;
        let ln_prob = ln_n_fact - ln_gamma(jf + 1.0) - ln_gamma(nf - jf + 1.0)
            + jf * ln_p
            + (nf - jf) * ln_q;
        atoms.push(((jf - nf * p) / sd, ln_prob.exp()));
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    for a in &mut atoms {
        a.1 /= total;
    }
    DiscreteDist::new(atoms)
}

/// Total variation distance between two discrete laws: half the L1 distance
/// over the union of supports.
pub fn tv_discrete(p: &DiscreteDist, q: &DiscreteDist) -> f64 {
    let mut total = 0.0;
    let (mut i, mut j) = (0, 0);
    let (pa, qa) = (p.atoms(), q.atoms());
    while i < pa.len() || j < qa.len() {
        match (pa.get(i), qa.get(j)) {
            (Some(&(xp, wp)), Some(&(xq, wq))) => {
                if xp == xq {
                    total += (wp - wq).abs();
                    i += 1;
                    j += 1;
                } else if xp < xq {
                    total += wp;
                    i += 1;
                } else {
                    total += wq;
                    j += 1;
                }
            }
            (Some(&(_, wp)), None) => {
                total += wp;
                i += 1;
            }
            (None, Some(&(_, wq))) => {
                total += wq;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    0.5 * total
}

/// Total variation distance between a discrete law and any continuous law is
/// exactly one: the complement of the atom set is the witnessing event.
pub fn tv_discrete_vs_continuous(p: &DiscreteDist) -> f64 {
    debug_assert!(!p.atoms().is_empty());
    1.0
}

/// Standard normal CDF through the error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Kolmogorov distance `sup_x |F_p(x) - Phi(x)|`, evaluated exactly at the
/// atom points from the left and from the right.
pub fn kolmogorov_discrete_vs_normal(p: &DiscreteDist) -> f64 {
    let mut cum = 0.0;
    let mut sup = 0.0f64;
    for &(point, prob) in p.atoms() {
        let phi = normal_cdf(point);
        sup = sup.max((cum - phi).abs());
        cum += prob;
        sup = sup.max((cum - phi).abs());
    }
    sup
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KsCoordinate {
    X,
    Y,
    /// Sup of the joint empirical CDF difference over a 64 x 64 grid of
    /// pooled empirical quantiles. A probe of joint weak convergence, not the
    /// Levy-Prokhorov metric.
    JointGrid,
}

const JOINT_GRID: usize = 64;

/// Two-sample Kolmogorov-Smirnov statistic on the chosen coordinate.
pub fn ks_two_sample(a: &Sample, b: &Sample, coordinate: KsCoordinate) -> Result<f64> {
    if a.rows.is_empty() || b.rows.is_empty() {
        return Err(Error::Argument("both samples must be nonempty".into()));
    }
    match coordinate {
        KsCoordinate::X => Ok(ks_scalar(
            a.rows.iter().map(|r| r.x).collect(),
            b.rows.iter().map(|r| r.x).collect(),
        )),
        KsCoordinate::Y => Ok(ks_scalar(
            a.rows.iter().map(|r| r.y).collect(),
            b.rows.iter().map(|r| r.y).collect(),
        )),
        KsCoordinate::JointGrid => Ok(ks_joint_grid(a, b)),
    }
}

fn ks_scalar(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn ks_joint_grid(a: &Sample, b: &Sample) -> f64 {
    let quantile_grid = |f: fn(&crate::model::Obs) -> f64| -> Vec<f64> {
        let mut pooled: Vec<f64> =
            a.rows.iter().chain(b.rows.iter()).map(f).collect();
        pooled.sort_by(|x, y| x.total_cmp(y));
        (0..JOINT_GRID)
            .map(|i| {
                let idx = ((i + 1) * pooled.len()) / (JOINT_GRID + 1);
                pooled[idx.min(pooled.len() - 1)]
            })
            .collect()
    };
    let gx = quantile_grid(|r| r.x);
    let gy = quantile_grid(|r| r.y);
    let joint_cdf = |s: &Sample, x: f64, y: f64| -> f64 {
        s.rows.iter().filter(|r| r.x <= x && r.y <= y).count() as f64 / s.rows.len() as f64
    };
    let mut d = 0.0f64;
    for &x in &gx {
        for &y in &gy {
            d = d.max((joint_cdf(a, x, y) - joint_cdf(b, x, y)).abs());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Obs;

    fn dist(atoms: &[(f64, f64)]) -> DiscreteDist {
        DiscreteDist::new(atoms.to_vec()).unwrap()
    }

    #[test]
    fn tv_examples() {
        let p = dist(&[(0.0, 0.5), (1.0, 0.5)]);
        let q = dist(&[(0.0, 0.25), (1.0, 0.75)]);
        assert!((tv_discrete(&p, &q) - 0.25).abs() < 1e-15);
        assert_eq!(tv_discrete(&p, &p), 0.0);
        let r = dist(&[(2.0, 0.5), (3.0, 0.5)]);
        assert!((tv_discrete(&p, &r) - 1.0).abs() < 1e-15);
        // symmetry
        assert_eq!(tv_discrete(&p, &q), tv_discrete(&q, &p));
    }

    #[test]
    fn tv_identity_of_indiscernibles() {
        let p = dist(&[(0.0, 0.3), (1.0, 0.7)]);
        let q = dist(&[(0.0, 0.3), (1.0, 0.7)]);
        assert_eq!(tv_discrete(&p, &q), 0.0);
        let q2 = dist(&[(0.0, 0.31), (1.0, 0.69)]);
        assert!(tv_discrete(&p, &q2) > 0.0);
    }

    #[test]
    fn tv_against_continuous_is_one() {
        let b = standardized_binomial(10, 0.5).unwrap();
        assert_eq!(tv_discrete_vs_continuous(&b), 1.0);
        let single = dist(&[(0.123, 1.0)]);
        assert_eq!(tv_discrete_vs_continuous(&single), 1.0);
        assert!(DiscreteDist::new(vec![]).is_err());
    }

    #[test]
    fn standardized_binomial_shape() {
        let b = standardized_binomial(100, 0.5).unwrap();
        assert_eq!(b.atoms().len(), 101);
        let mean: f64 = b.atoms().iter().map(|&(x, w)| x * w).sum();
        let var: f64 = b.atoms().iter().map(|&(x, w)| x * x * w).sum();
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kolmogorov_matches_dense_grid_oracle() {
        let b = standardized_binomial(4, 0.5).unwrap();
        let exact = kolmogorov_discrete_vs_normal(&b);
        // brute-force sup over a dense grid
        let mut oracle = 0.0f64;
        let mut x = -4.0;
        while x <= 4.0 {
            let cdf: f64 =
                b.atoms().iter().filter(|&&(p, _)| p <= x).map(|&(_, w)| w).sum();
            oracle = oracle.max((cdf - normal_cdf(x)).abs());
            x += 1e-4;
        }
        assert!((exact - oracle).abs() < 1e-4, "{exact} vs {oracle}");
    }

    #[test]
    fn kolmogorov_shrinks_with_n() {
        let d25 = kolmogorov_discrete_vs_normal(&standardized_binomial(25, 0.5).unwrap());
        let d100 = kolmogorov_discrete_vs_normal(&standardized_binomial(100, 0.5).unwrap());
        let d400 = kolmogorov_discrete_vs_normal(&standardized_binomial(400, 0.5).unwrap());
        assert!(d100 < 0.05);
        assert!(d400 < d25);
        assert!(d400 < d100);
    }

    fn sample_of(xs: &[f64]) -> Sample {
        Sample::from_rows(xs.iter().map(|&x| Obs { y: x, x, w: None }).collect())
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = sample_of(&[0.1, 0.4, 0.7]);
        assert_eq!(ks_two_sample(&a, &a, KsCoordinate::X).unwrap(), 0.0);
        let b = sample_of(&[10.0, 11.0]);
        assert_eq!(ks_two_sample(&a, &b, KsCoordinate::X).unwrap(), 1.0);
        // symmetry
        let c = sample_of(&[0.2, 0.5, 0.9, 1.4]);
        assert_eq!(
            ks_two_sample(&a, &c, KsCoordinate::X).unwrap(),
            ks_two_sample(&c, &a, KsCoordinate::X).unwrap()
        );
    }

    #[test]
    fn ks_bounds() {
        let a = sample_of(&[0.0, 0.5, 1.0, 2.0]);
        let b = sample_of(&[0.25, 0.5, 0.75]);
        for coord in [KsCoordinate::X, KsCoordinate::Y, KsCoordinate::JointGrid] {
            let d = ks_two_sample(&a, &b, coord).unwrap();
            assert!((0.0..=1.0).contains(&d));
        }
        assert!(ks_two_sample(&a, &Sample::from_rows(vec![]), KsCoordinate::X).is_err());
    }
}
