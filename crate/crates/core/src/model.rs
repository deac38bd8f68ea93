//! Data-generating processes with a discontinuous conditional mean.
//!
//! A [`MeanFunction`] is a pair of polynomials (degree at most 3) in
//! `x - cutoff`, one per side, plus optional per-level covariate shifts, an
//! optional atom value at the cutoff itself (for bunching), and an optional
//! adversarial window blend. A [`Dgp`] adds the forcing-variable, covariate
//! and noise laws; [`sample`] draws reproducible iid rows from it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StudentT};

use crate::{Error, Result};

/// Highest polynomial degree allowed per side.
pub const MAX_DEGREE: usize = 3;

/// Polynomial in `u = x - cutoff`, constant coefficient first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Argument("polynomial needs at least one coefficient".into()));
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::Argument(format!(
                "polynomial degree {} exceeds the maximum {}",
                coeffs.len() - 1,
                MAX_DEGREE
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument("polynomial coefficients must be finite".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn deriv_eval(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * u + c * i as f64)
    }

    /// Value at `u = 0`.
    pub fn constant(&self) -> f64 {
        self.coeffs[0]
    }

    /// Derivative at `u = 0`.
    pub fn slope(&self) -> f64 {
        self.coeffs.get(1).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Which discontinuity the window blend hides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlendKind {
    /// Linear ramp on `[c - 1/k, c)` that moves the level jump to the target.
    RddLevel,
    /// Quadratic ramp on `[c - 1/k, c)` whose derivative moves the kink to the
    /// target; adds the constant `(s' - m) / (2k)` on `[c, sup X]` to keep the
    /// mean continuous.
    RkdSlope,
    /// Tent factor `(1 - k (x - c))` on `(c, c + 1/k)` that moves every
    /// per-level bunching gap to the target.
    Bunching,
}

/// Window blend appended to a mean function. `k` controls the window width
/// `1/k`; `target` is the null value the blend enforces exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialBlend {
    pub kind: BlendKind,
    pub k: u64,
    pub target: f64,
}

/// Piecewise conditional mean with an explicit jump/kink at the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFunction {
    left: Poly,
    right: Poly,
    cutoff: f64,
    support: (f64, f64),
    /// Additive shift per covariate level.
    level_shifts: Option<Vec<f64>>,
    /// Per-level gap between the value at exactly `x = cutoff` and the right
    /// limit there (the bunching discontinuity).
    atom_tau: Option<Vec<f64>>,
    blend: Option<AdversarialBlend>,
}

impl MeanFunction {
    /// Mean with explicit side polynomials in `x - cutoff`.
    pub fn new(left: Vec<f64>, right: Vec<f64>, cutoff: f64, support: (f64, f64)) -> Result<Self> {
        let (lo, hi) = support;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Argument(format!("invalid support [{lo}, {hi}]")));
        }
        if !(cutoff >= lo && cutoff < hi) {
            return Err(Error::Argument(format!(
                "cutoff {cutoff} outside support [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            left: Poly::new(left)?,
            right: Poly::new(right)?,
            cutoff,
            support,
            level_shifts: None,
            atom_tau: None,
            blend: None,
        })
    }

    /// Mean `base(x) + I{x >= c} (jump + kink (x - c))` with `base` shared by
    /// both sides, so the jump and kink at the cutoff are exactly as given.
    pub fn with_jump(
        base: Vec<f64>,
        jump: f64,
        kink: f64,
        cutoff: f64,
        support: (f64, f64),
    ) -> Result<Self> {
        let mut right = base.clone();
        while right.len() < 2 {
            right.push(0.0);
        }
        right[0] += jump;
        right[1] += kink;
        Self::new(base, right, cutoff, support)
    }

    pub fn with_level_shifts(mut self, shifts: Vec<f64>) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::Argument("level shifts must be nonempty".into()));
        }
        self.level_shifts = Some(shifts);
        Ok(self)
    }

    /// Set the per-level bunching gap at the cutoff.
    pub fn with_atom_tau(mut self, tau: Vec<f64>) -> Result<Self> {
        if tau.is_empty() {
            return Err(Error::Argument("atom gaps must be nonempty".into()));
        }
        if let Some(shifts) = &self.level_shifts {
            if shifts.len() != tau.len() {
                return Err(Error::Argument(
                    "atom gaps and level shifts must cover the same levels".into(),
                ));
            }
        }
        self.atom_tau = Some(tau);
        Ok(self)
    }

    /// Attach a window blend. Used by the `adversary` constructors, which
    /// validate that the window fits inside the support.
    pub(crate) fn with_blend(mut self, blend: AdversarialBlend) -> Self {
        self.blend = Some(blend);
        self
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn blend(&self) -> Option<&AdversarialBlend> {
        self.blend.as_ref()
    }

    pub fn num_levels(&self) -> usize {
        self.level_shifts
            .as_ref()
            .map(|s| s.len())
            .or_else(|| self.atom_tau.as_ref().map(|t| t.len()))
            .unwrap_or(1)
    }

    pub fn has_atom(&self) -> bool {
        self.atom_tau.is_some()
    }

    fn shift(&self, w: Option<usize>) -> Result<f64> {
        match (&self.level_shifts, w) {
            (Some(s), Some(i)) => s.get(i).copied().ok_or_else(|| {
                Error::Argument(format!("covariate level {i} out of range ({} levels)", s.len()))
            }),
            _ => Ok(0.0),
        }
    }

    fn atom_gap(&self, w: Option<usize>) -> Result<f64> {
        match &self.atom_tau {
            None => Ok(0.0),
            Some(t) => {
                let i = w.unwrap_or(0);
                t.get(i).copied().ok_or_else(|| {
                    Error::Argument(format!("covariate level {i} out of range ({} levels)", t.len()))
                })
            }
        }
    }

    /// Jump and kink of the side polynomials alone, blend excluded.
    fn base_jump(&self) -> f64 {
        self.right.constant() - self.left.constant()
    }

    fn base_kink(&self) -> f64 {
        self.right.slope() - self.left.slope()
    }

    /// Conditional mean at `x` (and covariate level `w`), blend included.
    pub fn eval(&self, x: f64, w: Option<usize>) -> Result<f64> {
        let (lo, hi) = self.support;
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain(format!("x = {x} outside support [{lo}, {hi}]")));
        }
        let u = x - self.cutoff;
        let mut v = if x < self.cutoff {
            self.left.eval(u)
        } else {
            self.right.eval(u)
        };
        v += self.shift(w)?;
        if x == self.cutoff {
            v += self.atom_gap(w)?;
        }
        if let Some(b) = &self.blend {
            let inv_k = 1.0 / b.k as f64;
            match b.kind {
                BlendKind::RddLevel => {
                    if u >= -inv_k && u < 0.0 {
                        v += b.k as f64 * (self.base_jump() - b.target) * (u + inv_k);
                    }
                }
                BlendKind::RkdSlope => {
                    let amp = self.base_kink() - b.target;
                    if u >= -inv_k && u < 0.0 {
                        let z = u + inv_k;
                        v += 0.5 * b.k as f64 * amp * z * z;
                    } else if u >= 0.0 {
                        v += 0.5 * amp * inv_k;
                    }
                }
                BlendKind::Bunching => {
                    if u > 0.0 && u < inv_k {
                        v += (self.atom_gap(w)? - b.target) * (1.0 - b.k as f64 * u);
                    }
                }
            }
        }
        Ok(v)
    }

    /// Level discontinuity at the cutoff: right limit minus left limit,
    /// blend included, computed analytically.
    pub fn jump(&self) -> f64 {
        match &self.blend {
            None => self.base_jump(),
            Some(b) => match b.kind {
                // left limit gains k (m' - m) / k, so the jump is the target
                BlendKind::RddLevel => b.target,
                // value-continuous by construction
                BlendKind::RkdSlope => self.base_jump(),
                // right limit gains the level-0 bracket
                BlendKind::Bunching => {
                    let tau0 = self.atom_tau.as_ref().map(|t| t[0]).unwrap_or(0.0);
                    self.base_jump() + (tau0 - b.target)
                }
            },
        }
    }

    /// Slope discontinuity at the cutoff, blend included.
    pub fn kink(&self) -> f64 {
        match &self.blend {
            None => self.base_kink(),
            Some(b) => match b.kind {
                BlendKind::RddLevel => self.base_kink() - b.k as f64 * (self.base_jump() - b.target),
                BlendKind::RkdSlope => b.target,
                BlendKind::Bunching => {
                    let tau0 = self.atom_tau.as_ref().map(|t| t[0]).unwrap_or(0.0);
                    self.base_kink() - b.k as f64 * (tau0 - b.target)
                }
            },
        }
    }

    /// Bunching gap at level `w`: value at exactly the cutoff minus the right
    /// limit there, blend included.
    pub fn tau(&self, w: usize) -> Result<f64> {
        let gap = self.atom_gap(Some(w))?;
        Ok(match &self.blend {
            Some(b) if b.kind == BlendKind::Bunching => b.target,
            _ => gap,
        })
    }
}

/// Forcing-variable law.
#[derive(Debug, Clone, PartialEq)]
pub enum ForcingLaw {
    Uniform { lo: f64, hi: f64 },
    /// Point mass at 0 plus a uniform continuous part on `(0, hi]`.
    BunchedUniform { atom_weight: f64, hi: f64 },
}

impl ForcingLaw {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ForcingLaw::Uniform { lo, hi } => (lo, hi),
            ForcingLaw::BunchedUniform { hi, .. } => (0.0, hi),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ForcingLaw::Uniform { lo, hi } => {
                if !(lo < hi) {
                    return Err(Error::Argument(format!("empty x support [{lo}, {hi}]")));
                }
            }
            ForcingLaw::BunchedUniform { atom_weight, hi } => {
                if !(atom_weight > 0.0 && atom_weight < 1.0) {
                    return Err(Error::Argument(format!(
                        "atom weight {atom_weight} must be in (0, 1)"
                    )));
                }
                if !(hi > 0.0) {
                    return Err(Error::Argument(format!("upper bound {hi} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// Density of the continuous part at an interior point.
    pub fn density(&self) -> f64 {
        match *self {
            ForcingLaw::Uniform { lo, hi } => 1.0 / (hi - lo),
            ForcingLaw::BunchedUniform { atom_weight, hi } => (1.0 - atom_weight) / hi,
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            ForcingLaw::Uniform { lo, hi } => rng.gen_range(lo..=hi),
            ForcingLaw::BunchedUniform { atom_weight, hi } => {
                if rng.gen::<f64>() < atom_weight {
                    0.0
                } else {
                    // (0, hi]
                    hi * (1.0 - rng.gen::<f64>())
                }
            }
        }
    }
}

/// Discrete covariate law: level probabilities; the per-level mean shifts live
/// on the [`MeanFunction`].
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateLaw {
    probs: Vec<f64>,
}

impl CovariateLaw {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Argument("covariate probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!(
                "covariate probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn levels(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

/// Centered noise law with scale `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseLaw {
    Normal { sigma: f64 },
    /// Student-t rescaled so the variance is `sigma^2`; requires `df >= 3`.
    StudentT { df: f64, sigma: f64 },
}

impl NoiseLaw {
    pub fn validate(&self) -> Result<()> {
        let sigma = match *self {
            NoiseLaw::Normal { sigma } => sigma,
            NoiseLaw::StudentT { df, sigma } => {
                if !(df >= 3.0) {
                    return Err(Error::Argument(format!("student df {df} must be >= 3")));
                }
                sigma
            }
        };
        if !(sigma > 0.0) {
            return Err(Error::Argument(format!("noise scale {sigma} must be positive")));
        }
        Ok(())
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseLaw::Normal { sigma } => Normal::new(0.0, sigma).unwrap().sample(rng),
            NoiseLaw::StudentT { df, sigma } => {
                let t = StudentT::new(df).unwrap().sample(rng);
                t * sigma * ((df - 2.0) / df).sqrt()
            }
        }
    }
}

/// Full data-generating process.
#[derive(Debug, Clone, PartialEq)]
pub struct Dgp {
    pub mean: MeanFunction,
    pub xlaw: ForcingLaw,
    pub wlaw: Option<CovariateLaw>,
    pub noise: NoiseLaw,
    pub id: String,
}

impl Dgp {
    pub fn new(
        mean: MeanFunction,
        xlaw: ForcingLaw,
        wlaw: Option<CovariateLaw>,
        noise: NoiseLaw,
        id: impl Into<String>,
    ) -> Result<Self> {
        xlaw.validate()?;
        noise.validate()?;
        let (lo, hi) = xlaw.support();
        let (mlo, mhi) = mean.support();
        if mlo != lo || mhi != hi {
            return Err(Error::Argument(format!(
                "mean support [{mlo}, {mhi}] does not match x support [{lo}, {hi}]"
            )));
        }
        match xlaw {
            ForcingLaw::Uniform { lo, hi } => {
                if !(mean.cutoff() > lo && mean.cutoff() < hi) {
                    return Err(Error::Argument(format!(
                        "cutoff {} must be interior to [{lo}, {hi}]",
                        mean.cutoff()
                    )));
                }
            }
            ForcingLaw::BunchedUniform { .. } => {
                if mean.cutoff() != 0.0 {
                    return Err(Error::Argument("bunching requires cutoff 0".into()));
                }
                if !mean.has_atom() {
                    return Err(Error::Argument(
                        "bunching mean needs atom gaps at the cutoff".into(),
                    ));
                }
            }
        }
        if let Some(w) = &wlaw {
            if w.levels() != mean.num_levels() {
                return Err(Error::Argument(format!(
                    "covariate law has {} levels but the mean has {}",
                    w.levels(),
                    mean.num_levels()
                )));
            }
        }
        Ok(Self { mean, xlaw, wlaw, noise, id: id.into() })
    }
}

/// One observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obs {
    pub y: f64,
    pub x: f64,
    pub w: Option<usize>,
}

/// Realized dataset, tagged with the seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub rows: Vec<Obs>,
    pub seed: u64,
    pub dgp_id: String,
}

impl Sample {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Sample with explicit rows, for tests and estimator inputs.
    pub fn from_rows(rows: Vec<Obs>) -> Self {
        Self { rows, seed: 0, dgp_id: String::new() }
    }
}

/// Draw `n` iid observations from `dgp`. Identical `(dgp, n, seed)` yields an
/// identical sample bit for bit. Draw order per row is fixed: x, then w, then
/// noise.
pub fn sample(dgp: &Dgp, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::Argument("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let x = dgp.xlaw.draw(&mut rng);
        let w = dgp.wlaw.as_ref().map(|law| law.draw(&mut rng));
        let eps = dgp.noise.draw(&mut rng);
        let y = dgp.mean.eval(x, w)? + eps;
        rows.push(Obs { y, x, w });
    }
    Ok(Sample { rows, seed, dgp_id: dgp.id.clone() })
}
