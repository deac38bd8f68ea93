//! Null sequences that hide a discontinuity inside a width-`1/k` window.
//!
//! Each constructor takes the alternative's mean function and returns a
//! blended mean that agrees with it off the window while holding the
//! identified discontinuity exactly at the target value `m`. [`pk_dgp`]
//! lifts the blend to a full DGP, keeping the forcing-variable, covariate
//! and noise laws of the alternative unchanged.

use crate::model::{AdversarialBlend, BlendKind, Dgp, MeanFunction};
use crate::{Error, Result};

fn check_unblended(mean: &MeanFunction) -> Result<()> {
    if mean.blend().is_some() {
        return Err(Error::Argument("mean function already carries a blend".into()));
    }
    Ok(())
}

fn check_k(k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::Argument("window steepness k must be at least 1".into()));
    }
    Ok(())
}

/// Left-window ramp that moves the level jump to `m` exactly.
pub fn rdd_blend(q_mean: &MeanFunction, m: f64, k: u64) -> Result<MeanFunction> {
    check_unblended(q_mean)?;
    check_k(k)?;
    let (lo, _) = q_mean.support();
    let start = q_mean.cutoff() - 1.0 / k as f64;
    if start < lo {
        return Err(Error::Argument(format!(
            "window start {start} exits the support (lower bound {lo}); increase k"
        )));
    }
    Ok(q_mean.clone().with_blend(AdversarialBlend { kind: BlendKind::RddLevel, k, target: m }))
}

/// Left-window quadratic ramp that moves the kink to `m` exactly while
/// keeping the mean continuous; the right side carries the vanishing constant
/// offset `(s' - m) / (2k)`.
pub fn rkd_blend(q_mean: &MeanFunction, m: f64, k: u64) -> Result<MeanFunction> {
    check_unblended(q_mean)?;
    check_k(k)?;
    let (lo, _) = q_mean.support();
    let start = q_mean.cutoff() - 1.0 / k as f64;
    if start < lo {
        return Err(Error::Argument(format!(
            "window start {start} exits the support (lower bound {lo}); increase k"
        )));
    }
    Ok(q_mean.clone().with_blend(AdversarialBlend { kind: BlendKind::RkdSlope, k, target: m }))
}

/// Right-window tent factor that moves every per-level bunching gap to `m`.
pub fn bunching_blend(q_mean: &MeanFunction, m: f64, k: u64) -> Result<MeanFunction> {
    check_unblended(q_mean)?;
    check_k(k)?;
    if !q_mean.has_atom() {
        return Err(Error::Argument(
            "bunching blend needs per-level atom gaps on the mean function".into(),
        ));
    }
    let (_, hi) = q_mean.support();
    let end = q_mean.cutoff() + 1.0 / k as f64;
    if end > hi {
        return Err(Error::Argument(format!(
            "window end {end} exits the support (upper bound {hi}); increase k"
        )));
    }
    Ok(q_mean.clone().with_blend(AdversarialBlend { kind: BlendKind::Bunching, k, target: m }))
}

/// Null DGP `P_k`: same laws as the alternative `q`, blended mean with the
/// discontinuity pinned at `m`.
pub fn pk_dgp(q: &Dgp, kind: BlendKind, m: f64, k: u64) -> Result<Dgp> {
    let mean = match kind {
        BlendKind::RddLevel => rdd_blend(&q.mean, m, k)?,
        BlendKind::RkdSlope => rkd_blend(&q.mean, m, k)?,
        BlendKind::Bunching => bunching_blend(&q.mean, m, k)?,
    };
    Ok(Dgp {
        mean,
        xlaw: q.xlaw.clone(),
        wlaw: q.wlaw.clone(),
        noise: q.noise.clone(),
        id: format!("{}-k{}", q.id, k),
    })
}
