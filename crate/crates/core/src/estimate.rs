//! Current-practice estimators: one-sided local polynomial fits at the cutoff
//! and cell-mean-plus-boundary-limit estimators for bunching.

use nalgebra::{DMatrix, DVector};

use crate::model::Sample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Triangular,
    Uniform,
    Epanechnikov,
}

impl Kernel {
    /// Weight at scaled distance `u`; zero outside `[-1, 1]`.
    pub fn weight(self, u: f64) -> f64 {
        let a = u.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self {
            Kernel::Triangular => 1.0 - a,
            Kernel::Uniform => 1.0,
            Kernel::Epanechnikov => 0.75 * (1.0 - u * u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Weighted least squares fit of `y` on `(1, x - c, ...)` over one side of
/// the cutoff, with HC0 sandwich covariance.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Intercept, slope and (for degree 2) curvature, in powers of `x - c`.
    pub coefficients: Vec<f64>,
    /// Heteroskedasticity-robust covariance of the coefficients.
    pub covariance: DMatrix<f64>,
    /// In-window observation count on the requested side.
    pub n_effective: usize,
    pub bandwidth: f64,
    pub side: Side,
}

/// Point estimate with its standard error and effective sample size.
#[derive(Debug, Clone, Copy)]
pub struct PointEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_effective: usize,
}

pub fn local_poly_fit(
    sample: &Sample,
    side: Side,
    degree: usize,
    kernel: Kernel,
    h: f64,
    c: f64,
) -> Result<FitResult> {
    if !(h > 0.0) {
        return Err(Error::Argument(format!("bandwidth {h} must be positive")));
    }
    if !(1..=2).contains(&degree) {
        return Err(Error::Argument(format!("degree {degree} must be 1 or 2")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for row in &sample.rows {
        let on_side = match side {
            Side::Left => row.x < c,
            Side::Right => row.x >= c,
        };
        if !on_side || (row.x - c).abs() > h {
            continue;
        }
        xs.push(row.x - c);
        ys.push(row.y);
        ws.push(kernel.weight((row.x - c) / h));
    }
    let n_effective = xs.len();
    let mut distinct: Vec<f64> = xs
        .iter()
        .zip(&ws)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&x, _)| x)
        .collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let p = degree + 1;
    if distinct.len() < p {
        return Err(Error::Estimation {
            msg: format!("need at least {p} distinct in-window points with positive weight"),
            n_effective,
        });
    }

    let mut xtwx = DMatrix::<f64>::zeros(p, p);
    let mut xtwy = DVector::<f64>::zeros(p);
    let design_row = |x: f64| -> Vec<f64> {
        let mut r = vec![1.0; p];
        for j in 1..p {
            r[j] = r[j - 1] * x;
        }
        r
    };
    for ((&x, &y), &w) in xs.iter().zip(&ys).zip(&ws) {
        let r = design_row(x);
        for a in 0..p {
            for b in 0..p {
                xtwx[(a, b)] += w * r[a] * r[b];
            }
            xtwy[a] += w * r[a] * y;
        }
    }
    let chol = xtwx.clone().cholesky().ok_or(Error::Estimation {
        msg: "rank-deficient weighted design".into(),
        n_effective,
    })?;
    let beta = chol.solve(&xtwy);
    let bread = chol.inverse();

    // HC0: bread * (sum w^2 e^2 x x') * bread
    let mut meat = DMatrix::<f64>::zeros(p, p);
    for ((&x, &y), &w) in xs.iter().zip(&ys).zip(&ws) {
        let r = design_row(x);
        let fitted: f64 = (0..p).map(|j| beta[j] * r[j]).sum();
        let e = y - fitted;
        let s = w * w * e * e;
        for a in 0..p {
            for b in 0..p {
                meat[(a, b)] += s * r[a] * r[b];
            }
        }
    }
    let covariance = &bread * meat * &bread;

    Ok(FitResult {
        coefficients: beta.iter().copied().collect(),
        covariance,
        n_effective,
        bandwidth: h,
        side,
    })
}

/// Level-jump estimate: difference of boundary intercepts, standard error
/// from the two intercept variances.
pub fn rdd_estimate(
    sample: &Sample,
    h: f64,
    kernel: Kernel,
    degree: usize,
    c: f64,
) -> Result<PointEstimate> {
    let left = local_poly_fit(sample, Side::Left, degree, kernel, h, c)?;
    let right = local_poly_fit(sample, Side::Right, degree, kernel, h, c)?;
    Ok(PointEstimate {
        value: right.coefficients[0] - left.coefficients[0],
        stderr: (right.covariance[(0, 0)] + left.covariance[(0, 0)]).sqrt(),
        n_effective: left.n_effective + right.n_effective,
    })
}

/// Kink estimate: difference of boundary slopes from degree-1 fits.
pub fn rkd_estimate(sample: &Sample, h: f64, kernel: Kernel, c: f64) -> Result<PointEstimate> {
    let left = local_poly_fit(sample, Side::Left, 1, kernel, h, c)?;
    let right = local_poly_fit(sample, Side::Right, 1, kernel, h, c)?;
    Ok(PointEstimate {
        value: right.coefficients[1] - left.coefficients[1],
        stderr: (right.covariance[(1, 1)] + left.covariance[(1, 1)]).sqrt(),
        n_effective: left.n_effective + right.n_effective,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    MeanAbs,
    Rms,
    Sup,
}

#[derive(Debug, Clone)]
pub struct BunchingEstimate {
    pub aggregate: PointEstimate,
    /// Per-level gap estimates.
    pub taus: Vec<f64>,
}

/// Per covariate level: cell mean at `x = 0` minus the local polynomial right
/// limit at 0 within the cell; then aggregate. Cells are treated as
/// independent for the aggregate standard error; the sup aggregator gets the
/// conservative SE equal to the largest cell SE.
pub fn bunching_estimate(
    sample: &Sample,
    h: f64,
    kernel: Kernel,
    degree: usize,
    aggregator: Aggregator,
    n_levels: usize,
    c: f64,
) -> Result<BunchingEstimate> {
    if n_levels == 0 {
        return Err(Error::Argument("need at least one covariate level".into()));
    }
    let mut taus = Vec::with_capacity(n_levels);
    let mut vars = Vec::with_capacity(n_levels);
    let mut n_eff = 0usize;
    for level in 0..n_levels {
        let cell: Vec<f64> = sample
            .rows
            .iter()
            .filter(|r| r.x == c && r.w.unwrap_or(0) == level)
            .map(|r| r.y)
            .collect();
        if cell.is_empty() {
            return Err(Error::Estimation {
                msg: format!("no observations at the bunching point for level {level}"),
                n_effective: 0,
            });
        }
        let n0 = cell.len();
        let mean0 = cell.iter().sum::<f64>() / n0 as f64;
        let var0 = if n0 > 1 {
            cell.iter().map(|y| (y - mean0) * (y - mean0)).sum::<f64>() / (n0 - 1) as f64
                / n0 as f64
        } else {
            0.0
        };
        // right limit from strictly positive x in the same cell
        let interior = Sample::from_rows(
            sample
                .rows
                .iter()
                .filter(|r| r.x > c && r.w.unwrap_or(0) == level)
                .copied()
                .collect(),
        );
        let fit = local_poly_fit(&interior, Side::Right, degree, kernel, h, c)?;
        taus.push(mean0 - fit.coefficients[0]);
        vars.push(var0 + fit.covariance[(0, 0)]);
        n_eff += n0 + fit.n_effective;
    }
    let l = n_levels as f64;
    let (value, stderr) = match aggregator {
        Aggregator::MeanAbs => {
            let t = taus.iter().map(|t| t.abs()).sum::<f64>() / l;
            let var = vars.iter().sum::<f64>() / (l * l);
            (t, var.sqrt())
        }
        Aggregator::Rms => {
            let msq = taus.iter().map(|t| t * t).sum::<f64>() / l;
            let t = msq.sqrt();
            let var = if t > 1e-300 {
                taus.iter()
                    .zip(&vars)
                    .map(|(tau, v)| {
                        let g = tau / (l * t);
                        g * g * v
                    })
                    .sum::<f64>()
            } else {
                vars.iter().sum::<f64>() / (l * l)
            };
            (t, var.sqrt())
        }
        Aggregator::Sup => {
            let t = taus.iter().map(|t| t.abs()).fold(0.0f64, f64::max);
            let s = vars.iter().map(|v| v.sqrt()).fold(0.0f64, f64::max);
            (t, s)
        }
    };
    Ok(BunchingEstimate {
        aggregate: PointEstimate { value, stderr, n_effective: n_eff },
        taus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    Fixed(f64),
    /// 1.06 sd(x) n^(-1/5), clipped to [0.05, 0.5] of the x range.
    Rot,
}

pub fn bandwidth_rule(sample: &Sample, rule: BandwidthRule) -> Result<f64> {
    match rule {
        BandwidthRule::Fixed(h) => {
            if !(h > 0.0) {
                return Err(Error::Argument(format!("bandwidth {h} must be positive")));
            }
            Ok(h)
        }
        BandwidthRule::Rot => {
            let n = sample.n();
            if n < 10 {
                return Err(Error::Argument(format!(
                    "rule-of-thumb bandwidth needs at least 10 observations, got {n}"
                )));
            }
            let mean = sample.rows.iter().map(|r| r.x).sum::<f64>() / n as f64;
            let sd = (sample.rows.iter().map(|r| (r.x - mean) * (r.x - mean)).sum::<f64>()
                / (n - 1) as f64)
                .sqrt();
            let (lo, hi) = sample
                .rows
                .iter()
                .map(|r| r.x)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            let range = hi - lo;
            let raw = 1.06 * sd * (n as f64).powf(-0.2);
            Ok(raw.clamp(0.05 * range, 0.5 * range))
        }
    }
}
