//! Least-squares fits of budget curves.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `y ≈ c₀ + c₁x + c₂x² + c₃x³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicFit {
    pub coefficients: [f64; 4],
    pub r_squared: f64,
}

impl CubicFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// `y ≈ a · base^x`, fitted on `ln y`; `r_squared` is on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub a: f64,
    pub base: f64,
    pub r_squared: f64,
}

impl ExponentialFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.a * self.base.powf(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Fit {
    Cubic(CubicFit),
    Exponential(ExponentialFit),
}

impl Fit {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Fit::Cubic(f) => f.eval(x),
            Fit::Exponential(f) => f.eval(x),
        }
    }

    pub fn r_squared(&self) -> f64 {
        match self {
            Fit::Cubic(f) => f.r_squared,
            Fit::Exponential(f) => f.r_squared,
        }
    }
}

fn r_squared(ys: &[f64], fitted: impl Iterator<Item = f64>) -> f64 {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = ys.iter().zip(fitted).map(|(y, f)| (y - f).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

fn check_points(xs: &[f64], ys: &[f64], needed: usize) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < needed {
        return Err(Error::InsufficientPoints {
            needed,
            got: xs.len(),
        });
    }
    Ok(())
}

/// Ordinary least squares for a cubic (SVD solve, so near-collinear designs
/// degrade gracefully).
pub fn fit_cubic(xs: &[f64], ys: &[f64]) -> Result<CubicFit> {
    check_points(xs, ys, 4)?;
    let design = DMatrix::from_fn(xs.len(), 4, |i, j| xs[i].powi(j as i32));
    let rhs = DVector::from_column_slice(ys);
    let solution = design
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Config(format!("cubic fit failed: {e}")))?;
    let coefficients = [solution[0], solution[1], solution[2], solution[3]];
    let mut fit = CubicFit {
        coefficients,
        r_squared: 0.0,
    };
    fit.r_squared = r_squared(ys, xs.iter().map(|&x| fit.eval(x)));
    Ok(fit)
}

/// Least squares on `(x, ln y)`.
pub fn fit_exponential(xs: &[f64], ys: &[f64]) -> Result<ExponentialFit> {
    check_points(xs, ys, 3)?;
    if let Some(&y) = ys.iter().find(|y| !(**y > 0.0)) {
        return Err(Error::NonPositiveBudget(y));
    }
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = logs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints { needed: 2, got: 1 });
    }
    let sxy: f64 = xs.iter().zip(&logs).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = r_squared(&logs, xs.iter().map(|x| intercept + slope * x));
    Ok(ExponentialFit {
        a: intercept.exp(),
        base: slope.exp(),
        r_squared: r2,
    })
}
