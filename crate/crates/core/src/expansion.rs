//! Predicted small-radius capacity of concentric geodesic balls.
//!
//! With `c_n(r, λr)` the Euclidean value, the capacity behaves like
//! `c_n(r, λr) (1 − κ r² + o(r²))` where `κ` is linear in the scalar curvature
//! and depends on dimension through three separate closed forms (`n = 3`,
//! `n = 4`, `n ≥ 5`). The same coefficient can also be written through the
//! ratio `c_n / c_{n−2}`; both evaluations are kept and cross-checked.

use serde::Serialize;

use crate::capacity::euclidean_relative_capacity;
use crate::error::{domain, Result};

/// Predictions with `κ r²` above this are outside the asymptotic regime.
pub const REGIME_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    N3,
    N4,
    N5Plus,
    Unified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionPrediction {
    pub n: usize,
    pub lambda: f64,
    pub r: f64,
    pub scalar: f64,
    pub euclidean: f64,
    /// `c_n (1 − κ r²)` from the dimension branch.
    pub predicted_capacity: f64,
    /// `κ` from the dimension branch.
    pub deficit_coefficient: f64,
    pub branch: Branch,
    /// `c_n (1 − κ r²)` with `κ r²` taken from the unified form.
    pub unified_capacity: f64,
    /// `κ r²` from the unified form.
    pub unified_deficit: f64,
    /// False when `κ r² > 0.5` or the predicted value is not positive.
    pub in_regime: bool,
}

fn check(n: usize, lambda: f64) -> Result<()> {
    if n < 3 {
        return Err(domain(format!("dimension must be at least 3, got {n}")));
    }
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(domain(format!("ratio must exceed 1, got {lambda}")));
    }
    Ok(())
}

/// `κ(n, λ, S)` from the per-dimension formulas.
pub fn deficit_coefficient(n: usize, lambda: f64, scalar: f64) -> Result<f64> {
    check(n, lambda)?;
    let nf = n as f64;
    Ok(match n {
        3 => scalar / 18.0 * lambda,
        4 => scalar / 12.0 * lambda.ln() / (1.0 - lambda.powi(-2)),
        _ => {
            let shape = (1.0 - lambda.powf(4.0 - nf)) / (1.0 - lambda.powf(2.0 - nf));
            (nf - 2.0) * scalar / (6.0 * nf * (nf - 4.0)) * shape
        }
    })
}

pub fn branch_for(n: usize) -> Branch {
    match n {
        3 => Branch::N3,
        4 => Branch::N4,
        _ => Branch::N5Plus,
    }
}

/// `κ r²` from `(n−2) S / (6n |n−4|*) · c_n(r,λr) / c_{n−2}(r,λr)`, where the
/// `|n − 4|` factor is dropped for `n = 4` and `c_1`, `c_2` are the one- and
/// two-dimensional relative capacities.
pub fn unified_deficit(n: usize, lambda: f64, r: f64, scalar: f64) -> Result<f64> {
    check(n, lambda)?;
    if !(r > 0.0) {
        return Err(domain(format!("radius must be positive, got {r}")));
    }
    let nf = n as f64;
    let abs_star = if n == 4 { 1.0 } else { (nf - 4.0).abs() };
    let ratio = euclidean_relative_capacity(n, r, lambda * r)? / euclidean_relative_capacity(n - 2, r, lambda * r)?;
    Ok((nf - 2.0) * scalar / (6.0 * nf * abs_star) * ratio)
}

pub fn predicted_capacity(n: usize, lambda: f64, r: f64, scalar: f64) -> Result<ExpansionPrediction> {
    let kappa = deficit_coefficient(n, lambda, scalar)?;
    let unified = unified_deficit(n, lambda, r, scalar)?;
    let euclidean = euclidean_relative_capacity(n, r, lambda * r)?;
    let predicted = euclidean * (1.0 - kappa * r * r);
    Ok(ExpansionPrediction {
        n,
        lambda,
        r,
        scalar,
        euclidean,
        predicted_capacity: predicted,
        deficit_coefficient: kappa,
        branch: branch_for(n),
        unified_capacity: euclidean * (1.0 - unified),
        unified_deficit: unified,
        in_regime: kappa * r * r <= REGIME_LIMIT && predicted > 0.0,
    })
}

/// Order of the remainder attached to a bound prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Remainder {
    /// `O(r⁴)` relative.
    BigOR4,
    /// `o(r²)` relative, rate unknown.
    LittleOR2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPrediction {
    pub value: f64,
    pub remainder: Remainder,
}

/// Central values of the upper (level-set competitor) and lower
/// (isoperimetric) bounds. Both share the leading correction; only their
/// remainders differ.
pub fn bound_predictions(n: usize, lambda: f64, r: f64, scalar: f64) -> Result<(BoundPrediction, BoundPrediction)> {
    let p = predicted_capacity(n, lambda, r, scalar)?;
    Ok((
        BoundPrediction { value: p.predicted_capacity, remainder: Remainder::BigOR4 },
        BoundPrediction { value: p.predicted_capacity, remainder: Remainder::LittleOR2 },
    ))
}
