//! Layer-cake decomposition of data with finitely many values:
//! `v = Σ_i w_i 1_{E_i}` with `E_i = {v >= η_i}` for positive thresholds
//! and `E_i = {v <= η_i}` with negative weights below zero.

use crate::scheme::InitialData;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LayerComponent {
    pub weight: f64,
    pub threshold: f64,
    /// 0/1 values of the indicator, aligned with the input.
    pub indicator: Vec<f64>,
}

/// Splits `values` into signed indicator layers whose weighted sum
/// reproduces the input.
pub fn layer_cake_decompose(values: &[f64]) -> Result<Vec<LayerComponent>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("layer-cake decomposition needs finite values"));
    }
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut out = Vec::new();
    let mut prev = 0.0;
    for &eta in distinct.iter().filter(|&&v| v > 0.0) {
        out.push(LayerComponent {
            weight: eta - prev,
            threshold: eta,
            indicator: values.iter().map(|&v| if v >= eta { 1.0 } else { 0.0 }).collect(),
        });
        prev = eta;
    }
    prev = 0.0;
    for &eta in distinct.iter().rev().filter(|&&v| v < 0.0) {
        out.push(LayerComponent {
            weight: eta - prev,
            threshold: eta,
            indicator: values.iter().map(|&v| if v <= eta { 1.0 } else { 0.0 }).collect(),
        });
        prev = eta;
    }
    Ok(out)
}

/// Layer-cake decomposition of piecewise-constant initial data into
/// `(weight, indicator data)` pairs.
pub fn layer_cake_data(data: &InitialData) -> Result<Vec<(f64, InitialData)>> {
    let InitialData::PiecewiseConstant { grid, values } = data else {
        return Err(Error::invalid("layer-cake decomposition needs piecewise-constant data"));
    };
    Ok(layer_cake_decompose(values)?
        .into_iter()
        .map(|c| {
            (
                c.weight,
                InitialData::PiecewiseConstant {
                    grid: grid.clone(),
                    values: c.indicator,
                },
            )
        })
        .collect())
}
