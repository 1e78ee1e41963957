use serde::{Deserialize, Serialize};

/// How distance and load are put on a common scale before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostScaling {
    /// Min-max normalize both terms over the current candidate set.
    #[default]
    MinMax,
    /// Weighted sum of raw meters and raw utilization.
    Raw,
}

/// Proximity/load trade-off. `alpha` weighs distance, `1 - alpha` load;
/// `alpha_g` plays the same role for gateway choice during enforcement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostWeights {
    pub alpha: f64,
    pub alpha_g: f64,
    pub scaling: CostScaling,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            alpha_g: 0.5,
            scaling: CostScaling::MinMax,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostInput {
    pub distance: f64,
    pub load: f64,
}

fn normalizer(values: impl Iterator<Item = f64> + Clone) -> impl Fn(f64) -> f64 {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    move |v| {
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.0
        }
    }
}

/// `alpha * dist + (1 - alpha) * load` per candidate; lower is better.
pub fn weighted_costs(inputs: &[CostInput], alpha: f64, scaling: CostScaling) -> Vec<f64> {
    match scaling {
        CostScaling::Raw => inputs
            .iter()
            .map(|c| alpha * c.distance + (1.0 - alpha) * c.load)
            .collect(),
        CostScaling::MinMax => {
            let nd = normalizer(inputs.iter().map(|c| c.distance));
            let nl = normalizer(inputs.iter().map(|c| c.load));
            inputs
                .iter()
                .map(|c| alpha * nd(c.distance) + (1.0 - alpha) * nl(c.load))
                .collect()
        }
    }
}

const TIE_EPS: f64 = 1e-12;

/// Key of the cheapest candidate; ties go to the smallest key.
pub fn argmin_cost<K: Copy + Ord>(
    keys: &[K],
    inputs: &[CostInput],
    alpha: f64,
    scaling: CostScaling,
) -> Option<K> {
    let costs = weighted_costs(inputs, alpha, scaling);
    let mut best: Option<(f64, K)> = None;
    for (k, c) in keys.iter().zip(costs) {
        best = match best {
            None => Some((c, *k)),
            Some((bc, bk)) => {
                if c < bc - TIE_EPS || ((c - bc).abs() <= TIE_EPS && *k < bk) {
                    Some((c, *k))
                } else {
                    Some((bc, bk))
                }
            }
        };
    }
    best.map(|(_, k)| k)
}
