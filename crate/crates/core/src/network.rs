//! K-tier network parameters, pairwise ratios and access probabilities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::PathLoss;

/// Density, transmit power and range-expansion bias of one tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierParams {
    pub density: f64,
    pub power: f64,
    pub bias: f64,
}

impl TierParams {
    pub fn new(density: f64, power: f64, bias: f64) -> Self {
        TierParams { density, power, bias }
    }

    fn validate(&self, index: usize) -> Result<()> {
        for (name, v) in [("density", self.density), ("power", self.power), ("bias", self.bias)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("tier {}: {name} must be positive and finite, got {v}", index + 1)));
            }
        }
        Ok(())
    }
}

/// A validated K-tier configuration. Tiers keep their absolute values; only
/// ratios enter the formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork", into = "RawNetwork")]
pub struct NetworkConfig {
    pathloss: PathLoss,
    tiers: Vec<TierParams>,
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    alpha: f64,
    tiers: Vec<TierParams>,
}

impl TryFrom<RawNetwork> for NetworkConfig {
    type Error = Error;
    fn try_from(raw: RawNetwork) -> Result<Self> {
        NetworkConfig::new(raw.alpha, raw.tiers)
    }
}

impl From<NetworkConfig> for RawNetwork {
    fn from(n: NetworkConfig) -> Self {
        RawNetwork {
            alpha: n.pathloss.alpha(),
            tiers: n.tiers,
        }
    }
}

/// `λ̂_ij = λ_j/λ_i`, `P̂_ij = P_j/P_i`, `B̂_ij = B_j/B_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRatios {
    pub lambda_hat: Vec<Vec<f64>>,
    pub p_hat: Vec<Vec<f64>>,
    pub b_hat: Vec<Vec<f64>>,
}

impl NetworkConfig {
    pub fn new(alpha: f64, tiers: Vec<TierParams>) -> Result<Self> {
        let pathloss = PathLoss::from_alpha(alpha).map_err(|e| Error::Config(e.to_string()))?;
        Self::with_pathloss(pathloss, tiers)
    }

    pub fn with_pathloss(pathloss: PathLoss, tiers: Vec<TierParams>) -> Result<Self> {
        if tiers.is_empty() {
            return Err(Error::Config("at least one tier is required".into()));
        }
        for (i, t) in tiers.iter().enumerate() {
            t.validate(i)?;
        }
        Ok(NetworkConfig { pathloss, tiers })
    }

    /// Single-tier PPP with unit parameters.
    pub fn single_tier(alpha: f64) -> Result<Self> {
        Self::new(alpha, vec![TierParams::new(1.0, 1.0, 1.0)])
    }

    /// Two tiers with tier 1 normalized to `λ₁ = P₁ = B₁ = 1`.
    pub fn two_tier(alpha: f64, density2: f64, power2: f64, bias2: f64) -> Result<Self> {
        Self::new(alpha, vec![TierParams::new(1.0, 1.0, 1.0), TierParams::new(density2, power2, bias2)])
    }

    pub fn num_tiers(&self) -> usize {
        self.tiers.len()
    }

    pub fn tiers(&self) -> &[TierParams] {
        &self.tiers
    }

    pub fn tier(&self, i: usize) -> Result<&TierParams> {
        self.tiers
            .get(i)
            .ok_or_else(|| Error::domain(format!("tier index {i} out of range for {} tiers", self.tiers.len())))
    }

    pub fn pathloss(&self) -> PathLoss {
        self.pathloss
    }

    pub fn delta(&self) -> f64 {
        self.pathloss.delta()
    }

    pub fn alpha(&self) -> f64 {
        self.pathloss.alpha()
    }

    /// Copy with the bias of tier `i` replaced.
    pub fn with_bias(&self, i: usize, bias: f64) -> Result<Self> {
        self.tier(i)?;
        let mut tiers = self.tiers.clone();
        tiers[i].bias = bias;
        Self::with_pathloss(self.pathloss, tiers)
    }

    pub fn ratios(&self) -> PairRatios {
        let k = self.tiers.len();
        let build = |f: fn(&TierParams) -> f64| -> Vec<Vec<f64>> {
            (0..k)
                .map(|i| (0..k).map(|j| f(&self.tiers[j]) / f(&self.tiers[i])).collect())
                .collect()
        };
        PairRatios {
            lambda_hat: build(|t| t.density),
            p_hat: build(|t| t.power),
            b_hat: build(|t| t.bias),
        }
    }

    pub(crate) fn b_hat(&self, i: usize, j: usize) -> f64 {
        self.tiers[j].bias / self.tiers[i].bias
    }

    pub(crate) fn p_hat(&self, i: usize, j: usize) -> f64 {
        self.tiers[j].power / self.tiers[i].power
    }

    /// `λ̂_ij (P̂_ij B̂_ij)^δ`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (ti, tj) = (&self.tiers[i], &self.tiers[j]);
        tj.density / ti.density * ((tj.power * tj.bias) / (ti.power * ti.bias)).powf(self.delta())
    }

    /// `Σ_j λ̂_ij (P̂_ij B̂_ij)^δ`, the reciprocal of the access probability.
    pub fn weight_sum(&self, i: usize) -> f64 {
        (0..self.tiers.len()).map(|j| self.weight(i, j)).sum()
    }

    /// Probability that the typical user associates with tier `i`.
    pub fn access_probability(&self, i: usize) -> Result<f64> {
        self.tier(i)?;
        Ok(1.0 / self.weight_sum(i))
    }

    pub fn access_probabilities(&self) -> Vec<f64> {
        (0..self.tiers.len()).map(|i| 1.0 / self.weight_sum(i)).collect()
    }

    /// Probability that no other tier offers a better biased signal than a
    /// tier-`i` base station at distance `r`.
    pub fn conditional_access_probability(&self, i: usize, r: f64) -> Result<f64> {
        self.tier(i)?;
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("distance must be nonnegative, got {r}")));
        }
        let delta = self.delta();
        let exponent: f64 = (0..self.tiers.len())
            .filter(|&j| j != i)
            .map(|j| self.tiers[j].density * PI * (self.p_hat(i, j) * self.b_hat(i, j)).powf(delta) * r * r)
            .sum();
        Ok((-exponent).exp())
    }
}
