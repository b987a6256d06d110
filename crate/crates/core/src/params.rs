//! Dimensionless rod parameters.
//!
//! Lengths are scaled by the rod length and time by `gamma_2 L^4 / k_3`, so the
//! bending stiffness and the transverse drag coefficient are both one and do
//! not appear as parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constitutive and control parameters of the rod.
///
/// The compression `nu` is always derived from the stored fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawParams")]
pub struct RodParams {
    /// Stretch stiffness `k1 L^2 / k3`.
    pub k1_tilde: f64,
    /// Shear stiffness `k2 L^2 / k3`.
    pub k2_tilde: f64,
    /// Longitudinal to transverse drag ratio.
    pub gamma1_tilde: f64,
    /// Rotational drag ratio `gamma3 / (gamma2 L^2)`.
    pub gamma3_tilde: f64,
    /// Follower force `F L^2 / k3`.
    pub force_tilde: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    k1_tilde: f64,
    k2_tilde: f64,
    gamma1_tilde: f64,
    gamma3_tilde: f64,
    force_tilde: f64,
}

impl TryFrom<RawParams> for RodParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        RodParams::new(
            raw.k1_tilde,
            raw.k2_tilde,
            raw.gamma1_tilde,
            raw.gamma3_tilde,
            raw.force_tilde,
        )
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

impl RodParams {
    pub fn new(
        k1_tilde: f64,
        k2_tilde: f64,
        gamma1_tilde: f64,
        gamma3_tilde: f64,
        force_tilde: f64,
    ) -> Result<Self> {
        positive("k1_tilde", k1_tilde)?;
        positive("k2_tilde", k2_tilde)?;
        positive("gamma1_tilde", gamma1_tilde)?;
        positive("gamma3_tilde", gamma3_tilde)?;
        if !force_tilde.is_finite() {
            return Err(Error::InvalidParameter {
                name: "force_tilde",
                value: force_tilde,
                reason: "must be finite",
            });
        }
        Ok(Self {
            k1_tilde,
            k2_tilde,
            gamma1_tilde,
            gamma3_tilde,
            force_tilde,
        })
    }

    /// Shear-stretch isotropic rod with `k1 = k2 = kappa`.
    pub fn isotropic(kappa: f64, gamma1_tilde: f64, gamma3_tilde: f64, force_tilde: f64) -> Result<Self> {
        Self::new(kappa, kappa, gamma1_tilde, gamma3_tilde, force_tilde)
    }

    /// Compression of the straight base state, `1 - F / k1`.
    pub fn nu(&self) -> f64 {
        1.0 - self.force_tilde / self.k1_tilde
    }

    /// Shear coupling `k2 nu + F`; equals `kappa` for an isotropic rod.
    pub fn mu(&self) -> f64 {
        self.k2_tilde * self.nu() + self.force_tilde
    }

    pub fn is_isotropic(&self) -> bool {
        self.k1_tilde == self.k2_tilde
    }

    /// Same rod under a different follower force.
    pub fn with_force(&self, force_tilde: f64) -> Self {
        Self {
            force_tilde,
            ..*self
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}

/// Validated constructor, one argument per dimensionless group.
pub fn make_params(
    k1_tilde: f64,
    k2_tilde: f64,
    gamma1_tilde: f64,
    gamma3_tilde: f64,
    force_tilde: f64,
) -> Result<RodParams> {
    RodParams::new(k1_tilde, k2_tilde, gamma1_tilde, gamma3_tilde, force_tilde)
}
