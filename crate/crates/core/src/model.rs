//! Rod configurations, the constitutive law and the compressed base state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::RodParams;

/// Centerline `(x, y)` and cross-section angle `theta` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Configuration {
    pub fn new(x: Vec<f64>, y: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        for len in [y.len(), theta.len()] {
            if len != x.len() {
                return Err(Error::Shape {
                    expected: x.len(),
                    actual: len,
                });
            }
        }
        Ok(Self { x, y, theta })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_clamped(&self) -> bool {
        self.x.first() == Some(&0.0) && self.y.first() == Some(&0.0) && self.theta.first() == Some(&0.0)
    }
}

/// Straight rod uniformly compressed by the follower load: `x = nu u`.
pub fn base_state(params: &RodParams, grid: &Grid) -> Configuration {
    let nu = params.nu();
    let n = grid.n();
    Configuration {
        x: grid.nodes().iter().map(|u| nu * u).collect(),
        y: vec![0.0; n],
        theta: vec![0.0; n],
    }
}

/// Stretch, shear and bending strains.
#[derive(Debug, Clone, PartialEq)]
pub struct Strains {
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub pi: Vec<f64>,
}

/// Axial force, shear force and bending moment in the material frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Stresses {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub m: Vec<f64>,
}

impl Strains {
    pub fn of(config: &Configuration, grid: &Grid) -> Self {
        let xp = grid.d1(&config.x);
        let yp = grid.d1(&config.y);
        let pi = grid.d1(&config.theta);
        let (h1, h2) = config
            .theta
            .iter()
            .zip(xp.iter().zip(&yp))
            .map(|(t, (xu, yu))| {
                let (s, c) = t.sin_cos();
                (c * xu + s * yu, -s * xu + c * yu)
            })
            .unzip();
        Self { h1, h2, pi }
    }
}

/// Linear elastic law `F1 = k1 (h1 - 1)`, `F2 = k2 h2`, `M = Pi`.
pub fn constitutive(strains: &Strains, params: &RodParams) -> Result<Stresses> {
    let n = strains.h1.len();
    for len in [strains.h2.len(), strains.pi.len()] {
        if len != n {
            return Err(Error::Shape {
                expected: n,
                actual: len,
            });
        }
    }
    Ok(Stresses {
        f1: strains.h1.iter().map(|h| params.k1_tilde * (h - 1.0)).collect(),
        f2: strains.h2.iter().map(|h| params.k2_tilde * h).collect(),
        m: strains.pi.clone(),
    })
}

/// Diagonal drag tensor `diag(gamma1, 1, gamma3)` weighting `(x, y, theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaWeights {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl GammaWeights {
    pub fn new(gamma1: f64, gamma3: f64) -> Result<Self> {
        for (name, v) in [("gamma1_tilde", gamma1), ("gamma3_tilde", gamma3)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "drag weights must be finite and strictly positive",
                });
            }
        }
        Ok(Self {
            gamma1,
            gamma2: 1.0,
            gamma3,
        })
    }

    pub fn from_params(params: &RodParams) -> Self {
        Self {
            gamma1: params.gamma1_tilde,
            gamma2: 1.0,
            gamma3: params.gamma3_tilde,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.gamma1, self.gamma2, self.gamma3]
    }
}
