//! Reference exponents for dominance products under fast rectangular matrix
//! multiplication.
//!
//! With `d = n^zeta`, the blocked algorithm multiplies an `n x n^r` by an
//! `n^r x n` matrix and scans `n d s` entries. Balancing the two costs for a
//! tabulated rectangular exponent `omega(1, r, 1)` gives
//! `zeta_r = (omega_r + r) / 2 - 1` and total cost `n^omega_r`. Between
//! tabulated rows, `r` and `omega_r` are interpolated linearly, so the
//! exponent is a piecewise-linear function `u * zeta + v`.
//!
//! These are published constants resting on impractical algorithms; nothing
//! here claims the kernels in this crate reach them.

use crate::error::{Error, Result};

/// Below this `zeta` (the first table row) the small-dimension bound applies.
pub const SMALL_DIMENSION_LIMIT: f64 = 0.6865;

/// Largest `zeta` the piecewise table covers.
pub const MAX_SUPPORTED_ZETA: f64 = 1.056;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub r: f64,
    pub omega: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearBound {
    pub zeta_min: f64,
    pub zeta_max: f64,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentModel {
    /// `(r, omega(1, r, 1), zeta_r)`, strictly increasing in every column.
    pub anchors: [Anchor; 5],
    /// Largest `r` with `omega(1, r, 1) = 2 + o(1)`.
    pub alpha: f64,
    /// Published `d^u n^v` bounds for `zeta` beyond the small-dimension regime.
    pub linear_bounds: [LinearBound; 3],
    /// `d^0.697 n^1.896` for small dimensions.
    pub small_dimension: (f64, f64),
    /// `m^0.535 n^1.839` for multiplying `n x m` by `m x n`, `n^alpha <= m <= n`.
    pub rectangular_bound: (f64, f64),
}

impl Default for ExponentModel {
    fn default() -> Self {
        let anchor = |r, omega, zeta| Anchor { r, omega, zeta };
        let bound = |zeta_min, zeta_max, u, v| LinearBound {
            zeta_min,
            zeta_max,
            u,
            v,
        };
        Self {
            anchors: [
                anchor(1.0, 2.372864, 0.6865),
                anchor(1.1, 2.456151, 0.7781),
                anchor(1.2, 2.539392, 0.8697),
                anchor(1.3, 2.624703, 0.9624),
                anchor(1.4, 2.711707, 1.0559),
            ],
            alpha: 0.302,
            linear_bounds: [
                bound(0.687, 0.87, 0.909, 1.75),
                bound(0.87, 0.963, 0.921, 1.739),
                bound(0.963, 1.056, 0.931, 1.73),
            ],
            small_dimension: (0.697, 1.896),
            rectangular_bound: (0.535, 1.839),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `d <= n^((omega - 1) / 2)`: one rectangular product with inner dimension below `n`.
    SmallDimension,
    /// Interpolating between table rows `segment` and `segment + 1`.
    Interpolated { segment: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedExponent {
    pub zeta: f64,
    pub regime: Regime,
    /// Inner-dimension exponent `r` of the rectangular product (interpolated regime only).
    pub r: Option<f64>,
    /// `omega(1, r, 1)` bound at that `r` (interpolated regime only).
    pub omega_r: Option<f64>,
    /// `e` with `DP(n, n^zeta) = n^e` up to polylog factors.
    pub exponent: f64,
    /// `(u, v)` of the line `e = u * zeta + v` through the current piece.
    pub linear_form: (f64, f64),
    /// The published rounded `(u, v)` covering `zeta`, when there is one.
    pub published_uv: Option<(f64, f64)>,
    /// The small-dimension bound carries an unmodelled `n^(2 + o(1))` term.
    pub unmodelled_o1: bool,
}

/// Exponents `(a, b)` of the `O(m^a n^b)` bound for an `n x m` by `m x n`
/// product, given the square exponent and `alpha`.
pub fn huang_pan_exponents(omega: f64, alpha: f64) -> (f64, f64) {
    (
        (omega - 2.0) / (1.0 - alpha),
        (2.0 - omega * alpha) / (1.0 - alpha),
    )
}

impl ExponentModel {
    /// `zeta_r = (omega_r + r) / 2 - 1` for table row `i`, unrounded.
    pub fn balanced_zeta(&self, i: usize) -> f64 {
        let a = self.anchors[i];
        (a.omega + a.r) / 2.0 - 1.0
    }

    /// Solves `zeta = (omega_r + r) / 2 - 1` for `r` with `omega_r` the linear
    /// bound between rows `i` and `i + 1`.
    pub fn r_for_zeta(&self, zeta: f64, i: usize) -> f64 {
        let (lo, hi) = (self.anchors[i], self.anchors[i + 1]);
        (2.0 * (zeta + 1.0) * (hi.r - lo.r) - hi.r * lo.omega + lo.r * hi.omega)
            / (hi.omega + hi.r - lo.omega - lo.r)
    }

    /// Linear bound on `omega(1, r, 1)` between rows `i` and `i + 1`.
    pub fn omega_between(&self, r: f64, i: usize) -> f64 {
        let (lo, hi) = (self.anchors[i], self.anchors[i + 1]);
        ((hi.r - r) * lo.omega + (r - lo.r) * hi.omega) / (hi.r - lo.r)
    }

    pub fn published_uv(&self, zeta: f64) -> Option<(f64, f64)> {
        self.linear_bounds
            .iter()
            .find(|b| zeta >= b.zeta_min && zeta <= b.zeta_max)
            .or_else(|| {
                // The first published row starts at 0.687, just above the first anchor.
                (zeta >= SMALL_DIMENSION_LIMIT && zeta < self.linear_bounds[0].zeta_min)
                    .then_some(&self.linear_bounds[0])
            })
            .map(|b| (b.u, b.v))
    }

    /// Predicted dominance-product exponent for `d = n^zeta`, `0 < zeta <= 1.056`.
    ///
    /// Between rows the interpolation uses the tabulated `zeta_i` as nodes, so
    /// every table row is reproduced exactly.
    pub fn predict(&self, zeta: f64) -> Result<PredictedExponent> {
        if !(zeta > 0.0 && zeta <= MAX_SUPPORTED_ZETA) {
            return Err(Error::Unsupported(format!(
                "zeta = {zeta} is outside (0, {MAX_SUPPORTED_ZETA}]; the exponent table stops at \
                 zeta = {}",
                self.anchors[4].zeta
            )));
        }
        if zeta < SMALL_DIMENSION_LIMIT {
            let (u, v) = self.small_dimension;
            let exponent = (u * zeta + v).max(2.0);
            let linear_form = if u * zeta + v >= 2.0 {
                (u, v)
            } else {
                (0.0, 2.0)
            };
            return Ok(PredictedExponent {
                zeta,
                regime: Regime::SmallDimension,
                r: None,
                omega_r: None,
                exponent,
                linear_form,
                published_uv: Some((u, v)),
                unmodelled_o1: true,
            });
        }

        // Last segment also covers (zeta_4, 1.056].
        let segment = (0..self.anchors.len() - 1)
            .find(|&i| zeta <= self.anchors[i + 1].zeta)
            .unwrap_or(self.anchors.len() - 2);
        let (lo, hi) = (self.anchors[segment], self.anchors[segment + 1]);
        let t = (zeta - lo.zeta) / (hi.zeta - lo.zeta);
        let r = lo.r + t * (hi.r - lo.r);
        let omega_r = if zeta == lo.zeta {
            lo.omega
        } else if zeta == hi.zeta {
            hi.omega
        } else {
            self.omega_between(r, segment)
        };
        let u = (hi.omega - lo.omega) / (hi.zeta - lo.zeta);
        Ok(PredictedExponent {
            zeta,
            regime: Regime::Interpolated { segment },
            r: Some(r),
            omega_r: Some(omega_r),
            exponent: omega_r,
            linear_form: (u, lo.omega - u * lo.zeta),
            published_uv: self.published_uv(zeta),
            unmodelled_o1: false,
        })
    }
}

pub fn predict_exponent(zeta: f64) -> Result<PredictedExponent> {
    ExponentModel::default().predict(zeta)
}
