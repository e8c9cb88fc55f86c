//! Many-to-one sine self-map of the box and the augmented objective built on it.
//!
//! Each coordinate is sent through
//! `x'_i = 0.5 (sin(2^(1/r_i) x_i) + 1)(b_i - a_i) + a_i`,
//! which covers `[a_i, b_i]` more and more times as `r_i` shrinks. The gate
//! pulled back through this map is `u(x, r) = gate(x')`; the convex anchor
//! `v(x, r) = |c - x|^2 + |rho - r|^2` gives local descent a direction, and the
//! search minimizes `w = u + v`.

use crate::deformation::GateFn;
use crate::domain::{AugmentedPoint, BoxDomain, FrequencyVector, Point};
use crate::error::{Error, Result};

/// Smallest accepted frequency parameter. At this value `2^(1/r) = 2^20`.
pub const R_MIN: f64 = 0.05;

/// Frequency multiplier `2^(1/r)`.
#[inline]
pub fn frequency(r: f64) -> f64 {
    (1.0 / r).exp2()
}

/// One coordinate of the transform, without validation. The result is clamped
/// onto `[lo, hi]` so that endpoint rounding never leaves the interval.
#[inline]
pub fn transform_coord(x: f64, r: f64, lo: f64, hi: f64) -> f64 {
    let s = (frequency(r) * x).sin();
    (0.5 * (s + 1.0) * (hi - lo) + lo).clamp(lo, hi)
}

fn check_frequencies(r: &FrequencyVector) -> Result<()> {
    let min = r.min();
    if min < R_MIN {
        return Err(Error::FrequencyUnderflow {
            value: min,
            min: R_MIN,
        });
    }
    Ok(())
}

pub fn transform_point(x: &Point, r: &FrequencyVector, domain: &BoxDomain) -> Result<Point> {
    domain.check_dim(x.dim())?;
    domain.check_dim(r.dim())?;
    check_frequencies(r)?;
    Ok(Point::new(
        x.coords()
            .iter()
            .zip(r.values())
            .zip(domain.lower().iter().zip(domain.upper()))
            .map(|((&xi, &ri), (&lo, &hi))| transform_coord(xi, ri, lo, hi))
            .collect(),
    ))
}

/// `u(x, r) = gate(x')`.
pub fn pulled_back_gate<G: GateFn + ?Sized>(
    gate: &G,
    x: &Point,
    r: &FrequencyVector,
    domain: &BoxDomain,
) -> Result<f64> {
    let image = transform_point(x, r, domain)?;
    checked_gate(gate, &image)
}

fn checked_gate<G: GateFn + ?Sized>(gate: &G, image: &Point) -> Result<f64> {
    let u = gate.gate(image)?;
    if u.is_nan() {
        return Err(Error::NonFinite {
            point: image.coords().to_vec(),
            value: u,
        });
    }
    if u > 0.0 {
        return Err(Error::PositiveGate {
            point: image.coords().to_vec(),
            value: u,
        });
    }
    Ok(u)
}

/// `v(x, r)` anchored at the box midpoint.
pub fn anchor_term(x: &Point, r: &FrequencyVector, domain: &BoxDomain, rho: f64) -> Result<f64> {
    domain.check_dim(x.dim())?;
    anchor_term_about(x, r, &domain.midpoint(), rho)
}

/// `v(x, r)` anchored at an arbitrary centre. In tied mode the frequency part
/// is the single term `(rho - r_1)^2`.
pub fn anchor_term_about(x: &Point, r: &FrequencyVector, center: &Point, rho: f64) -> Result<f64> {
    if x.dim() != center.dim() || r.dim() != center.dim() {
        return Err(Error::DimensionMismatch {
            expected: center.dim(),
            found: if x.dim() != center.dim() {
                x.dim()
            } else {
                r.dim()
            },
        });
    }
    let spatial: f64 = center
        .coords()
        .iter()
        .zip(x.coords())
        .map(|(c, xi)| (c - xi) * (c - xi))
        .sum();
    let freq: f64 = r
        .free_components()
        .iter()
        .map(|ri| (rho - ri) * (rho - ri))
        .sum();
    Ok(spatial + freq)
}

/// The three parts of the augmented objective at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub w: f64,
    pub u: f64,
    pub v: f64,
}

/// `w = u + v` bundled with everything needed to evaluate it.
#[derive(Debug, Clone)]
pub struct AugmentedObjective<G> {
    gate: G,
    domain: BoxDomain,
    anchor: f64,
    center: Point,
    tied: bool,
}

impl<G: GateFn> AugmentedObjective<G> {
    pub fn new(gate: G, domain: BoxDomain, anchor: f64, tied: bool) -> Result<Self> {
        if !(anchor > 0.0 && anchor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rho must be positive, got {anchor}"
            )));
        }
        let center = domain.midpoint();
        Ok(Self {
            gate,
            domain,
            anchor,
            center,
            tied,
        })
    }

    /// Replaces the anchor centre (default: box midpoint) with any in-box point.
    pub fn with_center(mut self, center: Point) -> Result<Self> {
        if !self.domain.contains(&center)? {
            return Err(Error::InvalidParameter(format!(
                "anchor centre {center} lies outside the box"
            )));
        }
        self.center = center;
        Ok(self)
    }

    pub fn gate(&self) -> &G {
        &self.gate
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn is_tied(&self) -> bool {
        self.tied
    }

    pub fn evaluate(&self, p: &AugmentedPoint) -> Result<Split> {
        if p.r.is_tied() != self.tied {
            return Err(Error::InvalidFrequency(format!(
                "objective expects tied = {}, point has tied = {}",
                self.tied,
                p.r.is_tied()
            )));
        }
        let image = transform_point(&p.x, &p.r, &self.domain)?;
        let u = checked_gate(&self.gate, &image)?;
        let v = anchor_term_about(&p.x, &p.r, &self.center, self.anchor)?;
        Ok(Split { w: u + v, u, v })
    }

    /// Number of optimizer coordinates: `p` spatial plus one (tied) or `p` log-frequencies.
    pub fn search_dim(&self) -> usize {
        let p = self.domain.dim();
        if self.tied {
            p + 1
        } else {
            2 * p
        }
    }

    /// Optimizer vector `(x, ln r)`.
    pub fn encode(&self, p: &AugmentedPoint) -> Vec<f64> {
        let mut z = p.x.coords().to_vec();
        z.extend(p.r.free_components().iter().map(|r| r.ln()));
        z
    }

    /// Inverse of [`encode`](Self::encode). Fails when a frequency leaves `[R_MIN, inf)`.
    pub fn decode(&self, z: &[f64]) -> Result<AugmentedPoint> {
        if z.len() != self.search_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.search_dim(),
                found: z.len(),
            });
        }
        let p = self.domain.dim();
        let x = Point::new(z[..p].to_vec());
        let r = if self.tied {
            FrequencyVector::tied(p, z[p].exp())?
        } else {
            FrequencyVector::free(z[p..].iter().map(|s| s.exp()).collect())?
        };
        check_frequencies(&r)?;
        AugmentedPoint::new(x, r)
    }

    /// `w` as a function of the optimizer vector. Frequencies outside the
    /// admissible range evaluate to `+inf` so that a simplex step there is
    /// simply rejected.
    pub fn search_value(&self, z: &[f64]) -> Result<f64> {
        match self.decode(z) {
            Ok(p) => Ok(self.evaluate(&p)?.w),
            Err(Error::FrequencyUnderflow { .. }) | Err(Error::InvalidFrequency(_)) => {
                Ok(f64::INFINITY)
            }
            Err(e) => Err(e),
        }
    }
}

/// `w(p) = u(p) + v(p)`.
pub fn augmented_objective<G: GateFn>(
    aug: &AugmentedObjective<G>,
    p: &AugmentedPoint,
) -> Result<f64> {
    Ok(aug.evaluate(p)?.w)
}
