//! Scaling regime of the period cell.
//!
//! The waveguide is a thin strip of height `eps` decorated with one
//! protuberance per period: a narrow passage of width `d` and height `h`
//! carrying a rectangular room on top. The passage and room dimensions
//! follow power laws in `eps` chosen so that the coupling constant
//!
//! ```text
//! q_eff = d / (h · eps² · area(room))
//! ```
//!
//! either stays pinned at a finite target value or diverges like
//! `eps^(-gamma/2)`. The limit models downstream (see [`crate::limit`])
//! are parametrised by exactly this constant.

use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rectangular room in unscaled coordinates: `(-width/2, width/2) × (0, height)`.
///
/// The room must fit inside the unit period (`width < 1`) and meets the
/// passage through a contact segment `(-contact_half_width, contact_half_width)`
/// on its bottom edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec<T> {
    pub width: T,
    pub height: T,
    pub contact_half_width: T,
}

/// A constraint on [`RoomSpec`] that does not hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoomViolation {
    /// `width` must lie strictly between 0 and 1.
    WidthOutOfRange,
    /// `height` must be strictly positive.
    HeightNotPositive,
    /// `contact_half_width` must be strictly positive.
    ContactNotPositive,
    /// Contact segment must stay inside the room base: `contact_half_width <= width/2`.
    ContactWiderThanRoom,
    /// Contact segment must stay inside the period: `contact_half_width < 1/2`.
    ContactTooWideForPeriod,
}

impl<T: Real> RoomSpec<T> {
    pub fn new(width: T, height: T, contact_half_width: T) -> Self {
        Self {
            width,
            height,
            contact_half_width,
        }
    }

    /// Unscaled room area.
    pub fn area(&self) -> T {
        self.width * self.height
    }

    /// All violated constraints, empty when the spec is admissible.
    pub fn validate(&self) -> Vec<RoomViolation> {
        let mut v = Vec::new();
        if !(self.width > T::zero() && self.width < T::one()) {
            v.push(RoomViolation::WidthOutOfRange);
        }
        if !(self.height > T::zero()) {
            v.push(RoomViolation::HeightNotPositive);
        }
        if !(self.contact_half_width > T::zero()) {
            v.push(RoomViolation::ContactNotPositive);
        } else {
            if self.contact_half_width > self.width * T::half() {
                v.push(RoomViolation::ContactWiderThanRoom);
            }
            if self.contact_half_width >= T::half() {
                v.push(RoomViolation::ContactTooWideForPeriod);
            }
        }
        v
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

/// Target of the coupling constant as `eps -> 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum QTarget<T> {
    /// `q_eff` pinned at this finite positive value for every `eps`.
    Finite(T),
    /// `q_eff = eps^(-gamma/2)` diverges.
    Infinity,
}

/// Power laws tying passage dimensions to `eps`.
///
/// `h = eps^gamma` always; the passage width is
/// `d = q · area · eps^(2+gamma)` for a finite target `q` and
/// `d = area · eps^(2+gamma/2)` for the divergent regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaw<T> {
    pub q_target: QTarget<T>,
    pub gamma: T,
}

/// Concrete cell dimensions at one value of `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellParams<T> {
    pub eps: T,
    pub passage_width: T,
    pub passage_height: T,
    pub room: RoomSpec<T>,
    /// `passage_width / (passage_height · eps² · room area)`.
    pub q_eff: T,
}

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("room spec is invalid: {0:?}")]
    InvalidRoom(Vec<RoomViolation>),
    #[error("q_target must be finite positive or Infinity, got {0}")]
    BadQTarget(String),
    #[error("gamma must be strictly positive, got {0}")]
    BadGamma(String),
    #[error("eps must be strictly positive, got {0}")]
    BadEps(String),
    #[error("guard violated at eps={eps}: {what}")]
    GuardViolation { eps: String, what: String },
}

impl<T: Real> ScalingLaw<T> {
    pub fn new(q_target: QTarget<T>, gamma: T) -> Result<Self, ScalingError> {
        if let QTarget::Finite(q) = q_target {
            if !(q > T::zero() && q.is_finite()) {
                return Err(ScalingError::BadQTarget(format!("{q}")));
            }
        }
        if !(gamma > T::zero() && gamma.is_finite()) {
            return Err(ScalingError::BadGamma(format!("{gamma}")));
        }
        Ok(Self { q_target, gamma })
    }

    /// `h = eps^gamma`.
    pub fn passage_height(&self, eps: T) -> T {
        eps.powf(self.gamma)
    }

    /// Passage width at `eps` for the given room.
    ///
    /// Computed through `h·eps²` so that `q_eff` reproduces the target to
    /// machine precision instead of drifting through separate `powf` calls.
    pub fn passage_width(&self, room: &RoomSpec<T>, eps: T) -> T {
        let base = room.area() * self.passage_height(eps) * eps * eps;
        match self.q_target {
            QTarget::Finite(q) => q * base,
            QTarget::Infinity => base / self.passage_height(eps).sqrt(),
        }
    }

    /// Cell dimensions at `eps`, with geometric admissibility guards.
    ///
    /// Guards: the passage may use at most a quarter of the period
    /// (`d <= eps/4`) and must land strictly inside the room contact
    /// segment (`d/2 < contact_half_width · eps`).
    pub fn params_at(&self, room: &RoomSpec<T>, eps: T) -> Result<CellParams<T>, ScalingError> {
        let violations = room.validate();
        if !violations.is_empty() {
            return Err(ScalingError::InvalidRoom(violations));
        }
        if !(eps > T::zero() && eps.is_finite()) {
            return Err(ScalingError::BadEps(format!("{eps}")));
        }
        let h = self.passage_height(eps);
        let d = self.passage_width(room, eps);
        if d > eps / T::lit(4.0) {
            return Err(ScalingError::GuardViolation {
                eps: format!("{eps}"),
                what: format!("passage width {d} exceeds eps/4 = {}", eps / T::lit(4.0)),
            });
        }
        if d * T::half() >= room.contact_half_width * eps {
            return Err(ScalingError::GuardViolation {
                eps: format!("{eps}"),
                what: format!(
                    "passage half-width {} reaches the room contact half-width {}",
                    d * T::half(),
                    room.contact_half_width * eps
                ),
            });
        }
        let q_eff = d / (h * eps * eps * room.area());
        Ok(CellParams {
            eps,
            passage_width: d,
            passage_height: h,
            room: *room,
            q_eff,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room() -> RoomSpec<f64> {
        RoomSpec::new(0.5, 0.5, 0.25)
    }

    #[test]
    fn finite_law_hits_quoted_dimensions() {
        let law = ScalingLaw::new(QTarget::Finite(1.0), 1.0).unwrap();
        let p = law.params_at(&room(), 0.2).unwrap();
        assert!((p.passage_width - 0.002).abs() < 1e-15);
        assert!((p.passage_height - 0.2).abs() < 1e-15);
        assert!((p.q_eff - 1.0).abs() < 1e-14);
    }

    #[test]
    fn infinite_law_diverges_like_inverse_sqrt_h() {
        let law = ScalingLaw::new(QTarget::Infinity, 1.0).unwrap();
        let p = law.params_at(&room(), 0.01).unwrap();
        assert!((p.q_eff - 10.0).abs() < 1e-10);
        assert!((p.passage_width - 0.25 * 0.01f64.powf(2.5)).abs() < 1e-18);
    }

    #[test]
    fn q_eff_pins_target_along_schedule() {
        let law = ScalingLaw::new(QTarget::Finite(2.5), 1.5).unwrap();
        for &eps in &[0.4, 0.2, 0.1, 0.05, 0.02] {
            let p = law.params_at(&room(), eps).unwrap();
            assert!(
                (p.q_eff - 2.5).abs() / 2.5 < 1e-14,
                "q_eff drifted at eps={eps}: {}",
                p.q_eff
            );
        }
    }

    #[test]
    fn separation_of_scales_decays_monotonically() {
        let law = ScalingLaw::new(QTarget::Finite(1.0), 1.0).unwrap();
        let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        for &eps in &[0.3, 0.2, 0.1, 0.05, 0.02, 0.01] {
            let p = law.params_at(&room(), eps).unwrap();
            let now = (
                p.passage_width / eps,
                p.passage_height,
                eps * eps * p.passage_width.ln().abs(),
            );
            assert!(now.0 < last.0 && now.1 < last.1 && now.2 < last.2);
            last = now;
        }
        assert!(last.0 < 1e-3 && last.2 < 1e-2);
    }

    #[test]
    fn room_validation_flags_contact_violation() {
        let bad = RoomSpec::new(0.5, 0.5, 0.3);
        assert_eq!(bad.validate(), vec![RoomViolation::ContactWiderThanRoom]);
        assert!(room().is_valid());
    }

    #[test]
    fn guard_rejects_fat_passage() {
        // gamma small makes d comparable to eps at moderate eps
        let law = ScalingLaw::new(QTarget::Finite(50.0), 0.1).unwrap();
        let err = law.params_at(&room(), 0.5);
        assert!(matches!(err, Err(ScalingError::GuardViolation { .. })));
    }

    #[test]
    fn nonpositive_targets_are_rejected() {
        assert!(ScalingLaw::<f64>::new(QTarget::Finite(0.0), 1.0).is_err());
        assert!(ScalingLaw::<f64>::new(QTarget::Finite(-1.0), 1.0).is_err());
        assert!(ScalingLaw::<f64>::new(QTarget::Finite(1.0), 0.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let law = ScalingLaw::<f32>::new(QTarget::Finite(1.0), 1.0).unwrap();
        let p = law.params_at(&RoomSpec::new(0.5, 0.5, 0.25), 0.2).unwrap();
        assert!((p.q_eff - 1.0).abs() < 1e-5);
    }
}
