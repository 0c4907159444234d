//! Period-cell geometry.
//!
//! One period of the waveguide occupies `[0, eps] × [-eps, 0]` (the strip
//! segment) plus, when the cell is decorated, a passage rectangle sitting on
//! the strip's upper edge and a room rectangle sitting on the passage. All
//! three meet along horizontal lines; the passage is centred at `x = eps/2`
//! and so is the room.
//!
//! A bounded waveguide of length `l` is a row of translated copies of the
//! cell; translation is applied as a final additive step so that the shared
//! vertical interfaces of adjacent cells carry bitwise-identical coordinates.

use crate::scalar::Real;
use crate::scaling::CellParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect<T> {
    pub x0: T,
    pub y0: T,
    pub x1: T,
    pub y1: T,
}

impl<T: Real> Rect<T> {
    pub fn new(x0: T, y0: T, x1: T, y1: T) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> T {
        self.x1 - self.x0
    }

    pub fn height(&self) -> T {
        self.y1 - self.y0
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn translated(&self, dx: T) -> Self {
        Self {
            x0: self.x0 + dx,
            y0: self.y0,
            x1: self.x1 + dx,
            y1: self.y1,
        }
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

/// The decoration on top of one strip segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protuberance<T> {
    pub passage: Rect<T>,
    pub room: Rect<T>,
}

/// Which part of the cell a mesh element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Strip,
    Passage,
    Room,
}

/// One period cell: strip segment plus optional protuberance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry<T> {
    pub eps: T,
    pub strip: Rect<T>,
    pub protuberance: Option<Protuberance<T>>,
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("waveguide length {l} is not an integer multiple of the period {eps}")]
    NotCommensurate { l: String, eps: String },
}

impl<T: Real> CellGeometry<T> {
    /// Decorated cell from concrete scaling parameters.
    pub fn from_params(p: &CellParams<T>) -> Self {
        let eps = p.eps;
        let mid = eps * T::half();
        let strip = Rect::new(T::zero(), -eps, eps, T::zero());
        let passage = Rect::new(
            mid - p.passage_width * T::half(),
            T::zero(),
            mid + p.passage_width * T::half(),
            p.passage_height,
        );
        let half_room = p.room.width * eps * T::half();
        let room = Rect::new(
            mid - half_room,
            p.passage_height,
            mid + half_room,
            p.passage_height + p.room.height * eps,
        );
        Self {
            eps,
            strip,
            protuberance: Some(Protuberance { passage, room }),
        }
    }

    /// Undecorated cell: just the strip segment.
    pub fn strip_only(eps: T) -> Self {
        Self {
            eps,
            strip: Rect::new(T::zero(), -eps, eps, T::zero()),
            protuberance: None,
        }
    }

    /// Copy shifted right by `dx`.
    pub fn translated(&self, dx: T) -> Self {
        Self {
            eps: self.eps,
            strip: self.strip.translated(dx),
            protuberance: self.protuberance.map(|p| Protuberance {
                passage: p.passage.translated(dx),
                room: p.room.translated(dx),
            }),
        }
    }

    /// Total cell area.
    pub fn area(&self) -> T {
        let mut a = self.strip.area();
        if let Some(p) = &self.protuberance {
            a += p.passage.area() + p.room.area();
        }
        a
    }

    /// Horizontal interface segments: (strip top ∩ passage bottom) and
    /// (passage top ∩ room bottom), as x-intervals with their y level.
    pub fn interfaces(&self) -> Vec<(T, T, T)> {
        match &self.protuberance {
            None => Vec::new(),
            Some(p) => vec![
                (p.passage.x0, p.passage.x1, T::zero()),
                (p.passage.x0, p.passage.x1, p.passage.y1),
            ],
        }
    }
}

/// Cells of a bounded waveguide `(0, l)` with period `eps`.
///
/// `l / eps` must be an integer to relative precision `1e-9`; otherwise the
/// last cell would be cut and the construction refuses.
pub fn build_bounded_waveguide<T: Real>(
    l: T,
    cell: &CellGeometry<T>,
) -> Result<Vec<CellGeometry<T>>, GeometryError> {
    let ratio = l / cell.eps;
    let n = ratio.round();
    if n < T::one() || (ratio - n).abs() > T::lit(1e-9) * ratio.max(T::one()) {
        return Err(GeometryError::NotCommensurate {
            l: format!("{l}"),
            eps: format!("{}", cell.eps),
        });
    }
    let count = n.to_usize().expect("cell count fits in usize");
    Ok((0..count)
        .map(|j| cell.translated(T::from_usize(j).unwrap() * cell.eps))
        .collect())
}
