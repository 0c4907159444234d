//! Closed-form limit models the computed spectra are verified against.
//!
//! The homogenized operator couples a one-dimensional longitudinal mode
//! `u₁` to a per-room amplitude `u₂` through the coupling strength `q` and
//! the room area `|B|`. Everything in this module is analytic: the spectral
//! function `ρ`, the essential spectrum with its single gap, the eigenvalues
//! of the bounded-interval version, and the resolvent applied to cosine
//! series. No mesh or matrix is involved, so these values serve as exact
//! references.

use crate::bloch::IntervalSet;
use crate::scalar::Real;
use serde::Serialize;
use thiserror::Error;

pub use crate::scaling::QTarget;

#[derive(Debug, Error, PartialEq)]
pub enum LimitError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("spectral parameter {0} sits on the pole at q")]
    PoleAtQ(String),
}

/// The homogenized two-component model with coupling `q ∈ (0, ∞]` and room
/// area `|B| > 0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LimitModel<T> {
    q_target: QTarget<T>,
    area: T,
}

impl<T: Real> LimitModel<T> {
    pub fn new(q_target: QTarget<T>, area: T) -> Result<Self, LimitError> {
        if !(area > T::zero() && area.is_finite()) {
            return Err(LimitError::BadParameter(format!(
                "room area must be positive and finite, got {area}"
            )));
        }
        if let QTarget::Finite(q) = q_target {
            if !(q > T::zero() && q.is_finite()) {
                return Err(LimitError::BadParameter(format!(
                    "coupling q must be positive and finite, got {q}"
                )));
            }
        }
        Ok(Self { q_target, area })
    }

    pub fn q_target(&self) -> QTarget<T> {
        self.q_target
    }

    pub fn area(&self) -> T {
        self.area
    }

    /// The spectral function whose level sets give the band structure:
    /// `ρ(λ) = λ(1 + q|B|/(q−λ))` for finite `q`, `ρ(λ) = λ(1+|B|)` in the
    /// decoupled-at-infinity regime.
    pub fn rho(&self, lambda: T) -> Result<T, LimitError> {
        match self.q_target {
            QTarget::Infinity => Ok(lambda * (T::one() + self.area)),
            QTarget::Finite(q) => {
                let scale = q.abs().max(lambda.abs());
                let tol = scale * T::lit(1e-14).max(T::epsilon() * T::lit(4.0));
                if (q - lambda).abs() <= tol {
                    return Err(LimitError::PoleAtQ(format!("{lambda}")));
                }
                Ok(lambda * (T::one() + q * self.area / (q - lambda)))
            }
        }
    }

    /// The spectral gap `(q, q + q|B|)`, if the model has one.
    pub fn gap(&self) -> Option<(T, T)> {
        match self.q_target {
            QTarget::Infinity => None,
            QTarget::Finite(q) => Some((q, q * (T::one() + self.area))),
        }
    }

    /// Spectrum of the whole-line model intersected with `[0, cap]`.
    pub fn spectrum(&self, cap: T) -> IntervalSet<T> {
        let mut set = IntervalSet::new();
        if !(cap > T::zero()) {
            return set;
        }
        match self.q_target {
            QTarget::Infinity => set.insert(T::zero(), cap),
            QTarget::Finite(q) => {
                set.insert(T::zero(), q.min(cap));
                let upper = q * (T::one() + self.area);
                if upper < cap {
                    set.insert(upper, cap);
                }
            }
        }
        set
    }

    /// Eigenvalues belonging to one transverse mode `ν ≥ 0`: the lower
    /// branch, and the upper branch when the coupling is finite.
    ///
    /// Both are roots of `λ² − (q + q|B| + ν)λ + qν = 0`; the lower one is
    /// computed as `2qν / (S + √(S² − 4qν))` so that small roots lose no
    /// precision to cancellation.
    pub fn eigenvalues_for_mode(&self, nu: T) -> (T, Option<T>) {
        match self.q_target {
            QTarget::Infinity => (nu / (T::one() + self.area), None),
            QTarget::Finite(q) => {
                let qb = q * self.area;
                if nu == T::zero() {
                    return (T::zero(), Some(q + qb));
                }
                let s = q + qb + nu;
                let disc = (s * s - T::lit(4.0) * q * nu).max(T::zero());
                let root = disc.sqrt();
                let lo = T::two() * q * nu / (s + root);
                let hi = (s + root) * T::half();
                (lo, Some(hi))
            }
        }
    }

    /// All eigenvalues of the model restricted to `(0, l)` with Neumann
    /// ends, for transverse indices `k = 0, …, k_max`, sorted ascending.
    pub fn bounded_eigenvalues(&self, l: T, k_max: usize) -> Result<Vec<T>, LimitError> {
        if !(l > T::zero() && l.is_finite()) {
            return Err(LimitError::BadParameter(format!(
                "interval length must be positive, got {l}"
            )));
        }
        let mut out = Vec::new();
        for k in 0..=k_max {
            let nu = transverse_eigenvalue(l, k);
            let (lo, hi) = self.eigenvalues_for_mode(nu);
            out.push(lo);
            if let Some(hi) = hi {
                out.push(hi);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).expect("NaN eigenvalue"));
        Ok(out)
    }
}

/// `ν_k = (kπ/l)²`, the k-th Neumann eigenvalue of `−d²/dx²` on `(0, l)`.
pub fn transverse_eigenvalue<T: Real>(l: T, k: usize) -> T {
    let base = T::from_usize(k).unwrap() * T::pi() / l;
    base * base
}

/// A finite cosine series `f(x) = Σ_k c_k cos(kπx/l)` on `[0, l]` — the
/// natural basis for Neumann data, closed under the limit resolvent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CosineSeries<T> {
    pub l: T,
    pub coeffs: Vec<T>,
}

impl<T: Real> CosineSeries<T> {
    pub fn new(l: T, coeffs: Vec<T>) -> Self {
        Self { l, coeffs }
    }

    pub fn zero(l: T) -> Self {
        Self { l, coeffs: Vec::new() }
    }

    pub fn constant(l: T, value: T) -> Self {
        Self { l, coeffs: vec![value] }
    }

    pub fn eval(&self, x: T) -> T {
        let mut acc = T::zero();
        for (k, &c) in self.coeffs.iter().enumerate() {
            let arg = T::from_usize(k).unwrap() * T::pi() * x / self.l;
            acc += c * arg.cos();
        }
        acc
    }

    /// `∫₀ˡ f dx` — only the constant mode contributes.
    pub fn integrate(&self) -> T {
        self.coeffs.first().copied().unwrap_or_else(T::zero) * self.l
    }

    /// `∫_a^b f dx`, exact.
    pub fn integrate_between(&self, a: T, b: T) -> T {
        let mut acc = T::zero();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if k == 0 {
                acc += c * (b - a);
            } else {
                let w = T::from_usize(k).unwrap() * T::pi() / self.l;
                acc += c / w * ((w * b).sin() - (w * a).sin());
            }
        }
        acc
    }

    /// Exact `L²(0, l)` norm via mode orthogonality.
    pub fn norm_l2(&self) -> T {
        let mut sq = T::zero();
        for (k, &c) in self.coeffs.iter().enumerate() {
            let weight = if k == 0 { self.l } else { self.l * T::half() };
            sq += c * c * weight;
        }
        sq.sqrt()
    }
}

/// Apply the limit resolvent `(ℋ + μ)⁻¹` to the two-component source
/// `(f₁, f₂)`, mode by mode. Requires `μ > 0` so that `−μ` lies in the
/// resolvent set of the nonnegative operator.
pub fn limit_resolvent<T: Real>(
    model: &LimitModel<T>,
    mu: T,
    f1: &CosineSeries<T>,
    f2: &CosineSeries<T>,
) -> Result<(CosineSeries<T>, CosineSeries<T>), LimitError> {
    if !(mu > T::zero() && mu.is_finite()) {
        return Err(LimitError::BadParameter(format!(
            "resolvent parameter must be positive, got {mu}"
        )));
    }
    if f1.l != f2.l {
        return Err(LimitError::BadParameter(
            "source components live on different intervals".into(),
        ));
    }
    let l = f1.l;
    let n = f1.coeffs.len().max(f2.coeffs.len());
    let coeff = |s: &CosineSeries<T>, m: usize| s.coeffs.get(m).copied().unwrap_or_else(T::zero);
    let sqrt_area = model.area.sqrt();
    let mut u1 = Vec::with_capacity(n);
    let mut u2 = Vec::with_capacity(n);
    for m in 0..n {
        let nu = transverse_eigenvalue(l, m);
        let (a, b) = (coeff(f1, m), coeff(f2, m));
        match model.q_target {
            QTarget::Infinity => {
                let denom = nu + mu * (T::one() + model.area);
                let x = (a + sqrt_area * b) / denom;
                u1.push(x);
                u2.push(sqrt_area * x);
            }
            QTarget::Finite(q) => {
                let denom = nu + mu * (T::one() + q * model.area / (q + mu));
                let x = (a + q * sqrt_area / (q + mu) * b) / denom;
                u1.push(x);
                u2.push((q * sqrt_area * x + b) / (q + mu));
            }
        }
    }
    Ok((CosineSeries::new(l, u1), CosineSeries::new(l, u2)))
}
