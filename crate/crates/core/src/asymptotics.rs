//! Closed-form spiked-model asymptotics.
//!
//! For a rank-`r` signal `X = Σ t_k u_k v_kᵀ` observed as `Y = X + G` with
//! `G` iid `N(0, 1/n)` and `p/n → γ`, each spike `t_k` maps to a limiting
//! observed singular value `σ_k` and to limiting cosines between the
//! observed and population singular vectors. A spike is visible only when
//! `t > γ^{1/4}`, equivalently `σ > 1 + √γ` (the bulk edge); below that the
//! observed value sticks to the edge and the cosines vanish.
//!
//! All cosines are reported nonnegative; the sign of a singular vector pair
//! is arbitrary and only the product `c·c̃ ≥ 0` is meaningful.

use crate::error::{Error, Result};

/// Inner radicands more negative than this are reported, not clamped.
const RADICAND_DUST: f64 = 1e-12;

/// Limiting aspect ratio `γ = p/n`, strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AspectRatio(f64);

impl AspectRatio {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(AspectRatio(gamma))
        } else {
            Err(Error::Domain(format!(
                "aspect ratio must be positive and finite, got {gamma}"
            )))
        }
    }

    /// The finite-sample ratio `p/n` of a `p × n` matrix.
    pub fn from_shape(p: usize, n: usize) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::Domain(format!("empty shape {p}x{n}")));
        }
        Self::new(p as f64 / n as f64)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Largest singular value of pure noise in the limit, `1 + √γ`.
    #[inline]
    pub fn bulk_edge(self) -> f64 {
        1.0 + self.0.sqrt()
    }

    /// Detection threshold on the spike strength, `γ^{1/4}`.
    #[inline]
    pub fn detection_threshold(self) -> f64 {
        self.0.sqrt().sqrt()
    }

    #[inline]
    pub fn is_detectable(self, t: f64) -> bool {
        t > self.detection_threshold()
    }
}

/// Limiting quantities for one spike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentAsymptotics {
    pub t: f64,
    pub sigma: f64,
    /// Left cosine `|⟨û, u⟩|`.
    pub c: f64,
    /// Right cosine `|⟨v̂, v⟩|`.
    pub c_tilde: f64,
    pub s: f64,
    pub s_tilde: f64,
    pub detectable: bool,
}

impl ComponentAsymptotics {
    /// The record of a spike hidden in the noise bulk: `t = 0`, `σ` at the
    /// edge, zero cosines.
    pub fn undetectable(gamma: AspectRatio) -> Self {
        ComponentAsymptotics {
            t: 0.0,
            sigma: gamma.bulk_edge(),
            c: 0.0,
            c_tilde: 0.0,
            s: 1.0,
            s_tilde: 1.0,
            detectable: false,
        }
    }

    /// Forward direction: all limiting quantities for a known strength `t`.
    ///
    /// Unlike [`component_from_sigma`], a sub-threshold `t` is kept as given.
    pub fn from_strength(t: f64, gamma: AspectRatio) -> Result<Self> {
        let sigma = forward_sigma(t, gamma)?;
        let c = cosine_left(t, gamma)?;
        let c_tilde = cosine_right(t, gamma)?;
        Ok(ComponentAsymptotics {
            t,
            sigma,
            c,
            c_tilde,
            s: complement(c),
            s_tilde: complement(c_tilde),
            detectable: gamma.is_detectable(t),
        })
    }
}

#[inline]
pub(crate) fn complement(c: f64) -> f64 {
    (1.0 - c * c).max(0.0).sqrt()
}

fn check_strength(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "spike strength must be finite and nonnegative, got {t}"
        )))
    }
}

/// Limiting observed singular value for a spike of strength `t`.
///
/// `√((t²+1)(1+γ/t²))` above the detection threshold and the bulk edge
/// `1 + √γ` at or below it (including `t = 0`).
pub fn forward_sigma(t: f64, gamma: AspectRatio) -> Result<f64> {
    check_strength(t)?;
    if !gamma.is_detectable(t) {
        return Ok(gamma.bulk_edge());
    }
    let t2 = t * t;
    Ok(((t2 + 1.0) * (1.0 + gamma.value() / t2)).sqrt())
}

/// Recovers `t` from an observed singular value strictly above the bulk edge.
pub fn invert_sigma(sigma: f64, gamma: AspectRatio) -> Result<f64> {
    if !sigma.is_finite() {
        return Err(Error::Domain(format!(
            "singular value must be finite, got {sigma}"
        )));
    }
    let edge = gamma.bulk_edge();
    if sigma <= edge {
        return Err(Error::BelowBulkEdge { sigma, edge });
    }
    let g = gamma.value();
    let d = sigma * sigma - 1.0 - g;
    // (d - 2√γ) = (σ - edge)(σ + edge): factored to avoid cancellation near the edge.
    let mut radicand = (sigma - edge) * (sigma + edge) * (d + 2.0 * g.sqrt());
    if radicand < 0.0 {
        if radicand < -RADICAND_DUST {
            return Err(Error::Internal(format!(
                "negative radicand {radicand} inverting sigma={sigma}, gamma={g}"
            )));
        }
        radicand = 0.0;
    }
    Ok(((d + radicand.sqrt()) / 2.0).sqrt())
}

/// Limiting left cosine `√((1−γ/t⁴)/(1+γ/t²))`, zero at or below threshold.
pub fn cosine_left(t: f64, gamma: AspectRatio) -> Result<f64> {
    check_strength(t)?;
    if !gamma.is_detectable(t) {
        return Ok(0.0);
    }
    let g = gamma.value();
    let t2 = t * t;
    Ok(((1.0 - g / (t2 * t2)) / (1.0 + g / t2)).sqrt())
}

/// Limiting right cosine `√((1−γ/t⁴)/(1+1/t²))`, zero at or below threshold.
pub fn cosine_right(t: f64, gamma: AspectRatio) -> Result<f64> {
    check_strength(t)?;
    if !gamma.is_detectable(t) {
        return Ok(0.0);
    }
    let g = gamma.value();
    let t2 = t * t;
    Ok(((1.0 - g / (t2 * t2)) / (1.0 + 1.0 / t2)).sqrt())
}

/// Plug-in asymptotics for an observed singular value.
///
/// Above the bulk edge `t` is recovered by [`invert_sigma`] and the cosines
/// follow from it. At or below the edge the undetectable record is returned
/// with `t = 0`.
pub fn component_from_sigma(sigma: f64, gamma: AspectRatio) -> Result<ComponentAsymptotics> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::Domain(format!(
            "singular value must be positive and finite, got {sigma}"
        )));
    }
    if sigma <= gamma.bulk_edge() {
        return Ok(ComponentAsymptotics::undetectable(gamma));
    }
    let t = invert_sigma(sigma, gamma)?;
    let c = cosine_left(t, gamma)?;
    let c_tilde = cosine_right(t, gamma)?;
    Ok(ComponentAsymptotics {
        t,
        sigma,
        c,
        c_tilde,
        s: complement(c),
        s_tilde: complement(c_tilde),
        detectable: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ar(g: f64) -> AspectRatio {
        AspectRatio::new(g).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn aspect_ratio_rejects_bad_values() {
        assert!(AspectRatio::new(0.0).is_err());
        assert!(AspectRatio::new(-1.0).is_err());
        assert!(AspectRatio::new(f64::NAN).is_err());
        assert!(AspectRatio::new(f64::INFINITY).is_err());
        assert!(AspectRatio::from_shape(0, 3).is_err());
        assert_eq!(AspectRatio::from_shape(200, 800).unwrap().value(), 0.25);
    }

    #[test]
    fn forward_sigma_examples() {
        // (5)(1.25) = 6.25
        assert!(close(forward_sigma(2.0, ar(1.0)).unwrap(), 2.5, 1e-15));
        let g = ar(0.25);
        assert_eq!(forward_sigma(g.detection_threshold(), g).unwrap(), 1.5);
        // (2)(1.5) = 3
        assert!(close(
            forward_sigma(1.0, ar(0.5)).unwrap(),
            3f64.sqrt(),
            1e-15
        ));
        assert_eq!(forward_sigma(0.0, ar(0.5)).unwrap(), 1.0 + 0.5f64.sqrt());
        assert_eq!(forward_sigma(0.3, ar(0.5)).unwrap(), 1.0 + 0.5f64.sqrt());
    }

    #[test]
    fn forward_sigma_rejects_bad_strength() {
        assert!(matches!(
            forward_sigma(-1.0, ar(1.0)),
            Err(Error::Domain(_))
        ));
        assert!(forward_sigma(f64::NAN, ar(1.0)).is_err());
        assert!(forward_sigma(f64::INFINITY, ar(1.0)).is_err());
    }

    #[test]
    fn invert_sigma_examples() {
        assert!(close(
            invert_sigma(3f64.sqrt(), ar(0.5)).unwrap(),
            1.0,
            1e-12
        ));
        assert!(close(invert_sigma(2.5, ar(1.0)).unwrap(), 2.0, 1e-12));
        let t = invert_sigma(2.0 + 1e-12, ar(1.0)).unwrap();
        assert!((t - 1.0).abs() < 1e-4, "{t}");
    }

    #[test]
    fn invert_sigma_guards_the_edge() {
        assert!(matches!(
            invert_sigma(2.0, ar(1.0)),
            Err(Error::BelowBulkEdge { .. })
        ));
        assert!(matches!(
            invert_sigma(1.2, ar(1.0)),
            Err(Error::BelowBulkEdge { .. })
        ));
        assert!(matches!(
            invert_sigma(f64::NAN, ar(1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn cosine_examples() {
        let g = ar(0.5);
        assert!(close(
            cosine_left(1.0, g).unwrap(),
            (1.0f64 / 3.0).sqrt(),
            1e-15
        ));
        assert!(close(cosine_right(1.0, g).unwrap(), 0.5, 1e-15));
        let g = ar(1.0);
        assert!(close(cosine_left(2.0, g).unwrap(), 0.75f64.sqrt(), 1e-15));
        assert!(close(cosine_right(2.0, g).unwrap(), 0.75f64.sqrt(), 1e-15));
        let g = ar(0.3);
        assert_eq!(cosine_left(g.detection_threshold(), g).unwrap(), 0.0);
        assert_eq!(cosine_right(g.detection_threshold(), g).unwrap(), 0.0);
        assert_eq!(cosine_right(0.1, g).unwrap(), 0.0);
    }

    #[test]
    fn component_from_sigma_examples() {
        let a = component_from_sigma(3f64.sqrt(), ar(0.5)).unwrap();
        assert!(a.detectable);
        assert!(close(a.t, 1.0, 1e-12));
        assert!(close(a.c, 0.577_350_269_189_625_8, 1e-12));
        assert!(close(a.c_tilde, 0.5, 1e-12));

        let b = component_from_sigma(1.2, ar(1.0)).unwrap();
        assert!(!b.detectable);
        assert_eq!((b.t, b.c, b.c_tilde, b.sigma), (0.0, 0.0, 0.0, 2.0));

        let c = component_from_sigma(2.5, ar(1.0)).unwrap();
        assert!(close(c.t, 2.0, 1e-12));
        assert!(close(c.c, 0.866_025_403_784_438_6, 1e-12));
        assert_eq!(c.c, c.c_tilde);

        assert!(component_from_sigma(f64::INFINITY, ar(1.0)).is_err());
        assert!(component_from_sigma(0.0, ar(1.0)).is_err());
    }

    #[test]
    fn roundtrip_on_log_grid() {
        for &g in &[0.05, 0.25, 0.5, 1.0, 2.0, 10.0] {
            let gamma = ar(g);
            let lo = (gamma.detection_threshold() * 1.001).ln();
            let hi = 50f64.ln();
            for i in 0..=200 {
                let t = (lo + (hi - lo) * i as f64 / 200.0).exp();
                let sigma = forward_sigma(t, gamma).unwrap();
                let back = invert_sigma(sigma, gamma).unwrap();
                assert!(
                    ((back - t) / t).abs() <= 1e-9,
                    "gamma={g} t={t} back={back}"
                );
            }
        }
    }

    #[test]
    fn forward_sigma_strictly_increasing_above_threshold() {
        for &g in &[0.05, 0.5, 1.0, 4.0] {
            let gamma = ar(g);
            let t0 = gamma.detection_threshold();
            let mut prev = forward_sigma(t0, gamma).unwrap();
            for i in 1..=500 {
                let t = t0 * (1.0 + 0.01 * i as f64);
                let s = forward_sigma(t, gamma).unwrap();
                assert!(s > prev, "gamma={g} t={t}");
                prev = s;
            }
        }
    }

    #[test]
    fn cosine_ordering_follows_aspect_ratio() {
        for &g in &[0.05, 0.3, 0.9] {
            let gamma = ar(g);
            for i in 1..100 {
                let t = gamma.detection_threshold() * (1.0 + 0.05 * i as f64);
                assert!(cosine_right(t, gamma).unwrap() < cosine_left(t, gamma).unwrap());
            }
        }
        for &g in &[1.5, 4.0] {
            let gamma = ar(g);
            let t = gamma.detection_threshold() * 2.0;
            assert!(cosine_left(t, gamma).unwrap() < cosine_right(t, gamma).unwrap());
        }
        let gamma = ar(1.0);
        for i in 1..100 {
            let t = 1.0 + 0.1 * i as f64;
            assert_eq!(
                cosine_left(t, gamma).unwrap(),
                cosine_right(t, gamma).unwrap()
            );
        }
    }

    #[test]
    fn limits_at_threshold() {
        for &g in &[0.05, 0.25, 1.0, 3.0] {
            let gamma = ar(g);
            let t = gamma.detection_threshold() * (1.0 + 1e-6);
            assert!(cosine_left(t, gamma).unwrap() < 1e-2);
            assert!(cosine_right(t, gamma).unwrap() < 1e-2);
            assert!((forward_sigma(t, gamma).unwrap() - gamma.bulk_edge()).abs() < 1e-6);
        }
    }
}
