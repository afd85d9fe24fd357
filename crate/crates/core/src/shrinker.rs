//! Operator-norm loss of singular value shrinkage and its minimizer.
//!
//! In the limit, the signal and a shrinkage estimate decompose into
//! orthogonal 2×2 blocks, one per spike. For a spike with strength `t` and
//! cosines `c`, `c̃` the error block is
//!
//! ```text
//! D(q) = [t 0; 0 0] − q·[c·c̃  c·s̃; s·c̃  s·s̃],   s = √(1−c²), s̃ = √(1−c̃²)
//! ```
//!
//! and the operator-norm loss of the whole estimate is the largest block
//! norm. Everything here works per block and in closed form, except
//! [`brute_force_optimal_q`], which minimizes numerically over an explicit
//! 2×2 singular value routine and serves as an independent check.

use std::fmt;
use std::str::FromStr;

use crate::asymptotics::{
    complement, cosine_left, cosine_right, invert_sigma, AspectRatio, ComponentAsymptotics,
};
use crate::error::{Error, Result};

/// Parameters `(t, c, c̃)` of one 2×2 error block.
///
/// Any `t > 0` and cosines in `[0, 1]` are accepted; the triple does not
/// have to come from the spiked-model formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParams {
    pub t: f64,
    pub c: f64,
    pub c_tilde: f64,
}

impl BlockParams {
    pub fn new(t: f64, c: f64, c_tilde: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Domain(format!(
                "block strength must be positive, got {t}"
            )));
        }
        for (name, v) in [("c", c), ("c_tilde", c_tilde)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(BlockParams { t, c, c_tilde })
    }

    /// Block of a detected component. Fails for `t = 0` records.
    pub fn from_asymptotics(a: &ComponentAsymptotics) -> Result<Self> {
        Self::new(a.t, a.c, a.c_tilde)
    }

    #[inline]
    pub fn s(&self) -> f64 {
        complement(self.c)
    }

    #[inline]
    pub fn s_tilde(&self) -> f64 {
        complement(self.c_tilde)
    }

    /// The explicit error block `D(q)`, row-major.
    pub fn error_block(&self, q: f64) -> [[f64; 2]; 2] {
        let (c, ct, s, st) = (self.c, self.c_tilde, self.s(), self.s_tilde());
        [
            [self.t - q * c * ct, -q * c * st],
            [-q * s * ct, -q * s * st],
        ]
    }
}

/// Rule that picks the shrunken singular value of each retained component.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ShrinkerKind {
    /// The operator-norm optimal value `q*`.
    #[default]
    Optimal,
    /// `q = t̂`, the plug-in estimate of the population singular value.
    OracleTruth,
    /// `q = σ`: plain truncated SVD of the retained components.
    NoShrink,
    /// `q = σ` above the bulk edge, 0 otherwise.
    HardThreshold,
    /// Caller-supplied values, one per retained component.
    Custom(Vec<f64>),
}

impl ShrinkerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ShrinkerKind::Optimal => "optimal",
            ShrinkerKind::OracleTruth => "oracle-t",
            ShrinkerKind::NoShrink => "none",
            ShrinkerKind::HardThreshold => "hard",
            ShrinkerKind::Custom(_) => "custom",
        }
    }
}

impl fmt::Display for ShrinkerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShrinkerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(ShrinkerKind::Optimal),
            "oracle-t" => Ok(ShrinkerKind::OracleTruth),
            "none" => Ok(ShrinkerKind::NoShrink),
            "hard" => Ok(ShrinkerKind::HardThreshold),
            other => Err(Error::Config(format!(
                "unknown shrinker '{other}' (expected optimal, oracle-t, none or hard)"
            ))),
        }
    }
}

/// Per-component asymptotic losses and their maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub per_component_loss: Vec<f64>,
    pub overall_loss: f64,
}

/// Squared operator norm `F(q) = ‖D(q)‖²` via `A(q)` and `B(q)`.
pub fn block_loss(q: f64, b: &BlockParams) -> Result<f64> {
    let t = b.t;
    let (s, st) = (b.s(), b.s_tilde());
    // For q ≥ 0 use A = (q − t)² + qt((c − c̃)² + s² + s̃²), free of cancellation.
    let a = if q >= 0.0 {
        (q - t).powi(2) + q * t * ((b.c - b.c_tilde).powi(2) + s * s + st * st)
    } else {
        q * q + t * t - 2.0 * q * t * b.c * b.c_tilde
    };
    let b2 = (t * q * s * st).abs() * 2.0;
    // A − 2|B| = (|q| − t)² + |q|t((c' − c̃)² + (s − s̃)²) with c' = sgn(q)·c,
    // which stays exact where the two terms cancel.
    let qa = q.abs();
    let c_signed = if q < 0.0 { -b.c } else { b.c };
    let gap = (qa - t).powi(2) + qa * t * ((c_signed - b.c_tilde).powi(2) + (s - st).powi(2));
    let radicand = gap * (a + b2);
    Ok((a + radicand.sqrt()) / 2.0)
}

/// Minimizer of [`block_loss`]: `t·min{c,c̃}/max{c,c̃}`, or 0 when both
/// cosines vanish (every `|q| ≤ t` is optimal then).
pub fn optimal_q(b: &BlockParams) -> f64 {
    let hi = b.c.max(b.c_tilde);
    if hi > 0.0 {
        b.t * b.c.min(b.c_tilde) / hi
    } else {
        0.0
    }
}

/// Optimal shrunken value for an observed singular value in noise units.
///
/// Returns 0 at or below the bulk edge.
pub fn optimal_q_from_sigma(sigma: f64, gamma: AspectRatio) -> Result<f64> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::Domain(format!(
            "singular value must be positive and finite, got {sigma}"
        )));
    }
    if sigma <= gamma.bulk_edge() {
        return Ok(0.0);
    }
    let t = invert_sigma(sigma, gamma)?;
    let g = gamma.value();
    let t2 = t * t;
    Ok(t * ((t2 + g.min(1.0)) / (t2 + g.max(1.0))).sqrt())
}

/// Operator-norm loss at the optimum, `t·√(1 − min{c², c̃²})`.
pub fn optimal_loss(b: &BlockParams) -> f64 {
    let lo = b.c.min(b.c_tilde);
    b.t * (1.0 - lo * lo).max(0.0).sqrt()
}

/// Operator-norm loss of the `q = t` baseline, `t·√(1 − c·c̃ + |c − c̃|)`.
pub fn gd_loss(b: &BlockParams) -> f64 {
    b.t * (1.0 - b.c * b.c_tilde + (b.c - b.c_tilde).abs())
        .max(0.0)
        .sqrt()
}

/// Unsquared per-block losses of the given shrunken values and their max.
pub fn asymptotic_loss(spectrum: &[BlockParams], q: &[f64]) -> Result<LossReport> {
    if spectrum.len() != q.len() {
        return Err(Error::Usage(format!(
            "{} blocks but {} shrunken values",
            spectrum.len(),
            q.len()
        )));
    }
    let per_component_loss = spectrum
        .iter()
        .zip(q)
        .map(|(b, &q)| block_loss(q, b).map(f64::sqrt))
        .collect::<Result<Vec<_>>>()?;
    let overall_loss = per_component_loss.iter().copied().fold(0.0, f64::max);
    Ok(LossReport {
        per_component_loss,
        overall_loss,
    })
}

/// Ratio of optimal to `q = t` loss for a rank-one signal,
/// `√((1 + min{c,c̃}) / (1 + max{c,c̃}))`.
pub fn error_ratio(gamma: AspectRatio, t: f64) -> Result<f64> {
    if !t.is_finite() || !gamma.is_detectable(t) {
        return Err(Error::Domain(format!(
            "error ratio needs t > gamma^(1/4) = {}, got {t}",
            gamma.detection_threshold()
        )));
    }
    let c = cosine_left(t, gamma)?;
    let ct = cosine_right(t, gamma)?;
    Ok(((1.0 + c.min(ct)) / (1.0 + c.max(ct))).sqrt())
}

/// `γ → 0` limit of [`error_ratio`], `√(½(1 + √(t²/(t²+1))))`.
pub fn classical_limit_ratio(t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let t2 = t * t;
    Ok((0.5 * (1.0 + (t2 / (t2 + 1.0)).sqrt())).sqrt())
}

/// Largest singular value of a 2×2 matrix.
///
/// Uses the rotation decomposition `M = R(θ)·diag(σ₁, σ₂)·R(φ)`:
/// with `E = (m₀₀+m₁₁)/2`, `F = (m₀₀−m₁₁)/2`, `G = (m₁₀+m₀₁)/2`,
/// `H = (m₁₀−m₀₁)/2`, the top singular value is `√(E²+H²) + √(F²+G²)`.
pub fn top_singular_value_2x2(m: [[f64; 2]; 2]) -> f64 {
    let e = 0.5 * (m[0][0] + m[1][1]);
    let f = 0.5 * (m[0][0] - m[1][1]);
    let g = 0.5 * (m[1][0] + m[0][1]);
    let h = 0.5 * (m[1][0] - m[0][1]);
    e.hypot(h) + f.hypot(g)
}

/// Numerical minimizer of `q ↦ ‖D(q)‖²` over `[0, q_max]`.
///
/// Scans a uniform grid, then runs golden-section search inside the cells
/// adjacent to the best grid point. Returns `(argmin, min)` where `min` is
/// the squared norm.
pub fn brute_force_optimal_q(
    b: &BlockParams,
    q_max: f64,
    grid_points: usize,
) -> Result<(f64, f64)> {
    if !(q_max.is_finite() && q_max >= b.t) {
        return Err(Error::Usage(format!(
            "q_max must be at least t = {}, got {q_max}",
            b.t
        )));
    }
    if grid_points < 1000 {
        return Err(Error::Usage(format!(
            "brute force needs at least 1000 grid points, got {grid_points}"
        )));
    }
    let objective = |q: f64| top_singular_value_2x2(b.error_block(q)).powi(2);
    let step = q_max / (grid_points - 1) as f64;

    let mut best = (0usize, objective(0.0));
    for i in 1..grid_points {
        let v = objective(i as f64 * step);
        if v < best.1 {
            best = (i, v);
        }
    }
    let (i, grid_min) = best;
    let lo = i.saturating_sub(1) as f64 * step;
    let hi = ((i + 1).min(grid_points - 1)) as f64 * step;
    let (q, v) = golden_section_min(objective, lo, hi, 1e-13 * q_max.max(1.0));
    if v < grid_min {
        Ok((q, v))
    } else {
        Ok((i as f64 * step, grid_min))
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
