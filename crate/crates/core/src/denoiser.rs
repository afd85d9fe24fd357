//! Finite-sample denoising pipeline.
//!
//! `Y → thin SVD → count singular values above the bulk edge → shrink the
//! retained singular values → reconstruct`. The aspect ratio is always the
//! observed `p/n`, and singular values are divided by the matrix noise scale
//! before any asymptotic formula is applied.
//!
//! Also hosts the column-wise linear predictors used to compare shrinkage
//! with the best linear predictor when the population components are known.

use faer::{Mat, MatRef};

use crate::asymptotics::{component_from_sigma, AspectRatio};
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, reconstruct, svd_of, thin_svd, DataMatrix, SvdFactors};
use crate::shrinker::{block_loss, optimal_q_from_sigma, BlockParams, ShrinkerKind};

/// Relative slack above the bulk edge required before a component counts
/// as signal. Absorbs the `O(n^{-2/3})` fluctuation of the top noise value.
pub const DEFAULT_DETECTION_TOLERANCE: f64 = 0.02;

/// Plug-in estimates for one retained component, in data units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentEstimate {
    pub sigma_observed: f64,
    pub t_hat: f64,
    pub c_hat: f64,
    pub c_tilde_hat: f64,
    pub q_applied: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseReport {
    pub detected_rank: usize,
    pub per_component: Vec<ComponentEstimate>,
    /// Asymptotic operator-norm loss at the plug-in estimates, maximized over
    /// retained components; 0 when nothing is retained.
    pub predicted_loss: f64,
    pub shrinker: ShrinkerKind,
    pub gamma_used: f64,
    pub noise_scale: f64,
}

impl DenoiseReport {
    pub fn q_values(&self) -> Vec<f64> {
        self.per_component.iter().map(|c| c.q_applied).collect()
    }
}

/// Number of singular values with `σ/noise_scale > (1 + √(p/n))·(1 + tolerance)`.
pub fn detect_rank(
    sv: &[f64],
    p: usize,
    n: usize,
    noise_scale: f64,
    tolerance: f64,
) -> Result<usize> {
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be nonnegative, got {tolerance}"
        )));
    }
    if !(noise_scale.is_finite() && noise_scale > 0.0) {
        return Err(Error::Config(format!(
            "noise scale must be positive, got {noise_scale}"
        )));
    }
    let threshold = AspectRatio::from_shape(p, n)?.bulk_edge() * (1.0 + tolerance);
    Ok(sv.iter().filter(|&&s| s / noise_scale > threshold).count())
}

/// Shrinks the leading `rank` singular pairs of a factorization.
///
/// Components at or below the bulk edge receive `q = 0` under the optimal,
/// oracle-truth and hard-threshold rules.
pub fn shrink_factors(
    svd: &SvdFactors,
    shape: (usize, usize),
    noise_scale: f64,
    kind: &ShrinkerKind,
    rank: usize,
) -> Result<DenoiseReport> {
    let (p, n) = shape;
    if rank > svd.rank_capacity() {
        return Err(Error::Usage(format!(
            "rank {rank} exceeds the {} available components",
            svd.rank_capacity()
        )));
    }
    if !(noise_scale.is_finite() && noise_scale > 0.0) {
        return Err(Error::Config(format!(
            "noise scale must be positive, got {noise_scale}"
        )));
    }
    if let ShrinkerKind::Custom(q) = kind {
        if q.len() != rank {
            return Err(Error::Usage(format!(
                "custom shrinker has {} values for {rank} retained components",
                q.len()
            )));
        }
        if let Some(bad) = q.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Usage(format!(
                "custom shrinker value {bad} is not a finite q >= 0"
            )));
        }
    }
    let gamma = AspectRatio::from_shape(p, n)?;
    let mut per_component = Vec::with_capacity(rank);
    let mut predicted_loss = 0.0f64;
    for (k, &sigma) in svd.singular_values[..rank].iter().enumerate() {
        let x = sigma / noise_scale;
        if x <= 0.0 {
            per_component.push(ComponentEstimate {
                sigma_observed: sigma,
                t_hat: 0.0,
                c_hat: 0.0,
                c_tilde_hat: 0.0,
                q_applied: match kind {
                    ShrinkerKind::Custom(q) => q[k],
                    _ => 0.0,
                },
            });
            continue;
        }
        let a = component_from_sigma(x, gamma)?;
        let q_units = match kind {
            ShrinkerKind::Optimal => optimal_q_from_sigma(x, gamma)?,
            ShrinkerKind::OracleTruth => a.t,
            ShrinkerKind::NoShrink => x,
            ShrinkerKind::HardThreshold => {
                if a.detectable {
                    x
                } else {
                    0.0
                }
            }
            ShrinkerKind::Custom(q) => q[k] / noise_scale,
        };
        let q_applied = match kind {
            ShrinkerKind::NoShrink | ShrinkerKind::HardThreshold if q_units > 0.0 => sigma,
            ShrinkerKind::Custom(q) => q[k],
            _ => q_units * noise_scale,
        };
        if a.detectable {
            let block = BlockParams::from_asymptotics(&a)?;
            predicted_loss = predicted_loss.max(block_loss(q_units, &block)?.sqrt() * noise_scale);
        }
        per_component.push(ComponentEstimate {
            sigma_observed: sigma,
            t_hat: a.t * noise_scale,
            c_hat: a.c,
            c_tilde_hat: a.c_tilde,
            q_applied,
        });
    }
    Ok(DenoiseReport {
        detected_rank: rank,
        per_component,
        predicted_loss,
        shrinker: kind.clone(),
        gamma_used: gamma.value(),
        noise_scale,
    })
}

/// Denoises `Y` by singular value shrinkage.
///
/// Retains the components above the bulk edge (with the relative
/// `tolerance`) and replaces each singular value according to `kind`.
pub fn denoise(
    y: &DataMatrix,
    kind: &ShrinkerKind,
    tolerance: f64,
) -> Result<(DataMatrix, DenoiseReport)> {
    let svd = thin_svd(y)?;
    let (p, n) = (y.nrows(), y.ncols());
    let rank = detect_rank(&svd.singular_values, p, n, y.noise_scale(), tolerance)?;
    let report = shrink_factors(&svd, (p, n), y.noise_scale(), kind, rank)?;
    let estimate = reconstruct(
        svd.left_vectors.as_ref(),
        &report.q_values(),
        svd.right_vectors.as_ref(),
    );
    Ok((DataMatrix::new(estimate, y.noise_scale())?, report))
}

/// Population principal components and their strengths.
///
/// Used by the best linear predictor and for evaluation only; the denoiser
/// never sees it.
#[derive(Debug, Clone)]
pub struct GroundTruthFactors {
    components: Mat<f64>,
    strengths: Vec<f64>,
}

impl GroundTruthFactors {
    /// `components` is `p × r` with orthonormal columns; `strengths` has `r`
    /// strictly decreasing positive entries.
    pub fn new(components: Mat<f64>, strengths: Vec<f64>) -> Result<Self> {
        if components.ncols() != strengths.len() {
            return Err(Error::Usage(format!(
                "{} components but {} strengths",
                components.ncols(),
                strengths.len()
            )));
        }
        if strengths.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Config(
                "strengths must be positive and finite".into(),
            ));
        }
        if strengths.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Config(
                "strengths must be strictly decreasing".into(),
            ));
        }
        let gram = components.transpose() * &components;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - target).abs() > 1e-10 {
                    return Err(Error::Config(format!(
                        "components are not orthonormal: entry ({i}, {j}) of UᵀU is {}",
                        gram[(i, j)]
                    )));
                }
            }
        }
        Ok(GroundTruthFactors {
            components,
            strengths,
        })
    }

    pub fn components(&self) -> MatRef<'_, f64> {
        self.components.as_ref()
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn rank(&self) -> usize {
        self.strengths.len()
    }

    /// Wiener gains `t²/(t² + noise_scale²)`.
    pub fn wiener_gains(&self, noise_scale: f64) -> Vec<f64> {
        let s2 = noise_scale * noise_scale;
        self.strengths
            .iter()
            .map(|t| t * t / (t * t + s2))
            .collect()
    }
}

/// Best linear predictor of each column: `Σ_k t_k²/(t_k²+1)·⟨Y_j, u_k⟩·u_k`
/// with the true components.
///
/// The map acts column by column and is linear, so it gives the same result
/// whether columns carry the `1/√n` scaling or not. With a noise scale `s`
/// the gains become `t²/(t² + s²)`.
pub fn blp_predict(y: &DataMatrix, truth: &GroundTruthFactors) -> Result<DataMatrix> {
    if truth.components().nrows() != y.nrows() {
        return Err(Error::Usage(format!(
            "components have {} rows but the data has {}",
            truth.components().nrows(),
            y.nrows()
        )));
    }
    let gains = truth.wiener_gains(y.noise_scale());
    let out = project(y.values(), truth.components(), &gains);
    DataMatrix::new(out, y.noise_scale())
}

/// `Σ_k w_k·b_k·(b_kᵀ Y)` for basis columns `b_k`.
fn project(y: MatRef<'_, f64>, basis: MatRef<'_, f64>, weights: &[f64]) -> Mat<f64> {
    let r = weights.len();
    let basis = basis.subcols(0, r);
    let weighted = Mat::from_fn(basis.nrows(), r, |i, k| weights[k] * basis[(i, k)]);
    let coords = basis.transpose() * y;
    &weighted * &coords
}

/// Linear predictor `Σ_k (q_k/σ_k)·⟨Y_j, û_k⟩·û_k` built from `Y`'s own top
/// singular pairs.
///
/// Because `û_kᵀ Y = σ_k v̂_kᵀ`, this reproduces the shrinkage estimate
/// `Σ q_k û_k v̂_kᵀ` exactly.
pub fn empirical_linear_predictor(y: &DataMatrix, q: &[f64]) -> Result<DataMatrix> {
    let svd = thin_svd(y)?;
    if q.len() > svd.rank_capacity() {
        return Err(Error::Usage(format!(
            "{} shrunken values for a matrix with {} components",
            q.len(),
            svd.rank_capacity()
        )));
    }
    let out = linear_predictor_with_basis(
        y.values(),
        q,
        &svd.singular_values[..q.len()],
        svd.left_vectors.as_ref(),
    )?;
    DataMatrix::new(out, y.noise_scale())
}

/// Linear predictor `Σ_k (q_k/σ_k)·⟨Y_j, b_k⟩·b_k` for an arbitrary
/// orthonormal basis, e.g. the population components.
pub fn linear_predictor_with_basis(
    y: MatRef<'_, f64>,
    q: &[f64],
    sigma: &[f64],
    basis: MatRef<'_, f64>,
) -> Result<Mat<f64>> {
    if q.len() != sigma.len() || q.len() > basis.ncols() || basis.nrows() != y.nrows() {
        return Err(Error::Usage(format!(
            "inconsistent predictor inputs: {} q, {} sigma, basis {}x{}, data {} rows",
            q.len(),
            sigma.len(),
            basis.nrows(),
            basis.ncols(),
            y.nrows()
        )));
    }
    if let Some(k) = sigma.iter().position(|&s| s == 0.0) {
        return Err(Error::DegenerateSpectrum(format!(
            "singular value {k} is zero"
        )));
    }
    let weights: Vec<f64> = q.iter().zip(sigma).map(|(q, s)| q / s).collect();
    Ok(project(y, basis, &weights))
}

/// `‖A − B‖_op`.
pub fn operator_norm_error(a: &DataMatrix, b: &DataMatrix) -> Result<f64> {
    if (a.nrows(), a.ncols()) != (b.nrows(), b.ncols()) {
        return Err(Error::Usage(format!(
            "shape mismatch: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let diff = a.values() - b.values();
    operator_norm(diff.as_ref())
}

/// Top singular value of `A − B` by a full SVD; kept as a cross-check for
/// [`operator_norm_error`].
pub fn operator_norm_error_via_svd(a: &DataMatrix, b: &DataMatrix) -> Result<f64> {
    if (a.nrows(), a.ncols()) != (b.nrows(), b.ncols()) {
        return Err(Error::Usage("shape mismatch".into()));
    }
    let diff = a.values() - b.values();
    Ok(svd_of(diff.as_ref())?
        .singular_values
        .first()
        .copied()
        .unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_norm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(p: usize, n: usize, sd: f64, seed: u64) -> Mat<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Mat::from_fn(p, n, |_, _| {
            sd * Distribution::<f64>::sample(&StandardNormal, &mut rng)
        })
    }

    /// Rank-one signal `t·e_1·f_1ᵀ` (canonical basis) plus N(0, 1/n) noise.
    fn spiked(p: usize, n: usize, t: f64, seed: u64) -> (Mat<f64>, Mat<f64>) {
        let mut x = Mat::<f64>::zeros(p, n);
        x[(0, 0)] = t;
        let y = &x + gaussian(p, n, 1.0 / (n as f64).sqrt(), seed);
        (x, y)
    }

    fn max_abs_diff(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
        let mut m = 0.0f64;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                m = m.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
        m
    }

    #[test]
    fn detect_rank_examples() {
        let sv = [3.0, 1.9, 1.0, 0.5];
        assert_eq!(detect_rank(&sv, 4, 4, 1.0, 0.0).unwrap(), 1);
        // Doubling both the data and the noise scale leaves the rank alone.
        let doubled: Vec<f64> = sv.iter().map(|s| 2.0 * s).collect();
        assert_eq!(detect_rank(&doubled, 4, 4, 2.0, 0.0).unwrap(), 1);
        assert_eq!(detect_rank(&sv, 4, 4, 2.0, 0.0).unwrap(), 0);
        assert_eq!(detect_rank(&[2.03], 4, 4, 1.0, 0.02).unwrap(), 0);
        assert_eq!(detect_rank(&[2.05], 4, 4, 1.0, 0.02).unwrap(), 1);
        assert!(detect_rank(&sv, 4, 4, 1.0, -0.1).is_err());
        assert!(detect_rank(&sv, 4, 4, 0.0, 0.0).is_err());
    }

    #[test]
    fn pure_noise_is_rank_zero_in_most_seeds() {
        let (p, n) = (200, 200);
        let zero_rank = (0..50)
            .filter(|&seed| {
                let y = gaussian(p, n, 1.0 / (n as f64).sqrt(), 1000 + seed);
                let sv = svd_of(y.as_ref()).unwrap().singular_values;
                detect_rank(&sv, p, n, 1.0, DEFAULT_DETECTION_TOLERANCE).unwrap() == 0
            })
            .count();
        assert!(zero_rank >= 45, "rank 0 in only {zero_rank}/50 seeds");
    }

    #[test]
    fn below_edge_gives_zero_estimate() {
        let y = DataMatrix::from_mat(gaussian(30, 60, 1.0 / 60f64.sqrt(), 5)).unwrap();
        let (xhat, report) =
            denoise(&y, &ShrinkerKind::Optimal, DEFAULT_DETECTION_TOLERANCE).unwrap();
        assert_eq!(report.detected_rank, 0);
        assert!(report.per_component.is_empty());
        assert_eq!(report.predicted_loss, 0.0);
        assert_eq!(frobenius_norm(xhat.values()), 0.0);
    }

    #[test]
    fn optimal_never_amplifies_and_matches_oracle_on_square() {
        let (_, y) = spiked(120, 120, 3.0, 9);
        let y = DataMatrix::from_mat(y).unwrap();
        let (opt, r_opt) = denoise(&y, &ShrinkerKind::Optimal, 0.02).unwrap();
        let (orc, r_orc) = denoise(&y, &ShrinkerKind::OracleTruth, 0.02).unwrap();
        assert_eq!(r_opt.detected_rank, 1);
        for c in &r_opt.per_component {
            assert!(c.q_applied <= c.sigma_observed);
            assert!(c.q_applied >= 0.0);
        }
        assert_eq!(r_opt.q_values(), r_orc.q_values());
        assert!(max_abs_diff(opt.values(), orc.values()) <= 1e-10);
    }

    #[test]
    fn shrinker_kinds_apply_their_rules() {
        let (_, y) = spiked(60, 240, 2.0, 11);
        let y = DataMatrix::from_mat(y).unwrap();
        let svd = thin_svd(&y).unwrap();
        let sigma = svd.singular_values[0];
        let gamma = AspectRatio::from_shape(60, 240).unwrap();
        let q = |k: &ShrinkerKind| {
            shrink_factors(&svd, (60, 240), 1.0, k, 2)
                .unwrap()
                .q_values()
        };

        let opt = q(&ShrinkerKind::Optimal);
        assert_eq!(opt[0], optimal_q_from_sigma(sigma, gamma).unwrap());
        assert_eq!(opt[1], 0.0, "second component is noise");
        let orc = q(&ShrinkerKind::OracleTruth);
        assert_eq!(
            orc[0],
            crate::asymptotics::invert_sigma(sigma, gamma).unwrap()
        );
        assert!(opt[0] < orc[0], "gamma < 1 shrinks below t");
        assert_eq!(
            q(&ShrinkerKind::NoShrink),
            svd.singular_values[..2].to_vec()
        );
        assert_eq!(q(&ShrinkerKind::HardThreshold), vec![sigma, 0.0]);
        assert_eq!(q(&ShrinkerKind::Custom(vec![0.5, 0.25])), vec![0.5, 0.25]);

        assert!(matches!(
            shrink_factors(&svd, (60, 240), 1.0, &ShrinkerKind::Custom(vec![1.0]), 2),
            Err(Error::Usage(_))
        ));
        assert!(shrink_factors(
            &svd,
            (60, 240),
            1.0,
            &ShrinkerKind::Custom(vec![1.0, -1.0]),
            2
        )
        .is_err());
        assert!(shrink_factors(&svd, (60, 240), 1.0, &ShrinkerKind::Optimal, 61).is_err());
    }

    #[test]
    fn custom_length_checked_in_denoise() {
        let (_, y) = spiked(80, 80, 3.0, 2);
        let y = DataMatrix::from_mat(y).unwrap();
        let err = denoise(&y, &ShrinkerKind::Custom(vec![1.0, 2.0]), 0.02).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
        let (xhat, report) = denoise(&y, &ShrinkerKind::Custom(vec![1.5]), 0.02).unwrap();
        assert_eq!(report.q_values(), vec![1.5]);
        let top = crate::linalg::operator_norm(xhat.values()).unwrap();
        assert!((top - 1.5).abs() < 1e-12);
    }

    #[test]
    fn equivariant_under_scaling() {
        let (_, y) = spiked(50, 100, 2.5, 21);
        let y = DataMatrix::from_mat(y).unwrap();
        let (base, _) = denoise(&y, &ShrinkerKind::Optimal, 0.02).unwrap();
        for scale in [0.5, 3.0, 40.0] {
            let ys = y.scaled(scale).unwrap();
            let (xs, report) = denoise(&ys, &ShrinkerKind::Optimal, 0.02).unwrap();
            assert_eq!(report.noise_scale, scale);
            let expected = base.scaled(scale).unwrap();
            assert!(max_abs_diff(xs.values(), expected.values()) <= 1e-8 * scale);
        }
    }

    #[test]
    fn loss_is_invariant_under_row_rotation() {
        let (p, n) = (40, 90);
        let (x, y) = spiked(p, n, 2.0, 31);
        let q = svd_of(gaussian(p, p, 1.0, 77).as_ref())
            .unwrap()
            .left_vectors;
        let rot_x = DataMatrix::from_mat(&q * &x).unwrap();
        let rot_y = DataMatrix::from_mat(&q * &y).unwrap();
        let x = DataMatrix::from_mat(x).unwrap();
        let y = DataMatrix::from_mat(y).unwrap();
        let (xh, _) = denoise(&y, &ShrinkerKind::Optimal, 0.02).unwrap();
        let (xh_rot, _) = denoise(&rot_y, &ShrinkerKind::Optimal, 0.02).unwrap();
        let a = operator_norm_error(&xh, &x).unwrap();
        let b = operator_norm_error(&xh_rot, &rot_x).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn predicted_loss_uses_plug_in_block() {
        let (_, y) = spiked(100, 100, 2.0, 41);
        let y = DataMatrix::from_mat(y).unwrap();
        let (_, report) = denoise(&y, &ShrinkerKind::Optimal, 0.02).unwrap();
        let c = report.per_component[0];
        let block = BlockParams::new(c.t_hat, c.c_hat, c.c_tilde_hat).unwrap();
        assert_eq!(report.detected_rank, 1, "{report:?}");
        assert!(
            (report.predicted_loss - crate::shrinker::optimal_loss(&block)).abs() < 1e-10,
            "{report:?}"
        );
        assert!((report.predicted_loss - 1.0).abs() < 0.2);
    }

    #[test]
    fn operator_norm_error_examples() {
        let a = DataMatrix::from_mat(gaussian(20, 30, 1.0, 3)).unwrap();
        assert_eq!(operator_norm_error(&a, &a).unwrap(), 0.0);
        let d = DataMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]], 1.0).unwrap();
        let z = DataMatrix::zeros(2, 2, 1.0).unwrap();
        assert!((operator_norm_error(&d, &z).unwrap() - 2.0).abs() < 1e-14);
        let b = DataMatrix::from_mat(gaussian(20, 30, 1.0, 4)).unwrap();
        let fast = operator_norm_error(&a, &b).unwrap();
        let full = operator_norm_error_via_svd(&a, &b).unwrap();
        assert!((fast - full).abs() <= 1e-8 * full);
        assert!(matches!(operator_norm_error(&a, &z), Err(Error::Usage(_))));
    }

    #[test]
    fn ground_truth_validation() {
        let e = Mat::from_fn(4, 2, |i, j| if i == j { 1.0 } else { 0.0 });
        assert!(GroundTruthFactors::new(e.clone(), vec![2.0, 1.0]).is_ok());
        assert!(GroundTruthFactors::new(e.clone(), vec![1.0, 2.0]).is_err());
        assert!(GroundTruthFactors::new(e.clone(), vec![1.0, 1.0]).is_err());
        assert!(GroundTruthFactors::new(e.clone(), vec![2.0]).is_err());
        let skew = Mat::from_fn(4, 2, |i, _| if i == 0 { 1.0 } else { 0.0 });
        assert!(GroundTruthFactors::new(skew, vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn blp_gain_examples() {
        let e = Mat::from_fn(3, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let truth = GroundTruthFactors::new(e.clone(), vec![1.0]).unwrap();
        assert_eq!(truth.wiener_gains(1.0), vec![0.5]);
        let strong = GroundTruthFactors::new(e.clone(), vec![1e6]).unwrap();
        assert!((strong.wiener_gains(1.0)[0] - 1.0).abs() < 1e-11);

        let y =
            DataMatrix::from_rows(&[vec![2.0, 4.0], vec![1.0, 1.0], vec![3.0, 0.0]], 1.0).unwrap();
        let out = blp_predict(&y, &truth).unwrap();
        assert_eq!(
            out.to_rows(),
            vec![vec![1.0, 2.0], vec![0.0, 0.0], vec![0.0, 0.0]]
        );

        let wrong = DataMatrix::zeros(5, 2, 1.0).unwrap();
        assert!(matches!(blp_predict(&wrong, &truth), Err(Error::Usage(_))));
    }

    #[test]
    fn blp_column_mse_matches_wiener_error() {
        // Column model X_j = t z_j u (unscaled units), noise N(0, I_p).
        let (p, n, t) = (100, 4000, 1.1);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let u = Mat::from_fn(p, 1, |i, _| if i == 3 { 1.0 } else { 0.0 });
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x = Mat::from_fn(p, n, |i, j| t * z[j] * u[(i, 0)]);
        let y = &x + gaussian(p, n, 1.0, 18);
        let truth = GroundTruthFactors::new(u, vec![t]).unwrap();
        let est = blp_predict(&DataMatrix::from_mat(y).unwrap(), &truth).unwrap();
        let err = est.values() - &x;
        let mse = frobenius_norm(err.as_ref()).powi(2) / n as f64;
        let expected = t * t / (t * t + 1.0);
        assert!(
            (mse - expected).abs() < 0.05 * expected,
            "mse {mse} vs {expected}"
        );
    }

    #[test]
    fn empirical_predictor_examples() {
        let (_, y) = spiked(30, 70, 3.0, 51);
        let y = DataMatrix::from_mat(y).unwrap();
        let svd = thin_svd(&y).unwrap();
        let sv = svd.singular_values[..2].to_vec();
        let trunc = empirical_linear_predictor(&y, &sv).unwrap();
        assert!(max_abs_diff(trunc.values(), svd.truncated(2).as_ref()) < 1e-10);

        let zero = empirical_linear_predictor(&y, &[0.0, 0.0]).unwrap();
        assert_eq!(frobenius_norm(zero.values()), 0.0);

        // Identical to the shrinkage estimate built from the same pairs.
        let q = [1.7, 0.2];
        let pred = empirical_linear_predictor(&y, &q).unwrap();
        let shrunk = reconstruct(svd.left_vectors.as_ref(), &q, svd.right_vectors.as_ref());
        assert!(max_abs_diff(pred.values(), shrunk.as_ref()) < 1e-10);

        assert!(empirical_linear_predictor(&y, &vec![1.0; 31]).is_err());
    }

    #[test]
    fn zero_singular_value_is_degenerate() {
        let y = DataMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]], 1.0).unwrap();
        let err = empirical_linear_predictor(&y, &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::DegenerateSpectrum(_)));
    }
}
