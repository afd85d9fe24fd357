//! Independent Monte Carlo replicates of the denoising pipeline.

use faer::Mat;

use super::model::{sample_spiked, SpikedModelConfig};
use super::rng::substream_seed;
use crate::denoiser::{detect_rank, shrink_factors};
use crate::error::Result;
use crate::linalg::{factored_norms, hcat, svd_of, SvdFactors};
use crate::parallel::map_indexed;
use crate::shrinker::ShrinkerKind;

/// How many leading components a replicate keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankRule {
    /// Count singular values above the bulk edge with this relative slack.
    Detect { tolerance: f64 },
    /// Keep exactly this many; sub-edge components get `q = 0` under the
    /// optimal and oracle-truth rules.
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub seed: u64,
    pub top_sigma: f64,
    /// `⟨û_k, u_k⟩²` for each population component.
    pub left_cosine_sq: Vec<f64>,
    pub retained_rank: usize,
    /// `‖X̂ − X‖_op` per requested shrinker.
    pub losses: Vec<f64>,
    /// Plug-in asymptotic loss per requested shrinker.
    pub predicted_losses: Vec<f64>,
}

/// Runs `replicates` independent draws of `model`; replicate `j` uses seed
/// `substream_seed(model.seed, j)`. Output is in replicate order.
pub fn run_replicates(
    model: &SpikedModelConfig,
    replicates: usize,
    kinds: &[ShrinkerKind],
    rank: RankRule,
) -> Result<Vec<ReplicateOutcome>> {
    model.validate()?;
    map_indexed(replicates, |j| {
        let seed = substream_seed(model.seed, j as u64);
        run_one(&model.clone().with_seed(seed), kinds, rank)
    })
}

fn run_one(
    model: &SpikedModelConfig,
    kinds: &[ShrinkerKind],
    rank: RankRule,
) -> Result<ReplicateOutcome> {
    let sample = sample_spiked(model)?;
    let (p, n) = (model.p, model.n);
    let svd = svd_of(sample.y.as_ref())?;
    let retained = match rank {
        RankRule::Detect { tolerance } => detect_rank(&svd.singular_values, p, n, 1.0, tolerance)?,
        RankRule::Fixed(r) => r.min(svd.rank_capacity()),
    };

    let left_cosine_sq = (0..model.rank())
        .map(|k| {
            let dot: f64 = (0..p)
                .map(|i| svd.left_vectors[(i, k)] * sample.left[(i, k)])
                .sum();
            dot * dot
        })
        .collect();

    let signal_left = sample.weighted_left();
    let mut losses = Vec::with_capacity(kinds.len());
    let mut predicted_losses = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let report = shrink_factors(&svd, (p, n), 1.0, kind, retained)?;
        losses.push(shrinkage_error(
            &svd,
            &report.q_values(),
            &signal_left,
            &sample.right,
        )?);
        predicted_losses.push(report.predicted_loss);
    }
    Ok(ReplicateOutcome {
        seed: model.seed,
        top_sigma: svd.singular_values.first().copied().unwrap_or(0.0),
        left_cosine_sq,
        retained_rank: retained,
        losses,
        predicted_losses,
    })
}

/// `‖Σ q_k û_k v̂_kᵀ − L·Rᵀ‖_op` from factors.
pub(crate) fn shrinkage_error(
    svd: &SvdFactors,
    q: &[f64],
    signal_left: &Mat<f64>,
    signal_right: &Mat<f64>,
) -> Result<f64> {
    let r = q.len();
    let est_left = Mat::from_fn(svd.left_vectors.nrows(), r, |i, k| {
        q[k] * svd.left_vectors[(i, k)]
    });
    let neg_signal = Mat::from_fn(signal_left.nrows(), signal_left.ncols(), |i, k| {
        -signal_left[(i, k)]
    });
    let left = hcat(&[est_left.as_ref(), neg_signal.as_ref()]);
    let right = hcat(&[svd.right_vectors.subcols(0, r), signal_right.as_ref()]);
    Ok(factored_norms(left.as_ref(), right.as_ref())?.operator)
}

/// Mean in index order.
pub fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}
