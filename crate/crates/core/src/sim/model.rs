//! Seeded spiked-model data.
//!
//! Two signal models are supported:
//!
//! * [`SignalModel::FixedSingularValues`]: `X = Σ t_k u_k v_kᵀ` with
//!   orthonormal `u_k`, `v_k`, so the `t_k` are exactly the singular values.
//! * [`SignalModel::IidColumns`]: column `j` of `X` is
//!   `Σ_k t_k z_{jk} u_k / √n` with iid unit-variance `z_{jk}`; `t_k` is the
//!   standard deviation along `u_k` and the singular values of `X` only
//!   approach `t_k` as `n` grows.
//!
//! In both, `Y = X + G` with `G` iid `N(0, 1/n)` (noise scale 1).

use faer::{Mat, MatRef};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::rng::substream_rng;
use crate::denoiser::GroundTruthFactors;
use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// Law of the factor scores `z_{jk}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorLaw {
    #[default]
    Gaussian,
    Rademacher,
}

impl FactorLaw {
    pub fn name(self) -> &'static str {
        match self {
            FactorLaw::Gaussian => "gaussian",
            FactorLaw::Rademacher => "rademacher",
        }
    }

    fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            FactorLaw::Gaussian => StandardNormal.sample(rng),
            FactorLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl std::str::FromStr for FactorLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(FactorLaw::Gaussian),
            "rademacher" => Ok(FactorLaw::Rademacher),
            other => Err(Error::Config(format!(
                "unknown factor law '{other}' (expected gaussian or rademacher)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignalModel {
    #[default]
    FixedSingularValues,
    IidColumns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikedModelConfig {
    pub p: usize,
    pub n: usize,
    /// Strictly decreasing, positive.
    pub strengths: Vec<f64>,
    pub factor_law: FactorLaw,
    pub signal_model: SignalModel,
    /// Use canonical basis vectors for `u_k` (and `v_k` in the fixed model)
    /// instead of Haar-random ones.
    pub deterministic_signal: bool,
    pub seed: u64,
}

impl SpikedModelConfig {
    pub fn new(p: usize, n: usize, strengths: Vec<f64>, seed: u64) -> Self {
        SpikedModelConfig {
            p,
            n,
            strengths,
            factor_law: FactorLaw::Gaussian,
            signal_model: SignalModel::FixedSingularValues,
            deterministic_signal: false,
            seed,
        }
    }

    pub fn with_signal_model(mut self, model: SignalModel) -> Self {
        self.signal_model = model;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn rank(&self) -> usize {
        self.strengths.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 || self.n < 2 {
            return Err(Error::Config(format!(
                "p and n must be at least 2, got {}x{}",
                self.p, self.n
            )));
        }
        if self.rank() > self.p.min(self.n) {
            return Err(Error::Config(format!(
                "rank {} exceeds min(p, n) = {}",
                self.rank(),
                self.p.min(self.n)
            )));
        }
        if self.strengths.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Config(
                "strengths must be positive and finite".into(),
            ));
        }
        if self.strengths.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Config(
                "strengths must be strictly decreasing".into(),
            ));
        }
        Ok(())
    }
}

/// One draw of the model, with the signal kept in factored form
/// `X = left·diag(strengths)·rightᵀ`.
#[derive(Debug, Clone)]
pub struct SpikedSample {
    /// `p × r`, orthonormal columns `u_k`.
    pub left: Mat<f64>,
    /// `n × r`: orthonormal `v_k`, or `z_k/√n` in the iid-column model.
    pub right: Mat<f64>,
    pub strengths: Vec<f64>,
    /// `p × n` observation.
    pub y: Mat<f64>,
}

impl SpikedSample {
    pub fn signal(&self) -> Mat<f64> {
        let r = self.strengths.len();
        let (p, n) = (self.left.nrows(), self.right.nrows());
        if r == 0 {
            return Mat::zeros(p, n);
        }
        let scaled = Mat::from_fn(p, r, |i, k| self.strengths[k] * self.left[(i, k)]);
        &scaled * self.right.transpose()
    }

    /// `left·diag(strengths)`, the left factor of `X`.
    pub fn weighted_left(&self) -> Mat<f64> {
        Mat::from_fn(self.left.nrows(), self.strengths.len(), |i, k| {
            self.strengths[k] * self.left[(i, k)]
        })
    }

    pub fn truth(&self) -> Result<GroundTruthFactors> {
        GroundTruthFactors::new(self.left.clone(), self.strengths.clone())
    }
}

/// Draws `(X, Y)` in factored form. Identical configs give bit-identical output.
pub fn sample_spiked(cfg: &SpikedModelConfig) -> Result<SpikedSample> {
    cfg.validate()?;
    let (p, n, r) = (cfg.p, cfg.n, cfg.rank());
    let mut rng = substream_rng(cfg.seed, 0);

    let left = if cfg.deterministic_signal {
        canonical(p, r)
    } else {
        haar_columns(&mut rng, p, r, FactorLaw::Gaussian)
    };
    let right = match cfg.signal_model {
        SignalModel::FixedSingularValues if cfg.deterministic_signal => canonical(n, r),
        SignalModel::FixedSingularValues => haar_columns(&mut rng, n, r, cfg.factor_law),
        SignalModel::IidColumns => {
            let scale = 1.0 / (n as f64).sqrt();
            let mut z = Mat::<f64>::zeros(n, r);
            for k in 0..r {
                for j in 0..n {
                    z[(j, k)] = scale * cfg.factor_law.sample(&mut rng);
                }
            }
            z
        }
    };

    let sd = 1.0 / (n as f64).sqrt();
    let mut y = Mat::<f64>::zeros(p, n);
    for j in 0..n {
        for i in 0..p {
            let g: f64 = StandardNormal.sample(&mut rng);
            y[(i, j)] = sd * g;
        }
    }
    let sample = SpikedSample {
        left,
        right,
        strengths: cfg.strengths.clone(),
        y,
    };
    if r > 0 {
        let x = sample.signal();
        let y = &sample.y + &x;
        return Ok(SpikedSample { y, ..sample });
    }
    Ok(sample)
}

/// Signal, observation and population components of one model draw.
pub fn generate_spiked(
    cfg: &SpikedModelConfig,
) -> Result<(DataMatrix, DataMatrix, GroundTruthFactors)> {
    let sample = sample_spiked(cfg)?;
    let truth = sample.truth()?;
    let x = DataMatrix::from_mat(sample.signal())?;
    let y = DataMatrix::from_mat(sample.y)?;
    Ok((x, y, truth))
}

fn canonical(dim: usize, r: usize) -> Mat<f64> {
    Mat::from_fn(dim, r, |i, k| if i == k { 1.0 } else { 0.0 })
}

/// Orthonormalized random columns; Haar-distributed for Gaussian draws.
fn haar_columns(rng: &mut ChaCha8Rng, dim: usize, r: usize, law: FactorLaw) -> Mat<f64> {
    if r == 0 {
        return Mat::zeros(dim, 0);
    }
    let mut raw = Mat::<f64>::zeros(dim, r);
    for k in 0..r {
        for i in 0..dim {
            raw[(i, k)] = law.sample(rng);
        }
    }
    orthonormalize(raw.as_ref())
}

/// Thin-QR `Q` with signs fixed so that `diag(R) ≥ 0`.
fn orthonormalize(m: MatRef<'_, f64>) -> Mat<f64> {
    let qr = m.qr();
    let mut q = qr.compute_thin_Q();
    let r = qr.thin_R();
    for k in 0..q.ncols() {
        if r[(k, k)] < 0.0 {
            for i in 0..q.nrows() {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    q
}
