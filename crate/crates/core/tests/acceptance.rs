//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opshrink::asymptotics::{invert_sigma, AspectRatio};
use opshrink::shrinker::{
    block_loss, brute_force_optimal_q, classical_limit_ratio, error_ratio, optimal_loss, optimal_q,
    optimal_q_from_sigma, BlockParams, ShrinkerKind,
};
use opshrink::sim::experiments::{run_experiment, ExperimentConfig};
use opshrink::sim::replicates::{mean, run_replicates, RankRule};
use opshrink::sim::table::write_curve_table;
use opshrink::sim::SpikedModelConfig;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_block(rng: &mut ChaCha8Rng) -> BlockParams {
    let t = rng.random_range(0.1..=10.0);
    loop {
        let c: f64 = rng.random_range(0.0..=1.0);
        let ct: f64 = rng.random_range(0.0..=1.0);
        if c.max(ct) > 0.01 {
            return BlockParams::new(t, c, ct).unwrap();
        }
    }
}

/// Largest singular value of `[a b; c d]`, written out independently of the
/// library routine.
fn sigma_max_2x2(m: [[f64; 2]; 2]) -> f64 {
    let [[a, b], [c, d]] = m;
    0.5 * (((a + d).powi(2) + (c - b).powi(2)).sqrt() + ((a - d).powi(2) + (b + c).powi(2)).sqrt())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_q, mut worst_loss) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let b = random_block(&mut rng);
        let (q_bf, min_bf) = brute_force_optimal_q(&b, b.t, 2000).unwrap();
        worst_q = worst_q.max((q_bf - optimal_q(&b)).abs() / b.t);
        worst_loss = worst_loss.max((min_bf - optimal_loss(&b).powi(2)).abs() / (b.t * b.t));
    }
    let elapsed = start.elapsed();
    outcome(
        worst_q <= 1e-3 && worst_loss <= 1e-6 && elapsed < Duration::from_secs(30),
        format!("max |dq|/t = {worst_q:.2e}, max |dloss|/t^2 = {worst_loss:.2e}, {elapsed:.1?}"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let b = random_block(&mut rng);
        let q = rng.random_range(-b.t..=3.0 * b.t);
        let explicit = sigma_max_2x2(b.error_block(q)).powi(2);
        let formula = block_loss(q, &b).unwrap();
        worst = worst.max((formula - explicit).abs() / explicit);
    }
    outcome(
        worst <= 1e-10,
        format!("max relative difference {worst:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let gamma = AspectRatio::new(1.0).unwrap();
    let mut worst = 0.0f64;
    for k in 1..=10_000 {
        let sigma = 2.0 + 48.0 * k as f64 / 10_000.0;
        let a = optimal_q_from_sigma(sigma, gamma).unwrap();
        let b = invert_sigma(sigma, gamma).unwrap();
        worst = worst.max((a - b).abs());
    }
    outcome(
        worst <= 1e-12,
        format!("max |q* - t| = {worst:.2e} on 10000 points"),
    )
}

fn criterion_4() -> Outcome {
    let mut monotone = true;
    let mut worst_limit = 0.0f64;
    for t in [0.5f64, 1.0, 2.0, 5.0] {
        let (lo, hi) = (1e-6, t.powi(4).min(1.0) - 1e-6);
        let ratios: Vec<f64> = (0..100)
            .map(|i| {
                let g = lo + (hi - lo) * i as f64 / 99.0;
                error_ratio(AspectRatio::new(g).unwrap(), t).unwrap()
            })
            .collect();
        monotone &= ratios.windows(2).all(|w| w[0] < w[1]);
        let near_zero = error_ratio(AspectRatio::new(1e-8).unwrap(), t).unwrap();
        worst_limit = worst_limit.max((near_zero - classical_limit_ratio(t).unwrap()).abs());
    }
    outcome(
        monotone && worst_limit <= 1e-3,
        format!("strictly increasing: {monotone}, max limit gap {worst_limit:.2e}"),
    )
}

/// Criteria 5 and 6 share one batch of replicates.
fn criteria_5_and_6() -> (Outcome, Outcome) {
    let start = Instant::now();
    let model = SpikedModelConfig::new(800, 800, vec![2.0], 5);
    let out = run_replicates(
        &model,
        50,
        &[ShrinkerKind::Optimal],
        RankRule::Detect { tolerance: 0.02 },
    )
    .unwrap();
    let elapsed = start.elapsed();
    let sigma = mean(out.iter().map(|o| o.top_sigma));
    let cos2 = mean(out.iter().map(|o| o.left_cosine_sq[0]));
    let loss = mean(out.iter().map(|o| o.losses[0]));
    let c5 = outcome(
        (sigma / 2.5 - 1.0).abs() <= 0.02
            && (cos2 - 0.75).abs() <= 0.05
            && elapsed < Duration::from_secs(120),
        format!("mean sigma {sigma:.5} (2.5), mean cos^2 {cos2:.5} (0.75), {elapsed:.1?}"),
    );
    let c6 = outcome(
        (loss - 1.0).abs() <= 0.1,
        format!("mean operator-norm loss {loss:.5} (1.0)"),
    );
    (c5, c6)
}

fn criterion_7() -> Outcome {
    let model = SpikedModelConfig::new(200, 800, vec![1.5], 7);
    let out = run_replicates(
        &model,
        100,
        &[ShrinkerKind::Optimal, ShrinkerKind::OracleTruth],
        RankRule::Detect { tolerance: 0.02 },
    )
    .unwrap();
    let wins = out.iter().filter(|o| o.losses[0] < o.losses[1]).count();
    let ratio = mean(out.iter().map(|o| o.losses[0] / o.losses[1]));
    let predicted = error_ratio(AspectRatio::new(0.25).unwrap(), 1.5).unwrap();
    outcome(
        wins >= 90 && (ratio - predicted).abs() <= 0.05,
        format!("optimal wins {wins}/100, mean ratio {ratio:.5} (predicted {predicted:.5})"),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let table = run_experiment(&ExperimentConfig::blp_convergence()).unwrap();
    let elapsed = start.elapsed();
    let blp = table.column("err_blp").unwrap();
    let gap = table.column("gap_optimal_blp").unwrap();
    let frac = table.column("frac_gd_worse").unwrap();
    let (lo, hi) = blp
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    let spread = (hi - lo) / lo;
    let shrink = gap[gap.len() - 1] / gap[0];
    let last = frac[frac.len() - 1];
    outcome(
        spread < 0.1 && shrink < 0.5 && last >= 0.95 && elapsed < Duration::from_secs(300),
        format!(
            "err_blp spread {:.2}%, gap(3200)/gap(100) {shrink:.3}, gd worse in {:.1}%, {elapsed:.1?}",
            100.0 * spread,
            100.0 * last
        ),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut curves = ExperimentConfig::shrinker_curves();
    curves.gamma = 0.3;
    let mut sweep = ExperimentConfig::ratio_sweep();
    sweep.replicates = 10;
    let mut blp = ExperimentConfig::blp_convergence();
    blp.replicates = 20;
    let mut identical = true;
    for cfg in [curves, sweep, blp] {
        let mut bytes = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{}-{run}.csv", cfg.experiment));
            write_curve_table(&run_experiment(&cfg).unwrap(), &path).unwrap();
            bytes.push(std::fs::read(&path).unwrap());
        }
        identical &= bytes[0] == bytes[1];
    }
    outcome(
        identical,
        "three experiments, two runs each, byte-compared".into(),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, Outcome)> = vec![
        (1, criterion_1()),
        (2, criterion_2()),
        (3, criterion_3()),
        (4, criterion_4()),
    ];
    let (c5, c6) = criteria_5_and_6();
    results.push((5, c5));
    results.push((6, c6));
    results.push((7, criterion_7()));
    results.push((8, criterion_8()));
    results.push((9, criterion_9()));

    let mut failed = 0;
    for (n, o) in &results {
        println!(
            "criterion {n}: {} - {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
