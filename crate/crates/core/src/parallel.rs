//! Independent work fanned out over a thread pool: batches of scenario runs
//! and Monte-Carlo area estimates.
//!
//! With the `parallel` feature (on by default) the work goes through rayon.
//! The `_sequential` variants always run on the calling thread. Both return
//! identical results for identical inputs, since every run owns its own
//! state and every Monte-Carlo chunk owns its own RNG stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{run, EngineError, RunOutput};
use crate::fire::FireState;
use crate::geometry::{GridSpec, Point};
use crate::scenario::Scenario;

/// Samples drawn per RNG stream.
pub const MC_CHUNK: u64 = 1 << 14;

macro_rules! if_parallel {
    ($par:expr, $seq:expr) => {{
        #[cfg(feature = "parallel")]
        {
            $par
        }
        #[cfg(not(feature = "parallel"))]
        {
            $seq
        }
    }};
}

pub fn run_batch(scenarios: &[Scenario]) -> Vec<Result<RunOutput, EngineError>> {
    if_parallel!(
        {
            use rayon::prelude::*;
            scenarios.par_iter().map(run).collect()
        },
        run_batch_sequential(scenarios)
    )
}

pub fn run_batch_sequential(scenarios: &[Scenario]) -> Vec<Result<RunOutput, EngineError>> {
    scenarios.iter().map(run).collect()
}

/// Sampling box: the fire's bounding square clipped to the area.
fn sample_box(f: &FireState, t: f64, spec: &GridSpec) -> Option<(Point, Point, f64)> {
    let r = f.radius(t);
    let c = f.event.ignition;
    let side = spec.side();
    let min = Point::new((c.x - r).max(0.0), (c.y - r).max(0.0));
    let max = Point::new((c.x + r).min(side), (c.y + r).min(side));
    (r > 0.0 && max.x > min.x && max.y > min.y).then_some((min, max, r))
}

fn chunk_hits(f: &FireState, min: Point, max: Point, r: f64, seed: u64, chunk: u64, n: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let c = f.event.ignition;
    let r2 = r * r;
    (0..n)
        .filter(|_| {
            let x = rng.random_range(min.x..max.x);
            let y = rng.random_range(min.y..max.y);
            let (dx, dy) = (x - c.x, y - c.y);
            dx * dx + dy * dy <= r2
        })
        .count() as u64
}

fn chunk_len(samples: u64, chunk: u64) -> u64 {
    (samples - chunk * MC_CHUNK).min(MC_CHUNK)
}

fn estimate(min: Point, max: Point, hits: u64, samples: u64) -> f64 {
    (max.x - min.x) * (max.y - min.y) * hits as f64 / samples as f64
}

/// Monte-Carlo estimate of the burned area at `t`. Cross-checks the exact
/// circle–rectangle formula.
pub fn burned_area_monte_carlo(f: &FireState, t: f64, spec: &GridSpec, samples: u64, seed: u64) -> f64 {
    let Some((min, max, r)) = sample_box(f, t, spec) else { return 0.0 };
    if samples == 0 {
        return 0.0;
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: u64 = if_parallel!(
        {
            use rayon::prelude::*;
            (0..chunks)
                .into_par_iter()
                .map(|c| chunk_hits(f, min, max, r, seed, c, chunk_len(samples, c)))
                .sum()
        },
        (0..chunks).map(|c| chunk_hits(f, min, max, r, seed, c, chunk_len(samples, c))).sum()
    );
    estimate(min, max, hits, samples)
}

pub fn burned_area_monte_carlo_sequential(
    f: &FireState,
    t: f64,
    spec: &GridSpec,
    samples: u64,
    seed: u64,
) -> f64 {
    let Some((min, max, r)) = sample_box(f, t, spec) else { return 0.0 };
    if samples == 0 {
        return 0.0;
    }
    let hits: u64 = (0..samples.div_ceil(MC_CHUNK))
        .map(|c| chunk_hits(f, min, max, r, seed, c, chunk_len(samples, c)))
        .sum();
    estimate(min, max, hits, samples)
}
