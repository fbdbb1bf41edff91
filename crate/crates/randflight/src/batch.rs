//! Parallel batch drivers.
//!
//! Flight `i` always draws from stream `i` of the batch seed, so the output
//! does not depend on how rows are split across threads.

use rayon::prelude::*;

use randflight_core::flight::{flight_rng, simulate_one, BatchPlan, FlightParams, SampleBatch};
use randflight_core::SeriesControl;

use crate::Result;

/// Rows handed to a worker at a time.
pub const CHUNK: usize = 4096;

/// Same bits as `randflight_core::flight::simulate_batch`, computed in parallel.
pub fn simulate_batch_par(params: &FlightParams, n: usize, seed: u64, ctl: &SeriesControl) -> Result<SampleBatch> {
    if n == 0 {
        return Err(crate::Error::Config("batch size n must be at least 1".into()));
    }
    let plan = BatchPlan::new(*params, seed, ctl)?;
    let mut batch = plan.empty_batch(n);
    let d = batch.dim();
    let pos = batch.positions.par_chunks_mut(CHUNK * d);
    let ks = batch.k_values.par_chunks_mut(CHUNK);
    match batch.events.as_mut() {
        Some(ev) => pos
            .zip(ks)
            .zip(ev.par_chunks_mut(CHUNK))
            .enumerate()
            .for_each(|(c, ((p, k), e))| plan.run_range((c * CHUNK) as u64, p, k, Some(e))),
        None => pos
            .zip(ks)
            .enumerate()
            .for_each(|(c, (p, k))| plan.run_range((c * CHUNK) as u64, p, k, None)),
    }
    Ok(batch)
}

/// Positions of `n` flights conditioned on `k` direction changes (for `U3`,
/// on `2k + 1` events), row-major `n x d`.
pub fn simulate_conditional_par(params: &FlightParams, k: usize, n: usize, seed: u64) -> Vec<f64> {
    let d = params.dim() as usize;
    let mut out = vec![0.0; n * d];
    out.par_chunks_mut(CHUNK * d).enumerate().for_each(|(c, rows)| {
        for (i, row) in rows.chunks_exact_mut(d).enumerate() {
            let mut rng = flight_rng(seed, (c * CHUNK + i) as u64);
            row.copy_from_slice(&simulate_one(params, k, &mut rng));
        }
    });
    out
}

/// Euclidean norms of the rows of a row-major matrix.
pub fn row_norms(positions: &[f64], d: usize) -> Vec<f64> {
    positions
        .par_chunks(d)
        .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect()
}
