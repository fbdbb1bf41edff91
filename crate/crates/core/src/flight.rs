//! Trajectories of the random flights and reproducible batches.
//!
//! A flight starts at the origin, moves at speed `c` along a uniform direction
//! and switches to a fresh uniform direction at each change.  Only the final
//! position at the horizon `t` is kept.
//!
//! * `X`: `k` drawn from the `First` count law, sojourns Dirichlet(`d - 1`).
//! * `Y`: `k` drawn from the `Second` count law, sojourns Dirichlet(`d/2 - 1`).
//! * `U3`: three dimensions, homogeneous Poisson events of rate `lambda`, the
//!   direction changes at the 2nd, 4th, ... event only.
//!
//! Every flight of a batch owns a random stream, `ChaCha8` seeded with the batch
//! seed and switched to stream number `index`, so batches do not depend on how
//! the work is split.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // needed when std is absent
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::counts::{CountDistribution, CountFamily};
use crate::sampling::{fill_direction, fill_times, DirichletFamily};
use crate::series::SeriesControl;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Model {
    X,
    Y,
    U3,
}

impl Model {
    /// Count family of the number of direction changes (`HomogeneousPoisson`
    /// for `U3`, where it counts events rather than changes).
    pub fn count_family(self) -> CountFamily {
        match self {
            Model::X => CountFamily::First,
            Model::Y => CountFamily::Second,
            Model::U3 => CountFamily::HomogeneousPoisson,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::X => "x",
            Model::Y => "y",
            Model::U3 => "u3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FlightParams {
    model: Model,
    d: u32,
    c: f64,
    lambda: f64,
    t: f64,
}

fn positive(x: f64, what: &'static str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(what))
    }
}

impl FlightParams {
    pub fn new(model: Model, d: u32, c: f64, lambda: f64, t: f64) -> Result<Self> {
        match model {
            Model::X if d < 2 => return Err(Error::InvalidModel("First family requires dim ≥ 2")),
            Model::Y if d < 3 => return Err(Error::InvalidModel("Second family requires dim ≥ 3")),
            Model::U3 if d != 3 => return Err(Error::InvalidModel("the even-Poisson motion lives in dim 3")),
            _ => {}
        }
        positive(c, "speed c must be positive and finite")?;
        positive(lambda, "rate lambda must be positive and finite")?;
        positive(t, "time t must be positive and finite")?;
        Ok(Self { model, d, c, lambda, t })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn dim(&self) -> u32 {
        self.d
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Law of the number of direction changes (`X`, `Y`) or of Poisson events (`U3`).
    pub fn count_distribution(&self, ctl: &SeriesControl) -> Result<CountDistribution> {
        CountDistribution::new(self.model.count_family(), self.d, self.lambda, self.t, ctl)
    }

    /// Dirichlet law of the sojourns given `k` changes.  For `U3` this is the
    /// law given `2k + 1` events: each sojourn spans two uniform spacings, i.e.
    /// Dirichlet(2), the `First` law in three dimensions.
    pub fn sojourn_law(&self, k: usize) -> DirichletFamily {
        let (fam, d) = match self.model {
            Model::X => (CountFamily::First, self.d),
            Model::Y => (CountFamily::Second, self.d),
            Model::U3 => (CountFamily::First, 3),
        };
        DirichletFamily::new(fam, d, k, self.t).expect("validated parameters")
    }
}

/// `c * sum_j tau_j * theta_j` written into `out`.
fn walk<R: Rng + ?Sized>(c: f64, tau: &[f64], rng: &mut R, out: &mut [f64], dir: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for &s in tau {
        fill_direction(dir, rng);
        for (x, u) in out.iter_mut().zip(dir.iter()) {
            *x += c * s * u;
        }
    }
}

/// Final position after exactly `k` direction changes.
pub fn simulate_one<R: Rng + ?Sized>(params: &FlightParams, k: usize, rng: &mut R) -> Vec<f64> {
    let d = params.d as usize;
    let mut tau = Vec::with_capacity(k + 1);
    fill_times(&params.sojourn_law(k), rng, &mut tau);
    let mut out = vec![0.0; d];
    let mut dir = vec![0.0; d];
    walk(params.c, &tau, rng, &mut out, &mut dir);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct U3Sample {
    pub position: Vec<f64>,
    /// Number of Poisson events on `(0, t)`.
    pub events: usize,
}

impl U3Sample {
    /// The absolutely continuous stratum: an odd number of events.
    pub fn odd(&self) -> bool {
        self.events % 2 == 1
    }

    pub fn changes(&self) -> usize {
        self.events / 2
    }
}

fn u3_into<R: Rng + ?Sized>(params: &FlightParams, rng: &mut R, out: &mut [f64], scratch: &mut Scratch) -> usize {
    let lt = params.lambda * params.t;
    let n = Poisson::new(lt).expect("positive mean").sample(rng) as usize;
    let times = &mut scratch.events;
    times.clear();
    times.extend((0..n).map(|_| params.t * rng.random::<f64>()));
    times.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    let tau = &mut scratch.tau;
    tau.clear();
    let mut last = 0.0;
    for turn in times.iter().skip(1).step_by(2) {
        tau.push(turn - last);
        last = *turn;
    }
    tau.push(params.t - last);
    walk(params.c, tau, rng, out, &mut scratch.dir);
    n
}

/// One `U3` trajectory: Poisson number of events, uniform order statistics
/// for their epochs, turns at the even-numbered ones.
pub fn simulate_u3<R: Rng + ?Sized>(params: &FlightParams, rng: &mut R) -> Result<U3Sample> {
    if params.model != Model::U3 {
        return Err(Error::InvalidModel("simulate_u3 needs the U3 model"));
    }
    let mut scratch = Scratch::new(3);
    let mut position = vec![0.0; 3];
    let events = u3_into(params, rng, &mut position, &mut scratch);
    Ok(U3Sample { position, events })
}

/// Random stream of flight `index` in a batch seeded with `seed`.
pub fn flight_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Reusable buffers for one worker.
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    tau: Vec<f64>,
    dir: Vec<f64>,
    events: Vec<f64>,
}

impl Scratch {
    pub fn new(d: usize) -> Self {
        Self {
            tau: Vec::new(),
            dir: vec![0.0; d],
            events: Vec::new(),
        }
    }
}

/// Everything needed to simulate flight number `i` of a batch in isolation.
#[derive(Debug, Clone)]
pub struct BatchPlan {
    params: FlightParams,
    seed: u64,
    counts: Option<CountDistribution>,
}

/// What one flight reports besides its position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlightOutcome {
    pub k: usize,
    /// Poisson events, `U3` only.
    pub events: Option<usize>,
}

impl BatchPlan {
    pub fn new(params: FlightParams, seed: u64, ctl: &SeriesControl) -> Result<Self> {
        let counts = match params.model {
            Model::U3 => None,
            _ => Some(params.count_distribution(ctl)?),
        };
        Ok(Self { params, seed, counts })
    }

    pub fn params(&self) -> &FlightParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Simulates flight `index` into `row` (length `d`).
    pub fn run(&self, index: u64, row: &mut [f64], scratch: &mut Scratch) -> FlightOutcome {
        let mut rng = flight_rng(self.seed, index);
        match &self.counts {
            None => {
                let n = u3_into(&self.params, &mut rng, row, scratch);
                FlightOutcome {
                    k: n / 2,
                    events: Some(n),
                }
            }
            Some(dist) => {
                let k = dist.sample(&mut rng);
                fill_times(&self.params.sojourn_law(k), &mut rng, &mut scratch.tau);
                walk(self.params.c, &scratch.tau, &mut rng, row, &mut scratch.dir);
                FlightOutcome { k, events: None }
            }
        }
    }

    /// Simulates flights `start..start + ks.len()` into the given slices.
    pub fn run_range(&self, start: u64, rows: &mut [f64], ks: &mut [usize], events: Option<&mut [usize]>) {
        let d = self.params.d as usize;
        let mut scratch = Scratch::new(d);
        let mut events = events;
        for (i, (row, k)) in rows.chunks_exact_mut(d).zip(ks.iter_mut()).enumerate() {
            let out = self.run(start + i as u64, row, &mut scratch);
            *k = out.k;
            if let (Some(ev), Some(n)) = (events.as_deref_mut(), out.events) {
                ev[i] = n;
            }
        }
    }

    /// Empty batch of `n` rows ready to be filled.
    pub fn empty_batch(&self, n: usize) -> SampleBatch {
        SampleBatch {
            params: self.params,
            seed: self.seed,
            positions: vec![0.0; n * self.params.d as usize],
            k_values: vec![0; n],
            events: (self.params.model == Model::U3).then(|| vec![0; n]),
        }
    }
}

/// Final positions of `n` flights, row-major `n x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub params: FlightParams,
    pub seed: u64,
    pub positions: Vec<f64>,
    pub k_values: Vec<usize>,
    /// Number of Poisson events per flight (`U3` only).
    pub events: Option<Vec<usize>>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.k_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.params.d as usize
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.positions[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.dim())
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

/// Single-threaded batch; the parallel driver in the `randflight` crate
/// produces the same bits.
pub fn simulate_batch(params: &FlightParams, n: usize, seed: u64, ctl: &SeriesControl) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::InvalidParameter("batch size n must be at least 1"));
    }
    let plan = BatchPlan::new(*params, seed, ctl)?;
    let mut batch = plan.empty_batch(n);
    plan.run_range(0, &mut batch.positions, &mut batch.k_values, batch.events.as_deref_mut());
    Ok(batch)
}
