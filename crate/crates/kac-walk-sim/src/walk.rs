//! Event-driven simulation of the Kac walk.
//!
//! Pairs collide at rate `(2/(N−1)) (1 + v_i² + v_j²)^γ` with a uniform
//! rotation angle, so the total rate is `N` at `γ = 0`. For `γ > 0` the
//! events are generated by thinning a dominating process.

use std::f64::consts::PI;
use std::time::Instant;

use density_core::GridDensity;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::WalkError;
use crate::state::{rotate_unchecked, sample_chaotic_initial, ParticleState};

/// Below this acceptance fraction the uniform-pair proposal is abandoned
/// for particle-weighted proposals.
const MIN_ACCEPTANCE: f64 = 0.01;
const ACCEPTANCE_WINDOW: u64 = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub n: usize,
    pub gamma: f64,
    pub t_end: f64,
    pub seed: u64,
    /// Observable times; `0` and `t_end` are always included.
    pub sample_times: Vec<f64>,
    pub bins: usize,
    /// Histogram range `[−range, range]`.
    pub range: f64,
    /// Rescale to energy `N` every this many events; `0` never.
    pub renormalize_every: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            n: 100,
            gamma: 0.0,
            t_end: 1.0,
            seed: 0,
            sample_times: Vec::new(),
            bins: 64,
            range: 5.0,
            renormalize_every: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), WalkError> {
        let bad = |m: String| Err(WalkError::InvalidConfig(m));
        if self.n < 2 {
            return bad(format!("need N >= 2, got {}", self.n));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.bins < 2 {
            return bad(format!("need at least 2 bins, got {}", self.bins));
        }
        if !(self.range > 0.0) {
            return bad(format!("histogram range must be positive, got {}", self.range));
        }
        if self.sample_times.iter().any(|t| !(*t >= 0.0 && *t <= self.t_end)) {
            return bad("sample times must lie in [0, t_end]".into());
        }
        Ok(())
    }

    /// Sorted, deduplicated sample times including `0` and `t_end`.
    pub fn schedule(&self) -> Vec<f64> {
        let mut s = self.sample_times.clone();
        s.push(0.0);
        s.push(self.t_end);
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.dedup();
        s
    }
}

/// Fixed-bin histogram of every coordinate, with overflow counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    pub fn new(bins: usize, range: f64) -> Self {
        Histogram { lo: -range, hi: range, counts: vec![0; bins], below: 0, above: 0 }
    }

    pub fn add(&mut self, x: f64) {
        let b = self.counts.len();
        let k = ((x - self.lo) / (self.hi - self.lo) * b as f64).floor();
        if k < 0.0 {
            self.below += 1;
        } else if k >= b as f64 {
            self.above += 1;
        } else {
            self.counts[k as usize] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.below + self.above
    }

    pub fn edges(&self, k: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + k as f64 * w, self.lo + (k + 1) as f64 * w)
    }

    /// Bin masses followed by the two overflow masses.
    pub fn masses(&self) -> Vec<f64> {
        let t = self.total().max(1) as f64;
        self.counts.iter().chain([&self.below, &self.above]).map(|&c| c as f64 / t).collect()
    }

    pub fn same_bins(&self, other: &Histogram) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.counts.len() == other.counts.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkSample {
    pub t: f64,
    pub m2: f64,
    pub m4: f64,
    pub m6: f64,
    pub momentum: f64,
    pub events: u64,
    pub histogram: Histogram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub config: WalkConfig,
    /// Stream index within an ensemble.
    pub stream: u64,
    pub samples: Vec<WalkSample>,
    pub events: u64,
    pub proposals: u64,
    /// Set once the sampler fell back to weighted proposals.
    pub weighted_fallback: bool,
    pub final_state: ParticleState,
    /// Not part of the reproducible output.
    #[serde(default)]
    pub wall_clock_s: f64,
}

impl TrajectoryRecord {
    /// Everything except the wall clock.
    pub fn same_outcome(&self, other: &TrajectoryRecord) -> bool {
        self.config == other.config
            && self.stream == other.stream
            && self.samples == other.samples
            && self.events == other.events
            && self.proposals == other.proposals
            && self.final_state == other.final_state
    }
}

/// ChaCha20 stream `stream` of `seed`; ensemble members use distinct streams.
pub fn walk_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One accepted collision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    /// Waiting time since the previous accepted event.
    pub dt: f64,
    pub i: usize,
    pub j: usize,
    pub theta: f64,
    /// Proposals drawn, including the accepted one.
    pub proposals: u64,
}

/// Thinning sampler state: a bound `B ≥ max v_i²` and, once the uniform
/// proposal acceptance collapses, per-particle bounds
/// `u_i = (1 + v_i² + B)^γ ≥ (1 + v_i² + v_j²)^γ`.
#[derive(Clone, Debug)]
pub struct EventSampler {
    gamma: f64,
    bound: f64,
    since_refresh: usize,
    window_props: u64,
    window_acc: u64,
    weighted: Option<Vec<f64>>,
    weighted_sum: f64,
}

impl EventSampler {
    pub fn new(state: &ParticleState, gamma: f64) -> Self {
        let mut s = EventSampler {
            gamma,
            bound: 0.0,
            since_refresh: 0,
            window_props: 0,
            window_acc: 0,
            weighted: None,
            weighted_sum: 0.0,
        };
        s.refresh(state);
        s
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted.is_some()
    }

    /// Start in weighted mode (used by tests of the fallback path).
    pub fn force_weighted(&mut self, state: &ParticleState) {
        self.weighted = Some(Vec::new());
        self.refresh(state);
    }

    fn refresh(&mut self, state: &ParticleState) {
        self.bound = state.velocities.iter().map(|x| x * x).fold(0.0, f64::max);
        self.since_refresh = 0;
        if let Some(u) = self.weighted.as_mut() {
            let (g, b) = (self.gamma, self.bound);
            u.clear();
            u.extend(state.velocities.iter().map(|x| (1.0 + x * x + b).powf(g)));
            self.weighted_sum = u.iter().sum();
        }
    }

    fn after_collision(&mut self, state: &ParticleState, i: usize, j: usize) {
        let (x, y) = (state.velocities[i].powi(2), state.velocities[j].powi(2));
        self.since_refresh += 1;
        if x > self.bound || y > self.bound || self.since_refresh >= state.n() {
            self.refresh(state);
        } else if let Some(u) = self.weighted.as_mut() {
            let (g, b) = (self.gamma, self.bound);
            let (ui, uj) = ((1.0 + x + b).powf(g), (1.0 + y + b).powf(g));
            self.weighted_sum += ui - u[i] + uj - u[j];
            u[i] = ui;
            u[j] = uj;
        }
    }

    /// Draws and applies the next accepted event.
    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut ParticleState, rng: &mut R) -> Event {
        let ev = self.next_event(state, rng);
        self.apply(state, &ev);
        ev
    }

    pub fn apply(&mut self, state: &mut ParticleState, ev: &Event) {
        rotate_unchecked(state, ev.i, ev.j, ev.theta);
        self.after_collision(state, ev.i, ev.j);
    }

    /// Draws the next accepted event without applying it.
    pub fn next_event<R: Rng + ?Sized>(&mut self, state: &ParticleState, rng: &mut R) -> Event {
        let n = state.n();
        let nf = n as f64;
        let mut dt = 0.0;
        let mut proposals = 0u64;
        loop {
            proposals += 1;
            let (i, j, accept) = if self.gamma == 0.0 {
                let (i, j) = uniform_pair(n, rng);
                dt += exp1(rng) / nf;
                (i, j, true)
            } else if let Some(u) = &self.weighted {
                // each unordered pair's rate split over its two orderings,
                // (i, j) dominated by u_i/(N−1): total Σ_i u_i
                dt += exp1(rng) / self.weighted_sum;
                let mut target = rng.gen::<f64>() * self.weighted_sum;
                let mut i = n - 1;
                for (k, w) in u.iter().enumerate() {
                    if target < *w {
                        i = k;
                        break;
                    }
                    target -= w;
                }
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let r = (1.0 + state.velocities[i].powi(2) + state.velocities[j].powi(2)).powf(self.gamma);
                (i, j, rng.gen::<f64>() * u[i] < r)
            } else {
                let cap = (1.0 + 2.0 * self.bound).powf(self.gamma);
                dt += exp1(rng) / (nf * cap);
                let (i, j) = uniform_pair(n, rng);
                let r = (1.0 + state.velocities[i].powi(2) + state.velocities[j].powi(2)).powf(self.gamma);
                (i, j, rng.gen::<f64>() * cap < r)
            };
            self.window_props += 1;
            if accept {
                self.window_acc += 1;
            }
            if self.weighted.is_none() && self.gamma > 0.0 && self.window_props >= ACCEPTANCE_WINDOW {
                if (self.window_acc as f64) < MIN_ACCEPTANCE * self.window_props as f64 {
                    self.force_weighted(state);
                }
                self.window_props = 0;
                self.window_acc = 0;
            }
            if accept {
                let theta = rng.gen_range(-PI..PI);
                return Event { dt, i, j, theta, proposals };
            }
        }
    }
}

#[inline]
fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln()
}

#[inline]
fn uniform_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// One event of the walk from a fresh sampler. Long runs should keep an
/// [`EventSampler`] instead.
pub fn step_gillespie<R: Rng + ?Sized>(state: &mut ParticleState, gamma: f64, rng: &mut R) -> Event {
    EventSampler::new(state, gamma).step(state, rng)
}

fn observe(state: &ParticleState, t: f64, events: u64, bins: usize, range: f64) -> WalkSample {
    let mut histogram = Histogram::new(bins, range);
    state.velocities.iter().for_each(|&x| histogram.add(x));
    WalkSample { t, m2: state.moment(2), m4: state.moment(4), m6: state.moment(6), momentum: state.momentum(), events, histogram }
}

/// Simulates from an explicit initial state.
pub fn run_from_state<R: Rng + ?Sized>(config: &WalkConfig, mut state: ParticleState, stream: u64, rng: &mut R) -> Result<TrajectoryRecord, WalkError> {
    config.validate()?;
    if state.n() != config.n {
        return Err(WalkError::InvalidConfig(format!("state has {} particles, config says {}", state.n(), config.n)));
    }
    let clock = Instant::now();
    let schedule = config.schedule();
    let mut sampler = EventSampler::new(&state, config.gamma);
    let (mut t, mut events, mut proposals) = (0.0, 0u64, 0u64);
    let mut samples = Vec::with_capacity(schedule.len());
    let mut next = 0;
    let mut fallback = false;
    while next < schedule.len() {
        let ev = sampler.next_event(&state, rng);
        // the state is constant until the event fires
        while next < schedule.len() && schedule[next] < t + ev.dt {
            samples.push(observe(&state, schedule[next], events, config.bins, config.range));
            next += 1;
        }
        if next == schedule.len() {
            break;
        }
        sampler.apply(&mut state, &ev);
        fallback |= sampler.is_weighted();
        t += ev.dt;
        events += 1;
        proposals += ev.proposals;
        if config.renormalize_every > 0 && events % config.renormalize_every == 0 {
            state.renormalize();
        }
    }
    Ok(TrajectoryRecord {
        config: config.clone(),
        stream,
        samples,
        events,
        proposals,
        weighted_fallback: fallback,
        final_state: state,
        wall_clock_s: clock.elapsed().as_secs_f64(),
    })
}

/// Chaotic initial data from `f0`, then the walk; stream 0 of the seed.
pub fn run_walk(config: &WalkConfig, f0: &GridDensity) -> Result<TrajectoryRecord, WalkError> {
    run_stream(config, f0, 0)
}

pub fn run_stream(config: &WalkConfig, f0: &GridDensity, stream: u64) -> Result<TrajectoryRecord, WalkError> {
    config.validate()?;
    let mut rng = walk_rng(config.seed, stream);
    let state = sample_chaotic_initial(f0, config.n, &mut rng)?;
    run_from_state(config, state, stream, &mut rng)
}

/// `members` independent trajectories on streams `0..members`, in stream
/// order regardless of thread count.
pub fn run_ensemble(config: &WalkConfig, f0: &GridDensity, members: usize) -> Result<Vec<TrajectoryRecord>, WalkError> {
    (0..members as u64).into_par_iter().map(|s| run_stream(config, f0, s)).collect()
}
