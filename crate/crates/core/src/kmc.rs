//! Exact event-driven simulation of the strip process.
//!
//! Five event kinds act on a [`Configuration`]:
//!
//! | kind            | enabled when                      | rate      | effect          |
//! |-----------------|-----------------------------------|-----------|-----------------|
//! | vertical swap   | `(k,x)` and `(k+1,x)` differ      | `lambda`  | exchange values |
//! | horizontal flow | `(k,x) = V`, `(k,x+1) = hole`     | `lambda1` | exchange values |
//! | bottom flip     | `(0,x) = V`                       | `beta`    | `V -> 0`        |
//! | top flip        | `(S+1,x) = 0`                     | `beta`    | `0 -> V`        |
//! | perturbation    | `(k,x)` holds a particle          | `epsilon` | `0 <-> V`       |
//!
//! Swapping two equal values is the identity, so those vertical pairs are
//! left out of the event list; [`SimOptions::explicit_identity_swaps`]
//! puts them back for equivalence testing.
//!
//! The [`Simulator`] keeps one indexed set of enabled events per kind and
//! updates it locally after every event, so selection is O(1): a 5-way
//! categorical draw over kinds, then a uniform draw within the kind.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Configuration, LayerCounts, Params, Velocity};
use crate::rng::{self, SimRng};

/// Number of batches used for batch-means error bars.
pub const DEFAULT_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    VerticalSwap,
    HorizontalFlow,
    BottomFlip,
    TopFlip,
    Perturb,
}

impl EventKind {
    pub const ALL: [EventKind; 5] = [
        EventKind::VerticalSwap,
        EventKind::HorizontalFlow,
        EventKind::BottomFlip,
        EventKind::TopFlip,
        EventKind::Perturb,
    ];

    pub fn rate(self, params: &Params) -> f64 {
        match self {
            EventKind::VerticalSwap => params.lambda,
            EventKind::HorizontalFlow => params.lambda1,
            EventKind::BottomFlip | EventKind::TopFlip => params.beta,
            EventKind::Perturb => params.epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Event {
    /// Exchange `(k, x)` with `(k + 1, x)`, `k` in `0..=S`.
    VerticalSwap { k: usize, x: usize },
    /// Move the `V` at `(k, x)` into the hole at `(k, x + 1)`.
    HorizontalFlow { k: usize, x: usize },
    BottomFlip { x: usize },
    TopFlip { x: usize },
    Perturb { k: usize, x: usize },
}

impl Event {
    pub fn kind(&self) -> EventKind {
        match self {
            Event::VerticalSwap { .. } => EventKind::VerticalSwap,
            Event::HorizontalFlow { .. } => EventKind::HorizontalFlow,
            Event::BottomFlip { .. } => EventKind::BottomFlip,
            Event::TopFlip { .. } => EventKind::TopFlip,
            Event::Perturb { .. } => EventKind::Perturb,
        }
    }

    /// Sites `(k, x)` whose value the event may change.
    fn sites(&self, config: &Configuration) -> ([(usize, usize); 2], usize) {
        let w = config.width();
        match *self {
            Event::VerticalSwap { k, x } => ([(k, x), (k + 1, x)], 2),
            Event::HorizontalFlow { k, x } => ([(k, x), (k, (x + 1) % w)], 2),
            Event::BottomFlip { x } => ([(0, x), (0, x)], 1),
            Event::TopFlip { x } => ([(config.layers() - 1, x), (0, 0)], 1),
            Event::Perturb { k, x } => ([(k, x), (0, 0)], 1),
        }
    }
}

/// Whether `event` is enabled in `config` (has positive rate and changes
/// something, identity vertical swaps excluded).
pub fn is_enabled(config: &Configuration, event: &Event) -> bool {
    let w = config.width();
    let top = config.layers() - 1;
    match *event {
        Event::VerticalSwap { k, x } => k < top && x < w && config.get(k, x) != config.get(k + 1, x),
        Event::HorizontalFlow { k, x } => {
            w >= 2 && k <= top && x < w && config.get(k, x) == Velocity::Vee && config.get(k, x + 1) == Velocity::Hole
        }
        Event::BottomFlip { x } => x < w && config.get(0, x) == Velocity::Vee,
        Event::TopFlip { x } => x < w && config.get(top, x) == Velocity::Zero,
        Event::Perturb { k, x } => k <= top && x < w && config.get(k, x).is_particle(),
    }
}

/// Applies `event` unconditionally: swaps exchange values, flips set the
/// boundary value, perturbations exchange `0 <-> V`.
pub fn apply_event(config: &mut Configuration, event: &Event) {
    match *event {
        Event::VerticalSwap { k, x } => {
            let (a, b) = (config.get(k, x), config.get(k + 1, x));
            config.set(k, x, b);
            config.set(k + 1, x, a);
        }
        Event::HorizontalFlow { k, x } => {
            let (a, b) = (config.get(k, x), config.get(k, x + 1));
            config.set(k, x, b);
            config.set(k, x + 1, a);
        }
        Event::BottomFlip { x } => {
            if config.get(0, x) == Velocity::Vee {
                config.set(0, x, Velocity::Zero);
            }
        }
        Event::TopFlip { x } => {
            let top = config.layers() - 1;
            if config.get(top, x) == Velocity::Zero {
                config.set(top, x, Velocity::Vee);
            }
        }
        Event::Perturb { k, x } => {
            let v = config.get(k, x);
            config.set(k, x, v.flipped());
        }
    }
}

/// Every enabled event with its rate, by exhaustive scan. Zero-rate kinds
/// are omitted.
pub fn enabled_events(config: &Configuration, params: &Params) -> Vec<(Event, f64)> {
    let (layers, w) = (config.layers(), config.width());
    let mut out = Vec::new();
    let mut push = |e: Event| {
        let r = e.kind().rate(params);
        if r > 0.0 && is_enabled(config, &e) {
            out.push((e, r));
        }
    };
    for k in 0..layers {
        for x in 0..w {
            if k + 1 < layers {
                push(Event::VerticalSwap { k, x });
            }
            push(Event::HorizontalFlow { k, x });
            push(Event::Perturb { k, x });
        }
    }
    for x in 0..w {
        push(Event::BottomFlip { x });
        push(Event::TopFlip { x });
    }
    out
}

/// Sum of the rates of all enabled events.
pub fn total_rate(config: &Configuration, params: &Params) -> f64 {
    enabled_events(config, params).iter().map(|(_, r)| r).sum()
}

/// One exact transition by exhaustive enumeration: returns the event fired
/// and the exponential holding time. O(sites) per call; long runs should use
/// [`Simulator`].
pub fn step<R: Rng + ?Sized>(config: &mut Configuration, params: &Params, rng: &mut R) -> Result<(Event, f64)> {
    let events = enabled_events(config, params);
    let total: f64 = events.iter().map(|(_, r)| r).sum();
    if total <= 0.0 {
        return Err(Error::Absorbing);
    }
    let dt = Exp::new(total).expect("positive rate").sample(rng);
    let mut target = rng.random::<f64>() * total;
    let mut chosen = events[events.len() - 1].0;
    for (e, r) in &events {
        if target < *r {
            chosen = *e;
            break;
        }
        target -= r;
    }
    apply_event(config, &chosen);
    Ok((chosen, dt))
}

/// Set of `u32` ids with O(1) insert, remove and uniform sampling.
#[derive(Debug, Clone)]
struct IndexedSet {
    members: Vec<u32>,
    pos: Vec<u32>,
}

impl IndexedSet {
    const ABSENT: u32 = u32::MAX;

    fn new(capacity: usize) -> Self {
        IndexedSet {
            members: Vec::new(),
            pos: vec![Self::ABSENT; capacity],
        }
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    fn set(&mut self, id: usize, present: bool) {
        let p = self.pos[id];
        if present && p == Self::ABSENT {
            self.pos[id] = self.members.len() as u32;
            self.members.push(id as u32);
        } else if !present && p != Self::ABSENT {
            let last = *self.members.last().expect("non-empty");
            self.members.swap_remove(p as usize);
            if last as usize != id {
                self.pos[last as usize] = p;
            }
            self.pos[id] = Self::ABSENT;
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.members[rng.random_range(0..self.members.len())] as usize
    }
}

/// Number of events fired, by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub vertical_swap: u64,
    pub horizontal_flow: u64,
    pub bottom_flip: u64,
    pub top_flip: u64,
    pub perturb: u64,
}

impl EventCounts {
    pub fn get(&self, kind: EventKind) -> u64 {
        match kind {
            EventKind::VerticalSwap => self.vertical_swap,
            EventKind::HorizontalFlow => self.horizontal_flow,
            EventKind::BottomFlip => self.bottom_flip,
            EventKind::TopFlip => self.top_flip,
            EventKind::Perturb => self.perturb,
        }
    }

    fn bump(&mut self, kind: EventKind) {
        match kind {
            EventKind::VerticalSwap => self.vertical_swap += 1,
            EventKind::HorizontalFlow => self.horizontal_flow += 1,
            EventKind::BottomFlip => self.bottom_flip += 1,
            EventKind::TopFlip => self.top_flip += 1,
            EventKind::Perturb => self.perturb += 1,
        }
    }

    pub fn total(&self) -> u64 {
        EventKind::ALL.iter().map(|&k| self.get(k)).sum()
    }

    pub fn merge(&self, other: &EventCounts) -> EventCounts {
        EventCounts {
            vertical_swap: self.vertical_swap + other.vertical_swap,
            horizontal_flow: self.horizontal_flow + other.horizontal_flow,
            bottom_flip: self.bottom_flip + other.bottom_flip,
            top_flip: self.top_flip + other.top_flip,
            perturb: self.perturb + other.perturb,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Treat every vertical pair as an event at rate `lambda`, including
    /// swaps of equal values (which change nothing).
    pub explicit_identity_swaps: bool,
}

/// Incremental event-driven simulator owning one configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: Configuration,
    params: Params,
    options: SimOptions,
    time: f64,
    vertical: IndexedSet,
    flow: IndexedSet,
    bottom: IndexedSet,
    top: IndexedSet,
    perturb: IndexedSet,
    histogram: Vec<LayerCounts>,
    counts: EventCounts,
}

impl Simulator {
    pub fn new(config: Configuration, params: Params) -> Result<Self> {
        Self::with_options(config, params, SimOptions::default())
    }

    pub fn with_options(config: Configuration, params: Params, options: SimOptions) -> Result<Self> {
        params.validate()?;
        config.check_matches(&params)?;
        let (layers, w) = (config.layers(), config.width());
        let n = layers * w;
        let histogram = config.layer_histogram();
        let mut sim = Simulator {
            config,
            params,
            options,
            time: 0.0,
            vertical: IndexedSet::new(n),
            flow: IndexedSet::new(n),
            bottom: IndexedSet::new(w),
            top: IndexedSet::new(w),
            perturb: IndexedSet::new(n),
            histogram,
            counts: EventCounts::default(),
        };
        for k in 0..layers {
            for x in 0..w {
                sim.refresh_site(k, x);
            }
        }
        Ok(sim)
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn into_config(self) -> Configuration {
        self.config
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn event_counts(&self) -> &EventCounts {
        &self.counts
    }

    /// Current per-layer counts, maintained incrementally.
    pub fn histogram(&self) -> &[LayerCounts] {
        &self.histogram
    }

    fn vertical_pairs(&self) -> usize {
        (self.config.layers() - 1) * self.config.width()
    }

    /// Aggregate rate of each event kind, in [`EventKind::ALL`] order.
    pub fn kind_rates(&self) -> [f64; 5] {
        let p = &self.params;
        let vertical = if self.options.explicit_identity_swaps {
            self.vertical_pairs()
        } else {
            self.vertical.len()
        };
        let flow = if self.config.width() >= 2 { self.flow.len() } else { 0 };
        [
            p.lambda * vertical as f64,
            p.lambda1 * flow as f64,
            p.beta * self.bottom.len() as f64,
            p.beta * self.top.len() as f64,
            p.epsilon * self.perturb.len() as f64,
        ]
    }

    pub fn total_rate(&self) -> f64 {
        self.kind_rates().iter().sum()
    }

    fn refresh_site(&mut self, k: usize, x: usize) {
        let c = &self.config;
        let (layers, w) = (c.layers(), c.width());
        let site = c.site(k, x);
        let here = c.get(k, x);
        if k + 1 < layers {
            let en = here != c.get(k + 1, x);
            self.vertical.set(site, en);
        }
        if k > 0 {
            let en = c.get(k - 1, x) != here;
            self.vertical.set(c.site(k - 1, x), en);
        }
        if w >= 2 {
            let right = here == Velocity::Vee && c.get(k, x + 1) == Velocity::Hole;
            self.flow.set(site, right);
            let xl = (x + w - 1) % w;
            let left = c.get(k, xl) == Velocity::Vee && here == Velocity::Hole;
            self.flow.set(c.site(k, xl), left);
        }
        if k == 0 {
            self.bottom.set(x, here == Velocity::Vee);
        }
        if k + 1 == layers {
            self.top.set(x, here == Velocity::Zero);
        }
        self.perturb.set(site, here.is_particle());
    }

    fn write_site(&mut self, k: usize, x: usize, v: Velocity) {
        let old = self.config.get(k, x);
        if old != v {
            *self.histogram[k].get_mut(old) -= 1;
            *self.histogram[k].get_mut(v) += 1;
            self.config.set(k, x, v);
        }
    }

    fn apply(&mut self, event: &Event) {
        let (sites, n) = event.sites(&self.config);
        let mut vals = [self.config.get(sites[0].0, sites[0].1), self.config.get(sites[1].0, sites[1].1)];
        match event {
            Event::VerticalSwap { .. } | Event::HorizontalFlow { .. } => vals.swap(0, 1),
            Event::BottomFlip { .. } => vals[0] = Velocity::Zero,
            Event::TopFlip { .. } => vals[0] = Velocity::Vee,
            Event::Perturb { .. } => vals[0] = vals[0].flipped(),
        }
        for (&(k, x), &v) in sites[..n].iter().zip(&vals) {
            self.write_site(k, x, v);
        }
        for &(k, x) in &sites[..n] {
            self.refresh_site(k, x);
        }
        self.counts.bump(event.kind());
    }

    /// Exponential holding time until the next event, or `None` in an
    /// absorbing state.
    pub fn holding_time<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        let total = self.total_rate();
        (total > 0.0).then(|| Exp::new(total).expect("positive rate").sample(rng))
    }

    /// Draws the next event from the current rates and applies it, without
    /// advancing the clock.
    pub fn fire<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Event> {
        let rates = self.kind_rates();
        let total: f64 = rates.iter().sum();
        if total <= 0.0 {
            return Err(Error::Absorbing);
        }
        let mut target = rng.random::<f64>() * total;
        let mut kind = EventKind::ALL.len() - 1;
        for (i, &r) in rates.iter().enumerate() {
            if target < r {
                kind = i;
                break;
            }
            target -= r;
        }
        // guard against rounding landing on an empty kind
        while rates[kind] <= 0.0 {
            kind -= 1;
        }
        let w = self.config.width();
        let event = match EventKind::ALL[kind] {
            EventKind::VerticalSwap => {
                let id = if self.options.explicit_identity_swaps {
                    rng.random_range(0..self.vertical_pairs())
                } else {
                    self.vertical.sample(rng)
                };
                Event::VerticalSwap { k: id / w, x: id % w }
            }
            EventKind::HorizontalFlow => {
                let id = self.flow.sample(rng);
                Event::HorizontalFlow { k: id / w, x: id % w }
            }
            EventKind::BottomFlip => Event::BottomFlip { x: self.bottom.sample(rng) },
            EventKind::TopFlip => Event::TopFlip { x: self.top.sample(rng) },
            EventKind::Perturb => {
                let id = self.perturb.sample(rng);
                Event::Perturb { k: id / w, x: id % w }
            }
        };
        self.apply(&event);
        Ok(event)
    }

    /// One transition: holding time, then event. Advances the clock.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(Event, f64)> {
        let dt = self.holding_time(rng).ok_or(Error::Absorbing)?;
        let event = self.fire(rng)?;
        self.time += dt;
        Ok((event, dt))
    }

    /// Runs until model time `t`. An absorbing state simply idles.
    pub fn advance_to<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) {
        while self.time < t {
            match self.holding_time(rng) {
                Some(dt) if self.time + dt < t => {
                    self.fire(rng).expect("positive rate");
                    self.time += dt;
                }
                _ => self.time = t,
            }
        }
    }
}

/// Running mean and variance (Welford, with Chan's pairwise merge).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &RunningStats) -> RunningStats {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        RunningStats {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Sufficient statistics for one `(layer, state)` estimate: batch means
/// pooled over all replicas, and per-replica means.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct CellStats {
    batches: RunningStats,
    replicas: RunningStats,
}

impl CellStats {
    fn merge(&self, o: &CellStats) -> CellStats {
        CellStats {
            batches: self.batches.merge(&o.batches),
            replicas: self.replicas.merge(&o.replicas),
        }
    }

    fn mean(&self) -> f64 {
        self.replicas.mean
    }

    /// Replica-to-replica spread when there are at least two replicas
    /// (robust to autocorrelation and realised-density fluctuations);
    /// batch means otherwise.
    fn std_error(&self) -> f64 {
        if self.replicas.n >= 2 {
            self.replicas.std_error()
        } else {
            self.batches.std_error()
        }
    }
}

/// Time-averaged layer probabilities with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerEstimate {
    pub k: usize,
    pub p_hole: f64,
    pub p_zero: f64,
    pub p_v: f64,
    pub se_hole: f64,
    pub se_zero: f64,
    pub se_v: f64,
}

/// Result of one or more merged simulation runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub params: Params,
    pub seed: u64,
    pub t_burn: f64,
    pub t_measure: f64,
    pub batches: usize,
    pub replicas: usize,
    /// Model time simulated per replica.
    pub elapsed: f64,
    /// Events fired over burn-in and measurement, summed over replicas.
    pub events: EventCounts,
    /// Measurement window has zero length: `profile` is empty.
    pub empty_window: bool,
    /// At least one replica reached a state with no enabled events.
    pub absorbed: bool,
    /// Mean realised particle density `M / ((S + 2) W)` over replicas.
    pub density: f64,
    pub profile: Vec<LayerEstimate>,
    #[serde(skip)]
    stats: Vec<[CellStats; 3]>,
}

impl SimReport {
    fn from_stats(
        params: Params,
        seed: u64,
        opts: &RunOptions,
        events: EventCounts,
        absorbed: bool,
        density: f64,
        stats: Vec<[CellStats; 3]>,
    ) -> SimReport {
        let mut report = SimReport {
            params,
            seed,
            t_burn: opts.t_burn,
            t_measure: opts.t_measure,
            batches: opts.batches,
            replicas: 1,
            elapsed: opts.t_burn + opts.t_measure,
            events,
            empty_window: !(opts.t_measure > 0.0),
            absorbed,
            density,
            profile: Vec::new(),
            stats,
        };
        report.rebuild_profile();
        report
    }

    fn rebuild_profile(&mut self) {
        if self.empty_window {
            self.profile.clear();
            return;
        }
        self.profile = self
            .stats
            .iter()
            .enumerate()
            .map(|(k, s)| LayerEstimate {
                k,
                p_hole: s[0].mean(),
                p_zero: s[1].mean(),
                p_v: s[2].mean(),
                se_hole: s[0].std_error(),
                se_zero: s[1].std_error(),
                se_v: s[2].std_error(),
            })
            .collect();
    }

    /// Combines two reports of the same experiment (different replicas).
    /// Associative; the reduction order only affects rounding.
    pub fn merge(&self, other: &SimReport) -> SimReport {
        let n = (self.replicas + other.replicas) as f64;
        let mut merged = SimReport {
            replicas: self.replicas + other.replicas,
            events: self.events.merge(&other.events),
            absorbed: self.absorbed || other.absorbed,
            empty_window: self.empty_window || other.empty_window,
            density: (self.density * self.replicas as f64 + other.density * other.replicas as f64) / n,
            stats: self
                .stats
                .iter()
                .zip(&other.stats)
                .map(|(a, b)| [a[0].merge(&b[0]), a[1].merge(&b[1]), a[2].merge(&b[2])])
                .collect(),
            ..self.clone()
        };
        merged.rebuild_profile();
        merged
    }

    pub fn p_v(&self) -> Vec<f64> {
        self.profile.iter().map(|l| l.p_v).collect()
    }

    pub fn p_hole(&self) -> Vec<f64> {
        self.profile.iter().map(|l| l.p_hole).collect()
    }
}

/// Window and batching for [`run_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub t_burn: f64,
    pub t_measure: f64,
    pub batches: usize,
    pub sim: SimOptions,
}

impl RunOptions {
    pub fn new(t_burn: f64, t_measure: f64) -> Self {
        RunOptions {
            t_burn,
            t_measure,
            batches: DEFAULT_BATCHES,
            sim: SimOptions::default(),
        }
    }
}

/// Time-integrates layer counts lazily: a layer is only touched when one
/// of its sites changes.
struct Accumulator {
    width: f64,
    last: Vec<f64>,
    snapshot: Vec<LayerCounts>,
    integral: Vec<[f64; 3]>,
}

impl Accumulator {
    fn new(t: f64, hist: &[LayerCounts], width: usize) -> Self {
        Accumulator {
            width: width as f64,
            last: vec![t; hist.len()],
            snapshot: hist.to_vec(),
            integral: vec![[0.0; 3]; hist.len()],
        }
    }

    fn touch(&mut self, k: usize, t: f64, counts: LayerCounts) {
        let dt = t - self.last[k];
        let s = &self.snapshot[k];
        let acc = &mut self.integral[k];
        acc[0] += s.hole as f64 * dt;
        acc[1] += s.zero as f64 * dt;
        acc[2] += s.vee as f64 * dt;
        self.last[k] = t;
        self.snapshot[k] = counts;
    }

    /// Closes a batch ending at `t` of length `len`; returns per-layer
    /// average probabilities and resets the integrals.
    fn close(&mut self, t: f64, len: f64) -> Vec<[f64; 3]> {
        for k in 0..self.snapshot.len() {
            let c = self.snapshot[k];
            self.touch(k, t, c);
        }
        let norm = len * self.width;
        let out = self
            .integral
            .iter()
            .map(|a| [a[0] / norm, a[1] / norm, a[2] / norm])
            .collect();
        for a in &mut self.integral {
            *a = [0.0; 3];
        }
        out
    }
}

/// Runs one replica: burn-in to `t_burn`, then time-averages layer
/// histograms over `t_measure` split into equal batches.
pub fn run_with(config: Configuration, params: &Params, opts: &RunOptions, seed: u64, replica: u64) -> Result<SimReport> {
    if !(opts.t_burn >= 0.0 && opts.t_measure >= 0.0) || !opts.t_burn.is_finite() || !opts.t_measure.is_finite() {
        return Err(Error::InvalidParams("t_burn and t_measure must be finite and non-negative".into()));
    }
    if opts.batches == 0 {
        return Err(Error::InvalidParams("need at least one batch".into()));
    }
    let mut rng = rng::stream(seed, replica);
    let density = config.density();
    let layers = config.layers();
    let mut sim = Simulator::with_options(config, *params, opts.sim)?;
    let mut absorbed = false;

    let mut advance = |sim: &mut Simulator, rng: &mut SimRng, until: f64, acc: Option<&mut Accumulator>| {
        let mut acc = acc;
        while sim.time < until {
            match sim.holding_time(rng) {
                Some(dt) if sim.time + dt < until => {
                    let event = sim.fire(rng).expect("positive rate");
                    sim.time += dt;
                    if let Some(acc) = acc.as_deref_mut() {
                        let (sites, n) = event.sites(&sim.config);
                        acc.touch(sites[0].0, sim.time, sim.histogram[sites[0].0]);
                        if n == 2 && sites[1].0 != sites[0].0 {
                            acc.touch(sites[1].0, sim.time, sim.histogram[sites[1].0]);
                        }
                    }
                }
                Some(_) => sim.time = until,
                None => {
                    absorbed = true;
                    sim.time = until;
                }
            }
        }
    };

    advance(&mut sim, &mut rng, opts.t_burn, None);
    let mut stats = vec![[CellStats::default(); 3]; layers];
    if opts.t_measure > 0.0 {
        let len = opts.t_measure / opts.batches as f64;
        let mut acc = Accumulator::new(sim.time, &sim.histogram, params.w);
        let mut per_replica = vec![[RunningStats::default(); 3]; layers];
        for b in 1..=opts.batches {
            let end = if b == opts.batches {
                opts.t_burn + opts.t_measure
            } else {
                opts.t_burn + len * b as f64
            };
            let start = sim.time;
            advance(&mut sim, &mut rng, end, Some(&mut acc));
            for (k, probs) in acc.close(end, end - start).into_iter().enumerate() {
                for e in 0..3 {
                    stats[k][e].batches.push(probs[e]);
                    per_replica[k][e].push(probs[e]);
                }
            }
        }
        for k in 0..layers {
            for e in 0..3 {
                stats[k][e].replicas.push(per_replica[k][e].mean);
            }
        }
    }
    Ok(SimReport::from_stats(
        *params,
        seed,
        opts,
        *sim.event_counts(),
        absorbed,
        density,
        stats,
    ))
}

/// Single replica with the default batching.
pub fn run(config: Configuration, params: &Params, t_burn: f64, t_measure: f64, seed: u64) -> Result<SimReport> {
    run_with(config, params, &RunOptions::new(t_burn, t_measure), seed, 0)
}

/// Layer histograms of one trajectory at the requested (sorted) times.
pub fn sample_histograms(config: Configuration, params: &Params, times: &[f64], seed: u64, replica: u64) -> Result<Vec<Vec<LayerCounts>>> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("sample times must be sorted".into()));
    }
    let mut rng = rng::stream(seed, replica);
    let mut sim = Simulator::new(config, *params)?;
    Ok(times
        .iter()
        .map(|&t| {
            sim.advance_to(t, &mut rng);
            sim.histogram.clone()
        })
        .collect())
}
