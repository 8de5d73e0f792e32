use std::collections::BTreeMap;

use super::runner::Accumulator;
use crate::error::{Error, Result};
use crate::exactprob::ratio::to_f64;
use crate::exactprob::{Dist, State};

/// Pass/fail radii are this many standard errors.
pub const SIGMA_MULTIPLIER: f64 = 3.0;

/// Conditioning events needed before a conditional rate is reported.
pub const MIN_CONDITIONING: u64 = 100;

/// A frequency `successes / trials` with its `3σ` radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        Estimate { successes, trials }
    }

    pub fn value(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.successes as f64 / self.trials as f64
    }

    /// `3·sqrt(p̂(1-p̂)/trials)`.
    pub fn radius(&self) -> f64 {
        let p = self.value();
        SIGMA_MULTIPLIER * (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Whether `exact` passes a `3σ` test, with `σ` computed from `exact`
    /// itself (the plug-in radius is too narrow near 0 and 1).
    pub fn within(&self, exact: f64) -> bool {
        let r = SIGMA_MULTIPLIER * (exact * (1.0 - exact) / self.trials as f64).sqrt();
        (self.value() - exact).abs() <= r
    }
}

/// Sample mean of integer observations with a `3σ` radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MeanEstimate {
    pub count: u64,
    pub sum: i128,
    pub sum_sq: u128,
}

impl MeanEstimate {
    pub fn push(&mut self, v: i64) {
        self.count += 1;
        self.sum += i128::from(v);
        self.sum_sq += (i128::from(v) * i128::from(v)) as u128;
    }

    pub fn merge(&mut self, other: &MeanEstimate) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    /// Unbiased sample standard deviation.
    pub fn sd(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let var = (self.sum_sq as f64 - (self.sum as f64).powi(2) / n) / (n - 1.0);
        var.max(0.0).sqrt()
    }

    pub fn radius(&self) -> f64 {
        SIGMA_MULTIPLIER * self.sd() / (self.count as f64).sqrt()
    }

    pub fn within(&self, exact: f64) -> bool {
        (self.mean() - exact).abs() <= self.radius()
    }
}

/// Double-valued frequency table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpiricalDist {
    pub freq: BTreeMap<State, f64>,
    pub paths: u64,
}

impl EmpiricalDist {
    pub fn total(&self) -> f64 {
        self.freq.values().sum()
    }

    pub fn mass_on(&self, xs: &[State]) -> f64 {
        xs.iter().filter_map(|x| self.freq.get(x)).sum()
    }

    /// Total variation against an exact law.
    pub fn tv_to(&self, exact: &Dist) -> f64 {
        let mut tv = 0.0;
        for (&x, &f) in &self.freq {
            tv += (f - to_f64(&exact.mass(x))).abs();
        }
        for (x, p) in exact.atoms() {
            if !self.freq.contains_key(&x) {
                tv += to_f64(p);
            }
        }
        tv / 2.0
    }
}

/// Per-time state counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalCounts {
    times: Vec<u32>,
    counts: Vec<BTreeMap<State, u64>>,
    paths: u64,
}

impl MarginalCounts {
    pub fn new(times: &[u32]) -> Self {
        MarginalCounts {
            times: times.to_vec(),
            counts: vec![BTreeMap::new(); times.len()],
            paths: 0,
        }
    }

    pub fn times(&self) -> &[u32] {
        &self.times
    }

    pub fn empirical(&self, n: u32) -> Option<EmpiricalDist> {
        let i = self.times.iter().position(|&t| t == n)?;
        let total = self.paths as f64;
        Some(EmpiricalDist {
            freq: self.counts[i]
                .iter()
                .map(|(&x, &c)| (x, c as f64 / total))
                .collect(),
            paths: self.paths,
        })
    }

    pub fn count(&self, n: u32, x: State) -> u64 {
        self.times
            .iter()
            .position(|&t| t == n)
            .and_then(|i| self.counts[i].get(&x).copied())
            .unwrap_or(0)
    }

    pub fn paths(&self) -> u64 {
        self.paths
    }
}

impl<P: AsRef<[State]>> Accumulator<P> for MarginalCounts {
    fn observe(&mut self, _index: u64, path: &P) {
        let path = path.as_ref();
        self.paths += 1;
        for (i, &n) in self.times.iter().enumerate() {
            if let Some(&x) = path.get(n as usize) {
                *self.counts[i].entry(x).or_insert(0) += 1;
            }
        }
    }

    fn merge(&mut self, other: Self) {
        self.paths += other.paths;
        for (mine, theirs) in self.counts.iter_mut().zip(other.counts) {
            for (x, c) in theirs {
                *mine.entry(x).or_insert(0) += c;
            }
        }
    }
}

/// Counts of `M_n ∈ {±1}` and of `M_{n+1} = -M_n` on that event, for
/// `n = 0..last`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternationCounts {
    conditioning: Vec<u64>,
    flips: Vec<u64>,
}

impl AlternationCounts {
    pub fn new(last: u32) -> Self {
        AlternationCounts {
            conditioning: vec![0; last as usize + 1],
            flips: vec![0; last as usize + 1],
        }
    }

    pub fn rate(&self, n: u32) -> Result<Estimate> {
        let n = n as usize;
        let observed = self.conditioning.get(n).copied().unwrap_or(0);
        if observed < MIN_CONDITIONING {
            return Err(Error::InsufficientData {
                observed,
                required: MIN_CONDITIONING,
            });
        }
        Ok(Estimate::new(self.flips[n], observed))
    }
}

impl<P: AsRef<[State]>> Accumulator<P> for AlternationCounts {
    fn observe(&mut self, _index: u64, path: &P) {
        let path = path.as_ref();
        for (n, w) in path.windows(2).enumerate().take(self.conditioning.len()) {
            if w[0] == 1 || w[0] == -1 {
                self.conditioning[n] += 1;
                if w[1] == -w[0] {
                    self.flips[n] += 1;
                }
            }
        }
    }

    fn merge(&mut self, other: Self) {
        for (a, b) in self.conditioning.iter_mut().zip(other.conditioning) {
            *a += b;
        }
        for (a, b) in self.flips.iter_mut().zip(other.flips) {
            *a += b;
        }
    }
}

/// Paths constant on the closed window `[start, end]`, tallied by the
/// constant value.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionCounts {
    window: (u32, u32),
    paths: u64,
    by_value: BTreeMap<State, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorptionSummary {
    /// Fraction of all paths constant on the window.
    pub constant: Estimate,
    /// Fraction of all paths constant at a value in `{±1}`.
    pub constant_on_pm1: Estimate,
    /// Among paths constant on `{±1}`, the fraction held at `+1`.
    pub plus_given_pm1: Estimate,
}

impl AbsorptionCounts {
    pub fn new(start: u32, end: u32) -> Self {
        assert!(start <= end, "empty window");
        AbsorptionCounts {
            window: (start, end),
            paths: 0,
            by_value: BTreeMap::new(),
        }
    }

    pub fn window(&self) -> (u32, u32) {
        self.window
    }

    pub fn summary(&self) -> AbsorptionSummary {
        let constant: u64 = self.by_value.values().sum();
        let plus = self.by_value.get(&1).copied().unwrap_or(0);
        let pm1 = plus + self.by_value.get(&-1).copied().unwrap_or(0);
        AbsorptionSummary {
            constant: Estimate::new(constant, self.paths),
            constant_on_pm1: Estimate::new(pm1, self.paths),
            plus_given_pm1: Estimate::new(plus, pm1),
        }
    }

    pub fn by_value(&self) -> &BTreeMap<State, u64> {
        &self.by_value
    }
}

impl<P: AsRef<[State]>> Accumulator<P> for AbsorptionCounts {
    fn observe(&mut self, _index: u64, path: &P) {
        let path = path.as_ref();
        self.paths += 1;
        let (a, b) = (self.window.0 as usize, self.window.1 as usize);
        if let Some(w) = path.get(a..=b) {
            if w.iter().all(|&x| x == w[0]) {
                *self.by_value.entry(w[0]).or_insert(0) += 1;
            }
        }
    }

    fn merge(&mut self, other: Self) {
        self.paths += other.paths;
        for (x, c) in other.by_value {
            *self.by_value.entry(x).or_insert(0) += c;
        }
    }
}

/// Increments `M_{n+1} - M_n` grouped by the current value `M_n`, pooled
/// over `n`. Intended for chains with bounded increments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConditionalIncrements {
    by_state: BTreeMap<State, MeanEstimate>,
}

impl ConditionalIncrements {
    pub fn by_state(&self) -> &BTreeMap<State, MeanEstimate> {
        &self.by_state
    }

    /// States observed at least `min_count` times whose mean increment lies
    /// outside its `3σ` radius around zero.
    pub fn outliers(&self, min_count: u64) -> Vec<(State, MeanEstimate)> {
        self.by_state
            .iter()
            .filter(|(_, m)| m.count >= min_count && !m.within(0.0))
            .map(|(&x, &m)| (x, m))
            .collect()
    }
}

impl<P: AsRef<[State]>> Accumulator<P> for ConditionalIncrements {
    fn observe(&mut self, _index: u64, path: &P) {
        for w in path.as_ref().windows(2) {
            let step = i64::try_from(w[1] - w[0]).expect("bounded increments");
            self.by_state.entry(w[0]).or_default().push(step);
        }
    }

    fn merge(&mut self, other: Self) {
        for (x, m) in other.by_state {
            self.by_state.entry(x).or_default().merge(&m);
        }
    }
}

/// Optional bundle of the kernel-path statistics, filled in one pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathStats {
    pub marginal: Option<MarginalCounts>,
    pub alternation: Option<AlternationCounts>,
    pub absorption: Option<AbsorptionCounts>,
}

impl<P: AsRef<[State]>> Accumulator<P> for PathStats {
    fn observe(&mut self, index: u64, path: &P) {
        if let Some(m) = &mut self.marginal {
            m.observe(index, path);
        }
        if let Some(a) = &mut self.alternation {
            a.observe(index, path);
        }
        if let Some(a) = &mut self.absorption {
            a.observe(index, path);
        }
    }

    fn merge(&mut self, other: Self) {
        if let (Some(a), Some(b)) = (&mut self.marginal, other.marginal) {
            Accumulator::<P>::merge(a, b);
        }
        if let (Some(a), Some(b)) = (&mut self.alternation, other.alternation) {
            Accumulator::<P>::merge(a, b);
        }
        if let (Some(a), Some(b)) = (&mut self.absorption, other.absorption) {
            Accumulator::<P>::merge(a, b);
        }
    }
}

fn fold_slice<P, A: Accumulator<P>>(mut acc: A, paths: &[P]) -> A {
    for (i, p) in paths.iter().enumerate() {
        acc.observe(i as u64, p);
    }
    acc
}

/// Frequency table of `M_n` over already-sampled paths.
pub fn empirical_marginal<P: AsRef<[State]>>(paths: &[P], n: u32) -> EmpiricalDist {
    fold_slice(MarginalCounts::new(&[n]), paths)
        .empirical(n)
        .expect("time is tracked")
}

/// Frequency of `M_{n+1} = -M_n` given `M_n ∈ {±1}`.
pub fn alternation_rate<P: AsRef<[State]>>(paths: &[P], n: u32) -> Result<Estimate> {
    fold_slice(AlternationCounts::new(n), paths).rate(n)
}

/// Fraction of paths constant on `[start, end]`.
pub fn absorption_fraction<P: AsRef<[State]>>(
    paths: &[P],
    window: (u32, u32),
) -> AbsorptionSummary {
    fold_slice(AbsorptionCounts::new(window.0, window.1), paths).summary()
}
