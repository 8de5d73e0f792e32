use num_traits::One;

use super::path::{DelayedPath, DelayedSource};
use super::schedule::Schedule;
use crate::error::Result;
use crate::exactprob::ratio::{int, to_f64};
use crate::exactprob::Rational;
use crate::montecarlo::{run_paths, Accumulator, Estimate, McReport, McRow, RunSpec, SIGMA_MULTIPLIER};

/// Counts gathered in one pass over delayed-walk paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayedStats {
    times: Vec<u64>,
    horizon: u64,
    paths: u64,
    /// Paths with `M_{t_k} = (-1)^{k-1} M_1`.
    alternated: Vec<u64>,
    /// Paths with `M_{t_k} ∈ {±1}`.
    on_pm1: Vec<u64>,
    /// Value counts `(+1, -1)` at the last schedule time within the horizon.
    last_signs: (u64, u64),
    bounded: u64,
    /// `(n, ±1)` changes of the number of paths off `{±1}`.
    off_events: Vec<(u64, i64)>,
}

impl DelayedStats {
    pub fn new(times: &[u64], horizon: u64) -> Self {
        let times: Vec<u64> = times.iter().copied().filter(|&t| t <= horizon).collect();
        DelayedStats {
            alternated: vec![0; times.len()],
            on_pm1: vec![0; times.len()],
            times,
            horizon,
            paths: 0,
            last_signs: (0, 0),
            bounded: 0,
            off_events: Vec::new(),
        }
    }

    pub fn paths(&self) -> u64 {
        self.paths
    }

    pub fn alternation(&self, k: usize) -> Estimate {
        Estimate::new(self.alternated[k - 1], self.paths)
    }

    pub fn on_pm1_at(&self, k: usize) -> Estimate {
        Estimate::new(self.on_pm1[k - 1], self.paths)
    }

    /// Piecewise-constant profile `(a, b, off)`: on `[a, b]` exactly `off`
    /// paths are away from `{±1}`. Covers `1..=horizon`.
    pub fn occupancy_profile(&self) -> Vec<(u64, u64, u64)> {
        let mut events = self.off_events.clone();
        events.sort_unstable();
        let mut out = Vec::new();
        let mut off: i64 = 0;
        let mut from = 1u64;
        let mut i = 0;
        while from <= self.horizon {
            while i < events.len() && events[i].0 <= from {
                off += events[i].1;
                i += 1;
            }
            let to = events
                .get(i)
                .map_or(self.horizon, |e| (e.0 - 1).min(self.horizon));
            out.push((from, to, off as u64));
            from = to + 1;
        }
        out
    }

    /// Distance from the empirical law at the last tracked time to `U(±1)`.
    pub fn tv_to_uniform_pm1(&self) -> f64 {
        let n = self.paths as f64;
        let (p, m) = (self.last_signs.0 as f64 / n, self.last_signs.1 as f64 / n);
        0.5 * ((p - 0.5).abs() + (m - 0.5).abs() + (1.0 - p - m))
    }
}

impl Accumulator<DelayedPath> for DelayedStats {
    fn observe(&mut self, _index: u64, path: &DelayedPath) {
        self.paths += 1;
        let m1 = path.m1();
        let mut sign = m1;
        for (i, &t) in self.times.iter().enumerate() {
            let v = path.value_at(t);
            self.alternated[i] += u64::from(v == sign);
            self.on_pm1[i] += u64::from(v.abs() == 1);
            sign = -sign;
        }
        if let Some(&t) = self.times.last() {
            match path.value_at(t) {
                1 => self.last_signs.0 += 1,
                -1 => self.last_signs.1 += 1,
                _ => {}
            }
        }
        self.bounded += u64::from(path.increments_bounded());
        for (a, b) in path.off_pm1_intervals() {
            let a = a.max(1);
            if a <= b {
                self.off_events.push((a, 1));
                self.off_events.push((b + 1, -1));
            }
        }
    }

    fn merge(&mut self, other: Self) {
        self.paths += other.paths;
        for (a, b) in self.alternated.iter_mut().zip(other.alternated) {
            *a += b;
        }
        for (a, b) in self.on_pm1.iter_mut().zip(other.on_pm1) {
            *a += b;
        }
        self.last_signs.0 += other.last_signs.0;
        self.last_signs.1 += other.last_signs.1;
        self.bounded += other.bounded;
        self.off_events.extend(other.off_events);
    }
}

/// Samples `run.paths` delayed-walk paths and gathers [`DelayedStats`].
pub fn collect_delayed_stats(schedule: &Schedule, horizon: u64, run: &RunSpec) -> Result<DelayedStats> {
    let source = DelayedSource::new(schedule, horizon)?;
    run_paths(&source, run, || DelayedStats::new(source.times(), horizon))
}

fn one_sided(e: &Estimate, bound: f64) -> bool {
    e.value() + e.radius() >= bound
}

/// Rows `alternation` (`M_{t_k} = (-1)^{k-1} M_1` against `1 - ε_k`) and
/// `occupancy-at-t` (`M_{t_k} ∈ {±1}` against `1 - ε_k`), one-sided at `3σ`.
pub fn alternation_rows(schedule: &Schedule, stats: &DelayedStats) -> Vec<McRow> {
    let mut rows = Vec::new();
    for (i, &t) in stats.times.iter().enumerate() {
        let k = i + 1;
        let bound = to_f64(&(Rational::one() - &schedule.entries()[i].eps_k));
        for (stat, e) in [("alternation", stats.alternation(k)), ("occupancy-at-t", stats.on_pm1_at(k))] {
            rows.push(
                McRow::new(stat, e.value(), e.radius(), e.trials)
                    .at_k(k as u64)
                    .at_n(t)
                    .against(bound, one_sided(&e, bound)),
            );
        }
    }
    rows
}

/// For each window `[t_k, t_{k+1}]` (the last one ends at the horizon):
/// row `occupancy` holds the smallest empirical `P(M_n ∈ {±1})` and its
/// time, row `occupancy-flags` the number of `n` with estimate `+ 3σ`
/// below `1 - 2ε_k`.
pub fn occupancy_rows(schedule: &Schedule, stats: &DelayedStats) -> Vec<McRow> {
    let profile = stats.occupancy_profile();
    let paths = stats.paths;
    let mut rows = Vec::new();
    for (i, &t) in stats.times.iter().enumerate() {
        let k = i + 1;
        let end = stats.times.get(i + 1).copied().unwrap_or(stats.horizon);
        let bound = to_f64(&(Rational::one() - int(2) * &schedule.entries()[i].eps_k));
        let mut worst: Option<(u64, Estimate)> = None;
        let mut flagged = 0u64;
        for &(a, b, off) in &profile {
            let (a, b) = (a.max(t), b.min(end));
            if a > b {
                continue;
            }
            let e = Estimate::new(paths - off, paths);
            if worst.map_or(true, |(_, w)| e.successes < w.successes) {
                worst = Some((a, e));
            }
            if e.value() + SIGMA_MULTIPLIER * (e.value() * (1.0 - e.value()) / paths as f64).sqrt() < bound {
                flagged += b - a + 1;
            }
        }
        let (n, e) = worst.expect("window is non-empty");
        rows.push(
            McRow::new("occupancy", e.value(), e.radius(), paths)
                .at_k(k as u64)
                .at_n(n)
                .against(bound, one_sided(&e, bound)),
        );
        rows.push(
            McRow::new("occupancy-flags", flagged as f64, 0.0, end - t + 1)
                .at_k(k as u64)
                .against(0.0, flagged == 0),
        );
    }
    rows
}

/// Occupancy rows only.
pub fn occupancy_check(schedule: &Schedule, horizon: u64, run: &RunSpec) -> Result<McReport> {
    let stats = collect_delayed_stats(schedule, horizon, run)?;
    let mut report = McReport::new("occupancy", "delayedwalk", run.plan, run.paths, horizon);
    report.rows = occupancy_rows(schedule, &stats);
    Ok(report)
}

/// Every delayed-walk statistic from one pass: alternation and occupancy
/// rows, `bounded-increments` (fraction of paths whose pieces tile the
/// horizon with steps of at most one) and `tv-limit`, the distance of the
/// law at the last schedule time to `U(±1)` (no verdict).
pub fn delayed_walk_check(schedule: &Schedule, horizon: u64, run: &RunSpec) -> Result<McReport> {
    let stats = collect_delayed_stats(schedule, horizon, run)?;
    let mut report = McReport::new("delayed-walk", "delayedwalk", run.plan, run.paths, horizon);
    report.rows.extend(alternation_rows(schedule, &stats));
    report.rows.extend(occupancy_rows(schedule, &stats));
    let b = Estimate::new(stats.bounded, stats.paths);
    report.rows.push(
        McRow::new("bounded-increments", b.value(), 0.0, b.trials).against(1.0, b.successes == b.trials),
    );
    if let Some(&t) = stats.times.last() {
        report.rows.push(McRow::new("tv-limit", stats.tv_to_uniform_pm1(), 0.0, stats.paths).at_n(t));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delayedwalk::{build_schedule, EpsRule};
    use crate::exactprob::ratio::ratio;
    use crate::montecarlo::{sample_path, ConditionalIncrements, SeedPlan};

    #[test]
    fn profile_sweep() {
        let mut s = DelayedStats::new(&[1, 4], 6);
        s.paths = 2;
        s.off_events = vec![(2, 1), (4, -1), (3, 1), (7, -1)];
        assert_eq!(s.occupancy_profile(), vec![(1, 1, 0), (2, 2, 1), (3, 3, 2), (4, 6, 1)]);
    }

    #[test]
    fn default_schedule_small_run() {
        let s = build_schedule(3, &EpsRule::default()).unwrap();
        let r = delayed_walk_check(&s, s.last_time(), &RunSpec::new(4000, 11)).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.rows_of("alternation").count(), 3);
        assert_eq!(r.rows_of("alternation").next().unwrap().estimate, 1.0);
    }

    #[test]
    fn miscalibrated_schedule_is_flagged() {
        let s = Schedule::manual(vec![ratio(1, 2), ratio(1, 4), ratio(1, 8)], vec![1, 4, 10]).unwrap();
        let r = occupancy_check(&s, 10, &RunSpec::new(4000, 3)).unwrap();
        assert!(!r.all_pass());
        assert!(r.rows_of("occupancy-flags").any(|row| row.estimate > 0.0));
    }

    #[test]
    fn increments_are_centred() {
        let s = Schedule::manual(vec![ratio(1, 2), ratio(1, 4), ratio(1, 8)], vec![1, 40, 400]).unwrap();
        let source = DelayedSource::new(&s, 400).unwrap();
        let plan = SeedPlan::new(8);
        let mut inc = ConditionalIncrements::default();
        for i in 0..3000 {
            let p = sample_path(&source, &plan, i);
            inc.observe(i, &p.values_upto(400));
        }
        assert!(inc.outliers(100).is_empty());
    }

    #[test]
    fn worker_count_does_not_matter() {
        let s = build_schedule(3, &EpsRule::default()).unwrap();
        let a = delayed_walk_check(&s, 22100, &RunSpec::new(500, 4).with_workers(1)).unwrap();
        let b = delayed_walk_check(&s, 22100, &RunSpec::new(500, 4).with_workers(3)).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
}
