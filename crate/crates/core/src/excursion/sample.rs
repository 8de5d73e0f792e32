use std::io::Write;

use super::dp::excursion_marginal;
use super::seq::{expected_event_count, Coupling, CouplingStrategy, ProbSeq};
use crate::error::{Error, Result};
use crate::exactprob::io::csv_writer;
use crate::exactprob::ratio::to_f64;
use crate::exactprob::State;
use crate::montecarlo::{
    run_paths, AbsorptionCounts, Accumulator, Estimate, MarginalCounts, McReport, McRow,
    MeanEstimate, PathRng, PathSource, RunSpec,
};

pub const EVENT_TRACE_HEADER: [&str; 3] = ["path_id", "k", "occurred"];

/// One simulated path of `M`, the walk underneath it, and the events of
/// every excursion started by the horizon (`events[k-1]` is `A_k`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcursionPath {
    pub values: Vec<State>,
    pub walk: Vec<State>,
    pub events: Vec<bool>,
}

impl ExcursionPath {
    /// Indices `k` of started excursions whose event occurred.
    pub fn occurred(&self) -> Vec<u64> {
        (1..)
            .zip(&self.events)
            .filter(|(_, &a)| a)
            .map(|(k, _)| k)
            .collect()
    }
}

impl AsRef<[State]> for ExcursionPath {
    fn as_ref(&self) -> &[State] {
        &self.values
    }
}

/// Lazy draws of `A_1, A_2, ...` for one path, in order.
struct EventDraws<'a> {
    coupling: Coupling,
    p: &'a [f64],
    seq: &'a ProbSeq,
    shared: Option<f64>,
    next: u64,
}

impl<'a> EventDraws<'a> {
    fn new(cs: &'a CouplingStrategy, p: &'a [f64]) -> Self {
        EventDraws {
            coupling: cs.coupling,
            p,
            seq: &cs.seq,
            shared: None,
            next: 1,
        }
    }

    fn draw(&mut self, rng: &mut PathRng) -> bool {
        let k = self.next;
        self.next += 1;
        let p = match self.p.get(k as usize - 1) {
            Some(&p) => p,
            None => self.seq.p_f64(k),
        };
        let u = match self.coupling {
            Coupling::Independent => rng.next_f64(),
            Coupling::Nested => *self.shared.get_or_insert_with(|| rng.next_f64()),
        };
        u < p
    }
}

fn p_table(seq: &ProbSeq, len: u64) -> Vec<f64> {
    (1..=len).map(|k| seq.p_f64(k)).collect()
}

/// Draws [`ExcursionPath`]s up to a fixed horizon.
pub struct ExcursionSource {
    cs: CouplingStrategy,
    horizon: u32,
    p: Vec<f64>,
}

impl ExcursionSource {
    pub fn new(cs: CouplingStrategy, horizon: u32) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Invalid("horizon must be at least 1".into()));
        }
        let p = p_table(&cs.seq, u64::from(horizon.min(4096)) / 2 + 1);
        Ok(ExcursionSource { cs, horizon, p })
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }
}

impl PathSource for ExcursionSource {
    type Path = ExcursionPath;
    type Scratch = ();

    fn scratch(&self) {}

    fn sample(&self, _: &mut (), rng: &mut PathRng) -> ExcursionPath {
        let len = self.horizon as usize + 1;
        let mut values = Vec::with_capacity(len);
        let mut walk = Vec::with_capacity(len);
        let mut draws = EventDraws::new(&self.cs, &self.p);
        let mut active = draws.draw(rng);
        let mut events = vec![active];
        let mut s: State = 0;
        values.push(0);
        walk.push(0);
        let mut bits = 0u64;
        for n in 0..self.horizon {
            if n % 64 == 0 {
                bits = rng.next_u64();
            }
            s += if bits & 1 == 1 { 1 } else { -1 };
            bits >>= 1;
            walk.push(s);
            values.push(if active { s } else { 0 });
            if s == 0 {
                // Excursion k+1 starts at this return.
                active = draws.draw(rng);
                events.push(active);
            }
        }
        ExcursionPath { values, walk, events }
    }
}

/// Path `M_0..=M_horizon` drawn from `seed` directly.
pub fn sample_excursion_path(cs: &CouplingStrategy, horizon: u32, seed: u64) -> Result<ExcursionPath> {
    let source = ExcursionSource::new(cs.clone(), horizon)?;
    Ok(source.sample(&mut (), &mut PathRng::new(seed)))
}

/// Draws only the events `A_1..A_K`, as a path would draw them.
pub struct EventSource {
    cs: CouplingStrategy,
    k_max: u64,
    p: Vec<f64>,
}

impl EventSource {
    pub fn new(cs: CouplingStrategy, k_max: u64) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::Invalid("need at least one event".into()));
        }
        let p = p_table(&cs.seq, k_max);
        Ok(EventSource { cs, k_max, p })
    }
}

impl PathSource for EventSource {
    type Path = Vec<bool>;
    type Scratch = ();

    fn scratch(&self) {}

    fn sample(&self, _: &mut (), rng: &mut PathRng) -> Vec<bool> {
        let mut draws = EventDraws::new(&self.cs, &self.p);
        (0..self.k_max).map(|_| draws.draw(rng)).collect()
    }
}

#[derive(Debug, Clone, Default)]
struct EventCounts {
    /// `at_least[k-1]` counts paths with `N_K ≥ k`.
    at_least: Vec<u64>,
    /// `occurred[k-1]` counts paths where `A_k` occurred.
    occurred: Vec<u64>,
    total: MeanEstimate,
    paths: u64,
}

impl EventCounts {
    fn new(k_max: u64) -> Self {
        EventCounts {
            at_least: vec![0; k_max as usize],
            occurred: vec![0; k_max as usize],
            ..Default::default()
        }
    }
}

impl Accumulator<Vec<bool>> for EventCounts {
    fn observe(&mut self, _index: u64, events: &Vec<bool>) {
        self.paths += 1;
        let n = events.iter().filter(|&&a| a).count();
        self.at_least[..n].iter_mut().for_each(|c| *c += 1);
        for (c, &a) in self.occurred.iter_mut().zip(events) {
            *c += u64::from(a);
        }
        self.total.push(n as i64);
    }

    fn merge(&mut self, other: Self) {
        self.paths += other.paths;
        for (a, b) in self.at_least.iter_mut().zip(other.at_least) {
            *a += b;
        }
        for (a, b) in self.occurred.iter_mut().zip(other.occurred) {
            *a += b;
        }
        self.total.merge(&other.total);
    }
}

/// Under nested events `N ≥ k` iff `A_k`, so `P(N ≥ k) = p_k`. Rows
/// `tail` compare the frequency of `N_K ≥ k` with `p_k` for `k ≤ K`.
pub fn nested_tail_check(seq: &ProbSeq, k_max: u64, run: &RunSpec) -> Result<McReport> {
    let cs = CouplingStrategy::nested(seq.clone())?;
    let counts = run_paths(&EventSource::new(cs, k_max)?, run, || EventCounts::new(k_max))?;
    let mut report = McReport::new("tail-check", "excursion:nested", run.plan, run.paths, k_max);
    for k in 1..=k_max {
        let e = Estimate::new(counts.at_least[k as usize - 1], counts.paths);
        let exact = seq.p_f64(k);
        report.rows.push(
            McRow::new("tail", e.value(), e.radius(), e.trials)
                .at_k(k)
                .against(exact, e.within(exact)),
        );
    }
    Ok(report)
}

/// Mean number of occurred events among the first `K` excursions against
/// `Σ_{k ≤ K} p_k`, plus per-event frequencies `event` against `p_k`.
pub fn event_count_check(cs: &CouplingStrategy, k_max: u64, run: &RunSpec) -> Result<McReport> {
    let counts = run_paths(&EventSource::new(cs.clone(), k_max)?, run, || {
        EventCounts::new(k_max)
    })?;
    let source = format!("excursion:{}", cs.coupling);
    let mut report = McReport::new("event-count", &source, run.plan, run.paths, k_max);
    for k in 1..=k_max {
        let e = Estimate::new(counts.occurred[k as usize - 1], counts.paths);
        let exact = cs.seq.p_f64(k);
        report.rows.push(
            McRow::new("event", e.value(), e.radius(), e.trials)
                .at_k(k)
                .against(exact, e.within(exact)),
        );
    }
    let exact = to_f64(&expected_event_count(&cs.seq, k_max));
    let m = counts.total;
    report.rows.push(
        McRow::new("count", m.mean(), m.radius(), m.count)
            .at_k(k_max)
            .against(exact, m.within(exact)),
    );
    Ok(report)
}

/// Empirical marginals at `times` against the exact excursion law.
///
/// Rows `tv` carry the tolerance as reference and pass when the total
/// variation distance is within it; rows `mass` list every exact atom with
/// its estimate and `3σ` radius, without a verdict.
pub fn coupling_marginal_report(
    cs: &CouplingStrategy,
    horizon: u32,
    times: &[u32],
    tolerance: f64,
    run: &RunSpec,
) -> Result<McReport> {
    if let Some(&n) = times.iter().find(|&&n| n > horizon) {
        return Err(Error::Invalid(format!("time {n} is past the horizon {horizon}")));
    }
    let last = times.iter().copied().max().unwrap_or(0);
    let exact = excursion_marginal(&cs.seq, last)?;
    let source = ExcursionSource::new(cs.clone(), horizon)?;
    let counts = run_paths(&source, run, || MarginalCounts::new(times))?;
    let name = format!("excursion:{}", cs.coupling);
    let mut report = McReport::new("empirical-marginal", &name, run.plan, run.paths, horizon.into());
    for &n in times {
        let emp = counts.empirical(n).expect("tracked time");
        let tv = emp.tv_to(exact.at(n));
        report.rows.push(
            McRow::new("tv", tv, 0.0, emp.paths)
                .at_n(n.into())
                .against(tolerance, tv <= tolerance),
        );
        for (x, p) in exact.at(n).atoms() {
            let e = Estimate::new(counts.count(n, x), emp.paths);
            let mut row = McRow::new("mass", e.value(), e.radius(), e.trials)
                .at_n(n.into())
                .at_x(x);
            row.reference = Some(to_f64(p));
            report.rows.push(row);
        }
    }
    Ok(report)
}

/// Fraction of paths with `M_n = 0` on the last quarter of the horizon.
pub fn zero_window_fraction(cs: &CouplingStrategy, horizon: u32, run: &RunSpec) -> Result<Estimate> {
    let source = ExcursionSource::new(cs.clone(), horizon)?;
    let start = horizon - horizon / 4;
    let counts = run_paths(&source, run, || AbsorptionCounts::new(start, horizon))?;
    let zero = counts.by_value().get(&0).copied().unwrap_or(0);
    Ok(Estimate::new(zero, run.paths))
}

/// CSV rows `path_id,k,occurred` for every started excursion.
pub fn write_event_trace<'a, W, I>(w: W, paths: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a ExcursionPath)>,
{
    let mut out = csv_writer(w);
    out.write_record(EVENT_TRACE_HEADER)?;
    for (id, path) in paths {
        for (k, &a) in (1u64..).zip(&path.events) {
            out.write_record([id.to_string(), k.to_string(), u8::from(a).to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactprob::ratio::ratio;
    use crate::exactprob::Rational;
    use crate::montecarlo::{ConditionalIncrements, SeedPlan};
    use num_traits::One;

    fn harmonic(c: Coupling) -> CouplingStrategy {
        CouplingStrategy::new(c, ProbSeq::harmonic()).unwrap()
    }

    #[test]
    fn all_kept_follows_the_walk() {
        let seq = ProbSeq::constant(Rational::one()).unwrap();
        for c in [Coupling::Independent, Coupling::Nested] {
            let cs = CouplingStrategy::new(c, seq.clone()).unwrap();
            for seed in 0..20 {
                let p = sample_excursion_path(&cs, 200, seed).unwrap();
                assert_eq!(p.values, p.walk);
                assert!(p.events.iter().all(|&a| a));
            }
        }
    }

    #[test]
    fn nested_without_events_is_zero() {
        // p_1 = 1/2: seeds whose shared uniform lands above 1/2 kill every excursion.
        let seq = ProbSeq::constant(ratio(1, 2)).unwrap();
        let cs = CouplingStrategy::nested(seq).unwrap();
        let mut seen = 0;
        for seed in 0..40 {
            let u = PathRng::new(seed).next_f64();
            let p = sample_excursion_path(&cs, 100, seed).unwrap();
            if u >= 0.5 {
                seen += 1;
                assert!(p.values.iter().all(|&x| x == 0));
                assert!(p.occurred().is_empty());
            } else {
                assert_eq!(p.values, p.walk);
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn path_structure() {
        let cs = harmonic(Coupling::Independent);
        for seed in 0..50 {
            let p = sample_excursion_path(&cs, 128, seed).unwrap();
            assert_eq!(p.values.len(), 129);
            let zeros = p.walk[1..].iter().filter(|&&s| s == 0).count();
            assert_eq!(p.events.len(), zeros + 1);
            assert!(p.events[0]);
            let mut k = 0;
            for n in 1..=128 {
                let s = p.walk[n];
                assert_eq!((s - p.walk[n - 1]).abs(), 1);
                if s != 0 {
                    assert_eq!(p.values[n], if p.events[k] { s } else { 0 });
                } else {
                    assert_eq!(p.values[n], 0);
                    k += 1;
                }
            }
        }
    }

    #[test]
    fn independent_marginal_at_8() {
        let run = RunSpec::new(100_000, 20240601);
        let r = coupling_marginal_report(&harmonic(Coupling::Independent), 64, &[8], 0.01, &run).unwrap();
        assert!(r.all_pass(), "{:?}", r.rows_of("tv").collect::<Vec<_>>());
    }

    #[test]
    fn conditional_increments_are_centred() {
        let source = ExcursionSource::new(harmonic(Coupling::Nested), 48).unwrap();
        let inc = run_paths(&source, &RunSpec::new(20_000, 77), ConditionalIncrements::default).unwrap();
        assert!(inc.outliers(100).is_empty());
    }

    #[test]
    fn nested_tail_small() {
        let run = RunSpec::new(20_000, 5);
        let r = nested_tail_check(&ProbSeq::harmonic(), 4, &run).unwrap();
        let rows: Vec<_> = r.rows_of("tail").collect();
        assert_eq!(rows[0].estimate, 1.0);
        assert_eq!(rows[1].reference, Some(0.5));
        assert_eq!(rows[3].reference, Some(0.25));
        assert!(r.all_pass());
    }

    #[test]
    fn event_count_small() {
        let run = RunSpec::new(20_000, 6);
        let r = event_count_check(&harmonic(Coupling::Independent), 4, &run).unwrap();
        let count = r.rows_of("count").next().unwrap();
        assert!((count.reference.unwrap() - 25.0 / 12.0).abs() < 1e-12);
        assert!(r.all_pass());
    }

    #[test]
    fn deterministic_across_workers() {
        let source = ExcursionSource::new(harmonic(Coupling::Independent), 64).unwrap();
        let a = run_paths(&source, &RunSpec::new(3000, 9).with_workers(1), || MarginalCounts::new(&[8, 64])).unwrap();
        let b = run_paths(&source, &RunSpec::new(3000, 9).with_workers(3), || MarginalCounts::new(&[8, 64])).unwrap();
        assert_eq!(a, b);
        let plan = SeedPlan::new(9);
        assert_eq!(
            crate::montecarlo::sample_path(&source, &plan, 17),
            crate::montecarlo::sample_path(&source, &plan, 17)
        );
    }

    #[test]
    fn event_trace_csv() {
        let p = ExcursionPath { values: vec![0, 1, 0], walk: vec![0, 1, 0], events: vec![true, false] };
        let mut out = Vec::new();
        write_event_trace(&mut out, [(3, &p)]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "path_id,k,occurred\n3,1,1\n3,2,0\n");
    }
}
