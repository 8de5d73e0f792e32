use super::schedule::Schedule;
use crate::error::{Error, Result};
use crate::exactprob::State;
use crate::montecarlo::{PathRng, PathSource};

/// A stretch of a delayed-walk path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    /// `M_n = value` for `n` in `start..start + len`.
    Hold { start: u64, len: u64, value: i64 },
    /// Walk steps after time `start`, where `M_start = from`: bit `i` of
    /// `bits` is the step into time `start + i + 1` (1 up, 0 down),
    /// for `i < len ≤ 64`.
    Steps { start: u64, from: i64, bits: u64, len: u32 },
}

impl Piece {
    /// First and last time covered.
    pub fn span(&self) -> (u64, u64) {
        match *self {
            Piece::Hold { start, len, .. } => (start, start + len - 1),
            Piece::Steps { start, len, .. } => (start + 1, start + u64::from(len)),
        }
    }

    fn value_at(&self, n: u64) -> i64 {
        match *self {
            Piece::Hold { value, .. } => value,
            Piece::Steps { start, from, bits, .. } => {
                let i = (n - start) as u32;
                let mask = if i == 64 { u64::MAX } else { (1u64 << i) - 1 };
                from + 2 * i64::from((bits & mask).count_ones()) - i64::from(i)
            }
        }
    }

    fn last_value(&self) -> i64 {
        self.value_at(self.span().1)
    }
}

/// One path `M_0..=M_horizon` of the delayed walk, stored as pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayedPath {
    horizon: u64,
    pieces: Vec<Piece>,
    crossing_start: Vec<u64>,
    crossing_end: Vec<Option<u64>>,
}

impl DelayedPath {
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// `M_1 ∈ {±1}`.
    pub fn m1(&self) -> State {
        self.value_at(1)
    }

    /// Times at which crossing `k` took its first step.
    pub fn crossing_start(&self) -> &[u64] {
        &self.crossing_start
    }

    /// Times at which crossing `k` reached its target, if before the horizon.
    pub fn crossing_end(&self) -> &[Option<u64>] {
        &self.crossing_end
    }

    pub fn value_at(&self, n: u64) -> State {
        assert!(n <= self.horizon, "time {n} is past the horizon {}", self.horizon);
        let i = self.pieces.partition_point(|p| p.span().1 < n);
        self.pieces[i].value_at(n).into()
    }

    /// Materializes `M_0..=M_n`.
    pub fn values_upto(&self, n: u64) -> Vec<State> {
        (0..=n.min(self.horizon)).map(|t| self.value_at(t)).collect()
    }

    /// Pieces tile `0..=horizon` with no jumps larger than one.
    pub fn increments_bounded(&self) -> bool {
        let mut next = 0;
        let mut last: Option<i64> = None;
        for p in &self.pieces {
            let (a, b) = p.span();
            if a != next || b < a {
                return false;
            }
            let first = p.value_at(a);
            let from = match *p {
                Piece::Steps { from, .. } => Some(from),
                Piece::Hold { .. } => None,
            };
            match (last, from) {
                (Some(l), Some(f)) if l != f => return false,
                (Some(l), None) if (first - l).abs() > 1 => return false,
                _ => {}
            }
            last = Some(p.last_value());
            next = b + 1;
        }
        next == self.horizon + 1
    }

    /// Maximal time intervals `[a, b]` on which `M_n ∉ {±1}`.
    pub fn off_pm1_intervals(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = Vec::new();
        let mut push = |a: u64, b: u64| match out.last_mut() {
            Some(last) if last.1 + 1 == a => last.1 = b,
            _ => out.push((a, b)),
        };
        for p in &self.pieces {
            let (a, b) = p.span();
            match *p {
                Piece::Hold { value, .. } => {
                    if value.abs() != 1 {
                        push(a, b);
                    }
                }
                Piece::Steps { from, bits, len, .. } => {
                    if from.abs() > i64::from(len) + 1 {
                        push(a, b);
                        continue;
                    }
                    let mut x = from;
                    for i in 0..len {
                        x += if bits >> i & 1 == 1 { 1 } else { -1 };
                        if x.abs() != 1 {
                            push(a + u64::from(i), a + u64::from(i));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Draws delayed-walk paths for a schedule.
///
/// `M_0 = 0` and `M_1 = ±1`. Crossing `k` (for `k < K`) starts at a time
/// uniform on the integers of `[t_{k+1}/2, t_{k+1})`, drawn once crossing
/// `k - 1` has finished, or right away if that time has already passed.
/// It then follows a simple walk until it reaches the opposite sign. After
/// the last crossing the path holds.
#[derive(Debug, Clone)]
pub struct DelayedSource {
    times: Vec<u64>,
    horizon: u64,
}

impl DelayedSource {
    pub fn new(schedule: &Schedule, horizon: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Invalid("horizon must be at least 1".into()));
        }
        schedule.validate()?;
        Ok(DelayedSource {
            times: schedule.times(),
            horizon,
        })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }
}

impl PathSource for DelayedSource {
    type Path = DelayedPath;
    type Scratch = ();

    fn scratch(&self) {}

    fn sample(&self, _: &mut (), rng: &mut PathRng) -> DelayedPath {
        let horizon = self.horizon;
        let up = rng.next_u64() & 1;
        let mut pieces = vec![
            Piece::Hold { start: 0, len: 1, value: 0 },
            Piece::Steps { start: 0, from: 0, bits: up, len: 1 },
        ];
        let mut pos: i64 = if up == 1 { 1 } else { -1 };
        // Last covered time.
        let mut now = 1u64;
        let mut crossing_start = Vec::new();
        let mut crossing_end = Vec::new();
        for &t_next in &self.times[1..] {
            let half = t_next / 2;
            let start = (half + rng.below(half)).max(now);
            if start >= horizon {
                break;
            }
            if start > now {
                pieces.push(Piece::Hold { start: now + 1, len: start - now, value: pos });
                now = start;
            }
            crossing_start.push(now);
            let target = -pos;
            let mut end = None;
            while now < horizon {
                let room = horizon - now;
                let bits = rng.next_u64();
                if (pos - target).abs() > 64 && room >= 64 {
                    pieces.push(Piece::Steps { start: now, from: pos, bits, len: 64 });
                    pos += 2 * i64::from(bits.count_ones()) - 64;
                    now += 64;
                    continue;
                }
                let from = pos;
                let mut used = 0u32;
                while u64::from(used) < room.min(64) {
                    pos += if bits >> used & 1 == 1 { 1 } else { -1 };
                    used += 1;
                    if pos == target {
                        break;
                    }
                }
                pieces.push(Piece::Steps { start: now, from, bits, len: used });
                now += u64::from(used);
                if pos == target {
                    end = Some(now);
                    break;
                }
            }
            crossing_end.push(end);
            if end.is_none() {
                break;
            }
        }
        if now < horizon {
            pieces.push(Piece::Hold { start: now + 1, len: horizon - now, value: pos });
        }
        DelayedPath {
            horizon,
            pieces,
            crossing_start,
            crossing_end,
        }
    }
}

/// Path drawn from `seed` directly, up to `horizon`.
pub fn sample_delayed_path(schedule: &Schedule, horizon: u64, seed: u64) -> Result<DelayedPath> {
    let source = DelayedSource::new(schedule, horizon)?;
    Ok(source.sample(&mut (), &mut PathRng::new(seed)))
}
