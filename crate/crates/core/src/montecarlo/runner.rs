use rayon::prelude::*;

use super::rng::{PathRng, SeedPlan};
use crate::error::{Error, Result};

/// Something that can draw one path from a generator.
///
/// `Scratch` is per-worker state (caches) that never influences the values
/// drawn.
pub trait PathSource: Sync {
    type Path;
    type Scratch: Send;

    fn scratch(&self) -> Self::Scratch;

    fn sample(&self, scratch: &mut Self::Scratch, rng: &mut PathRng) -> Self::Path;
}

/// Order-independent reduction of sampled paths.
pub trait Accumulator<P>: Send {
    fn observe(&mut self, index: u64, path: &P);

    fn merge(&mut self, other: Self);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSpec {
    pub paths: u64,
    pub plan: SeedPlan,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl RunSpec {
    pub fn new(paths: u64, master_seed: u64) -> Self {
        RunSpec {
            paths,
            plan: SeedPlan::new(master_seed),
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// Path number `index` of a run; identical to what [`run_paths`] observes.
pub fn sample_path<S: PathSource>(source: &S, plan: &SeedPlan, index: u64) -> S::Path {
    let mut scratch = source.scratch();
    source.sample(&mut scratch, &mut plan.rng(index))
}

/// Samples paths `0..paths` in parallel and folds them into accumulators
/// created by `make`.
pub fn run_paths<S, A, F>(source: &S, run: &RunSpec, make: F) -> Result<A>
where
    S: PathSource,
    A: Accumulator<S::Path>,
    F: Fn() -> A + Sync + Send,
{
    if run.paths == 0 {
        return Err(Error::Invalid("at least one path is required".into()));
    }
    let plan = run.plan;
    let job = || {
        (0..run.paths)
            .into_par_iter()
            .fold(
                || (make(), source.scratch()),
                |(mut acc, mut scratch), i| {
                    let path = source.sample(&mut scratch, &mut plan.rng(i));
                    acc.observe(i, &path);
                    (acc, scratch)
                },
            )
            .map(|(acc, _)| acc)
            .reduce_with(|mut a, b| {
                a.merge(b);
                a
            })
            .expect("non-empty run")
    };
    match run.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}
