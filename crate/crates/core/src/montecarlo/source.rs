use std::collections::HashMap;

use super::rng::PathRng;
use super::runner::PathSource;
use crate::error::{Error, Result};
use crate::exactprob::ratio::to_f64;
use crate::exactprob::{Dist, State};
use crate::kernels::{Kernel, KERNEL_TIME_CAP};

/// Cumulative sampling table: atoms in ascending state order with running
/// `f64` totals.
type Table = Vec<(State, f64)>;

fn table(d: &Dist) -> Table {
    let mut acc = 0.0;
    d.atoms()
        .map(|(x, p)| {
            acc += to_f64(p);
            (x, acc)
        })
        .collect()
}

/// Returns the first atom whose cumulative mass exceeds `u`; rounding
/// leftovers fall on the last atom.
#[inline]
fn draw(t: &Table, u: f64) -> State {
    t.iter()
        .find(|(_, c)| u < *c)
        .unwrap_or_else(|| t.last().expect("non-empty row"))
        .0
}

/// Draws kernel chain paths `M_0..=M_horizon`, one uniform per step.
pub struct KernelSource<'k> {
    kernel: &'k dyn Kernel,
    horizon: u32,
    initial: Table,
}

impl<'k> KernelSource<'k> {
    pub fn new(kernel: &'k dyn Kernel, horizon: u32) -> Result<Self> {
        if horizon > KERNEL_TIME_CAP {
            return Err(Error::HorizonCap {
                horizon: horizon.into(),
                cap: KERNEL_TIME_CAP.into(),
            });
        }
        Ok(KernelSource {
            kernel,
            horizon,
            initial: table(&kernel.initial()),
        })
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }
}

impl PathSource for KernelSource<'_> {
    type Path = Vec<State>;
    type Scratch = HashMap<(u32, State), Table>;

    fn scratch(&self) -> Self::Scratch {
        HashMap::new()
    }

    fn sample(&self, cache: &mut Self::Scratch, rng: &mut PathRng) -> Vec<State> {
        let mut path = Vec::with_capacity(self.horizon as usize + 1);
        let mut x = draw(&self.initial, rng.next_f64());
        path.push(x);
        for n in 0..self.horizon {
            let t = cache
                .entry((n, x))
                .or_insert_with(|| table(&self.kernel.law(n, x)));
            x = draw(t, rng.next_f64());
            path.push(x);
        }
        path
    }
}
