//! Time-inhomogeneous transition kernels on the integers.
//!
//! Kernels are total functions of `(n, x)`: rows are defined even for pairs
//! the chain can never reach, such as `(0, ±1)`. Reachability is the forward
//! DP's business.

mod builtin;
mod custom;
mod verify;

pub use builtin::{
    alternating_kernel, holding_kernel, pn_qn, ssrw_kernel, Alternating, Holding, PnQn, Ssrw,
};
pub use custom::{CustomKernel, DefaultRow, KernelSpecFile, RowOverride};
pub use verify::{verify_martingale, MartingaleReport, Violation};

use crate::exactprob::{Dist, State};

/// Largest time index at which built-in rows can be evaluated; the jump
/// target `2^{n+1} - 1` must fit in a [`State`].
pub const KERNEL_TIME_CAP: u32 = 120;

/// A time-indexed transition law `(n, x) -> Dist` together with the law of
/// `M_0`.
pub trait Kernel: Send + Sync {
    fn name(&self) -> &str;

    fn initial(&self) -> Dist;

    /// Law of `M_{n+1}` given `M_n = x`.
    fn law(&self, n: u32, x: State) -> Dist;
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn initial(&self) -> Dist {
        (**self).initial()
    }
    fn law(&self, n: u32, x: State) -> Dist {
        (**self).law(n, x)
    }
}

impl<K: Kernel + ?Sized> Kernel for Box<K> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn initial(&self) -> Dist {
        (**self).initial()
    }
    fn law(&self, n: u32, x: State) -> Dist {
        (**self).law(n, x)
    }
}

/// Built-in kernel by name: `ssrw`, `alternating` or `holding`.
pub fn builtin(name: &str) -> Option<Box<dyn Kernel>> {
    match name {
        "ssrw" => Some(Box::new(Ssrw)),
        "alternating" => Some(Box::new(Alternating)),
        "holding" => Some(Box::new(Holding)),
        _ => None,
    }
}
