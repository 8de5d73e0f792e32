use num_traits::Zero;

use super::report::{McReport, McRow};
use super::runner::{run_paths, RunSpec};
use super::source::KernelSource;
use super::stats::{AbsorptionCounts, AlternationCounts, Estimate, MarginalCounts, PathStats};
use crate::error::{Error, Result};
use crate::exactprob::ratio::to_f64;
use crate::exactprob::{Rational, State};
use crate::kernels::Kernel;
use crate::marginals::{forward_marginals, MarginalFlow};
use crate::EXACT_HORIZON_CAP;

/// Largest total variation distance accepted between an empirical marginal
/// from `10^5` paths and its exact law.
pub const MARGINAL_TV_TOLERANCE: f64 = 0.02;

/// Which statistics [`kernel_report`] computes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KernelStats {
    pub marginal_times: Vec<u32>,
    /// Alternation rates for `n` in this range.
    pub alternation: Option<(u32, u32)>,
    /// Window for the absorption fraction.
    pub absorption: Option<(u32, u32)>,
}

impl KernelStats {
    fn name(&self) -> String {
        let mut parts = Vec::new();
        if !self.marginal_times.is_empty() {
            parts.push("empirical-marginal");
        }
        if self.alternation.is_some() {
            parts.push("alternation-rate");
        }
        if self.absorption.is_some() {
            parts.push("absorption-fraction");
        }
        parts.join(",")
    }

    /// Last time whose exact marginal is needed.
    fn exact_horizon(&self) -> u32 {
        let m = self.marginal_times.iter().copied().max().unwrap_or(0);
        let a = self.alternation.map_or(0, |(_, b)| b);
        let w = self.absorption.map_or(0, |(a, _)| a);
        m.max(a).max(w).min(EXACT_HORIZON_CAP)
    }
}

/// `P(M_{n+1} = -M_n | M_n ∈ {±1})`.
fn exact_alternation(kernel: &dyn Kernel, flow: &MarginalFlow, n: u32) -> Option<f64> {
    let mu = flow.mu.get(n as usize)?;
    let on = mu.mass_on(&[-1, 1]);
    if on.is_zero() {
        return None;
    }
    let flips: Rational = [-1, 1]
        .iter()
        .map(|&x: &State| mu.mass(x) * kernel.law(n, x).mass(-x))
        .sum();
    Some(to_f64(&(flips / on)))
}

/// Exact probability of staying at one value on `[a, b]`, as
/// `(any value, a value in {±1}, +1 among those)`.
fn exact_absorption(kernel: &dyn Kernel, flow: &MarginalFlow, (a, b): (u32, u32)) -> Option<[f64; 3]> {
    let mu = flow.mu.get(a as usize)?;
    let mut total = Rational::zero();
    let mut by_sign = [Rational::zero(), Rational::zero()];
    for (x, p) in mu.atoms() {
        let stay = (a..b).fold(p.clone(), |acc, n| acc * kernel.law(n, x).mass(x));
        if x == 1 || x == -1 {
            by_sign[usize::from(x == 1)] += &stay;
        }
        total += stay;
    }
    let pm1 = &by_sign[0] + &by_sign[1];
    let plus = if pm1.is_zero() { Rational::zero() } else { &by_sign[1] / &pm1 };
    Some([to_f64(&total), to_f64(&pm1), to_f64(&plus)])
}

fn checked(stat: &str, e: Estimate, reference: Option<f64>) -> McRow {
    let row = McRow::new(stat, e.value(), e.radius(), e.trials);
    match reference {
        Some(r) => row.against(r, e.within(r)),
        None => row,
    }
}

/// Samples the chain and compares each requested statistic with its exact
/// value where the exact flow reaches.
///
/// Rows: `tv` per marginal time (reference = [`MARGINAL_TV_TOLERANCE`]),
/// `mass` per atom (exact reference, no verdict), `alternation` per `n`,
/// and `absorption`, `absorption-pm1`, `absorbed-sign` (`x = ±1`) for the
/// window, all checked within `3σ`.
pub fn kernel_report(kernel: &dyn Kernel, horizon: u32, stats: &KernelStats, run: &RunSpec) -> Result<McReport> {
    let latest = stats
        .marginal_times
        .iter()
        .copied()
        .chain(stats.alternation.map(|(_, b)| b + 1))
        .chain(stats.absorption.map(|(_, b)| b))
        .max()
        .unwrap_or(0);
    if latest > horizon {
        return Err(Error::Invalid(format!("statistics need time {latest} past the horizon {horizon}")));
    }
    if let Some((a, b)) = stats.alternation.or(stats.absorption) {
        if a > b {
            return Err(Error::Invalid(format!("empty range [{a}, {b}]")));
        }
    }
    let source = KernelSource::new(kernel, horizon)?;
    let flow = forward_marginals(kernel, stats.exact_horizon())?;
    let acc = run_paths(&source, run, || PathStats {
        marginal: (!stats.marginal_times.is_empty()).then(|| MarginalCounts::new(&stats.marginal_times)),
        alternation: stats.alternation.map(|(_, b)| AlternationCounts::new(b)),
        absorption: stats.absorption.map(|(a, b)| AbsorptionCounts::new(a, b)),
    })?;
    let mut report = McReport::new(&stats.name(), kernel.name(), run.plan, run.paths, horizon.into());
    if let Some(m) = &acc.marginal {
        for &n in &stats.marginal_times {
            let emp = m.empirical(n).expect("tracked time");
            let exact = flow.mu.get(n as usize);
            if let Some(exact) = exact {
                let tv = emp.tv_to(exact);
                report.rows.push(
                    McRow::new("tv", tv, 0.0, emp.paths)
                        .at_n(n.into())
                        .against(MARGINAL_TV_TOLERANCE, tv <= MARGINAL_TV_TOLERANCE),
                );
            }
            let mut support: Vec<State> = emp.freq.keys().copied().collect();
            if let Some(exact) = exact {
                support.extend(exact.support());
                support.sort_unstable();
                support.dedup();
            }
            for x in support {
                let e = Estimate::new(m.count(n, x), emp.paths);
                let mut row = McRow::new("mass", e.value(), e.radius(), e.trials).at_n(n.into()).at_x(x);
                row.reference = exact.map(|d| to_f64(&d.mass(x)));
                report.rows.push(row);
            }
        }
    }
    if let (Some(alt), Some((a, b))) = (&acc.alternation, stats.alternation) {
        for n in a..=b {
            match alt.rate(n) {
                Ok(e) => report
                    .rows
                    .push(checked("alternation", e, exact_alternation(kernel, &flow, n)).at_n(n.into())),
                Err(Error::InsufficientData { observed, .. }) => {
                    report.rows.push(McRow::new("alternation", f64::NAN, f64::NAN, observed).at_n(n.into()))
                }
                Err(e) => return Err(e),
            }
        }
    }
    if let (Some(abs), Some(window)) = (&acc.absorption, stats.absorption) {
        let s = abs.summary();
        let exact = exact_absorption(kernel, &flow, window);
        let start = u64::from(window.0);
        report.rows.push(checked("absorption", s.constant, exact.map(|e| e[0])).at_n(start));
        report.rows.push(checked("absorption-pm1", s.constant_on_pm1, exact.map(|e| e[1])).at_n(start));
        let plus = s.plus_given_pm1;
        let minus = Estimate::new(plus.trials - plus.successes, plus.trials);
        let half = exact.map(|e| e[2]);
        report.rows.push(checked("absorbed-sign", plus, half).at_n(start).at_x(1));
        report.rows.push(checked("absorbed-sign", minus, half.map(|h| 1.0 - h)).at_n(start).at_x(-1));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{alternating_kernel, holding_kernel, ssrw_kernel};

    #[test]
    fn exact_references() {
        let k = alternating_kernel();
        let flow = forward_marginals(&k, 12).unwrap();
        for n in 1..12 {
            let r = exact_alternation(&k, &flow, n).unwrap();
            assert_eq!(r, 1.0 - (0.5f64).powi(n as i32));
        }
        let h = holding_kernel();
        let flow = forward_marginals(&h, 16).unwrap();
        let [all, pm1, plus] = exact_absorption(&h, &flow, (16, 64)).unwrap();
        assert_eq!(all, pm1);
        assert!((all - 0.58664).abs() < 5e-6);
        assert_eq!(plus, 0.5);
        assert!(exact_absorption(&ssrw_kernel(), &forward_marginals(&ssrw_kernel(), 4).unwrap(), (4, 8))
            .unwrap()[0]
            .is_zero());
    }

    #[test]
    fn small_run() {
        let stats = KernelStats {
            marginal_times: vec![4, 8],
            alternation: Some((2, 6)),
            absorption: Some((12, 16)),
        };
        let r = kernel_report(&holding_kernel(), 16, &stats, &RunSpec::new(20_000, 1)).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.statistic, "empirical-marginal,alternation-rate,absorption-fraction");
        assert_eq!(r.rows_of("alternation").count(), 5);
        assert!(kernel_report(&holding_kernel(), 10, &stats, &RunSpec::new(10, 1)).is_err());
    }
}
