use std::fs::File;
use std::io::{self, BufWriter, Write};

use martlab::delayedwalk::{build_schedule, delayed_walk_check, Schedule};
use martlab::excursion::{
    coupling_marginal_report, event_count_check, excursion_marginal, nested_tail_check,
    zero_window_fraction,
};
use martlab::exactprob::{abs_moment, format_ratio, ui_tail};
use martlab::kernels::verify_martingale;
use martlab::marginals::{
    check_structure, compare_flows, forward_marginals, MarginalFlow, StepVerdict, Structure,
};
use martlab::montecarlo::{kernel_report, KernelStats, McReport, McRow, MARGINAL_TV_TOLERANCE};
use serde_json::json;

use crate::config::{load_kernel, Chain, Format, Resolved};
use crate::error::{config_err, CliError, CliResult};

/// Default horizon of exact commands.
pub const EXACT_DEFAULT_HORIZON: u32 = 18;
/// Default horizon of sampling commands on kernels and excursions.
pub const MC_DEFAULT_HORIZON: u64 = 64;
/// Default number of events for the excursion tail and count checks.
pub const DEFAULT_EVENTS: u64 = 8;

fn open_output(cfg: &Resolved) -> CliResult<Box<dyn Write>> {
    Ok(match &cfg.out_path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            config_err(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(martlab::Error::from)?;
    writeln!(out)?;
    Ok(())
}

/// Exact flow of any chain that has one.
fn exact_flow(cfg: &Resolved, chain: &Chain, horizon: u32) -> CliResult<MarginalFlow> {
    match chain {
        Chain::Excursion => Ok(excursion_marginal(&cfg.prob_seq, horizon)?),
        Chain::DelayedWalk => Err(config_err(
            "the delayed walk has no exact marginals (they depend on a sampled schedule); use simulate",
        )),
        _ => {
            let k = load_kernel(chain, cfg.allow_nonmartingale, horizon)?;
            Ok(forward_marginals(k.as_ref(), horizon)?)
        }
    }
}

pub fn marginals(cfg: &Resolved) -> CliResult<()> {
    let chain = cfg.chain()?;
    let horizon = cfg.exact_horizon(EXACT_DEFAULT_HORIZON)?;
    let flow = exact_flow(cfg, chain, horizon)?;
    if !martlab::marginals::masses_normalized(&flow) {
        return Err(CliError::Failed("a marginal does not sum to one".into()));
    }
    let mut out = open_output(cfg)?;
    match cfg.format(Format::Csv) {
        Format::Csv => flow.write_csv(&mut out)?,
        Format::Json => write_json(&mut out, &serde_json::to_value(&flow).map_err(martlab::Error::from)?)?,
    }
    out.flush()?;
    Ok(())
}

pub fn compare(cfg: &Resolved, left: &str, right: &str) -> CliResult<()> {
    let horizon = cfg.exact_horizon(EXACT_DEFAULT_HORIZON)?;
    let a = exact_flow(cfg, &Chain::parse(left)?, horizon)?;
    let b = exact_flow(cfg, &Chain::parse(right)?, horizon)?;
    let cmp = compare_flows(&a, &b)?;
    let mut out = open_output(cfg)?;
    match cfg.format(Format::Csv) {
        Format::Json => write_json(&mut out, &serde_json::to_value(&cmp).map_err(martlab::Error::from)?)?,
        Format::Csv => match cmp.first_difference() {
            None => writeln!(out, "EQUAL {left} {right} horizon={horizon}")?,
            Some((n, StepVerdict::Differ { tv, first })) => writeln!(
                out,
                "DIFFER {left} {right} n={n} x={} left={} right={} tv={}",
                first.x,
                format_ratio(&first.left),
                format_ratio(&first.right),
                format_ratio(tv)
            )?,
            Some((_, StepVerdict::Equal)) => unreachable!("first difference is never equal"),
        },
    }
    out.flush()?;
    if cmp.all_equal() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{left} and {right} differ")))
    }
}

pub fn verify(cfg: &Resolved) -> CliResult<()> {
    let chain = cfg.chain()?;
    let mut out = open_output(cfg)?;
    let format = cfg.format(Format::Csv);
    let mut lines: Vec<String> = Vec::new();
    let mut doc = serde_json::Map::new();
    let mut pass = true;
    match chain {
        Chain::DelayedWalk => {
            let s = build_schedule(cfg.crossings, &cfg.eps_rule)?;
            s.validate()?;
            lines.push(format!("schedule: {} times, certificates hold", s.len()));
            doc.insert("schedule".into(), serde_json::to_value(&s).map_err(martlab::Error::from)?);
        }
        Chain::Excursion => {
            let horizon = cfg.exact_horizon(EXACT_DEFAULT_HORIZON)?;
            let flow = excursion_marginal(&cfg.prob_seq, horizon)?;
            let s = Structure { symmetric: true, support_bound: Some(|n| u128::from(n)), ..Default::default() };
            let v = check_structure(&flow, &s);
            pass &= v.is_empty();
            lines.push(format!("structure: {} violations", v.len()));
            lines.extend(v.iter().map(|v| format!("violation {} n={}", v.check, v.n)));
            doc.insert("structure".into(), serde_json::to_value(&v).map_err(martlab::Error::from)?);
        }
        Chain::Builtin(_) | Chain::Custom(_) => {
            let horizon = cfg.exact_horizon(EXACT_DEFAULT_HORIZON)?;
            let k = load_kernel(chain, true, horizon)?;
            let report = verify_martingale(k.as_ref(), horizon)?;
            pass &= report.passed();
            lines.push(format!(
                "martingale: {} rows checked, {} violations",
                report.checked,
                report.violations.len()
            ));
            lines.extend(report.violations.iter().map(|v| {
                format!("violation n={} x={} mean={}", v.n, v.x, format_ratio(&v.mean))
            }));
            doc.insert("martingale".into(), serde_json::to_value(&report).map_err(martlab::Error::from)?);
            let structure = match chain {
                Chain::Builtin(name) => Structure::for_builtin(name).unwrap_or_default(),
                _ => Structure::default(),
            };
            if report.passed() || cfg.allow_nonmartingale {
                let flow = forward_marginals(k.as_ref(), horizon)?;
                let v = check_structure(&flow, &structure);
                pass &= v.is_empty() || !report.passed();
                lines.push(format!("structure: {} violations", v.len()));
                lines.extend(v.iter().map(|v| format!("violation {} n={}", v.check, v.n)));
                doc.insert("structure".into(), serde_json::to_value(&v).map_err(martlab::Error::from)?);
            }
        }
    }
    lines.push(if pass { "PASS".into() } else { "FAIL".into() });
    doc.insert("pass".into(), pass.into());
    match format {
        Format::Csv => {
            for l in &lines {
                writeln!(out, "{l}")?;
            }
        }
        Format::Json => write_json(&mut out, &serde_json::Value::Object(doc))?,
    }
    out.flush()?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed("verification failed".into()))
    }
}

/// Options of `simulate` beyond the run configuration.
#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    pub times: Option<Vec<u32>>,
    pub window: Option<(u32, u32)>,
    pub alternation: Option<(u32, u32)>,
    pub events: Option<u64>,
    pub check: bool,
}

fn stat_list(cfg: &Resolved, default: &[&str], allowed: &[&str]) -> CliResult<Vec<String>> {
    let stats: Vec<String> = match &cfg.stats {
        Some(s) => s.clone(),
        None => default.iter().map(|s| s.to_string()).collect(),
    };
    for s in &stats {
        if !allowed.contains(&s.as_str()) {
            return Err(config_err(format!("statistic {s:?} is not available here (choose from {allowed:?})")));
        }
    }
    Ok(stats)
}

fn narrow(h: u64) -> CliResult<u32> {
    u32::try_from(h).map_err(|_| config_err(format!("horizon {h} is too large")))
}

pub fn simulate(cfg: &Resolved, opts: &SimulateOptions) -> CliResult<()> {
    let chain = cfg.chain()?;
    let run = cfg.run_spec();
    let report = match chain {
        Chain::Builtin(_) | Chain::Custom(_) => {
            let h = narrow(cfg.horizon.unwrap_or(MC_DEFAULT_HORIZON))?;
            let stats = stat_list(
                cfg,
                &["empirical-marginal", "alternation-rate", "absorption-fraction"],
                &["empirical-marginal", "alternation-rate", "absorption-fraction"],
            )?;
            let has = |s: &str| stats.iter().any(|x| x == s);
            let k = load_kernel(chain, cfg.allow_nonmartingale, h)?;
            let req = KernelStats {
                marginal_times: if has("empirical-marginal") {
                    opts.times.clone().unwrap_or_else(|| (1..=h.min(EXACT_DEFAULT_HORIZON)).collect())
                } else {
                    Vec::new()
                },
                alternation: has("alternation-rate")
                    .then(|| opts.alternation.unwrap_or((1, h.saturating_sub(1)))),
                absorption: has("absorption-fraction").then(|| opts.window.unwrap_or((h - h / 4, h))),
            };
            kernel_report(k.as_ref(), h, &req, &run)?
        }
        Chain::Excursion => {
            let h = narrow(cfg.horizon.unwrap_or(MC_DEFAULT_HORIZON))?;
            let all = ["empirical-marginal", "tail-check", "event-count", "absorption-fraction"];
            let stats = stat_list(cfg, &["empirical-marginal", "tail-check", "event-count"], &all)?;
            let cs = cfg.coupling_strategy()?;
            let events = opts.events.unwrap_or(DEFAULT_EVENTS);
            let source = format!("excursion:{}", cs.coupling);
            let mut report = McReport::new(&stats.join(","), &source, run.plan, run.paths, h.into());
            for s in &stats {
                match s.as_str() {
                    "empirical-marginal" => {
                        let times = opts.times.clone().unwrap_or_else(|| vec![8, 16, 32].into_iter().filter(|&n| n <= h).collect());
                        report.rows.extend(coupling_marginal_report(&cs, h, &times, MARGINAL_TV_TOLERANCE, &run)?.rows);
                    }
                    "tail-check" => report.rows.extend(nested_tail_check(&cs.seq, events, &run)?.rows),
                    "event-count" => report.rows.extend(event_count_check(&cs, events, &run)?.rows),
                    "absorption-fraction" => {
                        let e = zero_window_fraction(&cs, h, &run)?;
                        report.rows.push(
                            McRow::new("zero-window", e.value(), e.radius(), e.trials).at_n((h - h / 4).into()),
                        );
                    }
                    _ => unreachable!("checked above"),
                }
            }
            report
        }
        Chain::DelayedWalk => {
            let stats = stat_list(cfg, &["alternation-rate", "occupancy"], &["alternation-rate", "occupancy"])?;
            let s = build_schedule(cfg.crossings, &cfg.eps_rule)?;
            let h = cfg.horizon.unwrap_or(s.last_time());
            let full = delayed_walk_check(&s, h, &run)?;
            let keep = |stat: &str| match stat {
                "alternation" | "occupancy-at-t" => stats.iter().any(|x| x == "alternation-rate"),
                "occupancy" | "occupancy-flags" => stats.iter().any(|x| x == "occupancy"),
                _ => true,
            };
            let mut report = McReport::new(&stats.join(","), "delayedwalk", run.plan, run.paths, h);
            report.rows = full.rows.into_iter().filter(|r| keep(&r.stat)).collect();
            report
        }
    };
    let mut out = open_output(cfg)?;
    match cfg.format(Format::Csv) {
        Format::Csv => report.write_csv(&mut out)?,
        Format::Json => out.write_all(report.to_json()?.as_bytes())?,
    }
    out.flush()?;
    if opts.check && !report.all_pass() {
        return Err(CliError::Failed(format!(
            "{} rows outside their tolerance",
            report.failures().count()
        )));
    }
    Ok(())
}

pub fn probe(cfg: &Resolved, p: u32, ys: &[u128]) -> CliResult<()> {
    let chain = cfg.chain()?;
    let horizon = cfg.exact_horizon(EXACT_DEFAULT_HORIZON)?;
    let flow = exact_flow(cfg, chain, horizon)?;
    let mut out = open_output(cfg)?;
    match cfg.format(Format::Csv) {
        Format::Csv => {
            let mut header = vec!["n".to_string(), format!("abs_moment_{p}")];
            header.extend(ys.iter().map(|y| format!("ui_tail_{y}")));
            writeln!(out, "{}", header.join(","))?;
            for (n, mu) in flow.mu.iter().enumerate() {
                let mut row = vec![n.to_string(), format_ratio(&abs_moment(mu, p))];
                row.extend(ys.iter().map(|&y| format_ratio(&ui_tail(mu, y))));
                writeln!(out, "{}", row.join(","))?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = flow
                .mu
                .iter()
                .enumerate()
                .map(|(n, mu)| {
                    let tails: serde_json::Map<_, _> = ys
                        .iter()
                        .map(|&y| (y.to_string(), format_ratio(&ui_tail(mu, y)).into()))
                        .collect();
                    json!({"n": n, "p": p, "abs_moment": format_ratio(&abs_moment(mu, p)), "ui_tail": tails})
                })
                .collect();
            write_json(&mut out, &rows.into())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn schedule(cfg: &Resolved) -> CliResult<()> {
    let s: Schedule = build_schedule(cfg.crossings, &cfg.eps_rule)?;
    let mut out = open_output(cfg)?;
    match cfg.format(Format::Json) {
        Format::Json => out.write_all(s.to_json()?.as_bytes())?,
        Format::Csv => {
            writeln!(out, "k,eps_k,L*_k,t_k,certificate_lhs,certificate_rhs")?;
            let opt = |r: &Option<martlab::Rational>| r.as_ref().map(format_ratio).unwrap_or_default();
            for e in s.entries() {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    e.k,
                    format_ratio(&e.eps_k),
                    e.l_star.map(|l| l.to_string()).unwrap_or_default(),
                    e.t_k,
                    opt(&e.certificate_lhs),
                    opt(&e.certificate_rhs)
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
