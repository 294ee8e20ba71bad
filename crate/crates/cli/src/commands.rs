//! Subcommand implementations.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use serde::Serialize;

use zsa_core::export::{checks_csv, float17, level_svg, table_csv, to_json, zeros_csv};
use zsa_core::levelset::{trace_level_curve, ComponentClass, PrunedSum, ProfileOptions, TraceOptions};
use zsa_core::strips::{analytic_upper_bound, Analyzer, StripReport, TheoremCheck, TheoremId};
use zsa_core::zerofinder::find_zeros;
use zsa_core::{ComplexZero, Family, Rectangle, Verdict, ZeroCatalog};

use crate::cache::{CacheKey, ZeroCache, ZeroCacheEntry};
use crate::config::RunConfig;
use crate::output::{text_table, write_atomic};
use crate::{usage, BoundsArgs, Format, LevelsArgs, ProfileArgs, ReportArgs, Status, VerifyArgs, ZerosArgs};

/// A set of orders written as `3`, `3,5,7`, `3..8` (inclusive) or a mix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orders(pub Vec<u64>);

impl FromStr for Orders {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut set = BTreeSet::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad order {t:?}"));
            if let Some((a, b)) = part.split_once("..") {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if a > b {
                    return Err(format!("empty range {part:?}"));
                }
                set.extend(a..=b);
            } else {
                set.insert(num(part)?);
            }
        }
        if set.is_empty() {
            return Err("no orders given".into());
        }
        Ok(Orders(set.into_iter().collect()))
    }
}

fn open_cache(cfg: &RunConfig) -> Result<Option<ZeroCache>> {
    cfg.cache_dir.as_deref().map(ZeroCache::open).transpose()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn rect_array(r: &Rectangle) -> [f64; 4] {
    [r.x_min, r.x_max, r.y_min, r.y_max]
}

#[derive(Serialize)]
struct ZerosDoc<'a> {
    family: Family,
    n: u64,
    rect: [f64; 4],
    tol: f64,
    complete: bool,
    zeros: &'a [ComplexZero],
    unresolved: &'a [Rectangle],
}

pub fn zeros(cfg: &RunConfig, a: ZerosArgs) -> Result<Status> {
    let poly = a.family.build(a.n)?;
    let key = CacheKey::new(a.family, a.n, rect_array(&a.rect), cfg.tol);
    let cache = open_cache(cfg)?;
    let cached = cache.as_ref().and_then(|c| c.load(&key));
    let (zeros, unresolved) = match cached {
        Some(entry) => (entry.zeros, Vec::new()),
        None => match find_zeros(&poly, &a.rect, cfg.tol) {
            Ok(z) => {
                if let Some(c) = &cache {
                    c.store(&ZeroCacheEntry::new(key, z.clone()))?;
                }
                (z, Vec::new())
            }
            Err(zsa_core::Error::IncompleteEnumeration { found, unresolved }) => (found, unresolved),
            Err(e) => return Err(e.into()),
        },
    };
    let complete = unresolved.is_empty();
    let text = match a.format {
        Format::Csv => zeros_csv(a.family, a.n, &zeros)?,
        Format::Json => to_json(&ZerosDoc {
            family: a.family,
            n: a.n,
            rect: rect_array(&a.rect),
            tol: cfg.tol,
            complete,
            zeros: &zeros,
            unresolved: &unresolved,
        })?,
    };
    emit(a.out.as_deref(), &text)?;
    if let Some(p) = &a.out {
        eprintln!("{} zeros written to {}", zeros.len(), p.display());
    }
    if complete {
        Ok(Status::Ok)
    } else {
        eprintln!("warning: enumeration incomplete; unresolved boxes:");
        for r in &unresolved {
            eprintln!("  {r}");
        }
        Ok(Status::Incomplete)
    }
}

fn x0_tag(x0: f64) -> String {
    format!("{x0}").replace('-', "m")
}

pub fn levels(cfg: &RunConfig, a: LevelsArgs) -> Result<Status> {
    if a.n <= 2 {
        return Err(usage(format!("level curves need n > 2, got {}", a.n)));
    }
    let opts = TraceOptions {
        window: a.window,
        grid: a.grid.or(cfg.level_grid),
        snap: !a.no_snap,
        check_loops: !a.no_loop_check,
        tol: cfg.tol,
    };
    let an = trace_level_curve(a.n, a.x0, &opts)?;
    let json_path = a
        .out
        .clone()
        .unwrap_or_else(|| cfg.out_dir.join(format!("levels-n{}-x0{}.json", a.n, x0_tag(a.x0))));
    write_atomic(&json_path, to_json(&an)?.as_bytes())?;
    if let Some(svg) = &a.svg {
        write_atomic(svg, level_svg(&an).as_bytes())?;
    }
    let w = &an.window;
    println!(
        "n = {}, x0 = {}, level = {}, window = [{}, {}] x [{}, {}], grid = {}",
        an.n, an.x0, an.level, w.x_min, w.x_max, w.y_min, w.y_max, an.grid
    );
    for class in [
        ComponentClass::ClosedLoop,
        ComponentClass::OpenWithAsymptote,
        ComponentClass::SingleOpenCurve,
        ComponentClass::Clipped,
    ] {
        println!("{}: {}", class.as_str(), an.count(class));
    }
    match an.extremes.b_minus {
        Some(b) => println!("extremes: b_minus = {b}, b_plus = {}", an.extremes.b_plus),
        None => println!("extremes: b_plus = {}", an.extremes.b_plus),
    }
    if !an.real_axis_hits.is_empty() {
        let hits: Vec<String> = an.real_axis_hits.iter().map(|h| format!("{h:.12e}")).collect();
        println!("real-axis hits: {}", hits.join(", "));
    }
    let mut asymptotes: Vec<f64> = an.components.iter().flat_map(|c| c.asymptotes.iter().copied()).collect();
    asymptotes.sort_by(f64::total_cmp);
    if !asymptotes.is_empty() {
        let ys: Vec<String> = asymptotes.iter().map(|y| format!("{y:.6}")).collect();
        println!("asymptotes: y = {}", ys.join(", "));
    }
    for (k, c) in an.components.iter().enumerate() {
        if let (Some(wn), Some(z)) = (c.winding, c.zeros_inside) {
            println!("loop {k}: winding {wn}, {z} certified zeros inside");
        }
    }
    if !an.flagged_cells.is_empty() {
        eprintln!(
            "warning: {} saddle cells had a centre value too close to the level to decide; refine --grid",
            an.flagged_cells.len()
        );
    }
    println!("written: {}", json_path.display());
    Ok(Status::Ok)
}

pub fn profile(cfg: &RunConfig, a: ProfileArgs) -> Result<Status> {
    let g = PrunedSum::new(a.n)?;
    let opts = ProfileOptions {
        y_max: a.y_max.unwrap_or(cfg.profile_window),
        step: a.step,
    };
    let rows = zsa_core::par::map(&a.x, |&x| g.profile(x, &opts))
        .into_iter()
        .collect::<zsa_core::Result<Vec<_>>>()?;
    let text = match a.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|p| {
                    vec![
                        a.n.to_string(),
                        float17(p.x),
                        float17(p.m_hat),
                        float17(p.m_max),
                        float17(p.y_witness),
                        float17(p.refinement_meta.window_min),
                        float17(p.refinement_meta.torus_min),
                    ]
                })
                .collect();
            table_csv(
                &["n", "x", "m_hat", "M", "y_witness", "window_min", "torus_min"],
                &cells,
            )?
        }
    };
    emit(a.out.as_deref(), &text)?;
    Ok(Status::Ok)
}

/// An analyzer whose zero catalog is seeded from, and saved back to, the
/// cache.
struct Session {
    analyzer: Analyzer,
    cache: Option<ZeroCache>,
}

impl Session {
    fn new(cfg: &RunConfig, ns: &[u64]) -> Result<Self> {
        let cache = open_cache(cfg)?;
        let catalog = ZeroCatalog::new(cfg.tol);
        if let Some(c) = &cache {
            c.preload(&catalog, &Family::ALL, ns)?;
        }
        Ok(Session {
            analyzer: Analyzer::with_catalog(cfg.budgets(), catalog),
            cache,
        })
    }

    fn finish(&self) -> Result<()> {
        if let Some(c) = &self.cache {
            c.save_catalog(self.analyzer.catalog())
                .with_context(|| format!("cannot update cache {}", c.dir().display()))?;
        }
        Ok(())
    }
}

fn check_range(cfg: &RunConfig, ns: &[u64]) -> Result<()> {
    if let Some(&n) = ns.iter().find(|&&n| n < 2 || n > cfg.max_n) {
        return Err(usage(format!("order {n} outside the configured range 2..={}", cfg.max_n)));
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), float17)
}

pub fn bounds(cfg: &RunConfig, a: BoundsArgs) -> Result<Status> {
    let ns = a.n.0;
    check_range(cfg, &ns)?;
    let height = a.height.unwrap_or(cfg.bounds_height);
    if !(height > 0.0) {
        return Err(usage("height must be positive"));
    }
    let session = Session::new(cfg, &ns)?;
    let an = &session.analyzer;
    let rows = zsa_core::par::map(&ns, |&n| -> Result<Vec<String>> {
        let b = zsa_core::strips::empirical_bounds(an.catalog(), n, a.family, height)?;
        let projection = if n > 2 && a.family != Family::GStar {
            let p = an.projection(n)?;
            Some(if a.family == Family::Zeta { p.mirrored() } else { p })
        } else {
            None
        };
        let analytic = if n > 2 { Some(analytic_upper_bound(n)?) } else { None };
        Ok(vec![
            n.to_string(),
            a.family.to_string(),
            float17(height),
            b.map_or(0, |b| b.zeros).to_string(),
            opt(b.map(|b| b.a_hat)),
            opt(b.map(|b| b.b_hat)),
            opt(projection.as_ref().map(|p| p.x_lo)),
            opt(projection.as_ref().map(|p| p.x_hi)),
            opt(analytic),
        ])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    session.finish()?;
    let header = ["n", "family", "height", "zeros", "a_hat", "b_hat", "r_lo", "r_hi", "analytic_upper_G"];
    print!("{}", text_table(&header, &rows));
    if let Some(p) = &a.out {
        write_atomic(p, table_csv(&header, &rows)?.as_bytes())?;
    }
    Ok(Status::Ok)
}

pub fn verify(cfg: &RunConfig, a: VerifyArgs) -> Result<Status> {
    let ns = a.n.map_or_else(|| (3..=8).collect(), |o| o.0);
    let mut seen = BTreeSet::new();
    let ids: Vec<TheoremId> = a.theorems.into_iter().filter(|t| seen.insert(*t)).collect();
    let session = Session::new(cfg, &ns)?;
    let mut checks: Vec<TheoremCheck> = Vec::new();
    for id in ids {
        let targets: Vec<u64> = if id.per_n() {
            ns.iter().copied().filter(|&n| id.applies_to(n)).collect()
        } else {
            ns.clone()
        };
        if id.per_n() && targets.is_empty() {
            return Err(usage(format!("{id} does not apply to any of n = {ns:?}")));
        }
        checks.extend(session.analyzer.verify(id, &targets)?);
    }
    session.finish()?;
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.theorem.to_string(),
                c.n.map_or("-".into(), |n| n.to_string()),
                c.verdict.to_string(),
                c.detail.clone(),
            ]
        })
        .collect();
    print!("{}", text_table(&["theorem", "n", "verdict", "detail"], &rows));
    let csv_path = cfg.out_dir.join("verify.csv");
    write_atomic(&csv_path, checks_csv(&checks)?.as_bytes())?;
    let count = |v: Verdict| checks.iter().filter(|c| c.verdict == v).count();
    let (fails, open) = (count(Verdict::Fail), count(Verdict::Inconclusive));
    println!(
        "{} checks: {} pass, {fails} fail, {open} inconclusive{}",
        checks.len(),
        count(Verdict::Pass),
        if open > 0 { " (budget exhausted; not a failure)" } else { "" }
    );
    Ok(if fails > 0 { Status::Failed } else { Status::Ok })
}

const REPORT_HEADER: [&str; 18] = [
    "n",
    "family",
    "zeros",
    "a_hat",
    "b_hat",
    "r_lo",
    "r_hi",
    "delta_n",
    "analytic_upper_G",
    "worst_verdict",
    "comparison",
    "b_hat_zeta",
    "b_asymptotic",
    "a_hat_zeta_over_n",
    "minus_ln2",
    "ritt_sum_100",
    "ritt_sum_1000",
    "note",
];

fn worst(r: &StripReport) -> Verdict {
    r.verdicts
        .values()
        .copied()
        .filter(|v| *v != Verdict::ReportOnly)
        .fold(Verdict::Pass, Verdict::and)
}

fn report_row(r: &StripReport) -> Vec<String> {
    let ritt = |t: f64| opt(r.ritt_sums.iter().find(|s| s.0 == t).map(|s| s.1));
    let a = r.asymptotics;
    let p = &r.projection_interval;
    vec![
        r.n.to_string(),
        r.family.to_string(),
        r.empirical_bounds.map_or(0, |b| b.zeros).to_string(),
        opt(r.empirical_bounds.map(|b| b.a_hat)),
        opt(r.empirical_bounds.map(|b| b.b_hat)),
        float17(p.x_lo),
        float17(p.x_hi),
        opt(r.delta_n),
        opt(r.analytic_upper),
        if r.n == 2 { "-".into() } else { worst(r).to_string() },
        Verdict::ReportOnly.to_string(),
        opt(a.map(|a| a.b_hat_zeta)),
        opt(a.map(|a| a.b_asymptotic)),
        opt(a.map(|a| a.a_hat_zeta_over_n)),
        opt(a.map(|a| a.minus_ln2)),
        ritt(100.0),
        ritt(1000.0),
        if r.n == 2 { "degenerate: projection set is {0}".into() } else { String::new() },
    ]
}

fn report_path(dir: &Path, n: u64) -> PathBuf {
    dir.join(format!("report-n{n}.json"))
}

pub fn report(cfg: &RunConfig, a: ReportArgs) -> Result<Status> {
    let ns = a.n.0;
    check_range(cfg, &ns)?;
    if a.family == Family::GStar {
        return Err(usage("reports cover the zeta and G frames only"));
    }
    let session = Session::new(cfg, &ns)?;
    let reports = zsa_core::par::map(&ns, |&n| session.analyzer.report(n, a.family))
        .into_iter()
        .collect::<zsa_core::Result<Vec<_>>>()?;
    session.finish()?;
    for r in &reports {
        write_atomic(&report_path(&cfg.out_dir, r.n), to_json(r)?.as_bytes())?;
    }
    let rows: Vec<Vec<String>> = reports.iter().map(report_row).collect();
    write_atomic(&cfg.out_dir.join("report.csv"), table_csv(&REPORT_HEADER, &rows)?.as_bytes())?;
    let summary: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let a = r.asymptotics;
            let f = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.6}"));
            vec![
                r.n.to_string(),
                format!("[{:.6}, {:.6}]", r.projection_interval.x_lo, r.projection_interval.x_hi),
                f(r.delta_n),
                if r.n == 2 { "degenerate".into() } else { worst(r).to_string() },
                f(a.map(|a| a.b_hat_zeta)),
                f(a.map(|a| a.b_asymptotic)),
                f(a.map(|a| a.a_hat_zeta_over_n)),
            ]
        })
        .collect();
    print!(
        "{}",
        text_table(
            &["n", "projection", "delta_n", "verdict", "b_hat_zeta*", "b_asympt*", "a_hat/n*"],
            &summary
        )
    );
    println!("* report-only comparison with large-n asymptotics; no verdict is drawn");
    println!("written: {} and report.csv", cfg.out_dir.join("report-n*.json").display());
    let failed = reports.iter().any(|r| r.n > 2 && worst(r) == Verdict::Fail);
    Ok(if failed { Status::Failed } else { Status::Ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_parse() {
        assert_eq!("3..8".parse::<Orders>().unwrap().0, vec![3, 4, 5, 6, 7, 8]);
        assert_eq!("3,4".parse::<Orders>().unwrap().0, vec![3, 4]);
        assert_eq!("5, 3..=4,5".parse::<Orders>().unwrap().0, vec![3, 4, 5]);
        assert!("8..3".parse::<Orders>().is_err());
        assert!("x".parse::<Orders>().is_err());
        assert!("".parse::<Orders>().is_err());
    }
}
