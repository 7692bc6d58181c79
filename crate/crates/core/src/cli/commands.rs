//! The six experiment commands. Each builds its tables and collects the checks that
//! failed; the caller decides what those mean for the exit code.

use serde_json::json;

use super::config::{section, DataSection, ExperimentConfig, GridSection};
use super::output::{num, opt, write_ndjson, Table};
use super::CliError;
use crate::admissibility::{admissible_interval, loss_of_decay_weights, Effect, PInterval, TheoremId};
use crate::kernel_analysis::{
    fit_power_law, kernel_norm_series, log_times, Band, Kernel, Observable, QuadConfig, TimeRegime,
    LARGE_T_WINDOW, SMALL_T_WINDOW,
};
use crate::params::ModelParams;
use crate::par;
use crate::rational::{fmt_q, qi, to_f64, Q};
use crate::spectral::{
    default_gevrey_constant, gevrey_energy, semilinear_solve, Field, LinearPropagator, Nonlinearity,
    SemilinearConfig, Space, TorusGrid,
};
use crate::toolkit::{duhamel_bound, duhamel_integral, faa_di_bruno_partitions, DuhamelBranch};

/// Files produced by a command plus the checks it failed.
#[derive(Debug, Default)]
pub struct Report {
    /// `(file name, contents)`; the first entry goes to stdout when no directory is given.
    pub outputs: Vec<(String, Vec<u8>)>,
    /// Failures that always make the run exit with status 2.
    pub failures: Vec<String>,
    /// Failures that count only under `--strict`.
    pub warnings: Vec<String>,
}

impl Report {
    fn table(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let mut buf = Vec::new();
        table.write(&mut buf)?;
        self.outputs.push((name.to_string(), buf));
        Ok(())
    }
}

fn theorem(name: &str) -> Result<TheoremId, CliError> {
    TheoremId::parse(name).ok_or_else(|| CliError::Config(format!("unknown theorem {name:?}")))
}

pub fn admissible(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let sec = section(&cfg.admissible, "admissible")?;
    let mut cases = Vec::new();
    if !sec.theorems.is_empty() {
        let p = cfg.params()?;
        for name in &sec.theorems {
            cases.push((theorem(name)?, p.clone()));
        }
    }
    for c in &sec.cases {
        c.params.require_standing().map_err(|e| CliError::Config(e.to_string()))?;
        cases.push((theorem(&c.theorem)?, c.params.clone()));
    }
    if cases.is_empty() {
        return Err(CliError::Config("the theorem list is empty".into()));
    }
    let evaluated = par::try_map(&cases, |(th, p)| {
        let iv = admissible_interval(*th, p)?;
        let eps = eps_values(*th, p, &iv, sec.eps_extra);
        Ok((iv, eps))
    })?;

    let mut table = Table::new(&[
        "theorem",
        "interval",
        "lower",
        "lower_closed",
        "upper",
        "upper_closed",
        "empty",
        "gate_failed",
        "failed",
        "eps1",
        "eps2",
        "eps3",
        "eps4",
    ]);
    let mut json_rows = Vec::new();
    let mut report = Report::default();
    for ((th, p), (iv, eps)) in cases.iter().zip(&evaluated) {
        let gate_failed = gate_failed(iv);
        if gate_failed {
            report.warnings.push(format!("{th}: gate failed ({})", iv.failed.join("; ")));
        }
        let eps_cells: Vec<String> = match eps {
            Some(e) => e.iter().map(fmt_q).collect(),
            None => vec![String::new(); 4],
        };
        let mut cells = vec![
            th.to_string(),
            iv.to_string(),
            fmt_q(&iv.lower.value),
            iv.lower.closed.to_string(),
            iv.upper.as_ref().map(|u| fmt_q(&u.value)).unwrap_or_else(|| "inf".into()),
            iv.upper.as_ref().map(|u| u.closed.to_string()).unwrap_or_else(|| "false".into()),
            iv.empty.to_string(),
            gate_failed.to_string(),
            iv.failed.join("; "),
        ];
        cells.extend(eps_cells);
        table.push(Some(p), cells);
        json_rows.push(json!({
            "theorem": th.to_string(),
            "params": p,
            "interval": iv.to_string(),
            "lower": iv.lower,
            "upper": iv.upper,
            "empty": iv.empty,
            "gate_failed": gate_failed,
            "failed": iv.failed,
            "active_constraints": iv.active,
            "eps": eps.as_ref().map(|e| e.iter().map(fmt_q).collect::<Vec<_>>()),
        }));
    }
    report.table("admissible.csv", &table)?;
    let mut buf = Vec::new();
    write_ndjson(&mut buf, &json_rows)?;
    report.outputs.push(("admissible.ndjson".into(), buf));
    Ok(report)
}

fn gate_failed(iv: &PInterval) -> bool {
    iv.active
        .iter()
        .any(|c| matches!(c.effect, Effect::Gate { holds: false }))
}

/// Loss-of-decay constants at the configured `p`, or at a point of the interval.
fn eps_values(th: TheoremId, params: &ModelParams, iv: &PInterval, extra: Q) -> Option<[Q; 4]> {
    let p = params.p.or_else(|| iv.interior_point())?;
    let mut with_p = params.clone();
    with_p.p = Some(p);
    loss_of_decay_weights(th, &with_p, extra).ok().map(|w| w.eps)
}

fn build_data(params: &ModelParams, grid: &GridSection, data: &DataSection) -> Result<(Field, Field), CliError> {
    if !(data.width > 0.0 && data.width.is_finite()) {
        return Err(CliError::Config(format!("data width must be > 0, got {}", data.width)));
    }
    let g = TorusGrid::new(params.n as usize, grid.points, grid.half_length)?;
    let field = |amp: f64| {
        if amp == 0.0 {
            Field::zeros(&g, Space::Physical)
        } else {
            Field::gaussian(&g, amp, data.width)
        }
    };
    Ok((field(data.u0), field(data.u1)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Probe {
    UL2,
    ULq,
    UtL2,
}

impl Probe {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "u_l2" => Ok(Self::UL2),
            "u_lq" => Ok(Self::ULq),
            "ut_l2" => Ok(Self::UtL2),
            _ => Err(CliError::Config(format!("unknown observable {s:?}; use u_l2, u_lq or ut_l2"))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::UL2 => "u_l2",
            Self::ULq => "u_lq",
            Self::UtL2 => "ut_l2",
        }
    }

    fn exponent(self, params: &ModelParams) -> Q {
        match self {
            Self::ULq => params.q,
            _ => qi(2),
        }
    }
}

/// Predicted exponent of one observable: the slowest rate among the data that are present.
fn predicted(probe: Probe, data: &DataSection, regime: TimeRegime, params: &ModelParams) -> Result<f64, CliError> {
    let inv_r = qi(1) + qi(1) / probe.exponent(params) - qi(1) / params.m;
    if inv_r < qi(0) || inv_r > qi(1) {
        return Err(CliError::Config(format!(
            "no Young exponent for {} with m = {}",
            probe.name(),
            fmt_q(&params.m)
        )));
    }
    let (from_u0, from_u1) = match probe {
        Probe::UtL2 => (Observable::UtFromU0, Observable::UtFromU1),
        _ => (Observable::UFromU0, Observable::UFromU1),
    };
    let mut sources = Vec::new();
    if data.u0 != 0.0 || data.u1 == 0.0 {
        sources.push(from_u0);
    }
    if data.u1 != 0.0 {
        sources.push(from_u1);
    }
    let mut best = f64::NEG_INFINITY;
    for obs in sources {
        let e = crate::kernel_analysis::theoretical_exponent(obs, qi(0), regime, inv_r, params)?;
        best = best.max(to_f64(&e));
    }
    Ok(best)
}

pub fn decay_fit(cfg: &ExperimentConfig, tol: Option<f64>) -> Result<Report, CliError> {
    let params = cfg.params()?;
    let sec = section(&cfg.decay_fit, "decay_fit")?;
    let tol = tol.unwrap_or(sec.tol);
    let [lo, hi] = sec.window;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(CliError::Config(format!("bad time window [{lo}, {hi}]")));
    }
    if sec.samples < 5 {
        return Err(CliError::Config(format!("a fit needs ≥ 5 samples, got {}", sec.samples)));
    }
    let probes = sec
        .observables
        .iter()
        .map(|s| Probe::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    if probes.is_empty() {
        return Err(CliError::Config("the observable list is empty".into()));
    }
    let (u0, u1) = build_data(params, &sec.grid, &sec.data)?;
    let prop = LinearPropagator::new(&u0, &u1, params)?;
    let times = log_times((lo, hi), sec.samples);
    let measured = par::try_map(&times, |&t| {
        let snap = prop.at(t)?;
        let mut values = Vec::with_capacity(probes.len());
        for probe in &probes {
            values.push(match probe {
                Probe::UL2 => snap.u.l2_norm(),
                Probe::ULq => snap.u.lq_norm(to_f64(&params.q))?,
                Probe::UtL2 => snap.ut.l2_norm(),
            });
        }
        Ok((values, snap.u.edge_mass_fraction(sec.edge_radius)))
    })?;
    let regime = if lo >= 1.0 { TimeRegime::LargeT } else { TimeRegime::SmallT };
    let max_edge = measured.iter().map(|m| m.1).fold(0.0, f64::max);
    let wrapped = max_edge > sec.edge_limit;

    let mut report = Report::default();
    if wrapped {
        report.warnings.push(format!(
            "wrap-around monitor: {max_edge:e} of the L² mass lies beyond {} L",
            sec.edge_radius
        ));
    }
    let mut summary = Table::new(&[
        "observable",
        "u0",
        "u1",
        "t_min",
        "t_max",
        "samples",
        "fitted",
        "theoretical",
        "rel_err",
        "tol",
        "max_edge_mass",
        "wrap_flag",
        "status",
    ]);
    let mut series = Table::new(&["observable", "t", "norm", "edge_mass"]);
    for (k, probe) in probes.iter().enumerate() {
        let values: Vec<f64> = measured.iter().map(|m| m.0[k]).collect();
        for (t, (v, m)) in times.iter().zip(values.iter().zip(&measured)) {
            series.push(Some(params), vec![probe.name().into(), num(*t), num(*v), num(m.1)]);
        }
        let theory = predicted(*probe, &sec.data, regime, params)?;
        let (fitted, rel_err, status) = if values.iter().all(|v| *v > 0.0 && v.is_finite()) {
            let fit = fit_power_law(&times, &values)?;
            let err = (fit.exponent - theory).abs() / theory.abs().max(f64::MIN_POSITIVE);
            let ok = err <= tol;
            if !ok {
                report.failures.push(format!(
                    "{}: fitted exponent {} vs {theory}, relative error {err} > {tol}",
                    probe.name(),
                    fit.exponent
                ));
            }
            (Some(fit.exponent), Some(err), if ok { "pass" } else { "fail" })
        } else {
            (None, None, "skipped")
        };
        summary.push(
            Some(params),
            vec![
                probe.name().into(),
                num(sec.data.u0),
                num(sec.data.u1),
                num(lo),
                num(hi),
                sec.samples.to_string(),
                opt(fitted),
                num(theory),
                opt(rel_err),
                num(tol),
                num(max_edge),
                wrapped.to_string(),
                status.into(),
            ],
        );
    }
    report.table("decay_fit.csv", &summary)?;
    report.table("decay_fit_series.csv", &series)?;
    Ok(report)
}

pub fn kernel_norm(cfg: &ExperimentConfig, tol: Option<f64>) -> Result<Report, CliError> {
    let params = cfg.params()?;
    let sec = section(&cfg.kernel_norm, "kernel_norm")?;
    let tol = tol.unwrap_or(sec.tol);
    let kernel: Kernel = sec.kernel.parse()?;
    let band: Band = sec.band.parse()?;
    let regime: TimeRegime = sec.regime.parse()?;
    let window = match (sec.window, regime) {
        (Some([a, b]), _) => (a, b),
        (None, TimeRegime::SmallT) => SMALL_T_WINDOW,
        (None, TimeRegime::LargeT) => LARGE_T_WINDOW,
    };
    if !(window.0 > 0.0 && window.1 > window.0 && window.1.is_finite()) {
        return Err(CliError::Config(format!("bad time window [{}, {}]", window.0, window.1)));
    }
    if sec.samples == 0 {
        return Err(CliError::Config("samples must be ≥ 1".into()));
    }
    let times = log_times(window, sec.samples);
    let mut quad = QuadConfig::default();
    if let Some(b) = sec.budget {
        quad.budget = b;
    }
    let (rows, fit) = kernel_norm_series(kernel, sec.a, band, sec.r, regime, &times, params, &quad)?;

    let mut report = Report::default();
    let theory = rows.first().and_then(|r| r.theoretical_exponent);
    let rel_err = match (fit, theory) {
        (Some(f), Some(th)) => Some((f.exponent - th).abs() / th.abs().max(f64::MIN_POSITIVE)),
        _ => None,
    };
    match (rel_err, fit, theory) {
        (Some(err), Some(f), Some(th)) if err > tol => report.warnings.push(format!(
            "{kernel} {band} a = {}: fitted exponent {} vs {th}, relative error {err} > {tol}",
            fmt_q(&sec.a),
            f.exponent
        )),
        (None, _, _) => report
            .warnings
            .push(format!("{kernel} {band}: no exponent to compare (fit or prediction missing)")),
        _ => {}
    }
    let mut table = Table::new(&[
        "kernel",
        "band",
        "a",
        "r",
        "regime",
        "t",
        "norm",
        "theoretical",
        "fitted",
        "residual",
        "rel_err",
    ]);
    for row in &rows {
        table.push(
            Some(params),
            vec![
                row.which.to_string(),
                row.band.to_string(),
                fmt_q(&sec.a),
                num(row.r),
                regime.to_string(),
                num(row.t),
                num(row.norm),
                opt(row.theoretical_exponent),
                opt(row.fitted_exponent),
                opt(row.residual),
                opt(rel_err),
            ],
        );
    }
    report.table("kernel_norm.csv", &table)?;
    Ok(report)
}

pub fn evolve(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let params = cfg.params()?;
    let sec = section(&cfg.evolve, "evolve")?;
    let p = sec
        .p
        .or(params.p)
        .ok_or_else(|| CliError::Config("evolve needs a power p in [params] or [evolve]".into()))?;
    let nonlinearity = match sec.nonlinearity.as_str() {
        "u" => Nonlinearity::PowerU,
        "ut" => Nonlinearity::PowerUt,
        other => return Err(CliError::Config(format!("unknown nonlinearity {other:?}; use u or ut"))),
    };
    if sec.stride == 0 {
        return Err(CliError::Config("stride must be ≥ 1".into()));
    }
    let (u0, u1) = build_data(params, &sec.grid, &sec.data)?;
    let solver = SemilinearConfig {
        nonlinearity,
        p: to_f64(&p),
        dt: sec.dt,
        t_end: sec.t_end,
        record_every: sec.t_end,
        blowup_ceiling: sec.blowup_ceiling,
        norm_q: to_f64(&params.q),
    };
    let traj = semilinear_solve(&u0, &u1, params, &solver)?;

    let mut report = Report::default();
    if let Some(b) = traj.blow_up {
        report.warnings.push(format!("blow-up at t = {}: norm {:e}", b.t, b.norm));
    }
    if let Some(from) = sec.monotone_from {
        let tail: Vec<_> = traj.norms.iter().filter(|r| r.t >= from).collect();
        if let Some(w) = tail.windows(2).find(|w| w[1].u_l2 > w[0].u_l2 * (1.0 + sec.monotone_slack)) {
            report.warnings.push(format!(
                "‖u‖_L² increases from {:e} at t = {} to {:e} at t = {}",
                w[0].u_l2, w[0].t, w[1].u_l2, w[1].t
            ));
        }
    }
    let mut with_p = params.clone();
    with_p.p = Some(p);
    let mut table = Table::new(&["nonlinearity", "dt", "step", "t", "u_l2", "u_lq", "ut_l2", "blow_up"]);
    let last = traj.norms.len().saturating_sub(1);
    for (k, row) in traj.norms.iter().enumerate() {
        if k % sec.stride != 0 && k != last {
            continue;
        }
        let blown = k == last && traj.blow_up.is_some();
        table.push(
            Some(&with_p),
            vec![
                sec.nonlinearity.clone(),
                num(sec.dt),
                k.to_string(),
                num(row.t),
                num(row.u_l2),
                num(row.u_lq),
                num(row.ut_l2),
                blown.to_string(),
            ],
        );
    }
    report.table("evolve.csv", &table)?;
    if sec.dump {
        let snap = traj.last();
        let mut buf = Vec::new();
        snap.u.clone().to_physical().write_dump(&mut buf, snap.t)?;
        report.outputs.push(("evolve_final_u.bin".into(), buf));
    }
    Ok(report)
}

pub fn gevrey(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let params = cfg.params()?;
    let sec = section(&cfg.gevrey, "gevrey")?;
    if !(sec.t_end >= 0.0 && sec.t_end.is_finite()) || sec.samples < 2 {
        return Err(CliError::Config("gevrey needs t_end ≥ 0 and at least 2 samples".into()));
    }
    let c = match sec.c {
        Some(c) => c,
        None => default_gevrey_constant(params)?,
    };
    let (u0, u1) = build_data(params, &sec.grid, &sec.data)?;
    let prop = LinearPropagator::new(&u0, &u1, params)?;
    let times: Vec<f64> = (0..sec.samples)
        .map(|k| sec.t_end * k as f64 / (sec.samples - 1) as f64)
        .collect();
    let energies = par::try_map(&times, |&t| gevrey_energy(&prop.at(t)?, c, params))?;

    let mut report = Report::default();
    let e0 = energies[0];
    let mut table = Table::new(&["c", "t", "energy", "ratio", "bound"]);
    let mut worst: f64 = 0.0;
    for (t, e) in times.iter().zip(&energies) {
        let ratio = (e0 > 0.0).then(|| e / e0);
        worst = worst.max(ratio.unwrap_or(0.0));
        table.push(Some(params), vec![num(c), num(*t), num(*e), opt(ratio), num(sec.bound)]);
    }
    if worst > sec.bound {
        report
            .warnings
            .push(format!("weighted energy reaches {worst} × its initial value, above {}", sec.bound));
    }
    report.table("gevrey.csv", &table)?;
    Ok(report)
}

pub fn toolkit(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let sec = section(&cfg.toolkit, "toolkit")?;
    let params = cfg.params.as_ref();
    let mut report = Report::default();
    match sec.task.as_str() {
        "bell-check" => {
            let bell = bell_numbers(sec.order);
            let counts = partition_numbers(sec.order);
            let mut table = Table::new(&[
                "task",
                "order",
                "partitions",
                "expected_partitions",
                "coefficient_sum",
                "expected_sum",
                "ok",
            ]);
            for n in 1..=sec.order {
                let parts = faa_di_bruno_partitions(n)?;
                let sum: u128 = parts.iter().map(|p| p.coefficient).sum();
                let ok = parts.len() as u128 == counts[n] && sum == bell[n];
                if !ok {
                    report.warnings.push(format!("order {n}: {} partitions, sum {sum}", parts.len()));
                }
                table.push(
                    params,
                    vec![
                        sec.task.clone(),
                        n.to_string(),
                        parts.len().to_string(),
                        counts[n].to_string(),
                        sum.to_string(),
                        bell[n].to_string(),
                        ok.to_string(),
                    ],
                );
            }
            report.table("toolkit.csv", &table)?;
        }
        "partitions" => {
            let mut table = Table::new(&["task", "order", "index", "multiplicities", "parts", "coefficient"]);
            for (i, p) in faa_di_bruno_partitions(sec.order)?.iter().enumerate() {
                let m: Vec<String> = p.multiplicities.iter().map(|v| v.to_string()).collect();
                table.push(
                    params,
                    vec![
                        sec.task.clone(),
                        sec.order.to_string(),
                        i.to_string(),
                        m.join(" "),
                        p.parts().to_string(),
                        p.coefficient.to_string(),
                    ],
                );
            }
            report.table("toolkit.csv", &table)?;
        }
        "duhamel" => duhamel_lattice(sec, params, &mut report)?,
        other => {
            return Err(CliError::Config(format!(
                "unknown toolkit task {other:?}; use bell-check, partitions or duhamel"
            )))
        }
    }
    Ok(report)
}

fn duhamel_lattice(
    sec: &super::config::ToolkitSection,
    params: Option<&ModelParams>,
    report: &mut Report,
) -> Result<(), CliError> {
    if !(sec.step > 0.0 && sec.extent >= 0.0) || sec.times.is_empty() {
        return Err(CliError::Config("duhamel needs step > 0, extent ≥ 0 and some times".into()));
    }
    let steps = (sec.extent / sec.step + 1e-9).floor() as usize;
    let axis: Vec<f64> = (0..=steps).map(|k| k as f64 * sec.step).collect();
    let pairs: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
        .collect();
    let values = par::try_map(&pairs, |&(a, b)| {
        sec.times
            .iter()
            .map(|&t| Ok((duhamel_integral(a, b, t)?, duhamel_bound(a, b, t)?)))
            .collect::<crate::Result<Vec<_>>>()
    })?;
    let mut table = Table::new(&["task", "alpha", "beta", "branch", "t", "integral", "bound", "ratio", "spread"]);
    for (&(a, b), vals) in pairs.iter().zip(&values) {
        let ratios: Vec<f64> = vals.iter().map(|(i, bd)| i / bd).collect();
        let window: Vec<f64> = sec
            .times
            .iter()
            .zip(&ratios)
            .filter(|(t, r)| **t >= sec.spread_from && r.is_finite() && **r > 0.0)
            .map(|(_, r)| *r)
            .collect();
        let spread = if window.is_empty() {
            None
        } else {
            let hi = window.iter().cloned().fold(f64::MIN, f64::max);
            let lo = window.iter().cloned().fold(f64::MAX, f64::min);
            Some(hi / lo)
        };
        if let Some(s) = spread.filter(|s| *s > sec.max_spread) {
            report.warnings.push(format!("(α, β) = ({a}, {b}): ratio spread {s} > {}", sec.max_spread));
        }
        let branch = DuhamelBranch::of(a, b).name();
        for ((t, (i, bd)), r) in sec.times.iter().zip(vals).zip(&ratios) {
            table.push(
                params,
                vec![
                    sec.task.clone(),
                    num(a),
                    num(b),
                    branch.into(),
                    num(*t),
                    num(*i),
                    num(*bd),
                    num(*r),
                    opt(spread),
                ],
            );
        }
    }
    report.table("toolkit.csv", &table)
}

/// `B_0 … B_n` from the Bell triangle.
fn bell_numbers(n: usize) -> Vec<u128> {
    let mut out = vec![1u128];
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        out.push(next[0]);
        row = next;
    }
    out
}

/// `p(0) … p(n)` from Euler's pentagonal recurrence.
fn partition_numbers(n: usize) -> Vec<u128> {
    let mut p = vec![0i128; n + 1];
    p[0] = 1;
    for m in 1..=n {
        let mut total = 0i128;
        for k in 1.. {
            let k = k as i64;
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > m {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            total += sign * p[m - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= m {
                total += sign * p[m - g2];
            }
        }
        p[m] = total;
    }
    p.into_iter().map(|v| v as u128).collect()
}
