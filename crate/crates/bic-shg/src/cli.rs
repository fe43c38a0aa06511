//! Batch commands: parameter sweeps and figure-reproduction tables.
//!
//! Every command is deterministic for a given configuration: sweeps run on
//! a rayon pool but results are collected in parameter order, and no
//! timestamps enter the data.

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::flux::{bic_model, conservation_check, optimal_distance};
use crate::oracle::sweep_argmax_sigma2;
use crate::output::{fmt_f64, Table};
use crate::params::StructureParams;
use crate::shg::cardano_root_unchecked;
use crate::siegert::{
    find_bound_states, kb_threshold_estimate, resonance_k_scan, trace_curve, BoundState, Parity,
};

fn parity_list(cfg: &RunConfig) -> Result<Vec<Parity>> {
    match cfg.get("parity").unwrap_or("both") {
        "both" => Ok(vec![Parity::Antisymmetric, Parity::Symmetric]),
        "symmetric" | "+1" | "1" => Ok(vec![Parity::Symmetric]),
        "antisymmetric" | "-1" => Ok(vec![Parity::Antisymmetric]),
        other => Err(Error::Config {
            location: "parity".into(),
            message: format!("expected both|symmetric|antisymmetric, got `{other}`"),
        }),
    }
}

fn echo_into(table: &mut Table, cfg: &RunConfig) {
    for (k, v) in cfg.echo() {
        table.meta(k, v);
    }
}

/// `trace`: resonance curves k_r(h), Gamma(h) per parity branch.
pub fn cmd_trace(cfg: &RunConfig) -> Result<Table> {
    let params = cfg.structure()?;
    let num = cfg.numerics()?;
    let h_min = cfg.f64_or("h_min", 0.05)?;
    let h_max = cfg.f64_or("h_max", 1.5)?;
    let h_step = cfg.f64_or("h_step", 0.01)?;
    if !(h_step > 0.0) || !(h_max > h_min) {
        return Err(Error::Config {
            location: "h_min/h_max/h_step".into(),
            message: format!("empty h range: [{h_min}, {h_max}] step {h_step}"),
        });
    }
    let mut table = Table::new("trace", &["parity", "h", "k_r", "gamma"]);
    echo_into(&mut table, cfg);
    // Row order: parity ascending (-1 first), then h ascending.
    for parity in parity_list(cfg)? {
        let pts = trace_curve(parity, &params, &num, (h_min, h_max), h_step)?;
        for p in pts {
            table.row(vec![
                format!("{}", p.parity.sign()),
                fmt_f64(p.h),
                fmt_f64(p.kr),
                fmt_f64(p.gamma),
            ]);
        }
    }
    Ok(table)
}

/// `bound-states`: h_b(n), k_b(n) plus the threshold-estimate column.
pub fn cmd_bound_states(cfg: &RunConfig) -> Result<Table> {
    let params = cfg.structure()?;
    let num = cfg.numerics()?;
    let n_max = cfg.usize_or("n_max", 3)?;
    let mut table = Table::new(
        "bound-states",
        &["n", "parity", "h_b", "k_b", "k_z_b", "k_b_estimate"],
    );
    echo_into(&mut table, cfg);
    let estimate = kb_threshold_estimate(&params);
    if n_max == 0 {
        return Ok(table);
    }
    let states = find_bound_states(Parity::Symmetric, &params, &num, n_max)?;
    for b in states {
        table.row(vec![
            format!("{}", b.n),
            format!("{}", b.parity.sign()),
            fmt_f64(b.hb),
            fmt_f64(b.kb),
            fmt_f64(b.kzb),
            fmt_f64(estimate),
        ]);
    }
    Ok(table)
}

struct EfficiencyRow {
    n: usize,
    radius: f64,
    kx: f64,
    bs: BoundState,
    exact: f64,
    leading: f64,
    m0: f64,
    delta0_kb: f64,
}

fn efficiency_point(
    params: &StructureParams,
    num: &crate::params::Numerics,
    n: usize,
) -> Result<Option<EfficiencyRow>> {
    let states = match find_bound_states(Parity::Symmetric, params, num, n) {
        Ok(s) => s,
        Err(Error::NotFound { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let bs = states[n - 1];
    let bm = bic_model(&bs, params, num)?;
    Ok(Some(EfficiencyRow {
        n,
        radius: params.radius,
        kx: params.kx,
        bs,
        exact: bm.sigma2_max_exact(),
        leading: bm.sigma2_max_leading(),
        m0: bm.sigma2_max_m0(params),
        delta0_kb: bm.delta0_kb,
    }))
}

/// `efficiency`: conversion-efficiency sweep over radius or kx.
pub fn cmd_efficiency(cfg: &RunConfig) -> Result<Table> {
    let base = cfg.structure()?;
    let num = cfg.numerics()?;
    let n_list: Vec<usize> = cfg
        .f64_list("n_list")?
        .unwrap_or_else(|| vec![1.0, 2.0, 3.0])
        .into_iter()
        .map(|x| x as usize)
        .collect();
    let sweep = cfg.get("sweep").unwrap_or("radius").to_string();
    let points: Vec<StructureParams> = match sweep.as_str() {
        "radius" => {
            let values = match cfg.f64_list("r_list")? {
                Some(v) => v,
                None => {
                    let lo = cfg.f64_or("r_min", 0.05)?;
                    let hi = cfg.f64_or("r_max", 0.25)?;
                    let n = cfg.usize_or("r_points", 21)?.max(2);
                    (0..n)
                        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                        .collect()
                }
            };
            values
                .into_iter()
                .map(|r| StructureParams::new(r, base.eps_c, base.chi_c, base.kx))
                .collect::<Result<_>>()?
        }
        "kx" => {
            let values = match cfg.f64_list("kx_list")? {
                Some(v) => v,
                None => {
                    let lo = cfg.f64_or("kx_min", 0.0)?;
                    let hi = cfg.f64_or("kx_max", 1.4)?;
                    let n = cfg.usize_or("kx_points", 15)?.max(2);
                    (0..n)
                        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                        .collect()
                }
            };
            values
                .into_iter()
                .map(|kx| StructureParams::new(base.radius, base.eps_c, base.chi_c, kx))
                .collect::<Result<_>>()?
        }
        other => {
            return Err(Error::Config {
                location: "sweep".into(),
                message: format!("expected radius|kx, got `{other}`"),
            })
        }
    };

    // Parallel over (n, point); collected in deterministic parameter order.
    let mut jobs = Vec::new();
    for &n in &n_list {
        for p in &points {
            jobs.push((n, *p));
        }
    }
    let rows: Vec<Result<Option<EfficiencyRow>>> = jobs
        .par_iter()
        .map(|(n, p)| efficiency_point(p, &num, *n))
        .collect();

    let mut table = Table::new(
        "efficiency",
        &[
            "n",
            "radius",
            "kx",
            "h_b",
            "k_b",
            "sigma2_max_exact",
            "sigma2_max_leading",
            "sigma2_max_m0",
            "delta0_kb",
            "subwavelength_valid",
        ],
    );
    echo_into(&mut table, cfg);
    table.meta("sweep", &sweep);
    for row in rows {
        let Some(r) = row? else { continue };
        if !sigma_in_range(r.exact) {
            return Err(Error::ConservationViolation { total: r.exact });
        }
        table.row(vec![
            format!("{}", r.n),
            fmt_f64(r.radius),
            fmt_f64(r.kx),
            fmt_f64(r.bs.hb),
            fmt_f64(r.bs.kb),
            fmt_f64(r.exact),
            fmt_f64(r.leading),
            fmt_f64(r.m0),
            fmt_f64(r.delta0_kb),
            format!("{}", u8::from(r.delta0_kb < 0.25)),
        ]);
    }
    Ok(table)
}

/// `validity`: tau_+ + tau_- over a (nu, h) grid around a bound state.
pub fn cmd_validity(cfg: &RunConfig) -> Result<Table> {
    let params = cfg.structure()?;
    let num = cfg.numerics()?;
    let n = cfg.usize_or("n", 1)?.max(1);
    let states = find_bound_states(Parity::Symmetric, &params, &num, n)?;
    let bs = states[n - 1];
    let bm = bic_model(&bs, &params, &num)?;

    let nu_min = cfg.f64_or("nu_min", 1e-7)?;
    let nu_max = cfg.f64_or("nu_max", 1e-3)?;
    let nu_points = cfg.usize_or("nu_points", 40)?.max(2);
    let h_half_width = cfg.f64_or("h_half_width", 0.03)?;
    let h_points = cfg.usize_or("h_points", 41)?.max(2);

    // phi(h) along the curve, one resonance solve per h row.
    let hs: Vec<f64> = (0..h_points)
        .map(|i| bs.hb - h_half_width + 2.0 * h_half_width * i as f64 / (h_points - 1) as f64)
        .collect();
    let phis: Vec<Result<f64>> = hs
        .par_iter()
        .map(|&h| {
            let kr = resonance_k_scan(h, Parity::Symmetric, &params, &num)?;
            let kz = (kr * kr - params.kx * params.kx).sqrt();
            Ok((h * kz).cos())
        })
        .collect();

    let mut table = Table::new("validity", &["nu", "h", "tau_sum", "valid"]);
    echo_into(&mut table, cfg);
    table.meta("h_b", fmt_f64(bs.hb));
    for i in 0..nu_points {
        // Log-spaced nu grid.
        let t = i as f64 / (nu_points - 1) as f64;
        let nu = nu_min * (nu_max / nu_min).powf(t);
        for (h, phi) in hs.iter().zip(&phis) {
            let phi = phi.clone()?;
            let sol = cardano_root_unchecked(phi, nu, bm.zeta_b, bm.xi_b)?;
            table.row(vec![
                fmt_f64(nu),
                fmt_f64(*h),
                fmt_f64(sol.tau_sum()),
                format!("{}", u8::from(sol.valid())),
            ]);
        }
    }
    Ok(table)
}

/// `optimal`: optimal-distance report around a bound state (JSON).
pub fn cmd_optimal(cfg: &RunConfig) -> Result<String> {
    let params = cfg.structure()?;
    if params.chi_c <= 0.0 {
        return Err(Error::Config {
            location: "chi_c".into(),
            message: "optimal-distance analysis requires chi_c > 0".into(),
        });
    }
    let num = cfg.numerics()?;
    let n = cfg.usize_or("n", 1)?.max(1);
    let states = find_bound_states(Parity::Symmetric, &params, &num, n)?;
    let bs = states[n - 1];
    let bm = bic_model(&bs, &params, &num)?;
    let opt = optimal_distance(&bm, &params, &num)?;
    let window = (bs.hb + 0.05 * opt.delta_h, bs.hb + 5.0 * opt.delta_h);
    let (h_star, sigma2_star) = sweep_argmax_sigma2(&bm, &params, &num, window, 200)?;
    let budget = conservation_check(&bm, opt.h_opt[1], &params, &num)?;

    let json = serde_json::json!({
        "schema": crate::output::SCHEMA,
        "command": "optimal",
        "n": n,
        "radius": params.radius,
        "eps_c": params.eps_c,
        "chi_c": params.chi_c,
        "kx": params.kx,
        "h_b": bs.hb,
        "k_b": bs.kb,
        "h_opt": [opt.h_opt[0], opt.h_opt[1]],
        "delta_h": opt.delta_h,
        "delta_h_leading_order": opt.delta_h_leading,
        "condition_residual": opt.condition_residual,
        "sigma2_at_opt": opt.sigma2_at_opt,
        "sigma2_max_exact": bm.sigma2_max_exact(),
        "sweep_argmax": { "h": h_star, "sigma2": sigma2_star },
        "sigma1_plus_sigma2_at_opt": budget.sigma1 + budget.sigma2,
        "conservation_residual": budget.residual,
    });
    Ok(serde_json::to_string_pretty(&json).expect("report serializes"))
}

/// Exit code contract: 0 ok, 2 config, 3 numerical, 4 validity.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidParam(_) => 2,
        Error::InvalidRegion { .. }
        | Error::OutsideValidity { .. }
        | Error::ConservationViolation { .. } => 4,
        _ => 3,
    }
}

/// Guard against profoundly unphysical output rows.
pub fn sigma_in_range(sigma: f64) -> bool {
    (0.0..=1.0 + 1e-8).contains(&sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text, "test").unwrap()
    }

    #[test]
    fn trace_is_deterministic() {
        let c = cfg("radius = 0.08\neps_c = 2.0\nh_min = 0.24\nh_max = 0.28\nh_step = 0.01\nparity = symmetric\n");
        let a = cmd_trace(&c).unwrap().to_csv();
        let b = cmd_trace(&c).unwrap().to_csv();
        assert_eq!(a, b);
        assert!(a.contains("# bic-shg schema v1"));
    }

    #[test]
    fn trace_empty_range_is_config_error() {
        let c = cfg("h_min = 0.3\nh_max = 0.2\n");
        match cmd_trace(&c) {
            Err(Error::Config { .. }) => {}
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn bound_states_zero_n_max_empty() {
        let c = cfg("n_max = 0\n");
        let t = cmd_bound_states(&c).unwrap();
        assert!(t.rows.is_empty());
    }

    #[test]
    fn bound_states_headline_row() {
        let c = cfg("radius = 0.1\neps_c = 2.0\nn_max = 1\n");
        let t = cmd_bound_states(&c).unwrap();
        assert_eq!(t.rows.len(), 1);
        let hb: f64 = t.rows[0][2].parse().unwrap();
        assert!((hb - 0.259).abs() < 0.02);
    }

    #[test]
    fn validity_has_bic_line_inside_region() {
        let c = cfg(
            "radius = 0.1\neps_c = 2.0\nn = 1\nnu_points = 3\nh_points = 5\nh_half_width = 0.004\nnu_min = 1e-5\nnu_max = 1e-3\n",
        );
        let t = cmd_validity(&c).unwrap();
        // The h grid contains h_b (odd point count, symmetric window): the
        // middle h column should be valid at every nu.
        let hb: f64 = t
            .meta
            .iter()
            .find(|(k, _)| k == "h_b")
            .unwrap()
            .1
            .parse()
            .unwrap();
        let mut checked = 0;
        for row in &t.rows {
            let h: f64 = row[1].parse().unwrap();
            if (h - hb).abs() < 2e-4 {
                assert_eq!(row[3], "1", "row {:?}", row);
                checked += 1;
            }
        }
        assert!(checked >= 3);
    }
}
