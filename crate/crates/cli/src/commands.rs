//! The five subcommands.  Each one resolves its inputs from the run
//! configuration, writes CSV tables or JSON reports under the output
//! directory, and returns the exit code for the contract it checks.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use rayon::prelude::*;
use serde::Serialize;

use gibbsdisc_core::bessel::{zero_asymptote, zeros};
use gibbsdisc_core::checks::{bilinear_deriv_ratio, bilinear_norm, max_count_over_tau, representation_count};
use gibbsdisc_core::error::{Error, Result};
use gibbsdisc_core::flow::evolve;
use gibbsdisc_core::invariance::{default_observables, invariance_test, push_ensemble, ObservableReport};
use gibbsdisc_core::io::fnv1a;
use gibbsdisc_core::measure::{tail_curve, weighted_tail_curve, TailCurve};
use gibbsdisc_core::stats::percentile;
use gibbsdisc_core::{Basis64, Ensemble64};

use crate::config::{load_or_build_basis, RunConfig, ARTIFACT_VERSION};

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn create(cfg: &RunConfig, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(&cfg.output_dir)?;
    Ok(BufWriter::new(File::create(out_path(cfg, name))?))
}

/// Comment header carried by every CSV file.
fn write_meta<W: Write>(w: &mut W, hash: u64) -> Result<()> {
    writeln!(w, "# artifact_version={ARTIFACT_VERSION}")?;
    writeln!(w, "# config_hash={:#018x}", hash)?;
    Ok(())
}

fn write_json<D: Serialize>(cfg: &RunConfig, name: &str, doc: &D) -> Result<()> {
    let mut w = create(cfg, name)?;
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(w)?;
    Ok(())
}

fn hex(hash: u64) -> String {
    format!("{hash:#018x}")
}

fn resolve_basis(cfg: &RunConfig) -> Result<Basis64> {
    load_or_build_basis(cfg.basis.n_modes, cfg.basis.quad_order())
}

fn draw_ensemble(cfg: &RunConfig, basis: &Basis64) -> Ensemble64 {
    Ensemble64::generate(
        basis,
        cfg.s(),
        &cfg.nonlinearity_spec(),
        cfg.measure.r_cutoff,
        cfg.measure.n_samples,
        cfg.measure.seed,
    )
}

// ---------------------------------------------------------------------------
// zeros

pub fn cmd_zeros(cfg: &RunConfig, n_max_flag: Option<usize>) -> Result<ExitCode> {
    let n_max = n_max_flag.unwrap_or(cfg.zeros.n_max);
    if n_max == 0 {
        return Err(Error::Config("zeros.n_max must be at least 1".into()));
    }
    let zs = zeros::<f64>(n_max)?;
    let mut w = create(cfg, "zeros.csv")?;
    write_meta(&mut w, cfg.content_hash())?;
    writeln!(w, "n,z,asymptote,residual")?;
    for (i, &z) in zs.iter().enumerate() {
        let n = i + 1;
        let asy = zero_asymptote::<f64>(n);
        writeln!(w, "{n},{z},{asy},{}", z - asy)?;
    }
    w.flush()?;
    println!("wrote {} ({n_max} rows)", out_path(cfg, "zeros.csv").display());
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// sample

#[derive(Serialize)]
struct FitDoc {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

impl From<&TailCurve<f64>> for FitDoc {
    fn from(c: &TailCurve<f64>) -> Self {
        FitDoc { slope: c.fit_slope, intercept: c.fit_intercept, r_squared: c.fit_r_squared }
    }
}

#[derive(Serialize)]
struct SampleDoc {
    artifact_version: &'static str,
    config_hash: String,
    n_modes: usize,
    quad_order: usize,
    n_samples: usize,
    seed: u64,
    s: f64,
    r_cutoff: f64,
    acceptance_fraction: f64,
    ess: f64,
    ensemble_file: String,
    ensemble_file_hash: String,
    tail_sigma: f64,
    tail_fit_mu: FitDoc,
    tail_fit_gibbs: FitDoc,
}

/// Lambda grid spanning the bulk-to-tail range of the sampled norms.
fn tail_lambdas(norms: &[f64]) -> Vec<f64> {
    let lo = percentile(norms, 50.0);
    let mut hi = percentile(norms, 99.9);
    if !(hi > lo) {
        hi = lo + 1.0;
    }
    let k = 40;
    (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect()
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<ExitCode> {
    let basis = resolve_basis(cfg)?;
    let ensemble = draw_ensemble(cfg, &basis);
    let hash = cfg.content_hash();

    fs::create_dir_all(&cfg.output_dir)?;
    let ens_path = out_path(cfg, "ensemble.bin");
    ensemble.save(&ens_path, &basis)?;
    let ens_hash = fnv1a(&fs::read(&ens_path)?);

    let sigma = cfg.measure.tail_sigma;
    let mut w = create(cfg, "samples.csv")?;
    write_meta(&mut w, hash)?;
    ensemble.write_sample_csv(&basis, &[sigma], &mut w)?;
    w.flush()?;

    let norms: Vec<f64> =
        ensemble.states.iter().map(|st| st.sobolev_norm(&basis, sigma)).collect();
    let lambdas = tail_lambdas(&norms);
    let mu_curve = tail_curve(&ensemble, &basis, sigma, &lambdas);
    let gibbs_curve = weighted_tail_curve(&ensemble, &basis, sigma, &lambdas);
    let mut w = create(cfg, "tail.csv")?;
    write_meta(&mut w, hash)?;
    writeln!(w, "lambda,exceedance_mu,exceedance_gibbs")?;
    for (p, q) in mu_curve.points.iter().zip(&gibbs_curve.points) {
        writeln!(w, "{},{},{}", p.lambda, p.exceedance, q.exceedance)?;
    }
    w.flush()?;

    let doc = SampleDoc {
        artifact_version: ARTIFACT_VERSION,
        config_hash: hex(hash),
        n_modes: basis.n_modes(),
        quad_order: basis.quad_order(),
        n_samples: ensemble.len(),
        seed: ensemble.seed,
        s: ensemble.s,
        r_cutoff: ensemble.r_cutoff,
        acceptance_fraction: ensemble.acceptance_fraction(),
        ess: ensemble.ess(),
        ensemble_file: ens_path.display().to_string(),
        ensemble_file_hash: hex(ens_hash),
        tail_sigma: sigma,
        tail_fit_mu: (&mu_curve).into(),
        tail_fit_gibbs: (&gibbs_curve).into(),
    };
    write_json(cfg, "sample_summary.json", &doc)?;
    println!(
        "{} samples: acceptance {:.4}, ess {:.1}",
        ensemble.len(),
        doc.acceptance_fraction,
        doc.ess
    );
    println!("wrote {}", ens_path.display());
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// evolve

#[derive(Serialize)]
struct EvolveDoc {
    artifact_version: &'static str,
    config_hash: String,
    n_samples: usize,
    t_final: f64,
    dt: f64,
    integrator: gibbsdisc_core::Integrator,
    nonlinear_scale: f64,
    flagged_count: usize,
    aborted_count: usize,
    max_h_drift: f64,
    max_l2_drift: f64,
    trajectory_index: usize,
    trajectory_flagged: bool,
}

fn load_ensemble(cfg: &RunConfig, basis: &Basis64) -> Result<Ensemble64> {
    match &cfg.evolve.ensemble {
        Some(path) => {
            let (ens, header) = Ensemble64::load(path)?;
            if header.basis_hash != basis.content_hash() {
                return Err(Error::GridMismatch {
                    field: header.basis_hash,
                    basis: basis.content_hash(),
                });
            }
            Ok(ens)
        }
        None => Ok(draw_ensemble(cfg, basis)),
    }
}

pub fn cmd_evolve(cfg: &RunConfig, ensemble_flag: Option<PathBuf>) -> Result<ExitCode> {
    let mut cfg = cfg.clone();
    if ensemble_flag.is_some() {
        cfg.evolve.ensemble = ensemble_flag;
    }
    let cfg = &cfg;
    let basis = resolve_basis(cfg)?;
    let spec = cfg.nonlinearity_spec();
    let flow_cfg = cfg.flow_config();
    let ensemble = load_ensemble(cfg, &basis)?;
    let idx = cfg.evolve.trajectory_index;
    if idx >= ensemble.len() {
        return Err(Error::Config(format!(
            "evolve.trajectory_index = {idx} is out of range for {} samples",
            ensemble.len()
        )));
    }
    let hash = cfg.content_hash();

    // Endpoint push with per-sample conservation monitors; a sample whose
    // integration aborts keeps its initial state and is marked.
    let mut endpoint_cfg = flow_cfg;
    endpoint_cfg.record_stride = usize::MAX;
    struct Row {
        h_drift: f64,
        l2_drift: f64,
        flagged: bool,
        aborted: bool,
    }
    let pushed: Vec<(gibbsdisc_core::State64, Row)> = ensemble
        .states
        .par_iter()
        .map(|st| match evolve(st, &spec, &basis, &endpoint_cfg) {
            Ok(traj) => {
                let row = Row {
                    h_drift: traj.h_drift_max,
                    l2_drift: traj.l2_drift_max,
                    flagged: traj.flagged,
                    aborted: false,
                };
                (traj.states.into_iter().last().unwrap(), row)
            }
            Err(_) => (
                st.clone(),
                Row { h_drift: f64::NAN, l2_drift: f64::NAN, flagged: true, aborted: true },
            ),
        })
        .collect();

    let mut w = create(cfg, "conservation.csv")?;
    write_meta(&mut w, hash)?;
    writeln!(w, "index,h_drift,l2_drift,flagged")?;
    let mut flagged_count = 0;
    let mut aborted_count = 0;
    let mut max_h = 0.0f64;
    let mut max_l2 = 0.0f64;
    for (i, (_, row)) in pushed.iter().enumerate() {
        writeln!(w, "{i},{},{},{}", row.h_drift, row.l2_drift, row.flagged as u8)?;
        flagged_count += row.flagged as usize;
        aborted_count += row.aborted as usize;
        if !row.aborted {
            max_h = max_h.max(row.h_drift);
            max_l2 = max_l2.max(row.l2_drift);
        }
    }
    w.flush()?;

    let evolved = Ensemble64 {
        states: pushed.into_iter().map(|(st, _)| st).collect(),
        log_weights: ensemble.log_weights.clone(),
        r_cutoff: ensemble.r_cutoff,
        seed: ensemble.seed,
        s: ensemble.s,
        spec: ensemble.spec,
    };
    evolved.save(&out_path(cfg, "evolved.bin"), &basis)?;

    // Full record of the designated sample; an abort here is fatal.
    let traj = evolve(&ensemble.states[idx], &spec, &basis, &flow_cfg)?;
    let sigma = cfg.evolve.sigma;
    let mut w = create(cfg, "trajectory.csv")?;
    write_meta(&mut w, hash)?;
    writeln!(w, "t,h,l2,h_sigma")?;
    for (k, &t) in traj.times.iter().enumerate() {
        let hs = traj.states[k].sobolev_norm(&basis, sigma);
        writeln!(w, "{t},{},{},{hs}", traj.hamiltonian_series[k], traj.l2_series[k])?;
    }
    w.flush()?;

    let doc = EvolveDoc {
        artifact_version: ARTIFACT_VERSION,
        config_hash: hex(hash),
        n_samples: ensemble.len(),
        t_final: flow_cfg.t_final,
        dt: flow_cfg.dt,
        integrator: flow_cfg.integrator,
        nonlinear_scale: flow_cfg.nonlinear_scale,
        flagged_count,
        aborted_count,
        max_h_drift: max_h,
        max_l2_drift: max_l2,
        trajectory_index: idx,
        trajectory_flagged: traj.flagged,
    };
    write_json(cfg, "evolve_summary.json", &doc)?;
    println!(
        "pushed {} samples to t = {}: {} flagged, max drift H {:.3e} / L2 {:.3e}",
        doc.n_samples, doc.t_final, doc.flagged_count, doc.max_h_drift, doc.max_l2_drift
    );
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// invariance

#[derive(Serialize)]
struct InvarianceDoc {
    artifact_version: &'static str,
    config_hash: String,
    n_modes: usize,
    n_samples: usize,
    seed: u64,
    t_final: f64,
    dt: f64,
    integrator: gibbsdisc_core::Integrator,
    nonlinear_scale: f64,
    n_excluded: usize,
    ess: f64,
    z_threshold: f64,
    max_abs_z: f64,
    inconclusive: bool,
    pass: bool,
    observables: Vec<ObservableReport<f64>>,
}

pub fn cmd_invariance(cfg: &RunConfig) -> Result<ExitCode> {
    let basis = resolve_basis(cfg)?;
    let spec = cfg.nonlinearity_spec();
    let flow_cfg = cfg.flow_config();
    let ensemble = draw_ensemble(cfg, &basis);
    let observables = default_observables(cfg.s());

    let pushed = push_ensemble(&ensemble, &spec, &basis, &flow_cfg)?;
    let reports = invariance_test(&ensemble, &pushed, &basis, &observables);

    let max_abs_z = reports.iter().map(|r| r.z_score.abs()).fold(0.0, f64::max);
    let inconclusive = reports.iter().any(|r| r.inconclusive);
    let threshold = cfg.invariance.z_threshold;
    let pass = !inconclusive && max_abs_z <= threshold;
    let ess = reports.first().map_or(0.0, |r| r.ess);

    let doc = InvarianceDoc {
        artifact_version: ARTIFACT_VERSION,
        config_hash: hex(cfg.content_hash()),
        n_modes: basis.n_modes(),
        n_samples: ensemble.len(),
        seed: ensemble.seed,
        t_final: flow_cfg.t_final,
        dt: flow_cfg.dt,
        integrator: flow_cfg.integrator,
        nonlinear_scale: flow_cfg.nonlinear_scale,
        n_excluded: pushed.n_excluded,
        ess,
        z_threshold: threshold,
        max_abs_z,
        inconclusive,
        pass,
        observables: reports.clone(),
    };
    write_json(cfg, "invariance.json", &doc)?;

    println!("{:<24} {:>13} {:>13} {:>13} {:>8}", "observable", "before", "after", "se", "z");
    for r in &reports {
        println!(
            "{:<24} {:>13.6e} {:>13.6e} {:>13.6e} {:>+8.2}",
            r.observable_id, r.before, r.after, r.std_error, r.z_score
        );
    }
    if inconclusive {
        println!("INCONCLUSIVE: effective sample size {ess:.1} is below 100");
    } else if pass {
        println!("PASS: max |z| = {max_abs_z:.2} within threshold {threshold}");
    } else {
        let worst = reports
            .iter()
            .max_by(|a, b| a.z_score.abs().partial_cmp(&b.z_score.abs()).unwrap())
            .unwrap();
        println!(
            "FAIL: |z| = {:.2} on {} exceeds threshold {threshold}",
            worst.z_score.abs(),
            worst.observable_id
        );
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

// ---------------------------------------------------------------------------
// checks

pub fn cmd_checks(cfg: &RunConfig) -> Result<ExitCode> {
    let basis = resolve_basis(cfg)?;
    let hash = cfg.content_hash();
    let bmax = cfg.checks.bilinear_max.unwrap_or(basis.n_modes()).min(basis.n_modes());

    let mut w = create(cfg, "bilinear.csv")?;
    write_meta(&mut w, hash)?;
    writeln!(w, "n1,n2,product_l2,product_resolved,deriv_ratio,deriv_resolved")?;
    let mut rows: Vec<(usize, usize)> = (1..=bmax).map(|n| (n, n)).collect();
    rows.extend((2..=bmax).map(|n| (1, n)));
    for (n1, n2) in rows {
        let p = bilinear_norm(&basis, n1, n2);
        let d = bilinear_deriv_ratio(&basis, n1, n2);
        writeln!(
            w,
            "{n1},{n2},{},{},{},{}",
            p.value, p.resolved as u8, d.value, d.resolved as u8
        )?;
    }
    w.flush()?;

    let l = cfg.checks.counting_l;
    let max_block = cfg.checks.counting_blocks.iter().copied().max().unwrap_or(16);
    // Zeros past 2 * max_block so the largest dyadic block is complete.
    let n_zeros = (2.0 * max_block as f64 / std::f64::consts::PI).ceil() as usize + 2;
    let zs = zeros::<f64>(n_zeros)?;
    let mut w = create(cfg, "counting.csv")?;
    write_meta(&mut w, hash)?;
    writeln!(w, "block,l1,l2,max_count,tau_witness,count_per_l")?;
    for &b in &cfg.checks.counting_blocks {
        let (count, tau) = max_count_over_tau(&zs, l, l, b, b);
        writeln!(w, "{b},{l},{l},{count},{tau},{}", count as f64 / (2 * l) as f64)?;
    }
    w.flush()?;

    let l_max = cfg.checks.repr_l_max;
    let n_cap = ((l_max as f64).sqrt() as u64 + 1) / 4 + 1;
    let mut w = create(cfg, "representation.csv")?;
    write_meta(&mut w, hash)?;
    writeln!(w, "l,count")?;
    let mut best = 0;
    for l in 1..=l_max {
        let c = representation_count(l, n_cap);
        if c > best {
            best = c;
            writeln!(w, "{l},{c}")?;
        }
    }
    w.flush()?;

    println!(
        "wrote bilinear.csv ({} modes), counting.csv ({} blocks), representation.csv (max count {best})",
        bmax,
        cfg.checks.counting_blocks.len()
    );
    Ok(ExitCode::SUCCESS)
}
