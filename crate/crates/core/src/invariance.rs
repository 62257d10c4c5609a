//! The pushforward experiment: evolve a weighted ensemble to time T and
//! compare weighted observable means before and after.
//!
//! Weights are computed once at t = 0 and carried unchanged; if the
//! weighted measure is invariant under the flow, every observable's mean
//! is the same at both ends up to Monte Carlo noise, so the z-score
//! (after - before) / pooled SE should sit within a few units.  Scaling
//! the force term without changing the weights (see
//! `FlowConfig::nonlinear_scale`) breaks the matching on purpose and
//! serves as the negative control.

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::BesselBasis;
use crate::error::{Error, Result};
use crate::flow::{evolve, FlowConfig};
use crate::measure::{GibbsEnsemble, SpectralState};
use crate::nonlinearity::NonlinearitySpec;
use crate::stats;
use crate::Real;

/// Scalar functions of a state used for the before/after comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observable<T> {
    /// |c_n|^2, 1-based.
    ModeIntensity(usize),
    /// ||u||^2_{H^sigma}.
    SobolevSq(T),
    /// int_0^1 |u|^4 r dr.
    L4Norm4,
    /// Re(c_m conj(c_n)), 1-based.
    ModeCorrelation(usize, usize),
}

impl<T: Real> Observable<T> {
    pub fn id(&self) -> String {
        match self {
            Observable::ModeIntensity(n) => format!("mode_intensity_{n}"),
            Observable::SobolevSq(sg) => format!("sobolev_sq_{sg}"),
            Observable::L4Norm4 => "l4_norm4".into(),
            Observable::ModeCorrelation(m, n) => format!("mode_correlation_{m}_{n}"),
        }
    }

    pub fn eval(&self, state: &SpectralState<T>, basis: &BesselBasis<T>) -> T {
        match *self {
            Observable::ModeIntensity(n) => state.coeffs[n - 1].norm_sqr(),
            Observable::SobolevSq(sg) => {
                let h = state.sobolev_norm(basis, sg);
                h * h
            }
            Observable::L4Norm4 => {
                let field = state.to_field(basis);
                basis.integrate(field.values.iter().map(|v| {
                    let a = v.norm_sqr();
                    a * a
                }))
            }
            Observable::ModeCorrelation(m, n) => {
                (state.coeffs[m - 1] * state.coeffs[n - 1].conj()).re
            }
        }
    }
}

/// |c_n|^2 for n in {1,2,3}, H^sigma squared for sigma in {s, 0.3, 0.45}
/// (deduplicated), the L4 norm to the fourth, and Re(c_1 conj(c_2)).
pub fn default_observables<T: Real>(s: T) -> Vec<Observable<T>> {
    let mut out = vec![
        Observable::ModeIntensity(1),
        Observable::ModeIntensity(2),
        Observable::ModeIntensity(3),
    ];
    let mut sigmas: Vec<T> = vec![s];
    for cand in [T::of(0.3), T::of(0.45)] {
        if sigmas.iter().all(|&sg| (sg - cand).abs() > T::of(1e-12)) {
            sigmas.push(cand);
        }
    }
    out.extend(sigmas.into_iter().map(Observable::SobolevSq));
    out.push(Observable::L4Norm4);
    out.push(Observable::ModeCorrelation(1, 2));
    out
}

/// The ensemble after evolution.  `excluded` marks samples whose
/// trajectory aborted or broke a conservation tolerance; their entries in
/// `states` hold the initial state and are skipped (on both sides) by
/// `invariance_test`.
#[derive(Clone, Debug)]
pub struct PushedEnsemble<T> {
    pub states: Vec<SpectralState<T>>,
    pub excluded: Vec<bool>,
    pub n_excluded: usize,
    pub t_final: T,
}

/// Evolve every sample to config.t_final with conservation monitors on.
/// More than 1% exclusions invalidates the run.
pub fn push_ensemble<T: Real>(
    ensemble: &GibbsEnsemble<T>,
    spec: &NonlinearitySpec<T>,
    basis: &BesselBasis<T>,
    config: &FlowConfig<T>,
) -> Result<PushedEnsemble<T>> {
    let problems = config.violations();
    if !problems.is_empty() {
        return Err(Error::Config(problems.join("; ")));
    }
    let mut cfg = *config;
    cfg.record_stride = usize::MAX;
    let results: Vec<(SpectralState<T>, bool)> = ensemble
        .states
        .par_iter()
        .map(|st| match evolve(st, spec, basis, &cfg) {
            Ok(traj) => {
                let bad = traj.flagged;
                (traj.states.into_iter().last().unwrap(), bad)
            }
            Err(_) => (st.clone(), true),
        })
        .collect();
    let mut states = Vec::with_capacity(results.len());
    let mut excluded = Vec::with_capacity(results.len());
    let mut n_excluded = 0;
    for (st, bad) in results {
        states.push(st);
        excluded.push(bad);
        n_excluded += bad as usize;
    }
    let total = states.len();
    if n_excluded * 100 > total {
        return Err(Error::ExclusionRate { excluded: n_excluded, total, cap_percent: 1.0 });
    }
    Ok(PushedEnsemble { states, excluded, n_excluded, t_final: config.t_final })
}

#[derive(Clone, Debug, Serialize)]
pub struct ObservableReport<T> {
    pub observable_id: String,
    pub before: T,
    pub after: T,
    pub std_error: T,
    pub z_score: T,
    pub ess: T,
    pub inconclusive: bool,
}

/// Weighted means of each observable on both ends, with the pooled
/// standard error sqrt(se_before^2 + se_after^2) and the z-score of the
/// difference.  ESS below 100 marks every report inconclusive.
pub fn invariance_test<T: Real>(
    before: &GibbsEnsemble<T>,
    after: &PushedEnsemble<T>,
    basis: &BesselBasis<T>,
    observables: &[Observable<T>],
) -> Vec<ObservableReport<T>> {
    assert_eq!(before.len(), after.states.len());
    let mut weights = before.weights();
    for (w, &ex) in weights.iter_mut().zip(&after.excluded) {
        if ex {
            *w = T::zero();
        }
    }
    let wsum = stats::pairwise_sum(&weights);
    let ess = stats::effective_sample_size(&weights);
    let inconclusive = ess < T::of(100.0);

    observables
        .iter()
        .map(|obs| {
            if !(wsum > T::zero()) {
                return ObservableReport {
                    observable_id: obs.id(),
                    before: T::zero(),
                    after: T::zero(),
                    std_error: T::zero(),
                    z_score: T::zero(),
                    ess,
                    inconclusive: true,
                };
            }
            let vb: Vec<T> = before.states.iter().map(|st| obs.eval(st, basis)).collect();
            let va: Vec<T> = after.states.iter().map(|st| obs.eval(st, basis)).collect();
            let (mb, seb) = stats::weighted_mean_se(&vb, &weights);
            let (ma, sea) = stats::weighted_mean_se(&va, &weights);
            let se = (seb * seb + sea * sea).sqrt();
            let z = if se > T::zero() { (ma - mb) / se } else { T::zero() };
            ObservableReport {
                observable_id: obs.id(),
                before: mb,
                after: ma,
                std_error: se,
                z_score: z,
                ess,
                inconclusive,
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct GrowthTrack<T> {
    /// (t, ||u(t)||_{H^sigma}) at the requested times.
    pub points: Vec<(T, T)>,
    pub flagged: bool,
}

/// H^sigma norm along one trajectory at the given increasing times
/// (starting from t = 0).
pub fn growth_track<T: Real>(
    state: &SpectralState<T>,
    spec: &NonlinearitySpec<T>,
    basis: &BesselBasis<T>,
    sigma: T,
    times: &[T],
    config: &FlowConfig<T>,
) -> Result<GrowthTrack<T>> {
    let mut prev = T::zero();
    for &t in times {
        if t < prev {
            return Err(Error::Config(format!(
                "growth times must be nondecreasing from 0, got {t} after {prev}"
            )));
        }
        prev = t;
    }
    let mut cur = state.clone();
    let mut t_prev = T::zero();
    let mut flagged = false;
    let mut points = Vec::with_capacity(times.len());
    for &t in times {
        let leg = t - t_prev;
        if leg > T::zero() {
            let mut cfg = *config;
            cfg.t_final = leg;
            cfg.record_stride = usize::MAX;
            let traj = evolve(&cur, spec, basis, &cfg)?;
            flagged = flagged || traj.flagged;
            cur = traj.states.into_iter().last().unwrap();
            t_prev = t;
        }
        points.push((t, cur.sobolev_norm(basis, sigma)));
    }
    Ok(GrowthTrack { points, flagged })
}

/// max over points of ||u||^2 / (1 + ln(1 + t)); bounded along typical
/// trajectories when the norm grows at most like sqrt(log t).
pub fn log_growth_ratio<T: Real>(points: &[(T, T)]) -> T {
    points
        .iter()
        .map(|&(t, h)| h * h / (T::one() + (T::one() + t).ln()))
        .fold(T::zero(), T::max)
}
