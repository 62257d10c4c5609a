//! The Gaussian base measure and its Gibbs reweighting.
//!
//! A draw from the base measure is the random series u = sum_n g_n z_n^{-1} e_n
//! with g_n i.i.d. complex standard Gaussians (E|g_n|^2 = 1).  States are kept
//! in the weighted frame e_{n,s} = z_n^{-s} e_n, i.e. as coefficients
//! c_n = g_n z_n^{s-1}, which makes every Sobolev norm a diagonal sum.
//!
//! The interacting measure is obtained by importance weighting: each sample
//! carries log f(u) = int_0^1 V(u(r)) r dr when ||u||_{L2} <= R and weight
//! zero otherwise.  Weighting (rather than rejection or MCMC) keeps base and
//! weighted statistics computable from a single ensemble; the effective
//! sample size quantifies the cost.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::basis::BesselBasis;
use crate::error::{Error, Result};
use crate::io::{read_f64s, write_f64s};
use crate::nonlinearity::NonlinearitySpec;
use crate::stats;
use crate::transform::{synthesize, NodalField};
use crate::{Cplx, Real};

pub const ENSEMBLE_VERSION: u32 = 1;

/// Frame exponent used when none is configured: 0.9 * alpha/(alpha+2),
/// safely inside the admissible open interval (0, alpha/(alpha+2)).
pub fn default_s<T: Real>(alpha: T) -> T {
    T::of(0.9) * alpha / (alpha + T::of(2.0))
}

/// Coefficients of u = sum_n c_n e_{n,s} in the weighted frame
/// e_{n,s} = z_n^{-s} e_n.  `basis_id` ties the state to the basis it was
/// built against (content hash), catching cross-basis mixups cheaply.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState<T> {
    pub coeffs: Vec<Cplx<T>>,
    pub s: T,
    pub basis_id: u64,
}

impl<T: Real> SpectralState<T> {
    pub fn new(coeffs: Vec<Cplx<T>>, s: T, basis: &BesselBasis<T>) -> Self {
        assert!(
            coeffs.len() <= basis.n_modes(),
            "state has {} modes but the basis only {}",
            coeffs.len(),
            basis.n_modes()
        );
        SpectralState { coeffs, s, basis_id: basis.content_hash() }
    }

    pub fn zero(n_modes: usize, s: T, basis: &BesselBasis<T>) -> Self {
        Self::new(vec![Cplx::new(T::zero(), T::zero()); n_modes], s, basis)
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    /// ||u||_{H^sigma} = (sum z_n^{2(sigma-s)} |c_n|^2)^{1/2}.
    pub fn sobolev_norm(&self, basis: &BesselBasis<T>, sigma: T) -> T {
        debug_assert_eq!(self.basis_id, basis.content_hash());
        let e = T::of(2.0) * (sigma - self.s);
        let terms: Vec<T> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| basis.zero(i + 1).powf(e) * c.norm_sqr())
            .collect();
        stats::pairwise_sum(&terms).sqrt()
    }

    /// ||u||_{L2}, the sigma = 0 Sobolev norm.
    pub fn l2_norm(&self, basis: &BesselBasis<T>) -> T {
        self.sobolev_norm(basis, T::zero())
    }

    /// L2 pairing <u, v> = sum z_n^{-2s} c_n conj(d_n).
    pub fn l2_inner(&self, other: &Self, basis: &BesselBasis<T>) -> Cplx<T> {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        let mut acc = Cplx::new(T::zero(), T::zero());
        for (i, (c, d)) in self.coeffs.iter().zip(&other.coeffs).enumerate() {
            let w = basis.zero(i + 1).powf(-T::of(2.0) * self.s);
            acc = acc + c * d.conj() * w;
        }
        acc
    }

    /// Coefficients of u in the plain frame e_n, i.e. c_n z_n^{-s}.
    pub fn physical_coeffs(&self, basis: &BesselBasis<T>) -> Vec<Cplx<T>> {
        debug_assert_eq!(self.basis_id, basis.content_hash());
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * basis.zero(i + 1).powf(-self.s))
            .collect()
    }

    /// Grid values of u.
    pub fn to_field(&self, basis: &BesselBasis<T>) -> NodalField<T> {
        synthesize(basis, &self.physical_coeffs(basis))
    }

    /// Raw Gaussian amplitudes g_n = c_n z_n^{1-s}.
    pub fn gaussian_amplitudes(&self, basis: &BesselBasis<T>) -> Vec<Cplx<T>> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * basis.zero(i + 1).powf(T::one() - self.s))
            .collect()
    }

    /// Keep only the dyadic block N <= <z_n> < 2N, where <x> = 1 + |x|.
    /// `dyadic_n` must be a power of two.
    pub fn dyadic_project(&self, basis: &BesselBasis<T>, dyadic_n: u64) -> Self {
        assert!(dyadic_n.is_power_of_two(), "dyadic index must be a power of two");
        let lo = T::of(dyadic_n as f64);
        let hi = T::of(2.0 * dyadic_n as f64);
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let jz = T::one() + basis.zero(i + 1);
            if !(jz >= lo && jz < hi) {
                *c = Cplx::new(T::zero(), T::zero());
            }
        }
        out
    }
}

/// One draw c_n = g_n z_n^{s-1}.  The stream is keyed by (seed, index): each
/// sample gets its own counter stream, and mode n always consumes the
/// (2n-1)-th and 2n-th variates of that stream, so ensembles are
/// reproducible no matter how generation is scheduled.
pub fn sample_mu<T: Real>(basis: &BesselBasis<T>, s: T, seed: u64, index: u64) -> SpectralState<T>
where
    StandardNormal: Distribution<T>,
{
    debug_assert!(s > T::zero() && s < T::of(0.5));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let half = T::of(0.5).sqrt();
    let coeffs = (0..basis.n_modes())
        .map(|i| {
            let re: T = StandardNormal.sample(&mut rng);
            let im: T = StandardNormal.sample(&mut rng);
            let amp = basis.zero(i + 1).powf(s - T::one()) * half;
            Cplx::new(re * amp, im * amp)
        })
        .collect();
    SpectralState { coeffs, s, basis_id: basis.content_hash() }
}

/// log f(u) = int_0^1 V(u(r)) r dr, or -inf when ||u||_{L2} > R (the sample
/// falls outside the cutoff ball and carries weight zero).
pub fn gibbs_log_density<T: Real>(
    state: &SpectralState<T>,
    spec: &NonlinearitySpec<T>,
    r_cutoff: T,
    basis: &BesselBasis<T>,
) -> T {
    if state.l2_norm(basis) > r_cutoff {
        return T::neg_infinity();
    }
    let field = state.to_field(basis);
    spec.potential_integral(basis, &field)
}

/// An importance-weighted ensemble: base-measure samples plus log f weights.
#[derive(Clone, Debug)]
pub struct GibbsEnsemble<T> {
    pub states: Vec<SpectralState<T>>,
    pub log_weights: Vec<T>,
    pub r_cutoff: T,
    pub seed: u64,
    pub s: T,
    pub spec: NonlinearitySpec<T>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct EnsembleHeader<T> {
    pub version: u32,
    pub seed: u64,
    pub n_modes: usize,
    pub n_samples: usize,
    pub s: T,
    pub r_cutoff: T,
    pub spec: NonlinearitySpec<T>,
    pub basis_hash: u64,
}

impl<T: Real> GibbsEnsemble<T> {
    pub fn generate(
        basis: &BesselBasis<T>,
        s: T,
        spec: &NonlinearitySpec<T>,
        r_cutoff: T,
        n_samples: usize,
        seed: u64,
    ) -> Self
    where
        StandardNormal: Distribution<T>,
    {
        let states: Vec<SpectralState<T>> = (0..n_samples as u64)
            .into_par_iter()
            .map(|i| sample_mu(basis, s, seed, i))
            .collect();
        let log_weights: Vec<T> = states
            .par_iter()
            .map(|st| gibbs_log_density(st, spec, r_cutoff, basis))
            .collect();
        GibbsEnsemble { states, log_weights, r_cutoff, seed, s, spec: *spec }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn accepted(&self, i: usize) -> bool {
        self.log_weights[i] > T::neg_infinity()
    }

    /// f(u_i) = exp(log weight), zero for rejected samples.
    pub fn weights(&self) -> Vec<T> {
        self.log_weights
            .iter()
            .map(|&lw| if lw > T::neg_infinity() { lw.exp() } else { T::zero() })
            .collect()
    }

    /// Fraction of samples inside the L2 cutoff ball.
    pub fn acceptance_fraction(&self) -> T {
        let n = self.log_weights.iter().filter(|&&lw| lw > T::neg_infinity()).count();
        T::from_usize(n).unwrap() / T::from_usize(self.len().max(1)).unwrap()
    }

    pub fn ess(&self) -> T {
        stats::effective_sample_size(&self.weights())
    }

    /// Unweighted per-mode (mean, standard error) of |c_n|^2.
    pub fn mode_second_moments(&self) -> Vec<(T, T)> {
        let m = self.len();
        assert!(m >= 2);
        let n_modes = self.states[0].n_modes();
        let mut out = Vec::with_capacity(n_modes);
        let mut vals = vec![T::zero(); m];
        for n in 0..n_modes {
            for (v, st) in vals.iter_mut().zip(&self.states) {
                *v = st.coeffs[n].norm_sqr();
            }
            let mean = stats::pairwise_sum(&vals) / T::from_usize(m).unwrap();
            let sq: Vec<T> = vals.iter().map(|&v| (v - mean) * (v - mean)).collect();
            let var = stats::pairwise_sum(&sq) / T::from_usize(m - 1).unwrap();
            let se = (var / T::from_usize(m).unwrap()).sqrt();
            out.push((mean, se));
        }
        out
    }

    pub fn save(&self, path: &Path, basis: &BesselBasis<T>) -> Result<()>
    where
        T: Serialize,
    {
        let header = EnsembleHeader {
            version: ENSEMBLE_VERSION,
            seed: self.seed,
            n_modes: self.states.first().map_or(0, |s| s.n_modes()),
            n_samples: self.len(),
            s: self.s,
            r_cutoff: self.r_cutoff,
            spec: self.spec,
            basis_hash: basis.content_hash(),
        };
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        let mut row: Vec<T> = Vec::new();
        for st in &self.states {
            row.clear();
            for c in &st.coeffs {
                row.push(c.re);
                row.push(c.im);
            }
            write_f64s(&mut w, &row)?;
        }
        write_f64s(&mut w, &self.log_weights)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(Self, EnsembleHeader<T>)>
    where
        T: DeserializeOwned,
    {
        let mut r = BufReader::new(File::open(path)?);
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: EnsembleHeader<T> = serde_json::from_str(line.trim_end())
            .map_err(|e| Error::Format(format!("bad ensemble header: {e}")))?;
        if header.version != ENSEMBLE_VERSION {
            return Err(Error::Format(format!(
                "ensemble version {} unsupported (expected {ENSEMBLE_VERSION})",
                header.version
            )));
        }
        let total = header.n_modes.saturating_mul(header.n_samples);
        if total > 200_000_000 {
            return Err(Error::Format(format!(
                "ensemble header claims {} coefficients; refusing",
                total
            )));
        }
        let mut states = Vec::with_capacity(header.n_samples);
        for _ in 0..header.n_samples {
            let row: Vec<T> = read_f64s(&mut r, 2 * header.n_modes)?;
            let coeffs = row.chunks_exact(2).map(|p| Cplx::new(p[0], p[1])).collect();
            states.push(SpectralState { coeffs, s: header.s, basis_id: header.basis_hash });
        }
        let log_weights = read_f64s(&mut r, header.n_samples)?;
        let ens = GibbsEnsemble {
            states,
            log_weights,
            r_cutoff: header.r_cutoff,
            seed: header.seed,
            s: header.s,
            spec: header.spec,
        };
        Ok((ens, header))
    }

    /// Per-sample rows (index, ||u||_{L2}, ||u||_{H^sigma}..., log f) as CSV.
    /// Rejected samples print -inf in the last column.
    pub fn write_sample_csv<W: Write>(
        &self,
        basis: &BesselBasis<T>,
        sigmas: &[T],
        w: &mut W,
    ) -> Result<()> {
        write!(w, "index,l2")?;
        for sg in sigmas {
            write!(w, ",h_{sg}")?;
        }
        writeln!(w, ",log_f")?;
        for (i, st) in self.states.iter().enumerate() {
            write!(w, "{},{}", i, st.l2_norm(basis))?;
            for &sg in sigmas {
                write!(w, ",{}", st.sobolev_norm(basis, sg))?;
            }
            writeln!(w, ",{}", self.log_weights[i])?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TailPoint<T> {
    pub lambda: T,
    pub exceedance: T,
}

/// Empirical exceedance curve of an H^sigma norm with a log P vs lambda^2
/// least-squares fit over the strict tail (0 < P <= 1/2).
#[derive(Clone, Debug, Serialize)]
pub struct TailCurve<T> {
    pub sigma: T,
    pub points: Vec<TailPoint<T>>,
    pub fit_slope: T,
    pub fit_intercept: T,
    pub fit_r_squared: T,
}

fn sobolev_sq_batch<T: Real>(
    states: &[SpectralState<T>],
    basis: &BesselBasis<T>,
    sigma: T,
) -> Vec<T> {
    if states.is_empty() {
        return Vec::new();
    }
    let s = states[0].s;
    let n_modes = states[0].n_modes();
    let fac: Vec<T> = (1..=n_modes)
        .map(|n| basis.zero(n).powf(T::of(2.0) * (sigma - s)))
        .collect();
    states
        .iter()
        .map(|st| {
            let terms: Vec<T> =
                st.coeffs.iter().zip(&fac).map(|(c, &f)| f * c.norm_sqr()).collect();
            stats::pairwise_sum(&terms)
        })
        .collect()
}

fn tail_from_norms<T: Real>(
    norms_sq: &[T],
    weights: Option<&[T]>,
    sigma: T,
    lambdas: &[T],
) -> TailCurve<T> {
    let total = match weights {
        Some(w) => stats::pairwise_sum(w),
        None => T::from_usize(norms_sq.len()).unwrap(),
    };
    let mut points = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let lam_sq = lam * lam;
        let mass = match weights {
            Some(w) => {
                let hits: Vec<T> = norms_sq
                    .iter()
                    .zip(w)
                    .map(|(&nsq, &wi)| if nsq > lam_sq { wi } else { T::zero() })
                    .collect();
                stats::pairwise_sum(&hits)
            }
            None => {
                let n = norms_sq.iter().filter(|&&nsq| nsq > lam_sq).count();
                T::from_usize(n).unwrap()
            }
        };
        points.push(TailPoint { lambda: lam, exceedance: mass / total });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in &points {
        if p.exceedance > T::zero() && p.exceedance <= T::of(0.5) {
            xs.push(p.lambda * p.lambda);
            ys.push(p.exceedance.ln());
        }
    }
    let (slope, intercept, r2) = if xs.len() >= 2 {
        let fit = stats::linear_fit(&xs, &ys);
        (fit.slope, fit.intercept, fit.r_squared)
    } else {
        (T::zero(), T::zero(), T::zero())
    };
    TailCurve { sigma, points, fit_slope: slope, fit_intercept: intercept, fit_r_squared: r2 }
}

/// Exceedance of ||u||_{H^sigma} under the unweighted base samples.
pub fn tail_curve<T: Real>(
    ensemble: &GibbsEnsemble<T>,
    basis: &BesselBasis<T>,
    sigma: T,
    lambdas: &[T],
) -> TailCurve<T> {
    let norms_sq = sobolev_sq_batch(&ensemble.states, basis, sigma);
    tail_from_norms(&norms_sq, None, sigma, lambdas)
}

/// Exceedance under the f-weighted (Gibbs) ensemble.
pub fn weighted_tail_curve<T: Real>(
    ensemble: &GibbsEnsemble<T>,
    basis: &BesselBasis<T>,
    sigma: T,
    lambdas: &[T],
) -> TailCurve<T> {
    let norms_sq = sobolev_sq_batch(&ensemble.states, basis, sigma);
    let w = ensemble.weights();
    tail_from_norms(&norms_sq, Some(&w), sigma, lambdas)
}

/// Refit the log P vs lambda^2 line over points with P in [p_lo, p_hi].
pub fn tail_fit<T: Real>(curve: &TailCurve<T>, p_lo: T, p_hi: T) -> Option<stats::LineFit<T>> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in &curve.points {
        if p.exceedance >= p_lo && p.exceedance <= p_hi {
            xs.push(p.lambda * p.lambda);
            ys.push(p.exceedance.ln());
        }
    }
    (xs.len() >= 2).then(|| stats::linear_fit(&xs, &ys))
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionMoment<T> {
    pub q: T,
    pub estimate: T,
    pub std_error: T,
    pub first_half: T,
    pub second_half: T,
    /// Halves agree within 3 pooled standard errors.
    pub stable: bool,
    /// Top 1% of the q-th-power weights carry more than half the mass, so
    /// the estimate rests on a handful of samples.
    pub heavy_tail: bool,
}

/// Monte Carlo estimate of E[f(u)^q] under the base measure; rejected
/// samples contribute 0.  Computed in shifted log space.
pub fn partition_moment<T: Real>(ensemble: &GibbsEnsemble<T>, q: T) -> PartitionMoment<T> {
    debug_assert!(q >= T::one() && q <= T::of(8.0));
    let m = ensemble.len();
    assert!(m >= 2);
    let qlw: Vec<T> = ensemble.log_weights.iter().map(|&lw| q * lw).collect();
    let shift = qlw
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(T::neg_infinity(), T::max);
    if !shift.is_finite() {
        return PartitionMoment {
            q,
            estimate: T::zero(),
            std_error: T::zero(),
            first_half: T::zero(),
            second_half: T::zero(),
            stable: true,
            heavy_tail: false,
        };
    }
    let scale = shift.exp();
    let xs: Vec<T> = qlw
        .iter()
        .map(|&v| if v.is_finite() { (v - shift).exp() } else { T::zero() })
        .collect();

    let mean_scaled = |slice: &[T]| -> (T, T) {
        let k = T::from_usize(slice.len()).unwrap();
        let mean = stats::pairwise_sum(slice) / k;
        let devs: Vec<T> = slice.iter().map(|&x| (x - mean) * (x - mean)).collect();
        let var = stats::pairwise_sum(&devs) / (k - T::one());
        (mean * scale, (var / k).sqrt() * scale)
    };

    let (estimate, std_error) = mean_scaled(&xs);
    let (h1, se1) = mean_scaled(&xs[..m / 2]);
    let (h2, se2) = mean_scaled(&xs[m / 2..]);
    let stable = (h1 - h2).abs() <= T::of(3.0) * (se1 * se1 + se2 * se2).sqrt();

    let mut sorted = xs.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top_n = (m + 99) / 100;
    let top = stats::pairwise_sum(&sorted[..top_n]);
    let all = stats::pairwise_sum(&sorted);
    let heavy_tail = all > T::zero() && top > T::of(0.5) * all;

    PartitionMoment { q, estimate, std_error, first_half: h1, second_half: h2, stable, heavy_tail }
}
