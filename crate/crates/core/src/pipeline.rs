//! End-to-end solve: spectral check, mask, randomized restarts with
//! polish-and-verify.

use std::time::Instant;

use serde::Serialize;

use crate::admm::{admm_solve_with, sample_direction, AdmmParams, CommutantProjector, TracePoint};
use crate::error::{Error, Result};
use crate::graph::{random_permute, Permutation, WeightedGraph};
use crate::mask::{construct_k, MaskOptions, SparsityMask, DEFAULT_INVARIANT_TOL};
use crate::par;
use crate::polish::{default_verify_tol, distance_to, hungarian_nearest_permutation, verify_permutation};
use crate::spectrum::{spectra_equal, spectrum_default, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Number of random directions tried, at least 1.
    pub restarts: usize,
    pub seed: u64,
    pub use_mask: bool,
    pub use_pruning: bool,
    pub admm: AdmmParams,
    /// Eigenvalue comparison tolerance; `None` uses each spectrum's grouping tolerance.
    pub spectral_tol: Option<f64>,
    pub invariant_tol: f64,
    /// `None` = exact for integer weights, `1e-8 (1 + max |w|)` otherwise.
    pub verify_tol: Option<f64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            seed: 0,
            use_mask: true,
            use_pruning: true,
            admm: AdmmParams::default(),
            spectral_tol: None,
            invariant_tol: DEFAULT_INVARIANT_TOL,
            verify_tol: None,
        }
    }
}

impl SolveConfig {
    pub fn mask_options(&self) -> MaskOptions {
        MaskOptions { degree: true, spectral: true, pruning: self.use_pruning, tol: self.invariant_tol }
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        self.admm.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NotIsomorphicReason {
    SpectraMismatch,
    MaskInfeasible,
    WalkNormMismatch,
}

impl NotIsomorphicReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::SpectraMismatch => "spectra_mismatch",
            Self::MaskInfeasible => "mask_infeasible",
            Self::WalkNormMismatch => "walk_norm_mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Isomorphic(Permutation),
    NotIsomorphic(NotIsomorphicReason),
    /// No restart produced a verified permutation. Not a proof of anything.
    Unknown,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Isomorphic(_) => "isomorphic",
            Self::NotIsomorphic(_) => "not_isomorphic",
            Self::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartRecord {
    /// 1-based restart index.
    pub restart: usize,
    pub seed: u64,
    pub converged: bool,
    pub iters: usize,
    pub verified: bool,
    /// `‖P* − P̃*‖_F` between the relaxed optimum and its rounding.
    pub distance: f64,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub permutation: Permutation,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub verdict: Verdict,
    /// Restarts actually run, in index order, up to the first success.
    pub restarts: Vec<RestartRecord>,
    pub mask_allowed: Option<usize>,
    pub sparsity_ratio: Option<f64>,
    pub setup_time_s: f64,
    pub wall_time_s: f64,
}

impl SolveReport {
    pub fn restarts_used(&self) -> usize {
        self.restarts.len()
    }

    /// Fraction of the restarts run that verified: an estimate of the
    /// single-restart success probability.
    pub fn success_fraction(&self) -> f64 {
        if self.restarts.is_empty() {
            return 0.0;
        }
        self.restarts.iter().filter(|r| r.verified).count() as f64 / self.restarts.len() as f64
    }

    fn early(verdict: Verdict, started: Instant) -> Self {
        let t = started.elapsed().as_secs_f64();
        Self { verdict, restarts: Vec::new(), mask_allowed: None, sparsity_ratio: None, setup_time_s: t, wall_time_s: t }
    }
}

/// Everything the restarts share for one graph pair.
pub(crate) struct Prepared {
    pub mask: SparsityMask,
    pub projector: CommutantProjector,
    pub verify_tol: f64,
}

pub(crate) fn prepare(
    a: &WeightedGraph,
    b: &WeightedGraph,
    sa: &Spectrum,
    sb: &Spectrum,
    cfg: &SolveConfig,
) -> Result<std::result::Result<Prepared, NotIsomorphicReason>> {
    let tol = cfg.spectral_tol.unwrap_or_else(|| sa.grouping_tol().max(sb.grouping_tol()));
    if !spectra_equal(sa, sb, tol)? {
        return Ok(Err(NotIsomorphicReason::SpectraMismatch));
    }
    let mask = if cfg.use_mask {
        let mask = construct_k(a, b, sa, sb, &cfg.mask_options())?;
        if mask.infeasible() {
            return Ok(Err(NotIsomorphicReason::MaskInfeasible));
        }
        if mask.invariant_mismatch() {
            return Ok(Err(NotIsomorphicReason::WalkNormMismatch));
        }
        mask
    } else {
        SparsityMask::all_allowed(a.n())
    };
    Ok(Ok(Prepared {
        mask,
        projector: CommutantProjector::new(sa, sb)?,
        verify_tol: cfg.verify_tol.unwrap_or_else(|| default_verify_tol(a, b)),
    }))
}

/// One random direction: solve, round, verify.
pub(crate) fn run_restart(
    a: &WeightedGraph,
    b: &WeightedGraph,
    prep: &Prepared,
    restart: usize,
    seed: u64,
    params: &AdmmParams,
) -> Result<RestartRecord> {
    let started = Instant::now();
    let dir = sample_direction(a.n(), seed);
    let sol = admm_solve_with(&prep.projector, &prep.mask, &dir, params)
        .map_err(|e| Error::Restart { restart, source: Box::new(e) })?;
    let permutation = hungarian_nearest_permutation(&sol.p);
    let verified = verify_permutation(&permutation, a, b, prep.verify_tol);
    Ok(RestartRecord {
        restart,
        seed,
        converged: sol.converged,
        iters: sol.iters,
        verified,
        distance: distance_to(&permutation, &sol.p),
        wall_time_s: started.elapsed().as_secs_f64(),
        permutation,
        trace: sol.trace,
    })
}

/// Decides whether `a` and `b` are isomorphic.
///
/// Restart `t` (1-based) uses direction seed `cfg.seed + t`. Restarts run in
/// parallel batches; the earliest successful index wins, so the report is the
/// same for any thread count and the result of restart `t` does not depend on
/// `cfg.restarts`.
pub fn solve_gip(a: &WeightedGraph, b: &WeightedGraph, cfg: &SolveConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let started = Instant::now();
    if a.n() != b.n() {
        return Ok(SolveReport::early(Verdict::NotIsomorphic(NotIsomorphicReason::SpectraMismatch), started));
    }
    if a.n() == 0 {
        return Ok(SolveReport::early(Verdict::Isomorphic(Permutation::identity(0)), started));
    }
    let (sa, sb) = (spectrum_default(a)?, spectrum_default(b)?);
    let prep = match prepare(a, b, &sa, &sb, cfg)? {
        Ok(p) => p,
        Err(reason) => return Ok(SolveReport::early(Verdict::NotIsomorphic(reason), started)),
    };
    let setup_time_s = started.elapsed().as_secs_f64();

    let batch = par::width().max(1);
    let mut records: Vec<RestartRecord> = Vec::new();
    let mut next = 1;
    let mut winner = None;
    while next <= cfg.restarts && winner.is_none() {
        let end = (next + batch).min(cfg.restarts + 1);
        let batch_out = par::map_range(next..end, |t| run_restart(a, b, &prep, t, cfg.seed.wrapping_add(t as u64), &cfg.admm));
        for rec in batch_out {
            let rec = rec?;
            let ok = rec.verified;
            records.push(rec);
            if ok {
                winner = Some(records.len() - 1);
                break;
            }
        }
        next = end;
    }
    let verdict = match winner {
        Some(k) => Verdict::Isomorphic(records[k].permutation.clone()),
        None => Verdict::Unknown,
    };
    Ok(SolveReport {
        verdict,
        restarts: records,
        mask_allowed: cfg.use_mask.then(|| prep.mask.allowed_count()),
        sparsity_ratio: cfg.use_mask.then(|| prep.mask.sparsity_ratio()),
        setup_time_s,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Outcome of [`estimate_success_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessStats {
    pub trials: usize,
    pub successes: usize,
    pub mean_iters: f64,
    pub mean_wall_time_s: f64,
    pub converged: usize,
}

impl SuccessStats {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

/// Single-restart success frequency on `(A, QAQᵀ)` for fresh random `Q` and
/// `W` per trial. Trial `t` uses permutation seed and direction seed
/// `seed + t`, on separate random streams.
pub fn estimate_success_rate(a: &WeightedGraph, trials: usize, seed: u64, cfg: &SolveConfig) -> Result<SuccessStats> {
    estimate_with(a, trials, seed, cfg, |r, f| par::map_range(r, f))
}

/// [`estimate_success_rate`] pinned to the calling thread.
pub fn estimate_success_rate_seq(a: &WeightedGraph, trials: usize, seed: u64, cfg: &SolveConfig) -> Result<SuccessStats> {
    estimate_with(a, trials, seed, cfg, |r, f| par::map_range_seq(r, f))
}

struct TrialOutcome {
    iters: usize,
    wall_time_s: f64,
    verified: bool,
    converged: bool,
}

type Outcome = Result<Option<TrialOutcome>>;

fn estimate_with<M>(a: &WeightedGraph, trials: usize, seed: u64, cfg: &SolveConfig, map: M) -> Result<SuccessStats>
where
    M: FnOnce(std::ops::Range<usize>, &(dyn Fn(usize) -> Outcome + Sync + Send)) -> Vec<Outcome>,
{
    cfg.validate()?;
    let sa = spectrum_default(a)?;
    let trial = |t: usize| -> Outcome {
        let s = seed.wrapping_add(t as u64);
        let (b, _) = random_permute(a, s);
        let sb = spectrum_default(&b)?;
        // a sound precheck never rejects a permuted copy; count it as a miss
        let Ok(prep) = prepare(a, &b, &sa, &sb, cfg)? else {
            return Ok(None);
        };
        let rec = run_restart(a, &b, &prep, 1, s, &cfg.admm)?;
        Ok(Some(TrialOutcome { iters: rec.iters, wall_time_s: rec.wall_time_s, verified: rec.verified, converged: rec.converged }))
    };
    let outcomes = map(0..trials, &trial);
    let mut stats = SuccessStats { trials, successes: 0, mean_iters: 0.0, mean_wall_time_s: 0.0, converged: 0 };
    for o in outcomes {
        if let Some(o) = o? {
            stats.mean_iters += o.iters as f64;
            stats.mean_wall_time_s += o.wall_time_s;
            stats.successes += o.verified as usize;
            stats.converged += o.converged as usize;
        }
    }
    if trials > 0 {
        stats.mean_iters /= trials as f64;
        stats.mean_wall_time_s /= trials as f64;
    }
    Ok(stats)
}
