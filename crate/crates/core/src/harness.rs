//! Benchmark families, success-rate rows and ADMM timing sweeps.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::admm::{admm_solve_with, sample_direction, AdmmParams, CommutantProjector};
use crate::error::{Error, Result};
use crate::graph::{erdos_renyi, frucht, grid2d, petersen, random_permute, WeightedGraph};
use crate::io::load_graph;
use crate::mask::construct_k;
use crate::pipeline::{estimate_success_rate, SolveConfig};
use crate::spectrum::spectrum_default;

/// Edge probability of the random-graph family.
pub const R1N_EDGE_PROBABILITY: f64 = 0.1;

pub const BENCH_CSV_HEADER: &str =
    "family,n,allowed,sparsity_ratio,trials,success_no_mask,success_with_mask,mean_iters,mean_wall_time_s";

pub const TIMING_CSV_HEADER: &str = "n,repeats,iters,iter_time_s,iter_time_min_s,total_time_s,total_time_min_s";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// Erdős–Rényi with edge probability 0.1.
    R1n,
    /// Square grid; `n` must be a perfect square.
    G2n,
    Frucht,
    Petersen,
    File(String),
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r1n" => Ok(Self::R1n),
            "g2n" => Ok(Self::G2n),
            "frucht" => Ok(Self::Frucht),
            "petersen" => Ok(Self::Petersen),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(Self::File(path.to_string())),
                _ => Err(Error::InvalidArgument(format!("unknown family `{s}`"))),
            },
        }
    }
}

impl Family {
    pub fn name(&self) -> String {
        match self {
            Self::R1n => "r1n".into(),
            Self::G2n => "g2n".into(),
            Self::Frucht => "frucht".into(),
            Self::Petersen => "petersen".into(),
            Self::File(p) => format!("file:{p}"),
        }
    }

    /// Families whose size is fixed ignore `n`.
    pub fn graph(&self, n: usize, seed: u64) -> Result<WeightedGraph> {
        match self {
            Self::R1n => erdos_renyi(n, R1N_EDGE_PROBABILITY, seed),
            Self::G2n => {
                let side = (n as f64).sqrt().round() as usize;
                if side * side != n {
                    return Err(Error::InvalidArgument(format!("g2n size {n} is not a perfect square")));
                }
                grid2d(side, side)
            }
            Self::Frucht => Ok(frucht()),
            Self::Petersen => Ok(petersen()),
            Self::File(p) => load_graph(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub family: String,
    pub n: usize,
    pub allowed: usize,
    /// `1 − |K| / n²`.
    pub sparsity_ratio: f64,
    pub trials: usize,
    pub success_no_mask: Option<f64>,
    pub success_with_mask: Option<f64>,
    /// Averages over every LP solve in the row (both settings).
    pub mean_iters: Option<f64>,
    pub mean_wall_time_s: Option<f64>,
}

impl BenchmarkRow {
    pub fn csv_line(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_default();
        format!(
            "{},{},{},{:.6},{},{},{},{},{}",
            self.family,
            self.n,
            self.allowed,
            self.sparsity_ratio,
            self.trials,
            opt(self.success_no_mask),
            opt(self.success_with_mask),
            opt(self.mean_iters),
            opt(self.mean_wall_time_s),
        )
    }
}

/// Mask statistics plus single-restart success rates with and without the
/// mask. The mask is measured on `(A, QAQᵀ)` for the first trial permutation;
/// it is equivariant, so the count does not depend on `Q`.
pub fn bench_row(family: &Family, n: usize, trials: usize, seed: u64, cfg: &SolveConfig) -> Result<BenchmarkRow> {
    let a = family.graph(n, seed)?;
    let (b, _) = random_permute(&a, seed);
    let (sa, sb) = (spectrum_default(&a)?, spectrum_default(&b)?);
    let mask = construct_k(&a, &b, &sa, &sb, &cfg.mask_options())?;

    let mut row = BenchmarkRow {
        family: family.name(),
        n: a.n(),
        allowed: mask.allowed_count(),
        sparsity_ratio: mask.sparsity_ratio(),
        trials,
        success_no_mask: None,
        success_with_mask: None,
        mean_iters: None,
        mean_wall_time_s: None,
    };
    if trials > 0 {
        let without = estimate_success_rate(&a, trials, seed, &SolveConfig { use_mask: false, ..cfg.clone() })?;
        let with = estimate_success_rate(&a, trials, seed, &SolveConfig { use_mask: true, ..cfg.clone() })?;
        row.success_no_mask = Some(without.rate());
        row.success_with_mask = Some(with.rate());
        row.mean_iters = Some((without.mean_iters + with.mean_iters) / 2.0);
        row.mean_wall_time_s = Some((without.mean_wall_time_s + with.mean_wall_time_s) / 2.0);
    }
    Ok(row)
}

pub fn write_bench_csv<W: Write>(mut out: W, rows: &[BenchmarkRow]) -> std::io::Result<()> {
    writeln!(out, "{BENCH_CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub n: usize,
    pub repeats: usize,
    /// Mean iteration count per repeat.
    pub iters: f64,
    pub iter_time_s: f64,
    pub iter_time_min_s: f64,
    pub total_time_s: f64,
    pub total_time_min_s: f64,
}

impl TimingRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{:e},{:e}",
            self.n, self.repeats, self.iters, self.iter_time_s, self.iter_time_min_s, self.total_time_s, self.total_time_min_s
        )
    }
}

/// Times the ADMM solve alone (no eigendecomposition, no polishing) on
/// random-graph pairs. Repeat `r` uses graph, permutation and direction seed
/// `seed + r`.
pub fn time_admm(n: usize, repeats: usize, seed: u64, params: &AdmmParams) -> Result<TimingRow> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let mut iter_times = Vec::with_capacity(repeats);
    let mut totals = Vec::with_capacity(repeats);
    let mut iters = 0usize;
    for r in 0..repeats {
        let s = seed.wrapping_add(r as u64);
        let a = erdos_renyi(n, R1N_EDGE_PROBABILITY, s)?;
        let (b, _) = random_permute(&a, s);
        let (sa, sb) = (spectrum_default(&a)?, spectrum_default(&b)?);
        let projector = CommutantProjector::new(&sa, &sb)?;
        let mask = crate::mask::SparsityMask::all_allowed(n);
        let dir = sample_direction(n, s);
        let started = Instant::now();
        let sol = admm_solve_with(&projector, &mask, &dir, params)?;
        let total = started.elapsed().as_secs_f64();
        iters += sol.iters;
        totals.push(total);
        iter_times.push(total / sol.iters as f64);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(TimingRow {
        n,
        repeats,
        iters: iters as f64 / repeats as f64,
        iter_time_s: mean(&iter_times),
        iter_time_min_s: min(&iter_times),
        total_time_s: mean(&totals),
        total_time_min_s: min(&totals),
    })
}

pub fn write_timing_csv<W: Write>(mut out: W, rows: &[TimingRow]) -> std::io::Result<()> {
    writeln!(out, "{TIMING_CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_parsing() {
        assert_eq!("R1N".parse::<Family>().unwrap(), Family::R1n);
        assert_eq!("file:x.g".parse::<Family>().unwrap(), Family::File("x.g".into()));
        assert!("kef".parse::<Family>().is_err());
        assert!("file:".parse::<Family>().is_err());
        assert!(Family::G2n.graph(10, 0).is_err());
        assert_eq!(Family::G2n.graph(64, 0).unwrap().n(), 64);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<_> = [100.0, 200.0, 400.0].iter().map(|&n: &f64| (n, 3.0 * n.powi(3))).collect();
        assert!((loglog_slope(&pts) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn frucht_row_without_trials() {
        let cfg = SolveConfig { use_pruning: false, ..SolveConfig::default() };
        let row = bench_row(&Family::Frucht, 0, 0, 1, &cfg).unwrap();
        assert_eq!(row.allowed, 14);
        assert_eq!(row.csv_line(), "frucht,12,14,0.097222,0,,,,");
    }

    #[test]
    fn timing_aggregates_repeats() {
        let params = AdmmParams { max_iter: 3, ..AdmmParams::default() };
        let row = time_admm(20, 3, 5, &params).unwrap();
        assert_eq!(row.repeats, 3);
        assert!(row.iter_time_min_s <= row.iter_time_s);
        assert!(row.total_time_min_s <= row.total_time_s);
        let mut buf = Vec::new();
        write_timing_csv(&mut buf, &[row]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }
}
