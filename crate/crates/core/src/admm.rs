//! Consensus ADMM for the masked, relaxed isomorphism LP
//!
//! ```text
//! minimize    Tr(Wᵀ P)
//! subject to  P A = Ã P,  P 1 = 1,  Pᵀ 1 = 1,  P ≥ 0,  P_ij = 0 for (i, j) ∈ K
//! ```
//!
//! split as `f1(P1) + f2(P2) + f3(P3)` with consensus `Z = P1 = P2 = P3`,
//! where `f1` carries half the objective and the row sums, `f2` the other half
//! and the column sums, `f3` nonnegativity and the mask. `Z` lives in the
//! commutant `{Z : Z A = Ã Z}`, whose orthogonal projection is a change of
//! basis into the two eigenbases followed by zeroing the blocks that couple
//! different eigenvalues. The penalty is fixed at 1; rescaling `W` plays the
//! same role.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::mask::SparsityMask;
use crate::rng::{stream, Purpose};
use crate::spectrum::Spectrum;

/// ADMM penalty parameter.
pub const RHO: f64 = 1.0;

const SINKHORN_ITERS: usize = 50;
const SINKHORN_BALANCE_TOL: f64 = 1e-3;

/// Linear objective `Tr(Wᵀ P)`.
#[derive(Debug, Clone)]
pub struct Direction {
    pub w: DMatrix<f64>,
    pub seed: u64,
}

impl Direction {
    /// Uses `w` as is, without rescaling.
    pub fn from_matrix(w: DMatrix<f64>) -> Self {
        Self { w, seed: 0 }
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn mean_abs(&self) -> f64 {
        self.w.iter().map(|x| x.abs()).sum::<f64>() / self.w.len() as f64
    }
}

/// i.i.d. standard normal `W`, rescaled so that the mean of `|W_ij|` is 1.
pub fn sample_direction(n: usize, seed: u64) -> Direction {
    assert!(n >= 1, "direction needs n >= 1");
    let mut rng = stream(seed, Purpose::Direction);
    let w: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let scale = w.iter().map(|x| x.abs()).sum::<f64>() / (n * n) as f64;
    Direction { w: w / scale, seed }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmParams {
    pub max_iter: usize,
    /// Primal stopping threshold per unit of `n`: `max_i ‖P_i − Z‖_F ≤ eps_primal · n`.
    pub eps_primal: f64,
    /// Dual stopping threshold per unit of `n`: `‖Z − Z_prev‖_F ≤ eps_dual · n`.
    pub eps_dual: f64,
    /// Consecutive passing iterations required before stopping.
    pub patience: usize,
    pub record_trace: bool,
}

impl Default for AdmmParams {
    fn default() -> Self {
        Self { max_iter: 5000, eps_primal: 1e-7, eps_dual: 1e-7, patience: 5, record_trace: false }
    }
}

impl AdmmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_primal > 0.0 && self.eps_dual > 0.0) {
            return Err(Error::InvalidArgument("ADMM tolerances must be positive".into()));
        }
        if self.max_iter == 0 || self.patience == 0 {
            return Err(Error::InvalidArgument("max_iter and patience must be at least 1".into()));
        }
        Ok(())
    }
}

/// One line of the residual trace (`iter,primal,dual`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iter: usize,
    pub primal: f64,
    pub dual: f64,
}

#[derive(Debug, Clone)]
pub struct RelaxedSolution {
    pub p: DMatrix<f64>,
    pub converged: bool,
    pub iters: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub trace: Vec<TracePoint>,
}

/// `R_ij = 1` iff eigenvalue slots `i` and `j` belong to the same group.
pub fn commutant_projector_mask(sa: &Spectrum, sb: &Spectrum) -> Result<DMatrix<bool>> {
    if sa.multiplicities() != sb.multiplicities() {
        return Err(Error::GroupMismatch(format!("{:?} vs {:?}", sa.multiplicities(), sb.multiplicities())));
    }
    let n = sa.n();
    let mut slot = Vec::with_capacity(n);
    for (g, grp) in sa.groups().iter().enumerate() {
        slot.extend(std::iter::repeat_n(g, grp.multiplicity()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| slot[i] == slot[j]))
}

/// Orthogonal projection onto `{Z : Z A = Ã Z}` written out densely:
/// `Ṽ ((Ṽᵀ M V) ∘ R) Vᵀ`.
pub fn project_commutant(m: &DMatrix<f64>, sa: &Spectrum, sb: &Spectrum, r: &DMatrix<bool>) -> DMatrix<f64> {
    let v = sa.full_basis();
    let vt = sb.full_basis();
    let mut inner = vt.transpose() * m * &v;
    inner.zip_apply(r, |x, keep| {
        if !keep {
            *x = 0.0
        }
    });
    vt * inner * v.transpose()
}

/// Eigenbases of both graphs assembled once per pair. The projection
/// exploits that `R` is block diagonal, so only `Mᵀ Ṽ` and `X Vᵀ` are full
/// `n³` products.
#[derive(Debug, Clone)]
pub struct CommutantProjector {
    n: usize,
    v: DMatrix<f64>,
    v_t: DMatrix<f64>,
    v_tilde: DMatrix<f64>,
    blocks: Vec<(usize, usize)>,
}

impl CommutantProjector {
    pub fn new(sa: &Spectrum, sb: &Spectrum) -> Result<Self> {
        if sa.n() != sb.n() {
            return Err(Error::SizeMismatch(sa.n(), sb.n()));
        }
        if sa.multiplicities() != sb.multiplicities() {
            return Err(Error::GroupMismatch(format!("{:?} vs {:?}", sa.multiplicities(), sb.multiplicities())));
        }
        let v = sa.full_basis();
        let blocks = sa.offsets().into_iter().zip(sa.multiplicities()).collect();
        Ok(Self { n: sa.n(), v_t: v.transpose(), v, v_tilde: sb.full_basis(), blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn project(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut scratch = ProjectScratch::new(self.n);
        let mut out = DMatrix::zeros(self.n, self.n);
        self.project_into(m, &mut out, &mut scratch);
        out
    }

    /// `Z = X Vᵀ` with `X = Ṽ blockdiag(G)` and `G_b = (Ṽᵀ M V)_bb`, so every
    /// block works on contiguous columns.
    fn project_into(&self, m: &DMatrix<f64>, out: &mut DMatrix<f64>, s: &mut ProjectScratch) {
        // columns of Mᵀ Ṽ are the rows of Ṽᵀ M; the blocked kernel behind
        // `gemm` needs an explicit transpose
        m.transpose_to(&mut s.mt);
        s.t.gemm(1.0, &s.mt, &self.v_tilde, 0.0);
        for &(o, len) in &self.blocks {
            if len == 1 {
                let g = s.t.column(o).dot(&self.v.column(o));
                s.u.column_mut(o).axpy(g, &self.v_tilde.column(o), 0.0);
            } else {
                let g = s.t.columns(o, len).tr_mul(&self.v.columns(o, len));
                s.u.columns_mut(o, len).gemm(1.0, &self.v_tilde.columns(o, len), &g, 0.0);
            }
        }
        out.gemm(1.0, &s.u, &self.v_t, 0.0);
    }
}

struct ProjectScratch {
    mt: DMatrix<f64>,
    t: DMatrix<f64>,
    u: DMatrix<f64>,
}

impl ProjectScratch {
    fn new(n: usize) -> Self {
        Self { mt: DMatrix::zeros(n, n), t: DMatrix::zeros(n, n), u: DMatrix::zeros(n, n) }
    }
}

/// Sinkhorn-balanced mask indicator, or `S / n` if balancing stalls.
fn initial_point(s: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    let mut p = s.clone();
    for _ in 0..SINKHORN_ITERS {
        for mut row in p.row_iter_mut() {
            let sum = row.sum();
            if sum > 0.0 {
                row /= sum;
            }
        }
        for mut col in p.column_iter_mut() {
            let sum = col.sum();
            if sum > 0.0 {
                col /= sum;
            }
        }
    }
    let row_err = p.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    let col_err = p.column_iter().map(|c| (c.sum() - 1.0).abs()).fold(0.0, f64::max);
    if row_err.max(col_err) > SINKHORN_BALANCE_TOL {
        return s / n as f64;
    }
    p
}

/// The ADMM iterates. `primal_residual[k]` and `dual_residual[k]` hold the
/// residuals after iteration `k + 1`.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub p1: DMatrix<f64>,
    pub p2: DMatrix<f64>,
    pub p3: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub y1: DMatrix<f64>,
    pub y2: DMatrix<f64>,
    pub y3: DMatrix<f64>,
    pub iter: usize,
    pub primal_residual: Vec<f64>,
    pub dual_residual: Vec<f64>,
}

impl AdmmState {
    /// All primal iterates start at the balanced mask, the duals at zero.
    pub fn new(mask: &SparsityMask) -> Self {
        let n = mask.n();
        let p0 = initial_point(&mask.indicator());
        Self {
            p1: p0.clone(),
            p2: p0.clone(),
            p3: p0.clone(),
            z: p0,
            y1: DMatrix::zeros(n, n),
            y2: DMatrix::zeros(n, n),
            y3: DMatrix::zeros(n, n),
            iter: 0,
            primal_residual: Vec::new(),
            dual_residual: Vec::new(),
        }
    }
}

/// Runs ADMM until both residuals are below threshold for `patience`
/// consecutive iterations (or hit an exact fixed point), or `max_iter`.
pub struct AdmmSolver<'a> {
    projector: &'a CommutantProjector,
    s: DMatrix<f64>,
    half_w: DMatrix<f64>,
    params: AdmmParams,
    scratch: ProjectScratch,
    avg: DMatrix<f64>,
    z_prev: DMatrix<f64>,
    row: Vec<f64>,
}

impl<'a> AdmmSolver<'a> {
    pub fn new(projector: &'a CommutantProjector, mask: &SparsityMask, dir: &Direction, params: AdmmParams) -> Result<Self> {
        params.validate()?;
        let n = projector.n();
        if mask.n() != n {
            return Err(Error::SizeMismatch(mask.n(), n));
        }
        if dir.n() != n {
            return Err(Error::SizeMismatch(dir.n(), n));
        }
        if mask.infeasible() {
            return Err(Error::InfeasibleMask);
        }
        Ok(Self {
            projector,
            s: mask.indicator(),
            half_w: &dir.w * 0.5,
            params,
            scratch: ProjectScratch::new(n),
            avg: DMatrix::zeros(n, n),
            z_prev: DMatrix::zeros(n, n),
            row: vec![0.0; n],
        })
    }

    /// One sweep of the simplified updates; returns `(primal, dual)`.
    pub fn step(&mut self, st: &mut AdmmState) -> (f64, f64) {
        let n = self.projector.n();
        let inv_n = 1.0 / n as f64;
        let z = st.z.as_slice();
        let hw = self.half_w.as_slice();

        // P1: subtract (row sum − 1)/n from each row of Z − W/2 − Y1
        self.row.iter_mut().for_each(|r| *r = 0.0);
        let y1 = st.y1.as_slice();
        for (c, col) in st.p1.as_mut_slice().chunks_exact_mut(n).enumerate() {
            let base = c * n;
            for ((p, r), k) in col.iter_mut().zip(self.row.iter_mut()).zip(base..) {
                let m = z[k] - hw[k] - y1[k];
                *p = m;
                *r += m;
            }
        }
        self.row.iter_mut().for_each(|r| *r = (*r - 1.0) * inv_n);
        for col in st.p1.as_mut_slice().chunks_exact_mut(n) {
            col.iter_mut().zip(&self.row).for_each(|(p, r)| *p -= r);
        }

        // P2: subtract (column sum − 1)/n from each column of Z − W/2 − Y2
        let y2 = st.y2.as_slice();
        for (c, col) in st.p2.as_mut_slice().chunks_exact_mut(n).enumerate() {
            let base = c * n;
            let mut sum = 0.0;
            for (r, p) in col.iter_mut().enumerate() {
                let m = z[base + r] - hw[base + r] - y2[base + r];
                *p = m;
                sum += m;
            }
            let shift = (sum - 1.0) * inv_n;
            col.iter_mut().for_each(|p| *p -= shift);
        }

        // P3: clip at zero on the allowed entries
        let (y3, s) = (st.y3.as_slice(), self.s.as_slice());
        for (k, p) in st.p3.as_mut_slice().iter_mut().enumerate() {
            *p = (z[k] - y3[k]).max(0.0) * s[k];
        }

        let (p1, p2, p3) = (st.p1.as_slice(), st.p2.as_slice(), st.p3.as_slice());
        for (k, a) in self.avg.as_mut_slice().iter_mut().enumerate() {
            *a = (p1[k] + p2[k] + p3[k]) / 3.0;
        }
        std::mem::swap(&mut self.z_prev, &mut st.z);
        self.projector.project_into(&self.avg, &mut st.z, &mut self.scratch);

        let z = st.z.as_slice();
        let z_prev = self.z_prev.as_slice();
        let (y1, y2, y3) = (st.y1.as_mut_slice(), st.y2.as_mut_slice(), st.y3.as_mut_slice());
        let mut r = [0.0_f64; 3];
        let mut dual = 0.0;
        for k in 0..n * n {
            let d1 = p1[k] - z[k];
            let d2 = p2[k] - z[k];
            let d3 = p3[k] - z[k];
            y1[k] += d1;
            y2[k] += d2;
            y3[k] += d3;
            r[0] += d1 * d1;
            r[1] += d2 * d2;
            r[2] += d3 * d3;
            let dz = z[k] - z_prev[k];
            dual += dz * dz;
        }
        let primal = r[0].max(r[1]).max(r[2]).sqrt();
        let dual = dual.sqrt();
        st.iter += 1;
        st.primal_residual.push(primal);
        st.dual_residual.push(dual);
        (primal, dual)
    }

    pub fn run(&mut self, st: &mut AdmmState) -> RelaxedSolution {
        let n = self.projector.n() as f64;
        let (tp, td) = (self.params.eps_primal * n, self.params.eps_dual * n);
        let mut streak = 0;
        let mut converged = false;
        let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);
        while st.iter < self.params.max_iter {
            (primal, dual) = self.step(st);
            if primal == 0.0 && dual == 0.0 {
                converged = true;
                break;
            }
            if primal <= tp && dual <= td {
                streak += 1;
                if streak >= self.params.patience {
                    converged = true;
                    break;
                }
            } else {
                streak = 0;
            }
        }
        let trace = if self.params.record_trace {
            st.primal_residual
                .iter()
                .zip(&st.dual_residual)
                .enumerate()
                .map(|(k, (&primal, &dual))| TracePoint { iter: k + 1, primal, dual })
                .collect()
        } else {
            Vec::new()
        };
        RelaxedSolution { p: st.z.clone(), converged, iters: st.iter, primal_residual: primal, dual_residual: dual, trace }
    }
}

/// Solves the masked LP for one direction, reusing a prebuilt projector.
pub fn admm_solve_with(
    projector: &CommutantProjector,
    mask: &SparsityMask,
    dir: &Direction,
    params: &AdmmParams,
) -> Result<RelaxedSolution> {
    let mut solver = AdmmSolver::new(projector, mask, dir, *params)?;
    let mut state = AdmmState::new(mask);
    Ok(solver.run(&mut state))
}

/// Solves the masked LP for one direction. Spectra must already compare equal.
pub fn admm_solve(
    sa: &Spectrum,
    sb: &Spectrum,
    mask: &SparsityMask,
    dir: &Direction,
    params: &AdmmParams,
) -> Result<RelaxedSolution> {
    admm_solve_with(&CommutantProjector::new(sa, sb)?, mask, dir, params)
}

/// Writes `iter,primal,dual` rows with a header.
pub fn write_trace_csv<W: std::io::Write>(mut out: W, trace: &[TracePoint]) -> std::io::Result<()> {
    writeln!(out, "iter,primal,dual")?;
    for t in trace {
        writeln!(out, "{},{:e},{:e}", t.iter, t.primal, t.dual)?;
    }
    Ok(())
}
