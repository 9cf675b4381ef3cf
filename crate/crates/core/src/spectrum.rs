//! Symmetric eigendecomposition with eigenvalues grouped by multiplicity.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_SWEEPS: usize = 0; // 0 = no limit in nalgebra

/// Relative factor for the default grouping tolerance, applied to
/// `max(1, spectral radius)`.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-6;

/// One eigenvalue together with an orthonormal basis of its eigenspace.
#[derive(Debug, Clone)]
pub struct EigenGroup {
    pub eigenvalue: f64,
    pub basis: DMatrix<f64>,
}

impl EigenGroup {
    pub fn multiplicity(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projector `V Vᵀ` onto the eigenspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// `diag(V Vᵀ)`, computed as squared row norms of `V`.
    pub fn projector_diagonal(&self) -> DVector<f64> {
        DVector::from_iterator(self.basis.nrows(), self.basis.row_iter().map(|r| r.norm_squared()))
    }

    /// `V Vᵀ 1 = V (Vᵀ 1)`.
    pub fn projector_row_sums(&self) -> DVector<f64> {
        let coeffs = self.basis.row_sum().transpose();
        &self.basis * coeffs
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    n: usize,
    groups: Vec<EigenGroup>,
    grouping_tol: f64,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Groups in ascending eigenvalue order.
    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    pub fn grouping_tol(&self) -> f64 {
        self.grouping_tol
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.groups.iter().map(EigenGroup::multiplicity).collect()
    }

    /// Eigenvalues with repetition, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.groups.iter().flat_map(|g| std::iter::repeat_n(g.eigenvalue, g.multiplicity())).collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.groups.iter().fold(0.0_f64, |m, g| m.max(g.eigenvalue.abs()))
    }

    /// All group bases side by side: an orthogonal `n × n` matrix whose
    /// column blocks follow [`Spectrum::groups`].
    pub fn full_basis(&self) -> DMatrix<f64> {
        let mut v = DMatrix::zeros(self.n, self.n);
        let mut col = 0;
        for g in &self.groups {
            v.columns_mut(col, g.multiplicity()).copy_from(&g.basis);
            col += g.multiplicity();
        }
        v
    }

    /// Column offset of each group inside [`Spectrum::full_basis`].
    pub fn offsets(&self) -> Vec<usize> {
        self.groups
            .iter()
            .scan(0, |acc, g| {
                let start = *acc;
                *acc += g.multiplicity();
                Some(start)
            })
            .collect()
    }
}

/// Default grouping tolerance for a graph: `1e-6 · max(1, ρ(A))`.
pub fn default_grouping_tol(spectral_radius: f64) -> f64 {
    DEFAULT_RELATIVE_TOL * spectral_radius.max(1.0)
}

fn eigen(g: &WeightedGraph) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = g.n();
    let eig = SymmetricEigen::try_new(g.adj().clone(), EIGEN_EPS, EIGEN_MAX_SWEEPS)
        .ok_or(Error::EigenNoConvergence(n))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = eig.eigenvectors.select_columns(&order);
    Ok((values, vectors))
}

fn group(n: usize, values: &[f64], vectors: &DMatrix<f64>, tol: f64) -> Spectrum {
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        if k == n || values[k] - values[k - 1] > tol {
            let members = &values[start..k];
            groups.push(EigenGroup {
                eigenvalue: members.iter().sum::<f64>() / members.len() as f64,
                basis: vectors.columns(start, k - start).into_owned(),
            });
            start = k;
        }
    }
    Spectrum { n, groups, grouping_tol: tol }
}

/// Eigendecomposition of `g` with consecutive eigenvalues closer than
/// `grouping_tol` merged into one group (chained transitively).
pub fn spectrum(g: &WeightedGraph, grouping_tol: f64) -> Result<Spectrum> {
    if grouping_tol.is_nan() || grouping_tol < 0.0 {
        return Err(Error::InvalidArgument(format!("grouping tolerance {grouping_tol}")));
    }
    let (values, vectors) = eigen(g)?;
    Ok(group(g.n(), &values, &vectors, grouping_tol))
}

/// [`spectrum`] with [`default_grouping_tol`].
pub fn spectrum_default(g: &WeightedGraph) -> Result<Spectrum> {
    let (values, vectors) = eigen(g)?;
    let radius = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(group(g.n(), &values, &vectors, default_grouping_tol(radius)))
}

/// Equal multiplicity structure and eigenvalues within `tol`, group by group.
pub fn spectra_equal(sa: &Spectrum, sb: &Spectrum, tol: f64) -> Result<bool> {
    if sa.n != sb.n {
        return Err(Error::SizeMismatch(sa.n, sb.n));
    }
    if sa.groups.len() != sb.groups.len() {
        return Ok(false);
    }
    Ok(sa
        .groups
        .iter()
        .zip(&sb.groups)
        .all(|(a, b)| a.multiplicity() == b.multiplicity() && (a.eigenvalue - b.eigenvalue).abs() <= tol))
}
