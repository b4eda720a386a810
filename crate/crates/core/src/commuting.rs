//! Commuting families built from a shared eigenvector basis.
//!
//! For a fixed nonsingular basis `C`, every matrix `C^-1 · D · C` with `D`
//! diagonal commutes with every other one built on the same `C`. The
//! protocol's private subgroups are all of this form.

use crate::error::{Error, Result};
use crate::matrix::{DiagonalSpec, Matrix};

/// `basis^-1 · diag(spec) · basis`.
pub fn commuting_from_basis(basis: &Matrix, spec: &DiagonalSpec) -> Result<Matrix> {
    if basis.params() != spec.params() {
        return Err(Error::ParamsMismatch);
    }
    spec.to_matrix().conjugate(basis)
}

/// Same as [`commuting_from_basis`] with the basis inverse supplied.
pub(crate) fn member_with_inverse(
    basis: &Matrix,
    basis_inv: &Matrix,
    spec: &DiagonalSpec,
) -> Result<Matrix> {
    Matrix::product([basis_inv, &spec.to_matrix(), basis])
}

pub fn verify_commuting_pair(a: &Matrix, b: &Matrix) -> bool {
    a.commutes_with(b).unwrap_or(false)
}

/// A basis together with the members generated from it.
#[derive(Debug, Clone)]
pub struct CommutingFamily {
    basis: Matrix,
    basis_inv: Matrix,
    members: Vec<(DiagonalSpec, Matrix)>,
}

impl CommutingFamily {
    pub fn new(basis: Matrix) -> Result<Self> {
        let basis_inv = basis.inverse()?;
        Ok(CommutingFamily {
            basis,
            basis_inv,
            members: Vec::new(),
        })
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn members(&self) -> &[(DiagonalSpec, Matrix)] {
        &self.members
    }

    /// Builds the member for `spec` without recording it.
    pub fn member(&self, spec: &DiagonalSpec) -> Result<Matrix> {
        if spec.params() != self.basis.params() {
            return Err(Error::ParamsMismatch);
        }
        member_with_inverse(&self.basis, &self.basis_inv, spec)
    }

    pub fn push(&mut self, spec: DiagonalSpec) -> Result<&Matrix> {
        let m = self.member(&spec)?;
        self.members.push((spec, m));
        Ok(&self.members.last().expect("just pushed").1)
    }

    /// Recovers the diagonal spec of `m` if it belongs to this family:
    /// `basis · m · basis^-1` must be diagonal with nonzero diagonal.
    pub fn spec_of(&self, m: &Matrix) -> Option<DiagonalSpec> {
        if m.params() != self.basis.params() {
            return None;
        }
        let d = Matrix::product([&self.basis, m, &self.basis_inv]).ok()?;
        if !d.is_diagonal() {
            return None;
        }
        let values: Vec<u64> = d.diagonal().into_iter().map(u64::from).collect();
        DiagonalSpec::new(m.params(), &values).ok()
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        self.spec_of(m).is_some()
    }
}
