//! The quadratic form of signature (n,2) on R^{n+2}.
//!
//! Coordinates are ordered so the form is `diag(+1, ..., +1, -1, -1)`: the
//! first `n` directions are positive and the last two negative. With this
//! convention the O(n,1) block embedding fixes the last coordinate axis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::tol::{CANON_ZERO, TAU_ISO, TAU_RANK, TAU_SIG_REL, TAU_TRANS};

/// Dimension data for `R^{n+2}` with the form of signature (n,2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormContext {
    n: usize,
}

impl FormContext {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::ContractViolation(format!(
                "spatial dimension must be at least 2, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient dimension `n + 2`.
    pub fn dim(&self) -> usize {
        self.n + 2
    }

    /// Diagonal entry `i` of the Gram matrix.
    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        if i < self.n {
            1.0
        } else {
            -1.0
        }
    }

    pub fn gram(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.sign(i)).collect()
    }

    pub fn gram_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(self.gram()))
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }

    /// `<x|y>` on raw coordinate slices; lengths must already match.
    #[inline]
    pub(crate) fn dot_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += x[i] * y[i];
        }
        acc - x[self.n] * y[self.n] - x[self.n + 1] * y[self.n + 1]
    }
}

/// A vector of `R^{n+2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzVector(pub DVector<f64>);

impl LorentzVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(DVector::from_vec(coords))
    }

    /// Standard basis vector `e_{i+1}` (zero-based `i`).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        Self(v)
    }

    pub fn coords(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<DVector<f64>> for LorentzVector {
    fn from(v: DVector<f64>) -> Self {
        Self(v)
    }
}

/// A point of `RP^{n+1}`: unit Euclidean representative whose first
/// coordinate larger than `1e-12` in absolute value is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    rep: DVector<f64>,
}

impl ProjPoint {
    pub fn from_vector(v: &DVector<f64>) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateInput("non-finite coordinates".into()));
        }
        let mut rep = linalg::normalized(v)
            .ok_or_else(|| Error::DegenerateInput("zero vector has no projective class".into()))?;
        if let Some(first) = rep.iter().find(|x| x.abs() > CANON_ZERO) {
            if *first < 0.0 {
                rep.neg_mut();
            }
        }
        Ok(Self { rep })
    }

    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        Self::from_vector(&DVector::from_column_slice(coords))
    }

    pub fn rep(&self) -> &DVector<f64> {
        &self.rep
    }

    pub fn coords(&self) -> &[f64] {
        self.rep.as_slice()
    }

    /// Angle between the two lines, in `[0, pi/2]`.
    pub fn angle_to(&self, other: &ProjPoint) -> f64 {
        let c = self.rep.dot(&other.rep);
        let s = (&self.rep - &other.rep * c).norm();
        s.atan2(c.abs())
    }
}

/// Position of a line relative to the boundary quadric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    InteriorAds,
    Boundary,
    Exterior,
}

/// Inertia of a Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.pos + self.neg + self.zero
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.zero == 0
    }
}

pub fn bilinear(ctx: &FormContext, x: &LorentzVector, y: &LorentzVector) -> Result<f64> {
    bilinear_slices(ctx, x.coords(), y.coords())
}

pub fn bilinear_slices(ctx: &FormContext, x: &[f64], y: &[f64]) -> Result<f64> {
    ctx.check_len(x.len())?;
    ctx.check_len(y.len())?;
    Ok(ctx.dot_unchecked(x, y))
}

pub fn classify_point(ctx: &FormContext, x: &ProjPoint) -> Result<PointClass> {
    let q = bilinear_slices(ctx, x.coords(), x.coords())?;
    Ok(if q.abs() <= TAU_ISO {
        PointClass::Boundary
    } else if q < 0.0 {
        PointClass::InteriorAds
    } else {
        PointClass::Exterior
    })
}

pub fn is_transverse(ctx: &FormContext, x: &ProjPoint, y: &ProjPoint) -> Result<bool> {
    for p in [x, y] {
        if classify_point(ctx, p)? != PointClass::Boundary {
            return Err(Error::ContractViolation(
                "transversality is only defined for boundary points".into(),
            ));
        }
    }
    Ok(bilinear_slices(ctx, x.coords(), y.coords())?.abs() > TAU_TRANS)
}

fn check_basis(ctx: &FormContext, basis: &[LorentzVector]) -> Result<()> {
    for b in basis {
        ctx.check_len(b.len())?;
    }
    let cols: Vec<DVector<f64>> = basis.iter().map(|b| b.0.clone()).collect();
    if linalg::rank(&cols, TAU_RANK) < basis.len() {
        return Err(Error::DegenerateInput("basis vectors are linearly dependent".into()));
    }
    Ok(())
}

/// Gram matrix `G_ij = <b_i|b_j>`.
pub fn gram_of(ctx: &FormContext, basis: &[LorentzVector]) -> DMatrix<f64> {
    let k = basis.len();
    DMatrix::from_fn(k, k, |i, j| ctx.dot_unchecked(basis[i].coords(), basis[j].coords()))
}

/// Inertia of the form restricted to `span(basis)`.
pub fn subspace_signature(ctx: &FormContext, basis: &[LorentzVector]) -> Result<Signature> {
    check_basis(ctx, basis)?;
    if basis.is_empty() {
        return Ok(Signature { pos: 0, neg: 0, zero: 0 });
    }
    let eig = gram_of(ctx, basis).symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let cut = TAU_SIG_REL * scale;
    let mut sig = Signature { pos: 0, neg: 0, zero: 0 };
    for &e in eig.eigenvalues.iter() {
        if e > cut {
            sig.pos += 1;
        } else if e < -cut {
            sig.neg += 1;
        } else {
            sig.zero += 1;
        }
    }
    Ok(sig)
}

/// Basis of `{y : <b_i|y> = 0 for all i}`.
pub fn orthocomplement(ctx: &FormContext, basis: &[LorentzVector]) -> Result<Vec<LorentzVector>> {
    check_basis(ctx, basis)?;
    let dim = ctx.dim();
    if basis.is_empty() {
        return Ok((0..dim).map(|i| LorentzVector::basis(dim, i)).collect());
    }
    // Rows are J b_i, so the kernel is the form-orthogonal complement.
    let rows = DMatrix::from_fn(basis.len(), dim, |i, j| ctx.sign(j) * basis[i].0[j]);
    let ns = linalg::null_space(&rows, TAU_RANK);
    debug_assert_eq!(ns.len(), dim - basis.len());
    Ok(ns.into_iter().map(LorentzVector).collect())
}
