//! Explicit subgroups of O(2,2) and O(n,2): products of Fuchsian
//! representations acting on 2x2 matrices, block embeddings of O(n,1), and
//! the shipped triangle, genus-two and boost examples.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use serde_json::json;

use crate::element::{boost, form_residual, Isometry};
use crate::error::{Error, Result};
use crate::form::FormContext;
use crate::presentation::Presentation;
use crate::tol::TAU_ISOM;

pub type Mat2 = Matrix2<f64>;

const DET_TOL: f64 = 1e-10;

/// Rotation by `t` about `i` in the upper half plane.
pub fn elliptic(t: f64) -> Mat2 {
    let (s, c) = (t / 2.0).sin_cos();
    Mat2::new(c, -s, s, c)
}

pub fn hyperbolic(d: f64) -> Mat2 {
    Mat2::new(d.exp(), 0.0, 0.0, (-d).exp())
}

fn check_sl2(m: &Mat2) -> Result<()> {
    let det = m.determinant();
    if !m.iter().all(|x| x.is_finite()) || (det - 1.0).abs() > DET_TOL {
        return Err(Error::Rejected(format!("matrix has determinant {det}, expected 1")));
    }
    Ok(())
}

fn inv2(m: &Mat2) -> Mat2 {
    Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// A pair of PSL(2,R) elements acting on 2x2 real matrices by
/// `X -> left X right^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusPair {
    pub left: Mat2,
    pub right: Mat2,
}

impl MoebiusPair {
    pub fn new(left: Mat2, right: Mat2) -> Result<Self> {
        check_sl2(&left)?;
        check_sl2(&right)?;
        Ok(Self { left, right })
    }

    pub fn diagonal(m: Mat2) -> Result<Self> {
        Self::new(m, m)
    }
}

/// Change of coordinates from the entries `(a, b, c, d)` of a 2x2 matrix to
/// the orthonormal coordinates `((a-d)/2, (b+c)/2, (b-c)/2, (a+d)/2)` in
/// which `-det = x1^2 + x2^2 - x3^2 - x4^2`.
pub fn intertwiner() -> Matrix4<f64> {
    Matrix4::new(
        0.5, 0.0, 0.0, -0.5, //
        0.0, 0.5, 0.5, 0.0, //
        0.0, 0.5, -0.5, 0.0, //
        0.5, 0.0, 0.0, 0.5,
    )
}

pub fn intertwiner_inverse() -> Matrix4<f64> {
    Matrix4::new(
        1.0, 0.0, 0.0, 1.0, //
        0.0, 1.0, 1.0, 0.0, //
        0.0, 1.0, -1.0, 0.0, //
        -1.0, 0.0, 0.0, 1.0,
    )
}

fn pair_matrix(pair: &MoebiusPair) -> DMatrix<f64> {
    let s = inv2(&pair.right);
    // vec(L X S) = (L kron S^T) vec(X), row-major
    let mut k = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for p in 0..2 {
                for q in 0..2 {
                    k[(2 * i + j, 2 * p + q)] = pair.left[(i, p)] * s[(q, j)];
                }
            }
        }
    }
    let m = intertwiner() * k * intertwiner_inverse();
    DMatrix::from_iterator(4, 4, m.iter().copied())
}

/// The element of O(2,2) induced by `pair`.
pub fn psl2_pair_to_po22(pair: &MoebiusPair) -> Result<Isometry> {
    let ctx = FormContext::new(2)?;
    Isometry::new(ctx, pair_matrix(pair))
}

/// Adjoint action on trace-free matrices `[[x, y+z], [y-z, -x]]`, preserving
/// `x^2 + y^2 - z^2`.
pub fn adjoint_so21(m: &Mat2) -> Result<DMatrix<f64>> {
    check_sl2(m)?;
    let mi = inv2(m);
    let basis = [
        Mat2::new(1.0, 0.0, 0.0, -1.0),
        Mat2::new(0.0, 1.0, 1.0, 0.0),
        Mat2::new(0.0, 1.0, -1.0, 0.0),
    ];
    let mut out = DMatrix::zeros(3, 3);
    for (col, e) in basis.iter().enumerate() {
        let y = m * e * mi;
        out[(0, col)] = (y[(0, 0)] - y[(1, 1)]) / 2.0;
        out[(1, col)] = (y[(0, 1)] + y[(1, 0)]) / 2.0;
        out[(2, col)] = (y[(0, 1)] - y[(1, 0)]) / 2.0;
    }
    Ok(out)
}

/// Block embedding `A -> diag(A, 1)` of O(n,1) into O(n,2), where `A`
/// preserves `x1^2 + ... + xn^2 - x_{n+1}^2`.
pub fn embed_o_n1(a: &DMatrix<f64>) -> Result<Isometry> {
    if a.nrows() != a.ncols() || a.nrows() < 3 {
        return Err(Error::DimensionMismatch { expected: 3.max(a.nrows()), found: a.ncols() });
    }
    let n = a.nrows() - 1;
    let mut gram = DMatrix::identity(n + 1, n + 1);
    gram[(n, n)] = -1.0;
    let residual = crate::linalg::inf_norm(&(a.transpose() * &gram * a - &gram));
    if !(residual <= TAU_ISOM) {
        return Err(Error::Rejected(format!("matrix is not in O({n},1): residual {residual:.3e}")));
    }
    let ctx = FormContext::new(n)?;
    let mut m = DMatrix::identity(n + 2, n + 2);
    m.view_mut((0, 0), (n + 1, n + 1)).copy_from(a);
    debug_assert!(form_residual(&ctx, &m) <= TAU_ISOM);
    Ok(Isometry::trusted(ctx, m))
}

/// Generators of the orientation-preserving `(p,q,r)` triangle group in
/// PSL(2,R): rotations by `2pi/p` and `2pi/q` about adjacent vertices, and
/// the third generator closing the product to the identity.
pub fn triangle_group_generators(p: u32, q: u32, r: u32) -> Result<[Mat2; 3]> {
    let (pp, qq, rr) = (p as u64, q as u64, r as u64);
    if p < 2 || q < 2 || r < 2 || qq * rr + pp * rr + pp * qq >= pp * qq * rr {
        return Err(Error::Rejected(format!(
            "({p},{q},{r}) is not a hyperbolic triangle: need 1/p + 1/q + 1/r < 1"
        )));
    }
    let (a, b, c) = (PI / p as f64, PI / q as f64, PI / r as f64);
    let cosh_side = (c.cos() + a.cos() * b.cos()) / (a.sin() * b.sin());
    let side = cosh_side.acosh();
    let shift = hyperbolic(side / 2.0);
    let gp = elliptic(2.0 * a);
    let gq = shift * elliptic(2.0 * b) * inv2(&shift);
    let gr = inv2(&(gp * gq));
    Ok([gp, gq, gr])
}

/// Standard generators of a genus-two surface group, with
/// `[a1,b1][a2,b2] = I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Genus2Marking {
    pub a1: Mat2,
    pub b1: Mat2,
    pub a2: Mat2,
    pub b2: Mat2,
}

impl Genus2Marking {
    pub fn generators(&self) -> [Mat2; 4] {
        [self.a1, self.b1, self.a2, self.b2]
    }

    /// The generators followed by their inverses, labelled `a1..b2, A1..B2`.
    pub fn named(&self) -> Vec<(String, Mat2)> {
        let names = ["a1", "b1", "a2", "b2"];
        let gens = self.generators();
        let mut out: Vec<(String, Mat2)> = names.iter().zip(gens).map(|(n, g)| (n.to_string(), g)).collect();
        out.extend(names.iter().zip(gens).map(|(n, g)| (n.to_uppercase(), inv2(&g))));
        out
    }

    pub fn commutator_product(&self) -> Mat2 {
        let comm = |x: &Mat2, y: &Mat2| x * y * inv2(x) * inv2(y);
        comm(&self.a1, &self.b1) * comm(&self.a2, &self.b2)
    }
}

/// Side pairings of the regular octagon with interior angles `pi/4`,
/// centred at `i`.
pub fn genus2_surface_group() -> Genus2Marking {
    let d = (1.0 + 2f64.sqrt()).acosh();
    let translate = hyperbolic(d);
    let rot = |phi: f64| elliptic(-phi);
    // maps side `from` onto side `to`
    let pairing = |from: f64, to: f64| rot(to * PI / 4.0) * translate * rot(PI - from * PI / 4.0);
    Genus2Marking {
        a1: pairing(1.0, 3.0),
        b1: inv2(&pairing(0.0, 2.0)),
        a2: pairing(5.0, 7.0),
        b2: inv2(&pairing(4.0, 6.0)),
    }
}

/// Applies the Dehn twist along the `a1` curve `times` times:
/// `b1 -> b1 a1^times`, other generators fixed. The relator is preserved.
pub fn dehn_twist_marking(marking: &Genus2Marking, times: u32) -> Genus2Marking {
    let mut b1 = marking.b1;
    for _ in 0..times {
        b1 *= marking.a1;
    }
    Genus2Marking { b1, ..*marking }
}

pub const GENUS2_LABELS: [&str; 4] = ["a", "b", "c", "d"];
pub const GENUS2_RELATOR: &str = "a b A B c d C D";

/// Builds the subgroup of O(2,2) generated by `(left[i], right[i])` after
/// checking that both sides satisfy the relators.
pub fn build_quasifuchsian_pair(
    labels: &[&str],
    left: &[Mat2],
    right: &[Mat2],
    relators: &[&str],
    provenance: &str,
) -> Result<Presentation> {
    if left.len() != right.len() || left.len() != labels.len() {
        return Err(Error::Rejected(format!(
            "generator lists differ in length: {} labels, {} left, {} right",
            labels.len(),
            left.len(),
            right.len()
        )));
    }
    let ctx = FormContext::new(2)?;
    let mut gens = Vec::with_capacity(left.len());
    for ((label, l), r) in labels.iter().zip(left).zip(right) {
        let g = psl2_pair_to_po22(&MoebiusPair::new(*l, *r)?).map_err(|e| match e {
            Error::NotAnIsometry { residual } => Error::InvalidGenerator { label: label.to_string(), residual },
            other => other,
        })?;
        gens.push((label.to_string(), g.into_matrix()));
    }
    Presentation::new(ctx, gens, relators.iter().map(|s| s.to_string()).collect(), provenance)
}

/// Genus-two example with left marking `left` and right marking `right`.
pub fn genus2_pair(left: &Genus2Marking, right: &Genus2Marking, provenance: &str) -> Result<Presentation> {
    build_quasifuchsian_pair(&GENUS2_LABELS, &left.generators(), &right.generators(), &[GENUS2_RELATOR], provenance)
}

/// `(p,q,r)` triangle group acting on the first three coordinates of
/// R^{2,2}; labels `x, y, z`.
pub fn fuchsian_triangle(p: u32, q: u32, r: u32) -> Result<Presentation> {
    let gens = triangle_group_generators(p, q, r)?;
    let labels = ["x", "y", "z"];
    let mut named = Vec::new();
    for (label, g) in labels.iter().zip(gens.iter()) {
        named.push((label.to_string(), embed_o_n1(&adjoint_so21(g)?)?.into_matrix()));
    }
    let power = |l: &str, k: u32| vec![l; k as usize].join(" ");
    let relators = vec![power("x", p), power("y", q), power("z", r), "x y z".to_string()];
    let pres = Presentation::new(
        FormContext::new(2)?,
        named,
        relators,
        format!("({p},{q},{r}) triangle group embedded through SO(2,1)"),
    )?;
    Ok(pres.with_construction(json!({ "kind": "triangle", "p": p, "q": q, "r": r })))
}

/// Genus-two surface group acting diagonally (Fuchsian).
pub fn fuchsian_diagonal_genus2() -> Result<Presentation> {
    let m = genus2_surface_group();
    Ok(genus2_pair(&m, &m, "genus-two surface group, diagonal pair (Fuchsian)")?
        .with_construction(json!({ "kind": "genus2_pair", "twists": 0 })))
}

/// Genus-two pair whose right factor is twisted once along `a1`.
pub fn quasifuchsian_twisted_genus2() -> Result<Presentation> {
    quasifuchsian_twisted_genus2_with(1)
}

pub fn quasifuchsian_twisted_genus2_with(twists: u32) -> Result<Presentation> {
    let m = genus2_surface_group();
    let t = dehn_twist_marking(&m, twists);
    Ok(genus2_pair(&m, &t, &format!("genus-two surface group paired with its image under {twists} Dehn twist(s)"))?
        .with_construction(json!({ "kind": "genus2_pair", "twists": twists })))
}

/// Cyclic group generated by a unit boost in the `(x1, x3)` plane of R^{2,2}.
pub fn boost_example() -> Result<Presentation> {
    let ctx = FormContext::new(2)?;
    let b = boost(&ctx, 0, 2, 1.0).into_matrix();
    Ok(Presentation::new(ctx, vec![("a".into(), b)], vec![], "cyclic group of a unit boost")?
        .with_construction(json!({ "kind": "boost", "rapidity": 1.0 })))
}
