use serde::Serialize;

use crate::colligation::{BareRealization, Colligation};
use crate::error::{Error, Result};
use crate::indefinite::{SignatureSpace, Tolerances};
use crate::matrix::{
    hstack, intersection, matrix_power, null_space, orth, spectral_norm, subspace_distance, vstack,
    zeros, ComplexMatrix,
};

/// Which product property an obstruction report decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionKind {
    Observable,
    Controllable,
    Simple,
}

/// Nontrivial solutions (x₁, x₂) of the product equations, i.e. the
/// unobservable (or J-orthogonal-to-controllable) vectors of the cascade,
/// expressed in the factor coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct ObstructionReport {
    pub kind: ObstructionKind,
    #[serde(skip)]
    pub basis: ComplexMatrix,
    #[serde(skip)]
    pub first: ComplexMatrix,
    #[serde(skip)]
    pub second: ComplexMatrix,
    pub dimension: usize,
    pub krylov_dimension: usize,
    pub taylor_dimension: usize,
    /// Sine of the largest principal angle between the two solution spaces.
    pub agreement_residual: f64,
}

impl ObstructionReport {
    /// The product property holds.
    pub fn holds(&self) -> bool {
        self.dimension == 0
    }
}

/// Stacks blocks after normalizing each to unit norm; null spaces are
/// unchanged and large powers do not swamp the early blocks.
fn scaled_rows(blocks: &[ComplexMatrix], cols: usize) -> ComplexMatrix {
    let scaled: Vec<ComplexMatrix> = blocks
        .iter()
        .map(|b| {
            let n = spectral_norm(b);
            if n > 0.0 {
                b / num_complex::Complex64::from(n)
            } else {
                b.clone()
            }
        })
        .collect();
    let refs: Vec<&ComplexMatrix> = scaled.iter().collect();
    vstack(cols, &refs)
}

/// Null space of the observability matrix [C; CA; …; CAⁿ⁻¹] of the raw
/// cascade (state ordered first, second).
fn krylov_observable(raw: &BareRealization, tol: &Tolerances) -> ComplexMatrix {
    let n = raw.state_dim();
    let mut blocks = Vec::with_capacity(n);
    let mut row = raw.c().clone();
    for _ in 0..n {
        blocks.push(row.clone());
        row = &row * raw.a();
    }
    null_space(&scaled_rows(&blocks, n), tol.rank_tol)
}

/// Solutions of θ₂(z)C₁(I − zA₁)⁻¹x₁ = −C₂(I − zA₂)⁻¹x₂ from the Taylor
/// coefficients through order 2n.
fn taylor_observable(
    s1: &BareRealization,
    s2: &BareRealization,
    tol: &Tolerances,
) -> ComplexMatrix {
    let (n1, n2) = (s1.state_dim(), s2.state_dim());
    let n = n1 + n2;
    let theta2: Vec<ComplexMatrix> = (0..=2 * n).map(|k| s2.markov(k)).collect();
    let c1_pow: Vec<ComplexMatrix> = (0..=2 * n)
        .map(|k| s1.c() * matrix_power(s1.a(), k))
        .collect();
    let mut blocks = Vec::with_capacity(2 * n + 1);
    for k in 0..=2 * n {
        let mut left = zeros(s2.output_dim(), n1);
        for j in 0..=k {
            left += &theta2[j] * &c1_pow[k - j];
        }
        let right = s2.c() * matrix_power(s2.a(), k);
        blocks.push(hstack(s2.output_dim(), &[&left, &right]));
    }
    null_space(&scaled_rows(&blocks, n), tol.rank_tol)
}

fn compare(
    kind: ObstructionKind,
    krylov: ComplexMatrix,
    taylor: ComplexMatrix,
    n1: usize,
    tol: &Tolerances,
) -> Result<ObstructionReport> {
    let n = krylov.nrows();
    let (dk, dt) = (krylov.ncols(), taylor.ncols());
    let residual = if dk == 0 && dt == 0 {
        0.0
    } else {
        subspace_distance(&krylov, &taylor, tol.rank_tol)
    };
    if dk != dt || residual > tol.metric_tol {
        return Err(Error::Inconsistency(format!(
            "{kind:?} obstruction: Krylov route gives dimension {dk}, Taylor route {dt} (angle residual {residual:.2e})"
        )));
    }
    Ok(ObstructionReport {
        kind,
        first: krylov.rows(0, n1).into_owned(),
        second: krylov.rows(n1, n - n1).into_owned(),
        basis: krylov,
        dimension: dk,
        krylov_dimension: dk,
        taylor_dimension: dt,
        agreement_residual: residual,
    })
}

fn check_dims(first: &Colligation, second: &Colligation) -> Result<()> {
    if first.output_dim() != second.input_dim() {
        return Err(Error::dims(
            "cascade",
            first.output_dim(),
            second.input_dim(),
        ));
    }
    Ok(())
}

fn observable_routes(
    first: &Colligation,
    second: &Colligation,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_dims(first, second)?;
    let raw = BareRealization::cascade(first.bare(), second.bare())?;
    Ok((
        krylov_observable(&raw, tol),
        taylor_observable(first.bare(), second.bare(), tol),
    ))
}

/// Raw cascade metric: signs of 𝒳₁ followed by those of 𝒳₂.
fn raw_metric(first: &Colligation, second: &Colligation) -> SignatureSpace {
    first.state().direct_sum(second.state())
}

fn controllable_routes(
    first: &Colligation,
    second: &Colligation,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_dims(first, second)?;
    let raw = BareRealization::cascade(first.bare(), second.bare())?;
    let n = raw.state_dim();
    let j = raw_metric(first, second);
    // x is J-orthogonal to every AᵏB ⟺ Jx ⊥ AᵏB.
    let mut blocks = Vec::with_capacity(n);
    let mut col = raw.b().clone();
    for _ in 0..n {
        blocks.push(col.adjoint());
        col = raw.a() * &col;
    }
    let krylov = j.apply_left(&null_space(&scaled_rows(&blocks, n), tol.rank_tol));

    // θ₁^#(z)B₂^[*](I − zA₂^[*])⁻¹x₂ = −B₁^[*](I − zA₁^[*])⁻¹x₁ is the
    // observability equation of the dual pair (Σ₂*, Σ₁*) with the roles of
    // x₁ and x₂ exchanged.
    let (d1, d2) = (first.adjoint_system(), second.adjoint_system());
    let swapped = taylor_observable(d2.bare(), d1.bare(), tol);
    let (n1, n2) = (first.state_dim(), second.state_dim());
    let taylor = vstack(
        swapped.ncols(),
        &[
            &swapped.rows(n2, n1).into_owned(),
            &swapped.rows(0, n2).into_owned(),
        ],
    );
    Ok((orth(&krylov, tol.rank_tol), orth(&taylor, tol.rank_tol)))
}

/// Solutions of the observability equation of Σ₂ ∘ Σ₁. The product is
/// observable exactly when the dimension is zero.
pub fn obstruction_observable(
    first: &Colligation,
    second: &Colligation,
    tol: &Tolerances,
) -> Result<ObstructionReport> {
    let (k, t) = observable_routes(first, second, tol)?;
    compare(ObstructionKind::Observable, k, t, first.state_dim(), tol)
}

/// Solutions of the controllability equation of Σ₂ ∘ Σ₁: the vectors
/// J-orthogonal to the controllable subspace of the cascade.
pub fn obstruction_controllable(
    first: &Colligation,
    second: &Colligation,
    tol: &Tolerances,
) -> Result<ObstructionReport> {
    let (k, t) = controllable_routes(first, second, tol)?;
    compare(ObstructionKind::Controllable, k, t, first.state_dim(), tol)
}

/// Common solutions of both equations; zero dimension means the product is
/// simple.
pub fn obstruction_simple(
    first: &Colligation,
    second: &Colligation,
    tol: &Tolerances,
) -> Result<ObstructionReport> {
    let (ko, to) = observable_routes(first, second, tol)?;
    let (kc, tc) = controllable_routes(first, second, tol)?;
    let k = intersection(&ko, &kc, tol.rank_tol);
    let t = intersection(&to, &tc, tol.rank_tol);
    compare(ObstructionKind::Simple, k, t, first.state_dim(), tol)
}
