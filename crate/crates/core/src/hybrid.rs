//! Desk-scale validation of the hybrid-spectrum functional calculus:
//! operators with discrete eigenvalues plus a quadrature-discretized
//! continuous spectrum segment, Fredholm determinants, and trace checks.
//!
//! A continuous spectral integral is modeled as a sum over quadrature nodes
//! whose projectors carry the node's spectral mass; the functional-calculus
//! formulas are linear in the spectral measure, so node projectors absorb
//! the weights and the hybrid formulas restricted to finitely many nodes
//! become the finite ones.
//! The declared weights surface in [`quadrature_trace`], the discretized
//! integral of f over the spectrum, which converges under node refinement at
//! the quadrature's order.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::analogy::{self, PropsReport};
use crate::calculus::{self, BlockData, CalcError, SeriesEval, SeriesFunction};
use crate::jordan::{DecomposeError, EigenGroup, JordanSpec, SpectralFamily};
use crate::matrix::{MatrixC, MatrixError};
use crate::scalar::{Scalar, ScalarMode, Tolerance};

#[derive(Debug, Error)]
pub enum HybridError {
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error("spectra overlap: eigenvalue {0} appears twice")]
    Overlap(String),
    #[error("total block dimension {blocks} does not match transform dimension {transform}")]
    DimensionMismatch { blocks: usize, transform: usize },
    #[error("structural mismatch: {0}")]
    Structural(String),
    #[error("a zero node eigenvalue pairs with a nonzero one")]
    ZeroPairing,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Calc(#[from] CalcError),
}

/// One discrete eigenvalue: `multiplicity` Jordan blocks of size
/// `nilpotency` each.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteNode {
    pub eigenvalue: Scalar,
    pub nilpotency: usize,
    pub multiplicity: usize,
}

/// One quadrature node on the continuous spectrum path.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousNode {
    pub eigenvalue: Scalar,
    pub weight: f64,
    pub nilpotency: usize,
}

/// Discrete spectrum nodes plus quadrature nodes for a continuous segment.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridOperatorSpec {
    discrete: Vec<DiscreteNode>,
    continuous: Vec<ContinuousNode>,
    transform: MatrixC,
}

/// Where a realized family block came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOrigin {
    Discrete(usize),
    Continuous(usize),
}

/// A hybrid spec realized as a finite matrix with its family, each block
/// tagged by origin.
#[derive(Debug, Clone)]
pub struct RealizedHybrid {
    pub matrix: MatrixC,
    pub family: SpectralFamily,
    pub origins: Vec<NodeOrigin>,
}

impl HybridOperatorSpec {
    pub fn new(
        discrete: Vec<DiscreteNode>,
        continuous: Vec<ContinuousNode>,
        transform: MatrixC,
    ) -> Result<Self, HybridError> {
        if discrete.is_empty() && continuous.is_empty() {
            return Err(HybridError::Invalid("no spectrum nodes".into()));
        }
        if !transform.is_square() {
            return Err(HybridError::Invalid("transform must be square".into()));
        }
        let mode = transform.mode();
        let mut blocks = 0usize;
        let mut seen: Vec<&Scalar> = Vec::new();
        for d in &discrete {
            if d.nilpotency == 0 || d.multiplicity == 0 {
                return Err(HybridError::Invalid(
                    "nilpotency degree and multiplicity must be positive".into(),
                ));
            }
            if d.eigenvalue.mode() != mode {
                return Err(HybridError::Invalid(
                    "eigenvalue mode differs from transform mode".into(),
                ));
            }
            blocks += d.nilpotency * d.multiplicity;
            seen.push(&d.eigenvalue);
        }
        for c in &continuous {
            if c.nilpotency == 0 {
                return Err(HybridError::Invalid(
                    "nilpotency degree must be positive".into(),
                ));
            }
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(HybridError::Invalid(
                    "quadrature weights must be positive and finite".into(),
                ));
            }
            if c.eigenvalue.mode() != mode {
                return Err(HybridError::Invalid(
                    "eigenvalue mode differs from transform mode".into(),
                ));
            }
            blocks += c.nilpotency;
            seen.push(&c.eigenvalue);
        }
        for i in 0..seen.len() {
            for j in (i + 1)..seen.len() {
                if seen[i] == seen[j] {
                    return Err(HybridError::Overlap(seen[i].to_string()));
                }
            }
        }
        if blocks != transform.rows() {
            return Err(HybridError::DimensionMismatch {
                blocks,
                transform: transform.rows(),
            });
        }
        Ok(Self {
            discrete,
            continuous,
            transform,
        })
    }

    /// Midpoint-rule nodes over the real interval [a, b], each of weight
    /// (b - a)/n, all with the given nilpotency degree.
    pub fn midpoint_segment(a: f64, b: f64, n: usize, nilpotency: usize) -> Vec<ContinuousNode> {
        let h = (b - a) / n as f64;
        (0..n)
            .map(|j| ContinuousNode {
                eigenvalue: Scalar::float(a + (j as f64 + 0.5) * h, 0.0),
                weight: h,
                nilpotency,
            })
            .collect()
    }

    pub fn discrete(&self) -> &[DiscreteNode] {
        &self.discrete
    }

    pub fn continuous(&self) -> &[ContinuousNode] {
        &self.continuous
    }

    pub fn transform(&self) -> &MatrixC {
        &self.transform
    }

    pub fn dimension(&self) -> usize {
        self.transform.rows()
    }

    /// Jordan structure of the realization: one group per node, discrete
    /// nodes first.
    pub fn to_jordan_spec(&self, tol: &Tolerance) -> Result<JordanSpec, HybridError> {
        let mut groups = Vec::new();
        for d in &self.discrete {
            groups.push(EigenGroup::new(
                d.eigenvalue.clone(),
                vec![d.nilpotency; d.multiplicity],
            ));
        }
        for c in &self.continuous {
            groups.push(EigenGroup::new(c.eigenvalue.clone(), vec![c.nilpotency]));
        }
        JordanSpec::new(self.transform.clone(), groups, tol)
            .map_err(|e| HybridError::Invalid(e.to_string()))
    }

    /// The finite matrix realizing every node as a Jordan block, plus the
    /// origin-tagged family.
    pub fn realize(&self, tol: &Tolerance) -> Result<RealizedHybrid, HybridError> {
        let spec = self.to_jordan_spec(tol)?;
        let matrix = spec.assemble(tol)?;
        let family = spec.extract_family(tol)?;
        let mut origins = Vec::with_capacity(family.items().len());
        for (gi, g) in spec.groups().iter().enumerate() {
            let origin = if gi < self.discrete.len() {
                NodeOrigin::Discrete(gi)
            } else {
                NodeOrigin::Continuous(gi - self.discrete.len())
            };
            origins.extend(std::iter::repeat_n(origin, g.block_sizes.len()));
        }
        Ok(RealizedHybrid {
            matrix,
            family,
            origins,
        })
    }

    /// Blocks of the realization split into the discrete and continuous
    /// parts, in family order.
    fn part_blocks(&self, tol: &Tolerance) -> Result<(Vec<BlockData>, Vec<BlockData>), HybridError> {
        let realized = self.realize(tol)?;
        let all = calculus::family_blocks(&realized.family)?;
        let mut discrete = Vec::new();
        let mut continuous = Vec::new();
        for (block, origin) in all.into_iter().zip(realized.origins.iter()) {
            match origin {
                NodeOrigin::Discrete(_) => discrete.push(block),
                NodeOrigin::Continuous(_) => continuous.push(block),
            }
        }
        Ok((discrete, continuous))
    }
}

/// f(X) for a hybrid operator: the discrete sum and the discretized
/// continuous integral, each with its f^(q)(lambda)/q! nilpotent
/// corrections. Node projectors stand for the spectral mass of their node,
/// so the result equals `apply_single` on the realized family.
pub fn apply_hybrid(
    f: &SeriesFunction,
    spec: &HybridOperatorSpec,
    tol: &Tolerance,
    opts: &SeriesEval,
) -> Result<MatrixC, HybridError> {
    let (discrete, continuous) = spec.part_blocks(tol)?;
    let dim = spec.dimension();
    let mode = spec.transform.mode();
    let mut acc = MatrixC::zeros(dim, dim, mode);
    for part in [&discrete, &continuous] {
        for block in part {
            let lambda = std::slice::from_ref(&block.lambda);
            let value = f.eval_partial(&[0], lambda, opts)?;
            acc = acc.add(&block.projector.scale(&value))?;
            for q in 1..block.size {
                let mut coeff = f.eval_partial(&[q as u32], lambda, opts)?;
                coeff = &coeff / &Scalar::factorial(coeff.mode(), q);
                acc = acc.add(&block.npower(q).scale(&coeff))?;
            }
        }
    }
    Ok(acc)
}

/// f(X1,...,Xr) for hybrid operators: the expansion runs over all 2^r
/// combinations of {discrete, continuous} branches, each branch combination
/// contributing its multivariate term groups. Equals `apply_multi` on the
/// realized families.
pub fn apply_hybrid_multi(
    f: &SeriesFunction,
    specs: &[HybridOperatorSpec],
    tol: &Tolerance,
    opts: &SeriesEval,
) -> Result<MatrixC, HybridError> {
    let groups = apply_hybrid_multi_term_groups(f, specs, tol, opts)?;
    let dim = specs
        .first()
        .ok_or_else(|| HybridError::Invalid("no operators".into()))?
        .dimension();
    let mode = specs[0].transform.mode();
    let mut acc = MatrixC::zeros(dim, dim, mode);
    for (_, m) in groups {
        acc = acc.add(&m)?;
    }
    Ok(acc)
}

/// Term groups of the hybrid multivariate expansion keyed by the subset of
/// argument positions carrying nilpotent factors, summed over all branch
/// combinations.
pub fn apply_hybrid_multi_term_groups(
    f: &SeriesFunction,
    specs: &[HybridOperatorSpec],
    tol: &Tolerance,
    opts: &SeriesEval,
) -> Result<BTreeMap<Vec<usize>, MatrixC>, HybridError> {
    let r = specs.len();
    if r == 0 {
        return Err(HybridError::Invalid("no operators".into()));
    }
    let parts: Vec<(Vec<BlockData>, Vec<BlockData>)> = specs
        .iter()
        .map(|s| s.part_blocks(tol))
        .collect::<Result<_, _>>()?;

    let mut total: BTreeMap<Vec<usize>, MatrixC> = BTreeMap::new();
    // Branch combinations: bit l selects sigma_d (0) or sigma_c (1) of
    // argument l.
    for combo in 0..(1usize << r) {
        let args: Vec<Vec<BlockData>> = (0..r)
            .map(|l| {
                if combo & (1 << l) == 0 {
                    parts[l].0.clone()
                } else {
                    parts[l].1.clone()
                }
            })
            .collect();
        if args.iter().any(|a| a.is_empty()) {
            continue;
        }
        let groups = calculus::term_groups_from_blocks(f, &args, opts, false)?;
        for (subset, m) in groups {
            match total.entry(subset) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(m);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    let merged = o.get().add(&m)?;
                    *o.get_mut() = merged;
                }
            }
        }
    }
    if total.is_empty() {
        return Err(HybridError::Invalid(
            "all branch combinations were empty".into(),
        ));
    }
    Ok(total)
}

/// Discretized spectral integral of f: multiplicity-weighted node values on
/// the discrete part, quadrature-weighted node values on the continuous
/// part. Each size-m block contributes m * f(lambda) (its nilpotent
/// corrections are traceless).
pub fn quadrature_trace(
    f: &SeriesFunction,
    spec: &HybridOperatorSpec,
    opts: &SeriesEval,
) -> Result<Scalar, HybridError> {
    let mode = spec.transform.mode();
    let mut acc = Scalar::zero(mode);
    for d in &spec.discrete {
        let v = f.eval_partial(&[0], std::slice::from_ref(&d.eigenvalue), opts)?;
        let count = Scalar::from_usize(mode, d.multiplicity * d.nilpotency);
        acc = &acc + &(&v * &count);
    }
    for c in &spec.continuous {
        let v = f.eval_partial(&[0], std::slice::from_ref(&c.eigenvalue), opts)?;
        let w = match mode {
            ScalarMode::Float => Scalar::float(c.weight * c.nilpotency as f64, 0.0),
            ScalarMode::Exact => {
                return Err(HybridError::Invalid(
                    "quadrature weights are float-mode only".into(),
                ))
            }
        };
        acc = &acc + &(&v * &w);
    }
    Ok(acc)
}

/// Per-node ratios of an analogous pair of hybrid operators.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioFunctionSpec {
    /// c_i per discrete node.
    pub discrete: Vec<Scalar>,
    /// c(lambda) sampled per continuous node.
    pub continuous: Vec<Scalar>,
}

#[derive(Debug)]
pub struct HybridAnalogy {
    pub ratios: RatioFunctionSpec,
    /// Structural propositions checked on the realizations.
    pub props: PropsReport,
}

/// Decide analogy of two hybrid specs with matching node structure and
/// recover the per-node ratio samples; the propositions are verified on the
/// realized matrices.
pub fn analogous_hybrid(
    x: &HybridOperatorSpec,
    y: &HybridOperatorSpec,
    tol: &Tolerance,
) -> Result<HybridAnalogy, HybridError> {
    if x.discrete.len() != y.discrete.len() {
        return Err(HybridError::Structural(format!(
            "discrete node counts differ: {} vs {}",
            x.discrete.len(),
            y.discrete.len()
        )));
    }
    if x.continuous.len() != y.continuous.len() {
        return Err(HybridError::Structural(format!(
            "continuous node counts differ: {} vs {}",
            x.continuous.len(),
            y.continuous.len()
        )));
    }
    for (i, (a, b)) in x.discrete.iter().zip(y.discrete.iter()).enumerate() {
        if a.nilpotency != b.nilpotency || a.multiplicity != b.multiplicity {
            return Err(HybridError::Structural(format!(
                "discrete node {i}: (m, multiplicity) = ({}, {}) vs ({}, {})",
                a.nilpotency, a.multiplicity, b.nilpotency, b.multiplicity
            )));
        }
    }
    for (i, (a, b)) in x.continuous.iter().zip(y.continuous.iter()).enumerate() {
        if a.nilpotency != b.nilpotency {
            return Err(HybridError::Structural(format!(
                "continuous node {i}: m = {} vs {}",
                a.nilpotency, b.nilpotency
            )));
        }
    }
    let ratio_of = |a: &Scalar, b: &Scalar| -> Result<Scalar, HybridError> {
        match (a.is_zero(), b.is_zero()) {
            (true, true) => Ok(Scalar::one(a.mode())),
            (true, false) | (false, true) => Err(HybridError::ZeroPairing),
            (false, false) => Ok(b / a),
        }
    };
    let mut ratios = RatioFunctionSpec {
        discrete: Vec::new(),
        continuous: Vec::new(),
    };
    for (a, b) in x.discrete.iter().zip(y.discrete.iter()) {
        ratios.discrete.push(ratio_of(&a.eigenvalue, &b.eigenvalue)?);
    }
    for (a, b) in x.continuous.iter().zip(y.continuous.iter()) {
        ratios
            .continuous
            .push(ratio_of(&a.eigenvalue, &b.eigenvalue)?);
    }

    let xs = x.to_jordan_spec(tol)?;
    let ys = y.to_jordan_spec(tol)?;
    let profile = analogy::check_analogous(&xs, &ys)
        .map_err(|e| HybridError::Structural(e.to_string()))?;
    let props = analogy::verify_props(&xs, &ys, &profile, tol)?;
    Ok(HybridAnalogy { ratios, props })
}

/// Fredholm determinant of a truncated trace-class sequence scaled by
/// ratios: the product of (1 + c_i lambda_i). With ratios all one this is
/// det_F of the sequence itself; the empty product is 1.
pub fn fredholm_det(eigenvalues: &[Scalar], ratios: &[Scalar]) -> Result<Scalar, HybridError> {
    if eigenvalues.len() != ratios.len() {
        return Err(HybridError::Invalid(format!(
            "{} eigenvalues but {} ratios",
            eigenvalues.len(),
            ratios.len()
        )));
    }
    let mode = eigenvalues
        .first()
        .map(|s| s.mode())
        .unwrap_or(ScalarMode::Float);
    let mut acc = Scalar::one(mode);
    for (l, c) in eigenvalues.iter().zip(ratios.iter()) {
        if c.is_zero() {
            return Err(HybridError::Invalid("ratios must be nonzero".into()));
        }
        let term = &Scalar::one(mode) + &(c * l);
        acc = &acc * &term;
    }
    Ok(acc)
}

impl BlockData {
    fn npower(&self, q: usize) -> &MatrixC {
        &self.npowers[q - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{apply_single, apply_two, SeriesFunction};
    use crate::sample;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn opts() -> SeriesEval {
        SeriesEval::default()
    }

    fn disc(ev: f64, m: usize, mult: usize) -> DiscreteNode {
        DiscreteNode {
            eigenvalue: Scalar::float(ev, 0.0),
            nilpotency: m,
            multiplicity: mult,
        }
    }

    #[test]
    fn purely_discrete_diagonalizable() {
        let spec = HybridOperatorSpec::new(
            vec![disc(0.5, 1, 1), disc(-0.25, 1, 2)],
            vec![],
            MatrixC::identity(3, ScalarMode::Float),
        )
        .unwrap();
        let realized = spec.realize(&tol()).unwrap();
        assert!(realized
            .family
            .items()
            .iter()
            .all(|it| it.nilpotent.is_zero_to(0.0)));
        assert_eq!(realized.origins.len(), 3);
    }

    #[test]
    fn continuous_segment_realizes_diagonal() {
        let nodes = HybridOperatorSpec::midpoint_segment(0.0, 1.0, 8, 1);
        let spec = HybridOperatorSpec::new(
            vec![],
            nodes.clone(),
            MatrixC::identity(8, ScalarMode::Float),
        )
        .unwrap();
        let realized = spec.realize(&tol()).unwrap();
        for (j, node) in nodes.iter().enumerate() {
            assert!(realized
                .matrix
                .get(j, j)
                .approx_eq(&node.eigenvalue, 1e-15));
        }
    }

    #[test]
    fn mixed_spec_roundtrip() {
        let spec = HybridOperatorSpec::new(
            vec![disc(5.0, 2, 1)],
            HybridOperatorSpec::midpoint_segment(0.0, 1.0, 4, 1),
            sample::seeded_transform(6, 3),
        )
        .unwrap();
        let realized = spec.realize(&tol()).unwrap();
        assert_eq!(realized.matrix.rows(), 6);
        let back = realized.family.reconstruct().unwrap();
        assert!(back.sub(&realized.matrix).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn discrete_and_continuous_projectors_annihilate() {
        let spec = HybridOperatorSpec::new(
            vec![disc(2.0, 2, 1), disc(-1.5, 1, 1)],
            HybridOperatorSpec::midpoint_segment(0.0, 1.0, 3, 1),
            sample::seeded_transform(6, 61),
        )
        .unwrap();
        let realized = spec.realize(&tol()).unwrap();
        let report = crate::jordan::verify_family(&realized.family, &tol());
        assert!(report.is_valid(), "{report}");
        for (a, oa) in realized.family.items().iter().zip(&realized.origins) {
            for (b, ob) in realized.family.items().iter().zip(&realized.origins) {
                let cross = matches!(oa, NodeOrigin::Discrete(_))
                    != matches!(ob, NodeOrigin::Discrete(_));
                if cross {
                    let prod = a.projector.mat_mul(&b.projector).unwrap();
                    assert!(prod.max_abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn identity_function_reproduces_matrix() {
        let spec = HybridOperatorSpec::new(
            vec![disc(0.7, 2, 1)],
            HybridOperatorSpec::midpoint_segment(-0.5, 0.5, 3, 1),
            sample::seeded_transform(5, 11),
        )
        .unwrap();
        let out = apply_hybrid(&SeriesFunction::identity(), &spec, &tol(), &opts()).unwrap();
        let realized = spec.realize(&tol()).unwrap();
        assert!(out.sub(&realized.matrix).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn exp_on_diagonal_continuous_spec() {
        let nodes = HybridOperatorSpec::midpoint_segment(0.0, 1.0, 5, 1);
        let spec = HybridOperatorSpec::new(
            vec![],
            nodes.clone(),
            MatrixC::identity(5, ScalarMode::Float),
        )
        .unwrap();
        let out = apply_hybrid(&SeriesFunction::exp(), &spec, &tol(), &opts()).unwrap();
        for (j, node) in nodes.iter().enumerate() {
            let want = node.eigenvalue.re_f64().exp();
            assert!((out.get(j, j).re_f64() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn reduction_to_finite_family() {
        let spec = HybridOperatorSpec::new(
            vec![disc(0.9, 2, 1)],
            HybridOperatorSpec::midpoint_segment(0.0, 0.8, 4, 1),
            sample::seeded_transform(6, 21),
        )
        .unwrap();
        let realized = spec.realize(&tol()).unwrap();
        let hybrid = apply_hybrid(&SeriesFunction::exp(), &spec, &tol(), &opts()).unwrap();
        let finite = apply_single(&SeriesFunction::exp(), &realized.family, &opts()).unwrap();
        assert!(hybrid.sub(&finite).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn multi_product_of_discrete_diagonals() {
        let s1 = HybridOperatorSpec::new(
            vec![disc(0.5, 1, 1), disc(0.25, 1, 1)],
            vec![],
            MatrixC::identity(2, ScalarMode::Float),
        )
        .unwrap();
        let s2 = HybridOperatorSpec::new(
            vec![disc(-0.5, 1, 1), disc(0.75, 1, 1)],
            vec![],
            MatrixC::identity(2, ScalarMode::Float),
        )
        .unwrap();
        let f = SeriesFunction::product_of_variables(2);
        let out = apply_hybrid_multi(&f, &[s1.clone(), s2.clone()], &tol(), &opts()).unwrap();
        let direct = s1
            .realize(&tol())
            .unwrap()
            .matrix
            .mat_mul(&s2.realize(&tol()).unwrap().matrix)
            .unwrap();
        assert!(out.sub(&direct).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn multi_matches_finite_two_variable() {
        let s1 = HybridOperatorSpec::new(
            vec![disc(0.3, 1, 2), disc(-0.2, 2, 1)],
            vec![],
            sample::seeded_transform(4, 31),
        )
        .unwrap();
        let s2 = HybridOperatorSpec::new(
            vec![],
            HybridOperatorSpec::midpoint_segment(0.0, 0.6, 4, 1),
            sample::seeded_transform(4, 32),
        )
        .unwrap();
        let f = SeriesFunction::exp_sum_truncated(2, 10);
        let out = apply_hybrid_multi(&f, &[s1.clone(), s2.clone()], &tol(), &opts()).unwrap();
        let finite = apply_two(
            &f,
            &s1.realize(&tol()).unwrap().family,
            &s2.realize(&tol()).unwrap().family,
            &opts(),
        )
        .unwrap();
        assert!(out.sub(&finite).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn mixed_derivative_term_is_load_bearing() {
        // One m = 2 discrete node: the nilpotent-on-the-first-argument
        // group is nonzero and dropping it breaks oracle agreement.
        let s1 = HybridOperatorSpec::new(
            vec![disc(0.4, 2, 1)],
            HybridOperatorSpec::midpoint_segment(0.0, 0.5, 2, 1),
            sample::seeded_transform(4, 41),
        )
        .unwrap();
        let s2 = HybridOperatorSpec::new(
            vec![disc(0.6, 1, 2), disc(-0.1, 1, 2)],
            vec![],
            sample::seeded_transform(4, 42),
        )
        .unwrap();
        let f = SeriesFunction::exp_sum_truncated(2, 12);
        let groups =
            apply_hybrid_multi_term_groups(&f, &[s1.clone(), s2.clone()], &tol(), &opts())
                .unwrap();
        let np_group = groups.get(&vec![0usize]).unwrap();
        assert!(np_group.max_abs() > 1e-3, "mixed term vanished");

        let full = apply_hybrid_multi(&f, &[s1.clone(), s2.clone()], &tol(), &opts()).unwrap();
        let oracle = calculus::series_oracle(
            &f,
            &[
                s1.realize(&tol()).unwrap().matrix,
                s2.realize(&tol()).unwrap().matrix,
            ],
            12,
            &opts(),
        )
        .unwrap();
        assert!(full.sub(&oracle).unwrap().max_abs() < 1e-6);
        let ablated = full.sub(np_group).unwrap();
        assert!(ablated.sub(&oracle).unwrap().max_abs() > 1e-3);
    }

    #[test]
    fn analogy_of_self_and_scaled() {
        let spec = HybridOperatorSpec::new(
            vec![disc(2.0, 2, 1)],
            HybridOperatorSpec::midpoint_segment(3.0, 4.0, 3, 1),
            sample::seeded_transform(5, 51),
        )
        .unwrap();
        let same = analogous_hybrid(&spec, &spec, &tol()).unwrap();
        assert!(same
            .ratios
            .discrete
            .iter()
            .chain(same.ratios.continuous.iter())
            .all(|c| c.approx_eq(&Scalar::float(1.0, 0.0), 1e-12)));
        assert!(same.props.all_passed(), "{}", same.props);

        let doubled = HybridOperatorSpec::new(
            vec![disc(4.0, 2, 1)],
            spec.continuous()
                .iter()
                .map(|c| ContinuousNode {
                    eigenvalue: &c.eigenvalue * &Scalar::float(2.0, 0.0),
                    weight: c.weight,
                    nilpotency: c.nilpotency,
                })
                .collect(),
            spec.transform().clone(),
        )
        .unwrap();
        let scaled = analogous_hybrid(&spec, &doubled, &tol()).unwrap();
        assert!(scaled
            .ratios
            .discrete
            .iter()
            .chain(scaled.ratios.continuous.iter())
            .all(|c| c.approx_eq(&Scalar::float(2.0, 0.0), 1e-12)));
        assert!(scaled.props.all_passed(), "{}", scaled.props);
        // Trace relation on the realizations.
        let tx = spec.realize(&tol()).unwrap().matrix.trace().unwrap();
        let ty = doubled.realize(&tol()).unwrap().matrix.trace().unwrap();
        assert!(ty.dist(&(&Scalar::float(2.0, 0.0) * &tx)) < 1e-9);
    }

    #[test]
    fn mismatched_nilpotency_is_structural() {
        let a = HybridOperatorSpec::new(
            vec![disc(1.0, 2, 1)],
            vec![],
            MatrixC::identity(2, ScalarMode::Float),
        )
        .unwrap();
        let b = HybridOperatorSpec::new(
            vec![disc(2.0, 1, 2)],
            vec![],
            MatrixC::identity(2, ScalarMode::Float),
        )
        .unwrap();
        assert!(matches!(
            analogous_hybrid(&a, &b, &tol()),
            Err(HybridError::Structural(_))
        ));
    }

    #[test]
    fn fredholm_small_cases() {
        assert_eq!(
            fredholm_det(&[], &[]).unwrap(),
            Scalar::float(1.0, 0.0)
        );
        let v = fredholm_det(
            &[Scalar::exact_int(1, 0), Scalar::exact_ratio(1, 2, 0, 1)],
            &[Scalar::exact_int(1, 0), Scalar::exact_int(1, 0)],
        )
        .unwrap();
        assert_eq!(v, Scalar::exact_int(3, 0));
    }

    #[test]
    fn fredholm_matches_matrix_determinant() {
        let eigenvalues: Vec<Scalar> = (1..=20)
            .map(|i| Scalar::float(0.5f64.powi(i), 0.0))
            .collect();
        let ratios = vec![Scalar::float(1.0, 0.0); 20];
        let det_f = fredholm_det(&eigenvalues, &ratios).unwrap();

        let mut cumulative = Scalar::float(1.0, 0.0);
        for ev in &eigenvalues {
            cumulative = &cumulative * &(&Scalar::float(1.0, 0.0) + ev);
        }
        assert!(det_f.dist(&cumulative) < 1e-12);

        let mut m = MatrixC::identity(20, ScalarMode::Float);
        for (i, ev) in eigenvalues.iter().enumerate() {
            m[(i, i)] = &m[(i, i)] + ev;
        }
        let det_m = m.determinant().unwrap();
        assert!(det_f.dist(&det_m) < 1e-12);
    }

    #[test]
    fn quadrature_trace_refinement_is_second_order() {
        let exact = std::f64::consts::E - 1.0;
        let mut errors = Vec::new();
        for n in [8usize, 16, 32] {
            let spec = HybridOperatorSpec::new(
                vec![],
                HybridOperatorSpec::midpoint_segment(0.0, 1.0, n, 1),
                MatrixC::identity(n, ScalarMode::Float),
            )
            .unwrap();
            let tr = quadrature_trace(&SeriesFunction::exp(), &spec, &opts()).unwrap();
            errors.push((tr.re_f64() - exact).abs());
        }
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!(
                (ratio - 4.0).abs() <= 4.0 * 0.5,
                "midpoint refinement ratio {ratio}"
            );
        }
    }

    #[test]
    fn overlapping_spectra_rejected() {
        let err = HybridOperatorSpec::new(
            vec![disc(0.5, 1, 1)],
            vec![ContinuousNode {
                eigenvalue: Scalar::float(0.5, 0.0),
                weight: 1.0,
                nilpotency: 1,
            }],
            MatrixC::identity(2, ScalarMode::Float),
        );
        assert!(matches!(err, Err(HybridError::Overlap(_))));
    }
}
