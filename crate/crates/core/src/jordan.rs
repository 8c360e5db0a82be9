//! Jordan structure: assemble a matrix from its spec, decompose a matrix
//! back into one, extract the per-block projector/nilpotent family, and
//! verify the family identities.
//!
//! A family consists of one (P, N) pair per Jordan block. The projectors are
//! orthogonal and complete, each nilpotent has degree exactly equal to its
//! block size, and the original matrix is `sum(lambda * P) + sum(N)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::matrix::{MatrixC, MatrixError};
use crate::scalar::{Scalar, ScalarMode, Tolerance};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("transform must be square")]
    TransformNotSquare,
    #[error("spec needs at least one eigenvalue group")]
    NoGroups,
    #[error("group {0} has no blocks")]
    EmptyGroup(usize),
    #[error("block sizes must be positive")]
    ZeroBlockSize,
    #[error("block sizes of group {0} must be nonincreasing")]
    BlockSizesNotSorted(usize),
    #[error("sum of block sizes {got} does not match transform dimension {dim}")]
    SizeMismatch { got: usize, dim: usize },
    #[error("eigenvalues {0} and {1} are not distinct (separation {2:.3e} <= cluster_eps)")]
    EigenvaluesNotDistinct(usize, usize, f64),
    #[error("eigenvalue mode differs from transform mode")]
    ModeMismatch,
}

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("input must be square")]
    NotSquare,
    #[error("exact-mode decomposition requires supplied eigenvalues")]
    ExactRequiresEigenvalues,
    #[error("eigensolver did not converge")]
    EigensolverFailed,
    #[error("clustering-ambiguous: eigenvalue clusters separated by {gap:.3e} (< 2x cluster_eps {eps:.3e})")]
    ClusteringAmbiguous { gap: f64, eps: f64 },
    #[error("chain-construction failure: {0}")]
    ChainConstruction(String),
    #[error("invalid eigenvalues: {0}")]
    InvalidEigenvalues(String),
    #[error("reconstruction residual {residual:.3e} exceeds recon_eps {eps:.3e}")]
    Reconstruction { residual: f64, eps: f64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// One distinct eigenvalue with its Jordan block sizes, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenGroup {
    pub eigenvalue: Scalar,
    pub block_sizes: Vec<usize>,
}

impl EigenGroup {
    pub fn new(eigenvalue: Scalar, block_sizes: Vec<usize>) -> Self {
        Self {
            eigenvalue,
            block_sizes,
        }
    }

    /// Algebraic multiplicity: sum of the block sizes.
    pub fn alpha_algebraic(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Geometric multiplicity: number of blocks.
    pub fn alpha_geometric(&self) -> usize {
        self.block_sizes.len()
    }
}

/// Transform plus per-eigenvalue block sizes; exact ground truth for
/// structured inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanSpec {
    transform: MatrixC,
    groups: Vec<EigenGroup>,
}

impl JordanSpec {
    pub fn new(
        transform: MatrixC,
        groups: Vec<EigenGroup>,
        tol: &Tolerance,
    ) -> Result<Self, SpecError> {
        if !transform.is_square() {
            return Err(SpecError::TransformNotSquare);
        }
        if groups.is_empty() {
            return Err(SpecError::NoGroups);
        }
        let dim = transform.rows();
        let mut total = 0usize;
        for (gi, g) in groups.iter().enumerate() {
            if g.block_sizes.is_empty() {
                return Err(SpecError::EmptyGroup(gi));
            }
            if g.block_sizes.contains(&0) {
                return Err(SpecError::ZeroBlockSize);
            }
            if g.block_sizes.windows(2).any(|w| w[0] < w[1]) {
                return Err(SpecError::BlockSizesNotSorted(gi));
            }
            if g.eigenvalue.mode() != transform.mode() {
                return Err(SpecError::ModeMismatch);
            }
            total += g.alpha_algebraic();
        }
        if total != dim {
            return Err(SpecError::SizeMismatch { got: total, dim });
        }
        for i in 0..groups.len() {
            for j in (i + 1)..groups.len() {
                let d = groups[i].eigenvalue.dist(&groups[j].eigenvalue);
                let distinct = match transform.mode() {
                    ScalarMode::Exact => groups[i].eigenvalue != groups[j].eigenvalue,
                    ScalarMode::Float => d > tol.cluster_eps,
                };
                if !distinct {
                    return Err(SpecError::EigenvaluesNotDistinct(i, j, d));
                }
            }
        }
        Ok(Self { transform, groups })
    }

    pub fn transform(&self) -> &MatrixC {
        &self.transform
    }

    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    pub fn dimension(&self) -> usize {
        self.transform.rows()
    }

    pub fn mode(&self) -> ScalarMode {
        self.transform.mode()
    }

    /// (group index, block index, column offset, block size) in layout order.
    pub fn block_layout(&self) -> Vec<BlockSlot> {
        let mut out = Vec::new();
        let mut offset = 0;
        for (gi, g) in self.groups.iter().enumerate() {
            for (bi, &size) in g.block_sizes.iter().enumerate() {
                out.push(BlockSlot {
                    group: gi,
                    block: bi,
                    offset,
                    size,
                });
                offset += size;
            }
        }
        out
    }

    /// The block-diagonal Jordan matrix (no transform applied).
    pub fn jordan_matrix(&self) -> MatrixC {
        let dim = self.dimension();
        let mode = self.mode();
        let mut j = MatrixC::zeros(dim, dim, mode);
        for slot in self.block_layout() {
            let lambda = &self.groups[slot.group].eigenvalue;
            for r in 0..slot.size {
                j[(slot.offset + r, slot.offset + r)] = lambda.clone();
                if r + 1 < slot.size {
                    j[(slot.offset + r, slot.offset + r + 1)] = Scalar::one(mode);
                }
            }
        }
        j
    }

    /// U (direct sum of Jordan blocks) U^-1.
    pub fn assemble(&self, tol: &Tolerance) -> Result<MatrixC, DecomposeError> {
        let u_inv = self.transform.inverse(tol)?;
        let j = self.jordan_matrix();
        Ok(self.transform.mat_mul(&j)?.mat_mul(&u_inv)?)
    }

    /// One (projector, nilpotent) pair per Jordan block.
    pub fn extract_family(&self, tol: &Tolerance) -> Result<SpectralFamily, DecomposeError> {
        let u_inv = self.transform.inverse(tol)?;
        let dim = self.dimension();
        let mode = self.mode();
        let mut items = Vec::new();
        for slot in self.block_layout() {
            let mut selector = MatrixC::zeros(dim, dim, mode);
            let mut shift = MatrixC::zeros(dim, dim, mode);
            for r in 0..slot.size {
                selector[(slot.offset + r, slot.offset + r)] = Scalar::one(mode);
                if r + 1 < slot.size {
                    shift[(slot.offset + r, slot.offset + r + 1)] = Scalar::one(mode);
                }
            }
            let projector = self.transform.mat_mul(&selector)?.mat_mul(&u_inv)?;
            let nilpotent = self.transform.mat_mul(&shift)?.mat_mul(&u_inv)?;
            items.push(FamilyItem {
                group: slot.group,
                block: slot.block,
                eigenvalue: self.groups[slot.group].eigenvalue.clone(),
                block_size: slot.size,
                projector,
                nilpotent,
            });
        }
        Ok(SpectralFamily {
            dimension: dim,
            items,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSlot {
    pub group: usize,
    pub block: usize,
    pub offset: usize,
    pub size: usize,
}

/// Projector/nilpotent pair for one Jordan block.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyItem {
    /// Index of the distinct eigenvalue this block belongs to.
    pub group: usize,
    /// Index of the block within its eigenvalue group.
    pub block: usize,
    pub eigenvalue: Scalar,
    pub block_size: usize,
    pub projector: MatrixC,
    pub nilpotent: MatrixC,
}

/// The full projector/nilpotent family of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFamily {
    dimension: usize,
    items: Vec<FamilyItem>,
}

impl SpectralFamily {
    pub fn new(dimension: usize, items: Vec<FamilyItem>) -> Self {
        Self { dimension, items }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn items(&self) -> &[FamilyItem] {
        &self.items
    }

    pub fn items_mut(&mut self) -> &mut [FamilyItem] {
        &mut self.items
    }

    pub fn mode(&self) -> ScalarMode {
        self.items[0].projector.mode()
    }

    /// sum(lambda * P) + sum(N).
    pub fn reconstruct(&self) -> Result<MatrixC, MatrixError> {
        let mode = self.mode();
        let mut acc = MatrixC::zeros(self.dimension, self.dimension, mode);
        for item in &self.items {
            acc = acc.add(&item.projector.scale(&item.eigenvalue))?;
            acc = acc.add(&item.nilpotent)?;
        }
        Ok(acc)
    }
}

/// A single violated family identity.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyViolation {
    /// sum(P) != I
    Completeness { residual: f64 },
    /// P^2 != P
    Idempotence { item: usize, residual: f64 },
    /// P_a P_b != 0 for distinct blocks
    Orthogonality { a: usize, b: usize, residual: f64 },
    /// N^m != 0
    Nilpotency { item: usize, residual: f64 },
    /// N^(m-1) == 0 although the block size is m
    NilpotencyPremature { item: usize },
    /// P_a N_b or N_b P_a deviates from delta(a,b) N_b
    ProjectorNilpotent { a: usize, b: usize, residual: f64 },
    /// N_a N_b != 0 for distinct blocks
    NilpotentCross { a: usize, b: usize, residual: f64 },
}

impl std::fmt::Display for FamilyViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyViolation::Completeness { residual } => {
                write!(f, "completeness: sum(P) - I has max entry {residual:.3e}")
            }
            FamilyViolation::Idempotence { item, residual } => {
                write!(f, "idempotence: P[{item}]^2 - P[{item}] has max entry {residual:.3e}")
            }
            FamilyViolation::Orthogonality { a, b, residual } => {
                write!(f, "orthogonality: P[{a}]P[{b}] has max entry {residual:.3e}")
            }
            FamilyViolation::Nilpotency { item, residual } => {
                write!(f, "nilpotency: N[{item}]^m has max entry {residual:.3e}")
            }
            FamilyViolation::NilpotencyPremature { item } => {
                write!(f, "nilpotency: N[{item}]^(m-1) vanishes before degree m")
            }
            FamilyViolation::ProjectorNilpotent { a, b, residual } => {
                write!(f, "projector/nilpotent: P[{a}],N[{b}] relation off by {residual:.3e}")
            }
            FamilyViolation::NilpotentCross { a, b, residual } => {
                write!(f, "nilpotent cross: N[{a}]N[{b}] has max entry {residual:.3e}")
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FamilyReport {
    pub violations: Vec<FamilyViolation>,
}

impl FamilyReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for FamilyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_valid() {
            write!(f, "all family identities hold")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Check completeness, idempotence, orthogonality, nilpotency degrees, and
/// the projector/nilpotent product relations. Empty report iff all hold.
pub fn verify_family(family: &SpectralFamily, tol: &Tolerance) -> FamilyReport {
    let mut report = FamilyReport::default();
    let mode = family.mode();
    let dim = family.dimension();
    let eps = match mode {
        ScalarMode::Exact => 0.0,
        ScalarMode::Float => tol.recon_eps,
    };
    let items = family.items();

    let mut sum_p = MatrixC::zeros(dim, dim, mode);
    for item in items {
        sum_p = sum_p.add(&item.projector).unwrap();
    }
    let completeness = sum_p
        .sub(&MatrixC::identity(dim, mode))
        .unwrap()
        .max_abs();
    if completeness > eps {
        report
            .violations
            .push(FamilyViolation::Completeness { residual: completeness });
    }

    for (a, item) in items.iter().enumerate() {
        let p2 = item.projector.mat_mul(&item.projector).unwrap();
        let r = p2.sub(&item.projector).unwrap().max_abs();
        if r > eps {
            report
                .violations
                .push(FamilyViolation::Idempotence { item: a, residual: r });
        }

        let npow = item.nilpotent.pow(item.block_size).unwrap();
        let r = npow.max_abs();
        if r > eps {
            report
                .violations
                .push(FamilyViolation::Nilpotency { item: a, residual: r });
        }
        if item.block_size > 1 {
            let prev = item.nilpotent.pow(item.block_size - 1).unwrap();
            if prev.is_zero_to(eps) {
                report
                    .violations
                    .push(FamilyViolation::NilpotencyPremature { item: a });
            }
        }
    }

    for a in 0..items.len() {
        for b in 0..items.len() {
            if a != b {
                let r = items[a]
                    .projector
                    .mat_mul(&items[b].projector)
                    .unwrap()
                    .max_abs();
                if r > eps {
                    report
                        .violations
                        .push(FamilyViolation::Orthogonality { a, b, residual: r });
                }
                let r = items[a]
                    .nilpotent
                    .mat_mul(&items[b].nilpotent)
                    .unwrap()
                    .max_abs();
                if r > eps {
                    report
                        .violations
                        .push(FamilyViolation::NilpotentCross { a, b, residual: r });
                }
            }
            let pn = items[a].projector.mat_mul(&items[b].nilpotent).unwrap();
            let np = items[b].nilpotent.mat_mul(&items[a].projector).unwrap();
            let expected = if a == b {
                items[b].nilpotent.clone()
            } else {
                MatrixC::zeros(dim, dim, mode)
            };
            let r = pn
                .sub(&expected)
                .unwrap()
                .max_abs()
                .max(np.sub(&expected).unwrap().max_abs());
            if r > eps {
                report
                    .violations
                    .push(FamilyViolation::ProjectorNilpotent { a, b, residual: r });
            }
        }
    }
    report
}

/// Decompose a float-mode matrix. Eigenvalues come from a Schur
/// decomposition and are clustered with `cluster_eps`; block sizes follow the
/// rank sequence of (X - lambda I)^j.
///
/// Exact-mode matrices need [`decompose_with_eigenvalues`]: root-finding for
/// the characteristic polynomial is out of scope, so exactness stays honest.
pub fn decompose(x: &MatrixC, tol: &Tolerance) -> Result<JordanSpec, DecomposeError> {
    if !x.is_square() {
        return Err(DecomposeError::NotSquare);
    }
    match x.mode() {
        ScalarMode::Exact => Err(DecomposeError::ExactRequiresEigenvalues),
        ScalarMode::Float => {
            let raw = crate::matrix::float_eigenvalues(x)
                .map_err(|_| DecomposeError::EigensolverFailed)?;
            let clusters = cluster_eigenvalues(&raw, tol)?;
            decompose_clusters(x, &clusters, tol)
        }
    }
}

/// Decompose with caller-supplied distinct eigenvalues (required in exact
/// mode, optional in float mode). Multiplicities are derived from the rank
/// sequence.
pub fn decompose_with_eigenvalues(
    x: &MatrixC,
    eigenvalues: &[Scalar],
    tol: &Tolerance,
) -> Result<JordanSpec, DecomposeError> {
    if !x.is_square() {
        return Err(DecomposeError::NotSquare);
    }
    if eigenvalues.is_empty() {
        return Err(DecomposeError::InvalidEigenvalues("empty list".into()));
    }
    for ev in eigenvalues {
        if ev.mode() != x.mode() {
            return Err(DecomposeError::InvalidEigenvalues(
                "eigenvalue mode differs from matrix mode".into(),
            ));
        }
    }
    for i in 0..eigenvalues.len() {
        for j in (i + 1)..eigenvalues.len() {
            let gap = eigenvalues[i].dist(&eigenvalues[j]);
            let distinct = match x.mode() {
                ScalarMode::Exact => eigenvalues[i] != eigenvalues[j],
                ScalarMode::Float => gap > tol.cluster_eps,
            };
            if !distinct {
                return Err(DecomposeError::ClusteringAmbiguous {
                    gap,
                    eps: tol.cluster_eps,
                });
            }
        }
    }
    let mut clusters: Vec<Cluster> = eigenvalues
        .iter()
        .map(|ev| Cluster {
            value: ev.clone(),
            multiplicity: None,
        })
        .collect();
    clusters.sort_by(|a, b| {
        a.value
            .lex_key()
            .partial_cmp(&b.value.lex_key())
            .unwrap()
    });
    decompose_clusters(x, &clusters, tol)
}

struct Cluster {
    value: Scalar,
    /// Known member count from the eigensolver; `None` derives it from rank
    /// stabilization.
    multiplicity: Option<usize>,
}

/// Union-find clustering at distance `cluster_eps`, rejecting clusters that
/// come closer than twice that to each other.
fn cluster_eigenvalues(raw: &[Complex64], tol: &Tolerance) -> Result<Vec<Cluster>, DecomposeError> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (raw[i] - raw[j]).norm() <= tol.cluster_eps {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    // A separate cluster within 2x cluster_eps of another signals that the
    // clustering radius cannot cleanly separate them.
    let reps: Vec<&Vec<usize>> = groups.values().collect();
    for a in 0..reps.len() {
        for b in (a + 1)..reps.len() {
            for &i in reps[a] {
                for &j in reps[b] {
                    let gap = (raw[i] - raw[j]).norm();
                    if gap < 2.0 * tol.cluster_eps {
                        return Err(DecomposeError::ClusteringAmbiguous {
                            gap,
                            eps: tol.cluster_eps,
                        });
                    }
                }
            }
        }
    }
    let mut clusters: Vec<Cluster> = groups
        .values()
        .map(|members| {
            let mean = members.iter().map(|&i| raw[i]).sum::<Complex64>()
                / Complex64::new(members.len() as f64, 0.0);
            Cluster {
                value: Scalar::from_complex(mean),
                multiplicity: Some(members.len()),
            }
        })
        .collect();
    clusters.sort_by(|a, b| a.value.lex_key().partial_cmp(&b.value.lex_key()).unwrap());
    Ok(clusters)
}

fn decompose_clusters(
    x: &MatrixC,
    clusters: &[Cluster],
    tol: &Tolerance,
) -> Result<JordanSpec, DecomposeError> {
    let dim = x.rows();
    let mode = x.mode();
    let mut groups = Vec::new();
    let mut columns: Vec<MatrixC> = Vec::new();

    let ambient = x.max_abs();
    for cluster in clusters {
        let shifted = x.sub(&MatrixC::identity(dim, mode).scale(&cluster.value))?;
        let powers = ShiftedPowers::new(&shifted, ambient, tol);
        let weyr = weyr_ranks(&powers, dim, cluster.multiplicity)?;
        let alpha = dim - *weyr.last().unwrap();
        if alpha == 0 {
            return Err(DecomposeError::InvalidEigenvalues(format!(
                "{} is not an eigenvalue (rank did not drop)",
                cluster.value
            )));
        }
        let sizes = block_sizes_from_ranks(dim, &weyr)?;
        let chains = build_chains(&shifted, &powers, dim, &weyr, tol)?;
        let chain_sizes: Vec<usize> = chains.iter().map(|c| c.len()).collect();
        if chain_sizes != sizes {
            return Err(DecomposeError::ChainConstruction(format!(
                "chain lengths {chain_sizes:?} disagree with rank-derived sizes {sizes:?}"
            )));
        }
        for chain in chains {
            // Stored head-first; Jordan basis wants the eigenvector first.
            for v in chain.iter().rev() {
                columns.push(v.clone());
            }
        }
        groups.push(EigenGroup::new(cluster.value.clone(), sizes));
    }

    let total: usize = groups.iter().map(|g| g.alpha_algebraic()).sum();
    if total != dim {
        return Err(DecomposeError::InvalidEigenvalues(format!(
            "multiplicities sum to {total}, expected {dim}"
        )));
    }

    let transform = MatrixC::from_fn(dim, dim, |i, j| columns[j].get(i, 0).clone())?;
    let spec = JordanSpec::new(transform, groups, tol)?;

    let rebuilt = spec.assemble(tol)?;
    let residual = rebuilt.sub(x)?.max_abs();
    let ok = match mode {
        ScalarMode::Exact => residual == 0.0,
        ScalarMode::Float => residual <= tol.recon_eps,
    };
    if !ok {
        return Err(DecomposeError::Reconstruction {
            residual,
            eps: tol.recon_eps,
        });
    }
    Ok(spec)
}

/// Powers of X - lambda I with scale-aware rank and null-space decisions.
///
/// Float mode normalizes the base matrix by its largest singular value and
/// thresholds singular values of the powers at `rank_eps` absolutely: the
/// j-th power of the normalized matrix has norm at most 1, so anything at
/// rounding-noise level cannot masquerade as full rank.
struct ShiftedPowers {
    base: MatrixC,
    powers: std::cell::RefCell<Vec<MatrixC>>,
    rank_eps: f64,
}

impl ShiftedPowers {
    /// `ambient` is the scale of the matrix being decomposed; a shifted
    /// matrix whose norm is below `rank_eps * ambient` is rounding noise and
    /// treated as exactly zero.
    fn new(shifted: &MatrixC, ambient: f64, tol: &Tolerance) -> Self {
        let base = match shifted.mode() {
            ScalarMode::Exact => shifted.clone(),
            ScalarMode::Float => {
                let smax = shifted
                    .singular_values()
                    .first()
                    .copied()
                    .unwrap_or(0.0);
                if smax <= tol.rank_eps * ambient.max(1.0) {
                    MatrixC::zeros(shifted.rows(), shifted.cols(), ScalarMode::Float)
                } else {
                    shifted.scale(&Scalar::float(1.0 / smax, 0.0))
                }
            }
        };
        Self {
            base,
            powers: std::cell::RefCell::new(Vec::new()),
            rank_eps: tol.rank_eps,
        }
    }

    fn power(&self, j: usize) -> MatrixC {
        assert!(j >= 1);
        let mut cache = self.powers.borrow_mut();
        while cache.len() < j {
            let next = match cache.last() {
                Some(prev) => prev.mat_mul(&self.base).unwrap(),
                None => self.base.clone(),
            };
            cache.push(next);
        }
        cache[j - 1].clone()
    }

    fn rank_and_null(&self, j: usize) -> (usize, Vec<MatrixC>) {
        let p = self.power(j);
        match p.mode() {
            ScalarMode::Exact => {
                let tol = Tolerance::default();
                let r = p.rank_with_tol(&tol);
                let basis = p.null_space_basis(&tol);
                (r, basis)
            }
            ScalarMode::Float => p.svd_rank_null_abs(self.rank_eps),
        }
    }

    fn rank(&self, j: usize) -> usize {
        self.rank_and_null(j).0
    }
}

/// Ranks of M^1, M^2, ... until rank(M^j) = dim - alpha (alpha known) or the
/// rank stabilizes (alpha derived). Returned sequence covers j = 1..=s_max.
fn weyr_ranks(
    powers: &ShiftedPowers,
    dim: usize,
    multiplicity: Option<usize>,
) -> Result<Vec<usize>, DecomposeError> {
    let mut ranks: Vec<usize> = Vec::new();
    for j in 1..=dim {
        let r = powers.rank(j);
        let prev = ranks.last().copied().unwrap_or(dim);
        if r >= prev && !ranks.is_empty() {
            // Stabilized at the previous power (or inconsistent growth);
            // the current rank was never part of the sequence.
            if r > prev {
                return Err(DecomposeError::ChainConstruction(format!(
                    "rank increased from {prev} to {r} on a higher power"
                )));
            }
            break;
        }
        ranks.push(r);
        if let Some(alpha) = multiplicity {
            if r == dim - alpha {
                return Ok(ranks);
            }
            if r < dim - alpha {
                return Err(DecomposeError::ChainConstruction(format!(
                    "rank {r} fell below dim - multiplicity = {}",
                    dim - alpha
                )));
            }
        }
        if r == 0 {
            break;
        }
    }
    if ranks.is_empty() {
        // rank(M) == dim: not an eigenvalue at all; surface as alpha = 0.
        ranks.push(dim);
    }
    match multiplicity {
        Some(alpha) if dim - ranks.last().unwrap() != alpha => {
            Err(DecomposeError::ChainConstruction(format!(
                "rank stabilized at {} but multiplicity demands {}",
                ranks.last().unwrap(),
                dim - alpha
            )))
        }
        _ => Ok(ranks),
    }
}

/// Number of blocks of size >= j is rank(M^(j-1)) - rank(M^j); sizes are the
/// first differences, emitted largest first.
fn block_sizes_from_ranks(dim: usize, weyr: &[usize]) -> Result<Vec<usize>, DecomposeError> {
    let s_max = weyr.len();
    let mut at_least = Vec::with_capacity(s_max + 2);
    at_least.push(0); // unused slot 0
    for j in 1..=s_max {
        let prev = if j == 1 { dim } else { weyr[j - 2] };
        if prev < weyr[j - 1] {
            return Err(DecomposeError::ChainConstruction(
                "rank sequence not nonincreasing".into(),
            ));
        }
        at_least.push(prev - weyr[j - 1]);
    }
    at_least.push(0);
    let mut sizes = Vec::new();
    for s in (1..=s_max).rev() {
        if at_least[s] < at_least[s + 1] {
            return Err(DecomposeError::ChainConstruction(
                "block counts not monotone in the rank sequence".into(),
            ));
        }
        for _ in 0..(at_least[s] - at_least[s + 1]) {
            sizes.push(s);
        }
    }
    Ok(sizes)
}

/// Build generalized-eigenvector chains top-down: heads are picked in
/// Null(M^s) independent of Null(M^(s-1)) and of already-placed vectors, then
/// multiplied down by M. Chains come out in nonincreasing length order.
fn build_chains(
    shifted: &MatrixC,
    powers: &ShiftedPowers,
    dim: usize,
    weyr: &[usize],
    tol: &Tolerance,
) -> Result<Vec<Vec<MatrixC>>, DecomposeError> {
    let s_max = weyr.len();
    // Null-space bases of M^j for j = 0..=s_max (j = 0 is empty).
    let mut null_bases: Vec<Vec<MatrixC>> = vec![Vec::new()];
    for j in 1..=s_max {
        null_bases.push(powers.rank_and_null(j).1);
    }

    let blocks_at_least = |s: usize| -> usize {
        let prev = if s == 1 { dim } else { weyr[s - 2] };
        prev - weyr[s - 1]
    };

    let mut chains: Vec<Vec<MatrixC>> = Vec::new();
    for s in (1..=s_max).rev() {
        for chain in chains.iter_mut() {
            let next = shifted.mat_mul(chain.last().unwrap())?;
            chain.push(next);
        }
        let needed = blocks_at_least(s)
            .checked_sub(chains.len())
            .ok_or_else(|| {
                DecomposeError::ChainConstruction(format!(
                    "more chains than blocks of size >= {s}"
                ))
            })?;
        if needed == 0 {
            continue;
        }
        // Independence baseline: Null(M^(s-1)) plus current level-s vectors.
        let mut baseline: Vec<MatrixC> = null_bases[s - 1].clone();
        baseline.extend(chains.iter().map(|c| normalized_copy(c.last().unwrap())));
        let mut picked = 0;
        for candidate in &null_bases[s] {
            if picked == needed {
                break;
            }
            if extends_span(&baseline, candidate, dim, tol) {
                let head = canonical_head(candidate);
                baseline.push(normalized_copy(&head));
                chains.push(vec![head]);
                picked += 1;
            }
        }
        if picked < needed {
            return Err(DecomposeError::ChainConstruction(format!(
                "found {picked} of {needed} chain heads at level {s}; \
                 rank decisions inconsistent with the null-space bases"
            )));
        }
    }
    Ok(chains)
}

fn extends_span(baseline: &[MatrixC], candidate: &MatrixC, dim: usize, tol: &Tolerance) -> bool {
    let cols = baseline.len() + 1;
    let m = MatrixC::from_fn(dim, cols, |i, j| {
        if j < baseline.len() {
            baseline[j].get(i, 0).clone()
        } else {
            candidate.get(i, 0).clone()
        }
    })
    .unwrap();
    m.rank_with_tol(tol) == cols.min(dim) && cols <= dim
}

/// Unit 2-norm copy for independence tests (float); exact vectors are used
/// as-is since exact rank ignores scale.
fn normalized_copy(v: &MatrixC) -> MatrixC {
    match v.mode() {
        ScalarMode::Exact => v.clone(),
        ScalarMode::Float => {
            let norm: f64 = v
                .entries()
                .iter()
                .map(|s| s.abs() * s.abs())
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 {
                v.clone()
            } else {
                v.scale(&Scalar::float(1.0 / norm, 0.0))
            }
        }
    }
}

/// Scale a chain head so its first component of largest magnitude is 1.
fn canonical_head(v: &MatrixC) -> MatrixC {
    let mut best = 0usize;
    let mut best_abs = -1.0f64;
    for i in 0..v.rows() {
        let a = v.get(i, 0).abs();
        // Strict improvement keeps the first index among equal magnitudes.
        if a > best_abs {
            best = i;
            best_abs = a;
        }
    }
    match v.get(best, 0).try_inv() {
        Some(inv) => v.scale(&inv),
        None => v.clone(),
    }
}
