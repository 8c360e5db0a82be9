//! Holomorphic functions of one or several matrices through the spectral
//! mapping formulas, with an independent truncated-series oracle.
//!
//! A function of r matrices expands into 2^r term groups: for every subset S
//! of argument positions, nilpotent powers N^q (q >= 1) stand at the
//! positions in S and projectors everywhere else, weighted by the matching
//! mixed partial derivative divided by the product of q factorials. The
//! one- and two-variable formulas are the r = 1, 2 cases.
//!
//! Bulk term evaluation is parallel under the `parallel` feature; every
//! entry point has a `_seq` twin with bit-identical output (terms are
//! generated and summed in one fixed order either way).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exec;
use crate::jordan::SpectralFamily;
use crate::matrix::{MatrixC, MatrixError};
use crate::scalar::{Scalar, ScalarMode};

#[derive(Debug, Error)]
pub enum CalcError {
    #[error("function arity {expected} does not match {got} matrix arguments")]
    ArityMismatch { expected: usize, got: usize },
    #[error("eigenvalue {lambda} outside the convergence radius {radius}")]
    OutOfRadius { lambda: String, radius: f64 },
    #[error("exact mode unsupported here: {0}")]
    ExactUnsupported(&'static str),
    #[error("matrix arguments must be square and share one dimension and mode")]
    ArgumentShape,
    #[error("series did not converge within {terms} terms")]
    NonConvergent { terms: usize },
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Truncation policy for series evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesEval {
    /// Mixed absolute/relative stopping threshold.
    pub series_eps: f64,
    /// Hard cap on summed terms.
    pub max_terms: usize,
}

impl Default for SeriesEval {
    fn default() -> Self {
        Self {
            series_eps: 1e-12,
            max_terms: 100_000,
        }
    }
}

/// Relative margin for the strict radius inequality |z| < R.
const RADIUS_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinFn {
    Exp,
    Sin,
    Cos,
    /// sum z^n = 1/(1 - z), radius 1.
    Geometric,
}

impl BuiltinFn {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinFn::Exp => "exp",
            BuiltinFn::Sin => "sin",
            BuiltinFn::Cos => "cos",
            BuiltinFn::Geometric => "geometric",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(BuiltinFn::Exp),
            "sin" => Some(BuiltinFn::Sin),
            "cos" => Some(BuiltinFn::Cos),
            "geometric" => Some(BuiltinFn::Geometric),
            _ => None,
        }
    }

    fn radius(self) -> f64 {
        match self {
            BuiltinFn::Geometric => 1.0,
            _ => f64::INFINITY,
        }
    }

    /// Taylor coefficient a_n.
    fn coeff(self, n: usize) -> f64 {
        match self {
            BuiltinFn::Exp => {
                let mut c = 1.0;
                for k in 1..=n {
                    c /= k as f64;
                }
                c
            }
            BuiltinFn::Sin => {
                if n.is_multiple_of(2) {
                    0.0
                } else {
                    let sign = if (n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
                    sign * BuiltinFn::Exp.coeff(n)
                }
            }
            BuiltinFn::Cos => {
                if n % 2 == 1 {
                    0.0
                } else {
                    let sign = if (n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
                    sign * BuiltinFn::Exp.coeff(n)
                }
            }
            BuiltinFn::Geometric => 1.0,
        }
    }

    /// q-th derivative at z, from the closed form.
    fn derivative(self, q: usize, z: &Scalar) -> Result<Scalar, CalcError> {
        match self {
            BuiltinFn::Geometric => {
                // q! / (1 - z)^(q+1); exact arguments stay exact.
                let mode = z.mode();
                let one = Scalar::one(mode);
                let denom = (&one - z).pow(q + 1);
                let num = Scalar::factorial(mode, q);
                Ok(&num / &denom)
            }
            _ => {
                let Scalar::Float(v) = z else {
                    return Err(CalcError::ExactUnsupported(
                        "exp/sin/cos take float arguments only",
                    ));
                };
                let w = match self {
                    BuiltinFn::Exp => v.exp(),
                    BuiltinFn::Sin => match q % 4 {
                        0 => v.sin(),
                        1 => v.cos(),
                        2 => -v.sin(),
                        _ => -v.cos(),
                    },
                    BuiltinFn::Cos => match q % 4 {
                        0 => v.cos(),
                        1 => -v.sin(),
                        2 => -v.cos(),
                        _ => v.sin(),
                    },
                    BuiltinFn::Geometric => unreachable!(),
                };
                Ok(Scalar::from_complex(w))
            }
        }
    }
}

#[derive(Debug, Clone)]
enum SeriesForm {
    Builtin(BuiltinFn),
    /// Sparse finite coefficient map; exponent tuples have `arity` entries.
    Sparse(BTreeMap<Vec<u32>, Scalar>),
}

/// A power series in one or several complex variables: a univariate builtin
/// with a closed form, or a sparse (finite) coefficient map.
#[derive(Debug, Clone)]
pub struct SeriesFunction {
    arity: usize,
    radii: Vec<f64>,
    form: SeriesForm,
}

impl SeriesFunction {
    pub fn exp() -> Self {
        Self::builtin(BuiltinFn::Exp)
    }

    pub fn sin() -> Self {
        Self::builtin(BuiltinFn::Sin)
    }

    pub fn cos() -> Self {
        Self::builtin(BuiltinFn::Cos)
    }

    pub fn geometric() -> Self {
        Self::builtin(BuiltinFn::Geometric)
    }

    pub fn builtin(f: BuiltinFn) -> Self {
        Self {
            arity: 1,
            radii: vec![f.radius()],
            form: SeriesForm::Builtin(f),
        }
    }

    /// Univariate polynomial from ascending coefficients.
    pub fn polynomial(coeffs: &[Scalar]) -> Self {
        let map = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (vec![i as u32], c.clone()))
            .collect();
        Self {
            arity: 1,
            radii: vec![f64::INFINITY],
            form: SeriesForm::Sparse(map),
        }
    }

    /// f(z) = z.
    pub fn identity() -> Self {
        Self::polynomial(&[Scalar::float(0.0, 0.0), Scalar::float(1.0, 0.0)])
    }

    /// f(z1,...,zr) = z1 * z2 * ... * zr.
    pub fn product_of_variables(arity: usize) -> Self {
        let mut map = BTreeMap::new();
        map.insert(vec![1u32; arity], Scalar::float(1.0, 0.0));
        Self {
            arity,
            radii: vec![f64::INFINITY; arity],
            form: SeriesForm::Sparse(map),
        }
    }

    /// f(z1,...,zr) = z1 + z2 + ... + zr.
    pub fn sum_of_variables(arity: usize) -> Self {
        let mut map = BTreeMap::new();
        for l in 0..arity {
            let mut exps = vec![0u32; arity];
            exps[l] = 1;
            map.insert(exps, Scalar::float(1.0, 0.0));
        }
        Self {
            arity,
            radii: vec![f64::INFINITY; arity],
            form: SeriesForm::Sparse(map),
        }
    }

    /// exp(z1 + ... + zr) truncated at the given total degree: coefficients
    /// 1/(l1! ... lr!). Identical to the truncated product of exponentials.
    pub fn exp_sum_truncated(arity: usize, total_degree: u32) -> Self {
        let mut map = BTreeMap::new();
        let mut exps = vec![0u32; arity];
        fn rec(
            pos: usize,
            left: u32,
            exps: &mut Vec<u32>,
            map: &mut BTreeMap<Vec<u32>, Scalar>,
        ) {
            if pos + 1 == exps.len() {
                for last in 0..=left {
                    exps[pos] = last;
                    let mut c = 1.0f64;
                    for &e in exps.iter() {
                        for k in 1..=e {
                            c /= k as f64;
                        }
                    }
                    map.insert(exps.clone(), Scalar::float(c, 0.0));
                }
                exps[pos] = 0;
                return;
            }
            for e in 0..=left {
                exps[pos] = e;
                rec(pos + 1, left - e, exps, map);
            }
            exps[pos] = 0;
        }
        rec(0, total_degree, &mut exps, &mut map);
        Self {
            arity,
            radii: vec![f64::INFINITY; arity],
            form: SeriesForm::Sparse(map),
        }
    }

    /// Sparse multivariate series from explicit coefficients. Radii may be
    /// infinite; the map must be finite and duplicate-free.
    pub fn from_sparse(
        arity: usize,
        entries: Vec<(Vec<u32>, Scalar)>,
        radii: Vec<f64>,
    ) -> Result<Self, CalcError> {
        if arity == 0 {
            return Err(CalcError::InvalidSeries("arity must be positive".into()));
        }
        if radii.len() != arity {
            return Err(CalcError::InvalidSeries(format!(
                "expected {arity} radii, got {}",
                radii.len()
            )));
        }
        if !radii.iter().all(|r| *r > 0.0) {
            return Err(CalcError::InvalidSeries(
                "radii must be positive (possibly infinite)".into(),
            ));
        }
        let mut map = BTreeMap::new();
        for (exps, coeff) in entries {
            if exps.len() != arity {
                return Err(CalcError::InvalidSeries(format!(
                    "exponent tuple {exps:?} does not have {arity} entries"
                )));
            }
            if coeff.is_zero() {
                continue;
            }
            if map.insert(exps.clone(), coeff).is_some() {
                return Err(CalcError::InvalidSeries(format!(
                    "duplicate exponent tuple {exps:?}"
                )));
            }
        }
        Ok(Self {
            arity,
            radii,
            form: SeriesForm::Sparse(map),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn as_builtin(&self) -> Option<BuiltinFn> {
        match &self.form {
            SeriesForm::Builtin(b) => Some(*b),
            SeriesForm::Sparse(_) => None,
        }
    }

    /// Largest exponent tuple entries, for oracle power precomputation.
    fn max_exponents(&self, cap: u32) -> Vec<u32> {
        match &self.form {
            SeriesForm::Builtin(_) => vec![cap],
            SeriesForm::Sparse(map) => {
                let mut out = vec![0u32; self.arity];
                for exps in map.keys() {
                    if total_degree(exps) > cap {
                        continue;
                    }
                    for (o, &e) in out.iter_mut().zip(exps.iter()) {
                        *o = (*o).max(e);
                    }
                }
                out
            }
        }
    }

    fn check_radius(&self, l: usize, value: &Scalar) -> Result<(), CalcError> {
        let r = self.radii[l];
        if r.is_infinite() {
            return Ok(());
        }
        if value.abs() < r * (1.0 - RADIUS_MARGIN) {
            Ok(())
        } else {
            Err(CalcError::OutOfRadius {
                lambda: value.to_string(),
                radius: r,
            })
        }
    }

    /// Evaluate at a scalar point (closed form for builtins, full sparse sum
    /// otherwise).
    pub fn eval_scalar(&self, z: &[Scalar], opts: &SeriesEval) -> Result<Scalar, CalcError> {
        self.eval_partial(&vec![0; self.arity], z, opts)
    }

    /// Evaluate the mixed partial derivative of the given orders (not
    /// divided by any factorials). Builtins use their closed forms; sparse
    /// series differentiate by exact coefficient shift.
    pub fn eval_partial(
        &self,
        orders: &[u32],
        z: &[Scalar],
        opts: &SeriesEval,
    ) -> Result<Scalar, CalcError> {
        if z.len() != self.arity || orders.len() != self.arity {
            return Err(CalcError::ArityMismatch {
                expected: self.arity,
                got: z.len(),
            });
        }
        for (l, v) in z.iter().enumerate() {
            self.check_radius(l, v)?;
        }
        match &self.form {
            SeriesForm::Builtin(b) => b.derivative(orders[0] as usize, &z[0]),
            SeriesForm::Sparse(map) => {
                if map.len() > opts.max_terms {
                    return Err(CalcError::NonConvergent {
                        terms: opts.max_terms,
                    });
                }
                let mode = z[0].mode();
                if z.iter().any(|v| v.mode() != mode) {
                    return Err(CalcError::ExactUnsupported(
                        "arguments must share one scalar mode",
                    ));
                }
                let mut acc = Scalar::zero(mode);
                for (exps, coeff) in map {
                    if exps.iter().zip(orders).any(|(&e, &q)| e < q) {
                        continue;
                    }
                    let mut term = coerce_coeff(coeff, mode)?;
                    for l in 0..self.arity {
                        let (e, q) = (exps[l], orders[l]);
                        // Falling factorial e * (e-1) * ... * (e-q+1).
                        for t in 0..q {
                            term = &term * &Scalar::from_usize(mode, (e - t) as usize);
                        }
                        term = &term * &z[l].pow((e - q) as usize);
                    }
                    acc = &acc + &term;
                }
                Ok(acc)
            }
        }
    }

    /// Partial-sum evaluation of a univariate builtin: terms are added in
    /// ascending degree until one falls below
    /// `series_eps * (1 + |partial sum|)`, failing after `max_terms`.
    /// This is the library-independent Taylor route used to cross-check the
    /// closed forms.
    pub fn eval_taylor(&self, z: &Scalar, opts: &SeriesEval) -> Result<Scalar, CalcError> {
        let SeriesForm::Builtin(b) = &self.form else {
            return Err(CalcError::InvalidSeries(
                "taylor evaluation applies to builtins".into(),
            ));
        };
        self.check_radius(0, z)?;
        let Scalar::Float(v) = z else {
            return Err(CalcError::ExactUnsupported(
                "taylor partial sums take float arguments",
            ));
        };
        let mut sum = num_complex::Complex64::new(0.0, 0.0);
        let mut zpow = num_complex::Complex64::new(1.0, 0.0);
        let mut seen_nonzero = false;
        for n in 0..opts.max_terms {
            let c = b.coeff(n);
            let term = c * zpow;
            sum += term;
            // Structurally zero coefficients (sin/cos skip every other
            // degree) say nothing about convergence.
            if c != 0.0 {
                if seen_nonzero && term.norm() < opts.series_eps * (1.0 + sum.norm()) {
                    return Ok(Scalar::from_complex(sum));
                }
                seen_nonzero = true;
            }
            zpow *= v;
        }
        Err(CalcError::NonConvergent {
            terms: opts.max_terms,
        })
    }
}

fn total_degree(exps: &[u32]) -> u32 {
    exps.iter().sum()
}

fn coerce_coeff(coeff: &Scalar, mode: ScalarMode) -> Result<Scalar, CalcError> {
    match (coeff.mode(), mode) {
        (a, b) if a == b => Ok(coeff.clone()),
        (ScalarMode::Exact, ScalarMode::Float) => Ok(coeff.to_float_mode()),
        (ScalarMode::Float, ScalarMode::Exact) => Err(CalcError::ExactUnsupported(
            "float coefficients cannot feed exact arguments",
        )),
        _ => unreachable!(),
    }
}

/// Selection of kappa argument positions out of r, strictly increasing;
/// kappa runs from 1 to r - 1. These index the mixed term groups of the
/// r-variable expansion (the all-projector and all-nilpotent groups are the
/// two extremes outside any selector).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SubsetSelector {
    r: usize,
    indices: Vec<usize>,
}

impl SubsetSelector {
    pub fn new(r: usize, indices: Vec<usize>) -> Result<Self, CalcError> {
        if indices.is_empty() || indices.len() >= r {
            return Err(CalcError::InvalidSeries(format!(
                "selector must pick between 1 and r-1 = {} indices",
                r.saturating_sub(1)
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) || *indices.last().unwrap() >= r {
            return Err(CalcError::InvalidSeries(
                "selector indices must be strictly increasing within 0..r".into(),
            ));
        }
        Ok(Self { r, indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// All selectors for r arguments: kappa ascending, index sets in
    /// lexicographic order.
    pub fn enumerate(r: usize) -> Vec<SubsetSelector> {
        let mut out = Vec::new();
        for kappa in 1..r {
            let mut cur = Vec::new();
            subsets_of_size(r, kappa, 0, &mut cur, &mut |s| {
                out.push(SubsetSelector {
                    r,
                    indices: s.to_vec(),
                });
            });
        }
        out
    }
}

fn subsets_of_size(
    r: usize,
    k: usize,
    start: usize,
    cur: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if cur.len() == k {
        emit(cur);
        return;
    }
    for i in start..r {
        if r - i < k - cur.len() {
            break;
        }
        cur.push(i);
        subsets_of_size(r, k, i + 1, cur, emit);
        cur.pop();
    }
}

/// Per-block data for one argument of the expansion.
#[derive(Debug, Clone)]
pub(crate) struct BlockData {
    pub(crate) lambda: Scalar,
    pub(crate) size: usize,
    pub(crate) projector: MatrixC,
    /// npowers[q - 1] = N^q for q = 1..=size-1.
    pub(crate) npowers: Vec<MatrixC>,
}

impl BlockData {
    pub(crate) fn new(
        lambda: Scalar,
        size: usize,
        projector: MatrixC,
        nilpotent: &MatrixC,
    ) -> Result<Self, MatrixError> {
        let mut npowers = Vec::with_capacity(size.saturating_sub(1));
        let mut acc: Option<MatrixC> = None;
        for _ in 1..size {
            let next = match &acc {
                None => nilpotent.clone(),
                Some(prev) => prev.mat_mul(nilpotent)?,
            };
            npowers.push(next.clone());
            acc = Some(next);
        }
        Ok(Self {
            lambda,
            size,
            projector,
            npowers,
        })
    }

    fn factor(&self, q: u32) -> &MatrixC {
        if q == 0 {
            &self.projector
        } else {
            &self.npowers[(q - 1) as usize]
        }
    }
}

pub(crate) fn family_blocks(family: &SpectralFamily) -> Result<Vec<BlockData>, MatrixError> {
    family
        .items()
        .iter()
        .map(|it| {
            BlockData::new(
                it.eigenvalue.clone(),
                it.block_size,
                it.projector.clone(),
                &it.nilpotent,
            )
        })
        .collect()
}

/// One addend of the expansion, before matrix evaluation.
struct TermSpec {
    /// Which argument positions carry nilpotent powers (sorted).
    subset: Vec<usize>,
    /// Block index per argument.
    blocks: Vec<usize>,
    /// Derivative order per argument (0 off the subset).
    orders: Vec<u32>,
}

fn check_same_shape(args: &[Vec<BlockData>]) -> Result<(usize, ScalarMode), CalcError> {
    let first = args
        .first()
        .and_then(|a| a.first())
        .ok_or(CalcError::ArgumentShape)?;
    let dim = first.projector.rows();
    let mode = first.projector.mode();
    for arg in args {
        for b in arg {
            if b.projector.rows() != dim || b.projector.mode() != mode {
                return Err(CalcError::ArgumentShape);
            }
        }
    }
    Ok((dim, mode))
}

/// Evaluate every term group of the r-variable expansion, keyed by the
/// subset of argument positions carrying nilpotent factors. Summing all
/// groups gives f(X1,...,Xr).
pub(crate) fn term_groups_from_blocks(
    f: &SeriesFunction,
    args: &[Vec<BlockData>],
    opts: &SeriesEval,
    sequential: bool,
) -> Result<BTreeMap<Vec<usize>, MatrixC>, CalcError> {
    let r = args.len();
    if f.arity() != r {
        return Err(CalcError::ArityMismatch {
            expected: f.arity(),
            got: r,
        });
    }
    let (dim, mode) = check_same_shape(args)?;
    for (l, arg) in args.iter().enumerate() {
        for b in arg {
            f.check_radius(l, &b.lambda)?;
        }
    }

    // Subsets in canonical order: size ascending, then lexicographic.
    let mut subsets: Vec<Vec<usize>> = vec![Vec::new()];
    for kappa in 1..=r {
        subsets_of_size(r, kappa, 0, &mut Vec::new(), &mut |s| {
            subsets.push(s.to_vec());
        });
    }

    let mut terms: Vec<TermSpec> = Vec::new();
    for subset in &subsets {
        let mut blocks = vec![0usize; r];
        'tuples: loop {
            // Derivative orders run 1..=size-1 at the subset positions, so a
            // size-1 block kills every term of this subset; the empty subset
            // trivially passes and yields the single all-projector term.
            let ranges: Vec<usize> = subset
                .iter()
                .map(|&l| args[l][blocks[l]].size.saturating_sub(1))
                .collect();
            if ranges.iter().all(|&hi| hi >= 1) {
                let mut qs: Vec<u32> = vec![1; subset.len()];
                loop {
                    let mut orders = vec![0u32; r];
                    for (si, &l) in subset.iter().enumerate() {
                        orders[l] = qs[si];
                    }
                    terms.push(TermSpec {
                        subset: subset.clone(),
                        blocks: blocks.clone(),
                        orders,
                    });
                    // Advance the q tuple; empty when exhausted.
                    let mut si = subset.len();
                    loop {
                        if si == 0 {
                            break;
                        }
                        si -= 1;
                        if (qs[si] as usize) < ranges[si] {
                            qs[si] += 1;
                            for q in qs.iter_mut().skip(si + 1) {
                                *q = 1;
                            }
                            break;
                        }
                        if si == 0 {
                            qs.clear();
                            break;
                        }
                    }
                    if qs.is_empty() {
                        break;
                    }
                }
            }
            // Advance block tuple.
            let mut l = r;
            loop {
                if l == 0 {
                    break 'tuples;
                }
                l -= 1;
                if blocks[l] + 1 < args[l].len() {
                    blocks[l] += 1;
                    for b in blocks.iter_mut().skip(l + 1) {
                        *b = 0;
                    }
                    break;
                }
                if l == 0 {
                    break 'tuples;
                }
            }
        }
    }

    let eval_one = |spec: &TermSpec| -> Result<(Vec<usize>, MatrixC), CalcError> {
        let lambdas: Vec<Scalar> = (0..r)
            .map(|l| args[l][spec.blocks[l]].lambda.clone())
            .collect();
        let mut coeff = f.eval_partial(&spec.orders, &lambdas, opts)?;
        for &q in &spec.orders {
            if q > 1 {
                coeff = &coeff / &Scalar::factorial(coeff.mode(), q as usize);
            }
        }
        let mut acc: Option<MatrixC> = None;
        for l in 0..r {
            let factor = args[l][spec.blocks[l]].factor(spec.orders[l]);
            acc = Some(match acc {
                None => factor.clone(),
                Some(m) => m.mat_mul(factor)?,
            });
        }
        Ok((spec.subset.clone(), acc.unwrap().scale(&coeff)))
    };

    let results: Vec<Result<(Vec<usize>, MatrixC), CalcError>> = if sequential {
        exec::map_ordered_seq(terms, |t| eval_one(&t))
    } else {
        exec::map_ordered(terms, |t| eval_one(&t))
    };

    let mut groups: BTreeMap<Vec<usize>, MatrixC> = BTreeMap::new();
    for subset in subsets {
        groups.insert(subset, MatrixC::zeros(dim, dim, mode));
    }
    for res in results {
        let (subset, m) = res?;
        let slot = groups.get_mut(&subset).unwrap();
        *slot = slot.add(&m)?;
    }
    Ok(groups)
}

fn sum_groups(groups: BTreeMap<Vec<usize>, MatrixC>) -> Result<MatrixC, CalcError> {
    let mut acc: Option<MatrixC> = None;
    for (_, m) in groups {
        acc = Some(match acc {
            None => m,
            Some(a) => a.add(&m)?,
        });
    }
    Ok(acc.expect("at least the projector group exists"))
}

/// f(X) for a single matrix given its projector/nilpotent family:
/// f(lambda) P + sum over q of f^(q)(lambda)/q! N^q per block.
pub fn apply_single(
    f: &SeriesFunction,
    family: &SpectralFamily,
    opts: &SeriesEval,
) -> Result<MatrixC, CalcError> {
    apply_multi(f, std::slice::from_ref(family), opts)
}

pub fn apply_single_seq(
    f: &SeriesFunction,
    family: &SpectralFamily,
    opts: &SeriesEval,
) -> Result<MatrixC, CalcError> {
    apply_multi_seq(f, std::slice::from_ref(family), opts)
}

/// f(X1, X2): the four-term two-variable expansion.
pub fn apply_two(
    f: &SeriesFunction,
    fam1: &SpectralFamily,
    fam2: &SpectralFamily,
    opts: &SeriesEval,
) -> Result<MatrixC, CalcError> {
    apply_multi(f, &[fam1.clone(), fam2.clone()], opts)
}

pub fn apply_two_seq(
    f: &SeriesFunction,
    fam1: &SpectralFamily,
    fam2: &SpectralFamily,
    opts: &SeriesEval,
) -> Result<MatrixC, CalcError> {
    apply_multi_seq(f, &[fam1.clone(), fam2.clone()], opts)
}

/// The four groups of the two-variable formula: projector-projector,
/// projector-nilpotent, nilpotent-projector, nilpotent-nilpotent. Their sum
/// is `apply_two`.
pub fn apply_two_term_groups(
    f: &SeriesFunction,
    fam1: &SpectralFamily,
    fam2: &SpectralFamily,
    opts: &SeriesEval,
) -> Result<[MatrixC; 4], CalcError> {
    let args = vec![family_blocks(fam1)?, family_blocks(fam2)?];
    let mut groups = term_groups_from_blocks(f, &args, opts, false)?;
    let mut take = |key: &[usize]| groups.remove(key).expect("group exists");
    Ok([
        take(&[]),
        take(&[1]),
        take(&[0]),
        take(&[0, 1]),
    ])
}

/// f(X1,...,Xr) over all 2^r product patterns, factors ordered by argument
/// index.
pub fn apply_multi(
    f: &SeriesFunction,
    fams: &[SpectralFamily],
    opts: &SeriesEval,
) -> Result<MatrixC, CalcError> {
    let args = fams
        .iter()
        .map(family_blocks)
        .collect::<Result<Vec<_>, _>>()?;
    sum_groups(term_groups_from_blocks(f, &args, opts, false)?)
}

pub fn apply_multi_seq(
    f: &SeriesFunction,
    fams: &[SpectralFamily],
    opts: &SeriesEval,
) -> Result<MatrixC, CalcError> {
    let args = fams
        .iter()
        .map(family_blocks)
        .collect::<Result<Vec<_>, _>>()?;
    sum_groups(term_groups_from_blocks(f, &args, opts, true)?)
}

/// Term groups of the r-variable expansion keyed by nilpotent positions.
pub fn apply_multi_term_groups(
    f: &SeriesFunction,
    fams: &[SpectralFamily],
    opts: &SeriesEval,
) -> Result<BTreeMap<Vec<usize>, MatrixC>, CalcError> {
    let args = fams
        .iter()
        .map(family_blocks)
        .collect::<Result<Vec<_>, _>>()?;
    term_groups_from_blocks(f, &args, opts, false)
}

/// Truncated direct series: sum over exponent tuples of total degree at most
/// `max_degree` of a_l X1^l1 ... Xr^lr. Independent of the spectral mapping
/// path; the only shared input is the coefficient data itself.
pub fn series_oracle(
    f: &SeriesFunction,
    mats: &[MatrixC],
    max_degree: u32,
    opts: &SeriesEval,
) -> Result<MatrixC, CalcError> {
    series_oracle_impl(f, mats, max_degree, opts, false)
}

pub fn series_oracle_seq(
    f: &SeriesFunction,
    mats: &[MatrixC],
    max_degree: u32,
    opts: &SeriesEval,
) -> Result<MatrixC, CalcError> {
    series_oracle_impl(f, mats, max_degree, opts, true)
}

fn series_oracle_impl(
    f: &SeriesFunction,
    mats: &[MatrixC],
    max_degree: u32,
    opts: &SeriesEval,
    sequential: bool,
) -> Result<MatrixC, CalcError> {
    if f.arity() != mats.len() {
        return Err(CalcError::ArityMismatch {
            expected: f.arity(),
            got: mats.len(),
        });
    }
    let first = mats.first().ok_or(CalcError::ArgumentShape)?;
    let dim = first.rows();
    let mode = first.mode();
    if mats
        .iter()
        .any(|m| !m.is_square() || m.rows() != dim || m.mode() != mode)
    {
        return Err(CalcError::ArgumentShape);
    }

    // Coefficient entries of total degree <= max_degree.
    let entries: Vec<(Vec<u32>, Scalar)> = match &f.form {
        SeriesForm::Builtin(b) => {
            if mode == ScalarMode::Exact && !matches!(b, BuiltinFn::Geometric) {
                return Err(CalcError::ExactUnsupported(
                    "exp/sin/cos coefficients are evaluated in float mode",
                ));
            }
            (0..=max_degree)
                .map(|n| {
                    let c = b.coeff(n as usize);
                    let coeff = match mode {
                        ScalarMode::Float => Scalar::float(c, 0.0),
                        ScalarMode::Exact => geometric_exact_coeff(),
                    };
                    (vec![n], coeff)
                })
                .filter(|(_, c)| !c.is_zero())
                .collect()
        }
        SeriesForm::Sparse(map) => map
            .iter()
            .filter(|(exps, _)| total_degree(exps) <= max_degree)
            .map(|(exps, c)| Ok((exps.clone(), coerce_coeff(c, mode)?)))
            .collect::<Result<Vec<_>, CalcError>>()?,
    };
    if entries.len() > opts.max_terms {
        return Err(CalcError::NonConvergent {
            terms: opts.max_terms,
        });
    }

    // Precompute matrix powers per argument.
    let maxes = f.max_exponents(max_degree);
    let mut powers: Vec<Vec<MatrixC>> = Vec::with_capacity(mats.len());
    for (m, &hi) in mats.iter().zip(maxes.iter()) {
        let mut ps = vec![MatrixC::identity(dim, mode)];
        for _ in 0..hi {
            let next = ps.last().unwrap().mat_mul(m)?;
            ps.push(next);
        }
        powers.push(ps);
    }

    let eval_one = |entry: &(Vec<u32>, Scalar)| -> Result<MatrixC, CalcError> {
        let (exps, coeff) = entry;
        let mut acc: Option<MatrixC> = None;
        for (l, &e) in exps.iter().enumerate() {
            let p = &powers[l][e as usize];
            acc = Some(match acc {
                None => p.clone(),
                Some(m) => m.mat_mul(p)?,
            });
        }
        Ok(acc.unwrap().scale(coeff))
    };

    let results: Vec<Result<MatrixC, CalcError>> = if sequential {
        exec::map_ordered_seq(entries, |e| eval_one(&e))
    } else {
        exec::map_ordered(entries, |e| eval_one(&e))
    };
    let mut acc = MatrixC::zeros(dim, dim, mode);
    for r in results {
        acc = acc.add(&r?)?;
    }
    Ok(acc)
}

fn geometric_exact_coeff() -> Scalar {
    Scalar::exact_int(1, 0)
}
