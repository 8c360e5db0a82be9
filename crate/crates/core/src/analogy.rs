//! Analogous matrices: same Jordan block structure per eigenvalue group,
//! eigenvalues scaled groupwise by nonzero ratios.
//!
//! Analogy is decided on [`JordanSpec`]s, never on raw matrices, so the
//! numerically fragile decomposition stays separate from the exact structural
//! comparison.

use thiserror::Error;

use crate::jordan::JordanSpec;
use crate::scalar::{Scalar, ScalarMode, Tolerance};

/// Canonical descriptor of an analogous family: the multiset of block-size
/// partitions, one per distinct eigenvalue, in sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogySignature {
    partitions: Vec<Vec<usize>>,
}

impl AnalogySignature {
    pub fn partitions(&self) -> &[Vec<usize>] {
        &self.partitions
    }

    /// Algebraic multiplicities, aligned with `partitions`.
    pub fn alphas(&self) -> Vec<usize> {
        self.partitions.iter().map(|p| p.iter().sum()).collect()
    }
}

/// Block-size partitions per distinct eigenvalue, canonically ordered.
pub fn signature_of(spec: &JordanSpec) -> AnalogySignature {
    let mut partitions: Vec<Vec<usize>> = spec
        .groups()
        .iter()
        .map(|g| g.block_sizes.clone())
        .collect();
    partitions.sort();
    AnalogySignature { partitions }
}

/// Per-group eigenvalue ratios c_k with y = c_k * x, in the x spec's group
/// order, along with the matched y group for each x group.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioProfile {
    pub ratios: Vec<Scalar>,
    pub pairing: Vec<usize>,
}

impl RatioProfile {
    /// The single common ratio when all groups share one, or `None`.
    pub fn constant_ratio(&self) -> Option<&Scalar> {
        let first = self.ratios.first()?;
        let all_same = self.ratios.iter().all(|c| match (c, first) {
            (Scalar::Exact(_), Scalar::Exact(_)) => c == first,
            _ => c.dist(first) <= 1e-9 * first.abs().max(1.0),
        });
        all_same.then_some(first)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum NotAnalogous {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("number of distinct eigenvalues differs: {0} vs {1}")]
    GroupCount(usize, usize),
    #[error("block partitions differ")]
    Partitions,
    #[error("a zero eigenvalue pairs with a nonzero one (no finite nonzero ratio)")]
    ZeroEigenvaluePairing,
}

/// Decide analogy and recover the ratio vector.
///
/// The matching must be a bijection between eigenvalue groups preserving the
/// block partitions. Groups sharing an identical partition are matched by
/// backtracking in canonical (eigenvalue-lexicographic) order; the zero
/// eigenvalue, when present, must pair with the other matrix's zero
/// eigenvalue. Zero testing is exact, so float specs must carry exact 0.0
/// eigenvalues to count as having a zero group.
pub fn check_analogous(
    x_spec: &JordanSpec,
    y_spec: &JordanSpec,
) -> Result<RatioProfile, NotAnalogous> {
    if x_spec.dimension() != y_spec.dimension() {
        return Err(NotAnalogous::Dimension(
            x_spec.dimension(),
            y_spec.dimension(),
        ));
    }
    if x_spec.groups().len() != y_spec.groups().len() {
        return Err(NotAnalogous::GroupCount(
            x_spec.groups().len(),
            y_spec.groups().len(),
        ));
    }
    if signature_of(x_spec) != signature_of(y_spec) {
        return Err(NotAnalogous::Partitions);
    }

    // Group indices by partition, each side ordered by eigenvalue.
    let mut classes: std::collections::BTreeMap<Vec<usize>, (Vec<usize>, Vec<usize>)> =
        Default::default();
    for (i, g) in x_spec.groups().iter().enumerate() {
        classes.entry(g.block_sizes.clone()).or_default().0.push(i);
    }
    for (i, g) in y_spec.groups().iter().enumerate() {
        classes.entry(g.block_sizes.clone()).or_default().1.push(i);
    }
    let mut pairing = vec![usize::MAX; x_spec.groups().len()];
    for (xs, ys) in classes.values_mut() {
        debug_assert_eq!(xs.len(), ys.len());
        sort_by_eigenvalue(xs, x_spec);
        sort_by_eigenvalue(ys, y_spec);
        if !match_class(xs, ys, x_spec, y_spec, &mut pairing) {
            return Err(NotAnalogous::ZeroEigenvaluePairing);
        }
    }

    let ratios = pairing
        .iter()
        .enumerate()
        .map(|(xi, &yi)| {
            let ex = &x_spec.groups()[xi].eigenvalue;
            let ey = &y_spec.groups()[yi].eigenvalue;
            if ex.is_zero() {
                // 0 maps to 0 under any ratio; pick 1.
                Scalar::one(ex.mode())
            } else {
                ey / ex
            }
        })
        .collect();
    Ok(RatioProfile { ratios, pairing })
}

fn sort_by_eigenvalue(indices: &mut [usize], spec: &JordanSpec) {
    indices.sort_by(|&a, &b| {
        spec.groups()[a]
            .eigenvalue
            .lex_key()
            .partial_cmp(&spec.groups()[b].eigenvalue.lex_key())
            .unwrap()
    });
}

/// Backtracking bijection within one partition class. Any pairing works
/// unless a zero eigenvalue meets a nonzero one.
fn match_class(
    xs: &[usize],
    ys: &[usize],
    x_spec: &JordanSpec,
    y_spec: &JordanSpec,
    pairing: &mut [usize],
) -> bool {
    fn rec(
        pos: usize,
        xs: &[usize],
        ys: &[usize],
        used: &mut Vec<bool>,
        x_spec: &JordanSpec,
        y_spec: &JordanSpec,
        pairing: &mut [usize],
    ) -> bool {
        if pos == xs.len() {
            return true;
        }
        let xz = x_spec.groups()[xs[pos]].eigenvalue.is_zero();
        for (yi, &y) in ys.iter().enumerate() {
            if used[yi] {
                continue;
            }
            let yz = y_spec.groups()[y].eigenvalue.is_zero();
            if xz != yz {
                continue;
            }
            used[yi] = true;
            pairing[xs[pos]] = y;
            if rec(pos + 1, xs, ys, used, x_spec, y_spec, pairing) {
                return true;
            }
            used[yi] = false;
        }
        false
    }
    let mut used = vec![false; ys.len()];
    rec(0, xs, ys, &mut used, x_spec, y_spec, pairing)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropName {
    /// Analogous matrices have the same rank.
    RankEquality,
    /// Same-transform analogous matrices commute.
    SameTransformCommute,
    /// det(Y) = det(X) * prod c_k^(alpha_k).
    DeterminantRatio,
    /// trace(Y) = c * trace(X) for constant ratio c.
    TraceScaling,
    /// Characteristic-polynomial roots scale by the constant ratio c.
    CharPolyScaling,
}

impl std::fmt::Display for PropName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PropName::RankEquality => "rank equality",
            PropName::SameTransformCommute => "same-transform commutation",
            PropName::DeterminantRatio => "determinant ratio",
            PropName::TraceScaling => "trace scaling",
            PropName::CharPolyScaling => "characteristic-polynomial root scaling",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropOutcome {
    Pass,
    Fail(String),
    NotApplicable(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropCheck {
    pub name: PropName,
    pub outcome: PropOutcome,
}

#[derive(Debug, Clone, Default)]
pub struct PropsReport {
    pub checks: Vec<PropCheck>,
}

impl PropsReport {
    pub fn all_passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.outcome, PropOutcome::Fail(_)))
    }
}

impl std::fmt::Display for PropsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            match &c.outcome {
                PropOutcome::Pass => writeln!(f, "{}: pass", c.name)?,
                PropOutcome::Fail(why) => writeln!(f, "{}: FAIL ({why})", c.name)?,
                PropOutcome::NotApplicable(why) => {
                    writeln!(f, "{}: not applicable ({why})", c.name)?
                }
            }
        }
        Ok(())
    }
}

/// Relative tolerance for determinant and trace relations.
const LINEAR_REL_EPS: f64 = 1e-10;
/// Relative tolerance for float characteristic-polynomial coefficients.
const CHARPOLY_REL_EPS: f64 = 1e-6;

/// Verify the structural propositions on a pair already accepted by
/// [`check_analogous`] with the given profile.
///
/// Determinants, traces, and characteristic polynomials are computed from the
/// assembled matrices (elimination and Faddeev-LeVerrier), so each relation
/// is checked against matrix arithmetic rather than read off the specs.
pub fn verify_props(
    x_spec: &JordanSpec,
    y_spec: &JordanSpec,
    profile: &RatioProfile,
    tol: &Tolerance,
) -> Result<PropsReport, crate::jordan::DecomposeError> {
    let mut report = PropsReport::default();
    let x = x_spec.assemble(tol)?;
    let y = y_spec.assemble(tol)?;
    let exact = x.mode() == ScalarMode::Exact;

    let rx = x.rank_with_tol(tol);
    let ry = y.rank_with_tol(tol);
    report.checks.push(PropCheck {
        name: PropName::RankEquality,
        outcome: if rx == ry {
            PropOutcome::Pass
        } else {
            PropOutcome::Fail(format!("rank {rx} vs {ry}"))
        },
    });

    let same_transform = x_spec
        .transform()
        .sub(y_spec.transform())
        .map(|d| d.is_zero_to(tol.recon_eps))
        .unwrap_or(false);
    report.checks.push(PropCheck {
        name: PropName::SameTransformCommute,
        outcome: if !same_transform {
            PropOutcome::NotApplicable("transforms differ")
        } else {
            let xy = x.mat_mul(&y)?;
            let yx = y.mat_mul(&x)?;
            let r = xy.sub(&yx)?.max_abs();
            if r <= if exact { 0.0 } else { tol.recon_eps } {
                PropOutcome::Pass
            } else {
                PropOutcome::Fail(format!("|XY - YX| = {r:.3e}"))
            }
        },
    });

    let det_x = x.determinant()?;
    let det_y = y.determinant()?;
    let mut ratio_power = Scalar::one(det_x.mode());
    for (xi, c) in profile.ratios.iter().enumerate() {
        ratio_power = &ratio_power * &c.pow(x_spec.groups()[xi].alpha_algebraic());
    }
    let expected = &det_x * &ratio_power;
    let scale = det_y.abs().max(expected.abs()).max(1.0);
    let det_ok = if exact {
        det_y == expected
    } else {
        det_y.dist(&expected) <= LINEAR_REL_EPS * scale
    };
    report.checks.push(PropCheck {
        name: PropName::DeterminantRatio,
        outcome: if det_ok {
            PropOutcome::Pass
        } else {
            PropOutcome::Fail(format!(
                "det(Y) = {det_y} but det(X) * prod(c^alpha) = {expected}"
            ))
        },
    });

    match profile.constant_ratio() {
        None => {
            report.checks.push(PropCheck {
                name: PropName::TraceScaling,
                outcome: PropOutcome::NotApplicable("ratios are not constant"),
            });
            report.checks.push(PropCheck {
                name: PropName::CharPolyScaling,
                outcome: PropOutcome::NotApplicable("ratios are not constant"),
            });
        }
        Some(c) => {
            let tr_x = x.trace()?;
            let tr_y = y.trace()?;
            let expected = c * &tr_x;
            let scale = tr_y.abs().max(expected.abs()).max(1.0);
            let ok = if exact {
                tr_y == expected
            } else {
                tr_y.dist(&expected) <= LINEAR_REL_EPS * scale
            };
            report.checks.push(PropCheck {
                name: PropName::TraceScaling,
                outcome: if ok {
                    PropOutcome::Pass
                } else {
                    PropOutcome::Fail(format!("trace(Y) = {tr_y}, c * trace(X) = {expected}"))
                },
            });

            // Roots of CP_Y are c times roots of CP_X iff the coefficients
            // satisfy b_j(Y) = c^(m-j) b_j(X).
            let m = x.rows();
            let cp_x = x.char_poly()?;
            let cp_y = y.char_poly()?;
            let mut ok = true;
            let mut detail = String::new();
            for j in 0..=m {
                let expected = &c.pow(m - j) * &cp_x[j];
                let good = if exact {
                    cp_y[j] == expected
                } else {
                    let scale = cp_y[j].abs().max(expected.abs()).max(1.0);
                    cp_y[j].dist(&expected) <= CHARPOLY_REL_EPS * scale
                };
                if !good {
                    ok = false;
                    detail = format!("coefficient of x^{j}: {} vs expected {expected}", cp_y[j]);
                    break;
                }
            }
            report.checks.push(PropCheck {
                name: PropName::CharPolyScaling,
                outcome: if ok {
                    PropOutcome::Pass
                } else {
                    PropOutcome::Fail(detail)
                },
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jordan::EigenGroup;
    use crate::matrix::MatrixC;
    use crate::sample;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn spec(mode: ScalarMode, groups: Vec<(Scalar, Vec<usize>)>) -> JordanSpec {
        let dim: usize = groups.iter().map(|(_, s)| s.iter().sum::<usize>()).sum();
        JordanSpec::new(
            MatrixC::identity(dim, mode),
            groups
                .into_iter()
                .map(|(ev, sizes)| EigenGroup::new(ev, sizes))
                .collect(),
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn signature_examples() {
        let s = spec(
            ScalarMode::Exact,
            vec![
                (Scalar::exact_int(1, 0), vec![1]),
                (Scalar::exact_int(2, 0), vec![1]),
                (Scalar::exact_int(3, 0), vec![1]),
            ],
        );
        assert_eq!(signature_of(&s).partitions(), &[vec![1], vec![1], vec![1]]);

        let s = sample::showcase_4x4(ScalarMode::Exact);
        assert_eq!(signature_of(&s).partitions(), &[vec![1], vec![1], vec![2]]);

        let s = spec(ScalarMode::Exact, vec![(Scalar::exact_int(0, 0), vec![3, 1])]);
        assert_eq!(signature_of(&s).partitions(), &[vec![3, 1]]);
    }

    #[test]
    fn reflexive_ratios_are_one() {
        let s = sample::showcase_4x4(ScalarMode::Exact);
        let profile = check_analogous(&s, &s).unwrap();
        assert!(profile.ratios.iter().all(|c| c == &Scalar::exact_int(1, 0)));
        assert_eq!(profile.constant_ratio(), Some(&Scalar::exact_int(1, 0)));
    }

    #[test]
    fn ratio_recovery() {
        let x = spec(
            ScalarMode::Exact,
            vec![
                (Scalar::exact_int(2, 0), vec![1]),
                (Scalar::exact_int(3, 0), vec![1]),
                (Scalar::exact_int(5, 0), vec![2]),
            ],
        );
        let y = spec(
            ScalarMode::Exact,
            vec![
                (Scalar::exact_int(2, 0), vec![1]),
                (Scalar::exact_int(3, 0), vec![1]),
                (Scalar::exact_int(10, 0), vec![2]),
            ],
        );
        let profile = check_analogous(&x, &y).unwrap();
        assert_eq!(
            profile.ratios,
            vec![
                Scalar::exact_int(1, 0),
                Scalar::exact_int(1, 0),
                Scalar::exact_int(2, 0)
            ]
        );
    }

    #[test]
    fn different_partitions_are_rejected() {
        let x = spec(ScalarMode::Exact, vec![(Scalar::exact_int(1, 0), vec![2])]);
        let y = spec(
            ScalarMode::Exact,
            vec![(Scalar::exact_int(1, 0), vec![1, 1])],
        );
        assert_eq!(check_analogous(&x, &y), Err(NotAnalogous::Partitions));
    }

    #[test]
    fn zero_pairs_only_with_zero() {
        let x = spec(
            ScalarMode::Exact,
            vec![
                (Scalar::exact_int(0, 0), vec![1]),
                (Scalar::exact_int(2, 0), vec![1]),
            ],
        );
        let y = spec(
            ScalarMode::Exact,
            vec![
                (Scalar::exact_int(3, 0), vec![1]),
                (Scalar::exact_int(4, 0), vec![1]),
            ],
        );
        assert_eq!(
            check_analogous(&x, &y),
            Err(NotAnalogous::ZeroEigenvaluePairing)
        );
        let y_ok = spec(
            ScalarMode::Exact,
            vec![
                (Scalar::exact_int(0, 0), vec![1]),
                (Scalar::exact_int(4, 0), vec![1]),
            ],
        );
        let profile = check_analogous(&x, &y_ok).unwrap();
        assert_eq!(profile.ratios[0], Scalar::exact_int(1, 0));
        assert_eq!(profile.ratios[1], Scalar::exact_int(2, 0));
    }

    #[test]
    fn similar_matrices_are_analogous_with_unit_ratios() {
        // Conjugating by any invertible transform keeps the same groups:
        // the special case of analogy with every ratio 1.
        for seed in 0..10u64 {
            let x = sample::random_spec(seed, 6, 3, ScalarMode::Exact);
            let conjugator = sample::seeded_exact_transform(x.dimension(), seed + 77);
            let y = JordanSpec::new(
                conjugator.mat_mul(x.transform()).unwrap(),
                x.groups().to_vec(),
                &tol(),
            )
            .unwrap();
            let profile = check_analogous(&x, &y).unwrap();
            assert!(profile.ratios.iter().all(|c| c == &Scalar::exact_int(1, 0)));
        }
    }

    #[test]
    fn symmetry_inverts_ratios() {
        let x = sample::random_spec(11, 6, 3, ScalarMode::Exact);
        let scaled_groups: Vec<EigenGroup> = x
            .groups()
            .iter()
            .map(|g| {
                EigenGroup::new(
                    &g.eigenvalue * &Scalar::exact_int(3, 0),
                    g.block_sizes.clone(),
                )
            })
            .collect();
        let y = JordanSpec::new(x.transform().clone(), scaled_groups, &tol()).unwrap();
        let forward = check_analogous(&x, &y).unwrap();
        let backward = check_analogous(&y, &x).unwrap();
        for (cf, cb) in forward.ratios.iter().zip(backward.ratios.iter()) {
            assert_eq!(cf * cb, Scalar::exact_int(1, 0));
        }
    }

    #[test]
    fn showcase_det_ratio() {
        // det(X) = 150; ratios (1,1,2) give det(Y) = 600 = 150 * 2^2.
        let x = sample::showcase_4x4(ScalarMode::Exact);
        let y = JordanSpec::new(
            x.transform().clone(),
            vec![
                EigenGroup::new(Scalar::exact_int(2, 0), vec![1]),
                EigenGroup::new(Scalar::exact_int(3, 0), vec![1]),
                EigenGroup::new(Scalar::exact_int(10, 0), vec![2]),
            ],
            &tol(),
        )
        .unwrap();
        let profile = check_analogous(&x, &y).unwrap();
        let report = verify_props(&x, &y, &profile, &tol()).unwrap();
        assert!(report.all_passed(), "{report}");
        let det_y = y.assemble(&tol()).unwrap().determinant().unwrap();
        assert_eq!(det_y, Scalar::exact_int(600, 0));
    }

    #[test]
    fn constant_ratio_trace_scaling() {
        let x = spec(
            ScalarMode::Exact,
            vec![
                (Scalar::exact_int(1, 0), vec![1]),
                (Scalar::exact_int(2, 0), vec![1]),
            ],
        );
        let y = spec(
            ScalarMode::Exact,
            vec![
                (Scalar::exact_int(2, 0), vec![1]),
                (Scalar::exact_int(4, 0), vec![1]),
            ],
        );
        let profile = check_analogous(&x, &y).unwrap();
        let report = verify_props(&x, &y, &profile, &tol()).unwrap();
        assert!(report.all_passed(), "{report}");
        let tr_y = y.assemble(&tol()).unwrap().trace().unwrap();
        assert_eq!(tr_y, Scalar::exact_int(6, 0));
    }
}
