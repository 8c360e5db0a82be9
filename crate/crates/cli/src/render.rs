//! Human-readable output: matrices to four decimals, structure summaries.
//! Full precision goes through the JSON path instead.

use spectracalc::jordan::{JordanSpec, SpectralFamily};
use spectracalc::scalar::Scalar;
use spectracalc::MatrixC;

pub fn scalar(s: &Scalar) -> String {
    match s {
        Scalar::Exact(_) => s.to_string(),
        Scalar::Float(z) => {
            if z.im == 0.0 {
                format!("{:.4}", z.re)
            } else if z.im < 0.0 {
                format!("{:.4}-{:.4}i", z.re, -z.im)
            } else {
                format!("{:.4}+{:.4}i", z.re, z.im)
            }
        }
    }
}

pub fn matrix(m: &MatrixC) -> String {
    let cells: Vec<Vec<String>> = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| scalar(m.get(i, j))).collect())
        .collect();
    let width = cells
        .iter()
        .flatten()
        .map(String::len)
        .max()
        .unwrap_or(1);
    let mut out = String::new();
    for row in &cells {
        out.push_str("  [");
        for (j, c) in row.iter().enumerate() {
            if j > 0 {
                out.push_str("  ");
            }
            out.push_str(&format!("{c:>width$}"));
        }
        out.push_str("]\n");
    }
    out
}

pub fn spec_summary(spec: &JordanSpec) -> String {
    let mut out = format!("dimension {}\n", spec.dimension());
    for (k, g) in spec.groups().iter().enumerate() {
        out.push_str(&format!(
            "  group {}: eigenvalue {} (algebraic {}, geometric {}), blocks {:?}\n",
            k + 1,
            scalar(&g.eigenvalue),
            g.alpha_algebraic(),
            g.alpha_geometric(),
            g.block_sizes
        ));
    }
    out
}

pub fn family(family: &SpectralFamily) -> String {
    let mut out = String::new();
    for item in family.items() {
        out.push_str(&format!(
            "block (k={}, i={}) at eigenvalue {}, size {}\n",
            item.group + 1,
            item.block + 1,
            scalar(&item.eigenvalue),
            item.block_size
        ));
        out.push_str("P =\n");
        out.push_str(&matrix(&item.projector));
        out.push_str("N =\n");
        out.push_str(&matrix(&item.nilpotent));
    }
    out
}
