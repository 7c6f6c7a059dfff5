//! Householder QR that skips (and reports) columns lying in the span of the
//! columns before them.

use nalgebra::{DMatrix, DVector};

/// Relative residual norm below which a column counts as linearly dependent
/// on the preceding kept columns.
pub const ALIAS_TOLERANCE: f64 = 1e-10;

/// A column that is an exact linear combination of earlier kept columns.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasedColumn {
    pub column: usize,
    /// Earlier kept columns with a non-negligible coefficient in the
    /// combination. Empty for an all-zero column.
    pub depends_on: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct HouseholderQr {
    /// Upper triangle on kept columns holds R.
    factored: DMatrix<f64>,
    reflectors: Vec<(DVector<f64>, f64)>,
    kept: Vec<usize>,
    aliased: Vec<AliasedColumn>,
}

impl HouseholderQr {
    pub fn new(x: &DMatrix<f64>) -> Self {
        let (n, p) = x.shape();
        let mut a = x.clone();
        let mut reflectors = Vec::with_capacity(p.min(n));
        let mut kept: Vec<usize> = Vec::with_capacity(p);
        let mut aliased = Vec::new();

        for j in 0..p {
            let r = kept.len();
            let original = x.column(j).norm();
            let residual = if r < n {
                a.view((r, j), (n - r, 1)).norm()
            } else {
                0.0
            };
            if original == 0.0 || residual <= ALIAS_TOLERANCE * original {
                let coef = solve_upper(&a, &kept, a.view((0, j), (r, 1)).column(0).into_owned());
                let scale = original.max(f64::MIN_POSITIVE);
                let depends_on = kept
                    .iter()
                    .zip(coef.iter())
                    .filter(|&(&k, c)| (c * x.column(k).norm()).abs() > 1e-8 * scale)
                    .map(|(&k, _)| k)
                    .collect();
                aliased.push(AliasedColumn {
                    column: j,
                    depends_on,
                });
                continue;
            }

            let mut v: DVector<f64> = a.view((r, j), (n - r, 1)).column(0).into_owned();
            let alpha = if v[0] >= 0.0 { -residual } else { residual };
            v[0] -= alpha;
            let vtv = v.norm_squared();
            let tau = 2.0 / vtv;
            for k in j + 1..p {
                let mut col = a.view_mut((r, k), (n - r, 1));
                let s = tau * v.dot(&col.column(0));
                col.column_mut(0).axpy(-s, &v, 1.0);
            }
            a[(r, j)] = alpha;
            for i in r + 1..n {
                a[(i, j)] = 0.0;
            }
            reflectors.push((v, tau));
            kept.push(j);
        }

        HouseholderQr {
            factored: a,
            reflectors,
            kept,
            aliased,
        }
    }

    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn aliased(&self) -> &[AliasedColumn] {
        &self.aliased
    }

    /// `Qᵀ y`.
    pub fn qt_mul(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = y.clone();
        let n = out.len();
        for (r, (v, tau)) in self.reflectors.iter().enumerate() {
            let mut tail = out.rows_mut(r, n - r);
            let s = tau * v.dot(&tail);
            tail.axpy(-s, v, 1.0);
        }
        out
    }

    /// Least-squares coefficients for the kept columns, in kept order.
    pub fn solve(&self, y: &DVector<f64>) -> DVector<f64> {
        let qty = self.qt_mul(y);
        solve_upper(
            &self.factored,
            &self.kept,
            qty.rows(0, self.rank()).into_owned(),
        )
    }

    /// Inverse of the rank x rank triangular factor.
    pub fn r_inverse(&self) -> DMatrix<f64> {
        let k = self.rank();
        let mut inv = DMatrix::zeros(k, k);
        for c in 0..k {
            let mut e = DVector::zeros(k);
            e[c] = 1.0;
            inv.set_column(c, &solve_upper(&self.factored, &self.kept, e));
        }
        inv
    }
}

/// Back substitution on the triangle formed by rows `0..kept.len()` of the
/// kept columns.
fn solve_upper(a: &DMatrix<f64>, kept: &[usize], mut b: DVector<f64>) -> DVector<f64> {
    let k = kept.len();
    for i in (0..k).rev() {
        let mut s = b[i];
        for (jj, &col) in kept.iter().enumerate().skip(i + 1) {
            s -= a[(i, col)] * b[jj];
        }
        b[i] = s / a[(i, kept[i])];
    }
    b
}
