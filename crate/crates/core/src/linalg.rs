//! Dense symmetric linear algebra used by the geometry and simulation code.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::{count, Scalar};

/// Eigendecomposition `A = V diag(values) Vᵀ` of a symmetric matrix,
/// eigenvalues sorted in descending order. Column `k` of `vectors` pairs with
/// `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Array1<T>,
    pub vectors: Array2<T>,
}

const MAX_QL_SWEEPS: usize = 64;

impl<T: Scalar> SymmetricEigen<T> {
    /// Householder reduction to tridiagonal form followed by the implicit QL
    /// algorithm. Only the lower triangle of `a` is read.
    pub fn new(a: ArrayView2<'_, T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::param("eigendecomposition needs a square matrix"));
        }
        if n == 0 {
            return Ok(Self {
                values: Array1::zeros(0),
                vectors: Array2::zeros((0, 0)),
            });
        }
        let mut v = Array2::<T>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                v[[i, j]] = a[[i, j]];
                v[[j, i]] = a[[i, j]];
            }
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("matrix has non-finite entries"));
        }
        let mut d = vec![T::zero(); n];
        let mut e = vec![T::zero(); n];
        tridiagonalize(&mut v, &mut d, &mut e);
        // Rotations in the QL step mix columns of V; keep them as rows.
        let mut vt = v.t().as_standard_layout().into_owned();
        ql_implicit(&mut vt, &mut d, &mut e)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap().then(i.cmp(&j)));
        let values = Array1::from_iter(order.iter().map(|&k| d[k]));
        let vectors = vt.select(Axis(0), &order).reversed_axes();
        Ok(Self {
            values,
            vectors: vectors.as_standard_layout().into_owned(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) Vᵀ` for an eigenvalue map `f`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Array2<T> {
        let scaled = &self.vectors * &self.values.mapv(f).insert_axis(Axis(0));
        scaled.dot(&self.vectors.t())
    }
}

fn tridiagonalize<T: Scalar>(v: &mut Array2<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    let zero = T::zero();
    for j in 0..n {
        d[j] = v[[n - 1, j]];
    }
    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for dk in d.iter().take(i) {
            scale = scale + dk.abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[[i - 1, j]];
                v[[i, j]] = zero;
                v[[j, i]] = zero;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }
            for j in 0..i {
                f = d[j];
                v[[j, i]] = f;
                g = e[j] + v[[j, j]] * f;
                for k in (j + 1)..i {
                    g = g + v[[k, j]] * d[k];
                    e[k] = e[k] + v[[k, j]] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[[k, j]] = v[[k, j]] - (f * e[k] + g * d[k]);
                }
                d[j] = v[[i - 1, j]];
                v[[i, j]] = zero;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[[n - 1, i]] = v[[i, i]];
        v[[i, i]] = T::one();
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = v[[k, i + 1]] / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g = g + v[[k, i + 1]] * v[[k, j]];
                }
                for k in 0..=i {
                    v[[k, j]] = v[[k, j]] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[[k, i + 1]] = zero;
        }
    }
    for j in 0..n {
        d[j] = v[[n - 1, j]];
        v[[n - 1, j]] = zero;
    }
    v[[n - 1, n - 1]] = T::one();
    e[0] = zero;
}

/// `vt` holds eigenvectors as rows.
fn ql_implicit<T: Scalar>(vt: &mut Array2<T>, d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    let zero = T::zero();
    let one = T::one();
    let two = one + one;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;

    let mut f = zero;
    let mut tst1 = zero;
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            return Err(Error::EigenFailure);
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::EigenFailure);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (mut lo, mut hi) = vt.multi_slice_mut((s![i, ..], s![i + 1, ..]));
                    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = zero;
    }
    Ok(())
}

/// Column means and the unbiased (`m - 1`) sample covariance, accumulated in
/// row blocks so no centered copy of the full matrix is materialized.
pub fn mean_and_covariance<T: Scalar>(x: ArrayView2<'_, T>) -> Result<(Array1<T>, Array2<T>)> {
    let (m, d) = x.dim();
    if m < 2 {
        return Err(Error::input("covariance needs at least 2 points"));
    }
    let mean = x
        .mean_axis(Axis(0))
        .ok_or_else(|| Error::input("empty matrix"))?;
    let mut cov = Array2::<T>::zeros((d, d));
    const BLOCK: usize = 4096;
    let mut start = 0;
    while start < m {
        let end = (start + BLOCK).min(m);
        let centered = &x.slice(s![start..end, ..]) - &mean.view().insert_axis(Axis(0));
        ndarray::linalg::general_mat_mul(T::one(), &centered.t(), &centered, T::one(), &mut cov);
        start = end;
    }
    cov.mapv_inplace(|v| v / count::<T>(m - 1));
    // Symmetrize away rounding asymmetry from the blocked product.
    for i in 0..d {
        for j in 0..i {
            let avg = (cov[[i, j]] + cov[[j, i]]) / T::of(2.0);
            cov[[i, j]] = avg;
            cov[[j, i]] = avg;
        }
    }
    Ok((mean, cov))
}

/// Lower-triangular `L` with `A = L Lᵀ`. Fails if `a` is not numerically
/// positive definite.
pub fn cholesky<T: Scalar>(a: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::param("cholesky needs a square matrix"));
    }
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag = diag - l[[j, k]] * l[[j, k]];
        }
        if !(diag > T::zero()) {
            return Err(Error::param(format!(
                "matrix is not positive definite (pivot {j} is {diag})"
            )));
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut v = a[[i, j]];
            for k in 0..j {
                v = v - l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = v / ljj;
        }
    }
    Ok(l)
}

/// Solves `L y = b` for lower-triangular `L`.
pub fn forward_substitute<T: Scalar>(l: ArrayView2<'_, T>, b: &mut [T]) {
    for i in 0..b.len() {
        let mut v = b[i];
        for k in 0..i {
            v = v - l[[i, k]] * b[k];
        }
        b[i] = v / l[[i, i]];
    }
}
