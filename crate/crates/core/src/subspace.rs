//! SVD-based subspace tools: signal/null split, MUSIC pseudo-spectra, peak
//! picking and MDL model-order selection.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Pseudo-spectrum values are capped here when a candidate lies exactly in
/// the signal subspace.
pub const SPECTRUM_CAP: f64 = 1e12;

/// Thin SVD `A = U diag(E) V^H` with singular values sorted nonincreasing and
/// a chosen signal rank.
#[derive(Debug, Clone)]
pub struct SubspaceDecomposition {
    /// `rows x k`, `k = min(rows, cols)`.
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    /// `cols x k`.
    pub v: CMatrix,
    pub signal_rank: usize,
}

pub fn svd_left(matrix: &CMatrix) -> Result<SubspaceDecomposition> {
    if matrix
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::NonFinite);
    }
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    let svd = matrix.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^H");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let u = CMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v = CMatrix::from_fn(v_t.ncols(), order.len(), |r, c| v_t[(order[c], r)].conj());
    let singular_values: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    let signal_rank = singular_values.iter().filter(|&&s| s > 0.0).count();
    Ok(SubspaceDecomposition {
        u,
        singular_values,
        v,
        signal_rank,
    })
}

impl SubspaceDecomposition {
    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn with_rank(mut self, rank: usize) -> Result<Self> {
        if rank > self.singular_values.len() {
            return Err(Error::Shape(format!(
                "signal rank {rank} exceeds {} singular values",
                self.singular_values.len()
            )));
        }
        self.signal_rank = rank;
        Ok(self)
    }

    /// Leading `signal_rank` left singular vectors.
    pub fn signal_space(&self) -> CMatrix {
        self.u.columns(0, self.signal_rank).into_owned()
    }

    /// Orthonormal basis of the complement of the signal space.
    pub fn null_space(&self) -> Result<CMatrix> {
        let rows = self.rows();
        if self.signal_rank >= rows {
            return Err(Error::EmptyNullSpace {
                rank: self.signal_rank,
                rows,
            });
        }
        if self.u.ncols() == rows {
            return Ok(self
                .u
                .columns(self.signal_rank, rows - self.signal_rank)
                .into_owned());
        }
        // Complete the thin basis: left singular vectors of the projector
        // onto the complement.
        let us = self.signal_space();
        let proj = CMatrix::identity(rows, rows) - &us * us.adjoint();
        let full = svd_left(&proj)?;
        Ok(full.u.columns(0, rows - self.signal_rank).into_owned())
    }

    pub fn projector(&self) -> Projector {
        Projector {
            signal: self.signal_space(),
        }
    }
}

/// Evaluates `||B^H Ubar||_F^2` as `||B||^2 - ||U_s^H B||^2` without forming
/// the null space.
#[derive(Debug, Clone)]
pub struct Projector {
    pub signal: CMatrix,
}

impl Projector {
    pub fn dim(&self) -> usize {
        self.signal.nrows()
    }

    /// Null-spectrum `F` summed over the columns of `basis`.
    pub fn null_norm(&self, basis: &[Vec<Complex64>]) -> f64 {
        let mut total = 0.0;
        for b in basis {
            let mut energy: f64 = b.iter().map(|v| v.norm_sqr()).sum();
            for c in 0..self.signal.ncols() {
                let col = self.signal.column(c);
                let dot: Complex64 = col.iter().zip(b).map(|(u, x)| u.conj() * x).sum();
                energy -= dot.norm_sqr();
            }
            total += energy;
        }
        total.max(0.0)
    }

    pub fn value(&self, basis: &[Vec<Complex64>]) -> f64 {
        spectrum_value(self.null_norm(basis))
    }
}

fn spectrum_value(null_norm: f64) -> f64 {
    if null_norm <= 1.0 / SPECTRUM_CAP {
        SPECTRUM_CAP
    } else {
        1.0 / null_norm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSpectrum {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// `1 / ||basis(c)^H Ubar||_F^2` over the candidate grid, capped at
/// [`SPECTRUM_CAP`].
pub fn pseudo_spectrum(
    null_space: &CMatrix,
    basis_fn: impl Fn(f64) -> Vec<Vec<Complex64>>,
    candidates: &[f64],
) -> Result<PseudoSpectrum> {
    if null_space.ncols() == 0 {
        return Err(Error::EmptyNullSpace {
            rank: null_space.nrows(),
            rows: null_space.nrows(),
        });
    }
    let mut values = Vec::with_capacity(candidates.len());
    for &c in candidates {
        let basis = basis_fn(c);
        let mut norm = 0.0;
        for b in &basis {
            if b.len() != null_space.nrows() {
                return Err(Error::Shape(format!(
                    "basis length {} vs null space rows {}",
                    b.len(),
                    null_space.nrows()
                )));
            }
            for col in null_space.column_iter() {
                let dot: Complex64 = col.iter().zip(b).map(|(u, x)| u.conj() * x).sum();
                norm += dot.norm_sqr();
            }
        }
        values.push(spectrum_value(norm));
    }
    Ok(PseudoSpectrum {
        grid: candidates.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Peaks {
    /// Chosen indices, strongest first.
    pub indices: Vec<usize>,
    /// False when fewer than the requested count were available.
    pub complete: bool,
}

fn is_local_max(values: &[f64], i: usize, wrap: bool) -> bool {
    let n = values.len();
    let prev = if i > 0 {
        Some(values[i - 1])
    } else if wrap && n > 1 {
        Some(values[n - 1])
    } else {
        None
    };
    let next = if i + 1 < n {
        Some(values[i + 1])
    } else if wrap && n > 1 {
        Some(values[0])
    } else {
        None
    };
    prev.is_none_or(|p| values[i] > p) && next.is_none_or(|q| values[i] >= q)
}

fn bin_distance(a: usize, b: usize, n: usize, wrap: bool) -> usize {
    let d = a.abs_diff(b);
    if wrap {
        d.min(n - d)
    } else {
        d
    }
}

/// Greedy peak picking: local maxima by decreasing value (ties to the lower
/// index), each at least `min_separation` bins from those already chosen.
pub fn pick_peaks(values: &[f64], k: usize, min_separation: usize) -> Peaks {
    pick_peaks_with(values, k, min_separation, false)
}

/// As [`pick_peaks`]; with `wrap` the grid is treated as circular.
pub fn pick_peaks_with(values: &[f64], k: usize, min_separation: usize, wrap: bool) -> Peaks {
    let n = values.len();
    let mut maxima: Vec<usize> = (0..n).filter(|&i| is_local_max(values, i, wrap)).collect();
    maxima.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut indices = Vec::with_capacity(k);
    for i in maxima {
        if indices.len() == k {
            break;
        }
        if indices
            .iter()
            .all(|&j| bin_distance(i, j, n, wrap) >= min_separation)
        {
            indices.push(i);
        }
    }
    Peaks {
        complete: indices.len() == k,
        indices,
    }
}

/// Classical Wax-Kailath MDL on the squared singular values, clamped to
/// `[1, len - 1]`.
pub fn estimate_model_order(singular_values: &[f64], num_snapshots: usize) -> usize {
    let p = singular_values.len();
    if p < 2 {
        return 1.min(p);
    }
    let mut lambda: Vec<f64> = singular_values.iter().map(|s| s * s).collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    let floor = lambda[0].max(f64::MIN_POSITIVE) * 1e-300;
    let lambda: Vec<f64> = lambda.into_iter().map(|l| l.max(floor)).collect();
    let n = num_snapshots.max(1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..p {
        let tail = &lambda[k..];
        let m = tail.len() as f64;
        let log_geo = tail.iter().map(|l| l.ln()).sum::<f64>() / m;
        let arith = tail.iter().sum::<f64>() / m;
        let fit = -n * m * (log_geo - arith.ln());
        let penalty = 0.5 * k as f64 * (2 * p - k) as f64 * n.ln();
        let mdl = fit + penalty;
        if mdl < best.1 {
            best = (k, mdl);
        }
    }
    best.0.clamp(1, p - 1)
}

/// Golden-section minimisation of `f` on `[lo, hi]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iterations: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iterations {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let d = svd_left(&CMatrix::identity(3, 3)).unwrap();
        for s in &d.singular_values {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_one_outer_product() {
        let u = nalgebra::DVector::from_vec(vec![c(1.0, 1.0), c(0.0, 2.0), c(-1.0, 0.5)]);
        let v = nalgebra::DVector::from_vec(vec![c(0.5, 0.0), c(1.0, -1.0)]);
        let m = &u * v.adjoint();
        let d = svd_left(&m).unwrap();
        assert!((d.singular_values[0] - u.norm() * v.norm()).abs() < 1e-12);
        assert!(d.singular_values[1] < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(svd_left(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn tall_matrix_null_space_is_completed() {
        let m = CMatrix::from_fn(5, 2, |r, col| c((r + col) as f64, (r * col) as f64 - 1.0));
        let d = svd_left(&m).unwrap().with_rank(2).unwrap();
        let null = d.null_space().unwrap();
        assert_eq!(null.shape(), (5, 3));
        let cross = d.signal_space().adjoint() * &null;
        assert!(cross.norm() < 1e-12);
        let gram = null.adjoint() * &null;
        assert!((gram - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn full_rank_has_no_null_space() {
        let d = svd_left(&CMatrix::identity(3, 3)).unwrap();
        assert!(matches!(d.null_space(), Err(Error::EmptyNullSpace { .. })));
        assert!(pseudo_spectrum(
            &CMatrix::zeros(3, 0),
            |_| vec![vec![c(1.0, 0.0); 3]],
            &[0.0]
        )
        .is_err());
    }

    #[test]
    fn spectrum_caps_exact_null() {
        // Null space spanned by (1, -1)/sqrt(2); the constant basis is orthogonal.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let null = CMatrix::from_column_slice(2, 1, &[c(h, 0.0), c(-h, 0.0)]);
        let sp = pseudo_spectrum(&null, |_| vec![vec![c(1.0, 0.0), c(1.0, 0.0)]], &[0.0]).unwrap();
        assert_eq!(sp.values, vec![SPECTRUM_CAP]);
        let bad = pseudo_spectrum(&null, |_| vec![vec![c(1.0, 0.0)]], &[0.0]);
        assert!(matches!(bad, Err(Error::Shape(_))));
    }

    #[test]
    fn projector_matches_explicit_null_space() {
        let m = CMatrix::from_fn(6, 4, |r, col| {
            Complex64::cis((r * col) as f64 * 0.7 + r as f64)
        });
        let d = svd_left(&m).unwrap().with_rank(2).unwrap();
        let null = d.null_space().unwrap();
        let basis = |x: f64| {
            vec![(0..6)
                .map(|i| Complex64::cis(x * i as f64))
                .collect::<Vec<_>>()]
        };
        let sp = pseudo_spectrum(&null, basis, &[0.1, 0.9, 2.0]).unwrap();
        let pr = d.projector();
        for (x, v) in sp.grid.iter().zip(&sp.values) {
            assert!((pr.value(&basis(*x)) / v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn peak_rules() {
        assert_eq!(pick_peaks(&[0.0, 3.0, 1.0], 1, 1).indices, vec![1]);
        let tie = pick_peaks(&[0.0, 2.0, 0.0, 2.0, 0.0], 1, 1);
        assert_eq!(tie.indices, vec![1]);
        let short = pick_peaks(&[0.0, 2.0, 0.0], 3, 1);
        assert!(!short.complete);
        assert_eq!(short.indices, vec![1]);
        // Separation suppresses the near neighbour.
        let sep = pick_peaks(&[0.0, 5.0, 0.0, 4.0, 0.0, 0.0, 3.0, 0.0], 2, 3);
        assert_eq!(sep.indices, vec![1, 6]);
        // Circular grid: the end sample can be a peak next to the start.
        let wrapped = pick_peaks_with(&[4.0, 1.0, 0.0, 1.0, 5.0], 1, 1, true);
        assert_eq!(wrapped.indices, vec![4]);
    }

    #[test]
    fn mdl_cases() {
        assert_eq!(
            estimate_model_order(&[10.0, 10.0, 10.0, 1e-12, 1e-12], 100),
            3
        );
        assert_eq!(estimate_model_order(&[2.0; 5], 100), 1);
        assert_eq!(estimate_model_order(&[5.0, 4.0, 0.0, 0.0], 50), 2);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_min(|x| (x - 0.3) * (x - 0.3), -1.0, 1.0, 80);
        assert!((x - 0.3).abs() < 1e-9);
    }
}
