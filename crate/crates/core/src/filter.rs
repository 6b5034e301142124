//! Digital Butterworth high-pass sections and zero-phase filtering of complex
//! lines with linear-prediction edge extension.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// One biquad `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn response(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        let num = self.b[0] + self.b[1] * zi + self.b[2] * zi * zi;
        let den = 1.0 + self.a[0] * zi + self.a[1] * zi * zi;
        num / den
    }
}

/// Cascade of biquads realising a digital Butterworth high-pass filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Butterworth {
    pub sections: Vec<Biquad>,
}

impl Butterworth {
    /// Even-order high-pass with cutoff `omega` in rad/sample, `0 < omega < pi`.
    pub fn highpass(order: usize, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < PI) {
            return Err(Error::Cutoff(omega));
        }
        if order == 0 || order % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "filter order {order} must be even and positive"
            )));
        }
        // Bilinear transform with sampling rate 2 (so s = 4 (z-1)/(z+1)).
        let warped = 4.0 * (omega / 2.0).tan();
        let mut sections = Vec::with_capacity(order / 2);
        for k in 0..order / 2 {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            let lp_pole = Complex64::cis(theta);
            let hp_pole = warped / lp_pole;
            let zp = (4.0 + hp_pole) / (4.0 - hp_pole);
            // Double zero at z = 1; conjugate pole pair.
            sections.push(Biquad {
                b: [1.0, -2.0, 1.0],
                a: [-2.0 * zp.re, zp.norm_sqr()],
            });
        }
        // Unit gain at Nyquist.
        let mut bw = Self { sections };
        let g = bw.response(-1.0).norm();
        let per = g.powf(-1.0 / bw.sections.len() as f64);
        for s in &mut bw.sections {
            s.b.iter_mut().for_each(|b| *b *= per);
        }
        Ok(bw)
    }

    pub fn response(&self, omega: f64) -> Complex64 {
        let z = Complex64::cis(omega);
        self.sections.iter().map(|s| s.response(z)).product()
    }

    /// Causal pass over `x` starting in the steady state for the constant
    /// input `u`.
    pub fn filter_in_place(&self, x: &mut [Complex64], u: Complex64) {
        let mut u = u;
        for s in &self.sections {
            let [b0, b1, b2] = s.b;
            let [a1, a2] = s.a;
            let y_ss = u * ((b0 + b1 + b2) / (1.0 + a1 + a2));
            let mut z1 = y_ss - u * b0;
            let mut z2 = u * b2 - y_ss * a2;
            for v in x.iter_mut() {
                let inp = *v;
                let out = inp * b0 + z1;
                z1 = inp * b1 - out * a1 + z2;
                z2 = inp * b2 - out * a2;
                *v = out;
            }
            u = y_ss;
        }
    }

    /// Forward-backward pass: magnitude response squared, zero phase. Each
    /// pass starts in the steady state of the line's Hann-weighted mean so
    /// the DC level does not launch a slow transient.
    pub fn filtfilt_in_place(&self, x: &mut [Complex64]) {
        let u = hann_mean(x);
        self.filter_in_place(x, u);
        x.reverse();
        let u = hann_mean(x);
        self.filter_in_place(x, u);
        x.reverse();
    }
}

/// Mean under a Hann taper; tones well above `1/len` leak only weakly.
pub fn hann_mean(x: &[Complex64]) -> Complex64 {
    let n = x.len();
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut wsum = 0.0;
    for (i, v) in x.iter().enumerate() {
        let w = 0.5 - 0.5 * (TAU * (i as f64 + 0.5) / n as f64).cos();
        acc += v * w;
        wsum += w;
    }
    acc / wsum
}

/// Autoregressive predictor `x[t] = -sum_k a[k] x[t-1-k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    pub coeffs: Vec<Complex64>,
}

impl Predictor {
    /// Forward-backward least-squares fit shared across several lines. The
    /// prediction polynomial has its roots pulled onto or inside the unit
    /// circle so extrapolation cannot blow up.
    pub fn fit<'a>(lines: impl Iterator<Item = &'a [Complex64]>, order: usize) -> Option<Self> {
        if order == 0 {
            return None;
        }
        let mut r = DMatrix::<Complex64>::zeros(order, order);
        let mut rhs = DVector::<Complex64>::zeros(order);
        let mut row = vec![Complex64::new(0.0, 0.0); order];
        let mut accumulate = |row: &[Complex64], target: Complex64| {
            for i in 0..order {
                let ci = row[i].conj();
                rhs[i] -= ci * target;
                for j in 0..order {
                    r[(i, j)] += ci * row[j];
                }
            }
        };
        let mut used = 0usize;
        for line in lines {
            if line.len() <= order {
                continue;
            }
            used += 1;
            for t in order..line.len() {
                for k in 0..order {
                    row[k] = line[t - 1 - k];
                }
                accumulate(&row, line[t]);
                // Backward: conj(x[t-order]) predicted from conj(x[t-order+1+k]).
                let base = t - order;
                for k in 0..order {
                    row[k] = line[base + 1 + k].conj();
                }
                accumulate(&row, line[base].conj());
            }
        }
        if used == 0 {
            return None;
        }
        let load = (0..order).map(|i| r[(i, i)].re).sum::<f64>() / order as f64 * 1e-10 + 1e-300;
        for i in 0..order {
            r[(i, i)] += load;
        }
        let sol = r.lu().solve(&rhs)?;
        let coeffs: Vec<Complex64> = sol.iter().copied().collect();
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return None;
        }
        Some(Self {
            coeffs: stabilise(&coeffs),
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }
}

/// Moves roots of `z^p + a0 z^(p-1) + ... + a_{p-1}` that lie outside the unit
/// circle onto it and rebuilds the coefficients.
fn stabilise(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut poly = Vec::with_capacity(coeffs.len() + 1);
    poly.push(Complex64::new(1.0, 0.0));
    poly.extend_from_slice(coeffs);
    let roots = aberth_roots(&poly);
    if roots.iter().all(|r| r.norm() <= 1.0) {
        return coeffs.to_vec();
    }
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let r = if r.norm() > 1.0 { r / r.norm() } else { r };
        let mut next = vec![Complex64::new(0.0, 0.0); out.len() + 1];
        for (i, c) in out.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        out = next;
    }
    out[1..].to_vec()
}

/// Roots of a monic-or-not complex polynomial given highest degree first.
pub fn aberth_roots(poly: &[Complex64]) -> Vec<Complex64> {
    let deg = poly.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = poly[0];
    let p: Vec<Complex64> = poly.iter().map(|c| c / lead).collect();
    let dp: Vec<Complex64> = (0..deg).map(|i| p[i] * (deg - i) as f64).collect();
    let eval = |c: &[Complex64], z: Complex64| {
        c.iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k)
    };
    // Cauchy bound for the initial circle.
    let radius = 1.0 + p[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let r0 = radius.min(2.0).max(0.5);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(r0, 2.0 * PI * k as f64 / deg as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let pv = eval(&p, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / eval(&dp, z[i]);
            let repulse: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulse);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-14 {
            break;
        }
    }
    z
}

/// Zero-phase high-pass along one line: extrapolate both ends with the
/// predictor, filter forward and backward, keep the original span.
pub fn filter_line(
    filter: &Butterworth,
    predictor: Option<&Predictor>,
    pad: usize,
    line: &[Complex64],
    scratch: &mut Vec<Complex64>,
) -> Vec<Complex64> {
    let n = line.len();
    let pad = if predictor.is_some() { pad } else { 0 };
    scratch.clear();
    scratch.resize(n + 2 * pad, Complex64::new(0.0, 0.0));
    scratch[pad..pad + n].copy_from_slice(line);
    if let Some(pr) = predictor {
        let a = &pr.coeffs;
        let p = a.len();
        if n >= p {
            for t in pad + n..n + 2 * pad {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..p {
                    acc -= a[k] * scratch[t - 1 - k];
                }
                scratch[t] = acc;
            }
            for t in (0..pad).rev() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..p {
                    acc -= a[k].conj() * scratch[t + 1 + k];
                }
                scratch[t] = acc;
            }
        } else {
            let (first, last) = (line[0], line[n - 1]);
            scratch[..pad].iter_mut().for_each(|v| *v = first);
            scratch[pad + n..].iter_mut().for_each(|v| *v = last);
        }
    }
    filter.filtfilt_in_place(scratch);
    scratch[pad..pad + n].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn butterworth_rejects_bad_cutoffs() {
        assert!(Butterworth::highpass(4, 0.0).is_err());
        assert!(Butterworth::highpass(4, PI).is_err());
        assert!(Butterworth::highpass(3, 0.5).is_err());
    }

    #[test]
    fn butterworth_magnitude_is_maximally_flat() {
        let w = PI / 128.0;
        let bw = Butterworth::highpass(4, w).unwrap();
        assert!(bw.response(0.0).norm() < 1e-12);
        assert!((bw.response(PI).norm() - 1.0).abs() < 1e-12);
        // -3 dB at the cutoff.
        assert!((bw.response(w).norm() - 0.5f64.sqrt()).abs() < 1e-9);
        // Analog-prototype law after prewarping.
        let ratio = (0.5 * w).tan() / (0.5 * 3.0 * w).tan();
        let expect = 1.0 / (1.0 + ratio.powi(8)).sqrt();
        assert!((bw.response(3.0 * w).norm() - expect).abs() < 1e-9);
    }

    #[test]
    fn constant_line_is_removed() {
        let bw = Butterworth::highpass(4, PI / 128.0).unwrap();
        let mut x = vec![Complex64::new(2.0, -1.0); 300];
        bw.filtfilt_in_place(&mut x);
        let worst = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn aberth_finds_planted_roots() {
        let roots = [
            Complex64::new(0.5, 0.5),
            Complex64::new(-1.2, 0.1),
            Complex64::new(0.0, -0.9),
            Complex64::new(1.1, 0.0),
        ];
        let mut poly = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * r;
            }
            poly = next;
        }
        let found = aberth_roots(&poly);
        for r in roots {
            let best = found
                .iter()
                .map(|f| (f - r).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10);
        }
    }

    #[test]
    fn predictor_extends_tones() {
        let line: Vec<Complex64> = (0..128)
            .map(|t| Complex64::cis(0.3 * t as f64) + 0.5 * Complex64::cis(-1.1 * t as f64 + 0.2))
            .collect();
        let pr = Predictor::fit(std::iter::once(&line[..64]), 8).unwrap();
        let mut buf: Vec<Complex64> = line[..64].to_vec();
        for t in 64..128 {
            let next = -(0..pr.order())
                .map(|k| pr.coeffs[k] * buf[t - 1 - k])
                .sum::<Complex64>();
            buf.push(next);
        }
        for t in 64..128 {
            assert!((buf[t] - line[t]).norm() < 1e-6, "t={t}");
        }
    }
}
