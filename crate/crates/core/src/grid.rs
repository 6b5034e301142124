//! Dense complex tensors indexed `[slice][packet][subcarrier]`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major complex tensor with shape `(slices, packets, subcarriers)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3 {
    slices: usize,
    packets: usize,
    subcarriers: usize,
    data: Vec<Complex64>,
}

impl Grid3 {
    pub fn zeros(slices: usize, packets: usize, subcarriers: usize) -> Self {
        Self {
            slices,
            packets,
            subcarriers,
            data: vec![Complex64::new(0.0, 0.0); slices * packets * subcarriers],
        }
    }

    pub fn from_fn(
        slices: usize,
        packets: usize,
        subcarriers: usize,
        mut f: impl FnMut(usize, usize, usize) -> Complex64,
    ) -> Self {
        let mut data = Vec::with_capacity(slices * packets * subcarriers);
        for n in 0..slices {
            for m in 0..packets {
                for g in 0..subcarriers {
                    data.push(f(n, m, g));
                }
            }
        }
        Self {
            slices,
            packets,
            subcarriers,
            data,
        }
    }

    pub fn from_vec(
        slices: usize,
        packets: usize,
        subcarriers: usize,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        if data.len() != slices * packets * subcarriers {
            return Err(Error::Shape(format!(
                "{} values for a {slices}x{packets}x{subcarriers} grid",
                data.len()
            )));
        }
        Ok(Self {
            slices,
            packets,
            subcarriers,
            data,
        })
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.slices, self.packets, self.subcarriers)
    }

    #[inline]
    pub fn slices(&self) -> usize {
        self.slices
    }

    #[inline]
    pub fn packets(&self) -> usize {
        self.packets
    }

    #[inline]
    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    #[inline]
    fn offset(&self, n: usize, m: usize, g: usize) -> usize {
        debug_assert!(n < self.slices && m < self.packets && g < self.subcarriers);
        (n * self.packets + m) * self.subcarriers + g
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize, g: usize) -> Complex64 {
        self.data[self.offset(n, m, g)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, m: usize, g: usize, v: Complex64) {
        let i = self.offset(n, m, g);
        self.data[i] = v;
    }

    /// One `packets x subcarriers` plane, row-major.
    pub fn slice(&self, n: usize) -> &[Complex64] {
        let len = self.packets * self.subcarriers;
        &self.data[n * len..(n + 1) * len]
    }

    pub fn slice_mut(&mut self, n: usize) -> &mut [Complex64] {
        let len = self.packets * self.subcarriers;
        &mut self.data[n * len..(n + 1) * len]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    pub fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            ..*self
        })
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    pub fn mean_power(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.data.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl std::ops::Add for &Grid3 {
    type Output = Grid3;

    fn add(self, rhs: &Grid3) -> Grid3 {
        self.zip_map(rhs, |a, b| a + b).expect("grid shapes differ")
    }
}

impl std::ops::Sub for &Grid3 {
    type Output = Grid3;

    fn sub(self, rhs: &Grid3) -> Grid3 {
        self.zip_map(rhs, |a, b| a - b).expect("grid shapes differ")
    }
}
