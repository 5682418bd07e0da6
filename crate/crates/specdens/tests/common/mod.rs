//! Shared corpus and statistics helpers for the integration suites.
#![allow(dead_code)] // each suite uses its own subset

use num_complex::Complex64;
use specdens::{LineFunction, PiecewiseConstantSpec};

pub fn haar_father() -> LineFunction {
    LineFunction::Piecewise(PiecewiseConstantSpec::indicator(0.0, 1.0))
}

pub fn stretched_father(k: u64) -> LineFunction {
    LineFunction::Piecewise(specdens::stretched_haar(k).unwrap().father)
}

pub fn stretched_mother(k: u64) -> LineFunction {
    LineFunction::Piecewise(specdens::stretched_haar(k).unwrap().mother)
}

pub fn shannon(a: f64, b: f64) -> LineFunction {
    LineFunction::PiecewiseTransform(PiecewiseConstantSpec::indicator(a, b))
}

/// The six piecewise-constant corpus generators: Haar pair plus the
/// stretched pairs for k = 3 and 5.
pub fn piecewise_corpus() -> Vec<(&'static str, LineFunction)> {
    vec![
        ("father_1", stretched_father(1)),
        ("mother_1", stretched_mother(1)),
        ("father_3", stretched_father(3)),
        ("mother_3", stretched_mother(3)),
        ("father_5", stretched_father(5)),
        ("mother_5", stretched_mother(5)),
    ]
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, (var / n).sqrt())
}

/// Small deterministic generator for test coefficients.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn next_complex(&mut self) -> Complex64 {
        Complex64::new(self.next_f64() - 0.5, self.next_f64() - 0.5)
    }
}
