//! Thin wrapper over `rustfft` with the sign conventions used in this crate.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// In-place unnormalized DFT. `Sign::Negative` computes `sum_j x_j e^{-2 pi i jk/n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sign {
    Negative,
    Positive,
}

pub(crate) fn dft_in_place(buf: &mut [Complex64], sign: Sign) {
    if buf.len() <= 1 {
        return;
    }
    let direction = match sign {
        Sign::Negative => FftDirection::Forward,
        Sign::Positive => FftDirection::Inverse,
    };
    let fft = FftPlanner::new().plan_fft(buf.len(), direction);
    fft.process(buf);
}
