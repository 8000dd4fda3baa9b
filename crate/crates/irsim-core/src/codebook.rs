//! Oversampled 2D DFT codebook for RUS beam steering, and the exhaustive
//! power-feedback codeword search.
//!
//! A codeword for an `M_v x M_h` block is the Kronecker structure
//!
//! ```text
//! w(r, q) = exp(j 2 pi p r / (O1 M_v)) * exp(j 2 pi l q / (O2 M_h))
//! ```
//!
//! flattened column-major (row index fastest) to match the panel's unit
//! numbering. Index ranges are zero-based over the full oversampled grids,
//! `p in [0, O1*M_v)` and `l in [0, O2*M_h)`, so `O1 = O2 = 1` gives the
//! classic orthogonal DFT book with `M_v * M_h` words.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::channel::{los_coefficient, subband_frequencies, RfParams};
use crate::geometry::{IrsLayout, Point3, RusSpec};
use crate::rng::TrialRng;
use crate::{Error, Result};

/// A full enumeration of DFT codewords for one RUS shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    codewords: Vec<Vec<Complex64>>,
    pub rus_rows: usize,
    pub rus_cols: usize,
    pub oversampling_v: usize,
    pub oversampling_h: usize,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codeword(&self, index: usize) -> Result<&[Complex64]> {
        self.codewords
            .get(index)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                name: "codeword",
                index,
                limit: self.codewords.len(),
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.codewords.iter().map(Vec::as_slice)
    }

    /// Flat index of the (p, l) beam pair: p outer, l inner.
    pub fn flat_index(&self, p: usize, l: usize) -> Result<usize> {
        let p_range = self.oversampling_v * self.rus_rows;
        let l_range = self.oversampling_h * self.rus_cols;
        if p >= p_range {
            return Err(Error::IndexOutOfRange {
                name: "p",
                index: p,
                limit: p_range,
            });
        }
        if l >= l_range {
            return Err(Error::IndexOutOfRange {
                name: "l",
                index: l,
                limit: l_range,
            });
        }
        Ok(p * l_range + l)
    }
}

/// Single DFT codeword for vertical beam index `p` and horizontal beam
/// index `l`. Every entry has unit magnitude.
pub fn dft_codeword(
    rus_rows: usize,
    rus_cols: usize,
    oversampling_v: usize,
    oversampling_h: usize,
    p: usize,
    l: usize,
) -> Result<Vec<Complex64>> {
    if rus_rows == 0 || rus_cols == 0 {
        return Err(Error::InvalidParameter {
            name: "rus_rows/rus_cols",
            reason: "must be positive integers",
        });
    }
    if oversampling_v == 0 || oversampling_h == 0 {
        return Err(Error::InvalidParameter {
            name: "oversampling",
            reason: "factors must be positive integers",
        });
    }
    let p_range = oversampling_v * rus_rows;
    let l_range = oversampling_h * rus_cols;
    if p >= p_range {
        return Err(Error::IndexOutOfRange {
            name: "p",
            index: p,
            limit: p_range,
        });
    }
    if l >= l_range {
        return Err(Error::IndexOutOfRange {
            name: "l",
            index: l,
            limit: l_range,
        });
    }
    let mut word = Vec::with_capacity(rus_rows * rus_cols);
    for q in 0..rus_cols {
        let col_phase = core::f64::consts::TAU * (l * q) as f64 / l_range as f64;
        for r in 0..rus_rows {
            let row_phase = core::f64::consts::TAU * (p * r) as f64 / p_range as f64;
            word.push(Complex64::from_polar(1.0, row_phase + col_phase));
        }
    }
    Ok(word)
}

/// Enumerate all (p, l) pairs over the full oversampled ranges, p outer.
pub fn build_codebook(
    rus_rows: usize,
    rus_cols: usize,
    oversampling_v: usize,
    oversampling_h: usize,
) -> Result<Codebook> {
    let p_range = oversampling_v
        .checked_mul(rus_rows)
        .ok_or(Error::InvalidParameter {
            name: "oversampling_v",
            reason: "codebook size overflows",
        })?;
    let l_range = oversampling_h
        .checked_mul(rus_cols)
        .ok_or(Error::InvalidParameter {
            name: "oversampling_h",
            reason: "codebook size overflows",
        })?;
    let mut codewords = Vec::with_capacity(p_range * l_range);
    for p in 0..p_range {
        for l in 0..l_range {
            codewords.push(dft_codeword(
                rus_rows,
                rus_cols,
                oversampling_v,
                oversampling_h,
                p,
                l,
            )?);
        }
    }
    Ok(Codebook {
        codewords,
        rus_rows,
        rus_cols,
        oversampling_v,
        oversampling_h,
    })
}

/// Result of a codeword search: the winning index and its observed power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodewordSearch {
    pub index: usize,
    pub power: f64,
}

/// Exhaustively search the codebook for the codeword maximizing the received
/// power at the terminal, one narrowband pilot (center frequency) per word.
///
/// With `feedback_rng = Some(..)` and a positive noise power, each power
/// observable is `|hbar(F_c) + z|^2` with `z ~ CN(0, sigma^2)`, modelling the
/// terminal's noisy feedback; with `None` the observable is the exact power.
/// Ties resolve to the lowest index.
pub fn search_codeword(
    codebook: &Codebook,
    layout: &IrsLayout,
    rus: &RusSpec,
    ap_position: &Point3,
    ue_position: &Point3,
    rf: &RfParams,
    mut feedback_rng: Option<&mut TrialRng>,
) -> Result<CodewordSearch> {
    if codebook.is_empty() {
        return Err(Error::EmptyInput("codebook"));
    }
    if codebook.rus_rows != rus.rus_rows || codebook.rus_cols != rus.rus_cols {
        return Err(Error::LengthMismatch {
            context: "codebook shape vs RUS shape",
            expected: rus.rus_rows * rus.rus_cols,
            actual: codebook.rus_rows * codebook.rus_cols,
        });
    }
    // Pilot frequency: the mean of the subband grid, i.e. the center
    // frequency. Per-member g*h products are shared across codewords.
    let freqs = subband_frequencies(rf);
    let fc = freqs.iter().sum::<f64>() / freqs.len() as f64;
    let mut products = Vec::with_capacity(rus.num_units());
    for &n in &rus.member_indices {
        let unit = layout.unit_position(n)?;
        let h = los_coefficient(rf, fc, ap_position.distance(&unit))?;
        let g = los_coefficient(rf, fc, ue_position.distance(&unit))?;
        products.push(g * h);
    }
    let noise_std = libm::sqrt(rf.noise_power_w);
    let mut best = CodewordSearch {
        index: 0,
        power: f64::NEG_INFINITY,
    };
    for (idx, word) in codebook.iter().enumerate() {
        if word.len() != products.len() {
            return Err(Error::LengthMismatch {
                context: "codeword vs RUS members",
                expected: products.len(),
                actual: word.len(),
            });
        }
        let mut received: Complex64 = products
            .iter()
            .zip(word)
            .map(|(gh, w)| gh * w)
            .sum();
        if let Some(rng) = feedback_rng.as_deref_mut() {
            if rf.noise_power_w > 0.0 {
                received += rng.complex_gaussian() * noise_std;
            }
        }
        let power = received.norm_sqr();
        if power > best.power {
            best = CodewordSearch { index: idx, power };
        }
    }
    Ok(best)
}
