//! Adaptive-precision driver for recurrences that cancel heavily in `f64`.
//!
//! A computation is run at two working precisions 64 bits apart; when every
//! output agrees to [`AGREEMENT`] the higher-precision result is accepted,
//! otherwise the precision is doubled.

use crate::error::{Error, Result};

const AGREEMENT: f64 = 1e-15;
const MAX_BITS: u32 = 1 << 16;

pub(crate) fn adaptive<F>(start_bits: u32, mut run: F) -> Result<Vec<f64>>
where
    F: FnMut(u32) -> Result<Vec<f64>>,
{
    let mut bits = start_bits.max(64);
    loop {
        let lo = run(bits)?;
        let hi = run(bits + 64)?;
        if agree(&lo, &hi) {
            return Ok(hi);
        }
        if bits >= MAX_BITS {
            return Err(Error::NumericalInstability(format!(
                "recurrence did not stabilise at {bits} bits"
            )));
        }
        bits = bits.saturating_mul(2);
    }
}

fn agree(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(&x, &y)| {
            let scale = x.abs().max(y.abs());
            scale < f64::MIN_POSITIVE || (x - y).abs() <= AGREEMENT * scale
        })
}
