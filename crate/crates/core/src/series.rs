//! Power series in T truncated at a fixed order, with coefficients in O_M.

use crate::error::Result;
use crate::padics::{RingDesc, RingElem};
use num_rational::Ratio;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncSeries {
    /// coeffs[k] is the coefficient of T^k
    pub coeffs: Vec<RingElem>,
}

impl TruncSeries {
    pub fn one(ring: &RingDesc, order: usize) -> TruncSeries {
        let mut coeffs = vec![ring.zero(); order + 1];
        coeffs[0] = ring.one();
        TruncSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

pub fn series_mul(ring: &RingDesc, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
    let order = a.order().min(b.order());
    let mut coeffs = vec![ring.zero(); order + 1];
    for (i, ca) in a.coeffs.iter().enumerate().take(order + 1) {
        if ring.is_zero(ca) && ca.prec >= ring.prec() {
            continue;
        }
        for (j, cb) in b.coeffs.iter().enumerate() {
            if i + j > order {
                break;
            }
            coeffs[i + j] = ring.add(&coeffs[i + j], &ring.mul(ca, cb));
        }
    }
    TruncSeries { coeffs }
}

/// Inverse of a series with unit constant term.
pub fn series_inv(ring: &RingDesc, a: &TruncSeries) -> Result<TruncSeries> {
    let order = a.order();
    let c0_inv = ring.inv(&a.coeffs[0])?;
    let mut out = vec![ring.zero(); order + 1];
    out[0] = c0_inv.clone();
    for m in 1..=order {
        let mut s = ring.zero();
        for j in 1..=m {
            s = ring.add(&s, &ring.mul(&a.coeffs[j], &out[m - j]));
        }
        out[m] = ring.neg(&ring.mul(&c0_inv, &s));
    }
    Ok(TruncSeries { coeffs: out })
}

/// Substitute T -> p^s T; the coefficient scalings are precision-raising.
pub fn series_scale_arg_ppow(ring: &RingDesc, a: &TruncSeries, s: u32) -> TruncSeries {
    let coeffs = a
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| ring.mul_p_pow(c, s * k as u32))
        .collect();
    TruncSeries { coeffs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesResidual {
    /// smallest ord_p over coefficient differences; None when the series
    /// agree at the reported precision
    pub min_ord: Option<Ratio<i64>>,
    /// smallest common coefficient precision the comparison was made at
    pub prec: u32,
}

pub fn series_residual(ring: &RingDesc, a: &TruncSeries, b: &TruncSeries) -> SeriesResidual {
    let order = a.order().min(b.order());
    let mut min_ord: Option<Ratio<i64>> = None;
    let mut prec = ring.prec();
    for k in 0..=order {
        let d = ring.sub(&a.coeffs[k], &b.coeffs[k]);
        prec = prec.min(d.prec);
        if let Some(o) = ring.ord_p(&d) {
            min_ord = Some(match min_ord {
                None => o,
                Some(m) => m.min(o),
            });
        }
    }
    SeriesResidual { min_ord, prec }
}
