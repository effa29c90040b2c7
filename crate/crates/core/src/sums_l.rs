//! Brute-force partial sums S_k over Z[zeta_p], the L-series exp relation,
//! the delta_d operator, rational-function reconstruction over Q(zeta_p), and
//! unit reciprocal root extraction.

use crate::cyclotomic::{CycInt, CycRat};
use crate::error::{Error, Result};
use crate::fields::{Elem as FieldElem, Embedding, TowerDesc};
use crate::laurent::LaurentPoly;
use crate::padics::{PadicCtx, RingDesc, RingElem};
use crate::series::TruncSeries;
use crate::unfolding::UnfoldSpec;
use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;

/// Result of one brute-force partial sum: the trace-fiber histogram is the
/// primary data, the reduced cyclotomic value is derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteSum {
    pub k: u32,
    /// n_j = #{x : Tr_{F_{q^{kd}}/F_p} f(x) = j}, indexed by j in 0..p
    pub histogram: Vec<u64>,
    pub value: CycInt,
}

/// S_k(f, d) = sum over x_i in F_{q^{k d_i}}^* of zeta_p^{Tr f(x)}, computed
/// by exact enumeration of the product domain in the common field F_{q^{kd}}.
pub fn brute_sum(
    f: &LaurentPoly<FieldElem>,
    spec: &UnfoldSpec,
    tower: &mut TowerDesc,
    k: u32,
    cap: u128,
) -> Result<BruteSum> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = spec.n();
    assert_eq!(f.nvars, n);
    let p = tower.base.p();
    let d = spec.lcm();
    // domain size guard
    let mut total: u128 = 1;
    for &di in &spec.d {
        let sz = tower.level((k * di) as usize)?.0.size() - 1;
        total = total
            .checked_mul(sz)
            .ok_or(Error::CapExceeded { size: u128::MAX, cap })?;
        if total > cap {
            return Err(Error::CapExceeded { size: total, cap });
        }
    }
    let (big, base_emb) = tower.level((k as u64 * d) as usize)?.clone();
    // per-variable unit lists embedded and raised to each term exponent
    let terms: Vec<(&Vec<i64>, &FieldElem)> = f.terms.iter().collect();
    let coeffs_emb: Vec<FieldElem> = terms
        .iter()
        .map(|(_, c)| base_emb.apply(&big, c))
        .collect();
    let mut powered: Vec<Vec<Vec<FieldElem>>> = Vec::with_capacity(n); // [var][term][unit]
    for i in 0..n {
        let (small, _) = tower.level((k * spec.d[i]) as usize)?.clone();
        let emb = Embedding::find(&small, &big, cap)?;
        let units: Vec<FieldElem> = small.enumerate_units(cap)?.collect();
        let embedded: Vec<FieldElem> = units.iter().map(|u| emb.apply(&big, u)).collect();
        let mut per_term = Vec::with_capacity(terms.len());
        for (e, _) in &terms {
            let exp = e[i];
            let vals: Vec<FieldElem> = if exp == 0 {
                Vec::new() // treated as 1
            } else {
                embedded
                    .iter()
                    .map(|x| big.pow_i64(x, exp))
                    .collect::<Result<_>>()?
            };
            per_term.push(vals);
        }
        powered.push(per_term);
    }
    let nunits: Vec<usize> = (0..n)
        .map(|i| (tower.level((k * spec.d[i]) as usize).unwrap().0.size() - 1) as usize)
        .collect();

    // sequential recursion over variables with per-term partial products
    fn recurse(
        big: &crate::fields::FieldDesc,
        powered: &[Vec<Vec<FieldElem>>],
        nunits: &[usize],
        level: usize,
        partial: &[FieldElem],
        hist: &mut [u64],
    ) {
        if level == powered.len() {
            let mut v = big.zero();
            for t in partial {
                v = big.add(&v, t);
            }
            hist[big.absolute_trace(&v) as usize] += 1;
            return;
        }
        for u in 0..nunits[level] {
            let next: Vec<FieldElem> = partial
                .iter()
                .enumerate()
                .map(|(t, pv)| {
                    if powered[level][t].is_empty() {
                        pv.clone()
                    } else {
                        big.mul(pv, &powered[level][t][u])
                    }
                })
                .collect();
            recurse(big, powered, nunits, level + 1, &next, hist);
        }
    }

    // parallelize over the first variable's units
    let hist = (0..nunits[0])
        .into_par_iter()
        .fold(
            || vec![0u64; p as usize],
            |mut h, u0| {
                let partial: Vec<FieldElem> = coeffs_emb
                    .iter()
                    .enumerate()
                    .map(|(t, c)| {
                        if powered[0][t].is_empty() {
                            c.clone()
                        } else {
                            big.mul(c, &powered[0][t][u0])
                        }
                    })
                    .collect();
                recurse(&big, &powered, &nunits, 1, &partial, &mut h);
                h
            },
        )
        .reduce(
            || vec![0u64; p as usize],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    debug_assert_eq!(hist.iter().map(|&x| x as u128).sum::<u128>(), total);
    let value = CycInt::from_histogram(p, &hist);
    Ok(BruteSum {
        k,
        histogram: hist,
        value,
    })
}

/// The L-series exp(sum S_k T^k / k) truncated at T^K, exact over Q(zeta_p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LSeries {
    pub p: u64,
    /// coeffs[k] is the T^k coefficient; coeffs[0] = 1
    pub coeffs: Vec<CycRat>,
}

pub fn l_series(s: &[CycInt], p: u64) -> LSeries {
    let k_max = s.len();
    let mut coeffs = vec![CycRat::one(p)];
    // m l_m = sum_{k=1}^m S_k l_{m-k}
    for m in 1..=k_max {
        let mut acc = CycRat::zero(p);
        for k in 1..=m {
            acc = acc.add(&CycRat::from_cyc_int(&s[k - 1]).mul(&coeffs[m - k]));
        }
        coeffs.push(acc.scale(&crate::linalg::big_rat(1, m as i64)));
    }
    LSeries { p, coeffs }
}

// ---- polynomial helpers over Q(zeta_p) ----

fn poly_trim(a: &mut Vec<CycRat>) {
    while a.len() > 1 && a.last().map_or(false, CycRat::is_zero) {
        a.pop();
    }
}

pub fn poly_mul(a: &[CycRat], b: &[CycRat], p: u64) -> Vec<CycRat> {
    let mut out = vec![CycRat::zero(p); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    poly_trim(&mut out);
    out
}

fn poly_divrem(num: &[CycRat], den: &[CycRat], p: u64) -> Result<(Vec<CycRat>, Vec<CycRat>)> {
    let mut r: Vec<CycRat> = num.to_vec();
    poly_trim(&mut r);
    let mut d: Vec<CycRat> = den.to_vec();
    poly_trim(&mut d);
    let lead = d.last().unwrap().clone();
    if lead.is_zero() {
        return Err(Error::Spec("division by zero polynomial".into()));
    }
    let lead_inv = lead.inv()?;
    let mut q = vec![CycRat::zero(p); r.len().saturating_sub(d.len()) + 1];
    while r.len() >= d.len() && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - d.len();
        let f = r.last().unwrap().mul(&lead_inv);
        q[shift] = q[shift].add(&f);
        for (i, c) in d.iter().enumerate() {
            r[shift + i] = r[shift + i].sub(&f.mul(c));
        }
        poly_trim(&mut r);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        if r.len() >= d.len() && r.last().unwrap().is_zero() {
            poly_trim(&mut r);
        }
    }
    poly_trim(&mut q);
    Ok((q, r))
}

fn poly_gcd(a: &[CycRat], b: &[CycRat], p: u64) -> Result<Vec<CycRat>> {
    let mut x: Vec<CycRat> = a.to_vec();
    let mut y: Vec<CycRat> = b.to_vec();
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !(y.len() == 1 && y[0].is_zero()) {
        let (_, r) = poly_divrem(&x, &y, p)?;
        x = y;
        y = r;
    }
    Ok(x)
}

/// Series expansion of num/den (den(0) = 1) through T^order.
pub fn rational_expansion(num: &[CycRat], den: &[CycRat], order: usize, p: u64) -> Vec<CycRat> {
    let mut out = vec![CycRat::zero(p); order + 1];
    // out = num - (den - 1) * out, solved coefficient by coefficient
    for m in 0..=order {
        let mut acc = if m < num.len() {
            num[m].clone()
        } else {
            CycRat::zero(p)
        };
        for j in 1..=m.min(den.len() - 1) {
            acc = acc.sub(&den[j].mul(&out[m - j]));
        }
        out[m] = acc;
    }
    out
}

/// A rational function num/den over Q(zeta_p), coprime, constant terms 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFn {
    pub p: u64,
    pub num: Vec<CycRat>,
    pub den: Vec<CycRat>,
}

/// Pade-style reconstruction with deg num, deg den <= max_deg, matching every
/// known coefficient. Returns None when no such function exists.
pub fn reconstruct_rational(l: &LSeries, max_deg: usize) -> Result<Option<RationalFn>> {
    let p = l.p;
    let k_max = l.coeffs.len() - 1;
    if k_max < 2 * max_deg + 1 {
        return Err(Error::Spec(format!(
            "need K >= 2 max_deg + 1 coefficients, have K = {k_max}"
        )));
    }
    // unknowns b_1..b_m with b_0 = 1: sum_j b_j l_{k-j} = 0 for k > max_deg
    let m = max_deg;
    let rows: Vec<usize> = (max_deg + 1..=k_max).collect();
    // solve the first m equations by elimination over Q(zeta_p), then verify
    // the rest; absence of a solution means "no rational fn at this degree".
    let mut aug: Vec<Vec<CycRat>> = rows
        .iter()
        .map(|&k| {
            let mut row: Vec<CycRat> = (1..=m).map(|j| l.coeffs[k - j].clone()).collect();
            row.push(l.coeffs[k].neg());
            row
        })
        .collect();
    // Gauss-Jordan
    let nrows = aug.len();
    let mut piv_rows = Vec::new();
    let mut r = 0usize;
    for c in 0..m {
        let Some(pr) = (r..nrows).find(|&i| !aug[i][c].is_zero()) else {
            continue;
        };
        aug.swap(r, pr);
        let inv = aug[r][c].inv()?;
        for j in c..=m {
            aug[r][j] = aug[r][j].mul(&inv);
        }
        for i in 0..nrows {
            if i != r && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for j in c..=m {
                    let t = f.mul(&aug[r][j]);
                    aug[i][j] = aug[i][j].sub(&t);
                }
            }
        }
        piv_rows.push((r, c));
        r += 1;
    }
    // consistency of the remaining equations
    for i in r..nrows {
        if !aug[i][m].is_zero() {
            return Ok(None);
        }
    }
    let mut b = vec![CycRat::zero(p); m + 1];
    b[0] = CycRat::one(p);
    for &(row, col) in &piv_rows {
        b[col + 1] = aug[row][m].clone();
    }
    // numerator = truncation of den * l at degree max_deg
    let mut num = vec![CycRat::zero(p); max_deg + 1];
    for (k, c) in num.iter_mut().enumerate() {
        let mut acc = CycRat::zero(p);
        for j in 0..=k.min(m) {
            acc = acc.add(&b[j].mul(&l.coeffs[k - j]));
        }
        *c = acc;
    }
    poly_trim(&mut num);
    let mut den = b;
    poly_trim(&mut den);
    // reduce to coprime form
    let g = poly_gcd(&num, &den, p)?;
    let (mut num, mut den) = if g.len() > 1 {
        (poly_divrem(&num, &g, p)?.0, poly_divrem(&den, &g, p)?.0)
    } else {
        (num, den)
    };
    // normalize constant terms to 1
    let c0 = num[0].clone();
    if c0.is_zero() || den[0].is_zero() {
        return Ok(None);
    }
    let c0i = c0.inv()?;
    let d0i = den[0].inv()?;
    for c in num.iter_mut() {
        *c = c.mul(&c0i);
    }
    for c in den.iter_mut() {
        *c = c.mul(&d0i);
    }
    // soundness: the expansion must reproduce every known coefficient
    let expansion = rational_expansion(&num, &den, k_max, p);
    for (k, c) in expansion.iter().enumerate() {
        if !c.sub(&l.coeffs[k]).is_zero() {
            return Ok(None);
        }
    }
    Ok(Some(RationalFn { p, num, den }))
}

/// Scheduled reconstruction: smallest max_deg in 1..=(K-1)/2 that succeeds.
pub fn reconstruct_scheduled(l: &LSeries) -> Result<Option<RationalFn>> {
    let k_max = l.coeffs.len() - 1;
    let mut deg = 1;
    while 2 * deg + 1 <= k_max {
        if let Some(r) = reconstruct_rational(l, deg)? {
            return Ok(Some(r));
        }
        deg += 1;
    }
    Ok(None)
}

/// Read the predicted S_{k} off the log derivative T L'/L and compare with an
/// independently computed value.
pub fn predict_and_check(rfn: &RationalFn, k_next: usize, oracle: &CycInt) -> bool {
    predicted_s(rfn, k_next) == CycRat::from_cyc_int(oracle)
}

pub fn predicted_s(rfn: &RationalFn, k: usize) -> CycRat {
    let p = rfn.p;
    let deriv = |f: &[CycRat]| -> Vec<CycRat> {
        // T f'(T): degree k coefficient is k * f_k
        f.iter()
            .enumerate()
            .map(|(i, c)| c.scale(&crate::linalg::big_rat(i as i64, 1)))
            .collect()
    };
    let tn = deriv(&rfn.num);
    let td = deriv(&rfn.den);
    let a = rational_expansion(&tn, &rfn.num, k, p);
    let b = rational_expansion(&td, &rfn.den, k, p);
    a[k].sub(&b[k])
}

/// Newton polygon of a polynomial over O_M: list of (slope, multiplicity) in
/// increasing slope order; slopes are ord_p values of the reciprocal roots.
pub fn newton_slopes(ring: &RingDesc, coeffs: &[RingElem]) -> Vec<(Ratio<i64>, usize)> {
    // points (i, ord_p c_i); zero coefficients are skipped
    let pts: Vec<(i64, Ratio<i64>)> = coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, c)| ring.ord_p(c).map(|o| (i as i64, o)))
        .collect();
    if pts.len() < 2 {
        return Vec::new();
    }
    // lower convex hull, left to right
    let mut hull: Vec<(i64, Ratio<i64>)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // keep b only if it is strictly below the chord a-pt
            let lhs = (b.1 - a.1) * Ratio::from_integer(pt.0 - a.0);
            let rhs = (pt.1 - a.1) * Ratio::from_integer(b.0 - a.0);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull.windows(2)
        .map(|w| {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            ((y1 - y0) / Ratio::from_integer(x1 - x0), (x1 - x0) as usize)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct UnitRootAnalysis {
    pub num_slopes: Vec<(Ratio<i64>, usize)>,
    pub den_slopes: Vec<(Ratio<i64>, usize)>,
    /// the Hensel-lifted slope-0 reciprocal root, when it is unique
    pub unit_root: Option<RingElem>,
    pub is_one_unit: bool,
}

/// Embed the (optionally inverted) rational function into O_M, compute the
/// Newton polygons of numerator and denominator, and when the numerator has
/// exactly one slope-0 reciprocal root (and the denominator none), lift it.
pub fn unit_reciprocal_roots(
    rfn: &RationalFn,
    ctx: &PadicCtx,
    invert: bool,
) -> Result<UnitRootAnalysis> {
    let (num_poly, den_poly) = if invert {
        (&rfn.den, &rfn.num)
    } else {
        (&rfn.num, &rfn.den)
    };
    let ring = &ctx.ring;
    let embed = |poly: &[CycRat]| -> Result<Vec<RingElem>> {
        poly.iter().map(|c| ctx.zeta_embed_rat(c)).collect()
    };
    let num: Vec<RingElem> = embed(num_poly)?;
    let den: Vec<RingElem> = embed(den_poly)?;
    let num_slopes = newton_slopes(ring, &num);
    let den_slopes = newton_slopes(ring, &den);
    let count0 = |s: &[(Ratio<i64>, usize)]| {
        s.iter()
            .filter(|(sl, _)| sl.is_zero())
            .map(|(_, m)| m)
            .sum::<usize>()
    };
    let (n0, d0) = (count0(&num_slopes), count0(&den_slopes));
    let mut unit_root = None;
    let mut is_one_unit = false;
    if n0 == 1 && d0 == 0 {
        let lambda = hensel_unit_root(ring, &num)?;
        is_one_unit = ring
            .ord_gamma(&ring.sub(&lambda, &ring.one()))
            .map_or(true, |o| o >= 1);
        unit_root = Some(lambda);
    }
    Ok(UnitRootAnalysis {
        num_slopes,
        den_slopes,
        unit_root,
        is_one_unit,
    })
}

/// Newton-lift the unique unit reciprocal root of a polynomial with unit
/// constant term and slope-0 multiplicity one: the root of the reversed
/// polynomial R(X) = sum c_i X^{deg - i}.
fn hensel_unit_root(ring: &RingDesc, coeffs: &[RingElem]) -> Result<RingElem> {
    let mut cs: Vec<RingElem> = coeffs.to_vec();
    while cs.len() > 1 && ring.is_zero(cs.last().unwrap()) {
        cs.pop();
    }
    let m = cs.len() - 1;
    let rev: Vec<RingElem> = (0..=m).map(|i| cs[m - i].clone()).collect();
    let eval = |x: &RingElem| -> RingElem {
        let mut acc = ring.zero();
        for c in rev.iter().rev() {
            acc = ring.mul(&acc, x);
            acc = ring.add(&acc, c);
        }
        acc
    };
    let eval_deriv = |x: &RingElem| -> RingElem {
        let mut acc = ring.zero();
        for (i, c) in rev.iter().enumerate().rev() {
            if i == 0 {
                continue;
            }
            acc = ring.mul(&acc, x);
            acc = ring.add(&acc, &ring.mul_i128(c, i as i128));
        }
        // Horner for the derivative: highest degree first
        let _ = acc;
        let mut a2 = ring.zero();
        for i in (1..=m).rev() {
            a2 = ring.mul(&a2, x);
            a2 = ring.add(&a2, &ring.mul_i128(&rev[i], i as i128));
        }
        a2
    };
    // residue start: the unique unit root of the reduced reversed polynomial
    let field = ring.residue_field().clone();
    let mut start = None;
    for idx in 1..field.size() {
        let cand = field.elem_from_index(idx);
        let mut acc = field.zero();
        for c in rev.iter().rev() {
            acc = field.mul(&acc, &cand);
            acc = field.add(&acc, &ring.residue(c));
        }
        if field.is_zero(&acc) {
            if start.is_some() {
                return Err(Error::Spec(
                    "multiple unit roots in the residue field".into(),
                ));
            }
            start = Some(cand);
        }
    }
    let start = start.ok_or_else(|| Error::Spec("no unit root in the residue field".into()))?;
    let mut x = ring.lift(&start);
    for _ in 0..(4 * ring.prec() as usize + 16) {
        let v = eval(&x);
        if ring.is_zero(&v) {
            return Ok(x);
        }
        let dv = eval_deriv(&x);
        x = ring.sub(&x, &ring.mul(&v, &ring.inv(&dv)?));
    }
    Err(Error::NonConvergence(4 * ring.prec() as usize + 16))
}

// ---- delta_d ----

/// delta_c: F(T) -> F(T) / F(q^c T), with q = p^a.
pub fn delta_c(ring: &RingDesc, f: &TruncSeries, a: u32, c: u32) -> Result<TruncSeries> {
    let scaled = crate::series::series_scale_arg_ppow(ring, f, a * c);
    Ok(crate::series::series_mul(
        ring,
        f,
        &crate::series::series_inv(ring, &scaled)?,
    ))
}

/// delta_d = delta_{d_1} o ... o delta_{d_n}; requires constant term 1.
pub fn delta_d(ring: &RingDesc, f: &TruncSeries, a: u32, d: &[u32]) -> Result<TruncSeries> {
    if ring.is_zero(&f.coeffs[0]) || !ring.is_zero(&ring.sub(&f.coeffs[0], &ring.one())) {
        return Err(Error::NonUnitConstantTerm);
    }
    let mut cur = f.clone();
    for &c in d {
        cur = delta_c(ring, &cur, a, c)?;
    }
    Ok(cur)
}

/// The subset-expansion route: prod over I subsets of {1..n} of
/// F(q^{d_I} T)^{(-1)^{|I|}}. Used as an independent check of `delta_d`.
pub fn delta_d_subsets(ring: &RingDesc, f: &TruncSeries, a: u32, d: &[u32]) -> Result<TruncSeries> {
    let n = d.len();
    let order = f.order();
    let mut acc = TruncSeries::one(ring, order);
    for mask in 0u32..(1 << n) {
        let d_i: u32 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| d[i]).sum();
        let scaled = crate::series::series_scale_arg_ppow(ring, f, a * d_i);
        let factor = if mask.count_ones() % 2 == 0 {
            scaled
        } else {
            crate::series::series_inv(ring, &scaled)?
        };
        acc = crate::series::series_mul(ring, &acc, &factor);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_field;
    use crate::series::{series_mul, series_residual};

    fn f_x(field: &crate::fields::FieldDesc) -> LaurentPoly<FieldElem> {
        LaurentPoly::from_terms(1, [(vec![1i64], field.one())])
    }

    #[test]
    fn brute_sums_trivial_f() {
        let f3 = make_field(3, 1, None).unwrap();
        let mut tower = TowerDesc::new(f3.clone(), 1 << 22);
        let spec = UnfoldSpec::new(vec![1]).unwrap();
        let s1 = brute_sum(&f_x(&f3), &spec, &mut tower, 1, 1 << 22).unwrap();
        assert_eq!(s1.histogram, vec![0, 1, 1]);
        assert_eq!(s1.value, CycInt::from_int(3, -1));
        // f = x with d = (2): histogram (2,3,3), S_1 = -1
        let spec2 = UnfoldSpec::new(vec![2]).unwrap();
        let s = brute_sum(&f_x(&f3), &spec2, &mut tower, 1, 1 << 22).unwrap();
        assert_eq!(s.histogram, vec![2, 3, 3]);
        assert_eq!(s.value, CycInt::from_int(3, -1));
        // constant f = 1: S_k = (q^{kd}-1)-fold repetition of zeta^{Tr of d*1}
        let f_const = LaurentPoly::from_terms(1, [(vec![0i64], f3.one())]);
        let s = brute_sum(&f_const, &spec2, &mut tower, 1, 1 << 22).unwrap();
        // every point contributes Tr_{F_9/F_3}(1) = 2
        assert_eq!(s.histogram, vec![0, 0, 8]);
        assert_eq!(s.value, CycInt::zeta_pow(3, 2).mul(&CycInt::from_int(3, 8)));
    }

    #[test]
    fn paper_example_s1() {
        // f = x1 x2 + x1 x2^{-1}, d = (1,2), p = q = 3: S_1 = 10
        let f3 = make_field(3, 1, None).unwrap();
        let f = LaurentPoly::from_terms(
            2,
            [(vec![1i64, 1], f3.one()), (vec![1, -1], f3.one())],
        );
        let spec = UnfoldSpec::new(vec![1, 2]).unwrap();
        let mut tower = TowerDesc::new(f3, 1 << 22);
        let s = brute_sum(&f, &spec, &mut tower, 1, 1 << 22).unwrap();
        assert_eq!(s.histogram.iter().sum::<u64>(), 16);
        assert_eq!(s.histogram, vec![12, 2, 2]);
        assert_eq!(s.value, CycInt::from_int(3, 10));
    }

    #[test]
    fn sum_over_w_set_matches_brute_sum() {
        // re-indexing through rho: sum over W of zeta^{Tr_{F_{q^k}/F_p} G}
        use crate::unfolding::{fixed_points, unfold};
        let f3 = make_field(3, 1, None).unwrap();
        let f = LaurentPoly::from_terms(
            2,
            [(vec![1i64, 1], f3.one()), (vec![1, -1], f3.one())],
        );
        let spec = UnfoldSpec::new(vec![1, 2]).unwrap();
        let g = unfold(&f, &spec, &f3).unwrap();
        for k in 1..=2u32 {
            let mut tower = TowerDesc::new(f3.clone(), 1 << 22);
            let brute = brute_sum(&f, &spec, &mut tower, k, 1 << 22).unwrap();
            let fps = fixed_points(&spec, &mut tower, k, 1, 1 << 22).unwrap();
            let (big, _, pts) = fps.embed_common(&mut tower, 1 << 22).unwrap();
            let mut hist = vec![0u64; 3];
            let ak = big.deg() / (spec.lcm() as usize); // extension degree of F_{q^k}
            for y in &pts {
                let mut gv = big.zero();
                for (e, c) in &g.terms {
                    let mut t = big.from_prime(c[0]);
                    for (i, &ei) in e.iter().enumerate() {
                        if ei != 0 {
                            t = big.mul(&t, &big.pow_i64(&y[i], ei).unwrap());
                        }
                    }
                    gv = big.add(&gv, &t);
                }
                // G(y) lies in F_{q^k}; Tr_{F_{q^k}/F_p} is the length-ak
                // Frobenius sum of the subfield element
                let mut tr = gv.clone();
                let mut cur = gv.clone();
                for _ in 1..ak {
                    cur = big.frobenius(&cur);
                    tr = big.add(&tr, &cur);
                }
                assert!(tr[1..].iter().all(|&c| c == 0));
                hist[tr[0] as usize] += 1;
            }
            assert_eq!(hist, brute.histogram, "k = {k}");
        }
    }

    #[test]
    fn l_series_exp_relation() {
        let p = 3;
        // S_k = -1 for all k gives L = 1 - T
        let s: Vec<CycInt> = (0..4).map(|_| CycInt::from_int(p, -1)).collect();
        let l = l_series(&s, p);
        assert_eq!(l.coeffs[0], CycRat::one(p));
        assert_eq!(l.coeffs[1], CycRat::from_int(p, -1));
        for k in 2..=4 {
            assert!(l.coeffs[k].is_zero(), "coefficient {k}");
        }
        // S_1 = 0 gives L = 1 + 0 T
        let l0 = l_series(&[CycInt::from_int(p, 0)], p);
        assert!(l0.coeffs[1].is_zero());
        // l_1 = S_1, l_2 = (S_1^2 + S_2)/2
        let s = vec![CycInt::from_int(p, 3), CycInt::from_int(p, 7)];
        let l = l_series(&s, p);
        assert_eq!(l.coeffs[1], CycRat::from_int(p, 3));
        assert_eq!(
            l.coeffs[2],
            CycRat::from_int(p, 16).scale(&crate::linalg::big_rat(1, 2))
        );
    }

    #[test]
    fn reconstruction_and_prediction() {
        let p = 3;
        // L = 1 - T from the S_k = -1 oracle
        let s: Vec<CycInt> = (0..5).map(|_| CycInt::from_int(p, -1)).collect();
        let l = l_series(&s, p);
        let r = reconstruct_scheduled(&l).unwrap().unwrap();
        assert_eq!(r.num, vec![CycRat::one(p), CycRat::from_int(p, -1)]);
        assert_eq!(r.den, vec![CycRat::one(p)]);
        assert!(predict_and_check(&r, 5, &CycInt::from_int(p, -1)));
        assert!(!predict_and_check(&r, 5, &CycInt::from_int(p, 4)));
        // synthetic (1 - T)/(1 - 3T) truncated at K = 7
        let num = vec![CycRat::one(p), CycRat::from_int(p, -1)];
        let den = vec![CycRat::one(p), CycRat::from_int(p, -3)];
        let coeffs = rational_expansion(&num, &den, 7, p);
        let l = LSeries { p, coeffs };
        let r = reconstruct_scheduled(&l).unwrap().unwrap();
        assert_eq!(r.num, num);
        assert_eq!(r.den, den);
        // generic coefficients have no degree-1 representation
        let coeffs: Vec<CycRat> = (0..9)
            .map(|i| CycRat::from_int(p, [1, 5, -2, 7, 11, -3, 2, 9, 4][i]))
            .collect();
        let l = LSeries { p, coeffs };
        assert!(reconstruct_rational(&l, 1).unwrap().is_none());
        // self-consistency of synthetic 1 - 2T: S_k = -2^k... wait, S_1 = -2, S_2 = -4
        let r = RationalFn {
            p,
            num: vec![CycRat::one(p), CycRat::from_int(p, -2)],
            den: vec![CycRat::one(p)],
        };
        assert_eq!(predicted_s(&r, 2), CycRat::from_int(p, -4));
    }

    #[test]
    fn slopes_and_unit_roots() {
        let ctx = PadicCtx::new(3, 1, None, 8).unwrap();
        let ring = &ctx.ring;
        let p = 3;
        // L = 1 - T: unit root 1
        let rfn = RationalFn {
            p,
            num: vec![CycRat::one(p), CycRat::from_int(p, -1)],
            den: vec![CycRat::one(p)],
        };
        let a = unit_reciprocal_roots(&rfn, &ctx, false).unwrap();
        assert_eq!(a.num_slopes, vec![(Ratio::from_integer(0), 1)]);
        assert_eq!(a.unit_root.clone().unwrap(), ring.one());
        assert!(a.is_one_unit);
        // (1 - T)(1 - 3T) = 1 - 4T + 3T^2: slopes {0, 1}, unit root 1
        let rfn = RationalFn {
            p,
            num: vec![
                CycRat::one(p),
                CycRat::from_int(p, -4),
                CycRat::from_int(p, 3),
            ],
            den: vec![CycRat::one(p)],
        };
        let a = unit_reciprocal_roots(&rfn, &ctx, false).unwrap();
        assert_eq!(
            a.num_slopes,
            vec![(Ratio::from_integer(0), 1), (Ratio::from_integer(1), 1)]
        );
        assert_eq!(a.unit_root.clone().unwrap(), ring.one());
        // 1 - T + 3T^2 (the Kloosterman polynomial at p = 3): unit root
        // satisfies lambda^2 - lambda + 3 = 0 and is 16 mod 27
        let rfn = RationalFn {
            p,
            num: vec![
                CycRat::one(p),
                CycRat::from_int(p, -1),
                CycRat::from_int(p, 3),
            ],
            den: vec![CycRat::one(p)],
        };
        let a = unit_reciprocal_roots(&rfn, &ctx, false).unwrap();
        let lam = a.unit_root.clone().unwrap();
        assert!(a.is_one_unit);
        let check = ring.add(
            &ring.sub(&ring.mul(&lam, &lam), &lam),
            &ring.from_i128(3),
        );
        assert!(ring.is_zero(&check));
        assert_eq!(lam.coords[0] % 27, 16);
    }

    #[test]
    fn delta_operator() {
        let ctx = PadicCtx::new(3, 1, None, 8).unwrap();
        let ring = &ctx.ring;
        let k = 6;
        // deterministic pseudo-random unit-constant series
        let mk = |seed: i128| {
            let mut coeffs = vec![ring.one()];
            let mut s = seed;
            for _ in 0..k {
                s = (s * 1103515245 + 12345) % 100_000;
                coeffs.push(ring.from_i128(s));
            }
            TruncSeries { coeffs }
        };
        let f = mk(7);
        // n = 1: F(T)/F(q^c T)
        let d1 = delta_d(ring, &f, 1, &[2]).unwrap();
        let by_hand = series_mul(
            ring,
            &f,
            &crate::series::series_inv(ring, &crate::series::series_scale_arg_ppow(ring, &f, 2))
                .unwrap(),
        );
        assert!(series_residual(ring, &d1, &by_hand).min_ord.is_none());
        // n = 2, d = (1,2): F(T) F(q^3 T) / (F(qT) F(q^2 T)) via subsets
        let d12 = delta_d(ring, &f, 1, &[1, 2]).unwrap();
        let subsets = delta_d_subsets(ring, &f, 1, &[1, 2]).unwrap();
        assert!(series_residual(ring, &d12, &subsets).min_ord.is_none());
        // composition order does not matter
        let d21 = delta_d(ring, &f, 1, &[2, 1]).unwrap();
        assert!(series_residual(ring, &d12, &d21).min_ord.is_none());
        // F = 1 maps to 1
        let one = TruncSeries::one(ring, k);
        let d = delta_d(ring, &one, 1, &[1, 2]).unwrap();
        assert!(series_residual(ring, &d, &one).min_ord.is_none());
        // non-unit constant term is rejected
        let mut bad = mk(3);
        bad.coeffs[0] = ring.from_i128(3);
        assert!(matches!(
            delta_d(ring, &bad, 1, &[1]),
            Err(Error::NonUnitConstantTerm)
        ));
    }
}
