//! Truncated p-adic arithmetic in O_M = Z_q[pi]/(pi^{p-1} + p) at absolute
//! precision p^M, together with Teichmueller lifts, the Artin-Hasse
//! exponential, Dwork's gamma and splitting function theta, and the partial
//! sums gamma_m.
//!
//! Elements are integer coordinate vectors over the basis pi^j x^i with
//! 0 <= j < p-1 and 0 <= i < deg, coordinates canonical in [0, p^prec).
//! Dividing by p^s costs exactly s digits of effective precision; all ring
//! operations propagate the minimum.

use crate::cyclotomic::{CycInt, CycRat};
use crate::error::{Error, Result};
use crate::fields::{make_field, Elem as FieldElem, FieldDesc};
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingDesc {
    p: u64,
    deg: usize,
    prec: u32,
    /// monic lift of the residue-field modulus, coefficients in [0, p)
    modulus: Vec<u64>,
    residue_field: FieldDesc,
    /// p^k for k = 0..=prec
    ppow: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingElem {
    /// coordinate at pi^j x^i lives at index j*deg + i
    pub coords: Vec<u64>,
    pub prec: u32,
}

impl RingDesc {
    pub fn new(p: u64, deg: usize, modulus: Option<&[u64]>, prec: u32) -> Result<RingDesc> {
        let residue_field = make_field(p, deg, modulus)?;
        let mut ppow = vec![1u64];
        for _ in 0..prec {
            let next = ppow
                .last()
                .unwrap()
                .checked_mul(p)
                .filter(|&v| v < (1 << 40))
                .ok_or(Error::Spec(format!("p^{prec} too large for u64 coords")))?;
            ppow.push(next);
        }
        Ok(RingDesc {
            p,
            deg,
            prec,
            modulus: residue_field.modulus().to_vec(),
            residue_field,
            ppow,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn deg(&self) -> usize {
        self.deg
    }
    pub fn prec(&self) -> u32 {
        self.prec
    }
    pub fn residue_field(&self) -> &FieldDesc {
        &self.residue_field
    }
    /// number of coordinates: (p-1) * deg
    pub fn width(&self) -> usize {
        (self.p as usize - 1) * self.deg
    }
    pub fn p_pow(&self, k: u32) -> u64 {
        self.ppow[k as usize]
    }

    /// Same ring at a different precision.
    pub fn with_prec(&self, prec: u32) -> Result<RingDesc> {
        RingDesc::new(self.p, self.deg, Some(&self.modulus), prec)
    }

    pub fn zero(&self) -> RingElem {
        RingElem {
            coords: vec![0; self.width()],
            prec: self.prec,
        }
    }

    pub fn one(&self) -> RingElem {
        let mut e = self.zero();
        e.coords[0] = 1;
        e
    }

    pub fn pi(&self) -> RingElem {
        if self.p == 2 {
            // ramification is trivial: pi = -2
            return self.from_i128(-2);
        }
        let mut e = self.zero();
        e.coords[self.deg] = 1;
        e
    }

    pub fn from_i128(&self, n: i128) -> RingElem {
        let m = self.p_pow(self.prec) as i128;
        let mut e = self.zero();
        e.coords[0] = (((n % m) + m) % m) as u64;
        e
    }

    pub fn from_bigint(&self, n: &BigInt) -> RingElem {
        let m = BigInt::from(self.p_pow(self.prec));
        let r = ((n % &m) + &m) % &m;
        let mut e = self.zero();
        e.coords[0] = r.to_u64().unwrap();
        e
    }

    /// Naive lift of a residue-field element (pi-degree 0 block).
    pub fn lift(&self, z: &FieldElem) -> RingElem {
        assert_eq!(z.len(), self.deg);
        let mut e = self.zero();
        e.coords[..self.deg].copy_from_slice(z);
        e
    }

    /// Image in the residue field F_q = O/pi.
    pub fn residue(&self, a: &RingElem) -> FieldElem {
        a.coords[..self.deg].iter().map(|&c| c % self.p).collect()
    }

    pub fn is_zero(&self, a: &RingElem) -> bool {
        a.coords.iter().all(|&c| c == 0)
    }

    pub fn reduce_prec(&self, a: &RingElem, prec: u32) -> RingElem {
        let prec = prec.min(a.prec);
        let m = self.p_pow(prec);
        RingElem {
            coords: a.coords.iter().map(|&c| c % m).collect(),
            prec,
        }
    }

    pub fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let prec = a.prec.min(b.prec);
        let m = self.p_pow(prec);
        RingElem {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(&x, &y)| (x % m + y % m) % m)
                .collect(),
            prec,
        }
    }

    pub fn sub(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let prec = a.prec.min(b.prec);
        let m = self.p_pow(prec);
        RingElem {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(&x, &y)| (x % m + m - y % m) % m)
                .collect(),
            prec,
        }
    }

    pub fn neg(&self, a: &RingElem) -> RingElem {
        let m = self.p_pow(a.prec);
        RingElem {
            coords: a.coords.iter().map(|&x| (m - x % m) % m).collect(),
            prec: a.prec,
        }
    }

    /// extended accumulation buffer dimensions for unreduced products
    fn ext_dims(&self) -> (usize, usize) {
        (2 * (self.p as usize - 1) - 1, 2 * self.deg - 1)
    }

    /// acc += a * b without pi/x reduction; acc is indexed by
    /// [pi-degree][x-degree] flattened with x-stride ext_x.
    pub fn mul_acc(&self, a: &[u64], b: &[u64], acc: &mut [i128]) {
        let deg = self.deg;
        let (_, ext_x) = self.ext_dims();
        for (ia, &ca) in a.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            let (j1, i1) = (ia / deg, ia % deg);
            for (ib, &cb) in b.iter().enumerate() {
                if cb == 0 {
                    continue;
                }
                let (j2, i2) = (ib / deg, ib % deg);
                acc[(j1 + j2) * ext_x + (i1 + i2)] += ca as i128 * cb as i128;
            }
        }
    }

    /// Reduce an accumulation buffer (pi^{p-1} = -p, then the x modulus) to
    /// canonical coordinates mod p^prec.
    pub fn reduce_acc(&self, acc: &[i128], prec: u32) -> Vec<u64> {
        let deg = self.deg;
        let pw = self.p as usize - 1;
        let (ext_pi, ext_x) = self.ext_dims();
        let m = self.p_pow(prec) as i128;
        let mut buf = acc.to_vec();
        // fold pi degrees >= p-1 down with a factor of -p
        for j in (pw..ext_pi).rev() {
            for i in 0..ext_x {
                let v = buf[j * ext_x + i] % m;
                if v != 0 {
                    buf[(j - pw) * ext_x + i] -= self.p as i128 * v;
                }
                buf[j * ext_x + i] = 0;
            }
        }
        // fold x degrees >= deg using the monic modulus
        for j in 0..pw {
            for i in (deg..ext_x).rev() {
                let v = buf[j * ext_x + i] % m;
                buf[j * ext_x + i] = 0;
                if v != 0 {
                    for (t, &mt) in self.modulus[..deg].iter().enumerate() {
                        if mt != 0 {
                            buf[j * ext_x + (i - deg + t)] -= v * mt as i128;
                        }
                    }
                }
            }
        }
        let mut out = vec![0u64; self.width()];
        for j in 0..pw {
            for i in 0..deg {
                let v = ((buf[j * ext_x + i] % m) + m) % m;
                out[j * deg + i] = v as u64;
            }
        }
        out
    }

    pub fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let prec = a.prec.min(b.prec);
        let (ext_pi, ext_x) = self.ext_dims();
        let mut acc = vec![0i128; ext_pi * ext_x];
        self.mul_acc(&a.coords, &b.coords, &mut acc);
        RingElem {
            coords: self.reduce_acc(&acc, prec),
            prec,
        }
    }

    pub fn mul_i128(&self, a: &RingElem, n: i128) -> RingElem {
        let m = self.p_pow(a.prec) as i128;
        let nn = ((n % m) + m) % m;
        RingElem {
            coords: a
                .coords
                .iter()
                .map(|&c| ((c as i128 * nn) % m) as u64)
                .collect(),
            prec: a.prec,
        }
    }

    pub fn pow(&self, a: &RingElem, mut e: u128) -> RingElem {
        let mut acc = RingElem {
            coords: self.one().coords,
            prec: a.prec,
        };
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }

    /// Multiply by p^s; absolute precision improves by s (capped at the ring
    /// precision).
    pub fn mul_p_pow(&self, a: &RingElem, s: u32) -> RingElem {
        let prec = a.prec.saturating_add(s).min(self.prec);
        if s >= self.prec {
            return RingElem {
                coords: vec![0; self.width()],
                prec,
            };
        }
        let m = self.p_pow(prec) as u128;
        let f = self.p_pow(s) as u128;
        RingElem {
            coords: a
                .coords
                .iter()
                .map(|&c| ((c as u128 * f) % m) as u64)
                .collect(),
            prec,
        }
    }

    /// Divide by p; requires every coordinate divisible by p and costs one
    /// digit of precision.
    pub fn div_p(&self, a: &RingElem) -> Result<RingElem> {
        if a.prec == 0 {
            return Err(Error::PrecisionExhausted { needed: 1, have: 0 });
        }
        if a.coords.iter().any(|&c| c % self.p != 0) {
            return Err(Error::NotDivisible { prec: a.prec });
        }
        Ok(RingElem {
            coords: a.coords.iter().map(|&c| c / self.p).collect(),
            prec: a.prec - 1,
        })
    }

    pub fn div_p_pow(&self, a: &RingElem, s: u32) -> Result<RingElem> {
        let mut x = a.clone();
        for _ in 0..s {
            x = self.div_p(&x)?;
        }
        Ok(x)
    }

    /// Newton inversion of a unit (nonzero residue).
    pub fn inv(&self, a: &RingElem) -> Result<RingElem> {
        let res = self.residue(a);
        if self.residue_field.is_zero(&res) {
            return Err(Error::Spec("inverse of a non-unit".into()));
        }
        let r_inv = self.residue_field.inv(&res)?;
        let mut x = self.lift(&r_inv);
        x.prec = a.prec;
        // x <- x(2 - a x), doubling correct digits each step
        let two = self.from_i128(2);
        for _ in 0..(64 - (a.prec as u64).leading_zeros() + 2) {
            let t = self.sub(&two, &self.mul(a, &x));
            x = self.mul(&x, &t);
        }
        debug_assert!(self.is_zero(&self.sub(&self.mul(a, &x), &self.one_at(a.prec))));
        Ok(x)
    }

    fn one_at(&self, prec: u32) -> RingElem {
        let mut e = self.one();
        e.prec = prec;
        e
    }

    /// ord_gamma = (p-1) ord_p as an integer, or None when the element is 0
    /// at its effective precision.
    pub fn ord_gamma(&self, a: &RingElem) -> Option<u32> {
        let mut best: Option<u32> = None;
        for (idx, &c) in a.coords.iter().enumerate() {
            let cm = c % self.p_pow(a.prec);
            if cm == 0 {
                continue;
            }
            let j = (idx / self.deg) as u32;
            let mut v = 0u32;
            let mut x = cm;
            while x % self.p == 0 {
                v += 1;
                x /= self.p;
            }
            let o = j + (self.p as u32 - 1) * v;
            best = Some(best.map_or(o, |b| b.min(o)));
        }
        best
    }

    /// ord_p as a rational with denominator p-1; None when 0 at precision.
    pub fn ord_p(&self, a: &RingElem) -> Option<Ratio<i64>> {
        self.ord_gamma(a)
            .map(|o| Ratio::new(o as i64, self.p as i64 - 1))
    }

    /// ord_p(a - b), None when they agree at the common precision.
    pub fn ord_p_diff(&self, a: &RingElem, b: &RingElem) -> Option<Ratio<i64>> {
        self.ord_p(&self.sub(a, b))
    }

    /// Teichmueller lift: iterate z -> z^q to the fixed point.
    pub fn teichmuller(&self, z: &FieldElem) -> RingElem {
        if self.residue_field.is_zero(z) {
            return self.zero();
        }
        let q = (self.p as u128).pow(self.deg as u32);
        let mut x = self.lift(z);
        for _ in 0..(2 * self.prec + 4) {
            let next = self.pow(&x, q);
            if next == x {
                break;
            }
            x = next;
        }
        debug_assert_eq!(self.pow(&x, q), x);
        x
    }

    /// Embed an element of Z[zeta_p], sending zeta_p to the given root.
    pub fn embed_cyc_int(&self, c: &CycInt, zeta_pows: &[RingElem]) -> RingElem {
        let mut acc = self.zero();
        for (j, &n) in c.coords.iter().enumerate() {
            if n != 0 {
                acc = self.add(&acc, &self.mul_i128(&zeta_pows[j], n));
            }
        }
        acc
    }
}

/// Coefficients e_0..e_imax of the Artin-Hasse exponential
/// E(t) = exp(sum t^{p^i} / p^i), as exact rationals.
/// Recursion: n e_n = sum_{p^i <= n} e_{n - p^i}.
pub fn artin_hasse(p: u64, i_max: usize) -> Vec<BigRational> {
    let mut e = vec![BigRational::one()];
    for n in 1..=i_max {
        let mut s = BigRational::zero();
        let mut q = 1usize;
        loop {
            s += &e[n - q];
            match q.checked_mul(p as usize) {
                Some(nq) if nq <= n => q = nq,
                _ => break,
            }
        }
        e.push(s / BigRational::from(BigInt::from(n as i64)));
    }
    e
}

/// Reduce an exact rational with p-unit denominator into the ring.
pub fn rational_to_ring(ring: &RingDesc, x: &BigRational) -> Result<RingElem> {
    let den = x.denom().abs();
    let p = BigInt::from(ring.p());
    if (&den % &p).is_zero() {
        return Err(Error::Spec("denominator not a p-adic unit".into()));
    }
    let num = ring.from_bigint(x.numer());
    let den = ring.from_bigint(&den);
    Ok(ring.mul(&num, &ring.inv(&den)?))
}

/// max i with ord_p(gamma^{p^i} / p^i) = p^i/(p-1) - i < M
pub fn gamma_series_limit(p: u64, m: u32) -> usize {
    let mut i = 0usize;
    loop {
        let next = i + 1;
        let pi = (p as u128).checked_pow(next as u32);
        match pi {
            Some(v) if v < (p as u128 - 1) * (m as u128 + next as u128) => i = next,
            _ => return i,
        }
    }
}

/// Dwork's gamma: the root of sum t^{p^i}/p^i with gamma = pi mod pi^2,
/// computed by Newton iteration at internally raised precision.
///
/// The series evaluation divides by p^i, which the precision tracker charges
/// for. Newton self-corrects low-order noise in the step, so inside the loop
/// the iterate is restored to full internal precision; the residual that
/// certifies the result is checked with honest precision accounting at the
/// target precision before returning.
pub fn gamma_root(ring: &RingDesc) -> Result<RingElem> {
    let m = ring.prec();
    let i_lim = gamma_series_limit(ring.p(), m + 1) as u32;
    let m_int = m + i_lim + 1;
    let internal = ring.with_prec(m_int)?;
    let assume_full = |mut x: RingElem| {
        x.prec = m_int;
        x
    };
    let eval = |g: &RingElem| -> Result<RingElem> {
        // sum_{i <= i_lim} g^{p^i} / p^i
        let mut acc = internal.zero();
        for i in 0..=i_lim {
            let t = internal.pow(g, (internal.p() as u128).pow(i));
            acc = internal.add(&acc, &internal.div_p_pow(&t, i)?);
        }
        Ok(acc)
    };
    let deriv = |g: &RingElem| -> RingElem {
        // sum_{i <= i_lim} g^{p^i - 1}
        let mut acc = internal.zero();
        for i in 0..=i_lim {
            let e = (internal.p() as u128).pow(i) - 1;
            acc = internal.add(&acc, &internal.pow(g, e));
        }
        acc
    };
    let mut g = internal.pi();
    for _ in 0..64 {
        let val = eval(&g)?;
        // honest check: val carries prec >= m + 1
        if internal.is_zero(&internal.reduce_prec(&val, m)) {
            let out = internal.reduce_prec(&g, m);
            debug_assert!({
                let d = internal.sub(&assume_full(out.clone()), &internal.pi());
                internal.ord_gamma(&d).map_or(true, |o| o >= 2)
            });
            return Ok(out);
        }
        let step = internal.mul(&val, &internal.inv(&deriv(&g))?);
        g = assume_full(internal.sub(&g, &step));
    }
    Err(Error::NonConvergence(64))
}

/// The partial sum gamma_m = sum_{i<=m} gamma^{p^i}/p^i together with its
/// expected and observed valuations. `zero_at_precision` flags the case where
/// the true valuation exceeds what the ring can see.
#[derive(Debug, Clone)]
pub struct GammaM {
    pub value: RingElem,
    pub expected_ord_gamma: u128,
    pub zero_at_precision: bool,
}

/// Shared p-adic context: the ring plus gamma, the theta coefficients
/// theta_i = e_i gamma^i for i <= (p-1) M, and the fixed p-th root of unity
/// zeta = theta(1).
#[derive(Debug, Clone)]
pub struct PadicCtx {
    pub ring: RingDesc,
    pub gamma: RingElem,
    pub artin_hasse: Vec<BigRational>,
    pub theta: Vec<RingElem>,
    pub zeta_pows: Vec<RingElem>,
}

impl PadicCtx {
    pub fn new(p: u64, deg: usize, modulus: Option<&[u64]>, prec: u32) -> Result<PadicCtx> {
        let ring = RingDesc::new(p, deg, modulus, prec)?;
        let gamma = gamma_root(&ring)?;
        let i_max = (p as usize - 1) * prec as usize;
        let e = artin_hasse(p, i_max);
        let mut theta = Vec::with_capacity(i_max + 1);
        let mut gpow = ring.one();
        for ei in e.iter() {
            let coeff = rational_to_ring(&ring, ei)?;
            theta.push(ring.mul(&coeff, &gpow));
            gpow = ring.mul(&gpow, &gamma);
        }
        let mut zeta = ring.zero();
        for t in &theta {
            zeta = ring.add(&zeta, t);
        }
        let mut zeta_pows = vec![ring.one()];
        for _ in 1..p {
            zeta_pows.push(ring.mul(zeta_pows.last().unwrap(), &zeta));
        }
        Ok(PadicCtx {
            ring,
            gamma,
            artin_hasse: e,
            theta,
            zeta_pows,
        })
    }

    pub fn p(&self) -> u64 {
        self.ring.p()
    }

    pub fn zeta(&self) -> &RingElem {
        &self.zeta_pows[1]
    }

    /// theta(t) = sum_{i <= i_max} theta_i t^i for integral t, by Horner.
    pub fn theta_eval(&self, t: &RingElem, i_max: usize) -> RingElem {
        let i_max = i_max.min(self.theta.len() - 1);
        let mut acc = self.ring.zero();
        for i in (0..=i_max).rev() {
            acc = self.ring.mul(&acc, t);
            acc = self.ring.add(&acc, &self.theta[i]);
        }
        acc
    }

    /// Ring homomorphism Z[zeta_p] -> O_M with zeta_p -> theta(1).
    pub fn zeta_embed(&self, c: &CycInt) -> RingElem {
        self.ring.embed_cyc_int(c, &self.zeta_pows)
    }

    /// Q(zeta_p) -> O_M where the denominator's p-part costs precision.
    pub fn zeta_embed_rat(&self, c: &CycRat) -> Result<RingElem> {
        let den = c.denominator();
        let p = BigInt::from(self.p());
        let mut s = 0u32;
        let mut unit_den = den.clone();
        while (&unit_den % &p).is_zero() {
            unit_den /= &p;
            s += 1;
        }
        let mut acc = self.ring.zero();
        for (j, x) in c.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let scaled = x * BigRational::from(den.clone());
            debug_assert!(scaled.is_integer());
            let n = self.ring.from_bigint(&scaled.to_integer());
            acc = self.ring.add(&acc, &self.ring.mul(&n, &self.zeta_pows[j]));
        }
        let inv = self.ring.inv(&self.ring.from_bigint(&unit_den))?;
        let acc = self.ring.mul(&acc, &inv);
        self.ring.div_p_pow(&acc, s)
    }

    /// gamma_m = sum_{i <= m} gamma^{p^i}/p^i with valuation report.
    pub fn gamma_m(&self, m: u32) -> Result<GammaM> {
        let ring = &self.ring;
        let mut acc = ring.zero();
        for i in 0..=m {
            let t = ring.pow(&self.gamma, (self.p() as u128).pow(i));
            acc = ring.add(&acc, &ring.div_p_pow(&t, i)?);
        }
        let expected =
            (self.p() as u128).pow(m + 1) - (m as u128 + 1) * (self.p() as u128 - 1);
        let zero_at_precision = ring.is_zero(&acc);
        Ok(GammaM {
            value: acc,
            expected_ord_gamma: expected,
            zero_at_precision,
        })
    }

    /// p^m gamma_m = sum_{i <= m} p^{m-i} gamma^{p^i}; exact, no division.
    pub fn gamma_m_scaled(&self, m: u32) -> RingElem {
        let ring = &self.ring;
        let mut acc = ring.zero();
        for i in 0..=m {
            let t = ring.pow(&self.gamma, (self.p() as u128).pow(i));
            acc = ring.add(&acc, &ring.mul_p_pow(&t, m - i));
        }
        acc
    }
}
