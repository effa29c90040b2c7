//! Exact arithmetic in Z[zeta_p] and Q(zeta_p) over the power basis
//! 1, zeta, ..., zeta^{p-2}, with the reduction
//! zeta^{p-1} = -(1 + zeta + ... + zeta^{p-2}).

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An element of Z[zeta_p]; coords over the basis 1..zeta^{p-2}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycInt {
    pub p: u64,
    pub coords: Vec<i128>,
}

impl CycInt {
    pub fn zero(p: u64) -> CycInt {
        CycInt {
            p,
            coords: vec![0; (p - 1) as usize],
        }
    }

    pub fn from_int(p: u64, n: i128) -> CycInt {
        let mut c = CycInt::zero(p);
        c.coords[0] = n;
        c
    }

    /// zeta^j for any integer j.
    pub fn zeta_pow(p: u64, j: i64) -> CycInt {
        let jm = j.rem_euclid(p as i64) as usize;
        let mut c = CycInt::zero(p);
        if jm < (p - 1) as usize {
            c.coords[jm] = 1;
        } else {
            // zeta^{p-1} = -(1 + ... + zeta^{p-2})
            for x in c.coords.iter_mut() {
                *x = -1;
            }
        }
        c
    }

    /// sum_j n_j zeta^j with the histogram indexed by 0..p-1.
    pub fn from_histogram(p: u64, hist: &[u64]) -> CycInt {
        assert_eq!(hist.len(), p as usize);
        let mut c = CycInt::zero(p);
        for (j, &n) in hist.iter().enumerate() {
            if j < (p - 1) as usize {
                c.coords[j] += n as i128;
            } else {
                for x in c.coords.iter_mut() {
                    *x -= n as i128;
                }
            }
        }
        c
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn add(&self, o: &CycInt) -> CycInt {
        CycInt {
            p: self.p,
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> CycInt {
        CycInt {
            p: self.p,
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, o: &CycInt) -> CycInt {
        let n = (self.p - 1) as usize;
        // multiply as exponents mod p, then reduce zeta^{p-1}
        let mut by_exp = vec![0i128; self.p as usize];
        for (i, &a) in self.coords.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coords.iter().enumerate() {
                by_exp[(i + j) % self.p as usize] += a * b;
            }
        }
        let mut coords = by_exp[..n].to_vec();
        let top = by_exp[n];
        for c in coords.iter_mut() {
            *c -= top;
        }
        CycInt { p: self.p, coords }
    }
}

/// An element of Q(zeta_p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycRat {
    pub p: u64,
    pub coords: Vec<BigRational>,
}

impl CycRat {
    pub fn zero(p: u64) -> CycRat {
        CycRat {
            p,
            coords: vec![BigRational::zero(); (p - 1) as usize],
        }
    }

    pub fn one(p: u64) -> CycRat {
        let mut c = CycRat::zero(p);
        c.coords[0] = BigRational::one();
        c
    }

    pub fn from_int(p: u64, n: i128) -> CycRat {
        let mut c = CycRat::zero(p);
        c.coords[0] = BigRational::from(BigInt::from(n));
        c
    }

    pub fn from_cyc_int(c: &CycInt) -> CycRat {
        CycRat {
            p: c.p,
            coords: c
                .coords
                .iter()
                .map(|&a| BigRational::from(BigInt::from(a)))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &CycRat) -> CycRat {
        CycRat {
            p: self.p,
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, o: &CycRat) -> CycRat {
        CycRat {
            p: self.p,
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> CycRat {
        CycRat {
            p: self.p,
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> CycRat {
        CycRat {
            p: self.p,
            coords: self.coords.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul(&self, o: &CycRat) -> CycRat {
        let n = (self.p - 1) as usize;
        let mut by_exp = vec![BigRational::zero(); self.p as usize];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coords.iter().enumerate() {
                let k = (i + j) % self.p as usize;
                by_exp[k] = &by_exp[k] + a * b;
            }
        }
        let top = by_exp[n].clone();
        let coords = by_exp[..n].iter().map(|c| c - &top).collect();
        CycRat { p: self.p, coords }
    }

    /// Multiplicative inverse by solving the (p-1)x(p-1) linear system
    /// self * x = 1 over Q.
    pub fn inv(&self) -> Result<CycRat> {
        if self.is_zero() {
            return Err(Error::Spec("division by zero in Q(zeta_p)".into()));
        }
        let n = (self.p - 1) as usize;
        // columns: self * zeta^j expressed over the basis
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let zj = CycRat::from_cyc_int(&CycInt::zeta_pow(self.p, j as i64));
            cols.push(self.mul(&zj).coords);
        }
        let a: Vec<Vec<BigRational>> = (0..n)
            .map(|r| (0..n).map(|c| cols[c][r].clone()).collect())
            .collect();
        let mut b = vec![BigRational::zero(); n];
        b[0] = BigRational::one();
        let x = crate::linalg::solve(&a, &b)
            .ok_or_else(|| Error::Spec("cyclotomic inverse system is singular".into()))?;
        Ok(CycRat {
            p: self.p,
            coords: x,
        })
    }

    pub fn div(&self, o: &CycRat) -> Result<CycRat> {
        Ok(self.mul(&o.inv()?))
    }

    /// Least common denominator of the coordinates.
    pub fn denominator(&self) -> BigInt {
        let mut d = BigInt::one();
        for c in &self.coords {
            let cd = c.denom().abs();
            d = num_integer::lcm(d, cd);
        }
        d
    }
}
