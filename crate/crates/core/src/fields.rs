//! Exact arithmetic in F_q = F_{p^a} and its extensions F_{q^m}.
//!
//! Elements are polynomial residues: little-endian coefficient vectors of
//! length `deg` with entries in [0, p). Fields are built over F_p with a monic
//! irreducible modulus; extensions of F_q are realized as degree a*m
//! extensions of F_p together with an explicit embedding of F_q.

use crate::error::{Error, Result};

pub type Elem = Vec<u64>;

/// Default per-variable enumeration cap: 2^27 elements.
pub const DEFAULT_ENUM_CAP: u128 = 1 << 27;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDesc {
    p: u64,
    deg: usize,
    /// monic modulus, little-endian, length deg+1
    modulus: Vec<u64>,
    /// absolute traces of the power basis: tr_basis[j] = Tr_{F/F_p}(x^j)
    tr_basis: Vec<u64>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ---- polynomial arithmetic over F_p (little-endian, used only internally) ----

fn poly_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p);
    while r.len() > dm {
        let k = r.len() - 1 - dm;
        let f = (r[r.len() - 1] * lead_inv) % p;
        for i in 0..=dm {
            let idx = k + i;
            r[idx] = (r[idx] + p - f * m[i] % p) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_rem(&prod, m, p)
}

fn poly_powmod(base: &[u64], mut e: u128, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, m, p);
        }
        b = poly_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(&x, &pad_monic(&y, p), p);
        x = y;
        y = r;
    }
    x
}

// scale to monic so poly_rem can use it as a modulus
fn pad_monic(a: &[u64], p: u64) -> Vec<u64> {
    let mut m = a.to_vec();
    poly_trim(&mut m);
    let inv = mod_inv(m[m.len() - 1], p);
    for c in m.iter_mut() {
        *c = *c * inv % p;
    }
    m
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p
    let mut t: i128 = 0;
    let mut new_t: i128 = 1;
    let mut r: i128 = p as i128;
    let mut new_r: i128 = (a % p) as i128;
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    (((t % p as i128) + p as i128) % p as i128) as u64
}

fn is_irreducible(modulus: &[u64], p: u64) -> bool {
    let a = modulus.len() - 1;
    if a == 0 {
        return false;
    }
    let x = vec![0u64, 1];
    // x^{p^a} == x (mod modulus)
    let mut xp = x.clone();
    for _ in 0..a {
        xp = poly_powmod(&xp, p as u128, modulus, p);
    }
    let mut diff = xp.clone();
    diff.resize(diff.len().max(2), 0);
    diff[1] = (diff[1] + p - 1) % p;
    poly_trim(&mut diff);
    if !diff.is_empty() {
        return false;
    }
    // gcd(x^{p^{a/r}} - x, modulus) == 1 for every prime r | a
    let mut primes = Vec::new();
    let mut n = a;
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            primes.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    for r in primes {
        let mut xq = x.clone();
        for _ in 0..(a / r) {
            xq = poly_powmod(&xq, p as u128, modulus, p);
        }
        let mut diff = xq.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        poly_trim(&mut diff);
        if diff.is_empty() {
            return false; // x^{p^{a/r}} = x => splits into small factors
        }
        let g = poly_gcd(modulus, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Deterministic default modulus: smallest monic irreducible of degree a in
/// the base-p counter order on the non-leading coefficients.
fn default_modulus(p: u64, a: usize) -> Vec<u64> {
    if a == 1 {
        return vec![0, 1]; // x
    }
    let total = (p as u128).pow(a as u32);
    for code in 0..total {
        let mut m = Vec::with_capacity(a + 1);
        let mut c = code;
        for _ in 0..a {
            m.push((c % p as u128) as u64);
            c /= p as u128;
        }
        m.push(1);
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

/// Build F_{p^a}. With `modulus = None` a deterministic irreducible is chosen.
pub fn make_field(p: u64, a: usize, modulus: Option<&[u64]>) -> Result<FieldDesc> {
    if !is_prime(p) {
        return Err(Error::NonPrime(p));
    }
    if a == 0 {
        return Err(Error::Spec("extension degree must be >= 1".into()));
    }
    let m = match modulus {
        Some(m) => {
            let mut m: Vec<u64> = m.iter().map(|&c| c % p).collect();
            poly_trim(&mut m);
            if m.len() != a + 1 {
                return Err(Error::DegreeMismatch {
                    expected: a + 1,
                    got: m.len(),
                });
            }
            if m[a] != 1 {
                return Err(Error::Spec("modulus must be monic".into()));
            }
            if a > 1 && !is_irreducible(&m, p) {
                return Err(Error::ReducibleModulus { p });
            }
            m
        }
        None => default_modulus(p, a),
    };
    let mut fd = FieldDesc {
        p,
        deg: a,
        modulus: m,
        tr_basis: Vec::new(),
    };
    fd.tr_basis = fd.compute_tr_basis();
    Ok(fd)
}

impl FieldDesc {
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn deg(&self) -> usize {
        self.deg
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn size(&self) -> u128 {
        (self.p as u128).pow(self.deg as u32)
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.deg]
    }
    pub fn one(&self) -> Elem {
        let mut e = self.zero();
        e[0] = 1;
        e
    }
    pub fn from_prime(&self, c: u64) -> Elem {
        let mut e = self.zero();
        e[0] = c % self.p;
        e
    }
    /// generator x of the polynomial-residue representation
    pub fn gen(&self) -> Elem {
        let mut e = self.zero();
        if self.deg > 1 {
            e[1] = 1;
        } else {
            // F_p: x reduces to the root of the degree-1 modulus
            e[0] = (self.p - self.modulus[0]) % self.p;
        }
        e
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let s = x + y;
                if s >= self.p {
                    s - self.p
                } else {
                    s
                }
            })
            .collect()
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x + self.p - y) % self.p)
            .collect()
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        a.iter().map(|&x| (self.p - x) % self.p).collect()
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let mut prod = vec![0u64; 2 * self.deg];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        let mut r = poly_rem(&prod, &self.modulus, self.p);
        r.resize(self.deg, 0);
        r
    }

    pub fn scalar_mul(&self, c: u64, a: &Elem) -> Elem {
        let c = c % self.p;
        a.iter().map(|&x| x * c % self.p).collect()
    }

    pub fn pow(&self, a: &Elem, e: u128) -> Elem {
        let mut acc = self.one();
        let mut b = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    /// a^n for possibly negative n (inverts first when n < 0)
    pub fn pow_i64(&self, a: &Elem, e: i64) -> Result<Elem> {
        if e >= 0 {
            Ok(self.pow(a, e as u128))
        } else {
            let inv = self.inv(a)?;
            Ok(self.pow(&inv, (-(e as i128)) as u128))
        }
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem> {
        if self.is_zero(a) {
            return Err(Error::Spec("division by zero field element".into()));
        }
        Ok(self.pow(a, self.size() - 2))
    }

    pub fn frobenius(&self, a: &Elem) -> Elem {
        self.pow(a, self.p as u128)
    }

    fn compute_tr_basis(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.deg);
        for j in 0..self.deg {
            let mut e = self.zero();
            e[j] = 1;
            let mut acc = e.clone();
            let mut cur = e;
            for _ in 1..self.deg {
                cur = self.frobenius(&cur);
                acc = self.add(&acc, &cur);
            }
            debug_assert!(acc[1..].iter().all(|&c| c == 0), "trace must land in F_p");
            out.push(acc[0]);
        }
        out
    }

    /// Tr_{F/F_p} as the precomputed linear form; lands in F_p.
    pub fn absolute_trace(&self, a: &Elem) -> u64 {
        let mut t = 0u64;
        for (c, &tb) in a.iter().zip(&self.tr_basis) {
            t = (t + c * tb) % self.p;
        }
        t
    }

    /// Tr_{F_{p^deg}/F_{p^s}}(a) = sum_{j < deg/s} a^{p^{s j}}; requires s | deg.
    /// Result is returned in this field's representation and is fixed by the
    /// p^s-power Frobenius.
    pub fn trace(&self, a: &Elem, s: usize) -> Result<Elem> {
        if s == 0 || self.deg % s != 0 {
            return Err(Error::NotASubfield { s, m: self.deg });
        }
        let steps = self.deg / s;
        let mut acc = a.clone();
        let mut cur = a.clone();
        for _ in 1..steps {
            for _ in 0..s {
                cur = self.frobenius(&cur);
            }
            acc = self.add(&acc, &cur);
        }
        Ok(acc)
    }

    /// Encode an element as an integer index in [0, p^deg) (base-p digits).
    pub fn index_of(&self, a: &Elem) -> u128 {
        let mut idx = 0u128;
        for &c in a.iter().rev() {
            idx = idx * self.p as u128 + c as u128;
        }
        idx
    }

    pub fn elem_from_index(&self, mut idx: u128) -> Elem {
        let mut e = self.zero();
        for c in e.iter_mut() {
            *c = (idx % self.p as u128) as u64;
            idx /= self.p as u128;
        }
        e
    }

    /// All nonzero elements, in base-p counter order; errors if the field is
    /// larger than `cap`.
    pub fn enumerate_units(&self, cap: u128) -> Result<UnitIter<'_>> {
        if self.size() > cap {
            return Err(Error::CapExceeded {
                size: self.size(),
                cap,
            });
        }
        Ok(UnitIter {
            field: self,
            next: 1,
        })
    }
}

pub struct UnitIter<'a> {
    field: &'a FieldDesc,
    next: u128,
}

impl Iterator for UnitIter<'_> {
    type Item = Elem;
    fn next(&mut self) -> Option<Elem> {
        if self.next >= self.field.size() {
            return None;
        }
        let e = self.field.elem_from_index(self.next);
        self.next += 1;
        Some(e)
    }
}

/// An embedding F_{p^s} -> F_{p^m}, stored as the image of the small field's
/// generator. Found by deterministic root scan of the small modulus.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub gen_image: Elem,
    small_deg: usize,
}

impl Embedding {
    pub fn find(small: &FieldDesc, big: &FieldDesc, scan_cap: u128) -> Result<Embedding> {
        if small.p != big.p {
            return Err(Error::Spec("embedding requires equal characteristic".into()));
        }
        if big.deg % small.deg != 0 {
            return Err(Error::NotASubfield {
                s: small.deg,
                m: big.deg,
            });
        }
        if small.deg == 1 {
            // prime subfield embeds canonically; image of gen is its value
            let g = small.gen();
            return Ok(Embedding {
                gen_image: big.from_prime(g[0]),
                small_deg: 1,
            });
        }
        if big.size() > scan_cap {
            return Err(Error::CapExceeded {
                size: big.size(),
                cap: scan_cap,
            });
        }
        // first root of the small modulus in enumeration order
        let msmall = &small.modulus;
        let mut idx = 0u128;
        while idx < big.size() {
            let cand = big.elem_from_index(idx);
            // Horner with F_p coefficients
            let mut acc = big.zero();
            for &c in msmall.iter().rev() {
                acc = big.mul(&acc, &cand);
                acc[0] = (acc[0] + c) % big.p;
            }
            if big.is_zero(&acc) {
                return Ok(Embedding {
                    gen_image: cand,
                    small_deg: small.deg,
                });
            }
            idx += 1;
        }
        Err(Error::Spec("no root of subfield modulus found".into()))
    }

    pub fn apply(&self, big: &FieldDesc, elem: &Elem) -> Elem {
        debug_assert_eq!(elem.len(), self.small_deg);
        let mut acc = big.zero();
        for &c in elem.iter().rev() {
            acc = big.mul(&acc, &self.gen_image);
            acc[0] = (acc[0] + c) % big.p();
        }
        acc
    }
}

/// F_q together with the extension levels F_{q^m} needed by a computation,
/// each with an embedding of F_q.
#[derive(Debug, Clone)]
pub struct TowerDesc {
    pub base: FieldDesc,
    levels: std::collections::BTreeMap<usize, (FieldDesc, Embedding)>,
    scan_cap: u128,
}

impl TowerDesc {
    pub fn new(base: FieldDesc, scan_cap: u128) -> TowerDesc {
        TowerDesc {
            base,
            levels: Default::default(),
            scan_cap,
        }
    }

    /// Field F_{q^m} as a degree a*m extension of F_p, plus the embedding of
    /// F_q into it. Levels are constructed once and cached.
    pub fn level(&mut self, m: usize) -> Result<&(FieldDesc, Embedding)> {
        if !self.levels.contains_key(&m) {
            let big = make_field(self.base.p(), self.base.deg() * m, None)?;
            let emb = Embedding::find(&self.base, &big, self.scan_cap)?;
            self.levels.insert(m, (big, emb));
        }
        Ok(&self.levels[&m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_field_basic() {
        let f3 = make_field(3, 1, None).unwrap();
        assert_eq!(f3.modulus(), &[0, 1]);
        let f9 = make_field(3, 2, Some(&[1, 0, 1])).unwrap();
        assert_eq!(f9.size(), 9);
        assert!(matches!(make_field(4, 1, None), Err(Error::NonPrime(4))));
        // x^2 + 2x + 1 = (x+1)^2 is reducible mod 3
        assert!(make_field(3, 2, Some(&[1, 2, 1])).is_err());
    }

    #[test]
    fn default_modulus_is_deterministic_smallest() {
        let f9 = make_field(3, 2, None).unwrap();
        assert_eq!(f9.modulus(), &[1, 0, 1]); // x^2 + 1
        let f8 = make_field(2, 3, None).unwrap();
        assert_eq!(f8.modulus(), &[1, 1, 0, 1]); // x^3 + x + 1
    }

    #[test]
    fn traces() {
        let f9 = make_field(3, 2, Some(&[1, 0, 1])).unwrap();
        // Tr_{F_9/F_3}(1) = 2
        assert_eq!(f9.absolute_trace(&f9.one()), 2);
        // Tr_{F_3/F_3}(2) = 2
        let f3 = make_field(3, 1, None).unwrap();
        assert_eq!(f3.absolute_trace(&f3.from_prime(2)), 2);
        // g a root of x^2+1: Tr(g) = g + g^3 = 0
        assert_eq!(f9.absolute_trace(&f9.gen()), 0);
        // transitivity on all of F_81: Tr_{81/3} = Tr_{9/3} o Tr_{81/9}
        let f81 = make_field(3, 4, None).unwrap();
        let emb9 = Embedding::find(&f9, &f81, 1 << 20).unwrap();
        for e in f81.enumerate_units(1 << 20).unwrap() {
            let t_direct = f81.absolute_trace(&e);
            let t_mid = f81.trace(&e, 2).unwrap();
            // t_mid is fixed by x -> x^9, i.e. lies in the embedded F_9
            let mut fr2 = t_mid.clone();
            fr2 = f81.frobenius(&fr2);
            fr2 = f81.frobenius(&fr2);
            assert_eq!(fr2, t_mid);
            // pull back along the embedding by scanning F_9 (tiny)
            let mut found = None;
            for idx in 0..9u128 {
                let cand = f9.elem_from_index(idx);
                if emb9.apply(&f81, &cand) == t_mid {
                    found = Some(cand);
                    break;
                }
            }
            let t_two_step = f9.absolute_trace(&found.expect("trace lies in F_9"));
            assert_eq!(t_direct, t_two_step);
        }
    }

    #[test]
    fn unit_enumeration() {
        let f3 = make_field(3, 1, None).unwrap();
        let units: Vec<_> = f3.enumerate_units(1 << 10).unwrap().collect();
        assert_eq!(units, vec![vec![1], vec![2]]);
        let f9 = make_field(3, 2, None).unwrap();
        let units: Vec<_> = f9.enumerate_units(1 << 10).unwrap().collect();
        assert_eq!(units.len(), 8);
        let dedup: std::collections::BTreeSet<_> = units.iter().cloned().collect();
        assert_eq!(dedup.len(), 8);
        // cap exceeded
        let f3_13 = make_field(3, 13, None).unwrap();
        assert!(matches!(
            f3_13.enumerate_units(1_000_000),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn frobenius_fixes_exactly_prime_field() {
        for (p, a) in [(3u64, 2usize), (2, 3), (3, 3)] {
            let f = make_field(p, a, None).unwrap();
            let mut fixed = 0u64;
            for idx in 0..f.size() {
                let e = f.elem_from_index(idx);
                if f.frobenius(&e) == e {
                    fixed += 1;
                    assert!(e[1..].iter().all(|&c| c == 0));
                }
            }
            assert_eq!(fixed, p);
        }
    }

    #[test]
    fn embedding_is_multiplicative_and_unital() {
        let f9 = make_field(3, 2, None).unwrap();
        let f81 = make_field(3, 4, None).unwrap();
        let emb = Embedding::find(&f9, &f81, 1 << 20).unwrap();
        assert_eq!(emb.apply(&f81, &f9.one()), f81.one());
        let elems: Vec<_> = (0..9u128).map(|i| f9.elem_from_index(i)).collect();
        for x in &elems {
            // commutes with Frobenius
            assert_eq!(
                emb.apply(&f81, &f9.frobenius(x)),
                f81.pow(&emb.apply(&f81, x), 3)
            );
            for y in &elems {
                assert_eq!(
                    emb.apply(&f81, &f9.mul(x, y)),
                    f81.mul(&emb.apply(&f81, x), &emb.apply(&f81, y))
                );
            }
        }
    }

    #[test]
    fn tower_levels() {
        let f9 = make_field(3, 2, None).unwrap();
        let mut tower = TowerDesc::new(f9, 1 << 22);
        let (f81, emb) = tower.level(2).unwrap().clone();
        assert_eq!(f81.size(), 81);
        assert_eq!(emb.apply(&f81, &tower.base.one()), f81.one());
    }
}
