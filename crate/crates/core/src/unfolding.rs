//! The combinatorial side of the unfolding: the polynomial G in N = sum d_i
//! variables, the shift permutation P, fixed-point sets of sigma^{-b} o Frob,
//! torus character sums against lattice membership, and exterior-power traces
//! of P.

use crate::error::{Error, Result};
use crate::fields::{Elem as FieldElem, Embedding, FieldDesc, TowerDesc};
use crate::laurent::LaurentPoly;
use crate::linalg;

/// The shape (d_1, ..., d_n) of a partial sum; variables are indexed by pairs
/// (i, j) with 1 <= i <= n and j in Z/d_i, flattened block by block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnfoldSpec {
    pub d: Vec<u32>,
}

impl UnfoldSpec {
    pub fn new(d: Vec<u32>) -> Result<UnfoldSpec> {
        if d.is_empty() || d.iter().any(|&di| di == 0) {
            return Err(Error::Spec("d must be a nonempty vector of positive integers".into()));
        }
        Ok(UnfoldSpec { d })
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// N = sum d_i
    pub fn big_n(&self) -> usize {
        self.d.iter().map(|&x| x as usize).sum()
    }

    /// d = lcm(d_1, ..., d_n)
    pub fn lcm(&self) -> u64 {
        self.d
            .iter()
            .fold(1u64, |acc, &x| num_integer::lcm(acc, x as u64))
    }

    pub fn flat(&self, i: usize, j: u32) -> usize {
        debug_assert!(i < self.n());
        let base: usize = self.d[..i].iter().map(|&x| x as usize).sum();
        base + (j % self.d[i]) as usize
    }

    /// inverse of `flat`
    pub fn var_of(&self, mut idx: usize) -> (usize, u32) {
        for (i, &di) in self.d.iter().enumerate() {
            if idx < di as usize {
                return (i, idx as u32);
            }
            idx -= di as usize;
        }
        panic!("flat index out of range");
    }

    /// exponent vector in Z^N for the term x^u of f placed at shift l
    pub fn place(&self, u: &[i64], l: u32) -> Vec<i64> {
        let mut v = vec![0i64; self.big_n()];
        for (i, &ui) in u.iter().enumerate() {
            if ui != 0 {
                v[self.flat(i, l % self.d[i])] += ui;
            }
        }
        v
    }
}

/// The permutation matrix P with (Pv)_{i,j} = v_{i,(j-1) mod d_i}, stored as
/// an index permutation. P is block diagonal with cyclic blocks.
#[derive(Debug, Clone)]
pub struct PermMatrix {
    spec: UnfoldSpec,
}

impl PermMatrix {
    pub fn new(spec: &UnfoldSpec) -> PermMatrix {
        PermMatrix { spec: spec.clone() }
    }

    /// P^power applied to an exponent vector; power may be negative.
    pub fn act(&self, u: &[i64], power: i64) -> Vec<i64> {
        let spec = &self.spec;
        let mut out = vec![0i64; spec.big_n()];
        for i in 0..spec.n() {
            let di = spec.d[i] as i64;
            for j in 0..spec.d[i] {
                // (P^power v)_{i,j} = v_{i, (j - power) mod d_i}
                let src = ((j as i64 - power) % di + di) % di;
                out[spec.flat(i, j)] = u[spec.flat(i, src as u32)];
            }
        }
        out
    }

    /// P^power as an explicit 0/1 matrix.
    pub fn matrix(&self, power: i64) -> Vec<Vec<i64>> {
        let n = self.spec.big_n();
        let mut m = vec![vec![0i64; n]; n];
        for c in 0..n {
            let mut u = vec![0i64; n];
            u[c] = 1;
            let v = self.act(&u, power);
            for (r, &x) in v.iter().enumerate() {
                if x != 0 {
                    m[r][c] = 1;
                }
            }
        }
        m
    }

    /// cycle notation of P (indices are flat variable positions)
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.spec.big_n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut c = vec![start];
            seen[start] = true;
            // follow the image of the basis vector
            let mut cur = start;
            loop {
                let mut u = vec![0i64; n];
                u[cur] = 1;
                let v = self.act(&u, 1);
                let next = v.iter().position(|&x| x != 0).unwrap();
                if next == start {
                    break;
                }
                seen[next] = true;
                c.push(next);
                cur = next;
            }
            if c.len() > 1 {
                out.push(c);
            }
        }
        out
    }
}

/// Unfold f into G(y) = sum_l f(y_{1, l mod d_1}, ...), merging like terms in
/// the coefficient field.
pub fn unfold(
    f: &LaurentPoly<FieldElem>,
    spec: &UnfoldSpec,
    field: &FieldDesc,
) -> Result<LaurentPoly<FieldElem>> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    assert_eq!(f.nvars, spec.n());
    let mut g = LaurentPoly::new(spec.big_n());
    for l in 0..spec.lcm() as u32 {
        for (u, c) in &f.terms {
            g.add_term(
                spec.place(u, l),
                c.clone(),
                |a, b| field.add(a, b),
                |a| field.is_zero(a),
            );
        }
    }
    Ok(g)
}

/// The unmerged (shift, monomial) factor list of the unfolding: one entry per
/// pair (l, u in supp f). This is the index set of the theta-product defining
/// F, and its exponent set always contains the support of the merged G.
pub fn unfold_factors(
    f: &LaurentPoly<FieldElem>,
    spec: &UnfoldSpec,
) -> Vec<(FieldElem, Vec<i64>)> {
    let mut out = Vec::new();
    for l in 0..spec.lcm() as u32 {
        for (u, c) in &f.terms {
            out.push((c.clone(), spec.place(u, l)));
        }
    }
    out
}

/// Both routes to det(tI - P^b): the block product of t^{d_i} - 1 and the
/// Faddeev-LeVerrier characteristic polynomial of the explicit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharPolyCheck {
    /// coefficients ascending in t
    pub product_formula: Vec<i128>,
    pub from_matrix: Vec<i128>,
}

pub fn char_poly_pb(spec: &UnfoldSpec, b: i64) -> Result<CharPolyCheck> {
    let d = spec.lcm();
    if num_integer::gcd(b.unsigned_abs(), d) != 1 {
        return Err(Error::NotCoprime { b, d });
    }
    let mut prod = vec![1i128];
    for &di in &spec.d {
        let mut f = vec![0i128; di as usize + 1];
        f[0] = -1;
        f[di as usize] = 1;
        prod = linalg::poly_mul_i128(&prod, &f);
    }
    let pm = PermMatrix::new(spec);
    let m = pm.matrix(b);
    let m128: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    // char_poly returns c_k with det(tI - A) = sum c_k t^{n-k}; flip to ascending
    let desc = linalg::char_poly(&m128);
    let n = spec.big_n();
    let mut asc = vec![0i128; n + 1];
    for (k, &c) in desc.iter().enumerate() {
        asc[n - k] = c;
    }
    Ok(CharPolyCheck {
        product_formula: prod,
        from_matrix: asc,
    })
}

/// Tr(wedge^m P^b) for m = 0..N, read off the characteristic polynomial:
/// det(tI - A) = sum_m (-1)^m Tr(wedge^m A) t^{N-m}.
pub fn exterior_traces(spec: &UnfoldSpec, b: i64) -> Result<Vec<i128>> {
    let cp = char_poly_pb(spec, b)?;
    assert_eq!(cp.product_formula, cp.from_matrix);
    let n = spec.big_n();
    Ok((0..=n)
        .map(|m| {
            let c = cp.from_matrix[n - m]; // coefficient of t^{N-m}
            if m % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect())
}

/// The fixed points of sigma^{-b} o (q^k-power Frobenius) on the N-torus,
/// with block-i coordinates stored in F_{q^{k d_i}}.
#[derive(Debug, Clone)]
pub struct FixedPointSet {
    pub spec: UnfoldSpec,
    pub k: u32,
    pub b: i64,
    /// one field per block i
    pub block_fields: Vec<FieldDesc>,
    /// each point is a flat vector of N coordinates; coordinate (i,j) lives
    /// in block_fields[i]
    pub points: Vec<Vec<FieldElem>>,
}

/// Enumerate W_k^{(b)} through the bijection rho^{-1}: choose the zeroth
/// coordinates freely and fill the rest with y_{i, mb mod d_i} = y_{i,0}^{q^{mk}}.
/// Every constructed point is checked against the defining recurrence
/// y_{i,j}^{q^k} = y_{i,(j+b) mod d_i}.
pub fn fixed_points(
    spec: &UnfoldSpec,
    tower: &mut TowerDesc,
    k: u32,
    b: i64,
    cap: u128,
) -> Result<FixedPointSet> {
    let d = spec.lcm();
    if num_integer::gcd(b.unsigned_abs(), d) != 1 {
        return Err(Error::NotCoprime { b, d });
    }
    let q = tower.base.size();
    let mut total: u128 = 1;
    let mut block_fields = Vec::new();
    for &di in &spec.d {
        let (f, _) = tower.level((k * di) as usize)?.clone();
        total = total
            .checked_mul(f.size() - 1)
            .ok_or(Error::CapExceeded { size: u128::MAX, cap })?;
        if total > cap {
            return Err(Error::CapExceeded { size: total, cap });
        }
        block_fields.push(f);
    }
    let qk = q.pow(k);
    // per-block unit lists
    let mut units: Vec<Vec<FieldElem>> = Vec::new();
    for f in &block_fields {
        units.push(f.enumerate_units(cap)?.collect());
    }
    let n = spec.n();
    let mut points = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; n];
    loop {
        let mut coords: Vec<FieldElem> = vec![Vec::new(); spec.big_n()];
        for i in 0..n {
            let f = &block_fields[i];
            let di = spec.d[i] as i64;
            let z = &units[i][idx[i]];
            coords[spec.flat(i, 0)] = z.clone();
            let mut cur = z.clone();
            for m in 1..spec.d[i] as i64 {
                cur = f.pow(&cur, qk);
                let j = ((m * b) % di + di) % di;
                coords[spec.flat(i, j as u32)] = cur.clone();
            }
            // defining recurrence on every block coordinate
            for j in 0..spec.d[i] {
                let lhs = f.pow(&coords[spec.flat(i, j)], qk);
                let jb = ((j as i64 + b) % di + di) % di;
                debug_assert_eq!(lhs, coords[spec.flat(i, jb as u32)]);
                if lhs != coords[spec.flat(i, jb as u32)] {
                    return Err(Error::Spec("fixed-point recurrence failed".into()));
                }
            }
        }
        points.push(coords);
        // odometer
        let mut carry = true;
        for i in (0..n).rev() {
            if !carry {
                break;
            }
            idx[i] += 1;
            if idx[i] < units[i].len() {
                carry = false;
            } else {
                idx[i] = 0;
            }
        }
        if carry {
            break;
        }
    }
    debug_assert_eq!(points.len() as u128, total);
    Ok(FixedPointSet {
        spec: spec.clone(),
        k,
        b,
        block_fields,
        points,
    })
}

impl FixedPointSet {
    /// Embed every point into the common extension F_{q^{kd}}; returns the
    /// big field, the embeddings (one per block), and the embedded points.
    pub fn embed_common(
        &self,
        tower: &mut TowerDesc,
        scan_cap: u128,
    ) -> Result<(FieldDesc, Vec<Embedding>, Vec<Vec<FieldElem>>)> {
        let d = self.spec.lcm();
        let (big, _) = tower.level((self.k as u64 * d) as usize)?.clone();
        let mut embs = Vec::new();
        for f in &self.block_fields {
            embs.push(Embedding::find(f, &big, scan_cap)?);
        }
        let mut out = Vec::with_capacity(self.points.len());
        for pt in &self.points {
            let mut v = Vec::with_capacity(pt.len());
            for (t, c) in pt.iter().enumerate() {
                let (i, _) = self.spec.var_of(t);
                v.push(embs[i].apply(&big, c));
            }
            out.push(v);
        }
        Ok((big, embs, out))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusSumVerdict {
    /// sum equals |W| (as an element of the common field)
    Full,
    Zero,
}

#[derive(Debug, Clone)]
pub struct CharSumCheck {
    pub torus: TorusSumVerdict,
    pub lattice_member: bool,
}

/// Compute sum over W_k^{(b)} of y^u exactly in F_{q^{kd}} and, independently,
/// decide membership u in (q^k P^{-b} - I) Z^N by exact rational solving. The
/// two verdicts must agree by character orthogonality.
pub fn character_sum_check(
    fps: &FixedPointSet,
    tower: &mut TowerDesc,
    u: &[i64],
    scan_cap: u128,
) -> Result<CharSumCheck> {
    let spec = &fps.spec;
    assert_eq!(u.len(), spec.big_n());
    let (big, _, embedded) = fps.embed_common(tower, scan_cap)?;
    let mut sum = big.zero();
    for pt in &embedded {
        let mut term = big.one();
        for (t, &e) in u.iter().enumerate() {
            if e != 0 {
                term = big.mul(&term, &big.pow_i64(&pt[t], e)?);
            }
        }
        sum = big.add(&sum, &term);
    }
    let w_mod_p = (fps.points.len() as u64) % big.p();
    let torus = if sum == big.from_prime(w_mod_p) {
        TorusSumVerdict::Full
    } else if big.is_zero(&sum) {
        TorusSumVerdict::Zero
    } else {
        return Err(Error::Spec(
            "torus character sum is neither full nor zero".into(),
        ));
    };
    // lattice side: solve (q^k P^{-b} - I) x = u over Q, then check integrality
    let q = tower.base.size();
    let qk = q.pow(fps.k);
    let pm = PermMatrix::new(spec);
    let pinv = pm.matrix(-fps.b);
    let n = spec.big_n();
    let a: Vec<Vec<_>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let v = qk as i64 * pinv[r][c] - if r == c { 1 } else { 0 };
                    linalg::big_rat(v, 1)
                })
                .collect()
        })
        .collect();
    let rhs: Vec<_> = u.iter().map(|&x| linalg::big_rat(x, 1)).collect();
    let lattice_member = match linalg::solve(&a, &rhs) {
        Some(x) => x.iter().all(linalg::is_integral),
        None => false,
    };
    Ok(CharSumCheck {
        torus,
        lattice_member,
    })
}

/// A certificate of d-degeneracy: a face of the Newton polytope avoiding the
/// origin and a torus point killing all logarithmic partials of G restricted
/// to that face.
#[derive(Debug, Clone)]
pub struct DegeneracyWitness {
    /// exponent vectors of G lying on the face
    pub face_support: Vec<Vec<i64>>,
    /// extension level m (the point lives in F_{q^m})
    pub level: usize,
    pub point: Vec<FieldElem>,
}

/// Search for a degeneracy witness over the faces of Delta(G) not containing
/// the origin and torus points with coordinates in F_{q^m}, m <= m_max.
/// Absence of a witness proves nothing.
pub fn degeneracy_witness(
    g: &LaurentPoly<FieldElem>,
    poly: &crate::polytope::Polytope,
    tower: &mut TowerDesc,
    m_max: usize,
    cap: u128,
) -> Result<Option<DegeneracyWitness>> {
    let n = g.nvars;
    let faces = poly.faces_not_containing_origin()?;
    for m in 1..=m_max {
        let (field, _) = tower.level(m)?.clone();
        let emb = Embedding::find(&tower.base, &field, cap)?;
        let torus_size = (field.size() - 1).pow(n as u32);
        if torus_size > cap {
            return Err(Error::CapExceeded {
                size: torus_size,
                cap,
            });
        }
        let units: Vec<FieldElem> = field.enumerate_units(cap)?.collect();
        for face in &faces {
            // terms of G supported on the face
            let face_exps: Vec<Vec<i64>> = face
                .iter()
                .map(|&i| poly.points[i].iter().map(|&x| x as i64).collect())
                .filter(|e: &Vec<i64>| g.terms.contains_key(e))
                .collect();
            if face_exps.is_empty() {
                continue;
            }
            let coeffs: Vec<FieldElem> = face_exps
                .iter()
                .map(|e| emb.apply(&field, &g.terms[e]))
                .collect();
            // exhaustive torus search
            let mut idx = vec![0usize; n];
            'point: loop {
                // term values at this point
                let mut vals = Vec::with_capacity(face_exps.len());
                for (e, c) in face_exps.iter().zip(&coeffs) {
                    let mut v = c.clone();
                    for (t, &et) in e.iter().enumerate() {
                        if et != 0 {
                            v = field.mul(&v, &field.pow_i64(&units[idx[t]], et)?);
                        }
                    }
                    vals.push(v);
                }
                let mut all_zero = true;
                for t in 0..n {
                    let mut partial = field.zero();
                    for (e, v) in face_exps.iter().zip(&vals) {
                        let c = e[t].rem_euclid(field.p() as i64) as u64;
                        if c != 0 {
                            partial = field.add(&partial, &field.scalar_mul(c, v));
                        }
                    }
                    if !field.is_zero(&partial) {
                        all_zero = false;
                        break;
                    }
                }
                if all_zero {
                    return Ok(Some(DegeneracyWitness {
                        face_support: face_exps,
                        level: m,
                        point: idx.iter().map(|&i| units[i].clone()).collect(),
                    }));
                }
                // odometer
                let mut carry = true;
                for t in (0..n).rev() {
                    if !carry {
                        break;
                    }
                    idx[t] += 1;
                    if idx[t] < units.len() {
                        carry = false;
                    } else {
                        idx[t] = 0;
                    }
                }
                if carry {
                    break 'point;
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_field;
    use crate::polytope::newton_polytope;

    fn spec12() -> UnfoldSpec {
        UnfoldSpec::new(vec![1, 2]).unwrap()
    }

    fn paper_f(field: &FieldDesc) -> LaurentPoly<FieldElem> {
        // f = x1 x2 + x1 x2^{-1}
        LaurentPoly::from_terms(
            2,
            [
                (vec![1i64, 1], field.one()),
                (vec![1, -1], field.one()),
            ],
        )
    }

    #[test]
    fn unfold_paper_example() {
        let f3 = make_field(3, 1, None).unwrap();
        let f = paper_f(&f3);
        let spec = spec12();
        let g = unfold(&f, &spec, &f3).unwrap();
        // G = y10 (y20 + y20^-1 + y21 + y21^-1)
        let expect: Vec<Vec<i64>> = vec![
            vec![1, -1, 0],
            vec![1, 0, -1],
            vec![1, 0, 1],
            vec![1, 1, 0],
        ];
        let got: Vec<Vec<i64>> = g.support().cloned().collect();
        assert_eq!(got, expect);
        for c in g.terms.values() {
            assert_eq!(c, &f3.one());
        }
        // d = (1,...,1) leaves f unchanged
        let spec11 = UnfoldSpec::new(vec![1, 1]).unwrap();
        let g11 = unfold(&f, &spec11, &f3).unwrap();
        assert_eq!(g11.terms, f.terms);
        // f = x1 with d = (2): two shifted copies
        let fx = LaurentPoly::from_terms(1, [(vec![1i64], f3.one())]);
        let spec2 = UnfoldSpec::new(vec![2]).unwrap();
        let g2 = unfold(&fx, &spec2, &f3).unwrap();
        let got: Vec<Vec<i64>> = g2.support().cloned().collect();
        assert_eq!(got, vec![vec![0, 1], vec![1, 0]]);
        // zero polynomial is rejected
        assert!(matches!(
            unfold(&LaurentPoly::new(2), &spec, &f3),
            Err(Error::ZeroPolynomial)
        ));
    }

    #[test]
    fn sigma_invariance_of_g() {
        let f3 = make_field(3, 1, None).unwrap();
        let spec = spec12();
        let g = unfold(&paper_f(&f3), &spec, &f3).unwrap();
        let pm = PermMatrix::new(&spec);
        let g_sigma = g.map_exponents(|e| pm.act(e, 1));
        assert_eq!(g.terms, g_sigma.terms);
    }

    #[test]
    fn sigma_action() {
        let spec = spec12();
        let pm = PermMatrix::new(&spec);
        let u = vec![7i64, 4, 9];
        assert_eq!(pm.act(&u, 0), u);
        // d = (1,2): block shift swaps the two d2 coordinates
        assert_eq!(pm.act(&u, 1), vec![7, 9, 4]);
        // order lcm(d) = 2
        assert_eq!(pm.act(&u, 2), u);
        assert_eq!(pm.act(&pm.act(&u, 1), -1), u);
        let cycles = PermMatrix::new(&spec).cycles();
        assert_eq!(cycles, vec![vec![1, 2]]);
    }

    #[test]
    fn char_poly_routes_match() {
        let spec = spec12();
        let cp = char_poly_pb(&spec, 1).unwrap();
        // (t-1)(t^2-1) = t^3 - t^2 - t + 1
        assert_eq!(cp.product_formula, vec![1, -1, -1, 1]);
        assert_eq!(cp.from_matrix, cp.product_formula);
        // evaluation at t = 3: det(3I - P) = 2 * 8 = 16
        let v: i128 = cp
            .product_formula
            .iter()
            .enumerate()
            .map(|(i, &c)| c * 3i128.pow(i as u32))
            .sum();
        assert_eq!(v, 16);
        // b not coprime to d
        assert!(matches!(
            char_poly_pb(&spec, 2),
            Err(Error::NotCoprime { .. })
        ));
    }

    #[test]
    fn exterior_trace_values() {
        let spec = spec12();
        let tr = exterior_traces(&spec, 1).unwrap();
        assert_eq!(tr, vec![1, 1, -1, -1]);
        // alternating-sum identity sum (-1)^m q^{k(N-m)} Tr(wedge^m P) = det(q^k I - P)
        for (q, kmax) in [(3u128, 3u32), (2, 3)] {
            for k in 1..=kmax {
                let qk = q.pow(k) as i128;
                let lhs: i128 = tr
                    .iter()
                    .enumerate()
                    .map(|(m, &t)| {
                        let sign = if m % 2 == 0 { 1 } else { -1 };
                        sign * qk.pow((3 - m) as u32) * t
                    })
                    .sum();
                let rhs = (qk - 1) * (qk * qk - 1);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn fixed_points_count_and_recurrence() {
        let f3 = make_field(3, 1, None).unwrap();
        let mut tower = TowerDesc::new(f3, 1 << 22);
        let spec = spec12();
        let fps = fixed_points(&spec, &mut tower, 1, 1, 1 << 22).unwrap();
        assert_eq!(fps.points.len(), 16); // (3-1)(9-1)
        // rho is injective: zeroth coordinates enumerate the product exactly once
        let mut seen = std::collections::BTreeSet::new();
        for pt in &fps.points {
            let key = (
                fps.block_fields[0].index_of(&pt[spec.flat(0, 0)]),
                fps.block_fields[1].index_of(&pt[spec.flat(1, 0)]),
            );
            assert!(seen.insert(key));
        }
        // d = (1,...,1): W_k = (F_{q^k}^*)^n
        let spec11 = UnfoldSpec::new(vec![1, 1]).unwrap();
        let f3b = make_field(3, 1, None).unwrap();
        let mut tower2 = TowerDesc::new(f3b, 1 << 22);
        let fps2 = fixed_points(&spec11, &mut tower2, 2, 1, 1 << 22).unwrap();
        assert_eq!(fps2.points.len(), 64); // (9-1)^2
    }

    #[test]
    fn character_sums_match_lattice() {
        let f3 = make_field(3, 1, None).unwrap();
        let mut tower = TowerDesc::new(f3, 1 << 22);
        let spec = spec12();
        let fps = fixed_points(&spec, &mut tower, 1, 1, 1 << 22).unwrap();
        // u = 0: full and trivially in the lattice
        let c = character_sum_check(&fps, &mut tower, &[0, 0, 0], 1 << 22).unwrap();
        assert_eq!(c.torus, TorusSumVerdict::Full);
        assert!(c.lattice_member);
        // u = (q P^{-1} - I) e1 constructed explicitly
        let pm = PermMatrix::new(&spec);
        let mut e1 = vec![0i64; 3];
        e1[0] = 1;
        let u: Vec<i64> = pm
            .act(&e1, -1)
            .iter()
            .zip(&e1)
            .map(|(&a, &b)| 3 * a - b)
            .collect();
        let c = character_sum_check(&fps, &mut tower, &u, 1 << 22).unwrap();
        assert_eq!(c.torus, TorusSumVerdict::Full);
        assert!(c.lattice_member);
        // u = e1: zero and not in the lattice
        let c = character_sum_check(&fps, &mut tower, &e1, 1 << 22).unwrap();
        assert_eq!(c.torus, TorusSumVerdict::Zero);
        assert!(!c.lattice_member);
    }

    #[test]
    fn degeneracy_paper_example() {
        let f3 = make_field(3, 1, None).unwrap();
        let spec = spec12();
        let g = unfold(&paper_f(&f3), &spec, &f3).unwrap();
        let sup: Vec<Vec<i64>> = g.support().cloned().collect();
        let poly = newton_polytope(3, &sup).unwrap();
        let mut tower = TowerDesc::new(f3, 1 << 22);
        let w = degeneracy_witness(&g, &poly, &mut tower, 2, 1 << 22)
            .unwrap()
            .expect("the unfolded paper example is degenerate");
        // found on the base face carrying all four support vectors
        assert_eq!(w.face_support.len(), 4);
        assert_eq!(w.level, 1);
    }

    #[test]
    fn degeneracy_negative_cases() {
        let f3 = make_field(3, 1, None).unwrap();
        // single monomial G = y_{1,0}: no witness
        let g = LaurentPoly::from_terms(1, [(vec![1i64], f3.one())]);
        let poly = newton_polytope(1, &[vec![1]]).unwrap();
        let mut tower = TowerDesc::new(f3.clone(), 1 << 22);
        assert!(degeneracy_witness(&g, &poly, &mut tower, 2, 1 << 22)
            .unwrap()
            .is_none());
        // diagonal x1^2 + x2^2 over F_3 (p does not divide 2): no witness
        let g = LaurentPoly::from_terms(
            2,
            [(vec![2i64, 0], f3.one()), (vec![0i64, 2], f3.one())],
        );
        let poly = newton_polytope(2, &[vec![2, 0], vec![0, 2]]).unwrap();
        let mut tower = TowerDesc::new(f3, 1 << 22);
        assert!(degeneracy_witness(&g, &poly, &mut tower, 2, 1 << 22)
            .unwrap()
            .is_none());
    }
}
