//! The A-hypergeometric unit root formula: coefficients A_v(Lambda) of
//! exp(gamma f_Lambda), balanced tuples, the series G_0(Lambda), the ratio
//! F(Lambda) = G_0(Lambda)/G_0(Lambda^p) as a truncated series, and its
//! specialization at the Teichmueller coefficients of f.

use crate::error::{Error, Result};
use crate::padics::{PadicCtx, RingDesc, RingElem};
use crate::unfolding::UnfoldSpec;
use num_rational::Ratio;
use std::collections::BTreeMap;

/// A truncated multivariate series in the parameters Lambda_u, u in supp f;
/// exponent keys follow the order of the support list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaSeries {
    pub nparams: usize,
    pub deg: u32,
    pub terms: BTreeMap<Vec<u32>, RingElem>,
}

impl LambdaSeries {
    pub fn one(ring: &RingDesc, nparams: usize, deg: u32) -> LambdaSeries {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; nparams], ring.one());
        LambdaSeries {
            nparams,
            deg,
            terms,
        }
    }

    pub fn constant_term(&self, ring: &RingDesc) -> RingElem {
        self.terms
            .get(&vec![0; self.nparams])
            .cloned()
            .unwrap_or_else(|| ring.zero())
    }

    /// Evaluate at unit arguments.
    pub fn evaluate(&self, ring: &RingDesc, args: &[RingElem]) -> RingElem {
        assert_eq!(args.len(), self.nparams);
        let mut acc = ring.zero();
        for (k, c) in &self.terms {
            let mut t = c.clone();
            for (u, &e) in args.iter().zip(k) {
                if e > 0 {
                    t = ring.mul(&t, &ring.pow(u, e as u128));
                }
            }
            acc = ring.add(&acc, &t);
        }
        acc
    }

    /// Substitute Lambda -> Lambda^p, truncating at the same total degree.
    pub fn dilate(&self, p: u64) -> LambdaSeries {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let total: u64 = k.iter().map(|&e| e as u64).sum();
            if total * p <= self.deg as u64 {
                terms.insert(k.iter().map(|&e| e * p as u32).collect(), c.clone());
            }
        }
        LambdaSeries {
            nparams: self.nparams,
            deg: self.deg,
            terms,
        }
    }

    pub fn mul(&self, ring: &RingDesc, other: &LambdaSeries) -> LambdaSeries {
        let deg = self.deg.min(other.deg);
        let mut terms: BTreeMap<Vec<u32>, RingElem> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            let da: u32 = ka.iter().sum();
            for (kb, cb) in &other.terms {
                let db: u32 = kb.iter().sum();
                if da + db > deg {
                    continue;
                }
                let k: Vec<u32> = ka.iter().zip(kb).map(|(&a, &b)| a + b).collect();
                let prod = ring.mul(ca, cb);
                match terms.get_mut(&k) {
                    Some(x) => *x = ring.add(x, &prod),
                    None => {
                        terms.insert(k, prod);
                    }
                }
            }
        }
        // only full-precision zeros may be dropped; a zero at reduced
        // precision still carries its error interval
        terms.retain(|_, c| !(ring.is_zero(c) && c.prec >= ring.prec()));
        LambdaSeries {
            nparams: self.nparams,
            deg,
            terms,
        }
    }

    /// Inverse of a series with unit constant term, by geometric summation of
    /// the degree >= 1 part.
    pub fn inv(&self, ring: &RingDesc) -> Result<LambdaSeries> {
        let c0 = self.constant_term(ring);
        let c0_inv = ring.inv(&c0)?;
        // normalized tail: 1 - series / c0
        let mut tail = LambdaSeries {
            nparams: self.nparams,
            deg: self.deg,
            terms: BTreeMap::new(),
        };
        for (k, c) in &self.terms {
            if k.iter().all(|&e| e == 0) {
                continue;
            }
            tail.terms.insert(k.clone(), ring.neg(&ring.mul(c, &c0_inv)));
        }
        let mut acc = LambdaSeries::one(ring, self.nparams, self.deg);
        let mut power = LambdaSeries::one(ring, self.nparams, self.deg);
        for _ in 0..self.deg {
            power = power.mul(ring, &tail);
            if power.terms.is_empty() {
                break;
            }
            for (k, c) in &power.terms {
                match acc.terms.get_mut(k) {
                    Some(x) => *x = ring.add(x, c),
                    None => {
                        acc.terms.insert(k.clone(), c.clone());
                    }
                }
            }
        }
        // scale by 1/c0
        for c in acc.terms.values_mut() {
            *c = ring.mul(c, &c0_inv);
        }
        Ok(acc)
    }

    /// smallest ord_p over coefficient differences (None = equal at precision)
    pub fn residual(&self, ring: &RingDesc, other: &LambdaSeries) -> Option<Ratio<i64>> {
        let mut worst: Option<Ratio<i64>> = None;
        let keys: std::collections::BTreeSet<_> =
            self.terms.keys().chain(other.terms.keys()).collect();
        for k in keys {
            let a = self.terms.get(k).cloned().unwrap_or_else(|| ring.zero());
            let b = other.terms.get(k).cloned().unwrap_or_else(|| ring.zero());
            if let Some(o) = ring.ord_p_diff(&a, &b) {
                worst = Some(match worst {
                    None => o,
                    Some(w) => w.min(o),
                });
            }
        }
        worst
    }
}

/// p-part and unit part of k! modulo the ring precision, for k = 0..=k_max.
fn factorials(ring: &RingDesc, k_max: u32) -> (Vec<u32>, Vec<RingElem>) {
    let mut vps = vec![0u32];
    let mut units = vec![ring.one()];
    for k in 1..=k_max {
        let mut kk = k as u64;
        let mut v = 0;
        while kk % ring.p() == 0 {
            kk /= ring.p();
            v += 1;
        }
        vps.push(vps[k as usize - 1] + v);
        units.push(ring.mul(&units[k as usize - 1], &ring.from_i128(kk as i128)));
    }
    (vps, units)
}

/// gamma^{sum k} / prod k_u! as a ring element with tracked precision loss.
fn profile_coefficient(
    ctx: &PadicCtx,
    vps: &[u32],
    units: &[RingElem],
    profile: &[u32],
) -> Result<RingElem> {
    let ring = &ctx.ring;
    let total: u32 = profile.iter().sum();
    let mut acc = ring.pow(&ctx.gamma, total as u128);
    let mut v = 0u32;
    for &k in profile {
        v += vps[k as usize];
        acc = ring.mul(&acc, &ring.inv(&units[k as usize])?);
    }
    ring.div_p_pow(&acc, v)
}

/// The slice of coefficients of exp(gamma f_Lambda) at x^v: all monomials
/// prod Lambda_u^{k_u} with sum k_u <= deg and sum k_u u = v.
pub fn a_v_coeffs(
    ctx: &PadicCtx,
    supp: &[Vec<i64>],
    v: &[i64],
    deg: u32,
) -> Result<LambdaSeries> {
    let ring = &ctx.ring;
    let (vps, units) = factorials(ring, deg);
    let mut terms = BTreeMap::new();
    let mut profile = vec![0u32; supp.len()];
    enumerate_profiles(supp.len(), deg, &mut profile, &mut |k| {
        let target: Vec<i64> = (0..v.len())
            .map(|t| {
                supp.iter()
                    .zip(k)
                    .map(|(u, &ku)| u[t] * ku as i64)
                    .sum::<i64>()
            })
            .collect();
        if target == v {
            let c = profile_coefficient(ctx, &vps, &units, k)?;
            terms.insert(k.to_vec(), c);
        }
        Ok(())
    })?;
    Ok(LambdaSeries {
        nparams: supp.len(),
        deg,
        terms,
    })
}

fn enumerate_profiles(
    len: usize,
    budget: u32,
    profile: &mut Vec<u32>,
    visit: &mut impl FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    fn rec(
        pos: usize,
        left: u32,
        profile: &mut Vec<u32>,
        visit: &mut impl FnMut(&[u32]) -> Result<()>,
    ) -> Result<()> {
        if pos == profile.len() {
            return visit(profile);
        }
        for k in 0..=left {
            profile[pos] = k;
            rec(pos + 1, left - k, profile, visit)?;
        }
        profile[pos] = 0;
        Ok(())
    }
    let _ = len;
    rec(0, budget, profile, visit)
}

/// A d-tuple of vectors in Z^n whose block sums vanish along every sigma
/// orbit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BalancedTuple {
    pub vectors: Vec<Vec<i64>>,
}

impl BalancedTuple {
    pub fn check_balance(&self, spec: &UnfoldSpec) -> bool {
        let d = spec.lcm() as usize;
        for (i, &di) in spec.d.iter().enumerate() {
            for j in 0..di as usize {
                let s: i64 = (0..d / di as usize)
                    .map(|m| self.vectors[j + m * di as usize][i])
                    .sum();
                if s != 0 {
                    return false;
                }
            }
        }
        true
    }
}

/// All balanced tuples with a nonzero contribution of total Lambda-degree at
/// most deg: derived from the profile enumeration of the unfolded exponent
/// sum, deduplicated, and each asserted against the balance equations.
pub fn balanced_tuples(
    spec: &UnfoldSpec,
    supp: &[Vec<i64>],
    deg: u32,
) -> Result<Vec<BalancedTuple>> {
    let d = spec.lcm() as usize;
    let n = spec.n();
    let mut out: std::collections::BTreeSet<BalancedTuple> = Default::default();
    let mut profile = vec![0u32; d * supp.len()];
    enumerate_profiles(d * supp.len(), deg, &mut profile, &mut |k| {
        // total y-exponent must vanish
        let mut ybal = vec![0i64; spec.big_n()];
        for l in 0..d {
            for (ui, u) in supp.iter().enumerate() {
                let ku = k[l * supp.len() + ui] as i64;
                if ku == 0 {
                    continue;
                }
                for (i, &uc) in u.iter().enumerate() {
                    ybal[spec.flat(i, l as u32 % spec.d[i])] += ku * uc;
                }
            }
        }
        if ybal.iter().all(|&x| x == 0) {
            let vectors: Vec<Vec<i64>> = (0..d)
                .map(|l| {
                    (0..n)
                        .map(|i| {
                            supp.iter()
                                .enumerate()
                                .map(|(ui, u)| k[l * supp.len() + ui] as i64 * u[i])
                                .sum()
                        })
                        .collect()
                })
                .collect();
            out.insert(BalancedTuple { vectors });
        }
        Ok(())
    })?;
    for t in &out {
        if !t.check_balance(spec) {
            return Err(Error::Spec("enumerated tuple violates balance".into()));
        }
    }
    Ok(out.into_iter().collect())
}

/// G_0(Lambda): the constant-in-y coefficient of exp(gamma G_Lambda(y)),
/// truncated at total Lambda-degree deg.
pub fn g0_series(
    ctx: &PadicCtx,
    spec: &UnfoldSpec,
    supp: &[Vec<i64>],
    deg: u32,
) -> Result<LambdaSeries> {
    let ring = &ctx.ring;
    let d = spec.lcm() as usize;
    let t = supp.len();
    let (vps, units) = factorials(ring, deg);
    let mut terms: BTreeMap<Vec<u32>, RingElem> = BTreeMap::new();
    let mut profile = vec![0u32; d * t];
    enumerate_profiles(d * t, deg, &mut profile, &mut |k| {
        let mut ybal = vec![0i64; spec.big_n()];
        for l in 0..d {
            for (ui, u) in supp.iter().enumerate() {
                let ku = k[l * t + ui] as i64;
                if ku == 0 {
                    continue;
                }
                for (i, &uc) in u.iter().enumerate() {
                    ybal[spec.flat(i, l as u32 % spec.d[i])] += ku * uc;
                }
            }
        }
        if ybal.iter().any(|&x| x != 0) {
            return Ok(());
        }
        let c = profile_coefficient(ctx, &vps, &units, k)?;
        // Lambda-monomial: aggregate over shifts
        let mono: Vec<u32> = (0..t).map(|ui| (0..d).map(|l| k[l * t + ui]).sum()).collect();
        match terms.get_mut(&mono) {
            Some(x) => *x = ring.add(x, &c),
            None => {
                terms.insert(mono, c);
            }
        }
        Ok(())
    })?;
    terms.retain(|_, c| !(ring.is_zero(c) && c.prec >= ring.prec()));
    Ok(LambdaSeries {
        nparams: t,
        deg,
        terms,
    })
}

/// The ratio series F(Lambda) = G_0(Lambda) / G_0(Lambda^p) truncated at deg.
pub fn ratio_series(ctx: &PadicCtx, g0: &LambdaSeries) -> Result<LambdaSeries> {
    let dil = g0.dilate(ctx.p());
    Ok(g0.mul(&ctx.ring, &dil.inv(&ctx.ring)?))
}

#[derive(Debug, Clone)]
pub struct HypergeomReport {
    pub lambda: RingElem,
    pub deg: u32,
    /// series-level residual of the telescoping identity
    /// F(L) F(L^p) ... F(L^{p^{a-1}}) = G_0(L) / G_0(L^{p^a})
    pub telescoping_residual: Option<Ratio<i64>>,
    pub is_one_unit: bool,
}

/// lambda_0 = prod_{i<a} F(c^{p^i}) evaluated through the truncated ratio
/// series at the Teichmueller point c.
pub fn unit_root_hypergeom(
    ctx: &PadicCtx,
    spec: &UnfoldSpec,
    supp: &[Vec<i64>],
    c_hat: &[RingElem],
    a: u32,
    deg: u32,
) -> Result<HypergeomReport> {
    let ring = &ctx.ring;
    assert_eq!(c_hat.len(), supp.len());
    let g0 = g0_series(ctx, spec, supp, deg)?;
    let ratio = ratio_series(ctx, &g0)?;
    let mut lambda = ring.one();
    let mut args: Vec<RingElem> = c_hat.to_vec();
    let mut tele = LambdaSeries::one(ring, supp.len(), deg);
    let mut dilated = ratio.clone();
    for i in 0..a {
        lambda = ring.mul(&lambda, &ratio.evaluate(ring, &args));
        args = args.iter().map(|x| ring.pow(x, ctx.p() as u128)).collect();
        if i > 0 {
            dilated = dilated.dilate(ctx.p());
        }
        tele = tele.mul(ring, &dilated);
    }
    // telescoping: the product above should match G_0(L)/G_0(L^{p^a})
    let mut g0_pa = g0.clone();
    for _ in 0..a {
        g0_pa = g0_pa.dilate(ctx.p());
    }
    let direct = g0.mul(ring, &g0_pa.inv(ring)?);
    let telescoping_residual = tele.residual(ring, &direct);
    let is_one_unit = ring
        .ord_gamma(&ring.sub(&lambda, &ring.one()))
        .map_or(true, |o| o >= 1);
    Ok(HypergeomReport {
        lambda,
        deg,
        telescoping_residual,
        is_one_unit,
    })
}

#[derive(Debug, Clone)]
pub struct StabilizedUnitRoot {
    pub report: HypergeomReport,
    /// (deg, lambda) pairs visited by the stabilization loop
    pub trace: Vec<(u32, RingElem)>,
    pub stable_ord: u32,
}

/// Increase deg by p until lambda is unchanged mod p^{target_ord} from one
/// step to the next; the last two agreeing values certify stabilization.
pub fn stabilized_unit_root(
    ctx: &PadicCtx,
    spec: &UnfoldSpec,
    supp: &[Vec<i64>],
    c_hat: &[RingElem],
    a: u32,
    target_ord: u32,
    deg_start: u32,
    deg_cap: u32,
) -> Result<StabilizedUnitRoot> {
    let ring = &ctx.ring;
    let step = ctx.p() as u32;
    let mut trace: Vec<(u32, RingElem)> = Vec::new();
    let mut deg = deg_start;
    let mut last: Option<HypergeomReport> = None;
    while deg <= deg_cap {
        let rep = unit_root_hypergeom(ctx, spec, supp, c_hat, a, deg)?;
        trace.push((deg, rep.lambda.clone()));
        if let Some(prev) = &last {
            let diff = ring.sub(&prev.lambda, &rep.lambda);
            // both values must honestly carry the target precision
            let certified = prev.lambda.prec >= target_ord && rep.lambda.prec >= target_ord;
            let stable = certified
                && match ring.ord_p(&diff) {
                    None => true,
                    Some(o) => o >= Ratio::from_integer(target_ord as i64),
                };
            if stable {
                return Ok(StabilizedUnitRoot {
                    report: rep,
                    trace,
                    stable_ord: target_ord,
                });
            }
        }
        last = Some(rep);
        deg += step;
    }
    Err(Error::NonConvergence(deg_cap as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PadicCtx {
        PadicCtx::new(3, 1, None, 6).unwrap()
    }

    #[test]
    fn a_v_slices() {
        let c = ctx();
        let ring = &c.ring;
        // constant term of A_0 is 1
        let a0 = a_v_coeffs(&c, &[vec![1]], &[0], 6).unwrap();
        assert_eq!(a0.terms.len(), 1);
        assert_eq!(a0.constant_term(ring), ring.one());
        // single monomial support: A_m = (gamma Lambda)^m / m!; check as
        // coeff * m! = gamma^m since 4! is not a unit
        let am = a_v_coeffs(&c, &[vec![1]], &[4], 8).unwrap();
        assert_eq!(am.terms.len(), 1);
        let coeff = am.terms.get(&vec![4u32]).unwrap();
        let lhs = ring.mul(coeff, &ring.from_i128(24));
        let rhs = ring.reduce_prec(&ring.pow(&c.gamma, 4), lhs.prec);
        assert!(ring.ord_p_diff(&lhs, &rhs).is_none());
        // supp {1, -1}: A_0 = sum_k (gamma^2 L1 L2)^k / (k!)^2
        let a0 = a_v_coeffs(&c, &[vec![1], vec![-1]], &[0], 7).unwrap();
        for (k, coeff) in &a0.terms {
            assert_eq!(k[0], k[1]);
            let t = k[0];
            let mut expect = ring.pow(&c.gamma, 2 * t as u128);
            let mut fact = ring.one();
            for j in 1..=t {
                fact = ring.mul(&fact, &ring.from_i128(j as i128));
            }
            let f2 = ring.mul(&fact, &fact);
            // coefficient * (t!)^2 = gamma^{2t} up to the tracked precision
            let lhs = ring.mul(coeff, &f2);
            expect = ring.reduce_prec(&expect, lhs.prec);
            assert!(ring.ord_p_diff(&lhs, &expect).is_none());
        }
    }

    #[test]
    fn balanced_tuple_sets() {
        // all-equal d: only the zero tuple
        let spec = UnfoldSpec::new(vec![2, 2]).unwrap();
        let ts = balanced_tuples(&spec, &[vec![1, 1], vec![1, -1]], 6).unwrap();
        assert_eq!(ts.len(), 1);
        assert!(ts[0].vectors.iter().all(|v| v.iter().all(|&x| x == 0)));
        // d = (1,2) with supp {(1,0), (-1,0)}: tuples exactly (k,0), (-k,0)
        let spec = UnfoldSpec::new(vec![1, 2]).unwrap();
        let ts = balanced_tuples(&spec, &[vec![1, 0], vec![-1, 0]], 6).unwrap();
        for t in &ts {
            assert_eq!(t.vectors[0][0], -t.vectors[1][0]);
            assert_eq!(t.vectors[0][1], 0);
            assert_eq!(t.vectors[1][1], 0);
            assert!(t.check_balance(&spec));
        }
        // k ranges over -3..=3 at this degree
        let ks: std::collections::BTreeSet<i64> =
            ts.iter().map(|t| t.vectors[0][0]).collect();
        assert_eq!(ks, (-3..=3).collect());
        // the zero tuple is always present
        assert!(ts
            .iter()
            .any(|t| t.vectors.iter().all(|v| v.iter().all(|&x| x == 0))));
    }

    #[test]
    fn g0_classical_collapse() {
        let c = ctx();
        let ring = &c.ring;
        // d = (d,...,d): G_0 = A_0^d coefficientwise
        let spec = UnfoldSpec::new(vec![2, 2]).unwrap();
        let supp = vec![vec![1i64, 1], vec![1, -1]];
        let g0 = g0_series(&c, &spec, &supp, 6).unwrap();
        let a0 = a_v_coeffs(&c, &supp, &[0, 0], 6).unwrap();
        let a0d = a0.mul(ring, &a0);
        assert!(g0.residual(ring, &a0d).is_none());
        // deg = 0 gives 1
        let g0 = g0_series(&c, &spec, &supp, 0).unwrap();
        assert_eq!(g0, LambdaSeries::one(ring, 2, 0));
    }

    #[test]
    fn g0_asymmetric_case() {
        let c = ctx();
        let ring = &c.ring;
        // d = (1,2), supp {(1,0),(-1,0)}: G_0 = sum_k A_{(k,0)} A_{(-k,0)}
        let spec = UnfoldSpec::new(vec![1, 2]).unwrap();
        let supp = vec![vec![1i64, 0], vec![-1, 0]];
        let g0 = g0_series(&c, &spec, &supp, 5).unwrap();
        let mut expect: BTreeMap<Vec<u32>, RingElem> = BTreeMap::new();
        for k in -5i64..=5 {
            let ak = a_v_coeffs(&c, &supp, &[k, 0], 5).unwrap();
            let amk = a_v_coeffs(&c, &supp, &[-k, 0], 5).unwrap();
            let prod = ak.mul(ring, &amk);
            for (mono, coeff) in &prod.terms {
                match expect.get_mut(mono) {
                    Some(x) => *x = ring.add(x, coeff),
                    None => {
                        expect.insert(mono.clone(), coeff.clone());
                    }
                }
            }
        }
        expect.retain(|_, c| !(ring.is_zero(c) && c.prec >= ring.prec()));
        let expect = LambdaSeries {
            nparams: 2,
            deg: 5,
            terms: expect,
        };
        assert!(g0.residual(ring, &expect).is_none());
    }

    #[test]
    fn trivial_unit_root() {
        // f = x, d = (1): G_0 = 1, lambda = 1
        let c = ctx();
        let spec = UnfoldSpec::new(vec![1]).unwrap();
        let rep = unit_root_hypergeom(&c, &spec, &[vec![1]], &[c.ring.one()], 1, 9).unwrap();
        assert!(c.ring.ord_p_diff(&rep.lambda, &c.ring.one()).is_none());
        assert!(rep.is_one_unit);
        assert!(rep.telescoping_residual.is_none());
    }

    #[test]
    fn kloosterman_unit_root() {
        // f = x + x^{-1} at p = 3: lambda = 16 mod 27. The k! denominators
        // cost precision with the degree, so the ring precision must budget
        // for the stabilization range.
        let c = PadicCtx::new(3, 1, None, 12).unwrap();
        let spec = UnfoldSpec::new(vec![1]).unwrap();
        let supp = vec![vec![1i64], vec![-1]];
        let c_hat = vec![c.ring.one(), c.ring.one()];
        let st = stabilized_unit_root(&c, &spec, &supp, &c_hat, 1, 3, 6, 36).unwrap();
        assert!(st.report.is_one_unit);
        assert!(st.report.lambda.prec >= 3);
        assert_eq!(st.report.lambda.coords[0] % 27, 16);
        // the visited trace is reported
        assert!(st.trace.len() >= 2);
    }

    #[test]
    fn specialization_consistency_diagnostic() {
        // ratio-of-evaluations of the truncated G_0 against the evaluated
        // ratio series; they agree within the degree-overflow bound
        let c = ctx();
        let ring = &c.ring;
        let spec = UnfoldSpec::new(vec![1]).unwrap();
        let supp = vec![vec![1i64], vec![-1]];
        let deg = 12;
        let g0 = g0_series(&c, &spec, &supp, deg).unwrap();
        let ratio = ratio_series(&c, &g0).unwrap();
        let args = vec![ring.one(), ring.one()];
        let by_ratio = ratio.evaluate(ring, &args);
        let g_top = g0.evaluate(ring, &args);
        let g_bot = g0.dilate(3).evaluate(ring, &args);
        let by_values = ring.mul(&g_top, &ring.inv(&g_bot).unwrap());
        // overflow bound: min over split degrees j + k > deg of
        // ord(ratio_j) + ord(g0_dilated_k)
        let ord_of = |s: &LambdaSeries, d: u32| -> Ratio<i64> {
            s.terms
                .iter()
                .filter(|(k, _)| k.iter().sum::<u32>() == d)
                .filter_map(|(_, c)| ring.ord_p(c))
                .min()
                .unwrap_or_else(|| Ratio::from_integer(ring.prec() as i64))
        };
        let dil = g0.dilate(3);
        let mut bound = Ratio::from_integer(ring.prec() as i64);
        for j in 0..=deg {
            for k in 0..=deg {
                if j + k > deg {
                    let b = ord_of(&ratio, j) + ord_of(&dil, k);
                    bound = bound.min(b);
                }
            }
        }
        match ring.ord_p_diff(&by_ratio, &by_values) {
            None => {}
            Some(o) => assert!(o >= bound, "difference ord {o} below bound {bound}"),
        }
    }
}
