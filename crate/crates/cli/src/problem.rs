//! Problem-file ingestion and the verification pipelines behind each
//! subcommand. Reports are JSON values with deterministic key order.

use num_rational::Ratio;
use partial_toric::cyclotomic::CycRat;
use partial_toric::dwork::{
    self, alpha_matrix, d_commutation_check, differential_matrix, differential_multiplier,
    fa_coeffs, f_coeffs, recommended_w_series, sigma_commutation_check, teich_factors,
    twisted_fredholm, twisted_traces_up_to, unit_root_power_iteration, verify_factorization,
    TruncOp,
};
use partial_toric::error::Error;
use partial_toric::fields::{make_field, Elem as FieldElem, FieldDesc, TowerDesc};
use partial_toric::hypergeom::stabilized_unit_root;
use partial_toric::laurent::LaurentPoly;
use partial_toric::padics::{PadicCtx, RingElem};
use partial_toric::polytope::{newton_polytope, Polytope, WeightedBasis};
use partial_toric::sums_l::{
    brute_sum, l_series, predicted_s, reconstruct_scheduled, unit_reciprocal_roots, BruteSum,
};
use partial_toric::unfolding::{
    char_poly_pb, degeneracy_witness, exterior_traces, fixed_points, unfold, unfold_factors,
    PermMatrix, UnfoldSpec,
};
use serde::Deserialize;
use serde_json::{json, Value};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Deserialize)]
pub struct FTerm {
    pub exponents: Vec<i64>,
    /// field element, little-endian coefficient list
    pub coeff: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub p: u64,
    pub a: usize,
    #[serde(default)]
    pub modulus: Option<Vec<u64>>,
    pub f: Vec<FTerm>,
    pub d: Vec<u32>,
    #[serde(default)]
    pub precision: Option<u32>,
    #[serde(default)]
    pub wcut: Option<i64>,
    #[serde(default)]
    pub kmax: Option<u32>,
    #[serde(default)]
    pub deg: Option<u32>,
    #[serde(default)]
    pub cap: Option<u64>,
    /// which verifications trace-check runs; default: all
    #[serde(default)]
    pub checks: Option<Vec<String>>,
}

/// Command-line overrides for the per-problem knobs.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub precision: Option<u32>,
    pub wcut: Option<i64>,
    pub kmax: Option<u32>,
    pub deg: Option<u32>,
    pub b: Vec<i64>,
    pub cap: Option<u64>,
}

pub struct Resolved {
    pub spec: ProblemSpec,
    pub precision: u32,
    pub wcut: i64,
    pub kmax: u32,
    pub deg: u32,
    pub cap: u128,
    pub b_list: Vec<i64>,
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec> {
    let spec: ProblemSpec =
        serde_json::from_str(text).map_err(|e| Error::Spec(format!("bad problem file: {e}")))?;
    validate(&spec)?;
    Ok(spec)
}

fn validate(spec: &ProblemSpec) -> Result<()> {
    if spec.f.is_empty() {
        return Err(Error::Spec("f has no terms".into()));
    }
    let n = spec.d.len();
    if spec.d.iter().any(|&di| di == 0) {
        return Err(Error::Spec("every d_i must be >= 1".into()));
    }
    for t in &spec.f {
        if t.exponents.len() != n {
            return Err(Error::Spec(format!(
                "term exponent length {} does not match n = {n}",
                t.exponents.len()
            )));
        }
        if t.coeff.iter().all(|&c| c % spec.p == 0) {
            return Err(Error::Spec("zero coefficient in f".into()));
        }
    }
    Ok(())
}

pub fn resolve(spec: ProblemSpec, ov: &Overrides) -> Result<Resolved> {
    let precision = ov.precision.or(spec.precision).unwrap_or(8);
    let wcut = ov.wcut.or(spec.wcut).unwrap_or(precision as i64);
    let kmax = ov.kmax.or(spec.kmax).unwrap_or(3);
    let deg = ov.deg.or(spec.deg).unwrap_or(3 * precision);
    let cap = ov.cap.or(spec.cap).unwrap_or(1 << 27) as u128;
    let d_lcm = spec
        .d
        .iter()
        .fold(1u64, |acc, &x| num_integer::lcm(acc, x as u64));
    let b_list = if ov.b.is_empty() {
        (1..=d_lcm as i64)
            .filter(|&b| num_integer::gcd(b as u64, d_lcm) == 1)
            .collect()
    } else {
        ov.b.clone()
    };
    Ok(Resolved {
        spec,
        precision,
        wcut,
        kmax,
        deg,
        cap,
        b_list,
    })
}

/// Everything the dwork-side pipelines share.
pub struct Pipeline {
    pub field: FieldDesc,
    pub uspec: UnfoldSpec,
    pub f: LaurentPoly<FieldElem>,
    pub g: LaurentPoly<FieldElem>,
    pub poly: Polytope,
    pub q: u64,
}

pub fn pipeline(r: &Resolved) -> Result<Pipeline> {
    let field = make_field(r.spec.p, r.spec.a, r.spec.modulus.as_deref())?;
    let uspec = UnfoldSpec::new(r.spec.d.clone())?;
    let f = LaurentPoly::from_terms(
        uspec.n(),
        r.spec.f.iter().map(|t| {
            let mut c = t.coeff.clone();
            c.resize(field.deg(), 0);
            for x in c.iter_mut() {
                *x %= field.p();
            }
            (t.exponents.clone(), c)
        }),
    );
    let g = unfold(&f, &uspec, &field)?;
    // the polytope is built from the unmerged factor support so the
    // theta-product exponents always lie in the cone
    let raw = unfold_factors(&f, &uspec);
    let sup: Vec<Vec<i64>> = raw.iter().map(|(_, v)| v.clone()).collect();
    let poly = newton_polytope(uspec.big_n(), &sup)?;
    let q = field.size() as u64;
    Ok(Pipeline {
        field,
        uspec,
        f,
        g,
        poly,
        q,
    })
}

pub struct DworkSide {
    pub ctx: PadicCtx,
    pub basis: WeightedBasis,
    pub op: TruncOp,
    pub factors: Vec<dwork::ThetaFactor>,
}

pub fn dwork_side(pl: &Pipeline, r: &Resolved, wcut: i64) -> Result<DworkSide> {
    let ctx = PadicCtx::new(
        pl.field.p(),
        pl.field.deg(),
        Some(pl.field.modulus()),
        r.precision,
    )?;
    let basis = pl.poly.enumerate_monoid(wcut, r.cap)?;
    let raw = unfold_factors(&pl.f, &pl.uspec);
    let factors = teich_factors(&ctx, &raw);
    let w_series = recommended_w_series(pl.q, wcut);
    let fc = f_coeffs(&ctx, &factors, &pl.poly, w_series, 8_000_000)?;
    let fa = fa_coeffs(&ctx, &fc, pl.field.deg() as u32, &pl.poly, 8_000_000)?;
    let op = alpha_matrix(&ctx, &fa, &basis, &pl.poly, pl.q)?;
    Ok(DworkSide {
        ctx,
        basis,
        op,
        factors,
    })
}

fn ratio_str(r: Ratio<i64>) -> String {
    r.to_string()
}

fn weight_str(w: partial_toric::polytope::Weight) -> String {
    w.to_string()
}

fn elem_json(e: &RingElem) -> Value {
    json!({ "coords": e.coords, "prec": e.prec })
}

fn cyc_json(c: &CycRat) -> Value {
    let den = c.denominator();
    let nums: Vec<String> = c
        .coords
        .iter()
        .map(|x| {
            let scaled = x * num_rational::BigRational::from(den.clone());
            scaled.to_integer().to_string()
        })
        .collect();
    json!({ "num": nums, "den": den.to_string() })
}

fn residual_json(o: Option<Ratio<i64>>, prec: u32) -> Value {
    match o {
        None => json!({ "ord": "inf", "prec": prec }),
        Some(r) => json!({ "ord": ratio_str(r), "prec": prec }),
    }
}

fn ord_ok(o: Option<Ratio<i64>>, target: i64) -> bool {
    o.map_or(true, |r| r >= Ratio::from_integer(target))
}

pub struct Report {
    pub value: Value,
    pub pass: bool,
}

// ---- subcommands ----

pub fn run_unfold(r: &Resolved) -> Result<Report> {
    let pl = pipeline(r)?;
    let pm = PermMatrix::new(&pl.uspec);
    let g_terms: Vec<Value> = pl
        .g
        .terms
        .iter()
        .map(|(e, c)| json!({ "exponents": e, "coeff": c }))
        .collect();
    let mut charpolys = Vec::new();
    for &b in &r.b_list {
        let cp = char_poly_pb(&pl.uspec, b)?;
        charpolys.push(json!({
            "b": b,
            "product_formula": cp.product_formula.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "from_matrix": cp.from_matrix.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "match": cp.product_formula == cp.from_matrix,
        }));
    }
    let mut wtable = Vec::new();
    let mut tower = TowerDesc::new(pl.field.clone(), r.cap);
    let mut pass = charpolys.iter().all(|c| c["match"] == json!(true));
    for k in 1..=r.kmax {
        for &b in &r.b_list {
            let formula: u128 = pl
                .uspec
                .d
                .iter()
                .map(|&di| (pl.q as u128).pow(k * di) - 1)
                .product();
            let enumerated = if formula <= r.cap {
                let fps = fixed_points(&pl.uspec, &mut tower, k, b, r.cap)?;
                let ok = fps.points.len() as u128 == formula;
                pass &= ok;
                Some(fps.points.len())
            } else {
                None
            };
            wtable.push(json!({
                "k": k, "b": b,
                "size_formula": formula.to_string(),
                "size_enumerated": enumerated,
            }));
        }
    }
    Ok(Report {
        value: json!({
            "command": "unfold",
            "n_vars_unfolded": pl.uspec.big_n(),
            "lcm": pl.uspec.lcm(),
            "g_terms": g_terms,
            "p_cycles": pm.cycles(),
            "char_polys": charpolys,
            "fixed_point_table": wtable,
        }),
        pass,
    })
}

pub fn run_polytope_info(r: &Resolved) -> Result<Report> {
    let pl = pipeline(r)?;
    let basis = pl.poly.enumerate_monoid(r.wcut, r.cap)?;
    let mut shells: std::collections::BTreeMap<String, usize> = Default::default();
    for w in &basis.weights {
        *shells.entry(weight_str(*w)).or_default() += 1;
    }
    let nv = pl.poly.normalized_volume();
    Ok(Report {
        value: json!({
            "command": "polytope-info",
            "ambient_dim": pl.poly.ambient,
            "dim": pl.poly.dim,
            "vertices": pl.poly.vertices(),
            "facets": pl.poly.facets.iter().map(|f| json!({
                "normal": f.normal.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "rhs": f.rhs.to_string(),
            })).collect::<Vec<_>>(),
            "denominator_d": pl.poly.denominator().to_string(),
            "normalized_volume": nv.value.to_string(),
            "lower_dimensional": nv.lower_dimensional,
            "monoid_size": basis.len(),
            "monoid_by_weight": shells,
        }),
        pass: true,
    })
}

fn sums_upto(pl: &Pipeline, r: &Resolved, kmax: u32) -> Result<Vec<BruteSum>> {
    let mut tower = TowerDesc::new(pl.field.clone(), r.cap);
    (1..=kmax)
        .map(|k| brute_sum(&pl.f, &pl.uspec, &mut tower, k, r.cap))
        .collect()
}

fn sums_json(sums: &[BruteSum]) -> Vec<Value> {
    sums.iter()
        .map(|s| {
            json!({
                "k": s.k,
                "histogram": s.histogram,
                "s_k": s.value.coords.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect()
}

pub fn run_sums(r: &Resolved) -> Result<Report> {
    let pl = pipeline(r)?;
    let sums = sums_upto(&pl, r, r.kmax)?;
    let mut pass = true;
    for s in &sums {
        let total: u128 = pl
            .uspec
            .d
            .iter()
            .map(|&di| (pl.q as u128).pow(s.k * di) - 1)
            .product();
        pass &= s.histogram.iter().map(|&x| x as u128).sum::<u128>() == total;
    }
    Ok(Report {
        value: json!({ "command": "sums", "sums": sums_json(&sums) }),
        pass,
    })
}

pub fn run_lfunc(r: &Resolved) -> Result<Report> {
    let pl = pipeline(r)?;
    let sums = sums_upto(&pl, r, r.kmax)?;
    let values: Vec<_> = sums.iter().map(|s| s.value.clone()).collect();
    let l = l_series(&values, pl.field.p());
    let rec = reconstruct_scheduled(&l)?;
    let mut pass = true;
    let rec_json = match &rec {
        None => json!(null),
        Some(rfn) => {
            // out-of-sample check against a fresh sum when under cap
            let k_next = r.kmax + 1;
            let domain: u128 = pl
                .uspec
                .d
                .iter()
                .map(|&di| (pl.q as u128).pow(k_next * di) - 1)
                .product();
            let predicted = predicted_s(rfn, k_next as usize);
            let checked = if domain <= r.cap {
                let mut tower = TowerDesc::new(pl.field.clone(), r.cap);
                let oracle = brute_sum(&pl.f, &pl.uspec, &mut tower, k_next, r.cap)?;
                let ok = predicted == CycRat::from_cyc_int(&oracle.value);
                pass &= ok;
                Some(ok)
            } else {
                None
            };
            let ctx = PadicCtx::new(
                pl.field.p(),
                pl.field.deg(),
                Some(pl.field.modulus()),
                r.precision,
            )?;
            let analysis = unit_reciprocal_roots(rfn, &ctx, pl.uspec.n() % 2 == 0)?;
            json!({
                "num": rfn.num.iter().map(cyc_json).collect::<Vec<_>>(),
                "den": rfn.den.iter().map(cyc_json).collect::<Vec<_>>(),
                "predict_next_k": k_next,
                "prediction_verified": checked,
                "num_slopes": analysis.num_slopes.iter()
                    .map(|(s, m)| json!([ratio_str(*s), m])).collect::<Vec<_>>(),
                "den_slopes": analysis.den_slopes.iter()
                    .map(|(s, m)| json!([ratio_str(*s), m])).collect::<Vec<_>>(),
                "unit_root": analysis.unit_root.as_ref().map(elem_json),
                "is_one_unit": analysis.is_one_unit,
            })
        }
    };
    Ok(Report {
        value: json!({
            "command": "lfunc",
            "sums": sums_json(&sums),
            "l_coefficients": l.coeffs.iter().map(cyc_json).collect::<Vec<_>>(),
            "reconstruction": rec_json,
        }),
        pass,
    })
}

fn checks_enabled(r: &Resolved, name: &str) -> bool {
    match &r.spec.checks {
        None => true,
        Some(list) => list.iter().any(|c| c == name),
    }
}

pub fn run_trace_check(r: &Resolved) -> Result<Report> {
    let pl = pipeline(r)?;
    let ds = dwork_side(&pl, r, r.wcut)?;
    let pm = PermMatrix::new(&pl.uspec);
    let sums = sums_upto(&pl, r, r.kmax)?;
    // both sides are exact mod p^M once W_cut >= M; otherwise the truncated
    // trace tail limits the comparison to ord W_cut
    let target = (r.precision as i64).min(r.wcut);
    let mut pass = true;
    let mut entries = Vec::new();
    for &b in &r.b_list {
        let traces = twisted_traces_up_to(&ds.op, &pm, b, r.kmax);
        for k in 1..=r.kmax {
            let det: i128 = pl
                .uspec
                .d
                .iter()
                .map(|&di| (pl.q as i128).pow(k * di) - 1)
                .product();
            let lhs = ds.ctx.ring.mul_i128(&traces[k as usize - 1], det);
            let rhs = ds.ctx.zeta_embed(&sums[k as usize - 1].value);
            let resid = ds.ctx.ring.ord_p_diff(&lhs, &rhs);
            let ok = ord_ok(resid, target);
            pass &= ok;
            entries.push(json!({
                "k": k, "b": b,
                "det_factor": det.to_string(),
                "trace": elem_json(&traces[k as usize - 1]),
                "lhs": elem_json(&lhs),
                "rhs_zeta_embed_s_k": elem_json(&rhs),
                "residual": residual_json(resid, lhs.prec.min(rhs.prec)),
                "target_ord": target,
                "pass": ok,
            }));
        }
    }
    // b-independence of the raw traces
    let mut b_indep = json!(null);
    if checks_enabled(r, "b_independence") && r.b_list.len() > 1 {
        let base = twisted_traces_up_to(&ds.op, &pm, r.b_list[0], r.kmax);
        let mut worst: Option<Ratio<i64>> = None;
        for &b in &r.b_list[1..] {
            let other = twisted_traces_up_to(&ds.op, &pm, b, r.kmax);
            for (x, y) in base.iter().zip(&other) {
                if let Some(o) = ds.ctx.ring.ord_p_diff(x, y) {
                    worst = Some(worst.map_or(o, |w: Ratio<i64>| w.min(o)));
                }
            }
        }
        let ok = ord_ok(worst, target);
        pass &= ok;
        b_indep = json!({
            "residual": residual_json(worst, r.precision),
            "target_ord": target,
            "pass": ok,
        });
    }
    // Koszul alternating identity, exact over the integers
    let mut koszul = json!(null);
    if checks_enabled(r, "koszul") {
        let tr = exterior_traces(&pl.uspec, r.b_list[0])?;
        let nn = pl.uspec.big_n();
        let mut all = true;
        let mut rows = Vec::new();
        for k in 1..=r.kmax {
            let qk = (pl.q as i128).pow(k);
            let lhs: i128 = tr
                .iter()
                .enumerate()
                .map(|(m, &t)| {
                    let sign = if m % 2 == 0 { 1 } else { -1 };
                    sign * qk.pow((nn - m) as u32) * t
                })
                .sum();
            let rhs: i128 = pl
                .uspec
                .d
                .iter()
                .map(|&di| qk.pow(di) - 1)
                .product();
            all &= lhs == rhs;
            rows.push(json!({ "k": k, "lhs": lhs.to_string(), "rhs": rhs.to_string() }));
        }
        pass &= all;
        koszul = json!({ "exterior_traces": tr.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                         "rows": rows, "pass": all });
    }
    // sigma commutation, exact on the stored matrix
    let mut sigma = json!(null);
    if checks_enabled(r, "sigma_commutation") {
        let resid = sigma_commutation_check(&ds.op, &pm);
        let ok = resid.is_none();
        pass &= ok;
        sigma = json!({ "residual": residual_json(resid, ds.op.prec), "pass": ok });
    }
    // differential commutation q D alpha = alpha D on interior indices
    let mut dcomm = json!(null);
    if checks_enabled(r, "d_commutation") {
        let ring = &ds.ctx.ring;
        let mut ghat: LaurentPoly<RingElem> = LaurentPoly::new(pl.uspec.big_n());
        for (c, v) in &ds.factors {
            ghat.add_term(v.clone(), c.clone(), |a, b| ring.add(a, b), |a| ring.is_zero(a));
        }
        let mut rows = Vec::new();
        let mut all = true;
        for var in 0..pl.uspec.big_n() {
            let mult = differential_multiplier(&ds.ctx, &ghat, var);
            let dm = differential_matrix(&ds.ctx, &ds.basis, &pl.poly, &mult, var);
            let rep = d_commutation_check(&ds.ctx, &ds.op, &dm, pl.q);
            let ok = ord_ok(rep.residual, target) && rep.entries_checked > 0;
            all &= ok;
            rows.push(json!({
                "variable": var,
                "entries_checked": rep.entries_checked,
                "residual": residual_json(rep.residual, rep.prec),
                "pass": ok,
            }));
        }
        pass &= all;
        dcomm = json!({ "per_variable": rows, "target_ord": target, "pass": all });
    }
    Ok(Report {
        value: json!({
            "command": "trace-check",
            "precision": r.precision,
            "wcut": r.wcut,
            "basis_size": ds.basis.len(),
            "trace_formula": entries,
            "b_independence": b_indep,
            "koszul": koszul,
            "sigma_commutation": sigma,
            "d_commutation": dcomm,
        }),
        pass,
    })
}

pub fn run_fredholm(r: &Resolved, stabilize: bool) -> Result<Report> {
    let pl = pipeline(r)?;
    let ds = dwork_side(&pl, r, r.wcut)?;
    let pm = PermMatrix::new(&pl.uspec);
    let traces = twisted_traces_up_to(&ds.op, &pm, r.b_list[0], r.kmax);
    let det = twisted_fredholm(&ds.ctx.ring, &traces)?;
    let sums = sums_upto(&pl, r, r.kmax)?;
    let values: Vec<_> = sums.iter().map(|s| s.value.clone()).collect();
    let l = l_series(&values, pl.field.p());
    let fact = verify_factorization(
        &ds.ctx,
        &l,
        &det,
        pl.field.deg() as u32,
        &pl.uspec.d,
        pl.uspec.n(),
    )?;
    let target = (fact.residual.prec as i64).min(r.wcut);
    let mut pass = ord_ok(fact.residual.min_ord, target);
    let mut stab = json!(null);
    if stabilize {
        let ds2 = dwork_side(&pl, r, 2 * r.wcut)?;
        let traces2 = twisted_traces_up_to(&ds2.op, &pm, r.b_list[0], r.kmax);
        let det2 = twisted_fredholm(&ds2.ctx.ring, &traces2)?;
        let resid = partial_toric::series::series_residual(&ds.ctx.ring, &det, &det2);
        let ok = resid.min_ord.is_none()
            || resid.min_ord.unwrap() >= Ratio::from_integer(resid.prec as i64);
        pass &= ok;
        stab = json!({
            "wcut_doubled": 2 * r.wcut,
            "coefficient_residual": residual_json(resid.min_ord, resid.prec),
            "pass": ok,
        });
    }
    Ok(Report {
        value: json!({
            "command": "fredholm",
            "traces": traces.iter().map(elem_json).collect::<Vec<_>>(),
            "det_coefficients": det.coeffs.iter().map(elem_json).collect::<Vec<_>>(),
            "factorization": {
                "sign_exponent": if pl.uspec.n() % 2 == 1 { 1 } else { -1 },
                "lhs_l_side": fact.lhs.coeffs.iter().map(elem_json).collect::<Vec<_>>(),
                "rhs_delta_d_det": fact.rhs.coeffs.iter().map(elem_json).collect::<Vec<_>>(),
                "residual": residual_json(fact.residual.min_ord, fact.residual.prec),
                "target_ord": target,
            },
            "stabilization": stab,
        }),
        pass,
    })
}

pub fn run_unit_root(r: &Resolved, method: &str, cross_check: bool) -> Result<Report> {
    let pl = pipeline(r)?;
    let want = |m: &str| method == m || method == "all" || cross_check;
    let mut lambdas: Vec<(String, RingElem)> = Vec::new();
    let mut out = serde_json::Map::new();
    if want("power-iter") {
        let ds = dwork_side(&pl, r, r.wcut)?;
        let pm = PermMatrix::new(&pl.uspec);
        let rep = unit_root_power_iteration(&ds.op, &pm)?;
        out.insert(
            "power_iter".into(),
            json!({
                "lambda": elem_json(&rep.lambda),
                "iterations": rep.iterations,
                "is_one_unit": rep.is_one_unit,
                "sigma_fixes_eigenvector": rep.sigma_residual.is_none(),
            }),
        );
        lambdas.push(("power-iter".into(), rep.lambda));
    }
    if want("hypergeom") {
        // precision must budget for the factorial losses of the degree range
        let ctx = PadicCtx::new(
            pl.field.p(),
            pl.field.deg(),
            Some(pl.field.modulus()),
            r.precision + r.deg / (pl.field.p() as u32 - 1).max(1) + 2,
        )?;
        let supp: Vec<Vec<i64>> = pl.f.terms.keys().cloned().collect();
        let c_hat: Vec<RingElem> = pl
            .f
            .terms
            .values()
            .map(|c| ctx.ring.teichmuller(c))
            .collect();
        let target = (r.precision).min(4);
        let st = stabilized_unit_root(
            &ctx,
            &pl.uspec,
            &supp,
            &c_hat,
            pl.field.deg() as u32,
            target,
            r.deg.min(6),
            r.deg.max(12),
        )?;
        out.insert(
            "hypergeom".into(),
            json!({
                "lambda": elem_json(&st.report.lambda),
                "deg": st.report.deg,
                "deg_trace": st.trace.iter()
                    .map(|(d, l)| json!({ "deg": d, "lambda": elem_json(l) }))
                    .collect::<Vec<_>>(),
                "is_one_unit": st.report.is_one_unit,
                "telescoping_residual": residual_json(
                    st.report.telescoping_residual, st.report.lambda.prec),
            }),
        );
        lambdas.push(("hypergeom".into(), st.report.lambda));
    }
    if want("rational") {
        let sums = sums_upto(&pl, r, r.kmax)?;
        let values: Vec<_> = sums.iter().map(|s| s.value.clone()).collect();
        let l = l_series(&values, pl.field.p());
        let rec = reconstruct_scheduled(&l)?;
        match rec {
            None => {
                out.insert("rational".into(), json!({ "reconstructed": false }));
            }
            Some(rfn) => {
                let ctx = PadicCtx::new(
                    pl.field.p(),
                    pl.field.deg(),
                    Some(pl.field.modulus()),
                    r.precision,
                )?;
                let analysis = unit_reciprocal_roots(&rfn, &ctx, pl.uspec.n() % 2 == 0)?;
                if let Some(lam) = &analysis.unit_root {
                    lambdas.push(("rational".into(), lam.clone()));
                }
                out.insert(
                    "rational".into(),
                    json!({
                        "reconstructed": true,
                        "num_slopes": analysis.num_slopes.iter()
                            .map(|(s, m)| json!([ratio_str(*s), m])).collect::<Vec<_>>(),
                        "unit_root": analysis.unit_root.as_ref().map(elem_json),
                        "is_one_unit": analysis.is_one_unit,
                    }),
                );
            }
        }
    }
    let mut pass = true;
    if cross_check && lambdas.len() >= 2 {
        // compare modulo the smallest certified precision
        let t = lambdas.iter().map(|(_, l)| l.prec).min().unwrap();
        let p = pl.field.p();
        let modulus = (p as u128).pow(t);
        let mut agree = true;
        let first = &lambdas[0].1;
        for (_, l) in &lambdas[1..] {
            for (x, y) in first.coords.iter().zip(&l.coords) {
                if (*x as u128) % modulus != (*y as u128) % modulus {
                    agree = false;
                }
            }
        }
        pass &= agree;
        out.insert(
            "cross_check".into(),
            json!({
                "methods": lambdas.iter().map(|(m, _)| m.clone()).collect::<Vec<_>>(),
                "compared_mod_p_pow": t,
                "agree": agree,
            }),
        );
    }
    let mut v = serde_json::Map::new();
    v.insert("command".into(), json!("unit-root"));
    v.insert("methods".into(), Value::Object(out));
    Ok(Report {
        value: Value::Object(v),
        pass,
    })
}

pub fn run_degeneracy(r: &Resolved, m_max: usize) -> Result<Report> {
    let pl = pipeline(r)?;
    let mut tower = TowerDesc::new(pl.field.clone(), r.cap);
    let w = degeneracy_witness(&pl.g, &pl.poly, &mut tower, m_max, r.cap)?;
    Ok(Report {
        value: json!({
            "command": "degeneracy",
            "semi_decision": "absence of a witness proves nothing",
            "m_max": m_max,
            "witness": w.map(|w| json!({
                "face_support": w.face_support,
                "field_level": w.level,
                "point": w.point,
            })),
        }),
        pass: true,
    })
}
