//! Newton polytope of the unfolded polynomial, the polyhedral weight function
//! w, its denominator D, monoid enumeration up to a weight cut, and normalized
//! volume. All arithmetic is exact.
//!
//! Lower-dimensional polytopes are supported by working in a coordinate chart:
//! a subset of ambient coordinates on which the linear span of the points
//! projects bijectively. Integer normals to the span decide membership.

use crate::error::{Error, Result};
use crate::linalg;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

pub type Weight = Ratio<i128>;

const AMBIENT_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    /// integer normal in chart coordinates, all polytope points on the <= side
    pub normal: Vec<i128>,
    /// right-hand side; >= 0 because the origin is a point of the polytope
    pub rhs: i128,
}

#[derive(Debug, Clone)]
pub struct Polytope {
    pub ambient: usize,
    /// origin first, then the support points (deduplicated)
    pub points: Vec<Vec<i64>>,
    /// dimension of the hull (= rank of the linear span, since 0 is a point)
    pub dim: usize,
    /// ambient coordinate indices forming the chart (length = dim)
    chart: Vec<usize>,
    /// integer normals spanning the orthogonal complement of the span
    complement: Vec<Vec<i128>>,
    pub facets: Vec<Facet>,
    /// indices into `points` that are vertices of the hull
    pub vertex_idx: Vec<usize>,
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn project(pt: &[i64], chart: &[usize]) -> Vec<i128> {
    chart.iter().map(|&j| pt[j] as i128).collect()
}

/// Hyperplane facets of the convex hull of full-dimensional integer points in
/// R^r, by exhaustive hyperplane enumeration over r-subsets. Canonical form:
/// gcd(normal, rhs) = 1 and every point on the <= side.
fn hull_facets(points: &[Vec<i128>]) -> Vec<Facet> {
    let r = points[0].len();
    let m = points.len();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    if r == 1 {
        let lo = points.iter().map(|p| p[0]).min().unwrap();
        let hi = points.iter().map(|p| p[0]).max().unwrap();
        if lo == hi {
            return out;
        }
        out.push(Facet {
            normal: vec![1],
            rhs: hi,
        });
        out.push(Facet {
            normal: vec![-1],
            rhs: -lo,
        });
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        // normal orthogonal to the differences of the chosen r points
        let base = &points[idx[0]];
        let diffs: Vec<Vec<i128>> = idx[1..]
            .iter()
            .map(|&i| (0..r).map(|j| points[i][j] - base[j]).collect())
            .collect();
        let mut normal = vec![0i128; r];
        for j in 0..r {
            let minor: Vec<Vec<i128>> = diffs
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != j)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            normal[j] = s * linalg::det_i128(&minor);
        }
        if normal.iter().any(|&v| v != 0) {
            let rhs: i128 = normal.iter().zip(base.iter()).map(|(&n, &x)| n * x).sum();
            let vals: Vec<i128> = points
                .iter()
                .map(|p| normal.iter().zip(p).map(|(&n, &x)| n * x).sum())
                .collect();
            let all_le = vals.iter().all(|&v| v <= rhs);
            let all_ge = vals.iter().all(|&v| v >= rhs);
            if all_le || all_ge {
                let (mut n, mut c) = if all_le {
                    (normal.clone(), rhs)
                } else {
                    (normal.iter().map(|&v| -v).collect(), -rhs)
                };
                let mut g = c.abs();
                for &v in &n {
                    g = gcd_i128(g, v);
                }
                if g > 1 {
                    for v in n.iter_mut() {
                        *v /= g;
                    }
                    c /= g;
                }
                if seen.insert((n.clone(), c)) {
                    out.push(Facet { normal: n, rhs: c });
                }
            }
        }
        // next r-subset of 0..m
        let mut k = r;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] + (r - k) < m {
                idx[k] += 1;
                for t in k + 1..r {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Chart columns: a subset of coordinates on which the points have full rank.
fn find_chart(points: &[Vec<i64>], rank: usize) -> Vec<usize> {
    let n = points[0].len();
    let mut chart = Vec::new();
    for j in 0..n {
        let mut cand = chart.clone();
        cand.push(j);
        let mat: Vec<Vec<_>> = points
            .iter()
            .map(|p| cand.iter().map(|&c| linalg::big_rat(p[c], 1)).collect())
            .collect();
        if linalg::rank(&mat) == cand.len() {
            chart = cand;
            if chart.len() == rank {
                break;
            }
        }
    }
    chart
}

/// Integer basis of the orthogonal complement of the span of the points.
fn complement_basis(points: &[Vec<i64>], chart: &[usize]) -> Vec<Vec<i128>> {
    let n = points[0].len();
    let r = chart.len();
    if r == n {
        return Vec::new();
    }
    // For each non-chart coordinate j there is a unique rational row z with
    // z[chart] determined and z[j] = -1 such that z . p = 0 for all points:
    // p[j] = sum_k c_k p[chart_k] on the span.
    let mut out = Vec::new();
    let a: Vec<Vec<_>> = points
        .iter()
        .map(|p| chart.iter().map(|&c| linalg::big_rat(p[c], 1)).collect())
        .collect();
    for j in 0..n {
        if chart.contains(&j) {
            continue;
        }
        let b: Vec<_> = points.iter().map(|p| linalg::big_rat(p[j], 1)).collect();
        let sol = linalg::solve(&a, &b).expect("non-chart coordinate depends on chart");
        // clear denominators
        let mut den = num_bigint::BigInt::from(1);
        for s in &sol {
            den = num_integer::lcm(den, s.denom().abs());
        }
        let mut z = vec![0i128; n];
        use num_traits::ToPrimitive;
        for (k, s) in sol.iter().enumerate() {
            let v = (s * num_rational::BigRational::from(den.clone()))
                .to_integer()
                .to_i128()
                .expect("complement coefficients fit i128");
            z[chart[k]] = v;
        }
        z[j] = -den.to_i128().expect("denominator fits i128");
        out.push(z);
    }
    out
}

/// Newton polytope of a Laurent support: convex hull of the origin and the
/// given exponent vectors.
pub fn newton_polytope(ambient: usize, support: &[Vec<i64>]) -> Result<Polytope> {
    if ambient > AMBIENT_CAP {
        return Err(Error::DimensionCap {
            n: ambient,
            cap: AMBIENT_CAP,
        });
    }
    let mut points = vec![vec![0i64; ambient]];
    for s in support {
        assert_eq!(s.len(), ambient);
        if !points.contains(s) {
            points.push(s.clone());
        }
    }
    let rat_pts: Vec<Vec<_>> = points
        .iter()
        .map(|p| p.iter().map(|&v| linalg::big_rat(v, 1)).collect())
        .collect();
    let dim = linalg::rank(&rat_pts);
    let chart = find_chart(&points, dim);
    let complement = complement_basis(&points, &chart);
    let (facets, vertex_idx) = if dim == 0 {
        (Vec::new(), vec![0])
    } else {
        let proj: Vec<Vec<i128>> = points.iter().map(|p| project(p, &chart)).collect();
        let facets = hull_facets(&proj);
        let mut vidx = Vec::new();
        for (i, p) in proj.iter().enumerate() {
            let tight: Vec<&Facet> = facets
                .iter()
                .filter(|f| {
                    f.normal.iter().zip(p).map(|(&n, &x)| n * x).sum::<i128>() == f.rhs
                })
                .collect();
            if tight.len() >= dim {
                let mat: Vec<Vec<_>> = tight
                    .iter()
                    .map(|f| {
                        f.normal
                            .iter()
                            .map(|&v| {
                                num_rational::BigRational::from(num_bigint::BigInt::from(v))
                            })
                            .collect()
                    })
                    .collect();
                if linalg::rank(&mat) == dim {
                    vidx.push(i);
                }
            }
        }
        (facets, vidx)
    };
    Ok(Polytope {
        ambient,
        points,
        dim,
        chart,
        complement,
        facets,
        vertex_idx,
    })
}

impl Polytope {
    pub fn vertices(&self) -> Vec<Vec<i64>> {
        self.vertex_idx.iter().map(|&i| self.points[i].clone()).collect()
    }

    fn in_span(&self, u: &[i64]) -> bool {
        self.complement
            .iter()
            .all(|z| z.iter().zip(u).map(|(&a, &b)| a * b as i128).sum::<i128>() == 0)
    }

    /// Polyhedral weight: smallest dilation of the polytope containing u, or
    /// `None` when u is outside the cone spanned by the polytope.
    pub fn weight(&self, u: &[i64]) -> Option<Weight> {
        assert_eq!(u.len(), self.ambient);
        if !self.in_span(u) {
            return None;
        }
        if self.dim == 0 {
            return Some(Weight::zero());
        }
        let x = project(u, &self.chart);
        let mut w = Weight::zero();
        for f in &self.facets {
            let v: i128 = f.normal.iter().zip(&x).map(|(&n, &c)| n * c).sum();
            if f.rhs == 0 {
                if v > 0 {
                    return None;
                }
            } else {
                let q = Weight::new(v, f.rhs);
                if q > w {
                    w = q;
                }
            }
        }
        Some(w)
    }

    /// Least D with w(M) contained in (1/D) Z_{>=0}.
    pub fn denominator(&self) -> i128 {
        let mut d: i128 = 1;
        for f in &self.facets {
            if f.rhs > 0 {
                let mut g = 0i128;
                for &n in &f.normal {
                    g = gcd_i128(g, n);
                }
                let df = f.rhs / gcd_i128(g, f.rhs);
                d = d / gcd_i128(d, df) * df;
            }
        }
        d
    }

    /// All lattice points of the cone with weight <= w_cut, ordered by
    /// (weight, lex), together with their exact weights.
    pub fn enumerate_monoid(&self, w_cut: i64, cap: u128) -> Result<WeightedBasis> {
        assert!(w_cut >= 0);
        let n = self.ambient;
        let mut lo = vec![0i64; n];
        let mut hi = vec![0i64; n];
        for j in 0..n {
            let mn = self.points.iter().map(|p| p[j]).min().unwrap();
            let mx = self.points.iter().map(|p| p[j]).max().unwrap();
            lo[j] = mn * w_cut;
            hi[j] = mx * w_cut;
        }
        let mut count: u128 = 1;
        for j in 0..n {
            count = count.saturating_mul((hi[j] - lo[j] + 1) as u128);
            if count > cap {
                return Err(Error::CapExceeded { size: count, cap });
            }
        }
        let mut pts = Vec::new();
        let mut cur = lo.clone();
        'outer: loop {
            if let Some(w) = self.weight(&cur) {
                if w <= Weight::from_integer(w_cut as i128) {
                    pts.push((w, cur.clone()));
                }
            }
            for j in (0..n).rev() {
                if cur[j] < hi[j] {
                    cur[j] += 1;
                    for k in j + 1..n {
                        cur[k] = lo[k];
                    }
                    continue 'outer;
                }
            }
            break;
        }
        pts.sort();
        let points: Vec<Vec<i64>> = pts.iter().map(|(_, p)| p.clone()).collect();
        let weights: Vec<Weight> = pts.iter().map(|(w, _)| *w).collect();
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Ok(WeightedBasis {
            points,
            weights,
            index,
        })
    }

    /// Normalized volume N! Vol; 0 with `lower_dimensional = true` when the
    /// hull does not span the ambient space.
    pub fn normalized_volume(&self) -> NormalizedVolume {
        if self.dim < self.ambient {
            return NormalizedVolume {
                value: 0,
                lower_dimensional: true,
            };
        }
        let pts: Vec<Vec<i128>> = self
            .points
            .iter()
            .map(|p| p.iter().map(|&v| v as i128).collect())
            .collect();
        let simplices = triangulate(&pts);
        let mut total: i128 = 0;
        for s in &simplices {
            let base = &s[0];
            let mat: Vec<Vec<i128>> = s[1..]
                .iter()
                .map(|v| v.iter().zip(base).map(|(&a, &b)| a - b).collect())
                .collect();
            total += linalg::det_i128(&mat).abs();
        }
        NormalizedVolume {
            value: total,
            lower_dimensional: false,
        }
    }

    /// Proper faces that do not contain the origin, as sets of point indices.
    /// Every proper face is an intersection of facets.
    pub fn faces_not_containing_origin(&self) -> Result<Vec<Vec<usize>>> {
        if self.facets.len() > 20 {
            return Err(Error::DimensionCap {
                n: self.facets.len(),
                cap: 20,
            });
        }
        let proj: Vec<Vec<i128>> = self.points.iter().map(|p| project(p, &self.chart)).collect();
        let tight_sets: Vec<BTreeSet<usize>> = self
            .facets
            .iter()
            .map(|f| {
                proj.iter()
                    .enumerate()
                    .filter(|(_, p)| {
                        f.normal.iter().zip(p.iter()).map(|(&n, &x)| n * x).sum::<i128>() == f.rhs
                    })
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
        let nf = self.facets.len();
        for mask in 1u32..(1 << nf) {
            let mut acc: Option<BTreeSet<usize>> = None;
            for (i, ts) in tight_sets.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    acc = Some(match acc {
                        None => ts.clone(),
                        Some(a) => a.intersection(ts).copied().collect(),
                    });
                }
            }
            let acc = acc.unwrap();
            if !acc.is_empty() && !acc.contains(&0) {
                faces.insert(acc.into_iter().collect());
            }
        }
        Ok(faces.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizedVolume {
    pub value: i128,
    pub lower_dimensional: bool,
}

/// The enumerated monoid points with w <= W_cut; the index set of every
/// truncated operator.
#[derive(Debug, Clone)]
pub struct WeightedBasis {
    pub points: Vec<Vec<i64>>,
    pub weights: Vec<Weight>,
    pub index: BTreeMap<Vec<i64>, usize>,
}

impl WeightedBasis {
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn position(&self, u: &[i64]) -> Option<usize> {
        self.index.get(u).copied()
    }
    pub fn max_weight(&self) -> Weight {
        self.weights.last().copied().unwrap_or_else(Weight::zero)
    }
}

/// Recursive lexicographic triangulation of the convex hull of integer
/// points; returns simplices as vertex coordinate lists.
fn triangulate(points: &[Vec<i128>]) -> Vec<Vec<Vec<i128>>> {
    // rank of translated points
    let base = points[0].clone();
    let translated: Vec<Vec<i64>> = points
        .iter()
        .map(|p| {
            p.iter()
                .zip(&base)
                .map(|(&a, &b)| i64::try_from(a - b).expect("coordinates fit i64"))
                .collect()
        })
        .collect();
    let rat: Vec<Vec<_>> = translated
        .iter()
        .map(|p| p.iter().map(|&v| linalg::big_rat(v, 1)).collect())
        .collect();
    let r = linalg::rank(&rat);
    if r == 0 {
        return Vec::new();
    }
    let chart = find_chart(&translated, r);
    let proj: Vec<Vec<i128>> = translated.iter().map(|p| project(p, &chart)).collect();
    if r == 1 {
        let imin = (0..proj.len()).min_by_key(|&i| proj[i][0]).unwrap();
        let imax = (0..proj.len()).max_by_key(|&i| proj[i][0]).unwrap();
        if proj[imin][0] == proj[imax][0] {
            return Vec::new();
        }
        return vec![vec![points[imin].clone(), points[imax].clone()]];
    }
    let facets = hull_facets(&proj);
    // apex: lexicographically smallest point
    let apex = (0..points.len()).min_by_key(|&i| points[i].clone()).unwrap();
    let apex_proj = &proj[apex];
    let mut out = Vec::new();
    for f in &facets {
        let av: i128 = f.normal.iter().zip(apex_proj).map(|(&n, &x)| n * x).sum();
        if av == f.rhs {
            continue; // apex on this facet
        }
        let face_pts: Vec<Vec<i128>> = (0..points.len())
            .filter(|&i| {
                f.normal
                    .iter()
                    .zip(&proj[i])
                    .map(|(&n, &x)| n * x)
                    .sum::<i128>()
                    == f.rhs
            })
            .map(|i| points[i].clone())
            .collect();
        for mut s in triangulate(&face_pts) {
            s.insert(0, points[apex].clone());
            out.push(s);
        }
    }
    out
}
