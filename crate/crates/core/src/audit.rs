//! Privacy audits for linear query schemes.
//!
//! Two independent checks. The structural audit looks at a single query
//! matrix `G` and asks, for every candidate support `W*`, what the code of `G`
//! looks like when shortened to `W*`: if some `W*` admits no `L`-dimensional
//! MDS subcode, the server can rule it out. The posterior oracle enumerates
//! the whole probability space of (support, coefficients, key) at toy sizes
//! and computes `Pr(W | G)` exactly.

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ff::{FieldElement, PrimeField};
use crate::grscode::{ColumnAssignment, Extension, GrsSpec};
use crate::matgf::{binomial, Matrix};
use crate::protocol::{construct, construct_generic, DemandSpec, Mode, QueryKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditLimits {
    /// Candidate supports examined by the structural audit.
    pub subsets: u128,
    /// (support, coefficients, key) tuples enumerated by the posterior oracle.
    pub tuples: u128,
    /// Minors or subspaces examined per MDS question.
    pub minors: u128,
}

impl Default for AuditLimits {
    fn default() -> Self {
        AuditLimits {
            subsets: 1_000_000,
            tuples: 100_000_000,
            minors: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetRecord {
    /// 1-based message indices.
    pub subset: Vec<usize>,
    pub dimension: usize,
    /// Whether the shortened code holds an `L`-dimensional MDS subcode.
    /// `None` when strict mode already failed on the dimension.
    pub mds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    pub k: usize,
    pub d: usize,
    pub l: usize,
    pub strict: bool,
    pub pass: bool,
    pub records: Vec<SubsetRecord>,
}

impl StructuralReport {
    pub fn failures(&self) -> impl Iterator<Item = &SubsetRecord> {
        let (l, strict) = (self.l, self.strict);
        self.records.iter().filter(move |r| !record_passes(r, l, strict))
    }
}

fn record_passes(r: &SubsetRecord, l: usize, strict: bool) -> bool {
    let dim_ok = if strict { r.dimension == l } else { r.dimension >= l };
    dim_ok && r.mds == Some(true)
}

/// Shortens `G` on every `D`-subset. Non-strict mode is the necessary
/// condition (some MDS `L x D` demand on each subset is recoverable); strict
/// mode also requires the shortened code to have dimension exactly `L`.
pub fn verify_structural(
    g: &Matrix,
    d: usize,
    l: usize,
    strict: bool,
    limits: &AuditLimits,
) -> Result<StructuralReport> {
    let k = g.cols();
    if d > k || l > d || l == 0 {
        return Err(Error::ParamInvalid(format!(
            "need 1 <= L <= D <= K, got L={l} D={d} K={k}"
        )));
    }
    let needed = binomial(k, d);
    if needed > limits.subsets {
        return Err(Error::WorkLimitExceeded {
            needed,
            limit: limits.subsets,
        });
    }
    let subsets: Vec<Vec<usize>> = (0..k).combinations(d).collect();
    let records = subsets
        .par_iter()
        .map(|s| {
            let sub = g.shortened_subcode(s)?;
            let dimension = sub.rows();
            let mds = if strict && dimension != l {
                None
            } else {
                Some(contains_mds_subcode(&sub, l, limits.minors)?)
            };
            Ok(SubsetRecord {
                subset: s.iter().map(|i| i + 1).collect(),
                dimension,
                mds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = records.iter().all(|r| record_passes(r, l, strict));
    Ok(StructuralReport {
        k,
        d,
        l,
        strict,
        pass,
        records,
    })
}

pub fn necessary_condition_check(g: &Matrix, d: usize, l: usize, limits: &AuditLimits) -> Result<bool> {
    Ok(verify_structural(g, d, l, false, limits)?.pass)
}

/// Does the code with basis `basis` (independent rows) contain an
/// `l`-dimensional subcode whose generators form an MDS matrix?
pub fn contains_mds_subcode(basis: &Matrix, l: usize, limit: u128) -> Result<bool> {
    let (dim, n) = (basis.rows(), basis.cols());
    let field = basis.field();
    if dim < l {
        return Ok(false);
    }
    if dim == l {
        return basis.is_mds_with_limit(limit);
    }
    if dim == n && n as u64 <= field.modulus() {
        // The full space contains every code, a GRS [n, l] code among them.
        return Ok(true);
    }
    let p = field.modulus() as u128;
    let needed = gaussian_binomial(dim, l, p).saturating_mul(binomial(n, l));
    if needed > limit {
        return Err(Error::WorkLimitExceeded { needed, limit });
    }
    for pivots in (0..dim).combinations(l) {
        let free: Vec<(usize, usize)> = (0..l)
            .flat_map(|r| {
                ((pivots[r] + 1)..dim)
                    .filter(|c| !pivots.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let mut digits = vec![0u64; free.len()];
        loop {
            let mut x = Matrix::zeros(field, l, dim);
            for (r, &c) in pivots.iter().enumerate() {
                x.set(r, c, FieldElement::ONE);
            }
            for (&(r, c), &v) in free.iter().zip(&digits) {
                x.set(r, c, field.element(v));
            }
            if x.mul(basis)?.is_mds_with_limit(limit)? {
                return Ok(true);
            }
            if !advance(&mut digits, field.modulus()) {
                break;
            }
        }
    }
    Ok(false)
}

/// Mixed-radix increment; false once every digit wrapped.
fn advance(digits: &mut [u64], radix: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Number of `k`-dimensional subspaces of GF(q)^n, saturating.
fn gaussian_binomial(n: usize, k: usize, q: u128) -> u128 {
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        let a = q.checked_pow((n - i) as u32).map(|v| v - 1);
        let b = q.checked_pow((i + 1) as u32).map(|v| v - 1);
        match (a.and_then(|a| num.checked_mul(a)), b.and_then(|b| den.checked_mul(b))) {
            (Some(x), Some(y)) => {
                num = x;
                den = y;
            }
            _ => return u128::MAX,
        }
    }
    num / den
}

/// A query scheme whose key space can be listed exhaustively.
pub trait EnumerableScheme: Sync {
    /// One query per equally likely key realization for `demand`, or `None`
    /// if the scheme does not accept this demand.
    fn realizations(&self, demand: &DemandSpec) -> Result<Option<Vec<Matrix>>>;

    /// Upper bound on the number of realizations for any demand of this shape.
    fn realization_bound(&self, k: usize, d: usize, l: usize, p: u64) -> u128;
}

/// The specialized MDS code scheme, enumerated with the same draw semantics as
/// [`QueryKey::sample`]: ordered multiplier tuples with replacement, ordered
/// point tuples without replacement, and in generic mode every complement
/// block that makes `H` MDS.
#[derive(Clone, Copy, Debug)]
pub struct SpecializedMds(pub Mode);

impl EnumerableScheme for SpecializedMds {
    fn realizations(&self, demand: &DemandSpec) -> Result<Option<Vec<Matrix>>> {
        let field = demand.field();
        let (k, d, l) = (demand.k(), demand.d(), demand.l());
        let p = field.modulus();
        let assignment = ColumnAssignment::from_support(k, demand.support())?;
        let mut out = Vec::new();
        match self.0 {
            Mode::Grs => {
                let heads: Vec<Vec<FieldElement>> = if l == 1 {
                    ordered_distinct(field, &[], d)
                } else {
                    match GrsSpec::from_matrix(demand.coefficients()) {
                        Ok(spec) => vec![spec.points().to_vec()],
                        Err(Error::NotGrs) => return Ok(None),
                        Err(e) => return Err(e),
                    }
                };
                let extra = k - d;
                let multiplier_tuples = all_tuples(extra, p - 1, |v| field.element(v + 1));
                for head in &heads {
                    for points in ordered_distinct(field, head, extra) {
                        for multipliers in &multiplier_tuples {
                            let key = QueryKey {
                                head_points: (l == 1).then(|| head.clone()),
                                extension: Extension {
                                    multipliers: multipliers.clone(),
                                    points: points.clone(),
                                },
                                assignment: assignment.clone(),
                                resample_seed: 0,
                            };
                            out.push(construct(demand, &key, Mode::Grs)?.query.generator);
                        }
                    }
                }
            }
            Mode::Generic => {
                let dual = demand.coefficients().null_space_basis();
                let (rows, extra) = (dual.rows(), k - d);
                for entries in all_tuples(rows * extra, p, |v| field.element(v)) {
                    let block = Matrix::new(field, rows, extra, entries)?;
                    if let Some(c) = construct_generic(demand, &dual, &block)? {
                        out.push(c.query.generator);
                    }
                }
                if out.is_empty() {
                    return Ok(None);
                }
            }
        }
        Ok(Some(out))
    }

    fn realization_bound(&self, k: usize, d: usize, l: usize, p: u64) -> u128 {
        let p = p as u128;
        let extra = (k - d) as u32;
        match self.0 {
            Mode::Grs => {
                let heads = if l == 1 { falling(p, d as u128) } else { 1 };
                heads
                    .saturating_mul((p - 1).saturating_pow(extra))
                    .saturating_mul(falling(p - d as u128, extra as u128))
            }
            Mode::Generic => p.saturating_pow(((d - l) * (k - d)) as u32),
        }
    }
}

fn falling(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n.saturating_sub(i)))
}

/// All `len`-tuples over `0..radix`, mapped elementwise.
fn all_tuples(len: usize, radix: u64, map: impl Fn(u64) -> FieldElement) -> Vec<Vec<FieldElement>> {
    let mut out = Vec::new();
    let mut digits = vec![0u64; len];
    loop {
        out.push(digits.iter().map(|&v| map(v)).collect());
        if !advance(&mut digits, radix) {
            break;
        }
    }
    out
}

/// Ordered `len`-tuples of distinct elements of GF(p) avoiding `used`.
fn ordered_distinct(field: PrimeField, used: &[FieldElement], len: usize) -> Vec<Vec<FieldElement>> {
    let pool: Vec<FieldElement> = field.elements().filter(|e| !used.contains(e)).collect();
    pool.into_iter().permutations(len).collect()
}

/// Every `l x d` MDS matrix over GF(p).
pub fn all_mds_matrices(field: PrimeField, l: usize, d: usize, limit: u128) -> Result<Vec<Matrix>> {
    let p = field.modulus();
    if l == 1 {
        return all_tuples(d, p - 1, |v| field.element(v + 1))
            .into_iter()
            .map(|row| Matrix::new(field, 1, d, row))
            .collect();
    }
    let needed = (p as u128).saturating_pow((l * d) as u32);
    if needed > limit {
        return Err(Error::WorkLimitExceeded { needed, limit });
    }
    let mut out = Vec::new();
    for entries in all_tuples(l * d, p, |v| field.element(v)) {
        let m = Matrix::new(field, l, d, entries)?;
        if m.is_mds()? {
            out.push(m);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosteriorEntry {
    pub query: Matrix,
    /// `Pr(W = subsets[i] | G = query)`.
    pub posterior: Vec<BigRational>,
    pub total_variation: BigRational,
}

/// Exact posterior of the support given each realized query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosteriorTable {
    pub k: usize,
    pub d: usize,
    pub l: usize,
    pub p: u64,
    /// Candidate supports, 0-based, in lexicographic order.
    pub subsets: Vec<Vec<usize>>,
    pub prior: BigRational,
    pub entries: Vec<PosteriorEntry>,
    pub max_total_variation: BigRational,
    pub tuples_enumerated: u128,
    /// Coefficient matrices the scheme refused (counted once per support).
    pub skipped_demands: usize,
}

impl PosteriorTable {
    pub fn is_private(&self) -> bool {
        self.max_total_variation.is_zero()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "K": self.k,
            "D": self.d,
            "L": self.l,
            "p": self.p,
            "prior": fmt_ratio(&self.prior),
            "subsets": self.subsets.iter().map(|s| s.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "realized_queries": self.entries.len(),
            "tuples_enumerated": self.tuples_enumerated.to_string(),
            "skipped_demands": self.skipped_demands,
            "max_total_variation": fmt_ratio(&self.max_total_variation),
            "private": self.is_private(),
            "entries": self.entries.iter().map(|e| serde_json::json!({
                "query": e.query.to_u64_rows(),
                "posterior": e.posterior.iter().map(fmt_ratio).collect::<Vec<_>>(),
                "total_variation": fmt_ratio(&e.total_variation),
            })).collect::<Vec<_>>(),
        })
    }
}

/// `"num/den"` in lowest terms.
pub fn fmt_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn posterior_oracle(
    k: usize,
    d: usize,
    l: usize,
    p: u64,
    scheme: &dyn EnumerableScheme,
    limits: &AuditLimits,
) -> Result<PosteriorTable> {
    if !(1 <= l && l <= d && d <= k) {
        return Err(Error::ParamInvalid(format!(
            "need 1 <= L <= D <= K, got L={l} D={d} K={k}"
        )));
    }
    let field = PrimeField::new(p)?;
    let subsets: Vec<Vec<usize>> = (0..k).combinations(d).collect();
    let v_bound = if l == 1 {
        ((p - 1) as u128).saturating_pow(d as u32)
    } else {
        (p as u128).saturating_pow((l * d) as u32)
    };
    let needed = (subsets.len() as u128)
        .saturating_mul(v_bound)
        .saturating_mul(scheme.realization_bound(k, d, l, p));
    if needed > limits.tuples {
        return Err(Error::WorkLimitExceeded {
            needed,
            limit: limits.tuples,
        });
    }
    let coefficient_space = all_mds_matrices(field, l, d, limits.tuples)?;

    // Per support: the realizations of every accepted coefficient matrix.
    let per_support = subsets
        .par_iter()
        .map(|w| {
            let mut accepted = Vec::new();
            let mut skipped = 0usize;
            for v in &coefficient_space {
                let demand = DemandSpec::new(k, w.clone(), v.clone())?;
                match scheme.realizations(&demand)? {
                    Some(qs) if !qs.is_empty() => accepted.push(qs),
                    _ => skipped += 1,
                }
            }
            Ok((accepted, skipped))
        })
        .collect::<Result<Vec<_>>>()?;

    let n_subsets = subsets.len();
    let prior = BigRational::new(BigInt::one(), BigInt::from(n_subsets));
    let mut weights: HashMap<Matrix, Vec<BigRational>> = HashMap::new();
    let mut tuples = 0u128;
    let mut skipped_demands = 0;
    for (wi, (accepted, skipped)) in per_support.iter().enumerate() {
        skipped_demands += skipped;
        if accepted.is_empty() {
            continue;
        }
        for qs in accepted {
            tuples += qs.len() as u128;
            let denom = BigInt::from(n_subsets) * BigInt::from(accepted.len()) * BigInt::from(qs.len());
            let w = BigRational::new(BigInt::one(), denom);
            for g in qs {
                let slot = weights
                    .entry(g.clone())
                    .or_insert_with(|| vec![BigRational::zero(); n_subsets]);
                slot[wi] += &w;
            }
        }
    }

    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut entries: Vec<PosteriorEntry> = weights
        .into_iter()
        .map(|(query, ws)| {
            let total: BigRational = ws.iter().sum();
            let posterior: Vec<BigRational> = ws.iter().map(|w| w / &total).collect();
            let tv: BigRational = posterior.iter().map(|q| (q - &prior).abs()).sum::<BigRational>() * &half;
            PosteriorEntry {
                query,
                posterior,
                total_variation: tv,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        a.query
            .entries()
            .cmp(b.query.entries())
            .then(a.query.rows().cmp(&b.query.rows()))
    });
    let max_total_variation = entries
        .iter()
        .map(|e| e.total_variation.clone())
        .max()
        .unwrap_or_else(BigRational::zero);
    Ok(PosteriorTable {
        k,
        d,
        l,
        p,
        subsets,
        prior,
        entries,
        max_total_variation,
        tuples_enumerated: tuples,
        skipped_demands,
    })
}
