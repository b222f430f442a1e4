//! The three protocol roles: the user builds a query matrix `G` from its
//! demand and private key, the server answers with `y = G X`, and the user
//! recovers `V X_W` from `y`. Also the two baseline schemes and rate accounting.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{mismatch, Error, Result};
use crate::ff::{Dataset, FieldElement, Message, PrimeField};
use crate::grscode::{
    assemble_columns, extend_dual, generator_from_parity, recovery_polynomials, ColumnAssignment, Extension, GrsSpec,
};
use crate::matgf::Matrix;

/// Attempts allowed when redrawing the complement block of `H` in generic mode.
pub const GENERIC_RESAMPLE_CAP: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Closed-form construction for demands whose coefficient matrix is GRS.
    Grs,
    /// Null-space construction for any MDS coefficient matrix.
    Generic,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grs" => Ok(Mode::Grs),
            "generic" => Ok(Mode::Generic),
            other => Err(Error::ParamInvalid(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Grs => "grs",
            Mode::Generic => "generic",
        })
    }
}

/// `L` linear combinations, given by the `L x D` MDS matrix `V`, of the
/// messages at the (0-based, increasing) positions `W`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandSpec {
    k: usize,
    support: Vec<usize>,
    coefficients: Matrix,
}

impl DemandSpec {
    pub fn new(k: usize, support: Vec<usize>, coefficients: Matrix) -> Result<Self> {
        let (l, d) = (coefficients.rows(), coefficients.cols());
        if !(1 <= l && l <= d && d <= k) {
            return Err(Error::ParamInvalid(format!(
                "need 1 <= L <= D <= K, got L={l} D={d} K={k}"
            )));
        }
        if support.len() != d {
            return Err(mismatch(format!(
                "support of size {} for {d} coefficient columns",
                support.len()
            )));
        }
        if !support.windows(2).all(|w| w[0] < w[1]) || support[d - 1] >= k {
            return Err(Error::ParamInvalid("support must be increasing indices below K".into()));
        }
        if GrsSpec::recognize(&coefficients).is_none() && !coefficients.is_mds()? {
            return Err(Error::NotMds);
        }
        Ok(DemandSpec {
            k,
            support,
            coefficients,
        })
    }

    /// Uniform support with a GRS coefficient matrix from uniform nonzero
    /// multipliers and uniform distinct evaluation points.
    pub fn random_grs<R: Rng + ?Sized>(field: PrimeField, k: usize, d: usize, l: usize, rng: &mut R) -> Result<Self> {
        check_params(k, d, l)?;
        let draw = Extension::sample(field, &[], d, rng)?;
        let spec = GrsSpec::new(field, draw.multipliers, draw.points, l)?;
        DemandSpec::new(k, random_support(k, d, rng), spec.generator())
    }

    /// Uniform support with a uniformly random MDS coefficient matrix, found by
    /// rejection. Over small fields this may need many draws.
    pub fn random_mds<R: Rng + ?Sized>(field: PrimeField, k: usize, d: usize, l: usize, rng: &mut R) -> Result<Self> {
        check_params(k, d, l)?;
        for _ in 0..10_000 {
            let data = (0..l * d).map(|_| field.random(rng)).collect();
            let v = Matrix::new(field, l, d, data)?;
            if v.is_mds()? {
                return DemandSpec::new(k, random_support(k, d, rng), v);
            }
        }
        Err(Error::ExtensionFailed { attempts: 10_000 })
    }

    pub fn field(&self) -> PrimeField {
        self.coefficients.field()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.support.len()
    }

    pub fn l(&self) -> usize {
        self.coefficients.rows()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn coefficients(&self) -> &Matrix {
        &self.coefficients
    }

    /// The `L x K` matrix `U` carrying `V` on the support and zeros elsewhere.
    pub fn embedded(&self) -> Matrix {
        let mut u = Matrix::zeros(self.field(), self.l(), self.k);
        for i in 0..self.l() {
            for (j, &pos) in self.support.iter().enumerate() {
                u.set(i, pos, self.coefficients.get(i, j));
            }
        }
        u
    }
}

fn check_params(k: usize, d: usize, l: usize) -> Result<()> {
    if 1 <= l && l <= d && d <= k {
        Ok(())
    } else {
        Err(Error::ParamInvalid(format!(
            "need 1 <= L <= D <= K, got L={l} D={d} K={k}"
        )))
    }
}

fn random_support<R: Rng + ?Sized>(k: usize, d: usize, rng: &mut R) -> Vec<usize> {
    let mut s = rand::seq::index::sample(rng, k, d).into_vec();
    s.sort_unstable();
    s
}

/// The user's private randomness.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QueryKey {
    /// Evaluation points for the demand coordinates when `L = 1`: a single row
    /// does not determine them, so they are drawn here instead.
    pub head_points: Option<Vec<FieldElement>>,
    /// Multipliers and evaluation points for the `K - D` other coordinates (grs mode).
    pub extension: Extension,
    pub assignment: ColumnAssignment,
    /// Seeds the complement-column draws of generic mode.
    pub resample_seed: u64,
}

impl QueryKey {
    /// Draw order: head points (grs, `L = 1` only), extension multipliers,
    /// extension points, then the generic-mode seed.
    pub fn sample<R: Rng + ?Sized>(demand: &DemandSpec, mode: Mode, rng: &mut R) -> Result<Self> {
        let field = demand.field();
        let (k, d) = (demand.k(), demand.d());
        if (k as u64) > field.modulus() {
            return Err(Error::FieldTooSmall {
                p: field.modulus(),
                needed: k,
            });
        }
        let assignment = ColumnAssignment::from_support(k, demand.support())?;
        let (head_points, extension) = match mode {
            Mode::Grs => {
                let head = if demand.l() == 1 {
                    Extension::sample(field, &[], d, rng)?.points
                } else {
                    GrsSpec::from_matrix(demand.coefficients())?.points().to_vec()
                };
                let ext = Extension::sample(field, &head, k - d, rng)?;
                ((demand.l() == 1).then_some(head), ext)
            }
            Mode::Generic => (
                None,
                Extension {
                    multipliers: vec![],
                    points: vec![],
                },
            ),
        };
        Ok(QueryKey {
            head_points,
            extension,
            assignment,
            resample_seed: rng.next_u64(),
        })
    }
}

/// The query sent to the server: the matrix `G` and nothing else.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub generator: Matrix,
}

impl Query {
    pub fn k(&self) -> usize {
        self.generator.cols()
    }

    pub fn answer_len(&self) -> usize {
        self.generator.rows()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    pub entries: Vec<Message>,
}

impl Answer {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Coefficient vectors `c_1..c_L`; `Z_l = c_l^T y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryPlan {
    pub mode: Mode,
    pub field: PrimeField,
    pub vectors: Vec<Vec<FieldElement>>,
}

/// Every intermediate of a query construction, for inspection and auditing.
#[derive(Clone, Debug)]
pub struct Construction {
    /// Parity-check matrix `Lambda` of the code generated by `V`.
    pub dual: Matrix,
    /// The `(D - L) x K` extension `H` of `Lambda`.
    pub parity: Matrix,
    /// Position-ordered GRS description of `H` (grs mode).
    pub parity_spec: Option<GrsSpec>,
    /// Position-ordered GRS description of `G` (grs mode).
    pub generator_spec: Option<GrsSpec>,
    pub query: Query,
    pub plan: RecoveryPlan,
}

pub fn build_query(demand: &DemandSpec, key: &QueryKey, mode: Mode) -> Result<(Query, RecoveryPlan)> {
    let c = construct(demand, key, mode)?;
    Ok((c.query, c.plan))
}

pub fn construct(demand: &DemandSpec, key: &QueryKey, mode: Mode) -> Result<Construction> {
    let field = demand.field();
    if (demand.k() as u64) > field.modulus() {
        return Err(Error::FieldTooSmall {
            p: field.modulus(),
            needed: demand.k(),
        });
    }
    if key.assignment != ColumnAssignment::from_support(demand.k(), demand.support())? {
        return Err(Error::ParamMismatch(
            "key's column assignment does not match the demand support".into(),
        ));
    }
    match mode {
        Mode::Grs => construct_grs(demand, key),
        Mode::Generic => {
            let dual = demand.coefficients().null_space_basis();
            let mut rng = ChaCha8Rng::seed_from_u64(key.resample_seed);
            let (rows, extra) = (dual.rows(), demand.k() - demand.d());
            for _ in 0..GENERIC_RESAMPLE_CAP {
                let data = (0..rows * extra).map(|_| field.random(&mut rng)).collect();
                let block = Matrix::new(field, rows, extra, data)?;
                if let Some(c) = construct_generic(demand, &dual, &block)? {
                    return Ok(c);
                }
            }
            Err(Error::ExtensionFailed {
                attempts: GENERIC_RESAMPLE_CAP,
            })
        }
    }
}

fn construct_grs(demand: &DemandSpec, key: &QueryKey) -> Result<Construction> {
    let field = demand.field();
    let (d, l) = (demand.d(), demand.l());
    let v_spec = match (l, &key.head_points) {
        (1, Some(points)) => GrsSpec::new(field, demand.coefficients().row(0).to_vec(), points.clone(), 1)?,
        (1, None) => return Err(Error::ParamInvalid("single-row demand needs key head points".into())),
        _ => GrsSpec::from_matrix(demand.coefficients())?,
    };
    if key.extension.points.len() != demand.k() - d {
        return Err(mismatch("key extension length differs from K - D"));
    }
    let dual_spec = v_spec.dual();
    let dual = dual_spec.generator();
    let full = extend_dual(
        field,
        dual_spec.multipliers(),
        dual_spec.points(),
        &key.extension,
        d - l,
    )?;
    let parity_spec = assemble_columns(&full, &key.assignment)?;
    let parity = parity_spec.generator();
    let (generator, generator_spec) = generator_from_parity(&parity_spec);

    let mut vectors = recovery_polynomials(field, &key.extension.points, l);
    let u = demand.embedded();
    for (row, c) in vectors.iter_mut().enumerate() {
        normalize_plan_row(&generator, c, u.row(row), row)?;
    }
    Ok(Construction {
        dual,
        parity,
        parity_spec: Some(parity_spec),
        generator_spec: Some(generator_spec),
        query: Query { generator },
        plan: RecoveryPlan {
            mode: Mode::Grs,
            field,
            vectors,
        },
    })
}

/// Checks `c^T G = u` and, if it holds only up to a nonzero scalar, rescales `c`.
fn normalize_plan_row(g: &Matrix, c: &mut [FieldElement], u: &[FieldElement], row: usize) -> Result<()> {
    let f = g.field();
    let got = g.left_mul_vec(c)?;
    if got == u {
        return Ok(());
    }
    let violation =
        || Error::AlgebraViolation(format!("recovery vector {} does not reproduce its demand row", row + 1));
    let pivot = u.iter().position(|x| !x.is_zero()).ok_or_else(violation)?;
    if got[pivot].is_zero() {
        return Err(violation());
    }
    let scale = f.div(u[pivot], got[pivot])?;
    if got.iter().zip(u).any(|(&a, &b)| f.mul(scale, a) != b) {
        return Err(violation());
    }
    for x in c.iter_mut() {
        *x = f.mul(scale, *x);
    }
    Ok(())
}

/// Generic construction with an explicit complement block; `None` if the
/// resulting `H` is not MDS.
pub fn construct_generic(demand: &DemandSpec, dual: &Matrix, block: &Matrix) -> Result<Option<Construction>> {
    let field = demand.field();
    let k = demand.k();
    let assignment = ColumnAssignment::from_support(k, demand.support())?;
    if block.rows() != dual.rows() || block.cols() != k - demand.d() {
        return Err(mismatch("complement block has the wrong shape"));
    }
    let mut parity = Matrix::zeros(field, dual.rows(), k);
    for (j, &pos) in demand.support().iter().enumerate() {
        for i in 0..dual.rows() {
            parity.set(i, pos, dual.get(i, j));
        }
    }
    for (j, &pos) in assignment.complement_positions().iter().enumerate() {
        for i in 0..dual.rows() {
            parity.set(i, pos, block.get(i, j));
        }
    }
    if !parity.is_mds()? {
        return Ok(None);
    }
    let generator = parity.null_space_basis();
    let gt = generator.transpose();
    let u = demand.embedded();
    let vectors = (0..demand.l())
        .map(|row| gt.solve_right(u.row(row)))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::AlgebraViolation("demand row outside the query code".into()))?;
    Ok(Some(Construction {
        dual: dual.clone(),
        parity,
        parity_spec: None,
        generator_spec: None,
        query: Query { generator },
        plan: RecoveryPlan {
            mode: Mode::Generic,
            field,
            vectors,
        },
    }))
}

/// `y = G X`, one GF(p)-linear combination of the messages per row of `G`.
pub fn server_answer(query: &Query, data: &Dataset) -> Result<Answer> {
    let g = &query.generator;
    if g.field() != data.field() {
        return Err(Error::ParamMismatch(format!(
            "query over GF({}) for a dataset over GF({})",
            g.field().modulus(),
            data.field().modulus()
        )));
    }
    if g.cols() != data.k() {
        return Err(Error::ParamMismatch(format!(
            "query for K = {} but dataset has K = {}",
            g.cols(),
            data.k()
        )));
    }
    let f = data.field();
    let m = data.m();
    // column j of `coords` holds coordinate t of every message
    let coords: Vec<Vec<FieldElement>> = (0..m)
        .map(|t| data.messages().iter().map(|x| x.coords()[t]).collect())
        .collect();
    let entries = (0..g.rows())
        .map(|i| Message::new(coords.iter().map(|col| f.dot(g.row(i), col)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Answer { entries })
}

/// `Z_l = c_l^T y` for every plan row.
pub fn recover(answer: &Answer, plan: &RecoveryPlan) -> Result<Vec<Message>> {
    let f = plan.field;
    let m = answer.entries.first().map_or(0, Message::dim);
    plan.vectors
        .iter()
        .map(|c| {
            if c.len() != answer.len() {
                return Err(mismatch(format!(
                    "plan vector of length {} for an answer of length {}",
                    c.len(),
                    answer.len()
                )));
            }
            if answer.entries.iter().any(|y| y.dim() != m) {
                return Err(mismatch("answer entries differ in length"));
            }
            let coords = (0..m)
                .map(|t| {
                    let ys: Vec<FieldElement> = answer.entries.iter().map(|y| y.coords()[t]).collect();
                    f.dot(c, &ys)
                })
                .collect();
            Message::new(coords)
        })
        .collect()
}

/// `V X_W`, computed in the clear.
pub fn direct_demand_eval(data: &Dataset, demand: &DemandSpec) -> Result<Vec<Message>> {
    if data.k() != demand.k() || data.field() != demand.field() {
        return Err(Error::ParamMismatch("demand and dataset disagree on K or p".into()));
    }
    let subset: Vec<&Message> = demand.support().iter().map(|&i| &data.messages()[i]).collect();
    let v = demand.coefficients();
    (0..v.rows())
        .map(|l| crate::ff::msg_linear_combination(&data.field(), v.row(l), &subset))
        .collect()
}

/// Download everything: the trivially private scheme, rate `L / K`.
pub fn baseline_full_download(data: &Dataset) -> Answer {
    Answer {
        entries: data.messages().to_vec(),
    }
}

/// One single-combination exchange of the repeated-PLC baseline.
#[derive(Clone, Debug)]
pub struct Exchange {
    pub query: Query,
    pub plan: RecoveryPlan,
    pub answer: Answer,
    pub recovered: Message,
}

/// The single-row demands `(W, v_l)` the repeated-PLC baseline issues.
pub fn plc_row_demands(demand: &DemandSpec) -> Result<Vec<DemandSpec>> {
    let v = demand.coefficients();
    (0..demand.l())
        .map(|l| {
            let row = Matrix::new(v.field(), 1, v.cols(), v.row(l).to_vec())?;
            DemandSpec::new(demand.k(), demand.support().to_vec(), row)
        })
        .collect()
}

pub fn sample_plc_keys<R: Rng + ?Sized>(demand: &DemandSpec, mode: Mode, rng: &mut R) -> Result<Vec<QueryKey>> {
    plc_row_demands(demand)?
        .iter()
        .map(|row| QueryKey::sample(row, mode, rng))
        .collect()
}

/// Retrieves each combination separately with an `L = 1` exchange; every
/// answer has `K - D + 1` entries.
pub fn baseline_plc_repeated(
    data: &Dataset,
    demand: &DemandSpec,
    keys: &[QueryKey],
    mode: Mode,
) -> Result<Vec<Exchange>> {
    let rows = plc_row_demands(demand)?;
    if keys.len() != rows.len() {
        return Err(mismatch(format!("{} keys for {} combinations", keys.len(), rows.len())));
    }
    rows.iter()
        .zip(keys)
        .map(|(row, key)| {
            let (query, plan) = build_query(row, key, mode)?;
            let answer = server_answer(&query, data)?;
            let recovered = recover(&answer, &plan)?.remove(0);
            Ok(Exchange {
                query,
                plan,
                answer,
                recovered,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub jplt_rate: Ratio<u64>,
    pub pir_baseline: Ratio<u64>,
    pub plc_baseline: Ratio<u64>,
    pub answer_bits: f64,
}

pub fn rate_report(k: usize, d: usize, l: usize, p: u64, m: usize) -> Result<RateReport> {
    check_params(k, d, l)?;
    if m == 0 {
        return Err(Error::ParamInvalid("m must be at least 1".into()));
    }
    let field = PrimeField::new(p).map_err(|_| Error::ParamInvalid(format!("{p} is not a supported prime")))?;
    let (k, d, l) = (k as u64, d as u64, l as u64);
    Ok(RateReport {
        jplt_rate: Ratio::new(l, k - d + l),
        pir_baseline: Ratio::new(l, k),
        plc_baseline: Ratio::new(1, k - d + 1),
        answer_bits: (k - d + l) as f64 * m as f64 * field.bits(),
    })
}
