//! File formats.
//!
//! Binary artifacts start with a fixed header:
//!
//! ```text
//! "JPLT" | version u16 | p u64 | m u16 | K u32 | role u8 | role dims
//! ```
//!
//! All integers are little-endian, and every field element is an 8-byte
//! canonical residue. Role dims are `rows u32, cols u32` for matrices and
//! `n u32` for answers and recovered outputs; datasets have none. Matrices
//! carry `m = 0` since a query does not depend on the message length.
//!
//! Demands, plans and reports are JSON. Message indices in JSON are 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{Dataset, FieldElement, Message, PrimeField};
use crate::matgf::Matrix;
use crate::protocol::{Answer, DemandSpec, Mode, RateReport, RecoveryPlan};

pub const MAGIC: &[u8; 4] = b"JPLT";
pub const VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Role {
    Dataset = 1,
    Matrix = 2,
    Answer = 3,
    Recovered = 4,
}

impl Role {
    fn from_byte(b: u8) -> Result<Role> {
        Ok(match b {
            1 => Role::Dataset,
            2 => Role::Matrix,
            3 => Role::Answer,
            4 => Role::Recovered,
            _ => return Err(Error::Malformed(format!("unknown role byte {b}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FileHeader {
    pub version: u16,
    pub field: PrimeField,
    pub m: u16,
    pub k: u32,
    pub role: Role,
}

impl FileHeader {
    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.extend_from_slice(&self.field.modulus().to_le_bytes());
        out.extend_from_slice(&self.m.to_le_bytes());
        out.extend_from_slice(&self.k.to_le_bytes());
        out.push(self.role as u8);
    }

    fn read(r: &mut Reader<'_>) -> Result<FileHeader> {
        if r.take(4)? != MAGIC {
            return Err(Error::Malformed("bad magic".into()));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::Malformed(format!("unsupported version {version}")));
        }
        let p = r.u64()?;
        let field = PrimeField::new(p).map_err(|e| Error::Malformed(format!("header modulus: {e}")))?;
        let m = r.u16()?;
        let k = r.u32()?;
        let role = Role::from_byte(r.u8()?)?;
        Ok(FileHeader {
            version,
            field,
            m,
            k,
            role,
        })
    }
}

/// Reads just the header of a binary artifact.
pub fn peek_header(bytes: &[u8]) -> Result<FileHeader> {
    FileHeader::read(&mut Reader::new(bytes))
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Malformed(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn element(&mut self, field: PrimeField) -> Result<FieldElement> {
        field.canonical(self.u64()?)
    }

    pub(crate) fn elements(&mut self, field: PrimeField, n: usize) -> Result<Vec<FieldElement>> {
        // Check the length up front so a bogus count cannot drive a huge allocation.
        if n.checked_mul(8).is_none_or(|b| b > self.remaining()) {
            return Err(Error::Malformed(format!("truncated: need {n} elements")));
        }
        (0..n).map(|_| self.element(field)).collect()
    }

    pub(crate) fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::Malformed(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

pub(crate) fn put_elements(out: &mut Vec<u8>, xs: &[FieldElement]) {
    for x in xs {
        out.extend_from_slice(&x.value().to_le_bytes());
    }
}

fn narrow<T: TryFrom<usize>>(v: usize, what: &str) -> Result<T> {
    T::try_from(v).map_err(|_| Error::ParamInvalid(format!("{what} = {v} does not fit the file format")))
}

fn expect_role(h: &FileHeader, role: Role) -> Result<()> {
    if h.role != role {
        return Err(Error::Malformed(format!("expected {role:?} file, found {:?}", h.role)));
    }
    Ok(())
}

fn header(field: PrimeField, m: usize, k: usize, role: Role) -> Result<FileHeader> {
    Ok(FileHeader {
        version: VERSION,
        field,
        m: narrow(m, "m")?,
        k: narrow(k, "K")?,
        role,
    })
}

/// Row-major body without a header, as used in QUERY frames.
pub(crate) fn put_matrix_body(out: &mut Vec<u8>, g: &Matrix) -> Result<()> {
    out.extend_from_slice(&narrow::<u32>(g.rows(), "rows")?.to_le_bytes());
    out.extend_from_slice(&narrow::<u32>(g.cols(), "cols")?.to_le_bytes());
    put_elements(out, g.entries());
    Ok(())
}

pub(crate) fn read_matrix_body(r: &mut Reader<'_>, field: PrimeField) -> Result<Matrix> {
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Malformed("matrix dims overflow".into()))?;
    let data = r.elements(field, n)?;
    Matrix::new(field, rows, cols, data)
}

pub fn encode_matrix(g: &Matrix) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(31 + 8 * g.entries().len());
    header(g.field(), 0, g.cols(), Role::Matrix)?.write(&mut out);
    put_matrix_body(&mut out, g)?;
    Ok(out)
}

pub fn decode_matrix(bytes: &[u8]) -> Result<Matrix> {
    let mut r = Reader::new(bytes);
    let h = FileHeader::read(&mut r)?;
    expect_role(&h, Role::Matrix)?;
    let g = read_matrix_body(&mut r, h.field)?;
    if g.cols() != h.k as usize {
        return Err(Error::Malformed(format!(
            "header K = {} but matrix has {} columns",
            h.k,
            g.cols()
        )));
    }
    r.finish()?;
    Ok(g)
}

pub(crate) fn put_messages(out: &mut Vec<u8>, msgs: &[Message]) {
    for msg in msgs {
        put_elements(out, msg.coords());
    }
}

pub(crate) fn read_messages(r: &mut Reader<'_>, field: PrimeField, m: usize, n: usize) -> Result<Vec<Message>> {
    if m == 0 {
        return Err(Error::Malformed("message length 0".into()));
    }
    let total = n
        .checked_mul(m)
        .ok_or_else(|| Error::Malformed("dims overflow".into()))?;
    let flat = r.elements(field, total)?;
    flat.chunks(m).map(|c| Message::new(c.to_vec())).collect()
}

pub fn encode_dataset(data: &Dataset) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(21 + 8 * data.k() * data.m());
    header(data.field(), data.m(), data.k(), Role::Dataset)?.write(&mut out);
    put_messages(&mut out, data.messages());
    Ok(out)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader::new(bytes);
    let h = FileHeader::read(&mut r)?;
    expect_role(&h, Role::Dataset)?;
    let msgs = read_messages(&mut r, h.field, h.m as usize, h.k as usize)?;
    r.finish()?;
    Dataset::new(h.field, h.m as usize, msgs)
}

fn encode_message_list(field: PrimeField, k: usize, msgs: &[Message], role: Role) -> Result<Vec<u8>> {
    let m = msgs.first().map_or(0, Message::dim);
    if msgs.is_empty() || msgs.iter().any(|x| x.dim() != m) {
        return Err(crate::error::mismatch(
            "message list must be non-empty with a common length",
        ));
    }
    let mut out = Vec::with_capacity(25 + 8 * m * msgs.len());
    header(field, m, k, role)?.write(&mut out);
    out.extend_from_slice(&narrow::<u32>(msgs.len(), "n")?.to_le_bytes());
    put_messages(&mut out, msgs);
    Ok(out)
}

fn decode_message_list(bytes: &[u8], role: Role) -> Result<(FileHeader, Vec<Message>)> {
    let mut r = Reader::new(bytes);
    let h = FileHeader::read(&mut r)?;
    expect_role(&h, role)?;
    let n = r.u32()? as usize;
    let msgs = read_messages(&mut r, h.field, h.m as usize, n)?;
    r.finish()?;
    Ok((h, msgs))
}

/// `k` is the query's column count, kept so a mismatched answer can be caught.
pub fn encode_answer(field: PrimeField, k: usize, answer: &Answer) -> Result<Vec<u8>> {
    encode_message_list(field, k, &answer.entries, Role::Answer)
}

pub fn decode_answer(bytes: &[u8]) -> Result<(FileHeader, Answer)> {
    let (h, entries) = decode_message_list(bytes, Role::Answer)?;
    Ok((h, Answer { entries }))
}

pub fn encode_recovered(field: PrimeField, k: usize, z: &[Message]) -> Result<Vec<u8>> {
    encode_message_list(field, k, z, Role::Recovered)
}

pub fn decode_recovered(bytes: &[u8]) -> Result<(FileHeader, Vec<Message>)> {
    decode_message_list(bytes, Role::Recovered)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandDoc {
    pub p: u64,
    #[serde(rename = "K")]
    pub k: usize,
    /// 1-based, ascending.
    #[serde(rename = "W")]
    pub support: Vec<usize>,
    #[serde(rename = "V")]
    pub coefficients: Vec<Vec<u64>>,
}

impl DemandDoc {
    pub fn from_demand(demand: &DemandSpec) -> Self {
        DemandDoc {
            p: demand.field().modulus(),
            k: demand.k(),
            support: demand.support().iter().map(|i| i + 1).collect(),
            coefficients: demand.coefficients().to_u64_rows(),
        }
    }

    pub fn to_demand(&self) -> Result<DemandSpec> {
        let field = PrimeField::new(self.p)?;
        if self.support.contains(&0) {
            return Err(Error::SpecInvalid("W uses 1-based indices".into()));
        }
        let support = self.support.iter().map(|i| i - 1).collect();
        let v = canonical_rows(field, &self.coefficients, "V")?;
        DemandSpec::new(self.k, support, v)
    }
}

fn canonical_rows(field: PrimeField, rows: &[Vec<u64>], what: &str) -> Result<Matrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Malformed(format!(
            "{what} must be a non-empty rectangular array"
        )));
    }
    let data = rows
        .iter()
        .flatten()
        .map(|&v| field.canonical(v))
        .collect::<Result<Vec<_>>>()?;
    Matrix::new(field, rows.len(), cols, data)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDoc {
    pub p: u64,
    pub mode: Mode,
    pub answer_len: usize,
    /// One row per demanded combination.
    pub vectors: Vec<Vec<u64>>,
}

impl PlanDoc {
    pub fn from_plan(plan: &RecoveryPlan) -> Self {
        PlanDoc {
            p: plan.field.modulus(),
            mode: plan.mode,
            answer_len: plan.vectors.first().map_or(0, Vec::len),
            vectors: plan
                .vectors
                .iter()
                .map(|v| v.iter().map(|x| x.value()).collect())
                .collect(),
        }
    }

    pub fn to_plan(&self) -> Result<RecoveryPlan> {
        let field = PrimeField::new(self.p)?;
        if self.vectors.iter().any(|v| v.len() != self.answer_len) {
            return Err(Error::Malformed("plan vectors disagree with answer_len".into()));
        }
        let vectors = self
            .vectors
            .iter()
            .map(|v| v.iter().map(|&x| field.canonical(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(RecoveryPlan {
            mode: self.mode,
            field,
            vectors,
        })
    }
}

pub fn rate_report_json(r: &RateReport) -> serde_json::Value {
    let ratio = |x: &num_rational::Ratio<u64>| format!("{}/{}", x.numer(), x.denom());
    serde_json::json!({
        "jplt_rate": ratio(&r.jplt_rate),
        "pir_baseline": ratio(&r.pir_baseline),
        "plc_baseline": ratio(&r.plc_baseline),
        "answer_bits": r.answer_bits,
    })
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Malformed(format!("json: {e}")))
}
