//! Prime-field arithmetic and the message space GF(p)^m.
//!
//! Messages are elements of GF(p^m), but every coefficient the protocol uses
//! lies in GF(p), so a message is only ever touched through GF(p)-linear
//! combinations. We therefore store it as a plain vector of `m` residues.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};

/// Exclusive upper bound on supported moduli. Products of two residues fit in `u128`.
pub const MAX_MODULUS: u64 = 1 << 61;

/// A canonical residue modulo the field prime.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The prime field GF(p).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    p: u64,
}

impl TryFrom<u64> for PrimeField {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.p
    }
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= MAX_MODULUS || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Number of bits of entropy carried by one uniform element.
    pub fn bits(&self) -> f64 {
        (self.p as f64).log2()
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn element(&self, v: u64) -> FieldElement {
        FieldElement(v % self.p)
    }

    pub fn from_i64(&self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.p as i64) as u64)
    }

    /// Accepts `v` only if it is already a canonical residue.
    pub fn canonical(&self, v: u64) -> Result<FieldElement> {
        if v < self.p {
            Ok(FieldElement(v))
        } else {
            Err(Error::Malformed(format!(
                "residue {v} is not canonical modulo {}",
                self.p
            )))
        }
    }

    #[inline]
    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    #[inline]
    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let s = a.0 + b.0;
        FieldElement(if s >= self.p { s - self.p } else { s })
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.p - b.0 })
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(if a.0 == 0 { 0 } else { self.p - a.0 })
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(((a.0 as u128 * b.0 as u128) % self.p as u128) as u64)
    }

    /// `a^e`, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.p as i128, a.0 as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(FieldElement(t0.rem_euclid(self.p as i128) as u64))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// All field elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.p).map(FieldElement)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.random_range(0..self.p))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.random_range(1..self.p))
    }

    /// `sum_i coeffs[i] * xs[i]` over GF(p).
    pub fn dot(&self, coeffs: &[FieldElement], xs: &[FieldElement]) -> FieldElement {
        debug_assert_eq!(coeffs.len(), xs.len());
        // Accumulate unreduced products while they fit; p < 2^61 keeps each below 2^122.
        let p = self.p as u128;
        let mut acc: u128 = 0;
        for (&c, &x) in coeffs.iter().zip(xs) {
            acc += c.0 as u128 * x.0 as u128;
            if acc >= 1 << 125 {
                acc %= p;
            }
        }
        FieldElement((acc % p) as u64)
    }
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// An element of GF(p^m), stored as its coordinate vector over GF(p).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Message(Vec<FieldElement>);

impl Message {
    pub fn new(coords: Vec<FieldElement>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ParamInvalid("messages need at least one coordinate".into()));
        }
        Ok(Message(coords))
    }

    pub fn zero(m: usize) -> Self {
        Message(vec![FieldElement::ZERO; m])
    }

    pub fn coords(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn random<R: Rng + ?Sized>(field: &PrimeField, m: usize, rng: &mut R) -> Self {
        Message((0..m).map(|_| field.random(rng)).collect())
    }
}

/// `sum_i coeffs[i] * msgs[i]`, applied coordinate-wise.
pub fn msg_linear_combination(field: &PrimeField, coeffs: &[FieldElement], msgs: &[&Message]) -> Result<Message> {
    if coeffs.len() != msgs.len() {
        return Err(mismatch(format!(
            "{} coefficients for {} messages",
            coeffs.len(),
            msgs.len()
        )));
    }
    let m = match msgs.first() {
        Some(x) => x.dim(),
        None => return Err(mismatch("empty combination has no message length")),
    };
    if msgs.iter().any(|x| x.dim() != m) {
        return Err(mismatch("messages differ in length"));
    }
    let mut out = vec![FieldElement::ZERO; m];
    for (&c, x) in coeffs.iter().zip(msgs) {
        if c.is_zero() {
            continue;
        }
        for (o, &v) in out.iter_mut().zip(x.coords()) {
            *o = field.add(*o, field.mul(c, v));
        }
    }
    Ok(Message(out))
}

/// The server's database: `K` messages over a common field and extension degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    field: PrimeField,
    m: usize,
    messages: Vec<Message>,
}

impl Dataset {
    pub fn new(field: PrimeField, m: usize, messages: Vec<Message>) -> Result<Self> {
        if m == 0 {
            return Err(Error::ParamInvalid("extension degree m must be at least 1".into()));
        }
        if messages.is_empty() {
            return Err(Error::ParamInvalid("dataset must hold at least one message".into()));
        }
        if let Some(bad) = messages.iter().position(|x| x.dim() != m) {
            return Err(mismatch(format!(
                "message {bad} has length {} but m = {m}",
                messages[bad].dim()
            )));
        }
        if messages
            .iter()
            .flat_map(|x| x.coords())
            .any(|c| c.value() >= field.modulus())
        {
            return Err(Error::Malformed("dataset contains a non-canonical residue".into()));
        }
        Ok(Dataset { field, m, messages })
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, m: usize, k: usize, rng: &mut R) -> Result<Self> {
        let messages = (0..k).map(|_| Message::random(&field, m, rng)).collect();
        Dataset::new(field, m, messages)
    }

    /// Dataset with `m = 1` where message `index` is 1 and every other message is 0.
    pub fn indicator(field: PrimeField, k: usize, index: usize) -> Result<Self> {
        let messages = (0..k)
            .map(|i| {
                Message(vec![if i == index {
                    FieldElement::ONE
                } else {
                    FieldElement::ZERO
                }])
            })
            .collect();
        Dataset::new(field, 1, messages)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.messages.len()
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }
}
