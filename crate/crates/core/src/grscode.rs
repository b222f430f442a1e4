//! Generalized Reed-Solomon codes: generators, duals, length extension and the
//! recovery polynomials used to read the demand back out of an answer.
//!
//! A GRS code of length `n` and dimension `k` is described by nonzero
//! multipliers `v_1..v_n` and distinct evaluation points `w_1..w_n`; its
//! generator has entry `(i, j) = v_j * w_j^(i-1)`. The dual of such a code is
//! GRS on the same points with multipliers `v_j^-1 * prod_{t != j} (w_j - w_t)^-1`.

use rand::Rng;
use std::collections::HashSet;

use crate::error::{mismatch, Error, Result};
use crate::ff::{FieldElement, PrimeField};
use crate::matgf::Matrix;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrsSpec {
    field: PrimeField,
    multipliers: Vec<FieldElement>,
    points: Vec<FieldElement>,
    dimension: usize,
}

impl GrsSpec {
    /// Validates and builds a spec. Dimension 0 is accepted so that the
    /// parity side of a full-rank code (`D = L`) has a representation.
    pub fn new(
        field: PrimeField,
        multipliers: Vec<FieldElement>,
        points: Vec<FieldElement>,
        dimension: usize,
    ) -> Result<Self> {
        let n = multipliers.len();
        if n == 0 || points.len() != n {
            return Err(Error::SpecInvalid(format!(
                "{} multipliers and {} evaluation points",
                n,
                points.len()
            )));
        }
        if dimension > n {
            return Err(Error::SpecInvalid(format!("dimension {dimension} exceeds length {n}")));
        }
        if n as u64 > field.modulus() {
            return Err(Error::SpecInvalid(format!(
                "length {n} exceeds field size {}",
                field.modulus()
            )));
        }
        if multipliers.iter().chain(&points).any(|e| e.value() >= field.modulus()) {
            return Err(Error::SpecInvalid("non-canonical residue".into()));
        }
        if multipliers.iter().any(|m| m.is_zero()) {
            return Err(Error::SpecInvalid("zero multiplier".into()));
        }
        let mut seen = HashSet::with_capacity(n);
        if !points.iter().all(|p| seen.insert(*p)) {
            return Err(Error::SpecInvalid("repeated evaluation point".into()));
        }
        Ok(GrsSpec {
            field,
            multipliers,
            points,
            dimension,
        })
    }

    pub fn from_values(field: PrimeField, multipliers: &[u64], points: &[u64], dimension: usize) -> Result<Self> {
        let conv = |v: &[u64]| v.iter().map(|&x| field.element(x)).collect();
        GrsSpec::new(field, conv(multipliers), conv(points), dimension)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn multipliers(&self) -> &[FieldElement] {
        &self.multipliers
    }

    pub fn points(&self) -> &[FieldElement] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn with_dimension(&self, dimension: usize) -> Result<Self> {
        GrsSpec::new(self.field, self.multipliers.clone(), self.points.clone(), dimension)
    }

    /// The `k x n` generator matrix.
    pub fn generator(&self) -> Matrix {
        let f = self.field;
        let n = self.len();
        let mut g = Matrix::zeros(f, self.dimension, n);
        for j in 0..n {
            let mut v = self.multipliers[j];
            for i in 0..self.dimension {
                g.set(i, j, v);
                v = f.mul(v, self.points[j]);
            }
        }
        g
    }

    /// Multipliers of the dual code on the same evaluation points.
    pub fn dual_multipliers(&self) -> Vec<FieldElement> {
        let f = self.field;
        (0..self.len())
            .map(|j| {
                let wj = self.points[j];
                let prod = self
                    .points
                    .iter()
                    .enumerate()
                    .filter(|&(t, _)| t != j)
                    .fold(self.multipliers[j], |acc, (_, &wt)| f.mul(acc, f.sub(wj, wt)));
                f.inv(prod).expect("distinct points and nonzero multipliers")
            })
            .collect()
    }

    /// The dual code, of dimension `n - k`.
    pub fn dual(&self) -> GrsSpec {
        GrsSpec {
            field: self.field,
            multipliers: self.dual_multipliers(),
            points: self.points.clone(),
            dimension: self.len() - self.dimension,
        }
    }

    /// Recognises a plain matrix as a GRS generator.
    ///
    /// Row 1 supplies the multipliers and row 2 / row 1 the evaluation points;
    /// every later row must then match. A one-row matrix is a GRS generator for
    /// any distinct points, and we use `0, 1, ..., n-1`.
    pub fn from_matrix(v: &Matrix) -> Result<GrsSpec> {
        let f = v.field();
        if v.rows() == 0 || v.rows() > v.cols() {
            return Err(Error::NotMds);
        }
        if v.rows() == 1 {
            if !v.is_mds()? {
                return Err(Error::NotMds);
            }
            let points = (0..v.cols() as u64).map(|x| f.element(x)).collect();
            return GrsSpec::new(f, v.row(0).to_vec(), points, 1).map_err(|_| Error::NotGrs);
        }
        match GrsSpec::recognize(v) {
            Some(spec) => Ok(spec),
            None if v.is_mds()? => Err(Error::NotGrs),
            None => Err(Error::NotMds),
        }
    }

    /// Reads multipliers off row 1 and points off row 2 / row 1, and keeps
    /// them if they regenerate `v`. Needs at least two rows. Anything this
    /// returns is MDS, so no minor has to be checked.
    pub fn recognize(v: &Matrix) -> Option<GrsSpec> {
        let f = v.field();
        if v.rows() < 2 {
            return None;
        }
        let multipliers = v.row(0).to_vec();
        if multipliers.iter().any(|m| m.is_zero()) {
            return None;
        }
        let points = (0..v.cols())
            .map(|j| f.div(v.get(1, j), v.get(0, j)))
            .collect::<Result<Vec<_>>>()
            .ok()?;
        let spec = GrsSpec::new(f, multipliers, points, v.rows()).ok()?;
        (spec.generator() == *v).then_some(spec)
    }
}

/// Random draws that lengthen a dual code from `D` to `K` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Extension {
    pub multipliers: Vec<FieldElement>,
    pub points: Vec<FieldElement>,
}

impl Extension {
    /// Draws `count` multipliers uniformly from GF(p)* (with replacement), then
    /// `count` evaluation points uniformly, without replacement, from GF(p)
    /// minus `used_points`. Both by rejection, in that order.
    pub fn sample<R: Rng + ?Sized>(
        field: PrimeField,
        used_points: &[FieldElement],
        count: usize,
        rng: &mut R,
    ) -> Result<Extension> {
        let needed = used_points.len() + count;
        if (needed as u64) > field.modulus() {
            return Err(Error::FieldTooSmall {
                p: field.modulus(),
                needed,
            });
        }
        let multipliers = (0..count).map(|_| field.random_nonzero(rng)).collect();
        let mut seen: HashSet<FieldElement> = used_points.iter().copied().collect();
        let mut points = Vec::with_capacity(count);
        while points.len() < count {
            let w = field.random(rng);
            if seen.insert(w) {
                points.push(w);
            }
        }
        Ok(Extension { multipliers, points })
    }
}

/// Appends `ext` to the dual code `(head_multipliers, head_points)`, giving a
/// length-`D + ext.len()` spec of the requested dimension.
pub fn extend_dual(
    field: PrimeField,
    head_multipliers: &[FieldElement],
    head_points: &[FieldElement],
    ext: &Extension,
    dimension: usize,
) -> Result<GrsSpec> {
    if head_multipliers.len() != head_points.len() || ext.multipliers.len() != ext.points.len() {
        return Err(mismatch("multiplier and point lists differ in length"));
    }
    let needed = head_points.len() + ext.points.len();
    if needed as u64 > field.modulus() {
        return Err(Error::FieldTooSmall {
            p: field.modulus(),
            needed,
        });
    }
    let multipliers = [head_multipliers, &ext.multipliers].concat();
    let points = [head_points, &ext.points].concat();
    GrsSpec::new(field, multipliers, points, dimension)
}

/// Samples an extension and applies it; the full dual spec has length `k_total`.
pub fn extend_dual_random<R: Rng + ?Sized>(
    field: PrimeField,
    head_multipliers: &[FieldElement],
    head_points: &[FieldElement],
    k_total: usize,
    dimension: usize,
    rng: &mut R,
) -> Result<GrsSpec> {
    if k_total < head_points.len() {
        return Err(Error::ParamInvalid("K is smaller than D".into()));
    }
    if k_total as u64 > field.modulus() {
        return Err(Error::FieldTooSmall {
            p: field.modulus(),
            needed: k_total,
        });
    }
    let ext = Extension::sample(field, head_points, k_total - head_points.len(), rng)?;
    extend_dual(field, head_multipliers, head_points, &ext, dimension)
}

/// Bijection from code index `j` (demand coordinates first, then the rest)
/// to message position `perm[j]`. All indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColumnAssignment {
    perm: Vec<usize>,
    d: usize,
}

impl ColumnAssignment {
    /// Demand positions in ascending order, followed by the others in ascending order.
    pub fn from_support(k: usize, support: &[usize]) -> Result<Self> {
        if !support.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::ParamInvalid("support must be strictly increasing".into()));
        }
        if support.last().is_some_and(|&s| s >= k) {
            return Err(Error::ParamInvalid(format!("support index out of range for K = {k}")));
        }
        let mut perm = support.to_vec();
        perm.extend((0..k).filter(|i| support.binary_search(i).is_err()));
        Ok(ColumnAssignment { perm, d: support.len() })
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn demand_positions(&self) -> &[usize] {
        &self.perm[..self.d]
    }

    pub fn complement_positions(&self) -> &[usize] {
        &self.perm[self.d..]
    }
}

/// Reorders `(multiplier, point)` pairs from code index to message position.
pub fn assemble_columns(spec: &GrsSpec, assignment: &ColumnAssignment) -> Result<GrsSpec> {
    if spec.len() != assignment.len() {
        return Err(mismatch(format!(
            "spec of length {} for an assignment of length {}",
            spec.len(),
            assignment.len()
        )));
    }
    let mut multipliers = vec![FieldElement::ZERO; spec.len()];
    let mut points = vec![FieldElement::ZERO; spec.len()];
    for (j, &pos) in assignment.perm().iter().enumerate() {
        multipliers[pos] = spec.multipliers[j];
        points[pos] = spec.points[j];
    }
    GrsSpec::new(spec.field, multipliers, points, spec.dimension)
}

/// Generator of the code whose parity-check matrix is `parity.generator()`.
pub fn generator_from_parity(parity: &GrsSpec) -> (Matrix, GrsSpec) {
    let gen = parity.dual();
    (gen.generator(), gen)
}

/// Coefficient vectors of `f_l(x) = x^(l-1) * prod_c (x - complement_points[c])`
/// for `l = 1..=l_count`, in ascending degree and padded to length
/// `complement_points.len() + l_count`.
pub fn recovery_polynomials(
    field: PrimeField,
    complement_points: &[FieldElement],
    l_count: usize,
) -> Vec<Vec<FieldElement>> {
    let base = poly_from_roots(field, complement_points);
    let len = complement_points.len() + l_count;
    (0..l_count)
        .map(|shift| {
            let mut c = vec![FieldElement::ZERO; len];
            c[shift..shift + base.len()].copy_from_slice(&base);
            c
        })
        .collect()
}

/// Monic polynomial with the given roots, ascending-degree coefficients.
pub fn poly_from_roots(field: PrimeField, roots: &[FieldElement]) -> Vec<FieldElement> {
    let mut coeffs = vec![FieldElement::ONE];
    for &r in roots {
        // multiply by (x - r)
        let mut next = vec![FieldElement::ZERO; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] = field.add(next[i + 1], c);
            next[i] = field.sub(next[i], field.mul(r, c));
        }
        coeffs = next;
    }
    coeffs
}

pub fn poly_eval(field: PrimeField, coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
    coeffs
        .iter()
        .rev()
        .fold(FieldElement::ZERO, |acc, &c| field.add(field.mul(acc, x), c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn els(f: PrimeField, v: &[u64]) -> Vec<FieldElement> {
        v.iter().map(|&x| f.element(x)).collect()
    }

    fn random_spec(f: PrimeField, n: usize, k: usize, rng: &mut ChaCha8Rng) -> GrsSpec {
        let ext = Extension::sample(f, &[], n, rng).unwrap();
        GrsSpec::new(f, ext.multipliers, ext.points, k).unwrap()
    }

    #[test]
    fn generator_examples() {
        let f = gf(11);
        let ones = GrsSpec::from_values(f, &[1, 1, 1, 1], &[3, 0, 5, 2], 1)
            .unwrap()
            .generator();
        assert_eq!(ones, Matrix::from_rows(f, &[[1, 1, 1, 1]]).unwrap());

        let v = GrsSpec::from_values(f, &[1, 3, 2, 1, 6], &[3, 7, 9, 4, 5], 2)
            .unwrap()
            .generator();
        assert_eq!(v, Matrix::from_rows(f, &[[1, 3, 2, 1, 6], [3, 10, 7, 4, 8]]).unwrap());

        let lambda = GrsSpec::from_values(f, &[3, 10, 8, 8, 7], &[3, 7, 9, 4, 5], 3)
            .unwrap()
            .generator();
        assert_eq!(
            lambda,
            Matrix::from_rows(f, &[[3, 10, 8, 8, 7], [9, 4, 6, 10, 2], [5, 6, 10, 7, 10]]).unwrap()
        );
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let f = gf(5);
        assert!(matches!(
            GrsSpec::from_values(f, &[1, 1], &[2, 2], 1),
            Err(Error::SpecInvalid(_))
        ));
        assert!(matches!(
            GrsSpec::from_values(f, &[1, 0], &[1, 2], 1),
            Err(Error::SpecInvalid(_))
        ));
        assert!(matches!(
            GrsSpec::from_values(f, &[1, 1], &[1, 2], 3),
            Err(Error::SpecInvalid(_))
        ));
        assert!(matches!(
            GrsSpec::new(f, vec![f.one(); 6], els(f, &[0, 1, 2, 3, 4, 0]), 1),
            Err(Error::SpecInvalid(_))
        ));
    }

    #[test]
    fn dual_multiplier_examples() {
        let f = gf(11);
        let spec = GrsSpec::from_values(f, &[1, 3, 2, 1, 6], &[3, 7, 9, 4, 5], 2).unwrap();
        assert_eq!(spec.dual_multipliers(), els(f, &[3, 10, 8, 8, 7]));

        let f2 = gf(2);
        let tiny = GrsSpec::from_values(f2, &[1, 1], &[0, 1], 1).unwrap();
        assert_eq!(tiny.dual_multipliers(), els(f2, &[1, 1]));
    }

    #[test]
    fn from_matrix_examples() {
        let f = gf(11);
        let v = Matrix::from_rows(f, &[[1, 3, 2, 1, 6], [3, 10, 7, 4, 8]]).unwrap();
        let spec = GrsSpec::from_matrix(&v).unwrap();
        assert_eq!(spec.multipliers(), &els(f, &[1, 3, 2, 1, 6])[..]);
        assert_eq!(spec.points(), &els(f, &[3, 7, 9, 4, 5])[..]);

        let f7 = gf(7);
        let spec = GrsSpec::from_matrix(&Matrix::from_rows(f7, &[[5, 5, 5]]).unwrap()).unwrap();
        assert_eq!(spec.multipliers(), &els(f7, &[5, 5, 5])[..]);
        assert_eq!(spec.points(), &els(f7, &[0, 1, 2])[..]);

        assert!(matches!(
            GrsSpec::from_matrix(&Matrix::from_rows(f, &[[1, 0, 2]]).unwrap()),
            Err(Error::NotMds)
        ));
    }

    /// Searches GF(11) for a 3x4 MDS matrix whose first two rows are GRS but
    /// whose third row breaks the pattern.
    #[test]
    fn from_matrix_rejects_non_grs_mds() {
        let f = gf(11);
        let head = [[1u64, 1, 1, 1], [1, 2, 3, 4]];
        let mut found = None;
        'search: for a in 0..11u64 {
            for b in 0..11u64 {
                for c in 0..11u64 {
                    for d in 0..11u64 {
                        let rows = [head[0], head[1], [a, b, c, d]];
                        let m = Matrix::from_rows(f, &rows).unwrap();
                        if m.is_mds().unwrap() && rows[2] != [1, 4, 9, 5] {
                            found = Some(m);
                            break 'search;
                        }
                    }
                }
            }
        }
        let m = found.expect("an MDS completion off the GRS pattern exists");
        assert!(matches!(GrsSpec::from_matrix(&m), Err(Error::NotGrs)));
    }

    #[test]
    fn extension_examples() {
        let f = gf(11);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let head_l = els(f, &[3, 10, 8, 8, 7]);
        let head_w = els(f, &[3, 7, 9, 4, 5]);
        let same = extend_dual_random(f, &head_l, &head_w, 5, 3, &mut rng).unwrap();
        assert_eq!(same.multipliers(), &head_l[..]);

        let ext = Extension {
            multipliers: els(f, &[3, 5, 1, 1, 4]),
            points: els(f, &[6, 1, 10, 2, 8]),
        };
        let full = extend_dual(f, &head_l, &head_w, &ext, 3).unwrap();
        assert_eq!(full.multipliers(), &els(f, &[3, 10, 8, 8, 7, 3, 5, 1, 1, 4])[..]);
        assert_eq!(full.points(), &els(f, &[3, 7, 9, 4, 5, 6, 1, 10, 2, 8])[..]);

        let f7 = gf(7);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = extend_dual_random(f7, &els(f7, &[1, 1]), &els(f7, &[3, 5]), 7, 1, &mut rng).unwrap();
            let mut tail: Vec<u64> = spec.points()[2..].iter().map(|e| e.value()).collect();
            tail.sort();
            assert_eq!(tail, vec![0, 1, 2, 4, 6]);
            assert!(spec.multipliers().iter().all(|m| !m.is_zero()));
        }

        assert!(matches!(
            extend_dual_random(f7, &els(f7, &[1, 1]), &els(f7, &[3, 5]), 8, 1, &mut rng),
            Err(Error::FieldTooSmall { p: 7, needed: 8 })
        ));
    }

    #[test]
    fn extension_is_reproducible_from_seed() {
        let f = gf(101);
        let head = els(f, &[1, 2, 3]);
        let a = Extension::sample(f, &head, 6, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = Extension::sample(f, &head, 6, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn assemble_examples() {
        let f = gf(11);
        let spec =
            GrsSpec::from_values(f, &[3, 10, 8, 8, 7, 3, 5, 1, 1, 4], &[3, 7, 9, 4, 5, 6, 1, 10, 2, 8], 3).unwrap();
        let identity = ColumnAssignment::from_support(10, &(0..10).collect::<Vec<_>>()).unwrap();
        assert_eq!(assemble_columns(&spec, &identity).unwrap(), spec);

        let assignment = ColumnAssignment::from_support(10, &[1, 3, 4, 6, 7]).unwrap();
        assert_eq!(assignment.perm(), &[1, 3, 4, 6, 7, 0, 2, 5, 8, 9]);
        let placed = assemble_columns(&spec, &assignment).unwrap();
        assert_eq!(placed.multipliers(), &els(f, &[3, 3, 5, 10, 8, 1, 8, 7, 1, 4])[..]);
        assert_eq!(placed.points(), &els(f, &[6, 3, 1, 7, 9, 10, 4, 5, 2, 8])[..]);
        let h = Matrix::from_rows(
            f,
            &[
                [3, 3, 5, 10, 8, 1, 8, 7, 1, 4],
                [7, 9, 5, 4, 6, 10, 10, 2, 2, 10],
                [9, 5, 5, 6, 10, 1, 7, 10, 4, 3],
            ],
        )
        .unwrap();
        assert_eq!(placed.generator(), h);

        let short = ColumnAssignment::from_support(9, &[0]).unwrap();
        assert!(matches!(
            assemble_columns(&spec, &short),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn generator_from_parity_derives_multipliers() {
        let f = gf(11);
        let parity =
            GrsSpec::from_values(f, &[3, 3, 5, 10, 8, 1, 8, 7, 1, 4], &[6, 3, 1, 7, 9, 10, 4, 5, 2, 8], 3).unwrap();
        let (g, gen) = generator_from_parity(&parity);
        assert_eq!((g.rows(), g.cols()), (7, 10));
        // Foldable by hand: alpha_j = (lambda_j * prod_{t != j}(w_j - w_t))^-1.
        assert_eq!(gen.multipliers(), &els(f, &[9, 10, 2, 7, 3, 1, 5, 4, 9, 9])[..]);
        assert!(g.mul(&parity.generator().transpose()).unwrap().is_zero());
        assert!(g.is_mds().unwrap());
    }

    #[test]
    fn recovery_polynomial_examples() {
        let f = gf(11);
        assert_eq!(recovery_polynomials(f, &[], 2), vec![els(f, &[1, 0]), els(f, &[0, 1])]);
        let c = recovery_polynomials(f, &els(f, &[6, 1, 10, 2, 8]), 2);
        assert_eq!(c[0], els(f, &[8, 1, 8, 9, 6, 1, 0]));
        assert_eq!(c[1], els(f, &[0, 8, 1, 8, 9, 6, 1]));
    }

    #[test]
    fn grs_generators_are_mds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = gf(13);
        for n in 1..=8 {
            for k in 1..=n {
                for _ in 0..4 {
                    assert!(random_spec(f, n, k, &mut rng).generator().is_mds().unwrap());
                }
            }
        }
    }

    proptest! {
        #[test]
        fn recognized_matrices_are_mds(entries in proptest::collection::vec(0u64..5, 8), rows in 2usize..3) {
            let f = PrimeField::new(5).unwrap();
            let v = Matrix::new(f, rows, 4, entries[..rows * 4].iter().map(|&x| f.element(x)).collect()).unwrap();
            if let Some(spec) = GrsSpec::recognize(&v) {
                prop_assert!(v.is_mds_with_limit(u128::MAX).unwrap());
                prop_assert_eq!(spec.generator(), v);
            }
        }

        #[test]
        fn recognize_accepts_every_generated_grs(seed in any::<u64>(), n in 2usize..11, k in 2usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = PrimeField::new(11).unwrap();
            let k = k.min(n);
            let draw = Extension::sample(f, &[], n, &mut rng).unwrap();
            let spec = GrsSpec::new(f, draw.multipliers, draw.points, k).unwrap();
            prop_assert_eq!(GrsSpec::recognize(&spec.generator()), Some(spec));
        }

        #[test]
        fn dual_is_orthogonal(seed in any::<u64>(), n in 2usize..12, k_frac in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = 1 + ((n - 1) as f64 * k_frac) as usize;
            let f = gf(13);
            let spec = random_spec(f, n, k, &mut rng);
            let dual = spec.dual();
            prop_assert!(spec.generator().mul(&dual.generator().transpose()).unwrap().is_zero());
            // dualizing twice returns multipliers proportional to the originals
            let back = dual.dual();
            let ratio = f.div(back.multipliers()[0], spec.multipliers()[0]).unwrap();
            for (b, s) in back.multipliers().iter().zip(spec.multipliers()) {
                prop_assert_eq!(*b, f.mul(ratio, *s));
            }
        }

        #[test]
        fn parity_and_generator_are_orthogonal(seed in any::<u64>(), n in 2usize..=6, k in 0usize..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = gf(13);
            let parity = random_spec(f, n, k.min(n), &mut rng);
            let (g, _) = generator_from_parity(&parity);
            prop_assert!(g.mul(&parity.generator().transpose()).unwrap().is_zero());
        }

        #[test]
        fn recovery_polynomials_vanish_on_complement(seed in any::<u64>(), c in 0usize..8, l in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = gf(101);
            let pts = Extension::sample(f, &[], c, &mut rng).unwrap().points;
            let polys = recovery_polynomials(f, &pts, l);
            for (i, poly) in polys.iter().enumerate() {
                prop_assert_eq!(poly.len(), c + l);
                prop_assert_eq!(poly[c + i], f.one());
                for &w in &pts {
                    prop_assert_eq!(poly_eval(f, poly, w), f.zero());
                }
                if i + 1 < polys.len() {
                    let mut shifted = vec![f.zero()];
                    shifted.extend_from_slice(&poly[..poly.len() - 1]);
                    prop_assert_eq!(&shifted, &polys[i + 1]);
                }
            }
        }
    }
}
