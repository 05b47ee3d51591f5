//! Local representations: the N-dimensional triangle representation and its
//! gluing into a representation of the quantum torus of a triangulated
//! surface.
//!
//! For one triangle with sides 0,1,2 (counterclockwise) the skew form is
//! sigma_01 = sigma_12 = 1, sigma_02 = -1, and the irreducible
//! representation with side roots (r_0, r_1, r_2) acts on basis e_0..e_{N-1}
//! (indices mod N) by
//!
//! ```text
//! A_0 e_i = r_0 q^{2i}   e_i
//! A_1 e_i = r_1          e_{i+1}
//! A_2 e_i = r_2 q^{1-2i} e_{i-1}
//! ```
//!
//! so that A_i A_{i+1} = q^2 A_{i+1} A_i cyclically, A_i^N = r_i^N, and the
//! symmetrized product q^{-1} A_0 A_1 A_2 is the scalar r_0 r_1 r_2 (the
//! triangle's charge).
//!
//! A surface representation places one triangle representation per face on
//! the tensor product (dimension N^m) and sends the edge generator X_e to
//! the product of the slot actions of its one or two side occurrences; a
//! self-folded edge uses the Weyl-symmetrized product of its two slots
//! within the same factor.  Edge weights x_e (N-th powers of the images,
//! always powers of q) factor through the side roots: each edge's first
//! occurrence carries the canonical N-th root of x_e and the second carries
//! 1, after which each face's slot-2 root is twisted by an N-th root of
//! unity to meet the requested face charge.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cyclotomic::{CycError, CycField, CycScalar, RootOfUnity};
use crate::par::{self, Parallelism};
use crate::sparse::RepMatrix;
use crate::triangulation::{SkewMatrix, Triangulation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepError {
    #[error("expected {expected} edge weights, found {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("charge override for unknown face {face} (surface has {faces} faces)")]
    UnknownFace { face: usize, faces: usize },
    #[error(
        "incompatible charge for face {face}: its N-th power must equal the product of the face's side-root N-th powers"
    )]
    IncompatibleCharge { face: usize },
    #[error(transparent)]
    Cyc(#[from] CycError),
}

/// A named failed identity, for honest error reporting in verification.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepFailure {
    #[error("exchange relation failed for edges ({i}, {j}): X_{i} X_{j} != q^(2 sigma_ij) X_{j} X_{i}")]
    ExchangeRelation { i: usize, j: usize },
    #[error("power relation failed for edge {edge}: image of X^N is not the declared weight")]
    PowerScalar { edge: usize },
    #[error("central charge failed: the symmetrized full monomial is not charge * Id")]
    CentralCharge,
}

/// The cyclic irreducible representation of one quantized triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleIrrep {
    n: u64,
    roots: [RootOfUnity; 3],
}

impl TriangleIrrep {
    /// `roots` live in the circle group of a field of order divisible by n.
    pub fn new(n: u64, roots: [RootOfUnity; 3]) -> Self {
        assert!(n >= 3 && n % 2 == 1, "N must be odd and at least 3");
        let order = roots[0].order();
        assert!(roots.iter().all(|r| r.order() == order));
        assert_eq!(order % n, 0, "field order must be divisible by N");
        TriangleIrrep { n, roots }
    }

    /// All side roots equal to 1 inside a field of the given order.
    pub fn trivial(n: u64, field_order: u64) -> Self {
        Self::new(n, [RootOfUnity::one(field_order); 3])
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn roots(&self) -> &[RootOfUnity; 3] {
        &self.roots
    }

    /// The scalar of the symmetrized product q^{-1} A_0 A_1 A_2.
    pub fn charge(&self) -> RootOfUnity {
        self.roots[0].mul(&self.roots[1]).mul(&self.roots[2])
    }

    fn q(&self) -> RootOfUnity {
        let order = self.roots[0].order();
        RootOfUnity::root(order, (order / self.n) as i64)
    }

    /// Image of basis vector i under slot s, as (target index, coefficient).
    pub fn slot_action(&self, slot: usize, i: usize) -> (usize, RootOfUnity) {
        let n = self.n as usize;
        debug_assert!(i < n);
        let q = self.q();
        match slot {
            0 => (i, self.roots[0].mul(&q.pow(2 * i as i64))),
            1 => ((i + 1) % n, self.roots[1]),
            2 => ((i + n - 1) % n, self.roots[2].mul(&q.pow(1 - 2 * i as i64))),
            _ => panic!("triangle slots are 0, 1, 2"),
        }
    }

    pub fn generator(&self, field: &CycField, slot: usize) -> RepMatrix {
        let n = self.n as usize;
        RepMatrix::from_triplets(
            field,
            n,
            (0..n).map(|i| {
                let (r, v) = self.slot_action(slot, i);
                (r, i, v.to_scalar(field))
            }),
        )
    }

    /// q^{-1} A_0 A_1 A_2, which must equal charge * Id.
    pub fn h_matrix(&self, field: &CycField) -> RepMatrix {
        let prod = self
            .generator(field, 0)
            .mul(field, &self.generator(field, 1))
            .mul(field, &self.generator(field, 2));
        prod.scale(field, &self.q().inv().to_scalar(field))
    }

    /// Eigenvalues of the slot generator, in index order: the diagonal for
    /// slot 0, and the N-th root fiber r_s * q^t for the two shifts.
    pub fn spectrum(&self, slot: usize) -> Vec<RootOfUnity> {
        let n = self.n as usize;
        match slot {
            0 => (0..n).map(|i| self.slot_action(0, i).1).collect(),
            1 | 2 => {
                let q = self.q();
                (0..n as i64).map(|t| self.roots[slot].mul(&q.pow(t))).collect()
            }
            _ => panic!("triangle slots are 0, 1, 2"),
        }
    }

    /// The skew form of a single triangle.
    pub fn local_sigma() -> SkewMatrix {
        SkewMatrix::from_rows(vec![vec![0, 1, -1], vec![-1, 0, 1], vec![1, -1, 0]])
    }
}

/// A monomial operator: basis vector (column) u maps to `vals[u]` times
/// basis vector `perm[u]`.  Generator images and all their products have
/// this form, with values that are pure roots of unity, so composition is
/// exact integer arithmetic on exponents — no field operations at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialAction {
    pub perm: Vec<usize>,
    pub vals: Vec<RootOfUnity>,
}

impl MonomialAction {
    pub fn identity(dim: usize, field_order: u64) -> Self {
        MonomialAction {
            perm: (0..dim).collect(),
            vals: vec![RootOfUnity::one(field_order); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// self applied after `first` (matrix product self * first).
    pub fn compose(&self, first: &Self) -> Self {
        let dim = self.dim();
        assert_eq!(first.dim(), dim);
        let perm = (0..dim).map(|u| self.perm[first.perm[u]]).collect();
        let vals = (0..dim)
            .map(|u| self.vals[first.perm[u]].mul(&first.vals[u]))
            .collect();
        MonomialAction { perm, vals }
    }

    pub fn inverse(&self) -> Self {
        let dim = self.dim();
        let mut perm = vec![0; dim];
        let mut vals = vec![RootOfUnity::one(self.vals[0].order()); dim];
        for u in 0..dim {
            perm[self.perm[u]] = u;
            vals[self.perm[u]] = self.vals[u].inv();
        }
        MonomialAction { perm, vals }
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e >= 0 { self.clone() } else { self.inverse() };
        let mut acc = Self::identity(self.dim(), self.vals[0].order());
        for _ in 0..e.unsigned_abs() {
            acc = base.compose(&acc);
        }
        acc
    }

    /// Multiplies every value by a fixed root (a scalar prefactor).
    pub fn scale(&self, r: &RootOfUnity) -> Self {
        MonomialAction {
            perm: self.perm.clone(),
            vals: self.vals.iter().map(|v| v.mul(r)).collect(),
        }
    }

    pub fn is_scalar(&self) -> Option<RootOfUnity> {
        let first = self.vals[0];
        if self.perm.iter().enumerate().all(|(u, &p)| p == u)
            && self.vals.iter().all(|v| *v == first)
        {
            Some(first)
        } else {
            None
        }
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.compose(other) == other.compose(self)
    }

    pub fn to_matrix(&self, field: &CycField) -> RepMatrix {
        RepMatrix::from_triplets(
            field,
            self.dim(),
            (0..self.dim()).map(|u| (self.perm[u], u, self.vals[u].to_scalar(field))),
        )
    }
}

/// How an edge generator acts on the tensor product over faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeImage {
    /// Two occurrences on distinct faces: a pure tensor of two slot actions.
    Split {
        first: (usize, usize),
        second: (usize, usize),
    },
    /// Both occurrences on one face: the symmetrized product
    /// q^{-sigma_loc} A_{s0} A_{s1} inside that factor.
    Folded { face: usize, slots: (usize, usize) },
    /// A boundary edge (open mode): a single slot action.
    Boundary { face: usize, slot: usize },
}

/// A local representation of the surface's quantum torus on (C^N)^{tensor m}.
#[derive(Debug, Clone)]
pub struct LocalRep {
    field: CycField,
    n: u64,
    triangulation: Triangulation,
    sigma: SkewMatrix,
    irreps: Vec<TriangleIrrep>,
    face_charges: Vec<RootOfUnity>,
    weights: Vec<RootOfUnity>,
    weight_exps: Vec<i64>,
    images: Vec<EdgeImage>,
    actions: Vec<MonomialAction>,
    generators: Vec<RepMatrix>,
    dim: usize,
}

impl LocalRep {
    /// Builds the representation over Q(zeta_{N^2}) with edge weights
    /// x_e = q^{weight_exps[e]} and optional per-face charge overrides
    /// c_t = zeta_{N^2}^e; faces without an override keep the canonical
    /// charge (the product of their canonical side roots).
    pub fn build(
        tri: &Triangulation,
        n: u64,
        weight_exps: &[i64],
        charge_exps: &BTreeMap<usize, i64>,
    ) -> Result<LocalRep, RepError> {
        let d = n.checked_mul(n).expect("N^2 fits in u64");
        let field = CycField::new(d)?;
        let q = RootOfUnity::root(d, n as i64);
        let edges = tri.n_edges();
        let faces = tri.n_faces();
        if weight_exps.len() != edges {
            return Err(RepError::WeightCount {
                expected: edges,
                found: weight_exps.len(),
            });
        }
        for &face in charge_exps.keys() {
            if face >= faces {
                return Err(RepError::UnknownFace { face, faces });
            }
        }
        let weights: Vec<RootOfUnity> = weight_exps.iter().map(|&a| q.pow(a)).collect();

        // Canonical side roots: first occurrence takes the canonical N-th
        // root of the edge weight, any second occurrence takes 1.
        let mut roots = vec![[RootOfUnity::one(d); 3]; faces];
        for (e, w) in weights.iter().enumerate() {
            let occ = tri.occurrences(e);
            let (t, s) = occ[0];
            roots[t][s] = w.canonical_nth_root(n)?;
        }

        // Face charges: twist slot 2 into the requested charge when the
        // ratio to the canonical charge is an N-th root of unity.
        let mut irreps = Vec::with_capacity(faces);
        let mut face_charges = Vec::with_capacity(faces);
        for (t, r) in roots.into_iter().enumerate() {
            let canonical = r[0].mul(&r[1]).mul(&r[2]);
            let charge = match charge_exps.get(&t) {
                None => canonical,
                Some(&e) => RootOfUnity::root(d, e),
            };
            let ratio = charge.mul(&canonical.inv());
            if !ratio.is_nth_root(n) {
                return Err(RepError::IncompatibleCharge { face: t });
            }
            let adjusted = [r[0], r[1], r[2].mul(&ratio)];
            irreps.push(TriangleIrrep::new(n, adjusted));
            face_charges.push(charge);
        }

        let images = (0..edges)
            .map(|e| {
                let occ = tri.occurrences(e);
                match occ {
                    [(t, s)] => EdgeImage::Boundary { face: *t, slot: *s },
                    [(t1, s1), (t2, s2)] if t1 == t2 => EdgeImage::Folded {
                        face: *t1,
                        slots: (*s1, *s2),
                    },
                    [a, b] => EdgeImage::Split {
                        first: *a,
                        second: *b,
                    },
                    _ => unreachable!("validated triangulations glue edges once or twice"),
                }
            })
            .collect::<Vec<_>>();

        let dim = (n as usize)
            .checked_pow(faces as u32)
            .expect("representation dimension fits in usize");
        let mut rep = LocalRep {
            field,
            n,
            triangulation: tri.clone(),
            sigma: tri.sigma(),
            irreps,
            face_charges,
            weights,
            weight_exps: weight_exps.to_vec(),
            images,
            actions: Vec::new(),
            generators: Vec::new(),
            dim,
        };
        rep.actions = (0..edges).map(|e| rep.build_action(e)).collect();
        rep.generators = rep
            .actions
            .iter()
            .map(|a| a.to_matrix(&rep.field))
            .collect();
        Ok(rep)
    }

    /// Canonical per-face charges for the given weights: the product of the
    /// canonical side roots of each face.
    pub fn canonical_face_charges(
        tri: &Triangulation,
        n: u64,
        weight_exps: &[i64],
    ) -> Result<Vec<RootOfUnity>, RepError> {
        let rep = Self::build(tri, n, weight_exps, &BTreeMap::new())?;
        Ok(rep.face_charges().to_vec())
    }

    /// Builds with per-face charges c_t = canonical * zeta_N^{twist}; every
    /// twist is compatible, so this never reports an incompatible charge.
    pub fn build_with_twists(
        tri: &Triangulation,
        n: u64,
        weight_exps: &[i64],
        twists: &BTreeMap<usize, i64>,
    ) -> Result<LocalRep, RepError> {
        let faces = tri.n_faces();
        for &face in twists.keys() {
            if face >= faces {
                return Err(RepError::UnknownFace { face, faces });
            }
        }
        let canonical = Self::canonical_face_charges(tri, n, weight_exps)?;
        let d = n * n;
        let charges: BTreeMap<usize, i64> = twists
            .iter()
            .map(|(&face, &e)| {
                let c = canonical[face].mul(&RootOfUnity::root(d, n as i64 * e));
                debug_assert_eq!(c.exp_2d() % 2, 0);
                (face, (c.exp_2d() / 2) as i64)
            })
            .collect();
        Self::build(tri, n, weight_exps, &charges)
    }

    /// All weights 1 and canonical charges.
    pub fn build_trivial(tri: &Triangulation, n: u64) -> Result<LocalRep, RepError> {
        Self::build(tri, n, &vec![0; tri.n_edges()], &BTreeMap::new())
    }

    pub fn field(&self) -> &CycField {
        &self.field
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.triangulation
    }

    pub fn sigma(&self) -> &SkewMatrix {
        &self.sigma
    }

    pub fn q(&self) -> RootOfUnity {
        RootOfUnity::root(self.field.order(), self.n as i64)
    }

    pub fn q_scalar(&self, e: i64) -> CycScalar {
        self.q().pow(e).to_scalar(&self.field)
    }

    pub fn weights(&self) -> &[RootOfUnity] {
        &self.weights
    }

    pub fn weight_exps(&self) -> &[i64] {
        &self.weight_exps
    }

    pub fn face_charges(&self) -> &[RootOfUnity] {
        &self.face_charges
    }

    pub fn irreps(&self) -> &[TriangleIrrep] {
        &self.irreps
    }

    pub fn images(&self) -> &[EdgeImage] {
        &self.images
    }

    /// The total charge c = prod_t c_t; its N-th power is prod_e x_e.
    pub fn charge(&self) -> RootOfUnity {
        let mut c = RootOfUnity::one(self.field.order());
        for t in &self.face_charges {
            c = c.mul(t);
        }
        c
    }

    fn strides(&self) -> Vec<usize> {
        let faces = self.triangulation.n_faces();
        let n = self.n as usize;
        (0..faces).map(|t| n.pow((faces - 1 - t) as u32)).collect()
    }

    fn build_action(&self, e: usize) -> MonomialAction {
        let n = self.n as usize;
        let strides = self.strides();
        let faces = strides.len();
        let mut perm = Vec::with_capacity(self.dim);
        let mut vals = Vec::with_capacity(self.dim);
        for v in 0..self.dim {
            let mut digits: Vec<usize> = (0..faces).map(|t| (v / strides[t]) % n).collect();
            let value = match self.images[e] {
                EdgeImage::Split {
                    first: (t1, s1),
                    second: (t2, s2),
                } => {
                    let (d1, c1) = self.irreps[t1].slot_action(s1, digits[t1]);
                    let (d2, c2) = self.irreps[t2].slot_action(s2, digits[t2]);
                    digits[t1] = d1;
                    digits[t2] = d2;
                    c1.mul(&c2)
                }
                EdgeImage::Folded { face, slots: (s1, s2) } => {
                    let sigma_loc = TriangleIrrep::local_sigma().get(s1, s2);
                    let prefactor = self.q().pow(-sigma_loc);
                    let (mid, c2) = self.irreps[face].slot_action(s2, digits[face]);
                    let (fin, c1) = self.irreps[face].slot_action(s1, mid);
                    digits[face] = fin;
                    prefactor.mul(&c1).mul(&c2)
                }
                EdgeImage::Boundary { face, slot } => {
                    let (d1, c1) = self.irreps[face].slot_action(slot, digits[face]);
                    digits[face] = d1;
                    c1
                }
            };
            perm.push(digits.iter().zip(&strides).map(|(d, s)| d * s).sum());
            vals.push(value);
        }
        MonomialAction { perm, vals }
    }

    pub fn generator_action(&self, e: usize) -> &MonomialAction {
        &self.actions[e]
    }

    pub fn generator_matrix(&self, e: usize) -> &RepMatrix {
        &self.generators[e]
    }

    pub fn identity_action(&self) -> MonomialAction {
        MonomialAction::identity(self.dim, self.field.order())
    }

    /// Action of the normal-ordered monomial X^k (Laurent exponents allowed).
    pub fn monomial_action(&self, k: &[i64]) -> MonomialAction {
        assert_eq!(k.len(), self.actions.len());
        // Normal order X_0^{k_0} ... X_{n-1}^{k_{n-1}}: the rightmost factor
        // acts first.
        let mut acc = self.identity_action();
        for (e, &ke) in k.iter().enumerate().rev() {
            if ke != 0 {
                acc = self.actions[e].pow(ke).compose(&acc);
            }
        }
        acc
    }

    /// Action of the symmetrized monomial [X^k], Weyl prefactor included.
    pub fn weyl_action(&self, k: &[i64]) -> MonomialAction {
        let n = k.len();
        let mut e = 0i64;
        for i in 0..n {
            for j in (i + 1)..n {
                e -= self.sigma.get(i, j) * k[i] * k[j];
            }
        }
        self.monomial_action(k).scale(&self.q().pow(e))
    }

    /// Action of the puncture invariant P_j.
    pub fn puncture_action(&self, j: usize) -> MonomialAction {
        let profile = self.triangulation.puncture_profile();
        let k: Vec<i64> = profile.row(j).iter().map(|&v| v as i64).collect();
        self.weyl_action(&k)
    }

    /// Action of H = [X^{(1,...,1)}].
    pub fn h_action(&self) -> MonomialAction {
        self.weyl_action(&vec![1; self.actions.len()])
    }

    /// Image of the normal-ordered monomial X^k as a matrix.
    pub fn monomial_matrix(&self, k: &[i64]) -> RepMatrix {
        self.monomial_action(k).to_matrix(&self.field)
    }

    /// Image of the symmetrized monomial [X^k] as a matrix.
    pub fn weyl_matrix(&self, k: &[i64]) -> RepMatrix {
        self.weyl_action(k).to_matrix(&self.field)
    }

    /// Image of the puncture invariant P_j as a matrix.
    pub fn puncture_matrix(&self, j: usize) -> RepMatrix {
        self.puncture_action(j).to_matrix(&self.field)
    }

    /// Image of H as a matrix.
    pub fn h_matrix(&self) -> RepMatrix {
        self.h_action().to_matrix(&self.field)
    }

    /// Image of a general algebra element: the coefficient-weighted sum of
    /// its normal-ordered monomial images.
    pub fn element_matrix(&self, el: &crate::qtorus::QElement) -> RepMatrix {
        assert_eq!(el.n(), self.actions.len());
        let mut acc = RepMatrix::zero(self.dim);
        for (k, coeff) in el.terms() {
            let m = self.monomial_matrix(k).scale(&self.field, coeff);
            acc = acc.add(&self.field, &m);
        }
        acc
    }

    /// Checks X_i X_j = q^{2 sigma_ij} X_j X_i for all pairs against the
    /// supplied skew form (normally the triangulation's own).
    pub fn verify_exchange_against(
        &self,
        sigma: &SkewMatrix,
        mode: Parallelism,
    ) -> Result<(), RepFailure> {
        let edges = self.generators.len();
        assert_eq!(sigma.n(), edges);
        let pairs: Vec<(usize, usize)> = (0..edges)
            .flat_map(|i| ((i + 1)..edges).map(move |j| (i, j)))
            .collect();
        let results = par::map(pairs, mode, |(i, j)| {
            let lhs = self.generators[i].mul(&self.field, &self.generators[j]);
            let rhs = self.generators[j]
                .mul(&self.field, &self.generators[i])
                .scale(&self.field, &self.q_scalar(2 * sigma.get(i, j)));
            if lhs == rhs {
                Ok(())
            } else {
                Err(RepFailure::ExchangeRelation { i, j })
            }
        });
        results.into_iter().collect()
    }

    /// Checks the image of each X_e^N against the declared edge weight.
    pub fn verify_power_scalars(&self, mode: Parallelism) -> Result<(), RepFailure> {
        let edges = self.generators.len();
        let results = par::map((0..edges).collect::<Vec<_>>(), mode, |e| {
            let p = self.generators[e].pow(&self.field, self.n);
            if p.as_scalar(&self.field) == Some(self.weights[e].to_scalar(&self.field)) {
                Ok(())
            } else {
                Err(RepFailure::PowerScalar { edge: e })
            }
        });
        results.into_iter().collect()
    }

    /// Checks that the image of H is charge * Id.
    pub fn verify_central_charge(&self) -> Result<(), RepFailure> {
        let expected = self.charge().to_scalar(&self.field);
        if self.h_matrix().as_scalar(&self.field) == Some(expected) {
            Ok(())
        } else {
            Err(RepFailure::CentralCharge)
        }
    }

    /// The three checks above, against the triangulation's own skew form.
    pub fn verify_homomorphism(&self, mode: Parallelism) -> Result<(), RepFailure> {
        self.verify_exchange_against(&self.sigma, mode)?;
        self.verify_power_scalars(mode)?;
        self.verify_central_charge()
    }
}
