//! The quantum torus attached to a triangulation: one generator X_i per
//! edge, with relations X_i X_j = q^{2 sigma_ij} X_j X_i for the skew form
//! sigma of the triangulation and q a primitive N-th root of unity, N odd.
//!
//! Elements are finite sums of normal-ordered monomials X^k =
//! X_1^{k_1} ... X_n^{k_n} with k in Z^n.  The product of normal-ordered
//! monomials is
//!
//! ```text
//! X^k . X^l = q^{2 sum_{a>b} sigma_ab k_a l_b} X^{k+l},
//! ```
//!
//! and the Weyl-ordered (symmetrized) monomial is
//!
//! ```text
//! [X^k] = q^{- sum_{i<j} sigma_ij k_i k_j} X^k,
//! ```
//!
//! which is independent of how the word is parenthesized or permuted and
//! satisfies [X^k][X^l] = q^{<k,l>} [X^{k+l}] with <k,l> = sum sigma_ij k_i l_j.
//!
//! Two families of elements matter downstream: the puncture invariants
//! P_j = [X^{k_j}] built from the loop-crossing profile, which are central
//! because sigma k_j = 0, and H = [X^{(1,...,1)}].  Their defining relation
//! P_0 ... P_{s-1} = H^2 holds exactly and is checked here by multiplying
//! everything out.

use std::collections::BTreeMap;

use crate::cyclotomic::{CycField, CycScalar, RootOfUnity};
use crate::triangulation::{PunctureProfile, SkewMatrix};

/// A finite Laurent combination of normal-ordered monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QElement {
    n: usize,
    terms: BTreeMap<Vec<i64>, CycScalar>,
}

impl QElement {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i64], &CycScalar)> {
        self.terms.iter().map(|(k, c)| (k.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The coefficient of X^k (zero if absent).
    pub fn coeff(&self, field: &CycField, k: &[i64]) -> CycScalar {
        self.terms.get(k).cloned().unwrap_or_else(|| field.zero())
    }

    /// If the element is c * X^k, returns (k, c).
    pub fn as_monomial(&self) -> Option<(&[i64], &CycScalar)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(k, c)| (k.as_slice(), c))
        } else {
            None
        }
    }

    /// Debug rendering: terms in lexicographic multi-index order, each as
    /// `coeff . X0^k0 X1^k1 ...` with zero exponents omitted and scalars
    /// rendered as powers of q = z^scale.
    pub fn render(&self, field: &CycField, scale: u64) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (k, c) in &self.terms {
            let mut factors = Vec::new();
            for (i, &e) in k.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("X{}", i)),
                    _ => factors.push(format!("X{}^{}", i, e)),
                }
            }
            let coeff = field.render(c, scale);
            if factors.is_empty() {
                parts.push(coeff);
            } else if coeff == "1" {
                parts.push(factors.join(" "));
            } else {
                parts.push(format!("{} . {}", coeff, factors.join(" ")));
            }
        }
        parts.join(" + ")
    }
}

/// The algebra: a skew form plus the odd order N of the root of unity.
///
/// Scalar arithmetic happens in a caller-supplied [`CycField`] whose order
/// must be a multiple of N; q is realized as the power z^{order/N} of the
/// field's defining root z.  Pure algebra tests can take order = N, while
/// representation work uses order = N^2 so that N-th roots of q-powers
/// exist as field elements.
#[derive(Debug, Clone)]
pub struct QAlgebra {
    sigma: SkewMatrix,
    root_order: u64,
}

impl QAlgebra {
    pub fn new(sigma: SkewMatrix, root_order: u64) -> Self {
        assert!(
            root_order >= 3 && root_order % 2 == 1,
            "root order must be odd and at least 3"
        );
        QAlgebra { sigma, root_order }
    }

    pub fn n(&self) -> usize {
        self.sigma.n()
    }

    pub fn root_order(&self) -> u64 {
        self.root_order
    }

    pub fn sigma(&self) -> &SkewMatrix {
        &self.sigma
    }

    /// q as an abstract root of unity of the field's circle group.
    pub fn q_root(&self, field: &CycField) -> RootOfUnity {
        assert_eq!(
            field.order() % self.root_order,
            0,
            "field order must be divisible by the root order"
        );
        RootOfUnity::root(field.order(), (field.order() / self.root_order) as i64)
    }

    /// q^e as a field scalar.
    pub fn q_power(&self, field: &CycField, e: i64) -> CycScalar {
        self.q_root(field).pow(e).to_scalar(field)
    }

    pub fn zero(&self) -> QElement {
        QElement {
            n: self.n(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(&self, field: &CycField) -> QElement {
        self.monomial(field, &vec![0; self.n()], field.one())
    }

    pub fn generator(&self, field: &CycField, i: usize) -> QElement {
        let mut k = vec![0i64; self.n()];
        k[i] = 1;
        self.monomial(field, &k, field.one())
    }

    pub fn monomial(&self, _field: &CycField, k: &[i64], coeff: CycScalar) -> QElement {
        assert_eq!(k.len(), self.n());
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(k.to_vec(), coeff);
        }
        QElement { n: self.n(), terms }
    }

    /// The symmetrized monomial [X^k].
    pub fn weyl(&self, field: &CycField, k: &[i64]) -> QElement {
        assert_eq!(k.len(), self.n());
        let mut e = 0i64;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                e -= self.sigma.get(i, j) * k[i] * k[j];
            }
        }
        self.monomial(field, k, self.q_power(field, e))
    }

    /// <k,l> = sum_ij sigma_ij k_i l_j, the exponent in
    /// [X^k][X^l] = q^{<k,l>}[X^{k+l}].
    pub fn pairing(&self, k: &[i64], l: &[i64]) -> i64 {
        let n = self.n();
        assert!(k.len() == n && l.len() == n);
        let mut p = 0i64;
        for i in 0..n {
            if k[i] == 0 {
                continue;
            }
            for j in 0..n {
                p += self.sigma.get(i, j) * k[i] * l[j];
            }
        }
        p
    }

    pub fn add(&self, field: &CycField, a: &QElement, b: &QElement) -> QElement {
        assert!(a.n == self.n() && b.n == self.n());
        let mut terms = a.terms.clone();
        for (k, c) in &b.terms {
            let entry = terms.entry(k.clone()).or_insert_with(|| field.zero());
            *entry = field.add(entry, c);
        }
        terms.retain(|_, c| !c.is_zero());
        QElement { n: self.n(), terms }
    }

    pub fn neg(&self, field: &CycField, a: &QElement) -> QElement {
        let terms = a
            .terms
            .iter()
            .map(|(k, c)| (k.clone(), field.neg(c)))
            .collect();
        QElement { n: self.n(), terms }
    }

    pub fn sub(&self, field: &CycField, a: &QElement, b: &QElement) -> QElement {
        self.add(field, a, &self.neg(field, b))
    }

    pub fn scale(&self, field: &CycField, c: &CycScalar, a: &QElement) -> QElement {
        let mut terms = BTreeMap::new();
        for (k, v) in &a.terms {
            let s = field.mul(c, v);
            if !s.is_zero() {
                terms.insert(k.clone(), s);
            }
        }
        QElement { n: self.n(), terms }
    }

    pub fn mul(&self, field: &CycField, a: &QElement, b: &QElement) -> QElement {
        assert!(a.n == self.n() && b.n == self.n());
        let n = self.n();
        let mut terms: BTreeMap<Vec<i64>, CycScalar> = BTreeMap::new();
        for (k, ca) in &a.terms {
            for (l, cb) in &b.terms {
                let mut e = 0i64;
                for x in 0..n {
                    if k[x] == 0 {
                        continue;
                    }
                    for y in 0..x {
                        e += 2 * self.sigma.get(x, y) * k[x] * l[y];
                    }
                }
                let coeff = field.mul(&field.mul(ca, cb), &self.q_power(field, e));
                let sum: Vec<i64> = (0..n).map(|x| k[x] + l[x]).collect();
                let entry = terms.entry(sum).or_insert_with(|| field.zero());
                *entry = field.add(entry, &coeff);
            }
        }
        terms.retain(|_, c| !c.is_zero());
        QElement { n: self.n(), terms }
    }

    pub fn pow(&self, field: &CycField, a: &QElement, e: u32) -> QElement {
        let mut acc = self.one(field);
        for _ in 0..e {
            acc = self.mul(field, &acc, a);
        }
        acc
    }

    pub fn commutes(&self, field: &CycField, a: &QElement, b: &QElement) -> bool {
        self.mul(field, a, b) == self.mul(field, b, a)
    }

    /// P_j = [X^{k_j}] for the loop-crossing row of puncture j.
    pub fn puncture_invariant(
        &self,
        field: &CycField,
        profile: &PunctureProfile,
        j: usize,
    ) -> QElement {
        let k: Vec<i64> = profile.row(j).iter().map(|&v| v as i64).collect();
        self.weyl(field, &k)
    }

    /// H = [X^{(1,...,1)}].
    pub fn h_element(&self, field: &CycField) -> QElement {
        self.weyl(field, &vec![1; self.n()])
    }

    /// Verifies [X^{sum_j k_j}] = H^2 and that the ordered product
    /// P_0 ... P_{s-1} also multiplies out to exactly H^2.
    pub fn central_product_check(&self, field: &CycField, profile: &PunctureProfile) -> bool {
        let h = self.h_element(field);
        let h2 = self.mul(field, &h, &h);
        let mut sum_k = vec![0i64; self.n()];
        for j in 0..profile.punctures() {
            for (e, &k) in profile.row(j).iter().enumerate() {
                sum_k[e] += k as i64;
            }
        }
        if self.weyl(field, &sum_k) != h2 {
            return false;
        }
        let mut prod = self.one(field);
        for j in 0..profile.punctures() {
            let p = self.puncture_invariant(field, profile, j);
            prod = self.mul(field, &prod, &p);
        }
        prod == h2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::Triangulation;
    use proptest::prelude::*;

    fn torus_algebra(n: u64) -> (QAlgebra, CycField) {
        let t = Triangulation::builtin("torus-1p").unwrap();
        (QAlgebra::new(t.sigma(), n), CycField::new(n).unwrap())
    }

    #[test]
    fn exchange_relation_on_the_torus() {
        // sigma_01 = 2, so X_0 X_1 = q^4 X_1 X_0.
        let (alg, f) = torus_algebra(9);
        let x0 = alg.generator(&f, 0);
        let x1 = alg.generator(&f, 1);
        let lhs = alg.mul(&f, &x0, &x1);
        let rhs = alg.scale(&f, &alg.q_power(&f, 4), &alg.mul(&f, &x1, &x0));
        assert_eq!(lhs, rhs);
        // Normal order means X_0 X_1 itself carries no q factor.
        let (k, c) = lhs.as_monomial().unwrap();
        assert_eq!(k, &[1, 1, 0]);
        assert_eq!(*c, f.one());
    }

    #[test]
    fn weyl_coefficients_frozen_on_the_torus() {
        let (alg, f) = torus_algebra(9);
        // [X_0 X_1]: exponent -sigma_01 = -2.
        let w = alg.weyl(&f, &[1, 1, 0]);
        assert_eq!(w.coeff(&f, &[1, 1, 0]), alg.q_power(&f, -2));
        // H = [X_0X_1X_2]: -(sigma_01 + sigma_02 + sigma_12) = -(2 - 2 + 2).
        let h = alg.h_element(&f);
        assert_eq!(h.coeff(&f, &[1, 1, 1]), alg.q_power(&f, -2));
        // P_0 = [X^(2,2,2)]: exponent -4(2 - 2 + 2) = -8.
        let p = alg.puncture_invariant(&f, &Triangulation::builtin("torus-1p").unwrap().puncture_profile(), 0);
        assert_eq!(p.coeff(&f, &[2, 2, 2]), alg.q_power(&f, -8));
    }

    #[test]
    fn corrupted_profile_fails_the_central_product_check() {
        let t = Triangulation::builtin("torus-1p").unwrap();
        let alg = QAlgebra::new(t.sigma(), 3);
        let f = CycField::new(3).unwrap();
        assert!(alg.central_product_check(&f, &t.puncture_profile()));
        let mut rows = t.puncture_profile().rows().to_vec();
        rows[0][1] += 1;
        let corrupted = crate::triangulation::PunctureProfile::from_rows(rows);
        assert!(!alg.central_product_check(&f, &corrupted));
    }

    #[test]
    fn rendering_is_sorted_and_omits_trivial_factors() {
        let (alg, f) = torus_algebra(9);
        assert_eq!(alg.zero().render(&f, 1), "0");
        assert_eq!(alg.one(&f).render(&f, 1), "1");
        // H carries q^{-2}, rendered with the exponent normalized mod 9.
        assert_eq!(alg.h_element(&f).render(&f, 1), "q^7 . X0 X1 X2");
        let x0 = alg.generator(&f, 0);
        let sum = alg.add(&f, &alg.one(&f), &alg.pow(&f, &x0, 2));
        assert_eq!(sum.render(&f, 1), "1 + X0^2");
        let inv = alg.weyl(&f, &[-1, 0, 1]);
        assert_eq!(inv.render(&f, 1), "q^7 . X0^-1 X2");
    }

    #[test]
    fn puncture_product_equals_h_squared_on_builtins() {
        for name in Triangulation::builtin_names() {
            let t = Triangulation::builtin(name).unwrap();
            for n in [3u64, 5] {
                let alg = QAlgebra::new(t.sigma(), n);
                let f = CycField::new(n).unwrap();
                assert!(
                    alg.central_product_check(&f, &t.puncture_profile()),
                    "{} at N={}",
                    name,
                    n
                );
            }
        }
    }

    #[test]
    fn puncture_invariants_are_central() {
        for name in Triangulation::builtin_names() {
            let t = Triangulation::builtin(name).unwrap();
            let alg = QAlgebra::new(t.sigma(), 3);
            let f = CycField::new(3).unwrap();
            let profile = t.puncture_profile();
            for j in 0..t.n_punctures() {
                let p = alg.puncture_invariant(&f, &profile, j);
                for i in 0..t.n_edges() {
                    let x = alg.generator(&f, i);
                    assert!(alg.commutes(&f, &p, &x), "{} P_{} vs X_{}", name, j, i);
                }
            }
        }
    }

    #[test]
    fn generator_nth_powers_are_central() {
        let (alg, f) = torus_algebra(3);
        for i in 0..3 {
            let xn = alg.pow(&f, &alg.generator(&f, i), 3);
            for j in 0..3 {
                let xj = alg.generator(&f, j);
                assert!(alg.commutes(&f, &xn, &xj));
            }
        }
    }

    #[test]
    fn weyl_product_rule() {
        let (alg, f) = torus_algebra(9);
        for (k, l) in [
            (vec![1, 0, 0], vec![0, 1, 0]),
            (vec![2, -1, 3], vec![1, 1, -2]),
            (vec![0, 4, 1], vec![-3, 0, 2]),
        ] {
            let lhs = alg.mul(&f, &alg.weyl(&f, &k), &alg.weyl(&f, &l));
            let sum: Vec<i64> = k.iter().zip(&l).map(|(a, b)| a + b).collect();
            let rhs = alg.scale(
                &f,
                &alg.q_power(&f, alg.pairing(&k, &l)),
                &alg.weyl(&f, &sum),
            );
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn h_squared_equals_weyl_of_doubled_exponent() {
        // <(1,..,1),(1,..,1)> = 0 by antisymmetry, so H^2 = [X^(2,...,2)].
        let (alg, f) = torus_algebra(9);
        let h = alg.h_element(&f);
        assert_eq!(alg.mul(&f, &h, &h), alg.weyl(&f, &[2, 2, 2]));
    }

    fn weyl_of_word(alg: &QAlgebra, f: &CycField, word: &[usize]) -> QElement {
        let mut e = 0i64;
        for a in 0..word.len() {
            for b in (a + 1)..word.len() {
                e -= alg.sigma().get(word[a], word[b]);
            }
        }
        let mut prod = alg.monomial(f, &vec![0; alg.n()], alg.q_power(f, e));
        for &i in word {
            prod = alg.mul(f, &prod, &alg.generator(f, i));
        }
        prod
    }

    proptest! {
        #[test]
        fn weyl_ordering_is_word_order_independent(
            word in proptest::collection::vec(0usize..3, 1..7),
            seed in any::<u64>(),
        ) {
            let (alg, f) = torus_algebra(9);
            let mut shuffled = word.clone();
            // Fisher-Yates with a splitmix-style step, deterministic per seed.
            let mut state = seed | 1;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            prop_assert_eq!(weyl_of_word(&alg, &f, &word), weyl_of_word(&alg, &f, &shuffled));
        }

        #[test]
        fn multiplication_is_associative(
            ka in proptest::collection::vec(-2i64..3, 3),
            kb in proptest::collection::vec(-2i64..3, 3),
            kc in proptest::collection::vec(-2i64..3, 3),
            sa in -2i64..3, sb in -2i64..3,
        ) {
            let (alg, f) = torus_algebra(9);
            // a is a two-term element to exercise bilinearity too.
            let a = alg.add(
                &f,
                &alg.monomial(&f, &ka, f.from_integer(sa)),
                &alg.monomial(&f, &kb, f.from_integer(sb)),
            );
            let b = alg.weyl(&f, &kb);
            let c = alg.weyl(&f, &kc);
            let lhs = alg.mul(&f, &alg.mul(&f, &a, &b), &c);
            let rhs = alg.mul(&f, &a, &alg.mul(&f, &b, &c));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn weyl_of_word_matches_weyl_of_exponent() {
        let (alg, f) = torus_algebra(9);
        // Word X_0 X_0 X_1 X_2 X_2 X_2 has exponent vector (2,1,3).
        let word = [0, 0, 1, 2, 2, 2];
        assert_eq!(weyl_of_word(&alg, &f, &word), alg.weyl(&f, &[2, 1, 3]));
    }
}
