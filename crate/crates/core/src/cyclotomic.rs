//! Exact arithmetic in cyclotomic fields of odd order.
//!
//! `CycField::new(d)` models the field Q(z) where z is a primitive d-th root
//! of unity and d is odd.  Elements are residues modulo the d-th cyclotomic
//! polynomial `Phi_d`, stored as length-phi(d) vectors of arbitrary-precision
//! rationals, so every comparison in the engine is exact.  Because d is odd,
//! -1 = z^((d+1)/2 * 2) ... more usefully Q(zeta_{2d}) = Q(zeta_d), and the
//! group of roots of unity inside the field is exactly mu_{2d}.  The
//! [`RootOfUnity`] type tracks elements of mu_{2d} as exponents modulo 2d,
//! which keeps weight bookkeeping (products, inverses, canonical n-th roots)
//! in integer arithmetic; `to_scalar` embeds them into the field on demand.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycError {
    #[error("cyclotomic order must be odd, got {0}")]
    EvenOrder(u64),
    #[error("cyclotomic order must be at least 3, got {0}")]
    OrderTooSmall(u64),
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("{value} has no square root among the roots of unity of order dividing 2*{order}")]
    NoSquareRoot { value: String, order: u64 },
    #[error("{value} is not a {n}-th power among the roots of unity of order dividing 2*{order}")]
    NoNthRoot { value: String, n: u64, order: u64 },
}

/// Dense polynomial helpers over the rationals.  Coefficients are stored
/// low-degree first with no trailing zeros.
mod poly {
    use super::*;

    pub type Poly = Vec<BigRational>;

    pub fn trim(p: &mut Poly) {
        while p.last().map_or(false, |c| c.is_zero()) {
            p.pop();
        }
    }

    pub fn is_zero(p: &Poly) -> bool {
        p.is_empty()
    }

    pub fn x_pow_minus_one(n: usize) -> Poly {
        let mut p = vec![BigRational::zero(); n + 1];
        p[0] = -BigRational::one();
        p[n] = BigRational::one();
        p
    }

    pub fn mul(a: &Poly, b: &Poly) -> Poly {
        if is_zero(a) || is_zero(b) {
            return Vec::new();
        }
        let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() {
                    out[i + j] += ai * bj;
                }
            }
        }
        trim(&mut out);
        out
    }

    /// Euclidean division: returns (quotient, remainder) with
    /// `a = q*b + r` and `deg r < deg b`.
    ///
    /// # Panics
    /// Panics if `b` is zero.
    pub fn divmod(a: &Poly, b: &Poly) -> (Poly, Poly) {
        assert!(!is_zero(b), "polynomial division by zero");
        let mut r = a.clone();
        trim(&mut r);
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let lead_inv = b.last().unwrap().recip();
        let mut q = vec![BigRational::zero(); r.len() - b.len() + 1];
        while !is_zero(&r) && r.len() >= b.len() {
            let shift = r.len() - b.len();
            let factor = r.last().unwrap() * &lead_inv;
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() {
                    let t = &factor * bj;
                    r[shift + j] -= t;
                }
            }
            trim(&mut r);
            q[shift] = factor;
        }
        trim(&mut q);
        (q, r)
    }

    /// Extended Euclid: returns (g, u, v) with `u*a + v*b = g`, g the gcd
    /// (not normalised to be monic).
    pub fn ext_gcd(a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        trim(&mut r0);
        trim(&mut r1);
        let (mut u0, mut u1): (Poly, Poly) = (vec![BigRational::one()], Vec::new());
        let (mut v0, mut v1): (Poly, Poly) = (Vec::new(), vec![BigRational::one()]);
        while !is_zero(&r1) {
            let (q, r) = divmod(&r0, &r1);
            let qu = mul(&q, &u1);
            let qv = mul(&q, &v1);
            let u2 = sub(&u0, &qu);
            let v2 = sub(&v0, &qv);
            r0 = r1;
            r1 = r;
            u0 = u1;
            u1 = u2;
            v0 = v1;
            v1 = v2;
        }
        (r0, u0, v0)
    }

    pub fn sub(a: &Poly, b: &Poly) -> Poly {
        let mut out = a.clone();
        if out.len() < b.len() {
            out.resize(b.len(), BigRational::zero());
        }
        for (j, bj) in b.iter().enumerate() {
            out[j] -= bj;
        }
        trim(&mut out);
        out
    }

    fn divisors(n: u64) -> Vec<u64> {
        let mut d: Vec<u64> = (1..=n).filter(|k| n % k == 0).collect();
        d.sort_unstable();
        d
    }

    /// The n-th cyclotomic polynomial, computed by exact division:
    /// `Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d`.
    pub fn cyclotomic(n: u64) -> Poly {
        let mut memo: std::collections::BTreeMap<u64, Poly> = std::collections::BTreeMap::new();
        for d in divisors(n) {
            let mut num = x_pow_minus_one(d as usize);
            for e in divisors(d) {
                if e < d {
                    let phi_e = memo[&e].clone();
                    let (q, r) = divmod(&num, &phi_e);
                    assert!(is_zero(&r), "cyclotomic division must be exact");
                    num = q;
                }
            }
            memo.insert(d, num);
        }
        memo.remove(&n).unwrap()
    }
}

/// An element of the cyclotomic field, as a residue of degree < phi(d).
/// Equality is exact coefficient-wise comparison; the representation is
/// canonical because the length is fixed and rationals are kept reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycScalar {
    coeffs: Vec<BigRational>,
}

impl CycScalar {
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Returns the value as a big integer when the element is a rational
    /// integer, i.e. lies in Z inside the field.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.coeffs[1..].iter().any(|c| !c.is_zero()) {
            return None;
        }
        let c0 = &self.coeffs[0];
        if c0.denom().is_one() {
            Some(c0.numer().clone())
        } else {
            None
        }
    }
}

/// The field Q(z), z a primitive root of unity of odd order `order`.
#[derive(Debug, Clone)]
pub struct CycField {
    order: u64,
    phi: usize,
    /// Monic modulus Phi_order, length phi + 1.
    modulus: Vec<BigRational>,
    /// x^k mod Phi for k in [0, max(order, 2*phi - 1)), each of length phi.
    xpow: Vec<Vec<BigRational>>,
}

impl CycField {
    pub fn new(order: u64) -> Result<Self, CycError> {
        if order % 2 == 0 {
            return Err(CycError::EvenOrder(order));
        }
        if order < 3 {
            return Err(CycError::OrderTooSmall(order));
        }
        let modulus = poly::cyclotomic(order);
        let phi = modulus.len() - 1;
        let table_len = std::cmp::max(order as usize, 2 * phi - 1);
        let mut xpow: Vec<Vec<BigRational>> = Vec::with_capacity(table_len);
        for k in 0..table_len {
            if k < phi {
                let mut row = vec![BigRational::zero(); phi];
                row[k] = BigRational::one();
                xpow.push(row);
            } else {
                // x * xpow[k-1], reduced: the overflow coefficient multiplies
                // -(tail of Phi) since x^phi = -(Phi - x^phi).
                let prev = &xpow[k - 1];
                let lead = prev[phi - 1].clone();
                let mut row = vec![BigRational::zero(); phi];
                for j in 1..phi {
                    row[j] = prev[j - 1].clone();
                }
                if !lead.is_zero() {
                    for j in 0..phi {
                        row[j] -= &lead * &modulus[j];
                    }
                }
                xpow.push(row);
            }
        }
        Ok(CycField {
            order,
            phi,
            modulus,
            xpow,
        })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Degree of the field over Q, i.e. Euler phi of the order.
    pub fn degree(&self) -> usize {
        self.phi
    }

    pub fn modulus(&self) -> &[BigRational] {
        &self.modulus
    }

    pub fn zero(&self) -> CycScalar {
        CycScalar {
            coeffs: vec![BigRational::zero(); self.phi],
        }
    }

    pub fn one(&self) -> CycScalar {
        self.from_integer(1)
    }

    pub fn from_integer(&self, v: i64) -> CycScalar {
        self.from_rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(&self, v: BigRational) -> CycScalar {
        let mut coeffs = vec![BigRational::zero(); self.phi];
        coeffs[0] = v;
        CycScalar { coeffs }
    }

    /// z^e for the field's primitive root z, with e taken modulo the order.
    pub fn root_power(&self, e: i64) -> CycScalar {
        let k = e.rem_euclid(self.order as i64) as usize;
        CycScalar {
            coeffs: self.xpow[k].clone(),
        }
    }

    pub fn add(&self, a: &CycScalar, b: &CycScalar) -> CycScalar {
        self.check(a);
        self.check(b);
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| x + y)
            .collect();
        CycScalar { coeffs }
    }

    pub fn sub(&self, a: &CycScalar, b: &CycScalar) -> CycScalar {
        self.check(a);
        self.check(b);
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| x - y)
            .collect();
        CycScalar { coeffs }
    }

    pub fn neg(&self, a: &CycScalar) -> CycScalar {
        CycScalar {
            coeffs: a.coeffs.iter().map(|x| -x).collect(),
        }
    }

    pub fn mul(&self, a: &CycScalar, b: &CycScalar) -> CycScalar {
        self.check(a);
        self.check(b);
        let mut prod = vec![BigRational::zero(); 2 * self.phi - 1];
        for (i, ai) in a.coeffs.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                if !bj.is_zero() {
                    prod[i + j] += ai * bj;
                }
            }
        }
        let mut coeffs: Vec<BigRational> = prod[..self.phi].to_vec();
        for (k, c) in prod.iter().enumerate().skip(self.phi) {
            if !c.is_zero() {
                for j in 0..self.phi {
                    coeffs[j] += c * &self.xpow[k][j];
                }
            }
        }
        CycScalar { coeffs }
    }

    pub fn scale_rational(&self, a: &CycScalar, r: &BigRational) -> CycScalar {
        CycScalar {
            coeffs: a.coeffs.iter().map(|x| x * r).collect(),
        }
    }

    /// Multiplicative inverse via the extended polynomial gcd with the
    /// modulus: u*a + v*Phi = g forces g to be a nonzero constant because
    /// Phi is irreducible, and then u/g represents 1/a.
    pub fn inv(&self, a: &CycScalar) -> Result<CycScalar, CycError> {
        self.check(a);
        if a.is_zero() {
            return Err(CycError::ZeroInverse);
        }
        let mut ap = a.coeffs.clone();
        poly::trim(&mut ap);
        let (g, u, _) = poly::ext_gcd(&ap, &self.modulus);
        assert!(
            g.len() == 1,
            "gcd with the cyclotomic modulus must be a constant"
        );
        let ginv = g[0].recip();
        let mut coeffs = vec![BigRational::zero(); self.phi];
        for (j, uj) in u.iter().enumerate() {
            coeffs[j] = uj * &ginv;
        }
        let out = CycScalar { coeffs };
        debug_assert_eq!(self.mul(a, &out), self.one());
        Ok(out)
    }

    pub fn div(&self, a: &CycScalar, b: &CycScalar) -> Result<CycScalar, CycError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &CycScalar, e: i64) -> Result<CycScalar, CycError> {
        if e < 0 {
            return self.pow(&self.inv(a)?, -e);
        }
        let mut result = self.one();
        let mut base = a.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        Ok(result)
    }

    fn check(&self, a: &CycScalar) {
        assert_eq!(
            a.coeffs.len(),
            self.phi,
            "scalar belongs to a different cyclotomic field"
        );
    }

    /// Recognises scalars that are plus or minus a single power of the
    /// primitive root, returning (negated, exponent).
    pub fn as_root_exponent(&self, a: &CycScalar) -> Option<(bool, u64)> {
        self.check(a);
        for k in 0..self.order as usize {
            if a.coeffs == self.xpow[k] {
                return Some((false, k as u64));
            }
        }
        let neg = self.neg(a);
        for k in 0..self.order as usize {
            if neg.coeffs == self.xpow[k] {
                return Some((true, k as u64));
            }
        }
        None
    }

    /// Canonical string form: a signed power of q = z^scale when the value is
    /// plus or minus a root of unity, otherwise a polynomial in q with
    /// exponents written as reduced fractions of the z-exponent over `scale`.
    /// With scale 1 this is an ordinary polynomial in q.
    ///
    /// # Panics
    /// Panics if `scale` does not divide the field order.
    pub fn render(&self, a: &CycScalar, scale: u64) -> String {
        assert!(scale >= 1 && self.order % scale == 0, "bad render scale");
        if let Some((neg, k)) = self.as_root_exponent(a) {
            let body = match render_q_power(k, scale) {
                None => "1".to_string(),
                Some(p) => p,
            };
            return if neg { format!("-{}", body) } else { body };
        }
        let mut out = String::new();
        for (i, c) in a.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let power = render_q_power(i as u64, scale);
            match power {
                None => {
                    let _ = write!(out, "{}", abs);
                }
                Some(p) => {
                    if abs.is_one() {
                        out.push_str(&p);
                    } else {
                        let _ = write!(out, "{}*{}", abs, p);
                    }
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

/// q^(k/scale) in canonical text form; `None` encodes the constant 1.
fn render_q_power(k: u64, scale: u64) -> Option<String> {
    if k == 0 {
        return None;
    }
    let g = gcd_u64(k, scale);
    let (num, den) = (k / g, scale / g);
    Some(if den == 1 {
        if num == 1 {
            "q".to_string()
        } else {
            format!("q^{}", num)
        }
    } else {
        format!("q^({}/{})", num, den)
    })
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// A root of unity in the field of odd order d: the value zeta_{2d}^exp,
/// i.e. a sign times a power of the primitive d-th root.  Multiplication is
/// exponent addition modulo 2d, so weight bookkeeping never leaves integer
/// arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RootOfUnity {
    order: u64,
    /// Exponent of zeta_{2*order}, in [0, 2*order).
    exp: u64,
}

impl RootOfUnity {
    pub fn one(order: u64) -> Self {
        RootOfUnity { order, exp: 0 }
    }

    pub fn minus_one(order: u64) -> Self {
        RootOfUnity { order, exp: order }
    }

    /// z^k where z is the primitive root of the given odd order.
    pub fn root(order: u64, k: i64) -> Self {
        let m = 2 * order as i64;
        RootOfUnity {
            order,
            exp: (2 * k).rem_euclid(m) as u64,
        }
    }

    /// Raw constructor from an exponent of zeta_{2*order}.
    pub fn from_exp_2d(order: u64, e: i64) -> Self {
        let m = 2 * order as i64;
        RootOfUnity {
            order,
            exp: e.rem_euclid(m) as u64,
        }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn exp_2d(&self) -> u64 {
        self.exp
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0
    }

    pub fn mul(&self, other: &RootOfUnity) -> RootOfUnity {
        assert_eq!(self.order, other.order, "root-of-unity order mismatch");
        RootOfUnity {
            order: self.order,
            exp: (self.exp + other.exp) % (2 * self.order),
        }
    }

    pub fn inv(&self) -> RootOfUnity {
        RootOfUnity {
            order: self.order,
            exp: (2 * self.order - self.exp) % (2 * self.order),
        }
    }

    pub fn pow(&self, e: i64) -> RootOfUnity {
        let m = 2 * self.order as i128;
        let x = (self.exp as i128 * e as i128).rem_euclid(m);
        RootOfUnity {
            order: self.order,
            exp: x as u64,
        }
    }

    pub fn negated(&self) -> RootOfUnity {
        self.mul(&RootOfUnity::minus_one(self.order))
    }

    pub fn is_nth_root(&self, n: u64) -> bool {
        (self.exp as u128 * n as u128) % (2 * self.order as u128) == 0
    }

    /// The canonical square root: the solution of r^2 = self that again lies
    /// in mu_d (even exponent).  Fails exactly when self is minus a d-th
    /// root, whose square roots live outside the field.
    pub fn canonical_sqrt(&self) -> Result<RootOfUnity, CycError> {
        if self.exp % 2 != 0 {
            return Err(CycError::NoSquareRoot {
                value: self.render(1),
                order: self.order,
            });
        }
        let half = self.exp / 2;
        let exp = if half % 2 == 0 { half } else { half + self.order };
        Ok(RootOfUnity {
            order: self.order,
            exp: exp % (2 * self.order),
        })
    }

    /// The canonical n-th root: the smallest exponent solution of
    /// r^n = self in mu_{2d}.  For w = z^(n*f) this gives z^f.
    pub fn canonical_nth_root(&self, n: u64) -> Result<RootOfUnity, CycError> {
        assert!(n >= 1);
        let m = 2 * self.order;
        let g = gcd_u64(n % m, m);
        if self.exp % g != 0 {
            return Err(CycError::NoNthRoot {
                value: self.render(1),
                n,
                order: self.order,
            });
        }
        // Solve n*x = exp (mod m): divide through by g, then invert n/g.
        let (mm, nn, ee) = (m / g, (n / g) % (m / g), self.exp / g);
        let inv = mod_inverse(nn, mm);
        Ok(RootOfUnity {
            order: self.order,
            exp: (ee as u128 * inv as u128 % mm as u128) as u64,
        })
    }

    /// All n-th roots of self inside mu_{2d}: the canonical root times the
    /// n-th roots of unity.  Sorted by exponent, so the order is canonical.
    pub fn nth_root_fiber(&self, n: u64) -> Result<Vec<RootOfUnity>, CycError> {
        let base = self.canonical_nth_root(n)?;
        let m = 2 * self.order;
        let g = gcd_u64(n % m, m);
        let step = m / g;
        let mut out: Vec<RootOfUnity> = (0..g)
            .map(|t| RootOfUnity {
                order: self.order,
                exp: (base.exp + t * step) % m,
            })
            .collect();
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Embeds into the field: zeta_{2d}^exp as an exact scalar.
    ///
    /// # Panics
    /// Panics if the field order differs from the root's order.
    pub fn to_scalar(&self, field: &CycField) -> CycScalar {
        assert_eq!(field.order(), self.order, "field order mismatch");
        if self.exp % 2 == 0 {
            field.root_power((self.exp / 2) as i64)
        } else {
            // Odd exponent: zeta_{2d}^e = -zeta_d^((e-d)/2) since d is odd.
            let k = (self.exp as i64 - self.order as i64).div_euclid(2);
            field.neg(&field.root_power(k))
        }
    }

    /// Canonical text form, as a signed power of q = z^scale.
    pub fn render(&self, scale: u64) -> String {
        let (sign, k) = if self.exp % 2 == 0 {
            (false, self.exp / 2)
        } else {
            (
                true,
                ((self.exp + 2 * self.order - self.order) / 2) % self.order,
            )
        };
        let body = match render_q_power(k % self.order, scale) {
            None => "1".to_string(),
            Some(p) => p,
        };
        if sign {
            format!("-{}", body)
        } else {
            body
        }
    }
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    // Extended Euclid on (a, m); caller guarantees gcd(a, m) = 1.
    if m == 1 {
        return 0;
    }
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert_eq!(r0, 1, "element not invertible modulo {}", m);
    t0.rem_euclid(m as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cyclotomic_polynomials_match_known_tables() {
        // Phi_3 = x^2 + x + 1
        let p3 = poly::cyclotomic(3);
        assert_eq!(p3, vec![rat(1, 1), rat(1, 1), rat(1, 1)]);
        // Phi_9 = x^6 + x^3 + 1
        let p9 = poly::cyclotomic(9);
        let mut expect = vec![BigRational::zero(); 7];
        expect[0] = rat(1, 1);
        expect[3] = rat(1, 1);
        expect[6] = rat(1, 1);
        assert_eq!(p9, expect);
        // Phi_15 = x^8 - x^7 + x^5 - x^4 + x^3 - x + 1
        let p15 = poly::cyclotomic(15);
        let coeffs: Vec<i64> = vec![1, -1, 0, 1, -1, 1, 0, -1, 1];
        let expect: Vec<BigRational> = coeffs.into_iter().map(|c| rat(c, 1)).collect();
        assert_eq!(p15, expect);
        // Phi_81 = x^54 + x^27 + 1 (prime-power pattern)
        let p81 = poly::cyclotomic(81);
        assert_eq!(p81.len(), 55);
        for (i, c) in p81.iter().enumerate() {
            let expected = if i == 0 || i == 27 || i == 54 { 1 } else { 0 };
            assert_eq!(c, &rat(expected, 1), "coefficient {}", i);
        }
    }

    #[test]
    fn product_of_cyclotomics_over_divisors_is_x_n_minus_one() {
        for n in [9u64, 15, 25] {
            let mut prod = vec![BigRational::one()];
            for d in 1..=n {
                if n % d == 0 {
                    prod = poly::mul(&prod, &poly::cyclotomic(d));
                }
            }
            assert_eq!(prod, poly::x_pow_minus_one(n as usize));
        }
    }

    #[test]
    fn field_rejects_even_or_tiny_orders() {
        assert_eq!(CycField::new(6).unwrap_err(), CycError::EvenOrder(6));
        assert_eq!(CycField::new(1).unwrap_err(), CycError::OrderTooSmall(1));
    }

    #[test]
    fn primitive_root_has_exact_order() {
        let f = CycField::new(9).unwrap();
        assert_eq!(f.degree(), 6);
        assert_eq!(f.root_power(9), f.one());
        for k in 1..9 {
            assert_ne!(f.root_power(k), f.one(), "z^{} must not be 1", k);
        }
        // z^6 + z^3 + 1 = 0: the defining relation of Phi_9.
        let s = f.add(&f.add(&f.root_power(6), &f.root_power(3)), &f.one());
        assert!(s.is_zero());
    }

    #[test]
    fn sum_of_all_cube_roots_vanishes() {
        let f = CycField::new(3).unwrap();
        let s = f.add(&f.add(&f.root_power(0), &f.root_power(1)), &f.root_power(2));
        assert!(s.is_zero());
    }

    #[test]
    fn inverse_of_primitive_root_at_order_nine() {
        let f = CycField::new(9).unwrap();
        let z = f.root_power(1);
        let zi = f.inv(&z).unwrap();
        assert_eq!(f.mul(&z, &zi), f.one());
        // The inverse must equal z^8 on the nose.
        assert_eq!(zi, f.root_power(8));
    }

    #[test]
    fn inverse_of_generic_element() {
        let f = CycField::new(9).unwrap();
        // a = 2/3 + z - z^4
        let a = f.add(
            &f.add(
                &f.from_rational(rat(2, 3)),
                &f.root_power(1),
            ),
            &f.neg(&f.root_power(4)),
        );
        let ai = f.inv(&a).unwrap();
        assert_eq!(f.mul(&a, &ai), f.one());
        assert!(f.inv(&f.zero()).is_err());
    }

    #[test]
    fn pow_handles_negative_exponents() {
        let f = CycField::new(15).unwrap();
        let z = f.root_power(2);
        let p = f.pow(&z, -3).unwrap();
        assert_eq!(f.mul(&p, &f.root_power(6)), f.one());
    }

    #[test]
    fn root_of_unity_group_law() {
        let a = RootOfUnity::root(9, 4);
        let b = RootOfUnity::root(9, 7);
        assert_eq!(a.mul(&b), RootOfUnity::root(9, 11));
        assert_eq!(a.mul(&a.inv()), RootOfUnity::one(9));
        assert_eq!(a.pow(-1), a.inv());
        let m = RootOfUnity::minus_one(9);
        assert_eq!(m.mul(&m), RootOfUnity::one(9));
        assert_eq!(a.negated().negated(), a);
    }

    #[test]
    fn root_of_unity_embedding_matches_field_arithmetic() {
        let f = CycField::new(9).unwrap();
        let a = RootOfUnity::root(9, 4);
        assert_eq!(a.to_scalar(&f), f.root_power(4));
        let m = RootOfUnity::minus_one(9);
        assert_eq!(m.to_scalar(&f), f.neg(&f.one()));
        let c = RootOfUnity::root(9, 2).negated();
        assert_eq!(c.to_scalar(&f), f.neg(&f.root_power(2)));
        // Embedding is a homomorphism.
        let b = RootOfUnity::from_exp_2d(9, 5);
        assert_eq!(
            f.mul(&a.to_scalar(&f), &b.to_scalar(&f)),
            a.mul(&b).to_scalar(&f)
        );
    }

    #[test]
    fn canonical_sqrt_of_q_at_order_five_is_q_cubed() {
        let w = RootOfUnity::root(5, 1);
        let r = w.canonical_sqrt().unwrap();
        assert_eq!(r, RootOfUnity::root(5, 3));
        assert_eq!(r.mul(&r), w);
    }

    #[test]
    fn canonical_sqrt_squares_back_for_all_of_mu_d() {
        for k in 0..15 {
            let w = RootOfUnity::root(15, k);
            let r = w.canonical_sqrt().unwrap();
            assert_eq!(r.mul(&r), w);
            assert_eq!(r.exp_2d() % 2, 0, "canonical sqrt stays in mu_d");
        }
        // Minus a d-th root has no square root in the field.
        assert!(RootOfUnity::root(15, 2).negated().canonical_sqrt().is_err());
    }

    #[test]
    fn canonical_nth_roots_and_fibers() {
        // Order 9 viewed as the engine field for N = 3: q = z^3.
        let n = 3u64;
        for a in 0..3i64 {
            let w = RootOfUnity::root(9, 3 * a); // q^a
            let r = w.canonical_nth_root(n).unwrap();
            assert_eq!(r.pow(n as i64), w, "cube of canonical root");
            let fiber = w.nth_root_fiber(n).unwrap();
            assert_eq!(fiber.len(), 3);
            assert!(fiber.contains(&r));
            for root in &fiber {
                assert_eq!(root.pow(n as i64), w);
            }
            // All fiber members are distinct.
            let mut exps: Vec<u64> = fiber.iter().map(|r| r.exp_2d()).collect();
            exps.dedup();
            assert_eq!(exps.len(), 3);
        }
        // The canonical cube root of q itself is the primitive 9th root.
        let q = RootOfUnity::root(9, 3);
        assert_eq!(q.canonical_nth_root(3).unwrap(), RootOfUnity::root(9, 1));
        // -1 has canonical cube root -1 (odd n).
        let m = RootOfUnity::minus_one(9);
        assert_eq!(m.canonical_nth_root(3).unwrap().pow(3), m);
        // A primitive 9th root is not a cube of anything in mu_18.
        assert!(RootOfUnity::root(9, 1).canonical_nth_root(9).is_err());
    }

    #[test]
    fn is_nth_root_detects_subgroups() {
        assert!(RootOfUnity::root(9, 3).is_nth_root(3)); // q in mu_3
        assert!(!RootOfUnity::root(9, 1).is_nth_root(3));
        assert!(RootOfUnity::root(9, 1).is_nth_root(9));
        assert!(RootOfUnity::minus_one(9).is_nth_root(2));
    }

    #[test]
    fn rendering_is_canonical() {
        let f = CycField::new(9).unwrap();
        assert_eq!(f.render(&f.zero(), 3), "0");
        assert_eq!(f.render(&f.one(), 3), "1");
        assert_eq!(f.render(&f.root_power(3), 3), "q");
        assert_eq!(f.render(&f.root_power(6), 3), "q^2");
        assert_eq!(f.render(&f.root_power(1), 3), "q^(1/3)");
        assert_eq!(f.render(&f.root_power(2), 3), "q^(2/3)");
        let mixed = f.add(
            &f.from_rational(rat(1, 3)),
            &f.scale_rational(&f.root_power(4), &rat(-2, 3)),
        );
        assert_eq!(f.render(&mixed, 3), "1/3 - 2/3*q^(4/3)");

        assert_eq!(RootOfUnity::one(9).render(3), "1");
        assert_eq!(RootOfUnity::minus_one(9).render(3), "-1");
        assert_eq!(RootOfUnity::root(9, 3).render(3), "q");
        assert_eq!(RootOfUnity::root(9, 1).render(3), "q^(1/3)");
        assert_eq!(RootOfUnity::root(9, 6).negated().render(3), "-q^2");
        // Scale 1: plain polynomial in q.
        let f5 = CycField::new(5).unwrap();
        assert_eq!(f5.render(&f5.root_power(2), 1), "q^2");
    }

    #[test]
    fn integer_detection() {
        let f = CycField::new(9).unwrap();
        assert_eq!(f.from_integer(7).as_integer(), Some(BigInt::from(7)));
        assert_eq!(f.zero().as_integer(), Some(BigInt::from(0)));
        assert_eq!(f.root_power(2).as_integer(), None);
        assert_eq!(f.from_rational(rat(1, 3)).as_integer(), None);
    }
}
