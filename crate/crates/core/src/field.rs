//! Finite-field tower E = GF(16) ⊂ F_q = GF(16^m), m ∈ {1, 2, 3}.
//!
//! E is GF(2)[x]/(x⁴ + x + 1). F_q is E[y]/(μ(y)) for a monic irreducible μ
//! of degree m. An element of F_q is stored as m nibbles packed into a `u16`,
//! coefficient of yⁱ in bits 4i..4i+3, so embedded E-elements are exactly the
//! values below 16.
//!
//! Multiplication in F_q uses log/antilog tables built from a primitive
//! element found by schoolbook multiplication modulo μ.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign};

use crate::error::{BpdError, Result};

/// x⁴ + x + 1.
pub const BASE_POLY: u8 = 0b1_0011;

const fn build_gf16_tables() -> ([u8; 30], [u8; 16]) {
    let mut exp = [0u8; 30];
    let mut log = [0u8; 16];
    let mut x: u8 = 1;
    let mut i = 0;
    while i < 15 {
        exp[i] = x;
        exp[i + 15] = x;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x10 != 0 {
            x ^= BASE_POLY;
        }
        i += 1;
    }
    (exp, log)
}

const GF16_TABLES: ([u8; 30], [u8; 16]) = build_gf16_tables();
const GF16_EXP: [u8; 30] = GF16_TABLES.0;
const GF16_LOG: [u8; 16] = GF16_TABLES.1;

/// An element of E = GF(16) in the polynomial basis of x (bit i = coefficient of xⁱ).
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gf16(u8);

impl Gf16 {
    pub const ZERO: Gf16 = Gf16(0);
    pub const ONE: Gf16 = Gf16(1);

    /// Panics if `v` does not fit in a nibble.
    pub const fn new(v: u8) -> Self {
        assert!(v < 16, "GF(16) element out of range");
        Gf16(v)
    }

    pub fn from_nibble(v: u8) -> Option<Self> {
        (v < 16).then_some(Gf16(v))
    }

    pub const fn value(self) -> u8 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn inv(self) -> Result<Self> {
        if self.0 == 0 {
            return Err(BpdError::DivisionByZero);
        }
        let l = GF16_LOG[self.0 as usize] as usize;
        Ok(Gf16(GF16_EXP[(15 - l) % 15]))
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Gf16::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// All 16 elements in value order.
    pub fn all() -> impl Iterator<Item = Gf16> {
        (0u8..16).map(Gf16)
    }
}

impl fmt::Debug for Gf16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

impl fmt::Display for Gf16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

impl Add for Gf16 {
    type Output = Gf16;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf16) -> Gf16 {
        Gf16(self.0 ^ rhs.0)
    }
}

// Addition in characteristic 2 is XOR.
#[allow(clippy::suspicious_op_assign_impl)]
impl AddAssign for Gf16 {
    fn add_assign(&mut self, rhs: Gf16) {
        self.0 ^= rhs.0;
    }
}

impl Mul for Gf16 {
    type Output = Gf16;
    fn mul(self, rhs: Gf16) -> Gf16 {
        if self.0 == 0 || rhs.0 == 0 {
            return Gf16(0);
        }
        let idx = GF16_LOG[self.0 as usize] as usize + GF16_LOG[rhs.0 as usize] as usize;
        Gf16(GF16_EXP[idx])
    }
}

impl MulAssign for Gf16 {
    fn mul_assign(&mut self, rhs: Gf16) {
        *self = *self * rhs;
    }
}

/// An element of F_q. Only meaningful relative to the [`FieldTower`] it came from.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(u16);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub const fn embed(c: Gf16) -> Self {
        Elem(c.0 as u16)
    }

    /// Unchecked; callers guarantee `v < 16^m` for the tower in use.
    pub(crate) const fn from_raw(v: u16) -> Self {
        Elem(v)
    }

    /// Packed value; the canonical order of elements is the order of this value.
    pub const fn value(self) -> u16 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Coefficient of yⁱ.
    pub fn coeff(self, i: usize) -> Gf16 {
        Gf16(((self.0 >> (4 * i)) & 0xf) as u8)
    }

    pub fn in_base_field(self) -> bool {
        self.0 < 16
    }

    /// The E-element this is, if it lies in the subfield.
    pub fn as_base(self) -> Option<Gf16> {
        self.in_base_field().then_some(Gf16(self.0 as u8))
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Elem({:#x})", self.0)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

/// GF(16^m) presented as E[y]/(μ).
#[derive(Clone)]
pub struct FieldTower {
    m: usize,
    /// μ, low degree first, monic (`modulus[m] == 1`).
    modulus: Vec<Gf16>,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldTower")
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for FieldTower {}

fn check_degree(m: usize) -> Result<()> {
    if (1..=3).contains(&m) {
        Ok(())
    } else {
        Err(BpdError::InvalidParameter(format!(
            "extension degree must be 1, 2 or 3 (got {m})"
        )))
    }
}

/// For degree ≤ 3, a monic polynomial over E is irreducible iff it has no root in E.
fn has_root_in_base(modulus: &[Gf16]) -> bool {
    Gf16::all().any(|z| {
        modulus
            .iter()
            .rev()
            .fold(Gf16::ZERO, |acc, &c| acc * z + c)
            .is_zero()
    })
}

impl FieldTower {
    /// Tower whose μ is the lexicographically least monic irreducible of degree `m`
    /// (coefficients compared high degree first).
    pub fn build(m: usize) -> Result<Self> {
        check_degree(m)?;
        if m == 1 {
            return Self::with_modulus(&[Gf16::ZERO, Gf16::ONE]);
        }
        // Enumerate the m lower coefficients in lexicographic order, c_{m-1} most significant.
        for code in 0u32..16u32.pow(m as u32) {
            let mut modulus: Vec<Gf16> = (0..m)
                .map(|i| Gf16(((code >> (4 * i)) & 0xf) as u8))
                .collect();
            modulus.push(Gf16::ONE);
            if !has_root_in_base(&modulus) {
                return Self::with_modulus(&modulus);
            }
        }
        unreachable!("irreducible polynomials of every degree exist over GF(16)")
    }

    /// Tower for an explicit μ given low degree first, including the leading 1.
    pub fn with_modulus(modulus: &[Gf16]) -> Result<Self> {
        let m = modulus.len().saturating_sub(1);
        check_degree(m)?;
        if modulus[m] != Gf16::ONE {
            return Err(BpdError::InvalidParameter("modulus must be monic".into()));
        }
        if m > 1 && has_root_in_base(modulus) {
            return Err(BpdError::InvalidParameter(
                "modulus is reducible over GF(16)".into(),
            ));
        }
        let mut tower = FieldTower {
            m,
            modulus: modulus.to_vec(),
            exp: Vec::new(),
            log: Vec::new(),
        };
        tower.build_tables();
        Ok(tower)
    }

    fn build_tables(&mut self) {
        let q = self.size();
        let order = (q - 1) as u64;
        let primes: Vec<u64> = (2..=order)
            .filter(|p| order.is_multiple_of(*p) && is_prime(*p))
            .collect();
        let generator = (2..q as u16)
            .map(Elem)
            .find(|&g| {
                primes
                    .iter()
                    .all(|p| self.pow_schoolbook(g, order / p) != Elem::ONE)
            })
            .unwrap_or(Elem::ONE);
        let mut exp = vec![0u16; 2 * (q - 1)];
        let mut log = vec![0u16; q];
        let mut x = Elem::ONE;
        for i in 0..q - 1 {
            exp[i] = x.0;
            exp[i + q - 1] = x.0;
            log[x.0 as usize] = i as u16;
            x = self.mul_schoolbook(x, generator);
        }
        self.exp = exp;
        self.log = log;
    }

    /// Extension degree m = [F_q : E].
    pub fn degree(&self) -> usize {
        self.m
    }

    /// μ, low degree first, including the leading 1.
    pub fn modulus(&self) -> &[Gf16] {
        &self.modulus
    }

    /// q = 16^m.
    pub fn size(&self) -> usize {
        1 << (4 * self.m)
    }

    pub fn elem(&self, value: u16) -> Result<Elem> {
        if (value as usize) < self.size() {
            Ok(Elem(value))
        } else {
            Err(BpdError::InvalidParameter(format!(
                "{value:#x} is not an element of GF(16^{})",
                self.m
            )))
        }
    }

    /// Every element in canonical value order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.size() as u32).map(|v| Elem(v as u16))
    }

    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        Elem(x.0 ^ y.0)
    }

    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        if x.0 == 0 || y.0 == 0 {
            return Elem::ZERO;
        }
        let idx = self.log[x.0 as usize] as usize + self.log[y.0 as usize] as usize;
        Elem(self.exp[idx])
    }

    pub fn mul_base(&self, c: Gf16, x: Elem) -> Elem {
        let mut out = 0u16;
        for i in 0..self.m {
            out |= ((x.coeff(i) * c).0 as u16) << (4 * i);
        }
        Elem(out)
    }

    pub fn inv(&self, x: Elem) -> Result<Elem> {
        if x.0 == 0 {
            return Err(BpdError::DivisionByZero);
        }
        let q1 = self.size() - 1;
        let l = self.log[x.0 as usize] as usize;
        Ok(Elem(self.exp[(q1 - l) % q1]))
    }

    pub fn div(&self, x: Elem, y: Elem) -> Result<Elem> {
        Ok(self.mul(x, self.inv(y)?))
    }

    pub fn pow(&self, x: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if x.0 == 0 {
            return Elem::ZERO;
        }
        let q1 = (self.size() - 1) as u64;
        let l = self.log[x.0 as usize] as u64;
        Elem(self.exp[((l * (e % q1)) % q1) as usize])
    }

    /// Product by schoolbook multiplication over E followed by reduction modulo μ.
    pub fn mul_schoolbook(&self, x: Elem, y: Elem) -> Elem {
        let m = self.m;
        let mut prod = [Gf16::ZERO; 5];
        for i in 0..m {
            for j in 0..m {
                prod[i + j] += x.coeff(i) * y.coeff(j);
            }
        }
        for d in (m..2 * m - 1).rev() {
            let lead = prod[d];
            if lead.is_zero() {
                continue;
            }
            // y^m ≡ -(μ_0 + … + μ_{m-1} y^{m-1}); char 2 drops the sign.
            prod[d] = Gf16::ZERO;
            for i in 0..m {
                prod[d - m + i] += lead * self.modulus[i];
            }
        }
        let mut out = 0u16;
        for (i, c) in prod.iter().take(m).enumerate() {
            out |= (c.0 as u16) << (4 * i);
        }
        Elem(out)
    }

    fn pow_schoolbook(&self, x: Elem, mut e: u64) -> Elem {
        let mut base = x;
        let mut acc = Elem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_schoolbook(acc, base);
            }
            base = self.mul_schoolbook(base, base);
            e >>= 1;
        }
        acc
    }

    /// Degree of the minimal polynomial of `x` over E: the least d | m with x^(16^d) = x.
    pub fn min_poly_degree(&self, x: Elem) -> usize {
        (1..=self.m)
            .filter(|d| self.m.is_multiple_of(*d))
            .find(|&d| self.pow(x, 16u64.pow(d as u32)) == x)
            .unwrap_or(self.m)
    }

    /// Bytes per serialized element: ceil(4m / 8).
    pub fn byte_len(&self) -> usize {
        (4 * self.m).div_ceil(8)
    }

    pub fn to_bytes(&self, x: Elem) -> Vec<u8> {
        x.0.to_le_bytes()[..self.byte_len()].to_vec()
    }

    pub fn from_bytes(&self, bytes: &[u8]) -> Result<Elem> {
        if bytes.len() != self.byte_len() {
            return Err(BpdError::Format(format!(
                "element needs {} bytes, got {}",
                self.byte_len(),
                bytes.len()
            )));
        }
        let mut buf = [0u8; 2];
        buf[..bytes.len()].copy_from_slice(bytes);
        let value = u16::from_le_bytes(buf);
        self.elem(value).map_err(|_| {
            BpdError::Format(format!("{value:#x} is out of range for GF(16^{})", self.m))
        })
    }

    pub fn to_hex(&self, x: Elem) -> String {
        self.to_bytes(x)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn from_hex(&self, s: &str) -> Result<Elem> {
        if s.len() != 2 * self.byte_len() || !s.is_ascii() {
            return Err(BpdError::Format(format!("bad element hex {s:?}")));
        }
        let bytes = (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16))
            .collect::<std::result::Result<Vec<u8>, _>>()
            .map_err(|_| BpdError::Format(format!("bad element hex {s:?}")))?;
        self.from_bytes(&bytes)
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2
        && (2..p)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

/// A polynomial in λ with coefficients in E, low degree first, no trailing zeros.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct EPoly(Vec<Gf16>);

impl EPoly {
    pub fn zero() -> Self {
        EPoly(Vec::new())
    }

    pub fn constant(c: Gf16) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// c·λ^d.
    pub fn monomial(c: Gf16, d: usize) -> Self {
        let mut v = vec![Gf16::ZERO; d + 1];
        v[d] = c;
        Self::from_coeffs(v)
    }

    /// The indeterminate λ.
    pub fn lambda() -> Self {
        Self::monomial(Gf16::ONE, 1)
    }

    pub fn from_coeffs(mut coeffs: Vec<Gf16>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        EPoly(coeffs)
    }

    pub fn coeffs(&self) -> &[Gf16] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn constant_term(&self) -> Gf16 {
        self.0.first().copied().unwrap_or(Gf16::ZERO)
    }

    /// Horner evaluation with coefficients embedded into F_q.
    pub fn eval(&self, tower: &FieldTower, lambda: Elem) -> Elem {
        self.0.iter().rev().fold(Elem::ZERO, |acc, &c| {
            tower.add(tower.mul(acc, lambda), Elem::embed(c))
        })
    }
}

impl fmt::Debug for EPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(d, c)| match d {
                0 => format!("{c}"),
                1 => format!("{c}λ"),
                _ => format!("{c}λ^{d}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Add for &EPoly {
    type Output = EPoly;
    fn add(self, rhs: &EPoly) -> EPoly {
        let len = self.0.len().max(rhs.0.len());
        let coeffs = (0..len)
            .map(|i| {
                self.0.get(i).copied().unwrap_or_default()
                    + rhs.0.get(i).copied().unwrap_or_default()
            })
            .collect();
        EPoly::from_coeffs(coeffs)
    }
}

impl Mul for &EPoly {
    type Output = EPoly;
    fn mul(self, rhs: &EPoly) -> EPoly {
        if self.is_zero() || rhs.is_zero() {
            return EPoly::zero();
        }
        let mut coeffs = vec![Gf16::ZERO; self.0.len() + rhs.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in rhs.0.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        EPoly::from_coeffs(coeffs)
    }
}
