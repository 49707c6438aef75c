//! The coefficient ring `ℤ[L, L⁻¹][(L^k − 1)⁻¹]`.
//!
//! Denominators are stored as products of cyclotomic polynomials `Φ_d(L)`, the
//! irreducible factors of `L^k − 1`; a fraction is reduced when no `Φ_d` in the
//! denominator divides the numerator, which makes the representation unique.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::graded::Q;

/// `Σ c[i] L^(low + i)` with `c[0] ≠ 0 ≠ c[last]`, or zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LPoly {
    low: i64,
    c: Vec<BigInt>,
}

impl LPoly {
    pub fn zero() -> Self {
        LPoly::default()
    }

    pub fn constant(n: BigInt) -> Self {
        LPoly { low: 0, c: vec![n] }.normalized()
    }

    pub fn monomial(n: BigInt, power: i64) -> Self {
        LPoly { low: power, c: vec![n] }.normalized()
    }

    /// From ascending coefficients of an ordinary polynomial.
    pub fn from_coeffs(c: Vec<BigInt>) -> Self {
        LPoly { low: 0, c }.normalized()
    }

    fn normalized(mut self) -> Self {
        while self.c.last().is_some_and(Zero::is_zero) {
            self.c.pop();
        }
        let lead = self.c.iter().take_while(|v| v.is_zero()).count();
        if lead == self.c.len() {
            return LPoly::zero();
        }
        self.c.drain(..lead);
        self.low += lead as i64;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.low == 0 && self.c.len() == 1 && self.c[0].is_one()
    }

    /// `±L^n` or a single-term `c·L^n`.
    pub fn as_monomial(&self) -> Option<(&BigInt, i64)> {
        (self.c.len() == 1).then(|| (&self.c[0], self.low))
    }

    pub fn add(&self, o: &LPoly) -> LPoly {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let low = self.low.min(o.low);
        let high = (self.low + self.c.len() as i64).max(o.low + o.c.len() as i64);
        let mut c = vec![BigInt::zero(); (high - low) as usize];
        for (i, v) in self.c.iter().enumerate() {
            c[(self.low - low) as usize + i] += v;
        }
        for (i, v) in o.c.iter().enumerate() {
            c[(o.low - low) as usize + i] += v;
        }
        LPoly { low, c }.normalized()
    }

    pub fn neg(&self) -> LPoly {
        LPoly { low: self.low, c: self.c.iter().map(|v| -v).collect() }
    }

    pub fn mul(&self, o: &LPoly) -> LPoly {
        if self.is_zero() || o.is_zero() {
            return LPoly::zero();
        }
        let mut c = vec![BigInt::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        LPoly { low: self.low + o.low, c }.normalized()
    }

    pub fn pow(&self, e: u32) -> LPoly {
        let mut out = LPoly::constant(BigInt::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Exact quotient by a monic polynomial with unit constant term.
    fn div_exact(&self, p: &[BigInt]) -> Option<LPoly> {
        if self.is_zero() {
            return Some(LPoly::zero());
        }
        let dp = p.len() - 1;
        if self.c.len() - 1 < dp {
            return None;
        }
        let mut rem = self.c.clone();
        let mut quot = vec![BigInt::zero(); rem.len() - dp];
        for i in (0..quot.len()).rev() {
            let q = rem[i + dp].clone();
            if q.is_zero() {
                continue;
            }
            for (j, pj) in p.iter().enumerate() {
                rem[i + j] -= &q * pj;
            }
            quot[i] = q;
        }
        rem.iter().all(Zero::is_zero).then(|| LPoly { low: self.low, c: quot }.normalized())
    }

    /// Number of nonzero terms' spread, i.e. ordinary degree after removing `L^low`.
    fn spread(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for v in self.c.iter().rev() {
            acc = acc * x + Q::from_integer(v.clone());
        }
        if self.low >= 0 {
            acc * num_traits::pow(x.clone(), self.low as usize)
        } else {
            acc / num_traits::pow(x.clone(), (-self.low) as usize)
        }
    }
}

impl fmt::Display for LPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, v) in self.c.iter().enumerate().rev() {
            if v.is_zero() {
                continue;
            }
            let e = self.low + i as i64;
            let neg = v.is_negative();
            let a = v.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let power = match e {
                0 => String::new(),
                1 => "L".to_string(),
                _ => format!("L^{e}"),
            };
            match (a.is_one(), power.is_empty()) {
                (_, true) => write!(f, "{a}")?,
                (true, false) => write!(f, "{power}")?,
                (false, false) => write!(f, "{a}*{power}")?,
            }
        }
        Ok(())
    }
}

/// Ascending coefficients of the `n`-th cyclotomic polynomial.
pub fn cyclotomic(n: u32) -> Vec<BigInt> {
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    let mut p = LPoly::from_coeffs(num);
    for d in 1..n {
        if n % d == 0 {
            p = p.div_exact(&cyclotomic(d)).expect("cyclotomic divisor");
        }
    }
    p.c
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coeff {
    num: LPoly,
    /// `d ↦ e` for the factor `Φ_d(L)^e`.
    den: BTreeMap<u32, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoeffError {
    #[error("{0} is not invertible in ℤ[L^±1, (L^k−1)^-1]")]
    NotInvertible(String),
    #[error("pole at L = 1 in {0}")]
    Pole(String),
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::default()
    }

    pub fn one() -> Self {
        Coeff::int(1)
    }

    pub fn int(n: i64) -> Self {
        Coeff { num: LPoly::constant(BigInt::from(n)), den: BTreeMap::new() }
    }

    pub fn big(n: BigInt) -> Self {
        Coeff { num: LPoly::constant(n), den: BTreeMap::new() }
    }

    /// `L^n` for any integer `n`.
    pub fn l_pow(n: i64) -> Self {
        Coeff { num: LPoly::monomial(BigInt::one(), n), den: BTreeMap::new() }
    }

    pub fn from_poly(num: LPoly) -> Self {
        Coeff { num, den: BTreeMap::new() }
    }

    /// `L^k − 1`.
    pub fn l_pow_minus_one(k: u32) -> Self {
        Coeff::l_pow(i64::from(k)).sub(&Coeff::one())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_empty()
    }

    pub fn numerator(&self) -> &LPoly {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<u32, u32> {
        &self.den
    }

    fn reduced(mut self) -> Self {
        if self.num.is_zero() {
            return Coeff::zero();
        }
        let ds: Vec<u32> = self.den.keys().copied().collect();
        for d in ds {
            let phi = cyclotomic(d);
            while self.den[&d] > 0 {
                match self.num.div_exact(&phi) {
                    Some(q) => {
                        self.num = q;
                        *self.den.get_mut(&d).expect("present") -= 1;
                    }
                    None => break,
                }
            }
            if self.den[&d] == 0 {
                self.den.remove(&d);
            }
        }
        self
    }

    fn expand_den(den: &BTreeMap<u32, u32>) -> LPoly {
        let mut out = LPoly::constant(BigInt::one());
        for (&d, &e) in den {
            out = out.mul(&LPoly::from_coeffs(cyclotomic(d)).pow(e));
        }
        out
    }

    pub fn add(&self, o: &Coeff) -> Coeff {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let mut den = self.den.clone();
        for (&d, &e) in &o.den {
            let v = den.entry(d).or_insert(0);
            *v = (*v).max(e);
        }
        let fill = |mine: &BTreeMap<u32, u32>| {
            let missing: BTreeMap<u32, u32> = den
                .iter()
                .map(|(&d, &e)| (d, e - mine.get(&d).copied().unwrap_or(0)))
                .filter(|&(_, e)| e > 0)
                .collect();
            Coeff::expand_den(&missing)
        };
        let num = self.num.mul(&fill(&self.den)).add(&o.num.mul(&fill(&o.den)));
        Coeff { num, den }.reduced()
    }

    pub fn neg(&self) -> Coeff {
        Coeff { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Coeff) -> Coeff {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Coeff) -> Coeff {
        if self.is_zero() || o.is_zero() {
            return Coeff::zero();
        }
        let mut den = self.den.clone();
        for (&d, &e) in &o.den {
            *den.entry(d).or_insert(0) += e;
        }
        Coeff { num: self.num.mul(&o.num), den }.reduced()
    }

    pub fn pow(&self, e: u32) -> Coeff {
        let mut out = Coeff::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Inverse, when the numerator is `±L^a` times cyclotomic factors.
    pub fn inverse(&self) -> Result<Coeff, CoeffError> {
        if self.is_zero() {
            return Err(CoeffError::NotInvertible(self.to_string()));
        }
        let mut rest = self.num.clone();
        let mut factors: BTreeMap<u32, u32> = BTreeMap::new();
        let bound = 2 * rest.spread() * rest.spread() + 2;
        let mut d = 1u32;
        while rest.spread() > 0 && (d as usize) <= bound {
            let phi = cyclotomic(d);
            while let Some(q) = rest.div_exact(&phi) {
                rest = q;
                *factors.entry(d).or_insert(0) += 1;
            }
            d += 1;
        }
        let Some((unit, power)) = rest.as_monomial() else {
            return Err(CoeffError::NotInvertible(self.to_string()));
        };
        if !unit.abs().is_one() {
            return Err(CoeffError::NotInvertible(self.to_string()));
        }
        let num = LPoly::monomial(unit.clone(), -power).mul(&Coeff::expand_den(&self.den));
        Ok(Coeff { num, den: factors }.reduced())
    }

    /// Value at `L = 1`.
    pub fn at_one(&self) -> Result<Q, CoeffError> {
        if self.den.contains_key(&1) {
            return Err(CoeffError::Pole(self.to_string()));
        }
        let one = Q::one();
        Ok(self.num.eval(&one) / Coeff::expand_den(&self.den).eval(&one))
    }

    /// Sign-free display used inside products.
    pub fn is_negative_leading(&self) -> bool {
        self.num.c.last().is_some_and(Signed::is_negative)
    }

    pub fn gcd_content(&self) -> BigInt {
        self.num.c.iter().fold(BigInt::zero(), |g, v| g.gcd(v))
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        let single = self.num.as_monomial().is_some();
        if single {
            write!(f, "{}", self.num)?;
        } else {
            write!(f, "({})", self.num)?;
        }
        write!(f, "/")?;
        let parts: Vec<String> = self
            .den
            .iter()
            .map(|(&d, &e)| {
                let p = LPoly::from_coeffs(cyclotomic(d));
                if e == 1 {
                    format!("({p})")
                } else {
                    format!("({p})^{e}")
                }
            })
            .collect();
        if parts.len() == 1 {
            write!(f, "{}", parts[0])
        } else {
            write!(f, "({})", parts.join("*"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomics() {
        let show = |n| LPoly::from_coeffs(cyclotomic(n)).to_string();
        assert_eq!(show(1), "L - 1");
        assert_eq!(show(2), "L + 1");
        assert_eq!(show(6), "L^2 - L + 1");
    }

    #[test]
    fn inverse_of_gl2() {
        let l = Coeff::l_pow(1);
        let gl2 = l.mul(&Coeff::l_pow_minus_one(1)).mul(&Coeff::l_pow_minus_one(2));
        let inv = gl2.inverse().unwrap();
        assert!(gl2.mul(&inv).is_one());
        assert!(Coeff::int(2).inverse().is_err());
        assert!(Coeff::l_pow(1).add(&Coeff::int(1)).inverse().is_ok());
    }

    #[test]
    fn reduction_is_canonical() {
        let a = Coeff::l_pow_minus_one(2).mul(&Coeff::l_pow_minus_one(1).inverse().unwrap());
        assert_eq!(a, Coeff::l_pow(1).add(&Coeff::one()));
        assert_eq!(Coeff::l_pow_minus_one(1).inverse().unwrap().to_string(), "1/(L - 1)");
    }
}
