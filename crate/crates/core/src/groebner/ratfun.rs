//! Univariate polynomials over ℚ and rational functions in `γ`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Polynomial in `γ` with rational coefficients, ascending, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly(Vec<BigRational>);

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// The polynomial `γ`.
    pub fn gamma() -> Self {
        Self::from_ints(&[0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_one()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&BigRational> {
        self.0.last()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.0.iter().map(|x| x * c).collect())
    }

    pub fn monic(&self) -> Self {
        match self.lead() {
            Some(l) => self.scale(&l.recip()),
            None => self.clone(),
        }
    }

    pub fn eval(&self, g: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * g + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_exact(&self, g: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * g + c)
    }

    /// Euclidean division.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.0.len() - 1;
        let lead = d.lead().expect("nonzero").clone();
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return (QPoly::default(), self.clone());
        }
        let mut q = vec![BigRational::zero(); rem.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (i, dc) in d.0.iter().enumerate() {
                    rem[k + i] -= &c * dc;
                }
            }
            q[k] = c;
        }
        rem.truncate(dd);
        (QPoly::new(q), QPoly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Integer coefficients after scaling by `k`.
    fn scaled_ints(&self, k: &BigInt) -> Vec<BigInt> {
        self.0.iter().map(|c| (c * BigRational::from_integer(k.clone())).to_integer()).collect()
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let n = self.0.len().max(rhs.0.len());
        QPoly::new(
            (0..n)
                .map(|i| {
                    let a = self.0.get(i).cloned().unwrap_or_else(BigRational::zero);
                    let b = rhs.0.get(i).cloned().unwrap_or_else(BigRational::zero);
                    a + b
                })
                .collect(),
        )
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly(self.0.iter().map(|c| -c).collect())
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        self + &(-rhs)
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::default();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }
}

fn fmt_int_poly(c: &[BigInt], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut first = true;
    for (k, a) in c.iter().enumerate().rev() {
        if a.is_zero() {
            continue;
        }
        let neg = a.is_negative();
        let mag = a.abs();
        if first {
            if neg {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if neg { " - " } else { " + " })?;
        }
        first = false;
        match k {
            0 => write!(f, "{mag}")?,
            _ => {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                if k == 1 {
                    f.write_str("γ")?;
                } else {
                    write!(f, "γ^{k}")?;
                }
            }
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.denominator_lcm();
        let ints = self.scaled_ints(&k);
        if !k.is_one() {
            f.write_str("(")?;
        }
        fmt_int_poly(&ints, f)?;
        if !k.is_one() {
            write!(f, ")/{k}")?;
        }
        Ok(())
    }
}

/// `num(γ)/den(γ)` with `den` monic and `gcd(num, den) = 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalCoefficient {
    num: QPoly,
    den: QPoly,
}

impl RationalCoefficient {
    pub fn new(num: QPoly, den: QPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let lead = den.lead().expect("nonzero").recip();
        Self { num: num.scale(&lead), den: den.scale(&lead) }
    }

    pub fn from_poly(p: QPoly) -> Self {
        Self { num: p, den: QPoly::one() }
    }

    pub fn from_int(c: i64) -> Self {
        Self::from_poly(QPoly::from_ints(&[c]))
    }

    pub fn zero() -> Self {
        Self { num: QPoly::default(), den: QPoly::one() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn num(&self) -> &QPoly {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    pub fn recip(&self) -> Self {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn eval(&self, g: f64) -> f64 {
        self.num.eval(g) / self.den.eval(g)
    }

    pub fn eval_exact(&self, g: &BigRational) -> Option<BigRational> {
        let d = self.den.eval_exact(g);
        (!d.is_zero()).then(|| self.num.eval_exact(g) / d)
    }

    /// Numerator and denominator with coprime integer coefficients and a
    /// positive leading denominator coefficient.
    pub fn integer_parts(&self) -> (Vec<BigInt>, Vec<BigInt>) {
        let kn = self.num.denominator_lcm();
        let kd = self.den.denominator_lcm();
        // num/den = (num·kn·kd) / (den·kd·kn)
        let k = &kn * &kd;
        let mut n = self.num.scaled_ints(&k);
        let mut d = self.den.scaled_ints(&k);
        let content = n.iter().chain(d.iter()).fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if !content.is_zero() && !content.is_one() {
            n.iter_mut().for_each(|c| *c /= &content);
            d.iter_mut().for_each(|c| *c /= &content);
        }
        if d.last().is_some_and(|c| c.is_negative()) {
            n.iter_mut().for_each(|c| *c = -c.clone());
            d.iter_mut().for_each(|c| *c = -c.clone());
        }
        (n, d)
    }
}

impl Default for RationalCoefficient {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add for &RationalCoefficient {
    type Output = RationalCoefficient;
    fn add(self, rhs: &RationalCoefficient) -> RationalCoefficient {
        if self.den == rhs.den {
            return RationalCoefficient::new(&self.num + &rhs.num, self.den.clone());
        }
        RationalCoefficient::new(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
    }
}

impl Neg for &RationalCoefficient {
    type Output = RationalCoefficient;
    fn neg(self) -> RationalCoefficient {
        RationalCoefficient { num: -&self.num, den: self.den.clone() }
    }
}

impl Sub for &RationalCoefficient {
    type Output = RationalCoefficient;
    fn sub(self, rhs: &RationalCoefficient) -> RationalCoefficient {
        self + &(-rhs)
    }
}

impl Mul for &RationalCoefficient {
    type Output = RationalCoefficient;
    fn mul(self, rhs: &RationalCoefficient) -> RationalCoefficient {
        if self.is_zero() || rhs.is_zero() {
            return RationalCoefficient::zero();
        }
        RationalCoefficient::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &RationalCoefficient {
    type Output = RationalCoefficient;
    fn div(self, rhs: &RationalCoefficient) -> RationalCoefficient {
        assert!(!rhs.is_zero(), "division by zero coefficient");
        RationalCoefficient::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

/// `(num)/(den)` with integer coefficients, or `(num)` when `den = 1`.
impl fmt::Display for RationalCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.integer_parts();
        f.write_str("(")?;
        fmt_int_poly(&n, f)?;
        f.write_str(")")?;
        if !(d.len() == 1 && d[0].is_one()) {
            f.write_str("/(")?;
            fmt_int_poly(&d, f)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for RationalCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
