//! Slow, exact reference implementations for tests.
//!
//! Nothing here shares code with `lia-core`. Inputs are converted from `f64`
//! exactly, all arithmetic is done on big rationals or 80-digit fixed point,
//! and only the final answer is rounded back to `f64`.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const DIGITS: u32 = 80;

fn scale() -> BigInt {
    BigInt::from(10u32).pow(DIGITS)
}

/// A real number stored as `value / 10^80`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixed(BigInt);

impl Fixed {
    pub fn from_rational(r: &BigRational) -> Self {
        Fixed(r.numer() * scale() / r.denom())
    }

    pub fn from_f64(x: f64) -> Self {
        Self::from_rational(&exact(x))
    }

    pub fn from_int(n: i64) -> Self {
        Fixed(BigInt::from(n) * scale())
    }

    pub fn add(&self, o: &Fixed) -> Fixed {
        Fixed(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Fixed) -> Fixed {
        Fixed(&self.0 - &o.0)
    }

    pub fn mul(&self, o: &Fixed) -> Fixed {
        Fixed(&self.0 * &o.0 / scale())
    }

    pub fn div(&self, o: &Fixed) -> Fixed {
        Fixed(&self.0 * scale() / &o.0)
    }

    pub fn to_f64(&self) -> f64 {
        BigRational::new(self.0.clone(), scale()).to_f64().unwrap()
    }

    /// Natural logarithm of a positive value.
    pub fn ln(&self) -> Fixed {
        assert!(self.0.sign() == Sign::Plus, "ln of non-positive value");
        let one = Fixed::from_int(1);
        let two = Fixed::from_int(2);
        // Reduce into [1, 2) by powers of two.
        let mut m = self.clone();
        let mut exponent = 0i64;
        while m >= two {
            m = m.div(&two);
            exponent += 1;
        }
        while m < one {
            m = m.mul(&two);
            exponent -= 1;
        }
        let ln2 = atanh_series(&one.div(&Fixed::from_int(3))).mul(&two);
        let z = m.sub(&one).div(&m.add(&one));
        let ln_m = atanh_series(&z).mul(&two);
        ln_m.add(&ln2.mul(&Fixed::from_int(exponent)))
    }

    /// Square root of a non-negative value (Newton on the scaled integer).
    pub fn sqrt(&self) -> Fixed {
        assert!(!self.0.is_negative());
        Fixed((&self.0 * scale()).sqrt())
    }
}

fn atanh_series(z: &Fixed) -> Fixed {
    let z2 = z.mul(z);
    let mut power = z.clone();
    let mut total = Fixed(BigInt::zero());
    let mut k = 1i64;
    while !power.0.is_zero() {
        total = total.add(&Fixed(&power.0 / BigInt::from(k)));
        power = power.mul(&z2);
        k += 2;
    }
    total
}

/// The exact rational value of a finite `f64`.
pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

/// `α·ln p_action + (1−α)/|S| · Σ ln p_attr`, term by term, no clamping.
pub fn fused_score(alpha: f64, action_prob: f64, attribute_probs: &[f64]) -> f64 {
    let alpha_r = exact(alpha);
    let one = BigRational::one();
    let action = Fixed::from_f64(action_prob).ln().mul(&Fixed::from_rational(&alpha_r));
    let mut attr_sum = Fixed(BigInt::zero());
    for &p in attribute_probs {
        attr_sum = attr_sum.add(&Fixed::from_f64(p).ln());
    }
    let weight = (one - alpha_r) / BigRational::from_integer(BigInt::from(attribute_probs.len()));
    action.add(&attr_sum.mul(&Fixed::from_rational(&weight))).to_f64()
}

/// Paired t statistic with sample standard deviation, computed as
/// `sign(Σd) · sqrt(S²(n−1) / (nQ − S²))` over exact rationals.
/// Returns `None` when all differences are equal.
pub fn paired_t(pre: &[f64], post: &[f64]) -> Option<f64> {
    assert_eq!(pre.len(), post.len());
    let n = BigRational::from_integer(BigInt::from(pre.len()));
    let mut s = BigRational::zero();
    let mut q = BigRational::zero();
    for (a, b) in pre.iter().zip(post) {
        let d = exact(*b) - exact(*a);
        q += &d * &d;
        s += d;
    }
    let denom = &n * &q - &s * &s;
    if denom.is_zero() {
        return None;
    }
    let t2 = &s * &s * (&n - BigRational::one()) / denom;
    let t = Fixed::from_rational(&t2).sqrt().to_f64();
    Some(if s.is_negative() { -t } else { t })
}

/// Mean and sample (n−1) standard deviation, exact until the final sqrt.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = BigRational::from_integer(BigInt::from(values.len()));
    let sum: BigRational = values.iter().map(|&v| exact(v)).fold(BigRational::zero(), |a, b| a + b);
    let mean = &sum / &n;
    let ss: BigRational = values
        .iter()
        .map(|&v| {
            let d = exact(v) - &mean;
            &d * &d
        })
        .fold(BigRational::zero(), |a, b| a + b);
    let var = if values.len() > 1 { ss / (n - BigRational::one()) } else { BigRational::zero() };
    (mean.to_f64().unwrap(), Fixed::from_rational(&var).sqrt().to_f64())
}
