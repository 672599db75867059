//! Multiprecision complex arithmetic on top of binary `dashu` floats.

use dashu_float::{round::mode::HalfEven, FBig};
use dashu_int::{
    ops::{BitTest, UnsignedAbs},
    IBig,
};
use num_complex::Complex64;

/// Binary float with round-half-even, the working scalar of [`MpComplex`].
pub type MpFloat = FBig<HalfEven, 2>;

/// Working precision for multiprecision evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PrecisionContext {
    significand_bits: usize,
}

impl PrecisionContext {
    pub const MIN_BITS: usize = 53;

    /// Returns `None` when fewer than 53 significand bits are requested.
    pub fn new(significand_bits: usize) -> Option<Self> {
        (significand_bits >= Self::MIN_BITS).then_some(Self { significand_bits })
    }

    /// Precision floor for evaluating the order-`n` Taylor-section deficit:
    /// the coefficients grow like 4^n, so 2n bits of headroom plus 64 guard bits.
    pub fn for_section_order(n: usize) -> Self {
        Self {
            significand_bits: (2 * n + 64).max(Self::MIN_BITS),
        }
    }

    pub fn significand_bits(&self) -> usize {
        self.significand_bits
    }

    pub fn float_from_f64(&self, x: f64) -> MpFloat {
        // every finite f64 converts exactly
        MpFloat::try_from(x)
            .expect("finite f64")
            .with_precision(self.significand_bits)
            .value()
    }

    pub fn float_from_int(&self, x: &IBig) -> MpFloat {
        MpFloat::from(x.clone())
            .with_precision(self.significand_bits)
            .value()
    }

    pub fn zero(&self) -> MpComplex {
        MpComplex {
            re: MpFloat::ZERO.with_precision(self.significand_bits).value(),
            im: MpFloat::ZERO.with_precision(self.significand_bits).value(),
        }
    }

    pub fn one(&self) -> MpComplex {
        self.complex(Complex64::new(1.0, 0.0))
    }

    pub fn complex(&self, z: Complex64) -> MpComplex {
        MpComplex {
            re: self.float_from_f64(z.re),
            im: self.float_from_f64(z.im),
        }
    }

    pub fn complex_from_int(&self, x: &IBig) -> MpComplex {
        MpComplex {
            re: self.float_from_int(x),
            im: MpFloat::ZERO.with_precision(self.significand_bits).value(),
        }
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self { significand_bits: 256 }
    }
}

/// Complex number with multiprecision real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct MpComplex {
    pub re: MpFloat,
    pub im: MpFloat,
}

impl MpComplex {
    pub fn add(&self, other: &MpComplex) -> MpComplex {
        MpComplex {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    pub fn sub(&self, other: &MpComplex) -> MpComplex {
        MpComplex {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    pub fn mul(&self, other: &MpComplex) -> MpComplex {
        MpComplex {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    pub fn scale(&self, s: &MpFloat) -> MpComplex {
        MpComplex {
            re: &self.re * s,
            im: &self.im * s,
        }
    }

    pub fn norm_sqr(&self) -> MpFloat {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Quotient `self / other`; `None` when `other` is zero.
    pub fn div(&self, other: &MpComplex) -> Option<MpComplex> {
        let d = other.norm_sqr();
        if d == MpFloat::ZERO {
            return None;
        }
        let re = &self.re * &other.re + &self.im * &other.im;
        let im = &self.im * &other.re - &self.re * &other.im;
        Some(MpComplex {
            re: re / &d,
            im: im / &d,
        })
    }

    pub fn powu(&self, mut n: usize, ctx: &PrecisionContext) -> MpComplex {
        let mut base = self.clone();
        let mut acc = ctx.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Rounds to the nearest `Complex64`; magnitudes beyond the f64 range become infinite.
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().value(), self.im.to_f64().value())
    }
}

/// Natural logarithm of |x| for an arbitrarily large integer; `-inf` for zero.
pub fn ln_abs_int(x: &IBig) -> f64 {
    let mag = x.unsigned_abs();
    let bits = mag.bit_len();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        let f: f64 = MpFloat::from(IBig::from(mag)).to_f64().value();
        return f.ln();
    }
    let shift = bits - 64;
    let top: IBig = IBig::from(mag >> shift);
    let f: f64 = MpFloat::from(top).to_f64().value();
    f.ln() + shift as f64 * std::f64::consts::LN_2
}
