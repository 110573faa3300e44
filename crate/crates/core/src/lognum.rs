//! Signed numbers stored as (sign, ln|x|).
//!
//! The φ formulas are rational in exponentials of edge lengths and overflow
//! long before the angles they describe stop being meaningful.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug)]
pub(crate) struct LogNum {
    sign: f64,
    ln: f64,
}

impl LogNum {
    pub const ZERO: LogNum = LogNum { sign: 0.0, ln: f64::NEG_INFINITY };
    pub const ONE: LogNum = LogNum { sign: 1.0, ln: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogNum { sign: x.signum(), ln: x.abs().ln() }
        }
    }

    /// e^x
    pub fn exp(x: f64) -> Self {
        LogNum { sign: 1.0, ln: x }
    }

    pub fn cosh(x: f64) -> Self {
        let a = x.abs();
        LogNum { sign: 1.0, ln: a - std::f64::consts::LN_2 + (-2.0 * a).exp().ln_1p() }
    }

    pub fn sinh(x: f64) -> Self {
        if x == 0.0 {
            return Self::ZERO;
        }
        let a = x.abs();
        LogNum { sign: x.signum(), ln: a - std::f64::consts::LN_2 + (-(-2.0 * a).exp_m1()).ln() }
    }

    pub fn sqrt(self) -> Self {
        debug_assert!(self.sign >= 0.0);
        if self.sign == 0.0 {
            return Self::ZERO;
        }
        LogNum { sign: 1.0, ln: 0.5 * self.ln }
    }

    pub fn sq(self) -> Self {
        self * self
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln.exp()
        }
    }
}

impl Mul for LogNum {
    type Output = LogNum;
    fn mul(self, o: LogNum) -> LogNum {
        if self.sign == 0.0 || o.sign == 0.0 {
            return LogNum::ZERO;
        }
        LogNum { sign: self.sign * o.sign, ln: self.ln + o.ln }
    }
}

impl Div for LogNum {
    type Output = LogNum;
    fn div(self, o: LogNum) -> LogNum {
        if self.sign == 0.0 {
            return LogNum::ZERO;
        }
        if o.sign == 0.0 {
            return LogNum { sign: self.sign, ln: f64::INFINITY };
        }
        LogNum { sign: self.sign * o.sign, ln: self.ln - o.ln }
    }
}

impl Neg for LogNum {
    type Output = LogNum;
    fn neg(self) -> LogNum {
        LogNum { sign: -self.sign, ln: self.ln }
    }
}

impl Add for LogNum {
    type Output = LogNum;
    fn add(self, o: LogNum) -> LogNum {
        if self.sign == 0.0 {
            return o;
        }
        if o.sign == 0.0 {
            return self;
        }
        let (big, small) = if self.ln >= o.ln { (self, o) } else { (o, self) };
        let d = small.ln - big.ln;
        if big.sign == small.sign {
            LogNum { sign: big.sign, ln: big.ln + d.exp().ln_1p() }
        } else if d == 0.0 {
            LogNum::ZERO
        } else {
            LogNum { sign: big.sign, ln: big.ln + (-d.exp_m1()).ln() }
        }
    }
}

impl Sub for LogNum {
    type Output = LogNum;
    fn sub(self, o: LogNum) -> LogNum {
        self + (-o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_roundtrip() {
        let a = LogNum::from_f64(3.5);
        let b = LogNum::from_f64(-1.25);
        assert!(((a + b).to_f64() - 2.25).abs() < 1e-15);
        assert!(((a - b).to_f64() - 4.75).abs() < 1e-14);
        assert!(((b - a).to_f64() + 4.75).abs() < 1e-14);
        assert!(((a * b).to_f64() + 4.375).abs() < 1e-14);
        assert!(((a / b).to_f64() + 2.8).abs() < 1e-14);
        assert_eq!((a - a).to_f64(), 0.0);
        assert!((LogNum::cosh(0.7).to_f64() - 0.7f64.cosh()).abs() < 1e-15);
        assert!((LogNum::sinh(-0.7).to_f64() - (-0.7f64).sinh()).abs() < 1e-15);
    }

    #[test]
    fn huge_ratios_stay_finite() {
        // cosh(800)/e^800 = 1/2
        let r = LogNum::cosh(800.0) / LogNum::exp(800.0);
        // ln-magnitude rounding scales with |ln|, here ~800·ε
        assert!((r.to_f64() - 0.5).abs() < 1e-12);
    }
}
