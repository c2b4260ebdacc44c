//! Minimal double-double arithmetic (~31 significant digits).
//!
//! Used only where plain f64 is genuinely insufficient: the super-exponential
//! growth condition is a quadratic whose terms cancel to ~1e-12 of their own
//! magnitude at realistic parameters, so it is evaluated in this extended
//! precision. Not a general-purpose facility.

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// ln 2 to double-double precision (hi is exactly f64 LN_2; lo carries
    /// the next 53 bits).
    #[allow(clippy::approx_constant)]
    pub const LN_2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };

    #[inline]
    pub fn from(a: f64) -> Dd {
        Dd { hi: a, lo: 0.0 }
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from(q1)));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul(Dd::from(q2)));
        let q3 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from(q3))
    }

    #[inline]
    pub fn scale_pow2(self, k: i32) -> Dd {
        let f = (k as f64).exp2();
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    /// exp(x) for |x| <= ~0.75 by Taylor series.
    fn exp_small(self) -> Dd {
        debug_assert!(self.hi.abs() <= 0.76);
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..40 {
            term = term.mul(self).div(Dd::from(n as f64));
            sum = sum.add(term);
            if term.hi.abs() < 1e-35 * sum.hi.abs() {
                break;
            }
        }
        sum
    }

    /// exp(x) via argument reduction x = k ln2 + r, |r| <= ln2/2.
    pub fn exp(self) -> Dd {
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self.sub(Dd::LN_2.mul(Dd::from(k)));
        r.exp_small().scale_pow2(k as i32)
    }

    /// ln(x) for x > 0: f64 seed plus one Newton correction in dd.
    pub fn ln(self) -> Dd {
        debug_assert!(self.hi > 0.0);
        let y0 = self.hi.ln();
        // r = x * exp(-y0) - 1 is ~1 ulp; ln x = y0 + ln(1+r) ~ y0 + r - r^2/2
        let e = Dd::from(-y0).exp();
        let r = self.mul(e).sub(Dd::ONE);
        let corr = r.sub(r.mul(r).scale_pow2(-1));
        Dd::from(y0).add(corr)
    }

    /// expm1(x) = e^x - 1, accurate near zero.
    pub fn exp_m1(self) -> Dd {
        if self.hi.abs() <= 0.7 {
            let mut term = Dd::ONE;
            let mut sum = Dd::ZERO;
            for n in 1..40 {
                term = term.mul(self).div(Dd::from(n as f64));
                sum = sum.add(term);
                if term.hi.abs() < 1e-35 * sum.hi.abs().max(1e-300) {
                    break;
                }
            }
            sum
        } else {
            self.exp().sub(Dd::ONE)
        }
    }
}

/// ln 1F1(q, q+1, x) for x >= 0 in double-double, positive-term series with
/// power-of-two rescaling. Only the (q, q+1) shape is needed at this precision.
pub(crate) fn dd_log_kummer_qq1(q: f64, x: f64) -> Dd {
    debug_assert!(q > 0.0 && x >= 0.0);
    let qd = Dd::from(q);
    let xd = Dd::from(x);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut exp2: i64 = 0;
    for n in 0..2_000_000u64 {
        let nf = Dd::from(n as f64);
        // term *= (q+n) x / ((q+1+n)(n+1))
        let num = qd.add(nf).mul(xd);
        let den = qd.add(Dd::ONE).add(nf).mul(nf.add(Dd::ONE));
        term = term.mul(num).div(den);
        sum = sum.add(term);
        if term.hi < sum.hi * 1e-35 {
            break;
        }
        if sum.hi > 1e290 {
            sum = sum.scale_pow2(-1000);
            term = term.scale_pow2(-1000);
            exp2 += 1000;
        }
    }
    sum.ln().add(Dd::LN_2.mul(Dd::from(exp2 as f64)))
}
