//! Shared test support: an independent double-double (~31 digit) arithmetic
//! with series oracles for the special functions, plus small statistics
//! helpers. Deliberately separate from the library's internals so the
//! oracles exercise a different code path at a different precision.

#![allow(dead_code)]
#![allow(clippy::excessive_precision)] // dd constants carry > f64 precision

/// Unevaluated hi + lo pair.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    #[allow(clippy::approx_constant)]
    pub const LN_2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };

    pub fn new(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(Dd {
            hi: -o.hi,
            lo: -o.lo,
        })
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::new(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::new(q2)));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::new(q3))
    }

    pub fn scale_pow2(self, k: i32) -> Dd {
        let f = (k as f64).exp2();
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    fn exp_small(self) -> Dd {
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..42 {
            term = term.mul(self).div(Dd::new(n as f64));
            sum = sum.add(term);
            if term.hi.abs() < 1e-36 * sum.hi.abs() {
                break;
            }
        }
        sum
    }

    pub fn exp(self) -> Dd {
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self.sub(Dd::LN_2.mul(Dd::new(k)));
        r.exp_small().scale_pow2(k as i32)
    }

    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0);
        let y0 = self.hi.ln();
        let e = Dd::new(-y0).exp();
        let r = self.mul(e).sub(Dd::ONE);
        let corr = r.sub(r.mul(r).scale_pow2(-1));
        Dd::new(y0).add(corr)
    }
}

/// ln Gamma via the shifted Stirling series in dd: ln G(x) for x >= 12
/// directly, smaller x lifted by the recurrence G(x) = G(x+n)/(x...(x+n-1)).
pub fn dd_ln_gamma(x: f64) -> Dd {
    assert!(x > 0.0);
    let mut shift = Dd::ZERO;
    let mut xs = x;
    while xs < 24.0 {
        shift = shift.add(Dd::new(xs).ln());
        xs += 1.0;
    }
    let z = Dd::new(xs);
    // Stirling: (z - 1/2) ln z - z + ln(2 pi)/2 + sum B_2k / (2k(2k-1) z^(2k-1))
    let half_ln_2pi = Dd {
        hi: 0.9189385332046728,
        lo: -3.878294158067242e-17,
    };
    let mut res = z
        .sub(Dd { hi: 0.5, lo: 0.0 })
        .mul(z.ln())
        .sub(z)
        .add(half_ln_2pi);
    // Bernoulli coefficients B_2k/(2k(2k-1))
    let coeffs = [
        8.333333333333333e-2,
        -2.777777777777778e-3,
        7.936507936507937e-4,
        -5.952380952380952e-4,
        8.417508417508418e-4,
        -1.9175269175269176e-3,
        6.410256410256410e-3,
        -2.955065359477124e-2,
    ];
    let z2 = z.mul(z);
    let mut zpow = z;
    for (i, &c) in coeffs.iter().enumerate() {
        res = res.add(Dd::new(c).div(zpow));
        if i + 1 < coeffs.len() {
            zpow = zpow.mul(z2);
        }
    }
    res.sub(shift)
}

/// ln I_q(x) by the ascending series in dd with power-of-two rescaling:
/// (x/2)^q / Gamma(q+1) * sum_k c_k, c_0 = 1, c_{k+1} = c_k (x/2)^2 / ((k+1)(k+q+1)).
pub fn dd_ln_bessel_i(q: f64, x: f64) -> f64 {
    assert!(x > 0.0 && q > -1.0);
    let half = Dd::new(x).scale_pow2(-1);
    let ratio = half.mul(half);
    let qd = Dd::new(q);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut exp2: i64 = 0;
    for k in 0..2_000_000u64 {
        let kf = Dd::new(k as f64);
        let den = kf.add(Dd::ONE).mul(kf.add(qd).add(Dd::ONE));
        term = term.mul(ratio).div(den);
        sum = sum.add(term);
        if term.hi < sum.hi * 1e-36 {
            break;
        }
        if sum.hi > 1e280 {
            sum = sum.scale_pow2(-1000);
            term = term.scale_pow2(-1000);
            exp2 += 1000;
        }
    }
    let log_sum = sum.ln().add(Dd::LN_2.mul(Dd::new(exp2 as f64)));
    let prefix = qd.mul(half.ln()).sub(dd_ln_gamma(q + 1.0));
    prefix.add(log_sum).hi
}

/// ln 1F1(a, b, x) for x >= 0 by the positive-term dd series.
pub fn dd_ln_kummer_nonneg(a: f64, b: f64, x: f64) -> f64 {
    assert!(x >= 0.0);
    let (ad, bd, xd) = (Dd::new(a), Dd::new(b), Dd::new(x));
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut exp2: i64 = 0;
    for n in 0..3_000_000u64 {
        let nf = Dd::new(n as f64);
        let num = ad.add(nf).mul(xd);
        let den = bd.add(nf).mul(nf.add(Dd::ONE));
        term = term.mul(num).div(den);
        sum = sum.add(term);
        if term.hi.abs() < sum.hi * 1e-36 {
            break;
        }
        if sum.hi > 1e280 {
            sum = sum.scale_pow2(-1000);
            term = term.scale_pow2(-1000);
            exp2 += 1000;
        }
    }
    sum.ln().add(Dd::LN_2.mul(Dd::new(exp2 as f64))).hi
}

/// ln 1F1(a, b, x) for x < 0 by the direct alternating dd series. The ~31
/// spare digits absorb cancellation up to ~e^(2|x|) of the result, which
/// limits this oracle to |x| <= ~20 at full accuracy.
pub fn dd_ln_kummer_alternating(a: f64, b: f64, x: f64) -> f64 {
    assert!((-20.0..0.0).contains(&x));
    let (ad, bd, xd) = (Dd::new(a), Dd::new(b), Dd::new(x));
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    for n in 0..100_000u64 {
        let nf = Dd::new(n as f64);
        let num = ad.add(nf).mul(xd);
        let den = bd.add(nf).mul(nf.add(Dd::ONE));
        term = term.mul(num).div(den);
        sum = sum.add(term);
        if term.hi.abs() < sum.hi.abs() * 1e-34 && n as f64 > 2.0 * x.abs() + 8.0 {
            break;
        }
    }
    assert!(sum.hi > 0.0, "alternating series lost all precision");
    sum.ln().hi
}

/// Regularized lower incomplete gamma P(a, x) by the dd series.
pub fn dd_reg_lower_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    // gamma(a,x) = x^a e^-x sum_n x^n / (a (a+1) ... (a+n)); the partial
    // sums reach ~e^x, so rescale by powers of two on the way
    let xd = Dd::new(x);
    let mut den = Dd::new(a);
    let mut term = Dd::ONE.div(den);
    let mut sum = term;
    let mut exp2: i64 = 0;
    for n in 1..1_000_000u64 {
        den = Dd::new(a + n as f64);
        term = term.mul(xd).div(den);
        sum = sum.add(term);
        if term.hi < sum.hi * 1e-36 {
            break;
        }
        if sum.hi > 1e280 {
            sum = sum.scale_pow2(-1000);
            term = term.scale_pow2(-1000);
            exp2 += 1000;
        }
    }
    let log_sum = sum.ln().add(Dd::LN_2.mul(Dd::new(exp2 as f64)));
    let log_p = Dd::new(a)
        .mul(Dd::new(x).ln())
        .sub(Dd::new(x))
        .sub(dd_ln_gamma(a))
        .add(log_sum);
    log_p.exp().hi.min(1.0)
}

// ---------------------------------------------------------------------------
// statistics helpers
// ---------------------------------------------------------------------------

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (sa.len(), sb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let xa = sa[i];
        let xb = sb[j];
        if xa <= xb {
            i += 1;
        }
        if xb <= xa {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Critical value of the two-sample KS statistic at significance level
/// `alpha` (asymptotic): c(alpha) sqrt((n+m)/(n m)).
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Hill estimator of the tail exponent from the k largest of xs.
pub fn hill_tail_exponent(xs: &[f64], k: usize) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert!(k + 1 < v.len());
    let x_k1 = v[k];
    let s: f64 = v[..k].iter().map(|x| (x / x_k1).ln()).sum();
    k as f64 / s
}
