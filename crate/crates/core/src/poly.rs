//! Real roots of real polynomials.
//!
//! Roots come from the eigenvalues of the balanced companion matrix (Francis
//! double-shift QR on the Hessenberg form) and are then polished with Newton
//! steps on the original polynomial. If QR fails to converge, roots are
//! bracketed by sign changes and bisected instead.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Horner evaluation; `coeffs[k]` multiplies `x^k`.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Value and first derivative.
pub fn eval_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// `Σ |c_k| |x|^k`, the natural size of rounding errors in `eval(coeffs, x)`.
pub fn eval_scale(coeffs: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
}

/// Product of `(x - r)` factors, ascending coefficients.
pub fn from_roots(roots: &[f64], leading: f64) -> Vec<f64> {
    let mut coeffs = vec![leading];
    for &r in roots {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= r * c;
        }
        coeffs = next;
    }
    coeffs
}

fn trimmed(coeffs: &[f64]) -> &[f64] {
    let mut end = coeffs.len();
    while end > 0 && coeffs[end - 1] == 0.0 {
        end -= 1;
    }
    &coeffs[..end]
}

/// Dense square matrix with 1-based indexing helpers.
struct Square {
    n: usize,
    data: Vec<f64>,
}

impl Square {
    fn new(n: usize) -> Self {
        Self { n, data: vec![0.0; (n + 1) * (n + 1)] }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.n + 1) + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let n = self.n;
        self.data[i * (n + 1) + j] = v;
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

fn balance(a: &mut Square) {
    const RADIX: f64 = 2.0;
    let n = a.n;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a.at(j, i).abs();
                    r += a.at(i, j).abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        let v = a.at(i, j) * g;
                        a.set(i, j, v);
                    }
                    for j in 1..=n {
                        let v = a.at(j, i) * f;
                        a.set(j, i, v);
                    }
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix; `None` if QR does not converge.
fn hessenberg_eigenvalues(a: &mut Square) -> Option<Vec<Complex64>> {
    const MAX_ITS: usize = 60;
    let n = a.n;
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a.at(i, j).abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            // look for a single small subdiagonal element
            let mut l = nn;
            while l >= 2 {
                let mut s = a.at(l - 1, l - 1).abs() + a.at(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a.at(l, l - 1).abs() + s == s {
                    a.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = a.at(nn, nn);
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
            } else {
                let mut y = a.at(nn - 1, nn - 1);
                let mut w = a.at(nn, nn - 1) * a.at(nn - 1, nn);
                if l == nn - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn = nn.saturating_sub(2);
                } else {
                    if its == MAX_ITS {
                        return None;
                    }
                    if its % 10 == 0 && its > 0 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nn {
                            let v = a.at(i, i) - x;
                            a.set(i, i, v);
                        }
                        let s = a.at(nn, nn - 1).abs() + a.at(nn - 1, nn - 2).abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    let (mut p, mut q, mut r);
                    let mut z;
                    loop {
                        z = a.at(m, m);
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a.at(m + 1, m) + a.at(m, m + 1);
                        q = a.at(m + 1, m + 1) - z - r - s;
                        r = a.at(m + 2, m + 1);
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a.at(m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a.at(m - 1, m - 1).abs() + z.abs() + a.at(m + 1, m + 1).abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a.set(i, i - 2, 0.0);
                        if i != m + 2 {
                            a.set(i, i - 3, 0.0);
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a.at(k, k - 1);
                            q = a.at(k + 1, k - 1);
                            r = 0.0;
                            if k != nn - 1 {
                                r = a.at(k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    let v = -a.at(k, k - 1);
                                    a.set(k, k - 1, v);
                                }
                            } else {
                                a.set(k, k - 1, -s * x);
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                let mut pp = a.at(k, j) + q * a.at(k + 1, j);
                                if k != nn - 1 {
                                    pp += r * a.at(k + 2, j);
                                    let v = a.at(k + 2, j) - pp * z;
                                    a.set(k + 2, j, v);
                                }
                                let v = a.at(k + 1, j) - pp * y;
                                a.set(k + 1, j, v);
                                let v = a.at(k, j) - pp * x;
                                a.set(k, j, v);
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                let mut pp = x * a.at(i, k) + y * a.at(i, k + 1);
                                if k != nn - 1 {
                                    pp += z * a.at(i, k + 2);
                                    let v = a.at(i, k + 2) - pp * r;
                                    a.set(i, k + 2, v);
                                }
                                let v = a.at(i, k + 1) - pp * q;
                                a.set(i, k + 1, v);
                                let v = a.at(i, k) - pp;
                                a.set(i, k, v);
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Some((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// All complex roots via the companion matrix; `None` if QR fails.
pub fn companion_roots(coeffs: &[f64]) -> Option<Vec<Complex64>> {
    let c = trimmed(coeffs);
    if c.len() < 2 {
        return Some(Vec::new());
    }
    let n = c.len() - 1;
    let lead = c[n];
    let mut h = Square::new(n);
    for k in 1..=n {
        h.set(1, k, -c[n - k] / lead);
    }
    for j in 2..=n {
        h.set(j, j - 1, 1.0);
    }
    balance(&mut h);
    hessenberg_eigenvalues(&mut h)
}

fn newton_polish(coeffs: &[f64], mut x: f64) -> f64 {
    let mut best = x;
    let mut best_res = eval(coeffs, x).abs();
    for _ in 0..60 {
        let (p, dp) = eval_with_derivative(coeffs, x);
        if p == 0.0 || dp == 0.0 || !dp.is_finite() {
            break;
        }
        let next = x - p / dp;
        if !next.is_finite() {
            break;
        }
        let res = eval(coeffs, next).abs();
        if res < best_res {
            best = next;
            best_res = res;
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * next.abs().max(1e-300) {
            break;
        }
        x = next;
    }
    best
}

/// Cauchy bound on the magnitude of all roots.
fn root_bound(coeffs: &[f64]) -> f64 {
    let c = trimmed(coeffs);
    let n = c.len() - 1;
    1.0 + c[..n].iter().map(|a| (a / c[n]).abs()).fold(0.0, f64::max)
}

/// Roots found by sign changes on a uniform grid, refined by bisection.
///
/// Even-multiplicity roots without a sign change are not detected.
pub fn bracketed_real_roots(coeffs: &[f64], intervals: usize) -> Vec<f64> {
    let c = trimmed(coeffs);
    if c.len() < 2 {
        return Vec::new();
    }
    let bound = root_bound(c);
    let h = 2.0 * bound / intervals as f64;
    let mut roots = Vec::new();
    let mut x0 = -bound;
    let mut f0 = eval(c, x0);
    for k in 1..=intervals {
        let x1 = -bound + k as f64 * h;
        let f1 = eval(c, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            roots.push(bisect(c, x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    roots
}

/// Bisection on a bracketing interval `f(lo)·f(hi) < 0`.
pub fn bisect(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = eval(coeffs, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval(coeffs, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots in ascending order, with multiplicity, Newton-polished.
///
/// Eigenvalues whose imaginary part is below `1e-6·max(1, |λ|)` are treated as
/// real: near-multiple roots split into such pairs under rounding.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let c = trimmed(coeffs);
    if c.len() < 2 {
        return Vec::new();
    }
    let mut roots: Vec<f64> = match companion_roots(c) {
        Some(eigs) => eigs
            .into_iter()
            .filter(|z| z.im.abs() <= 1e-6 * z.norm().max(1.0))
            .map(|z| newton_polish(c, z.re))
            .collect(),
        None => bracketed_real_roots(c, 4096).into_iter().map(|x| newton_polish(c, x)).collect(),
    };
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    roots
}
