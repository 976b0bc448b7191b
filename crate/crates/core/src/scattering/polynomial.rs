use num_complex::Complex64;

/// The scattering polynomial `p_n(t, κ) = Σ c[a][b] t^a κ^b` with integer
/// coefficients, built by `p_n = (1 - t²) ∂_t p_{n-1} + (κ - n t) p_{n-1}`.
///
/// With `t = tanh x` and `κ = ik`, `p_n(tanh x, ik) e^{ikx}` solves
/// `-y'' - n(n+1) sech²x y = k² y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScatteringPolynomial {
    degree: usize,
    /// `coeffs[a][b]` multiplies `t^a κ^b`.
    coeffs: Vec<Vec<i64>>,
}

impl ScatteringPolynomial {
    pub fn new(n: usize) -> Self {
        let size = n + 1;
        let mut p = vec![vec![0i64; size]; size];
        p[0][0] = 1;
        for m in 1..=n {
            let mut next = vec![vec![0i64; size]; size];
            for a in 0..m {
                for b in 0..m {
                    let c = p[a][b];
                    if c == 0 {
                        continue;
                    }
                    // (1 - t²) ∂_t
                    if a >= 1 {
                        next[a - 1][b] += a as i64 * c;
                        next[a + 1][b] -= a as i64 * c;
                    }
                    // κ p
                    next[a][b + 1] += c;
                    // -m t p
                    next[a + 1][b] -= m as i64 * c;
                }
            }
            p = next;
        }
        Self {
            degree: n,
            coeffs: p,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient of `t^a κ^b`.
    pub fn coeff(&self, a: usize, b: usize) -> i64 {
        self.coeffs
            .get(a)
            .and_then(|row| row.get(b))
            .copied()
            .unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[Vec<i64>] {
        &self.coeffs
    }

    /// Coefficients of `t^a` as polynomials in κ, evaluated at `kappa`.
    fn t_coefficients(&self, kappa: Complex64) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|row| {
                row.iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * kappa + c as f64)
            })
            .collect()
    }

    pub fn eval(&self, t: f64, kappa: Complex64) -> Complex64 {
        self.bind_kappa(kappa).eval(t)
    }

    /// Fixes κ, leaving a polynomial in `t` for repeated evaluation.
    pub fn bind_kappa(&self, kappa: Complex64) -> TPolynomial {
        TPolynomial {
            coeffs: self.t_coefficients(kappa),
        }
    }

    /// Exact value at `t = ±1` (or any integer `t`) and rational
    /// `κ = num / den`, scaled by `den^n`.
    pub fn eval_exact(&self, t: i128, kappa_num: i128, kappa_den: i128) -> i128 {
        let n = self.degree as u32;
        let mut acc = 0i128;
        for (a, row) in self.coeffs.iter().enumerate() {
            for (b, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                acc += c as i128
                    * t.pow(a as u32)
                    * kappa_num.pow(b as u32)
                    * kappa_den.pow(n - b as u32);
            }
        }
        acc
    }
}

/// A polynomial in `t` with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TPolynomial {
    coeffs: Vec<Complex64>,
}

impl TPolynomial {
    #[inline]
    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }

    /// Value and `t`-derivative.
    #[inline]
    pub fn eval_with_dt(&self, t: f64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }
}
