//! Hurwitz zeta function `ζ(s, q) = Σ_{k≥0} (q + k)^{-s}` and its derivative in `s`.
//!
//! Euler–Maclaurin summation: a few explicit terms until the shifted argument
//! is large enough, then the integral, half-term and Bernoulli corrections.

/// `(B_2j numerator, B_2j denominator)` for j = 1..=10.
const BERNOULLI: [(f64, f64); 10] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
];

/// `ζ(s, q)` for `s > 1`, `q > 0`.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    zeta_and_derivative(s, q).0
}

/// `(ζ(s, q), ∂ζ/∂s (s, q))` for `s > 1`, `q > 0`.
pub fn zeta_and_derivative(s: f64, q: f64) -> (f64, f64) {
    debug_assert!(s > 1.0 && q > 0.0, "zeta({s}, {q})");
    let shift = (12.0f64.max(s) - q).ceil().max(0.0) as usize;

    let (mut z, mut dz) = (0.0, 0.0);
    for k in 0..shift {
        let x = q + k as f64;
        let t = x.powf(-s);
        z += t;
        dz -= x.ln() * t;
    }

    let a = q + shift as f64;
    let ln_a = a.ln();
    let a_pow = a.powf(-s);

    // integral tail and half term
    let integral = a * a_pow / (s - 1.0);
    z += integral + 0.5 * a_pow;
    dz += -integral * (ln_a + 1.0 / (s - 1.0)) - 0.5 * ln_a * a_pow;

    // Bernoulli corrections: c_j * P_j(s) * a^{-s-2j+1}
    let inv_a2 = 1.0 / (a * a);
    let mut pw = a_pow / a;
    let mut poly = s;
    let mut dpoly = 1.0;
    let mut fact = 2.0;
    for (j, &(num, den)) in BERNOULLI.iter().enumerate() {
        let c = num / den / fact;
        let term = c * poly * pw;
        z += term;
        dz += c * pw * (dpoly - ln_a * poly);
        if term.abs() < 1e-17 * z.abs() {
            break;
        }
        let (m1, m2) = (s + (2 * j + 1) as f64, s + (2 * j + 2) as f64);
        dpoly = dpoly * m1 * m2 + poly * (m1 + m2);
        poly *= m1 * m2;
        pw *= inv_a2;
        let k = (2 * j + 2) as f64;
        fact *= (k + 1.0) * (k + 2.0);
    }
    (z, dz)
}
