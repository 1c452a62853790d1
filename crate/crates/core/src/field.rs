//! Smooth scalar fields with exact derivatives, used for manufactured states
//! and compactly supported test functions.

use std::f64::consts::FRAC_PI_2;

/// A smooth function of `z` whose derivatives of every order are available.
pub trait SmoothField {
    fn derivative(&self, order: usize, z: f64) -> f64;

    fn value(&self, z: f64) -> f64 {
        self.derivative(0, z)
    }

    fn sample(&self, order: usize, zs: &[f64]) -> Vec<f64> {
        zs.iter().map(|&z| self.derivative(order, z)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// Ascending coefficients in `z`.
    Polynomial(Vec<f64>),
    /// `amplitude * sin(wavenumber * z + phase)`
    Sine {
        amplitude: f64,
        wavenumber: f64,
        phase: f64,
    },
    /// `amplitude * (1 - s^2)^power` for `|s| < 1`, `s = (z - center) / half_width`,
    /// zero outside. Vanishes with its first `power - 1` derivatives at the edges.
    Bump {
        center: f64,
        half_width: f64,
        power: u32,
        amplitude: f64,
    },
    Sum(Vec<Profile>),
}

impl Profile {
    pub fn sine(amplitude: f64, wavenumber: f64, phase: f64) -> Self {
        Profile::Sine {
            amplitude,
            wavenumber,
            phase,
        }
    }

    pub fn bump(center: f64, half_width: f64, power: u32, amplitude: f64) -> Self {
        Profile::Bump {
            center,
            half_width,
            power,
            amplitude,
        }
    }

    pub fn plus(self, other: Profile) -> Self {
        match self {
            Profile::Sum(mut parts) => {
                parts.push(other);
                Profile::Sum(parts)
            }
            p => Profile::Sum(vec![p, other]),
        }
    }
}

fn falling_factorial(n: u32, k: u32) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    falling_factorial(n, k) / falling_factorial(k, k)
}

impl SmoothField for Profile {
    fn derivative(&self, order: usize, z: f64) -> f64 {
        match self {
            Profile::Constant(c) => {
                if order == 0 {
                    *c
                } else {
                    0.0
                }
            }
            Profile::Polynomial(coeffs) => {
                let k = order as u32;
                coeffs
                    .iter()
                    .enumerate()
                    .skip(order)
                    .map(|(n, c)| {
                        c * falling_factorial(n as u32, k) * z.powi(n as i32 - order as i32)
                    })
                    .sum()
            }
            Profile::Sine {
                amplitude,
                wavenumber,
                phase,
            } => {
                amplitude
                    * wavenumber.powi(order as i32)
                    * (wavenumber * z + phase + order as f64 * FRAC_PI_2).sin()
            }
            Profile::Bump {
                center,
                half_width,
                power,
                amplitude,
            } => {
                let s = (z - center) / half_width;
                if s.abs() >= 1.0 {
                    return 0.0;
                }
                // (1 - s^2)^p = sum_k C(p,k) (-1)^k s^{2k}
                let mut acc = 0.0;
                for k in 0..=*power {
                    let e = 2 * k;
                    if (e as usize) < order {
                        continue;
                    }
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign
                        * binomial(*power, k)
                        * falling_factorial(e, order as u32)
                        * s.powi((e as usize - order) as i32);
                }
                amplitude * acc / half_width.powi(order as i32)
            }
            Profile::Sum(parts) => parts.iter().map(|p| p.derivative(order, z)).sum(),
        }
    }
}
