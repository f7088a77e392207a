use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::rng;

/// Geometric random walk `p_{t+1} = p_t exp(drift + volatility z_t)`.
pub fn random_walk_prices(
    initial: f64,
    drift: f64,
    volatility: f64,
    len: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(initial > 0.0 && initial.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "initial_price",
            value: initial,
            expected: "a positive price",
        });
    }
    if !(volatility >= 0.0 && volatility.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "volatility",
            value: volatility,
            expected: "a finite value >= 0",
        });
    }
    let mut r = rng::seeded(seed);
    let mut p = initial;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(p);
        p *= math::exp(drift + volatility * rng::standard_normal(&mut r));
    }
    if out.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::NonFinite("random_walk_prices"));
    }
    Ok(out)
}

/// `base + amplitude sin(2πt / period) + noise z_t`; every price must come
/// out positive.
pub fn sine_prices(
    len: usize,
    base: f64,
    amplitude: f64,
    period: f64,
    noise: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(period > 0.0) {
        return Err(Error::InvalidParameter {
            name: "period",
            value: period,
            expected: "a positive period",
        });
    }
    let mut r = rng::seeded(seed);
    let mut out = Vec::with_capacity(len);
    for t in 0..len {
        let phase = 2.0 * core::f64::consts::PI * t as f64 / period;
        let mut p = base + amplitude * libm::sin(phase);
        if noise > 0.0 {
            p += noise * rng::standard_normal(&mut r);
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "price",
                value: p,
                expected: "positive prices (raise base or lower amplitude/noise)",
            });
        }
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_positive() {
        let a = random_walk_prices(100.0, 0.0005, 0.01, 500, 3).unwrap();
        let b = random_walk_prices(100.0, 0.0005, 0.01, 500, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&p| p > 0.0));
        assert_eq!(a[0], 100.0);
    }

    #[test]
    fn noiseless_sine_is_periodic() {
        let p = sine_prices(40, 10.0, 2.0, 20.0, 0.0, 0).unwrap();
        assert!((p[0] - p[20]).abs() < 1e-12);
        assert!((p[5] - 12.0).abs() < 1e-12);
        assert!(sine_prices(10, 1.0, 2.0, 4.0, 0.0, 0).is_err());
    }
}
