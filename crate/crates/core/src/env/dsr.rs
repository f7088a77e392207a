use crate::error::{Error, Result};
use crate::math;

/// Variance below which the differential Sharpe ratio is reported as zero.
pub const DSR_VARIANCE_FLOOR: f64 = 1e-10;

/// Exponential moving first and second moments of a return stream.
///
/// The differential Sharpe ratio emitted by [`DsrAccumulator::update`] is the
/// first-order change of `S = A / sqrt(B - A²)` produced by the moment
/// update, so summing it over a stretch of the stream approximates the change
/// in `S` over that stretch.
#[derive(Debug, Clone, PartialEq)]
pub struct DsrAccumulator {
    a: f64,
    b: f64,
    eta: f64,
    warmup: usize,
    seen: usize,
}

impl DsrAccumulator {
    /// Zero moments with the default warmup of `ceil(3 / η)` updates.
    pub fn new(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Self::with_warmup(eta, libm::ceil(3.0 / eta) as usize)
    }

    pub fn with_warmup(eta: f64, warmup: usize) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self {
            a: 0.0,
            b: 0.0,
            eta,
            warmup,
            seen: 0,
        })
    }

    /// Starts from given moments with no warmup.
    pub fn from_moments(a: f64, b: f64, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self {
            a,
            b,
            eta,
            warmup: 0,
            seen: 0,
        })
    }

    pub fn mean(&self) -> f64 {
        self.a
    }

    pub fn second_moment(&self) -> f64 {
        self.b
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn warmup(&self) -> usize {
        self.warmup
    }

    pub fn updates(&self) -> usize {
        self.seen
    }

    /// `A / sqrt(B - A²)` of the current moments, if the variance is above
    /// the floor.
    pub fn sharpe(&self) -> Option<f64> {
        let var = self.b - self.a * self.a;
        (var > DSR_VARIANCE_FLOOR).then(|| self.a / math::sqrt(var))
    }

    pub fn reset(&mut self) {
        self.a = 0.0;
        self.b = 0.0;
        self.seen = 0;
    }

    /// Folds in one period return and returns the differential Sharpe ratio
    /// `(B ΔA - A ΔB / 2) / (B - A²)^{3/2}` computed from the moments before
    /// the update, with `ΔA = η (r - A)` and `ΔB = η (r² - B)`.
    ///
    /// Emits 0 during warmup or when `B - A² <= DSR_VARIANCE_FLOOR`; the
    /// moments are updated either way.
    pub fn update(&mut self, r: f64) -> f64 {
        let delta_a = self.eta * (r - self.a);
        let delta_b = self.eta * (r * r - self.b);
        let var = self.b - self.a * self.a;
        let d = if self.seen < self.warmup || var <= DSR_VARIANCE_FLOOR {
            0.0
        } else {
            (self.b * delta_a - 0.5 * self.a * delta_b) / (var * math::sqrt(var))
        };
        self.a += delta_a;
        self.b += delta_b;
        self.seen += 1;
        d
    }
}

/// Free-function form of [`DsrAccumulator::update`].
pub fn dsr_update(acc: &mut DsrAccumulator, r: f64) -> f64 {
    acc.update(r)
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            expected: "an adaptation rate in (0, 1)",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    /// Sharpe of the exponentially weighted moments of `stream`, recomputed
    /// from scratch: weight `η (1 - η)^{k-1-j}` on element `j`.
    fn weighted_sharpe(stream: &[f64], eta: f64) -> f64 {
        let k = stream.len();
        let (mut a, mut b) = (0.0, 0.0);
        for (j, &r) in stream.iter().enumerate() {
            let w = eta * libm::pow(1.0 - eta, (k - 1 - j) as f64);
            a += w * r;
            b += w * r * r;
        }
        a / libm::sqrt(b - a * a)
    }

    #[test]
    fn formula_example() {
        let mut acc = DsrAccumulator::from_moments(0.0, 1.0, 0.1).unwrap();
        let d = dsr_update(&mut acc, 1.0);
        assert!((d - 0.1).abs() < 1e-15);
        assert!((acc.mean() - 0.1).abs() < 1e-15);
        assert!((acc.second_moment() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_variance_emits_zero() {
        let a = 0.5;
        let mut acc = DsrAccumulator::from_moments(a, a * a + 1e-11, 0.1).unwrap();
        assert_eq!(acc.update(a), 0.0);
    }

    #[test]
    fn warmup_emits_zero() {
        let mut acc = DsrAccumulator::new(0.1).unwrap();
        assert_eq!(acc.warmup(), 30);
        let mut r = rng::seeded(2);
        for _ in 0..30 {
            assert_eq!(acc.update(rng::standard_normal(&mut r)), 0.0);
        }
        assert_ne!(acc.update(1.0), 0.0);
    }

    #[test]
    fn rejects_bad_eta() {
        assert!(DsrAccumulator::new(0.0).is_err());
        assert!(DsrAccumulator::new(1.0).is_err());
    }

    #[test]
    fn cumulative_dsr_tracks_sharpe_change_on_most_streams() {
        let eta = 0.02;
        let mut within = 0;
        let trials = 50;
        for seed in 0..trials {
            let mut r = rng::seeded(seed);
            let stream: Vec<f64> = (0..200)
                .map(|_| 0.001 + 0.01 * rng::standard_normal(&mut r))
                .collect();
            let mut acc = DsrAccumulator::new(eta).unwrap();
            let total: f64 = stream.iter().map(|&x| acc.update(x)).sum();
            let w = acc.warmup();
            let change = weighted_sharpe(&stream, eta) - weighted_sharpe(&stream[..w], eta);
            if ((total - change) / change).abs() <= 0.2 {
                within += 1;
            }
        }
        assert!(within >= 35, "{within}/{trials}");
    }

    proptest! {
        #[test]
        fn second_moment_dominates_squared_mean(
            returns in proptest::collection::vec(-1.0f64..1.0, 1..300),
            eta in 0.01f64..0.5,
        ) {
            let mut acc = DsrAccumulator::new(eta).unwrap();
            for r in returns {
                let d = acc.update(r);
                prop_assert!(d.is_finite());
                prop_assert!(acc.second_moment() >= acc.mean() * acc.mean() - 1e-12);
            }
        }
    }
}
