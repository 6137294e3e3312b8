//! Derived parameter constants with saturating arithmetic and test overrides.
//!
//! The theoretical caps (alpha = eps^-5, the class budget eps^-upsilon-10,
//! K = eps^-eps^-2, Q = exp(eps^-17), ...) are astronomically large for any
//! admissible eps. Integer-valued caps saturate to `Unbounded` past 2^53 and
//! the truly huge magnitudes are kept in natural-log scale, compared against
//! counts lazily. Test mode admits larger eps and explicit overrides so code
//! paths guarded by these caps become reachable on small instances.

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::rational::{self, Rational};

/// Largest integer cap materialized before saturating.
const SATURATION_LIMIT: f64 = 9.0e15; // ~2^53

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cap {
    Finite(u64),
    Unbounded,
}

impl Cap {
    /// True iff `count` does not exceed the cap.
    pub fn admits(self, count: usize) -> bool {
        match self {
            Cap::Finite(c) => count as u64 <= c,
            Cap::Unbounded => true,
        }
    }

    pub fn min_with(self, other: u64) -> u64 {
        match self {
            Cap::Finite(c) => c.min(other),
            Cap::Unbounded => other,
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Cap::Finite(c) => Some(c),
            Cap::Unbounded => None,
        }
    }
}

impl std::fmt::Display for Cap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cap::Finite(c) => write!(f, "{c}"),
            Cap::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// A magnitude tracked as a natural logarithm; never materialized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMag {
    pub ln: f64,
}

impl LogMag {
    pub fn new(ln: f64) -> LogMag {
        assert!(ln.is_finite(), "log-scale magnitude must be finite");
        LogMag { ln }
    }

    /// True iff `count <= exp(self.ln)`, evaluated in log scale.
    pub fn admits(self, count: usize) -> bool {
        if count == 0 {
            return true;
        }
        (count as f64).ln() <= self.ln
    }

    /// True iff `value <= exp(self.ln)` for a positive rational value.
    pub fn admits_rational(self, value: &Rational) -> bool {
        use num_traits::Signed;
        if !value.is_positive() {
            return true;
        }
        rational::ln_f64(value) <= self.ln
    }
}

/// A bound that is either a concrete test-mode cap or a log-scale magnitude.
#[derive(Debug, Clone, Copy)]
pub enum Bound {
    Cap(Cap),
    Log(LogMag),
}

impl Bound {
    pub fn admits(self, count: usize) -> bool {
        match self {
            Bound::Cap(c) => c.admits(count),
            Bound::Log(l) => l.admits(count),
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Cap(c) => write!(f, "{c}"),
            Bound::Log(l) => write!(f, "exp({:.3})", l.ln),
        }
    }
}

/// Optional test values replacing individual derived constants.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub alpha: Option<u64>,
    pub upsilon: Option<u32>,
    pub eta: Option<u64>,
    pub class_threshold: Option<Rational>,
    /// Per-configuration item budget (default eps^-10).
    pub config_size_cap: Option<u64>,
    /// Prototype support budget (default Q).
    pub support_cap: Option<u64>,
    /// Category budget for partitions (default eps^-22 Q^2).
    pub category_cap: Option<u64>,
    /// Structured-instance group budget (default K).
    pub structured_cap: Option<u64>,
    /// Large-group budget in the reduction (default eps^-3w-5).
    pub kappa: Option<u64>,
    /// Shifting parameter in the reconstruction (default eps^-w-2).
    pub beta: Option<u64>,
}

impl Overrides {
    pub fn any_set(&self) -> bool {
        self.alpha.is_some()
            || self.upsilon.is_some()
            || self.eta.is_some()
            || self.class_threshold.is_some()
            || self.config_size_cap.is_some()
            || self.support_cap.is_some()
            || self.category_cap.is_some()
            || self.structured_cap.is_some()
            || self.kappa.is_some()
            || self.beta.is_some()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstantsError {
    #[error("eps must satisfy 0 < eps < 1/10 with integer inverse; got {0} (use test mode to relax)")]
    Inadmissible(String),
    #[error("test-mode eps must satisfy 0 < eps < 1/2; got {0}")]
    TestOutOfRange(String),
    #[error("overrides require test mode")]
    OverridesNeedTestMode,
}

#[derive(Debug, Clone)]
pub struct ConstantSet {
    pub epsilon: Rational,
    pub test_mode: bool,
    /// Eviction prefix cap, eps^-5.
    pub alpha: Cap,
    /// Class frequency exponent, 3 eps^-2.
    pub upsilon: u32,
    /// Significant-group budget before the min with |G|, eps^-12.
    pub eta_cap: Cap,
    /// Per-configuration item budget, eps^-10.
    pub config_size_cap: Cap,
    /// ln K(eps) = eps^-2 ln(1/eps).
    pub k_log: LogMag,
    /// ln Q(eps) = eps^-17.
    pub q_log: LogMag,
    /// eps^upsilon, exact (multiplied by |y| to form the class threshold).
    eps_pow_upsilon: Rational,
    pub overrides: Overrides,
}

impl ConstantSet {
    /// Admissible-mode constants: eps in (0, 1/10), 1/eps integer.
    pub fn new(epsilon: Rational) -> Result<ConstantSet, ConstantsError> {
        ConstantSet::build(epsilon, false, Overrides::default())
    }

    /// Test-mode constants: eps in (0, 1/2), arbitrary overrides.
    pub fn new_test(epsilon: Rational, overrides: Overrides) -> Result<ConstantSet, ConstantsError> {
        ConstantSet::build(epsilon, true, overrides)
    }

    fn build(
        epsilon: Rational,
        test_mode: bool,
        overrides: Overrides,
    ) -> Result<ConstantSet, ConstantsError> {
        use num_traits::{One, Signed};
        if !test_mode {
            if overrides.any_set() {
                return Err(ConstantsError::OverridesNeedTestMode);
            }
            let admissible = epsilon.is_positive()
                && epsilon < rational::rat(1, 10)
                && epsilon.recip().is_integer();
            if !admissible {
                return Err(ConstantsError::Inadmissible(rational::format_rational(
                    &epsilon,
                )));
            }
        } else if !epsilon.is_positive() || epsilon >= rational::rat(1, 2) {
            return Err(ConstantsError::TestOutOfRange(rational::format_rational(
                &epsilon,
            )));
        }
        let _ = Rational::one();

        let inv = epsilon.recip();
        let inv_f = rational::ln_f64(&inv).exp();
        let alpha = overrides
            .alpha
            .map(Cap::Finite)
            .unwrap_or_else(|| pow_cap(&inv, 5));
        let upsilon = overrides.upsilon.unwrap_or_else(|| {
            let u = rational::int(3) * &inv * &inv;
            rational::ceil_int(&u).to_u32().unwrap_or(u32::MAX)
        });
        let eta_cap = overrides
            .eta
            .map(Cap::Finite)
            .unwrap_or_else(|| pow_cap(&inv, 12));
        let config_size_cap = overrides
            .config_size_cap
            .map(Cap::Finite)
            .unwrap_or_else(|| pow_cap(&inv, 10));
        let k_log = LogMag::new(inv_f * inv_f * inv_f.ln().max(0.0));
        let q_log = LogMag::new(inv_f.powi(17));
        let eps_pow_upsilon = rational::pow(&epsilon, upsilon.min(200_000) as i64);
        Ok(ConstantSet {
            epsilon,
            test_mode,
            alpha,
            upsilon,
            eta_cap,
            config_size_cap,
            k_log,
            q_log,
            eps_pow_upsilon,
            overrides,
        })
    }

    pub fn eps(&self) -> &Rational {
        &self.epsilon
    }

    /// ceil(eps^-e) as a saturating cap.
    pub fn eps_pow_neg(&self, e: u32) -> Cap {
        pow_cap(&self.epsilon.recip(), e)
    }

    /// eps^e, exact.
    pub fn eps_pow(&self, e: u32) -> Rational {
        rational::pow(&self.epsilon, e as i64)
    }

    /// Number of significant groups: min(group_count, eps^-12) or override.
    pub fn eta(&self, group_count: usize) -> usize {
        self.eta_cap.min_with(group_count as u64) as usize
    }

    /// Class frequency threshold eps^upsilon * norm (or the test override).
    pub fn class_threshold(&self, norm: &Rational) -> Rational {
        match &self.overrides.class_threshold {
            Some(t) => t.clone(),
            None => &self.eps_pow_upsilon * norm,
        }
    }

    /// Support budget for good prototypes (Q).
    pub fn support_cap(&self) -> Bound {
        match self.overrides.support_cap {
            Some(c) => Bound::Cap(Cap::Finite(c)),
            None => Bound::Log(self.q_log),
        }
    }

    /// Category budget for nice partitions (eps^-22 Q^2).
    pub fn category_cap(&self) -> Bound {
        match self.overrides.category_cap {
            Some(c) => Bound::Cap(Cap::Finite(c)),
            None => {
                let inv_ln = rational::ln_f64(&self.epsilon.recip());
                Bound::Log(LogMag::new(22.0 * inv_ln + 2.0 * self.q_log.ln))
            }
        }
    }

    /// Structured-instance budget on groups holding large items (K).
    pub fn structured_cap(&self) -> Bound {
        match self.overrides.structured_cap {
            Some(c) => Bound::Cap(Cap::Finite(c)),
            None => Bound::Log(self.k_log),
        }
    }

    /// Norm slack granted by shifting: (1 + 5 eps) |y| + Q.
    pub fn shift_norm_bound_holds(&self, y_norm: &Rational, z_norm: &Rational) -> bool {
        let base = (rational::int(1) + rational::int(5) * &self.epsilon) * y_norm;
        if *z_norm <= base {
            return true;
        }
        let excess = z_norm - base;
        match self.overrides.support_cap {
            // with an overridden Q the bound is checked against that value
            Some(c) => excess <= rational::int(c as i64),
            None => self.q_log.admits_rational(&excess),
        }
    }

    /// Large-group budget in the reduction, eps^-(3w+5).
    pub fn kappa(&self, w: u32) -> Cap {
        match self.overrides.kappa {
            Some(c) => Cap::Finite(c),
            None => self.eps_pow_neg(3 * w + 5),
        }
    }

    /// Shifting parameter in the reconstruction, eps^-(w+2).
    pub fn beta(&self, w: u32) -> Cap {
        match self.overrides.beta {
            Some(c) => Cap::Finite(c),
            None => self.eps_pow_neg(w + 2),
        }
    }

    /// Pivot indices range over {2, ..., ceil(1/eps) + 1}.
    pub fn max_pivot(&self) -> u32 {
        let inv = self.epsilon.recip();
        let c = rational::ceil_int(&inv.ceil());
        c.to_u32().unwrap_or(u32::MAX).saturating_add(1)
    }
}

fn pow_cap(inv_eps: &Rational, e: u32) -> Cap {
    let ln = rational::ln_f64(inv_eps) * e as f64;
    if ln > SATURATION_LIMIT.ln() {
        return Cap::Unbounded;
    }
    let v = rational::pow(inv_eps, e as i64);
    let c = rational::ceil_int(&v);
    match c.to_u64() {
        Some(c) if (c as f64) <= SATURATION_LIMIT => Cap::Finite(c),
        _ => Cap::Unbounded,
    }
}
