//! Closed-form security quantities: the device-independent Holevo bound F(S),
//! the Bell-diagonal intermediate bound, the standard-scenario bound, the
//! Devetak–Winter rate and critical-QBER root finding.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{binary_entropy, shannon_entropy, BellDiagonalSpectrum};

/// 2√2
pub const TSIRELSON: f64 = 2.0 * SQRT_2;
/// Slack allowed above the Tsirelson bound before a CHSH value is rejected.
pub const TSIRELSON_TOL: f64 = 1e-9;
/// Default bisection bracket for the critical QBER.
pub const QBER_BRACKET: (f64, f64) = (0.0, 0.25);
/// Absolute tolerance of the critical-QBER bisection.
pub const QBER_ROOT_TOL: f64 = 1e-6;

/// Observed CHSH value and QBER.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedStatistics {
    pub chsh: f64,
    pub qber: f64,
}

impl ObservedStatistics {
    pub fn new(chsh: f64, qber: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&qber) {
            return Err(Error::InvalidArgument(format!(
                "QBER {qber} outside [0, 0.5]"
            )));
        }
        if !(chsh.abs() <= 4.0) {
            return Err(Error::InvalidArgument(format!(
                "CHSH value {chsh} outside [-4, 4]"
            )));
        }
        Ok(Self { chsh, qber })
    }

    /// Point on the depolarized-Φ+ family S = 2√2(1 − 2Q).
    pub fn on_line(qber: f64) -> Result<Self> {
        Self::new(line_chsh(qber), qber)
    }
}

/// S(Q) = 2√2(1 − 2Q)
pub fn line_chsh(qber: f64) -> f64 {
    TSIRELSON * (1.0 - 2.0 * qber)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub chsh: f64,
    pub qber: f64,
    /// I(A0:B1) = 1 − h(Q)
    pub iab: f64,
    pub chi_di: f64,
    pub chi_std: Option<f64>,
    pub r_di: f64,
    pub r_std: Option<f64>,
}

/// F(S) = h((1 + √((S/2)² − 1))/2) for 2 < |S| ≤ 2√2, and 1 for |S| ≤ 2.
pub fn holevo_bound(chsh: f64) -> Result<f64> {
    let s = chsh.abs();
    if s.is_nan() || s > TSIRELSON + TSIRELSON_TOL {
        return Err(Error::UnphysicalViolation { value: chsh });
    }
    if s <= 2.0 {
        return Ok(1.0);
    }
    let c = ((s / 2.0).powi(2) - 1.0).max(0.0).sqrt().min(1.0);
    binary_entropy((1.0 + c) / 2.0)
}

/// h(Q + S/(2√2)); the phase error is 1 − Q − S/(2√2).
pub fn standard_holevo_bound(stats: ObservedStatistics) -> Result<f64> {
    let x = stats.qber + stats.chsh / TSIRELSON;
    if !(-1e-9..=1.0 + 1e-9).contains(&x) {
        return Err(Error::StandardBoundUndefined { value: x });
    }
    binary_entropy(x.clamp(0.0, 1.0))
}

/// Devetak–Winter rate with both Holevo bounds. Negative rates are reported as is.
pub fn dw_rate(stats: ObservedStatistics) -> Result<KeyRateReport> {
    let iab = 1.0 - binary_entropy(stats.qber)?;
    let chi_di = holevo_bound(stats.chsh)?;
    let chi_std = standard_holevo_bound(stats).ok();
    Ok(KeyRateReport {
        chsh: stats.chsh,
        qber: stats.qber,
        iab,
        chi_di,
        chi_std,
        r_di: iab - chi_di,
        r_std: chi_std.map(|chi| iab - chi),
    })
}

/// 2√2 · √((λΦ+ − λΨ−)² + (λΦ− − λΨ+)²), the maximal CHSH value of the state.
pub fn s_lambda(spec: &BellDiagonalSpectrum) -> f64 {
    let d1 = spec.phi_plus - spec.psi_minus;
    let d2 = spec.phi_minus - spec.psi_plus;
    (TSIRELSON * (d1 * d1 + d2 * d2).sqrt()).min(TSIRELSON)
}

/// H(λ) − h(λΦ+ + λΦ−)
pub fn chi_lambda_upper(spec: &BellDiagonalSpectrum) -> f64 {
    let h = binary_entropy((spec.phi_plus + spec.phi_minus).clamp(0.0, 1.0))
        .expect("sum of two weights is a probability");
    shannon_entropy(&spec.as_array()) - h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    DeviceIndependent,
    Standard,
}

/// How the CHSH value depends on the QBER along the curve being scanned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChshCurve {
    /// S = 2√2(1 − 2Q)
    Line,
    Fixed(f64),
    /// Monotone samples (Q, S), linearly interpolated; sorted by Q on construction.
    Sampled(Vec<(f64, f64)>),
}

impl ChshCurve {
    pub fn sampled(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "a sampled curve needs at least two points".into(),
            ));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(ChshCurve::Sampled(points))
    }

    pub fn chsh_at(&self, qber: f64) -> Result<f64> {
        match self {
            ChshCurve::Line => Ok(line_chsh(qber)),
            ChshCurve::Fixed(s) => Ok(*s),
            ChshCurve::Sampled(points) => {
                let (first, last) = (points[0], points[points.len() - 1]);
                if qber < first.0 - 1e-12 || qber > last.0 + 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "Q = {qber} outside sampled range [{}, {}]",
                        first.0, last.0
                    )));
                }
                let idx = points
                    .windows(2)
                    .position(|w| qber <= w[1].0)
                    .unwrap_or(points.len() - 2);
                let (q0, s0) = points[idx];
                let (q1, s1) = points[idx + 1];
                if q1 == q0 {
                    return Ok(s0);
                }
                let t = ((qber - q0) / (q1 - q0)).clamp(0.0, 1.0);
                Ok(s0 + t * (s1 - s0))
            }
        }
    }
}

/// Key rate of the chosen scenario at QBER `qber` along `curve`.
pub fn rate_along(kind: BoundKind, curve: &ChshCurve, qber: f64) -> Result<f64> {
    let stats = ObservedStatistics::new(curve.chsh_at(qber)?, qber)?;
    let iab = 1.0 - binary_entropy(qber)?;
    let chi = match kind {
        BoundKind::DeviceIndependent => holevo_bound(stats.chsh)?,
        BoundKind::Standard => standard_holevo_bound(stats)?,
    };
    Ok(iab - chi)
}

/// Root of r(Q) = 0 on the default bracket [0, 0.25].
pub fn critical_qber(kind: BoundKind, curve: &ChshCurve) -> Result<f64> {
    critical_qber_in(kind, curve, QBER_BRACKET)
}

/// Bisection for r(Q) = 0 on `bracket`, to absolute tolerance 1e-6 in Q.
pub fn critical_qber_in(kind: BoundKind, curve: &ChshCurve, bracket: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(0.0 <= lo && lo < hi && hi <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "invalid QBER bracket [{lo}, {hi}]"
        )));
    }
    let no_root = || Error::NoRoot {
        lo: bracket.0,
        hi: bracket.1,
    };
    let r_lo = rate_along(kind, curve, lo).map_err(|_| no_root())?;
    let r_hi = rate_along(kind, curve, hi).map_err(|_| no_root())?;
    if r_lo == 0.0 {
        return Ok(lo);
    }
    if r_hi == 0.0 {
        return Ok(hi);
    }
    if r_lo.signum() == r_hi.signum() {
        return Err(no_root());
    }
    let lo_positive = r_lo > 0.0;
    while hi - lo > QBER_ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let r = rate_along(kind, curve, mid).map_err(|_| no_root())?;
        if r == 0.0 {
            return Ok(mid);
        }
        if (r > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::random::random_simplex;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn h(p: f64) -> f64 {
        binary_entropy(p).unwrap()
    }

    #[test]
    fn holevo_bound_endpoints() {
        assert_eq!(holevo_bound(TSIRELSON).unwrap(), 0.0);
        assert_eq!(holevo_bound(2.0).unwrap(), 1.0);
        assert_eq!(holevo_bound(-TSIRELSON).unwrap(), 0.0);
        assert_eq!(holevo_bound(0.3).unwrap(), 1.0);
        assert_eq!(holevo_bound(TSIRELSON + 5e-10).unwrap(), 0.0);
    }

    #[test]
    fn holevo_bound_rejects_supra_quantum() {
        assert!(matches!(
            holevo_bound(3.0),
            Err(Error::UnphysicalViolation { .. })
        ));
        assert!(holevo_bound(TSIRELSON + 1e-8).is_err());
    }

    #[test]
    fn holevo_bound_on_line_at_five_percent() {
        // (S/2)² − 1 = 2·0.81 − 1 = 0.62
        let s = line_chsh(0.05);
        let expected = h((1.0 + 0.62f64.sqrt()) / 2.0);
        assert!((holevo_bound(s).unwrap() - expected).abs() < 1e-12);
        // independently evaluated reference
        assert!((holevo_bound(s).unwrap() - 0.488_652_552_884_377_1).abs() < 1e-12);
    }

    #[test]
    fn dw_rate_values() {
        let perfect = dw_rate(ObservedStatistics::new(TSIRELSON, 0.0).unwrap()).unwrap();
        assert_eq!(perfect.r_di, 1.0);
        assert_eq!(perfect.r_std, Some(1.0));

        // the zero crossing sits between 7.1% and 7.2%
        let below = dw_rate(ObservedStatistics::on_line(0.071).unwrap()).unwrap();
        let above = dw_rate(ObservedStatistics::on_line(0.072).unwrap()).unwrap();
        assert!(below.r_di > 0.0 && below.r_di < 1e-2, "{}", below.r_di);
        assert!(above.r_di < 0.0);

        let stats = ObservedStatistics::on_line(0.05).unwrap();
        let report = dw_rate(stats).unwrap();
        let expected = 1.0 - h(0.05) - h((1.0 + 0.62f64.sqrt()) / 2.0);
        assert!((report.r_di - expected).abs() < 1e-12);
        assert!((report.r_di - 0.224_950_489_999_666_66).abs() < 1e-12);
        assert_eq!(report.iab, 1.0 - h(0.05));
    }

    #[test]
    fn no_violation_means_no_key() {
        let report = dw_rate(ObservedStatistics::new(1.9, 0.02).unwrap()).unwrap();
        assert_eq!(report.chi_di, 1.0);
        assert!(report.r_di <= -h(0.02) + 1e-15);
    }

    #[test]
    fn standard_bound_values() {
        let s = standard_holevo_bound(ObservedStatistics::new(TSIRELSON, 0.0).unwrap()).unwrap();
        assert_eq!(s, 0.0);
        let q = 0.11;
        let b = standard_holevo_bound(ObservedStatistics::on_line(q).unwrap()).unwrap();
        assert!((b - h(q)).abs() < 1e-12);
        assert!((1.0 - 2.0 * h(q)).abs() < 1e-3);
        let b = standard_holevo_bound(ObservedStatistics::on_line(0.05).unwrap()).unwrap();
        assert!((b - h(0.05)).abs() < 1e-12);
    }

    #[test]
    fn standard_bound_undefined_regime() {
        let stats = ObservedStatistics::new(TSIRELSON, 0.3).unwrap();
        assert!(matches!(
            standard_holevo_bound(stats),
            Err(Error::StandardBoundUndefined { .. })
        ));
        let report = dw_rate(stats).unwrap();
        assert!(report.chi_std.is_none() && report.r_std.is_none());
    }

    #[test]
    fn observed_statistics_validation() {
        assert!(ObservedStatistics::new(2.5, 0.6).is_err());
        assert!(ObservedStatistics::new(4.5, 0.1).is_err());
        assert!(ObservedStatistics::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn s_lambda_values() {
        let pure = BellDiagonalSpectrum::new(1.0, 0.0, 0.0, 0.0).unwrap();
        assert!((s_lambda(&pure) - TSIRELSON).abs() < 1e-15);
        let mixed = BellDiagonalSpectrum::new(0.25, 0.25, 0.25, 0.25).unwrap();
        assert_eq!(s_lambda(&mixed), 0.0);
        for s in [2.05, 2.3, 2.6, 2.8] {
            let c = ((s / 2.0f64).powi(2) - 1.0).sqrt();
            let spec =
                BellDiagonalSpectrum::new((1.0 + c) / 2.0, 0.0, (1.0 - c) / 2.0, 0.0).unwrap();
            // (1+C)/2 − 0 and (1−C)/2 − 0 give 2√2·√((1+C²)/2) = 2√(1+C²)
            assert!((s_lambda(&spec) - 2.0 * (1.0 + c * c).sqrt()).abs() < 1e-12);
            assert!((s_lambda(&spec) - s).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_lambda_upper_values() {
        let pure = BellDiagonalSpectrum::new(1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(chi_lambda_upper(&pure), 0.0);
        for s in [2.05, 2.3, 2.6, 2.8] {
            let c = ((s / 2.0f64).powi(2) - 1.0).sqrt();
            let spec =
                BellDiagonalSpectrum::new((1.0 + c) / 2.0, 0.0, (1.0 - c) / 2.0, 0.0).unwrap();
            assert!((chi_lambda_upper(&spec) - h((1.0 + c) / 2.0)).abs() < 1e-12);
            assert!((chi_lambda_upper(&spec) - holevo_bound(s).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_lambda_upper_dominated_by_f() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20_000 {
            let w: [f64; 4] = random_simplex(&mut rng);
            let spec = BellDiagonalSpectrum::canonical_from(w, rng.gen_range(0..3)).unwrap();
            let lhs = chi_lambda_upper(&spec);
            let rhs = holevo_bound(s_lambda(&spec)).unwrap();
            assert!(lhs <= rhs + 1e-9, "{spec:?}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn critical_qbers() {
        let di = critical_qber(BoundKind::DeviceIndependent, &ChshCurve::Line).unwrap();
        assert!((di - 0.071).abs() <= 1e-3, "{di}");
        // independently computed with a separate root finder
        assert!((di - 0.071_491_758_844_485_73).abs() <= 1e-6);
        let std = critical_qber(BoundKind::Standard, &ChshCurve::Line).unwrap();
        assert!((std - 0.110).abs() <= 1e-3, "{std}");
        assert!((std - 0.110_027_864_438_359_59).abs() <= 1e-6);
    }

    #[test]
    fn critical_qber_with_pinned_chsh() {
        let curve = ChshCurve::Fixed(TSIRELSON);
        assert!(matches!(
            critical_qber(BoundKind::DeviceIndependent, &curve),
            Err(Error::NoRoot { .. })
        ));
        let q = critical_qber_in(BoundKind::DeviceIndependent, &curve, (0.0, 0.5)).unwrap();
        assert!((q - 0.5).abs() <= 1e-6);
    }

    #[test]
    fn critical_qber_on_sampled_line() {
        let points = (0..=50)
            .map(|i| {
                let q = 0.25 * i as f64 / 50.0;
                (q, line_chsh(q))
            })
            .collect();
        let curve = ChshCurve::sampled(points).unwrap();
        let q = critical_qber(BoundKind::Standard, &curve).unwrap();
        assert!((q - 0.110).abs() <= 1e-3);
    }

    #[test]
    fn f_exceeds_h_on_line_below_threshold() {
        for i in 0..=710 {
            let q = i as f64 * 1e-4;
            assert!(holevo_bound(line_chsh(q)).unwrap() >= h(q), "Q = {q}");
        }
    }

    proptest! {
        #[test]
        fn f_monotone(a in 2.0f64..TSIRELSON, b in 2.0f64..TSIRELSON) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(holevo_bound(lo).unwrap() >= holevo_bound(hi).unwrap() - 1e-12);
        }

        #[test]
        fn f_concave(a in 2.0f64..=TSIRELSON, b in 2.0f64..=TSIRELSON, t in 0.0f64..=1.0) {
            let mid = holevo_bound(t * a + (1.0 - t) * b).unwrap();
            let chord = t * holevo_bound(a).unwrap() + (1.0 - t) * holevo_bound(b).unwrap();
            prop_assert!(mid >= chord - 1e-9);
        }

        #[test]
        fn mixture_bound(ws in proptest::collection::vec((0.01f64..1.0, 2.0f64..=TSIRELSON), 1..8)) {
            let total: f64 = ws.iter().map(|(w, _)| w).sum();
            let avg_f: f64 = ws.iter().map(|(w, s)| w / total * holevo_bound(*s).unwrap()).sum();
            let avg_s: f64 = ws.iter().map(|(w, s)| w / total * s).sum();
            prop_assert!(avg_f <= holevo_bound(avg_s.min(TSIRELSON)).unwrap() + 1e-9);
        }
    }
}
