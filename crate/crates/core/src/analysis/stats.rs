use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};
use crate::experiment::{Condition, TrialRecord};

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample (n − 1) standard deviation; `None` below two values.
pub fn sample_sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

/// Standard error of the mean from the sample SD.
pub fn sem(xs: &[f64]) -> Option<f64> {
    sample_sd(xs).map(|sd| sd / (xs.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

/// APA-style p value: three decimals without a leading zero, `< .001` below.
pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "p < .001".into()
    } else {
        let s = format!("{p:.3}");
        format!("p = {}", s.strip_prefix('0').unwrap_or(&s))
    }
}

fn format_df(df: f64) -> String {
    if df.fract() == 0.0 { format!("{df:.0}") } else { format!("{df:.2}") }
}

/// Formats as `t(8) = 3.15, p = .016`.
impl std::fmt::Display for TTest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "t({}) = {:.2}, {}", format_df(self.df), self.t, format_p(self.p))
    }
}

/// Paired t-test of `a` against `b`.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("paired samples differ in length ({} vs {})", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::invalid("paired t-test needs at least two pairs"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let sd = sample_sd(&d).unwrap_or(0.0);
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::DegenerateStatistic("paired differences have zero variance".into()));
    }
    let n = d.len() as f64;
    let t = mean(&d) / (sd / n.sqrt());
    let df = n - 1.0;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::DegenerateStatistic(e.to_string()))?;
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(TTest { t, df, p })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaEffect {
    pub ss: f64,
    pub df: f64,
    pub f: f64,
    pub p: f64,
}

/// Fixed-effects two-way ANOVA table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub factor_a: AnovaEffect,
    pub factor_b: AnovaEffect,
    pub interaction: AnovaEffect,
    pub ss_within: f64,
    pub df_within: f64,
    pub ss_total: f64,
}

impl AnovaTable {
    /// Formats one effect as `F(1, 48) = 7.89, p = .008`.
    pub fn describe(&self, effect: &AnovaEffect) -> String {
        format!("F({}, {}) = {:.2}, {}", format_df(effect.df), format_df(self.df_within), effect.f, format_p(effect.p))
    }
}

/// Two-way ANOVA over `(a level, b level, value)` observations. The design
/// must be complete and balanced with at least two observations per cell.
pub fn two_way_anova<A: Ord + Clone, B: Ord + Clone>(obs: &[(A, B, f64)]) -> Result<AnovaTable> {
    let mut cells: BTreeMap<(A, B), Vec<f64>> = BTreeMap::new();
    let mut a_levels: BTreeMap<A, usize> = BTreeMap::new();
    let mut b_levels: BTreeMap<B, usize> = BTreeMap::new();
    for (a, b, v) in obs {
        if !v.is_finite() {
            return Err(Error::invalid("non-finite observation"));
        }
        cells.entry((a.clone(), b.clone())).or_default().push(*v);
        let na = a_levels.len();
        a_levels.entry(a.clone()).or_insert(na);
        let nb = b_levels.len();
        b_levels.entry(b.clone()).or_insert(nb);
    }
    let (ka, kb) = (a_levels.len(), b_levels.len());
    if ka < 2 || kb < 2 {
        return Err(Error::UnsupportedDesign("each factor needs at least two levels".into()));
    }
    if cells.len() != ka * kb {
        return Err(Error::UnsupportedDesign(format!("{} of {} cells are empty", ka * kb - cells.len(), ka * kb)));
    }
    let n = cells.values().next().map_or(0, Vec::len);
    if cells.values().any(|c| c.len() != n) {
        return Err(Error::UnsupportedDesign("unequal cell counts".into()));
    }
    if n < 2 {
        return Err(Error::DegenerateStatistic("one observation per cell leaves no within-cell error".into()));
    }

    let all: Vec<f64> = obs.iter().map(|o| o.2).collect();
    let grand = mean(&all);
    let cell_mean: BTreeMap<&(A, B), f64> = cells.iter().map(|(k, v)| (k, mean(v))).collect();
    let mut a_mean: BTreeMap<&A, f64> = BTreeMap::new();
    let mut b_mean: BTreeMap<&B, f64> = BTreeMap::new();
    for ((a, b), m) in &cell_mean {
        *a_mean.entry(a).or_default() += m / kb as f64;
        *b_mean.entry(b).or_default() += m / ka as f64;
    }
    let nf = n as f64;
    let ss_a = nf * kb as f64 * a_mean.values().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_b = nf * ka as f64 * b_mean.values().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_ab = nf
        * cell_mean
            .iter()
            .map(|((a, b), m)| (m - a_mean[a] - b_mean[b] + grand).powi(2))
            .sum::<f64>();
    let ss_within: f64 = cells
        .iter()
        .map(|(k, v)| {
            let m = cell_mean[k];
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        })
        .sum();
    let ss_total: f64 = all.iter().map(|x| (x - grand).powi(2)).sum();

    let df_within = (ka * kb * (n - 1)) as f64;
    let ms_within = ss_within / df_within;
    if ms_within == 0.0 {
        return Err(Error::DegenerateStatistic("zero within-cell variance".into()));
    }
    let effect = |ss: f64, df: f64| -> Result<AnovaEffect> {
        let f = (ss / df) / ms_within;
        let dist = FisherSnedecor::new(df, df_within).map_err(|e| Error::DegenerateStatistic(e.to_string()))?;
        Ok(AnovaEffect { ss, df, f, p: dist.sf(f) })
    };
    Ok(AnovaTable {
        factor_a: effect(ss_a, (ka - 1) as f64)?,
        factor_b: effect(ss_b, (kb - 1) as f64)?,
        interaction: effect(ss_ab, ((ka - 1) * (kb - 1)) as f64)?,
        ss_within,
        df_within,
        ss_total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialTimeStats {
    pub condition: Condition,
    pub trials: usize,
    pub mean_s: f64,
    /// Sample SD; 0 for a single trial.
    pub sd_s: f64,
}

/// Response-time summary per condition, in seconds.
pub fn trial_time_stats(records: &[TrialRecord]) -> Vec<TrialTimeStats> {
    let mut by: BTreeMap<Condition, Vec<f64>> = BTreeMap::new();
    for r in records {
        by.entry(r.condition).or_default().push(r.rt_ms as f64 / 1000.0);
    }
    by.into_iter()
        .map(|(condition, xs)| TrialTimeStats {
            condition,
            trials: xs.len(),
            mean_s: mean(&xs),
            sd_s: sample_sd(&xs).unwrap_or(0.0),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::testutil::record;
    use crate::experiment::Outcome;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn paired_t_hand_example() {
        let t = paired_t(&[1.0, 2.0, 3.0, 4.0], &[0.0, 2.0, 2.0, 4.0]).unwrap();
        assert!((t.t - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(t.df, 3.0);
        // df = 3: F(t) = 1/2 + (θ + sin θ cos θ) / π with θ = atan(t / √3) = π/4.
        let want = 2.0 * (0.5 - (std::f64::consts::FRAC_PI_4 + 0.5) / std::f64::consts::PI);
        assert!((t.p - want).abs() < 1e-9, "{} vs {want}", t.p);
        assert!(matches!(paired_t(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::DegenerateStatistic(_))));
        assert!(paired_t(&[1.0], &[0.0]).is_err());
        assert!(paired_t(&[1.0, 2.0], &[0.0]).is_err());
    }

    #[test]
    fn report_formatting() {
        assert_eq!(TTest { t: 3.1504, df: 8.0, p: 0.0162 }.to_string(), "t(8) = 3.15, p = .016");
        assert_eq!(TTest { t: -2.0, df: 7.5, p: 0.0004 }.to_string(), "t(7.50) = -2.00, p < .001");
        assert_eq!(format_p(1.0), "p = 1.000");
        let e = AnovaEffect { ss: 1.0, df: 1.0, f: 7.891, p: 0.0076 };
        let table = AnovaTable { factor_a: e, factor_b: e, interaction: e, ss_within: 1.0, df_within: 48.0, ss_total: 4.0 };
        assert_eq!(table.describe(&table.factor_a), "F(1, 48) = 7.89, p = .008");
    }

    #[test]
    fn paired_t_p_closed_form_df1() {
        // df = 1 is Cauchy: two-sided p = 1 - 2 atan(|t|) / pi.
        let t = paired_t(&[3.0, 1.0], &[0.0, 0.0]).unwrap();
        let want = 1.0 - 2.0 * t.t.abs().atan() / std::f64::consts::PI;
        assert!((t.p - want).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn paired_t_antisymmetric(pairs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..20)) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let (Ok(ab), Ok(ba)) = (paired_t(&a, &b), paired_t(&b, &a)) {
                prop_assert!((ab.t + ba.t).abs() <= 1e-9 * ab.t.abs().max(1.0));
                prop_assert!((ab.p - ba.p).abs() < 1e-12);
            }
        }

        #[test]
        fn anova_decomposes(seed in any::<u64>(), n in 2usize..6, ka in 2usize..4, kb in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let obs: Vec<(usize, usize, f64)> = (0..ka)
                .flat_map(|a| (0..kb).flat_map(move |b| (0..n).map(move |_| (a, b))))
                .map(|(a, b)| (a, b, rng.random_range(-10.0..10.0) + a as f64))
                .collect();
            let t = two_way_anova(&obs).unwrap();
            let sum = t.factor_a.ss + t.factor_b.ss + t.interaction.ss + t.ss_within;
            prop_assert!((sum - t.ss_total).abs() <= 1e-9 * t.ss_total);
        }
    }

    fn design(rng: &mut ChaCha8Rng, effect_a: f64, n: usize) -> Vec<(u8, u8, f64)> {
        let mut obs = Vec::new();
        for a in 0..2u8 {
            for b in 0..3u8 {
                for _ in 0..n {
                    // Sum of uniforms: roughly normal noise with variance 1.
                    let noise: f64 = (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0;
                    obs.push((a, b, effect_a * a as f64 + noise));
                }
            }
        }
        obs
    }

    #[test]
    fn anova_null_p_is_uniform_on_average() {
        let mut sum = [0.0; 2];
        for seed in 0..1000 {
            let t = two_way_anova(&design(&mut ChaCha8Rng::seed_from_u64(seed), 0.0, 9)).unwrap();
            sum[0] += t.factor_a.p;
            sum[1] += t.factor_b.p;
        }
        for s in sum {
            assert!((s / 1000.0 - 0.5).abs() < 0.05, "{}", s / 1000.0);
        }
    }

    #[test]
    fn anova_main_effect_only() {
        // With effect d on A (two levels, 27 obs each), E[SS_A] = 54 (d/2)^2 + 1.
        let mut fa = 0.0;
        let mut fab = 0.0;
        for seed in 0..200 {
            let t = two_way_anova(&design(&mut ChaCha8Rng::seed_from_u64(seed), 2.0, 9)).unwrap();
            fa += t.factor_a.f;
            fab += t.interaction.f;
        }
        let (fa, fab) = (fa / 200.0, fab / 200.0);
        // E[F] for a non-central effect ~ (54 + 1) * 48 / 46 under the unit-variance noise.
        assert!((fa - 55.0 * 48.0 / 46.0).abs() < 8.0, "{fa}");
        // Null F(2, 48) has mean 48 / 46.
        assert!((fab - 48.0 / 46.0).abs() < 0.2, "{fab}");
    }

    #[test]
    fn anova_rejects_unbalanced() {
        let mut obs = design(&mut ChaCha8Rng::seed_from_u64(1), 0.0, 3);
        obs.pop();
        assert!(matches!(two_way_anova(&obs), Err(Error::UnsupportedDesign(_))));
        let one_level: Vec<_> = obs.iter().filter(|o| o.0 == 0).cloned().collect();
        assert!(matches!(two_way_anova(&one_level), Err(Error::UnsupportedDesign(_))));
    }

    #[test]
    fn trial_time_examples() {
        let mut r = record("s", Outcome::TruePositive, 0);
        r.rt_ms = 2000;
        let s = trial_time_stats(&[r.clone()]);
        assert_eq!((s[0].mean_s, s[0].sd_s), (2.0, 0.0));
        let mut a = r.clone();
        a.rt_ms = 1000;
        let mut b = r;
        b.rt_ms = 3000;
        let s = trial_time_stats(&[a, b]);
        assert_eq!(s[0].mean_s, 2.0);
        assert!((s[0].sd_s - 2f64.sqrt()).abs() < 1e-12);
    }
}
