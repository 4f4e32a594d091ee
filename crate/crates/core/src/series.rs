//! Time-series data model and the transformations applied before analysis:
//! log returns, the mean-centred profile, shuffled surrogates, period
//! splitting and threshold filtering of extreme returns.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MfdfaError, Result};

/// Dated sequence of strictly positive exchange rates.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(MfdfaError::InvalidInput(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if values.len() < 2 {
            return Err(MfdfaError::InvalidInput(
                "price series needs at least 2 observations".into(),
            ));
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(MfdfaError::InvalidInput(format!(
                    "dates not strictly increasing at {}",
                    w[1]
                )));
            }
        }
        for (d, &v) in dates.iter().zip(&values) {
            if !(v.is_finite() && v > 0.0) {
                return Err(MfdfaError::InvalidInput(format!(
                    "non-positive price {v} on {d}"
                )));
            }
        }
        Ok(Self { dates, values })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Where a return series came from. A series carries the full chain of
/// manipulations, oldest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Original,
    Surrogate { seed: u64 },
    ThresholdFiltered { k: f64 },
    Period { label: String },
}

/// Log-return series `x(i)`, the unit of every analysis.
///
/// Dates are optional so that arbitrary 1-D inputs (synthetic series,
/// arrays handed over the C ABI) need not invent a calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    dates: Option<Vec<NaiveDate>>,
    values: Vec<f64>,
    provenance: Vec<Provenance>,
}

impl ReturnSeries {
    /// Undated series tagged as original.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        Ok(Self {
            dates: None,
            values,
            provenance: vec![Provenance::Original],
        })
    }

    pub fn with_dates(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(MfdfaError::InvalidInput(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
            return Err(MfdfaError::InvalidInput(format!(
                "dates not strictly increasing at {}",
                w[1]
            )));
        }
        check_finite(&values)?;
        Ok(Self {
            dates: Some(dates),
            values,
            provenance: vec![Provenance::Original],
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dates(&self) -> Option<&[NaiveDate]> {
        self.dates.as_deref()
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Concatenates two series; both must be dated (or both undated).
    /// Provenance of `self` is kept.
    pub fn concat(&self, other: &ReturnSeries) -> Result<ReturnSeries> {
        let dates = match (&self.dates, &other.dates) {
            (Some(a), Some(b)) => {
                if let (Some(last), Some(first)) = (a.last(), b.first()) {
                    if first <= last {
                        return Err(MfdfaError::InvalidInput(
                            "concatenated series overlap in time".into(),
                        ));
                    }
                }
                Some(a.iter().chain(b).copied().collect())
            }
            (None, None) => None,
            _ => {
                return Err(MfdfaError::InvalidInput(
                    "cannot concatenate dated and undated series".into(),
                ))
            }
        };
        Ok(ReturnSeries {
            dates,
            values: self.values.iter().chain(&other.values).copied().collect(),
            provenance: self.provenance.clone(),
        })
    }

    fn derived(&self, values: Vec<f64>, step: Provenance) -> ReturnSeries {
        let mut provenance = self.provenance.clone();
        provenance.push(step);
        ReturnSeries {
            dates: self.dates.clone(),
            values,
            provenance,
        }
    }

    /// Index-range restriction, used by the period split.
    fn slice(&self, range: std::ops::Range<usize>, label: &str) -> ReturnSeries {
        let mut provenance = self.provenance.clone();
        provenance.push(Provenance::Period {
            label: label.to_string(),
        });
        ReturnSeries {
            dates: self.dates.as_ref().map(|d| d[range.clone()].to_vec()),
            values: self.values[range].to_vec(),
            provenance,
        }
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(MfdfaError::InvalidInput(format!(
            "non-finite value at index {i}"
        ))),
        None => Ok(()),
    }
}

/// `r(t) = ln P(t) - ln P(t-1)`, dated on the later day.
pub fn log_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    // positivity is a PriceSeries invariant
    let values: Vec<f64> = prices
        .values
        .windows(2)
        .map(|w| w[1].ln() - w[0].ln())
        .collect();
    ReturnSeries::with_dates(prices.dates[1..].to_vec(), values)
}

/// Cumulative sum of the mean-centred series.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    values: Vec<f64>,
    source_mean: f64,
}

impl Profile {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source_mean(&self) -> f64 {
        self.source_mean
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Wraps raw profile values, for callers that build `y(i)` themselves.
    pub fn from_raw(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(MfdfaError::InvalidInput("empty profile".into()));
        }
        check_finite(&values)?;
        Ok(Self {
            values,
            source_mean: 0.0,
        })
    }
}

/// `y(i) = sum_{k<=i} (x(k) - mean)`.
pub fn build_profile(x: &ReturnSeries) -> Result<Profile> {
    profile_of(x.values())
}

pub(crate) fn profile_of(x: &[f64]) -> Result<Profile> {
    if x.is_empty() {
        return Err(MfdfaError::InvalidInput(
            "cannot build the profile of an empty series".into(),
        ));
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let mut acc = 0.0;
    let values = x
        .iter()
        .map(|&v| {
            acc += v - mean;
            acc
        })
        .collect();
    Ok(Profile {
        values,
        source_mean: mean,
    })
}

/// Uniformly random permutation of the values (Fisher-Yates driven by
/// ChaCha8 seeded from `seed`). Dates stay in place; only values move.
pub fn shuffle_surrogate(x: &ReturnSeries, seed: u64) -> ReturnSeries {
    let mut values = x.values.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..values.len()).rev() {
        let j = rng.random_range(0..=i);
        values.swap(i, j);
    }
    x.derived(values, Provenance::Surrogate { seed })
}

/// True when every value is identical (including the empty case).
pub fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Indices with `|x(i)| > k * sigma`, with sigma the sample standard
/// deviation of the full input.
pub fn threshold_exceedances(x: &[f64], k: f64) -> Vec<usize> {
    let limit = k * sample_std(x);
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > limit)
        .map(|(i, _)| i)
        .collect()
}

/// Replaces every return whose magnitude exceeds `k` sample standard
/// deviations by linear interpolation (in index space) between the nearest
/// surviving neighbours. Runs touching either end take the value of the
/// nearest survivor.
pub fn threshold_filter(x: &ReturnSeries, k: f64) -> Result<ReturnSeries> {
    if !(k.is_finite() && k > 0.0) {
        return Err(MfdfaError::Config(format!(
            "threshold k must be a positive real, got {k}"
        )));
    }
    if x.len() < 3 {
        return Err(MfdfaError::InvalidInput(format!(
            "threshold filter needs at least 3 points, got {}",
            x.len()
        )));
    }
    let removed = threshold_exceedances(&x.values, k);
    if removed.len() == x.len() {
        return Err(MfdfaError::Numerical(format!(
            "threshold k = {k} eliminates every point"
        )));
    }
    let mut keep = vec![true; x.len()];
    for &i in &removed {
        keep[i] = false;
    }

    let src = &x.values;
    let mut out = src.clone();
    let mut prev: Option<usize> = None;
    let mut i = 0;
    while i < src.len() {
        if keep[i] {
            prev = Some(i);
            i += 1;
            continue;
        }
        let start = i;
        while i < src.len() && !keep[i] {
            i += 1;
        }
        let next = (i < src.len()).then_some(i);
        for (j, slot) in out.iter_mut().enumerate().take(i).skip(start) {
            *slot = match (prev, next) {
                (Some(p), Some(n)) => {
                    let t = (j - p) as f64 / (n - p) as f64;
                    src[p] + t * (src[n] - src[p])
                }
                (Some(p), None) => src[p],
                (None, Some(n)) => src[n],
                (None, None) => unreachable!("at least one survivor exists"),
            };
        }
    }
    Ok(x.derived(out, Provenance::ThresholdFiltered { k }))
}

/// Before/after partition of a dated series. Dates `<= pre_end` form period
/// A, dates `>= post_start` period B; everything strictly between is excised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodSplit {
    pub pre_end: NaiveDate,
    pub post_start: NaiveDate,
}

impl Default for PeriodSplit {
    /// A = ..=1996-12-31, excised 1997, B = 1998-01-01..
    fn default() -> Self {
        Self::excising_year(1997).expect("1997 is a valid year")
    }
}

impl PeriodSplit {
    pub fn new(pre_end: NaiveDate, post_start: NaiveDate) -> Result<Self> {
        if post_start <= pre_end {
            return Err(MfdfaError::Config(format!(
                "post-period start {post_start} must come after pre-period end {pre_end}"
            )));
        }
        Ok(Self {
            pre_end,
            post_start,
        })
    }

    /// Removes exactly one calendar year.
    pub fn excising_year(year: i32) -> Result<Self> {
        let bad = || MfdfaError::Config(format!("invalid excision year {year}"));
        let pre_end = NaiveDate::from_ymd_opt(year - 1, 12, 31).ok_or_else(bad)?;
        let post_start = NaiveDate::from_ymd_opt(year + 1, 1, 1).ok_or_else(bad)?;
        Self::new(pre_end, post_start)
    }

    /// Index ranges `(A, B)` into sorted `dates`.
    pub fn partition(&self, dates: &[NaiveDate]) -> Result<(std::ops::Range<usize>, std::ops::Range<usize>)> {
        let a_end = dates.partition_point(|d| *d <= self.pre_end);
        let b_start = dates.partition_point(|d| *d < self.post_start);
        match (a_end == 0, b_start == dates.len()) {
            (true, true) => Err(MfdfaError::InvalidInput(format!(
                "both periods are empty (no dates <= {} and none >= {})",
                self.pre_end, self.post_start
            ))),
            (true, false) => Err(MfdfaError::InvalidInput(format!(
                "period A is empty (no dates <= {})",
                self.pre_end
            ))),
            (false, true) => Err(MfdfaError::InvalidInput(format!(
                "period B is empty (no dates >= {})",
                self.post_start
            ))),
            (false, false) => Ok((0..a_end, b_start..dates.len())),
        }
    }
}

/// Splits a dated return series into the before (A) and after (B) periods.
pub fn split_periods(x: &ReturnSeries, split: &PeriodSplit) -> Result<(ReturnSeries, ReturnSeries)> {
    let dates = x.dates().ok_or_else(|| {
        MfdfaError::InvalidInput("period split requires a dated series".into())
    })?;
    let (a, b) = split.partition(dates)?;
    Ok((x.slice(a, "A"), x.slice(b, "B")))
}

/// Splits prices before differencing, so no return straddles the excised
/// window. Each side must keep at least 2 prices.
pub fn split_prices(p: &PriceSeries, split: &PeriodSplit) -> Result<(PriceSeries, PriceSeries)> {
    let (a, b) = split.partition(&p.dates)?;
    let side = |r: std::ops::Range<usize>, label: &str| {
        PriceSeries::new(p.dates[r.clone()].to_vec(), p.values[r].to_vec()).map_err(|_| {
            MfdfaError::InvalidInput(format!("period {label} has fewer than 2 prices"))
        })
    };
    Ok((side(a, "A")?, side(b, "B")?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn daily(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
        start.iter_days().take(n).collect()
    }

    fn prices(values: &[f64]) -> PriceSeries {
        PriceSeries::new(daily(d(2000, 1, 1), values.len()), values.to_vec()).unwrap()
    }

    #[test]
    fn constant_price_gives_zero_returns() {
        let r = log_returns(&prices(&[3.5; 4])).unwrap();
        assert_eq!(r.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn exponential_prices_give_unit_returns() {
        let e = std::f64::consts::E;
        let r = log_returns(&prices(&[1.0, e, e * e])).unwrap();
        for v in r.values() {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn log_return_of_one_percent_move() {
        // ln(1.01) to 20 digits: 0.0099503308531680828...
        let r = log_returns(&prices(&[100.0, 101.0])).unwrap();
        assert!((r.values()[0] - 0.009_950_330_853_168_083).abs() < 1e-15);
    }

    #[test]
    fn returns_are_dated_on_later_day() {
        let p = prices(&[1.0, 2.0, 3.0]);
        let r = log_returns(&p).unwrap();
        assert_eq!(r.dates().unwrap(), &p.dates()[1..]);
        assert_eq!(r.len(), p.len() - 1);
    }

    #[test]
    fn non_positive_price_names_date() {
        let err = PriceSeries::new(daily(d(2001, 3, 4), 3), vec![1.0, 0.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("2001-03-05"), "{err}");
        let err = PriceSeries::new(daily(d(2001, 3, 4), 2), vec![1.0, -2.0]).unwrap_err();
        assert!(err.to_string().contains("2001-03-05"), "{err}");
    }

    #[test]
    fn price_series_rejects_unsorted_dates() {
        let err = PriceSeries::new(vec![d(2000, 1, 2), d(2000, 1, 1)], vec![1.0, 1.0]);
        assert!(err.is_err());
        assert!(PriceSeries::new(vec![d(2000, 1, 2)], vec![1.0]).is_err());
    }

    #[test]
    fn profile_hand_examples() {
        let p = profile_of(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(p.values(), &[0.0, 0.0, 0.0]);

        let p = profile_of(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(p.values(), &[1.0, 0.0, 1.0, 0.0]);

        let p = profile_of(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.source_mean(), 2.0);
        assert_eq!(p.values(), &[-1.0, -1.0, 0.0]);
    }

    #[test]
    fn empty_profile_is_error() {
        assert!(profile_of(&[]).is_err());
    }

    #[test]
    fn shuffle_single_point_is_identity() {
        let x = ReturnSeries::from_values(vec![0.25]).unwrap();
        assert_eq!(shuffle_surrogate(&x, 99).values(), &[0.25]);
    }

    #[test]
    fn shuffle_records_seed() {
        let x = ReturnSeries::from_values(vec![1.0, 2.0, 3.0]).unwrap();
        let s = shuffle_surrogate(&x, 7);
        assert_eq!(
            s.provenance(),
            &[Provenance::Original, Provenance::Surrogate { seed: 7 }]
        );
    }

    #[test]
    fn different_seeds_give_different_orderings() {
        let x = ReturnSeries::from_values((0..1000).map(|i| i as f64).collect()).unwrap();
        let a = shuffle_surrogate(&x, 1);
        let b = shuffle_surrogate(&x, 2);
        assert_ne!(a.values(), b.values());
        assert_ne!(a.values(), x.values());
    }

    #[test]
    fn threshold_no_op_when_nothing_exceeds() {
        let x = ReturnSeries::from_values(vec![0.1, -0.3, 0.2, 0.05, -0.1]).unwrap();
        let max = x.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let k = max / sample_std(x.values()) + 1e-9;
        assert_eq!(threshold_filter(&x, k).unwrap().values(), x.values());
    }

    #[test]
    fn threshold_interpolates_between_equal_neighbours() {
        // sigma = sqrt(20) ~ 4.47; k = 1 removes only the 10
        let x = ReturnSeries::from_values(vec![0.0, 0.0, 10.0, 0.0, 0.0]).unwrap();
        assert_eq!(threshold_exceedances(x.values(), 1.0), vec![2]);
        let y = threshold_filter(&x, 1.0).unwrap();
        assert_eq!(y.values(), &[0.0; 5]);
    }

    #[test]
    fn threshold_midpoint_interpolation() {
        // sigma = sqrt(9.7) ~ 3.11; k = 2.5 gives limit ~7.8, only the 9 goes
        let x = ReturnSeries::from_values(vec![1.0, 2.0, 9.0, 4.0, 5.0]).unwrap();
        assert_eq!(threshold_exceedances(x.values(), 2.5), vec![2]);
        let y = threshold_filter(&x, 2.5).unwrap();
        assert_eq!(y.values(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn threshold_edge_runs_take_nearest_survivor() {
        let mut v = vec![0.1; 20];
        v[0] = 50.0;
        v[1] = -50.0;
        v[19] = 40.0;
        let x = ReturnSeries::from_values(v).unwrap();
        let y = threshold_filter(&x, 1.0).unwrap();
        assert!(y.values().iter().all(|&v| v == 0.1));
    }

    #[test]
    fn threshold_interpolates_across_runs() {
        let x = ReturnSeries::from_values(vec![0.0, 0.0, 0.0, 0.0, 1.0, 30.0, -30.0, 4.0, 0.0, 0.0])
            .unwrap();
        let y = threshold_filter(&x, 1.0).unwrap();
        assert_eq!(&y.values()[4..8], &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn threshold_errors() {
        let x = ReturnSeries::from_values(vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        assert!(matches!(threshold_filter(&x, 0.0), Err(MfdfaError::Config(_))));
        assert!(matches!(threshold_filter(&x, -1.0), Err(MfdfaError::Config(_))));
        // every |x| = 1 > 0.5 * sigma
        assert!(matches!(threshold_filter(&x, 0.5), Err(MfdfaError::Numerical(_))));
        let short = ReturnSeries::from_values(vec![1.0, 2.0]).unwrap();
        assert!(threshold_filter(&short, 1.0).is_err());
    }

    fn dated_returns(start: NaiveDate, end: NaiveDate) -> ReturnSeries {
        let dates: Vec<NaiveDate> = start.iter_days().take_while(|x| *x <= end).collect();
        let values = (0..dates.len()).map(|i| (i as f64).sin()).collect();
        ReturnSeries::with_dates(dates, values).unwrap()
    }

    #[test]
    fn default_split_removes_1997() {
        let x = dated_returns(d(1991, 1, 2), d(2005, 12, 30));
        let (a, b) = split_periods(&x, &PeriodSplit::default()).unwrap();
        let ad = a.dates().unwrap();
        let bd = b.dates().unwrap();
        assert_eq!(ad[0], d(1991, 1, 2));
        assert_eq!(*ad.last().unwrap(), d(1996, 12, 31));
        assert_eq!(bd[0], d(1998, 1, 1));
        assert_eq!(*bd.last().unwrap(), d(2005, 12, 30));
        use chrono::Datelike;
        assert!(ad.iter().chain(bd).all(|d| d.year() != 1997));
        assert_eq!(a.len() + b.len() + 365, x.len());
    }

    #[test]
    fn split_inside_excision_year_fails() {
        let x = dated_returns(d(1997, 2, 1), d(1997, 11, 30));
        let err = split_periods(&x, &PeriodSplit::default()).unwrap_err();
        assert!(err.to_string().contains("both"), "{err}");
    }

    #[test]
    fn split_names_empty_side() {
        let x = dated_returns(d(1998, 2, 1), d(1999, 1, 1));
        let err = split_periods(&x, &PeriodSplit::default()).unwrap_err();
        assert!(err.to_string().contains("period A"), "{err}");
        let x = dated_returns(d(1995, 2, 1), d(1997, 3, 1));
        let err = split_periods(&x, &PeriodSplit::default()).unwrap_err();
        assert!(err.to_string().contains("period B"), "{err}");
    }

    #[test]
    fn split_without_excised_dates_is_partition() {
        let a = dated_returns(d(1995, 1, 1), d(1996, 12, 31));
        let b = dated_returns(d(1998, 1, 1), d(1998, 6, 30));
        let x = a.concat(&b).unwrap();
        let (pa, pb) = split_periods(&x, &PeriodSplit::default()).unwrap();
        assert_eq!(pa.values(), a.values());
        assert_eq!(pb.values(), b.values());
    }

    #[test]
    fn split_requires_ordered_boundaries() {
        assert!(PeriodSplit::new(d(2000, 1, 1), d(2000, 1, 1)).is_err());
        assert!(PeriodSplit::new(d(2000, 1, 1), d(2000, 1, 2)).is_ok());
    }

    #[test]
    fn split_prices_keeps_both_sides() {
        let dates: Vec<NaiveDate> = d(1996, 12, 1).iter_days().take(500).collect();
        let n = dates.len();
        let p = PriceSeries::new(dates, (0..n).map(|i| 1.0 + i as f64).collect()).unwrap();
        let (a, b) = split_prices(&p, &PeriodSplit::default()).unwrap();
        assert_eq!(a.len(), 31);
        assert_eq!(b.dates()[0], d(1998, 1, 1));
    }

    proptest! {
        #[test]
        fn profile_telescopes(x in prop::collection::vec(-1e3f64..1e3, 1..400)) {
            let p = profile_of(&x).unwrap();
            let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let tol = 1e-9 * x.len() as f64 * max.max(f64::MIN_POSITIVE);
            prop_assert!(p.values().last().unwrap().abs() <= tol);
            prop_assert_eq!(p.len(), x.len());
        }

        #[test]
        fn shuffle_preserves_multiset_and_is_deterministic(
            x in prop::collection::vec(-10.0f64..10.0, 1..300),
            seed in any::<u64>(),
        ) {
            let s = ReturnSeries::from_values(x.clone()).unwrap();
            let a = shuffle_surrogate(&s, seed);
            let b = shuffle_surrogate(&s, seed);
            prop_assert_eq!(a.values(), b.values());
            let mut sorted_in = x.clone();
            let mut sorted_out = a.values().to_vec();
            sorted_in.sort_by(f64::total_cmp);
            sorted_out.sort_by(f64::total_cmp);
            prop_assert_eq!(sorted_in, sorted_out);
        }

        #[test]
        fn threshold_eliminations_nest(
            x in prop::collection::vec(-10.0f64..10.0, 3..200),
            k1 in 0.1f64..5.0,
            dk in 0.0f64..5.0,
        ) {
            let k2 = k1 + dk;
            let e1 = threshold_exceedances(&x, k1);
            let e2 = threshold_exceedances(&x, k2);
            prop_assert!(e2.iter().all(|i| e1.contains(i)));
        }

        #[test]
        fn threshold_limit_is_identity(x in prop::collection::vec(-10.0f64..10.0, 3..200)) {
            let s = ReturnSeries::from_values(x.clone()).unwrap();
            let y = threshold_filter(&s, 1e12).unwrap();
            prop_assert_eq!(y.values(), &x[..]);
        }

        #[test]
        fn split_date_sets_partition(
            start in 0i64..6000,
            len in 10usize..3000,
            pre_year in 1992i32..2004,
        ) {
            let first = d(1988, 1, 1) + chrono::Duration::days(start);
            let dates: Vec<NaiveDate> = first.iter_days().take(len).collect();
            let x = ReturnSeries::with_dates(dates.clone(), vec![0.0; len]).unwrap();
            let split = PeriodSplit::excising_year(pre_year).unwrap();
            if let Ok((a, b)) = split_periods(&x, &split) {
                let ad = a.dates().unwrap();
                let bd = b.dates().unwrap();
                let excised: Vec<_> = dates
                    .iter()
                    .filter(|d| **d > split.pre_end && **d < split.post_start)
                    .collect();
                prop_assert_eq!(ad.len() + bd.len() + excised.len(), dates.len());
                prop_assert!(ad.iter().all(|d| *d <= split.pre_end));
                prop_assert!(bd.iter().all(|d| *d >= split.post_start));
            }
        }
    }
}
