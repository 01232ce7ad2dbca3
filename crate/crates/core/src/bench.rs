//! Pieces of the timing comparison that do not depend on a random source:
//! scenario shapes, matched-budget rank selection and summary statistics.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hosvd::hosvd_storage_cost;

/// Standard image shapes plus a custom `HxWxC`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scenario {
    Hd,
    FullHd,
    TwoK,
    Qhd,
    QkUhd,
    Fk,
    Sk,
    Ek,
    Custom(Vec<usize>),
}

impl Scenario {
    /// Scenarios run when none is named.
    pub const DESK_DEFAULT: [Scenario; 2] = [Scenario::Hd, Scenario::FullHd];

    pub fn dims(&self) -> Vec<usize> {
        match self {
            Self::Hd => vec![1280, 720, 3],
            Self::FullHd => vec![1920, 1080, 3],
            Self::TwoK => vec![2048, 1080, 3],
            Self::Qhd => vec![2560, 1440, 3],
            Self::QkUhd => vec![3840, 2160, 3],
            Self::Fk => vec![5120, 2880, 3],
            Self::Sk => vec![6144, 3456, 3],
            Self::Ek => vec![7680, 4320, 3],
            Self::Custom(d) => d.clone(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Hd => "HD".into(),
            Self::FullHd => "FullHD".into(),
            Self::TwoK => "TwoK".into(),
            Self::Qhd => "QHD".into(),
            Self::QkUhd => "QKUHD".into(),
            Self::Fk => "FK".into(),
            Self::Sk => "SK".into(),
            Self::Ek => "EK".into(),
            Self::Custom(d) => d.iter().map(usize::to_string).collect::<Vec<_>>().join("x"),
        }
    }

    pub fn all_standard() -> Vec<Scenario> {
        vec![
            Self::Hd,
            Self::FullHd,
            Self::TwoK,
            Self::Qhd,
            Self::QkUhd,
            Self::Fk,
            Self::Sk,
            Self::Ek,
        ]
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Ok(match lower.as_str() {
            "hd" => Self::Hd,
            "fullhd" => Self::FullHd,
            "twok" | "2k" => Self::TwoK,
            "qhd" | "4hd" => Self::Qhd,
            "qkuhd" => Self::QkUhd,
            "fk" => Self::Fk,
            "sk" => Self::Sk,
            "ek" => Self::Ek,
            custom => {
                let body = custom.strip_prefix("custom").unwrap_or(custom);
                let body = body.trim_start_matches([':', '=', ' ']);
                let dims: Option<Vec<usize>> = body
                    .split('x')
                    .map(|p| p.trim().parse().ok().filter(|&d| d > 0))
                    .collect();
                match dims {
                    Some(d) if !d.is_empty() && !body.is_empty() => Self::Custom(d),
                    _ => {
                        return Err(Error::InvalidShape {
                            dims: vec![],
                            reason: format!("unknown scenario {s:?}"),
                        })
                    }
                }
            }
        })
    }
}

/// Ranks `r_n = ⌈α·I_n⌉` (modes of size 3 keep rank 3) with the largest `α`
/// whose storage cost stays within `fraction` of the element count.
pub fn ranks_for_budget(dims: &[usize], fraction: f64) -> Result<Vec<usize>> {
    let total: u64 = dims.iter().map(|&d| d as u64).product();
    let budget = (fraction * total as f64).floor() as u64;
    let ranks_at = |alpha: f64| -> Vec<usize> {
        dims.iter()
            .map(|&d| {
                if d == 3 {
                    3
                } else {
                    ((alpha * d as f64).ceil() as usize).clamp(1, d)
                }
            })
            .collect()
    };
    let fits = |alpha: f64| hosvd_storage_cost(dims, &ranks_at(alpha)) <= budget;
    if !fits(0.0) {
        return Err(Error::InfeasibleBudget {
            requested: fraction,
            minimum: hosvd_storage_cost(dims, &ranks_at(0.0)) as f64 / total as f64,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if fits(hi) {
        return Ok(ranks_at(hi));
    }
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ranks_at(lo))
}

/// `min / lq / mean / median / uq / max` of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub min: f64,
    pub lq: f64,
    pub mean: f64,
    pub median: f64,
    pub uq: f64,
    pub max: f64,
}

impl SummaryStats {
    /// Quartiles by linear interpolation between order statistics
    /// (`h = (n − 1)·p`).
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = (s.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            s[lo] + (h - lo as f64) * (s[hi] - s[lo])
        };
        Some(Self {
            min: s[0],
            lq: q(0.25),
            mean: s.iter().sum::<f64>() / s.len() as f64,
            median: q(0.5),
            uq: q(0.75),
            max: s[s.len() - 1],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_parsing() {
        assert_eq!("hd".parse::<Scenario>().unwrap(), Scenario::Hd);
        assert_eq!(
            "EK".parse::<Scenario>().unwrap().dims(),
            vec![7680, 4320, 3]
        );
        assert_eq!(
            "custom 64x48x3".parse::<Scenario>().unwrap(),
            Scenario::Custom(vec![64, 48, 3])
        );
        assert_eq!("32x16x3".parse::<Scenario>().unwrap().label(), "32x16x3");
        assert!("bogus".parse::<Scenario>().is_err());
        assert!("custom".parse::<Scenario>().is_err());
        assert!("4x0x3".parse::<Scenario>().is_err());
    }

    #[test]
    fn single_sample_statistics() {
        let s = SummaryStats::from_samples(&[2.5]).unwrap();
        assert_eq!(
            (s.min, s.lq, s.mean, s.median, s.uq, s.max),
            (2.5, 2.5, 2.5, 2.5, 2.5, 2.5)
        );
        assert!(SummaryStats::from_samples(&[]).is_none());
    }

    #[test]
    fn quartiles_interpolate() {
        let s = SummaryStats::from_samples(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.lq, 1.75);
        assert_eq!(s.uq, 3.25);
        assert_eq!(s.mean, 2.5);
    }

    #[test]
    fn budget_ranks_fit_and_keep_channels() {
        let dims = [880, 1240, 3];
        let ranks = ranks_for_budget(&dims, 0.166).unwrap();
        assert_eq!(ranks[2], 3);
        let cost = hosvd_storage_cost(&dims, &ranks);
        assert!(cost as f64 <= 0.166 * 3_273_600.0);
        // one more step of α would overshoot
        let bigger: Vec<usize> = ranks
            .iter()
            .zip(dims)
            .map(|(&r, d)| if d == 3 { 3 } else { r + 1 })
            .collect();
        assert!(hosvd_storage_cost(&dims, &bigger) as f64 > 0.166 * 3_273_600.0);
    }
}
