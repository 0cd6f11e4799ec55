//! Stability statistics over a window of a load-voltage series.

use super::{EngineError, Trace};
use crate::regulatory::Band;
use crate::scalar::Real;

/// Half-open step range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: u64,
    pub end: u64,
}

impl Window {
    pub fn new(start: u64, end: u64) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> u64 {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Length of the trailing segment used for the `settled` test: the last
    /// 10% of the window, rounded up.
    pub fn settle_len(&self) -> u64 {
        self.len().div_ceil(10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics<S> {
    pub outside_band_fraction: f64,
    /// Band edges crossed between consecutive steps; jumping from below the
    /// band to above it counts twice.
    pub band_crossings: u64,
    /// Largest excursion above `v_high` (zero if never above).
    pub max_overshoot: S,
    /// Largest excursion below `v_low` (zero if never below).
    pub max_undershoot: S,
    /// Whether the load voltage stays inside the band over the last 10% of the
    /// window.
    pub settled: bool,
}

fn region<S: Real>(band: &Band<S>, v: S) -> i8 {
    if v < band.v_low {
        -1
    } else if v > band.v_high {
        1
    } else {
        0
    }
}

/// Metrics of an arbitrary load-voltage series.
pub fn series_metrics<S: Real>(
    v_load: &[S],
    band: &Band<S>,
    window: Window,
) -> Result<Metrics<S>, EngineError> {
    if window.is_empty() {
        return Err(EngineError::EmptyWindow);
    }
    if window.end > v_load.len() as u64 {
        return Err(EngineError::WindowOutOfRange {
            end: window.end,
            len: v_load.len() as u64,
        });
    }
    let slice = &v_load[window.start as usize..window.end as usize];
    let mut outside = 0u64;
    let mut crossings = 0u64;
    let mut over = S::zero();
    let mut under = S::zero();
    let mut prev: Option<i8> = None;
    for &v in slice {
        let r = region(band, v);
        if r != 0 {
            outside += 1;
        }
        if let Some(p) = prev {
            crossings += (r - p).unsigned_abs() as u64;
        }
        prev = Some(r);
        over = over.max(v - band.v_high);
        under = under.max(band.v_low - v);
    }
    let tail = window.settle_len() as usize;
    let settled = slice[slice.len() - tail..].iter().all(|v| band.contains(v));
    Ok(Metrics {
        outside_band_fraction: outside as f64 / slice.len() as f64,
        band_crossings: crossings,
        max_overshoot: over,
        max_undershoot: under,
        settled,
    })
}

pub fn compute_metrics<S: Real>(
    trace: &Trace<S>,
    band: &Band<S>,
    window: Window,
) -> Result<Metrics<S>, EngineError> {
    series_metrics(&trace.v_load_series(), band, window)
}

/// First step at or after `from` whose load voltage lies inside the band.
pub fn first_in_band<S: Real>(trace: &Trace<S>, band: &Band<S>, from: u64) -> Option<u64> {
    trace
        .steps()
        .iter()
        .enumerate()
        .skip(from as usize)
        .find(|(_, s)| band.contains(&s.v_load))
        .map(|(t, _)| t as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band() -> Band<f64> {
        Band::new(9.0, 11.0)
    }

    #[test]
    fn constant_inside() {
        let m = series_metrics(&[10.0; 50], &band(), Window::new(0, 50)).unwrap();
        assert_eq!(m.outside_band_fraction, 0.0);
        assert_eq!(m.band_crossings, 0);
        assert_eq!(m.max_overshoot, 0.0);
        assert_eq!(m.max_undershoot, 0.0);
        assert!(m.settled);
    }

    #[test]
    fn constant_below() {
        let m = series_metrics(&[8.5; 50], &band(), Window::new(0, 50)).unwrap();
        assert_eq!(m.outside_band_fraction, 1.0);
        assert_eq!(m.band_crossings, 0);
        assert_eq!(m.max_undershoot, 0.5);
        assert!(!m.settled);
    }

    #[test]
    fn crossings_and_extremes() {
        let v = [10.0, 8.0, 10.0, 12.0, 8.0, 10.0, 11.5, 10.0, 10.0, 10.0];
        let m = series_metrics(&v, &band(), Window::new(0, 10)).unwrap();
        // in->low 1, low->in 1, in->high 1, high->low 2, low->in 1, in->high 1, high->in 1
        assert_eq!(m.band_crossings, 8);
        assert_eq!(m.outside_band_fraction, 0.4);
        assert_eq!(m.max_overshoot, 1.0);
        assert_eq!(m.max_undershoot, 1.0);
        assert!(m.settled);
        // windowing ignores what happens outside
        let m = series_metrics(&v, &band(), Window::new(7, 10)).unwrap();
        assert_eq!(m.band_crossings, 0);
        assert_eq!(m.outside_band_fraction, 0.0);
    }

    #[test]
    fn settle_tail_is_last_tenth() {
        let mut v = vec![10.0; 100];
        v[89] = 8.0;
        assert!(
            series_metrics(&v, &band(), Window::new(0, 100))
                .unwrap()
                .settled
        );
        v[90] = 8.0;
        assert!(
            !series_metrics(&v, &band(), Window::new(0, 100))
                .unwrap()
                .settled
        );
        assert_eq!(Window::new(0, 5).settle_len(), 1);
    }

    #[test]
    fn window_errors() {
        assert_eq!(
            series_metrics(&[10.0; 5], &band(), Window::new(3, 3)),
            Err(EngineError::EmptyWindow)
        );
        assert_eq!(
            series_metrics(&[10.0; 5], &band(), Window::new(0, 6)),
            Err(EngineError::WindowOutOfRange { end: 6, len: 5 })
        );
    }
}
