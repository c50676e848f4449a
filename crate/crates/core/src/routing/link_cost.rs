//! Adaptive link cost from the M/M/1 utilization measure `1 - t/d`, where `d`
//! is the mean packet delay (queueing plus transmission) and `t` the mean
//! transmission time observed on the link over a window.

pub const MIN_COST: u8 = 1;
pub const MAX_COST: u8 = 20;
const SLOPE: f64 = 20.0;
const EXP_DECAY: f64 = 0.9;
const WINDOW_WEIGHT: f64 = 0.5;

/// Utilization measure for one window, clamped into [0, 1].
pub fn utilization(mean_tx: f64, mean_delay: f64) -> f64 {
    if mean_delay <= 0.0 {
        return 0.0;
    }
    (1.0 - mean_tx / mean_delay).clamp(0.0, 1.0)
}

/// Maps a raw measure onto the discrete scale, moving at most one step from
/// `previous`.
pub fn discretize(raw: f64, previous: u8) -> u8 {
    let target = (1.0 + SLOPE * raw).round().clamp(MIN_COST as f64, MAX_COST as f64) as u8;
    target.clamp(previous.saturating_sub(1).max(MIN_COST), (previous + 1).min(MAX_COST))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkCostEstimator {
    sum_delay: f64,
    sum_tx: f64,
    samples: u64,
    exp_mean: Option<f64>,
    cost: u8,
}

impl Default for LinkCostEstimator {
    fn default() -> Self {
        LinkCostEstimator {
            sum_delay: 0.0,
            sum_tx: 0.0,
            samples: 0,
            exp_mean: None,
            cost: MIN_COST,
        }
    }
}

impl LinkCostEstimator {
    pub fn record(&mut self, delay: f64, tx_time: f64) {
        self.sum_delay += delay;
        self.sum_tx += tx_time;
        self.samples += 1;
    }

    pub fn cost(&self) -> u8 {
        self.cost
    }

    /// Ends the current window and returns the updated discrete cost. A window
    /// without samples leaves the cost unchanged.
    pub fn close_window(&mut self) -> u8 {
        if self.samples == 0 {
            return self.cost;
        }
        let n = self.samples as f64;
        let m = utilization(self.sum_tx / n, self.sum_delay / n);
        let exp = match self.exp_mean {
            Some(e) => EXP_DECAY * e + (1.0 - EXP_DECAY) * m,
            None => m,
        };
        self.exp_mean = Some(exp);
        let raw = WINDOW_WEIGHT * m + (1.0 - WINDOW_WEIGHT) * exp;
        self.cost = discretize(raw, self.cost);
        self.sum_delay = 0.0;
        self.sum_tx = 0.0;
        self.samples = 0;
        self.cost
    }
}
