/// Default ADC throughput of the readout chain, samples per second.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 55_936.0;

/// Frames per second when every frame costs `measurements` reads.
pub fn frame_rate(measurements: usize, sample_rate_hz: f64) -> f64 {
    assert!(measurements >= 1, "at least one measurement per frame");
    assert!(sample_rate_hz > 0.0, "sample rate must be positive");
    sample_rate_hz / measurements as f64
}

/// Duration of one frame in microseconds.
pub fn frame_time_us(measurements: usize, sample_rate_hz: f64) -> f64 {
    measurements as f64 * 1e6 / sample_rate_hz
}

/// Single-pixel acquisition clock.
///
/// The `n`-th read since `origin_us` happens at `floor(origin_us + n * 1e6 / rate)`.
/// Times are computed from the read count rather than accumulated, so frame
/// boundaries never drift from `frame_rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementClock {
    sample_rate_hz: f64,
    origin_us: f64,
    ticks: u64,
}

impl MeasurementClock {
    pub fn new(sample_rate_hz: f64) -> Self {
        Self::with_origin(sample_rate_hz, 0.0)
    }

    pub fn with_origin(sample_rate_hz: f64, origin_us: f64) -> Self {
        assert!(sample_rate_hz > 0.0 && sample_rate_hz.is_finite(), "invalid sample rate");
        assert!(origin_us >= 0.0, "clock origin must be non-negative");
        Self { sample_rate_hz, origin_us, ticks: 0 }
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn period_us(&self) -> f64 {
        1e6 / self.sample_rate_hz
    }

    /// Reads taken so far.
    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    /// Time at which the next read will happen.
    pub fn now_us(&self) -> u64 {
        self.time_of(self.ticks)
    }

    fn time_of(&self, tick: u64) -> u64 {
        (self.origin_us + tick as f64 * 1e6 / self.sample_rate_hz).floor() as u64
    }

    /// Returns the time of the current read and advances one period.
    pub fn tick(&mut self) -> u64 {
        let t = self.now_us();
        self.ticks += 1;
        t
    }
}
