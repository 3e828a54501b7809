//! Run traces: the time series a solver emits while it works.

/// One logged sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Stochastic-gradient evaluations consumed so far. Objective passes at
    /// log points and stage boundaries do not count.
    pub gradients_used: u64,
    /// Monotonic wall-clock seconds since the run started (0 when timing is
    /// suppressed for byte-reproducible output).
    pub wall_seconds: f64,
    /// Primal objective of the current running average.
    pub objective: f64,
    /// Optional task metric, e.g. test AUC.
    pub metric: Option<f64>,
    /// Stage index, 1-based; 0 for the initial record.
    pub stage: u32,
    /// Outer restart index for the adaptive solver.
    pub restart_index: Option<u32>,
}

/// An ordered trace with strictly increasing gradient counts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record. A record at the same gradient count as the last one
    /// (a stage boundary landing on a log point) replaces it, keeping counts
    /// strictly increasing.
    pub fn push(&mut self, record: TraceRecord) {
        if let Some(last) = self.records.last() {
            assert!(
                record.gradients_used >= last.gradients_used,
                "gradient counts must not decrease"
            );
            if record.gradients_used == last.gradients_used {
                *self.records.last_mut().unwrap() = record;
                return;
            }
        }
        self.records.push(record);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Smallest objective seen anywhere in the trace.
    pub fn min_objective(&self) -> Option<f64> {
        self.records
            .iter()
            .map(|r| r.objective)
            .fold(None, |acc, v| match acc {
                None => Some(v),
                Some(a) => Some(a.min(v)),
            })
    }

    /// First gradient count at which `objective - reference <= threshold`.
    pub fn gradients_to_reach(&self, reference: f64, threshold: f64) -> Option<u64> {
        self.records
            .iter()
            .find(|r| r.objective - reference <= threshold)
            .map(|r| r.gradients_used)
    }
}

impl FromIterator<TraceRecord> for RunTrace {
    fn from_iter<I: IntoIterator<Item = TraceRecord>>(iter: I) -> Self {
        let mut trace = RunTrace::new();
        for r in iter {
            trace.push(r);
        }
        trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(gradients: u64, objective: f64) -> TraceRecord {
        TraceRecord {
            gradients_used: gradients,
            wall_seconds: 0.0,
            objective,
            metric: None,
            stage: 1,
            restart_index: None,
        }
    }

    #[test]
    fn duplicate_gradient_counts_collapse() {
        let mut t = RunTrace::new();
        t.push(rec(0, 5.0));
        t.push(rec(10, 4.0));
        t.push(rec(10, 3.5));
        assert_eq!(t.len(), 2);
        assert_eq!(t.last().unwrap().objective, 3.5);
        let counts: Vec<u64> = t.records().iter().map(|r| r.gradients_used).collect();
        assert!(counts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn reach_threshold_lookup() {
        let t: RunTrace = [rec(0, 5.0), rec(10, 1.2), rec(20, 0.4)]
            .into_iter()
            .collect();
        assert_eq!(t.gradients_to_reach(0.0, 0.5), Some(20));
        assert_eq!(t.gradients_to_reach(0.0, 0.1), None);
        assert_eq!(t.min_objective(), Some(0.4));
    }
}
