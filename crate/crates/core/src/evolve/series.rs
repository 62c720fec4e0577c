use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Named observable channels sampled on a common time axis.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub channels: BTreeMap<String, Vec<f64>>,
}

impl ObservableSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append one sample. Every sample must carry the same channel names.
    pub fn push(&mut self, t: f64, values: Vec<(String, f64)>) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::Validation(format!("sample time {t} does not advance past {last}")));
            }
        }
        if !self.times.is_empty() {
            if values.len() != self.channels.len() || values.iter().any(|(k, _)| !self.channels.contains_key(k)) {
                return Err(Error::Validation(format!("channel set changed at t = {t}")));
            }
        }
        for (k, v) in values {
            self.channels.entry(k).or_default().push(v);
        }
        self.times.push(t);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.get(name).map(|v| v.as_slice())
    }

    /// Rows `(t, channel, value)` in time-major order.
    pub fn rows(&self) -> Vec<(f64, &str, f64)> {
        let mut out = Vec::with_capacity(self.times.len() * self.channels.len());
        for (k, &t) in self.times.iter().enumerate() {
            for (name, vals) in &self.channels {
                out.push((t, name.as_str(), vals[k]));
            }
        }
        out
    }
}
