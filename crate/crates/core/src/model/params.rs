use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::ModelError;

/// Numeric configuration of the lane-keeping controllers.
///
/// Weights are indexed by sensor; sensor `i` feeds membrane `s_{i+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerParams {
    pub k: usize,
    pub cruise: f64,
    pub weight_left: Vec<f64>,
    pub weight_right: Vec<f64>,
    /// Initial value of every enzyme variable unless overridden per membrane.
    pub enzyme: f64,
    pub enzyme_overrides: BTreeMap<String, f64>,
    /// Largest value a sensor membrane is expected to receive.
    pub sensor_bound: f64,
}

/// Shipped defaults, tuned by hand in simulation. Not normative.
pub const DEFAULT_PARAMS: &str = include_str!("../../config/default_params.txt");

impl Default for ControllerParams {
    fn default() -> Self {
        Self::parse(DEFAULT_PARAMS).expect("shipped params parse")
    }
}

impl ControllerParams {
    /// `k` sensors, all weights zero.
    pub fn uniform(k: usize, cruise: f64) -> Self {
        Self {
            k,
            cruise,
            weight_left: vec![0.0; k],
            weight_right: vec![0.0; k],
            enzyme: 1e9,
            enzyme_overrides: BTreeMap::new(),
            sensor_bound: 1.0,
        }
    }

    pub fn enzyme_for(&self, membrane: &str) -> f64 {
        self.enzyme_overrides
            .get(membrane)
            .copied()
            .unwrap_or(self.enzyme)
    }

    /// Swaps the left and right weights of mirrored sensors (`i` with `k-1-i`).
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.k {
            out.weight_left[i] = self.weight_right[self.k - 1 - i];
            out.weight_right[i] = self.weight_left[self.k - 1 - i];
        }
        out
    }

    /// Reads `key = value` lines. Weights are comma-separated lists; `enzyme.<label>`
    /// overrides the enzyme initial value of one membrane.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut k = None;
        let mut cruise = None;
        let mut wl = None;
        let mut wr = None;
        let mut enzyme = 1e9;
        let mut overrides = BTreeMap::new();
        let mut bound = 1.0;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| ModelError::Params {
                line: n + 1,
                message: msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, found `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let real = |v: &str| -> Result<f64, ModelError> {
                v.parse::<f64>()
                    .map_err(|_| bad(format!("`{key}`: invalid number `{v}`")))
            };
            let list =
                |v: &str| -> Result<Vec<f64>, ModelError> { v.split(',').map(|x| real(x.trim())).collect() };
            match key {
                "k" => {
                    k = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| bad(format!("`k`: invalid count `{value}`")))?,
                    )
                }
                "cruise" => cruise = Some(real(value)?),
                "weight_left" => wl = Some(list(value)?),
                "weight_right" => wr = Some(list(value)?),
                "enzyme" => enzyme = real(value)?,
                "sensor_bound" => bound = real(value)?,
                _ => match key.strip_prefix("enzyme.") {
                    Some(label) if !label.is_empty() => {
                        overrides.insert(label.to_owned(), real(value)?);
                    }
                    _ => return Err(bad(format!("unknown key `{key}`"))),
                },
            }
        }
        let cruise = cruise.ok_or_else(|| ModelError::Params {
            line: 0,
            message: "missing `cruise`".into(),
        })?;
        let k = k.unwrap_or(6);
        let params = Self {
            k,
            cruise,
            weight_left: wl.unwrap_or_else(|| vec![0.0; k]),
            weight_right: wr.unwrap_or_else(|| vec![0.0; k]),
            enzyme,
            enzyme_overrides: overrides,
            sensor_bound: bound,
        };
        params.validate_shape()?;
        Ok(params)
    }

    pub fn to_text(&self) -> String {
        let join = |w: &[f64]| w.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let _ = writeln!(out, "k = {}", self.k);
        let _ = writeln!(out, "cruise = {}", self.cruise);
        let _ = writeln!(out, "weight_left = {}", join(&self.weight_left));
        let _ = writeln!(out, "weight_right = {}", join(&self.weight_right));
        let _ = writeln!(out, "enzyme = {:e}", self.enzyme);
        for (label, v) in &self.enzyme_overrides {
            let _ = writeln!(out, "enzyme.{label} = {v:e}");
        }
        let _ = writeln!(out, "sensor_bound = {}", self.sensor_bound);
        out
    }

    pub(crate) fn validate_shape(&self) -> Result<(), ModelError> {
        let invalid = |m: String| Err(ModelError::InvalidParams(m));
        if self.k == 0 {
            return invalid("k must be at least 1".into());
        }
        if self.weight_left.len() != self.k || self.weight_right.len() != self.k {
            return invalid(format!(
                "expected {} left and right weights, got {} and {}",
                self.k,
                self.weight_left.len(),
                self.weight_right.len()
            ));
        }
        let all = [self.cruise, self.enzyme, self.sensor_bound]
            .into_iter()
            .chain(self.weight_left.iter().copied())
            .chain(self.weight_right.iter().copied())
            .chain(self.enzyme_overrides.values().copied());
        if all.into_iter().any(|x| !x.is_finite()) {
            return invalid("all parameters must be finite".into());
        }
        if self.sensor_bound < 0.0 {
            return invalid("sensor_bound must be non-negative".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults_are_valid() {
        let p = ControllerParams::default();
        assert_eq!(p.k, 6);
        assert_eq!(p.enzyme, 1e9);
        assert!(p.cruise > 0.0);
    }

    #[test]
    fn text_round_trip() {
        let mut p = ControllerParams::default();
        p.enzyme_overrides.insert("c_2".into(), 5e8);
        assert_eq!(ControllerParams::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn rejects_wrong_weight_count_and_unknown_keys() {
        let e = ControllerParams::parse("k = 2\ncruise = 1\nweight_left = 1\n").unwrap_err();
        assert!(matches!(e, ModelError::InvalidParams(_)));
        let e = ControllerParams::parse("cruise = 1\nspeed = 3\n").unwrap_err();
        assert!(matches!(e, ModelError::Params { line: 2, .. }));
    }

    #[test]
    fn mirroring_swaps_sides() {
        let mut p = ControllerParams::uniform(3, 1.0);
        p.weight_left = vec![1.0, 2.0, 3.0];
        p.weight_right = vec![4.0, 5.0, 6.0];
        let m = p.mirrored();
        assert_eq!(m.weight_left, [6.0, 5.0, 4.0]);
        assert_eq!(m.weight_right, [3.0, 2.0, 1.0]);
        assert_eq!(m.mirrored(), p);
    }
}
