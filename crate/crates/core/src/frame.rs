use crate::config::{EstimatorConfig, Mode};
use crate::error::{Error, Result};
use crate::Sample;

/// Interior ordering of a frame's flat value vector.
///
/// * `Set`: cycle-frequency major, lags ascending `-max_lag..=max_lag`.
/// * `Full`: lag major, DFT bins ascending `0..win_len` (natural DFT order).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameLayout {
    Set { num_alphas: usize, max_lag: usize },
    Full { num_lags: usize, win_len: usize },
}

impl FrameLayout {
    pub fn for_config(config: &EstimatorConfig) -> Self {
        match config.mode {
            Mode::Set => FrameLayout::Set {
                num_alphas: config.alphas.len(),
                max_lag: config.m_plus(),
            },
            Mode::Full => FrameLayout::Full {
                num_lags: config.lag_spec.len(),
                win_len: config.win_len,
            },
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            FrameLayout::Set { num_alphas, max_lag } => num_alphas * (2 * max_lag + 1),
            FrameLayout::Full { num_lags, win_len } => num_lags * win_len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of rows in the major dimension (cycle frequencies or lags).
    pub fn major_len(&self) -> usize {
        match *self {
            FrameLayout::Set { num_alphas, .. } => num_alphas,
            FrameLayout::Full { num_lags, .. } => num_lags,
        }
    }

    /// Number of entries per major row.
    pub fn minor_len(&self) -> usize {
        match *self {
            FrameLayout::Set { max_lag, .. } => 2 * max_lag + 1,
            FrameLayout::Full { win_len, .. } => win_len,
        }
    }

    /// Flat position of `(major, minor)`. For `Set` layouts `minor` is the lag
    /// `m` in `-max_lag..=max_lag`; for `Full` layouts it is the bin `k`.
    pub fn flat_index(&self, major: usize, minor: i64) -> Result<usize> {
        if major >= self.major_len() {
            return Err(Error::range(format!(
                "major index {major} out of range 0..{}",
                self.major_len()
            )));
        }
        let offset = match *self {
            FrameLayout::Set { max_lag, .. } => {
                let m = max_lag as i64;
                if !(-m..=m).contains(&minor) {
                    return Err(Error::range(format!("lag {minor} outside -{m}..={m}")));
                }
                (minor + m) as usize
            }
            FrameLayout::Full { win_len, .. } => {
                if minor < 0 || minor as usize >= win_len {
                    return Err(Error::range(format!("bin {minor} outside 0..{win_len}")));
                }
                minor as usize
            }
        };
        Ok(major * self.minor_len() + offset)
    }
}

/// One estimator output vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicFrame {
    pub frame_index: u64,
    /// Absolute index of the window's `n = 0` sample.
    pub start_abs: u64,
    pub layout: FrameLayout,
    pub values: Vec<Sample>,
}

impl CyclicFrame {
    /// Value at `(major, minor)`, see [`FrameLayout::flat_index`].
    pub fn get(&self, major: usize, minor: i64) -> Result<Sample> {
        Ok(self.values[self.layout.flat_index(major, minor)?])
    }

    /// The row of values for one cycle frequency (Set) or one lag (Full).
    pub fn row(&self, major: usize) -> &[Sample] {
        let w = self.layout.minor_len();
        &self.values[major * w..(major + 1) * w]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_index_examples() {
        let set = FrameLayout::Set {
            num_alphas: 2,
            max_lag: 1,
        };
        assert_eq!(set.flat_index(1, 0).unwrap(), 4);
        let set = FrameLayout::Set {
            num_alphas: 1,
            max_lag: 256,
        };
        assert_eq!(set.flat_index(0, -256).unwrap(), 0);
        assert_eq!(set.len(), 513);
        let full = FrameLayout::Full {
            num_lags: 3,
            win_len: 8,
        };
        assert_eq!(full.flat_index(2, 5).unwrap(), 21);
        assert_eq!(full.len(), 24);
    }

    #[test]
    fn flat_index_rejects_out_of_range() {
        let set = FrameLayout::Set {
            num_alphas: 2,
            max_lag: 1,
        };
        assert!(matches!(set.flat_index(2, 0), Err(Error::Range(_))));
        assert!(matches!(set.flat_index(0, 2), Err(Error::Range(_))));
        assert!(matches!(set.flat_index(0, -2), Err(Error::Range(_))));
        let full = FrameLayout::Full {
            num_lags: 3,
            win_len: 8,
        };
        assert!(matches!(full.flat_index(0, 8), Err(Error::Range(_))));
        assert!(matches!(full.flat_index(0, -1), Err(Error::Range(_))));
    }

    fn layouts() -> impl Strategy<Value = FrameLayout> {
        prop_oneof![
            (1usize..5, 0usize..12).prop_map(|(num_alphas, max_lag)| FrameLayout::Set { num_alphas, max_lag }),
            (1usize..5, 1usize..40).prop_map(|(num_lags, win_len)| FrameLayout::Full { num_lags, win_len }),
        ]
    }

    proptest! {
        #[test]
        fn flat_index_is_a_bijection(layout in layouts()) {
            let mut seen = vec![false; layout.len()];
            for major in 0..layout.major_len() {
                for pos in 0..layout.minor_len() {
                    let minor = match layout {
                        FrameLayout::Set { max_lag, .. } => pos as i64 - max_lag as i64,
                        FrameLayout::Full { .. } => pos as i64,
                    };
                    let i = layout.flat_index(major, minor).unwrap();
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
        }
    }
}
