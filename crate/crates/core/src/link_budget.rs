//! Radio link budget: thermal noise, SNR, a Shannon-capacity throughput proxy
//! and the resulting per-drone service rate and device capacity.
//!
//! The mean received signal strength is a synthetic per-altitude table standing
//! in for measured air-to-ground data aggregated over ground nodes and time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Thermal noise density at room temperature, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkBudgetError {
    #[error("per-device arrival rate must be positive, got {0}")]
    ZeroDemand(f64),
    #[error("bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),
    #[error("PHY efficiency must lie in (0, 1], got {0}")]
    InvalidEfficiency(f64),
    #[error("packet size must be positive")]
    InvalidPacketSize,
    #[error("no mean RSS configured for altitude {0} m")]
    UnknownAltitude(f64),
}

/// Mean RSS for one hover altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssEntry {
    pub altitude_m: f64,
    pub mean_rss_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub rss_table: Vec<RssEntry>,
    pub phy_efficiency: f64,
    pub data_packet_bits: u32,
    pub control_packet_bits: u32,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power_dbm: 20.0,
            carrier_ghz: 3.3,
            bandwidth_hz: 5e6,
            noise_figure_db: 7.0,
            rss_table: vec![
                RssEntry {
                    altitude_m: 40.0,
                    mean_rss_dbm: -70.0,
                },
                RssEntry {
                    altitude_m: 70.0,
                    mean_rss_dbm: -73.0,
                },
                RssEntry {
                    altitude_m: 100.0,
                    mean_rss_dbm: -76.0,
                },
            ],
            phy_efficiency: 0.6,
            data_packet_bits: 8192,
            control_packet_bits: 256,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<(), LinkBudgetError> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(LinkBudgetError::InvalidBandwidth(self.bandwidth_hz));
        }
        if !(self.phy_efficiency > 0.0 && self.phy_efficiency <= 1.0) {
            return Err(LinkBudgetError::InvalidEfficiency(self.phy_efficiency));
        }
        if self.data_packet_bits == 0 || self.control_packet_bits == 0 {
            return Err(LinkBudgetError::InvalidPacketSize);
        }
        Ok(())
    }

    pub fn mean_rss_dbm(&self, altitude_m: f64) -> Result<f64, LinkBudgetError> {
        self.rss_table
            .iter()
            .find(|e| (e.altitude_m - altitude_m).abs() < 1e-9)
            .map(|e| e.mean_rss_dbm)
            .ok_or(LinkBudgetError::UnknownAltitude(altitude_m))
    }

    pub fn noise_dbm(&self) -> f64 {
        noise_power_dbm(self.bandwidth_hz, self.noise_figure_db)
    }

    pub fn snr_db_at(&self, altitude_m: f64) -> Result<f64, LinkBudgetError> {
        Ok(snr_db(self.mean_rss_dbm(altitude_m)?, self.noise_dbm()))
    }

    /// Data-packet service rate of a drone hovering at `altitude_m`.
    pub fn data_service_rate(&self, altitude_m: f64) -> Result<f64, LinkBudgetError> {
        self.validate()?;
        let snr = self.snr_db_at(altitude_m)?;
        Ok(service_rate(self, snr, self.data_packet_bits))
    }
}

/// `N = -174 + 10 log10(B) + NF` in dBm.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

pub fn snr_db(mean_rss_dbm: f64, noise_dbm: f64) -> f64 {
    mean_rss_dbm - noise_dbm
}

/// Packets per second: `eta * B * log2(1 + snr) / packet_bits`.
pub fn service_rate(link: &LinkBudget, snr_db: f64, packet_bits: u32) -> f64 {
    let snr_linear = 10f64.powf(snr_db / 10.0);
    link.phy_efficiency * link.bandwidth_hz * snr_linear.ln_1p() / std::f64::consts::LN_2
        / packet_bits as f64
}

/// Devices a drone can serve: `floor(mu / lambda)`, at least one when the
/// drone can carry a single device.
pub fn device_capacity(mu: f64, lambda: f64) -> Result<u32, LinkBudgetError> {
    if !(lambda > 0.0) {
        return Err(LinkBudgetError::ZeroDemand(lambda));
    }
    let raw = (mu / lambda).floor();
    let cap = if raw.is_finite() { raw.min(u32::MAX as f64) as u32 } else { u32::MAX };
    Ok(if mu >= lambda { cap.max(1) } else { cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn noise_floor_values() {
        assert_eq!(noise_power_dbm(1.0, 0.0), -174.0);
        // 10 log10(5e6) = 66.98970004336019
        assert!((noise_power_dbm(5e6, 7.0) - -100.010_299_956_639_81).abs() < 1e-9);
        assert!((noise_power_dbm(20e6, 7.0) - -93.989_700_043_360_19).abs() < 1e-9);
    }

    #[test]
    fn snr_values() {
        assert!((snr_db(-70.0, -100.0103) - 30.0103).abs() < 1e-12);
        assert_eq!(snr_db(-80.0, -80.0), 0.0);
        assert_eq!(snr_db(-93.9897, -93.9897), 0.0);
    }

    #[test]
    fn service_rate_values() {
        let link = LinkBudget::default();
        assert_eq!(service_rate(&link, f64::NEG_INFINITY, 8192), 0.0);
        // mpmath, 30 digits: 0.6 * 5e6 * log2(1 + 10^(30.01029995663981/10)) / 8192
        let snr = -70.0 - noise_power_dbm(5e6, 7.0);
        let mu = service_rate(&link, snr, 8192);
        assert!((mu - 3651.359_039_158_63).abs() < 1e-6, "{mu}");
        let wide = LinkBudget {
            bandwidth_hz: 10e6,
            ..link.clone()
        };
        assert!((service_rate(&wide, 30.0, 8192) - 2.0 * service_rate(&link, 30.0, 8192)).abs() < 1e-9);
        assert!((link.data_service_rate(40.0).unwrap() - mu).abs() < 1e-12);
        assert!(link.data_service_rate(55.0).is_err());
    }

    #[test]
    fn capacity_values() {
        assert_eq!(device_capacity(100.0, 10.0), Ok(10));
        assert_eq!(device_capacity(105.0, 10.0), Ok(10));
        assert_eq!(device_capacity(3651.359, 50.0), Ok(73));
        assert_eq!(device_capacity(5.0, 10.0), Ok(0));
        assert_eq!(device_capacity(5.0, 0.0), Err(LinkBudgetError::ZeroDemand(0.0)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn service_rate_monotone(s1 in -20.0f64..60.0, ds in 0.0f64..20.0, b in 1e5f64..5e7) {
            let link = LinkBudget { bandwidth_hz: b, ..LinkBudget::default() };
            prop_assert!(service_rate(&link, s1 + ds, 8192) >= service_rate(&link, s1, 8192));
            let wider = LinkBudget { bandwidth_hz: 2.0 * b, ..LinkBudget::default() };
            prop_assert!(service_rate(&wider, s1, 8192) >= service_rate(&link, s1, 8192));
        }

        #[test]
        fn capacity_nonincreasing_in_demand(mu in 1.0f64..1e4, l1 in 0.01f64..100.0, dl in 0.0f64..100.0) {
            prop_assert!(device_capacity(mu, l1 + dl).unwrap() <= device_capacity(mu, l1).unwrap());
        }

        #[test]
        fn doubling_bandwidth_adds_3db(b in 1.0f64..1e9, nf in 0.0f64..15.0) {
            let delta = noise_power_dbm(2.0 * b, nf) - noise_power_dbm(b, nf);
            prop_assert!((delta - 10.0 * 2f64.log10()).abs() < 1e-9);
        }
    }
}
