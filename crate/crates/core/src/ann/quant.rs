//! Hardware-faithful quantized inference pipeline.
//!
//! Models the on-chip predictor block: 8-bit unsigned inputs staged in a
//! register bank, 16-bit signed fixed-point weights (10 fraction bits), a
//! round-robin FSM that schedules multiply-accumulates over a fixed pool of
//! MAC units, an 8-bit sigmoid lookup table, 32-bit saturating accumulators,
//! and an 8-bit threshold comparator bank.
//!
//! Scaling convention: an input code `c` represents `c / 255`, a weight code
//! `q` represents `q / 1024`, so a raw accumulator value represents
//! `acc / (1024 * 255)` in model units (°C for the output layer).

use std::fmt;

use crate::error::Error;
use crate::thermal::ThermalState;

use super::{AnnModel, StatusBits, StreamNet, MAX_HORIZON_STEPS, UTIL_INPUTS};

/// Fraction bits of the weight format.
pub const WEIGHT_FRACTION_BITS: u32 = 10;
/// Weight scale: codes represent `q / WEIGHT_SCALE`.
pub const WEIGHT_SCALE: f64 = (1 << WEIGHT_FRACTION_BITS) as f64;
/// Input scale: codes represent `c / INPUT_SCALE`, so code 255 is exactly 1.0.
pub const INPUT_SCALE: f64 = 255.0;
/// Combined scale of a raw accumulator value.
pub const ACC_SCALE: f64 = WEIGHT_SCALE * INPUT_SCALE;
/// Sigmoid LUT entry count (8-bit entries).
pub const SIGMOID_LUT_ENTRIES: usize = 1352;
/// Sigmoid LUT input domain, clamped outside.
pub const SIGMOID_LUT_RANGE: (f64, f64) = (-8.0, 8.0);
/// Threshold LUT: 3 per-class banks of 16 preset slots, 8-bit codes.
pub const THRESHOLD_BANKS: usize = 3;
pub const THRESHOLD_PRESETS: usize = 16;
/// Temperature represented by threshold code 0, and the per-code step.
pub const THRESHOLD_BASE_C: f64 = 45.0;
pub const THRESHOLD_STEP_C: f64 = 0.25;
/// Default MAC pool size.
pub const DEFAULT_MAC_UNITS: usize = 10;
/// Fixed pipeline stages outside the MAC schedule: register staging, LUT
/// lookup, accumulate handoff, threshold compare.
pub const PIPELINE_OVERHEAD_CYCLES: u64 = 6;

/// Quantize a weight to the signed fixed-point code; flags saturation.
pub fn quantize_weight(w: f64) -> (i16, bool) {
    let scaled = (w * WEIGHT_SCALE).round();
    if scaled > i16::MAX as f64 {
        (i16::MAX, true)
    } else if scaled < i16::MIN as f64 {
        (i16::MIN, true)
    } else {
        (scaled as i16, false)
    }
}

pub fn dequantize_weight(q: i16) -> f64 {
    q as f64 / WEIGHT_SCALE
}

/// Quantize a utilization (clamped to [0,1]) to its 8-bit code.
pub fn encode_utilization(u: f64) -> u8 {
    (u.clamp(0.0, 1.0) * INPUT_SCALE).round() as u8
}

/// Quantize a horizon in thermal steps to its 8-bit code.
pub fn encode_horizon(horizon_steps: u32) -> Result<u8, Error> {
    if horizon_steps > MAX_HORIZON_STEPS {
        return Err(Error::HorizonRange { requested: horizon_steps, max: MAX_HORIZON_STEPS });
    }
    Ok((horizon_steps as f64 / MAX_HORIZON_STEPS as f64 * INPUT_SCALE).round() as u8)
}

/// 8-bit sigmoid lookup table over a clamped input domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmoidLut {
    entries: Vec<u8>,
}

impl SigmoidLut {
    pub fn build() -> SigmoidLut {
        let (lo, hi) = SIGMOID_LUT_RANGE;
        let entries = (0..SIGMOID_LUT_ENTRIES)
            .map(|i| {
                let z = lo + (hi - lo) * i as f64 / (SIGMOID_LUT_ENTRIES - 1) as f64;
                (255.0 / (1.0 + (-z).exp())).round() as u8
            })
            .collect();
        SigmoidLut { entries }
    }

    pub fn size_bytes(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    /// Look up the activation code for a raw hidden-layer accumulator value.
    /// Index arithmetic is integer-only, round-to-nearest, clamped at the
    /// domain ends — the divider the FSM would use.
    pub fn lookup_acc(&self, acc: i32) -> u8 {
        let (lo, hi) = SIGMOID_LUT_RANGE;
        let lo_fixed = (lo * ACC_SCALE) as i64;
        let span_fixed = ((hi - lo) * ACC_SCALE) as i64;
        let pos = acc as i64 - lo_fixed;
        let scaled = pos * (SIGMOID_LUT_ENTRIES as i64 - 1);
        let idx = ((2 * scaled + span_fixed) / (2 * span_fixed))
            .clamp(0, SIGMOID_LUT_ENTRIES as i64 - 1);
        self.entries[idx as usize]
    }
}

/// Per-class threshold preset banks (cores, switches, links), 8-bit codes on
/// the `THRESHOLD_BASE_C + THRESHOLD_STEP_C * code` scale.  The default bank
/// holds the same ramp of whole-degree presets in every class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdLut {
    pub banks: [[u8; THRESHOLD_PRESETS]; THRESHOLD_BANKS],
}

impl Default for ThresholdLut {
    fn default() -> ThresholdLut {
        let mut bank = [0u8; THRESHOLD_PRESETS];
        for (i, slot) in bank.iter_mut().enumerate() {
            // presets 53°C..=68°C in 1°C steps
            let t = 53.0 + i as f64;
            *slot = ((t - THRESHOLD_BASE_C) / THRESHOLD_STEP_C).round() as u8;
        }
        ThresholdLut { banks: [bank; THRESHOLD_BANKS] }
    }
}

impl ThresholdLut {
    pub fn size_bytes(&self) -> usize {
        THRESHOLD_BANKS * THRESHOLD_PRESETS
    }

    pub fn threshold_c(&self, bank: usize, preset: usize) -> f64 {
        THRESHOLD_BASE_C + THRESHOLD_STEP_C * self.banks[bank][preset] as f64
    }

    /// Find the preset slot holding exactly `t_th` (same slot in every bank).
    pub fn preset_for(&self, t_th: f64) -> Option<usize> {
        (0..THRESHOLD_PRESETS).find(|&p| {
            (0..THRESHOLD_BANKS).all(|b| (self.threshold_c(b, p) - t_th).abs() < 1e-9)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct QuantizedStream {
    inputs: usize,
    hidden: usize,
    outputs: usize,
    /// hidden × (inputs+1) row-major, bias column last.
    w1: Vec<i16>,
    /// outputs × (hidden+1) row-major, bias column last.
    w2: Vec<i16>,
}

impl QuantizedStream {
    fn from_float(net: &StreamNet) -> (QuantizedStream, usize) {
        let mut saturations = 0usize;
        let mut quant = |w: f64| {
            let (q, sat) = quantize_weight(w);
            saturations += sat as usize;
            q
        };
        let w1 = net.w1.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>())
            .map(&mut quant)
            .collect();
        let w2 = net.w2.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>())
            .map(&mut quant)
            .collect();
        (
            QuantizedStream {
                inputs: net.inputs(),
                hidden: net.hidden(),
                outputs: net.outputs(),
                w1,
                w2,
            },
            saturations,
        )
    }

    fn weight_count(&self) -> usize {
        self.w1.len() + self.w2.len()
    }

    /// Run the MAC pipeline for this stream.  `input_codes` must already
    /// include the horizon code; the bias code 255 is appended here.
    /// Returns per-output ΔT in °C and the saturation event count.
    fn forward(&self, input_codes: &[u8], lut: &SigmoidLut) -> (Vec<f64>, usize) {
        assert_eq!(input_codes.len(), self.inputs, "staged inputs must fill the register bank");
        let mut saturations = 0usize;
        let mut mac = |acc: i32, w: i16, code: u8| -> i32 {
            let p = w as i32 * code as i32;
            match acc.checked_add(p) {
                Some(v) => v,
                None => {
                    saturations += 1;
                    if p > 0 { i32::MAX } else { i32::MIN }
                }
            }
        };

        let row1 = self.inputs + 1;
        let mut a1 = vec![0u8; self.hidden + 1];
        for i in 0..self.hidden {
            let row = &self.w1[i * row1..(i + 1) * row1];
            let mut acc = 0i32;
            for (j, &code) in input_codes.iter().enumerate() {
                acc = mac(acc, row[j], code);
            }
            acc = mac(acc, row[self.inputs], 255); // bias input
            a1[i] = lut.lookup_acc(acc);
        }
        a1[self.hidden] = 255; // bias activation

        let row2 = self.hidden + 1;
        let mut out = Vec::with_capacity(self.outputs);
        for k in 0..self.outputs {
            let row = &self.w2[k * row2..(k + 1) * row2];
            let mut acc = 0i32;
            for (i, &code) in a1.iter().enumerate() {
                acc = mac(acc, row[i], code);
            }
            out.push(acc as f64 / ACC_SCALE);
        }
        (out, saturations)
    }
}

/// Result of one pass through the quantized pipeline.
#[derive(Debug, Clone)]
pub struct QuantizedPrediction {
    pub temps: ThermalState,
    pub status: StatusBits,
    pub latency_cycles: u64,
    /// Saturating-accumulator events (0 in normal operation).
    pub acc_saturations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedModel {
    cores: QuantizedStream,
    switches: QuantizedStream,
    links: QuantizedStream,
    pub sigmoid_lut: SigmoidLut,
    pub threshold_lut: ThresholdLut,
    pub mac_units: usize,
    /// Selected slot of the threshold LUT banks.
    pub threshold_preset: usize,
    /// Weights clamped during quantization (0 for a healthy model).
    pub weight_saturations: usize,
}

impl QuantizedModel {
    pub fn from_float(model: &AnnModel, mac_units: usize) -> Result<QuantizedModel, Error> {
        if mac_units == 0 {
            return Err(Error::config("quant.mac_units", mac_units, ">= 1"));
        }
        let (cores, s0) = QuantizedStream::from_float(&model.cores);
        let (switches, s1) = QuantizedStream::from_float(&model.switches);
        let (links, s2) = QuantizedStream::from_float(&model.links);
        let lut = ThresholdLut::default();
        let threshold_preset = lut.preset_for(64.0).expect("default bank holds the 64°C preset");
        Ok(QuantizedModel {
            cores,
            switches,
            links,
            sigmoid_lut: SigmoidLut::build(),
            threshold_lut: lut,
            mac_units,
            threshold_preset,
            weight_saturations: s0 + s1 + s2,
        })
    }

    /// Point the comparator at the preset slot holding `t_th`.
    pub fn select_threshold(&mut self, t_th: f64) -> Result<(), Error> {
        match self.threshold_lut.preset_for(t_th) {
            Some(p) => {
                self.threshold_preset = p;
                Ok(())
            }
            None => Err(Error::config("quant.threshold_c", t_th, "a preset in the threshold LUT")),
        }
    }

    pub fn total_weights(&self) -> usize {
        self.cores.weight_count() + self.switches.weight_count() + self.links.weight_count()
    }

    /// Modeled pipeline latency: one cycle per `mac_units` MACs, plus fixed
    /// staging/LUT/compare overhead.
    pub fn latency_cycles(&self) -> u64 {
        let ops = self.total_weights() as u64;
        ops.div_ceil(self.mac_units as u64) + PIPELINE_OVERHEAD_CYCLES
    }

    /// Full pipeline pass: 240 staged utilization codes + horizon code in,
    /// predicted absolute temperatures, status bits, and latency out.
    pub fn quantized_predict(
        &self,
        u_codes: &[u8],
        horizon_code: u8,
        t0: &ThermalState,
        timestamp: u64,
    ) -> Result<QuantizedPrediction, Error> {
        if u_codes.len() != UTIL_INPUTS {
            return Err(Error::Dimension {
                context: "quantized_predict utilization codes",
                expected: UTIL_INPUTS,
                got: u_codes.len(),
            });
        }
        let total = self.cores.outputs + self.switches.outputs + self.links.outputs;
        if t0.0.len() != total {
            return Err(Error::Dimension {
                context: "quantized_predict initial temperatures",
                expected: total,
                got: t0.0.len(),
            });
        }
        let mut staged = Vec::with_capacity(UTIL_INPUTS + 1);
        staged.extend_from_slice(u_codes);
        staged.push(horizon_code);

        let mut temps = Vec::with_capacity(total);
        let mut saturations = 0usize;
        let mut bank_of = Vec::with_capacity(total);
        for (bank, stream) in [&self.cores, &self.switches, &self.links].into_iter().enumerate() {
            let (delta, sat) = stream.forward(&staged, &self.sigmoid_lut);
            saturations += sat;
            for d in delta {
                temps.push(t0.0[temps.len()] + d);
                bank_of.push(bank);
            }
        }
        // comparator: each class compares against its own bank's selected
        // preset; with the default LUT all banks agree
        let bits = temps
            .iter()
            .zip(&bank_of)
            .map(|(&t, &b)| t > self.threshold_lut.threshold_c(b, self.threshold_preset))
            .collect();
        Ok(QuantizedPrediction {
            temps: ThermalState(temps),
            status: StatusBits { bits, timestamp },
            latency_cycles: self.latency_cycles(),
            acc_saturations: saturations,
        })
    }

    pub fn memory_footprint(&self) -> MemoryFootprint {
        MemoryFootprint {
            reg_bank_bytes: UTIL_INPUTS, // 240 × 8-bit staged inputs
            weight_bytes: self.total_weights() * 2,
            activation_lut_bytes: self.sigmoid_lut.size_bytes(),
            threshold_lut_bytes: self.threshold_lut.size_bytes(),
        }
    }
}

/// Byte report for the predictor block, printed next to the published
/// reference figures for the same blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryFootprint {
    pub reg_bank_bytes: usize,
    pub weight_bytes: usize,
    pub activation_lut_bytes: usize,
    pub threshold_lut_bytes: usize,
}

impl MemoryFootprint {
    pub fn total_bytes(&self) -> usize {
        self.reg_bank_bytes + self.weight_bytes + self.activation_lut_bytes
            + self.threshold_lut_bytes
    }
}

impl fmt::Display for MemoryFootprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // reference figures keep their published formatting: binary KB for
        // the register bank, weights, and activation LUT; decimal KB for the
        // threshold LUT and the total
        writeln!(
            f,
            "input register bank: {} B (reference 1.2 KB incl. staging copies)",
            self.reg_bank_bytes
        )?;
        writeln!(
            f,
            "weight memory:       {} B = {:.1} KB (reference 300 KB)",
            self.weight_bytes,
            self.weight_bytes as f64 / 1024.0
        )?;
        writeln!(
            f,
            "activation LUT:      {} B = {:.2} KB (reference 1.32 KB)",
            self.activation_lut_bytes,
            self.activation_lut_bytes as f64 / 1024.0
        )?;
        writeln!(
            f,
            "threshold LUT:       {} B = {:.3} KB (reference 0.048 KB)",
            self.threshold_lut_bytes,
            self.threshold_lut_bytes as f64 / 1000.0
        )?;
        write!(
            f,
            "total:               {} B = {:.3} KB (reference 302.568 KB)",
            self.total_bytes(),
            self.total_bytes() as f64 / 1000.0
        )
    }
}

/// Entries one row of an event-driven LUT estimator must store per component.
/// Declared so the published storage totals are reproducible: rows × 240
/// components × 1920 one-byte entries.
pub const LUT_ESTIMATOR_ENTRIES_PER_ROW: u64 = 1920;

/// Storage for an event-driven LUT thermal estimator with `rows` utilization
/// rows, under the documented formula.
pub fn lut_estimator_footprint(rows: u64) -> u64 {
    rows * UTIL_INPUTS as u64 * LUT_ESTIMATOR_ENTRIES_PER_ROW
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ann::{AnnModel, TOTAL_WEIGHTS};
    use crate::seed::subsystem_rng;
    use rand::Rng;

    #[test]
    fn weight_round_trip_is_idempotent_on_representable_values() {
        for q in [-32768i16, -1024, -1, 0, 1, 513, 1024, 32767] {
            let w = dequantize_weight(q);
            let (back, sat) = quantize_weight(w);
            assert_eq!(back, q, "round-trip must return the same code");
            assert!(!sat, "representable values must not saturate");
        }
    }

    #[test]
    fn out_of_range_weights_saturate_and_flag() {
        let (hi, sat_hi) = quantize_weight(40.0); // 40 × 1024 > i16::MAX
        assert_eq!(hi, i16::MAX);
        assert!(sat_hi);
        let (lo, sat_lo) = quantize_weight(-40.0);
        assert_eq!(lo, i16::MIN);
        assert!(sat_lo);
    }

    #[test]
    fn lut_sizes_match_the_published_byte_counts_exactly() {
        let model = AnnModel::new_seeded(0.05, 9);
        let qm = QuantizedModel::from_float(&model, DEFAULT_MAC_UNITS).unwrap();
        let fp = qm.memory_footprint();
        assert_eq!(fp.activation_lut_bytes, 1352);
        assert_eq!(fp.threshold_lut_bytes, 48);
        assert_eq!(fp.reg_bank_bytes, 240);
        assert_eq!(fp.weight_bytes, TOTAL_WEIGHTS * 2);
        assert_eq!(fp.total_bytes(), 240 + TOTAL_WEIGHTS * 2 + 1352 + 48);
        let text = fp.to_string();
        assert!(text.contains("1.32 KB"), "activation LUT prints its binary-KB size");
        assert!(text.contains("0.048 KB"), "threshold LUT prints its decimal-KB size");
    }

    #[test]
    fn sigmoid_lut_is_monotone_with_saturated_ends() {
        let lut = SigmoidLut::build();
        assert!(lut.entries.windows(2).all(|w| w[0] <= w[1]), "sigmoid is non-decreasing");
        assert_eq!(lut.entries[0], 0, "σ(-8) quantizes to 0");
        assert_eq!(lut.entries[SIGMOID_LUT_ENTRIES - 1], 255, "σ(8) quantizes to 255");
        assert_eq!(lut.lookup_acc(0), 128, "σ(0) = 0.5 rounds to code 128");
        // clamped outside the domain
        assert_eq!(lut.lookup_acc(i32::MAX), 255);
        assert_eq!(lut.lookup_acc(i32::MIN), 0);
    }

    #[test]
    fn threshold_presets_cover_the_experiment_thresholds_exactly() {
        let lut = ThresholdLut::default();
        let p64 = lut.preset_for(64.0).expect("64°C preset");
        let p68 = lut.preset_for(68.0).expect("68°C preset");
        assert_eq!(lut.banks[0][p64], 76, "(64-45)/0.25");
        assert_eq!(lut.banks[0][p68], 92, "(68-45)/0.25");
        assert_eq!(lut.threshold_c(2, p64), 64.0);
        assert!(lut.preset_for(64.5).is_none(), "half-degree thresholds are not presets");
    }

    #[test]
    fn horizon_codes_span_the_trained_range() {
        assert_eq!(encode_horizon(0).unwrap(), 0);
        assert_eq!(encode_horizon(3000).unwrap(), 255);
        assert_eq!(encode_horizon(8).unwrap(), 1, "short DTM horizons collapse to code 1");
        assert!(matches!(encode_horizon(3001), Err(Error::HorizonRange { .. })));
    }

    #[test]
    fn all_zero_inputs_with_high_threshold_raise_no_status_bits() {
        let model = AnnModel::new_seeded(0.05, 3);
        let qm = QuantizedModel::from_float(&model, DEFAULT_MAC_UNITS).unwrap();
        let t0 = ThermalState(vec![45.0; model.total_outputs()]);
        let out = qm.quantized_predict(&[0u8; UTIL_INPUTS], 0, &t0, 17).unwrap();
        assert!(!out.status.any(), "ambient chip far below threshold must stay quiet");
        assert_eq!(out.status.timestamp, 17);
        assert_eq!(out.acc_saturations, 0);
    }

    #[test]
    fn status_bits_equal_thresholding_of_the_returned_temperatures() {
        let model = AnnModel::new_seeded(0.1, 5);
        let qm = QuantizedModel::from_float(&model, DEFAULT_MAC_UNITS).unwrap();
        let mut rng = subsystem_rng(0x57A7, "quant-status-consistency");
        let t_th = qm.threshold_lut.threshold_c(0, qm.threshold_preset);
        for _ in 0..5 {
            let codes: Vec<u8> = (0..UTIL_INPUTS).map(|_| rng.gen()).collect();
            // spread t0 across the threshold so both bit values occur
            let t0 = ThermalState(
                (0..qm.total_outputs_for_test()).map(|_| rng.gen_range(55.0..75.0)).collect(),
            );
            let out = qm.quantized_predict(&codes, rng.gen(), &t0, 0).unwrap();
            for (i, &bit) in out.status.bits.iter().enumerate() {
                assert_eq!(
                    bit,
                    out.temps.0[i] > t_th,
                    "bit {i} must equal thresholding the returned temperature"
                );
            }
        }
    }

    #[test]
    fn quantized_pipeline_tracks_the_float_model_on_small_weights() {
        let model = AnnModel::new_seeded(0.1, 21);
        let qm = QuantizedModel::from_float(&model, DEFAULT_MAC_UNITS).unwrap();
        assert_eq!(qm.weight_saturations, 0, "init-scale weights fit Q10 comfortably");
        let mut rng = subsystem_rng(0x57A7, "quant-float-agreement");
        let t0 = ThermalState(vec![50.0; model.total_outputs()]);
        for _ in 0..10 {
            let u: Vec<f64> = (0..UTIL_INPUTS).map(|_| rng.gen_range(0.0..1.0)).collect();
            let h: u32 = rng.gen_range(0..=MAX_HORIZON_STEPS);
            let codes: Vec<u8> = u.iter().map(|&x| encode_utilization(x)).collect();
            let float_delta = model.predict_delta(&u, h).unwrap();
            let out = qm
                .quantized_predict(&codes, encode_horizon(h).unwrap(), &t0, 0)
                .unwrap();
            for (i, &fd) in float_delta.iter().enumerate() {
                let qd = out.temps.0[i] - t0.0[i];
                assert!(
                    (qd - fd).abs() <= 0.5,
                    "component {i}: quantized {qd} vs float {fd} exceeds 0.5°C"
                );
            }
            assert_eq!(out.acc_saturations, 0);
        }
    }

    #[test]
    fn zeroing_other_streams_leaves_core_outputs_bit_identical() {
        let model = AnnModel::new_seeded(0.1, 33);
        let qm = QuantizedModel::from_float(&model, DEFAULT_MAC_UNITS).unwrap();
        let mut gutted = qm.clone();
        gutted.switches.w1.fill(0);
        gutted.switches.w2.fill(0);
        gutted.links.w1.fill(0);
        gutted.links.w2.fill(0);
        let codes = [200u8; UTIL_INPUTS];
        let t0 = ThermalState(vec![45.0; 240]);
        let a = qm.quantized_predict(&codes, 100, &t0, 0).unwrap();
        let b = gutted.quantized_predict(&codes, 100, &t0, 0).unwrap();
        assert_eq!(a.temps.0[..64], b.temps.0[..64], "core stream is isolated");
        assert!(b.temps.0[64..].iter().all(|&t| t == 45.0), "gutted streams predict ΔT = 0");
    }

    #[test]
    fn latency_counts_macs_over_the_unit_pool_plus_overhead() {
        let model = AnnModel::new_seeded(0.05, 2);
        let qm = QuantizedModel::from_float(&model, DEFAULT_MAC_UNITS).unwrap();
        let expected = (TOTAL_WEIGHTS as u64).div_ceil(10) + PIPELINE_OVERHEAD_CYCLES;
        assert_eq!(qm.latency_cycles(), expected);
        assert_eq!(qm.latency_cycles(), 12_750, "127,440 MACs on 10 units, 6 overhead stages");
        // reported alongside the published 1.1226 µs figure at 2.5 GHz
        let micros = qm.latency_cycles() as f64 / 2_500.0;
        assert!((micros - 5.1).abs() < 0.01);
    }

    #[test]
    fn lut_estimator_dwarfs_the_predictor_for_all_published_intervals() {
        let model = AnnModel::new_seeded(0.05, 2);
        let qm = QuantizedModel::from_float(&model, DEFAULT_MAC_UNITS).unwrap();
        let ann_total = qm.memory_footprint().total_bytes() as u64;
        assert_eq!(lut_estimator_footprint(0), 0);
        for (rows, published_mb) in [(3000u64, 1382.4), (1700, 783.36), (1000, 460.8)] {
            let bytes = lut_estimator_footprint(rows);
            assert!((bytes as f64 / 1e6 - published_mb).abs() < 0.01);
            assert!(
                bytes / ann_total >= 1000,
                "{rows} rows: LUT/ANN ratio {} must be ≥ 1000",
                bytes / ann_total
            );
        }
    }

    impl QuantizedModel {
        fn total_outputs_for_test(&self) -> usize {
            self.cores.outputs + self.switches.outputs + self.links.outputs
        }
    }
}
