#![allow(dead_code)]

use imwa_core::data::{GaussianMixture, GeneratedData, LongTailSpec};
use imwa_core::imwa::TrainerConfig;
use imwa_core::nn::{init_weights, LayerLayout, WeightVector};

/// Four classes in three dimensions, 60 down to 15 training samples.
pub fn tiny_data(seed: u64) -> GeneratedData {
    GaussianMixture {
        test_per_class: 25,
        ..GaussianMixture::new(LongTailSpec::new(4, 60, 4.0).unwrap(), 3, 3.0)
    }
    .generate(seed)
    .unwrap()
}

pub fn tiny_init(seed: u64) -> WeightVector {
    init_weights(&LayerLayout::from_widths(&[3, 8, 4]).unwrap(), seed)
}

pub fn configs(m: usize, base_seed: u64) -> Vec<TrainerConfig> {
    (0..m as u64)
        .map(|k| TrainerConfig {
            data_seed: base_seed * 1000 + k,
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 8,
        })
        .collect()
}

/// Reference forward pass with plain loops over the flat weight layout.
pub fn reference_forward(w: &WeightVector, x: &[f64]) -> Vec<f64> {
    let dims = w.layout().dims();
    let v = w.values();
    let mut offset = 0;
    let mut h = x.to_vec();
    for (l, &(fan_in, fan_out)) in dims.iter().enumerate() {
        let weights = &v[offset..offset + fan_in * fan_out];
        let bias = &v[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        offset += fan_in * fan_out + fan_out;
        let mut next = vec![0.0; fan_out];
        for j in 0..fan_out {
            let mut z = bias[j];
            for i in 0..fan_in {
                z += h[i] * weights[i * fan_out + j];
            }
            next[j] = if l + 1 < dims.len() { z.max(0.0) } else { z };
        }
        h = next;
    }
    h
}
