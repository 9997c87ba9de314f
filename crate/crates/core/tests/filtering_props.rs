use proptest::prelude::*;

use subideal::filtering::{
    convolve, convolve_direct_kernel, convolve_fft_kernel, kernel_for_rate, CausalKernel, ConvolutionMode, StreamState,
};
use subideal::spectral::{auto_grid, impulse_response, DEFAULT_RESOLUTION_FACTOR, DEFAULT_TAIL_EPS};
use subideal::{FilterParams, SampledSignal};

fn kernel_strategy() -> impl Strategy<Value = CausalKernel> {
    prop::collection::vec(-1.0f64..1.0, 1..64).prop_map(|v| CausalKernel::from_causal_samples(0.1, v).unwrap())
}

fn signal_strategy(max_len: usize) -> impl Strategy<Value = SampledSignal> {
    prop::collection::vec(-1.0f64..1.0, 1..max_len).prop_map(|v| SampledSignal::new(0.0, 0.1, v).unwrap())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn peak(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn filter_strategy() -> impl Strategy<Value = FilterParams> {
    (0.5f64..8.0, 0.2f64..1.0, 0.5f64..0.95).prop_map(|(a, b, q)| FilterParams::new(a, b, q).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_matches_direct(k in kernel_strategy(), x in signal_strategy(3000)) {
        let d = convolve_direct_kernel(&k, &x).unwrap();
        let f = convolve_fft_kernel(&k, &x).unwrap();
        prop_assert!(max_abs_diff(d.values(), f.values()) <= 1e-9 * peak(d.values()).max(f64::MIN_POSITIVE));
    }

    #[test]
    fn any_chunking_matches_batch(k in kernel_strategy(), x in signal_strategy(600), chunks in prop::collection::vec(1usize..50, 1..40)) {
        let d = convolve_direct_kernel(&k, &x).unwrap();
        let mut state = StreamState::new(k.clone());
        let mut out = Vec::new();
        let mut pos = 0;
        for c in chunks.iter().cycle() {
            if pos >= x.len() {
                break;
            }
            let end = (pos + c).min(x.len());
            let y = state.push(&x.values()[pos..end]);
            prop_assert_eq!(y.len(), end - pos);
            out.extend(y);
            pos = end;
        }
        prop_assert!(max_abs_diff(d.values(), &out) <= 1e-12);
        let last = k.len() - 1;
        prop_assert_eq!(state.history().len(), last);
    }

    #[test]
    fn future_perturbation_leaves_prefix_untouched(k in kernel_strategy(), x in signal_strategy(400), cut_frac in 0.0f64..1.0, bump in -3.0f64..3.0) {
        let cut = ((x.len() as f64) * cut_frac) as usize;
        let mut v = x.values().to_vec();
        for s in &mut v[cut..] {
            *s += bump;
        }
        let xp = SampledSignal::new(0.0, 0.1, v).unwrap();
        for mode in [ConvolutionMode::Direct, ConvolutionMode::Stream { chunk: 7 }] {
            let a = convolve(&k, &x, mode).unwrap();
            let b = convolve(&k, &xp, mode).unwrap();
            prop_assert_eq!(&a.values()[..cut], &b.values()[..cut]);
        }
    }

    #[test]
    fn fft_is_linear(k in kernel_strategy(), x1 in signal_strategy(500), a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u64>()) {
        let x2: Vec<f64> = (0..x1.len()).map(|j| ((j as u64).wrapping_mul(seed | 1) % 1000) as f64 / 500.0 - 1.0).collect();
        let x2 = SampledSignal::new(0.0, 0.1, x2).unwrap();
        let mix: Vec<f64> = x1.values().iter().zip(x2.values()).map(|(u, v)| a * u + b * v).collect();
        let ymix = convolve_fft_kernel(&k, &SampledSignal::new(0.0, 0.1, mix).unwrap()).unwrap();
        let y1 = convolve_fft_kernel(&k, &x1).unwrap();
        let y2 = convolve_fft_kernel(&k, &x2).unwrap();
        let combo: Vec<f64> = y1.values().iter().zip(y2.values()).map(|(u, v)| a * u + b * v).collect();
        let scale = peak(&combo).max(peak(ymix.values())).max(1e-300);
        prop_assert!(max_abs_diff(ymix.values(), &combo) <= 1e-10 * scale.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sub_ideal_kernels_contract_energy(p in filter_strategy(), seed in any::<u64>()) {
        let g = auto_grid(&p, DEFAULT_TAIL_EPS, DEFAULT_RESOLUTION_FACTOR).unwrap();
        let kernel = CausalKernel::prepare(&impulse_response(&p, &g).unwrap()).unwrap();
        let x = white_noise(seed, 2048, g.dt());
        let y = convolve_fft_kernel(&kernel, &x).unwrap();
        prop_assert!(y.l2_norm() <= x.l2_norm() * (1.0 + 1e-3));
    }

    #[test]
    fn output_second_difference_is_smaller(p in filter_strategy(), seed in any::<u64>()) {
        let dt = 0.05;
        let kernel = kernel_for_rate(&p, dt, DEFAULT_TAIL_EPS, DEFAULT_RESOLUTION_FACTOR).unwrap();
        let x = white_noise(seed, 4096, dt);
        let y = convolve_fft_kernel(&kernel, &x).unwrap();
        prop_assert!(second_difference_variance(y.values()) < second_difference_variance(x.values()));
    }
}

fn white_noise(seed: u64, len: usize, dt: f64) -> SampledSignal {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    SampledSignal::new(0.0, dt, (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn second_difference_variance(v: &[f64]) -> f64 {
    let d: Vec<f64> = v.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / d.len() as f64
}

#[test]
fn stream_ring_down_follows_kernel_tail() {
    let k = CausalKernel::from_causal_samples(0.5, vec![1.0, 0.5, 0.25, 0.125]).unwrap();
    let mut s = StreamState::new(k.clone());
    s.push(&[2.0]);
    let tail = s.push(&[0.0; 5]);
    let expected: Vec<f64> = [0.5, 0.25, 0.125, 0.0, 0.0].iter().map(|h| 2.0 * h * 0.5).collect();
    assert_eq!(tail, expected);
}

#[test]
fn single_chunk_equals_direct() {
    let p = FilterParams::new(1.0, 0.5, 0.7).unwrap();
    let kernel = kernel_for_rate(&p, 0.05, DEFAULT_TAIL_EPS, DEFAULT_RESOLUTION_FACTOR).unwrap();
    let x = white_noise(3, 1500, 0.05);
    let d = convolve_direct_kernel(&kernel, &x).unwrap();
    let mut s = StreamState::new(kernel.clone());
    assert_eq!(s.push(x.values()), d.values());
    let ones: Vec<f64> = {
        let mut s = StreamState::new(kernel);
        x.values().iter().flat_map(|v| s.push(&[*v])).collect()
    };
    assert_eq!(ones, d.values());
}
