// probe: criterion 9 lista tuning: lr vs (a) val improvement and (c) P_d monotonicity
use doa_core::array_signal::*;
use doa_core::evaluation::*;
use doa_core::nets::*;
use doa_core::training::*;
use rayon::prelude::*;

fn main() {
    let m = 16; let n = 64; let t_layers = 10;
    let dic = Dictionary::build(make_ula::<f64>(m).unwrap(), n).unwrap();
    let train_spec = DatasetSpec { count: 10_000, k_min: 1, k_max: 8, min_sep: 1.0/16.0,
        snr: SnrSpec::FixedDb(15.0), noise_convention: Default::default(), seed: 90_001 };
    let train_set = generate_dataset(&dic, &train_spec).unwrap();
    let val_set = generate_dataset(&dic, &DatasetSpec { count: 2_000, seed: 90_002, ..train_spec.clone() }).unwrap();
    let snrs: Vec<f64> = (0..=7).map(|i| 5.0*i as f64).collect();
    let mut tests = Vec::new();
    for (i, &snr) in snrs.iter().enumerate() {
        let spec = DatasetSpec { count: 1_000, k_min: 1, k_max: 8, min_sep: 1.0/48.0,
            snr: SnrSpec::FixedDb(snr), noise_convention: Default::default(), seed: 90_100 + i as u64 };
        tests.push(generate_dataset(&dic, &spec).unwrap());
    }
    let mc = MatchConfig::default();
    for lr in [5e-4, 3e-4] {
        for seed in [1u64, 2, 3] {
            let net = Network::init(NetKind::Lista, &dic, t_layers, 0.1, 1.0).unwrap();
            let cfg = TrainConfig { epochs: 20, batch_size: 256, learning_rate: lr, seed,
                validation_every: 1, checkpoint_dir: None, constraint_mode: Default::default() };
            let out = train(net, &dic, &train_set, &val_set, &cfg, &LossConfig::default()).unwrap();
            let ratio = out.best_val_loss / out.history[0].val_loss;
            let compiled = out.best_net.compile().unwrap();
            let curve: Vec<f64> = tests.iter().map(|samples| {
                let evals: Vec<f64> = samples.par_iter().map(|s| {
                    let x = compiled.forward_output(&dic, &s.measurement).unwrap();
                    evaluate_vector(&dic, &s.scene, &x, &mc).unwrap().detection_rate
                }).collect();
                evals.iter().sum::<f64>() / evals.len() as f64
            }).collect();
            let worst_drop = curve.windows(2).map(|w| w[0]-w[1]).fold(f64::MIN, f64::max);
            println!("lr {lr:.0e} seed {seed}: val ratio {ratio:.3}, worst P_d drop {worst_drop:+.3}, curve {:?}",
                curve.iter().map(|p| (p*1000.0).round()/1000.0).collect::<Vec<_>>());
        }
    }
}
