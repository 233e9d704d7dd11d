//! Sequential versus rayon-parallel execution of the data-parallel stages.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tactile_core::dictionary::{extract_patches, ksvd_train, overcomplete_dct, KsvdParams};
use tactile_core::reconstruction::{PatchReconstructor, ReconstructionParams};
use tactile_core::sampling::{MeasurementClock, Sampler, SamplingConfig};
use tactile_core::sim::{render_phantom, standard_phantoms};
use tactile_core::{Exec, Scheme};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn reconstruction(c: &mut Criterion) {
    let truth = render_phantom(&standard_phantoms(64, 64)[6].1, 64, 64).unwrap();
    let sampler = Sampler::new(SamplingConfig::new(Scheme::Random, 1024).with_seed(1), 64, 64).unwrap();
    let set = sampler.sample_frame(&truth, 0, &mut MeasurementClock::new(55_936.0)).unwrap();
    let dict = overcomplete_dct(8, 8, 256).unwrap();
    let mut group = c.benchmark_group("reconstruct_64x64_m1024");
    for (name, exec) in POLICIES {
        let params = ReconstructionParams { exec, ..ReconstructionParams::default() };
        let recon = PatchReconstructor::new(&dict, params, 64, 64).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| recon.reconstruct(&set).unwrap()));
    }
    group.finish();
}

fn ksvd(c: &mut Criterion) {
    let frames: Vec<_> =
        standard_phantoms(32, 32).iter().map(|(_, p)| render_phantom(p, 32, 32).unwrap()).collect();
    let patches = extract_patches(&frames, 8, 8, 600, 4, 0.02, 3).unwrap().set;
    let mut group = c.benchmark_group("ksvd_600_patches_64_atoms");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let params = KsvdParams { atoms: 64, sparsity: 6, iterations: 2, seed: 0, exec };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| ksvd_train(&patches, &params).unwrap()));
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let truth = render_phantom(&standard_phantoms(32, 32)[2].1, 32, 32).unwrap();
    let mut group = c.benchmark_group("sample_frame_32x32_m128");
    for scheme in [Scheme::Uniform, Scheme::Random, Scheme::Binary] {
        let sampler = Sampler::new(SamplingConfig::new(scheme, 128), 32, 32).unwrap();
        group.bench_function(BenchmarkId::from_parameter(scheme.name()), |b| {
            b.iter(|| sampler.sample_frame(&truth, 0, &mut MeasurementClock::new(55_936.0)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, reconstruction, ksvd, sampling);
criterion_main!(benches);
