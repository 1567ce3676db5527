//! Benchmarks for the grid-sized inner loops: joint-spectrum assembly and
//! the counting pipeline. With the `parallel` feature (default) each case is
//! also run inside a single-thread rayon pool for a parallel-vs-sequential
//! comparison; build with `--no-default-features` to measure the plain
//! sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sfwm_core::biphoton::{build_jsa_coherent, build_jsa_incoherent, IncoherentJsaMode};
use sfwm_core::counting::{pipeline_counts, EfficiencyModel};
use sfwm_core::grid::FrequencyGrid;
use sfwm_core::pump::{CoherentPump, IncoherentPump, PumpShape, PumpSpectrum};
use sfwm_core::waveguide::{DispersionModel, WaveguideSpec};

struct Setup {
    wg: WaveguideSpec,
    disp: DispersionModel,
    grid_s: FrequencyGrid,
    grid_i: FrequencyGrid,
    coherent: CoherentPump,
    incoherent: IncoherentPump,
}

fn setup(m: usize, segments: usize) -> Setup {
    let wg = WaveguideSpec::new(0.01, 100.0, 100.0, segments).unwrap();
    let disp = DispersionModel::new(0.0, 0.0, 0.0, -8e-26, 0.0, 1e16).unwrap();
    let half_span = 2.0e12;
    let step = 2.0 * half_span / (m as f64 - 1.0);
    let detune = (6.0e12 / step).round() * step;
    let grid_s = FrequencyGrid::new(detune - half_span, step, m).unwrap();
    let grid_i = FrequencyGrid::new(-detune - half_span, step, m).unwrap();
    let coherent = CoherentPump::normalized(0.0, 2.5e11, PumpShape::Gaussian).unwrap();
    let incoherent = IncoherentPump::square_envelope(0.0, 1.2e12, step, 7).unwrap();
    Setup { wg, disp, grid_s, grid_i, coherent, incoherent }
}

fn run_jsa_coherent(s: &Setup) {
    let js = build_jsa_coherent(&s.coherent, &s.wg, &s.disp, &s.grid_s, &s.grid_i, 1.0).unwrap();
    criterion::black_box(js.total_weight());
}

fn run_jsa_incoherent(s: &Setup) {
    let js = build_jsa_incoherent(
        &s.incoherent,
        &s.wg,
        &s.disp,
        &s.grid_s,
        &s.grid_i,
        1.0,
        IncoherentJsaMode::IntensitySum,
    )
    .unwrap();
    criterion::black_box(js.total_weight());
}

fn run_pipeline(s: &Setup) {
    let t_s = vec![1.0; s.grid_s.len()];
    let t_i = vec![1.0; s.grid_i.len()];
    let b = pipeline_counts(
        &PumpSpectrum::Incoherent(s.incoherent.clone()),
        &s.wg,
        &s.disp,
        &s.grid_s,
        &t_s,
        &s.grid_i,
        &t_i,
        &EfficiencyModel::unit(),
    )
    .unwrap();
    criterion::black_box(b);
}

fn bench_case<F: Fn(&Setup)>(c: &mut Criterion, name: &str, m: usize, segments: usize, f: F) {
    let s = setup(m, segments);
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("default", m), &s, |b, s| b.iter(|| f(s)));
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        group.bench_with_input(BenchmarkId::new("single_thread", m), &s, |b, s| {
            b.iter(|| pool.install(|| f(s)))
        });
    }
    group.finish();
}

fn benches(c: &mut Criterion) {
    bench_case(c, "jsa_coherent", 128, 16, run_jsa_coherent);
    bench_case(c, "jsa_incoherent", 128, 16, run_jsa_incoherent);
    bench_case(c, "pipeline_counts", 256, 8, run_pipeline);
}

criterion_group!(benches_group, benches);
criterion_main!(benches_group);
