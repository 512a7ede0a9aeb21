use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use tanksim_core::passivation::{filter_input, FilterConfig, FilterVariant};
use tanksim_core::Vec2;

fn bench_filter(c: &mut Criterion) {
    let mut group = c.benchmark_group("filter_input");
    let nominal = Vec2::new(2.0, -1.5);
    let y = Vec2::new(0.8, 0.3);
    for (label, variant) in [
        ("input_only", FilterVariant::InputOnly),
        ("input_and_damping", FilterVariant::InputAndDamping),
    ] {
        let config = FilterConfig { alpha: 0.2, kappa: 1.0, variant, initial_tank: 0.02 };
        group.bench_function(format!("{label}/active"), |b| {
            b.iter(|| {
                filter_input(black_box(&config), black_box(nominal), black_box(y), 0.05, 0.01)
            })
        });
        group.bench_function(format!("{label}/inactive"), |b| {
            b.iter(|| {
                filter_input(black_box(&config), black_box(nominal), black_box(y), 5.0, 10.0)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_filter);
criterion_main!(benches);
