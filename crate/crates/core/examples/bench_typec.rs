use eds_core::austere::{maximal_basis, MaximalKind};
use eds_core::frames::{semi_orthonormal_bundle, FrameBundleSpec, MetricMode};
use eds_core::pfaffian::standard_system;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let frame = semi_orthonormal_bundle(&FrameBundleSpec {
        n: 4,
        r: 3,
        metric: MetricMode::Symbolic,
        params: vec!["l1".into(), "l2".into()],
        constraints: vec![],
    });
    let space = maximal_basis(MaximalKind::C);
    let sys = standard_system(&frame, &space).unwrap();
    eprintln!("[{:?}] system built, free = {}", t0.elapsed(), sys.free_generators().len());
    let gstat = || {
        use std::sync::atomic::Ordering::Relaxed;
        eprintln!(
            "    gcd: {} calls {:.2}s total | slow-path: {} calls {:.2}s",
            eds_core::poly::GCD_CALLS.load(Relaxed),
            eds_core::poly::GCD_NANOS.load(Relaxed) as f64 / 1e9,
            eds_core::poly::GCD_SLOW_CALLS.load(Relaxed),
            eds_core::poly::GCD_SLOW_NANOS.load(Relaxed) as f64 / 1e9,
        );
    };
    gstat();
    let sp = sys.integral_element_space().unwrap();
    gstat();
    eprintln!("[{:?}] integral elements dim = {}", t0.elapsed(), sp.dimension);
    for (g, coeffs) in sp.assignment.iter().take(3) {
        eprintln!("  gen {} -> {:?}", sys.model().coframe().gen_name(*g), coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    }
    let tab = sys.tableau().unwrap();
    eprintln!("[{:?}] coordinate chars = {:?}", t0.elapsed(), tab.characters_for_flag(None));
    let ch = sys.cartan_characters(42).unwrap();
    eprintln!("[{:?}] chars = {:?} involutive = {}", t0.elapsed(), ch.randomized, ch.involutive);
}
