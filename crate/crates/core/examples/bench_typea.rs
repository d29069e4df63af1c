use eds_core::austere::{maximal_basis, MaximalKind};
use eds_core::frames::{semi_orthonormal_bundle, FrameBundleSpec, MetricMode};
use eds_core::pfaffian::standard_system;
use std::time::Instant;

fn gstat(label: &str, t0: &Instant) {
    use std::sync::atomic::Ordering::Relaxed;
    eprintln!(
        "[{:?}] {label} | gcd {} calls {:.2}s (slow {} calls {:.2}s)",
        t0.elapsed(),
        eds_core::poly::GCD_CALLS.load(Relaxed),
        eds_core::poly::GCD_NANOS.load(Relaxed) as f64 / 1e9,
        eds_core::poly::GCD_SLOW_CALLS.load(Relaxed),
        eds_core::poly::GCD_SLOW_NANOS.load(Relaxed) as f64 / 1e9,
    );
}

fn main() {
    let t0 = Instant::now();
    let frame = semi_orthonormal_bundle(&FrameBundleSpec {
        n: 4,
        r: 6,
        metric: MetricMode::Symbolic,
        params: vec![],
        constraints: vec![],
    });
    let space = maximal_basis(MaximalKind::A);
    let sys = standard_system(&frame, &space).unwrap();
    gstat("system built", &t0);
    let psi1 = frame.phi(2, 1).sub(&frame.phi(4, 3));
    let psi2 = frame.phi(3, 2).sub(&frame.phi(4, 1));
    let plus = sys.augment(&[psi1, psi2]).unwrap();
    gstat("augmented", &t0);
    let torsion = plus.torsion_locus().unwrap();
    gstat(&format!("torsion ({} gens)", torsion.len()), &t0);
    // restrict to the torsion locus and test involutivity
    let c1 = eds_core::poly::Polynomial::parse("g1_3 - g2_2 - g4_6 + g5_5").unwrap();
    let c2 = eds_core::poly::Polynomial::parse("g1_6 - 2*g2_5 + g3_4").unwrap();
    let restricted = plus
        .restrict(&[(c1, "g1_3".into()), (c2, "g1_6".into())])
        .unwrap();
    gstat(&format!("restricted (free = {})", restricted.free_generators().len()), &t0);
    let an = restricted.analyze(7).unwrap();
    let ch = &an.characters;
    gstat(
        &format!(
            "dim = {:?} chars = {:?} (coord {:?}) involutive = {}",
            ch.dim_integral_elements, ch.randomized, ch.coordinate, ch.involutive
        ),
        &t0,
    );
}
