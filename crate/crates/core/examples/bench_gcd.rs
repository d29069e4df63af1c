use eds_core::poly::Polynomial;
use std::time::Instant;

fn main() {
    let a = Polynomial::parse("1/4 * l1^4 * l2^3 + 3/4 * l1^3 * l2^2 + 3/2 * l1^2 * l2^3 + 5/4 * l1^2 * l2 + 7/2 * l1 * l2^2 + 3/4 * l1 + 2 * l2").unwrap();
    let b = Polynomial::parse("l1^3 * l2^3 + 3 * l1^2 * l2^2 + 3 * l1 * l2 + 1").unwrap();
    let t = Instant::now();
    let g = a.gcd(&b);
    eprintln!("gcd in {:?}: {}", t.elapsed(), g);
    // repeat with the roles swapped and with a common factor
    let t = Instant::now();
    let f = a.mul(&b);
    let h = b.mul(&Polynomial::parse("l1 + 7*l2").unwrap());
    let g2 = f.gcd(&h);
    eprintln!("gcd2 in {:?}: {}", t.elapsed(), g2);
}
