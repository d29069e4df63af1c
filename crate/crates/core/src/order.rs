use crate::poly::Mono;
use std::cmp::Ordering;

/// Monomial order on exponent vectors over a fixed variable list.
///
/// `Block { split }` is an elimination order: the first `split` variables
/// dominate (compare grevlex there first), so a Groebner basis element whose
/// leading term avoids the first block lies in the elimination ideal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermOrder {
    GrevLex,
    Lex,
    Block { split: usize },
}

fn grevlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        o => return o,
    }
    // reverse lexicographic on the reversed exponent difference:
    // the monomial with the smaller exponent in the last differing
    // position is larger.
    for i in (0..a.len()).rev() {
        match a[i].cmp(&b[i]) {
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
            Ordering::Equal => {}
        }
    }
    Ordering::Equal
}

fn lex(a: &[u32], b: &[u32]) -> Ordering {
    for i in 0..a.len() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

impl TermOrder {
    pub fn cmp_monos(&self, a: &Mono, b: &Mono) -> Ordering {
        debug_assert_eq!(a.len(), b.len());
        match *self {
            TermOrder::GrevLex => grevlex(a, b),
            TermOrder::Lex => lex(a, b),
            TermOrder::Block { split } => {
                let s = split.min(a.len());
                match grevlex(&a[..s], &b[..s]) {
                    Ordering::Equal => grevlex(&a[s..], &b[s..]),
                    o => o,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[u32]) -> Mono {
        v.to_vec().into_boxed_slice()
    }

    #[test]
    fn grevlex_standard_examples() {
        let ord = TermOrder::GrevLex;
        // x^2 > xy > y^2 > x > y > 1 on (x,y)
        let seq = [
            m(&[2, 0]),
            m(&[1, 1]),
            m(&[0, 2]),
            m(&[1, 0]),
            m(&[0, 1]),
            m(&[0, 0]),
        ];
        for w in seq.windows(2) {
            assert_eq!(ord.cmp_monos(&w[0], &w[1]), Ordering::Greater);
        }
        // grevlex tie-break: x*z vs y^2 on (x,y,z): deg equal,
        // last differing exponent: z=1 vs z=0 -> x*z < y^2
        assert_eq!(
            ord.cmp_monos(&m(&[1, 0, 1]), &m(&[0, 2, 0])),
            Ordering::Less
        );
    }

    #[test]
    fn orders_respect_multiplication() {
        use crate::rng::SplitMix64;
        let mut rng = SplitMix64::new(5);
        for ord in [TermOrder::GrevLex, TermOrder::Lex, TermOrder::Block { split: 2 }] {
            for _ in 0..200 {
                let a = m(&[
                    rng.i64_in(0, 4) as u32,
                    rng.i64_in(0, 4) as u32,
                    rng.i64_in(0, 4) as u32,
                    rng.i64_in(0, 4) as u32,
                ]);
                let b = m(&[
                    rng.i64_in(0, 4) as u32,
                    rng.i64_in(0, 4) as u32,
                    rng.i64_in(0, 4) as u32,
                    rng.i64_in(0, 4) as u32,
                ]);
                let c = m(&[
                    rng.i64_in(0, 4) as u32,
                    rng.i64_in(0, 4) as u32,
                    rng.i64_in(0, 4) as u32,
                    rng.i64_in(0, 4) as u32,
                ]);
                let ac: Mono = a.iter().zip(c.iter()).map(|(x, y)| x + y).collect();
                let bc: Mono = b.iter().zip(c.iter()).map(|(x, y)| x + y).collect();
                assert_eq!(ord.cmp_monos(&a, &b), ord.cmp_monos(&ac, &bc));
            }
        }
    }
}
