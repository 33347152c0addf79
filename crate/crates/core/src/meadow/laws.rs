//! Randomized check of the signed-meadow-with-square-root equations.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Point, Scalar};

/// Outcome of checking one equation on a batch of random instances.
#[derive(Debug, Clone)]
pub struct LawReport {
    pub name: &'static str,
    pub samples: usize,
    pub failures: Vec<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A random rational; zero and small integers are drawn often since they
/// exercise the totalized corners.
pub fn random_scalar<R: Rng>(rng: &mut R) -> Scalar {
    match rng.gen_range(0..10) {
        0 => Scalar::zero(),
        1 => Scalar::int(rng.gen_range(-3..=3)),
        _ => Scalar::frac(rng.gen_range(-60..=60), rng.gen_range(1..=24)),
    }
}

/// A random value whose absolute value is a rational square.
pub fn random_square<R: Rng>(rng: &mut R) -> Scalar {
    let r = Scalar::frac(rng.gen_range(0..=30), rng.gen_range(1..=12));
    let sq = r.square();
    if rng.gen_bool(0.5) {
        -sq
    } else {
        sq
    }
}

fn sqrt(u: &Scalar) -> Scalar {
    u.sqrt_total().expect("representable radicand")
}

type Law = (&'static str, u8, fn(&[Scalar]) -> bool);

fn one() -> Scalar {
    Scalar::one()
}

fn laws() -> Vec<Law> {
    // arity 0xx: plain samples; 1xx: square-root samples (representable)
    vec![
        ("(u + v) + w = u + (v + w)", 3, |x| &(&x[0] + &x[1]) + &x[2] == &x[0] + &(&x[1] + &x[2])),
        ("u + v = v + u", 2, |x| &x[0] + &x[1] == &x[1] + &x[0]),
        ("u + 0 = u", 1, |x| &x[0] + &Scalar::zero() == x[0]),
        ("u + (-u) = 0", 1, |x| &x[0] + &(-&x[0]) == Scalar::zero()),
        ("(u * v) * w = u * (v * w)", 3, |x| &(&x[0] * &x[1]) * &x[2] == &x[0] * &(&x[1] * &x[2])),
        ("u * v = v * u", 2, |x| &x[0] * &x[1] == &x[1] * &x[0]),
        ("u * 1 = u", 1, |x| &x[0] * &one() == x[0]),
        ("u * (v + w) = u * v + u * w", 3, |x| &x[0] * &(&x[1] + &x[2]) == &(&x[0] * &x[1]) + &(&x[0] * &x[2])),
        ("(u^-1)^-1 = u", 1, |x| x[0].inv().inv() == x[0]),
        ("u * (u * u^-1) = u", 1, |x| &x[0] * &(&x[0] * &x[0].inv()) == x[0]),
        ("sign(u / u) = u / u", 1, |x| x[0].div(&x[0]).signum() == x[0].div(&x[0])),
        ("sign(1 - u / u) = 1 - u / u", 1, |x| {
            let q = &one() - &x[0].div(&x[0]);
            q.signum() == q
        }),
        ("sign(-1) = -1", 0, |_| (-one()).signum() == -one()),
        ("sign(u^-1) = sign(u)", 1, |x| x[0].inv().signum() == x[0].signum()),
        ("sign(u * v) = sign(u) * sign(v)", 2, |x| (&x[0] * &x[1]).signum() == &x[0].signum() * &x[1].signum()),
        ("(1 - (sign u - sign v)/(sign u - sign v)) * (sign(u + v) - sign(u)) = 0", 2, |x| {
            let d = &x[0].signum() - &x[1].signum();
            let lhs = &(&one() - &d.div(&d)) * &(&(&x[0] + &x[1]).signum() - &x[0].signum());
            lhs == Scalar::zero()
        }),
        ("sqrt(u^-1) = (sqrt u)^-1", 101, |x| sqrt(&x[0].inv()) == sqrt(&x[0]).inv()),
        ("sqrt(u * v) = sqrt(u) * sqrt(v)", 102, |x| sqrt(&(&x[0] * &x[1])) == &sqrt(&x[0]) * &sqrt(&x[1])),
        ("sqrt(u^2 * sign(u)) = u", 1, |x| sqrt(&(&x[0].square() * &x[0].signum())) == x[0]),
        ("sign(sqrt u - sqrt v) = sign(u - v)", 102, |x| {
            (&sqrt(&x[0]) - &sqrt(&x[1])).signum() == (&x[0] - &x[1]).signum()
        }),
    ]
}

fn derived() -> Vec<Law> {
    vec![
        ("0^-1 = 0", 0, |_| Scalar::zero().inv() == Scalar::zero()),
        ("sqrt(u) = -sqrt(-u)", 101, |x| sqrt(&x[0]) == -sqrt(&-&x[0])),
        ("u / u in {0, 1}", 1, |x| {
            let q = x[0].div(&x[0]);
            q == Scalar::zero() || q == one()
        }),
        ("lt/le/min/max via sign agree with the rational order", 2, |x| {
            let (a, b) = (&x[0], &x[1]);
            a.lt(b) == (a < b)
                && a.le(b) == (a <= b)
                && a.min2(b) == a.clone().min(b.clone())
                && a.max2(b) == a.clone().max(b.clone())
        }),
        ("sign(u) * u = |u|", 1, |x| &x[0].signum() * &x[0] == x[0].abs()),
    ]
}

fn run(list: Vec<Law>, samples: usize, rng: &mut ChaCha8Rng) -> Vec<LawReport> {
    list.into_iter()
        .map(|(name, arity, law)| {
            let (n, squares) = if arity >= 100 { (arity - 100, true) } else { (arity, false) };
            let mut failures = Vec::new();
            for _ in 0..samples {
                let args: Vec<Scalar> =
                    (0..n).map(|_| if squares { random_square(rng) } else { random_scalar(rng) }).collect();
                if !law(&args) {
                    failures.push(format!("{args:?}"));
                }
            }
            LawReport { name, samples, failures }
        })
        .collect()
}

/// Check every equation of the axiom table on `samples` random instances each.
pub fn check_table(samples: usize, seed: u64) -> Vec<LawReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run(laws(), samples, &mut rng)
}

/// Check derived facts (totalized inverse, odd square root, sign-defined order).
pub fn check_derived(samples: usize, seed: u64) -> Vec<LawReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    run(derived(), samples, &mut rng)
}

/// Symmetry and triangle inequality of the distance on collinear or
/// axis-aligned points, where distances stay rational.
pub fn check_distance(samples: usize, seed: u64) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd157);
    let mut failures = Vec::new();
    let point = |rng: &mut ChaCha8Rng| {
        let x = random_scalar(rng);
        match rng.gen_range(0..3) {
            0 => Point::new(x, Scalar::zero(), Scalar::zero()),
            1 => Point::new(Scalar::zero(), x, Scalar::zero()),
            _ => Point::new(&x * &Scalar::int(3), &x * &Scalar::int(4), Scalar::zero()),
        }
    };
    for _ in 0..samples {
        let (p, q, r) = (point(&mut rng), point(&mut rng), point(&mut rng));
        let (Ok(pq), Ok(qp)) = (p.dist(&q), q.dist(&p)) else { continue };
        if pq != qp {
            failures.push(format!("asymmetric {p} {q}"));
        }
        if let (Ok(qr), Ok(pr)) = (q.dist(&r), p.dist(&r)) {
            if !pr.le(&(&pq + &qr)) {
                failures.push(format!("triangle {p} {q} {r}"));
            }
        }
    }
    LawReport { name: "dist symmetric and triangle", samples, failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_laws_hold_on_small_batch() {
        for r in check_table(200, 1).into_iter().chain(check_derived(200, 1)) {
            assert!(r.passed(), "{}: {:?}", r.name, r.failures.first());
        }
        assert!(check_distance(200, 1).passed());
    }

    #[test]
    fn table_has_twenty_equations() {
        assert_eq!(check_table(1, 0).len(), 20);
    }
}
