use cfdim_core::cf::Words;
use cfdim_core::{convergents, cylinder, digit_stats, expand, gauss_step, Word};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `1/(a_1 + 1/(a_2 + ... + 1/a_n))` evaluated from the back, no continuants.
fn nested(digits: &[u64]) -> BigRational {
    let mut x = BigRational::zero();
    for &a in digits.iter().rev() {
        x = (BigRational::from_integer(BigInt::from(a)) + x).recip();
    }
    x
}

fn word(d: &[u64]) -> Word {
    Word::from_u64s(d.iter().copied()).unwrap()
}

fn small_word() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..=50, 1..=12)
}

#[test]
fn exhaustive_small_words() {
    // every word of length <= 8 over 1..=4: endpoints against the nested
    // oracle, determinant, length formula and both interval bounds
    let mut words = 0u64;
    let mut edge_cases = Vec::new();
    for n in 1..=8 {
        for w in Words::new(n, 4) {
            words += 1;
            let digits: Vec<u64> = w.iter().map(|&d| d as u64).collect();
            let wd = Word::from(w.as_slice());
            let c = cylinder(&wd);
            let a = nested(&digits);
            let mut bumped = digits.clone();
            *bumped.last_mut().unwrap() += 1;
            let b = nested(&bumped);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            assert_eq!((&c.left, &c.right), (&lo, &hi), "{wd}");

            let cv = convergents(&wd).unwrap();
            let (p, q) = (&cv[n - 1].p, &cv[n - 1].q);
            let (pp, qp) = if n > 1 { (cv[n - 2].p.clone(), cv[n - 2].q.clone()) } else { (BigUint::zero(), BigUint::one()) };
            let lhs = BigInt::from(p.clone()) * BigInt::from(qp.clone()) - BigInt::from(pp) * BigInt::from(q.clone());
            // p_n q_{n-1} - p_{n-1} q_n = (-1)^{n+1}
            let sign = if n % 2 == 0 { -1 } else { 1 };
            assert_eq!(lhs, BigInt::from(sign), "determinant at {wd}");

            let expect = BigRational::new(BigInt::one(), BigInt::from(q * (q + &qp)));
            assert_eq!(c.length, expect, "{wd}");
            let q2 = BigInt::from(q * q);
            let upper = BigRational::new(BigInt::one(), q2.clone());
            let lower = BigRational::new(BigInt::one(), q2 * 2);
            assert!(c.length < upper, "{wd}");
            assert!(c.length >= lower, "{wd}");
            if c.length == lower {
                edge_cases.push(wd.clone());
            }
            // q_n >= 2^{(n-1)/2}
            assert!(q * q >= BigUint::one() << (n - 1), "{wd}");
        }
    }
    assert_eq!(words, (1..=8).map(|n| 4u64.pow(n)).sum::<u64>());
    assert_eq!(edge_cases, vec![word(&[1])]);
}

#[test]
fn documented_examples() {
    assert_eq!(expand(&rat(7, 10), 10).unwrap(), word(&[1, 2, 3]));
    assert_eq!(expand(&rat(2, 3), 10).unwrap(), word(&[1, 2]));
    assert_eq!(expand(&rat(1, 2), 10).unwrap(), word(&[2]));
    let cv = convergents(&word(&[1, 2, 3])).unwrap();
    let pq: Vec<(u64, u64)> = cv.iter().map(|c| (c.p.to_u64().unwrap(), c.q.to_u64().unwrap())).collect();
    assert_eq!(pq, vec![(1, 1), (2, 3), (7, 10)]);
    let qs: Vec<u64> = convergents(&word(&[2, 1])).unwrap().iter().map(|c| c.q.to_u64().unwrap()).collect();
    assert_eq!(qs, vec![2, 3]);
    assert_eq!(cylinder(&word(&[1, 2])).length, rat(1, 12));
    assert_eq!(cylinder(&word(&[2, 2])).length, rat(1, 35));
    assert_eq!(gauss_step(&rat(7, 10)).unwrap(), rat(3, 7));
    assert_eq!(gauss_step(&rat(1, 2)).unwrap(), rat(0, 1));
    assert_eq!(gauss_step(&rat(2, 3)).unwrap(), rat(1, 2));
    let st = digit_stats(&word(&[5, 1, 1]));
    assert_eq!(st.s, vec![BigUint::from(5u32), BigUint::from(6u32), BigUint::from(7u32)]);
    assert_eq!(st.t_max, vec![BigUint::from(5u32); 3]);
    assert!(digit_stats(&Word::empty()).s.is_empty());
}

#[test]
fn known_convergents() {
    // golden ratio conjugate: q_n are Fibonacci numbers
    let cv = convergents(&word(&[1; 10])).unwrap();
    let qs: Vec<u64> = cv.iter().map(|c| c.q.to_u64().unwrap()).collect();
    assert_eq!(qs, vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    assert_eq!(cv[9].value(), rat(55, 89));
    // 355/113 - 3 = 16/113 = [7, 15, 1]
    assert_eq!(expand(&rat(16, 113), 10).unwrap(), word(&[7, 16]));
    assert_eq!(word(&[7, 16]).evaluate(), rat(16, 113));
}

#[test]
fn cylinder_examples() {
    let c = cylinder(&word(&[1]));
    assert_eq!((c.left, c.right), (rat(1, 2), rat(1, 1)));
    let c = cylinder(&word(&[1, 1]));
    assert_eq!((c.left.clone(), c.right.clone()), (rat(1, 2), rat(2, 3)));
    assert_eq!(c.length, rat(1, 6));
    let c = cylinder(&Word::empty());
    assert_eq!((c.left, c.right), (rat(0, 1), rat(1, 1)));
}

#[test]
fn digit_stats_running_sums() {
    let st = digit_stats(&word(&[3, 1, 4, 1, 5]));
    let s: Vec<u64> = st.s.iter().map(|v| v.to_u64().unwrap()).collect();
    let t: Vec<u64> = st.t_max.iter().map(|v| v.to_u64().unwrap()).collect();
    assert_eq!(s, vec![3, 4, 8, 9, 14]);
    assert_eq!(t, vec![3, 3, 4, 4, 5]);
}

#[test]
fn rejects_bad_input() {
    assert!(Word::from_u64s([1, 0, 2]).is_err());
    assert!(expand(&rat(1, 1), 5).is_err());
    assert!(expand(&rat(0, 1), 5).is_err());
    assert!(gauss_step(&rat(3, 2)).is_err());
    assert!(convergents(&Word::empty()).is_err());
}

#[test]
fn words_serialize_as_decimal_strings() {
    let big = BigUint::from(10u32).pow(30);
    let w = Word::new(vec![BigUint::from(2u32), big.clone()]).unwrap();
    let s = serde_json::to_string(&w).unwrap();
    assert_eq!(s, format!("[\"2\",\"{big}\"]"));
    assert_eq!(serde_json::from_str::<Word>(&s).unwrap(), w);
    assert_eq!(serde_json::from_str::<Word>("[2, \"3\"]").unwrap(), word(&[2, 3]));
    assert!(serde_json::from_str::<Word>("[0]").is_err());
}

proptest! {
    #[test]
    fn evaluate_matches_nested(d in small_word()) {
        prop_assert_eq!(word(&d).evaluate(), nested(&d));
    }

    #[test]
    fn determinant_identity(d in small_word()) {
        let cv = convergents(&word(&d)).unwrap();
        for k in 1..cv.len() {
            let lhs = BigInt::from(cv[k].p.clone()) * BigInt::from(cv[k - 1].q.clone())
                - BigInt::from(cv[k - 1].p.clone()) * BigInt::from(cv[k].q.clone());
            // p_n q_{n-1} - p_{n-1} q_n = (-1)^{n+1} with n = k + 1
            let expect = if k % 2 == 0 { 1 } else { -1 };
            prop_assert_eq!(lhs, BigInt::from(expect));
        }
    }

    #[test]
    fn length_formula_and_bounds(d in small_word()) {
        let c = cylinder(&word(&d));
        prop_assert_eq!(&c.length, &c.length_from_continuants());
        prop_assert_eq!(&c.length, &(&c.right - &c.left));
        let q2 = BigInt::from(&c.q * &c.q);
        prop_assert!(c.length < BigRational::new(BigInt::one(), q2.clone()));
        prop_assert!(c.length >= BigRational::new(BigInt::one(), q2 * 2));
        let n = d.len();
        prop_assert!(&c.q * &c.q >= BigUint::one() << (n - 1));
    }

    #[test]
    fn children_nest_and_exhaust_parent(d in prop::collection::vec(1u64..=20, 0..=6), big_a in 1u64..=60) {
        let w = word(&d);
        let parent = cylinder(&w);
        let mut sum = BigRational::zero();
        for a in 1..=big_a {
            let child = cylinder(&w.child(a).unwrap());
            prop_assert!(parent.contains(&child));
            let next = &sum + &child.length;
            prop_assert!(next > sum);
            sum = next;
        }
        prop_assert!(sum < parent.length);
        let gap = (&parent.length - &sum) / &parent.length;
        prop_assert!(gap <= rat(3, big_a as i64));
    }

    #[test]
    fn convergents_are_reduced(d in small_word()) {
        use num_integer::Integer;
        for c in convergents(&word(&d)).unwrap() {
            prop_assert!(c.p.gcd(&c.q).is_one());
        }
    }

    #[test]
    fn expand_round_trip(q in 2u64..=500, p in 1u64..500) {
        prop_assume!(p < q);
        let x = rat(p as i64, q as i64);
        let w = expand(&x, 64).unwrap();
        prop_assert_eq!(w.evaluate(), x.clone());
        // greedy termination never leaves a trailing 1
        prop_assert!(w.digits().last().unwrap().to_u64().unwrap() >= 2);
        // and the point lies in the closure of its own cylinder
        let c = cylinder(&w);
        prop_assert!(c.left <= x && x <= c.right);
    }

    #[test]
    fn gauss_step_shifts_expansion(d in prop::collection::vec(1u64..=30, 2..=10)) {
        prop_assume!(*d.last().unwrap() >= 2);
        let x = nested(&d);
        let y = gauss_step(&x).unwrap();
        prop_assert_eq!(y, nested(&d[1..]));
    }
}
