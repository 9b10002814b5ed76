use super::*;
use crate::arith::is_prime;
use crate::linalg::F2Mat;

fn field(m: i64) -> QuadField {
    QuadField::new(m).unwrap()
}

fn squarefree(m: i64) -> bool {
    m != 0 && m != 1 && factor_u64(m.unsigned_abs()).iter().all(|&(_, e)| e == 1)
}

#[test]
fn rk2_examples() {
    assert_eq!(rk2_T2(&field(-105)), 2);
    assert_eq!(rk2_T2(&field(-1)), 0);
    assert_eq!(rk2_T2(&field(-7 * 17 * 23)), 3);
}

#[test]
fn norm_examples() {
    let n = norm_criteria(15);
    assert_eq!((n.two, n.minus_two, n.minus_one), (false, false, false));
    assert!(norm_criteria(119).two);
    let one = norm_criteria(1);
    assert!(one.two && one.minus_two && one.minus_one);
}

#[test]
fn two_routes_small() {
    for m in -300i64..=300 {
        if !squarefree(m) {
            continue;
        }
        let f = field(m);
        assert_eq!(rk2_T2_via_narrow_S(&f, None).unwrap(), rk2_T2(&f), "m={m}");
    }
}

#[test]
fn m15_paths() {
    let f = field(-15);
    let fast = redei_fast_path(&f).unwrap();
    assert_eq!(fast, F2Mat::from_rows(&[vec![1, 1, 1], vec![1, 1, 1]]));
    assert_eq!(fast.rank(), 1);
    assert_eq!(redei_matrix_T2(&f).unwrap().mat.rank(), 1);
    assert_eq!(rk4_T2(&f).unwrap(), 0);
    assert_eq!(rk4_T2_full(&f).unwrap(), 0);
    assert_eq!(rk4_K2_matrix(15).unwrap(), 1);
    assert_eq!(redei_matrix_classgroup(&f).unwrap(), F2Mat::from_rows(&[vec![1, 1], vec![1, 1]]));
}

#[test]
fn guards() {
    assert!(matches!(redei_fast_path(&field(-33)), Err(TmodError::WrongPath(_))));
    assert!(matches!(redei_fast_path(&field(-21)), Err(TmodError::WrongPath(_))));
    assert!(rk4_K2_matrix(21).is_err());
}

#[test]
fn small_fields() {
    assert_eq!(rk4_T2(&field(-7)).unwrap(), 0);
    assert_eq!(rk4_T2(&field(-1)).unwrap(), 0);
    assert_eq!(redei_matrix_T2(&field(-7)).unwrap().rows.len(), 2);
}

#[test]
fn generator_shapes() {
    for m in [105i64, 7 * 17 * 23, 3 * 7 * 11, 2 * 17 * 5, 15, 1, 2] {
        let f = field(-m);
        let r = redei_matrix_T2(&f).unwrap();
        let t = f.t();
        let nd = if f.two == Splitting::Split { 2 } else { 1 };
        assert_eq!(r.rows.len(), t + 1);
        for g in &r.rows[1..] {
            let i = g.index;
            let expect = if i <= f.k {
                1 + nd
            } else if i < t {
                2 + nd
            } else {
                0
            };
            assert_eq!(g.support_size(), expect, "m={m} i={i}");
        }
    }
}

#[test]
fn column_for_two_vanishes() {
    for m in 1i64..600 {
        if !squarefree(m) {
            continue;
        }
        let r = redei_matrix_T2_with_two(&field(-m)).unwrap();
        let j = r.cols.iter().position(|c| c.tag == KummerTag::Two).unwrap();
        assert!(r.mat.column(j).iter().all(|&b| b == 0), "m={m}");
    }
}

#[test]
fn fast_equals_full() {
    for m in (3i64..1500).step_by(4) {
        if !squarefree(m) {
            continue;
        }
        let f = field(-m);
        if fast_path_legal(&f) {
            let full = redei_matrix_T2(&f).unwrap().mat.rank();
            assert_eq!(redei_fast_path(&f).unwrap().rank(), full, "m={m}");
        }
    }
}

#[test]
fn rk4_matches_class_group_when_t2_is_class_like() {
    // R^Cl gives rk₄ Cl(−m) for m ≡ 3 mod 4
    for m in (3i64..2000).step_by(4) {
        if !squarefree(m) {
            continue;
        }
        let f = field(-m);
        let cg = ClassGroup::new(f.disc).unwrap();
        let s = cg.sylow(2);
        let rk = redei_matrix_classgroup(&f).unwrap().rank();
        assert_eq!(s.rank_divisible(2), f.t() - 1, "m={m}");
        assert_eq!(s.rank_divisible(4), f.t() - 1 - rk, "m={m}");
    }
}

#[test]
fn rows_of_rcl_sum_to_zero() {
    for m in (3i64..800).step_by(4) {
        if !squarefree(m) {
            continue;
        }
        let r = redei_matrix_classgroup(&field(-m)).unwrap();
        for j in 0..r.cols() {
            assert_eq!(r.column(j).iter().fold(0, |a, b| a ^ b), 0, "m={m}");
        }
    }
}

#[test]
fn beta_in_span() {
    for m in (7i64..3000).step_by(8) {
        if !squarefree(m) {
            continue;
        }
        let f = field(-m);
        if !fast_path_legal(&f) {
            continue;
        }
        let rcl = redei_matrix_classgroup(&f).unwrap();
        let beta = beta_column(&f).unwrap();
        assert_eq!(rcl.hcat(&beta).rank(), rcl.rank(), "m={m}");
    }
}

#[test]
fn comparison_theorem_small() {
    for m in (3i64..2000).step_by(4) {
        if !squarefree(m) {
            continue;
        }
        let f = field(-m);
        if fast_path_legal(&f) {
            assert_eq!(rk2_T2(&f), f.t() - 1);
            assert_eq!(rk4_T2_full(&f).unwrap() + 1, rk4_K2_matrix(m as u64).unwrap(), "m={m}");
        }
    }
}

#[test]
fn coates_examples() {
    assert_eq!(coates_order_valuation(&field(17), 2).unwrap(), 1);
    assert_eq!(coates_order_valuation(&field(7), 2).unwrap(), 2);
    assert_eq!(coates_order_valuation(&field(223), 2).unwrap(), 4);
    assert_eq!(coates_order_valuation(&field(2), 2).unwrap(), 0);
}

#[test]
fn lemma_units_small() {
    for l in (7u64..3000).filter(|&l| is_prime(l) && (l % 8 == 1 || l % 8 == 7)) {
        let eps = fundamental_unit(l as i64).unwrap();
        assert_eq!(nu2_t2_l_from_unit(&eps).unwrap(), coates_order_valuation(&field(l as i64), 2).unwrap(), "l={l}");
        let eps2 = fundamental_unit(2 * l as i64).unwrap();
        let (_, h) = narrow_class_number_real(2 * l as i64, None).unwrap();
        assert_eq!(
            nu2_t2_2l_from_unit(&eps2, h).unwrap(),
            coates_order_valuation(&field(2 * l as i64), 2).unwrap(),
            "2l={}",
            2 * l
        );
    }
}

#[test]
fn a_l_even_small() {
    for l in (3u64..5000).filter(|&l| is_prime(l) && l % 4 == 3) {
        let (a, _) = fundamental_unit(l as i64).unwrap().ab_wrapping().unwrap();
        assert_eq!(a % 2, 0, "l={l}");
    }
}

#[test]
fn imaginary_classifier_examples() {
    assert_eq!(classify_imaginary_prime_family(7).unwrap(), (OrderTag::Exact(2), OrderTag::Exact(2)));
    assert_eq!(classify_imaginary_prime_family(41).unwrap().0, OrderTag::Exact(4));
    assert_eq!(classify_imaginary_prime_family(17).unwrap(), (OrderTag::AtLeast(8), OrderTag::AtLeast(4)));
    assert!(classify_imaginary_prime_family(13).is_err());
}

#[test]
fn real_classifier_examples() {
    let t17 = classify_real_prime_family(17).unwrap();
    assert_eq!(t17.t2_l, OrderTag::Exact(2));
    assert_eq!(t17.h2_imag, OrderTag::Exact(4));
    assert_eq!(t17.t2_2l, OrderTag::Exact(2));
    let t7 = classify_real_prime_family(7).unwrap();
    assert_eq!((t7.t2_l, t7.t2_2l, t7.h2_imag), (OrderTag::Exact(4), OrderTag::Exact(2), OrderTag::Exact(4)));
}

#[test]
fn real_classifier_agrees_with_coates() {
    for l in (7u64..4000).filter(|&l| is_prime(l) && (l % 8 == 1 || l % 8 == 7)) {
        let tags = classify_real_prime_family(l).unwrap();
        let a = 1u64 << coates_order_valuation(&field(l as i64), 2).unwrap();
        let b = 1u64 << coates_order_valuation(&field(2 * l as i64), 2).unwrap();
        let disc = if l % 8 == 1 { -4 * l as i64 } else { -8 * l as i64 };
        let h2 = 1u64 << val_p(ClassGroup::new(disc).unwrap().h() as u128, 2);
        assert!(tags.t2_l.admits(a), "l={l} t2(l)={a} tag {}", tags.t2_l);
        assert!(tags.t2_2l.admits(b), "l={l} t2(2l)={b} tag {}", tags.t2_2l);
        assert!(tags.h2_imag.admits(h2), "l={l} h2={h2} tag {}", tags.h2_imag);
    }
}

#[test]
fn congruence_triples() {
    assert_eq!(real_prime_triple(7).unwrap(), (4, 4, 4));
    assert_eq!(real_prime_triple(223).unwrap(), (16, 256, 32));
    assert!(congruence_identity_check(23));
    assert!(congruence_identity_check(223));
}
