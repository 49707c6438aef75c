//! Property tests. `PROPTEST_CASES` and `PROPTEST_RNG_SEED` control the runs.

use std::collections::BTreeMap;
use std::sync::Arc;

use darbouxkit::cdga::{Point, StandardFormCdga};
use darbouxkit::darboux::{build_darboux, nondegenerate_at, DarbouxLayout, DarbouxSpec};
use darbouxkit::dcrit::{derived_crit, glue_check, GlueDatum};
use darbouxkit::expr::parse_element;
use darbouxkit::graded::{AlgebraElement, GeneratorSet, Q, Sym};
use darbouxkit::model;
use darbouxkit::motive::{evaluate, GroupKind, MorphismKind, MotiveElement, Universe, POINT};
use darbouxkit::vanishing::{builtin_datum, motivic_nearby, strict_transform_check};
use num_traits::Zero;
use proptest::prelude::*;

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

// ------------------------------------------------------------ graded core

/// x, u in degree 0; e, f in degree −1; w in degree −2.
fn graded_set() -> Arc<GeneratorSet> {
    GeneratorSet::new(vec![
        ("x".into(), 0),
        ("u".into(), 0),
        ("e".into(), -1),
        ("f".into(), -1),
        ("w".into(), -2),
    ])
    .unwrap()
}

/// Symbol `i < 5` is a generator, `i ≥ 5` the form symbol over generator `i − 5`.
fn sym(i: usize) -> Sym {
    if i < 5 {
        Sym::alg(i)
    } else {
        Sym::form(i - 5)
    }
}

fn sym_parity(set: &GeneratorSet, i: usize) -> u8 {
    let d = set.get(i % 5).degree.rem_euclid(2) as u8;
    if i < 5 {
        d
    } else {
        1 - d
    }
}

fn product(set: &Arc<GeneratorSet>, syms: &[usize]) -> AlgebraElement {
    syms.iter().fold(AlgebraElement::one(set), |acc, &i| &acc * &AlgebraElement::sym(set, sym(i)))
}

fn element(set: &Arc<GeneratorSet>, terms: &[(i8, Vec<usize>)]) -> AlgebraElement {
    terms.iter().fold(AlgebraElement::zero(set), |acc, (c, syms)| {
        &acc + &product(set, syms).scale(&q(i64::from(*c)))
    })
}

fn terms_strategy(max_sym: usize) -> impl Strategy<Value = Vec<(i8, Vec<usize>)>> {
    prop::collection::vec((-3i8..=3, prop::collection::vec(0..max_sym, 0..4)), 0..4)
}

/// Sign of bubble-sorting the positions `order` back into place, counting
/// only swaps of two odd symbols of `syms`.
fn bubble_sign(set: &GeneratorSet, syms: &[usize], order: &[usize]) -> i64 {
    let mut v = order.to_vec();
    let mut sign = 1;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                if sym_parity(set, syms[v[j]]) == 1 && sym_parity(set, syms[v[j + 1]]) == 1 {
                    sign = -sign;
                }
                v.swap(j, j + 1);
            }
        }
    }
    sign
}

proptest! {
    #[test]
    fn koszul_sign_matches_bubble_sort(syms in prop::collection::vec(0usize..10, 1..6), perm in any::<prop::sample::Index>()) {
        let set = graded_set();
        let mut shuffled: Vec<usize> = (0..syms.len()).collect();
        let k = perm.index(syms.len());
        shuffled.rotate_left(k);
        if syms.len() > 2 {
            shuffled.swap(0, syms.len() - 1);
        }
        let reordered: Vec<usize> = shuffled.iter().map(|&i| syms[i]).collect();
        let sign = bubble_sign(&set, &syms, &shuffled);
        prop_assert_eq!(product(&set, &reordered), product(&set, &syms).scale(&q(sign)));
    }

    #[test]
    fn graded_commutativity(a in prop::collection::vec(0usize..10, 0..4), b in prop::collection::vec(0usize..10, 0..4)) {
        let set = graded_set();
        let (x, y) = (product(&set, &a), product(&set, &b));
        let pa: u8 = a.iter().map(|&i| sym_parity(&set, i)).sum::<u8>() % 2;
        let pb: u8 = b.iter().map(|&i| sym_parity(&set, i)).sum::<u8>() % 2;
        let sign = if pa * pb == 1 { -1 } else { 1 };
        prop_assert_eq!(&x * &y, (&y * &x).scale(&q(sign)));
    }

    #[test]
    fn associativity(a in terms_strategy(10), b in terms_strategy(10), c in terms_strategy(10)) {
        let set = graded_set();
        let (a, b, c) = (element(&set, &a), element(&set, &b), element(&set, &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn de_rham_squares_to_zero(a in terms_strategy(10)) {
        let set = graded_set();
        let a = element(&set, &a);
        prop_assert!(a.de_rham().de_rham().is_zero());
    }

    #[test]
    fn leibniz_and_mixed_partials(a in prop::collection::vec(0usize..5, 0..4), b in terms_strategy(5), g in 0usize..5, h in 0usize..5) {
        let set = graded_set();
        let a_el = product(&set, &a);
        let b_el = element(&set, &b);
        let pa: u8 = a.iter().map(|&i| sym_parity(&set, i)).sum::<u8>() % 2;
        let pg = sym_parity(&set, g);
        let sign = if pa * pg == 1 { -1 } else { 1 };
        let lhs = (&a_el * &b_el).partial(g);
        let rhs = &(&a_el.partial(g) * &b_el) + &(&a_el * &b_el.partial(g)).scale(&q(sign));
        prop_assert_eq!(lhs, rhs);
        let ph = sym_parity(&set, h);
        let sign = if pg * ph == 1 { -1 } else { 1 };
        prop_assert_eq!(b_el.partial(h).partial(g), b_el.partial(g).partial(h).scale(&q(sign)));
    }
}

#[test]
fn odd_generators_square_to_zero() {
    let set = graded_set();
    for g in set.gens().iter().filter(|g| g.degree % 2 != 0) {
        let e = AlgebraElement::gen(&set, &g.name).unwrap();
        assert!((&e * &e).is_zero());
    }
}

// ------------------------------------------------------------ cdga

fn small_poly() -> impl Strategy<Value = String> {
    prop::collection::vec((-3i64..=3, 0u32..3, 0u32..3), 1..4).prop_map(|ts| {
        ts.iter().map(|(c, i, j)| format!("({c})*x^{i}*y^{j}")).collect::<Vec<_>>().join(" + ")
    })
}

/// Base x, y; a1, a2 in degree −1 with images vanishing at `p`; b in degree −2.
fn koszul_like(r: &[String; 4], p: (i64, i64), b_image: &str, swap: bool) -> Result<StandardFormCdga, String> {
    let tier1 = if swap { ["a2", "a1"] } else { ["a1", "a2"] };
    let set = GeneratorSet::new(vec![
        ("x".into(), 0),
        ("y".into(), 0),
        (tier1[0].into(), -1),
        (tier1[1].into(), -1),
        ("b".into(), -2),
    ])
    .unwrap();
    let (px, py) = p;
    let e = |t: &str| parse_element(t, &set).unwrap();
    let da1 = format!("(x - ({px}))*({}) + (y - ({py}))*({})", r[0], r[1]);
    let da2 = format!("(x - ({px}))*({}) + (y - ({py}))*({})", r[2], r[3]);
    let images = BTreeMap::from([
        (set.lookup("a1").unwrap(), e(&da1)),
        (set.lookup("a2").unwrap(), e(&da2)),
        (set.lookup("b").unwrap(), e(&b_image.replace("DA1", &da1).replace("DA2", &da2))),
    ]);
    StandardFormCdga::build(&set, images).map_err(|e| e.to_string())
}

fn cdga_point(p: (i64, i64)) -> Point {
    BTreeMap::from([("x".to_string(), q(p.0)), ("y".to_string(), q(p.1))])
}

proptest! {
    #[test]
    fn cdga_invariants(r in [small_poly(), small_poly(), small_poly(), small_poly()], px in -2i64..=2, py in -2i64..=2, closed in any::<bool>()) {
        let b_image = if closed { "(DA2)*a1 - (DA1)*a2" } else { "a1" };
        let built = koszul_like(&r, (px, py), b_image, false);
        let swapped = koszul_like(&r, (px, py), b_image, true);
        prop_assert_eq!(built.is_ok(), swapped.is_ok());
        // d²(b) for the open case is d(a1), which vanishes only when its image does.
        let set = GeneratorSet::new(vec![("x".into(), 0), ("y".into(), 0)]).unwrap();
        let da1 = parse_element(&format!("(x - ({px}))*({}) + (y - ({py}))*({})", r[0], r[1]), &set).unwrap();
        prop_assert_eq!(built.is_ok(), closed || da1.is_zero());
        let Ok(a) = built else { return Ok(()) };
        let p = cdga_point((px, py));
        for rel in a.h0_presentation() {
            prop_assert!(rel.evaluate(&p).unwrap().is_zero());
        }
        let fc = a.fibre_complex(&p).unwrap();
        for (d, m) in &fc.differentials {
            if let Some(next) = fc.differentials.get(&(d + 1)) {
                prop_assert!(next.mul(m).is_zero());
            }
        }
        if a.is_minimal_at(&p).unwrap() {
            let dims = a.cohomology_dims(&p).unwrap();
            let counts = a.tier_counts();
            for (i, &c) in counts.iter().enumerate() {
                prop_assert_eq!(dims.get(&-(i as i32)).copied().unwrap_or(0), c);
            }
        }
    }
}

// ------------------------------------------------------------ darboux and dcrit

fn x_poly(vars: &'static [&'static str]) -> impl Strategy<Value = String> {
    prop::collection::vec((-3i64..=3, prop::collection::vec(0u32..3, vars.len())), 1..4).prop_map(move |ts| {
        ts.iter()
            .map(|(c, es)| {
                let mut t = format!("({c})");
                for (v, e) in vars.iter().zip(es) {
                    t.push_str(&format!("*{v}^{e}"));
                }
                t
            })
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

proptest! {
    #[test]
    fn k_minus_one_models(h in x_poly(&["x0_1", "x0_2", "x0_3"]), px in -3i64..=3, py in -3i64..=3) {
        let layout = DarbouxLayout::standard(-1, &[3], 0, 0);
        let set = layout.generator_set().unwrap();
        let spec = DarbouxSpec::new(layout.clone(), parse_element(&h, &set).unwrap()).unwrap();
        let model = build_darboux(&spec).unwrap();
        for c in model.identity_checks() {
            prop_assert!(c.passed(), "{}: {}", c.name, c.residual);
        }
        for (g, r) in model.bracket_checks() {
            prop_assert!(r.is_zero(), "{g}: {r}");
        }
        // Relabel within the block: reversed pair order.
        let mut relabeled = layout.clone();
        relabeled.pairs.reverse();
        let rset = relabeled.generator_set().unwrap();
        let rspec = DarbouxSpec::new(relabeled, parse_element(&h, &rset).unwrap()).unwrap();
        let rmodel = build_darboux(&rspec).unwrap();
        let p: Point = [("x0_1", px), ("x0_2", py), ("x0_3", px - py)].iter().map(|(n, v)| (n.to_string(), q(*v))).collect();
        prop_assert_eq!(
            nondegenerate_at(&model.omega0, model.set(), &p).unwrap(),
            nondegenerate_at(&rmodel.omega0, rmodel.set(), &p).unwrap()
        );
    }

    #[test]
    fn derived_crit_matches_hessian(quad in prop::collection::vec(-2i64..=2, 3), cubic in x_poly(&["x", "y"])) {
        let set = GeneratorSet::new(vec![("x".into(), 0), ("y".into(), 0)]).unwrap();
        let f_text = format!("({})*x^2 + ({})*x*y + ({})*y^2 + x^3*y^0*({cubic})*x^0", quad[0], quad[1], quad[2]);
        let f = parse_element(&f_text, &set).unwrap();
        let model = derived_crit(&f).unwrap();
        let jac: Vec<String> = set.gens().iter().map(|g| f.partial_by_name(&g.name).unwrap().to_string()).collect();
        let h0: Vec<String> = model.cdga.h0_presentation().iter().map(ToString::to_string).collect();
        prop_assert_eq!(h0, jac);
        let origin: Point = BTreeMap::from([("x".into(), q(0)), ("y".into(), q(0))]);
        let dims = model.cdga.cohomology_dims(&origin).unwrap();
        // Hessian at 0 is [[2a, b], [b, 2c]].
        let (a, b, c) = (quad[0], quad[1], quad[2]);
        let rank = if a == 0 && b == 0 && c == 0 { 0 } else if 4 * a * c - b * b != 0 { 2 } else { 1 };
        prop_assert_eq!(dims.get(&0).copied().unwrap_or(0), 2 - rank);
        prop_assert_eq!(dims.get(&-1).copied().unwrap_or(0), 2 - rank);
    }

    #[test]
    fn glue_is_monotone_and_reflexive(f in x_poly(&["x", "y"]), g in x_poly(&["x", "y"]), extra in x_poly(&["x", "y"])) {
        let set = GeneratorSet::new(vec![("x".into(), 0), ("y".into(), 0)]).unwrap();
        let theta: BTreeMap<String, AlgebraElement> =
            ["x", "y"].iter().map(|n| (n.to_string(), AlgebraElement::gen(&set, n).unwrap())).collect();
        let e = |t: &str| parse_element(t, &set).unwrap();
        let same = GlueDatum { v: set.clone(), ideal: vec![e(&g)], f: e(&f), f_prime: e(&f), theta: theta.clone(), theta_prime: theta.clone(), bound: None };
        prop_assert!(glue_check(&same).unwrap().member);
        let mut datum = GlueDatum { f_prime: e(&format!("{f} + {extra}")), ..same };
        let degree = datum.difference().unwrap().total_degree();
        let mut previous = false;
        for bound in degree..=degree + 2 {
            datum.bound = Some(bound);
            let o = glue_check(&datum).unwrap();
            prop_assert!(!previous || o.member);
            prop_assert!(!o.member || o.verify(&datum.ideal));
            previous = o.member;
        }
    }
}

// ------------------------------------------------------------ motives

fn universe() -> Universe {
    let mut u = Universe::new();
    u.declare_class("R", "X", 3, false, Some(q(4))).unwrap();
    u.declare_class("S", "X", 1, false, Some(q(2))).unwrap();
    u.declare_bundle("P", "X", Some(q(2))).unwrap();
    u.declare_bundle("Q", "X", Some(q(0))).unwrap();
    u.declare_morphism("f", "X", "Y", MorphismKind::Representable).unwrap();
    u.declare_morphism("g", "Y", "Z", MorphismKind::Smooth(1)).unwrap();
    u.declare_morphism("h", "X", "Z", MorphismKind::Composite(vec!["g".into(), "f".into()])).unwrap();
    u.declare_morphism("t", "T", "X", MorphismKind::Bundle(GroupKind::Gl(2))).unwrap();
    u
}

fn tree(leaves: &'static [&'static str]) -> impl Strategy<Value = String> {
    let leaf = prop::sample::select(leaves).prop_map(str::to_string);
    leaf.prop_recursive(3, 16, 2, |inner| {
        (inner.clone(), inner, 0..3).prop_map(|(a, b, op)| match op {
            0 => format!("({a} + {b})"),
            1 => format!("({a} - {b})"),
            _ => format!("({a} * {b})"),
        })
    })
}

const ALL: &[&str] = &["[R]", "[S]", "[P]", "L", "L^(1/2)", "L^(-3/2)", "mu(2)", "mu(3)", "Y(P)", "Y(P*Q)", "2", "inv(GL(2))"];
const EULER: &[&str] = &["[R]", "[S]", "[P]", "L", "L^(1/2)", "mu(3)", "Y(P)", "Y(Q)", "3", "-1"];
const TRIVIAL: &[&str] = &["[S]", "L", "GL(2)", "2", "one(X)"];

fn ev(u: &Universe, t: &str) -> MotiveElement {
    evaluate(t, u).unwrap_or_else(|e| panic!("{t}: {e}"))
}

proptest! {
    #[test]
    fn commutative_ring(a in tree(ALL), b in tree(ALL), c in tree(ALL)) {
        let u = universe();
        // Scalars live over the point; one(X) moves every side onto X.
        let e = |t: String| ev(&u, &format!("one(X) * ({t})"));
        prop_assert_eq!(e(format!("({a} * {b}) * {c}")), e(format!("{a} * ({b} * {c})")));
        prop_assert_eq!(e(format!("{a} * {b}")), e(format!("{b} * {a}")));
        prop_assert_eq!(e(format!("{a} * ({b} + {c})")), e(format!("{a} * {b} + {a} * {c}")));
    }

    #[test]
    fn half_powers_add(a in -9i64..=9, b in -9i64..=9) {
        let u = universe();
        prop_assert_eq!(ev(&u, &format!("L^({a}/2) * L^({b}/2)")), MotiveElement::l_half_pow(POINT, a + b));
    }

    #[test]
    fn trivial_products_agree(a in tree(TRIVIAL), b in tree(TRIVIAL)) {
        let u = universe();
        prop_assert_eq!(ev(&u, &format!("({a}) * ({b})")), ev(&u, &format!("({a}) . ({b})")));
    }

    #[test]
    fn mbar_is_an_idempotent_ring_morphism(a in tree(ALL), b in tree(ALL)) {
        let u = universe();
        let (x, y) = (ev(&u, &a), ev(&u, &b));
        let mx = u.mbar(&x).unwrap();
        prop_assert_eq!(u.mbar(&mx).unwrap(), mx.clone());
        let my = u.mbar(&y).unwrap();
        let lhs = u.mbar(&u.odot(&x, &y).unwrap()).unwrap();
        let rhs = u.mbar(&u.odot(&mx, &my).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let sum = u.mbar(&x.add(&y).unwrap()).unwrap();
        prop_assert_eq!(sum, mx.add(&my).unwrap());
    }

    #[test]
    fn euler_is_multiplicative(a in tree(EULER), b in tree(EULER)) {
        let u = universe();
        let t = BTreeMap::new();
        let (x, y) = (ev(&u, &a), ev(&u, &b));
        let prod = u.euler(&u.odot(&x, &y).unwrap(), &t).unwrap();
        prop_assert_eq!(prod, u.euler(&x, &t).unwrap() * u.euler(&y, &t).unwrap());
    }

    #[test]
    fn push_pull_functoriality(a in tree(ALL)) {
        let u = universe();
        prop_assert_eq!(ev(&u, &format!("push(h, {a})")), ev(&u, &format!("push(g, push(f, {a}))")));
        let down = format!("push(h, {a})");
        prop_assert_eq!(ev(&u, &format!("pull(h, {down})")), ev(&u, &format!("pull(f, pull(g, {down}))")));
        prop_assert_eq!(ev(&u, &format!("push(t, pull(t, {a}))")), ev(&u, &format!("GL(2) * one(X) * ({a})")));
    }
}

// ------------------------------------------------------------ vanishing and model files

fn builtin_name() -> impl Strategy<Value = String> {
    prop_oneof![
        (1u32..9).prop_map(|n| format!("power:{n}")),
        Just("node".to_string()),
        Just("zero".to_string()),
        (0u32..4).prop_map(|d| format!("zero:{d}")),
    ]
}

proptest! {
    #[test]
    fn nearby_is_additive(a in builtin_name(), b in builtin_name()) {
        let (x, y) = (builtin_datum(&a).unwrap(), builtin_datum(&b).unwrap());
        prop_assert!(strict_transform_check(&x).ok);
        let both = x.disjoint_union(&y);
        let sum = motivic_nearby(&x).unwrap().add(&motivic_nearby(&y).unwrap()).unwrap();
        prop_assert_eq!(motivic_nearby(&both).unwrap(), sum);
    }

    #[test]
    fn model_files_round_trip(
        base in prop::collection::vec("[a-e]", 1..3),
        degs in prop::collection::vec(-3i32..=0, 0..3),
        f in x_poly(&["x", "y"]),
        point in prop::collection::vec((-5i64..=5, 1i64..=4), 2),
        bound in prop::option::of(0u32..6),
        darboux in prop::sample::select(vec![
            (-1, "2", "x0_1^2 - x0_2"),
            (-3, "1, 2", "x0_1^2*x1_1*x1_2 + x1_1*x1_2"),
        ]),
    ) {
        let mut base = base;
        base.sort();
        base.dedup();
        let mut text = format!("[algebra A]\nbase {}\n", base.join(", "));
        for (i, d) in degs.iter().enumerate() {
            text.push_str(&format!("gen g{i} : {d}\n"));
        }
        text.push_str(&format!(
            "\n[chart C]\nvars x, y\nf = {f}\npoint x={}/{}, y={}/{}\n",
            point[0].0, point[0].1, point[1].0, point[1].1
        ));
        text.push_str(&format!("\n[glue G]\nvars x, y\nideal x, y\nf(x, y) = {f}\nf'(x, y) = {f}\n"));
        if let Some(b) = bound {
            text.push_str(&format!("bound {b}\n"));
        }
        let (k, blocks, h) = darboux;
        text.push_str(&format!("\n[darboux D]\nk {k}\nblocks {blocks}\nH = {h}\n"));
        text.push_str("\n[resolution R]\nbase X0\ndim 1\ndivisor E 2 1\nstratum E x0 = mu(2)\n");
        let parsed = model::parse(&text).unwrap();
        let printed = parsed.to_string();
        let again = model::parse(&printed).unwrap();
        prop_assert_eq!(&again, &parsed);
        prop_assert_eq!(again.to_string(), printed);
    }
}

#[test]
fn corpus_files_round_trip() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let parsed = model::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(model::parse(&parsed.to_string()).unwrap(), parsed, "{}", path.display());
    }
}
