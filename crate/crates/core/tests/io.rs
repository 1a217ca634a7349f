//! Round trips of the text formats: CSV tables, JSON reports, spec strings and valuation tables.

use proptest::prelude::*;
use zonalval::geometry::ConvexBody;
use zonalval::io::{
    fmt17, parse_body, parse_density, read_valuation_table, to_json, to_json_line, write_valuation_table, Table,
};

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn floats_survive_text(x in finite()) {
        prop_assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        let back: Vec<f64> = serde_json::from_str(&to_json_line(&vec![x, -x]).unwrap()).unwrap();
        prop_assert_eq!(back, vec![x, -x]);
    }

    #[test]
    fn tables_survive_csv(rows in prop::collection::vec(prop::collection::vec(finite(), 3), 0..20)) {
        let mut t = Table::new(&["s", "phi", "weighted"]);
        for r in rows {
            t.push(r);
        }
        let back = Table::from_csv(t.to_csv().unwrap().as_bytes()).unwrap();
        prop_assert_eq!(back, t);
    }
}

#[test]
fn densities_survive_json() {
    for spec in ["power:0.25", "poly:[1,0.5,-2]", "const:3", "linear:2", "a=1.5;power:0.7"] {
        let f = parse_density(spec, 3, 1).unwrap();
        let g = parse_density(&to_json(&f).unwrap(), 3, 1).unwrap();
        assert_eq!(f.a(), g.a());
        for s in [-0.9, -0.2, 0.0, 0.4, 0.99] {
            assert_eq!(f.eval_f(s).unwrap(), g.eval_f(s).unwrap(), "{spec} at {s}");
        }
    }
    assert!(parse_density("wave:1", 3, 1).is_err());
}

#[test]
fn bodies_survive_json() {
    for spec in [
        "cone:1.5",
        "cone:-0.5",
        "ball:2",
        "disk:0.7",
        "cylinder:1,2",
        "frustum:1,0.5,2",
        "cube",
        "revolution:0,1,1,0.5,2,0",
    ] {
        let k = parse_body(spec, 3).unwrap();
        let back = parse_body(&to_json_line(&k).unwrap(), 3).unwrap();
        assert_eq!(back, k, "{spec}");
    }
    assert!(parse_body("cone:1,2", 3).is_err());
    assert!(parse_body(&to_json_line(&ConvexBody::ball(4, 1.0).unwrap()).unwrap(), 3).is_err());
}

#[test]
fn valuation_tables_survive_csv() {
    let rows = vec![
        (ConvexBody::disk(3, 1.0).unwrap(), std::f64::consts::PI),
        (ConvexBody::cone(3, 0.3).unwrap(), -1e-17),
        (ConvexBody::cube(3).unwrap().with_translation(vec![0.1, 0.2, 0.3]).unwrap(), 6.0),
    ];
    let text = write_valuation_table(&rows).unwrap();
    assert_eq!(read_valuation_table(text.as_bytes()).unwrap(), rows);
}
