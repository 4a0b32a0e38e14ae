use amrforge_web::{corrupt_text, linearize_text, random_text, smatch_text};
use serde_json::Value;

const FIG1: &str = "(p / possible :domain (g / go :arg0 (b / boy)) :polarity (n / negative))";

fn json(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn linearize_golden_graph() {
    let v = json(linearize_text(FIG1).unwrap());
    assert_eq!(v["tokens"], "( <Z0> possible :domain ( <Z1> go :arg0 ( <Z2> boy ) ) :polarity ( <Z3> negative ) )");
    assert_eq!(v["stats"]["size"], 4);
}

#[test]
fn corrupt_restores() {
    let v = json(corrupt_text(FIG1, 7, 0.5, 0.5, 0.0).unwrap());
    assert_eq!(v["restored"], v["original"]);
    assert_eq!(v["masked_nodes"].as_array().unwrap().len(), 2);
    assert!(corrupt_text(FIG1, 7, 1.5, 0.0, 0.0).is_err());
}

#[test]
fn smatch_pair() {
    let v = json(smatch_text("(w / want-01 :ARG0 (b / boy))", "(w / want-01 :ARG0 (g / girl))", 4).unwrap());
    assert_eq!(v["f1"], 0.75);
    assert_eq!(v["breakdown"]["ner"], Value::Null);
    assert!(smatch_text("(a / b", FIG1, 4).unwrap_err().contains("1:"));
}

#[test]
fn random_graphs_parse() {
    for seed in 0..20 {
        assert!(linearize_text(&random_text(seed, 12)).is_ok());
    }
}
