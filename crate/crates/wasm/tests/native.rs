use serde_json::Value;
use slb_wasm::{breakeven_json, evaluate_json, sweep_json, template_json};

#[test]
fn template_evaluates() {
    let v: Value = serde_json::from_str(&evaluate_json(&template_json()).unwrap()).unwrap();
    assert_eq!(v["recommendation"], "Indeterminate");
    assert_eq!(v["conditions"].as_array().unwrap().len(), 13);
    assert!((v["n_sl"].as_f64().unwrap() - 10598300.791657466).abs() < 1e-2);
}

#[test]
fn sweep_finds_the_crossing() {
    let v: Value = serde_json::from_str(&sweep_json(&template_json(), "S", 1e6, 2e7, 201).unwrap()).unwrap();
    assert_eq!(v["xs"].as_array().unwrap().len(), 201);
    let direct: Value = serde_json::from_str(&breakeven_json(&template_json(), "S", 0.0, 1e9).unwrap()).unwrap();
    let a = v["breakeven"].as_f64().unwrap();
    let b = direct["value"].as_f64().unwrap();
    // Both stop inside the same tolerance band; dN_sl/dS exceeds 1 here, so
    // the band is narrower in S than twice the tolerance on N_sl - N_b.
    let band = 2.0 * direct["tolerance"].as_f64().unwrap();
    assert!((a - b).abs() < band, "{a} vs {b}");
}

#[test]
fn errors_are_messages() {
    assert!(evaluate_json("{").unwrap_err().contains("line 1"));
    assert!(sweep_json(&template_json(), "S", 0.0, 1.0, 1).is_err());
    assert!(sweep_json(&template_json(), "nope", 0.0, 1.0, 10).is_err());
    assert!(breakeven_json(&template_json(), "S", 9e6, 1e7).unwrap_err().contains("sign"));
}
