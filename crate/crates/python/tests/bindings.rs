use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(code: &str) {
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(exhaust_sentinel_py::exhaust_sentinel_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("es", module).unwrap();
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python code failed");
        }
    });
}

#[test]
fn simulate_and_score_round_trip() {
    run(r#"
recs = es.simulate(seed=1, n_normal=120, n_fault=8)
assert len(recs) == 128
m = es.Model.train(recs, features="hand", config="elm.n_hidden=30", seed=2)
s = m.score(recs)
assert all(v is None or 0.0 <= v <= 1.0 for v in s)
assert es.Model.from_json(m.to_json()).score(recs) == s
"#);
}

#[test]
fn roc_helpers_agree() {
    run(r#"
scores = [0.1, 0.4, 0.35, 0.8]
labels = [0, 0, 1, 1]
assert abs(es.auc(scores, labels) - 0.75) < 1e-12
fpr, tpr = es.roc(scores, labels)
assert fpr[0] == 0.0 and fpr[-1] == 1.0
"#);
}

#[test]
fn bad_inputs_raise_value_error() {
    run(r#"
for f in (lambda: es.Record(0, [1.0], 1.0, 1.0, "weird"),
          lambda: es.mean_normalize([]),
          lambda: es.auc([0.1, 0.2], [0, 0]),
          lambda: es.Model.train([], features="nope")):
    try:
        f()
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
"#);
}
