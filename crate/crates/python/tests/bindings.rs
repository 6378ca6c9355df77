use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(code: &std::ffi::CStr) {
    Python::attach(|py| {
        let locals = PyDict::new(py);
        locals.set_item("ooc", pyo3::wrap_pymodule!(ooc::ooc)(py)).unwrap();
        if let Err(e) = py.run(code, None, Some(&locals)) {
            panic!("{e}");
        }
    });
}

#[test]
fn sweep_matches_the_worked_example() {
    run(c"
rows, chosen = ooc.sweep([0.9, 0.1, 0.8], [True, False, False])
assert [r[:3] for r in rows] == [(1, 1.0, 1.0), (2, 0.5, 1.0), (3, 1 / 3, 1.0)], rows
assert rows[chosen][0] == 1
assert abs(ooc.perplexity([1.0, 2.0, 3.0]) - 7.38905609893065) < 1e-12
try:
    ooc.sweep([0.1], [False])
    raise AssertionError('no positives accepted')
except ValueError:
    pass
");
}

#[test]
fn corruption_is_seeded() {
    run(c"
docs = ooc.topic_corpus(documents=4, seed=1)
a, manifest = ooc.corrupt(docs, rate=3, seed=2, k=50, vocab_size=1000)
b, again = ooc.corrupt(docs, rate=3, seed=2, k=50, vocab_size=1000)
assert (a, manifest) == (b, again)
records = [l for l in manifest.splitlines() if not l.startswith('#')]
assert len(records) == 12, manifest
assert all(x[1].count('/NN') == y[1].count('/NN') for x, y in zip(docs, a))
");
}
