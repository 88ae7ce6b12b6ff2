use std::ffi::CString;
use std::sync::Once;

use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::consortium::consortium as consortium_module;

fn python() {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        pyo3::append_to_inittab!(consortium_module);
        Python::initialize();
    });
}

/// Runs a snippet with the module imported as `c`; returns its globals.
fn run<'py>(py: Python<'py>, code: &str) -> Bound<'py, PyDict> {
    let globals = PyDict::new(py);
    let code = CString::new(format!("import consortium as c\n{code}")).unwrap();
    if let Err(e) = py.run(&code, Some(&globals), None) {
        e.print(py);
        panic!("python snippet failed");
    }
    globals
}

#[test]
fn taxonomy_is_exposed() {
    python();
    Python::attach(|py| {
        let g = run(
            py,
            "layout = dict(c.taxonomy())\n\
             total = sum(len(v) for v in layout.values())\n\
             cat = c.classify_report_type('PolicyBrief')",
        );
        assert_eq!(
            g.get_item("total")
                .unwrap()
                .unwrap()
                .extract::<usize>()
                .unwrap(),
            16
        );
        assert_eq!(
            g.get_item("cat")
                .unwrap()
                .unwrap()
                .extract::<String>()
                .unwrap(),
            "PolicyAnalysisAndAdvocacy"
        );
    });
}

#[test]
fn fixture_login_and_scope_errors() {
    python();
    Python::attach(|py| {
        let g = run(
            py,
            "k = c.Consortium.fixture('canonical')\n\
             admin = k.login('admin', 'admin-dev-password')\n\
             focal = k.login('focal-cmi-02', 'focal-dev-password')\n\
             n_cmis = len(k.list_cmis(admin))\n\
             mine = k.list_reports(focal)['total']\n\
             try:\n    k.dashboard_metrics(focal)\n    code = None\n\
             except c.ConsortiumError as e:\n    code = e.args[0]\n\
             head = k.head()",
        );
        let get = |k: &str| g.get_item(k).unwrap().unwrap();
        assert_eq!(get("n_cmis").extract::<usize>().unwrap(), 29);
        assert_eq!(get("mine").extract::<usize>().unwrap(), 4);
        assert_eq!(get("code").extract::<String>().unwrap(), "ScopeViolation");
        assert!(get("head").extract::<u64>().unwrap() > 0);
    });
}

#[test]
fn malformed_dicts_raise_value_error() {
    python();
    Python::attach(|py| {
        let g = run(
            py,
            "k = c.Consortium.fixture('canonical-registry')\n\
             s = k.login('admin', 'admin-dev-password')\n\
             try:\n    k.submit_report(s, {'title': 'no type'})\n    kind = None\n\
             except ValueError:\n    kind = 'ValueError'",
        );
        assert_eq!(
            g.get_item("kind")
                .unwrap()
                .unwrap()
                .extract::<String>()
                .unwrap(),
            "ValueError"
        );
    });
}
