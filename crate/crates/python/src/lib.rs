use pyo3::prelude::*;
#[pymodule]
fn hamchar(_m: &Bound<'_, PyModule>) -> PyResult<()> { Ok(()) }
