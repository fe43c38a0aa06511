//! Python bindings: the main types and operations of the solver.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use bic_shg::flux::{bic_model, conservation_check, optimal_distance};
use bic_shg::oracle::sweep_argmax_sigma2;
use bic_shg::shg::solve_fields;
use bic_shg::siegert::{find_bound_states, resonance_k_scan, trace_curve, width, Parity};
use bic_shg::{Numerics, StructureParams};

fn err(e: bic_shg::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parity_of(sign: i32) -> PyResult<Parity> {
    match sign {
        1 => Ok(Parity::Symmetric),
        -1 => Ok(Parity::Antisymmetric),
        other => Err(PyValueError::new_err(format!(
            "parity must be +1 or -1, got {other}"
        ))),
    }
}

/// Geometry and material of the double cylinder array.
#[pyclass(name = "Structure")]
#[derive(Clone)]
struct PyStructure {
    params: StructureParams,
    num: Numerics,
}

#[pymethods]
impl PyStructure {
    #[new]
    #[pyo3(signature = (radius, eps_c, chi_c=0.0, kx=0.0))]
    fn new(radius: f64, eps_c: f64, chi_c: f64, kx: f64) -> PyResult<Self> {
        Ok(Self {
            params: StructureParams::new(radius, eps_c, chi_c, kx).map_err(err)?,
            num: Numerics::default(),
        })
    }

    /// Single-cylinder scattering phase delta_0(q).
    fn scattering_phase(&self, q: f64) -> f64 {
        self.params.delta0(q)
    }

    /// Reduced nonlinearity nu = chi_c / (4 pi (eps_c - 1)).
    fn nu(&self) -> f64 {
        self.params.nu()
    }

    /// Lattice sums (alpha, beta) at (q, qx, h) as complex numbers.
    fn lattice_sums(&self, q: f64, qx: f64, h: f64) -> PyResult<(Complex64, Complex64)> {
        let a =
            bic_shg::dispersion::alpha(q, qx, &self.params, self.num.lattice_tol).map_err(err)?;
        let b =
            bic_shg::dispersion::beta(q, qx, h, &self.params, self.num.lattice_tol).map_err(err)?;
        Ok((a, b))
    }

    /// Diffraction channels [(m, qz_re, qz_im, open)] at (q, qx).
    fn channels(&self, q: f64, qx: f64, m_max: i32) -> PyResult<Vec<(i32, f64, f64, bool)>> {
        let cs =
            bic_shg::channels::channel_set(q, qx, m_max, self.num.threshold_margin).map_err(err)?;
        Ok(cs
            .channels
            .iter()
            .map(|c| (c.m, c.qz.re, c.qz.im, c.open))
            .collect())
    }

    /// Resonance (k_r, Gamma) on the branch of the given parity at h.
    fn resonance(&self, h: f64, parity: i32) -> PyResult<(f64, f64)> {
        let p = parity_of(parity)?;
        let kr = resonance_k_scan(h, p, &self.params, &self.num).map_err(err)?;
        let gamma = width(h, kr, p, &self.params, &self.num).map_err(err)?;
        Ok((kr, gamma))
    }

    /// Resonance curve [(h, k_r, Gamma)] over [h_min, h_max] with given step.
    fn trace(
        &self,
        parity: i32,
        h_min: f64,
        h_max: f64,
        step: f64,
    ) -> PyResult<Vec<(f64, f64, f64)>> {
        let p = parity_of(parity)?;
        let pts = trace_curve(p, &self.params, &self.num, (h_min, h_max), step).map_err(err)?;
        Ok(pts.into_iter().map(|p| (p.h, p.kr, p.gamma)).collect())
    }

    /// Symmetric bound states n = 1..n_max as dicts.
    fn bound_states<'py>(
        &self,
        py: Python<'py>,
        n_max: usize,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let states =
            find_bound_states(Parity::Symmetric, &self.params, &self.num, n_max).map_err(err)?;
        states
            .iter()
            .map(|b| {
                let d = PyDict::new_bound(py);
                d.set_item("n", b.n)?;
                d.set_item("h_b", b.hb)?;
                d.set_item("k_b", b.kb)?;
                d.set_item("k_z_b", b.kzb)?;
                Ok(d)
            })
            .collect()
    }

    /// Nonlinear fields at h on the symmetric curve (mu at its limit 1).
    fn solve_fields<'py>(&self, py: Python<'py>, h: f64) -> PyResult<Bound<'py, PyDict>> {
        let sol =
            solve_fields(h, &self.params, &self.num, Complex64::new(1.0, 0.0)).map_err(err)?;
        let d = PyDict::new_bound(py);
        d.set_item("h", sol.h)?;
        d.set_item("k", sol.k)?;
        d.set_item("phi", sol.phi)?;
        d.set_item("e1_abs", sol.e1_abs)?;
        d.set_item("e1p", sol.e1p)?;
        d.set_item("e2p", sol.e2p)?;
        d.set_item("e2m", sol.e2m)?;
        d.set_item("tau_plus", sol.tau_plus)?;
        d.set_item("tau_minus", sol.tau_minus)?;
        d.set_item("valid", sol.valid)?;
        Ok(d)
    }

    /// Efficiency data of the n-th symmetric bound state.
    fn efficiency<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyDict>> {
        let states =
            find_bound_states(Parity::Symmetric, &self.params, &self.num, n).map_err(err)?;
        let bs = states[n - 1];
        let bm = bic_model(&bs, &self.params, &self.num).map_err(err)?;
        let d = PyDict::new_bound(py);
        d.set_item("n", n)?;
        d.set_item("h_b", bs.hb)?;
        d.set_item("k_b", bs.kb)?;
        d.set_item("sigma2_max_exact", bm.sigma2_max_exact())?;
        d.set_item("sigma2_max_leading", bm.sigma2_max_leading())?;
        d.set_item("sigma2_max_m0", bm.sigma2_max_m0(&self.params))?;
        d.set_item("delta0_kb", bm.delta0_kb)?;
        Ok(d)
    }

    /// Optimal inter-array distance report for the n-th bound state.
    fn optimal_distance<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyDict>> {
        let states =
            find_bound_states(Parity::Symmetric, &self.params, &self.num, n).map_err(err)?;
        let bs = states[n - 1];
        let bm = bic_model(&bs, &self.params, &self.num).map_err(err)?;
        let opt = optimal_distance(&bm, &self.params, &self.num).map_err(err)?;
        let window = (bs.hb + 0.05 * opt.delta_h, bs.hb + 5.0 * opt.delta_h);
        let (h_star, sigma2_star) =
            sweep_argmax_sigma2(&bm, &self.params, &self.num, window, 160).map_err(err)?;
        let budget = conservation_check(&bm, opt.h_opt[1], &self.params, &self.num).map_err(err)?;
        let d = PyDict::new_bound(py);
        d.set_item("h_b", bs.hb)?;
        d.set_item("h_opt", (opt.h_opt[0], opt.h_opt[1]))?;
        d.set_item("delta_h", opt.delta_h)?;
        d.set_item("delta_h_leading_order", opt.delta_h_leading)?;
        d.set_item("sigma2_at_opt", opt.sigma2_at_opt)?;
        d.set_item("sweep_argmax_h", h_star)?;
        d.set_item("sweep_argmax_sigma2", sigma2_star)?;
        d.set_item("conservation_residual", budget.residual)?;
        Ok(d)
    }
}

#[pymodule]
fn bic_shg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStructure>()?;
    Ok(())
}
