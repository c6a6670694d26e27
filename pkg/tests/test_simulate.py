import numpy as np
import pytest
import scipy.linalg as la

from graphwave import (
    CrankNicolson,
    EnergyTrace,
    State,
    build_mesh,
    check_dissipation,
    default_dt,
    fit_exponential,
    fit_power,
    initial_state,
    load_network,
    modal_initial_state,
    run,
    step,
)
from graphwave.errors import (
    EnergyUnderflow,
    IncompatibleInitialData,
    WindowTooShort,
)
from graphwave import presets

from util import build_system_from


def string(cells=16, a=1.0):
    return build_system_from(presets.single_kv_string(a=a, cells=cells))


def undamped(cells=16):
    return build_system_from(presets.undamped_string(cells=cells))


class TestInitialState:
    def test_sine_mode_interpolant(self):
        spec, sysd = undamped()
        st = initial_state(sysd.mesh, lambda x: np.sin(np.pi * x), lambda x: 0.0)
        nodes = sysd.mesh.edge_meshes[0].nodes[1:-1]
        assert np.allclose(st.u, np.sin(np.pi * nodes))
        assert np.all(st.v == 0)

    def test_dirichlet_violation_rejected(self):
        spec, sysd = undamped()
        with pytest.raises(IncompatibleInitialData):
            initial_state(sysd.mesh, lambda x: 1.0 + x, lambda x: 0.0)

    def test_center_mismatch_rejected(self):
        spec, sysd = build_system_from(presets.kv_star(cells=8))
        u0 = {0: lambda x: x, 1: lambda x: 2.0 * (1 - x), 2: lambda x: 1.0 - x}
        with pytest.raises(IncompatibleInitialData):
            initial_state(sysd.mesh, u0, lambda x: 0.0)

    def test_modal_state_is_unit_energy(self):
        spec, sysd = string()
        st = modal_initial_state(sysd, modes=(1, 2))
        assert sysd.energy(st.u, st.v) == pytest.approx(1.0, rel=1e-12)


class TestCrankNicolson:
    def test_undamped_conservation(self):
        spec, sysd = undamped(32)
        st = initial_state(sysd.mesh, lambda x: np.sin(np.pi * x), lambda x: 0.0)
        tr = run(sysd, st, dt=default_dt(sysd), T=1000 * default_dt(sysd))
        assert abs(tr.E[-1] - tr.E0) <= 1e-12 * tr.E0

    def test_damped_energy_monotone(self):
        spec, sysd = string(16)
        st = modal_initial_state(sysd)
        tr = run(sysd, st, dt=default_dt(sysd), T=5.0)
        assert np.all(np.diff(tr.E) <= 1e-10 * tr.E0)
        assert np.all(tr.D >= 0)

    def test_dissipation_identity_per_step(self):
        spec, sysd = string(16)
        st = modal_initial_state(sysd)
        tr = run(sysd, st, dt=default_dt(sysd), T=2.0)
        assert check_dissipation(tr, tol=1e-10)

    def test_dissipation_identity_telescopes_with_sparse_sampling(self):
        spec, sysd = string(16)
        st = modal_initial_state(sysd)
        tr = run(sysd, st, dt=default_dt(sysd), T=2.0, sample_every=7)
        assert check_dissipation(tr, tol=1e-10)

    def test_corrupted_trace_detected(self):
        spec, sysd = string(16)
        st = modal_initial_state(sysd)
        tr = run(sysd, st, dt=default_dt(sysd), T=2.0)
        tr.E[len(tr.E) // 2] *= 1.5
        assert not check_dissipation(tr)

    def test_matches_matrix_exponential_at_third_order(self):
        # 3-DOF mildly damped string against the dense exponential oracle;
        # dt small enough that the stiffest mode sits in the asymptotic regime
        spec, sysd = string(4, a=0.1)
        assert sysd.n == 3
        A = sysd.dense_generator
        st = modal_initial_state(sysd)
        z0 = np.concatenate([st.u, st.v])
        errs = []
        for dt in (2e-3, 1e-3):
            z_cn = step(sysd, st, dt)
            z_exact = la.expm(dt * A) @ z0
            errs.append(np.linalg.norm(np.concatenate([z_cn.u, z_cn.v]) - z_exact))
        assert errs[0] / errs[1] == pytest.approx(8.0, rel=0.35)

    def test_time_reversal_of_undamped_step(self):
        spec, sysd = undamped(16)
        st = initial_state(sysd.mesh, lambda x: np.sin(np.pi * x), lambda x: 0.0)
        dt = default_dt(sysd)
        fwd = step(sysd, st, dt)
        back = step(sysd, fwd, -dt)
        assert np.linalg.norm(back.u - st.u) <= 1e-12 * np.linalg.norm(st.u)
        assert np.linalg.norm(back.v - st.v) <= 1e-12

    def test_zero_state_stays_zero(self):
        spec, sysd = string(8)
        st = State(np.zeros(sysd.n), np.zeros(sysd.n), 0.0)
        tr = run(sysd, st, dt=default_dt(sysd), T=1.0)
        assert np.all(tr.E == 0)

    def test_overdamped_string_decays_hard(self):
        # modal roots of s^2 + mu s + mu = 0 keep Re <= -1, so E(10) < 1e-6 E0
        spec, sysd = string(32, a=1.0)
        st = modal_initial_state(sysd)
        tr = run(sysd, st, dt=default_dt(sysd), T=10.0)
        assert tr.E[-1] < 1e-6 * tr.E0

    def test_stepper_reuse_matches_one_shot(self):
        spec, sysd = string(8)
        st = modal_initial_state(sysd)
        stepper = CrankNicolson(sysd, 0.01)
        a = stepper.step(stepper.step(st))
        b = step(sysd, step(sysd, st, 0.01), 0.01)
        assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)


def synthetic_trace(E_of_t, T=50.0, n=501, t0=0.0):
    t = np.linspace(t0, T, n)
    E = E_of_t(t)
    return EnergyTrace(
        t=t, E=E, D=np.zeros_like(t),
        interval_dissipation=np.zeros(n - 1),
        diss_residual=np.zeros(n), dt=t[1] - t[0], sample_every=1,
        scheme="synthetic", anorm_est=1.0,
    )


class TestDecayFits:
    def test_exact_exponential(self):
        tr = synthetic_trace(lambda t: np.exp(-3.0 * t), T=8.0)
        fit = fit_exponential(tr, (0.5, 7.5))
        assert fit.rate == pytest.approx(1.5, rel=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_exact_power_law(self):
        tr = synthetic_trace(lambda t: t ** -4.0, T=100.0, t0=0.25)
        fit = fit_power(tr, (1.0, 100.0))
        assert fit.rate == pytest.approx(4.0, rel=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_window_too_short(self):
        tr = synthetic_trace(lambda t: np.exp(-t), T=50.0)
        with pytest.raises(WindowTooShort):
            fit_exponential(tr, (49.0, 50.0))
        with pytest.raises(WindowTooShort):
            fit_exponential(tr, (0.0, 50.0))  # window must exclude t = 0

    def test_energy_underflow(self):
        tr = synthetic_trace(lambda t: np.exp(-4.0 * t), T=50.0)
        with pytest.raises(EnergyUnderflow):
            fit_exponential(tr, (30.0, 50.0))

    def test_rate_stable_under_mesh_doubling(self):
        rates = []
        for cells in (16, 32):
            spec, sysd = build_system_from(presets.kv_star(cells=cells))
            st = modal_initial_state(sysd)
            tr = run(sysd, st, dt=default_dt(sysd), T=12.0, sample_every=2)
            rates.append(fit_exponential(tr, (2.0, 12.0)).rate)
        assert abs(rates[1] - rates[0]) <= 0.1 * abs(rates[0])


class TestTraceCsv:
    def test_roundtrip_format(self, tmp_path):
        spec, sysd = string(8)
        st = modal_initial_state(sysd)
        tr = run(sysd, st, dt=0.01, T=0.1)
        path = tmp_path / "trace.csv"
        tr.write_csv(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "t,E,D,diss_residual"
        data = np.loadtxt(lines[1:], delimiter=",")
        assert data.shape == (len(tr.t), 4)
        assert np.array_equal(data[:, 1], tr.E)
