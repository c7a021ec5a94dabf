import numpy as np
import pytest
from hypothesis import given, strategies as st

from planemhd.core import (BoundaryData, FlowState, GridSpec,
                           InvalidStateError, KappaModel, PhysParams,
                           Trajectory, interpolate_to_nodes,
                           make_initial_state)


class TestGridSpec:
    def test_geometry(self):
        grid = GridSpec(16)
        assert grid.dx == pytest.approx(1 / 16)
        assert len(grid.cell_centers) == 16
        assert len(grid.node_positions) == 17
        assert grid.node_positions[0] == 0.0
        assert grid.node_positions[-1] == 1.0
        # centers sit halfway between nodes
        mid = 0.5 * (grid.node_positions[:-1] + grid.node_positions[1:])
        np.testing.assert_allclose(grid.cell_centers, mid)

    def test_too_coarse(self):
        with pytest.raises(InvalidStateError):
            GridSpec(4)


class TestParams:
    def test_kappa_model_validation(self):
        with pytest.raises(InvalidStateError):
            KappaModel(kappa1=0.0)
        with pytest.raises(InvalidStateError):
            KappaModel(kappa2=-1.0)
        with pytest.raises(InvalidStateError):
            KappaModel(q=0.0)

    def test_phys_params_validation(self):
        with pytest.raises(InvalidStateError):
            PhysParams(lam=0.0)
        with pytest.raises(InvalidStateError):
            PhysParams(mu=-1e-3)
        # mu = 0 selects the limit system and is allowed
        assert PhysParams(mu=0.0).mu == 0.0


class TestBoundaryData:
    def test_zero(self):
        bd = BoundaryData.zero()
        np.testing.assert_array_equal(bd.w_minus(3.0), [0.0, 0.0])

    def test_cosine_ramp_endpoints(self):
        bd = BoundaryData.cosine_ramp(amplitude=2.0, ramp_period=0.5)
        np.testing.assert_allclose(bd.w_minus(0.0), [0.0, 0.0])
        np.testing.assert_allclose(bd.w_minus(0.25), [1.0, 0.0])
        np.testing.assert_allclose(bd.w_minus(0.5), [2.0, 0.0])
        # held after the ramp
        np.testing.assert_allclose(bd.w_minus(10.0), [2.0, 0.0])

    def test_cosine_ramp_starts_flat(self):
        bd = BoundaryData.cosine_ramp(1.0, 0.25)
        eps = 1e-6
        assert bd.w_minus(eps)[0] < 1e-9


def _arrays(n):
    return dict(rho=np.ones(n), theta=np.ones(n), u=np.zeros(n + 1),
                w=np.zeros((n + 1, 2)), b=np.zeros((n + 1, 2)))


class TestFlowState:
    def test_valid(self):
        s = FlowState(t=0.0, **_arrays(8))
        assert s.n_cells == 8

    def test_arrays_read_only(self):
        s = FlowState(t=0.0, **_arrays(8))
        with pytest.raises(ValueError):
            s.rho[0] = 2.0

    def test_positivity_reports_index(self):
        fields = _arrays(8)
        fields["rho"] = fields["rho"].copy()
        fields["rho"][3] = -1.0
        with pytest.raises(InvalidStateError, match=r"rho\[3\]"):
            FlowState(t=0.0, **fields)

    def test_wall_constraints(self):
        fields = _arrays(8)
        fields["u"] = fields["u"].copy()
        fields["u"][0] = 0.1
        with pytest.raises(InvalidStateError, match="u must vanish"):
            FlowState(t=0.0, **fields)
        fields = _arrays(8)
        fields["b"] = fields["b"].copy()
        fields["b"][-1, 1] = 0.1
        with pytest.raises(InvalidStateError, match="b must vanish"):
            FlowState(t=0.0, **fields)

    def test_shape_mismatch(self):
        fields = _arrays(8)
        fields["u"] = np.zeros(8)
        with pytest.raises(InvalidStateError):
            FlowState(t=0.0, **fields)


class TestInterpolateToNodes:
    def test_constant(self):
        np.testing.assert_array_equal(interpolate_to_nodes(np.full(5, 3.0)),
                                      np.full(6, 3.0))

    def test_linear_field_exact_in_interior(self):
        grid = GridSpec(32)
        vals = 2.0 * grid.cell_centers + 1.0
        out = interpolate_to_nodes(vals)
        expected = 2.0 * grid.node_positions + 1.0
        np.testing.assert_allclose(out[1:-1], expected[1:-1])

    @given(st.integers(min_value=2, max_value=20),
           st.floats(-10, 10), st.floats(-10, 10))
    def test_linearity(self, n, a, b):
        rng = np.random.default_rng(n)
        f = rng.normal(size=n)
        g = rng.normal(size=n)
        lhs = interpolate_to_nodes(a * f + b * g)
        rhs = a * interpolate_to_nodes(f) + b * interpolate_to_nodes(g)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestMakeInitialState:
    def test_uniform(self):
        s = make_initial_state(GridSpec(8), "uniform")
        np.testing.assert_array_equal(s.rho, 1.0)
        np.testing.assert_array_equal(s.w, 0.0)

    def test_bump_peaks_in_center(self):
        s = make_initial_state(GridSpec(64), "bump")
        assert s.rho.argmax() in (31, 32)
        assert s.rho.max() > 1.1

    def test_unknown_preset(self):
        with pytest.raises(InvalidStateError, match="unknown preset"):
            make_initial_state(GridSpec(8), "vortex")

    def test_tabulated(self):
        n = 8
        w = np.zeros((n + 1, 2))
        w[:, 0] = np.linspace(0, 1, n + 1)
        s = make_initial_state(GridSpec(n),
                               {"rho": np.full(n, 2.0),
                                "theta": np.full(n, 0.5), "w": w})
        assert s.rho[0] == 2.0
        assert s.w[-1, 0] == 1.0

    def test_tabulated_wall_violations(self):
        n = 8
        u = np.zeros(n + 1)
        u[0] = 1.0
        with pytest.raises(InvalidStateError):
            make_initial_state(GridSpec(n), {"rho": np.ones(n),
                                             "theta": np.ones(n), "u": u})

    def test_boundary_data_sets_wall_w(self):
        bd = BoundaryData.constant([0.7, 0.0])
        s = make_initial_state(GridSpec(8), "transverse-rest", bd)
        assert s.w[0, 0] == 0.7
        assert s.w[-1, 0] == 0.7


class TestTrajectory:
    def test_times_must_increase(self):
        s = FlowState(t=0.0, **_arrays(8))
        with pytest.raises(InvalidStateError):
            Trajectory(snapshots=(s, s), snapshot_times=np.array([0.0, 0.0]),
                       diagnostics=(None, None))

    def test_final(self):
        s0 = FlowState(t=0.0, **_arrays(8))
        s1 = FlowState(t=0.5, **_arrays(8))
        traj = Trajectory(snapshots=(s0, s1),
                          snapshot_times=np.array([0.0, 0.5]),
                          diagnostics=(None, None))
        assert traj.final is s1
