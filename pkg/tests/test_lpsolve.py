import numpy as np
import pytest

from _oracles import brute_force_lp
from rarecc import (ContractError, InputError, LinearProgram, UnboundedError,
                    solve_lp)


def test_single_constraint():
    res = solve_lp(LinearProgram(objective=[1.0], A=[[1.0]], b=[3.0], hi=[10.0]))
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(3.0)
    assert res.objective == pytest.approx(3.0)


def test_simplex_face():
    res = solve_lp(LinearProgram(objective=[1.0, 1.0], A=[[1.0, 1.0]], b=[1.0]))
    assert res.status == "optimal"
    assert res.objective == pytest.approx(1.0)


def test_infeasible_status_not_exception():
    res = solve_lp(LinearProgram(objective=[1.0], A=[[-1.0]], b=[-2.0], hi=[1.0]))
    assert res.status == "infeasible"
    assert res.x is None


def test_phase_one_negative_rhs():
    # x >= 2 written as -x <= -2, maximize -x: optimum at x = 2
    res = solve_lp(LinearProgram(objective=[-1.0], A=[[-1.0]], b=[-2.0], hi=[5.0]))
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(2.0)


def test_unbounded_raises():
    with pytest.raises(UnboundedError):
        solve_lp(LinearProgram(objective=[1.0, 1.0], A=[[1.0, -1.0]], b=[1.0]))


def test_random_instances_match_vertex_enumeration():
    rng = np.random.default_rng(42)
    checked_infeasible = 0
    for trial in range(50):
        M = int(rng.integers(1, 8))
        N = int(rng.integers(1, 5))
        A = rng.uniform(-1.0, 2.0, (M, N))
        b = rng.uniform(-0.3, 3.0, M)
        f = rng.uniform(-1.0, 2.0, N)
        hi = rng.uniform(0.5, 4.0, N)
        res = solve_lp(LinearProgram(objective=f, A=A, b=b, hi=hi))
        ref = brute_force_lp(f, A, b, hi)
        if ref == -np.inf:
            assert res.status == "infeasible", trial
            checked_infeasible += 1
        else:
            assert res.status == "optimal", trial
            assert res.objective == pytest.approx(ref, rel=1e-8, abs=1e-8), trial
    assert checked_infeasible >= 1   # the grid covered both outcomes


def test_feasibility_residual_bound():
    rng = np.random.default_rng(11)
    for _ in range(20):
        M, N = 6, 4
        A = rng.uniform(0.0, 2.0, (M, N))
        b = rng.uniform(0.5, 3.0, M)
        f = rng.uniform(0.0, 2.0, N)
        res = solve_lp(LinearProgram(objective=f, A=A, b=b, hi=np.full(N, 5.0)))
        assert res.status == "optimal"
        assert res.residual <= 1e-9 * (1.0 + np.abs(b).max())


def test_deterministic_pivoting():
    rng = np.random.default_rng(1)
    A = rng.uniform(0.0, 1.0, (6, 4))
    b = rng.uniform(1.0, 2.0, 6)
    f = rng.uniform(0.0, 1.0, 4)
    lp = LinearProgram(objective=f, A=A, b=b, hi=np.full(4, 3.0))
    r1, r2 = solve_lp(lp), solve_lp(lp)
    assert r1.x.tobytes() == r2.x.tobytes()
    assert r1.iterations == r2.iterations


def test_shape_validation():
    with pytest.raises(ContractError):
        LinearProgram(objective=[1.0, 1.0], A=[[1.0]], b=[1.0])
    with pytest.raises(InputError):
        LinearProgram(objective=[np.inf], A=[[1.0]], b=[1.0])
    with pytest.raises(InputError):
        LinearProgram(objective=[1.0], A=[[1.0]], b=[1.0], lo=[-np.inf])


def test_lower_bounds_shift():
    # maximize x + y with x in [1, 2], y in [-1, 0.5], x + y <= 2
    res = solve_lp(LinearProgram(objective=[1.0, 1.0], A=[[1.0, 1.0]], b=[2.0],
                                 lo=[1.0, -1.0], hi=[2.0, 0.5]))
    assert res.status == "optimal"
    assert res.objective == pytest.approx(2.0)
    assert res.x[0] >= 1.0 - 1e-12 and res.x[1] >= -1.0 - 1e-12
