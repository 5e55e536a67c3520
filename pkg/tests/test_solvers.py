import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm
from scipy.special import binom

from fracwalk import (
    DiscretizationConfig,
    InversionConfig,
    InversionMethod,
    Provenance,
    SemiMarkovModel,
    TransitionGrid,
    birth_chain,
    build_generator,
    exponential_model,
    ml_model,
    ml_survival,
    outgoing_flux,
    renewal_density,
    solve_backward_caputo,
    solve_backward_volterra,
    solve_forward_rl,
    solve_forward_volterra,
    solve_laplace,
    solve_renewal,
    stable_subordinated,
    tempered_stable_subordinated,
)
from fracwalk.solvers import gl_weights

CFG = DiscretizationConfig(dt=0.005, n_steps=200)
H2 = np.array([[0.0, 1.0], [1.0, 0.0]])


def _sup(a: TransitionGrid, b: TransitionGrid, stride_a=1, stride_b=1) -> float:
    return float(np.abs(a.values[::stride_a] - b.values[::stride_b]).max())


def test_gl_weights_are_signed_binomials():
    w = gl_weights(0.5, 6)
    ref = np.array([(-1.0) ** m * binom(0.5, m) for m in range(7)])
    assert np.abs(w - ref).max() <= 1e-15


def test_row_sums_conserved(model3):
    for solver in (solve_renewal, solve_backward_caputo, solve_forward_rl, solve_forward_volterra):
        grid = solver(model3, CFG)
        assert np.abs(grid.values.sum(axis=2) - 1.0).max() <= 1e-10
        assert grid.values.min() >= -1e-9


def test_solver_agreement(model3):
    laplace = solve_laplace(model3, CFG.t_grid()[::40])
    backward = solve_backward_caputo(model3, CFG)
    renewal = solve_renewal(model3, CFG)
    forward = solve_forward_rl(model3, CFG)
    # dt = 5e-3 here for speed; the tighter dt = 1e-3 tolerances are
    # enforced by the acceptance suite
    assert _sup(backward, laplace, stride_a=40) <= 5e-3
    assert _sup(renewal, laplace, stride_a=40) <= 5e-3
    assert _sup(forward, laplace, stride_a=40) <= 2e-2
    assert _sup(backward, forward) <= 2e-2
    assert _sup(backward, renewal) <= 1e-2


def test_markov_reduction(model3_markov):
    cfg = DiscretizationConfig(dt=1e-3, n_steps=1000)
    G = build_generator(model3_markov).matrix
    oracle = np.stack([expm(G * t) for t in cfg.t_grid()])
    for solver, tol in (
        (solve_backward_caputo, 1e-5),
        (solve_renewal, 1e-4),
        (solve_forward_rl, 1e-4),
        (solve_forward_volterra, 1e-4),
    ):
        grid = solver(model3_markov, cfg)
        assert np.abs(grid.values - oracle).max() <= tol, solver.__name__


def test_renewal_absorbing_diagonal_is_survival():
    # 2-state chain, state 1 absorbing: p_00(t) = survival exactly at nodes
    m = birth_chain(2, 1.0, [0.5, 0.5])
    grid = solve_renewal(m, DiscretizationConfig(dt=0.01, n_steps=100))
    surv = np.array([ml_survival(0.5, 1.0, t) for t in grid.t_grid])
    assert np.abs(grid.values[:, 0, 0] - surv).max() <= 1e-13
    assert np.abs(grid.values[:, 1, 1] - 1.0).max() <= 1e-15


def test_homogeneous_backward_matches_laplace():
    m = ml_model(H2, [1.0, 2.0], [0.6, 0.6])
    cfg = DiscretizationConfig(dt=0.005, n_steps=200)
    grid = solve_backward_caputo(m, cfg)
    lap = solve_laplace(m, cfg.t_grid()[::40])
    assert np.abs(grid.values[::40] - lap.values).max() <= 5e-3


def test_forward_fpp_matches_laplace():
    alphas = [0.6, 0.9, 0.6, 0.9]
    m = birth_chain(4, 1.0, alphas, wrap=True)
    cfg = DiscretizationConfig(dt=0.005, n_steps=200)
    fwd = solve_forward_rl(m, cfg)
    lap = solve_laplace(m, cfg.t_grid()[::40])
    assert np.abs(fwd.values[::40] - lap.values).max() <= 1e-2


def test_backward_volterra_stable_equals_caputo(model3):
    laws = tuple(stable_subordinated(a) for a in (0.5, 0.7, 0.9))
    m = SemiMarkovModel(3, model3.embedded_chain, model3.rates, laws)
    cfg = DiscretizationConfig(dt=0.01, n_steps=100)
    volterra = solve_backward_volterra(m, cfg)
    caputo = solve_backward_caputo(model3, cfg)
    # the stable kernel's integrated tail reproduces the L1 Caputo weights
    # exactly, so the two solvers produce identical arrays
    assert np.abs(volterra.values - caputo.values).max() <= 1e-13
    assert volterra.provenance is Provenance.BACKWARD_VOLTERRA


def test_backward_volterra_zero_generator_is_identity():
    law = stable_subordinated(0.5)
    m = SemiMarkovModel(
        2, np.eye(2), np.array([1.0, 1.0]), (law, law), diagonal_jumps_allowed=True
    )
    grid = solve_backward_volterra(m, DiscretizationConfig(dt=0.01, n_steps=50))
    assert np.abs(grid.values - np.eye(2)).max() <= 1e-10


def test_backward_volterra_numeric_tail_path():
    # drop the closed-form antiderivative to exercise the quadrature fallback
    from dataclasses import replace

    law = replace(stable_subordinated(0.5), levy_tail_integral=None)
    m = SemiMarkovModel(2, H2, np.array([1.0, 1.0]), (law, law))
    cfg = DiscretizationConfig(dt=0.02, n_steps=25)
    got = solve_backward_volterra(m, cfg)
    ref = solve_backward_caputo(ml_model(H2, [1.0, 1.0], [0.5, 0.5]), cfg)
    assert np.abs(got.values - ref.values).max() <= 1e-6


def test_forward_volterra_matches_forward_rl(model3):
    cfg = DiscretizationConfig(dt=0.005, n_steps=200)
    fv = solve_forward_volterra(model3, cfg)
    fr = solve_forward_rl(model3, cfg)
    assert np.abs(fv.values - fr.values).max() <= 2e-2
    lap = solve_laplace(model3, cfg.t_grid()[::40])
    assert np.abs(fv.values[::40] - lap.values).max() <= 1e-2


def test_forward_volterra_general_potential():
    # general law with the stable potential density routes through quadrature
    laws = tuple(stable_subordinated(a) for a in (0.5, 0.7))
    m = SemiMarkovModel(2, H2, np.array([1.0, 2.0]), laws)
    cfg = DiscretizationConfig(dt=0.01, n_steps=50)
    got = solve_forward_volterra(m, cfg)
    ref = solve_forward_volterra(ml_model(H2, [1.0, 2.0], [0.5, 0.7]), cfg)
    assert np.abs(got.values - ref.values).max() <= 1e-8


def test_tempered_stable_matches_laplace_route():
    laws = (tempered_stable_subordinated(0.5, 0.5), tempered_stable_subordinated(0.7, 0.5))
    m = SemiMarkovModel(2, H2, np.array([1.0, 2.0]), laws)
    cfg = DiscretizationConfig(dt=0.01, n_steps=100)
    grid = solve_backward_volterra(m, cfg)
    lap = solve_laplace(m, cfg.t_grid()[::20])
    assert np.abs(grid.values[::20] - lap.values).max() <= 1e-2


def test_forward_requires_no_self_jumps():
    m = birth_chain(3, 1.0, [0.5, 0.5, 0.5])  # absorbing self-jump at state 2
    with pytest.raises(ValueError, match="self|h\\[i,i\\]|h\\[i, i\\]"):
        solve_forward_rl(m, DiscretizationConfig(dt=0.01, n_steps=10))


def test_backward_order_of_accuracy():
    m = ml_model(H2, [1.0, 2.0], [0.5, 0.8])
    ref = solve_laplace(m, [1.0], InversionConfig(method=InversionMethod.TALBOT))
    errs = []
    for dt in (0.02, 0.01):
        grid = solve_backward_caputo(m, DiscretizationConfig(dt=dt, n_steps=int(round(1.0 / dt))))
        errs.append(np.abs(grid.at(1.0) - ref.at(1.0)).max())
    assert errs[1] <= 0.7 * errs[0]


def test_flux_markov_identity(model3_markov):
    cfg = DiscretizationConfig(dt=0.01, n_steps=100)
    grid = solve_backward_caputo(model3_markov, cfg)
    flux = outgoing_flux(grid, model3_markov)
    lam = model3_markov.rates
    assert np.abs(flux.j_minus - lam[None, None, :] * grid.values).max() <= 1e-12
    assert flux.balance_residual <= 1e-3


def test_flux_balance_fractional(model3):
    cfg = DiscretizationConfig(dt=0.01, n_steps=100)
    grid = solve_forward_rl(model3, cfg)
    flux = outgoing_flux(grid, model3)
    # residual bounded by the discretization error scale of the coarsest order
    assert flux.balance_residual <= 10.0 * cfg.dt ** min(model3.alphas)
    assert flux.j_minus.min() >= -1e-9


def test_flux_rejects_monte_carlo_grid(model3):
    fake = TransitionGrid(np.array([0.0, 1.0]), np.stack([np.eye(3)] * 2), Provenance.MONTE_CARLO)
    with pytest.raises(ValueError):
        outgoing_flux(fake, model3)


def test_renewal_density_values(model3):
    m = exponential_model(H2, [3.0, 1.0])
    assert renewal_density(m, 0, 0.37) == 3.0
    ml = ml_model(H2, [1.0, 1.0], [0.5, 0.5])
    assert renewal_density(ml, 0, 1.0) == pytest.approx(1.0 / math.sqrt(math.pi), abs=1e-10)
    laws = (stable_subordinated(0.5), stable_subordinated(0.5))
    gen = SemiMarkovModel(2, H2, np.array([2.0, 2.0]), laws)
    assert renewal_density(gen, 0, 1.0) == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-12)


def test_potential_density_laplace_transform():
    # int_0^inf e^{-st} u(t) dt = 1 / f(s) = s^{-alpha}
    for alpha in (0.3, 0.5, 0.8):
        u = stable_subordinated(alpha).potential_density
        s = 2.0
        val, _ = quad(lambda t: math.exp(-s * t) * u(t), 0.0, np.inf, limit=300)
        assert val == pytest.approx(s**-alpha, abs=1e-4)


def test_discretization_config_validation():
    with pytest.raises(ValueError):
        DiscretizationConfig(dt=0.0, n_steps=10)
    with pytest.raises(ValueError):
        DiscretizationConfig(dt=0.01, n_steps=0)
    with pytest.raises(ValueError):
        DiscretizationConfig(dt=0.01, n_steps=10, scheme_backward="Euler")
    cfg = DiscretizationConfig(dt=0.01, n_steps=200)
    assert cfg.horizon == pytest.approx(2.0)
    assert len(cfg.t_grid()) == 201
