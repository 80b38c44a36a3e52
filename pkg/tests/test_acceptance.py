"""Acceptance suite: one test per shipping criterion, each printing a
[criterion NN] PASS line with the measured quantities (visible with -s).

Criteria 4/5/6/7/8/10 run against the two reference instances built in
conftest; the rest are self-contained closed-form or property checks.
"""

import json
import time

import numpy as np
from conftest import build_pipeline, flagship_models, write_linear_nonlin_table

from convint import cli
from convint.algebra import (
    SpectralData,
    a_priori_iterations,
    normalize_to_unit_radius,
    perron_vector,
    solve_xi,
)
from convint.discretization import (
    FieldVector,
    apply_operator,
    build_grid,
    build_plan,
    choose_truncation,
    constant_field,
    estimate_quadrature_error,
)
from convint.kernels import GaussianKernel, kernel_scalars
from convint.nonlinearities import PowerNonlin, PowerPhi, g_eval
from convint.problem import ProblemSpec
from convint.solver import SolveOptions, solve, uniqueness_probe
from convint.weights import (
    ExpSqrtWeight,
    RationalWeight,
    build_b_matrix,
    excess_integral,
)


def test_criterion_01_scalar_majorant_closed_form():
    t0 = time.perf_counter()
    scalars = kernel_scalars(GaussianKernel([[1.0]]))
    excess = build_b_matrix((ExpSqrtWeight(0.1),), scalars)
    nonlins = (PowerNonlin(0.5, 1.0),)
    xi = solve_xi(scalars.a, excess.b, nonlins, [1.0])
    elapsed = time.perf_counter() - t0

    b = float(excess.b[0, 0])
    closed = 1.0 * (1.0 + b) ** (1.0 / (1.0 - 0.5))
    assert abs(b - 0.2) <= 1e-10
    assert abs(float(xi[0]) - closed) <= 1e-10
    assert abs(float(xi[0]) - 1.44) <= 1e-10
    assert elapsed < 1.0
    print(f"[criterion 01] PASS: b = {b:.12f}, xi = {float(xi[0]):.12f} "
          f"(closed form {closed:.12f}), {elapsed * 1e3:.1f} ms")


def test_criterion_02_excess_integrals_and_kernel_scalars():
    worst_closed, worst_quad = 0.0, 0.0
    for eps in (0.05, 0.1, 0.37):
        w = ExpSqrtWeight(eps)
        closed = excess_integral(w, method="closed")
        quad = excess_integral(w, method="quadrature")
        worst_closed = max(worst_closed, abs(closed - 2.0 * eps * np.sqrt(np.pi)))
        worst_quad = max(worst_quad, abs(closed - quad))
    for eps, alpha in ((0.08, 0.4), (0.1, 0.5), (0.03, 0.8)):
        w = RationalWeight(eps, alpha)
        closed = excess_integral(w, method="closed")
        quad = excess_integral(w, method="quadrature")
        formula = eps * np.pi / np.cos(np.pi * alpha / 2.0)
        worst_closed = max(worst_closed, abs(closed - formula))
        worst_quad = max(worst_quad, abs(closed - quad))
    assert worst_closed <= 1e-13
    assert worst_quad <= 1e-8

    coeffs = np.array([[0.8, 0.3], [0.3, 1.1]])
    sc = kernel_scalars(GaussianKernel(coeffs))
    rt_pi = np.sqrt(np.pi)
    worst_scal = max(
        float(np.max(np.abs(sc.a - coeffs))),
        float(np.max(np.abs(sc.sup - coeffs / rt_pi))),
        float(np.max(np.abs(sc.first_moment - coeffs / (2.0 * rt_pi)))),
    )
    assert worst_scal <= 1e-12
    print(f"[criterion 02] PASS: excess closed-vs-formula {worst_closed:.2e}, "
          f"closed-vs-quadrature {worst_quad:.2e}, kernel scalars {worst_scal:.2e}")


def test_criterion_03_eigenvector_identity_random_matrices():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260816)
    worst = 0.0
    for n in range(2, 9):
        raw = rng.uniform(0.2, 2.0, size=(n, n))
        mat, _ = normalize_to_unit_radius(0.5 * (raw + raw.T))
        eta = perron_vector(mat)
        worst = max(worst, float(np.max(np.abs(mat @ eta - eta))))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-10
    assert elapsed < 1.0
    print(f"[criterion 03] PASS: worst |A eta - eta| = {worst:.2e} over sizes "
          f"2..8, {elapsed * 1e3:.1f} ms")


def _replay_monotone(pipe):
    """Re-run the iteration, asserting the slab ordering at every step."""
    spectral, opts = pipe.spectral, pipe.opts
    slack = opts.mono_slack
    eta = spectral.eta[:, None]
    xi = spectral.xi[:, None]
    f_prev = constant_field(pipe.grid, spectral.xi, boundary=spectral.eta)
    assert np.all(f_prev.values <= xi + slack)
    for n in range(1, opts.max_iters + 1):
        f_next = apply_operator(pipe.plan, f_prev, pipe.spec.nonlins)
        assert np.all(f_next.values <= f_prev.values + slack)
        assert np.all(f_next.values >= eta - slack)
        assert np.all(f_next.values <= xi + slack)
        d = float(np.max(np.abs(f_next.values - f_prev.values)))
        f_prev = f_next
        if d <= opts.tol_stop:
            return n
    raise AssertionError("replay did not reach the step tolerance")


def test_criterion_04_monotone_iterates_in_slab(flagship, coupled):
    t0 = time.perf_counter()
    n_scalar = _replay_monotone(flagship)
    n_coupled = _replay_monotone(coupled)
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    print(f"[criterion 04] PASS: every iterate within "
          f"[eta - slack, previous] and below xi + slack; "
          f"{n_scalar} scalar and {n_coupled} coupled steps, {elapsed:.2f} s")


def test_criterion_05_geometric_rate_and_a_priori_count(flagship):
    tr = flagship.sol.trace
    slack = flagship.opts.mono_slack
    d = np.asarray(tr.d)
    bound = np.asarray(tr.step_bound)
    assert np.all(d <= bound + slack)
    n_cert = a_priori_iterations(flagship.spectral.sigma, flagship.spectral.k,
                                 1e-8)
    assert n_cert == 40
    assert flagship.opts.tol_stop == 1e-8
    assert flagship.sol.iterations <= n_cert
    print(f"[criterion 05] PASS: d_n within the geometric step bound for all "
          f"{len(d)} steps (worst d/bound = {np.max(d / bound):.3f}); "
          f"{flagship.sol.iterations} iterations <= certified {n_cert}")


def test_criterion_06_residual_and_unit_weight_variant(flagship):
    budget = flagship.opts.tol_stop + flagship.opts.mono_slack
    assert flagship.sol.residual_sup <= budget

    # with mu identically 1 the excess vanishes, the majorant collapses to
    # eta, and the constant eta field solves the system exactly
    models = flagship_models()
    kernel = models["kernel"]
    weights = (ExpSqrtWeight(0.0),)
    scalars = kernel_scalars(kernel)
    eta = perron_vector(scalars.a)
    nonlins = tuple(models["make_nonlins"](eta))
    spec = ProblemSpec(n=1, kernel=kernel, weights=weights, nonlins=nonlins,
                       phi=models["phi"])
    excess = build_b_matrix(weights, scalars)
    xi = solve_xi(scalars.a, excess.b, nonlins, eta)
    assert float(np.max(np.abs(xi - eta))) <= 1e-12

    g_sup = max(float(g_eval(nl, x)) for nl, x in zip(nonlins, xi))
    r = choose_truncation(kernel, weights, eta, 1e-8, g_sup)
    grid = build_grid(r, 4096)
    spectral = SpectralData(a=scalars.a, eta=eta, b=excess.b, xi=xi,
                            sigma=0.5, k=0.5)
    plan = build_plan(spec, grid, spectral)
    quad = estimate_quadrature_error(spec, plan, eta, xi)
    opts = SolveOptions(tol_stop=1e-8, mono_slack=10.0 * quad.total)
    sol = solve(spec, grid, spectral, plan, opts)

    flat = float(np.max(np.abs(sol.field.values - eta[:, None])))
    assert flat <= opts.mono_slack
    assert sol.residual_sup <= quad.total
    print(f"[criterion 06] PASS: residual {flagship.sol.residual_sup:.2e} <= "
          f"{budget:.2e}; unit-weight variant |f - eta| = {flat:.2e} with "
          f"residual {sol.residual_sup:.2e} <= quadrature error {quad.total:.2e}")


def test_criterion_07_edge_decay_and_tail_shrink(flagship_hires):
    asym = flagship_hires.sol.asymptotics
    edge = float(np.max(asym.edge_deviation))
    ratio = float(np.max(asym.half_tail_ratio))
    assert edge <= 1e-6
    assert ratio < 1.0

    doubled = build_pipeline(**flagship_models(), tol_trunc=1e-8,
                             n_cells=16384, tol_stop=1e-10, r_override=64.0)
    tail_base = float(asym.tail_integral[0])
    tail_doubled = float(doubled.sol.asymptotics.tail_integral[0])
    assert tail_doubled < tail_base
    print(f"[criterion 07] PASS: edge deviation {edge:.2e} <= 1e-6 at "
          f"R = {flagship_hires.grid.r:g}; half-tail ratio {ratio:.4f} < 1; "
          f"outer-band tail {tail_base:.2e} -> {tail_doubled:.2e} at doubled R")


def test_criterion_08_uniqueness_probe(flagship_hires, coupled):
    devs = {}
    for name, pipe in (("scalar", flagship_hires), ("coupled", coupled)):
        dev = uniqueness_probe(pipe.spec, pipe.grid, pipe.spectral, pipe.plan,
                               pipe.sol, scale=2.0, opts=pipe.opts)
        assert dev <= 2.0 * pipe.opts.tol_stop + pipe.opts.mono_slack
        devs[name] = dev
    print(f"[criterion 08] PASS: restart from 2 xi returns within "
          f"{devs['scalar']:.2e} (scalar) and {devs['coupled']:.2e} (coupled)")


def test_criterion_09_discretization_order():
    spec = ProblemSpec(n=1, kernel=GaussianKernel([[1.0]]),
                       weights=(ExpSqrtWeight(0.1),),
                       nonlins=(PowerNonlin(0.5, 1.0),),
                       phi=PowerPhi(0.5))
    r = 32.0
    outputs = []
    for n_cells in (1024, 2048, 4096):
        grid = build_grid(r, n_cells)
        plan = build_plan(spec, grid)
        values = (1.0 + 0.4 * np.exp(-grid.nodes**2 / 4.0))[None, :]
        f = FieldVector(grid=grid, values=values, boundary=np.array([1.0]))
        out = apply_operator(plan, f, spec.nonlins)
        outputs.append(out.values[0])
    coarse, mid, fine = outputs
    d1 = float(np.max(np.abs(coarse - mid[::2])))
    d2 = float(np.max(np.abs(mid[::2] - fine[::4])))
    order = np.log2(d1 / d2)
    assert order >= 1.8
    print(f"[criterion 09] PASS: three-grid differences {d1:.2e} -> {d2:.2e}, "
          f"observed order {order:.2f} >= 1.8")


def test_criterion_10_even_solution(flagship):
    vals = flagship.sol.field.values
    worst = float(np.max(np.abs(vals - vals[:, ::-1])))
    assert worst <= 1e-10
    print(f"[criterion 10] PASS: solution even in x to {worst:.2e}")


def test_criterion_11_named_condition_failures(tmp_path, capsys):
    def run_validate(name, doc):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(doc))
        code = cli.main(["--config", str(path), "--out-dir",
                         str(tmp_path / name)])
        return code, capsys.readouterr().out

    base = {
        "mode": "validate",
        "kernel": {"variant": "gaussian", "coeffs": [[1.0]]},
        "weights": [{"variant": "exp_sqrt", "eps": 0.1}],
        "nonlins": [{"variant": "power", "alpha": 0.5}],
        "phi": {"variant": "power", "p": 0.5},
    }

    unit_weight = dict(base, weights=[{"variant": "exp_sqrt", "eps": 0.0}])
    code, out = run_validate("unit_weight", unit_weight)
    assert code == 2 and "condition(s) a" in out

    table = write_linear_nonlin_table(tmp_path / "linear_g.csv")
    linear = dict(base,
                  nonlins=[{"variant": "tabulated", "path": table.name}],
                  phi={"variant": "power", "p": 1.0})
    code, out = run_validate("linear", linear)
    assert code == 2 and "condition(s) III" in out

    mismatched = dict(base,
                      nonlins=[{"variant": "power", "alpha": 0.9}],
                      phi={"variant": "power", "p": 0.01})
    code, out = run_validate("mismatched", mismatched)
    assert code == 2 and "condition(s) IV" in out

    print("[criterion 11] PASS: unit weight -> condition a, linear map -> "
          "condition III, mismatched scaling -> condition IV, each exit code 2")
