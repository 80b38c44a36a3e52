"""Shared fixtures: the two reference instances used across the suite.

Pipelines are expensive enough (a truncation search, a dense plan, a full
monotone solve) that each is built once per session. All stages run exactly
as the command line tool runs them, so the fixtures double as an end-to-end
check of the library API.
"""

from __future__ import annotations

from types import SimpleNamespace

import numpy as np
import pytest

from convint import (
    ExpSqrtWeight,
    GaussianKernel,
    PowerNonlin,
    PowerPhi,
    ProblemSpec,
    RationalWeight,
    RootPowerMeanNonlin,
    SaturatingExpNonlin,
    SolveOptions,
    SpectralData,
    build_b_matrix,
    build_grid,
    build_plan,
    choose_truncation,
    contraction_params,
    estimate_quadrature_error,
    g_eval,
    kernel_scalars,
    perron_vector,
    solve,
    solve_xi,
    spectral_radius,
    validate_problem,
)


def build_pipeline(kernel, weights, make_nonlins, phi, tol_trunc, n_cells,
                   tol_stop, r_override=None):
    """Run every stage on one instance and hand back all intermediates."""
    raw = kernel_scalars(kernel)
    rho = spectral_radius(raw.a)
    kern = kernel.rescaled(1.0 / rho)
    scalars = kernel_scalars(kern)
    eta = perron_vector(scalars.a)
    nonlins = tuple(make_nonlins(eta))
    spec = ProblemSpec(n=len(weights), kernel=kern, weights=tuple(weights),
                       nonlins=nonlins, phi=phi)
    validation = validate_problem(spec)
    assert validation.passed, validation.failing_ids

    excess = build_b_matrix(spec.weights, scalars)
    xi = solve_xi(scalars.a, excess.b, nonlins, eta)
    sigma, k = contraction_params(eta, xi, phi)
    spectral = SpectralData(a=scalars.a, eta=eta, b=excess.b, xi=xi,
                            sigma=sigma, k=k)

    g_sup = max(float(g_eval(nl, x)) for nl, x in zip(nonlins, xi))
    r = r_override if r_override is not None else choose_truncation(
        kern, spec.weights, eta, tol_trunc, g_sup)
    grid = build_grid(r, n_cells)
    plan = build_plan(spec, grid, spectral)
    quad = estimate_quadrature_error(spec, plan, eta, xi)
    opts = SolveOptions(tol_stop=tol_stop, mono_slack=10.0 * quad.total)
    sol = solve(spec, grid, spectral, plan, opts)
    return SimpleNamespace(spec=spec, scalars=scalars, rho=rho, eta=eta,
                           excess=excess, spectral=spectral,
                           validation=validation, grid=grid, plan=plan,
                           quad=quad, opts=opts, sol=sol)


def flagship_models():
    """Scalar instance: unit gaussian kernel, inverse-sqrt weight, square root."""
    return dict(kernel=GaussianKernel(coeffs=[[1.0]]),
                weights=(ExpSqrtWeight(eps=0.1),),
                make_nonlins=lambda eta: (
                    PowerNonlin(alpha=0.5, eta=float(eta[0])),),
                phi=PowerPhi(p=0.5))


def coupled_models():
    """Two components mixing both weight families and two nonlinearity shapes."""
    return dict(kernel=GaussianKernel(coeffs=[[0.5, 0.3], [0.3, 0.7]]),
                weights=(ExpSqrtWeight(eps=0.12),
                         RationalWeight(eps=0.08, alpha=0.4)),
                make_nonlins=lambda eta: (
                    RootPowerMeanNonlin(alpha=0.3, eta=float(eta[0])),
                    SaturatingExpNonlin(alpha=0.6, eta=float(eta[1]))),
                phi=PowerPhi(p=0.6))


@pytest.fixture(scope="session")
def flagship():
    return build_pipeline(**flagship_models(), tol_trunc=1e-8, n_cells=8192,
                          tol_stop=1e-8)


@pytest.fixture(scope="session")
def flagship_hires():
    # pushed well below the standard tolerance so the genuine solution tail
    # rises above the iteration-gap floor in the outer band
    return build_pipeline(**flagship_models(), tol_trunc=1e-8, n_cells=8192,
                          tol_stop=1e-10)


@pytest.fixture(scope="session")
def coupled():
    # the rational weight's t^-(1+alpha) tail forces a large radius; judged
    # at tol_trunc 1e-5 that lands at R = 2048
    return build_pipeline(**coupled_models(), tol_trunc=1e-5, n_cells=65536,
                          tol_stop=1e-8)


def write_kernel_table(path, coeffs=((1.0,),), tau_max=10.0, n=801):
    """CSV kernel table sampling c_ij exp(-tau^2)/sqrt(pi) on [0, tau_max]."""
    coeffs = np.asarray(coeffs, dtype=float)
    tau = np.linspace(0.0, tau_max, n)
    cols = ["tau"]
    data = [tau]
    for i in range(coeffs.shape[0]):
        for j in range(i, coeffs.shape[1]):
            cols.append(f"k_{i + 1}_{j + 1}")
            data.append(coeffs[i, j] * np.exp(-tau * tau) / np.sqrt(np.pi))
    rows = [",".join(cols)]
    for k in range(tau.size):
        rows.append(",".join(format(col[k], ".17g") for col in data))
    path.write_text("\n".join(rows) + "\n")
    return path


def write_excess_table(path, eps=0.1, gamma=0.5, t_max=40.0):
    """CSV excess table for mu - 1 = eps e^{-t} / sqrt(t), dense near zero."""
    t = np.concatenate([np.geomspace(1e-7, 0.5, 160),
                        np.geomspace(0.505, t_max, 360)])
    vals = eps * np.exp(-t) / np.sqrt(t)
    rows = [f"# gamma={gamma}", "t,mu_minus_1"]
    rows += [f"{a:.17g},{b:.17g}" for a, b in zip(t, vals)]
    path.write_text("\n".join(rows) + "\n")
    return path


def write_nonlin_table(path, eta=1.0, u_top=4.0):
    """CSV samples of G(u) = sqrt(u), geometric toward zero where the
    square root's curvature concentrates."""
    u = np.concatenate([[0.0], np.geomspace(1e-8, u_top, 241)])
    rows = [f"# eta={eta}", "u,g"]
    rows += [f"{a:.17g},{np.sqrt(a):.17g}" for a in u]
    path.write_text("\n".join(rows) + "\n")
    return path


def write_linear_nonlin_table(path, u_top=3.0):
    """CSV samples of the identity map; strictly increasing but not concave."""
    u = np.linspace(0.0, u_top, 61)
    rows = ["# eta=1.0", "u,g"]
    rows += [f"{a:.17g},{a:.17g}" for a in u]
    path.write_text("\n".join(rows) + "\n")
    return path
