"""Generate the CSV tables referenced by demos/configs/*.json.

Writes four files into demos/data/: a sampled Gaussian kernel, a weight
excess table with an inverse-square-root blowup at zero, a square-root
response map, and a linear response map (deliberately inadmissible, used
by the failing-validation demo).
"""

from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).resolve().parent / "data"


def kernel_table(path, tau_max=10.0, n=2001):
    """Sample exp(-tau^2)/sqrt(pi) on [0, tau_max]; negative lags come from
    symmetry, so only tau >= 0 is stored."""
    tau = np.linspace(0.0, tau_max, n)
    rows = ["tau,k_1_1"]
    vals = np.exp(-tau * tau) / np.sqrt(np.pi)
    rows += [f"{a:.17g},{b:.17g}" for a, b in zip(tau, vals)]
    path.write_text("\n".join(rows) + "\n")


def excess_table(path, eps=0.1, gamma=0.5, t_max=40.0):
    """Sample mu(t) - 1 = eps e^{-t} / sqrt(t). The grid is geometric so the
    linear interpolant stays faithful where the blowup concentrates; the
    gamma header tells the loader which power to split off analytically."""
    t = np.concatenate([np.geomspace(1e-7, 0.5, 160),
                        np.geomspace(0.505, t_max, 360)])
    vals = eps * np.exp(-t) / np.sqrt(t)
    rows = [f"# gamma={gamma}", "t,mu_minus_1"]
    rows += [f"{a:.17g},{b:.17g}" for a, b in zip(t, vals)]
    path.write_text("\n".join(rows) + "\n")


def sqrt_table(path, u_top=4.0):
    # dense toward zero, where the square root's curvature concentrates
    u = np.concatenate([[0.0], np.geomspace(1e-8, u_top, 241)])
    rows = ["# eta=1.0", "u,g"]
    rows += [f"{a:.17g},{np.sqrt(a):.17g}" for a in u]
    path.write_text("\n".join(rows) + "\n")


def linear_table(path, u_top=3.0):
    # identity map: increasing but not strictly concave, so admission fails
    u = np.linspace(0.0, u_top, 61)
    rows = ["# eta=1.0", "u,g"]
    rows += [f"{a:.17g},{a:.17g}" for a in u]
    path.write_text("\n".join(rows) + "\n")


def main():
    DATA_DIR.mkdir(exist_ok=True)
    kernel_table(DATA_DIR / "kernel_gaussian.csv")
    excess_table(DATA_DIR / "excess_mu.csv")
    sqrt_table(DATA_DIR / "sqrt_map.csv")
    linear_table(DATA_DIR / "linear_map.csv")
    for name in sorted(p.name for p in DATA_DIR.glob("*.csv")):
        print(f"wrote demos/data/{name}")


if __name__ == "__main__":
    main()
