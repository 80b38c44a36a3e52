"""Drive the convint command line over the bundled configs.

Runs a scalar solve, an excess-mass sweep, a fully tabulated instance,
and the three deliberately inadmissible configs, showing the exit code
and the named failing condition for each. Output directories land under
demos/out/.
"""

import json
import subprocess
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
CONFIGS = HERE / "configs"
OUT = HERE / "out"


def run(name, expect_code):
    out_dir = OUT / name
    proc = subprocess.run(
        [sys.executable, "-m", "convint.cli",
         "--config", str(CONFIGS / f"{name}.json"),
         "--out-dir", str(out_dir)],
        capture_output=True, text=True)
    banner = f"$ convint --config demos/configs/{name}.json"
    print(f"\n{banner}\n{'-' * len(banner)}")
    for line in (proc.stdout + proc.stderr).strip().splitlines():
        print(f"  {line}")
    print(f"  exit code {proc.returncode}")
    assert proc.returncode == expect_code, (name, proc.returncode)
    return out_dir


def main():
    if not (HERE / "data" / "kernel_gaussian.csv").exists():
        subprocess.run([sys.executable, str(HERE / "make_tables.py")],
                       check=True)

    out = run("flagship", expect_code=0)
    report = json.loads((out / "report.json").read_text())
    print(f"  -> report.json: xi = {report['spectral']['xi'][0]:.6f}, "
          f"{report['solve']['iterations']} iterations, residual "
          f"{report['solve']['residual_sup']:.3e}")

    out = run("eps_sweep", expect_code=0)
    report = json.loads((out / "report.json").read_text())
    print("  -> per-eps majorants on one shared grid:")
    for entry in report["entries"]:
        print(f"     eps = {entry['eps']:.2f}: "
              f"xi = {entry['spectral']['xi'][0]:.6f}, "
              f"{entry['solve']['iterations']} iterations")

    run("tabulated", expect_code=0)
    run("coupled_pair", expect_code=0)

    print("\nInadmissible inputs are refused with the condition named:")
    for name in ("unit_weight", "linear_map", "mismatched_scaling"):
        out = run(name, expect_code=2)
        report = json.loads((out / "report.json").read_text())
        failed = [c["condition"] for c in report["validation"]["checks"]
                  if not c["passed"]]
        print(f"  -> report.json records failing condition(s): {failed}")


if __name__ == "__main__":
    main()
