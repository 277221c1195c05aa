"""Fixture artifacts produced by driving the scqec CLI as a subprocess.

The plots package only ever sees the primary tool's documented file
formats, so the fixtures are generated the same way a user would."""

import subprocess
import sys

import pytest


def run_scqec(args, cwd):
    proc = subprocess.run(
        [sys.executable, "-m", "scqec.cli", *args],
        cwd=cwd, capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("artifacts")
    run_scqec(["synth", "--qubits", "16", "--ops", "120", "--parallelism",
               "6", "--seed", "3", "--out", str(root / "synth")], root)
    circuit = root / "synth" / "circuit.qasm"

    # one stats.csv covering all seven policies
    stats_lines = []
    for policy in range(7):
        out = root / f"braid{policy}"
        run_scqec(["braid", "--in", str(circuit), "--policy", str(policy),
                   "--p-phys", "1e-8", "--out", str(out)], root)
        header, row = (out / "stats.csv").read_text().splitlines()
        if not stats_lines:
            stats_lines.append(header)
        stats_lines.append(row)
    (root / "stats.csv").write_text("\n".join(stats_lines) + "\n")

    run_scqec(["teleport", "--in", str(circuit),
               "--out", str(root / "tp")], root)
    run_scqec(["sweep", "--p-grid", "1e-8", "--parallelism", "1.5,8",
               "--seed", "1", "--out", str(root / "sweep")], root)
    run_scqec(["scaling", "--parallelism", "1.5", "--p-phys", "1e-8",
               "--seed", "1", "--points", "7",
               "--out", str(root / "scaling")], root)
    return {
        "stats": root / "stats.csv",
        "window": root / "tp" / "window_sweep.csv",
        "boundary": root / "sweep" / "boundary.csv",
        "scaling": root / "scaling" / "scaling.csv",
        "gantt": root / "braid6" / "gantt.csv",
    }
