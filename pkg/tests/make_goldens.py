"""Regenerate the frozen CLI outputs in ``tests/golden``.

Run from the repository root after a change that is meant to alter results:

    python3 tests/make_goldens.py
"""

import pathlib

from hardyplap import cli

GOLDEN_DIR = pathlib.Path(__file__).parent / "golden"

GOLDEN_RUNS = {
    "mu0_closed_form_N4": ["closed-form", "--N", "4", "--p", "2", "--family", "MU0"],
    "ground_state_N5_p3_mu-2": ["ground-state", "--N", "5", "--p", "3", "--mu", "-2"],
    "ball_N5_p2_mu0.5": ["ball", "--N", "5", "--p", "2", "--mu", "0.5", "--lambda-frac", "0.3"],
}


def main():
    GOLDEN_DIR.mkdir(exist_ok=True)
    for name, argv in GOLDEN_RUNS.items():
        code = cli.main(argv + ["--out", str(GOLDEN_DIR / name)])
        if code != cli.EXIT_OK:
            raise SystemExit(f"{name}: exit {code}")
        print(f"wrote {name}.csv and {name}.json")


if __name__ == "__main__":
    main()
