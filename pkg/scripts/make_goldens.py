"""Regenerate the shipped golden artifacts from the checked-in configs.

Run from the repository root after any change that alters numerics:

    python scripts/make_goldens.py
"""

import hashlib
import json
import os
import shutil
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "src"))

from drivendicke import cli  # noqa: E402


def main():
    golden = cli.golden_dir()
    os.makedirs(golden, exist_ok=True)

    fig2_dir = os.path.join(golden, "fig2_n15")
    shutil.rmtree(fig2_dir, ignore_errors=True)
    os.makedirs(fig2_dir)
    cfg = cli.parse_config(os.path.join(ROOT, "configs", "fig2_n15.toml"))
    cfg.save_states = False          # states are large; grids suffice
    cli.run_single(cfg, fig2_dir)

    fig3_dir = os.path.join(golden, "fig3_sweep")
    shutil.rmtree(fig3_dir, ignore_errors=True)
    os.makedirs(fig3_dir)
    cfg = cli.parse_config(os.path.join(ROOT, "configs", "fig3_sweep.toml"))
    cli.run_sweep(cfg, fig3_dir, threads=1)

    manifest = {"sha256": {}}
    for sub in ("fig2_n15", "fig3_sweep"):
        base = os.path.join(golden, sub)
        for name in sorted(os.listdir(base)):
            rel = f"{sub}/{name}"
            digest = hashlib.sha256(
                open(os.path.join(base, name), "rb").read()).hexdigest()
            manifest["sha256"][rel] = digest
    with open(os.path.join(golden, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"goldens written to {golden}")


if __name__ == "__main__":
    main()
