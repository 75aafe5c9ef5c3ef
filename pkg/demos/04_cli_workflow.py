"""Run a small scenario through the command-line front end.

Equivalent shell session:

    cavity-sse simulate configs/demo_angles.cfg --out runs/demo --workers 2
    cavity-sse emit runs/demo --figure fig4
    cavity-sse resume runs/demo          # no-op: the run is complete
"""

from pathlib import Path

from cavity_sse.cli import main

here = Path(__file__).parent
cfg = here / "configs" / "demo_angles.cfg"
out = Path("runs") / "demo"

assert main(["simulate", str(cfg), "--out", str(out), "--workers", "2"]) == 0
assert main(["emit", str(out), "--figure", "fig4"]) == 0
assert main(["resume", str(out)]) == 0
print((out / "fig4.csv").read_text().splitlines()[:4])
