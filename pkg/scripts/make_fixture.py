"""Write the small synthetic CSV fixture used by the replication script.

Two dated series on a common calendar with a signed return column and a
slow sinusoidal trend, generated from fixed seeds.
"""

import argparse
from dataclasses import replace
from pathlib import Path

from memkit.experiments import vector_dgp
from memkit.ingest import write_csv
from memkit.sim import Sinusoid, simulate


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--T", type=int, default=1500)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default=str(Path(__file__).parent / "fixtures" / "synthetic_panel.csv"))
    a = p.parse_args(argv)
    spec = replace(vector_dgp(K=2), tau_profile=Sinusoid(0.25), seed=a.seed)
    sim = simulate(spec, a.T)
    panel = sim.data
    cols = {"ret": panel.returns, "vol_a": panel.X[:, 0], "vol_b": panel.X[:, 1]}
    write_csv(a.out, panel.dates, cols)
    print(f"wrote {a.out} ({a.T} rows)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
