"""Regenerate data/rts24_revised.m from data/case24_ieee_rts.m.

Operating point:
  * every bus load scaled by 1137/1332 (138-kV zone load of 1137 MW)
  * 138-kV zone generation capacity (buses 1, 2, 7) capped at 512 MW total
  * branches 23-26 rated 240 MVA (rateA) / 275 MVA (rateB)
  * active dispatch and voltage setpoints from an AC OPF (PYPOWER, default options)

Requires: pip install pypower numpy
"""
import copy
import os
import re
import sys

import numpy as np
from pypower.api import ppoption, runopf

HERE = os.path.dirname(os.path.abspath(__file__))
SRC = os.path.join(HERE, "..", "data", "case24_ieee_rts.m")
DST = os.path.join(HERE, "..", "data", "rts24_revised.m")


def load_matpower(path):
    text = open(path).read()
    case = {"version": "2"}
    case["baseMVA"] = float(re.search(r"mpc\.baseMVA\s*=\s*([\d.]+)", text).group(1))
    for name in ("bus", "gen", "branch", "gencost"):
        body = re.search(r"mpc\." + name + r"\s*=\s*\[(.*?)\];", text, re.S).group(1)
        rows = []
        for line in body.split("\n"):
            line = line.split("%")[0].strip().rstrip(";").strip()
            if line:
                rows.append([float(x) for x in line.split()])
        case[name] = np.array(rows)
    return case


def main():
    case = load_matpower(SRC)
    scale = 1137.0 / 1332.0
    case["bus"][:, 2:4] *= scale
    gen = case["gen"]
    low = np.isin(gen[:, 0], [1, 2, 7])
    gen[low, 8] *= 512.0 / gen[low, 8].sum()
    gen[low, 9] = np.minimum(gen[low, 9], gen[low, 8])
    case["branch"][22:26, 5] = 240.0
    case["branch"][22:26, 6] = 275.0

    result = runopf(copy.deepcopy(case), ppoption(VERBOSE=0, OUT_ALL=0))
    if not result["success"]:
        sys.exit("OPF failed")
    case["gen"][:, 1] = np.round(result["gen"][:, 1], 4)
    case["gen"][:, 5] = np.round(result["gen"][:, 5], 5)

    def fmt(rows, ncols):
        out = []
        for r in rows:
            out.append("\t" + "\t".join("%.10g" % v for v in r[:ncols]) + ";")
        return "\n".join(out)

    with open(DST, "w") as f:
        f.write("function mpc = rts24_revised\n")
        f.write("%RTS24_REVISED  IEEE 24-bus RTS with reduced load and tightened corridor ratings.\n")
        f.write("%   Generated by scripts/make_rts24_revised.py from case24_ieee_rts.m.\n")
        f.write("%   Loads x 1137/1332, 138-kV generation capped at 512 MW, branches 23-26\n")
        f.write("%   rated 240/275 MVA, dispatch from AC OPF.\n\n")
        f.write("mpc.version = '2';\n\nmpc.baseMVA = %g;\n\n" % case["baseMVA"])
        f.write("%% bus data\n%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n")
        f.write("mpc.bus = [\n" + fmt(case["bus"], 13) + "\n];\n\n")
        f.write("%% generator data\n%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n")
        f.write("mpc.gen = [\n" + fmt(case["gen"], 10) + "\n];\n\n")
        f.write("%% branch data\n%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n")
        f.write("mpc.branch = [\n" + fmt(case["branch"], 13) + "\n];\n")


if __name__ == "__main__":
    main()
