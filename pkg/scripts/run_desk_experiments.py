#!/usr/bin/env python3
"""Build the desk-scale experiment artifacts for the default base field.

Produces, under data/:
  order_cache.jsonl       warm arithmetic cache (append-only)
  spectrum_m2_x10.csv     length spectrum table to cutoff 10
and prints the headline counting and equidistribution trends.

Cold runtime is dominated by class-number certification of the largest
orders; warm reruns take seconds.
"""

import math
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from holonomy.cli import table_to_csv
from holonomy.fields import make_field
from holonomy.measure import TrigFunction, mu_of_trig
from holonomy.orders import LatticeSpec, OrderCache
from holonomy.reports import equi_report_function, equi_report_rectangle, pgt_report
from holonomy.spectrum import length_spectrum

X_MAX = 10.0
GRID = [4.0, 6.0, 8.0, 10.0]


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    data = os.path.join(here, "..", "data")
    os.makedirs(data, exist_ok=True)
    cache = OrderCache(os.path.join(data, "order_cache.jsonl"))
    K = make_field(2)
    spec = LatticeSpec.hilbert(K)
    t0 = time.time()
    table = length_spectrum(K, X_MAX, spec, cache)
    print(f"spectrum x={X_MAX}: {len(table.rows)} rows, {len(table.elliptic)} elliptic "
          f"({time.time()-t0:.0f}s)")
    with open(os.path.join(data, "spectrum_m2_x10.csv"), "w") as fh:
        fh.write(table_to_csv(table))

    rep = pgt_report(table, GRID)
    print(rep.to_text())
    for k in (2, 3):
        f = TrigFunction.from_char(k)
        r = equi_report_function(table, f, GRID)
        print(r.to_text())
    r = equi_report_rectangle(table, (-math.pi / 2, math.pi / 2), 16, GRID)
    print(r.to_text())


if __name__ == "__main__":
    main()
