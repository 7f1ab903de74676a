#!/usr/bin/env python3
"""Regenerate the offline newform fixtures with PARI/GP (via cypari2).

Each level is written to <out>/level_<N>.json in the same canonical layout the
C++ cache writer produces (sorted keys, two-space indent, exact rationals as
strings), so a fixture can be dropped into a cache directory unchanged.

Orbit labels follow the LMFDB convention for trivial character: orbits are
ordered by dimension, then lexicographically by the traces Tr(a_n), n >= 1.

    pip install cypari2
    python3 tools/fixtures/gen_newform_fixtures.py --out data/fixtures/newforms 2805 14560
"""

import argparse
import json
import string
import sys
import time

import cypari2

SORT_TRACE_BOUND = 400


def letters(i):
    # a..z, ba, bb, ... (base-26 with 'a' as zero digit, as LMFDB does)
    if i == 0:
        return "a"
    out = ""
    while i > 0:
        out = string.ascii_lowercase[i % 26] + out
        i //= 26
    return out


def rat(pari, x):
    x = pari(x)
    n, d = pari.numerator(x), pari.denominator(x)
    return str(n) if d == 1 else f"{n}/{d}"


def primes_upto(n):
    return [p for p in range(2, n + 1) if all(p % q for q in range(2, int(p ** 0.5) + 1))]


def level_fixture(pari, level, prime_bound):
    mf = pari.mfinit([level, 2], 0)
    vecs, fields = pari.mfsplit(mf)[:2]
    # one coefficient matrix for the whole space; per-form mfcoefs redoes it
    M = pari.mfcoefs(mf, max(SORT_TRACE_BOUND, prime_bound))
    primes = primes_upto(prime_bound)
    forms = []
    for v, P in zip(vecs, fields):
        dim = int(pari.poldegree(P))
        coefs = M * v
        coefs = coefs / coefs[1]
        if dim > 1:
            red = pari.polredbest(P, 1)
            Q, root = red[0], red[1]
        else:
            Q, root = pari("x - 0"), None
        traces = [int(pari.trace(coefs[n])) for n in range(1, SORT_TRACE_BOUND + 1)]
        eig = []
        for p in primes:
            c = coefs[p]
            if dim == 1:
                coords = [rat(pari, c)]
            else:
                v = pari.subst(pari.lift(c), "y", root)
                poly = pari.lift(v)
                coords = [rat(pari, pari.polcoef(poly, i)) for i in range(dim)]
            eig.append({"p": p, "coords": coords})
        qcoef = [str(pari.polcoef(Q, i)) for i in range(dim + 1)]
        if dim == 1:
            qcoef = ["0", "1"]
        forms.append({"dim": dim, "traces": traces, "field_poly": qcoef,
                      "eigenvalues": eig})
    forms.sort(key=lambda f: (f["dim"], f["traces"]))
    out = []
    for i, f in enumerate(forms):
        out.append({
            "label": f"{level}.2.a.{letters(i)}",
            "dim": f["dim"],
            "field_poly": f["field_poly"],
            "eigenvalues": f["eigenvalues"],
        })
    return {
        "format": "apfive-newforms",
        "version": 1,
        "level": level,
        "weight": 2,
        "prime_bound": prime_bound,
        "source": "pari-" + ".".join(str(v) for v in pari("version()")[:3]),
        "newforms": out,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    ap.add_argument("--prime-bound", type=int, default=100)
    ap.add_argument("--stack", type=int, default=4 * 10 ** 9)
    ap.add_argument("levels", type=int, nargs="+")
    args = ap.parse_args()
    pari = cypari2.Pari()
    pari.allocatemem(args.stack)
    for level in args.levels:
        t0 = time.time()
        fx = level_fixture(pari, level, args.prime_bound)
        path = f"{args.out}/level_{level}.json"
        with open(path, "w") as fh:
            fh.write(json.dumps(fx, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
        print(f"level {level}: {len(fx['newforms'])} orbits in {time.time() - t0:.1f}s -> {path}",
              flush=True)


if __name__ == "__main__":
    sys.exit(main())
