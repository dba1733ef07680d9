"""Regenerate ndtri_oracle.json: standard normal quantiles at 60 digits.

Run once; the JSON is committed and the tests never import the library
when building it.  Uses mpmath's erfinv, independent of the rational
approximation under test.
"""

import json
from pathlib import Path

import mpmath
import numpy as np

def grid():
    lower = np.logspace(-300, -2, 150, endpoint=False)
    middle = np.linspace(0.01, 0.99, 700)
    upper = 1.0 - np.logspace(-2, -15, 151)[1:]
    return np.unique(np.concatenate([lower, middle, upper]))


def quantile(p):
    # 2p - 1 cancels catastrophically in the tails, so carry enough digits
    # to keep min(p, 1 - p) intact; the float p itself is converted exactly
    tail = min(p, 1 - p)
    with mpmath.workdps(60 + int(-mpmath.log10(tail))):
        return mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(p) - 1)


def main():
    p = grid()
    assert p.size == 1000 and 0 < p[0] and p[-1] < 1, p.size
    q = [quantile(float(x)) for x in p]
    out = {"p": [float(x).hex() for x in p], "q": [mpmath.nstr(v, 30) for v in q]}
    Path(__file__).with_name("ndtri_oracle.json").write_text(json.dumps(out, indent=0) + "\n")


if __name__ == "__main__":
    main()
