# Copyright 2026 The svdgan Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Frozen reference values for the excess-risk bound, evaluated at 50 digits.

Usage: python3 genbound_oracle.py > ../data/genbound_oracle.csv
"""

import random

import mpmath

mpmath.mp.dps = 50


def bound(n, d, L, bx, bw, rho, delta, eps):
    beta = mpmath.mpf(bx)
    for w in bw:
        beta *= mpmath.mpf(w)
    n, d, L, rho = map(mpmath.mpf, (n, d, L, rho))
    arg = 2 * mpmath.sqrt(d * n) * L * beta
    assert arg > 1
    return (16 * rho / n
            + 48 * rho * beta * mpmath.sqrt(d * d * L * mpmath.log(arg)) / mpmath.sqrt(n)
            + 12 * rho * beta * mpmath.sqrt(mpmath.log(1 / mpmath.mpf(delta)) / n)
            + mpmath.mpf(eps))


def main():
    rng = random.Random(20260101)
    print("n,d,L,b_x,rho_phi,delta,epsilon,b_w,bound")
    rows = 0
    while rows < 100:
        n = rng.choice([10, 100, 1000, 10**4, 10**5, 10**6]) * rng.randint(1, 9)
        d = rng.randint(1, 512)
        L = rng.randint(1, 12)
        bx = round(rng.uniform(0.1, 5.0), 6)
        bw = [round(rng.uniform(0.5, 1.6), 6) for _ in range(L)]
        rho = round(rng.uniform(0.5, 4.0), 6)
        delta = round(rng.uniform(0.001, 0.5), 6)
        eps = round(rng.choice([0.0, rng.uniform(0.0, 1.0)]), 6)
        beta = bx
        for w in bw:
            beta *= w
        if 2 * (d * n) ** 0.5 * L * beta <= 1.0:
            continue
        value = bound(n, d, L, bx, bw, rho, delta, eps)
        print(f"{n},{d},{L},{bx!r},{rho!r},{delta!r},{eps!r},{' '.join(repr(w) for w in bw)},"
              f"{mpmath.nstr(value, 20, min_fixed=-1, max_fixed=1)}")
        rows += 1
    # the hand example
    value = bound(10**4, 4, 2, 1.0, [1.0, 1.0], 1.0, 0.1, 0.0)
    assert abs(value - mpmath.mpf("7.203969408544807")) < 1e-12


if __name__ == "__main__":
    main()
