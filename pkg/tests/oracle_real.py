"""Brute-force enumerator for the 2-complete motivic coefficient ring
over the real numbers.

The ring is Z2[rho, tau^(2^(i+1)j) v_i] with v_0 = 2, modulo rho*v_0 = 0
and rho^(2^(i+1)-1) v_i = 0, with tau-powers merging multiplicatively.
Its Z2-module basis consists of normal forms rho^a tau^m v^b v0^eps:

  - m is even; eps = 0 when m is a nonnegative combination of the
    2^(i+1) over the i >= 1 appearing in b (equivalently m is divisible
    by 2^(min i + 1), or m = 0 when b is trivial); otherwise eps = 1,
    which requires m >= 2.
  - The form is zero when eps = 1 and a >= 1, or when some v_i with
    i >= 1 appears and a >= 2^(i+1) - 1.
  - a >= 1 gives a Z/2; a = 0 gives a free Z2.

Bidegrees: rho is (-1,-1), tau is (0,-1), v_i is (2^(i+1)-2, 2^i-1).
This is an independent cross-check for the layer comodules: the Chow
degree of a form is a + 2m.
"""


def real_bidegree_table(chow, t_max):
    """{(p, q): (free rank, sorted torsion orders)} for one Chow degree.

    Only forms whose v-part has internal degree at most t_max are
    listed, matching a degree-capped comodule enumeration.
    """
    vs = []
    i = 1
    while 2 ** (i + 1) - 2 <= t_max:
        vs.append(i)
        i += 1

    table = {}

    def add(bid, free, tors):
        f0, t0 = table.get(bid, (0, []))
        table[bid] = (f0 + free, sorted(t0 + tors))

    def vectors(k, room):
        if k == len(vs):
            yield ()
            return
        d = 2 ** (vs[k] + 1) - 2
        e = 0
        while e * d <= room:
            for rest in vectors(k + 1, room - e * d):
                yield (e,) + rest
            e += 1

    for m in range(0, chow // 2 + 1):
        a = chow - 2 * m
        if m % 2:
            continue
        for b in vectors(0, t_max):
            vdeg = sum(e * (2 ** (i + 1) - 2) for i, e in zip(vs, b))
            carriers = [i for i, e in zip(vs, b) if e]
            if carriers:
                representable = m % (2 ** (min(carriers) + 1)) == 0
            else:
                representable = m == 0
            if representable:
                eps = 0
            elif m >= 2:
                eps = 1
            else:
                continue
            if eps and a >= 1:
                continue
            if any(a >= 2 ** (i + 1) - 1 for i in carriers):
                continue
            bid = (vdeg - a, vdeg // 2 - a - m)
            if a >= 1:
                add(bid, 0, [2])
            else:
                add(bid, 1, [])
    return {k: v for k, v in table.items() if v[0] or v[1]}
