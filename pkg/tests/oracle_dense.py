"""Dense brute-force cohomology of small field cobar complexes.

Independent check path: own monomial enumeration, own word ordering, own
dense F_2 elimination over integer bitmasks.  The only thing shared with
the package is the coproduct table of the Hopf algebra itself.  Sized
for s <= 2 and small t; everything is materialised densely.
"""


def _monomials(alph, t):
    """Nonempty monomials of exact degree t, ascending-exponent order."""
    n = len(alph.names)
    out = []

    def rec(i, rem, acc):
        if i == n:
            if rem == 0 and acc:
                out.append(tuple(acc))
            return
        d = alph.degrees[i]
        top = rem // d
        if alph.parities[i]:
            top = min(top, 1)
        for e in range(top + 1):
            rec(i + 1, rem - e * d, acc + ([(i, e)] if e else []))

    rec(0, t, [])
    return out


def _words(alph, s, t):
    if s == 0:
        return [()] if t == 0 else []
    out = []
    for d1 in range(1, t + 1):
        for m in _monomials(alph, d1):
            for rest in _words(alph, s - 1, t - d1):
                out.append((m,) + rest)
    return out


def _dbar(h, mono):
    """Both-legs-positive part of the coproduct, as a set of pairs mod 2."""
    hits = set()
    for (L, R), c in h.diag_mono(mono).terms.items():
        if L and R and int(c) % 2:
            hits.symmetric_difference_update({(L, R)})
    return hits


def _rank(cols):
    piv = {}
    r = 0
    for c in cols:
        v = c
        while v:
            lead = v & -v
            if lead in piv:
                v ^= piv[lead]
            else:
                piv[lead] = v
                r += 1
                break
    return r


def dense_ext_dims(h, s_max, t_max):
    """F_2 dimensions of the cobar cohomology of the trivial comodule."""
    if h.a_names or h.prime != 2:
        raise ValueError("oracle covers mod-2 field coalgebras only")
    alph = h.alphabet
    dims = {}
    for t in range(t_max + 1):
        ws = [_words(alph, s, t) for s in range(s_max + 2)]
        idx = [{w: i for i, w in enumerate(lvl)} for lvl in ws]
        mats = []
        for s in range(s_max + 1):
            cols = []
            for w in ws[s]:
                mask = 0
                for i in range(s):
                    for (L, R) in _dbar(h, w[i]):
                        j = idx[s + 1][w[:i] + (L, R) + w[i + 1:]]
                        mask ^= 1 << j
                cols.append(mask)
            mats.append(cols)
        for s in range(s_max + 1):
            n = len(ws[s])
            if n == 0:
                continue
            kernel = n - _rank(mats[s])
            image = _rank(mats[s - 1]) if s else 0
            d = kernel - image
            if d:
                dims[(s, t)] = d
    return dims
