"""Pure-Python monomial kernels.

A monomial is a sorted tuple of integer codes.  Bit 0 of a code is the
parity (1 = odd).  Odd codes may appear at most once; every reordering of
odd codes contributes a Koszul sign.

All functions return ``(sign, factors)`` pairs where ``sign == 0`` means the
product vanished.  The compiled module ``_kernels`` exposes the same API.
"""

IMPLEMENTATION = "python"


def canonicalize(seq):
    """Sort ``seq`` and return the Koszul sign of the permutation."""
    items = list(seq)
    n = len(items)
    sign = 1
    # insertion sort; only odd/odd transpositions flip the sign
    for i in range(1, n):
        cur = items[i]
        j = i - 1
        odd = cur & 1
        while j >= 0 and items[j] > cur:
            if odd and items[j] & 1:
                sign = -sign
            items[j + 1] = items[j]
            j -= 1
        items[j + 1] = cur
    for i in range(1, n):
        if items[i] == items[i - 1] and items[i] & 1:
            return 0, ()
    return sign, tuple(items)


def mul(a, b):
    """Product of two canonical monomials."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    out = []
    sign = 1
    i = j = 0
    na, nb = len(a), len(b)
    # odd factors of ``a`` not yet emitted, i.e. those a ``b`` factor passes
    odd_left = 0
    for x in a:
        odd_left += x & 1
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x < y or (x == y and not x & 1):
            out.append(x)
            odd_left -= x & 1
            i += 1
        elif x == y:
            return 0, ()
        else:
            if y & 1 and odd_left & 1:
                sign = -sign
            out.append(y)
            j += 1
    if i < na:
        out.extend(a[i:])
    if j < nb:
        out.extend(b[j:])
    return sign, tuple(out)


def left_partial(f, g):
    """Left derivative of monomial ``f`` by the symbol ``g``.

    Returns ``(c, rest)``: for even ``g`` ``c`` is the multiplicity, for odd
    ``g`` it is the sign of moving ``g`` to the front.  ``c == 0`` if ``g``
    does not occur.
    """
    odd_before = 0
    for idx, x in enumerate(f):
        if x == g:
            rest = f[:idx] + f[idx + 1:]
            if g & 1:
                return (-1 if odd_before & 1 else 1), rest
            mult = 1
            k = idx + 1
            while k < len(f) and f[k] == g:
                mult += 1
                k += 1
            return mult, rest
        odd_before += x & 1
    return 0, ()


def right_partial(f, g):
    """Right derivative of monomial ``f`` by the symbol ``g``."""
    n = len(f)
    for idx in range(n):
        if f[idx] == g:
            rest = f[:idx] + f[idx + 1:]
            if g & 1:
                odd_after = 0
                for x in f[idx + 1:]:
                    odd_after += x & 1
                return (-1 if odd_after & 1 else 1), rest
            mult = 1
            k = idx + 1
            while k < n and f[k] == g:
                mult += 1
                k += 1
            return mult, rest
    return 0, ()


def z_derivative(f, step, frozen_from):
    """Leibniz expansion of a derivation raising each code by ``step``.

    Codes ``>= frozen_from`` are annihilated (constants).  Returns a list of
    ``(coeff, factors)``; equal factor tuples are not merged.
    """
    out = []
    n = len(f)
    prev = None
    for idx in range(n):
        x = f[idx]
        if x >= frozen_from:
            continue
        if x == prev and not x & 1:
            # repeated even factor: fold into the previous term's multiplicity
            c, mono = out[-1]
            out[-1] = (c + 1, mono)
            continue
        prev = x
        seq = f[:idx] + (x + step,) + f[idx + 1:]
        sign, mono = canonicalize(seq)
        if sign:
            out.append((sign, mono))
    return out


def replace_at(f, idx, new):
    """Replace factor ``idx`` by ``new`` and re-canonicalize.

    The parity of ``new`` may differ from the replaced factor; the caller
    applies the sign for moving the (odd) operator past earlier factors.
    """
    return canonicalize(f[:idx] + (new,) + f[idx + 1:])
