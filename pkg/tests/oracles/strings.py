"""Character-by-character reference for the SMT-LIB string operations.

Written from the theory's definitions, without slicing or str.find, so it
shares no code paths with the evaluator.
"""


def at(s, i):
    out = ""
    for k, c in enumerate(s):
        if k == i:
            out = c
    return out


def substr(s, i, n):
    # longest t with s = u t v, |u| = i, |t| <= n; empty when out of range
    if i < 0 or n <= 0 or i >= len(s):
        return ""
    out = ""
    k = i
    while k < len(s) and len(out) < n:
        out += s[k]
        k += 1
    return out


def _occurs_at(s, t, j):
    if j + len(t) > len(s):
        return False
    for k in range(len(t)):
        if s[j + k] != t[k]:
            return False
    return True


def indexof(s, t, i):
    if i < 0 or i > len(s):
        return -1
    for j in range(i, len(s) + 1):
        if _occurs_at(s, t, j):
            return j
    return -1


def replace(s, t, u):
    if t == "":
        return u + s
    j = indexof(s, t, 0)
    if j < 0:
        return s
    return substr(s, 0, j) + u + substr(s, j + len(t), len(s))


def replace_all(s, t, u):
    if t == "":
        return s
    out, j = "", 0
    while j < len(s):
        if _occurs_at(s, t, j):
            out += u
            j += len(t)
        else:
            out += s[j]
            j += 1
    return out


def contains(s, t):
    return indexof(s, t, 0) >= 0


def prefixof(t, s):
    return _occurs_at(s, t, 0)


def suffixof(t, s):
    return len(t) <= len(s) and _occurs_at(s, t, len(s) - len(t))


def to_int(s):
    if s == "":
        return -1
    n = 0
    for c in s:
        d = "0123456789".find(c)
        if d < 0:
            return -1
        n = 10 * n + d
    return n


def from_int(n):
    if n < 0:
        return ""
    if n == 0:
        return "0"
    out = ""
    while n:
        out = "0123456789"[n % 10] + out
        n //= 10
    return out
