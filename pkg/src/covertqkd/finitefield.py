"""GF(m_v^l) arithmetic, the two-universal hash family, and resolvability codebooks.

Field elements of GF(p^(e*l)) are coefficient vectors over GF(p),
little-endian, and a length-l symbol vector over the alphabet [0, m_v) with
m_v = p^e is identified with a field element through degree-e coefficient
blocks: symbol i occupies coefficient slots [i*e, (i+1)*e).  Under this
identification, field addition is symbol-wise GF(p^e) addition and "the
first k symbols of u * v" is a GF(p)-linear map, which is all the hash
family needs.

The family {f_u : u != 0} with f_u(v) = first k symbols of u * v is regular
and two-universal; ``verify_two_universal`` checks that by exhaustive
enumeration rather than by the algebra above.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def _poly_trim(c: tuple[int, ...]) -> tuple[int, ...]:
    i = len(c)
    while i > 0 and c[i - 1] == 0:
        i -= 1
    return c[:i]


def _poly_mod(num: list[int], den: tuple[int, ...], p: int) -> tuple[int, ...]:
    """Remainder of num / den over GF(p); den monic-normalized internally."""
    den = _poly_trim(tuple(den))
    inv_lead = pow(den[-1], p - 2, p) if den[-1] != 1 else 1
    num = num[:]
    for shift in range(len(num) - len(den), -1, -1):
        coef = num[shift + len(den) - 1] * inv_lead % p
        if coef:
            for i, d in enumerate(den):
                num[shift + i] = (num[shift + i] - coef * d) % p
    return _poly_trim(tuple(num))


def _poly_mul(a: tuple[int, ...], b: tuple[int, ...], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return out


def _poly_divmod(a: tuple[int, ...], b: tuple[int, ...], p: int):
    b = _poly_trim(b)
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    inv_lead = pow(b[-1], p - 2, p)
    for shift in range(len(a) - len(b), -1, -1):
        coef = a[shift + len(b) - 1] * inv_lead % p
        q[shift] = coef
        if coef:
            for i, d in enumerate(b):
                a[shift + i] = (a[shift + i] - coef * d) % p
    return _poly_trim(tuple(q)), _poly_trim(tuple(a))


def is_irreducible(coeffs: tuple[int, ...], p: int) -> bool:
    """Exhaustive trial division by every monic polynomial of degree <= deg/2."""
    coeffs = _poly_trim(coeffs)
    degree = len(coeffs) - 1
    if degree <= 0:
        return False
    if degree == 1:
        return True
    for deg_d in range(1, degree // 2 + 1):
        for tail in itertools.product(range(p), repeat=deg_d):
            divisor = tuple(tail) + (1,)
            if not _poly_mod(list(coeffs), divisor, p):
                return False
    return True


def find_irreducible(p: int, degree: int) -> tuple[int, ...]:
    """First monic irreducible of ``degree`` over GF(p) in little-endian value order.

    Deterministic so that codebooks are bit-identical across runs.
    """
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if degree < 1 or degree > 24:
        raise ValueError("degree out of the supported desk-scale range [1, 24]")
    for value in range(p ** degree):
        tail = tuple((value // p ** i) % p for i in range(degree))
        candidate = tail + (1,)
        if is_irreducible(candidate, p):
            return candidate
    raise RuntimeError("unreachable: irreducibles exist for every degree")


@dataclass(frozen=True)
class FieldSpec:
    """GF(m_v^l) with m_v = p^e, as GF(p)[x] modulo an irreducible of degree e*l."""

    p: int
    e: int
    l: int
    modulus: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"characteristic {self.p} is not prime")
        if self.e < 1 or self.l < 1:
            raise ValueError("extension degree and vector length must be >= 1")
        if not self.modulus:
            object.__setattr__(self, "modulus", find_irreducible(self.p, self.e * self.l))
        else:
            mod = _poly_trim(tuple(self.modulus))
            if len(mod) - 1 != self.e * self.l or mod[-1] != 1:
                raise ValueError("modulus must be monic of degree e*l")
            if not is_irreducible(mod, self.p):
                raise ValueError("modulus is not irreducible")
            object.__setattr__(self, "modulus", mod)

    @property
    def m_v(self) -> int:
        return self.p ** self.e

    @property
    def degree(self) -> int:
        return self.e * self.l

    @property
    def order(self) -> int:
        return self.p ** self.degree

    # --- symbol-vector <-> coefficient-vector identification -------------
    def symbols_to_coeffs(self, symbols) -> tuple[int, ...]:
        if len(symbols) != self.l:
            raise ValueError(f"expected {self.l} symbols, got {len(symbols)}")
        coeffs = []
        for s in symbols:
            if not 0 <= s < self.m_v:
                raise ValueError(f"symbol {s} outside [0, {self.m_v})")
            coeffs.extend((s // self.p ** t) % self.p for t in range(self.e))
        return tuple(coeffs)

    def coeffs_to_symbols(self, coeffs) -> tuple[int, ...]:
        coeffs = tuple(coeffs) + (0,) * (self.degree - len(coeffs))
        out = []
        for i in range(self.l):
            block = coeffs[i * self.e : (i + 1) * self.e]
            out.append(sum(c * self.p ** t for t, c in enumerate(block)))
        return tuple(out)

    def all_vectors(self):
        """All symbol vectors in lexicographic order."""
        return itertools.product(range(self.m_v), repeat=self.l)

    # --- field operations on symbol vectors -------------------------------
    def add(self, a, b) -> tuple[int, ...]:
        ca, cb = self.symbols_to_coeffs(a), self.symbols_to_coeffs(b)
        return self.coeffs_to_symbols(tuple((x + y) % self.p for x, y in zip(ca, cb)))

    def sub(self, a, b) -> tuple[int, ...]:
        ca, cb = self.symbols_to_coeffs(a), self.symbols_to_coeffs(b)
        return self.coeffs_to_symbols(tuple((x - y) % self.p for x, y in zip(ca, cb)))

    def mul(self, a, b) -> tuple[int, ...]:
        prod = _poly_mul(self.symbols_to_coeffs(a), self.symbols_to_coeffs(b), self.p)
        return self.coeffs_to_symbols(_poly_mod(prod, self.modulus, self.p))

    def inv(self, a) -> tuple[int, ...]:
        """Multiplicative inverse by the extended Euclidean algorithm."""
        ca = _poly_trim(self.symbols_to_coeffs(a))
        if not ca:
            raise ZeroDivisionError("inverse of the zero field element")
        r0, r1 = self.modulus, ca
        s0, s1 = (), (1,)
        while r1:
            q, r = _poly_divmod(r0, r1, self.p)
            r0, r1 = r1, r
            s_next = _poly_trim(
                tuple(
                    (x - y) % self.p
                    for x, y in itertools.zip_longest(
                        s0, _poly_mul(q, s1, self.p), fillvalue=0
                    )
                )
            )
            s0, s1 = s1, s_next
        # r0 is the gcd, a nonzero constant; scale s0 by its inverse
        scale = pow(r0[0], self.p - 2, self.p)
        inv = tuple(c * scale % self.p for c in s0)
        return self.coeffs_to_symbols(_poly_mod(list(inv), self.modulus, self.p))

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.l

    def one(self) -> tuple[int, ...]:
        return self.coeffs_to_symbols((1,))


@dataclass(frozen=True)
class HashFunction:
    """f_u(v) = first k symbols of u * v over GF(m_v^l)."""

    field: FieldSpec
    u: tuple[int, ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(self.u))
        if all(s == 0 for s in self.u):
            raise ValueError("hash index u must be nonzero")
        if not 1 <= self.k <= self.field.l:
            raise ValueError(f"output length k={self.k} outside [1, {self.field.l}]")

    def __call__(self, v) -> tuple[int, ...]:
        return hash_eval(self, v)


def hash_eval(f: HashFunction, v) -> tuple[int, ...]:
    """Evaluate the hash: first k symbols of u * v."""
    if len(v) != f.field.l:
        raise ValueError(f"expected {f.field.l} symbols, got {len(v)}")
    return f.field.mul(f.u, v)[: f.k]


def hash_family(spec: FieldSpec, k: int):
    """All hash functions f_u for nonzero u, in lexicographic order of u."""
    return [
        HashFunction(spec, u, k)
        for u in spec.all_vectors()
        if any(s != 0 for s in u)
    ]


@dataclass(frozen=True)
class HashCodebook:
    """Indexed enumeration g of the preimage f^-1(z); exactly m_v^(l-k) codewords."""

    f: HashFunction
    z: tuple[int, ...]
    codewords: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        h = self.f.field.m_v ** (self.f.field.l - self.f.k)
        if len(self.codewords) != h:
            raise ValueError(f"expected {h} codewords, found {len(self.codewords)}")
        if len(set(self.codewords)) != len(self.codewords):
            raise ValueError("codeword enumeration is not injective")

    @property
    def h(self) -> int:
        return len(self.codewords)

    def g(self, r: int) -> tuple[int, ...]:
        """Codeword map g: [1, h] -> V^l."""
        if not 1 <= r <= self.h:
            raise ValueError(f"index {r} outside [1, {self.h}]")
        return self.codewords[r - 1]

    def to_text(self) -> str:
        spec = self.f.field
        lines = [
            f"p={spec.p} e={spec.e} l={spec.l} k={self.f.k} "
            f"u={','.join(map(str, self.f.u))} z={','.join(map(str, self.z))}"
        ]
        lines.extend(" ".join(map(str, cw)) for cw in self.codewords)
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "HashCodebook":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = dict(part.split("=", 1) for part in lines[0].split())
        spec = FieldSpec(int(header["p"]), int(header["e"]), int(header["l"]))
        f = HashFunction(spec, tuple(map(int, header["u"].split(","))), int(header["k"]))
        z = tuple(map(int, header["z"].split(",")))
        codewords = tuple(tuple(map(int, ln.split())) for ln in lines[1:])
        return HashCodebook(f, z, codewords)


def preimage(f: HashFunction, z) -> HashCodebook:
    """Enumerate f^-1(z), sorted lexicographically for reproducibility."""
    z = tuple(z)
    if len(z) != f.k or any(not 0 <= s < f.field.m_v for s in z):
        raise ValueError(f"target {z} invalid for k={f.k}, m_v={f.field.m_v}")
    codewords = tuple(sorted(v for v in f.field.all_vectors() if hash_eval(f, v) == z))
    return HashCodebook(f, z, codewords)


def codebook_size_for(spec: FieldSpec, requested_h: int) -> tuple[int, int]:
    """Smallest supported codebook size h = m_v^(l-k) with h >= requested_h.

    Returns (k, h).  Only exact powers are supported; this is the rounding
    rule for callers that start from a real-valued size requirement.
    """
    if requested_h < 1:
        raise ValueError("requested codebook size must be >= 1")
    for k in range(spec.l, 0, -1):
        h = spec.m_v ** (spec.l - k)
        if h >= requested_h:
            return k, h
    raise ValueError(
        f"requested size {requested_h} exceeds m_v^(l-1) = {spec.m_v ** (spec.l - 1)}"
    )


def verify_two_universal(functions, domain, z_count: int, tol: float = 1e-15):
    """Max pairwise collision probability of a family, by exhaustive enumeration.

    Returns (max_collision_probability, passed).  PASS iff the maximum over
    distinct pairs of Pr_f[f(x) = f(x')] is at most 1/z_count + tol.  Keeps
    no shortcuts: every pair is evaluated under every function, so it stays
    an independent oracle for the algebraic construction (enumeration cost
    |F| |V|^(2l) / 2; keep |V|^l small).
    """
    domain = list(domain)
    if len(domain) > 4096:
        raise ValueError("domain too large for exhaustive verification")
    tables = [{x: f(x) for x in domain} for f in functions]
    worst = 0.0
    for i, x in enumerate(domain):
        for x2 in domain[i + 1 :]:
            collisions = sum(1 for t in tables if t[x] == t[x2])
            worst = max(worst, collisions / len(functions))
    return worst, worst <= 1.0 / z_count + tol


def verify_regular(functions, domain, z_count: int) -> bool:
    """Every function has equal-size preimages |f^-1(z)| = |domain| / z_count."""
    domain = list(domain)
    expected = len(domain) // z_count
    for f in functions:
        buckets: dict[tuple[int, ...], int] = {}
        for x in domain:
            z = f(x)
            buckets[z] = buckets.get(z, 0) + 1
        if len(buckets) != z_count or any(c != expected for c in buckets.values()):
            return False
    return True
