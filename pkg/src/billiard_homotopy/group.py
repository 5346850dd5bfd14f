"""The group G = <a, b, c, d | ab = ba, ac = ca, d b d^-1 = c>.

Words are plain ASCII strings over ``aAbBcCdD``; an uppercase letter is the
inverse of its lowercase partner.

G is an HNN extension of H = <a> x F(b, c) with stable letter d conjugating
<b> onto <c>.  Equality is decided with Britton normal forms, and word length
is computed exactly by minimising over the associated-subgroup shifts of a
reduced form (geodesic words never contain a pinch).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

LETTERS = "aAbBcCdD"
GENERATORS = "abcd"
RELATORS = ("abAB", "acAC", "dbDC")

_ORDER = {ch: i for i, ch in enumerate(LETTERS)}

DEFAULT_RADIUS = 8
DEFAULT_STATE_CAP = 10_000_000


class ResourceLimitError(RuntimeError):
    """Raised when an enumeration would exceed its configured state cap."""


class TooShortError(ValueError):
    """Raised when an end prefix deeper than the element's length is requested."""


@dataclass(frozen=True)
class Letter:
    generator: str
    exponent: int

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if self.exponent not in (1, -1):
            raise ValueError("exponent must be +1 or -1")

    @classmethod
    def parse(cls, ch: str) -> "Letter":
        if ch not in LETTERS:
            raise ValueError(f"not a letter: {ch!r}")
        return cls(ch.lower(), 1 if ch.islower() else -1)

    def __str__(self) -> str:
        return self.generator if self.exponent == 1 else self.generator.upper()


def check_word(w: str) -> str:
    bad = set(w) - set(LETTERS)
    if bad:
        raise ValueError(f"invalid letters in word: {''.join(sorted(bad))}")
    return w


def inverse(w: str) -> str:
    return w[::-1].swapcase()


def free_reduce(w: str) -> str:
    out: list[str] = []
    for ch in w:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def is_reduced(w: str) -> bool:
    return all(x != y.swapcase() for x, y in zip(w, w[1:]))


def shortlex_key(w: str) -> tuple:
    return (len(w), [_ORDER[ch] for ch in w])


def abelian_image(w: str) -> tuple[int, int, int]:
    """Image in the abelianisation Z^3 = (a, b = c, d)."""
    n = {ch: w.count(ch) - w.count(ch.upper()) for ch in GENERATORS}
    return n["a"], n["b"] + n["c"], n["d"]


def abelian_lower_bound(w: str) -> int:
    return sum(abs(x) for x in abelian_image(w))


# --------------------------------------------------------------------------
# Britton normal form.
#
# A normal form is a string r0 t1 r1 t2 ... tn h where each ti is 'd' or 'D'
# and each syllable is a^k followed by a freely reduced word in b, c.  The
# syllable before a 'd' carries no trailing c-power, the syllable before a
# 'D' carries no trailing b-power, and there are no pinches d b^m D or
# D c^m d.  Such a string is unique per group element.

def _split_syllable(s: str) -> tuple[int, str]:
    i = 0
    while i < len(s) and s[i] in "aA":
        i += 1
    k = s[:i].count("a") - s[:i].count("A")
    return k, s[i:]


def _syllable(k: int, f: str) -> str:
    return ("a" * k if k >= 0 else "A" * -k) + f


def _power_run(f: str, letter: str, from_end: bool) -> int:
    """Signed exponent of the maximal run of ``letter``-powers at one end of f."""
    s = f[::-1] if from_end else f
    if not s or s[0].lower() != letter:
        return 0
    ch = s[0]
    n = 0
    while n < len(s) and s[n] == ch:
        n += 1
    return n if ch == letter else -n


def _power(letter: str, m: int) -> str:
    return letter * m if m >= 0 else letter.upper() * -m


def nf_mul_letter(nf: str, x: str) -> str:
    """Right-multiply a normal form by one letter, returning a normal form."""
    p = max(nf.rfind("d"), nf.rfind("D"))
    head, tail = nf[: p + 1], nf[p + 1:]
    k, f = _split_syllable(tail)
    if x == "a":
        return head + _syllable(k + 1, f)
    if x == "A":
        return head + _syllable(k - 1, f)
    if x in "bBcC":
        if f and f[-1] == x.swapcase():
            f = f[:-1]
        else:
            f = f + x
        return head + _syllable(k, f)
    prev = nf[p] if p >= 0 else ""
    if k == 0:
        if prev == "d" and x == "D" and set(f) <= {"b"} | {"B"} and len(set(f)) <= 1:
            m = _power_run(f, "b", False) if f else 0
            return _append_free(nf[:p], _power("c", m))
        if prev == "D" and x == "d" and set(f) <= {"c"} | {"C"} and len(set(f)) <= 1:
            m = _power_run(f, "c", False) if f else 0
            return _append_free(nf[:p], _power("b", m))
    if x == "d":
        m = _power_run(f, "c", True)
        r = f[: len(f) - abs(m)]
        return head + _syllable(k, r) + "d" + _power("b", m)
    m = _power_run(f, "b", True)
    r = f[: len(f) - abs(m)]
    return head + _syllable(k, r) + "D" + _power("c", m)


def _append_free(nf: str, u: str) -> str:
    for ch in u:
        nf = nf_mul_letter(nf, ch)
    return nf


def normal_form(w: str) -> str:
    nf = ""
    for ch in check_word(w):
        nf = nf_mul_letter(nf, ch)
    return nf


def are_equal(u: str, v: str) -> bool:
    return normal_form(u) == normal_form(v)


def is_identity(w: str) -> bool:
    return normal_form(w) == ""


def parse_normal_form(nf: str) -> tuple[list[tuple[int, str]], list[int]]:
    """Split a normal form into syllables (k, f) and stable-letter signs."""
    pieces, signs, cur = [], [], []
    for ch in nf:
        if ch in "dD":
            pieces.append(_split_syllable("".join(cur)))
            signs.append(1 if ch == "d" else -1)
            cur = []
        else:
            cur.append(ch)
    pieces.append(_split_syllable("".join(cur)))
    return pieces, signs


# --------------------------------------------------------------------------
# Exact word length.

def _shifted(f: str, x: str | None, m: int, y: str | None, mp: int) -> str:
    """Free reduction of x^-m f y^mp."""
    s = f
    if x is not None and m:
        s = free_reduce(_power(x, -m) + s)
    if y is not None and mp:
        s = free_reduce(s + _power(y, mp))
    return s


def _shift_cost_table(f: str, x: str | None, y: str | None, ms: np.ndarray) -> np.ndarray:
    """Matrix of |x^-m f y^m'| over m (rows) and m' (cols) in ``ms``."""
    alpha = _power_run(f, x, False) if x else 0
    beta = _power_run(f, y, True) if y else 0
    M = ms[:, None] if x else np.zeros((1, 1), dtype=np.int64)
    Mp = ms[None, :] if y else np.zeros((1, 1), dtype=np.int64)
    if not f:
        if x and y and x == y:
            return np.abs(Mp - M)
        return np.abs(M) + np.abs(Mp)
    if x and abs(alpha) == len(f):
        if y and x == y:
            return np.abs(alpha - M + Mp)
        return np.abs(alpha - M) + np.abs(Mp)
    if y and abs(beta) == len(f):
        return np.abs(M) + np.abs(beta + Mp)
    core = len(f) - abs(alpha) - abs(beta)
    return np.abs(alpha - M) + core + np.abs(beta + Mp)


def _britton_data(nf: str):
    pieces, signs = parse_normal_form(nf)
    n = len(signs)
    # pushing through d: c^m d = d b^m; through D: b^m D = D c^m
    right = [("c" if e == 1 else "b") for e in signs]   # letter absorbed at end of piece i
    left = [("b" if e == 1 else "c") for e in signs]    # letter emitted at start of piece i+1
    return pieces, signs, n, right, left


def _shift_range(pieces) -> np.ndarray:
    bound = sum(len(f) + abs(k) for k, f in pieces) + 2
    return np.arange(-bound, bound + 1, dtype=np.int64)


def _piece_letters(i: int, n: int, right, left):
    x = left[i - 1] if i > 0 else None
    y = right[i] if i < n else None
    return x, y


def geodesic_length_exact(w: str) -> int:
    nf = normal_form(w)
    pieces, signs, n, right, left = _britton_data(nf)
    base = n + sum(abs(k) for k, _ in pieces)
    if n == 0:
        return base + len(pieces[0][1])
    ms = _shift_range(pieces)
    # value[j] = best cost of pieces 0..i given m_{i+1} = ms[j]
    x, y = _piece_letters(0, n, right, left)
    value = _shift_cost_table(pieces[0][1], x, y, ms)[0].astype(np.int64)
    for i in range(1, n):
        x, y = _piece_letters(i, n, right, left)
        table = _shift_cost_table(pieces[i][1], x, y, ms)
        value = (value[:, None] + table).min(axis=0)
    x, y = _piece_letters(n, n, right, left)
    last = _shift_cost_table(pieces[n][1], x, y, ms)[:, 0]
    return base + int((value + last).min())


def shortlex_geodesic(w: str) -> str:
    """Shortlex-least geodesic word representing w (order a<A<b<B<c<C<d<D)."""
    nf = normal_form(w)
    pieces, signs, n, right, left = _britton_data(nf)
    if n == 0:
        k, f = pieces[0]
        return _syllable(k, f)
    ms = _shift_range(pieces)
    R = len(ms)
    # suffix[j] = best cost of pieces i..n given m_i = ms[j]
    tables = []
    for i in range(n + 1):
        x, y = _piece_letters(i, n, right, left)
        tables.append(_shift_cost_table(pieces[i][1], x, y, ms))
    suffix = [None] * (n + 1)
    suffix[n] = tables[n][:, 0].astype(np.int64)
    for i in range(n - 1, 0, -1):
        suffix[i] = (tables[i] + suffix[i + 1][None, :]).min(axis=1)
    total0 = tables[0][0] + suffix[1]
    best = total0.min()
    # greedy lexicographic choice of shifts, piece by piece
    out = []
    m_prev = 0
    candidates = np.nonzero(total0 == best)[0]
    for i in range(n):
        x, y = _piece_letters(i, n, right, left)
        k, f = pieces[i]
        options = []
        for j in candidates:
            s = _syllable(k, _shifted(f, x, m_prev, y, int(ms[j])))
            options.append((_lex_piece_key(s), j, s))
        options.sort()
        _, j, s = options[0]
        out.append(s)
        out.append("d" if signs[i] == 1 else "D")
        m_prev = int(ms[j])
        if i + 1 < n:
            row = tables[i + 1][j] + suffix[i + 2]
            target = suffix[i + 1][j]
            candidates = np.nonzero(row == target)[0]
    k, f = pieces[n]
    x, _ = _piece_letters(n, n, right, left)
    out.append(_syllable(k, _shifted(f, x, m_prev, None, 0)))
    return "".join(out)


def _lex_piece_key(s: str) -> list[int]:
    # a piece ending earlier is followed by d/D, which sorts after every piece letter
    return [_ORDER[ch] for ch in s] + [len(LETTERS)]


class LengthInterval(NamedTuple):
    lower: int
    upper: int

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


def free_ad_image(w: str) -> str:
    """Image in F(a, d) after killing b and c (a 1-Lipschitz retraction)."""
    return free_reduce("".join(ch for ch in w if ch in "aAdD"))


def length_bounds(w: str) -> LengthInterval:
    lower = max(abelian_lower_bound(w), len(free_ad_image(w)))
    upper = min(len(free_reduce(w)), len(normal_form(w)))
    return LengthInterval(lower, upper)


def geodesic_length(w: str, table: "CayleyBallTable | None" = None, shift_cap: int = 400):
    """Word length of w in G.

    Exact via the shift minimisation whenever the shift range stays under
    ``shift_cap``; otherwise a :class:`LengthInterval` is returned.
    """
    w = check_word(w)
    if table is not None:
        hit = table.length_of(w)
        if hit is not None:
            return hit
    pieces, _ = parse_normal_form(normal_form(w))
    if len(_shift_range(pieces)) > 2 * shift_cap + 1:
        return length_bounds(w)
    return geodesic_length_exact(w)


# --------------------------------------------------------------------------
# Cayley ball enumeration.

@dataclass
class CayleyBallTable:
    radius: int
    sphere_counts: list[int]
    letters: str = LETTERS
    canonical: dict[str, str] | None = None   # normal form -> shortlex geodesic

    @property
    def ball_counts(self) -> list[int]:
        out, acc = [], 0
        for s in self.sphere_counts:
            acc += s
            out.append(acc)
        return out

    def length_of(self, w: str) -> int | None:
        if self.canonical is None:
            return None
        rep = self.canonical.get(normal_form(w))
        return None if rep is None else len(rep)

    def to_csv_rows(self) -> list[tuple[int, int, int]]:
        return list(zip(range(self.radius + 1), self.sphere_counts, self.ball_counts))


def enumerate_ball(radius: int, letters: str = LETTERS, keep_words: bool = False,
                   max_radius: int = DEFAULT_RADIUS, state_cap: int = DEFAULT_STATE_CAP) -> CayleyBallTable:
    """Breadth-first sphere counts of the Cayley graph over ``letters``.

    Spheres are expanded in shortlex order, so with ``keep_words`` the first
    word reaching each element is its shortlex-least geodesic.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius > max_radius:
        raise ValueError(f"radius {radius} exceeds configured maximum {max_radius}")
    letters = "".join(sorted(set(letters), key=_ORDER.__getitem__))
    prev: dict[str, str] = {}
    cur: dict[str, str] = {"": ""}
    counts = [1]
    canonical = {"": ""} if keep_words else None
    total = 1
    for _ in range(radius):
        nxt: dict[str, str] = {}
        for nf, word in cur.items():
            last = word[-1:].swapcase()
            for x in letters:
                if x == last:
                    continue
                m = nf_mul_letter(nf, x)
                if m in nxt or m in cur or m in prev:
                    continue
                nxt[m] = word + x
        total += len(nxt)
        if total > state_cap:
            raise ResourceLimitError(f"ball enumeration exceeded state cap {state_cap}")
        counts.append(len(nxt))
        if keep_words:
            canonical.update(nxt)
        prev, cur = cur, nxt
    return CayleyBallTable(radius, counts, letters, canonical)


@dataclass
class GrowthReport:
    radii: list[int]
    ball_counts: list[int]
    rate: float
    window: tuple[float, float] = (math.log(3), math.log(7))

    @property
    def in_window(self) -> bool:
        return self.window[0] <= self.rate <= self.window[1]


def growth_rate(table: CayleyBallTable) -> GrowthReport:
    """Least-squares slope of log ball size against radius over the top half of radii."""
    if table.radius < 4:
        raise ValueError("growth estimate needs radius >= 4")
    balls = table.ball_counts
    lo = table.radius // 2
    xs = np.arange(lo, table.radius + 1, dtype=float)
    ys = np.log(np.asarray(balls[lo:], dtype=float))
    slope = float(np.polyfit(xs, ys, 1)[0])
    return GrowthReport(list(range(table.radius + 1)), balls, slope)


# --------------------------------------------------------------------------
# Ends.

@dataclass(frozen=True)
class EndApprox:
    prefix: str
    depth: int

    def __post_init__(self):
        if self.depth < 1 or len(self.prefix) != self.depth:
            raise ValueError("end prefix must have positive depth equal to its length")


def end_prefix(w: str, k: int) -> EndApprox:
    if k < 1:
        raise ValueError("depth must be positive")
    g = shortlex_geodesic(w)
    if len(g) < k:
        raise TooShortError(f"element has length {len(g)} < {k}")
    return EndApprox(g[:k], k)


@dataclass(frozen=True)
class GroupElement:
    """An element of G, compared by normal form."""

    word: str

    @property
    def normal(self) -> str:
        return normal_form(self.word)

    @property
    def canonical(self) -> str:
        return shortlex_geodesic(self.word)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(free_reduce(self.word + other.word))

    def inverse(self) -> "GroupElement":
        return GroupElement(inverse(self.word))

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.normal == other.normal

    def __hash__(self):
        return hash(self.normal)

    def __len__(self):
        return geodesic_length_exact(self.word)


def random_word(rng, length: int, letters: str = LETTERS, reduced: bool = True) -> str:
    out: list[str] = []
    while len(out) < length:
        ch = letters[int(rng.integers(len(letters)))]
        if reduced and out and out[-1] == ch.swapcase():
            continue
        out.append(ch)
    return "".join(out)


def words_in(it: Iterable[str]) -> list[str]:
    return [check_word(w) for w in it]
