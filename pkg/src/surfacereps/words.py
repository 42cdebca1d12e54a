"""Free-group words over the surface generators, decorated by a formal
involutive automorphism tau, and exact checks of the identities satisfied
by beta.

A letter is a generator together with two flags: ``barred`` (tau applied)
and ``inverted``. Since tau is an automorphism the flags commute, so
tau(x)^-1 and tau(x^-1) are the same letter. Words are kept freely reduced.
"""

import re
from dataclasses import dataclass

from .errors import SignatureError

CONJUGATOR = "u"


@dataclass(frozen=True, order=True)
class Letter:
    base: str
    barred: bool = False
    inverted: bool = False

    def inverse(self):
        return Letter(self.base, self.barred, not self.inverted)

    def bar(self):
        return Letter(self.base, not self.barred, self.inverted)

    def cancels(self, other):
        return (self.base == other.base and self.barred == other.barred
                and self.inverted != other.inverted)

    def __str__(self):
        s = ("~" if self.barred else "") + self.base
        return s + "^-1" if self.inverted else s


def _stack_reduce(letters):
    out = []
    for x in letters:
        if out and out[-1].cancels(x):
            out.pop()
        else:
            out.append(x)
    return tuple(out)


class Word:
    """A freely reduced word. Immutable; operations return new words."""

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        object.__setattr__(self, "letters", _stack_reduce(letters))

    def __setattr__(self, name, value):
        raise AttributeError("Word is immutable")

    @classmethod
    def gen(cls, base):
        return cls((Letter(base),))

    @classmethod
    def parse(cls, text):
        """Parse ``"~c2^-1 * a1 * b1^-1"``; ``"1"`` is the empty word."""
        text = text.strip()
        if text in ("", "1"):
            return cls()
        letters = []
        for tok in text.split("*"):
            m = re.fullmatch(r"\s*(~?)([A-Za-z]\w*)(\^-1)?\s*", tok)
            if not m:
                raise ValueError(f"cannot parse letter {tok!r}")
            letters.append(Letter(m.group(2), bool(m.group(1)), bool(m.group(3))))
        return cls(letters)

    def __mul__(self, other):
        return Word(self.letters + other.letters)

    def inverse(self):
        return Word(tuple(x.inverse() for x in reversed(self.letters)))

    def bar(self):
        """tau applied letterwise."""
        return Word(tuple(x.bar() for x in self.letters))

    def tau_minus(self):
        return self.inverse().bar()

    def substitute(self, mapping):
        """Replace each generator by a word; unmapped generators stay."""
        out = []
        for x in self.letters:
            w = mapping.get(x.base)
            if w is None:
                out.append(x)
                continue
            if x.barred:
                w = w.bar()
            if x.inverted:
                w = w.inverse()
            out.extend(w.letters)
        return Word(out)

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return " * ".join(map(str, self.letters)) if self.letters else "1"

    __repr__ = __str__


def reduce(word):
    """Free reduction (words are always stored reduced; this re-normalizes)."""
    return Word(word.letters)


def commutator(x, y):
    return x * y * x.inverse() * y.inverse()


def product(words):
    out = Word()
    for w in words:
        out = out * w
    return out


# -- surface signature ----------------------------------------------------------

def generator_names(g, l):
    names = []
    for i in range(1, g + 1):
        names += [f"a{i}", f"b{i}"]
    names += [f"c{j}" for j in range(1, l + 1)]
    return names


@dataclass(frozen=True)
class WordTuple:
    g: int
    l: int
    slots: tuple

    def __post_init__(self):
        if len(self.slots) != 2 * self.g + self.l:
            raise SignatureError("slot count must be 2g + l")

    def as_mapping(self):
        return dict(zip(generator_names(self.g, self.l), self.slots))

    def momentum(self):
        g = self.g
        pairs = [commutator(self.slots[2 * i], self.slots[2 * i + 1]) for i in range(g)]
        return product(pairs + list(self.slots[2 * g:]))


def _check_signature(g, l):
    if g < 0 or l < 0:
        raise SignatureError("g and l must be non-negative")
    if g + l < 1:
        raise SignatureError("empty signature: need g + l >= 1")


def identity_tuple(g, l):
    _check_signature(g, l)
    return WordTuple(g, l, tuple(Word.gen(s) for s in generator_names(g, l)))


def beta_symbolic(g, l):
    """The slots of beta as words in the generators."""
    x = identity_tuple(g, l).slots
    a = x[0:2 * g:2]
    b = x[1:2 * g:2]
    c = x[2 * g:]
    slots = [None] * (2 * g + l)
    suffix = Word()
    for j in reversed(range(l)):
        slots[2 * g + j] = suffix.tau_minus() * c[j].tau_minus() * suffix.bar()
        suffix = c[j] * suffix
    for i in reversed(range(g)):
        slots[2 * i] = suffix.tau_minus() * b[i].bar() * suffix.bar()
        slots[2 * i + 1] = suffix.tau_minus() * a[i].bar() * suffix.bar()
        suffix = commutator(a[i], b[i]) * suffix
    return WordTuple(g, l, tuple(slots))


def apply(wt, arg):
    """Substitute the slots of ``arg`` for the generators in ``wt``."""
    m = arg.as_mapping()
    return WordTuple(wt.g, wt.l, tuple(s.substitute(m) for s in wt.slots))


# -- proof reports --------------------------------------------------------------

@dataclass
class ProofReport:
    identity: str
    g: int
    l: int
    passed: bool
    slots: list        # per-slot (lhs, rhs) reduced words, as strings
    status: str = ""   # "pass" | "fail" | "relation-dependent"

    def __post_init__(self):
        if not self.status:
            self.status = "pass" if self.passed else "fail"

    def to_dict(self):
        return {"identity": self.identity, "g": self.g, "l": self.l,
                "verdict": self.status,
                "slots": [{"lhs": a, "rhs": b} for a, b in self.slots]}


def _report(identity, g, l, pairs):
    ok = all(x == y for x, y in pairs)
    return ProofReport(identity, g, l, ok, [(str(x), str(y)) for x, y in pairs])


def check_involution_symbolic(g, l):
    beta = beta_symbolic(g, l)
    twice = apply(beta, beta)
    gens = identity_tuple(g, l).slots
    return _report("involution", g, l, list(zip(twice.slots, gens)))


def check_equivariance_symbolic(g, l):
    """beta(u.x) = tau(u).beta(x), with u a formal generator."""
    _check_signature(g, l)
    u = Word.gen(CONJUGATOR)
    beta = beta_symbolic(g, l)
    conj = WordTuple(g, l, tuple(u * s * u.inverse() for s in identity_tuple(g, l).slots))
    lhs = apply(beta, conj)
    ub = u.bar()
    rhs = [ub * s * ub.inverse() for s in beta.slots]
    return _report("equivariance", g, l, list(zip(lhs.slots, rhs)))


def check_momentum_compat_symbolic(g, l):
    """mu(beta(x)) = tau^-(mu(x))."""
    beta = beta_symbolic(g, l)
    lhs = beta.momentum()
    rhs = identity_tuple(g, l).momentum().tau_minus()
    return _report("momentum", g, l, [(lhs, rhs)])


IDENTITIES = {
    "involution": check_involution_symbolic,
    "equivariance": check_equivariance_symbolic,
    "momentum": check_momentum_compat_symbolic,
}


def verify_all(g, l, numeric_check=None):
    """Run the three checks. A free-group failure whose ``numeric_check``
    (callable (identity, g, l) -> bool) passes is flagged relation-dependent."""
    reports = []
    for name, fn in IDENTITIES.items():
        rep = fn(g, l)
        if not rep.passed and numeric_check is not None and numeric_check(name, g, l):
            rep.status = "relation-dependent"
        reports.append(rep)
    return reports


def signatures_upto(N):
    return [(g, l) for g in range(N + 1) for l in range(N + 1) if g + l >= 1]
