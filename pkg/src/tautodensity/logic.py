"""Well-formed formulae over x0..x{m-1} with negation and implication.

Falsity sets are encoded as integers: assignment ``t`` (bit ``i`` set iff
``x_i`` is true) is bit ``t`` of the mask.  With this convention the mask of
``x_i`` is the product over ``j != i`` of ``2**(2**j) + 1``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence


class Formula:
    __slots__ = ()

    length: int

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Var(Formula):
    index: int
    length: int = field(default=1, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("variable index must be non-negative")


@dataclass(frozen=True)
class Neg(Formula):
    child: Formula
    length: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "length", self.child.length + 1)


@dataclass(frozen=True)
class Impl(Formula):
    left: Formula
    right: Formula
    length: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "length", self.left.length + self.right.length + 1)


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


# ---------------------------------------------------------------------------
# parsing / rendering

_TOKEN = re.compile(r"\s*(?:(x\d+)|(->)|([~\[\]()]))")
_CLOSE = {"[": "]", "(": ")"}


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if match is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tok = match.group(1) or match.group(2) or match.group(3)
        tokens.append((tok, match.start(match.lastindex)))
        pos = match.end()
    tokens.append(("<end>", len(text)))
    return tokens


def parse_formula(text: str, m: int) -> Formula:
    """Parse ``x<k>``, ``~``, ``->`` with ``[]`` or ``()`` brackets.

    Brackets around an implication are mandatory unless it is the whole
    formula, so ``x0->x1->x2`` is rejected.
    """
    tokens = _tokenize(text)
    pos = 0

    def peek() -> str:
        return tokens[pos][0]

    def take() -> tuple[str, int]:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def implication() -> Formula:
        left = unary()
        if peek() == "->":
            take()
            return Impl(left, unary())
        return left

    def unary() -> Formula:
        tok, where = take()
        if tok == "~":
            return Neg(unary())
        if tok.startswith("x"):
            index = int(tok[1:])
            if index >= m:
                raise FormulaSyntaxError(f"variable {tok} out of range for m={m}", where)
            return Var(index)
        if tok in _CLOSE:
            inner = implication()
            close, at = take()
            if close != _CLOSE[tok]:
                raise FormulaSyntaxError(f"expected {_CLOSE[tok]!r}", at)
            return inner
        raise FormulaSyntaxError(f"unexpected token {tok!r}", where)

    result = implication()
    tok, where = tokens[pos]
    if tok != "<end>":
        raise FormulaSyntaxError(f"unexpected token {tok!r}", where)
    return result


def render_formula(phi: Formula, outermost: bool = True) -> str:
    if isinstance(phi, Var):
        return f"x{phi.index}"
    if isinstance(phi, Neg):
        return "~" + render_formula(phi.child, False)
    body = render_formula(phi.left, False) + "->" + render_formula(phi.right, False)
    return body if outermost else f"[{body}]"


# ---------------------------------------------------------------------------
# semantics


def length(phi: Formula) -> int:
    return phi.length


def full_mask(m: int) -> int:
    return (1 << (1 << m)) - 1


def var_mask(i: int, m: int) -> int:
    """Falsity mask of x_i: the assignments with bit i clear."""
    mask = 0
    for t in range(1 << m):
        if not (t >> i) & 1:
            mask |= 1 << t
    return mask


def falsity_mask(phi: Formula, m: int) -> int:
    full = full_mask(m)
    vars_ = [var_mask(i, m) for i in range(m)]

    def walk(node: Formula) -> int:
        if isinstance(node, Var):
            if node.index >= m:
                raise ValueError(f"x{node.index} is out of range for m={m}")
            return vars_[node.index]
        if isinstance(node, Neg):
            return full ^ walk(node.child)
        return walk(node.right) & ~walk(node.left)

    return walk(phi)


def variables(phi: Formula) -> list[int]:
    """Variable indices in left-to-right order of occurrence (with repeats)."""
    out: list[int] = []
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.append(node.index)
        elif isinstance(node, Neg):
            stack.append(node.child)
        else:
            stack.append(node.right)
            stack.append(node.left)
    return out


def _ambient_m(phi: Formula) -> int:
    return max(variables(phi)) + 1


def is_tautology(phi: Formula, m: int | None = None) -> bool:
    return falsity_mask(phi, m or _ambient_m(phi)) == 0


def is_antilogy(phi: Formula, m: int | None = None) -> bool:
    m = m or _ambient_m(phi)
    return falsity_mask(phi, m) == full_mask(m)


def formulas_by_length(m: int, n_max: int) -> list[list[Formula]]:
    """All formulae grouped by length; index 0 is empty."""
    levels: list[list[Formula]] = [[] for _ in range(n_max + 1)]
    if n_max >= 1:
        levels[1] = [Var(i) for i in range(m)]
    for n in range(2, n_max + 1):
        level = [Neg(phi) for phi in levels[n - 1]]
        for i in range(1, n - 1):
            for left in levels[i]:
                for right in levels[n - 1 - i]:
                    level.append(Impl(left, right))
        levels[n] = level
    return levels


def enumerate_formulas(m: int, n: int) -> Iterator[Formula]:
    """Every formula of length exactly ``n``, each once."""
    if n < 1:
        raise ValueError("length must be at least 1")
    if n == 1:
        yield from (Var(i) for i in range(m))
        return
    levels = formulas_by_length(m, n - 1)
    for phi in levels[n - 1]:
        yield Neg(phi)
    for i in range(1, n - 1):
        for left in levels[i]:
            for right in levels[n - 1 - i]:
                yield Impl(left, right)


# ---------------------------------------------------------------------------
# renaming, types and norms


def permute_vars(phi: Formula, sigma: Sequence[int] | dict[int, int]) -> Formula:
    """Apply a finite-support permutation; indices outside ``sigma`` are fixed."""
    if isinstance(sigma, dict):
        image = lambda i: sigma.get(i, i)
    else:
        image = lambda i: sigma[i] if i < len(sigma) else i

    def walk(node: Formula) -> Formula:
        if isinstance(node, Var):
            return Var(image(node.index))
        if isinstance(node, Neg):
            return Neg(walk(node.child))
        return Impl(walk(node.left), walk(node.right))

    return walk(phi)


def permute_mask(mask: int, sigma: Sequence[int], m: int) -> int:
    """Image {sigma T : T in F} of a falsity mask under a permutation of [0, m)."""
    out = 0
    for t in range(1 << m):
        if (mask >> t) & 1:
            image = 0
            for i in range(m):
                if (t >> i) & 1:
                    image |= 1 << sigma[i]
            out |= 1 << image
    return out


def type_of(phi: Formula) -> Formula:
    relabel: dict[int, int] = {}
    for i in variables(phi):
        if i not in relabel:
            relabel[i] = len(relabel)
    return permute_vars(phi, relabel)


def is_type_formula(phi: Formula) -> bool:
    seen = 0
    for i in variables(phi):
        if i > seen:
            return False
        if i == seen:
            seen += 1
    return True


@dataclass(frozen=True)
class NormStats:
    distinct_vars: int
    length: int
    repeats: int
    negations: int
    norm: Fraction


def norm_stats(phi: Formula) -> NormStats:
    occ = variables(phi)
    distinct = len(set(occ))
    negations = 0
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, Neg):
            negations += 1
            stack.append(node.child)
        elif isinstance(node, Impl):
            stack.extend((node.left, node.right))
    return NormStats(
        distinct_vars=distinct,
        length=phi.length,
        repeats=len(occ) - distinct,
        negations=negations,
        norm=Fraction(distinct) - Fraction(phi.length, 2),
    )


# ---------------------------------------------------------------------------
# simple tautologies


class SimpleKind(enum.Enum):
    FIRST = "first-kind"
    STRICT_FIRST = "strict-first-kind"
    SECOND = "second-kind"


def premise_chain(phi: Formula) -> tuple[list[Formula], Formula]:
    """Split ``psi_1 -> [psi_2 -> [... -> head]]`` into premises and head."""
    premises = []
    while isinstance(phi, Impl):
        premises.append(phi.left)
        phi = phi.right
    return premises, phi


def classify_simple(phi: Formula) -> frozenset[SimpleKind]:
    premises, head = premise_chain(phi)
    kinds = set()
    if isinstance(head, Var) and head in premises:
        kinds.add(SimpleKind.FIRST)
        if premises[0] == head and head not in premises[1:]:
            kinds.add(SimpleKind.STRICT_FIRST)
    if len(premises) >= 2:
        positive = {p.index for p in premises if isinstance(p, Var)}
        negative = {p.child.index for p in premises
                    if isinstance(p, Neg) and isinstance(p.child, Var)}
        if positive & negative:
            kinds.add(SimpleKind.SECOND)
    return frozenset(kinds)


def in_s1(phi: Formula) -> bool:
    return SimpleKind.FIRST in classify_simple(phi)


def in_sc(phi: Formula) -> bool:
    return SimpleKind.STRICT_FIRST in classify_simple(phi)


def in_s1_or_s2(phi: Formula) -> bool:
    kinds = classify_simple(phi)
    return SimpleKind.FIRST in kinds or SimpleKind.SECOND in kinds


# ---------------------------------------------------------------------------
# B-categories


class Cat(enum.Enum):
    T = "T"
    U = "U"
    A = "A"


class Strength(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"


@dataclass(frozen=True)
class CategoryLabel:
    kind: Cat
    strength: Strength


_NEG_RULE = {Cat.T: Cat.A, Cat.U: Cat.U, Cat.A: Cat.T}


def _impl_rule(left: Cat, right: Cat, strength: Strength) -> Cat:
    if right is Cat.T:
        return Cat.T
    if left is Cat.A and strength is Strength.WEAK:
        return Cat.T
    if left is Cat.T:
        return right
    return Cat.U


def rule_label(phi: Formula, label_of: Callable[[Formula], Cat], strength: Strength) -> Cat:
    """Label from the recursive table alone, ignoring membership in the seed set."""
    if isinstance(phi, Var):
        return Cat.U
    if isinstance(phi, Neg):
        return _NEG_RULE[label_of(phi.child)]
    return _impl_rule(label_of(phi.left), label_of(phi.right), strength)


BasisTest = Callable[[Formula], bool]


class Categorizer:
    """Memoized bottom-up labelling of formulae for one seed set and strength.

    ``basis_test`` may be a plain predicate or, when it needs the labels of
    subformulae (the weak basis characterizations), a two-argument callable
    ``(phi, label_of)``.
    """

    def __init__(self, basis_test, strength: Strength | str, needs_labels: bool = False):
        self.strength = Strength(strength)
        self._test = basis_test
        self._needs_labels = needs_labels
        self._memo: dict[Formula, Cat] = {}

    def in_basis(self, phi: Formula) -> bool:
        if self._needs_labels:
            return self._test(phi, self.label)
        return self._test(phi)

    def label(self, phi: Formula) -> Cat:
        memo = self._memo
        hit = memo.get(phi)
        if hit is not None:
            return hit
        # iterative post-order keeps deep formulae off the Python stack
        stack = [(phi, False)]
        while stack:
            node, ready = stack.pop()
            if node in memo:
                continue
            if not ready:
                stack.append((node, True))
                if isinstance(node, Neg):
                    stack.append((node.child, False))
                elif isinstance(node, Impl):
                    stack.append((node.right, False))
                    stack.append((node.left, False))
                continue
            if self.in_basis(node):
                memo[node] = Cat.T
            else:
                memo[node] = rule_label(node, memo.__getitem__, self.strength)
        return memo[phi]

    def is_basic(self, phi: Formula) -> bool:
        """phi is in the seed set but not a tautology of the seed set minus phi."""
        return self.in_basis(phi) and rule_label(phi, self.label, self.strength) is not Cat.T


def category_classify(phi: Formula, basis_test: BasisTest, strength: Strength | str) -> CategoryLabel:
    cat = Categorizer(basis_test, strength)
    return CategoryLabel(cat.label(phi), cat.strength)


# structural basis characterizations


def weak_s1_basis(phi: Formula, label_of: Callable[[Formula], Cat]) -> bool:
    premises, head = premise_chain(phi)
    if not isinstance(head, Var) or not premises or premises[0] != head:
        return False
    return all(p != head and label_of(p) is not Cat.A for p in premises[1:])


def weak_s1s2_basis(phi: Formula, label_of: Callable[[Formula], Cat]) -> bool:
    premises, head = premise_chain(phi)
    if not premises or not isinstance(head, (Var, Neg)):
        return False
    first, middle = premises[0], premises[1:]
    if isinstance(head, Var) and first == head:
        return all(p != head and label_of(p) is not Cat.A for p in middle)
    # first premise is a literal, its complement must appear among the rest
    if isinstance(first, Var):
        atom, complement = first, Neg(first)
    elif isinstance(first, Neg) and isinstance(first.child, Var):
        atom = complement = first.child
    else:
        return False
    if head == atom or (isinstance(head, Neg) and label_of(head.child) is Cat.A):
        return False
    if complement not in middle:
        return False
    return all(psi != first and label_of(psi) is not Cat.A for psi in middle)


BASES = {
    # name: (seed predicate, strength, structural basis test, needs labels)
    "strong-S1": (in_s1, Strength.STRONG, lambda phi, _: in_sc(phi)),
    "weak-S1": (in_s1, Strength.WEAK, weak_s1_basis),
    "combined-S1S2": (in_s1_or_s2, Strength.WEAK, weak_s1s2_basis),
}
