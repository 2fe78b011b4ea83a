# app/services/pglib.py
"""
Truth-table Boolean functions and the polymorphic-gate (PG) library.

A PG is an n-input majority gate (n in {3, 5}). Affixing some of its inputs
ON or OFF and wiring the remaining ones to distinct variables reconfigures it
into AND/OR/threshold functions; the complementary sense-amplifier output
adds the inverted forms (NAND, NOR, minority, NOT).
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

from ..errors import PgLibraryError

logger = logging.getLogger(__name__)

MAX_ARITY = 6
BASE_ARITIES = (3, 5)

ON = "1"
OFF = "0"
_VARIABLE_NAMES = "abcdefg"


@dataclass(frozen=True, order=True)
class BooleanFunction:
    """Truth table over `arity` variables; bit i is the output for assignment i (variable 0 = LSB)."""

    arity: int
    table: int

    def __post_init__(self):
        if not 0 <= self.arity <= MAX_ARITY:
            raise PgLibraryError(f"arity {self.arity} outside [0, {MAX_ARITY}]")
        if not 0 <= self.table < (1 << self.size):
            raise PgLibraryError(f"table 0x{self.table:x} does not fit {self.size} rows")

    @property
    def size(self) -> int:
        return 1 << self.arity

    @classmethod
    def from_callable(cls, arity: int, fn: Callable[[Tuple[int, ...]], int]) -> "BooleanFunction":
        table = 0
        for index in range(1 << arity):
            bits = tuple((index >> k) & 1 for k in range(arity))
            if fn(bits):
                table |= 1 << index
        return cls(arity, table)

    @classmethod
    def from_hex(cls, arity: int, text: str) -> "BooleanFunction":
        return cls(arity, int(text, 16))

    @property
    def hex(self) -> str:
        width = max(1, self.size // 4)
        return f"{self.table:0{width}x}"

    def row(self, index: int) -> int:
        return (self.table >> index) & 1

    def evaluate(self, bits: Sequence[int]) -> int:
        if len(bits) != self.arity:
            raise PgLibraryError(f"expected {self.arity} inputs, got {len(bits)}")
        index = 0
        for k, bit in enumerate(bits):
            if bit:
                index |= 1 << k
        return self.row(index)

    def complement(self) -> "BooleanFunction":
        return BooleanFunction(self.arity, ~self.table & ((1 << self.size) - 1))

    def depends_on(self, var: int) -> bool:
        stride = 1 << var
        for index in range(self.size):
            if not index & stride and self.row(index) != self.row(index | stride):
                return True
        return False

    def support(self) -> Tuple[int, ...]:
        return tuple(v for v in range(self.arity) if self.depends_on(v))

    def restrict(self, variables: Sequence[int]) -> "BooleanFunction":
        """Project onto `variables` (in that order); all other variables must be don't-cares."""
        def fn(bits):
            index = 0
            for position, var in enumerate(variables):
                if bits[position]:
                    index |= 1 << var
            return self.row(index)
        return BooleanFunction.from_callable(len(variables), fn)


def majority(n: int, bits: Sequence[int]) -> int:
    """1 iff more than half of the n input bits are set."""
    if n not in BASE_ARITIES:
        raise PgLibraryError(f"majority base must be one of {BASE_ARITIES}, got {n}")
    if len(bits) != n:
        raise PgLibraryError(f"majority of {n} needs {n} bits, got {len(bits)}")
    return int(sum(1 for b in bits if b) > n // 2)


def switching_inputs_required(n: int) -> int:
    """ON inputs at which the summed write current first exceeds the critical current."""
    if n < 1 or n % 2 == 0:
        raise PgLibraryError(f"PG input count must be odd and positive, got {n}")
    # majority semantics: (n+1)/2, not the (n-1)/2 sometimes quoted for NV-PG sizing
    return (n + 1) // 2


@dataclass(frozen=True)
class PgRealization:
    """
    Majority gate of `base` inputs with a per-position affix pattern.

    pattern[i] is '0' (affixed OFF), '1' (affixed ON) or a variable letter
    ('a' = variable 0, 'b' = variable 1, ...).
    """

    base: int
    pattern: str
    inverted: bool = False

    def __post_init__(self):
        if len(self.pattern) != self.base:
            raise PgLibraryError(f"pattern {self.pattern!r} does not have {self.base} positions")
        letters = [c for c in self.pattern if c not in (ON, OFF)]
        expected = sorted(_VARIABLE_NAMES[:len(letters)])
        if sorted(letters) != expected:
            raise PgLibraryError(f"pattern {self.pattern!r} must use each variable exactly once")

    @property
    def arity(self) -> int:
        return sum(1 for c in self.pattern if c not in (ON, OFF))

    @property
    def affixed(self) -> int:
        return self.base - self.arity

    def sort_key(self) -> Tuple[int, bool, str]:
        return (self.base, self.inverted, self.pattern)

    def evaluate(self) -> BooleanFunction:
        def fn(bits):
            inputs = [
                1 if c == ON else 0 if c == OFF else bits[_VARIABLE_NAMES.index(c)]
                for c in self.pattern
            ]
            return majority(self.base, inputs) ^ int(self.inverted)
        return BooleanFunction.from_callable(self.arity, fn)


@dataclass(frozen=True)
class PgCellCost:
    area: float = 0.0
    power: float = 0.0
    t_wr: float = 0.0
    t_rd: float = 0.0
    write_energy: float = 0.0


@dataclass(frozen=True)
class PgCell:
    name: str
    realization: PgRealization
    function: BooleanFunction
    cost: PgCellCost = field(default_factory=PgCellCost)

    def dump_line(self) -> str:
        r = self.realization
        return (
            f"{self.name} {self.function.arity} table=0x{self.function.hex} "
            f"base={r.base} affix={r.pattern} inv={int(r.inverted)}"
        )


# Names for the functions people look for in a dump
_KNOWN_NAMES: Dict[Tuple[int, int], str] = {
    (0, 0x0): "CONST0",
    (0, 0x1): "CONST1",
    (1, 0x2): "BUF",
    (1, 0x1): "NOT",
    (2, 0x8): "AND2",
    (2, 0xE): "OR2",
    (2, 0x7): "NAND2",
    (2, 0x1): "NOR2",
    (3, 0x80): "AND3",
    (3, 0xFE): "OR3",
    (3, 0x7F): "NAND3",
    (3, 0x01): "NOR3",
    (3, 0xE8): "MAJ3",
    (3, 0x17): "MIN3",
}


def _cell_name(function: BooleanFunction) -> str:
    name = _KNOWN_NAMES.get((function.arity, function.table))
    if name:
        return name
    if function.arity == 5:
        maj5 = PgRealization(5, "abcde").evaluate()
        if function == maj5:
            return "MAJ5"
        if function == maj5.complement():
            return "MIN5"
    return f"PG{function.arity}_{function.hex}"


def _realizations(n: int, allow_inversion: bool) -> Iterator[PgRealization]:
    inversions = (False, True) if allow_inversion else (False,)
    for arity in range(n + 1):
        for var_positions in itertools.combinations(range(n), arity):
            fixed_positions = [p for p in range(n) if p not in var_positions]
            for constants in itertools.product((OFF, ON), repeat=len(fixed_positions)):
                for order in itertools.permutations(_VARIABLE_NAMES[:arity]):
                    slots = [""] * n
                    for p, c in zip(fixed_positions, constants):
                        slots[p] = c
                    for p, c in zip(var_positions, order):
                        slots[p] = c
                    for inverted in inversions:
                        yield PgRealization(n, "".join(slots), inverted)


def enumerate_pg_functions(n: int, allow_inversion: bool = True) -> Dict[BooleanFunction, PgRealization]:
    """All distinct functions of an n-input PG, each with its canonical (least) realization."""
    if n not in BASE_ARITIES:
        raise PgLibraryError(f"PG base must be one of {BASE_ARITIES}, got {n}")
    functions: Dict[BooleanFunction, PgRealization] = {}
    for realization in _realizations(n, allow_inversion):
        function = realization.evaluate()
        current = functions.get(function)
        if current is None or realization.sort_key() < current.sort_key():
            functions[function] = realization
    logger.debug(f"MAJ{n} (inversion={allow_inversion}) realizes {len(functions)} functions")
    return functions


class PgLibrary:
    """Immutable function -> cell map built from one or more PG base sizes."""

    def __init__(self, cells: Iterable[PgCell], allow_inversion: bool):
        self._cells: Dict[Tuple[int, int], PgCell] = {}
        for cell in cells:
            key = (cell.function.arity, cell.function.table)
            current = self._cells.get(key)
            if current is None or cell.realization.sort_key() < current.realization.sort_key():
                self._cells[key] = cell
        self.allow_inversion = allow_inversion

    def __len__(self) -> int:
        return len(self._cells)

    def __iter__(self) -> Iterator[PgCell]:
        return iter(self.cells())

    def __contains__(self, function: BooleanFunction) -> bool:
        return (function.arity, function.table) in self._cells

    @property
    def max_arity(self) -> int:
        return max((arity for arity, _ in self._cells), default=0)

    def cells(self):
        return [self._cells[k] for k in sorted(self._cells)]

    def lookup(self, function: BooleanFunction) -> Optional[PgCell]:
        return self._cells.get((function.arity, function.table))

    def dump(self) -> str:
        return "".join(cell.dump_line() + "\n" for cell in self.cells())


def build_library(
    bases: Sequence[int] = BASE_ARITIES,
    allow_inversion: bool = True,
    costs: Optional[Mapping[int, PgCellCost]] = None,
) -> PgLibrary:
    """Build the PG cell library, checking every cell against its realization."""
    costs = costs or {}
    cells = []
    for n in bases:
        for function, realization in enumerate_pg_functions(n, allow_inversion).items():
            if realization.evaluate() != function:
                raise PgLibraryError(f"realization {realization} does not reproduce 0x{function.hex}")
            cells.append(PgCell(_cell_name(function), realization, function, costs.get(n, PgCellCost())))
    library = PgLibrary(cells, allow_inversion)
    logger.info(f"Built PG library: {len(library)} cells from bases {tuple(bases)}, inversion={allow_inversion}")
    return library


def is_pg_realizable(function: BooleanFunction, library: PgLibrary) -> Optional[PgRealization]:
    """Canonical realization of `function`, or None when no single PG implements it."""
    cell = library.lookup(function)
    return cell.realization if cell else None
