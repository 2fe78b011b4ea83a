# tests/test_pglib.py
"""
Tests for truth tables, majority gates and the PG cell library.
"""
import random

import pytest

from app.errors import PgLibraryError
from app.services.pglib import (
    BooleanFunction,
    PgRealization,
    build_library,
    enumerate_pg_functions,
    is_pg_realizable,
    majority,
    switching_inputs_required,
)

AND2 = BooleanFunction(2, 0x8)
OR2 = BooleanFunction(2, 0xE)
NAND2 = BooleanFunction(2, 0x7)
NOR2 = BooleanFunction(2, 0x1)
XOR2 = BooleanFunction(2, 0x6)
MAJ3 = BooleanFunction(3, 0xE8)


@pytest.mark.unit
@pytest.mark.parametrize("n,bits,expected", [
    (3, (1, 1, 0), 1),
    (3, (1, 0, 0), 0),
    (5, (1, 1, 0, 0, 0), 0),
    (5, (1, 1, 1, 0, 0), 1),
])
def test_majority(n, bits, expected):
    """Majority is 1 iff more than half the inputs are set."""
    assert majority(n, bits) == expected


@pytest.mark.unit
@pytest.mark.parametrize("n", [2, 4, 7])
def test_majority_rejects_unsupported_sizes(n):
    with pytest.raises(PgLibraryError):
        majority(n, [0] * n)


@pytest.mark.unit
def test_switching_inputs_required():
    """A majority of the inputs must be ON for the write current to switch the device."""
    assert switching_inputs_required(3) == 2
    assert switching_inputs_required(5) == 3
    assert switching_inputs_required(1) == 1
    with pytest.raises(PgLibraryError):
        switching_inputs_required(4)


@pytest.mark.unit
def test_boolean_function_table_layout():
    """Variable 0 is the least significant bit of the row index."""
    f = BooleanFunction.from_callable(2, lambda bits: bits[0] and not bits[1])
    assert f.table == 0x2
    assert f.evaluate([1, 0]) == 1
    assert f.evaluate([0, 1]) == 0
    assert f.hex == "2"
    assert BooleanFunction(6, 1 << 63).hex == "8000000000000000"


@pytest.mark.unit
def test_boolean_function_bounds():
    with pytest.raises(PgLibraryError):
        BooleanFunction(7, 0)
    with pytest.raises(PgLibraryError):
        BooleanFunction(2, 0x10)


@pytest.mark.unit
def test_support_and_restrict():
    """Dropping a don't-care variable keeps the function on the remaining ones."""
    f = BooleanFunction.from_callable(3, lambda bits: bits[0] and bits[2])
    assert f.support() == (0, 2)
    assert f.restrict((0, 2)) == AND2


@pytest.mark.unit
def test_realization_validates_pattern():
    with pytest.raises(PgLibraryError):
        PgRealization(3, "ab")
    with pytest.raises(PgLibraryError):
        PgRealization(3, "aa1")
    with pytest.raises(PgLibraryError):
        PgRealization(3, "ac1")


@pytest.mark.unit
def test_maj3_without_inversion_has_and_or():
    functions = enumerate_pg_functions(3, allow_inversion=False)
    assert AND2 in functions
    assert OR2 in functions
    assert NAND2 not in functions
    assert NOR2 not in functions


@pytest.mark.unit
def test_maj3_with_inversion_has_nand_nor():
    functions = enumerate_pg_functions(3, allow_inversion=True)
    assert NAND2 in functions
    assert NOR2 in functions


@pytest.mark.unit
def test_maj5_with_two_inputs_on_is_or3():
    functions = enumerate_pg_functions(5, allow_inversion=False)
    or3 = BooleanFunction(3, 0xFE)
    assert or3 in functions
    assert functions[or3].pattern.count("1") == 2


@pytest.mark.unit
def test_enumerated_realizations_reproduce_their_functions():
    for n in (3, 5):
        for function, realization in enumerate_pg_functions(n).items():
            assert realization.evaluate() == function


@pytest.mark.unit
def test_enumerate_rejects_unsupported_base():
    with pytest.raises(PgLibraryError):
        enumerate_pg_functions(4)


@pytest.mark.unit
def test_no_xor_at_any_size(library):
    """XOR/XNOR are not threshold functions."""
    for arity in range(2, 6):
        parity = BooleanFunction.from_callable(arity, lambda bits: sum(bits) % 2)
        assert parity not in library
        assert parity.complement() not in library


@pytest.mark.unit
def test_is_pg_realizable_examples(library):
    maj = is_pg_realizable(MAJ3, library)
    assert maj is not None and maj.affixed == 0 and not maj.inverted

    assert is_pg_realizable(XOR2, library) is None

    nor = is_pg_realizable(NOR2, library)
    assert nor == PgRealization(3, "1ab", True)
    assert nor.evaluate() == NOR2


@pytest.mark.unit
def test_canonical_realization_prefers_smaller_base(library):
    """AND2 comes from MAJ3 even though MAJ5 can also build it."""
    assert is_pg_realizable(AND2, library).base == 3


@pytest.mark.unit
def test_realizability_matches_brute_force_small(library, pg_oracle):
    """Every function of up to 3 variables agrees with exhaustive enumeration."""
    for arity in range(4):
        for table in range(1 << (1 << arity)):
            f = BooleanFunction(arity, table)
            assert (is_pg_realizable(f, library) is not None) == (table in pg_oracle[arity]), f"arity {arity} 0x{f.hex}"


@pytest.mark.unit
def test_realizability_matches_brute_force_sampled(library, pg_oracle):
    rng = random.Random(1234)
    realizable = {a: sorted(pg_oracle[a]) for a in (4, 5)}
    for _ in range(1000):
        arity = rng.choice((4, 5))
        # mix known-realizable tables in, random tables are almost never threshold functions
        if rng.random() < 0.3:
            table = rng.choice(realizable[arity])
        else:
            table = rng.getrandbits(1 << arity)
        f = BooleanFunction(arity, table)
        assert (is_pg_realizable(f, library) is not None) == (table in pg_oracle[arity])


@pytest.mark.unit
def test_library_without_inversion_is_monotone(library_no_inversion):
    """Without inversion every cell is monotone increasing in each variable."""
    for cell in library_no_inversion.cells():
        f = cell.function
        for index in range(f.size):
            for var in range(f.arity):
                if not index >> var & 1:
                    assert f.row(index) <= f.row(index | 1 << var)


@pytest.mark.unit
def test_library_dump_format(library):
    lines = library.dump().splitlines()
    assert len(lines) == len(library)
    assert "NOR2 2 table=0x1 base=3 affix=1ab inv=1" in lines
    assert "MAJ3 3 table=0xe8 base=3 affix=abc inv=0" in lines
    assert library.dump() == build_library(costs={}).dump()


@pytest.mark.unit
def test_library_max_arity(library):
    assert library.max_arity == 5
