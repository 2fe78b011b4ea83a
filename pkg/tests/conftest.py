# tests/conftest.py
"""
Shared fixtures for all tests.
"""
import itertools
import random
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from app import config
from app.main import app
from app.services.bench import parse_bench
from app.services.netlist import FlipFlop, Gate, GateKind, Netlist
from app.services.pglib import build_library
from app.services.techfile import load_tech

ROOT = Path(__file__).resolve().parent.parent
BENCH_DIR = ROOT / "benchmarks"
TECH_FILE = ROOT / "tech" / "default.tech"

# the shipped circuits, plus any under NVC_BENCH_DIR (e.g. a full ISCAS-89 checkout)
BUNDLED_BENCHMARKS = sorted(
    {p.resolve() for p in [*BENCH_DIR.glob("*.bench"), *config.BENCH_DIR.glob("*.bench")]},
    key=lambda p: (p.stem, str(p)),
)

MULTI_INPUT_KINDS = [GateKind.AND, GateKind.NAND, GateKind.OR, GateKind.NOR, GateKind.XOR, GateKind.XNOR]


@pytest.fixture
def client():
    """Create a test client for the API."""
    return TestClient(app)


@pytest.fixture(scope="session")
def s27_text():
    return (BENCH_DIR / "s27.bench").read_text()


@pytest.fixture
def s27(s27_text):
    return parse_bench(s27_text, name="s27")


@pytest.fixture(scope="session")
def tech():
    return load_tech(TECH_FILE)


@pytest.fixture(scope="session")
def library(tech):
    return build_library(allow_inversion=True, costs=tech.pg)


@pytest.fixture(scope="session")
def library_no_inversion():
    return build_library(allow_inversion=False)


def random_netlist(seed: int, inputs: int = 4, ffs: int = 4, gates: int = 14, outputs: int = 2) -> Netlist:
    """
    Random acyclic netlist: every gate only reads nets created before it,
    so the only cycles go through flip-flops.
    """
    rng = random.Random(seed)
    pis = [f"I{i}" for i in range(inputs)]
    qs = [f"Q{i}" for i in range(ffs)]
    available = pis + qs
    gate_map = {}
    for g in range(gates):
        name = f"N{g}"
        if rng.random() < 0.2:
            kind = rng.choice([GateKind.NOT, GateKind.BUFF])
            fanin = (rng.choice(available),)
        else:
            kind = rng.choice(MULTI_INPUT_KINDS[:4] if rng.random() < 0.8 else MULTI_INPUT_KINDS)
            fanin = tuple(rng.sample(available, min(len(available), rng.choice([2, 2, 3]))))
        gate_map[name] = Gate(name, kind, fanin, name)
        available.append(name)
    gate_nets = list(gate_map)
    ff_map = {q: FlipFlop(q, d=rng.choice(gate_nets or available), q=q) for q in qs}
    outs = rng.sample(available, min(outputs, len(available)))
    return Netlist(f"rand{seed}", pis, outs, gate_map, ff_map)


def cyclic_bench(seed: int) -> str:
    """Bench text with a combinational loop of random length hidden among ordinary gates."""
    rng = random.Random(seed)
    length = rng.randint(1, 4)
    lines = ["INPUT(a)", "INPUT(b)", "OUTPUT(L0)", "F = DFF(L0)"]
    for i in range(length):
        nxt = f"L{(i + 1) % length}"
        kind = rng.choice(["AND", "OR", "NAND", "NOR"])
        lines.append(f"L{i} = {kind}({nxt}, {rng.choice(['a', 'b', 'F'])})")
    lines.append("X = XOR(a, b)")
    rng.shuffle(lines)
    return "\n".join(lines) + "\n"


@pytest.fixture
def random_netlists():
    return [random_netlist(seed) for seed in range(25)]


def _pattern_table(n: int, arity: int, pattern, inverted: bool) -> int:
    table = 0
    for index in range(1 << arity):
        bits = [(index >> k) & 1 for k in range(arity)]
        ones = sum(bits[p] if isinstance(p, int) else int(p == "1") for p in pattern)
        if (ones * 2 > n) != inverted:
            table |= 1 << index
    return table


def brute_force_realizable(arity: int, inversion: bool = True) -> frozenset:
    """Tables of every `arity`-input function one MAJ3/MAJ5 realizes, by plain enumeration."""
    tables = set()
    for n in (3, 5):
        if arity > n:
            continue
        choices = ["0", "1"] + list(range(arity))
        for pattern in itertools.product(choices, repeat=n):
            used = sorted(p for p in pattern if isinstance(p, int))
            if used != list(range(arity)):
                continue
            for inverted in ((False, True) if inversion else (False,)):
                tables.add(_pattern_table(n, arity, pattern, inverted))
    return frozenset(tables)


@pytest.fixture(scope="session")
def pg_oracle():
    """arity -> set of realizable truth tables (inversion allowed)."""
    return {arity: brute_force_realizable(arity) for arity in range(6)}
