"""Independent reference implementations used as test oracles.

Nothing here touches the compiled kernels: components are counted by plain
breadth-first search and measures by itertools enumeration.
"""

from collections import deque
from itertools import product

import numpy as np
import pytest

MASK64 = (1 << 64) - 1


def splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def ref_draw(key: int, t: int, m: int) -> tuple[int, float]:
    h = splitmix64(key ^ splitmix64(t))
    g = splitmix64(h)
    e = min(int((h >> 11) * 2.0 ** -53 * m), m - 1)
    return e, (g >> 11) * 2.0 ** -53


def ref_components(num_vertices, edges, open_bits, blocks=()) -> int:
    """Component count with every block of ``blocks`` contracted to one vertex."""
    adj = [[] for _ in range(num_vertices)]
    for (a, b), on in zip(edges, open_bits):
        if on:
            adj[int(a)].append(int(b))
            adj[int(b)].append(int(a))
    for blk in blocks:
        blk = [int(v) for v in blk]
        for v in blk[1:]:
            adj[blk[0]].append(v)
            adj[v].append(blk[0])
    seen = [False] * num_vertices
    count = 0
    for s in range(num_vertices):
        if seen[s]:
            continue
        count += 1
        seen[s] = True
        dq = deque([s])
        while dq:
            v = dq.popleft()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    dq.append(w)
    return count


def ref_connected(num_vertices, edges, open_bits, blocks, u, v) -> bool:
    adj = [[] for _ in range(num_vertices)]
    for (a, b), on in zip(edges, open_bits):
        if on:
            adj[int(a)].append(int(b))
            adj[int(b)].append(int(a))
    for blk in blocks:
        blk = [int(x) for x in blk]
        for x in blk[1:]:
            adj[blk[0]].append(x)
            adj[x].append(blk[0])
    seen = {u}
    dq = deque([u])
    while dq:
        x = dq.popleft()
        if x == v:
            return True
        for w in adj[x]:
            if w not in seen:
                seen.add(w)
                dq.append(w)
    return False


def ref_measure(num_vertices, edges, blocks, p, q) -> np.ndarray:
    """Probabilities indexed by mask (bit i = edge i open), by direct enumeration."""
    m = len(edges)
    w = np.empty(1 << m)
    for mask in range(1 << m):
        bits = [(mask >> i) & 1 for i in range(m)]
        k = sum(bits)
        w[mask] = p ** k * (1 - p) ** (m - k) * q ** ref_components(num_vertices, edges, bits, blocks)
    return w / w.sum()


def lattice_measure(lat, bc, p, q) -> np.ndarray:
    return ref_measure(lat.num_vertices, lat.edges, bc.wired_blocks, p, q)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


def all_masks(m):
    return product((0, 1), repeat=m)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
