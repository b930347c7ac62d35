"""Maze solving with a spike wavefront and STDP.

Every free cell is an excitatory neuron connected to its free 4-neighbours;
every wall cell is an inhibitory neuron.  The start neuron fires first and
each neuron fires once, one tick after its first neighbour did, because the
reset potential is far below zero and nothing brings it back.  STDP then
strengthens exactly those synapses whose presynaptic neuron fired one tick
before the postsynaptic one, so the strengthened synapses form a tree rooted
at the start.  Walking it backwards from the goal gives the path.

Synapses onto wall neurons are plastic too, but wall neurons never fire, so
those synapses can never be strengthened and the backtrack never enters a
wall.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import fixed
from .mapper.mapping import FabricConfig, map_network
from .mapper.netdesc import NetworkDescription
from .sim import Simulator

Cell = tuple[int, int]
# A forward synapse sees its presynaptic spike arrive in the very tick the
# postsynaptic neuron fires, so both STDP terms apply at once; potentiation
# has to outweigh depression for such a synapse to end up stronger.
DEFAULT_STDP = {"a_plus": 0.125, "a_minus": -0.0625}
_NEIGHBOURS = ((-1, 0), (1, 0), (0, -1), (0, 1))


class MazeError(ValueError):
    pass


@dataclass
class MazeScenario:
    walls: np.ndarray  # bool (rows, cols); True marks an obstacle
    start: Cell
    goal: Cell
    stdp: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_STDP))

    def __post_init__(self):
        self.walls = np.asarray(self.walls, dtype=bool)
        for name, cell in (("start", self.start), ("goal", self.goal)):
            r, c = cell
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise MazeError(f"{name} {cell} is outside the {self.rows}x{self.cols} grid")
            if self.walls[r, c]:
                raise MazeError(f"{name} {cell} is an obstacle")

    @property
    def rows(self) -> int:
        return self.walls.shape[0]

    @property
    def cols(self) -> int:
        return self.walls.shape[1]

    def free(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.rows and 0 <= c < self.cols and not self.walls[r, c]

    def neighbours(self, cell: Cell):
        r, c = cell
        for dr, dc in _NEIGHBOURS:
            yield r + dr, c + dc

    def render(self, path: list[Cell] | None = None) -> str:
        on_path = set(path or ())
        rows = []
        for r in range(self.rows):
            line = []
            for c in range(self.cols):
                if (r, c) == self.start:
                    line.append("S")
                elif (r, c) == self.goal:
                    line.append("G")
                elif self.walls[r, c]:
                    line.append("#")
                else:
                    line.append("*" if (r, c) in on_path else ".")
            rows.append("".join(line))
        return "\n".join(rows)


@dataclass
class MazeResult:
    reachable: bool
    path: list[Cell] | None
    ticks: int
    spikes: int

    @property
    def length(self) -> int:
        return len(self.path) - 1 if self.path else 0


# -- scenarios ---------------------------------------------------------------
def parse_maze(text: str) -> MazeScenario:
    """``#`` obstacle, ``.`` free, ``S`` start, ``G`` goal; blank lines are ignored."""
    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MazeError("empty maze")
    width = max(len(ln) for ln in lines)
    walls = np.ones((len(lines), width), dtype=bool)
    start = goal = None
    for r, ln in enumerate(lines):
        for c, ch in enumerate(ln):
            if ch not in "#.SG":
                raise MazeError(f"line {r + 1}: unexpected character {ch!r}")
            walls[r, c] = ch == "#"
            if ch == "S":
                start = (r, c)
            elif ch == "G":
                goal = (r, c)
    if start is None or goal is None:
        raise MazeError("maze needs one S and one G")
    return MazeScenario(walls, start, goal)


def random_maze(size: int, seed: int, density: float = 0.3) -> MazeScenario:
    """Independent obstacles with probability ``density``; corners are start and goal."""
    rng = np.random.default_rng(seed)
    walls = rng.random((size, size)) < density
    walls[0, 0] = walls[size - 1, size - 1] = False
    return MazeScenario(walls, (0, 0), (size - 1, size - 1))


def carved_maze(size: int, seed: int) -> MazeScenario:
    """Perfect maze from a randomized depth-first carve (odd ``size``)."""
    if size < 3 or size % 2 == 0:
        raise MazeError("carved mazes need an odd size of at least 3")
    rng = np.random.default_rng(seed)
    walls = np.ones((size, size), dtype=bool)
    walls[0, 0] = False
    stack = [(0, 0)]
    while stack:
        r, c = stack[-1]
        options = [(r + 2 * dr, c + 2 * dc, dr, dc) for dr, dc in _NEIGHBOURS
                   if 0 <= r + 2 * dr < size and 0 <= c + 2 * dc < size and walls[r + 2 * dr, c + 2 * dc]]
        if not options:
            stack.pop()
            continue
        nr, nc, dr, dc = options[rng.integers(len(options))]
        walls[r + dr, c + dc] = walls[nr, nc] = False
        stack.append((nr, nc))
    return MazeScenario(walls, (0, 0), (size - 1, size - 1))


# -- oracles -----------------------------------------------------------------
def bfs_distances(maze: MazeScenario) -> dict[Cell, int]:
    dist = {maze.start: 0}
    queue = deque([maze.start])
    while queue:
        cell = queue.popleft()
        for n in maze.neighbours(cell):
            if maze.free(n) and n not in dist:
                dist[n] = dist[cell] + 1
                queue.append(n)
    return dist


def path_is_valid(maze: MazeScenario, path: list[Cell]) -> bool:
    if not path or path[0] != maze.start or path[-1] != maze.goal:
        return False
    if len(set(path)) != len(path) or not all(maze.free(c) for c in path):
        return False
    return all(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1 for a, b in zip(path, path[1:]))


# -- network -----------------------------------------------------------------
def build_network(maze: MazeScenario, seed: int = 0) -> tuple[NetworkDescription, dict, dict]:
    free = [(r, c) for r in range(maze.rows) for c in range(maze.cols) if not maze.walls[r, c]]
    wall = [(r, c) for r in range(maze.rows) for c in range(maze.cols) if maze.walls[r, c]]
    fid = {cell: i for i, cell in enumerate(free)}
    wid = {cell: i for i, cell in enumerate(wall)}
    net = NetworkDescription(seed=seed)
    net.add_population("free", len(free), "lif",
                       params={"decay": 1.0, "gain": 1.0, "v_th": 0.5, "v_reset": -100.0},
                       init={"v": {"*": 0.0, fid[maze.start]: 1.0}}, learning="stdp",
                       learning_params=dict(maze.stdp))
    ff, fw, wf = [], [], []
    for cell in free:
        for n in maze.neighbours(cell):
            if n in fid:
                ff.append((fid[cell], fid[n], 1.0))
            elif n in wid:
                fw.append((fid[cell], wid[n], 1.0))
                wf.append((wid[n], fid[cell], -1.0))
    if ff:
        net.add_projection("step", "free", "free", "explicit", connections=ff, plastic=True)
    if wall:
        net.add_population("wall", len(wall), "lif", params={"decay": 1.0, "v_th": 100.0}, learning="stdp",
                           learning_params=dict(maze.stdp))
        if fw:
            net.add_projection("blocked", "free", "wall", "explicit", connections=fw, plastic=True)
            net.add_projection("inhibit", "wall", "free", "explicit", connections=wf, width=2)
    return net, fid, wid


def solve(maze: MazeScenario, fabric: FabricConfig | None = None, max_ticks: int | None = None,
          workers: int = 1, noc: str = "cycle", seed: int = 0) -> MazeResult:
    net, fid, _ = build_network(maze, seed)
    free = {i: cell for cell, i in fid.items()}
    size = max(maze.rows, maze.cols)
    fabric = fabric or FabricConfig(max(2, min(24, size)), max(2, min(24, size)))
    mapped = map_network(net, fabric)
    budget = len(fid) + 1 if max_ticks is None else max_ticks
    goal_core, goal_local = mapped.locate("free", fid[maze.goal])
    spikes = ticks = 0
    reached = False
    with Simulator(mapped.images, mapped.fabric, workers=workers, noc=noc) as sim:
        while ticks < budget:
            fired = sim.step()
            ticks += 1
            n = sum(len(f) for f in fired)
            spikes += n
            if goal_local in fired[goal_core]:
                reached = True
                break
            if n == 0:
                break
        weights = sim.synapse_weights()
    if not reached:
        return MazeResult(False, None, ticks, spikes)
    initial = fixed.to_raw(1.0, net.frac_bits)
    inbound: dict[int, list[tuple[int, int]]] = {}
    for sc, sn, dc, dn, w in weights:
        spop, si = mapped.owner(sc, sn)
        dpop, di = mapped.owner(dc, dn)
        if spop == dpop == "free" and w > initial:
            inbound.setdefault(di, []).append((w, si))
    path = [fid[maze.goal]]
    start = fid[maze.start]
    while path[-1] != start:
        options = inbound.get(path[-1])
        if not options or len(path) > len(fid):
            raise MazeError("strengthened synapses do not lead back to the start")
        best = max(w for w, _ in options)
        path.append(min(i for w, i in options if w == best))
    return MazeResult(True, [free[i] for i in reversed(path)], ticks, spikes)
