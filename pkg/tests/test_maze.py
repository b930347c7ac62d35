import numpy as np
import pytest

from darwinsim.maze import (
    MazeError,
    MazeScenario,
    bfs_distances,
    carved_maze,
    parse_maze,
    path_is_valid,
    random_maze,
    solve,
)

CORRIDOR = """
S#...
.#.#.
.#.#.
.#.#.
...#G
"""


def test_single_corridor_exact_path():
    res = solve(parse_maze(CORRIDOR))
    assert res.reachable
    assert res.path == [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (4, 1), (4, 2), (3, 2), (2, 2), (1, 2),
                        (0, 2), (0, 3), (0, 4), (1, 4), (2, 4), (3, 4), (4, 4)]
    assert res.length == 16 and res.ticks == 17


def test_walled_off_goal_is_unreachable():
    res = solve(parse_maze("S#..\n##..\n...G\n"))
    assert not res.reachable and res.path is None
    assert res.spikes == 1  # only the start fires


@pytest.mark.parametrize("seed", range(8))
def test_random_mazes_agree_with_bfs(seed):
    maze = random_maze(15, seed)
    res = solve(maze)
    dist = bfs_distances(maze)
    assert res.reachable == (maze.goal in dist)
    if res.reachable:
        assert path_is_valid(maze, res.path)
        assert res.length == dist[maze.goal]  # the wavefront reaches the goal along a shortest path


def test_carved_maze_path():
    maze = carved_maze(15, 4)
    res = solve(maze)
    assert res.reachable and path_is_valid(maze, res.path)
    assert res.length == bfs_distances(maze)[maze.goal]


def test_tick_budget_cuts_the_wave():
    res = solve(parse_maze(CORRIDOR), max_ticks=5)
    assert not res.reachable and res.ticks == 5


def test_path_validator():
    maze = parse_maze("S.\n.G\n")
    assert path_is_valid(maze, [(0, 0), (0, 1), (1, 1)])
    assert not path_is_valid(maze, [(0, 0), (1, 1)])
    assert not path_is_valid(maze, [(0, 0), (0, 1), (0, 0), (0, 1), (1, 1)])


def test_maze_errors():
    with pytest.raises(MazeError, match="unexpected"):
        parse_maze("S?G")
    with pytest.raises(MazeError, match="one S"):
        parse_maze("..G")
    with pytest.raises(MazeError, match="empty"):
        parse_maze("\n\n")
    with pytest.raises(MazeError, match="obstacle"):
        MazeScenario(np.ones((2, 2), bool), (0, 0), (1, 1))
    with pytest.raises(MazeError):
        carved_maze(4, 0)


def test_render_marks_path():
    maze = parse_maze("S.\n#G\n")
    assert maze.render([(0, 0), (0, 1), (1, 1)]) == "S*\n#G"
