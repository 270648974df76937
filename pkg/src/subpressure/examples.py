"""Built-in example systems: three diagonal systems in dimension 3 with a
non-integer phase transition in (0,1), (1,2) and (2,3) respectively, and a
pair of 7 x 7 upper triangular matrices."""

from __future__ import annotations

EXAMPLES: dict[str, dict] = {
    "ex1": {
        "n": 3,
        "diagonals": [[0.9, 0.4, 0.6], [0.1, 0.4, 0.2]],
    },
    "ex2": {
        "n": 3,
        "diagonals": [[0.1, 0.2, 0.9], [0.9, 0.4, 0.2]],
    },
    "ex3": {
        "n": 3,
        "diagonals": [[0.9, 0.5, 0.8], [0.9, 0.5, 0.01]],
    },
    "7x7": {
        "n": 7,
        "matrices": [
            [
                [2, -6, 15, 0, -2, 0, 2],
                [0, -1, 0, 1, -6, 0, 0],
                [0, 0, 10, 4, 9, 6, 0],
                [0, 0, 0, 8, -2, 0, 1],
                [0, 0, 0, 0, -5, -3, 4],
                [0, 0, 0, 0, 0, 7, 7],
                [0, 0, 0, 0, 0, 0, 4],
            ],
            [
                [3, 2, 5, 0, -6, -4, 2],
                [0, 1, 2, 8, 6, 1, 6],
                [0, 0, -14, 1, 1, 13, 3],
                [0, 0, 0, 11, 9, 0, 9],
                [0, 0, 0, 0, 4, 10, 1],
                [0, 0, 0, 0, 0, -15, -5],
                [0, 0, 0, 0, 0, 0, 2],
            ],
        ],
        "labels": ["T1", "T2"],
    },
}
