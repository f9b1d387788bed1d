"""Frozen comparison-pair table for the steered binary descriptor.

256 point pairs drawn once from numpy default_rng(0), integer
coordinates uniform over the 31x31 patch ([-15, 15] on each axis),
and committed so descriptors stay stable across releases.
"""

import numpy as np

BRIEF_PAIRS = np.array(
    [
        [11, 4, 0, -7],
        [-6, -14, -13, -15],
        [-10, 10, 5, 13],
        [0, 3, 15, 7],
        [4, 1, 2, 13],
        [-7, 10, 5, -15],
        [-3, 11, 2, -14],
        [8, 7, 11, -10],
        [-13, 11, -15, 1],
        [-13, -6, -1, -2],
        [-3, -15, -15, -12],
        [-15, 5, 1, 5],
        [-8, 4, 8, -4],
        [-1, 15, 9, 15],
        [-4, 6, 14, 5],
        [11, 6, 6, -3],
        [12, -11, 2, 7],
        [11, 1, -4, -6],
        [-2, 0, 7, 12],
        [-13, 13, 1, -4],
        [5, 2, -8, -6],
        [7, 3, 0, -5],
        [8, -3, -5, 12],
        [-7, -8, 7, 4],
        [-14, -13, -4, 10],
        [-3, 9, -6, -8],
        [9, 12, -13, -14],
        [5, -5, 2, -11],
        [11, -2, 12, 9],
        [6, -8, 8, -14],
        [2, -3, 15, -9],
        [14, -13, 4, 2],
        [12, -6, 12, 5],
        [12, -9, 8, 14],
        [-14, -4, 4, -12],
        [0, 4, 8, 13],
        [-3, -2, -1, 14],
        [-9, 0, -14, -2],
        [14, 4, -5, 15],
        [3, 14, -15, -1],
        [10, 8, -3, 0],
        [-2, 1, -8, 9],
        [-13, -3, -7, 7],
        [8, 7, 13, 13],
        [-10, -12, -11, 7],
        [15, 13, 5, 15],
        [12, -15, -12, 11],
        [-13, 15, 10, 14],
        [-4, -11, 1, 15],
        [-4, 12, -4, 10],
        [-8, -1, -5, -8],
        [12, 9, -11, 13],
        [15, -7, -2, 1],
        [5, -2, -11, 13],
        [6, -14, 10, 7],
        [-10, 4, 0, -15],
        [13, 7, -6, -15],
        [-13, 8, -11, 0],
        [12, 13, -7, -13],
        [0, 11, 4, -13],
        [5, -5, -8, -2],
        [12, 14, -11, 2],
        [8, -7, -7, -8],
        [-9, 12, -9, -8],
        [-12, -12, 9, -7],
        [9, 3, 11, 2],
        [8, 10, -14, 2],
        [-1, -7, -1, -3],
        [0, 10, 10, 4],
        [7, 14, 4, -4],
        [-13, 2, -8, 3],
        [-15, 11, 14, -11],
        [10, -3, -14, 13],
        [14, -14, 3, 10],
        [9, -3, 11, 10],
        [-12, -15, -12, -4],
        [-12, -13, -7, 5],
        [1, -7, 14, 6],
        [4, 14, 9, -12],
        [-14, 11, -3, -14],
        [-1, -4, -2, -2],
        [-6, 0, 0, 15],
        [6, 9, -15, -6],
        [15, -7, 0, 11],
        [4, 12, -10, 0],
        [4, -5, 2, 15],
        [7, -6, -14, -10],
        [-7, 12, -7, 10],
        [-7, 5, 1, 14],
        [2, 13, 14, 8],
        [4, 11, 15, -8],
        [2, -11, -12, 5],
        [-14, 7, 10, -10],
        [6, -3, 12, 13],
        [2, 2, 7, 2],
        [8, -9, 9, 1],
        [8, 1, -6, -13],
        [1, 15, -14, 2],
        [-2, -15, 1, 8],
        [7, 15, 1, 3],
        [14, -6, 9, -10],
        [-4, 5, 2, -9],
        [5, 2, 13, 3],
        [12, 14, -13, -13],
        [0, 0, 2, 8],
        [-6, -10, 6, -3],
        [13, -14, 6, 7],
        [-7, -13, -6, -3],
        [15, 12, -8, -1],
        [3, 13, -11, 8],
        [13, 13, -7, -12],
        [3, -13, -11, -13],
        [-9, 11, 5, 4],
        [15, 0, -14, -10],
        [-7, 5, -4, -6],
        [-12, 7, -15, -1],
        [8, 0, 6, 9],
        [-9, -13, -14, 2],
        [-7, -9, 7, 10],
        [14, 0, 1, 15],
        [0, -10, -8, 14],
        [-14, 9, 5, -1],
        [10, 10, -2, 3],
        [8, 5, 0, 13],
        [12, -13, 1, 10],
        [-13, -4, 0, -5],
        [6, 15, -4, 9],
        [-12, 0, -15, -2],
        [-15, 12, 15, -13],
        [10, 6, -6, 9],
        [14, 9, 6, -6],
        [3, 9, 7, -9],
        [-3, -4, 6, -3],
        [-2, 1, 2, -12],
        [13, -3, -10, -15],
        [-2, 8, -6, 11],
        [-9, -11, -3, 6],
        [-6, 10, -15, 15],
        [-14, 11, -15, -2],
        [-6, 15, 5, 15],
        [-3, 0, 0, 8],
        [0, 13, -10, -1],
        [-8, 11, -11, 6],
        [13, -6, -7, 8],
        [3, 2, 12, -13],
        [-7, -3, 13, -13],
        [-1, -1, -15, -2],
        [5, -2, -6, 3],
        [15, -12, -7, 13],
        [-6, 6, -5, 10],
        [3, 12, 4, 3],
        [0, -14, -12, 7],
        [4, 2, -12, 10],
        [9, 1, -8, 10],
        [1, 15, -7, -5],
        [9, -10, -6, -3],
        [7, 8, 9, -2],
        [4, 3, 8, -12],
        [-6, 7, -9, -7],
        [15, -10, 15, 11],
        [-11, 2, -5, 0],
        [3, 12, 13, -13],
        [-10, 6, -9, -5],
        [3, -10, 15, 5],
        [-8, -4, 5, -5],
        [4, 14, -4, -9],
        [-7, 0, 2, -15],
        [4, -10, 4, 12],
        [-10, 9, -14, 2],
        [5, -9, 9, 2],
        [-3, -15, -11, 7],
        [-3, 7, 14, 5],
        [7, 3, -6, -13],
        [4, -8, -12, 2],
        [3, -3, 4, 15],
        [8, 13, -13, -11],
        [-4, 3, 6, 6],
        [13, -11, -10, -6],
        [-10, 7, -3, 12],
        [-7, -5, -6, -8],
        [11, 10, -6, 3],
        [12, -1, 12, -8],
        [-8, -13, 4, -15],
        [-10, 2, -2, -10],
        [0, 15, 15, -12],
        [8, -1, -1, -3],
        [10, -8, 3, 8],
        [-3, 4, -12, 7],
        [-6, -13, -6, -5],
        [4, 1, 10, -2],
        [12, -14, -5, -9],
        [-4, 14, -11, -10],
        [-3, 11, -15, 10],
        [9, -3, -14, -1],
        [6, 10, -11, 6],
        [2, 10, 7, 8],
        [11, 6, -3, 13],
        [2, 10, -12, -10],
        [1, 8, 14, -13],
        [11, -2, 14, -3],
        [13, -9, -5, 14],
        [15, -13, -11, -15],
        [13, -5, 1, 15],
        [11, -7, -4, 10],
        [0, -10, 14, 3],
        [9, 14, 3, 7],
        [11, 15, 1, 2],
        [5, 15, -2, 10],
        [-7, 9, -12, 12],
        [-5, 4, -11, -4],
        [-13, 1, 15, -8],
        [-7, 9, -10, -10],
        [-9, 2, 0, 1],
        [-15, 5, -6, 8],
        [10, -12, -6, 4],
        [-10, -3, -5, 4],
        [8, 6, -6, 3],
        [9, 7, 9, 1],
        [3, -1, 3, -7],
        [-1, -8, 0, 6],
        [9, 6, -10, -9],
        [-4, 15, -15, 5],
        [-6, 1, -13, 11],
        [12, 0, 9, -1],
        [7, -7, -6, -11],
        [-1, 7, 9, 11],
        [-10, 6, -7, -4],
        [-4, 2, 3, 2],
        [-13, 14, 11, -3],
        [2, -10, 4, 12],
        [13, 12, -14, -14],
        [7, -9, -10, 4],
        [-14, 9, -10, 3],
        [4, -10, -3, -12],
        [15, 0, -11, 10],
        [7, -9, -5, -13],
        [2, 2, -14, -10],
        [-1, -13, 7, 8],
        [7, 10, 9, -3],
        [-2, -6, -10, -7],
        [7, -4, 15, 2],
        [5, 1, 9, -4],
        [3, 4, 11, 5],
        [3, 2, -14, -3],
        [-6, 4, -6, 3],
        [0, -5, 0, -6],
        [-9, 1, 15, 3],
        [4, 3, 12, -4],
        [-2, 2, 2, 15],
        [-10, -2, -9, 11],
        [2, -13, -10, 12],
        [-2, 14, -13, -7],
        [1, -15, -3, -1],
        [-8, -10, 13, 15],
        [0, 12, 0, 14],
        [-14, 3, -14, 0],
    ],
    dtype=np.int64,
)
BRIEF_PAIRS.setflags(write=False)
