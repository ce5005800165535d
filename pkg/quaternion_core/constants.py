import numpy as np

# Component order everywhere: [s0, s1, s2, s3] along 1, e1, e2, e3
UNIT_VECTORS = {
    "e1": (0.0, 1.0, 0.0, 0.0),
    "e2": (0.0, 0.0, 1.0, 0.0),
    "e3": (0.0, 0.0, 0.0, 1.0),
}

# Structure constants: (ab)_c = sum_{a,b} a_a b_b MULTIPLICATION_TABLE[a, b, c]
MULTIPLICATION_TABLE = np.zeros((4, 4, 4))
for _k in range(4):
    MULTIPLICATION_TABLE[0, _k, _k] = 1.0
    MULTIPLICATION_TABLE[_k, 0, _k] = 1.0
for _k in (1, 2, 3):
    MULTIPLICATION_TABLE[_k, _k, 0] = -1.0
for _a, _b, _c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
    MULTIPLICATION_TABLE[_a, _b, _c] = 1.0
    MULTIPLICATION_TABLE[_b, _a, _c] = -1.0
MULTIPLICATION_TABLE.setflags(write=False)

CONJUGATION_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])
CONJUGATION_SIGNS.setflags(write=False)

UNIT_TOLERANCE = 1e-12
