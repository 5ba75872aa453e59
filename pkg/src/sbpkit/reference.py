"""Reference constants of the sixth-order operator family.

These are the published high-precision values the package reproduces; the
test suite and the CLI ``--check`` mode compare freshly computed quantities
against them.
"""

# Semi-definiteness limits of the free parameter (both roots, ascending) as a
# function of the number of grid intervals; converged for n >= 21.
ALPHA_STAR_TABLE = {
    11: (481.3406894997601, 481.3410851822219),
    12: (481.3408797227131, 481.3408949417200),
    13: (481.3408847406793, 481.3408899235506),
    14: (481.3408871324619, 481.3408875317594),
    15: (481.3408873292311, 481.3408873349902),
    16: (481.3408873299936, 481.3408873342276),
    17: (481.3408873319172, 481.3408873323040),
    18: (481.3408873321098, 481.3408873321114),
    19: (481.3408873321089, 481.3408873321123),
    20: (481.3408873321105, 481.3408873321108),
    21: (481.3408873321106, 481.3408873321106),
    22: (481.3408873321106, 481.3408873321106),
    23: (481.3408873321106, 481.3408873321106),
    24: (481.3408873321106, 481.3408873321106),
}

ALPHA_STAR_CONVERGED = 481.3408873321106

# Borrowing capacity by free-parameter value, converged for n >= 21.
BORROWING_REFERENCE = {
    490.0: 0.187871502626966,
    483.0: 0.087556118235046,
}

# Smallest compatible alpha for the three named members of the D1 family.
MIN_ALPHA_REFERENCE = {
    89387.0 / 129600.0: 481.3588804669321,   # minimum-bandwidth member
    331.0 / 472.0: 481.6401641339156,        # spectrum-optimized member
    0.69113483: 481.35207212433,             # member at the compatibility edge
}

# Minimizers of the boundary truncation vector.
TRUNCATION_ARGMIN_L2 = 482.5622776076688
TRUNCATION_ARGMIN_H = 483.3965798037094

# Compatibility region of beta at alpha = 490.
BETA_RANGE_AT_490 = (0.6789094547, 0.7254477238)
