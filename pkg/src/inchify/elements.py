"""Periodic-table data and valence tables used by the parser and pipeline."""

SYMBOL_TO_Z = {
    "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8,
    "F": 9, "Ne": 10, "Na": 11, "Mg": 12, "Al": 13, "Si": 14, "P": 15,
    "S": 16, "Cl": 17, "Ar": 18, "K": 19, "Ca": 20, "Sc": 21, "Ti": 22,
    "V": 23, "Cr": 24, "Mn": 25, "Fe": 26, "Co": 27, "Ni": 28, "Cu": 29,
    "Zn": 30, "Ga": 31, "Ge": 32, "As": 33, "Se": 34, "Br": 35, "Kr": 36,
    "Rb": 37, "Sr": 38, "Y": 39, "Zr": 40, "Nb": 41, "Mo": 42, "Tc": 43,
    "Ru": 44, "Rh": 45, "Pd": 46, "Ag": 47, "Cd": 48, "In": 49, "Sn": 50,
    "Sb": 51, "Te": 52, "I": 53, "Xe": 54, "Cs": 55, "Ba": 56, "La": 57,
    "Ce": 58, "Pr": 59, "Nd": 60, "Pm": 61, "Sm": 62, "Eu": 63, "Gd": 64,
    "Tb": 65, "Dy": 66, "Ho": 67, "Er": 68, "Tm": 69, "Yb": 70, "Lu": 71,
    "Hf": 72, "Ta": 73, "W": 74, "Re": 75, "Os": 76, "Ir": 77, "Pt": 78,
    "Au": 79, "Hg": 80, "Tl": 81, "Pb": 82, "Bi": 83, "Po": 84, "At": 85,
    "Rn": 86, "Fr": 87, "Ra": 88, "Ac": 89, "Th": 90, "Pa": 91, "U": 92,
    "Np": 93, "Pu": 94,
}

Z_TO_SYMBOL = {z: s for s, z in SYMBOL_TO_Z.items()}

# Everything outside this set is treated as a metal and disconnected.
NONMETALS = frozenset({1, 2, 5, 6, 7, 8, 9, 10, 14, 15, 16, 17, 18,
                       32, 33, 34, 35, 36, 52, 53, 54, 85, 86})

# Organic subset: atoms writable without brackets, implicit-H rule applies.
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})

# Lowercase symbols accepted as aromatic atoms.
AROMATIC_ORGANIC = frozenset({"b", "c", "n", "o", "p", "s"})
AROMATIC_BRACKET = frozenset({"b", "c", "n", "o", "p", "s", "se", "as"})

# Default valence lists for the organic subset (implicit-hydrogen fill uses
# the lowest entry; anything above the highest entry is rejected).
DEFAULT_VALENCES = {
    5: (3,),          # B
    6: (4,),          # C
    7: (3, 5),        # N
    8: (2,),          # O
    15: (3, 5),       # P
    16: (2, 4, 6),    # S
    9: (1,), 17: (1,), 35: (1,), 53: (1,),
}

# Standard valences used by the valence-reduction step; the lowest entry
# is the reference for the "lowest standard valence plus two" test.
STANDARD_VALENCES = {
    5: (3,),           # B
    6: (4,),           # C
    7: (3,),           # N
    8: (2,),           # O
    9: (1,),           # F
    14: (4,),          # Si
    15: (3, 5),        # P
    16: (2, 4, 6),     # S
    17: (1, 3, 5, 7),  # Cl
    32: (4,),          # Ge
    33: (3, 5),        # As
    34: (2, 4, 6),     # Se
    35: (1, 3, 5, 7),  # Br
    52: (2, 4, 6),     # Te
    53: (1, 3, 5, 7),  # I
    85: (1, 3, 5, 7),  # At
}

VALENCE_REDUCTION_ELEMENTS = frozenset(STANDARD_VALENCES)

_GROUP_13 = {5, 13, 31, 49, 81}
_GROUP_14 = {6, 14, 32, 50, 82}
_GROUP_15 = {7, 15, 33, 51, 83}
_GROUP_16 = {8, 16, 34, 52, 84}
_GROUP_17 = {9, 17, 35, 53, 85}

_BASE_VALENCES = {
    **{z: (3,) for z in _GROUP_13},
    **{z: (4,) for z in _GROUP_14},
    **{z: (3, 5) for z in _GROUP_15},
    **{z: (2, 4, 6) for z in _GROUP_16},
    **{z: (1, 3, 5, 7) for z in _GROUP_17},
    1: (1,),
}


def charge_adjusted_valences(z: int, q: int) -> tuple[int, ...]:
    """Permitted total valences of element ``z`` carrying formal charge ``q``.

    Returns an empty tuple for elements without a table (metals), which
    callers treat as "no valence checking, no radical assignment".
    """
    base = _BASE_VALENCES.get(z)
    if base is None:
        return ()
    if z == 1:
        return (max(0, 1 - abs(q)),)
    if z in _GROUP_13:
        adjusted = (v - q for v in base)
    elif z in _GROUP_14:
        adjusted = (v - abs(q) for v in base)
    else:
        adjusted = (v + q for v in base)
    return tuple(sorted({v for v in adjusted if v >= 0}))
