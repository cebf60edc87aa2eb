"""Finite workbench for back-and-forth trees, c.e. set codings and categoricity.

Subpackages and modules:

* ``catwork.structures``  finite relational structures, sorts, scrambling
* ``catwork.search``      isomorphism search, automorphisms and orbits
* ``catwork.logic``       first-order formulas, evaluation, EF games
* ``catwork.baf``         the trees A_n, E_n and the limit family
* ``catwork.effective``   c.e. sets and limitwise monotonic approximations
* ``catwork.coders``      the warmup, box and composite codings
* ``catwork.cli``         ``catwork build | verify | roundtrip``

Search kernels come from a compiled extension when present (see
``catwork.kernels.BACKEND``).
"""

__version__ = "0.1.0"
