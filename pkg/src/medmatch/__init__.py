"""Healthcare provider matching on top of a propositional satisfiability core.

Structured requirement queries are parsed into a small boolean DSL,
compiled together with a provider catalog into CNF (integer attributes
are bit-blasted), and decided by an embedded CDCL solver.  All matching
providers are enumerated; when nothing matches, minimal sets of
droppable requirements are suggested instead.
"""

__version__ = "0.1.0"
