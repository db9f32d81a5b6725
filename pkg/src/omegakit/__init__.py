"""omegakit: finite categories, pointed correspondences and structure sheaves.

The package is organized around exact, exhaustively validated finite data:

- fincat: categories, functors, natural transformations, derived constructions
- omega: the category of pointed categories and pointed correspondences
- sklim: limits and colimits weakened through a quotient functor
- enrich: weakly enriched sets and their hom enrichment
- ncat: the inductive tower of higher categories (levels 1..3)
- site: topologies, spec data and the structure-sheaf lift
- toyspec: finite commutative rings and their spectra
- pathcat: pre-categories, free paths and sweep normal forms
- cli / report: command-line front end and the acceptance report
"""

__version__ = "0.1.0"
