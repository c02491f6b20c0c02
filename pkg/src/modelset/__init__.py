"""Regular model sets from cut-and-project schemes: enumeration, Delone/FLC
checks, local topology and auto-correlation."""

__version__ = "0.1.0"
