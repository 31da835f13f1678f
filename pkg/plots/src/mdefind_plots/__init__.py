"""Static figure rendering for mdefind CSV outputs.

Read-only consumers of the solver package's file interfaces: each module
takes one CSV produced by the `mdefind` CLI and writes one SVG/PNG.
"""

__version__ = "0.1.0"
