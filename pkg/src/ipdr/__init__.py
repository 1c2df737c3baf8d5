"""SAT-based property-directed reachability with incremental state reuse
across families of constrained or relaxed transition-system instances."""

__version__ = "0.1.0"
